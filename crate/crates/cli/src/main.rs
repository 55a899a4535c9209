use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hcca_core::batch::sweep;
use hcca_core::metrics::summarize;
use hcca_core::report::{fmt_g6, remove_all, write_events, write_per_si_txop, write_summary_tables, RunRow, EVENTS_CSV};
use hcca_core::scenario::{load_trace, Scenario};
use hcca_core::trace::{compute_stats, emit_trace, generate_synthetic};
use hcca_core::tspec::derive_tspec;
use hcca_core::{run, Error, Micros, SchedulerKind};

#[derive(Parser)]
#[command(name = "hcca", version, about = "HCCA polling simulator for uplink video")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print frame statistics of a trace file.
    Stats {
        trace: PathBuf,
        #[command(flatten)]
        interval: Interval,
    },
    /// Derive a TSPEC from a trace file.
    Tspec {
        trace: PathBuf,
        /// Maximum service interval, microseconds.
        #[arg(long)]
        msi: Micros,
        /// Delay bound, microseconds.
        #[arg(long)]
        delay_bound: Micros,
        /// Physical rate, bits/s.
        #[arg(long)]
        rate: u64,
        #[command(flatten)]
        interval: Interval,
    },
    /// Run one scenario and write CSV results.
    Simulate {
        scenario: PathBuf,
        /// Overrides the scenario's scheduler.
        #[arg(long)]
        scheduler: Option<SchedulerKind>,
        /// Overrides the scenario's station count.
        #[arg(long)]
        stations: Option<usize>,
        /// Also write the full event log.
        #[arg(long)]
        events: bool,
        /// Output directory; defaults to the scenario's output_dir.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run both schedulers over the scenario's station-count range.
    Sweep {
        scenario: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic lognormal trace.
    Gen {
        /// Mean frame size, bytes.
        #[arg(long)]
        mean: f64,
        /// Coefficient of variation of frame sizes.
        #[arg(long)]
        cov: f64,
        #[arg(long)]
        frames: usize,
        /// Frame interval, milliseconds.
        #[arg(long, default_value_t = 40)]
        interval: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct Interval {
    /// Frame interval of the trace, microseconds.
    #[arg(long = "interval-us", default_value_t = 40_000)]
    interval_us: Micros,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Stats { trace, interval } => stats(&trace, interval.interval_us),
        Command::Tspec { trace, msi, delay_bound, rate, interval } => {
            let t = load_trace(&trace, interval.interval_us)?;
            let tspec = derive_tspec(&t, msi, delay_bound, rate)?;
            println!("nominal_msdu_bytes {}", tspec.nominal_msdu);
            println!("max_msdu_bytes {}", tspec.max_msdu);
            println!("mean_rate_bps {}", tspec.mean_rate);
            println!("delay_bound_us {}", tspec.delay_bound);
            println!("phy_rate_bps {}", tspec.phy_rate);
            println!("max_service_interval_us {}", tspec.max_service_interval);
            Ok(())
        }
        Command::Simulate { scenario, scheduler, stations, events, output } => {
            let sc = Scenario::load(&scenario)?;
            let kind = scheduler.unwrap_or(sc.scheduler);
            let cfg = sc.config(stations.unwrap_or(sc.stations), kind)?;
            let result = run(&cfg)?;
            let rows = vec![RunRow::new(&result, summarize(&result))];
            let dir = output_dir(output, &sc)?;
            let mut written = write_summary_tables(&dir, &rows)?;
            let rest = write_per_si_txop(&dir, &rows).and_then(|p| {
                written.push(p);
                if events {
                    let path = dir.join(EVENTS_CSV);
                    written.push(path.clone());
                    write_events(&path, &result.log)?;
                }
                Ok(())
            });
            if let Err(e) = rest {
                remove_all(&written);
                return Err(e);
            }
            report(&rows[0]);
            Ok(())
        }
        Command::Sweep { scenario, output } => {
            let sc = Scenario::load(&scenario)?;
            let rows = sweep(&sc)?;
            let dir = output_dir(output, &sc)?;
            write_summary_tables(&dir, &rows)?;
            for row in &rows {
                report(row);
            }
            Ok(())
        }
        Command::Gen { mean, cov, frames, interval, seed, output } => {
            if interval == 0 {
                return Err(Error::Config("frame interval must be positive".into()));
            }
            let trace = generate_synthetic(mean, cov, frames, interval * 1000, seed)?;
            let text = emit_trace(&trace)?;
            fs::write(&output, text).map_err(|source| Error::Io { path: output, source })
        }
    }
}

fn stats(path: &Path, interval: Micros) -> Result<(), Error> {
    let trace = load_trace(path, interval)?;
    let s = compute_stats(&trace);
    println!("trace,frames,mean_size_bytes,max_size_bytes,cov,mean_bit_rate_bps,peak_bit_rate_bps,peak_mean_ratio");
    println!(
        "{},{},{:.2},{},{:.2},{},{},{:.2}",
        trace.name,
        s.frame_count,
        s.mean_size,
        s.max_size,
        s.cov,
        fmt_g6(s.mean_bit_rate),
        fmt_g6(s.peak_bit_rate),
        s.peak_mean_ratio
    );
    Ok(())
}

fn output_dir(output: Option<PathBuf>, sc: &Scenario) -> Result<PathBuf, Error> {
    let dir = output.unwrap_or_else(|| sc.output_dir.clone());
    fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
    Ok(dir)
}

fn report(row: &RunRow) {
    let delay = row.metrics.mean_e2e_delay.map_or_else(|| "nan".to_string(), fmt_g6);
    println!(
        "{:<4} n={:<2} admitted={} delay={} s throughput={} b/s txop={} s",
        row.scheduler,
        row.stations,
        row.admitted,
        delay,
        fmt_g6(row.metrics.aggregate_throughput),
        fmt_g6(row.metrics.aggregate_txop)
    );
}
