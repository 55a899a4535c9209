use std::collections::VecDeque;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::trace::{VideoFrame, VideoTrace};
use crate::{Micros, StationId};

/// Replays a trace from `origin`, looping with a period of one trace span.
#[derive(Debug, Clone)]
pub(crate) struct TrafficSource {
    trace: Arc<VideoTrace>,
    origin: Micros,
    cycle: u64,
    index: usize,
}

impl TrafficSource {
    pub(crate) fn new(trace: Arc<VideoTrace>, origin: Micros) -> Self {
        TrafficSource {
            trace,
            origin,
            cycle: 0,
            index: 0,
        }
    }

    /// Absolute arrival time and frame of the next frame to be generated.
    pub(crate) fn peek(&self) -> (Micros, &VideoFrame) {
        let frames = self.trace.frames();
        let frame = &frames[self.index];
        let offset = frame.arrival_time - frames[0].arrival_time;
        (self.origin + self.cycle * self.trace.span() + offset, frame)
    }

    pub(crate) fn advance(&mut self) {
        self.index += 1;
        if self.index == self.trace.len() {
            self.index = 0;
            self.cycle += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct QueuedFrame {
    pub(crate) gen_time: Micros,
    pub(crate) size: u32,
}

#[derive(Debug)]
pub(crate) struct StationState {
    pub(crate) id: StationId,
    pub(crate) queue: VecDeque<QueuedFrame>,
    pub(crate) source: TrafficSource,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) generated: u64,
    pub(crate) delivered: u64,
    pub(crate) dropped: u64,
}

impl StationState {
    pub(crate) fn new(id: StationId, trace: Arc<VideoTrace>, origin: Micros, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(id));
        StationState {
            id,
            queue: VecDeque::new(),
            source: TrafficSource::new(trace, origin),
            rng,
            generated: 0,
            delivered: 0,
            dropped: 0,
        }
    }

    /// Moves every frame generated at or before `now` (and before `horizon`)
    /// into the transmit queue.
    pub(crate) fn enqueue_arrivals(&mut self, now: Micros, horizon: Micros) {
        loop {
            let (at, frame) = self.source.peek();
            if at > now || at >= horizon {
                break;
            }
            self.queue.push_back(QueuedFrame {
                gen_time: at,
                size: frame.size,
            });
            self.generated += 1;
            self.source.advance();
        }
    }

    /// Size of the frame that will be sent after the current head of queue
    /// leaves, looking ahead into the trace when the queue runs dry.
    pub(crate) fn next_frame_size(&self) -> u32 {
        match self.queue.front() {
            Some(f) => f.size,
            None => self.source.peek().1.size,
        }
    }
}
