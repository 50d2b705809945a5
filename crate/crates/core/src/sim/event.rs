use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// What happens at an event instant. Indices refer to the scenario's flow and
/// method lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    DataPacket { flow: usize },
    ProbePacket { method: usize },
    ExportPacket { method: usize },
    FailureStart,
    SimEnd,
}

impl EventKind {
    /// Tie-break rank at equal timestamps.
    fn priority(self) -> u8 {
        match self {
            EventKind::DataPacket { .. } => 0,
            EventKind::ProbePacket { .. } => 1,
            EventKind::ExportPacket { .. } => 2,
            EventKind::FailureStart => 3,
            EventKind::SimEnd => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    /// Wire size in bits (zero for control events).
    pub size: u64,
    /// Emitting source and its packet index.
    pub source: usize,
    pub index: u64,
    seq: u64,
}

impl Event {
    pub fn seq(&self) -> u64 {
        self.seq
    }
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.kind.priority().cmp(&other.kind.priority()))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue ordered by (time, kind priority, insertion sequence).
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<std::cmp::Reverse<Event>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, kind: EventKind, size: u64, source: usize, index: u64) {
        debug_assert!(time >= 0.0);
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(std::cmp::Reverse(Event {
            time,
            kind,
            size,
            source,
            index,
            seq,
        }));
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|r| r.0)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
