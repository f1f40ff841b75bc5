use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

/// Timed event agenda at millisecond resolution. Events at the same instant
/// pop in insertion order.
#[derive(Debug)]
pub(crate) struct Agenda<E> {
    heap: BinaryHeap<Reverse<Slot<E>>>,
    seq: u64,
    popped: u64,
}

#[derive(Debug)]
struct Slot<E> {
    at_ms: i64,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Slot<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.at_ms, self.seq) == (other.at_ms, other.seq)
    }
}

impl<E> Eq for Slot<E> {}

impl<E> PartialOrd for Slot<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Slot<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.at_ms, self.seq).cmp(&(other.at_ms, other.seq))
    }
}

pub(crate) fn to_ms(t: f64) -> i64 {
    (t * 1000.0).round() as i64
}

impl<E> Agenda<E> {
    pub fn new() -> Self {
        Agenda {
            heap: BinaryHeap::new(),
            seq: 0,
            popped: 0,
        }
    }

    pub fn at(&mut self, t: f64, event: E) {
        self.seq += 1;
        self.heap.push(Reverse(Slot {
            at_ms: to_ms(t),
            seq: self.seq,
            event,
        }));
    }

    pub fn pop(&mut self) -> Option<(f64, E)> {
        let Reverse(slot) = self.heap.pop()?;
        self.popped += 1;
        Some((slot.at_ms as f64 / 1000.0, slot.event))
    }

    pub fn popped(&self) -> u64 {
        self.popped
    }
}
