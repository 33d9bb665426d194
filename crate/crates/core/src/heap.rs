use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Heap entry ordered by value, then by index, smallest first.
#[derive(Debug, Clone, Copy)]
struct Entry {
    value: f64,
    index: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-priority queue with lazy deletion.  Stale entries are left in the
/// heap and filtered by the caller against its own current labels.
#[derive(Debug, Default)]
pub(crate) struct MinHeap {
    heap: BinaryHeap<Entry>,
    pub(crate) pushes: usize,
    pub(crate) pops: usize,
}

impl MinHeap {
    pub(crate) fn with_capacity(capacity: usize) -> Self {
        Self {
            heap: BinaryHeap::with_capacity(capacity),
            pushes: 0,
            pops: 0,
        }
    }

    pub(crate) fn push(&mut self, value: f64, index: usize) {
        self.pushes += 1;
        self.heap.push(Entry { value, index });
    }

    pub(crate) fn pop(&mut self) -> Option<(f64, usize)> {
        let e = self.heap.pop()?;
        self.pops += 1;
        Some((e.value, e.index))
    }

    pub(crate) fn operations(&self) -> usize {
        self.pushes + self.pops
    }
}
