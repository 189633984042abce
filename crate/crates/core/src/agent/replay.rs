use alloc::vec::Vec;

use super::Experience;
use crate::rng::Xoshiro256;

/// Paper-scale replay capacity.
pub const DEFAULT_CAPACITY: usize = 50_000;

/// Fixed-capacity FIFO ring of experiences.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Experience>,
    /// Index of the oldest entry once the ring is full.
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            storage: Vec::with_capacity(capacity.min(4096)),
            head: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// Appends, evicting the oldest entry when full.
    pub fn push(&mut self, experience: Experience) {
        if self.storage.len() < self.capacity {
            self.storage.push(experience);
        } else {
            self.storage[self.head] = experience;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// Oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        let (newer, older) = self.storage.split_at(self.head);
        older.iter().chain(newer.iter())
    }

    /// `n` distinct entries drawn uniformly (all of them if fewer are stored).
    pub fn sample(&self, n: usize, rng: &mut Xoshiro256) -> Vec<&Experience> {
        let len = self.storage.len();
        let n = n.min(len);
        // Floyd's algorithm: n distinct indices with n draws.
        let mut picked: Vec<usize> = Vec::with_capacity(n);
        for j in (len - n)..len {
            let t = rng.index(j + 1);
            if picked.contains(&t) {
                picked.push(j);
            } else {
                picked.push(t);
            }
        }
        picked.into_iter().map(|i| &self.storage[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn exp(tag: usize) -> Experience {
        Experience {
            state: vec![tag as f64],
            action: 0,
            reward: tag as f64,
            next_state: vec![0.0],
            terminal: false,
        }
    }

    #[test]
    fn evicts_oldest_first_and_keeps_order() {
        let mut buf = ReplayBuffer::new(3);
        for i in 0..5 {
            buf.push(exp(i));
        }
        assert_eq!(buf.len(), 3);
        let order: Vec<f64> = buf.iter().map(|e| e.reward).collect();
        assert_eq!(order, [2.0, 3.0, 4.0]);
    }

    #[test]
    fn default_capacity_drops_exactly_the_first_insert() {
        let mut buf = ReplayBuffer::new(DEFAULT_CAPACITY);
        for i in 0..=DEFAULT_CAPACITY {
            buf.push(exp(i));
        }
        assert_eq!(buf.len(), DEFAULT_CAPACITY);
        assert!(buf.iter().all(|e| e.reward != 0.0));
        assert!(buf
            .iter()
            .zip(1..)
            .all(|(e, i)| e.reward == f64::from(i as u32)));
    }

    #[test]
    fn samples_are_distinct_and_bounded() {
        let mut buf = ReplayBuffer::new(100);
        for i in 0..40 {
            buf.push(exp(i));
        }
        let mut rng = Xoshiro256::seed_from_u64(1);
        let s = buf.sample(16, &mut rng);
        assert_eq!(s.len(), 16);
        let mut tags: Vec<u64> = s.iter().map(|e| e.reward as u64).collect();
        tags.sort_unstable();
        tags.dedup();
        assert_eq!(tags.len(), 16);
        assert_eq!(buf.sample(500, &mut rng).len(), 40);
    }

    #[test]
    fn sampling_is_roughly_uniform() {
        let mut buf = ReplayBuffer::new(10);
        for i in 0..10 {
            buf.push(exp(i));
        }
        let mut rng = Xoshiro256::seed_from_u64(2);
        let mut counts = [0usize; 10];
        for _ in 0..20_000 {
            for e in buf.sample(3, &mut rng) {
                counts[e.reward as usize] += 1;
            }
        }
        // Each index is expected 6000 times.
        for c in counts {
            assert!((5_600..6_400).contains(&c), "{counts:?}");
        }
    }
}
