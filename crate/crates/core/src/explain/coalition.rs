use std::fmt;

/// A subset of token positions `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coalition {
    n: usize,
    words: Vec<u64>,
}

impl Coalition {
    pub fn empty(n: usize) -> Self {
        Coalition {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut c = Self::empty(n);
        c.insert_span(0, n);
        c
    }

    /// Coalition from the low `n` bits of `mask`.
    ///
    /// # Panics
    /// If `n > 64` or `mask` has bits at or above `n`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "from_mask supports at most 64 players");
        assert!(n == 64 || mask >> n == 0, "mask {mask:#b} exceeds {n} players");
        let mut c = Self::empty(n);
        if n > 0 {
            c.words[0] = mask;
        }
        c
    }

    /// Low 64 members as a bit mask; `None` above 64 players.
    pub fn to_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn n_players(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n, "player {i} out of range for {} players", self.n);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.n {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    /// Adds every position in `start..end`.
    pub fn insert_span(&mut self, start: usize, end: usize) {
        assert!(end <= self.n, "span end {end} out of range for {} players", self.n);
        for i in start..end {
            self.words[i / 64] |= 1 << (i % 64);
        }
    }

    pub fn with_span(&self, start: usize, end: usize) -> Self {
        let mut c = self.clone();
        c.insert_span(start, end);
        c
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Members in increasing order.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&i| self.contains(i))
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}
