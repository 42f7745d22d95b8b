//! Seeded random stream.
//!
//! The generator is SplitMix64: the state advances by the golden-ratio
//! increment `0x9E3779B97F4A7C15` and each output is the standard
//! `(z ^ z>>30) * 0xBF58476D1CE4E5B9`, `(z ^ z>>27) * 0x94D049BB133111EB`,
//! `z ^ z>>31` finaliser. Floats take the top 53 bits. Every draw is pure
//! integer arithmetic, so a seed yields the same sequence on every platform.
//!
//! The planner consumes draws in a frozen order:
//! size, margins, grid, pairing, alignment, paragraph mark, header layout,
//! features, cover colour. Draws are consumed even when a field is pinned so
//! that pinning one attribute never shifts the values drawn for the others.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Single-owner deterministic random stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeededStream {
    seed: u64,
    counter: u64,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        SeededStream { seed, counter: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.counter
    }

    /// Derives an independent stream for a named stage (pagination, cover, ...).
    pub fn fork(&self, label: &str) -> SeededStream {
        // FNV-1a over the label, folded into the parent seed.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        SeededStream::new(mix(self.seed ^ h))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.seed.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi]` (degenerate when `lo == hi`).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.next_f64();
        lo + (hi - lo) * u
    }

    /// Uniform integer in `0..n`; `n` must be non-zero.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        // Lemire's multiply-shift; bias is < 2^-32 for the small n used here.
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    /// Bernoulli draw.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Index drawn proportionally to non-negative weights. Returns `None`
    /// when every weight is zero. Always consumes exactly one draw.
    pub fn weighted_index(&mut self, weights: &[f64]) -> Option<usize> {
        let u = self.next_f64();
        let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
        if total <= 0.0 {
            return None;
        }
        let mut target = u * total;
        let mut last = None;
        for (i, w) in weights.iter().enumerate() {
            if *w <= 0.0 {
                continue;
            }
            last = Some(i);
            if target < *w {
                return Some(i);
            }
            target -= *w;
        }
        last
    }

    /// Picks an element uniformly; consumes one draw even for a single option.
    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> Option<&'a T> {
        if items.is_empty() {
            self.next_u64();
            return None;
        }
        let i = self.below(items.len());
        items.get(i)
    }
}

/// Derives a follow-up seed from a previous one (used by `regenerate`).
pub fn next_seed(seed: u64) -> u64 {
    mix(seed.wrapping_add(GAMMA))
}
