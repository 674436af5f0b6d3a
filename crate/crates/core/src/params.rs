use crate::{Error, Result};

/// Salt used when none is supplied explicitly.
pub const DEFAULT_SALT: u64 = 0x5350_494e_414c_2d31;

/// Static description of a spinal code.
///
/// `n` message bits are cut into `n / k` segments of `k` bits. Every spine
/// value is `v` bits wide and every coded symbol carries `c` bits. `beam` is
/// the number of survivors kept per layer by the bubble decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParams {
    n: usize,
    k: usize,
    c: u32,
    v: u32,
    salt: u64,
    beam: usize,
}

impl CodeParams {
    /// Largest supported segment width. Decoders expand `2^k` children per node.
    pub const MAX_K: usize = 16;

    pub fn new(n: usize, k: usize, c: u32, v: u32, beam: usize) -> Result<Self> {
        if k == 0 || k > Self::MAX_K {
            return Err(Error::InvalidParams(format!(
                "k must lie in 1..={}, got {k}",
                Self::MAX_K
            )));
        }
        if n < k || n % k != 0 {
            return Err(Error::InvalidParams(format!(
                "n must be a positive multiple of k (n={n}, k={k})"
            )));
        }
        if !(1..=16).contains(&c) {
            return Err(Error::InvalidParams(format!("c must lie in 1..=16, got {c}")));
        }
        if !(16..=64).contains(&v) {
            return Err(Error::InvalidParams(format!("v must lie in 16..=64, got {v}")));
        }
        if beam == 0 {
            return Err(Error::InvalidParams("beam width must be at least 1".into()));
        }
        Ok(Self {
            n,
            k,
            c,
            v,
            salt: DEFAULT_SALT,
            beam,
        })
    }

    pub fn with_salt(mut self, salt: u64) -> Self {
        self.salt = salt;
        self
    }

    pub fn with_beam(mut self, beam: usize) -> Result<Self> {
        if beam == 0 {
            return Err(Error::InvalidParams("beam width must be at least 1".into()));
        }
        self.beam = beam;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn v(&self) -> u32 {
        self.v
    }

    pub fn salt(&self) -> u64 {
        self.salt
    }

    pub fn beam(&self) -> usize {
        self.beam
    }

    /// Number of segments, `n / k`.
    pub fn segments(&self) -> usize {
        self.n / self.k
    }

    /// Number of distinct values a segment can take.
    pub fn branching(&self) -> usize {
        1 << self.k
    }

    pub fn spine_mask(&self) -> u64 {
        if self.v == 64 {
            u64::MAX
        } else {
            (1u64 << self.v) - 1
        }
    }

    pub fn symbol_levels(&self) -> u64 {
        1u64 << self.c
    }
}
