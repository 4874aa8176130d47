use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::invalid;
use crate::Result;

/// Generator used by every chain: ChaCha8, a counter-based stream cipher.
/// Distinct stream ids under the same seed give independent sequences.
pub type ChainRng = ChaCha8Rng;

/// Iteration budget and seed for one chain.
///
/// Iterations are numbered from 1. Iteration `i` is retained when
/// `i > burn_in` and `(i - burn_in) % thin == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSpec {
    pub total_iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// ChaCha stream id, used to run several chains from one seed.
    pub stream: u64,
}

impl ChainSpec {
    pub fn new(total_iterations: usize, burn_in: usize, thin: usize, seed: u64) -> Result<Self> {
        let spec = Self {
            total_iterations,
            burn_in,
            thin,
            seed,
            stream: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Build a spec from the number of draws to keep:
    /// `total = burn_in + retained * thin`.
    pub fn from_retained(retained: usize, burn_in: usize, thin: usize, seed: u64) -> Result<Self> {
        if retained == 0 {
            return Err(invalid!("retained draw count must be at least 1"));
        }
        if thin == 0 {
            return Err(invalid!("thin must be positive"));
        }
        Self::new(burn_in + retained * thin, burn_in, thin, seed)
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_iterations == 0 {
            return Err(invalid!("total_iterations must be positive"));
        }
        if self.thin == 0 {
            return Err(invalid!("thin must be positive"));
        }
        if self.burn_in >= self.total_iterations {
            return Err(invalid!(
                "burn_in ({}) must be smaller than total_iterations ({})",
                self.burn_in,
                self.total_iterations
            ));
        }
        if self.retained() == 0 {
            return Err(invalid!(
                "no draws retained: (total_iterations - burn_in) / thin = 0"
            ));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        (self.total_iterations - self.burn_in) / self.thin
    }

    #[inline]
    pub fn is_burn_in(&self, iteration: usize) -> bool {
        iteration <= self.burn_in
    }

    #[inline]
    pub fn is_retained(&self, iteration: usize) -> bool {
        iteration > self.burn_in && (iteration - self.burn_in).is_multiple_of(self.thin)
    }

    pub fn rng(&self) -> ChainRng {
        let mut rng = ChainRng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
