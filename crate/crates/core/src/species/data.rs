use alloc::vec::Vec;

use crate::error::invalid;
use crate::Result;

/// Cluster sizes of an observed sample: `sizes[j]` individuals belong to
/// the j-th distinct species.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbundanceData {
    sizes: Vec<u64>,
    n: u64,
    /// `(size, count)` pairs when the data came in frequency form.
    frequencies: Option<Vec<(u64, u64)>>,
}

impl AbundanceData {
    pub fn from_sizes(sizes: Vec<u64>) -> Result<Self> {
        if let Some(j) = sizes.iter().position(|&m| m == 0) {
            return Err(invalid!("cluster {j} has size 0; sizes must be positive"));
        }
        let n = sizes
            .iter()
            .try_fold(0u64, |acc, &m| acc.checked_add(m))
            .ok_or_else(|| invalid!("total sample size overflows"))?;
        Ok(Self {
            sizes,
            n,
            frequencies: None,
        })
    }

    /// Build from size-frequency pairs `(i, r_i)`: `r_i` species were seen
    /// exactly `i` times. Pairs with `r_i = 0` are skipped.
    pub fn from_frequencies(pairs: &[(u64, u64)]) -> Result<Self> {
        let mut seen: Vec<u64> = Vec::with_capacity(pairs.len());
        let mut sizes = Vec::new();
        for &(size, count) in pairs {
            if size == 0 {
                return Err(invalid!("cluster size 0 in frequency table"));
            }
            if seen.contains(&size) {
                return Err(invalid!("cluster size {size} listed twice"));
            }
            seen.push(size);
            if count > 10_000_000 {
                return Err(crate::Error::TooLarge(alloc::format!(
                    "{count} clusters of size {size}"
                )));
            }
            sizes.extend(core::iter::repeat_n(size, count as usize));
        }
        let mut data = Self::from_sizes(sizes)?;
        data.frequencies = Some(pairs.iter().copied().filter(|p| p.1 > 0).collect());
        Ok(data)
    }

    /// The expressed-sequence-tag sample: 2586 tags in 1825 clusters.
    pub fn est() -> Self {
        const SIZES: [u64; 17] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 16, 23, 27];
        const COUNTS: [u64; 17] = [1434, 253, 71, 33, 11, 6, 2, 3, 1, 2, 2, 1, 1, 1, 2, 1, 1];
        let pairs: Vec<(u64, u64)> = SIZES.iter().copied().zip(COUNTS).collect();
        Self::from_frequencies(&pairs).expect("static table is valid")
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of distinct species.
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn frequencies(&self) -> Option<&[(u64, u64)]> {
        self.frequencies.as_deref()
    }
}
