use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::invalid;
use crate::special::log_add_exp;
use crate::Result;

/// Largest row of the Stirling table.
pub const MAX_STIRLING_ROW: usize = 200;

/// ln |s(l, k)| for 0 ≤ k ≤ l ≤ `max_row`, unsigned Stirling numbers of the
/// first kind, from |s(l+1,k)| = l |s(l,k)| + |s(l,k−1)|.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    max_row: usize,
    // Row l occupies l+1 entries starting at l(l+1)/2.
    values: Vec<f64>,
}

impl StirlingTable {
    pub fn new(max_row: usize) -> Result<Self> {
        if max_row > MAX_STIRLING_ROW {
            return Err(crate::Error::TooLarge(alloc::format!(
                "Stirling table up to row {max_row}; the limit is {MAX_STIRLING_ROW}"
            )));
        }
        let mut values = Vec::with_capacity((max_row + 1) * (max_row + 2) / 2);
        values.push(0.0); // |s(0,0)| = 1
        for l in 0..max_row {
            let prev = l * (l + 1) / 2;
            let ln_l = (l as f64).ln();
            for k in 0..=l + 1 {
                let stay = if k <= l {
                    ln_l + values[prev + k]
                } else {
                    f64::NEG_INFINITY
                };
                let from_left = if k >= 1 {
                    values[prev + k - 1]
                } else {
                    f64::NEG_INFINITY
                };
                values.push(log_add_exp(stay, from_left));
            }
        }
        Ok(Self { max_row, values })
    }

    pub fn max_row(&self) -> usize {
        self.max_row
    }

    /// ln |s(l, k)|; −∞ where the number is zero.
    pub fn ln(&self, l: usize, k: usize) -> Result<f64> {
        if k > l || l > self.max_row {
            return Err(invalid!(
                "Stirling index ({l}, {k}) outside 0 <= k <= l <= {}",
                self.max_row
            ));
        }
        Ok(self.values[l * (l + 1) / 2 + k])
    }
}

/// ln |s(l, k)| from a freshly built table.
pub fn stirling_first_signless_log(l: usize, k: usize) -> Result<f64> {
    if l > MAX_STIRLING_ROW {
        return Err(invalid!("Stirling row {l} exceeds {MAX_STIRLING_ROW}"));
    }
    StirlingTable::new(l)?.ln(l, k)
}
