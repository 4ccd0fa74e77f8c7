//! Good sequences: increasing integer lattices carrying the discretized
//! ratios.
//!
//! A good sequence `lambda_1 < lambda_2 < ...` of positive integers has
//! bounded gaps; the gap bound `ell` controls the discretization error.
//! Two shapes are supported: arithmetic (`lambda_j = kappa * j`) and an
//! explicit head with an arithmetic tail. By convention `lambda_0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discretization direction relative to the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoundDirection {
    /// Smallest lattice point at or above the value.
    Up,
    /// Largest lattice point at or below the value.
    Down,
}

/// Increasing integer lattice with bounded gaps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoodSequence {
    /// `lambda_j = kappa * j`.
    Arithmetic { kappa: u64 },
    /// Listed head values, then steps of `tail_step` past the last one.
    Explicit { values: Vec<u64>, tail_step: u64 },
}

impl GoodSequence {
    /// The positive integers, `lambda_j = j`.
    pub fn naturals() -> Self {
        GoodSequence::Arithmetic { kappa: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GoodSequence::Arithmetic { kappa } => {
                if *kappa == 0 {
                    Err(Error::InvalidConfig("lattice step must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
            GoodSequence::Explicit { values, tail_step } => {
                if values.is_empty() {
                    return Err(Error::InvalidConfig("empty lattice head".into()));
                }
                if values[0] == 0 {
                    return Err(Error::InvalidConfig("lattice points must be >= 1".into()));
                }
                if values.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidConfig("lattice head must increase".into()));
                }
                if *tail_step == 0 {
                    return Err(Error::InvalidConfig("lattice tail step must be >= 1".into()));
                }
                Ok(())
            }
        }
    }

    /// `lambda_j`; index 0 maps to the conventional `lambda_0 = 0`.
    pub fn value(&self, j: u64) -> u64 {
        if j == 0 {
            return 0;
        }
        match self {
            GoodSequence::Arithmetic { kappa } => kappa * j,
            GoodSequence::Explicit { values, tail_step } => {
                let head = values.len() as u64;
                if j <= head {
                    values[(j - 1) as usize]
                } else {
                    values[values.len() - 1] + (j - head) * tail_step
                }
            }
        }
    }

    /// Upper bound `ell` on consecutive gaps `lambda_{j+1} - lambda_j`
    /// (including the leading gap `lambda_1 - 0`).
    pub fn gap_bound(&self) -> u64 {
        match self {
            GoodSequence::Arithmetic { kappa } => *kappa,
            GoodSequence::Explicit { values, tail_step } => {
                let mut ell = values[0];
                for w in values.windows(2) {
                    ell = ell.max(w[1] - w[0]);
                }
                ell.max(*tail_step)
            }
        }
    }

    /// Next lattice point strictly above `x` (`lambda_{s+1}` when
    /// `x = lambda_s`; for off-lattice `x` the smallest point above it).
    pub fn successor(&self, x: u64) -> u64 {
        match self {
            GoodSequence::Arithmetic { kappa } => x + kappa - x % kappa,
            GoodSequence::Explicit { values, tail_step } => {
                let last = values[values.len() - 1];
                if x >= last {
                    return x + tail_step - (x - last) % tail_step;
                }
                match values.binary_search(&x) {
                    Ok(i) => values[i + 1],
                    Err(i) => values[i],
                }
            }
        }
    }

    /// Membership test.
    pub fn contains(&self, x: u64) -> bool {
        if x == 0 {
            return false;
        }
        match self {
            GoodSequence::Arithmetic { kappa } => x % kappa == 0,
            GoodSequence::Explicit { values, tail_step } => {
                let last = values[values.len() - 1];
                if x <= last {
                    values.binary_search(&x).is_ok()
                } else {
                    (x - last) % tail_step == 0
                }
            }
        }
    }

    /// Index and value of the smallest lattice point at or above `u >= 1`:
    /// returns `(j, lambda_j)` with `lambda_{j-1} < u <= lambda_j`.
    pub fn index_at_or_above(&self, u: f64) -> Result<(u64, u64)> {
        if !(u >= 1.0) || !u.is_finite() {
            return Err(Error::Domain(format!(
                "lattice lookup needs a finite value >= 1, got {u}"
            )));
        }
        let mut j = match self {
            GoodSequence::Arithmetic { kappa } => {
                ((u / *kappa as f64).ceil() as u64).max(1)
            }
            GoodSequence::Explicit { values, tail_step } => {
                let last = values[values.len() - 1];
                if u <= last as f64 {
                    let target = u.ceil() as u64;
                    match values.binary_search(&target) {
                        Ok(i) => i as u64 + 1,
                        Err(i) => i as u64 + 1,
                    }
                } else {
                    let over = (u - last as f64) / *tail_step as f64;
                    values.len() as u64 + (over.ceil() as u64).max(1)
                }
            }
        };
        // Float division can land one index off near exact multiples; the
        // comparisons below are exact for lattice values within 2^53.
        while j > 1 && self.value(j - 1) as f64 >= u {
            j -= 1;
        }
        while (self.value(j) as f64) < u {
            j += 1;
        }
        Ok((j, self.value(j)))
    }

    /// Smallest lattice point at or above `u` (domain `u >= 1`).
    pub fn round_up(&self, u: f64) -> Result<u64> {
        Ok(self.index_at_or_above(u)?.1)
    }

    /// Largest lattice point at or below `u` (domain `u >= lambda_1`).
    pub fn round_down(&self, u: f64) -> Result<u64> {
        let lambda1 = self.value(1);
        if !(u >= lambda1 as f64) || !u.is_finite() {
            return Err(Error::Domain(format!(
                "downward rounding needs a value >= first lattice point {lambda1}, got {u}"
            )));
        }
        let (j, lam) = self.index_at_or_above(u)?;
        if lam as f64 <= u {
            Ok(lam)
        } else {
            Ok(self.value(j - 1))
        }
    }

    /// Rounds in the requested direction.
    pub fn round(&self, u: f64, direction: RoundDirection) -> Result<u64> {
        match direction {
            RoundDirection::Up => self.round_up(u),
            RoundDirection::Down => self.round_down(u),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naturals_round_trip() {
        let nat = GoodSequence::naturals();
        assert_eq!(nat.value(7), 7);
        assert_eq!(nat.gap_bound(), 1);
        // A value already on the lattice maps to itself.
        assert_eq!(nat.index_at_or_above(7.0).unwrap(), (7, 7));
        assert_eq!(nat.round_up(7.3).unwrap(), 8);
        assert_eq!(nat.round_down(7.3).unwrap(), 7);
    }

    #[test]
    fn arithmetic_steps() {
        let tri = GoodSequence::Arithmetic { kappa: 3 };
        assert_eq!(tri.value(4), 12);
        assert_eq!(tri.index_at_or_above(7.0).unwrap(), (3, 9));
        assert_eq!(tri.index_at_or_above(9.0).unwrap(), (3, 9));
        assert_eq!(tri.round_down(9.0).unwrap(), 9);
        assert_eq!(tri.round_down(8.999).unwrap(), 6);
        assert!(tri.contains(9));
        assert!(!tri.contains(10));
        assert!(tri.round_down(2.0).is_err());
    }

    #[test]
    fn explicit_head_with_tail() {
        let seq = GoodSequence::Explicit {
            values: vec![1, 2, 5, 6],
            tail_step: 2,
        };
        seq.validate().unwrap();
        assert_eq!(seq.value(3), 5);
        assert_eq!(seq.value(5), 8);
        assert_eq!(seq.value(7), 12);
        assert_eq!(seq.gap_bound(), 3);
        assert_eq!(seq.index_at_or_above(3.0).unwrap(), (3, 5));
        assert_eq!(seq.index_at_or_above(6.5).unwrap(), (5, 8));
        assert_eq!(seq.round_down(7.9).unwrap(), 6);
        assert!(seq.contains(10));
        assert!(!seq.contains(3));
    }

    #[test]
    fn successor_steps_through_every_shape() {
        let nat = GoodSequence::naturals();
        assert_eq!(nat.successor(7), 8);
        let tri = GoodSequence::Arithmetic { kappa: 3 };
        assert_eq!(tri.successor(9), 12);
        assert_eq!(tri.successor(7), 9);
        let seq = GoodSequence::Explicit {
            values: vec![1, 2, 5, 6],
            tail_step: 2,
        };
        for (x, next) in [(1, 2), (2, 5), (3, 5), (6, 8), (8, 10), (9, 10)] {
            assert_eq!(seq.successor(x), next, "x={x}");
        }
        // Index shift by one along the whole sequence.
        for j in 1..40 {
            assert_eq!(seq.successor(seq.value(j)), seq.value(j + 1));
        }
    }

    #[test]
    fn domain_errors_below_range() {
        let nat = GoodSequence::naturals();
        assert!(nat.index_at_or_above(0.5).is_err());
        assert!(nat.index_at_or_above(f64::NAN).is_err());
        assert!(nat.round_down(0.9).is_err());
    }

    #[test]
    fn validation_rejects_degenerate_shapes() {
        assert!(GoodSequence::Arithmetic { kappa: 0 }.validate().is_err());
        assert!(GoodSequence::Explicit {
            values: vec![],
            tail_step: 1
        }
        .validate()
        .is_err());
        assert!(GoodSequence::Explicit {
            values: vec![2, 2],
            tail_step: 1
        }
        .validate()
        .is_err());
        assert!(GoodSequence::Explicit {
            values: vec![0, 1],
            tail_step: 1
        }
        .validate()
        .is_err());
        assert!(GoodSequence::Explicit {
            values: vec![1, 4],
            tail_step: 0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn rounding_consistent_with_membership_on_a_sweep() {
        let seq = GoodSequence::Explicit {
            values: vec![2, 3, 7],
            tail_step: 4,
        };
        for i in 20..400 {
            let u = i as f64 / 10.0;
            let up = seq.round_up(u).unwrap();
            assert!(seq.contains(up) && up as f64 >= u);
            assert!(up as f64 - u < seq.gap_bound() as f64);
            if u >= 2.0 {
                let down = seq.round_down(u).unwrap();
                assert!(seq.contains(down) && down as f64 <= u);
                assert!(u - down as f64 + 1e-12 >= 0.0);
                assert!(u - (down as f64) < seq.gap_bound() as f64);
            }
        }
    }
}
