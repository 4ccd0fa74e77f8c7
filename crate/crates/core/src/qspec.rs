//! Perturbation sequences `q_n >= 0` entering the ratio normalization.

use num::rational::BigRational;
use num::{BigInt, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Specification of the nonnegative perturbation sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum QSpec {
    /// `q_n = 0`: ratios reduce to `B_{n+1} / phi_n(B_n)`.
    Zero,
    /// `q_n = value` for every index.
    Constant {
        #[serde(with = "crate::rational::serde_rational")]
        value: BigRational,
    },
    /// `q_n` cycles through nonnegative integers (1-based index).
    LatticePeriodic { values: Vec<u64> },
}

impl QSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            QSpec::Zero => Ok(()),
            QSpec::Constant { value } => {
                if value.is_negative() {
                    Err(Error::InvalidConfig("q must be nonnegative".into()))
                } else {
                    Ok(())
                }
            }
            QSpec::LatticePeriodic { values } => {
                if values.is_empty() {
                    Err(Error::InvalidConfig("empty q period list".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Value at 1-based chain index `n`.
    pub fn eval(&self, n: u64) -> BigRational {
        match self {
            QSpec::Zero => BigRational::zero(),
            QSpec::Constant { value } => value.clone(),
            QSpec::LatticePeriodic { values } => {
                let p = values.len() as u64;
                BigRational::from_integer(BigInt::from(values[((n - 1) % p) as usize]))
            }
        }
    }

    /// Period of the index dependence (1 when constant).
    pub fn period(&self) -> u64 {
        match self {
            QSpec::LatticePeriodic { values } => values.len() as u64,
            _ => 1,
        }
    }
}
