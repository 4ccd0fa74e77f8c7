//! Coefficient families `phi_n(h)` driving the conditional digit law.
//!
//! The family fixes the minimum admissible next digit `ceil(phi_n(h))` and
//! the scale of the normalized ratio. Three shapes cover the classic series
//! schemes and the periodic example:
//!
//! * `Constant`: `phi_n(h) = c` for all `n, h`.
//! * `PowerSum`: `phi_n(h) = sum h^k` over `k = k0..=m` with `k0` either 0
//!   or 1. `m = 0` with the zero term is the Luroth shape (`phi = 1`),
//!   `m = 1` without it is the Engel shape (`phi = h`), `m = 2` without it
//!   is the Sylvester shape (`phi = h + h^2`).
//! * `ReciprocalPeriodic`: `phi_n = 1/a_j` cycling through fixed positive
//!   integers `a_1..a_p` with period `p` (independent of `h`).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient family `phi_n(h)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiFamily {
    /// `phi_n(h) = value` for every index and digit.
    Constant {
        #[serde(with = "crate::rational::serde_rational")]
        value: BigRational,
    },
    /// `phi_n(h) = sum_{k} h^k`, `k` from 0 or 1 up to `m`.
    PowerSum { m: u32, include_zero_term: bool },
    /// `phi_n = 1 / a_{((n-1) mod p) + 1}` for positive integers `a_j`.
    ReciprocalPeriodic { denominators: Vec<u64> },
}

impl PhiFamily {
    /// Luroth shape: `phi = 1`.
    pub fn luroth() -> Self {
        PhiFamily::PowerSum {
            m: 0,
            include_zero_term: true,
        }
    }

    /// Engel shape: `phi(h) = h`.
    pub fn engel() -> Self {
        PhiFamily::PowerSum {
            m: 1,
            include_zero_term: false,
        }
    }

    /// Sylvester shape: `phi(h) = h + h^2`.
    pub fn sylvester() -> Self {
        PhiFamily::PowerSum {
            m: 2,
            include_zero_term: false,
        }
    }

    /// Checks structural admissibility: positivity for every `n, h >= 1`.
    pub fn validate(&self) -> Result<()> {
        match self {
            PhiFamily::Constant { value } => {
                if value.is_positive() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig("constant phi must be positive".into()))
                }
            }
            PhiFamily::PowerSum { m, include_zero_term } => {
                if *m == 0 && !include_zero_term {
                    Err(Error::InvalidConfig(
                        "power_sum with m = 0 needs the zero term, otherwise phi = 0".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            PhiFamily::ReciprocalPeriodic { denominators } => {
                if denominators.is_empty() {
                    Err(Error::InvalidConfig("empty period list for phi".into()))
                } else if denominators.contains(&0) {
                    Err(Error::InvalidConfig("phi periods must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Evaluates `phi_n(h)` for a 1-based chain index `n` and digit `h >= 1`.
    pub fn eval(&self, n: u64, h: &BigInt) -> BigRational {
        match self {
            PhiFamily::Constant { value } => value.clone(),
            PhiFamily::PowerSum { m, include_zero_term } => {
                let mut acc = if *include_zero_term {
                    BigInt::one()
                } else {
                    BigInt::zero()
                };
                let mut term = BigInt::one();
                for _ in 1..=*m {
                    term *= h;
                    acc += &term;
                }
                BigRational::from_integer(acc)
            }
            PhiFamily::ReciprocalPeriodic { denominators } => {
                let p = denominators.len() as u64;
                let a = denominators[((n - 1) % p) as usize];
                BigRational::new(BigInt::one(), BigInt::from(a))
            }
        }
    }

    /// Period of the index dependence (1 when `phi_n` does not vary with `n`).
    pub fn period(&self) -> u64 {
        match self {
            PhiFamily::ReciprocalPeriodic { denominators } => denominators.len() as u64,
            _ => 1,
        }
    }

    /// Whether `phi_n(h)` is an integer for every index and digit.
    ///
    /// Integrality is exactly the condition that the smallest admissible
    /// digit carries the full remaining mass, i.e. that conditional laws
    /// are proper for a distribution with `F(1) = 1`.
    pub fn is_integer_valued(&self) -> bool {
        match self {
            PhiFamily::Constant { value } => value.is_integer(),
            PhiFamily::PowerSum { .. } => true,
            PhiFamily::ReciprocalPeriodic { denominators } => {
                denominators.iter().all(|&a| a == 1)
            }
        }
    }

    /// Least common multiple of the reciprocal periods, the natural lattice
    /// step for periodic families; 1 for index-free families.
    pub fn natural_kappa(&self) -> u64 {
        match self {
            PhiFamily::ReciprocalPeriodic { denominators } => {
                denominators.iter().copied().fold(1u64, lcm)
            }
            _ => 1,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat_frac, rat_int};

    #[test]
    fn power_sum_shapes_match_named_series() {
        let h = BigInt::from(3);
        assert_eq!(PhiFamily::luroth().eval(1, &h), rat_int(1));
        assert_eq!(PhiFamily::engel().eval(1, &h), rat_int(3));
        assert_eq!(PhiFamily::sylvester().eval(1, &h), rat_int(12));
        let deep = PhiFamily::PowerSum {
            m: 3,
            include_zero_term: true,
        };
        // 1 + 3 + 9 + 27
        assert_eq!(deep.eval(7, &h), rat_int(40));
    }

    #[test]
    fn reciprocal_periodic_cycles_one_based() {
        let phi = PhiFamily::ReciprocalPeriodic {
            denominators: vec![2, 3],
        };
        let h = BigInt::from(5);
        assert_eq!(phi.eval(1, &h), rat_frac(1, 2));
        assert_eq!(phi.eval(2, &h), rat_frac(1, 3));
        assert_eq!(phi.eval(3, &h), rat_frac(1, 2));
        assert_eq!(phi.eval(4, &h), rat_frac(1, 3));
        assert_eq!(phi.period(), 2);
        assert_eq!(phi.natural_kappa(), 6);
    }

    #[test]
    fn integrality_detection() {
        assert!(PhiFamily::luroth().is_integer_valued());
        assert!(PhiFamily::sylvester().is_integer_valued());
        assert!(PhiFamily::Constant { value: rat_int(2) }.is_integer_valued());
        assert!(!PhiFamily::Constant {
            value: rat_frac(3, 2)
        }
        .is_integer_valued());
        assert!(!PhiFamily::ReciprocalPeriodic {
            denominators: vec![2, 3]
        }
        .is_integer_valued());
    }

    #[test]
    fn validation_rejects_degenerate_families() {
        assert!(PhiFamily::Constant { value: rat_int(0) }.validate().is_err());
        assert!(PhiFamily::PowerSum {
            m: 0,
            include_zero_term: false
        }
        .validate()
        .is_err());
        assert!(PhiFamily::ReciprocalPeriodic {
            denominators: vec![]
        }
        .validate()
        .is_err());
        assert!(PhiFamily::ReciprocalPeriodic {
            denominators: vec![2, 0]
        }
        .validate()
        .is_err());
        assert!(PhiFamily::engel().validate().is_ok());
    }
}
