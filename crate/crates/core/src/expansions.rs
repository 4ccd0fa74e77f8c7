//! Classic series expansions of rationals in `(0, 1)`.
//!
//! All three schemes pick digits greedily from the reciprocal of the
//! remainder: `d = floor(1/x) + 1`, except that an integer reciprocal ends
//! the expansion with `d = 1/x`. They differ in the remainder update:
//!
//! * Luroth:    `x' = d (d - 1) x - (d - 1)`
//! * Engel:     `x' = d x - 1`
//! * Sylvester: `x' = x - 1/d`
//!
//! Engel and Sylvester expansions of rationals always terminate; Luroth
//! expansions of rationals may cycle forever (for example `2/5` yields
//! digit 3 repeating), so expansion takes a digit budget.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::floor_int;

/// Series scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Luroth,
    Engel,
    Sylvester,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Luroth => "luroth",
            Scheme::Engel => "engel",
            Scheme::Sylvester => "sylvester",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "luroth" => Ok(Scheme::Luroth),
            "engel" => Ok(Scheme::Engel),
            "sylvester" => Ok(Scheme::Sylvester),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme {other:?}; expected luroth, engel or sylvester"
            ))),
        }
    }
}

/// Digit expansion of a rational, possibly truncated at a digit budget.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub scheme: Scheme,
    pub digits: Vec<BigInt>,
    /// True when the expansion ended exactly (zero remainder).
    pub terminated: bool,
    /// Remainder after the last emitted digit; zero iff terminated.
    pub remainder: BigRational,
}

fn check_open_unit(x: &BigRational) -> Result<()> {
    if x <= &BigRational::zero() || x >= &BigRational::one() {
        return Err(Error::Domain(format!(
            "expansion input must lie strictly between 0 and 1, got {}",
            crate::rational::format_rational(x)
        )));
    }
    Ok(())
}

/// Expands `x` into at most `max_digits` digits.
pub fn expand(scheme: Scheme, x: &BigRational, max_digits: usize) -> Result<Expansion> {
    check_open_unit(x)?;
    if max_digits == 0 {
        return Err(Error::InvalidConfig("digit budget must be >= 1".into()));
    }
    let mut digits = Vec::new();
    let mut rem = x.clone();
    while digits.len() < max_digits && !rem.is_zero() {
        let recip = rem.recip();
        let d = if recip.is_integer() {
            recip.to_integer()
        } else {
            floor_int(&recip) + BigInt::one()
        };
        rem = match scheme {
            Scheme::Luroth => {
                let d_minus = &d - BigInt::one();
                BigRational::from_integer(&d * &d_minus) * &rem
                    - BigRational::from_integer(d_minus)
            }
            Scheme::Engel => BigRational::from_integer(d.clone()) * &rem - BigRational::one(),
            Scheme::Sylvester => &rem - BigRational::from_integer(d.clone()).recip(),
        };
        digits.push(d);
    }
    Ok(Expansion {
        scheme,
        digits,
        terminated: rem.is_zero(),
        remainder: rem,
    })
}

fn check_digits(scheme: Scheme, digits: &[BigInt]) -> Result<()> {
    let two = BigInt::from(2);
    for d in digits {
        if d < &two {
            return Err(Error::Domain(format!(
                "{} digits for values in (0, 1) must be >= 2, got {d}",
                scheme.name()
            )));
        }
    }
    Ok(())
}

/// Value of the finite series with the given digits.
pub fn reconstruct(scheme: Scheme, digits: &[BigInt]) -> Result<BigRational> {
    check_digits(scheme, digits)?;
    let mut total = BigRational::zero();
    let mut weight = BigRational::one();
    for d in digits {
        let d_rat = BigRational::from_integer(d.clone());
        match scheme {
            Scheme::Luroth => {
                total += &weight * d_rat.recip();
                let d_minus = d - BigInt::one();
                weight /= BigRational::from_integer(d * d_minus);
            }
            Scheme::Engel => {
                weight /= d_rat;
                total += &weight;
            }
            Scheme::Sylvester => {
                total += d_rat.recip();
            }
        }
    }
    Ok(total)
}

/// Weight multiplying the remainder after the listed digits, so that
/// `x = reconstruct(digits) + tail_weight(digits) * remainder` exactly.
pub fn tail_weight(scheme: Scheme, digits: &[BigInt]) -> Result<BigRational> {
    check_digits(scheme, digits)?;
    let mut weight = BigRational::one();
    for d in digits {
        match scheme {
            Scheme::Luroth => {
                weight /= BigRational::from_integer(d * (d - BigInt::one()));
            }
            Scheme::Engel => {
                weight /= BigRational::from_integer(d.clone());
            }
            Scheme::Sylvester => {}
        }
    }
    Ok(weight)
}

/// Normalized ratios of consecutive digits under the scheme's chain
/// embedding. Luroth digits shift by one (`B_n = d_n - 1`) and the ratio is
/// the next chain digit; Engel uses `d_{n+1} / d_n`; Sylvester uses
/// `d_{n+1} / (d_n + d_n^2)`.
pub fn ratio_stream(scheme: Scheme, digits: &[BigInt]) -> Result<Vec<BigRational>> {
    check_digits(scheme, digits)?;
    let mut ratios = Vec::new();
    for w in digits.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        let r = match scheme {
            Scheme::Luroth => BigRational::from_integer(next - BigInt::one()),
            Scheme::Engel => BigRational::new(next.clone(), prev.clone()),
            Scheme::Sylvester => BigRational::new(next.clone(), prev * prev + prev),
        };
        ratios.push(r);
    }
    Ok(ratios)
}
