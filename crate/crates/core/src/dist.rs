//! Distribution families `F_n` on the unit interval.
//!
//! Each `F` is a distribution function with `F(0) = 0` and `F(1) = 1`,
//! evaluated exactly on rationals for law computations and on floats for
//! quadrature. The small-argument slope `alpha = lim F(t)/t` controls tail
//! normalization; for every supported kind the limit exists.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{clamp_unit, rational_to_f64};

/// One distribution function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistKind {
    /// `F(t) = t`.
    Linear,
    /// `F(t) = c_1 t + c_2 t^2 + ... + c_d t^d` (coefficient `i` scales `t^i`).
    Polynomial {
        #[serde(with = "crate::rational::serde_rational_vec")]
        coefficients: Vec<BigRational>,
    },
    /// Piecewise linear through knots `(t_i, F(t_i))` from `(0,0)` to `(1,1)`.
    PiecewiseLinear { knots: Vec<Knot> },
}

/// A `(t, F(t))` pair of a piecewise linear distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Knot {
    #[serde(with = "crate::rational::serde_rational")]
    pub t: BigRational,
    #[serde(with = "crate::rational::serde_rational")]
    pub v: BigRational,
}

impl DistKind {
    /// Exact evaluation; arguments are clamped into `[0, 1]` first.
    pub fn eval_rat(&self, t: &BigRational) -> BigRational {
        let t = clamp_unit(t.clone());
        match self {
            DistKind::Linear => t,
            DistKind::Polynomial { coefficients } => {
                let mut acc = BigRational::zero();
                for c in coefficients.iter().rev() {
                    acc = (acc + c) * &t;
                }
                clamp_unit(acc)
            }
            DistKind::PiecewiseLinear { knots } => {
                let mut lo = &knots[0];
                for hi in &knots[1..] {
                    if t <= hi.t {
                        let span = &hi.t - &lo.t;
                        let rise = &hi.v - &lo.v;
                        return clamp_unit(&lo.v + rise * (t - &lo.t) / span);
                    }
                    lo = hi;
                }
                knots.last().expect("validated nonempty").v.clone()
            }
        }
    }

    /// Float evaluation for quadrature and reporting.
    pub fn eval_f64(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            DistKind::Linear => t,
            DistKind::Polynomial { coefficients } => {
                let mut acc = 0.0;
                for c in coefficients.iter().rev() {
                    acc = (acc + rational_to_f64(c)) * t;
                }
                acc.clamp(0.0, 1.0)
            }
            DistKind::PiecewiseLinear { knots } => {
                let mut lo = &knots[0];
                for hi in &knots[1..] {
                    let (t0, t1) = (rational_to_f64(&lo.t), rational_to_f64(&hi.t));
                    if t <= t1 {
                        let (v0, v1) = (rational_to_f64(&lo.v), rational_to_f64(&hi.v));
                        return (v0 + (v1 - v0) * (t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                    }
                    lo = hi;
                }
                1.0
            }
        }
    }

    /// Exact slope of `F` at the origin, `lim_{t -> 0+} F(t)/t`.
    pub fn alpha_rat(&self) -> BigRational {
        match self {
            DistKind::Linear => BigRational::one(),
            DistKind::Polynomial { coefficients } => coefficients
                .first()
                .cloned()
                .unwrap_or_else(BigRational::zero),
            DistKind::PiecewiseLinear { knots } => {
                let first = &knots[1];
                &first.v / &first.t
            }
        }
    }

    /// Float form of [`DistKind::alpha_rat`].
    pub fn alpha(&self) -> f64 {
        rational_to_f64(&self.alpha_rat())
    }

    fn validate(&self) -> Result<()> {
        match self {
            DistKind::Linear => Ok(()),
            DistKind::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::InvalidConfig("empty polynomial coefficients".into()));
                }
                let total: BigRational = coefficients.iter().cloned().sum();
                if total != BigRational::one() {
                    return Err(Error::InvalidConfig(format!(
                        "polynomial distribution must satisfy F(1) = 1, got {}",
                        crate::rational::format_rational(&total)
                    )));
                }
                // Monotonicity and range are certified on a dyadic grid with
                // the raw polynomial (eval_rat clamps, which would mask an
                // excursion above one); fine-grained oscillation between grid
                // points is outside the contract.
                let step = BigRational::new(BigInt::one(), BigInt::from(256));
                let one = BigRational::one();
                let mut prev = BigRational::zero();
                let mut t = BigRational::zero();
                for _ in 0..=256 {
                    let mut v = BigRational::zero();
                    for c in coefficients.iter().rev() {
                        v = (v + c) * &t;
                    }
                    if v < BigRational::zero() || v > one {
                        return Err(Error::InvalidConfig(
                            "polynomial distribution leaves [0, 1]".into(),
                        ));
                    }
                    if v < prev {
                        return Err(Error::InvalidConfig(
                            "polynomial distribution decreases on [0, 1]".into(),
                        ));
                    }
                    prev = v;
                    t += &step;
                }
                Ok(())
            }
            DistKind::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidConfig("need at least two knots".into()));
                }
                let first = knots.first().expect("nonempty");
                let last = knots.last().expect("nonempty");
                if !first.t.is_zero() || !first.v.is_zero() {
                    return Err(Error::InvalidConfig("first knot must be (0, 0)".into()));
                }
                if last.t != BigRational::one() || last.v != BigRational::one() {
                    return Err(Error::InvalidConfig("last knot must be (1, 1)".into()));
                }
                for pair in knots.windows(2) {
                    if pair[1].t <= pair[0].t {
                        return Err(Error::InvalidConfig("knot abscissas must increase".into()));
                    }
                    if pair[1].v < pair[0].v {
                        return Err(Error::InvalidConfig("knot values must not decrease".into()));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Possibly index-dependent sequence of distributions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistributionFamily {
    /// The same `F` at every index (the common case).
    Identical(DistKind),
    /// `F_n` cycling through a fixed list with the index (1-based).
    Periodic(Vec<DistKind>),
}

impl DistributionFamily {
    pub fn linear() -> Self {
        DistributionFamily::Identical(DistKind::Linear)
    }

    pub fn polynomial(coefficients: Vec<BigRational>) -> Result<Self> {
        let fam = DistributionFamily::Identical(DistKind::Polynomial { coefficients });
        fam.validate()?;
        Ok(fam)
    }

    pub fn piecewise_linear(knots: Vec<Knot>) -> Result<Self> {
        let fam = DistributionFamily::Identical(DistKind::PiecewiseLinear { knots });
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionFamily::Identical(kind) => kind.validate(),
            DistributionFamily::Periodic(kinds) => {
                if kinds.is_empty() {
                    return Err(Error::InvalidConfig("empty distribution cycle".into()));
                }
                kinds.iter().try_for_each(DistKind::validate)
            }
        }
    }

    /// Distribution acting at 1-based chain index `n`.
    pub fn at(&self, n: u64) -> &DistKind {
        match self {
            DistributionFamily::Identical(kind) => kind,
            DistributionFamily::Periodic(kinds) => {
                let p = kinds.len() as u64;
                &kinds[((n - 1) % p) as usize]
            }
        }
    }

    /// True when every index uses the same distribution.
    pub fn is_identical(&self) -> bool {
        match self {
            DistributionFamily::Identical(_) => true,
            DistributionFamily::Periodic(kinds) => kinds.windows(2).all(|w| w[0] == w[1]),
        }
    }

    /// The single distribution of an identical family.
    pub fn identical_kind(&self) -> Result<&DistKind> {
        if self.is_identical() {
            Ok(self.at(1))
        } else {
            Err(Error::InvalidConfig(
                "operation requires an index-independent distribution family".into(),
            ))
        }
    }

    /// Common origin slope when all member distributions agree on it.
    pub fn alpha_limit(&self) -> Option<f64> {
        let first = self.at(1).alpha_rat();
        match self {
            DistributionFamily::Identical(_) => Some(rational_to_f64(&first)),
            DistributionFamily::Periodic(kinds) => {
                if kinds.iter().all(|k| k.alpha_rat() == first) {
                    Some(rational_to_f64(&first))
                } else {
                    None
                }
            }
        }
    }

    /// Supremum over indices of the origin slope; finite for all kinds here.
    pub fn ratio_bound(&self) -> f64 {
        match self {
            DistributionFamily::Identical(kind) => kind.alpha(),
            DistributionFamily::Periodic(kinds) => kinds
                .iter()
                .map(DistKind::alpha)
                .fold(0.0f64, f64::max),
        }
    }

    /// Period of the index dependence (1 for identical families).
    pub fn period(&self) -> u64 {
        match self {
            DistributionFamily::Identical(_) => 1,
            DistributionFamily::Periodic(kinds) => kinds.len() as u64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat_frac, rat_int};

    fn knot(t: BigRational, v: BigRational) -> Knot {
        Knot { t, v }
    }

    #[test]
    fn linear_is_identity_on_unit_interval() {
        let f = DistKind::Linear;
        assert_eq!(f.eval_rat(&rat_frac(1, 3)), rat_frac(1, 3));
        assert_eq!(f.eval_rat(&rat_int(2)), rat_int(1));
        assert_eq!(f.eval_rat(&rat_int(-1)), rat_int(0));
        assert_eq!(f.alpha(), 1.0);
    }

    #[test]
    fn quadratic_distribution_evaluates_exactly() {
        // F(t) = t^2
        let f = DistKind::Polynomial {
            coefficients: vec![rat_int(0), rat_int(1)],
        };
        assert_eq!(f.eval_rat(&rat_frac(1, 2)), rat_frac(1, 4));
        assert_eq!(f.alpha(), 0.0);
        assert_eq!(f.eval_f64(0.5), 0.25);
    }

    #[test]
    fn mixed_polynomial_keeps_unit_mass() {
        // F(t) = (t + t^3) / 2
        let f = DistributionFamily::polynomial(vec![rat_frac(1, 2), rat_int(0), rat_frac(1, 2)])
            .unwrap();
        assert_eq!(f.at(1).eval_rat(&rat_int(1)), rat_int(1));
        assert_eq!(f.at(1).eval_rat(&rat_frac(1, 2)), rat_frac(5, 16));
        assert_eq!(f.ratio_bound(), 0.5);
    }

    #[test]
    fn polynomial_validation_rejects_bad_mass_and_decrease() {
        assert!(DistributionFamily::polynomial(vec![rat_frac(1, 2)]).is_err());
        // F(t) = 2t - t^2 has F(1) = 1 but F'(1) = 0; fine. A decreasing
        // example: F(t) = 3t - 2t^2 decreases past t = 3/4 on [0, 1].
        assert!(DistributionFamily::polynomial(vec![rat_int(3), rat_int(-2)]).is_err());
        assert!(DistributionFamily::polynomial(vec![rat_int(2), rat_int(-1)]).is_ok());
    }

    #[test]
    fn piecewise_linear_interpolates_between_knots() {
        let f = DistributionFamily::piecewise_linear(vec![
            knot(rat_int(0), rat_int(0)),
            knot(rat_frac(1, 4), rat_frac(1, 2)),
            knot(rat_int(1), rat_int(1)),
        ])
        .unwrap();
        let kind = f.at(3);
        assert_eq!(kind.eval_rat(&rat_frac(1, 8)), rat_frac(1, 4));
        assert_eq!(kind.eval_rat(&rat_frac(5, 8)), rat_frac(3, 4));
        assert_eq!(kind.alpha(), 2.0);
        assert!((kind.eval_f64(0.125) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn piecewise_validation_rejects_bad_endpoints() {
        assert!(DistributionFamily::piecewise_linear(vec![
            knot(rat_int(0), rat_int(0)),
            knot(rat_frac(1, 2), rat_frac(3, 4)),
        ])
        .is_err());
        assert!(DistributionFamily::piecewise_linear(vec![
            knot(rat_frac(1, 8), rat_int(0)),
            knot(rat_int(1), rat_int(1)),
        ])
        .is_err());
    }

    #[test]
    fn periodic_family_cycles_and_reports_alpha() {
        let fam = DistributionFamily::Periodic(vec![
            DistKind::Linear,
            DistKind::Polynomial {
                coefficients: vec![rat_int(0), rat_int(1)],
            },
        ]);
        fam.validate().unwrap();
        assert_eq!(fam.at(1), &DistKind::Linear);
        assert_ne!(fam.at(2), &DistKind::Linear);
        assert_eq!(fam.at(3), &DistKind::Linear);
        assert!(!fam.is_identical());
        assert_eq!(fam.alpha_limit(), None);
        assert_eq!(fam.ratio_bound(), 1.0);
        assert!(fam.identical_kind().is_err());
    }
}
