//! Centering constants and moment integrals for trimmed-sum laws.
//!
//! The normalizing function is `a(x) = x ln x` with inverse `b`. Centering
//! sequences and the moment integrals
//!
//! ```text
//! J_s = integral over x >= 1 of [F(1/x)]^s d(b(x)^s)
//! ```
//!
//! are evaluated here; `J_{r+1} < infinity` is the admissibility condition
//! for trimming depth `r`.

use std::sync::OnceLock;

use crate::dist::DistKind;
use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, QuadResult};

/// Upper endpoint (in `v = ln y` coordinates) for the numeric part of the
/// moment integrals; beyond it the integrand is within its asymptotic regime
/// and the tail is added in closed form.
const TAIL_SPLIT: f64 = 60.0;

/// The normalization `a(x) = x ln x` and its inverse.
#[derive(Debug, Default)]
pub struct Normalizer {
    b1: OnceLock<f64>,
}

impl Normalizer {
    pub fn new() -> Self {
        Self::default()
    }

    /// `a(x) = x ln x` for `x >= 1`.
    pub fn a(&self, x: f64) -> f64 {
        debug_assert!(x >= 1.0);
        x * x.ln()
    }

    /// Inverse of `a` on `[0, infinity)`, by Newton iteration from `1 + y`.
    pub fn b(&self, y: f64) -> f64 {
        debug_assert!(y >= 0.0);
        if y == 0.0 {
            return 1.0;
        }
        let mut x = 1.0 + y;
        for _ in 0..64 {
            let step = (x * x.ln() - y) / (x.ln() + 1.0);
            x -= step;
            if x < 1.0 {
                x = 1.0;
            }
            if step.abs() <= 1e-16 * x {
                break;
            }
        }
        x
    }

    /// `b(1)`, the root of `x ln x = 1`; also `1 / ln b(1)`.
    pub fn b_at_one(&self) -> f64 {
        *self.b1.get_or_init(|| self.b(1.0))
    }
}

/// Centering constant for the once-trimmed sum normalized by `n ln n`:
///
/// ```text
/// c_n = (1 / ln n) * integral over 1 <= x <= tau n ln n of x d{P(T <= x)}
/// ```
///
/// with `P(T > x) = F(1/x)`. Any `tau > 0` gives an admissible centering;
/// different choices shift `c_n` by `o(1)`.
pub fn centering(n: u64, f: &DistKind, tau: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "centering requires n >= 2, got {n}"
        )));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!(
            "centering cutoff tau must be a positive finite number, got {tau}"
        )));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let a = tau * nf * ln_n;
    if let DistKind::Linear = f {
        // The integral collapses: c_n = 1 + (ln ln n + ln tau) / ln n.
        return Ok(1.0 + (ln_n.ln() + tau.ln()) / ln_n);
    }
    // Integration by parts:
    //   c_n = (1/ln n) [ 1 - a F(1/a) + integral 1..a of F(1/x) dx ]
    // then x = e^u to tame the long domain.
    let boundary = 1.0 - a * f.eval_f64(1.0 / a);
    let integral = adaptive_simpson(
        |u| f.eval_f64((-u).exp()) * u.exp(),
        0.0,
        a.ln(),
        1e-10,
        1e-12,
        48,
    );
    if !integral.converged {
        return Err(Error::QuadratureTolerance {
            achieved: integral.error_estimate,
            requested: 1e-10,
        });
    }
    Ok((boundary + integral.value) / ln_n)
}

/// Moment integral report.
#[derive(Debug, Clone)]
pub struct MoriIntegral {
    pub s: u32,
    /// Whether `J_s` is finite for this distribution.
    pub finite: bool,
    /// Numeric value when finite, `f64::INFINITY` otherwise.
    pub value: f64,
    /// Closed-form tail added beyond the quadrature window.
    pub tail: f64,
    pub quad: Option<QuadResult>,
}

/// Evaluates `J_s` for an identical ratio law `P(T > x) = F(1/x)`.
///
/// After `y = b(x)` and `v = ln y` the integral becomes
/// `integral of s w(v)^s dv` over `v >= ln b(1)` with
/// `w(v) = e^v F(e^{-v} / v)`. Since `w(v) -> alpha / v`, the integral is
/// finite exactly when `s >= 2`, or when `s = 1` and `alpha = 0`.
pub fn mori_integral(s: u32, f: &DistKind, norm: &Normalizer) -> Result<MoriIntegral> {
    if s == 0 {
        return Err(Error::Domain("moment integral order s must be >= 1".into()));
    }
    let alpha = f.alpha();
    let finite = s >= 2 || alpha == 0.0;
    if !finite {
        return Ok(MoriIntegral {
            s,
            finite,
            value: f64::INFINITY,
            tail: f64::INFINITY,
            quad: None,
        });
    }
    let w = |v: f64| v.exp() * f.eval_f64((-v).exp() / v);
    let sf = s as f64;
    let lower = norm.b_at_one().ln();
    let quad = adaptive_simpson(|v| sf * w(v).powi(s as i32), lower, TAIL_SPLIT, 1e-10, 1e-13, 48);
    if !quad.converged {
        return Err(Error::QuadratureTolerance {
            achieved: quad.error_estimate,
            requested: 1e-10,
        });
    }
    // Beyond the window w(v) ~ a_V / v with a_V fitted at the split point.
    let a_v = w(TAIL_SPLIT) * TAIL_SPLIT;
    let tail = if s >= 2 {
        sf * a_v.powi(s as i32) * TAIL_SPLIT.powf(1.0 - sf) / (sf - 1.0)
    } else {
        // s = 1 with alpha = 0: the integrand decays faster than 1/v and the
        // leftover mass is below the split-point value scale.
        sf * w(TAIL_SPLIT)
    };
    Ok(MoriIntegral {
        s,
        finite,
        value: quad.value + tail,
        tail,
        quad: Some(quad),
    })
}
