//! Digit and ratio samplers.
//!
//! Two backends share one random-stream contract:
//!
//! * **Exact**: carries the digit chain as big integers. Each step draws
//!   `u` in `(0, 1)` and inverts the conditional survival function:
//!   `B_{n+1}` is the largest `k >= k_min` with `F(delta(h, k, q)) >= u`,
//!   equivalently the unique `k` with
//!   `F(delta(h, k+1, q)) < u <= F(delta(h, k, q))`, comparing against
//!   survival values rounded to `f64`. The returned ratio is an exact
//!   (possibly unreduced) rational.
//! * **Lattice**: draws the downward-discretized ratio directly from its
//!   cell masses on a certified lattice, avoiding big integers entirely.
//!   The draw inverts the cumulative law: the result is `lambda_s` for the
//!   smallest `s` with `1 - F(1/lambda_{s+1}) >= u`. Draws above
//!   `1 - 1e-15` are truncated to bound the output, which perturbs the law
//!   by less than `1e-15` per step.
//!
//! Inversions start from a closed-form hint where one exists and finish
//! with gallop-and-bisect searches, so deep tail draws (where many
//! consecutive survival values round to the same float) stay logarithmic.
//! Streams are spawned per `(seed, path_id)` and reproduce independently
//! of order and thread count.

use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One};
use rand_chacha::ChaCha8Rng;

use crate::dist::DistKind;
use crate::error::{Error, Result};
use crate::lattice::GoodSequence;
use crate::model::{DigitLaw, InitialRule, OppenheimModel};
use crate::rational::{big_ratio_to_f64, rational_from_f64, rational_to_f64};
use crate::rng;

/// Sampling backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Exact,
    Lattice,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Lattice => "lattice",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "lattice" => Ok(Backend::Lattice),
            other => Err(Error::InvalidConfig(format!(
                "unknown backend {other:?}; expected exact or lattice"
            ))),
        }
    }
}

/// One exact-backend transition.
#[derive(Debug, Clone)]
pub struct ExactStep {
    /// The next chain digit `B_{n+1}`.
    pub next_digit: BigInt,
    /// The normalized ratio `R_n`, exact but possibly unreduced; compare
    /// via [`BigRational::reduced`] or convert with [`ExactStep::ratio_f64`].
    pub ratio: BigRational,
}

impl ExactStep {
    pub fn ratio_f64(&self) -> f64 {
        big_ratio_to_f64(self.ratio.numer(), self.ratio.denom())
    }
}

/// Survival value `P(B_next >= k)` rounded to a float. All sampler
/// comparisons go through this single rounding so that hinted and
/// unhinted inversions agree bit for bit.
///
/// For linear `F` the value is computed from an unreduced fraction: the
/// rounding is determined by the fraction's value alone, and skipping the
/// gcd keeps deep exact chains (digits of 10^5 bits and more) at linear
/// cost per probe.
fn survival_f64(law: &DigitLaw, k: &BigInt) -> f64 {
    if law.dist() == &DistKind::Linear {
        // delta = p (a + b) / (k r b + p a) for phi = p/r, q = a/b.
        let (p, r) = (law.phi_h().numer(), law.phi_h().denom());
        let (a, b) = (law.q().numer(), law.q().denom());
        let numer = p * (a + b);
        let denom = k * r * b + p * a;
        return big_ratio_to_f64(&numer, &denom).min(1.0);
    }
    rational_to_f64(&law.survival_geq(k))
}

/// Largest `k >= min_k` satisfying a nonincreasing predicate that is true
/// at `min_k` and eventually false. Probes from `hint` outward by
/// doubling, then bisects, so runtime is logarithmic in the distance and
/// in plateau lengths.
fn largest_true(pred: impl Fn(&BigInt) -> bool, min_k: &BigInt, hint: BigInt) -> BigInt {
    let hint = hint.max(min_k.clone());
    let mut step = BigInt::one();
    let (mut lo, mut hi);
    if pred(&hint) {
        lo = hint;
        hi = &lo + &step;
        while pred(&hi) {
            lo = hi;
            step = &step + &step;
            hi = &lo + &step;
        }
    } else {
        hi = hint;
        lo = std::cmp::max(&hi - &step, min_k.clone());
        while &lo > min_k && !pred(&lo) {
            step = &step + &step;
            lo = std::cmp::max(&hi - &step, min_k.clone());
        }
        if !pred(&lo) {
            // Defensive: the precondition promises pred(min_k).
            return min_k.clone();
        }
    }
    // Invariant: pred(lo) true, pred(hi) false.
    while &lo + BigInt::one() < hi {
        let mid = (&lo + &hi) / 2;
        if pred(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Inverts the survival bracket for one conditional law.
fn sample_from_law(law: &DigitLaw, u: f64) -> Result<BigInt> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!(
            "uniform variate must lie in (0, 1], got {u}"
        )));
    }
    let hint = if law.dist() == &DistKind::Linear {
        // Closed form k = floor(phi (1 + q) / u - phi q), evaluated in
        // integer arithmetic (u = c/d is dyadic); the float bracket below
        // moves it at most a few units. Avoiding rational reduction keeps
        // the step cost linear in the digit size.
        let u_rat = rational_from_f64(u)?;
        let (p, r) = (law.phi_h().numer(), law.phi_h().denom());
        let (a, b) = (law.q().numer(), law.q().denom());
        let (c, d) = (u_rat.numer(), u_rat.denom());
        let numer = p * ((a + b) * d - a * c);
        let denom = r * b * c;
        numer.div_floor(&denom)
    } else {
        law.k_min().clone()
    };
    Ok(largest_true(
        |k| survival_f64(law, k) >= u,
        law.k_min(),
        hint,
    ))
}

/// Draws the next digit given `B_n = h` from the variate `u`.
///
/// The model must be proper; the inversion is the survival bracket
/// described at module level.
pub fn sample_digit(model: &OppenheimModel, n: u64, h: &BigInt, u: f64) -> Result<BigInt> {
    if !model.is_proper() {
        return Err(Error::ImproperModel(
            "sampling requires conditional masses that sum to one".into(),
        ));
    }
    let law = model.conditional_law_unchecked(n, h)?;
    sample_from_law(&law, u)
}

/// Largest index whose successor lattice value still fits under `cap`.
fn max_index_under_cap(lattice: &GoodSequence, cap: u64) -> Result<u64> {
    let bound = match lattice {
        GoodSequence::Arithmetic { kappa } => (cap / kappa).checked_sub(1),
        GoodSequence::Explicit { values, tail_step } => {
            let head = values.len() as u64;
            let last = values[values.len() - 1];
            if last > cap {
                let fitting = values.iter().take_while(|&&v| v <= cap).count() as u64;
                fitting.checked_sub(1)
            } else {
                Some(head + (cap - last) / tail_step)
                    .and_then(|j| j.checked_sub(1))
            }
        }
    };
    bound.ok_or_else(|| {
        Error::CapExceeded(format!("no lattice point fits under cap {cap}"))
    })
}

/// Draws a downward-discretized ratio on the lattice from the variate `u`.
///
/// Returns `lambda_s` (with `lambda_0 = 0` for the below-lattice cell).
/// Draws that would need lattice values beyond `cap` raise
/// [`Error::CapExceeded`].
pub fn lattice_draw(lattice: &GoodSequence, f: &DistKind, u: f64, cap: u64) -> Result<u64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "uniform variate must lie in (0, 1), got {u}"
        )));
    }
    let u = u.min(1.0 - 1e-15);
    let cum = |s: u64| -> f64 {
        let lam = lattice.value(s + 1);
        if matches!(f, DistKind::Linear) {
            return 1.0 - 1.0 / lam as f64;
        }
        let lam = BigRational::from_integer(BigInt::from(lam));
        1.0 - rational_to_f64(&f.eval_rat(&lam.recip()))
    };
    let pred = |s: u64| cum(s) >= u;
    if pred(0) {
        return Ok(lattice.value(0));
    }
    let s_max = max_index_under_cap(lattice, cap)?;
    if !pred(s_max) {
        return Err(Error::CapExceeded(format!(
            "lattice draw beyond representable cap {cap}"
        )));
    }
    let hint = match (f, lattice) {
        (DistKind::Linear, GoodSequence::Arithmetic { kappa }) => {
            // cum(s) = 1 - 1/(kappa (s+1)); the float bracket fixes the
            // inversion up afterwards.
            let guess = (1.0 / (*kappa as f64 * (1.0 - u))).ceil();
            if guess.is_finite() && guess >= 2.0 {
                ((guess as u64) - 1).min(s_max)
            } else {
                1
            }
        }
        _ => 1,
    };
    // Smallest s in [1, s_max] with pred(s); pred is nondecreasing,
    // pred(0) false, pred(s_max) true.
    let (mut lo, mut hi);
    let mut step = 1u64;
    if pred(hint) {
        hi = hint;
        lo = hi - step.min(hi);
        while lo > 0 && pred(lo) {
            step = step.saturating_mul(2);
            lo = hi - step.min(hi);
        }
        if pred(lo) {
            hi = lo;
        }
    } else {
        lo = hint;
        hi = lo.saturating_add(step).min(s_max);
        while !pred(hi) {
            lo = hi;
            step = step.saturating_mul(2);
            hi = lo.saturating_add(step).min(s_max);
        }
    }
    // Invariant: pred(lo) false (or hi == lo == answer), pred(hi) true.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lattice.value(hi))
}

/// A reproducible sample path of the digit chain.
pub struct PathStream {
    model: Arc<OppenheimModel>,
    backend: Backend,
    seed: u64,
    path_id: u64,
    rng: ChaCha8Rng,
    digit: Option<BigInt>,
    emitted: u64,
    cap: u64,
}

impl PathStream {
    /// Creates the stream for `(seed, path_id)`. Spawning never fails;
    /// model problems surface on the first draw.
    pub fn spawn(model: Arc<OppenheimModel>, backend: Backend, seed: u64, path_id: u64) -> Self {
        PathStream {
            rng: rng::stream_rng(seed, path_id),
            model,
            backend,
            seed,
            path_id,
            digit: None,
            emitted: 0,
            cap: i64::MAX as u64,
        }
    }

    pub fn model(&self) -> &OppenheimModel {
        &self.model
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_id(&self) -> u64 {
        self.path_id
    }

    /// Number of ratios emitted so far.
    pub fn steps_emitted(&self) -> u64 {
        self.emitted
    }

    /// Current chain digit (exact backend, after the first step).
    pub fn current_digit(&self) -> Option<&BigInt> {
        self.digit.as_ref()
    }

    fn require_proper(&self) -> Result<()> {
        if self.model.is_proper() {
            Ok(())
        } else {
            Err(Error::ImproperModel(
                "sampling requires conditional masses that sum to one".into(),
            ))
        }
    }

    fn ensure_initial(&mut self) -> Result<()> {
        if self.digit.is_some() {
            return Ok(());
        }
        let first = match self.model.initial_rule() {
            InitialRule::Fixed(h) => h.clone(),
            InitialRule::VirtualZeroth => {
                let law = self.model.initial_law();
                let u = rng::unit_open(&mut self.rng);
                sample_from_law(&law, u)?
            }
        };
        self.digit = Some(first);
        Ok(())
    }

    /// Advances one exact transition, returning `(B_{n+1}, R_n)`.
    pub fn next(&mut self) -> Result<ExactStep> {
        if self.backend != Backend::Exact {
            return Err(Error::BackendMismatch(
                "exact transition requested from a lattice stream".into(),
            ));
        }
        self.require_proper()?;
        let n = self.emitted + 1;
        if let Some(limit) = self.model.exact_envelope() {
            if n > limit {
                return Err(Error::EnvelopeExceeded {
                    requested: n,
                    limit,
                    hint: "switch to the lattice backend for long chains".into(),
                });
            }
        }
        self.ensure_initial()?;
        let h = self.digit.take().expect("initialized above");
        let law = self.model.conditional_law_unchecked(n, &h)?;
        let u = rng::unit_open(&mut self.rng);
        let k = sample_from_law(&law, u)?;
        let ratio = unreduced_ratio(&law, &k);
        self.digit = Some(k.clone());
        self.emitted = n;
        Ok(ExactStep {
            next_digit: k,
            ratio,
        })
    }

    /// Advances one lattice transition, returning the discretized ratio.
    pub fn next_lattice(&mut self) -> Result<u64> {
        if self.backend != Backend::Lattice {
            return Err(Error::BackendMismatch(
                "lattice draw requested from an exact stream".into(),
            ));
        }
        self.require_proper()?;
        self.model.certify_lattice()?;
        let n = self.emitted + 1;
        let u = rng::unit_open(&mut self.rng);
        let lattice = self.model.lattice().expect("certified above");
        let f = self.model.f_at(n);
        let v = lattice_draw(lattice, f, u, self.cap)?;
        self.emitted = n;
        Ok(v)
    }
}

/// Builds `R = (k + phi q) / (phi (1 + q))` without reducing, so huge
/// digit chains avoid quadratic gcd costs. With `phi = p/r` and
/// `q = a/b`: `R = (k r b + p a) / (p (a + b))`.
fn unreduced_ratio(law: &DigitLaw, k: &BigInt) -> BigRational {
    let (p, r) = (law.phi_h().numer(), law.phi_h().denom());
    let (a, b) = (law.q().numer(), law.q().denom());
    let numer = k * r * b + p * a;
    let denom = p * (a + b);
    BigRational::new_raw(numer, denom)
}
