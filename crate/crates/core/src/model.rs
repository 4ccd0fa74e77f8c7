//! The generalized Oppenheim model: conditional digit laws, normalized
//! ratios and lattice certification.
//!
//! Given the current digit `B_n = h`, the next digit takes value `k` with
//! probability `F_n(delta_n(h, k, q_n)) - F_n(delta_n(h, k+1, q_n))` where
//!
//! ```text
//! delta_j(h, k, q) = phi_j(h) * (1 + q) / (k + phi_j(h) * q)
//! ```
//!
//! The admissible digits are `k >= ceil(phi_n(h))`, and the normalized
//! ratio of a step is `R_n = 1 / delta_n(B_n, B_{n+1}, q_n) >= 1`. When
//! `phi_n(h)` is an integer for all `h` the conditional masses telescope to
//! one; otherwise the model is improper and only analytic operations apply.

use std::sync::OnceLock;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::Serialize;

use crate::dist::{DistKind, DistributionFamily};
use crate::error::{Error, Result};
use crate::lattice::GoodSequence;
use crate::phi::PhiFamily;
use crate::qspec::QSpec;
use crate::rational::{ceil_int, format_rational};

/// How the first digit `B_1` is produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum InitialRule {
    /// `B_1` is drawn from the law of a virtual zeroth step with
    /// `phi = 1`, `q = 0`: `P(B_1 = k) = F(1/k) - F(1/(k+1))` for `k >= 1`.
    VirtualZeroth,
    /// `B_1` is a fixed digit.
    Fixed(#[serde(serialize_with = "serialize_bigint")] BigInt),
}

fn serialize_bigint<S: serde::Serializer>(
    v: &BigInt,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&v.to_string())
}

/// Indexing convention for the discretized-ratio density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityConvention {
    /// Cell mass at `lambda_s`: `F(1/lambda_s) - F(1/lambda_{s+1})` with
    /// `F(1/lambda_0) := 1`. This is the exact law of the downward-rounded
    /// ratio and the default.
    Shifted,
    /// Cell mass written with the index one higher,
    /// `F(1/lambda_{s-1}) - F(1/lambda_s)` for `s >= 1`.
    CeilingShifted,
}

/// Outcome of probing the lattice identity precondition.
#[derive(Debug, Clone, Serialize)]
pub struct Certification {
    /// Index period over which the probe is exhaustive.
    pub index_period: u64,
    /// Number of initial lattice points probed.
    pub lattice_points_probed: u64,
    /// Number of initial digit values probed.
    pub digits_probed: u64,
}

/// One named validation check with its outcome.
#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

/// Collected validation findings for a model.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.findings.iter().all(|f| f.pass)
    }
}

/// A generalized Oppenheim model.
#[derive(Debug, Clone)]
pub struct OppenheimModel {
    phi: PhiFamily,
    dist: DistributionFamily,
    q: QSpec,
    initial: InitialRule,
    lattice: Option<GoodSequence>,
    cert: OnceLock<std::result::Result<Certification, String>>,
}

impl OppenheimModel {
    pub fn new(
        phi: PhiFamily,
        dist: DistributionFamily,
        q: QSpec,
        initial: InitialRule,
        lattice: Option<GoodSequence>,
    ) -> Result<Self> {
        phi.validate()?;
        dist.validate()?;
        q.validate()?;
        if let Some(lat) = &lattice {
            lat.validate()?;
        }
        if let InitialRule::Fixed(h) = &initial {
            if h < &BigInt::one() {
                return Err(Error::InvalidConfig("fixed initial digit must be >= 1".into()));
            }
        }
        Ok(OppenheimModel {
            phi,
            dist,
            q,
            initial,
            lattice,
            cert: OnceLock::new(),
        })
    }

    /// Luroth series model: `phi = 1`, linear `F`, `q = 0`, random `B_1`.
    pub fn luroth() -> Self {
        Self::new(
            PhiFamily::luroth(),
            DistributionFamily::linear(),
            QSpec::Zero,
            InitialRule::VirtualZeroth,
            Some(GoodSequence::naturals()),
        )
        .expect("preset is valid")
    }

    /// Engel series model: `phi(h) = h`, linear `F`, `q = 0`, `B_1 = 1`.
    pub fn engel() -> Self {
        Self::new(
            PhiFamily::engel(),
            DistributionFamily::linear(),
            QSpec::Zero,
            InitialRule::Fixed(BigInt::one()),
            Some(GoodSequence::naturals()),
        )
        .expect("preset is valid")
    }

    /// Sylvester series model: `phi(h) = h + h^2`, linear `F`, `q = 0`,
    /// `B_1 = 1`.
    pub fn sylvester() -> Self {
        Self::new(
            PhiFamily::sylvester(),
            DistributionFamily::linear(),
            QSpec::Zero,
            InitialRule::Fixed(BigInt::one()),
            Some(GoodSequence::naturals()),
        )
        .expect("preset is valid")
    }

    /// Periodic reciprocal example: `phi_n = 1/a_n` cycling, lattice of
    /// multiples of `lcm(a_j)`. Improper unless every `a_j = 1`.
    pub fn reciprocal_periodic(denominators: Vec<u64>) -> Result<Self> {
        let phi = PhiFamily::ReciprocalPeriodic { denominators };
        let kappa = phi.natural_kappa();
        Self::new(
            phi,
            DistributionFamily::linear(),
            QSpec::Zero,
            InitialRule::Fixed(BigInt::one()),
            Some(GoodSequence::Arithmetic { kappa }),
        )
    }

    pub fn phi(&self) -> &PhiFamily {
        &self.phi
    }

    pub fn dist(&self) -> &DistributionFamily {
        &self.dist
    }

    pub fn q_spec(&self) -> &QSpec {
        &self.q
    }

    pub fn initial_rule(&self) -> &InitialRule {
        &self.initial
    }

    pub fn lattice(&self) -> Option<&GoodSequence> {
        self.lattice.as_ref()
    }

    /// `phi_n(h)` for 1-based index `n`.
    pub fn phi_eval(&self, n: u64, h: &BigInt) -> BigRational {
        self.phi.eval(n, h)
    }

    /// `q_n` for 1-based index `n`.
    pub fn q_at(&self, n: u64) -> BigRational {
        self.q.eval(n)
    }

    /// Distribution acting on step `n`.
    pub fn f_at(&self, n: u64) -> &DistKind {
        self.dist.at(n)
    }

    /// Smallest admissible next digit given `B_n = h`.
    pub fn k_min(&self, n: u64, h: &BigInt) -> BigInt {
        ceil_int(&self.phi.eval(n, h))
    }

    /// The kernel argument `delta_j(h, k, q)`, exact.
    ///
    /// `k` may be any positive rational; values below `phi_j(h)` yield
    /// results above one, which clamp to full mass under `F`.
    pub fn delta(
        &self,
        j: u64,
        h: &BigInt,
        k: &BigRational,
        q: &BigRational,
    ) -> Result<BigRational> {
        if j == 0 {
            return Err(Error::Domain("chain index must be >= 1".into()));
        }
        if h < &BigInt::one() {
            return Err(Error::Domain(format!("digit must be >= 1, got {h}")));
        }
        if !k.is_positive() {
            return Err(Error::Domain(format!(
                "argument must be positive, got {}",
                format_rational(k)
            )));
        }
        if q.is_negative() {
            return Err(Error::Domain(format!(
                "perturbation must be nonnegative, got {}",
                format_rational(q)
            )));
        }
        let phi = self.phi.eval(j, h);
        let numer = &phi * (BigRational::one() + q);
        let denom = k + phi * q;
        Ok(numer / denom)
    }

    /// Normalized ratio `R_n = 1 / delta_n(h, k, q_n)` for a digit step
    /// `B_n = h`, `B_{n+1} = k`, exact.
    pub fn r_value(&self, n: u64, h: &BigInt, k: &BigInt) -> Result<BigRational> {
        let q = self.q.eval(n);
        let kr = BigRational::from_integer(k.clone());
        Ok(self.delta(n, h, &kr, &q)?.recip())
    }

    /// Conditional law of `B_{n+1}` given `B_n = h`, without the
    /// properness check (usable on improper models for analysis).
    pub fn conditional_law_unchecked(&self, n: u64, h: &BigInt) -> Result<DigitLaw> {
        if n == 0 {
            return Err(Error::Domain("chain index must be >= 1".into()));
        }
        if h < &BigInt::one() {
            return Err(Error::Domain(format!("digit must be >= 1, got {h}")));
        }
        let phi_h = self.phi.eval(n, h);
        let q = self.q.eval(n);
        let k_min = ceil_int(&phi_h);
        Ok(DigitLaw {
            f: self.dist.at(n).clone(),
            phi_h,
            q,
            k_min,
        })
    }

    /// Conditional law of `B_{n+1}` given `B_n = h`.
    pub fn digit_law(&self, n: u64, h: &BigInt) -> Result<DigitLaw> {
        let law = self.conditional_law_unchecked(n, h)?;
        if !law.is_proper() {
            return Err(Error::ImproperModel(format!(
                "conditional masses at (n = {n}, h = {h}) total {} < 1",
                format_rational(&law.total_mass())
            )));
        }
        Ok(law)
    }

    /// Law of the virtual zeroth step producing `B_1` (`phi = 1`, `q = 0`).
    pub fn initial_law(&self) -> DigitLaw {
        DigitLaw {
            f: self.dist.at(1).clone(),
            phi_h: BigRational::one(),
            q: BigRational::zero(),
            k_min: BigInt::one(),
        }
    }

    /// Total conditional mass at `(n, h)`; below one for improper models.
    pub fn conditional_total_mass(&self, n: u64, h: &BigInt) -> Result<BigRational> {
        Ok(self.conditional_law_unchecked(n, h)?.total_mass())
    }

    /// Whether every conditional law is a probability law. This holds
    /// exactly when `phi` is integer-valued: the smallest admissible digit
    /// `ceil(phi(h))` then satisfies `delta = 1` and the telescoping sum
    /// reaches `F(1) = 1`.
    pub fn is_proper(&self) -> bool {
        self.phi.is_integer_valued()
    }

    /// Exact cell mass of the discretized ratio at lattice index `s`.
    ///
    /// With the default [`DensityConvention::Shifted`] this is the law of
    /// the ratio rounded down to the lattice: mass `F(1/lambda_s) -
    /// F(1/lambda_{s+1})` at `lambda_s` for `s >= 0` (the `s = 0` cell is
    /// empty when `lambda_1 = 1`). Requires an index-independent
    /// distribution family.
    pub fn t_density(
        &self,
        lattice: &GoodSequence,
        s: u64,
        convention: DensityConvention,
    ) -> Result<BigRational> {
        let f = self.dist.identical_kind()?;
        let at = |j: u64| -> BigRational {
            if j == 0 {
                BigRational::one()
            } else {
                let lam = BigRational::from_integer(BigInt::from(lattice.value(j)));
                f.eval_rat(&lam.recip())
            }
        };
        match convention {
            DensityConvention::Shifted => Ok(at(s) - at(s + 1)),
            DensityConvention::CeilingShifted => {
                if s == 0 {
                    Err(Error::Domain(
                        "ceiling-shifted density starts at index 1".into(),
                    ))
                } else {
                    Ok(at(s - 1) - at(s))
                }
            }
        }
    }

    /// Whether the exact tail identity holds at lattice point `x` for
    /// conditioning digit `h` at index `n`: requires
    /// `x * phi_n(h) + (x - 1) * q_n * phi_n(h)` to be an integer, so that
    /// the event `R_n >= x` is a digit event with kernel value exactly `1/x`.
    pub fn integrality_holds(&self, n: u64, x: u64, h: &BigInt) -> bool {
        let phi = self.phi.eval(n, h);
        let q = self.q.eval(n);
        let x = BigRational::from_integer(BigInt::from(x));
        let expr = &x * &phi + (x - BigRational::one()) * q * phi;
        expr.is_integer()
    }

    /// Certifies the model's lattice by probing the integrality condition
    /// over one full index period, an initial run of lattice points and an
    /// initial run of digits. The result is cached.
    pub fn certify_lattice(&self) -> Result<&Certification> {
        let lat = self
            .lattice
            .as_ref()
            .ok_or_else(|| Error::CertificationMissing("model declares no lattice".into()))?;
        let outcome = self.cert.get_or_init(|| {
            let period = lcm(self.phi.period(), self.q.period());
            let (points, digits) = (32u64, 32u64);
            for n in 1..=period {
                for j in 1..=points {
                    let x = lat.value(j);
                    for h in 1..=digits {
                        let h = BigInt::from(h);
                        if !self.integrality_holds(n, x, &h) {
                            return Err(format!(
                                "integrality fails at index {n}, lattice point {x}, digit {h}"
                            ));
                        }
                    }
                }
            }
            Ok(Certification {
                index_period: period,
                lattice_points_probed: points,
                digits_probed: digits,
            })
        });
        outcome
            .as_ref()
            .map_err(|msg| Error::CertificationMissing(msg.clone()))
    }

    /// Largest chain length the exact big-integer backend can reach in
    /// reasonable time; `None` means unbounded. Digit growth is the driver:
    /// Engel-type digits grow geometrically (quadratic bit cost in `n`),
    /// higher power sums grow doubly exponentially.
    pub fn exact_envelope(&self) -> Option<u64> {
        match &self.phi {
            PhiFamily::PowerSum { m, .. } if *m >= 2 => Some(30),
            PhiFamily::PowerSum { m: 1, .. } => Some(100_000),
            _ => None,
        }
    }

    /// Runs every structural check and returns the findings.
    pub fn validate(&self) -> ValidationReport {
        let mut findings = Vec::new();
        let mut push = |check: &str, res: std::result::Result<String, String>| match res {
            Ok(detail) => findings.push(Finding {
                check: check.into(),
                pass: true,
                detail,
            }),
            Err(detail) => findings.push(Finding {
                check: check.into(),
                pass: false,
                detail,
            }),
        };

        push(
            "phi_admissible",
            self.phi
                .validate()
                .map(|_| "positive on all digits".into())
                .map_err(|e| e.to_string()),
        );
        push(
            "distribution_valid",
            self.dist
                .validate()
                .map(|_| "monotone with F(0) = 0, F(1) = 1".into())
                .map_err(|e| e.to_string()),
        );
        push(
            "q_nonnegative",
            self.q
                .validate()
                .map(|_| "nonnegative at all indices".into())
                .map_err(|e| e.to_string()),
        );
        push(
            "proper_conditionals",
            if self.is_proper() {
                Ok("digit masses telescope to one".into())
            } else {
                Err("phi takes noninteger values; conditional mass stays below one \
                     and samplers will refuse this model"
                    .into())
            },
        );
        match &self.lattice {
            None => push("lattice_certified", Err("model declares no lattice".into())),
            Some(_) => push(
                "lattice_certified",
                self.certify_lattice()
                    .map(|c| {
                        format!(
                            "integrality probe passed over period {} x {} points x {} digits",
                            c.index_period, c.lattice_points_probed, c.digits_probed
                        )
                    })
                    .map_err(|e| e.to_string()),
            ),
        }
        push(
            "exact_envelope",
            Ok(match self.exact_envelope() {
                Some(n) => format!("exact backend feasible to n = {n}"),
                None => "exact backend unbounded".into(),
            }),
        );
        ValidationReport { findings }
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

/// Conditional law of the next digit at a fixed `(n, h)`.
#[derive(Debug, Clone)]
pub struct DigitLaw {
    f: DistKind,
    phi_h: BigRational,
    q: BigRational,
    k_min: BigInt,
}

impl DigitLaw {
    /// Smallest digit with positive mass.
    pub fn k_min(&self) -> &BigInt {
        &self.k_min
    }

    /// The coefficient `phi_n(h)` baked into this law.
    pub fn phi_h(&self) -> &BigRational {
        &self.phi_h
    }

    /// The perturbation `q_n` baked into this law.
    pub fn q(&self) -> &BigRational {
        &self.q
    }

    /// The distribution `F_n` baked into this law.
    pub fn dist(&self) -> &DistKind {
        &self.f
    }

    /// Kernel value `delta(h, k, q)` at integer `k >= 1`.
    pub fn delta_at(&self, k: &BigInt) -> BigRational {
        let numer = &self.phi_h * (BigRational::one() + &self.q);
        let denom = BigRational::from_integer(k.clone()) + &self.phi_h * &self.q;
        numer / denom
    }

    /// `P(B_next = k | B = h)`, exact; zero below the minimum digit.
    pub fn mass(&self, k: &BigInt) -> BigRational {
        if k < &self.k_min {
            return BigRational::zero();
        }
        let hi = self.f.eval_rat(&self.delta_at(k));
        let lo = self.f.eval_rat(&self.delta_at(&(k + BigInt::one())));
        hi - lo
    }

    /// `P(B_next >= k | B = h)`, exact. For `k` at or below the minimum
    /// digit this is the total mass (the masses telescope).
    pub fn survival_geq(&self, k: &BigInt) -> BigRational {
        let k = k.max(&self.k_min);
        self.f.eval_rat(&self.delta_at(k))
    }

    /// Total mass of the law; one exactly when `phi(h)` is an integer.
    pub fn total_mass(&self) -> BigRational {
        self.survival_geq(&self.k_min.clone())
    }

    pub fn is_proper(&self) -> bool {
        self.total_mass() == BigRational::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat_frac, rat_int};

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn kernel_value_matches_hand_computation() {
        let luroth = OppenheimModel::luroth();
        let d = luroth
            .delta(1, &big(5), &rat_int(2), &rat_int(0))
            .unwrap();
        assert_eq!(d, rat_frac(1, 2));

        let engel = OppenheimModel::engel();
        let d = engel
            .delta(4, &big(3), &rat_int(12), &rat_int(0))
            .unwrap();
        assert_eq!(d, rat_frac(1, 4));

        // phi(h) = h with a perturbation: delta = 2 * (3/2) / (3 + 1) = 3/4.
        let d = engel
            .delta(1, &big(2), &rat_int(3), &rat_frac(1, 2))
            .unwrap();
        assert_eq!(d, rat_frac(3, 4));
    }

    #[test]
    fn kernel_rejects_out_of_domain_arguments() {
        let m = OppenheimModel::engel();
        assert!(m.delta(0, &big(3), &rat_int(2), &rat_int(0)).is_err());
        assert!(m.delta(1, &big(0), &rat_int(2), &rat_int(0)).is_err());
        assert!(m.delta(1, &big(3), &rat_int(0), &rat_int(0)).is_err());
        assert!(m.delta(1, &big(3), &rat_int(2), &rat_int(-1)).is_err());
    }

    #[test]
    fn ratio_is_reciprocal_of_kernel() {
        let engel = OppenheimModel::engel();
        assert_eq!(engel.r_value(7, &big(3), &big(12)).unwrap(), rat_int(4));
        let syl = OppenheimModel::sylvester();
        // phi(2) = 6, R = 7/6.
        assert_eq!(syl.r_value(2, &big(2), &big(7)).unwrap(), rat_frac(7, 6));
        let d = syl
            .delta(2, &big(2), &rat_frac(7, 1), &rat_int(0))
            .unwrap();
        assert_eq!(d * rat_frac(7, 6), rat_int(1));
    }

    #[test]
    fn minimum_digit_is_ceiling_of_phi() {
        assert_eq!(OppenheimModel::luroth().k_min(3, &big(9)), big(1));
        assert_eq!(OppenheimModel::engel().k_min(3, &big(9)), big(9));
        assert_eq!(OppenheimModel::sylvester().k_min(1, &big(2)), big(6));
        let rec = OppenheimModel::reciprocal_periodic(vec![2, 3]).unwrap();
        assert_eq!(rec.k_min(1, &big(5)), big(1));
    }

    #[test]
    fn luroth_digit_masses() {
        let m = OppenheimModel::luroth();
        let law = m.digit_law(1, &big(7)).unwrap();
        assert_eq!(law.mass(&big(1)), rat_frac(1, 2));
        assert_eq!(law.mass(&big(3)), rat_frac(1, 12));
        assert_eq!(law.survival_geq(&big(4)), rat_frac(1, 4));
        assert!(law.is_proper());
    }

    #[test]
    fn engel_digit_masses_condition_on_h() {
        let m = OppenheimModel::engel();
        let law = m.digit_law(2, &big(3)).unwrap();
        assert_eq!(law.k_min(), &big(3));
        assert_eq!(law.mass(&big(2)), rat_int(0));
        assert_eq!(law.mass(&big(3)), rat_frac(1, 4));
        assert_eq!(law.survival_geq(&big(12)), rat_frac(1, 4));
        assert_eq!(law.total_mass(), rat_int(1));
    }

    #[test]
    fn initial_law_is_unit_phi_law() {
        let m = OppenheimModel::engel();
        let law = m.initial_law();
        assert_eq!(law.mass(&big(1)), rat_frac(1, 2));
        assert_eq!(law.mass(&big(4)), rat_frac(1, 20));
        assert!(law.is_proper());
    }

    #[test]
    fn improper_model_masses_fall_short() {
        let m = OppenheimModel::reciprocal_periodic(vec![2, 3]).unwrap();
        assert!(!m.is_proper());
        assert_eq!(
            m.conditional_total_mass(1, &big(5)).unwrap(),
            rat_frac(1, 2)
        );
        assert_eq!(
            m.conditional_total_mass(2, &big(5)).unwrap(),
            rat_frac(1, 3)
        );
        match m.digit_law(1, &big(5)) {
            Err(Error::ImproperModel(_)) => {}
            other => panic!("expected improper-model error, got {other:?}"),
        }
        // Analytic operations still work.
        assert_eq!(
            m.r_value(1, &big(5), &big(3)).unwrap(),
            rat_int(6)
        );
    }

    #[test]
    fn discretized_density_on_naturals() {
        let m = OppenheimModel::luroth();
        let nat = GoodSequence::naturals();
        assert_eq!(
            m.t_density(&nat, 0, DensityConvention::Shifted).unwrap(),
            rat_int(0)
        );
        assert_eq!(
            m.t_density(&nat, 1, DensityConvention::Shifted).unwrap(),
            rat_frac(1, 2)
        );
        assert_eq!(
            m.t_density(&nat, 2, DensityConvention::Shifted).unwrap(),
            rat_frac(1, 6)
        );
        // The ceiling-shifted form is the same mass one index later.
        assert_eq!(
            m.t_density(&nat, 2, DensityConvention::CeilingShifted).unwrap(),
            rat_frac(1, 2)
        );
        assert!(m.t_density(&nat, 0, DensityConvention::CeilingShifted).is_err());
    }

    #[test]
    fn discretized_density_on_spread_lattice() {
        let m = OppenheimModel::luroth();
        let tri = GoodSequence::Arithmetic { kappa: 3 };
        assert_eq!(
            m.t_density(&tri, 0, DensityConvention::Shifted).unwrap(),
            rat_frac(2, 3)
        );
        assert_eq!(
            m.t_density(&tri, 1, DensityConvention::Shifted).unwrap(),
            rat_frac(1, 6)
        );
    }

    #[test]
    fn density_telescopes_exactly() {
        let m = OppenheimModel::luroth();
        let tri = GoodSequence::Arithmetic { kappa: 3 };
        let mut total = BigRational::zero();
        for s in 0..=1000u64 {
            total += m.t_density(&tri, s, DensityConvention::Shifted).unwrap();
        }
        let lam = BigRational::from_integer(BigInt::from(tri.value(1001)));
        let tail = DistKind::Linear.eval_rat(&lam.recip());
        assert_eq!(total + tail, rat_int(1));
    }

    #[test]
    fn integrality_certifies_classic_models() {
        for m in [
            OppenheimModel::luroth(),
            OppenheimModel::engel(),
            OppenheimModel::sylvester(),
        ] {
            let cert = m.certify_lattice().unwrap();
            assert_eq!(cert.index_period, 1);
        }
    }

    #[test]
    fn integrality_fails_for_fractional_phi_on_naturals() {
        let m = OppenheimModel::new(
            PhiFamily::Constant {
                value: rat_frac(3, 2),
            },
            DistributionFamily::linear(),
            QSpec::Zero,
            InitialRule::Fixed(big(1)),
            Some(GoodSequence::naturals()),
        )
        .unwrap();
        assert!(!m.integrality_holds(1, 1, &big(4)));
        assert!(matches!(
            m.certify_lattice(),
            Err(Error::CertificationMissing(_))
        ));
    }

    #[test]
    fn periodic_reciprocal_certifies_on_multiple_lattice() {
        let m = OppenheimModel::reciprocal_periodic(vec![2, 3]).unwrap();
        let cert = m.certify_lattice().unwrap();
        assert_eq!(cert.index_period, 2);
        // The same phi on the plain naturals fails at x = 1.
        assert!(!m.integrality_holds(1, 1, &big(1)));
    }

    #[test]
    fn certification_missing_without_lattice() {
        let m = OppenheimModel::new(
            PhiFamily::engel(),
            DistributionFamily::linear(),
            QSpec::Zero,
            InitialRule::Fixed(big(1)),
            None,
        )
        .unwrap();
        assert!(matches!(
            m.certify_lattice(),
            Err(Error::CertificationMissing(_))
        ));
    }

    #[test]
    fn envelopes_follow_digit_growth() {
        assert_eq!(OppenheimModel::luroth().exact_envelope(), None);
        assert_eq!(OppenheimModel::engel().exact_envelope(), Some(100_000));
        assert_eq!(OppenheimModel::sylvester().exact_envelope(), Some(30));
    }

    #[test]
    fn validation_reports_findings() {
        let good = OppenheimModel::luroth().validate();
        assert!(good.all_pass(), "{:?}", good);

        let bad = OppenheimModel::reciprocal_periodic(vec![2, 3])
            .unwrap()
            .validate();
        assert!(!bad.all_pass());
        let proper = bad
            .findings
            .iter()
            .find(|f| f.check == "proper_conditionals")
            .unwrap();
        assert!(!proper.pass);
        let lattice = bad
            .findings
            .iter()
            .find(|f| f.check == "lattice_certified")
            .unwrap();
        assert!(lattice.pass);
    }

    #[test]
    fn perturbed_engel_certifies_with_integer_q() {
        // phi(h) = h, q_n = 1: x*h + (x-1)*h integer for all x, h.
        let m = OppenheimModel::new(
            PhiFamily::engel(),
            DistributionFamily::linear(),
            QSpec::Constant { value: rat_int(1) },
            InitialRule::Fixed(big(1)),
            Some(GoodSequence::naturals()),
        )
        .unwrap();
        m.certify_lattice().unwrap();
        // Fractional q breaks integrality at odd products.
        let m = OppenheimModel::new(
            PhiFamily::engel(),
            DistributionFamily::linear(),
            QSpec::Constant {
                value: rat_frac(1, 2),
            },
            InitialRule::Fixed(big(1)),
            Some(GoodSequence::naturals()),
        )
        .unwrap();
        assert!(m.certify_lattice().is_err());
    }
}
