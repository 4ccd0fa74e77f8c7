//! Randomized invariants over the model algebra, the lattice, the trimmed
//! accumulator, and the expansion maps. Everything here is checked in exact
//! rational arithmetic unless the quantity under test is itself a float.

use num::{BigInt, BigRational, One, Signed};
use proptest::collection::vec;
use proptest::prelude::*;

use oppenheim_core::dist::DistributionFamily;
use oppenheim_core::expansions::{expand, reconstruct, tail_weight, Scheme};
use oppenheim_core::lattice::{GoodSequence, RoundDirection};
use oppenheim_core::model::{InitialRule, OppenheimModel};
use oppenheim_core::phi::PhiFamily;
use oppenheim_core::qspec::QSpec;
use oppenheim_core::rational::{ceil_int, rat_frac, rat_int};
use oppenheim_core::stats::TrimAccumulator;

fn phi_strategy() -> impl Strategy<Value = PhiFamily> {
    prop_oneof![
        Just(PhiFamily::luroth()),
        Just(PhiFamily::engel()),
        Just(PhiFamily::sylvester()),
        (1i64..50).prop_map(|c| PhiFamily::Constant { value: rat_int(c) }),
        (1u32..4u32, any::<bool>())
            .prop_map(|(m, z)| PhiFamily::PowerSum { m, include_zero_term: z }),
    ]
}

fn q_strategy() -> impl Strategy<Value = QSpec> {
    prop_oneof![
        Just(QSpec::Zero),
        (0i64..20, 1i64..10).prop_map(|(n, d)| QSpec::Constant { value: rat_frac(n, d) }),
        vec(0u64..5, 1..4).prop_map(|values| QSpec::LatticePeriodic { values }),
    ]
}

fn dist_strategy() -> impl Strategy<Value = DistributionFamily> {
    prop_oneof![
        Just(DistributionFamily::linear()),
        Just(
            DistributionFamily::polynomial(vec![rat_frac(1, 2), rat_frac(1, 2)])
                .expect("valid polynomial")
        ),
        Just(
            DistributionFamily::polynomial(vec![rat_frac(0, 1), rat_frac(1, 1)])
                .expect("valid polynomial")
        ),
    ]
}

fn build(phi: PhiFamily, dist: DistributionFamily, q: QSpec) -> OppenheimModel {
    OppenheimModel::new(phi, dist, q, InitialRule::VirtualZeroth, None).expect("valid model")
}

fn scheme_strategy() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Luroth), Just(Scheme::Engel), Just(Scheme::Sylvester)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// At the smallest admissible digit of an integer-valued family the
    /// kernel argument collapses to one, for every perturbation.
    #[test]
    fn delta_at_phi_is_one(
        phi in phi_strategy(),
        q in q_strategy(),
        h in 1i64..40,
        slot in 1u64..6,
    ) {
        let model = build(phi, DistributionFamily::linear(), q);
        let h = BigInt::from(h);
        let phi_h = model.phi_eval(slot, &h);
        prop_assume!(phi_h.is_integer());
        let q = model.q_at(slot);
        let delta = model.delta(slot, &h, &phi_h, &q).unwrap();
        prop_assert_eq!(delta, BigRational::one());
    }

    /// The normalized ratio is the exact reciprocal of the kernel argument,
    /// and it is at least one on admissible digits.
    #[test]
    fn ratio_is_reciprocal_of_delta(
        phi in phi_strategy(),
        q in q_strategy(),
        h in 1i64..40,
        offset in 0u32..30,
        slot in 1u64..6,
    ) {
        let model = build(phi, DistributionFamily::linear(), q);
        let h = BigInt::from(h);
        let k = model.k_min(slot, &h) + BigInt::from(offset);
        let q = model.q_at(slot);
        let delta = model
            .delta(slot, &h, &BigRational::from_integer(k.clone()), &q)
            .unwrap();
        let r = model.r_value(slot, &h, &k).unwrap();
        prop_assert_eq!(&r * &delta, BigRational::one());
        prop_assert!(r >= BigRational::one());
    }

    /// The kernel argument strictly decreases in the digit.
    #[test]
    fn delta_strictly_decreasing_in_digit(
        phi in phi_strategy(),
        q in q_strategy(),
        h in 1i64..40,
        offset in 0u32..20,
        slot in 1u64..6,
    ) {
        let model = build(phi, DistributionFamily::linear(), q);
        let h = BigInt::from(h);
        let k = model.k_min(slot, &h) + BigInt::from(offset);
        let q = model.q_at(slot);
        let at = |k: &BigInt| {
            model
                .delta(slot, &h, &BigRational::from_integer(k.clone()), &q)
                .unwrap()
        };
        prop_assert!(at(&k) > at(&(&k + BigInt::one())));
    }

    /// Partial digit masses telescope exactly to a difference of kernel
    /// values, and integer-valued families carry total mass one.
    #[test]
    fn digit_masses_telescope(
        phi in phi_strategy(),
        dist in dist_strategy(),
        q in q_strategy(),
        h in 1i64..30,
        span in 0u32..25,
        slot in 1u64..6,
    ) {
        let model = build(phi, dist, q);
        let law = model.digit_law(slot, &BigInt::from(h)).unwrap();
        let k_min = law.k_min().clone();
        let upper = &k_min + BigInt::from(span + 1);
        let mut sum = BigRational::from_integer(BigInt::from(0));
        let mut k = k_min.clone();
        while k < upper {
            sum += law.mass(&k);
            k += BigInt::one();
        }
        let f = law.dist();
        let head = f.eval_rat(&law.delta_at(&k_min));
        let tail = f.eval_rat(&law.delta_at(&upper));
        prop_assert_eq!(sum, head - tail);
        prop_assert_eq!(law.total_mass(), BigRational::one());
    }

    /// Survival of the ratio never exceeds `F(1/x)`: at the smallest digit
    /// whose ratio reaches `x`, the kernel argument is at most `1/x`.
    #[test]
    fn domination_is_exact(
        phi in phi_strategy(),
        q in q_strategy(),
        h in 1i64..30,
        x_num in 1i64..400,
        x_den in 1i64..40,
        slot in 1u64..6,
    ) {
        let x = BigRational::one() + rat_frac(x_num, x_den);
        let model = build(phi, DistributionFamily::linear(), q);
        let h = BigInt::from(h);
        let q = model.q_at(slot);
        let phi_h = model.phi_eval(slot, &h);
        // Smallest digit whose ratio reaches x: r(k) >= x iff
        // k >= phi (1 + q) x - phi q.
        let bound = &phi_h * (BigRational::one() + &q) * &x - &phi_h * &q;
        let k_min = model.k_min(slot, &h);
        let k = ceil_int(&bound).max(k_min.clone());
        let r = model.r_value(slot, &h, &k).unwrap();
        prop_assert!(r >= x);
        if k > k_min {
            let prev = model.r_value(slot, &h, &(&k - BigInt::one())).unwrap();
            prop_assert!(prev < x);
        }
        let delta = model
            .delta(slot, &h, &BigRational::from_integer(k), &q)
            .unwrap();
        prop_assert!(delta <= x.recip());
    }

    /// Lattice rounding agrees with a brute-force scan over indices.
    #[test]
    fn lattice_round_matches_scan(kappa in 1u64..8, x in 1.0f64..500.0) {
        let seq = GoodSequence::Arithmetic { kappa };
        let up = seq.round(x, RoundDirection::Up).unwrap();
        let mut j = 0u64;
        while (seq.value(j) as f64) < x {
            j += 1;
        }
        prop_assert_eq!(up, seq.value(j));
        if x >= kappa as f64 {
            let down = seq.round(x, RoundDirection::Down).unwrap();
            let mut i = 0u64;
            while seq.value(i + 1) as f64 <= x {
                i += 1;
            }
            prop_assert_eq!(down, seq.value(i));
            prop_assert!(up >= down);
            prop_assert!(up - down <= seq.gap_bound());
        } else {
            prop_assert!(seq.round(x, RoundDirection::Down).is_err());
        }
    }

    /// The ceiling discretization satisfies the two-sided bracket
    /// `T - gap <= value <= T`.
    #[test]
    fn ceiling_bracket_holds(kappa in 1u64..6, x in 1.0f64..1e6) {
        let seq = GoodSequence::Arithmetic { kappa };
        let t = seq.round(x, RoundDirection::Up).unwrap();
        prop_assert!(t as f64 >= x);
        prop_assert!((t - seq.gap_bound()) as f64 <= x);
    }

    /// Streaming maxima and trimmed sums match a full-sort oracle exactly.
    /// Inputs are small integers so float addition is exact and order-free.
    #[test]
    fn trimmed_sums_match_sort_oracle(
        raw in vec(0u32..1000u32, 1..200),
        r in 1usize..6,
    ) {
        let xs: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
        let mut acc = TrimAccumulator::new(r).unwrap();
        for &x in &xs {
            acc.observe(x).unwrap();
        }
        let mut sorted = xs.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let take = r.min(sorted.len());
        prop_assert_eq!(acc.maxima(), &sorted[..take]);
        let total: f64 = sorted.iter().sum();
        for depth in 0..=r {
            let removed: f64 = sorted.iter().take(depth).sum();
            let expect = if depth >= sorted.len() { 0.0 } else { total - removed };
            prop_assert_eq!(acc.trimmed_sum(depth).unwrap(), expect);
        }
        for depth in 0..r {
            prop_assert!(
                acc.trimmed_sum(depth + 1).unwrap() <= acc.trimmed_sum(depth).unwrap()
            );
        }
    }

    /// Accumulator state depends on the observed multiset, not on order.
    #[test]
    fn accumulator_is_permutation_invariant(
        raw in vec(0u32..1000u32, 1..120),
        rot in 0usize..120,
    ) {
        let xs: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
        let r = 3;
        let mut forward = TrimAccumulator::new(r).unwrap();
        for &x in &xs {
            forward.observe(x).unwrap();
        }
        let mut rotated = TrimAccumulator::new(r).unwrap();
        let k = rot % xs.len();
        for &x in xs[k..].iter().chain(xs[..k].iter()) {
            rotated.observe(x).unwrap();
        }
        prop_assert_eq!(forward.maxima(), rotated.maxima());
        prop_assert_eq!(
            forward.trimmed_sum(r).unwrap(),
            rotated.trimmed_sum(r).unwrap()
        );
    }

    /// Expansions reconstruct their input exactly: digit prefix plus the
    /// tail weight times the remainder recovers `x`, and the per-scheme
    /// digit constraints hold.
    #[test]
    fn expansion_round_trip(
        num in 1u64..9999u64,
        den in 2u64..10000u64,
        scheme in scheme_strategy(),
    ) {
        prop_assume!(num < den);
        let x = BigRational::new(BigInt::from(num), BigInt::from(den));
        let exp = expand(scheme, &x, 30).unwrap();
        let partial = reconstruct(scheme, &exp.digits).unwrap();
        if exp.terminated {
            prop_assert_eq!(&partial, &x);
        } else {
            let weight = tail_weight(scheme, &exp.digits).unwrap();
            prop_assert_eq!(&(partial + weight * &exp.remainder), &x);
        }
        let two = BigInt::from(2);
        for d in &exp.digits {
            prop_assert!(d >= &two);
        }
        match scheme {
            Scheme::Luroth => {}
            Scheme::Engel => {
                for w in exp.digits.windows(2) {
                    prop_assert!(w[1] >= w[0]);
                }
            }
            Scheme::Sylvester => {
                for w in exp.digits.windows(2) {
                    let floor = &w[0] * (&w[0] - BigInt::one()) + BigInt::one();
                    prop_assert!(w[1] >= floor);
                }
            }
        }
        let mut last = x.clone();
        for k in 1..=exp.digits.len() {
            let err = (&x - reconstruct(scheme, &exp.digits[..k]).unwrap()).abs();
            prop_assert!(err < last || (err.numer() == &BigInt::from(0) && k == exp.digits.len()));
            last = err;
        }
    }
}
