//! Property tests for the algebraic invariants: convolution algebra,
//! characteristic-function bounds, series identities.

use divisor_core::{
    cf_eval, compound_power_atoms, gen_binomial, psi_closed_form, BinomialSeriesParams, DistExpr,
    SignedAtomicMeasure,
};
use proptest::prelude::*;

fn small_signed_measure() -> impl Strategy<Value = SignedAtomicMeasure> {
    prop::collection::vec((-5i32..=5, -1.0f64..1.0), 1..5).prop_map(|pairs| {
        SignedAtomicMeasure::new(pairs.into_iter().map(|(l, w)| (l as f64, w))).unwrap()
    })
}

fn probability_atoms() -> impl Strategy<Value = DistExpr> {
    prop::collection::vec((-4i32..=4, 0.05f64..1.0), 1..5).prop_map(|pairs| {
        let total: f64 = pairs.iter().map(|(_, w)| w).sum();
        DistExpr::atomic(
            pairs
                .iter()
                .map(|&(l, w)| (l as f64, w / total))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes(a in small_signed_measure(), b in small_signed_measure()) {
        let ab = a.convolve(&b);
        let ba = b.convolve(&a);
        prop_assert!(ab.max_atom_diff(&ba, 1e-9) < 1e-12);
    }

    #[test]
    fn convolution_associates(
        a in small_signed_measure(),
        b in small_signed_measure(),
        c in small_signed_measure(),
    ) {
        let left = a.convolve(&b).convolve(&c);
        let right = a.convolve(&b.convolve(&c));
        prop_assert!(left.max_atom_diff(&right, 1e-9) < 1e-10);
    }

    #[test]
    fn convolution_mass_is_multiplicative(
        a in small_signed_measure(),
        b in small_signed_measure(),
    ) {
        let prod = a.convolve(&b).total_mass();
        prop_assert!((prod - a.total_mass() * b.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn n_fold_power_adds(a in small_signed_measure(), m in 1u32..4, n in 1u32..4) {
        let lhs = a.n_fold_power(m + n).unwrap();
        let rhs = a.n_fold_power(m).unwrap().convolve(&a.n_fold_power(n).unwrap());
        prop_assert!(lhs.max_atom_diff(&rhs, 1e-9) < 1e-9);
    }

    #[test]
    fn characteristic_function_is_bounded(expr in probability_atoms(), y in -40.0f64..40.0) {
        let v = cf_eval(&expr, y);
        prop_assert!(v.norm() <= 1.0 + 1e-12);
        prop_assert!((cf_eval(&expr, 0.0).re - 1.0).abs() <= 1e-12);
        // conjugate symmetry of the CF itself
        prop_assert!((cf_eval(&expr, -y) - v.conj()).norm() < 1e-12);
    }

    #[test]
    fn pascal_rule_for_general_binomials(t in 0.01f64..6.0, l in 1u32..20) {
        // C(t+1, l) = C(t, l) + C(t, l-1) holds for real upper index
        let lhs = gen_binomial(t + 1.0, l);
        let rhs = gen_binomial(t, l) + gen_binomial(t, l - 1);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()),
            "Pascal rule fails at t={t}, l={l}: {lhs} vs {rhs}");
    }

    #[test]
    fn compound_series_semigroup(
        alpha in 0.2f64..0.8,
        s in 0.3f64..2.5,
        t in 0.3f64..2.5,
    ) {
        let theta = SignedAtomicMeasure::delta(1.0);
        let tol = 1e-11;
        let atoms = |tt: f64| {
            compound_power_atoms(
                &BinomialSeriesParams::new(alpha, tt, tol, theta.clone()).unwrap(),
            )
            .unwrap()
        };
        let conv = atoms(s).convolve(&atoms(t));
        let direct = atoms(s + t);
        prop_assert!(conv.max_atom_diff(&direct, 1e-9) < 2.0 * tol);
    }

    #[test]
    fn compound_series_mass_is_one(alpha in 0.2f64..0.8, t in 0.05f64..4.0) {
        let theta = SignedAtomicMeasure::delta(1.0);
        let atoms = compound_power_atoms(
            &BinomialSeriesParams::new(alpha, t, 1e-11, theta).unwrap(),
        )
        .unwrap();
        prop_assert!((atoms.total_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_psi_exponentiates_to_cf(
        scale in 0.2f64..3.0,
        mean in -2.0f64..2.0,
        var in 0.0f64..3.0,
        y in -20.0f64..20.0,
    ) {
        let expr = DistExpr::convolve(vec![
            DistExpr::cauchy(scale).unwrap(),
            DistExpr::gaussian(mean, var).unwrap(),
            DistExpr::nu_example(0.5).unwrap(),
        ])
        .unwrap();
        let psi = psi_closed_form(&expr, y).expect("closed form exists");
        let cf = cf_eval(&expr, y);
        prop_assert!((psi.exp() - cf).norm() <= 1e-12 * cf.norm().max(1e-300));
    }
}
