//! Property-based invariants for the matrix substrate and the conditional
//! expectation, over randomly generated inputs.

use std::sync::Arc;

use modular_lab::algebra::{generate_algebra, Algebra};
use modular_lab::linalg_core::{
    herm_eig, hs_inner, partial_trace, power_it, tensor_product, Side,
};
use modular_lab::states::{make_state, modular_flow};
use modular_lab::{C64, CMatrix, Tolerances};
use proptest::prelude::*;

fn cmatrix_strategy(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |v| {
        CMatrix::from_fn(n, |i, j| {
            let k = 2 * (i * n + j);
            C64::new(v[k], v[k + 1])
        })
    })
}

fn psd_strategy(n: usize) -> impl Strategy<Value = CMatrix> {
    cmatrix_strategy(n).prop_map(|g| &g * &g.adjoint())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn herm_eig_reconstructs(g in cmatrix_strategy(4)) {
        let h = g.herm_part();
        let d = herm_eig(&h, &Tolerances::default()).unwrap();
        prop_assert!((&d.reconstruct() - &h).op_norm() <= 1e-11);
        // ascending eigenvalues
        for w in d.eigenvalues.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn imaginary_powers_form_a_group_on_the_support(
        h in psd_strategy(3),
        s in -2.0f64..2.0,
        t in -2.0f64..2.0,
    ) {
        let tol = Tolerances::default();
        let us = power_it(&h, s, &tol).unwrap();
        let ut = power_it(&h, t, &tol).unwrap();
        let ust = power_it(&h, s + t, &tol).unwrap();
        prop_assert!((&(&us * &ut) - &ust).op_norm() <= 1e-10);
        prop_assert!((&us.adjoint() - &power_it(&h, -s, &tol).unwrap()).op_norm() <= 1e-11);
    }

    #[test]
    fn kronecker_mixed_product(
        a in cmatrix_strategy(2),
        b in cmatrix_strategy(3),
        c in cmatrix_strategy(2),
        d in cmatrix_strategy(3),
    ) {
        let lhs = &tensor_product(&a, &b) * &tensor_product(&c, &d);
        let rhs = tensor_product(&(&a * &c), &(&b * &d));
        prop_assert!((&lhs - &rhs).op_norm() <= 1e-11);
    }

    #[test]
    fn partial_trace_consistency(a in cmatrix_strategy(3), b in cmatrix_strategy(3)) {
        let z = tensor_product(&a, &b);
        let second = partial_trace(&z, Side::Second, 3).unwrap();
        prop_assert!((&second - &a.scale(b.trace())).op_norm() <= 1e-11);
        let first = partial_trace(&z, Side::First, 3).unwrap();
        prop_assert!((&first - &b.scale(a.trace())).op_norm() <= 1e-11);
        prop_assert!((first.trace() - z.trace()).norm() <= 1e-11);
    }

    #[test]
    fn hs_inner_is_sesquilinear_and_positive(
        a in cmatrix_strategy(3),
        b in cmatrix_strategy(3),
        re in -2.0f64..2.0,
        im in -2.0f64..2.0,
    ) {
        let lam = C64::new(re, im);
        let scaled = hs_inner(&a.scale(lam), &b).unwrap();
        let plain = hs_inner(&a, &b).unwrap();
        prop_assert!((scaled - lam.conj() * plain).norm() <= 1e-12);
        let aa = hs_inner(&a, &a).unwrap();
        prop_assert!(aa.re >= 0.0 && aa.im.abs() <= 1e-12);
    }

    #[test]
    fn conditional_expectation_is_a_projection(
        gen in cmatrix_strategy(3),
        x in cmatrix_strategy(3),
    ) {
        let tol = Tolerances::default();
        let alg = generate_algebra(&[gen.herm_part()], 3, &tol).unwrap();
        let e = alg.cond_expect(&x).unwrap();
        prop_assert!((&alg.cond_expect(&e).unwrap() - &e).op_norm() <= 1e-10);
        prop_assert!((e.trace() - x.trace()).norm() <= 1e-11);
        prop_assert!((&alg.cond_expect(&x.adjoint()).unwrap() - &e.adjoint()).op_norm() <= 1e-10);
    }

    #[test]
    fn modular_flow_preserves_its_state(
        g in cmatrix_strategy(3),
        x in cmatrix_strategy(3),
        t in -2.0f64..2.0,
    ) {
        let alg = Arc::new(Algebra::full(3, Tolerances::default()));
        let p = &g * &g.adjoint();
        let shifted = &p + &CMatrix::identity(3).scale(C64::new(0.05, 0.0));
        let density = shifted.scale(C64::new(1.0 / shifted.trace().re, 0.0));
        let omega = make_state(&alg, &density, "omega").unwrap();
        let moved = modular_flow(&omega, &x, t).unwrap();
        prop_assert!((omega.expect(&moved).unwrap() - omega.expect(&x).unwrap()).norm() <= 1e-10);
    }

    #[test]
    fn matrix_serde_roundtrip(m in cmatrix_strategy(3)) {
        let text = serde_json::to_string(&m).unwrap();
        let back: CMatrix = serde_json::from_str(&text).unwrap();
        prop_assert!((&back - &m).op_norm() == 0.0);
    }
}
