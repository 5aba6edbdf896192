//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured extremes.
//!
//! Run with: cargo test -p modular-lab --test acceptance -- --nocapture

use std::sync::Arc;

use modular_lab::algebra::{generate_algebra, Algebra};
use modular_lab::broadcasting::{
    broadcastable, feasibility_search, verify_channel, FeasibilityOutcome,
};
use modular_lab::cocycles::{verify_chain_rule, verify_cocycle_identity};
use modular_lab::commutativity::{
    commutes_jointly, commutes_pairwise, convexity_harness, counterexample_family,
    counterexample_qubit, definition_consistency, sampling,
};
use modular_lab::linalg_core::{density_from_spectrum, random_gaussian, random_unitary};
use modular_lab::states::{make_state, omega_sub_a_regularized, verify_omega1_identity};
use modular_lab::{default_t_grid, C64, CMatrix, Tolerances};

fn full(n: usize) -> Arc<Algebra> {
    Arc::new(Algebra::full(n, Tolerances::default()))
}

/// The proper subalgebra C (+) M_3 of M_4.
fn corner_subalgebra() -> Arc<Algebra> {
    let mut gens = vec![CMatrix::from_real_diag(&[1.0, 0.0, 0.0, 0.0])];
    for i in 1..4usize {
        for j in 1..4usize {
            gens.push(CMatrix::from_fn(4, |r, c| {
                if r == i && c == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
        }
    }
    Arc::new(generate_algebra(&gens, 4, &Tolerances::default()).unwrap())
}

/// Commuting (phi, omega) on the full algebra with omega faithful; half the
/// pairs get a rank-deficient phi.
fn commuting_pair(alg: &Arc<Algebra>, seed: u64, deficient: bool) -> (
    modular_lab::states::State,
    modular_lab::states::State,
) {
    let non_faithful = usize::from(deficient);
    let fam = sampling::commuting_family(alg, 2, non_faithful, "p", seed).unwrap();
    let mut it = fam.into_iter();
    let phi = it.next().unwrap();
    let omega = it.next().unwrap();
    (phi, omega)
}

#[test]
fn criterion_01_pt_equivalence_suite() {
    let grid = default_t_grid();
    let eps = 1e-9;
    let mut commuting_worst = 0.0f64;
    let mut generic_oracle_min = f64::INFINITY;
    let mut pairs = 0usize;
    for (di, n) in [2usize, 3, 4, 8].into_iter().enumerate() {
        let alg = full(n);
        for i in 0..50u64 {
            let seed = 1000 * (di as u64 + 1) + i;
            let (phi, omega) = commuting_pair(&alg, seed, i % 2 == 1);
            let v = commutes_pairwise(&phi, &omega, &grid).expect("unanimity");
            assert!(v.commutes, "criterion 1 FAIL: commuting pair judged non-commuting (n={n}, i={i})");
            for (label, &r) in &v.residuals {
                assert!(
                    r <= eps,
                    "criterion 1 FAIL: {label} residual {r:.3e} > 1e-9 on commuting pair (n={n}, i={i})"
                );
                commuting_worst = commuting_worst.max(r);
            }
            pairs += 1;
        }
        for i in 0..50u64 {
            let seed = 2000 * (di as u64 + 1) + i;
            let (phi, omega) =
                sampling::generic_pair(&alg, seed, 1e-3, i % 4 == 3).expect("generic pair");
            let v = commutes_pairwise(&phi, &omega, &grid).expect("unanimity");
            assert!(!v.commutes, "criterion 1 FAIL: generic pair judged commuting (n={n}, i={i})");
            assert!(
                v.oracle_commutator >= 1e-3,
                "criterion 1 FAIL: generic oracle {:.3e} < 1e-3",
                v.oracle_commutator
            );
            generic_oracle_min = generic_oracle_min.min(v.oracle_commutator);
            pairs += 1;
        }
    }
    println!(
        "criterion 1 PASS: {pairs} pairs over n in {{2,3,4,8}}, unanimous verdicts; \
         commuting worst residual {commuting_worst:.2e} <= 1e-9, generic oracle min {generic_oracle_min:.2e} >= 1e-3"
    );
}

#[test]
fn criterion_02_comm1_matches_flow_invariance() {
    let grid = default_t_grid();
    let eps = 1e-9;
    let mut checked = 0usize;
    for (di, n) in [2usize, 3, 4, 8].into_iter().enumerate() {
        let alg = full(n);
        for i in 0..50u64 {
            let (phi, omega) = commuting_pair(&alg, 1000 * (di as u64 + 1) + i, i % 2 == 1);
            let v = commutes_pairwise(&phi, &omega, &grid).unwrap();
            let pt_i = v.residuals["PT-i"] <= eps;
            let comm1 = v.residuals["comm1"] <= eps;
            assert_eq!(pt_i, comm1, "criterion 2 FAIL: comm1 disagrees with PT-i");
            checked += 1;
        }
        for i in 0..50u64 {
            let (phi, omega) =
                sampling::generic_pair(&alg, 2000 * (di as u64 + 1) + i, 1e-3, i % 4 == 3).unwrap();
            let v = commutes_pairwise(&phi, &omega, &grid).unwrap();
            let pt_i = v.residuals["PT-i"] <= eps;
            let comm1 = v.residuals["comm1"] <= eps;
            assert_eq!(pt_i, comm1, "criterion 2 FAIL: comm1 disagrees with PT-i");
            checked += 1;
        }
    }
    println!("criterion 2 PASS: cocycle-family commutation equals flow invariance on all {checked} pairs");
}

#[test]
fn criterion_03_omega1_identity_and_regularization() {
    use rand::SeedableRng;
    let mut worst_identity = 0.0f64;
    let mut worst_final_dev = 0.0f64;
    let eps_list = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    for i in 0..50u64 {
        let n = 2 + (i as usize % 3); // 2, 3, 4
        let alg = full(n);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3000 + i);
        let u = random_unitary(n, &mut rng);
        use rand::Rng;
        let mut w: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
        let total: f64 = w.iter().sum();
        for x in w.iter_mut() {
            *x /= total;
        }
        let omega = make_state(&alg, &density_from_spectrum(&u, &w), "omega").unwrap();
        // A shares the eigenbasis, spectrum in [0, 2.5] with occasional kernel
        let a_spec: Vec<f64> = (0..n)
            .map(|k| {
                if i % 5 == 0 && k == 0 {
                    0.0
                } else {
                    2.5 * rng.random::<f64>()
                }
            })
            .collect();
        let a = density_from_spectrum(&u, &a_spec);
        let x = random_gaussian(n, &mut rng);
        let r = verify_omega1_identity(&omega, &a, &x).unwrap();
        assert!(r <= 1e-10, "criterion 3 FAIL: identity residual {r:.3e} > 1e-10");
        worst_identity = worst_identity.max(r);

        let (_, rep) = omega_sub_a_regularized(&omega, &a, &eps_list).unwrap();
        assert!(
            rep.monotone_nonincreasing,
            "criterion 3 FAIL: deviations not monotone: {:?}",
            rep.deviations
        );
        let last = *rep.deviations.last().unwrap();
        assert!(last <= 1e-5, "criterion 3 FAIL: final deviation {last:.3e} > 1e-5");
        worst_final_dev = worst_final_dev.max(last);
    }
    println!(
        "criterion 3 PASS: 50 triples, identity residual max {worst_identity:.2e} <= 1e-10; \
         regularization monotone with final deviation max {worst_final_dev:.2e} <= 1e-5"
    );
}

#[test]
fn criterion_04_cocycle_identity_and_chain_rule() {
    let grid = default_t_grid();
    let mut worst_cocycle = 0.0f64;
    for i in 0..50u64 {
        let n = 2 + (i as usize % 3);
        let alg = full(n);
        let (phi, omega) = if i % 2 == 0 {
            // generic pair, half with rank-deficient phi
            sampling::generic_pair(&alg, 4000 + i, 1e-4, i % 4 == 0).unwrap()
        } else {
            commuting_pair(&alg, 4000 + i, i % 3 == 1)
        };
        for &s in &grid {
            for &t in &grid {
                let r = verify_cocycle_identity(&phi, &omega, s, t).unwrap();
                assert!(
                    r <= 1e-9,
                    "criterion 4 FAIL: cocycle identity residual {r:.3e} > 1e-9 (i={i}, s={s}, t={t})"
                );
                worst_cocycle = worst_cocycle.max(r);
            }
        }
    }
    let mut worst_chain = 0.0f64;
    for i in 0..20u64 {
        let n = 2 + (i as usize % 3);
        let alg = full(n);
        let fam = sampling::commuting_family(&alg, 3, usize::from(i % 2 == 0), "t", 4500 + i).unwrap();
        let (rho, phi, omega) = (&fam[0], &fam[1], &fam[2]);
        for &t in &grid {
            let check = verify_chain_rule(rho, phi, omega, t).unwrap();
            assert!(check.pairwise_commuting, "criterion 4: triple should commute");
            let r = check.chain_residual.max(check.inverse_residual);
            assert!(r <= 1e-9, "criterion 4 FAIL: chain-rule residual {r:.3e} > 1e-9");
            worst_chain = worst_chain.max(r);
        }
    }
    println!(
        "criterion 4 PASS: cocycle identity max {worst_cocycle:.2e} <= 1e-9 on 50 pairs x grid^2; \
         chain rule max {worst_chain:.2e} <= 1e-9 on 20 commuting triples"
    );
}

#[test]
fn criterion_05_density_oracle_agreement() {
    let grid = default_t_grid();
    let eps = 1e-9;
    let mut agreements = 0usize;
    for (label, alg) in [("full M4", full(4)), ("C (+) M3 in M4", corner_subalgebra())] {
        for i in 0..50u64 {
            let family = if i % 2 == 0 {
                sampling::commuting_family(&alg, 3, usize::from(i % 4 == 0), "f", 5000 + i).unwrap()
            } else {
                sampling::generic_family(&alg, 3, 5000 + i, 1e-4).unwrap()
            };
            let v = commutes_jointly(&family, &grid)
                .unwrap_or_else(|e| panic!("criterion 5 FAIL ({label}, i={i}): {e}"));
            let oracle_verdict = v.oracle_max_commutator <= eps;
            assert_eq!(
                v.commutes, oracle_verdict,
                "criterion 5 FAIL: joint verdict disagrees with density oracle ({label}, i={i})"
            );
            agreements += 1;
        }
    }
    println!(
        "criterion 5 PASS: joint verdict equals density-commutation oracle on all {agreements} families \
         (50 on full M4, 50 on a proper subalgebra)"
    );
}

#[test]
fn criterion_06_convexity_equivalence_and_counterexample() {
    let grid = default_t_grid();
    let mut families = 0usize;
    for i in 0..20u64 {
        let n = 2 + (i as usize % 2);
        let alg = full(n);
        let family = match i % 4 {
            0 | 1 => sampling::commuting_family(&alg, 3, usize::from(i % 2 == 0), "f", 6000 + i).unwrap(),
            2 => sampling::generic_family(&alg, 3, 6000 + i, 1e-4).unwrap(),
            _ => {
                // trace plus two non-commuting rank-deficient states
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6000 + i);
                let tr = modular_lab::states::trace_state(&alg, "trace");
                let p1 = sampling::rank_deficient_state(&alg, 1, "p1", &mut rng).unwrap();
                let p2 = sampling::rank_deficient_state(&alg, 1, "p2", &mut rng).unwrap();
                vec![tr, p1, p2]
            }
        };
        let rep = convexity_harness(&family, 10, 600 + i, &grid)
            .unwrap_or_else(|e| panic!("criterion 6 FAIL (i={i}): {e}"));
        assert!(
            rep.equivalence_holds,
            "criterion 6 FAIL: pairwise and joint disagree on convexified family (i={i})"
        );
        families += 1;
    }

    let (_, cx) = counterexample_qubit(&grid).unwrap();
    assert!(cx.raw_pairwise, "criterion 6 FAIL: counterexample raw pairwise should hold");
    assert!(!cx.raw_joint, "criterion 6 FAIL: counterexample raw joint should fail");
    assert!(!cx.convex_pairwise && !cx.convex_joint, "criterion 6 FAIL: convexified verdicts should both fail");
    assert!(
        (cx.midpoint_witness_commutator - 0.25).abs() <= 1e-12,
        "criterion 6 FAIL: midpoint witness commutator {} != 0.25",
        cx.midpoint_witness_commutator
    );
    assert!(
        (cx.oracle_max_commutator - 0.5).abs() <= 1e-12,
        "criterion 6 FAIL: raw oracle commutator {} != 0.5",
        cx.oracle_max_commutator
    );
    println!(
        "criterion 6 PASS: pairwise <=> joint on {families} convexified families; qubit counterexample \
         (raw: pairwise true / joint false; convexified: both false; witness commutator 0.25 +- 1e-12, \
         raw pair commutator 0.5)"
    );
}

#[test]
fn criterion_07_definition_consistency() {
    let grid = default_t_grid();
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let n = 2 + (i as usize % 3);
        let alg = full(n);
        let family = sampling::commuting_family(&alg, 4, usize::from(i % 2 == 0), "f", 7000 + i).unwrap();
        let faithful: Vec<_> = family.iter().filter(|s| s.is_faithful()).collect();
        assert!(faithful.len() >= 2);
        let d = definition_consistency(&family, faithful[0], faithful[1], &grid).unwrap();
        assert!(d <= 1e-8, "criterion 7 FAIL: anchored algebras differ by {d:.3e} > 1e-8");
        worst = worst.max(d);
    }
    println!("criterion 7 PASS: 20 jointly commuting families, cocycle algebras coincide within {worst:.2e} <= 1e-8");
}

#[test]
fn criterion_08_broadcasting() {
    let grid = default_t_grid();
    let mut worst_marginal = 0.0f64;
    let mut worst_unitality = 0.0f64;
    let mut worst_choi = 0.0f64;
    let mut checked = 0usize;
    for (di, n) in [2usize, 3, 4].into_iter().enumerate() {
        let alg = full(n);
        for i in 0..10u64 {
            let seed = 8000 * (di as u64 + 1) + i;
            let family =
                sampling::commuting_family(&alg, 3, usize::from(i % 3 == 0), "b", seed).unwrap();
            let outcome = broadcastable(&family, &grid, seed).unwrap();
            assert!(outcome.broadcastable, "criterion 8 FAIL: commuting family not broadcastable");
            let rep = outcome.report.unwrap();
            assert!(
                rep.max_marginal_residual <= 1e-9,
                "criterion 8 FAIL: marginal residual {:.3e} > 1e-9",
                rep.max_marginal_residual
            );
            assert!(
                rep.unitality_residual <= 1e-10,
                "criterion 8 FAIL: unitality residual {:.3e} > 1e-10",
                rep.unitality_residual
            );
            assert!(
                rep.choi_min_eigenvalue >= -1e-10,
                "criterion 8 FAIL: Choi min eigenvalue {:.3e} < -1e-10",
                rep.choi_min_eigenvalue
            );
            worst_marginal = worst_marginal.max(rep.max_marginal_residual);
            worst_unitality = worst_unitality.max(rep.unitality_residual);
            worst_choi = worst_choi.min(rep.choi_min_eigenvalue);
            checked += 1;

            let joint = commutes_jointly(&family, &grid).unwrap();
            assert_eq!(outcome.broadcastable, joint.commutes);
        }
        for i in 0..10u64 {
            let seed = 8500 * (di as u64 + 1) + i;
            let family = sampling::generic_family(&alg, 3, seed, 1e-4).unwrap();
            let outcome = broadcastable(&family, &grid, seed).unwrap();
            assert!(!outcome.broadcastable, "criterion 8 FAIL: generic family judged broadcastable");
            let joint = commutes_jointly(&family, &grid).unwrap();
            assert_eq!(outcome.broadcastable, joint.commutes);
            checked += 1;
        }
    }
    println!(
        "criterion 8 PASS: {checked} families over n in {{2,3,4}}; constructed channels verified \
         (marginal max {worst_marginal:.2e} <= 1e-9, unitality max {worst_unitality:.2e} <= 1e-10, \
         Choi min {worst_choi:.2e} >= -1e-10); broadcastable always equals joint commutativity"
    );
}

#[test]
fn criterion_09_feasibility_cross_check() {
    let alg = full(2);
    let mut worst_gap = 0.0f64;
    let mut worst_iters = 0usize;
    for i in 0..5u64 {
        let family =
            sampling::commuting_family(&alg, 2 + (i as usize % 2), 0, "q", 9000 + i).unwrap();
        match feasibility_search(&family, 5000, 1e-7).unwrap() {
            FeasibilityOutcome::Converged {
                channel,
                gap,
                iterations,
            } => {
                assert!(gap <= 1e-7);
                worst_gap = worst_gap.max(gap);
                worst_iters = worst_iters.max(iterations);
                let rep = verify_channel(&channel, &family).unwrap();
                assert!(rep.choi_min_eigenvalue >= -1e-9);
            }
            FeasibilityOutcome::Stalled { gap, .. } => {
                panic!("criterion 9 FAIL: Dykstra stalled at {gap:.3e} on a commuting qubit family (i={i})")
            }
        }
    }
    let (_, cx) = counterexample_family().unwrap();
    let stall_gap = match feasibility_search(&cx, 5000, 1e-7).unwrap() {
        FeasibilityOutcome::Converged { gap, .. } => {
            panic!("criterion 9 FAIL: Dykstra converged (gap {gap:.3e}) on the counterexample")
        }
        FeasibilityOutcome::Stalled { gap, .. } => {
            assert!(gap >= 1e-3, "criterion 9 FAIL: stalled gap {gap:.3e} < 1e-3");
            gap
        }
    };
    println!(
        "criterion 9 PASS: Dykstra converged on 5 commuting qubit families (gap max {worst_gap:.2e} <= 1e-7, \
         iterations max {worst_iters} <= 5000) and stalled at gap {stall_gap:.2e} >= 1e-3 on the counterexample"
    );
}

#[test]
fn criterion_10_cli_contract() {
    let dir = format!("{}/tests", env!("CARGO_MANIFEST_DIR"));
    let cases = [
        ("diag_family.json", "check_joint_diag_family.json", 0),
        (
            "qubit_counterexample.json",
            "check_joint_qubit_counterexample.json",
            1,
        ),
        ("malformed.json", "check_joint_malformed.json", 2),
    ];
    for (fixture, golden, expected_code) in cases {
        let argv: Vec<String> = vec![
            "modular-lab".into(),
            "check-joint".into(),
            format!("{dir}/fixtures/{fixture}"),
        ];
        let mut out1 = Vec::new();
        let code1 = modular_lab::cli::run_with_writer(&argv, &mut out1);
        assert_eq!(
            code1, expected_code,
            "criterion 10 FAIL: exit code for {fixture} is {code1}, expected {expected_code}"
        );
        let mut out2 = Vec::new();
        let code2 = modular_lab::cli::run_with_writer(&argv, &mut out2);
        assert_eq!(code1, code2);
        assert_eq!(out1, out2, "criterion 10 FAIL: output for {fixture} not deterministic");
        let frozen = std::fs::read(format!("{dir}/golden/{golden}")).unwrap();
        assert_eq!(
            out1, frozen,
            "criterion 10 FAIL: output for {fixture} differs from the golden file"
        );
    }
    println!(
        "criterion 10 PASS: check-joint golden files byte-identical with exit codes 0/1/2"
    );
}
