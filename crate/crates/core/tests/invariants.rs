use levy_fluct::excursion::intensity_table;
use levy_fluct::fluctuation::{h_beta, hitting_laplace, passage_below_laplace};
use levy_fluct::scale::ScaleEngine;
use levy_fluct::{JumpFamily, LevyModel};
use proptest::prelude::*;

fn models() -> impl Strategy<Value = LevyModel> {
    let brownian =
        (-2.0..2.0f64, 0.2..3.0f64).prop_map(|(g, s)| LevyModel::brownian(g, s).unwrap());
    let cp = (-2.0..2.0f64, 0.2..3.0f64, 0.1..3.0f64, 0.5..3.0f64).prop_map(
        |(g, s, rate, jump_rate)| {
            LevyModel::new(g, s, JumpFamily::CpExp { rate, jump_rate }).unwrap()
        },
    );
    // downward drift kept moderate: Φ(0) = (|γ|/c)^{1/(α-1)} explodes as α → 1
    // and W^(q) then outgrows double precision
    let stable =
        (-0.5..1.0f64, 0.0..1.0f64, 1.3..1.9f64, 0.5..2.0f64).prop_map(|(g, s, alpha, scale)| {
            LevyModel::new(g, s, JumpFamily::Stable { alpha, scale }).unwrap()
        });
    let tempered = (
        -0.5..1.0f64,
        0.0..1.0f64,
        1.3..1.9f64,
        0.5..2.0f64,
        0.2..3.0f64,
    )
        .prop_map(|(g, s, alpha, scale, tempering)| {
            LevyModel::new(
                g,
                s,
                JumpFamily::TemperedStable {
                    alpha,
                    scale,
                    tempering,
                },
            )
            .unwrap()
        });
    prop_oneof![brownian, cp, stable, tempered]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_inverts_psi(model in models(), q in 1e-3..1e3f64) {
        let phi = model.phi(q).unwrap();
        prop_assert!(phi > model.phi0());
        prop_assert!((model.psi(phi) - q).abs() <= 1e-10 * q);
    }

    #[test]
    fn scale_function_is_nondecreasing(model in models(), q in 0.0..3.0f64, x in 0.05..3.0f64, dx in 0.01..1.0f64) {
        let engine = ScaleEngine::new(model);
        let (a, b) = (engine.w(q, x).unwrap(), engine.w(q, x + dx).unwrap());
        prop_assert!(a > 0.0);
        prop_assert!(b >= a * (1.0 - 1e-8), "W({x}) = {a} > W({}) = {b}", x + dx);
        prop_assert_eq!(engine.w(q, -x).unwrap(), 0.0);
    }

    #[test]
    fn partition_closes(model in models(), beta in 0.05..20.0f64) {
        let t = intensity_table(&ScaleEngine::new(model), beta).unwrap();
        prop_assert!(t.relative_residual() <= 1e-6, "{t:?}");
        for v in [t.upper_creep, t.stay_positive_forever, t.cross_before, t.negative_start_total(), t.cross_after] {
            prop_assert!(v >= -1e-9);
        }
    }

    #[test]
    fn transforms_are_probabilities(model in models(), beta in 0.05..10.0f64, y in 0.05..4.0f64) {
        let engine = ScaleEngine::new(model);
        let h = h_beta(&engine, beta, y).unwrap();
        prop_assert!(h >= -1e-10 && h <= engine.phi_prime(beta).unwrap() * (1.0 + 1e-10));
        for p in [hitting_laplace(&engine, beta, y).unwrap(), passage_below_laplace(&engine, beta, y).unwrap()] {
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&p), "{p}");
        }
        // T_0 never precedes τ_0^-
        prop_assert!(hitting_laplace(&engine, beta, y).unwrap() <= passage_below_laplace(&engine, beta, y).unwrap() + 1e-8);
    }
}
