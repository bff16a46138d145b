use covmap_core::geometry::PlanarPoint;
use covmap_core::ocsvm::{train, train_with_diagnostics, TrainParams, DEFAULT_TOL};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn gaussian(n: usize, seed: u64) -> Vec<PlanarPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, 1.0).unwrap();
    (0..n)
        .map(|_| PlanarPoint::new(d.sample(&mut rng), d.sample(&mut rng)))
        .collect()
}

#[test]
fn nu_bounds_outliers_and_support_vectors() {
    let pts = gaussian(500, 1);
    for nu in [0.05, 0.1, 0.2, 0.5] {
        let (_, d) = train_with_diagnostics(&pts, &TrainParams::new(nu, 0.5).unwrap()).unwrap();
        let n = pts.len() as f64;
        let outliers = d.training_decisions.iter().filter(|&&f| f < -DEFAULT_TOL).count() as f64;
        let svs = d.alphas.iter().filter(|&&a| a > 0.0).count() as f64;
        assert!(outliers / n <= nu + 0.02, "nu {nu}: outliers {outliers}");
        assert!(svs / n >= nu - 0.02, "nu {nu}: svs {svs}");
    }
}

#[test]
fn dual_feasibility_and_kkt() {
    for seed in 0..5 {
        let pts = gaussian(300, seed);
        for nu in [0.02, 0.1, 0.5, 1.0] {
            let (m, d) = train_with_diagnostics(&pts, &TrainParams::new(nu, 1.0).unwrap()).unwrap();
            let sum: f64 = d.alphas.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-8);
            let u = m.upper_bound();
            assert!(d.alphas.iter().all(|&a| a >= 0.0 && a <= u + 1e-10));
            assert!(d.max_kkt_violation() <= DEFAULT_TOL);
        }
    }
}

#[test]
fn outlier_count_grows_with_nu() {
    let pts = gaussian(400, 3);
    let counts: Vec<usize> = [0.02, 0.04, 0.06, 0.08]
        .iter()
        .map(|&nu| {
            let m = train(&pts, &TrainParams::new(nu, 0.5).unwrap()).unwrap();
            pts.iter().filter(|&&p| m.decision_value(p) < 0.0).count()
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
}

#[test]
fn decision_is_bounded_above() {
    let pts = gaussian(100, 4);
    let m = train(&pts, &TrainParams::new(0.2, 1.0).unwrap()).unwrap();
    for p in gaussian(200, 5) {
        assert!(m.decision_value(p) <= 1.0 - m.rho() + 1e-12);
    }
    let far = m.decision_value(PlanarPoint::new(1e3, 1e3));
    assert!((far + m.rho()).abs() < 1e-12 && far < 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn translation_leaves_decisions_unchanged(
        raw in prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 5..40),
        shift in prop::array::uniform2(-50.0f64..50.0),
        probe in prop::array::uniform2(-1.5f64..1.5),
        nu in 0.05f64..1.0,
    ) {
        // shifted inputs round differently, so compare solutions converged
        // well inside the tolerance being asserted
        let params = TrainParams::new(nu, 2.0).unwrap().with_tol(1e-11);
        let pts: Vec<PlanarPoint> = raw.iter().map(|&p| PlanarPoint::from(p)).collect();
        let moved: Vec<PlanarPoint> = pts.iter().map(|p| PlanarPoint::new(p.x + shift[0], p.y + shift[1])).collect();
        let m = train(&pts, &params).unwrap();
        let t = train(&moved, &params).unwrap();
        let p = PlanarPoint::from(probe);
        let q = PlanarPoint::new(p.x + shift[0], p.y + shift[1]);
        prop_assert!((m.decision_value(p) - t.decision_value(q)).abs() <= 1e-9);
    }

    #[test]
    fn exact_translation_is_bitwise_equivariant(
        raw in prop::collection::vec(prop::array::uniform2(-1024i32..1024), 3..40),
        shift in prop::array::uniform2(-64i32..64),
        probe in prop::array::uniform2(-1536i32..1536),
        nu in 0.05f64..1.0,
    ) {
        // dyadic coordinates translate without rounding at the default tolerance
        let unit = 1.0 / 1024.0;
        let to = |v: [i32; 2], s: [i32; 2]| PlanarPoint::new(
            (v[0] as f64) * unit + s[0] as f64,
            (v[1] as f64) * unit + s[1] as f64,
        );
        let params = TrainParams::new(nu, 2.0).unwrap();
        let pts: Vec<PlanarPoint> = raw.iter().map(|&v| to(v, [0, 0])).collect();
        let moved: Vec<PlanarPoint> = raw.iter().map(|&v| to(v, shift)).collect();
        let m = train(&pts, &params).unwrap();
        let t = train(&moved, &params).unwrap();
        prop_assert!((m.decision_value(to(probe, [0, 0])) - t.decision_value(to(probe, shift))).abs() <= 1e-9);
    }

    #[test]
    fn trained_models_are_feasible(
        raw in prop::collection::vec(prop::array::uniform2(0.0f64..1.0), 1..60),
        nu in 0.01f64..=1.0,
        gamma in 0.1f64..100.0,
    ) {
        let pts: Vec<PlanarPoint> = raw.iter().map(|&p| PlanarPoint::from(p)).collect();
        let (m, d) = train_with_diagnostics(&pts, &TrainParams::new(nu, gamma).unwrap()).unwrap();
        prop_assert!((m.alphas().iter().sum::<f64>() - 1.0).abs() <= 1e-8);
        prop_assert!(m.alphas().iter().all(|&a| a > 0.0 && a <= m.upper_bound() + 1e-10));
        prop_assert!(d.max_kkt_violation() <= DEFAULT_TOL);
    }

    #[test]
    fn training_is_deterministic(
        raw in prop::collection::vec(prop::array::uniform2(0.0f64..1.0), 2..30),
    ) {
        let pts: Vec<PlanarPoint> = raw.iter().map(|&p| PlanarPoint::from(p)).collect();
        let params = TrainParams::new(0.3, 5.0).unwrap();
        prop_assert_eq!(train(&pts, &params).unwrap(), train(&pts, &params).unwrap());
    }
}
