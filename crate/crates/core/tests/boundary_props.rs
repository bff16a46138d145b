use covmap_core::boundary::{
    build, contour_bbox, extract_contour, hull_excess_region, BuildConfig, FrameChoice, Method,
};
use covmap_core::geometry::{convex_hull, point_in_rings, BBox, PlanarPoint};
use covmap_core::measurements::{partition, SignalBand, TrainingMode};
use covmap_core::ocsvm::{train, OcSvmModel, TrainParams};
use covmap_core::synthgen::{generate, Scenario, Shape};
use proptest::prelude::*;
use std::f64::consts::{E, PI};
use std::sync::OnceLock;

fn scenario(shape: Shape, n: usize, seed: u64) -> Scenario {
    let mut s = Scenario::new("c0", shape, PlanarPoint::new(2.0, 48.0), seed);
    s.n_service = n;
    s.n_noservice = n / 5;
    s
}

fn service_points(s: &Scenario) -> Vec<PlanarPoint> {
    generate(s)
        .unwrap()
        .dataset
        .records()
        .iter()
        .filter(|r| !r.is_no_service())
        .map(|r| r.position())
        .collect()
}

fn annulus_model() -> &'static (Scenario, OcSvmModel) {
    static M: OnceLock<(Scenario, OcSvmModel)> = OnceLock::new();
    M.get_or_init(|| {
        let s = scenario(Shape::Annulus { r_in: 0.022, r_out: 0.035 }, 3000, 5);
        let m = train(&service_points(&s), &TrainParams::new(0.04, 1e4).unwrap()).unwrap();
        (s, m)
    })
}

/// Upper bound on |grad f| for an RBF expansion with weights summing to one.
fn lipschitz(gamma: f64) -> f64 {
    (2.0 * gamma / E).sqrt()
}

#[test]
fn disk_contour_vertices_lie_near_the_zero_set() {
    let s = scenario(Shape::Disk { radius: 0.008 }, 1000, 2);
    let m = train(&service_points(&s), &TrainParams::new(0.05, 1e4).unwrap()).unwrap();
    let bbox = contour_bbox(&m);
    let res = 128;
    let c = extract_contour(&m, bbox, res).unwrap();
    assert_eq!(c.rings.len(), 1);
    assert!(c.rings[0].is_ccw());
    let h = (bbox.width() / res as f64).hypot(bbox.height() / res as f64);
    let bound = lipschitz(m.gamma()) * h;
    for &v in c.rings[0].vertices() {
        assert!(m.decision_value(v).abs() <= bound, "{v:?}");
    }
}

#[test]
fn annulus_contour_has_ccw_outer_and_cw_hole() {
    let (s, m) = annulus_model();
    let c = extract_contour(m, contour_bbox(m), 256).unwrap();
    assert_eq!(c.outer_rings().count(), 1);
    assert_eq!(c.holes().count(), 1);
    let hole = c.holes().next().unwrap();
    assert!(hole.contains(s.center));
    assert!(!point_in_rings(s.center, &c.rings));
}

#[test]
fn contour_agrees_with_sign_off_boundary() {
    let (_, m) = annulus_model();
    let bbox = contour_bbox(m);
    let res = 256;
    let c = extract_contour(m, bbox, res).unwrap();
    let (hx, hy) = (bbox.width() / res as f64, bbox.height() / res as f64);
    let n = 200;
    let (mut agree, mut total) = (0usize, 0usize);
    for j in 0..n {
        for i in 0..n {
            let p = PlanarPoint::new(
                bbox.min_x + (i as f64 + 0.5) / n as f64 * bbox.width(),
                bbox.min_y + (j as f64 + 0.5) / n as f64 * bbox.height(),
            );
            let inside = m.decision_value(p) > 0.0;
            let near = [-1.0, 0.0, 1.0].iter().any(|&a| {
                [-1.0, 0.0, 1.0]
                    .iter()
                    .any(|&b| (m.decision_value(PlanarPoint::new(p.x + a * hx, p.y + b * hy)) > 0.0) != inside)
            });
            if near {
                continue;
            }
            total += 1;
            agree += usize::from(point_in_rings(p, &c.rings) == inside);
        }
    }
    assert!(total > n * n / 2);
    assert!(agree as f64 >= 0.99 * total as f64, "{agree}/{total}");
}

#[test]
fn annulus_hull_excess_matches_hole_area() {
    let (s, m) = annulus_model();
    let Shape::Annulus { r_in, .. } = s.shape else { unreachable!() };
    let hull = convex_hull(&service_points(s)).unwrap();
    let excess = hull_excess_region(m, &hull, hull.bbox(), 256);
    let hole = PI * r_in * r_in;
    assert!((excess - hole).abs() <= 0.1 * hole, "excess {excess} hole {hole}");
}

#[test]
fn convex_blob_excess_is_small() {
    let s = scenario(Shape::Disk { radius: 0.02 }, 1500, 8);
    let pts = service_points(&s);
    let m = train(&pts, &TrainParams::new(0.04, 1e4).unwrap()).unwrap();
    let hull = convex_hull(&pts).unwrap();
    let excess = hull_excess_region(&m, &hull, hull.bbox(), 256);
    let area = hull.signed_area();
    assert!(excess > 0.0 && excess <= 0.15 * area, "excess {excess} area {area}");
}

#[test]
fn excess_is_deterministic_for_a_fixed_grid() {
    let (_, m) = annulus_model();
    let hull = convex_hull(m.support_vectors()).unwrap();
    let b = BBox::new(1.96, 47.96, 2.04, 48.04);
    assert_eq!(
        hull_excess_region(m, &hull, b, 128).to_bits(),
        hull_excess_region(m, &hull, b, 128).to_bits()
    );
}

fn nested_model(mode: TrainingMode) -> (covmap_core::boundary::CoverageModel, Vec<usize>) {
    let s = scenario(Shape::Disk { radius: 0.02 }, 600, 4);
    let ds = generate(&s).unwrap().dataset;
    let mut per_band = vec![0usize; 6];
    for r in ds.records() {
        if let Some(b) = r.band() {
            per_band[b.ordinal() as usize] += 1;
        }
    }
    let parts = partition(&ds, 10);
    let config = BuildConfig {
        method: Method::OcSvm(TrainParams::new(0.05, 2e4).unwrap()),
        mode,
        frame: FrameChoice::Degrees,
        train_window: None,
    };
    (build("c0", &parts, &config).model, per_band)
}

#[test]
fn cumulative_training_sets_are_nested() {
    let (model, per_band) = nested_model(TrainingMode::Cumulative);
    assert_eq!(model.len(), 5);
    let mut previous = usize::MAX;
    for b in model.boundaries() {
        let k = b.band.ordinal() as usize;
        let expected: usize = per_band[k..].iter().sum();
        assert_eq!(b.n_train(), expected, "band {k}");
        assert!(b.n_train() <= previous);
        previous = b.n_train();
    }
}

#[test]
fn partition_training_sets_are_per_band() {
    let (model, per_band) = nested_model(TrainingMode::Partition);
    for b in model.boundaries() {
        assert_eq!(b.n_train(), per_band[b.band.ordinal() as usize]);
    }
}

fn shared_model() -> &'static covmap_core::boundary::CoverageModel {
    static M: OnceLock<covmap_core::boundary::CoverageModel> = OnceLock::new();
    M.get_or_init(|| nested_model(TrainingMode::Partition).0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn highest_band_matches_per_band_coverage(dx in -0.03f64..0.03, dy in -0.03f64..0.03) {
        let model = shared_model();
        let p = PlanarPoint::new(2.0 + dx, 48.0 + dy);
        let got = model.highest_band_at(p);
        let mut expected = None;
        for k in 1..=5u8 {
            let band = SignalBand::new(k).unwrap();
            if model.boundary(band).is_some_and(|b| b.covers_lonlat(p)) {
                expected = Some(band);
            }
        }
        prop_assert_eq!(got, expected);
    }
}
