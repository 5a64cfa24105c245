use percospec::boolean::estimate::ArmDetector;
use percospec::boolean::{estimate_arm_probability, occupied_crossing, ArmColor, ArmEventSpec};
use percospec::experiments::{duality_check, Model};
use percospec::functional::{BooleanCrossing, VoronoiCrossing};
use percospec::hoeffding::{hoeffding_decompose, HoeffdingTable};
use percospec::model::{sample_binomial, sample_poisson};
use percospec::voronoi::VoronoiTessellation;
use percospec::{MarkedPoint, Point2, Rect, Region, SeedSpec, Sign, LAMBDA_C};
use proptest::prelude::*;

fn crossing_frequency(intensity: f64, l: f64, n: u64, seed: &SeedSpec) -> f64 {
    let bx = Rect::square(l);
    let window = Region::square(l + 1.0);
    let hits = (0..n)
        .filter(|&i| occupied_crossing(&sample_poisson(intensity, &window, false, &seed.replica(i)).unwrap(), &bx).crossed)
        .count();
    hits as f64 / n as f64
}

#[test]
fn supercritical_boxes_are_crossed() {
    assert!(crossing_frequency(2.0 * LAMBDA_C, 16.0, 300, &SeedSpec::new(1, "super")) > 0.99);
}

#[test]
fn subcritical_boxes_are_not_crossed() {
    assert!(crossing_frequency(LAMBDA_C / 2.0, 16.0, 300, &SeedSpec::new(1, "sub")) < 0.01);
}

#[test]
fn one_arm_probability_decreases_with_the_outer_radius() {
    let seed = SeedSpec::new(2, "one-arm");
    let est: Vec<_> = [4.0, 8.0, 16.0]
        .iter()
        .map(|&big_r| {
            let spec = ArmEventSpec::one_arm(1.0, big_r, ArmColor::Occupied).unwrap();
            estimate_arm_probability(&spec, LAMBDA_C, ArmDetector::Exact, 1500, &seed).unwrap().result
        })
        .collect();
    for w in est.windows(2) {
        assert!(w[1].estimate <= w[0].estimate + 3.0 * (w[0].stderr.hypot(w[1].stderr)), "{w:?}");
    }
}

#[test]
fn quarter_plane_two_arms_are_rarer_than_one_arm() {
    let seed = SeedSpec::new(3, "arms");
    let two = ArmEventSpec::two_arm_quarter(1.0, 8.0).unwrap();
    let one = ArmEventSpec::one_arm(1.0, 8.0, ArmColor::Occupied).unwrap();
    let a = estimate_arm_probability(&two, LAMBDA_C, ArmDetector::Exact, 1500, &seed).unwrap().result;
    let b = estimate_arm_probability(&one, LAMBDA_C, ArmDetector::Exact, 1500, &seed).unwrap().result;
    assert!(a.estimate <= b.estimate + 3.0 * a.stderr.hypot(b.stderr));
}

#[test]
fn voronoi_duality_has_no_exceptions() {
    let r = duality_check(Model::Voronoi, 4.0, 0.0, 500, &SeedSpec::new(4, "dual")).unwrap();
    assert_eq!(r.mismatches, 0);
}

fn points(max: usize) -> impl Strategy<Value = Vec<(f64, f64, bool)>> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, any::<bool>()), 0..max)
}

fn config(pts: &[(f64, f64, bool)], l: f64) -> percospec::PointConfiguration {
    let marked = pts.iter().map(|&(x, y, b)| MarkedPoint::new(Point2::new(x, y), Sign::from_bool(b))).collect();
    percospec::PointConfiguration::new(marked, Region::square(l), true)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adding_a_disk_never_destroys_a_crossing(pts in points(30), x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let cfg = config(&pts, 3.0);
        let bx = Rect::square(2.0);
        let before = occupied_crossing(&cfg, &bx).crossed;
        let after = occupied_crossing(&cfg.with_point(MarkedPoint::new(Point2::new(x, y), Sign::Plus)), &bx).crossed;
        prop_assert!(!before || after);
    }

    #[test]
    fn black_and_white_crossings_are_complementary(seed in 0u64..10_000) {
        let cfg = sample_poisson(1.0, &Region::square(12.0), true, &SeedSpec::new(seed, "prop-dual")).unwrap();
        let t = VoronoiTessellation::build(&cfg).unwrap();
        let bx = Rect::square(2.0);
        use percospec::voronoi::{voronoi_crossing, Axis};
        let black = voronoi_crossing(&t, &bx, Sign::Plus, Axis::LeftRight, true).unwrap();
        let white = voronoi_crossing(&t, &bx, Sign::Minus, Axis::TopBottom, true).unwrap();
        prop_assert_ne!(black, white);
    }

    #[test]
    fn decomposition_reconstructs_and_keeps_energy(values in prop::collection::vec(-1.0..1.0f64, 1usize..=6).prop_map(|v| {
        let n = v.len();
        (0..1usize << n).map(|m| v[m % n] * if m.count_ones() % 2 == 0 { 1.0 } else { -0.5 }).collect::<Vec<f64>>()
    })) {
        let t = HoeffdingTable::from_values(&values).unwrap();
        let back = t.reconstruct();
        for (a, b) in values.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let energy = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
        prop_assert!((t.energy() - energy).abs() < 1e-10);
    }

    #[test]
    fn mark_blind_functional_has_only_the_empty_coefficient(seed in 0u64..1000, n in 1usize..8) {
        let cfg = sample_binomial(n, &Rect::square(2.0), true, &SeedSpec::new(seed, "blind")).unwrap();
        let t = hoeffding_decompose(&BooleanCrossing { l: 1.0 }, &cfg).unwrap();
        let levels = t.level_energies();
        prop_assert!(levels.iter().skip(1).all(|e| e.abs() < 1e-12));
        prop_assert!((levels[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn voronoi_crossing_is_a_sign(seed in 0u64..1000) {
        let cfg = sample_binomial(12, &Rect::square(3.0), true, &SeedSpec::new(seed, "sign")).unwrap();
        let v = percospec::functional::Functional::eval(&VoronoiCrossing { l: 1.0, certify: false }, &cfg).unwrap();
        prop_assert!(v == 1.0 || v == -1.0);
    }
}
