use super::*;
use crate::geometry::{discretize, CompactSet};

fn disk_cloud(r: f64, spacing: f64) -> PointCloud {
    discretize(&CompactSet::disk(0.0, 0.0, r), spacing).unwrap()
}

fn segment_cloud(spacing: f64) -> PointCloud {
    discretize(
        &CompactSet::segment(Point::c1(-1.0, 0.0), Point::c1(1.0, 0.0)),
        spacing,
    )
    .unwrap()
}

#[test]
fn leja_on_circle_gives_distinct_points() {
    let pts: Vec<Point> = sphere_lattice(1, 256);
    let cloud = PointCloud::from_points(CompactSet::disk(0.0, 0.0, 1.0), pts, 0.03).unwrap();
    let b = build_leja(&cloud, 8, None).unwrap();
    assert_eq!(b.points.len(), 9);
    for i in 0..9 {
        for j in 0..i {
            assert!(b.points[i].dist(&b.points[j]) > 1e-9);
        }
    }
}

#[test]
fn leja_on_interval_follows_arcsine_density() {
    let b = build_leja(&segment_cloud(0.01), 16, None).unwrap();
    assert_eq!(b.points.len(), 17);
    // Arcsine law: mass of [-1,-1/2] ∪ [1/2,1] is 2/3; of [-1/2,1/2] is 1/3.
    let outer = b.points.iter().filter(|p| p.0[0].re.abs() >= 0.5).count();
    let frac = outer as f64 / 17.0;
    assert!((frac - 2.0 / 3.0).abs() < 0.12, "{frac}");
    // Uniform spacing would put only half the points in the outer band.
    assert!(frac > 0.55);
}

#[test]
fn collinear_points_in_c2_collapse() {
    let z = |x: f64| Point::c2(Complex64::new(x, 0.0), Complex64::new(2.0 * x, 0.0));
    let set = CompactSet::segment(z(0.0), z(1.0));
    let cloud = PointCloud::from_points(set, vec![z(0.0), z(0.5), z(1.0)], 0.5).unwrap();
    assert!(matches!(
        build_leja(&cloud, 2, None),
        Err(SiciakError::PivotCollapse { .. })
    ));
}

#[test]
fn disk_value_at_two() {
    let cloud = disk_cloud(1.0, 0.039);
    assert!((1900..2300).contains(&cloud.len()), "{}", cloud.len());
    let est = ExtremalEstimate::new(&cloud, 64, None).unwrap();
    let v = evaluate_l(&est, &Point::c1(2.0, 0.0)).unwrap();
    assert!((v - 2f64.ln()).abs() <= 0.01, "{v}");
    assert_eq!(evaluate_l(&est, &Point::c1(0.5, 0.0)).unwrap(), 0.0);
}

#[test]
fn segment_value_at_two() {
    let est = ExtremalEstimate::new(&segment_cloud(0.001), 64, None).unwrap();
    let v = est.value(&Point::c1(2.0, 0.0));
    let oracle = (2.0 + 3f64.sqrt()).ln();
    assert!((v - oracle).abs() <= 0.02, "{v}");
}

#[test]
fn constant_weight_shifts_by_constant() {
    let cloud = disk_cloud(1.0, 0.039);
    let e0 = ExtremalEstimate::new(&cloud, 64, None).unwrap();
    let w = WeightFn::constant(0.7);
    let e1 = ExtremalEstimate::new(&cloud, 64, Some(&w)).unwrap();
    let z = Point::c1(2.0, 0.0);
    let gap = evaluate_l_weighted(&e1, &z).unwrap() - evaluate_l(&e0, &z).unwrap();
    assert!((gap - 0.7).abs() <= 0.02, "{gap}");
}

#[test]
fn fubini_study_weight_on_disk() {
    let cloud = disk_cloud(1.0, 0.039);
    let w = WeightFn::fubini_study();
    let est = ExtremalEstimate::new(&cloud, 64, Some(&w)).unwrap();
    let v = est.value(&Point::c1(3.0, 0.0));
    let oracle = 0.5 * 2f64.ln() + 3f64.ln();
    assert!((v - oracle).abs() <= 0.02, "{v} vs {oracle}");
}

#[test]
fn declared_holder_violation_rejected() {
    let w = WeightFn::new("steep", |z: &Point| 5.0 * z.norm());
    assert!(matches!(
        w.with_holder(1, 1.0, 1.0),
        Err(SiciakError::HolderViolation(_))
    ));
    let ok = WeightFn::new("sqrt", |z: &Point| z.norm().sqrt());
    assert!(ok.with_holder(1, 0.5, 1.0).is_ok());
}

#[test]
fn sup_on_small_disk() {
    let r = (-1f64).exp();
    let cloud = disk_cloud(r, r / 25.0);
    let mut est = ExtremalEstimate::new(&cloud, 64, None).unwrap();
    let s = est.sup_on_ball(&Point::c1(0.0, 0.0), 1.0, 256).unwrap();
    assert!((s - 1.0).abs() <= 0.02, "{s}");
    assert_eq!(est.sup_value, Some(s));
    assert!(matches!(
        est.sup_on_ball(&Point::c1(0.0, 0.0), 1.0, 0),
        Err(SiciakError::NoSamples)
    ));
    let full = ExtremalEstimate::new(&disk_cloud(1.0, 0.05), 32, None).unwrap();
    let s = full.sup_over_ball(&Point::c1(0.0, 0.0), 1.0, 256).unwrap();
    assert!(s.abs() <= 0.02, "{s}");
}

#[test]
fn ball_in_c2() {
    let set = CompactSet::ball(Point::origin(2), 1.0);
    let cloud = discretize(&set, 0.25).unwrap();
    let est = ExtremalEstimate::new(&cloud, 8, None).unwrap();
    let z = Point::c2(Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0));
    let v = est.value(&z);
    assert!((v - 2f64.ln()).abs() <= 0.02, "{v}");
}
