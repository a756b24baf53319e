use super::*;
use crate::fit::geometric_grid;

const SPACING: f64 = 0.039;

fn hemisphere() -> CompactSet {
    CompactSet::disk(0.0, 0.0, 1.0)
}

fn closed_form(z: &Point) -> f64 {
    let r2 = z.norm() * z.norm();
    if r2 <= 1.0 {
        0.0
    } else {
        0.5 * (2.0 * r2 / (1.0 + r2)).ln()
    }
}

#[test]
fn hemisphere_matches_closed_form() {
    let f = global_extremal(&hemisphere(), 64, SPACING).unwrap();
    let sup = recorded_sup(&f);
    assert!((sup - 0.5 * 2f64.ln()).abs() <= 0.01, "sup {sup}");
    let v3 = f.sample(&Point::c1(3.0, 0.0)).unwrap();
    assert!((v3 - 0.5 * 1.8f64.ln()).abs() <= 0.02, "{v3}");
    let mut worst = 0.0f64;
    for j in 0..f.ny {
        for i in 0..f.nx {
            let z = f.node(i, j);
            let v = f.at(i, j);
            assert!(v >= -0.02);
            if z.norm() <= 1.0 {
                assert!(v <= 0.02, "{v} at {z}");
            }
            worst = worst.max((v - closed_form(&z)).abs());
        }
    }
    assert!(worst <= 0.02, "worst {worst}");
}

#[test]
fn lelong_growth_bound() {
    let g = GlobalExtremal::build(&hemisphere(), None, 64, SPACING).unwrap();
    let fs = FubiniStudyWeight::new(1);
    for k in 0..400 {
        let t = k as f64 * 0.0157;
        let r = 0.02 * k as f64;
        let z = Point::c1(r * t.cos(), r * t.sin());
        let bound = z.norm().ln().max(0.0) + 0.5 * 2f64.ln() + 0.02;
        assert!(g.value(&z) + fs.eval(&z) <= bound, "{z}");
    }
}

#[test]
fn whole_chart_is_zero() {
    let chart = CompactSet::rect([-4.0, 4.0], [-4.0, 4.0]);
    let g = GlobalExtremal::build(&chart, None, 32, 0.2).unwrap();
    let f = g.rasterize(CHART_BOX, 81).unwrap();
    assert!(f.values.iter().all(|v| v.abs() <= 0.02), "max {}", f.max());
}

#[test]
fn point_is_degenerate() {
    let dot = CompactSet::disk(0.5, 0.0, 0.0);
    assert!(global_extremal(&dot, 16, 0.1).is_err());
}

#[test]
fn monotone_in_the_set() {
    let small = GlobalExtremal::build(&CompactSet::disk(0.0, 0.0, 0.6), None, 48, SPACING).unwrap();
    let big = GlobalExtremal::build(&hemisphere(), None, 48, SPACING).unwrap();
    for k in 0..200 {
        let t = k as f64 * 0.37;
        let r = 0.025 * k as f64;
        let z = Point::c1(r * t.cos(), r * t.sin());
        assert!(big.value(&z) <= small.value(&z) + 0.03, "{z}");
    }
}

#[test]
fn global_weight_sandwich() {
    let plain = GlobalExtremal::build(&hemisphere(), None, 48, SPACING).unwrap();
    let c = WeightFn::constant(0.4);
    let q = WeightFn::quadratic(0.5, Point::c1(0.0, 0.0));
    for (w, inf, sup) in [(c, 0.4, 0.4), (q, 0.0, 0.5)] {
        let g = GlobalExtremal::build(&hemisphere(), Some(&w), 48, SPACING).unwrap();
        for k in 0..200 {
            let t = k as f64 * 0.37;
            let r = 0.025 * k as f64;
            let z = Point::c1(r * t.cos(), r * t.sin());
            let (v, vw) = (plain.value(&z), g.value(&z));
            assert!(v + inf <= vw + 0.03, "{} at {z}: {v} {vw}", w.label());
            assert!(vw <= v + sup + 0.03, "{} at {z}: {v} {vw}", w.label());
        }
    }
}

#[test]
fn locality_on_hemisphere() {
    let deltas = geometric_grid(0.01, 2.0, 5);
    let rep = locality_check(&hemisphere(), &Point::c1(1.0, 0.0), 0.5, &deltas, 64, SPACING).unwrap();
    assert!((rep.full.mu - 1.0).abs() <= 0.1, "{:?}", rep.full);
    assert!((rep.restricted.mu - 1.0).abs() <= 0.1, "{:?}", rep.restricted);
    assert!(rep.verdict.pass);
}

#[test]
fn locality_ignores_far_component() {
    let deltas = geometric_grid(0.01, 2.0, 5);
    let far = CompactSet::disk(2.5, 0.0, 0.3);
    let union = CompactSet::union(vec![hemisphere(), far.clone()]);
    let a = Point::c1(2.8, 0.0);
    let rep = locality_check(&union, &a, 0.5, &deltas, 64, SPACING).unwrap();
    let alone = locality_check(&far, &a, 0.5, &deltas, 64, SPACING).unwrap();
    assert!(rep.verdict.pass);
    assert!((rep.full.mu - alone.full.mu).abs() <= 0.1);
}

#[test]
fn locality_errors() {
    let deltas = geometric_grid(0.01, 2.0, 5);
    let a = Point::c1(1.0, 0.0);
    assert!(matches!(
        locality_check(&hemisphere(), &a, 5.0, &deltas, 16, 0.1),
        Err(ProjectiveError::RadiusTooLarge(_))
    ));
    assert!(matches!(
        locality_check(&hemisphere(), &Point::c1(2.0, 0.0), 0.5, &deltas, 16, 0.1),
        Err(ProjectiveError::AnchorOutside(_))
    ));
}

#[test]
fn chart_sandwich_legs() {
    let o = Point::c1(0.0, 0.0);
    let rho1 = ChartWeight::new(0.2, o.clone()).unwrap();
    let rho2 = ChartWeight::new(2.0, o).unwrap();
    let rep = chart_sandwich_check(
        &CompactSet::disk(0.0, 0.0, 0.3),
        &rho1,
        &rho2,
        &Domain::disk(0.0, 0.0, 0.9),
        64,
        0.02,
        SANDWICH_RES,
    )
    .unwrap();
    assert!(rep.verdict.pass, "{:?}", rep.verdict);
}

#[test]
fn chart_sandwich_errors() {
    let o = Point::c1(0.0, 0.0);
    assert!(matches!(ChartWeight::new(0.0, o.clone()), Err(ProjectiveError::Amplitude(_))));
    let zero = ChartWeight {
        amplitude: 0.0,
        center: o.clone(),
    };
    let rho2 = ChartWeight::new(2.0, o.clone()).unwrap();
    let dom = Domain::disk(0.0, 0.0, 0.9);
    let k = CompactSet::disk(0.0, 0.0, 0.3);
    assert!(matches!(
        chart_sandwich_check(&k, &zero, &rho2, &dom, 16, 0.05, 64),
        Err(ProjectiveError::Amplitude(_))
    ));
    let touching = CompactSet::disk(0.0, 0.0, 0.9);
    let rho1 = ChartWeight::new(0.2, o).unwrap();
    assert!(matches!(
        chart_sandwich_check(&touching, &rho1, &rho2, &dom, 16, 0.05, 64),
        Err(ProjectiveError::Potential(PotentialError::Clearance { .. }))
    ));
}

#[test]
fn fubini_study_basics() {
    let fs = FubiniStudyWeight::new(1);
    assert_eq!(fs.eval(&Point::c1(0.0, 0.0)), 0.0);
    for k in 0..50 {
        let z = Point::c1(0.3 * k as f64, -0.1 * k as f64);
        let gap = fs.eval(&z) - z.norm().ln().max(0.0);
        assert!((0.0..=0.5 * 2f64.ln() + 1e-12).contains(&gap));
    }
    let w = ChartWeight::new(1.5, Point::c1(0.2, 0.0)).unwrap();
    assert_eq!(w.eval(&Point::c1(0.2, 0.0)), 0.0);
}
