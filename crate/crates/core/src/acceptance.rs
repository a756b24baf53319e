//! The acceptance manifest: twelve desk-scale checks, each reduced to a pass flag,
//! a one-line detail and a deterministic JSON payload.

use crate::capacity::{check_cap_l_comparison, condenser_capacity, density_scan};
use crate::fit::geometric_grid;
use crate::geometry::{discretize, spacing_for_count, CompactSet, Domain};
use crate::point::Point;
use crate::potential::{
    green_oracle, holder_from_mollifier, relative_extremal, FieldMeta, ObstacleSpec, Richardson,
    ScalarField,
};
use crate::projective::{
    chart_sandwich_check, global_extremal, locality_check, recorded_sup, ChartWeight,
    GlobalExtremal, SANDWICH_RES,
};
use crate::regularity::{fit_holder, global_modulus, local_hcp_scan};
use crate::siciak::{ExtremalEstimate, WeightFn};
use crate::theorems::{
    holder_density_to_local, rat, regularity_pair, verify, weak_local_to_global,
    weak_to_local_direct, weighted_exponent, ClaimId, ExponentBudget, Rational, VerifyInputs,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::time::Instant;

/// Slack allowed for every pointwise sandwich of criterion 11.
pub const SANDWICH_TOL: f64 = 0.03;
/// Wall-time budget of the local scan of criterion 6, in seconds.
pub const SCAN_BUDGET_SECS: f64 = 300.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    /// Numbers behind the verdict; contains no timings so reruns compare bytewise.
    pub payload: Value,
}

impl CriterionResult {
    fn new(id: u8, title: &str, pass: bool, detail: String, payload: Value) -> Self {
        CriterionResult {
            id,
            title: title.into(),
            pass,
            detail,
            payload,
        }
    }

    fn failed(id: u8, title: &str, err: impl std::fmt::Display) -> Self {
        let msg = err.to_string();
        CriterionResult::new(id, title, false, format!("error: {msg}"), json!({ "error": msg }))
    }

    /// `[ 3] PASS condenser capacity: ...`
    pub fn line(&self) -> String {
        format!(
            "[{:>2}] {} {}: {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.detail
        )
    }
}

pub const TITLES: [&str; 12] = [
    "disk extremal oracle",
    "segment oracle cross-validation",
    "condenser capacity",
    "capacity-extremal comparison",
    "capacity density constant",
    "convex local property of order 1",
    "exponent algebra",
    "projective hemisphere",
    "locality on CP^1",
    "mollifier Hölder estimator",
    "sandwich suites",
    "determinism",
];

fn title(id: u8) -> &'static str {
    TITLES[id as usize - 1]
}

fn wrap(id: u8, body: impl FnOnce() -> Result<CriterionResult, String>) -> CriterionResult {
    body().unwrap_or_else(|e| CriterionResult::failed(id, title(id), e))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn unit_disk_estimate(count: usize) -> Result<ExtremalEstimate, String> {
    let disk = CompactSet::disk(0.0, 0.0, 1.0);
    let cloud = discretize(&disk, spacing_for_count(PI, 2, count)).map_err(err)?;
    ExtremalEstimate::new(&cloud, 64, None).map_err(err)
}

/// 1. `|L^_{unit disk}(2) - log 2| <= 0.01` at degree 64 on a 2048-point cloud.
pub fn criterion_1() -> CriterionResult {
    wrap(1, || {
        let est = unit_disk_estimate(2048)?;
        let v = est.value(&Point::c1(2.0, 0.0));
        let e = (v - 2f64.ln()).abs();
        Ok(CriterionResult::new(
            1,
            title(1),
            e <= 0.01,
            format!("L^(2) = {v:.6}, |error| = {e:.2e} (tol 0.01, {} points)", est.cloud.len()),
            json!({ "value": v, "error": e, "cloud": est.cloud.len() }),
        ))
    })
}

const CHART: [[f64; 2]; 2] = [[-4.0, 4.0], [-4.0, 4.0]];

/// 2. Segment: `|L^(2) - green| <= 0.02` and `green(2) = 1.3170 ± 0.01`.
pub fn criterion_2() -> CriterionResult {
    wrap(2, || {
        let seg = CompactSet::segment(Point::c1(-1.0, 0.0), Point::c1(1.0, 0.0));
        let cloud = discretize(&seg, 0.001).map_err(err)?;
        let coarse = ExtremalEstimate::new(&cloud, 32, None).map_err(err)?;
        let fine = ExtremalEstimate::new(&cloud, 64, None).map_err(err)?;
        let z = Point::c1(2.0, 0.0);
        let l = fine.value(&z);
        let data = Richardson {
            coarse: &coarse,
            fine: &fine,
        };
        let g = green_oracle(&seg, &data, CHART, 1024).map_err(err)?;
        let gv = g.sample(&z).ok_or("sample outside the oracle box")?;
        let exact = 1.3170;
        let pass = (l - gv).abs() <= 0.02 && (gv - exact).abs() <= 0.01;
        Ok(CriterionResult::new(
            2,
            title(2),
            pass,
            format!("L^(2) = {l:.5}, green(2) = {gv:.5}, |L^ - green| = {:.2e} (tol 0.02), |green - 1.3170| = {:.2e} (tol 0.01)", (l - gv).abs(), (gv - exact).abs()),
            json!({ "leja": l, "green": gv, "residual": g.meta.residual }),
        ))
    })
}

/// 3. `Cap(B(0,1/e), B(0,1)) = 2 pi` within 1% at res 1024; scaling by 2 within 1%.
pub fn criterion_3() -> CriterionResult {
    wrap(3, || {
        let r = (-1f64).exp();
        let base = condenser_capacity(&CompactSet::disk(0.0, 0.0, r), &Domain::disk(0.0, 0.0, 1.0), 1024)
            .map_err(err)?;
        let rel = (base.value / (2.0 * PI) - 1.0).abs();
        let set = CompactSet::disk(0.3, -0.1, 0.2);
        let small = condenser_capacity(&set, &Domain::disk(0.0, 0.0, 1.0), 512).map_err(err)?;
        let big = condenser_capacity(&CompactSet::disk(0.6, -0.2, 0.4), &Domain::disk(0.0, 0.0, 2.0), 512)
            .map_err(err)?;
        let scale = (big.value / small.value - 1.0).abs();
        Ok(CriterionResult::new(
            3,
            title(3),
            rel <= 0.01 && scale <= 0.01,
            format!("Cap = {:.5} vs 2 pi (rel {rel:.2e}, tol 1%); Cap(2E,2O)/Cap(E,O) - 1 = {scale:.2e} (tol 1%)", base.value),
            json!({ "cap": base.value, "spread": base.spread, "scaled": [small.value, big.value] }),
        ))
    })
}

fn comparison_suite() -> Vec<(&'static str, CompactSet, f64)> {
    vec![
        ("concentric disk", CompactSet::disk(0.0, 0.0, (-1f64).exp()), 0.015),
        ("offset disk", CompactSet::disk(0.2, 0.1, 0.25), 0.01),
        ("segment", CompactSet::segment(Point::c1(-0.5, 0.0), Point::c1(0.5, 0.0)), 0.0005),
        ("square", CompactSet::rect([-0.3, 0.3], [-0.3, 0.3]), 0.0135),
        (
            "two disks",
            CompactSet::union(vec![CompactSet::disk(-0.3, 0.0, 0.15), CompactSet::disk(0.3, 0.0, 0.15)]),
            0.0084,
        ),
    ]
}

/// 4. `sup_{B(0,1)} L^_F >= 2 pi / Cap(F, B(0,1))` with slack >= -0.02 on five sets;
/// `|slack| <= 0.04` for the concentric disk.
pub fn criterion_4() -> CriterionResult {
    wrap(4, || {
        let domain = Domain::disk(0.0, 0.0, 1.0);
        let mut rows = Vec::new();
        let mut pass = true;
        let mut worst = f64::INFINITY;
        let mut tight = f64::NAN;
        for (name, set, spacing) in comparison_suite() {
            let cloud = discretize(&set, spacing).map_err(err)?;
            let est = ExtremalEstimate::new(&cloud, 64, None).map_err(err)?;
            let cap = condenser_capacity(&set, &domain, 512).map_err(err)?;
            let r = set.farthest_bound(&Point::origin(1)) + 1e-3;
            let v = check_cap_l_comparison(&set, 1.0, r, &est, &cap).map_err(err)?;
            pass &= v.slack >= -0.02;
            worst = worst.min(v.slack);
            if name == "concentric disk" {
                tight = v.slack;
                pass &= v.slack.abs() <= 0.04;
            }
            rows.push(json!({ "set": name, "cap": cap.value, "sup": v.measured, "lower": v.predicted, "slack": v.slack }));
        }
        Ok(CriterionResult::new(
            4,
            title(4),
            pass,
            format!("min slack {worst:.4} over 5 sets (tol -0.02); concentric |slack| = {:.4} (tol 0.04)", tight.abs()),
            Value::Array(rows),
        ))
    })
}

fn local_windows() -> (Vec<f64>, Vec<f64>) {
    (vec![1.0, 0.5, 0.25], geometric_grid(0.01, 2.0, 4))
}

/// 5. Unit disk: local fit `(mu, C, q)`, density scan at order `q`,
/// `kappa >= 0.95 (2 pi)/(4^mu C)`.
pub fn criterion_5() -> CriterionResult {
    wrap(5, || {
        let disk = CompactSet::disk(0.0, 0.0, 1.0);
        let (rs, ds) = local_windows();
        let (fit, _) = local_hcp_scan(&disk, &Point::c1(1.0, 0.0), &rs, &ds, 64, 0.03).map_err(err)?;
        let probes = [Point::c1(1.0, 0.0), Point::c1(0.0, 1.0), Point::c1(-0.6, -0.8)];
        let q = fit.q.max(0.0);
        let scan = density_scan(&disk, &Domain::disk(0.0, 0.0, 3.0), &probes, &[0.5, 0.25, 0.125], q, 384)
            .map_err(err)?;
        let inputs = VerifyInputs {
            dim: 1,
            local_fit: Some(fit.clone()),
            density: Some(scan.clone()),
            ..Default::default()
        };
        let v = verify(ClaimId::LemCapdensity, &inputs, None).map_err(err)?;
        Ok(CriterionResult::new(
            5,
            title(5),
            v.measured >= 0.95 * v.predicted && scan.failures.is_empty(),
            format!(
                "local fit mu = {:.4}, C = {:.4}, q = {:.4}; kappa = {:.4} vs bound {:.4} (need ratio >= 0.95, got {:.4})",
                fit.mu, fit.c, fit.q, v.measured, v.predicted, v.measured / v.predicted
            ),
            json!({ "fit": fit, "kappa": scan.kappa, "caps": scan.caps, "bound": v.predicted }),
        ))
    })
}

/// 6. Disk and unit square: `q <= 1.1` and local `mu` within 0.1 of the global fit.
pub fn criterion_6() -> CriterionResult {
    wrap(6, || {
        let cases = [
            ("disk", CompactSet::disk(0.0, 0.0, 1.0), Point::c1(1.0, 0.0), 0.039),
            ("square", CompactSet::rect([0.0, 1.0], [0.0, 1.0]), Point::c1(0.0, 0.0), 0.022),
        ];
        let (rs, ds) = local_windows();
        let start = Instant::now();
        let mut pass = true;
        let mut notes = Vec::new();
        let mut rows = Vec::new();
        for (name, set, a, spacing) in cases {
            let (fit, _) = local_hcp_scan(&set, &a, &rs, &ds, 64, 0.03).map_err(err)?;
            let cloud = discretize(&set, spacing).map_err(err)?;
            let est = ExtremalEstimate::new(&cloud, 64, None).map_err(err)?;
            let global = fit_holder(&global_modulus(&est, &geometric_grid(0.01, 2.0, 5)).map_err(err)?)
                .map_err(err)?;
            let ok = fit.q <= 1.1 && (fit.mu - global.mu).abs() <= 0.1;
            pass &= ok;
            notes.push(format!("{name}: q = {:.3}, mu = {:.3}, global mu = {:.3}", fit.q, fit.mu, global.mu));
            rows.push(json!({ "set": name, "local": fit, "global": global }));
        }
        let secs = start.elapsed().as_secs_f64();
        pass &= secs <= SCAN_BUDGET_SECS;
        Ok(CriterionResult::new(
            6,
            title(6),
            pass,
            format!("{} (tol q <= 1.1, |mu - global| <= 0.1; {secs:.1} s of {SCAN_BUDGET_SECS} s)", notes.join("; ")),
            Value::Array(rows),
        ))
    })
}

/// 7. Exact rational identities, zero tolerance.
pub fn criterion_7() -> CriterionResult {
    wrap(7, || {
        let budget = |mu: Rational, q: Rational, n: u32| ExponentBudget::new(mu, q, n).map_err(err);
        let half = rat(1, 2);
        let one = rat(1, 1);
        let mut checks: Vec<(String, bool)> = Vec::new();
        let w = weighted_exponent(&budget(one, one, 1)?);
        checks.push((format!("weighted_exponent(1,1) = {}", w.exponent), w.exponent == rat(1, 4)));
        let g = weak_local_to_global(&budget(half, one, 1)?);
        checks.push((
            format!("weak_local_to_global(1/2,1,1) = ({}, {})", g.mu_global, g.density_order),
            g.mu_global == rat(1, 3) && g.density_order == one,
        ));
        let p = regularity_pair(&budget(half, one, 1)?);
        checks.push((
            format!("regularity_pair(1/2,1) = ({}, {})", p.alpha, p.alpha_prime),
            p.alpha == rat(1, 3) && p.alpha_prime == rat(1, 30),
        ));
        let l = holder_density_to_local(half, one).map_err(err)?;
        checks.push((
            format!("holder_density_to_local(1/2,1) = ({}, {})", l.mu, l.order),
            l.mu == half && l.order == rat(4, 1),
        ));
        let d = weak_to_local_direct(&budget(half, one, 2)?);
        checks.push((
            format!("weak_to_local_direct(1/2,1,2) = ({}, {})", d.mu, d.order),
            d.mu == half && d.order == rat(3, 1),
        ));
        // Weak local -> global -> local lands at order 2nq + 2.
        let mut composed = true;
        for n in 1..=3u32 {
            for (mp, mq) in [(1, 2), (1, 1), (2, 3)] {
                for (qp, qq) in [(1, 1), (1, 2), (3, 1)] {
                    let (mu, q) = (rat(mp, mq), rat(qp, qq));
                    let g = weak_local_to_global(&budget(mu, q, n)?);
                    let back = holder_density_to_local(g.mu_global, g.density_order).map_err(err)?;
                    composed &= back.order == rat(2 * n as i64, 1) * q + rat(2, 1);
                }
            }
        }
        checks.push(("composition order 2nq+2".into(), composed));
        let pass = checks.iter().all(|c| c.1);
        let detail = checks.iter().map(|c| c.0.as_str()).collect::<Vec<_>>().join("; ");
        Ok(CriterionResult::new(
            7,
            title(7),
            pass,
            format!("{detail} (exact)"),
            json!(checks.iter().map(|c| json!({ "check": c.0, "pass": c.1 })).collect::<Vec<_>>()),
        ))
    })
}

/// 8. Hemisphere: `sup V^ = log(2)/2 ± 0.01`, `V^ <= 0.02` on `K`, `V^(3) = log(1.8)/2 ± 0.02`.
pub fn criterion_8() -> CriterionResult {
    wrap(8, || {
        let f = global_extremal(&CompactSet::disk(0.0, 0.0, 1.0), 64, 0.039).map_err(err)?;
        let sup = recorded_sup(&f);
        let mut on_k = f64::NEG_INFINITY;
        for j in 0..f.ny {
            for i in 0..f.nx {
                if f.node(i, j).norm() <= 1.0 {
                    on_k = on_k.max(f.at(i, j));
                }
            }
        }
        let v3 = f.sample(&Point::c1(3.0, 0.0)).ok_or("3 outside the chart box")?;
        let (e_sup, e3) = ((sup - 0.5 * 2f64.ln()).abs(), (v3 - 0.5 * 1.8f64.ln()).abs());
        Ok(CriterionResult::new(
            8,
            title(8),
            e_sup <= 0.01 && on_k <= 0.02 && e3 <= 0.02,
            format!("sup = {sup:.5} (|err| {e_sup:.2e}, tol 0.01); max on K = {on_k:.2e} (tol 0.02); V^(3) = {v3:.5} (|err| {e3:.2e}, tol 0.02)"),
            json!({ "sup": sup, "max_on_k": on_k, "v3": v3 }),
        ))
    })
}

/// 9. Exponents of `V^_K` and `V^_{K ∩ B(a, 1/2)}` at `a = 1` agree within 0.1.
pub fn criterion_9() -> CriterionResult {
    wrap(9, || {
        let rep = locality_check(
            &CompactSet::disk(0.0, 0.0, 1.0),
            &Point::c1(1.0, 0.0),
            0.5,
            &geometric_grid(0.01, 2.0, 5),
            64,
            0.039,
        )
        .map_err(err)?;
        Ok(CriterionResult::new(
            9,
            title(9),
            rep.verdict.pass,
            format!(
                "mu(K) = {:.4}, mu(K ∩ B) = {:.4}, |diff| = {:.4} (tol 0.1)",
                rep.full.mu, rep.restricted.mu, rep.verdict.measured
            ),
            json!({ "full": rep.full, "restricted": rep.restricted }),
        ))
    })
}

fn synthetic(nodes: usize, mu: f64) -> Result<ScalarField, String> {
    ScalarField::from_fn(
        [[-1.0, 1.0], [-1.0, 1.0]],
        nodes,
        nodes,
        FieldMeta {
            kind: "synthetic".into(),
            ..Default::default()
        },
        |z| z.norm().powf(mu),
    )
    .map_err(err)
}

/// 10. `|x|^mu` for `mu` in {1/2, 1}: the mollifier fit recovers `mu` within 0.05.
pub fn criterion_10() -> CriterionResult {
    wrap(10, || {
        let deltas = geometric_grid(0.05, 2.0, 4);
        let mut pass = true;
        let mut notes = Vec::new();
        let mut rows = Vec::new();
        for mu in [0.5, 1.0] {
            let fit = holder_from_mollifier(&synthetic(801, mu)?, &deltas).map_err(err)?;
            pass &= (fit.mu - mu).abs() <= 0.05;
            notes.push(format!("mu {mu} -> {:.4}", fit.mu));
            rows.push(json!({ "mu": mu, "fit": fit }));
        }
        Ok(CriterionResult::new(
            10,
            title(10),
            pass,
            format!("{} (tol 0.05)", notes.join(", ")),
            Value::Array(rows),
        ))
    })
}

/// Nodes of `field` inside `domain`.
fn inside(field: &ScalarField, domain: &Domain) -> Vec<(usize, usize, Point)> {
    let mut out = Vec::new();
    for j in 0..field.ny {
        for i in 0..field.nx {
            let z = field.node(i, j);
            if domain.contains(&z) {
                out.push((i, j, z));
            }
        }
    }
    out
}

fn solve(set: &CompactSet, weight: Option<WeightFn>, res: usize) -> Result<ScalarField, String> {
    relative_extremal(&ObstacleSpec {
        domain: Domain::disk(0.0, 0.0, 1.0),
        set: set.clone(),
        weight,
        res,
    })
    .map_err(err)
}

/// `C1 u_F <= L_F <= C2 u_F` on the unit disk, `C1 = min L^` and `C2 = max L^` on
/// its boundary. Returns the smaller of the two slacks.
pub fn comparison_sandwich(set: &CompactSet, est: &ExtremalEstimate, res: usize) -> Result<f64, String> {
    let u = solve(set, None, res)?;
    let ring: Vec<Point> = (0..1024)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 1024.0;
            Point::c1(t.cos(), t.sin())
        })
        .collect();
    let vals = est.values(&ring);
    let c1 = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let c2 = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut slack = f64::INFINITY;
    for (i, j, z) in inside(&u, &Domain::disk(0.0, 0.0, 1.0)) {
        let (uz, lz) = (u.at(i, j), est.value(&z));
        slack = slack.min(lz - c1 * uz).min(c2 * uz - lz);
    }
    Ok(slack)
}

/// `u_E + inf_B phi <= u_{E,phi} <= (1 + |phi|_B) u_E + sup_E phi` for `phi = |z|^2`.
pub fn weighted_sandwich(set: &CompactSet, res: usize) -> Result<f64, String> {
    let phi = WeightFn::quadratic(1.0, Point::c1(0.0, 0.0));
    let u = solve(set, None, res)?;
    let v = solve(set, Some(phi.clone()), res)?;
    let pts = inside(&u, &Domain::disk(0.0, 0.0, 1.0));
    let on_ball: Vec<f64> = pts.iter().map(|p| phi.eval(&p.2)).collect();
    let inf_b = on_ball.iter().cloned().fold(f64::INFINITY, f64::min);
    let sup_b = on_ball.iter().cloned().fold(0.0, f64::max);
    let sup_e = pts
        .iter()
        .filter(|p| set.contains(&p.2))
        .map(|p| phi.eval(&p.2))
        .fold(0.0, f64::max);
    let mut slack = f64::INFINITY;
    for (i, j, _) in pts {
        let (ue, ve) = (u.at(i, j), v.at(i, j));
        slack = slack.min(ve - ue - inf_b).min((1.0 + sup_b) * ue + sup_e - ve);
    }
    Ok(slack)
}

/// `u_{E2,phi1} <= u_{E1,phi1} <= u_{E1,phi2}` for `E1 ⊂ E2`, `phi1 <= phi2`.
pub fn monotonicity_sandwich(res: usize) -> Result<f64, String> {
    let e1 = CompactSet::disk(0.1, 0.0, 0.2);
    let e2 = CompactSet::disk(0.1, 0.0, 0.35);
    let w1 = WeightFn::quadratic(0.5, Point::c1(0.0, 0.0));
    let w2 = WeightFn::quadratic(1.0, Point::c1(0.0, 0.0));
    let a = solve(&e2, Some(w1.clone()), res)?;
    let b = solve(&e1, Some(w1), res)?;
    let c = solve(&e1, Some(w2), res)?;
    let mut slack = f64::INFINITY;
    for (i, j, _) in inside(&a, &Domain::disk(0.0, 0.0, 1.0)) {
        slack = slack.min(b.at(i, j) - a.at(i, j)).min(c.at(i, j) - b.at(i, j));
    }
    Ok(slack)
}

/// `V_K + inf_K phi <= V_{K,phi} <= V_K + sup_K phi` on the hemisphere for a
/// constant and a quadratic weight, sampled on a spiral over `|z| <= 5`.
pub fn global_weight_sandwich() -> Result<f64, String> {
    let k = CompactSet::disk(0.0, 0.0, 1.0);
    let plain = GlobalExtremal::build(&k, None, 48, 0.039).map_err(err)?;
    let mut slack = f64::INFINITY;
    for (w, inf, sup) in [
        (WeightFn::constant(0.4), 0.4, 0.4),
        (WeightFn::quadratic(0.5, Point::c1(0.0, 0.0)), 0.0, 0.5),
    ] {
        let g = GlobalExtremal::build(&k, Some(&w), 48, 0.039).map_err(err)?;
        for s in 0..200 {
            let (t, r) = (s as f64 * 0.37, 0.025 * s as f64);
            let z = Point::c1(r * t.cos(), r * t.sin());
            let (v, vw) = (plain.value(&z), g.value(&z));
            slack = slack.min(vw - v - inf).min(v + sup - vw);
        }
    }
    Ok(slack)
}

/// 11. All pointwise sandwiches hold with slack >= -0.03.
pub fn criterion_11() -> CriterionResult {
    wrap(11, || {
        let mut legs: Vec<(String, f64)> = Vec::new();
        for (name, set, spacing) in comparison_suite() {
            let cloud = discretize(&set, spacing).map_err(err)?;
            let est = ExtremalEstimate::new(&cloud, 64, None).map_err(err)?;
            legs.push((format!("compare-C {name}"), comparison_sandwich(&set, &est, 256)?));
        }
        legs.push((
            "weighted re-ext".into(),
            weighted_sandwich(&CompactSet::disk(0.0, 0.2, 0.3), 256)?,
        ));
        legs.push(("re-ext monotonicity".into(), monotonicity_sandwich(256)?));
        legs.push(("global weight sandwich".into(), global_weight_sandwich()?));
        let o = Point::c1(0.0, 0.0);
        let rep = chart_sandwich_check(
            &CompactSet::disk(0.0, 0.0, 0.3),
            &ChartWeight::new(0.2, o.clone()).map_err(err)?,
            &ChartWeight::new(2.0, o).map_err(err)?,
            &Domain::disk(0.0, 0.0, 0.9),
            64,
            0.02,
            SANDWICH_RES,
        )
        .map_err(err)?;
        legs.push(("chart lower leg".into(), rep.lower_slack));
        legs.push(("chart upper leg".into(), rep.upper_slack));
        let worst = legs.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
        let (wname, _) = legs.iter().find(|l| l.1 == worst).cloned().unwrap_or_default();
        Ok(CriterionResult::new(
            11,
            title(11),
            worst >= -SANDWICH_TOL,
            format!("{} legs, min slack {worst:.4} at {wname} (tol -{SANDWICH_TOL})", legs.len()),
            json!(legs.iter().map(|l| json!({ "leg": l.0, "slack": l.1 })).collect::<Vec<_>>()),
        ))
    })
}

pub fn run(id: u8) -> Option<CriterionResult> {
    Some(match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        _ => return None,
    })
}

/// Serialized payloads, the bytes criterion 12 compares.
pub fn payload_bytes(results: &[CriterionResult]) -> Vec<u8> {
    let payloads: Vec<(u8, &Value)> = results.iter().map(|r| (r.id, &r.payload)).collect();
    serde_json::to_vec(&payloads).expect("json values serialize")
}

/// 12. A second run of criteria 1 to 11 reproduces every payload byte for byte.
pub fn criterion_12(first: &[CriterionResult]) -> CriterionResult {
    let second: Vec<CriterionResult> = first.iter().filter_map(|r| run(r.id)).collect();
    let (a, b) = (payload_bytes(first), payload_bytes(&second));
    let differing: Vec<u8> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x.payload != y.payload)
        .map(|(x, _)| x.id)
        .collect();
    CriterionResult::new(
        12,
        title(12),
        a == b,
        if a == b {
            format!("{} payload bytes identical across two runs", a.len())
        } else {
            format!("payloads differ for criteria {differing:?}")
        },
        json!({ "bytes": a.len() }),
    )
}

/// Runs the manifest in order; criterion 12 reruns the first eleven.
pub fn run_all() -> Vec<CriterionResult> {
    let mut results: Vec<CriterionResult> = (1..=11).filter_map(run).collect();
    let det = criterion_12(&results);
    results.push(det);
    results
}
