//! Condenser capacity in one variable by discrete flux, capacity-density
//! scans, and the comparison between capacity and extremal functions.

use crate::fit::line_fit;
use crate::geometry::{CompactSet, Domain};
use crate::point::Point;
use crate::potential::{relative_extremal, ObstacleSpec, PotentialError, ScalarField};
use crate::siciak::ExtremalEstimate;
use crate::theorems::{verify, ClaimId, TheoremVerdict, VerifyInputs};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

/// Largest relative spread of the flux over the checked contours.
pub const CONTOUR_TOL: f64 = 0.01;

/// Relative positions of the checked contours between the set and the boundary.
const CONTOUR_FRACTIONS: [f64; 3] = [0.3, 0.5, 0.7];

/// Samples of the sphere used for `sup L^` in comparisons.
const SUP_SAMPLES: usize = 512;

#[derive(Debug, Error)]
pub enum CapacityError {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("no room for a flux contour between the set and the domain boundary")]
    NoContour,
    #[error("flux depends on the contour: relative spread {0:.4} exceeds 1%")]
    ContourDependence(f64),
    #[error("probe point {0} is not in the set")]
    ProbeOutside(Point),
    #[error("radii must be positive and strictly decreasing")]
    Radii,
    #[error("the set dilated by the largest radius {0} is not inside the domain")]
    DilationOutside(f64),
    #[error("capacity is zero; the comparison bound is undefined")]
    ZeroCapacity,
    #[error("the set is not inside the ball of radius {0}")]
    NotInBall(f64),
    #[error("need 0 < r < R, got r = {r}, R = {big_r}")]
    BadRadii { r: f64, big_r: f64 },
    #[error("mu = {0} must lie in (0, 1]")]
    Mu(f64),
    #[error("constant C = {0} must be positive")]
    Constant(f64),
    #[error("capacity in several variables is not computed")]
    Dimension,
}

/// `Cap(K, Omega)` with the contour data it was measured on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub value: f64,
    pub set: CompactSet,
    pub domain: Domain,
    pub res: usize,
    /// The reporting contour `[[x0, x1], [y0, y1]]` (midway).
    pub contour: [[f64; 2]; 2],
    /// Flux through each checked contour, inner to outer.
    pub fluxes: Vec<f64>,
    /// `(max - min) / value` over the checked contours.
    pub spread: f64,
    pub residual: f64,
}

/// Index rectangle `[i0, i1] x [j0, j1]` of nodes counted as inside.
#[derive(Clone, Copy, Debug)]
struct Rect {
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
}

/// `sum (u_out - u_in)` over grid edges leaving the rectangle: the discrete
/// Laplacian mass inside, equal to the total `dd^c u` mass.
fn flux(f: &ScalarField, r: Rect) -> f64 {
    let mut s = 0.0;
    for j in r.j0..=r.j1 {
        s += f.at(r.i0 - 1, j) - f.at(r.i0, j);
        s += f.at(r.i1 + 1, j) - f.at(r.i1, j);
    }
    for i in r.i0..=r.i1 {
        s += f.at(i, r.j0 - 1) - f.at(i, r.j0);
        s += f.at(i, r.j1 + 1) - f.at(i, r.j1);
    }
    s
}

fn contours(f: &ScalarField, set: &CompactSet, domain: &Domain) -> Result<Vec<Rect>, CapacityError> {
    let h = f.hx();
    let bb = set.bounding_box();
    let to_i = |x: f64| (x - f.bounds[0][0]) / h;
    let to_j = |y: f64| (y - f.bounds[1][0]) / h;
    // One extra cell keeps the mask (nodes within h/2 of K) inside.
    let i0 = to_i(bb[0][0]).floor() as i64 - 1;
    let i1 = to_i(bb[0][1]).ceil() as i64 + 1;
    let j0 = to_j(bb[1][0]).floor() as i64 - 1;
    let j1 = to_j(bb[1][1]).ceil() as i64 + 1;
    let fits = |m: i64| {
        let xs = [i0 - m - 1, i1 + m + 1];
        let ys = [j0 - m - 1, j1 + m + 1];
        xs.iter().all(|&i| {
            ys.iter().all(|&j| {
                if i < 0 || j < 0 || i >= f.nx as i64 || j >= f.ny as i64 {
                    return false;
                }
                let z = f.node(i as usize, j as usize);
                z.dist(&domain.center) < domain.radius - h
            })
        })
    };
    if !fits(0) {
        return Err(CapacityError::NoContour);
    }
    let mut m_max = 0;
    while fits(m_max + 1) {
        m_max += 1;
    }
    if m_max < 4 {
        return Err(CapacityError::NoContour);
    }
    Ok(CONTOUR_FRACTIONS
        .iter()
        .map(|t| {
            let m = (t * m_max as f64).round() as i64;
            Rect {
                i0: (i0 - m) as usize,
                i1: (i1 + m) as usize,
                j0: (j0 - m) as usize,
                j1: (j1 + m) as usize,
            }
        })
        .collect())
}

/// Capacity of `field` (a relative extremal function of `set` in `domain`) by flux.
pub fn capacity_from_field(
    field: &ScalarField,
    set: &CompactSet,
    domain: &Domain,
    res: usize,
) -> Result<CapacityReport, CapacityError> {
    let rects = contours(field, set, domain)?;
    let fluxes: Vec<f64> = rects.iter().map(|r| flux(field, *r)).collect();
    let mid = rects[CONTOUR_FRACTIONS.len() / 2];
    let value = fluxes[CONTOUR_FRACTIONS.len() / 2].max(0.0);
    let lo = fluxes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = fluxes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = if value > 0.0 { (hi - lo) / value } else { 0.0 };
    if spread > CONTOUR_TOL {
        return Err(CapacityError::ContourDependence(spread));
    }
    let corner = |i: usize, j: usize| field.node(i, j).0[0];
    let (a, b) = (corner(mid.i0, mid.j0), corner(mid.i1, mid.j1));
    Ok(CapacityReport {
        value,
        set: set.clone(),
        domain: domain.clone(),
        res,
        contour: [[a.re, b.re], [a.im, b.im]],
        fluxes,
        spread,
        residual: field.meta.residual,
    })
}

/// `Cap(K, Omega)` as the flux of `u_{K;Omega}` through a rectangle midway
/// between `K` and the boundary, checked against two other contours.
pub fn condenser_capacity(
    set: &CompactSet,
    domain: &Domain,
    res: usize,
) -> Result<CapacityReport, CapacityError> {
    if set.dim() != 1 {
        return Err(CapacityError::Dimension);
    }
    let field = relative_extremal(&ObstacleSpec {
        domain: domain.clone(),
        set: set.clone(),
        weight: None,
        res,
    })?;
    capacity_from_field(&field, set, domain, res)
}

/// Capacities of `F ∩ B(b, r)` over probes and radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityScan {
    pub set: CompactSet,
    pub domain: Domain,
    pub probes: Vec<Point>,
    /// Strictly decreasing.
    pub radii: Vec<f64>,
    pub res: usize,
    /// `caps[probe][radius]`; `None` marks a failed inner run.
    pub caps: Vec<Vec<Option<f64>>>,
    pub failures: Vec<String>,
    /// Candidate order.
    pub q: f64,
    /// `min Cap / r^q` over successful entries.
    pub kappa: Option<f64>,
    /// Largest per-probe slope of `log Cap` against `log r`.
    pub q_hat: Option<f64>,
}

impl DensityScan {
    /// One row per `(b, r)`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("b_re,b_im,r,cap,ratio\n");
        for (b, row) in self.probes.iter().zip(&self.caps) {
            for (r, c) in self.radii.iter().zip(row) {
                let (cap, ratio) = match c {
                    Some(v) => (format!("{v:.9e}"), format!("{:.9e}", v / r.powf(self.q))),
                    None => ("nan".into(), "nan".into()),
                };
                let _ = writeln!(s, "{:.9e},{:.9e},{:.9e},{cap},{ratio}", b.0[0].re, b.0[0].im, r);
            }
        }
        s
    }
}

/// Uniform density in capacity of order `q`: `Cap(F ∩ B(b,r), O) / r^q` over the grid.
pub fn density_scan(
    set: &CompactSet,
    domain: &Domain,
    probes: &[Point],
    radii: &[f64],
    q: f64,
    res: usize,
) -> Result<DensityScan, CapacityError> {
    if set.dim() != 1 {
        return Err(CapacityError::Dimension);
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CapacityError::Radii);
    }
    if let Some(b) = probes.iter().find(|b| !set.contains(b)) {
        return Err(CapacityError::ProbeOutside((*b).clone()));
    }
    if domain.clearance(set) < radii[0] - 1e-12 {
        return Err(CapacityError::DilationOutside(radii[0]));
    }
    let cells: Vec<(usize, usize)> = (0..probes.len())
        .flat_map(|p| (0..radii.len()).map(move |r| (p, r)))
        .collect();
    let results: Vec<Result<f64, String>> = cells
        .par_iter()
        .map(|&(p, r)| {
            let part = set.clone().restrict(probes[p].clone(), radii[r]);
            condenser_capacity(&part, domain, res)
                .map(|c| c.value)
                .map_err(|e| format!("b={} r={}: {e}", probes[p], radii[r]))
        })
        .collect();
    let mut caps = vec![vec![None; radii.len()]; probes.len()];
    let mut failures = Vec::new();
    for (&(p, r), res) in cells.iter().zip(results) {
        match res {
            Ok(v) => caps[p][r] = Some(v),
            Err(e) => failures.push(e),
        }
    }
    let kappa = caps
        .iter()
        .flat_map(|row| row.iter().zip(radii).filter_map(|(c, r)| c.map(|c| c / r.powf(q))))
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    let q_hat = caps
        .iter()
        .filter_map(|row| {
            let pts: Vec<(f64, f64)> = row
                .iter()
                .zip(radii)
                .filter_map(|(c, r)| c.filter(|c| *c > 0.0).map(|c| (r.ln(), c.ln())))
                .collect();
            (pts.len() >= 2).then(|| {
                let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
                line_fit(&x, &y).1
            })
        })
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    Ok(DensityScan {
        set: set.clone(),
        domain: domain.clone(),
        probes: probes.to_vec(),
        radii: radii.to_vec(),
        res,
        caps,
        failures,
        q,
        kappa,
        q_hat,
    })
}

/// Lower leg of `2 pi / Cap(F, B(0,R))^{1/n} <= sup_{B(0,R)} L_F <= G(r) / Cap`
/// for `F ⊂ B(0, r)`; the product `sup * Cap` (the unknown `G(r)`) is recorded.
pub fn check_cap_l_comparison(
    set: &CompactSet,
    big_r: f64,
    r: f64,
    est: &ExtremalEstimate,
    cap: &CapacityReport,
) -> Result<TheoremVerdict, CapacityError> {
    if !(r > 0.0 && r < big_r) {
        return Err(CapacityError::BadRadii { r, big_r });
    }
    let n = set.dim();
    if set.farthest_bound(&Point::origin(n)) > r + 1e-12 {
        return Err(CapacityError::NotInBall(r));
    }
    if !(cap.value > 0.0) {
        return Err(CapacityError::ZeroCapacity);
    }
    let sup = est
        .sup_over_ball(&Point::origin(n), big_r, SUP_SAMPLES)
        .expect("positive sample count");
    let inputs = VerifyInputs {
        dim: n,
        capacity: Some(cap.clone()),
        sup_l: Some(sup),
        ..Default::default()
    };
    let v = verify(ClaimId::CapComparison, &inputs, None).expect("inputs complete");
    Ok(v.with_provenance(format!("upper ratio sup*Cap^(1/n) = {:.5} (reported only)", sup * cap.value.powf(1.0 / n as f64))))
}

/// The density constant `(2 pi)^n / (4^mu C)^n` guaranteed at order `nq`.
pub fn hcp_to_density_bound(mu: f64, c: f64, n: usize) -> Result<f64, CapacityError> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(CapacityError::Mu(mu));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(CapacityError::Constant(c));
    }
    Ok((2.0 * PI / (4f64.powf(mu) * c)).powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::discretize;

    #[test]
    fn concentric_disks() {
        let dom = Domain::disk(0.0, 0.0, 1.0);
        let r = (-1f64).exp();
        let c = condenser_capacity(&CompactSet::disk(0.0, 0.0, r), &dom, 512).unwrap();
        assert!((c.value / (2.0 * PI) - 1.0).abs() <= 0.01, "{c:?}");
        let c3 = condenser_capacity(&CompactSet::disk(0.0, 0.0, 1.0 / 3.0), &dom, 512).unwrap();
        assert!((c3.value / (2.0 * PI / 3f64.ln()) - 1.0).abs() <= 0.01, "{}", c3.value);
        assert!(c.spread <= CONTOUR_TOL);
    }

    #[test]
    fn scaling_and_monotonicity() {
        let set = CompactSet::segment(Point::c1(-0.3, 0.0), Point::c1(0.3, 0.1));
        let dom = Domain::disk(0.0, 0.0, 1.0);
        let a = condenser_capacity(&set, &dom, 256).unwrap();
        let s2 = set.clone().scaled(num_complex::Complex64::new(2.0, 0.0), Point::origin(1));
        let b = condenser_capacity(&s2, &Domain::disk(0.0, 0.0, 2.0), 256).unwrap();
        assert!((a.value / b.value - 1.0).abs() <= 0.01, "{} {}", a.value, b.value);
        let bigger = CompactSet::union(vec![set.clone(), CompactSet::disk(0.0, 0.0, 0.2)]);
        let c = condenser_capacity(&bigger, &dom, 256).unwrap();
        assert!(a.value <= c.value * 1.01);
        let wide = condenser_capacity(&set, &Domain::disk(0.0, 0.0, 1.5), 256).unwrap();
        assert!(wide.value <= a.value * 1.01);
    }

    #[test]
    fn density_scan_examples() {
        let f = CompactSet::disk(0.0, 0.0, 1.0);
        let o = Domain::disk(0.0, 0.0, 3.0);
        let s = density_scan(&f, &o, &[Point::c1(0.0, 0.0)], &[1.0], 1.0, 384).unwrap();
        let k = s.kappa.unwrap();
        assert!((k / (2.0 * PI / 3f64.ln()) - 1.0).abs() <= 0.02, "{k}");
        let s = density_scan(&f, &o, &[Point::c1(1.0, 0.0)], &[0.4, 0.2, 0.1], 1.0, 384).unwrap();
        let caps: Vec<f64> = s.caps[0].iter().map(|c| c.unwrap()).collect();
        assert!(caps.iter().all(|c| *c > 0.0));
        assert!(caps.windows(2).all(|w| w[1] < w[0]), "{caps:?}");
        assert!(s.to_csv().lines().count() == 4);
        assert!(matches!(
            density_scan(&f, &o, &[Point::c1(1.5, 0.0)], &[0.2], 1.0, 64),
            Err(CapacityError::ProbeOutside(_))
        ));
        assert!(matches!(
            density_scan(&f, &o, &[Point::c1(0.0, 0.0)], &[0.1, 0.2], 1.0, 64),
            Err(CapacityError::Radii)
        ));
    }

    #[test]
    fn comparison_is_tight_for_concentric_disks() {
        let r = (-1f64).exp();
        let set = CompactSet::disk(0.0, 0.0, r);
        let cap = condenser_capacity(&set, &Domain::disk(0.0, 0.0, 1.0), 512).unwrap();
        let est = ExtremalEstimate::new(&discretize(&set, r / 25.0).unwrap(), 64, None).unwrap();
        let v = check_cap_l_comparison(&set, 1.0, 0.5, &est, &cap).unwrap();
        assert!(v.pass && v.slack.abs() <= 0.04, "{v:?}");
        let mut zero = cap.clone();
        zero.value = 0.0;
        assert!(matches!(
            check_cap_l_comparison(&set, 1.0, 0.5, &est, &zero),
            Err(CapacityError::ZeroCapacity)
        ));
    }

    #[test]
    fn density_bound_constants() {
        assert!((hcp_to_density_bound(0.5, 1.0, 1).unwrap() - PI).abs() < 1e-12);
        assert!((hcp_to_density_bound(1.0, 4.0 * PI, 1).unwrap() - 0.125).abs() < 1e-12);
        assert!((hcp_to_density_bound(1.0, 1.0, 2).unwrap() - PI * PI / 4.0).abs() < 1e-12);
        assert!(matches!(hcp_to_density_bound(1.5, 1.0, 1), Err(CapacityError::Mu(_))));
    }
}
