//! Moduli of continuity of extremal functions and the Hölder fits built on them.

use crate::fit::{fit_power_law, fit_surface, HolderFit, LocalHcpFit};
use crate::geometry::{discretize, CompactSet, GeometryError};
use crate::point::{sphere_lattice, Point};
use crate::siciak::{ExtremalEstimate, SiciakError};
use crate::theorems::{ClaimId, TheoremVerdict, INEQUALITY_TOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

/// Sphere samples per radius in one variable.
pub const SPHERE_SAMPLES_1D: usize = 256;
/// Sphere samples per radius in two variables.
pub const SPHERE_SAMPLES_2D: usize = 1024;
/// Set points used as centres when sampling a neighbourhood of the set.
const NEIGHBOURHOOD_CENTRES: usize = 400;
/// Directions per centre when sampling a neighbourhood.
const NEIGHBOURHOOD_DIRECTIONS: usize = 64;

#[derive(Debug, Error)]
pub enum RegularityError {
    #[error("anchor {0} is not in the set")]
    AnchorOutside(Point),
    #[error("need at least {needed} grid values, got {got}")]
    GridTooShort { needed: usize, got: usize },
    #[error("grid values must be positive and distinct")]
    BadGrid,
    #[error("restriction to radius {radius} is degenerate: {source}")]
    Restriction { radius: f64, source: SiciakError },
    #[error("restriction to radius {radius} cannot be sampled: {source}")]
    Sampling { radius: f64, source: GeometryError },
    #[error("surface fit needs at least three positive cells")]
    EmptySurface,
    #[error("sample count must be positive")]
    NoSamples,
}

/// `varpi(delta) = sup_{|z-a| <= delta} L(z)` (or the global modulus when `anchor` is `None`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub anchor: Option<Point>,
    /// Increasing.
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub samples: usize,
}

impl ModulusCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,varpi\n");
        for (d, v) in self.deltas.iter().zip(&self.values) {
            let _ = writeln!(s, "{d:.9e},{v:.9e}");
        }
        s
    }
}

/// Default sphere sample count for dimension `n`.
pub fn default_samples(n: usize) -> usize {
    if n == 1 {
        SPHERE_SAMPLES_1D
    } else {
        SPHERE_SAMPLES_2D
    }
}

fn sorted_grid(grid: &[f64], needed: usize) -> Result<Vec<f64>, RegularityError> {
    if grid.len() < needed {
        return Err(RegularityError::GridTooShort {
            needed,
            got: grid.len(),
        });
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    if g.iter().any(|d| !(*d > 0.0 && d.is_finite())) || g.windows(2).any(|w| w[0] == w[1]) {
        return Err(RegularityError::BadGrid);
    }
    Ok(g)
}

fn running_max(v: &mut [f64]) {
    for k in 1..v.len() {
        v[k] = v[k].max(v[k - 1]);
    }
}

/// Pointwise modulus of an arbitrary function at `a` over spheres of the grid radii
/// (the sup over the ball of a subharmonic function is attained on its sphere).
pub fn modulus_of(
    f: &(dyn Fn(&Point) -> f64 + Sync),
    a: &Point,
    deltas: &[f64],
    samples: usize,
) -> Vec<f64> {
    let dirs = sphere_lattice(a.dim(), samples);
    let mut vals: Vec<f64> = deltas
        .iter()
        .map(|&d| {
            dirs.par_iter()
                .map(|u| f(&a.add(&u.scale(d))))
                .reduce(|| f64::NEG_INFINITY, f64::max)
                .max(f(a))
        })
        .collect();
    running_max(&mut vals);
    vals
}

/// `varpi_E(a, delta)` on a geometric grid (at least four values).
pub fn modulus_curve(
    est: &ExtremalEstimate,
    a: &Point,
    deltas: &[f64],
    samples: usize,
) -> Result<ModulusCurve, RegularityError> {
    if !est.source.contains(a) {
        return Err(RegularityError::AnchorOutside(a.clone()));
    }
    if samples == 0 {
        return Err(RegularityError::NoSamples);
    }
    let deltas = sorted_grid(deltas, 4)?;
    let values = modulus_of(&|z| est.value(z), a, &deltas, samples);
    Ok(ModulusCurve {
        anchor: Some(a.clone()),
        deltas,
        values,
        samples,
    })
}

/// `sup L^` over points within `delta` of the set, sampled as offsets of set points.
fn neighbourhood_sup(est: &ExtremalEstimate, delta: f64) -> f64 {
    let step = (est.cloud.len() / NEIGHBOURHOOD_CENTRES).max(1);
    let centres: Vec<&Point> = est.cloud.iter().step_by(step).collect();
    let dirs = sphere_lattice(est.basis.dim, NEIGHBOURHOOD_DIRECTIONS);
    centres
        .par_iter()
        .map(|c| {
            dirs.iter()
                .map(|u| est.value(&c.add(&u.scale(delta))))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Global modulus `varpi_E(delta) = sup_{dist(z,E) <= delta} L_E(z)`.
pub fn global_modulus(est: &ExtremalEstimate, deltas: &[f64]) -> Result<ModulusCurve, RegularityError> {
    let deltas = sorted_grid(deltas, 4)?;
    let mut values: Vec<f64> = deltas.iter().map(|&d| neighbourhood_sup(est, d)).collect();
    running_max(&mut values);
    Ok(ModulusCurve {
        anchor: None,
        deltas,
        values,
        samples: NEIGHBOURHOOD_CENTRES * NEIGHBOURHOOD_DIRECTIONS,
    })
}

/// Log-log fit of a modulus curve; the largest `delta` is left out (saturation).
pub fn fit_holder(curve: &ModulusCurve) -> Result<HolderFit, RegularityError> {
    if curve.deltas.len() < 4 {
        return Err(RegularityError::GridTooShort {
            needed: 4,
            got: curve.deltas.len(),
        });
    }
    let m = curve.deltas.len() - 1;
    Ok(fit_power_law(&curve.deltas[..m], &curve.values[..m]))
}

/// One cell `(r, delta, varpi_{E ∩ B(a,r)}(a, delta))` of a local scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub r: f64,
    pub delta: f64,
    pub varpi: f64,
}

/// Moduli of `E ∩ B(a, r)` at `a` for each `r`. Clouds use spacing `spacing * r`
/// so that every restriction is sampled with the same resolution relative to its size.
pub fn local_hcp_surface(
    set: &CompactSet,
    a: &Point,
    r_grid: &[f64],
    delta_grid: &[f64],
    degree: usize,
    spacing: f64,
) -> Result<Vec<SurfaceCell>, RegularityError> {
    if !set.contains(a) {
        return Err(RegularityError::AnchorOutside(a.clone()));
    }
    let rs = sorted_grid(r_grid, 1)?;
    let ds = sorted_grid(delta_grid, 1)?;
    let samples = default_samples(a.dim());
    let mut cells = Vec::new();
    for &r in rs.iter().rev() {
        let part = set.clone().restrict(a.clone(), r);
        let cloud = discretize(&part, spacing * r)
            .map_err(|source| RegularityError::Sampling { radius: r, source })?;
        let est = ExtremalEstimate::new(&cloud, degree, None)
            .map_err(|source| RegularityError::Restriction { radius: r, source })?;
        let vals = modulus_of(&|z| est.value(z), a, &ds, samples);
        cells.extend(ds.iter().zip(vals).map(|(&delta, varpi)| SurfaceCell { r, delta, varpi }));
    }
    Ok(cells)
}

/// Fits `log varpi ≈ log C + mu log delta - q log r` over the `(r, delta)` grid
/// (at least three values of each).
pub fn local_hcp_scan(
    set: &CompactSet,
    a: &Point,
    r_grid: &[f64],
    delta_grid: &[f64],
    degree: usize,
    spacing: f64,
) -> Result<(LocalHcpFit, Vec<SurfaceCell>), RegularityError> {
    sorted_grid(r_grid, 3)?;
    sorted_grid(delta_grid, 3)?;
    let cells = local_hcp_surface(set, a, r_grid, delta_grid, degree, spacing)?;
    let fit = fit_cells(&cells).ok_or(RegularityError::EmptySurface)?;
    Ok((fit, cells))
}

pub fn fit_cells(cells: &[SurfaceCell]) -> Option<LocalHcpFit> {
    let samples: Vec<(f64, f64, f64)> = cells.iter().map(|c| (c.r, c.delta, c.varpi)).collect();
    fit_surface(&samples)
}

/// Checks `L^ <= C delta^mu + 0.02` on the `delta`-neighbourhood of `E` for every grid value.
pub fn hcp_verdict(est: &ExtremalEstimate, set: &CompactSet, deltas: &[f64], c: f64, mu: f64) -> TheoremVerdict {
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0.0;
    let mut measured = 0.0;
    for &d in deltas {
        let sup = neighbourhood_sup(est, d);
        let excess = sup - c * d.powf(mu);
        if excess > worst {
            worst = excess;
            at = d;
            measured = sup;
        }
    }
    TheoremVerdict::new(ClaimId::HcpBound, c * at.powf(mu), measured, -worst, INEQUALITY_TOL)
        .with_provenance(format!("set {}; worst delta {at}", crate::geometry::to_short(set)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::geometric_grid;

    fn disk_est() -> ExtremalEstimate {
        let cloud = discretize(&CompactSet::disk(0.0, 0.0, 1.0), 0.039).unwrap();
        ExtremalEstimate::new(&cloud, 64, None).unwrap()
    }

    #[test]
    fn disk_moduli() {
        let est = disk_est();
        let grid = geometric_grid(0.0125, 2.0, 6);
        let c = modulus_curve(&est, &Point::c1(1.0, 0.0), &grid, 256).unwrap();
        let k = c.deltas.iter().position(|d| (d - 0.1).abs() < 1e-12).unwrap();
        assert!((c.values[k] - 1.1f64.ln()).abs() <= 0.01, "{}", c.values[k]);
        let f = fit_holder(&c).unwrap();
        assert!((f.mu - 1.0).abs() <= 0.05, "{f:?}");
        let inner = modulus_curve(&est, &Point::c1(0.0, 0.0), &[0.0625, 0.125, 0.25, 0.5], 256).unwrap();
        assert!(inner.values[3].abs() <= 0.01);
        assert!(fit_holder(&inner).unwrap().degenerate);
        assert!(matches!(
            modulus_curve(&est, &Point::c1(1.0, 0.0), &[0.1], 256),
            Err(RegularityError::GridTooShort { .. })
        ));
        assert!(matches!(
            modulus_curve(&est, &Point::c1(1.5, 0.0), &grid, 256),
            Err(RegularityError::AnchorOutside(_))
        ));
    }

    #[test]
    fn segment_endpoint_is_half_holder() {
        let seg = CompactSet::segment(Point::c1(-1.0, 0.0), Point::c1(1.0, 0.0));
        let est = ExtremalEstimate::new(&discretize(&seg, 0.001).unwrap(), 64, None).unwrap();
        let c = modulus_curve(&est, &Point::c1(1.0, 0.0), &geometric_grid(0.0125, 2.0, 6), 256).unwrap();
        let f = fit_holder(&c).unwrap();
        assert!((f.mu - 0.5).abs() <= 0.05, "{f:?}");
    }

    #[test]
    fn exact_power_laws() {
        let deltas = geometric_grid(0.01, 2.0, 6);
        let curve = ModulusCurve {
            anchor: None,
            values: deltas.iter().map(|d| 3.0 * d.sqrt()).collect(),
            deltas,
            samples: 0,
        };
        let f = fit_holder(&curve).unwrap();
        assert!((f.mu - 0.5).abs() < 1e-12 && (f.c - 3.0).abs() < 1e-12 && f.rms <= 1e-12);
        let mut cells = Vec::new();
        for r in geometric_grid(1.0, 0.5, 3) {
            for delta in geometric_grid(0.1, 0.5, 4) {
                cells.push(SurfaceCell {
                    r,
                    delta,
                    varpi: 2.0 * delta.sqrt() / r,
                });
            }
        }
        let s = fit_cells(&cells).unwrap();
        assert!((s.mu - 0.5).abs() < 1e-10 && (s.q - 1.0).abs() < 1e-10 && (s.c - 2.0).abs() < 1e-10);
    }

    #[test]
    fn hcp_verdicts_on_disk() {
        let est = disk_est();
        let disk = CompactSet::disk(0.0, 0.0, 1.0);
        let grid = [0.125, 0.25, 0.5, 1.0];
        assert!(hcp_verdict(&est, &disk, &grid, 1.0, 1.0).pass);
        let v = hcp_verdict(&est, &disk, &grid, 0.1, 1.0);
        assert!(!v.pass && v.provenance[0].contains("worst delta 1"), "{v:?}");
        assert!(hcp_verdict(&est, &disk, &grid, 1e6, 1.0).pass);
    }

    #[test]
    fn global_modulus_bounds_differences() {
        let est = disk_est();
        let grid = geometric_grid(0.05, 2.0, 5);
        let g = global_modulus(&est, &grid).unwrap();
        assert!(g.values.windows(2).all(|w| w[0] <= w[1]));
        let pairs = [(1.1, 0.0, 1.0, 0.05), (0.0, 1.2, 0.1, 1.3), (-1.4, 0.0, -1.0, 0.3)];
        for (a, b, c, d) in pairs {
            let (z, w) = (Point::c1(a, b), Point::c1(c, d));
            let gap = (est.value(&z) - est.value(&w)).abs();
            let k = g.deltas.iter().position(|x| *x >= z.dist(&w)).unwrap();
            assert!(gap <= g.values[k] + 0.03);
        }
    }
}
