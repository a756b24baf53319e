//! Grid potential theory in one variable: relative extremal functions as
//! discrete obstacle problems, a Dirichlet oracle for `L_E`, ball means and
//! the mollifier-gap Hölder estimator.

mod field;
mod mollify;
mod solver;

pub use field::{FieldError, FieldMeta, ScalarField, MAGIC, MIN_RESOLUTION};
pub use mollify::{holder_from_mollifier, mollify, mollifier_gaps};
pub use solver::{RESIDUAL_TOL, SWEEP_CAP_FACTOR, UPDATE_TOL};

use crate::geometry::{discretize, CompactSet, Domain};
use crate::point::Point;
use crate::siciak::{ExtremalEstimate, WeightFn};
use rayon::prelude::*;
use serde_json::json;
use solver::{Grid, Problem, SolveFailure, FIXED, FREE, INACTIVE};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("set below grid resolution: the mask is empty")]
    EmptyMask,
    #[error("no convergence after {iterations} sweeps (residual {residual:e})")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("clearance between set and domain boundary is {clearance}, below {needed} (two cells)")]
    Clearance { clearance: f64, needed: f64 },
    #[error("grid PDE solvers are implemented in one complex variable only")]
    Dimension,
    #[error("weight is not finite on the grid")]
    WeightNotFinite,
    #[error("box must contain the set dilated by its diameter")]
    BoxTooSmall,
    #[error("radius {delta} is below two grid cells ({min})")]
    DeltaTooSmall { delta: f64, min: f64 },
    #[error("erosion by {0} leaves no interior")]
    ErodedEmpty(f64),
    #[error("need at least 4 radii, got {0}")]
    TooFewRadii(usize),
    #[error("resolution {0} is below 16")]
    Resolution(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl From<SolveFailure<PotentialError>> for PotentialError {
    fn from(f: SolveFailure<PotentialError>) -> Self {
        match f {
            SolveFailure::Build(e) => e,
            SolveFailure::Diverged(n) => PotentialError::NonConvergence {
                residual: n.residual,
                iterations: n.iterations,
            },
        }
    }
}

/// Data of a relative extremal problem `u_{K,phi;Omega}` (unweighted: `phi = 0`).
#[derive(Clone, Debug)]
pub struct ObstacleSpec {
    pub domain: Domain,
    pub set: CompactSet,
    pub weight: Option<WeightFn>,
    /// Grid cells across the diameter of the domain.
    pub res: usize,
}

/// Nodes of the grid within `h/2` of the set (or inside it).
fn set_mask(set: &CompactSet, grid: &Grid, eligible: &[bool]) -> Vec<bool> {
    let h = grid.h;
    if set.distance_exact(&Point::c1(grid.x0, grid.y0)).is_some() {
        return (0..grid.nx * grid.ny)
            .into_par_iter()
            .map(|k| {
                if !eligible[k] {
                    return false;
                }
                let (x, y) = grid.coord(k % grid.nx, k / grid.nx);
                let z = Point::c1(x, y);
                set.contains(&z) || set.distance_exact(&z).unwrap_or(f64::INFINITY) <= 0.5 * h
            })
            .collect();
    }
    // Stamp from a fine cloud when no closed-form distance exists.
    let mut mask: Vec<bool> = (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|k| {
            let (x, y) = grid.coord(k % grid.nx, k / grid.nx);
            eligible[k] && set.contains(&Point::c1(x, y))
        })
        .collect();
    let spacing = (0.25 * h).min(set.extent().max(0.25 * h));
    if let Ok(cloud) = discretize(set, spacing) {
        for p in &cloud.points {
            let (x, y) = (p.0[0].re, p.0[0].im);
            let fi = ((x - grid.x0) / h).round() as i64;
            let fj = ((y - grid.y0) / h).round() as i64;
            for dj in -1..=1 {
                for di in -1..=1 {
                    let (i, j) = (fi + di, fj + dj);
                    if i < 0 || j < 0 || i >= grid.nx as i64 || j >= grid.ny as i64 {
                        continue;
                    }
                    let k = j as usize * grid.nx + i as usize;
                    let (nxp, nyp) = grid.coord(i as usize, j as usize);
                    if eligible[k] && (nxp - x).hypot(nyp - y) <= 0.5 * h {
                        mask[k] = true;
                    }
                }
            }
        }
    }
    mask
}

fn weight_values(weight: Option<&WeightFn>, grid: &Grid) -> Result<Vec<f64>, PotentialError> {
    let vals: Vec<f64> = match weight {
        None => vec![0.0; grid.nx * grid.ny],
        Some(w) => (0..grid.nx * grid.ny)
            .into_par_iter()
            .map(|k| {
                let (x, y) = grid.coord(k % grid.nx, k / grid.nx);
                w.eval(&Point::c1(x, y))
            })
            .collect(),
    };
    if vals.iter().all(|v| v.is_finite()) {
        Ok(vals)
    } else {
        Err(PotentialError::WeightNotFinite)
    }
}

fn relative_problem(spec: &ObstacleSpec, res: usize) -> Result<Problem, PotentialError> {
    let c = spec.domain.center.0[0];
    let r = spec.domain.radius;
    let h = 2.0 * r / res as f64;
    let n = res + 5;
    let grid = Grid {
        x0: c.re - r - 2.0 * h,
        y0: c.im - r - 2.0 * h,
        h,
        nx: n,
        ny: n,
    };
    let inside: Vec<bool> = (0..n * n)
        .map(|k| {
            let (x, y) = grid.coord(k % n, k / n);
            (x - c.re).hypot(y - c.im) < r
        })
        .collect();
    let phi = weight_values(spec.weight.as_ref(), &grid)?;
    let mask = set_mask(&spec.set, &grid, &inside);
    if !mask.iter().any(|&m| m) {
        return Err(PotentialError::EmptyMask);
    }
    let mut kind = vec![INACTIVE; n * n];
    let mut psi = vec![f64::INFINITY; n * n];
    let fixed: Vec<f64> = phi.iter().map(|p| p + 1.0).collect();
    for k in 0..n * n {
        if inside[k] {
            kind[k] = FREE;
            psi[k] = if mask[k] { phi[k] } else { phi[k] + 1.0 };
        }
    }
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let k = j * n + i;
            if !inside[k] && [k - 1, k + 1, k - n, k + n].iter().any(|&q| inside[q]) {
                kind[k] = FIXED;
            }
        }
    }
    Ok(Problem {
        grid,
        kind,
        psi,
        fixed,
        res,
    })
}

fn to_field(
    problem: &Problem,
    sol: &solver::Solution,
    kind: &str,
    info: serde_json::Value,
) -> Result<ScalarField, PotentialError> {
    let g = &problem.grid;
    let values: Vec<f64> = (0..g.nx * g.ny)
        .map(|k| if problem.kind[k] == FREE { sol.u[k] } else { problem.fixed[k] })
        .collect();
    Ok(ScalarField::new(
        [
            [g.x0, g.x0 + (g.nx - 1) as f64 * g.h],
            [g.y0, g.y0 + (g.ny - 1) as f64 * g.h],
        ],
        g.nx,
        g.ny,
        values,
        FieldMeta {
            kind: kind.into(),
            residual: sol.residual,
            tolerance: RESIDUAL_TOL,
            iterations: sol.iterations,
            omega: sol.omega,
            info,
        },
    )?)
}

/// `u_{K;Omega}` (or `u_{K,phi;Omega}`): the largest discretely subharmonic
/// function with `u <= phi` on the mask of `K`, `u <= phi + 1` in `Omega`,
/// and `u = phi + 1` on the ring of nodes just outside `Omega`.
pub fn relative_extremal(spec: &ObstacleSpec) -> Result<ScalarField, PotentialError> {
    if spec.set.dim() != 1 || spec.domain.center.dim() != 1 {
        return Err(PotentialError::Dimension);
    }
    if spec.res < MIN_RESOLUTION {
        return Err(PotentialError::Resolution(spec.res));
    }
    let h = 2.0 * spec.domain.radius / spec.res as f64;
    let clearance = spec.domain.clearance(&spec.set);
    if clearance < 2.0 * h {
        return Err(PotentialError::Clearance {
            clearance,
            needed: 2.0 * h,
        });
    }
    let build = |res: usize| relative_problem(spec, res);
    let (problem, sol) = solver::solve_nested(&build, spec.res)?;
    to_field(
        &problem,
        &sol,
        if spec.weight.is_some() {
            "relative_extremal_weighted"
        } else {
            "relative_extremal"
        },
        json!({
            "set": spec.set,
            "domain": spec.domain,
            "res": spec.res,
            "weight": spec.weight.as_ref().map(|w| w.label().to_string()),
        }),
    )
}

/// Boundary values for [`green_oracle`].
pub trait BoundaryData: Sync {
    fn value(&self, z: &Point) -> f64;
}

impl BoundaryData for ExtremalEstimate {
    fn value(&self, z: &Point) -> f64 {
        ExtremalEstimate::value(self, z)
    }
}

/// `2 L^_{2d} - L^_d`: removes the leading `1/d` bias of polynomial estimates.
pub struct Richardson<'a> {
    pub coarse: &'a ExtremalEstimate,
    pub fine: &'a ExtremalEstimate,
}

impl BoundaryData for Richardson<'_> {
    fn value(&self, z: &Point) -> f64 {
        2.0 * self.fine.value(z) - self.coarse.value(z)
    }
}

fn green_problem(
    set: &CompactSet,
    boundary: &dyn BoundaryData,
    bbox: [[f64; 2]; 2],
    res: usize,
) -> Result<Problem, PotentialError> {
    let w = bbox[0][1] - bbox[0][0];
    let h = w / res as f64;
    let nx = res + 1;
    let ny = ((bbox[1][1] - bbox[1][0]) / h).round() as usize + 1;
    let grid = Grid {
        x0: bbox[0][0],
        y0: bbox[1][0],
        h,
        nx,
        ny,
    };
    let interior: Vec<bool> = (0..nx * ny)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            i > 0 && j > 0 && i + 1 < nx && j + 1 < ny
        })
        .collect();
    let mask = set_mask(set, &grid, &interior);
    if !mask.iter().any(|&m| m) {
        return Err(PotentialError::EmptyMask);
    }
    let mut kind = vec![FREE; nx * ny];
    let mut fixed = vec![0.0; nx * ny];
    let ring: Vec<(usize, f64)> = (0..nx * ny)
        .into_par_iter()
        .filter(|&k| !interior[k])
        .map(|k| {
            let (x, y) = grid.coord(k % nx, k / nx);
            (k, boundary.value(&Point::c1(x, y)))
        })
        .collect();
    for (k, v) in ring {
        kind[k] = FIXED;
        fixed[k] = v;
    }
    for k in 0..nx * ny {
        if mask[k] {
            kind[k] = FIXED;
            fixed[k] = 0.0;
        }
    }
    Ok(Problem {
        grid,
        kind,
        psi: vec![f64::INFINITY; nx * ny],
        fixed,
        res,
    })
}

/// Independent grid oracle for `L_E` in one variable: harmonic off the mask
/// of `E` with `u = 0` there and the boundary rows pinned to `boundary`.
pub fn green_oracle(
    set: &CompactSet,
    boundary: &dyn BoundaryData,
    bbox: [[f64; 2]; 2],
    res: usize,
) -> Result<ScalarField, PotentialError> {
    if set.dim() != 1 {
        return Err(PotentialError::Dimension);
    }
    if res < MIN_RESOLUTION {
        return Err(PotentialError::Resolution(res));
    }
    let grown = set.bounding_box();
    let e = set.extent();
    if grown[0][0] - e < bbox[0][0]
        || grown[0][1] + e > bbox[0][1]
        || grown[1][0] - e < bbox[1][0]
        || grown[1][1] + e > bbox[1][1]
    {
        return Err(PotentialError::BoxTooSmall);
    }
    let build = |r: usize| green_problem(set, boundary, bbox, r);
    let (problem, sol) = solver::solve_nested(&build, res)?;
    to_field(
        &problem,
        &sol,
        "green_oracle",
        json!({ "set": set, "res": res }),
    )
}
