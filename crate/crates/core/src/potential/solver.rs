//! Projected red-black SOR for discrete obstacle problems on a square-cell grid.
//!
//! The solution is the largest discretely subharmonic function below the
//! obstacle `psi` with prescribed values on fixed nodes: at free nodes
//! `u = min(psi, mean of the four neighbours)`.

use rayon::prelude::*;

pub(crate) const FREE: u8 = 2;
pub(crate) const FIXED: u8 = 1;
pub(crate) const INACTIVE: u8 = 0;

/// Convergence threshold on the largest update of a sweep.
pub const UPDATE_TOL: f64 = 1e-10;
/// Accepted 5-point residual `|sum of neighbours - 4u|` at non-contact free nodes.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Sweeps allowed per level, in units of the grid resolution.
pub const SWEEP_CAP_FACTOR: usize = 200;
/// Nested solves start at this resolution.
const COARSEST: usize = 64;

#[derive(Clone, Debug)]
pub(crate) struct Grid {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn coord(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    /// Bilinear interpolation of node data at `(x, y)`, clamped to the grid.
    pub fn interpolate(&self, data: &[f64], x: f64, y: f64) -> f64 {
        let fx = ((x - self.x0) / self.h).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((y - self.y0) / self.h).clamp(0.0, (self.ny - 1) as f64);
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let at = |a: usize, b: usize| data[b * self.nx + a];
        at(i, j) * (1.0 - tx) * (1.0 - ty)
            + at(i + 1, j) * tx * (1.0 - ty)
            + at(i, j + 1) * (1.0 - tx) * ty
            + at(i + 1, j + 1) * tx * ty
    }
}

/// Node classes, obstacle and fixed values. Free nodes need four non-inactive neighbours.
#[derive(Clone, Debug)]
pub(crate) struct Problem {
    pub grid: Grid,
    pub kind: Vec<u8>,
    /// Obstacle at free nodes (`+inf` for none).
    pub psi: Vec<f64>,
    /// Values at fixed nodes; used as output filler at inactive nodes.
    pub fixed: Vec<f64>,
    /// Resolution label used for the sweep cap.
    pub res: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub u: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NonConvergence {
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy)]
struct SharedSlice(*mut f64);

unsafe impl Send for SharedSlice {}
unsafe impl Sync for SharedSlice {}

impl SharedSlice {
    unsafe fn get(&self, k: usize) -> f64 {
        *self.0.add(k)
    }

    unsafe fn set(&self, k: usize, v: f64) {
        *self.0.add(k) = v;
    }
}

pub(crate) fn optimal_omega(res: usize) -> f64 {
    2.0 / (1.0 + (std::f64::consts::PI / res.max(2) as f64).sin())
}

pub(crate) fn solve(p: &Problem, init: Option<&[f64]>) -> Result<Solution, NonConvergence> {
    let Grid { nx, ny, .. } = p.grid;
    let omega = optimal_omega(p.res);
    let mut u: Vec<f64> = (0..nx * ny)
        .map(|k| match p.kind[k] {
            FREE => {
                let start = init.map_or_else(
                    || if p.psi[k].is_finite() { p.psi[k] } else { 0.0 },
                    |v| v[k],
                );
                start.min(p.psi[k])
            }
            _ => p.fixed[k],
        })
        .collect();
    let cap = SWEEP_CAP_FACTOR * p.res;
    let mut sweeps = 0;
    loop {
        let mut max_update = 0.0f64;
        for color in 0..2 {
            let shared = SharedSlice(u.as_mut_ptr());
            let upd = (1..ny - 1)
                .into_par_iter()
                .map(|j| {
                    let mut m = 0.0f64;
                    let mut i = 1 + (j + color + 1) % 2;
                    while i + 1 < nx {
                        let k = j * nx + i;
                        if p.kind[k] == FREE {
                            // SAFETY: nodes of one colour are written only by
                            // their own row and read only by rows of the other
                            // colour pass, so no two threads touch the same slot.
                            unsafe {
                                let avg = 0.25
                                    * (shared.get(k - 1)
                                        + shared.get(k + 1)
                                        + shared.get(k - nx)
                                        + shared.get(k + nx));
                                let cur = shared.get(k);
                                let next = (cur + omega * (avg - cur)).min(p.psi[k]);
                                shared.set(k, next);
                                m = m.max((next - cur).abs());
                            }
                        }
                        i += 2;
                    }
                    m
                })
                .reduce(|| 0.0, f64::max);
            max_update = max_update.max(upd);
        }
        sweeps += 1;
        if max_update <= UPDATE_TOL {
            let residual = residual(p, &u);
            if residual <= RESIDUAL_TOL {
                return Ok(Solution {
                    u,
                    residual,
                    iterations: sweeps,
                    omega,
                });
            }
        }
        if sweeps >= cap {
            return Err(NonConvergence {
                residual: residual(p, &u),
                iterations: sweeps,
            });
        }
    }
}

/// Largest `|sum of neighbours - 4u|` over free nodes strictly below the obstacle.
pub(crate) fn residual(p: &Problem, u: &[f64]) -> f64 {
    let nx = p.grid.nx;
    (0..u.len())
        .into_par_iter()
        .filter(|&k| p.kind[k] == FREE && u[k] < p.psi[k])
        .map(|k| (u[k - 1] + u[k + 1] + u[k - nx] + u[k + nx] - 4.0 * u[k]).abs())
        .reduce(|| 0.0, f64::max)
}

/// Solves at `res`, initialised by the interpolated solution at `res / 2`
/// (recursively down to a coarse level).
pub(crate) fn solve_nested<E>(
    build: &(dyn Fn(usize) -> Result<Problem, E> + Sync),
    res: usize,
) -> Result<(Problem, Solution), SolveFailure<E>> {
    let problem = build(res).map_err(SolveFailure::Build)?;
    // A coarse level that cannot be built (e.g. the set falls below its
    // resolution) just means no warm start.
    let coarse = if res >= 2 * COARSEST {
        solve_nested(build, res / 2).ok()
    } else {
        None
    };
    let init = coarse.map(|(cp, cs)| {
        let g = &problem.grid;
        (0..g.nx * g.ny)
            .into_par_iter()
            .map(|k| {
                let (x, y) = g.coord(k % g.nx, k / g.nx);
                cp.grid.interpolate(&cs.u, x, y)
            })
            .collect::<Vec<f64>>()
    });
    let sol = solve(&problem, init.as_deref()).map_err(SolveFailure::Diverged)?;
    Ok((problem, sol))
}

#[derive(Debug)]
pub(crate) enum SolveFailure<E> {
    Build(E),
    Diverged(NonConvergence),
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Square with u = x on the boundary: the discrete harmonic solution is x.
    #[test]
    fn linear_data_is_reproduced() {
        let n = 33;
        let grid = Grid {
            x0: 0.0,
            y0: 0.0,
            h: 1.0 / 32.0,
            nx: n,
            ny: n,
        };
        let mut kind = vec![FREE; n * n];
        let mut fixed = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                    kind[j * n + i] = FIXED;
                    fixed[j * n + i] = grid.coord(i, j).0;
                }
            }
        }
        let p = Problem {
            grid: grid.clone(),
            kind,
            psi: vec![f64::INFINITY; n * n],
            fixed,
            res: 32,
        };
        let s = solve(&p, None).unwrap();
        for j in 0..n {
            for i in 0..n {
                assert!((s.u[j * n + i] - grid.coord(i, j).0).abs() < 1e-8);
            }
        }
        assert!(s.residual <= RESIDUAL_TOL);
    }

    #[test]
    fn obstacle_is_respected() {
        let n = 33;
        let grid = Grid {
            x0: -1.0,
            y0: -1.0,
            h: 2.0 / 32.0,
            nx: n,
            ny: n,
        };
        let mut kind = vec![FREE; n * n];
        let mut fixed = vec![0.0; n * n];
        let mut psi = vec![1.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                    kind[k] = FIXED;
                    fixed[k] = 1.0;
                }
                let (x, y) = grid.coord(i, j);
                if x * x + y * y < 0.1 {
                    psi[k] = 0.0;
                }
            }
        }
        let p = Problem {
            grid,
            kind,
            psi: psi.clone(),
            fixed,
            res: 32,
        };
        let s = solve(&p, None).unwrap();
        assert!(s.u.iter().zip(&psi).all(|(u, o)| *u <= o + 1e-15));
        assert!(s.u.iter().all(|u| *u >= -1e-12 && *u <= 1.0 + 1e-12));
    }
}
