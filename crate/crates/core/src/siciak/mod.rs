//! Polynomial lower estimates of (weighted) Siciak–Zaharjuta extremal functions.
//!
//! Every polynomial `p` of degree `<= d` gives the Bernstein–Walsh lower bound
//! `L_{E,phi}(z) >= (log|p(z)| - max_E(log|p| - d phi)) / d`. An
//! [`ExtremalEstimate`] keeps a family of such polynomials built from a Leja
//! basis and reports the largest bound; the maximum over `E` is taken on the
//! source cloud.

mod lawson;
mod leja;
mod weight;

pub use weight::WeightFn;

use crate::geometry::{CompactSet, PointCloud};
use crate::point::{sphere_lattice, Point};
use leja::Frame;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SiciakError {
    #[error("degree must be at least 1")]
    BadDegree,
    #[error("pivot collapse at step {step} (pivot {pivot:e}): the cloud is too degenerate")]
    PivotCollapse { step: usize, pivot: f64 },
    #[error("weight is not finite at {0}")]
    WeightNotFinite(String),
    #[error("declared Hölder data violated: {0}")]
    HolderViolation(String),
    #[error("sample count must be positive")]
    NoSamples,
    #[error("source set is degenerate (pluripolar at grid scale)")]
    Degenerate,
    #[error("weighted evaluation requested on an unweighted estimate (or vice versa)")]
    WeightMismatch,
}

/// Lawson sweeps used to refine the one-variable Chebyshev member.
pub const LAWSON_ITERATIONS: usize = 60;
/// Directions of the linear-form family in several variables.
const LINEAR_DIRECTIONS: usize = 256;

/// Dimension of the space of polynomials of degree `<= d` in `n` variables.
pub fn poly_space_dim(n: usize, d: usize) -> usize {
    (1..=n).fold(1usize, |acc, k| acc * (d + k) / k)
}

/// Leja (approximate Fekete) points of a cloud.
#[derive(Clone, Debug)]
pub struct LejaBasis {
    pub degree: usize,
    pub dim: usize,
    pub points: Vec<Point>,
    /// Position of each selected point in the source cloud.
    pub indices: Vec<usize>,
    /// Log-magnitude of the pivot at each greedy step.
    pub log_pivots: Vec<f64>,
    pub weight: Option<WeightFn>,
    frame: Option<Frame>,
    top_residuals: Vec<Vec<Complex64>>,
}

impl LejaBasis {
    /// CSV rows `index,re_1,im_1,...,log_pivot`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,cloud_index");
        for k in 1..=self.dim {
            out.push_str(&format!(",re{k},im{k}"));
        }
        out.push_str(",log_pivot\n");
        for (s, (p, (i, lp))) in self
            .points
            .iter()
            .zip(self.indices.iter().zip(&self.log_pivots))
            .enumerate()
        {
            out.push_str(&format!("{s},{i}"));
            for x in p.reals() {
                out.push_str(&format!(",{x:.9e}"));
            }
            out.push_str(&format!(",{lp:.9e}\n"));
        }
        out
    }
}

fn cloud_dphi(cloud: &PointCloud, d: usize, weight: Option<&WeightFn>) -> Result<Vec<f64>, SiciakError> {
    match weight {
        None => Ok(vec![0.0; cloud.len()]),
        Some(w) => cloud
            .points
            .par_iter()
            .map(|p| {
                let v = w.eval(p);
                if v.is_finite() {
                    Ok(d as f64 * v)
                } else {
                    Err(SiciakError::WeightNotFinite(p.to_string()))
                }
            })
            .collect(),
    }
}

fn cloud_diam(cloud: &PointCloud) -> f64 {
    let reals: Vec<Vec<f64>> = cloud.points.iter().map(|p| p.reals()).collect();
    let dr = reals[0].len();
    (0..dr)
        .map(|ax| {
            let lo = reals.iter().map(|r| r[ax]).fold(f64::INFINITY, f64::min);
            let hi = reals.iter().map(|r| r[ax]).fold(f64::NEG_INFINITY, f64::max);
            (hi - lo) * (hi - lo)
        })
        .sum::<f64>()
        .sqrt()
        .max(1e-300)
}

/// Greedy Leja selection on the cloud (log-domain in one variable, LU
/// elimination in graded-lex monomials otherwise). Ties go to the lowest
/// cloud index.
pub fn build_leja(
    cloud: &PointCloud,
    d: usize,
    weight: Option<&WeightFn>,
) -> Result<LejaBasis, SiciakError> {
    if d == 0 {
        return Err(SiciakError::BadDegree);
    }
    let n = cloud.dim();
    let dphi = cloud_dphi(cloud, d, weight)?;
    if n == 1 {
        let x: Vec<Complex64> = cloud.points.iter().map(|p| p.0[0]).collect();
        let sel = leja::select_1d(&x, &dphi, d + 1, cloud_diam(cloud))?;
        Ok(LejaBasis {
            degree: d,
            dim: 1,
            points: sel.indices.iter().map(|&i| cloud.points[i].clone()).collect(),
            indices: sel.indices,
            log_pivots: sel.log_pivots,
            weight: weight.cloned(),
            frame: None,
            top_residuals: Vec::new(),
        })
    } else {
        let frame = Frame::new(&cloud.points, d);
        let sel = leja::select_nd(&cloud.points, &dphi, &frame, d)?;
        Ok(LejaBasis {
            degree: d,
            dim: n,
            points: sel.indices.iter().map(|&i| cloud.points[i].clone()).collect(),
            indices: sel.indices,
            log_pivots: sel.log_pivots,
            weight: weight.cloned(),
            frame: Some(frame),
            top_residuals: sel.top_residuals,
        })
    }
}

/// Points of the source set at sub-spacing offsets from the cloud. They only
/// enter the normalisers, so that a polynomial cannot exploit the gaps
/// between cloud points.
fn refinement(cloud: &PointCloud) -> Vec<Point> {
    let n = cloud.dim();
    let s = cloud.spacing;
    let offsets: Vec<Point> = if n == 1 {
        (1..=3)
            .flat_map(|k| {
                (0..8).map(move |a| {
                    let t = std::f64::consts::FRAC_PI_4 * a as f64;
                    Point::c1(0.25 * k as f64 * s * t.cos(), 0.25 * k as f64 * s * t.sin())
                })
            })
            .collect()
    } else {
        (0..2 * n)
            .flat_map(|ax| {
                [-0.5, 0.5].into_iter().map(move |f| {
                    let mut x = vec![0.0; 2 * n];
                    x[ax] = f * s;
                    Point::from_reals(&x)
                })
            })
            .collect()
    };
    cloud
        .points
        .par_iter()
        .flat_map_iter(|p| {
            offsets
                .iter()
                .map(move |o| p.add(o))
                .filter(|q| cloud.source.contains(q))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Cloud points with a lattice neighbour (one spacing away, 8 directions)
/// outside the source set.
fn boundary_indices(cloud: &PointCloud) -> Vec<usize> {
    let s = cloud.spacing;
    let offs: Vec<Point> = (0..8)
        .map(|a| {
            let t = std::f64::consts::FRAC_PI_4 * a as f64;
            Point::c1(s * t.cos(), s * t.sin())
        })
        .collect();
    let flags: Vec<bool> = cloud
        .points
        .par_iter()
        .map(|p| offs.iter().any(|o| !cloud.source.contains(&p.add(o))))
        .collect();
    let idx: Vec<usize> = (0..cloud.len()).filter(|&i| flags[i]).collect();
    if idx.len() > cloud.len() / 8 && idx.len() > 16 {
        idx
    } else {
        (0..cloud.len()).collect()
    }
}

/// A polynomial evaluated only through `log|p|`.
#[derive(Clone, Debug)]
enum Poly {
    /// `prod (z - r_j)`.
    Roots(Vec<Complex64>),
    /// Lagrange basis polynomial `k` at the nodes: `prod_{j != k} (z - x_j)/(x_k - x_j)`.
    Lagrange(usize),
    /// Coefficients in the frame monomials.
    Dense(Vec<Complex64>),
    /// `<z - c, v>^d`.
    LinearPower(Vec<Complex64>),
}

#[derive(Clone, Debug)]
struct Member {
    poly: Poly,
    normalizer: f64,
}

/// Tuning of the polynomial family.
#[derive(Clone, Copy, Debug)]
pub struct EstimateOptions {
    pub lawson_iterations: usize,
    /// Add the Lagrange basis at the Leja points (weighted, one variable).
    pub lagrange: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            lawson_iterations: LAWSON_ITERATIONS,
            lagrange: true,
        }
    }
}

/// Evaluator for `L_E` or `L_{E,phi}`.
#[derive(Clone, Debug)]
pub struct ExtremalEstimate {
    pub basis: LejaBasis,
    /// Normaliser of the Leja polynomial `max_cloud(log|p_d| - d phi)`.
    pub normalizer: f64,
    members: Vec<Member>,
    nodes: Vec<Complex64>,
    node_log_lead: Vec<f64>,
    linear_center: Vec<Complex64>,
    /// The set and cloud the estimate was built from.
    pub source: CompactSet,
    pub cloud: Vec<Point>,
    /// Cached sup over the last queried ball.
    pub sup_value: Option<f64>,
}

impl ExtremalEstimate {
    pub fn new(cloud: &PointCloud, d: usize, weight: Option<&WeightFn>) -> Result<Self, SiciakError> {
        Self::with_options(cloud, d, weight, EstimateOptions::default())
    }

    pub fn with_options(
        cloud: &PointCloud,
        d: usize,
        weight: Option<&WeightFn>,
        opts: EstimateOptions,
    ) -> Result<Self, SiciakError> {
        if cloud.source.is_degenerate() {
            return Err(SiciakError::Degenerate);
        }
        let basis = build_leja(cloud, d, weight)?;
        let source_dphi = cloud_dphi(cloud, d, weight)?;
        let mut check = cloud.points.clone();
        check.extend(refinement(cloud));
        let check_dphi = cloud_dphi(
            &PointCloud {
                points: check.clone(),
                source: cloud.source.clone(),
                spacing: cloud.spacing,
            },
            d,
            weight,
        )?;
        let (pts, dphi) = (&check, &check_dphi);
        let mut est = ExtremalEstimate {
            basis,
            normalizer: 0.0,
            members: Vec::new(),
            nodes: Vec::new(),
            node_log_lead: Vec::new(),
            linear_center: Vec::new(),
            source: cloud.source.clone(),
            cloud: cloud.points.clone(),
            sup_value: None,
        };
        if est.basis.dim == 1 {
            let leja_roots: Vec<Complex64> = est.basis.points[..d].iter().map(|p| p.0[0]).collect();
            est.nodes = est.basis.points.iter().map(|p| p.0[0]).collect();
            est.node_log_lead = (0..est.nodes.len())
                .map(|k| {
                    -est
                        .nodes
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != k)
                        .map(|(_, xj)| (est.nodes[k] - xj).norm().ln())
                        .sum::<f64>()
                })
                .collect();
            est.push_member(Poly::Roots(leja_roots.clone()), pts, dphi);
            est.normalizer = est.members[0].normalizer;
            if opts.lawson_iterations > 0 {
                // Without a weight the sup of |p| is attained on the outer
                // boundary, so interior cloud points can be left out.
                let keep: Vec<usize> = if weight.is_none() {
                    boundary_indices(cloud)
                } else {
                    (0..cloud.len()).collect()
                };
                let x: Vec<Complex64> = keep.iter().map(|&i| cloud.points[i].0[0]).collect();
                let xdphi: Vec<f64> = keep.iter().map(|&i| source_dphi[i]).collect();
                let (roots, _) = lawson::chebyshev_roots(
                    &x,
                    &xdphi,
                    d,
                    opts.lawson_iterations,
                    &leja_roots,
                );
                est.push_member(Poly::Roots(roots), pts, dphi);
            }
            if opts.lagrange && weight.is_some() {
                est.push_lagrange(pts, dphi);
            }
        } else {
            let tops = est.basis.top_residuals.clone();
            for c in tops {
                est.push_member(Poly::Dense(c), pts, dphi);
            }
            est.normalizer = est.members.first().map_or(0.0, |m| m.normalizer);
            let n = est.basis.dim;
            est.linear_center = (0..n)
                .map(|k| cloud.points.iter().map(|p| p.0[k]).sum::<Complex64>() / cloud.len() as f64)
                .collect();
            for v in sphere_lattice(n, LINEAR_DIRECTIONS) {
                est.push_member(Poly::LinearPower(v.0), pts, dphi);
            }
        }
        Ok(est)
    }

    fn push_member(&mut self, poly: Poly, cloud: &[Point], dphi: &[f64]) {
        let normalizer = cloud
            .par_iter()
            .zip(dphi.par_iter())
            .map(|(p, w)| self.log_abs(&poly, p) - w)
            .reduce(|| f64::NEG_INFINITY, f64::max);
        if normalizer.is_finite() {
            self.members.push(Member { poly, normalizer });
        }
    }

    /// All Lagrange members at once, sharing the node logarithms per point.
    fn push_lagrange(&mut self, cloud: &[Point], dphi: &[f64]) {
        let m = self.nodes.len();
        let norms = cloud
            .par_iter()
            .zip(dphi.par_iter())
            .map(|(p, w)| {
                let logs: Vec<f64> = self.nodes.iter().map(|x| (p.0[0] - x).norm().ln()).collect();
                (0..m)
                    .map(|k| self.lagrange_log(&logs, k) - w)
                    .collect::<Vec<f64>>()
            })
            .reduce(
                || vec![f64::NEG_INFINITY; m],
                |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
            );
        for (k, normalizer) in norms.into_iter().enumerate() {
            if normalizer.is_finite() {
                self.members.push(Member {
                    poly: Poly::Lagrange(k),
                    normalizer,
                });
            }
        }
    }

    fn lagrange_log(&self, logs: &[f64], k: usize) -> f64 {
        let others = if logs[k] == f64::NEG_INFINITY {
            logs.iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, l)| l)
                .sum::<f64>()
        } else {
            logs.iter().sum::<f64>() - logs[k]
        };
        others + self.node_log_lead[k]
    }

    fn log_abs(&self, poly: &Poly, z: &Point) -> f64 {
        let d = self.basis.degree as f64;
        match poly {
            Poly::Roots(r) => lawson::log_abs_roots(z.0[0], r),
            Poly::Lagrange(k) => {
                let z0 = z.0[0];
                self.nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != *k)
                    .map(|(_, xj)| (z0 - xj).norm().ln())
                    .sum::<f64>()
                    + self.node_log_lead[*k]
            }
            Poly::Dense(c) => {
                let frame = self.basis.frame.as_ref().expect("frame in several variables");
                let m = frame.monomials(z);
                m.iter().zip(c).map(|(a, b)| a * b).sum::<Complex64>().norm().ln()
            }
            Poly::LinearPower(v) => {
                let s: Complex64 = z
                    .0
                    .iter()
                    .zip(&self.linear_center)
                    .zip(v)
                    .map(|((zk, ck), vk)| (zk - ck) * vk.conj())
                    .sum();
                d * s.norm().ln()
            }
        }
    }

    pub fn is_weighted(&self) -> bool {
        self.basis.weight.is_some()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    /// Largest member bound, unclamped.
    pub fn raw(&self, z: &Point) -> f64 {
        let d = self.basis.degree as f64;
        if !self.nodes.is_empty() && self.members.iter().any(|m| matches!(m.poly, Poly::Lagrange(_))) {
            return self.raw_1d(z);
        }
        self.members
            .iter()
            .map(|m| (self.log_abs(&m.poly, z) - m.normalizer) / d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// One-variable evaluation sharing the node logarithms across the Lagrange members.
    fn raw_1d(&self, z: &Point) -> f64 {
        let d = self.basis.degree as f64;
        let z0 = z.0[0];
        let logs: Vec<f64> = self.nodes.iter().map(|x| (z0 - x).norm().ln()).collect();
        let total: f64 = logs.iter().sum();
        let mut best = f64::NEG_INFINITY;
        for m in &self.members {
            let v = match &m.poly {
                Poly::Lagrange(k) => {
                    if logs[*k] == f64::NEG_INFINITY {
                        self.lagrange_log(&logs, *k)
                    } else {
                        total - logs[*k] + self.node_log_lead[*k]
                    }
                }
                other => self.log_abs(other, z),
            };
            best = best.max((v - m.normalizer) / d);
        }
        best
    }

    /// `lim (raw(z) - log|z|)` as `z -> infinity` in one variable: the
    /// normalised log of the leading coefficient of the best member.
    pub fn raw_at_infinity(&self) -> Option<f64> {
        if self.basis.dim != 1 {
            return None;
        }
        let d = self.basis.degree as f64;
        self.members
            .iter()
            .map(|m| match &m.poly {
                Poly::Roots(_) => Some(-m.normalizer / d),
                Poly::Lagrange(k) => Some((self.node_log_lead[*k] - m.normalizer) / d),
                _ => None,
            })
            .try_fold(f64::NEG_INFINITY, |a, v| v.map(|v| a.max(v)))
    }

    /// `L^(z)`: clamped below at 0 when unweighted.
    pub fn value(&self, z: &Point) -> f64 {
        let v = self.raw(z);
        if self.is_weighted() {
            v
        } else {
            v.max(0.0)
        }
    }

    pub fn values(&self, zs: &[Point]) -> Vec<f64> {
        zs.par_iter().map(|z| self.value(z)).collect()
    }

    /// Number of polynomials in the family.
    pub fn family_size(&self) -> usize {
        self.members.len()
    }

    /// `max L^` over a deterministic lattice of the sphere of radius `r`
    /// (subharmonicity puts the maximum over the ball there); cached in `sup_value`.
    pub fn sup_on_ball(&mut self, center: &Point, r: f64, samples: usize) -> Result<f64, SiciakError> {
        let s = self.sup_over_ball(center, r, samples)?;
        self.sup_value = Some(s);
        Ok(s)
    }

    pub fn sup_over_ball(&self, center: &Point, r: f64, samples: usize) -> Result<f64, SiciakError> {
        if samples == 0 {
            return Err(SiciakError::NoSamples);
        }
        let pts: Vec<Point> = sphere_lattice(self.basis.dim, samples)
            .into_iter()
            .map(|u| center.add(&u.scale(r)))
            .collect();
        Ok(self.values(&pts).into_iter().fold(f64::NEG_INFINITY, f64::max))
    }
}

/// `L^_E(z)` for an unweighted estimate.
pub fn evaluate_l(est: &ExtremalEstimate, z: &Point) -> Result<f64, SiciakError> {
    if est.is_weighted() {
        return Err(SiciakError::WeightMismatch);
    }
    Ok(est.value(z))
}

/// `L^_{E,phi}(z)` for a weighted estimate (no clamp).
pub fn evaluate_l_weighted(est: &ExtremalEstimate, z: &Point) -> Result<f64, SiciakError> {
    if !est.is_weighted() {
        return Err(SiciakError::WeightMismatch);
    }
    Ok(est.value(z))
}

/// `L^_d(z)` along a doubling degree schedule, with the gaps `L^_{2d} - L^_d`.
pub fn degree_schedule(
    cloud: &PointCloud,
    weight: Option<&WeightFn>,
    z: &Point,
    degrees: &[usize],
) -> Result<Vec<(usize, f64, Option<f64>)>, SiciakError> {
    let vals: Vec<(usize, f64)> = degrees
        .iter()
        .map(|&d| ExtremalEstimate::new(cloud, d, weight).map(|e| (d, e.value(z))))
        .collect::<Result<_, _>>()?;
    Ok(vals
        .iter()
        .enumerate()
        .map(|(k, &(d, v))| (d, v, vals.get(k + 1).map(|(_, w)| w - v)))
        .collect())
}

#[cfg(test)]
mod tests;
