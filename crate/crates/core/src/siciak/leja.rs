//! Greedy Leja / approximate Fekete selection.

use super::SiciakError;
use crate::point::Point;
use num_complex::Complex64;
use rayon::prelude::*;

/// Pivot magnitudes at or below this count as collapse.
pub(crate) const PIVOT_FLOOR: f64 = 1e-13;

/// Outcome of a one-variable selection: indices into the cloud and the
/// log-domain score of each step.
pub(crate) struct Selection1 {
    pub indices: Vec<usize>,
    pub log_pivots: Vec<f64>,
}

/// Deterministic argmax: largest value, lowest index among ties.
pub(crate) fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| (i, v))
        .reduce_with(|a, b| {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) || a.1.is_nan() {
                b
            } else {
                a
            }
        })
        .filter(|(_, v)| !v.is_nan())
}

/// Weighted Leja sequence in `C`: step `k` maximises
/// `sum_{j<k} log|x - xi_j| - dphi(x)`.
pub(crate) fn select_1d(
    x: &[Complex64],
    dphi: &[f64],
    count: usize,
    diam: f64,
) -> Result<Selection1, SiciakError> {
    let centre = x.iter().sum::<Complex64>() / x.len() as f64;
    let mut score: Vec<f64> = x
        .iter()
        .zip(dphi)
        .map(|(xi, w)| (xi - centre).norm().ln() * 1e-6 - w)
        .collect();
    // The first step uses a faint preference for points far from the centroid
    // so the unweighted sequence starts on the outer boundary.
    let mut taken = vec![false; x.len()];
    let mut indices = Vec::with_capacity(count);
    let mut log_pivots = Vec::with_capacity(count);
    for step in 0..count {
        let masked: Vec<f64> = score
            .iter()
            .zip(&taken)
            .map(|(s, t)| if *t { f64::NEG_INFINITY } else { *s })
            .collect();
        let (i, s) = argmax(&masked).ok_or(SiciakError::PivotCollapse { step, pivot: 0.0 })?;
        if s == f64::NEG_INFINITY {
            return Err(SiciakError::PivotCollapse { step, pivot: 0.0 });
        }
        let gap = indices
            .iter()
            .map(|&j: &usize| (x[j] - x[i]).norm())
            .fold(f64::INFINITY, f64::min);
        if gap <= PIVOT_FLOOR * diam {
            return Err(SiciakError::PivotCollapse { step, pivot: gap / diam });
        }
        taken[i] = true;
        indices.push(i);
        log_pivots.push(if step == 0 { -dphi[i] } else { s });
        let xi = x[i];
        let first = step == 0;
        score.par_iter_mut().zip(x.par_iter()).zip(dphi.par_iter()).for_each(|((sc, xk), w)| {
            let base = if first { -w } else { *sc };
            *sc = base + (xk - xi).norm().ln();
        });
    }
    Ok(Selection1 {
        indices,
        log_pivots,
    })
}

/// Monomial frame for several variables: centred, scaled coordinates and the
/// graded-lexicographic exponent list.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub center: Vec<Complex64>,
    pub scale: f64,
    pub exps: Vec<Vec<u32>>,
}

impl Frame {
    pub fn new(points: &[Point], d: usize) -> Self {
        let n = points[0].dim();
        let reals: Vec<Vec<f64>> = points.iter().map(|p| p.reals()).collect();
        let mut lo = vec![f64::INFINITY; 2 * n];
        let mut hi = vec![f64::NEG_INFINITY; 2 * n];
        for r in &reals {
            for ax in 0..2 * n {
                lo[ax] = lo[ax].min(r[ax]);
                hi[ax] = hi[ax].max(r[ax]);
            }
        }
        let center = (0..n)
            .map(|k| {
                Complex64::new(
                    0.5 * (lo[2 * k] + hi[2 * k]),
                    0.5 * (lo[2 * k + 1] + hi[2 * k + 1]),
                )
            })
            .collect();
        let scale = (0..2 * n)
            .map(|ax| 0.5 * (hi[ax] - lo[ax]))
            .fold(0.0, f64::max)
            .max(1e-300);
        Frame {
            center,
            scale,
            exps: graded_lex(n, d),
        }
    }

    /// Values of every monomial of the frame at `z`.
    pub fn monomials(&self, z: &Point) -> Vec<Complex64> {
        let d = self.exps.last().map_or(0, |e| e.iter().sum::<u32>() as usize);
        let w: Vec<Complex64> = z
            .0
            .iter()
            .zip(&self.center)
            .map(|(zk, ck)| (zk - ck) / self.scale)
            .collect();
        let powers: Vec<Vec<Complex64>> = w
            .iter()
            .map(|wk| {
                let mut p = vec![Complex64::new(1.0, 0.0); d + 1];
                for j in 1..=d {
                    p[j] = p[j - 1] * wk;
                }
                p
            })
            .collect();
        self.exps
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .map(|(k, &a)| powers[k][a as usize])
                    .product()
            })
            .collect()
    }
}

/// All exponents of total degree `<= d` in `n` variables: by degree, then
/// lexicographically descending.
pub(crate) fn graded_lex(n: usize, d: usize) -> Vec<Vec<u32>> {
    fn rec(n: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=total).rev() {
            prefix.push(a);
            rec(n - 1, total - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for k in 0..=d as u32 {
        rec(n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Outcome of the multivariate elimination.
pub(crate) struct SelectionN {
    pub indices: Vec<usize>,
    pub log_pivots: Vec<f64>,
    /// Coefficients (in the frame's monomials) of the residual polynomial of
    /// every column of top degree.
    pub top_residuals: Vec<Vec<Complex64>>,
}

/// Row-pivoted LU elimination of the (weighted, column-normalised)
/// Vandermonde matrix.
pub(crate) fn select_nd(
    points: &[Point],
    dphi: &[f64],
    frame: &Frame,
    d: usize,
) -> Result<SelectionN, SiciakError> {
    let m = points.len();
    let ncols = frame.exps.len();
    let wmin = dphi.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut v: Vec<Vec<Complex64>> = points
        .par_iter()
        .zip(dphi.par_iter())
        .map(|(p, w)| {
            let s = (-(w - wmin)).exp();
            frame.monomials(p).into_iter().map(|c| c * s).collect()
        })
        .collect();
    // Column normalisation to sup 1 on the cloud.
    let mut col_scale = vec![0.0f64; ncols];
    for row in &v {
        for (c, val) in col_scale.iter_mut().zip(row) {
            *c = c.max(val.norm());
        }
    }
    for row in v.iter_mut() {
        for (val, c) in row.iter_mut().zip(&col_scale) {
            if *c > 0.0 {
                *val /= *c;
            }
        }
    }
    // coeff[j] = residual polynomial of column j in (normalised) monomial coordinates.
    let mut coeff: Vec<Vec<Complex64>> = (0..ncols)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); ncols];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    let mut taken = vec![false; m];
    let mut indices = Vec::with_capacity(ncols);
    let mut log_pivots = Vec::with_capacity(ncols);
    for k in 0..ncols {
        let mags: Vec<f64> = (0..m)
            .map(|i| if taken[i] { f64::NEG_INFINITY } else { v[i][k].norm() })
            .collect();
        let (i, piv) = argmax(&mags).ok_or(SiciakError::PivotCollapse { step: k, pivot: 0.0 })?;
        if !(piv > PIVOT_FLOOR) {
            return Err(SiciakError::PivotCollapse {
                step: k,
                pivot: piv.max(0.0),
            });
        }
        taken[i] = true;
        indices.push(i);
        log_pivots.push(piv.ln());
        let prow = v[i].clone();
        let factors: Vec<Complex64> = (0..ncols)
            .map(|j| if j > k { prow[j] / prow[k] } else { Complex64::new(0.0, 0.0) })
            .collect();
        v.par_iter_mut().for_each(|row| {
            let rk = row[k];
            for j in k + 1..ncols {
                row[j] -= rk * factors[j];
            }
        });
        let ck = coeff[k].clone();
        for j in k + 1..ncols {
            let f = factors[j];
            for (a, b) in coeff[j].iter_mut().zip(&ck) {
                *a -= f * b;
            }
        }
    }
    let top_residuals = (0..ncols)
        .filter(|&j| frame.exps[j].iter().sum::<u32>() as usize == d)
        .map(|j| {
            // Undo the column scaling so coefficients refer to raw frame monomials.
            coeff[j]
                .iter()
                .zip(&col_scale)
                .map(|(c, s)| if *s > 0.0 { c / s } else { *c })
                .collect()
        })
        .collect();
    Ok(SelectionN {
        indices,
        log_pivots,
        top_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let e = graded_lex(2, 2);
        assert_eq!(
            e,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        assert_eq!(graded_lex(2, 16).len(), 153);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), Some((1, 3.0)));
    }
}
