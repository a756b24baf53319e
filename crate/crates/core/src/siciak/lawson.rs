//! Discrete weighted Chebyshev polynomials in one variable via Lawson's
//! iteratively reweighted least squares.
//!
//! Each sweep forms the monic orthogonal polynomial of degree `d` for the
//! current discrete measure by Arnoldi on `diag(x)`; its roots are the
//! eigenvalues of the Hessenberg section. Weights are then multiplied by the
//! weighted error `|p| e^{-d phi}`, all in the log domain.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Measure entries further than this below the maximum (in log) are dropped.
const LOG_PRUNE: f64 = 40.0;

/// Sweeps without improvement of the best norm before stopping.
const STALL_LIMIT: usize = 8;

pub(crate) fn log_abs_roots(z: Complex64, roots: &[Complex64]) -> f64 {
    roots.iter().map(|r| (z - r).norm().ln()).sum()
}

/// Returns the roots of the best (smallest weighted discrete sup-norm) monic
/// iterate, with that norm `max_i (log|p(x_i)| - dphi_i)`.
pub(crate) fn chebyshev_roots(
    x: &[Complex64],
    dphi: &[f64],
    d: usize,
    iterations: usize,
    seed_roots: &[Complex64],
) -> (Vec<Complex64>, f64) {
    let err = |roots: &[Complex64]| -> Vec<f64> {
        x.iter()
            .zip(dphi)
            .map(|(xi, w)| log_abs_roots(*xi, roots) - w)
            .collect()
    };
    let mut best_roots = seed_roots.to_vec();
    let mut best = max_of(&err(seed_roots));
    let mut logw: Vec<f64> = vec![0.0; x.len()];
    let mut stale = 0;
    for _ in 0..iterations {
        let logm: Vec<f64> = logw.iter().zip(dphi).map(|(l, w)| l - 2.0 * w).collect();
        let Some(roots) = monic_orthogonal_roots(x, &logm, d) else {
            break;
        };
        if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
            break;
        }
        let e = err(&roots);
        let norm = max_of(&e);
        if norm < best - 1e-10 * (1.0 + best.abs()) {
            best = norm;
            best_roots = roots;
            stale = 0;
        } else {
            stale += 1;
            if stale >= STALL_LIMIT {
                break;
            }
        }
        for (l, ei) in logw.iter_mut().zip(&e) {
            *l += ei - norm;
        }
        let top = max_of(&logw);
        logw.iter_mut().for_each(|l| *l -= top);
    }
    (best_roots, best)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Roots of the degree-`d` monic orthogonal polynomial for the discrete
/// measure `sum_i e^{logm_i} delta_{x_i}`; `None` if the support is too small.
fn monic_orthogonal_roots(x: &[Complex64], logm: &[f64], d: usize) -> Option<Vec<Complex64>> {
    let top = max_of(logm);
    let active: Vec<usize> = (0..x.len())
        .filter(|&i| logm[i].is_finite() && logm[i] > top - LOG_PRUNE)
        .collect();
    if active.len() <= d {
        return None;
    }
    let xs: Vec<Complex64> = active.iter().map(|&i| x[i]).collect();
    let mut q0: Vec<Complex64> = active
        .iter()
        .map(|&i| Complex64::new((0.5 * (logm[i] - top)).exp(), 0.0))
        .collect();
    normalize(&mut q0)?;
    let mut basis = vec![q0];
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for k in 0..d {
        let mut v: Vec<Complex64> = basis[k].iter().zip(&xs).map(|(q, xi)| q * xi).collect();
        for _pass in 0..2 {
            for (j, qj) in basis.iter().enumerate() {
                let c: Complex64 = qj.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                if j < d {
                    h[(j, k)] += c;
                }
                v.iter_mut().zip(qj).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        if k + 1 < d {
            let beta = normalize(&mut v)?;
            h[(k + 1, k)] = Complex64::new(beta, 0.0);
            basis.push(v);
        }
    }
    let (_, t) = h.schur().unpack();
    Some((0..d).map(|i| t[(i, i)]).collect())
}

fn normalize(v: &mut [Complex64]) -> Option<f64> {
    let nrm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !(nrm > 1e-280) {
        return None;
    }
    v.iter_mut().for_each(|a| *a /= nrm);
    Some(nrm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn roots_of_circle_measure_are_near_origin() {
        let x: Vec<Complex64> = (0..200)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 200.0))
            .collect();
        let logm = vec![0.0; 200];
        let r = monic_orthogonal_roots(&x, &logm, 8).unwrap();
        // z^8 is the monic orthogonal polynomial; its norm on the circle is 1.
        let e = x.iter().map(|xi| log_abs_roots(*xi, &r)).fold(f64::MIN, f64::max);
        assert!(e.abs() < 1e-8, "{e}");
    }

    #[test]
    fn interval_chebyshev_norm() {
        // Dense sample of [-1, 1]; discrete Chebyshev norm tends to 2^{1-d}.
        let x: Vec<Complex64> = (0..=2000)
            .map(|k| Complex64::new(-(PI * k as f64 / 2000.0).cos(), 0.0))
            .collect();
        let d = 10;
        let dphi = vec![0.0; x.len()];
        let (_, norm) = chebyshev_roots(&x, &dphi, d, 60, &[Complex64::new(0.0, 0.0); 10]);
        let exact = (1.0 - d as f64) * 2f64.ln();
        assert!((norm - exact).abs() < 1e-3, "{norm} vs {exact}");
    }
}
