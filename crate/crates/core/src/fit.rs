//! Least-squares power-law fits in log-log coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Slopes above this are clamped in reports (exponents of interest live in (0, 1]).
pub const MU_CAP: f64 = 1.2;
/// Fits with a larger rms (log scale) are low confidence.
pub const LOW_CONFIDENCE_RMS: f64 = 0.1;

/// `value ≈ C delta^mu` fitted on a window of `delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub mu: f64,
    pub c: f64,
    pub rms: f64,
    /// Values of `delta` that entered the fit.
    pub window: Vec<f64>,
    /// Leading zero values dropped before fitting.
    pub dropped_zeros: usize,
    /// Degenerate input (no positive values): `mu` is reported as 1.
    pub degenerate: bool,
    /// The raw slope exceeded [`MU_CAP`].
    pub clamped: bool,
    pub low_confidence: bool,
}

/// `value ≈ C delta^mu / r^q` fitted on an `(r, delta)` window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalHcpFit {
    pub mu: f64,
    pub q: f64,
    pub c: f64,
    pub rms: f64,
    pub r_window: Vec<f64>,
    pub delta_window: Vec<f64>,
    /// `q` came out slightly negative (tolerated down to -0.1).
    pub negative_q: bool,
    pub clamped: bool,
    pub low_confidence: bool,
}

/// Ordinary least squares `y ≈ a + b x`; returns `(a, b, rms)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(u, v)| (v - a - b * u).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (a, b, rms)
}

/// Least squares `y ≈ X beta` via SVD; returns `(beta, rms)`.
pub fn linear_lsq(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let m = rows.len();
    let k = rows[0].len();
    let a = DMatrix::from_fn(m, k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let beta = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(k));
    let r = &a * &beta - &b;
    let rms = (r.norm_squared() / m as f64).sqrt();
    (beta.iter().copied().collect(), rms)
}

/// Power-law fit `values ≈ C delta^mu`, dropping nonpositive leading values.
pub fn fit_power_law(deltas: &[f64], values: &[f64]) -> HolderFit {
    let mut pairs: Vec<(f64, f64)> = deltas.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dropped_zeros = pairs.iter().take_while(|(_, v)| !(*v > 0.0)).count();
    let kept: Vec<(f64, f64)> = pairs
        .into_iter()
        .skip(dropped_zeros)
        .filter(|(_, v)| *v > 0.0)
        .collect();
    if kept.len() < 2 {
        return HolderFit {
            mu: 1.0,
            c: 0.0,
            rms: 0.0,
            window: kept.iter().map(|p| p.0).collect(),
            dropped_zeros,
            degenerate: true,
            clamped: false,
            low_confidence: true,
        };
    }
    let lx: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let (a, b, rms) = line_fit(&lx, &ly);
    HolderFit {
        mu: b.min(MU_CAP),
        c: a.exp(),
        rms,
        window: kept.iter().map(|p| p.0).collect(),
        dropped_zeros,
        degenerate: false,
        clamped: b > MU_CAP,
        low_confidence: rms > LOW_CONFIDENCE_RMS,
    }
}

/// Surface fit `log w ≈ log C + mu log delta - q log r` over positive samples.
pub fn fit_surface(samples: &[(f64, f64, f64)]) -> Option<LocalHcpFit> {
    let kept: Vec<&(f64, f64, f64)> = samples.iter().filter(|s| s.2 > 0.0).collect();
    if kept.len() < 3 {
        return None;
    }
    let rows: Vec<Vec<f64>> = kept.iter().map(|(r, d, _)| vec![1.0, d.ln(), -r.ln()]).collect();
    let y: Vec<f64> = kept.iter().map(|s| s.2.ln()).collect();
    let (beta, rms) = linear_lsq(&rows, &y);
    let mut rs: Vec<f64> = kept.iter().map(|s| s.0).collect();
    let mut ds: Vec<f64> = kept.iter().map(|s| s.1).collect();
    for v in [&mut rs, &mut ds] {
        v.sort_by(|a, b| b.total_cmp(a));
        v.dedup();
    }
    Some(LocalHcpFit {
        mu: beta[1].min(MU_CAP),
        q: beta[2],
        c: beta[0].exp(),
        rms,
        r_window: rs,
        delta_window: ds,
        negative_q: beta[2] < 0.0,
        clamped: beta[1] > MU_CAP,
        low_confidence: rms > LOW_CONFIDENCE_RMS,
    })
}

/// `count` values `start, start*ratio, ...`.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}
