//! Ball means on the grid and the mollifier-gap Hölder estimator.

use super::{FieldMeta, PotentialError, ScalarField, MIN_RESOLUTION};
use crate::fit::{fit_power_law, HolderFit};
use rayon::prelude::*;
use serde_json::json;

struct Kernel {
    mx: usize,
    my: usize,
    /// Half-width (in nodes) of each kernel row, for offsets `-my..=my`.
    widths: Vec<usize>,
    count: f64,
}

fn kernel(field: &ScalarField, delta: f64) -> Result<Kernel, PotentialError> {
    let (hx, hy) = (field.hx(), field.hy());
    let min = 2.0 * hx.max(hy);
    if delta < min * (1.0 - 1e-12) {
        return Err(PotentialError::DeltaTooSmall { delta, min });
    }
    let mx = (delta / hx + 1e-9).floor() as usize;
    let my = (delta / hy + 1e-9).floor() as usize;
    if field.nx < 2 * mx + MIN_RESOLUTION || field.ny < 2 * my + MIN_RESOLUTION {
        return Err(PotentialError::ErodedEmpty(delta));
    }
    let widths: Vec<usize> = (-(my as i64)..=my as i64)
        .map(|b| {
            let dy = b as f64 * hy;
            let rest = (delta * delta - dy * dy).max(0.0);
            ((rest.sqrt() / hx) + 1e-9).floor() as usize
        })
        .collect();
    let count = widths.iter().map(|w| (2 * w + 1) as f64).sum();
    Ok(Kernel {
        mx,
        my,
        widths,
        count,
    })
}

/// Mean over the discrete ball of radius `delta` (the node set
/// `|offset| <= delta`, weights summing to one), on the `delta`-eroded box.
pub fn mollify(field: &ScalarField, delta: f64) -> Result<ScalarField, PotentialError> {
    let k = kernel(field, delta)?;
    let (nx, ny) = (field.nx, field.ny);
    let prefix: Vec<Vec<f64>> = field
        .values
        .par_chunks(nx)
        .map(|row| {
            let mut p = Vec::with_capacity(nx + 1);
            let mut acc = 0.0;
            p.push(0.0);
            for v in row {
                acc += v;
                p.push(acc);
            }
            p
        })
        .collect();
    let (ox, oy) = (nx - 2 * k.mx, ny - 2 * k.my);
    let values: Vec<f64> = (0..ox * oy)
        .into_par_iter()
        .map(|q| {
            let (i, j) = (q % ox + k.mx, q / ox + k.my);
            let mut s = 0.0;
            for (bi, w) in k.widths.iter().enumerate() {
                let row = &prefix[j + bi - k.my];
                s += row[i + w + 1] - row[i - w];
            }
            s / k.count
        })
        .collect();
    let (hx, hy) = (field.hx(), field.hy());
    let bounds = [
        [
            field.bounds[0][0] + k.mx as f64 * hx,
            field.bounds[0][1] - k.mx as f64 * hx,
        ],
        [
            field.bounds[1][0] + k.my as f64 * hy,
            field.bounds[1][1] - k.my as f64 * hy,
        ],
    ];
    Ok(ScalarField::new(
        bounds,
        ox,
        oy,
        values,
        FieldMeta {
            kind: "ball_mean".into(),
            residual: 0.0,
            tolerance: 0.0,
            iterations: 0,
            omega: 0.0,
            info: json!({ "delta": delta, "source": field.meta.kind, "kernel_nodes": k.count }),
        },
    )?)
}

/// `sup (mean_delta v - v)` for each `delta`, over the region eroded by the largest `delta`.
pub fn mollifier_gaps(field: &ScalarField, deltas: &[f64]) -> Result<Vec<f64>, PotentialError> {
    let dmax = deltas.iter().cloned().fold(0.0, f64::max);
    let outer = kernel(field, dmax)?;
    deltas
        .iter()
        .map(|&d| {
            let m = mollify(field, d)?;
            let k = kernel(field, d)?;
            let mut sup = f64::NEG_INFINITY;
            for j in outer.my..field.ny - outer.my {
                for i in outer.mx..field.nx - outer.mx {
                    let g = m.at(i - k.mx, j - k.my) - field.at(i, j);
                    sup = sup.max(g);
                }
            }
            Ok(sup)
        })
        .collect()
}

/// Slope of `log sup(mean_delta v - v)` against `log delta`. Nonpositive gaps
/// (a field smooth to machine precision) give a degenerate fit with `mu = 1`.
pub fn holder_from_mollifier(field: &ScalarField, deltas: &[f64]) -> Result<HolderFit, PotentialError> {
    if deltas.len() < 4 {
        return Err(PotentialError::TooFewRadii(deltas.len()));
    }
    let gaps = mollifier_gaps(field, deltas)?;
    let scale = field.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = 1e-12 * (1.0 + scale);
    let cleaned: Vec<f64> = gaps.iter().map(|&g| if g > floor { g } else { 0.0 }).collect();
    Ok(fit_power_law(deltas, &cleaned))
}
