//! Nearest point of a convex hull (Wolfe's minimum-norm-point algorithm).

use nalgebra::{DMatrix, DVector};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Returns the point of `conv(points)` closest to `z`.
pub(crate) fn nearest_in_hull(points: &[Vec<f64>], z: &[f64]) -> Vec<f64> {
    let shifted: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(z).map(|(a, b)| a - b).collect())
        .collect();
    let x = min_norm_point(&shifted);
    x.iter().zip(z).map(|(a, b)| a + b).collect()
}

/// Minimum-norm point of the convex hull of `p`.
fn min_norm_point(p: &[Vec<f64>]) -> Vec<f64> {
    let dim = p[0].len();
    let scale = p.iter().map(|v| dot(v, v)).fold(0.0_f64, f64::max).max(1e-300);
    let eps = 1e-12;

    let first = (0..p.len())
        .min_by(|&a, &b| dot(&p[a], &p[a]).total_cmp(&dot(&p[b], &p[b])))
        .unwrap();
    let mut active = vec![first];
    let mut lambda = vec![1.0];
    let mut x = p[first].clone();

    for _major in 0..(50 * p.len() + 50) {
        let xx = dot(&x, &x);
        let (j, best) = (0..p.len())
            .map(|i| (i, dot(&x, &p[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if best >= xx - eps * scale || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);

        loop {
            let alpha = affine_minimizer(p, &active);
            if alpha.iter().all(|&a| a > eps) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= eps && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let mut k = 0;
            while k < active.len() {
                if lambda[k] <= eps {
                    active.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= s);
            if active.len() <= 1 {
                break;
            }
        }
        x = vec![0.0; dim];
        for (&i, &l) in active.iter().zip(&lambda) {
            for (xc, pc) in x.iter_mut().zip(&p[i]) {
                *xc += l * pc;
            }
        }
    }
    x
}

/// Coefficients (summing to one) of the minimum-norm point of the affine hull.
fn affine_minimizer(p: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let m = active.len();
    let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
    let mut b = DVector::<f64>::zeros(m + 1);
    for r in 0..m {
        for c in 0..m {
            a[(r, c)] = dot(&p[active[r]], &p[active[c]]);
        }
        a[(r, m)] = 1.0;
        a[(m, r)] = 1.0;
    }
    b[m] = 1.0;
    match a.clone().lu().solve(&b) {
        Some(sol) if sol.iter().all(|v| v.is_finite()) => sol.iter().take(m).copied().collect(),
        _ => {
            // Affinely dependent active set: fall back to least squares.
            let svd = a.svd(true, true);
            let sol = svd.solve(&b, 1e-14).unwrap_or_else(|_| DVector::zeros(m + 1));
            sol.iter().take(m).copied().collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_nearest_points() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let q = nearest_in_hull(&tri, &[0.2, 0.2]);
        assert!((q[0] - 0.2).abs() < 1e-12 && (q[1] - 0.2).abs() < 1e-12);
        let q = nearest_in_hull(&tri, &[1.0, 1.0]);
        assert!((q[0] - 0.5).abs() < 1e-12 && (q[1] - 0.5).abs() < 1e-12);
        let q = nearest_in_hull(&tri, &[-1.0, -2.0]);
        assert!(q[0].abs() < 1e-12 && q[1].abs() < 1e-12);
    }

    #[test]
    fn segment_hull_in_r4() {
        let seg = vec![vec![-1.0, 0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0]];
        let q = nearest_in_hull(&seg, &[0.3, 2.0, 0.0, -1.0]);
        assert!((q[0] - 0.3).abs() < 1e-12 && q[1].abs() < 1e-12 && q[3].abs() < 1e-12);
    }
}
