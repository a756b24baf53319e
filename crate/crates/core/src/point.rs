//! Points of `C^n` and their real coordinates in `R^{2n}`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A point of `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<Complex64>);

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Point(coords)
    }

    /// A point of `C^1`.
    pub fn c1(re: f64, im: f64) -> Self {
        Point(vec![Complex64::new(re, im)])
    }

    /// A point of `C^2`.
    pub fn c2(z1: Complex64, z2: Complex64) -> Self {
        Point(vec![z1, z2])
    }

    pub fn origin(n: usize) -> Self {
        Point(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Builds a point from `2n` real coordinates `(re_1, im_1, re_2, im_2, ...)`.
    pub fn from_reals(x: &[f64]) -> Self {
        debug_assert!(x.len() % 2 == 0);
        Point(x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn reals(&self) -> Vec<f64> {
        self.0.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + (b - a) * t)
                .collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, z) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}{:+}i", z.re, z.im)?;
        }
        write!(f, ")")
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(Point(
            pairs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        ))
    }
}

/// Euclidean distance between real coordinate vectors.
pub(crate) fn rdist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Deterministic quasi-uniform samples of the unit sphere of `C^n`.
///
/// In `C^1` the circle is sampled equispaced. In `C^2` the Hopf parametrisation
/// `(cos t e^{ia}, sin t e^{ib})` is driven by a Kronecker sequence, which is
/// uniform for the surface measure since `|z_1|^2` is uniform on `[0,1]`.
pub fn sphere_lattice(n: usize, samples: usize) -> Vec<Point> {
    use std::f64::consts::TAU;
    if n == 1 {
        return (0..samples)
            .map(|k| {
                let t = TAU * k as f64 / samples as f64;
                Point::c1(t.cos(), t.sin())
            })
            .collect();
    }
    // Additive recurrence with the plastic-number generalisation of the golden ratio.
    let g = 1.220_744_084_605_759_5_f64;
    let alpha = [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)];
    let frac = |k: usize, j: usize| (0.5 + alpha[j % 3] * (k as f64 + 1.0)).fract();
    (0..samples)
        .map(|k| {
            if n == 2 {
                let s = (k as f64 + 0.5) / samples as f64;
                Point::c2(
                    Complex64::from_polar(s.sqrt(), TAU * frac(k, 0)),
                    Complex64::from_polar((1.0 - s).sqrt(), TAU * frac(k, 1)),
                )
            } else {
                let mut x: Vec<f64> = (0..2 * n)
                    .map(|j| (TAU * frac(k, j) + j as f64).sin() + 1e-3)
                    .collect();
                let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v /= nrm);
                Point::from_reals(&x)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        let p = Point::c2(Complex64::new(1.0, -2.0), Complex64::new(0.5, 3.0));
        assert_eq!(Point::from_reals(&p.reals()), p);
    }

    #[test]
    fn sphere_lattice_is_on_sphere() {
        for n in [1, 2] {
            for p in sphere_lattice(n, 200) {
                assert!((p.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn serde_as_pairs() {
        let p = Point::c1(0.25, -1.0);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[0.25,-1.0]]");
        let q: Point = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
