//! Node-based scalar fields on rectangles of `C = R^2` and their binary cache format.

use crate::point::Point;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

pub const MAGIC: &[u8; 6] = b"PPLAB1";
pub const MIN_RESOLUTION: usize = 16;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("resolution {0} below the minimum of 16 nodes per axis")]
    Resolution(usize),
    #[error("field contains a non-finite value at node {0}")]
    NonFinite(usize),
    #[error("truncated or malformed field file: {0}")]
    Malformed(&'static str),
    #[error("bad magic bytes")]
    Magic,
    #[error("metadata: {0}")]
    Meta(#[from] serde_json::Error),
    #[error("only fields over C (two real axes) are supported")]
    Dimension,
}

/// What a field holds and how it was produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub kind: String,
    pub residual: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub omega: f64,
    #[serde(default)]
    pub info: serde_json::Value,
}

/// Values on the nodes `x_i = lo_x + i h_x`, `y_j = lo_y + j h_y`, stored row-major
/// with index `j * nx + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub bounds: [[f64; 2]; 2],
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub meta: FieldMeta,
}

impl ScalarField {
    pub fn new(
        bounds: [[f64; 2]; 2],
        nx: usize,
        ny: usize,
        values: Vec<f64>,
        meta: FieldMeta,
    ) -> Result<Self, FieldError> {
        if nx < MIN_RESOLUTION || ny < MIN_RESOLUTION {
            return Err(FieldError::Resolution(nx.min(ny)));
        }
        if values.len() != nx * ny {
            return Err(FieldError::Malformed("value count"));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(k));
        }
        Ok(ScalarField {
            bounds,
            nx,
            ny,
            values,
            meta,
        })
    }

    /// Samples `f` at every node in parallel.
    pub fn from_fn(
        bounds: [[f64; 2]; 2],
        nx: usize,
        ny: usize,
        meta: FieldMeta,
        f: impl Fn(&Point) -> f64 + Sync,
    ) -> Result<Self, FieldError> {
        let hx = (bounds[0][1] - bounds[0][0]) / (nx - 1) as f64;
        let hy = (bounds[1][1] - bounds[1][0]) / (ny - 1) as f64;
        let values = (0..nx * ny)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % nx, k / nx);
                f(&Point::c1(
                    bounds[0][0] + i as f64 * hx,
                    bounds[1][0] + j as f64 * hy,
                ))
            })
            .collect();
        Self::new(bounds, nx, ny, values, meta)
    }

    pub fn hx(&self) -> f64 {
        (self.bounds[0][1] - self.bounds[0][0]) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.bounds[1][1] - self.bounds[1][0]) / (self.ny - 1) as f64
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::c1(
            self.bounds[0][0] + i as f64 * self.hx(),
            self.bounds[1][0] + j as f64 * self.hy(),
        )
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Bilinear interpolation; `None` outside the rectangle.
    pub fn sample(&self, z: &Point) -> Option<f64> {
        let (x, y) = (z.0[0].re, z.0[0].im);
        let fx = (x - self.bounds[0][0]) / self.hx();
        let fy = (y - self.bounds[1][0]) / self.hy();
        let eps = 1e-9;
        if fx < -eps || fy < -eps || fx > (self.nx - 1) as f64 + eps || fy > (self.ny - 1) as f64 + eps
        {
            return None;
        }
        let i = (fx.floor().max(0.0) as usize).min(self.nx - 2);
        let j = (fy.floor().max(0.0) as usize).min(self.ny - 2);
        let (tx, ty) = ((fx - i as f64).clamp(0.0, 1.0), (fy - j as f64).clamp(0.0, 1.0));
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        Some(
            v00 * (1.0 - tx) * (1.0 - ty)
                + v10 * tx * (1.0 - ty)
                + v01 * (1.0 - tx) * ty
                + v11 * tx * ty,
        )
    }

    /// Nearest node to `z`, if inside the rectangle.
    pub fn nearest_node(&self, z: &Point) -> Option<(usize, usize)> {
        let fx = ((z.0[0].re - self.bounds[0][0]) / self.hx()).round();
        let fy = ((z.0[0].im - self.bounds[1][0]) / self.hy()).round();
        if fx < 0.0 || fy < 0.0 || fx > (self.nx - 1) as f64 || fy > (self.ny - 1) as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&(self.nx as u32).to_le_bytes());
        out.extend_from_slice(&(self.ny as u32).to_le_bytes());
        for [lo, hi] in self.bounds {
            out.extend_from_slice(&lo.to_le_bytes());
            out.extend_from_slice(&hi.to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let meta = serde_json::to_vec(&self.meta).expect("metadata serializes");
        out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
        out.extend_from_slice(&meta);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FieldError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(6)? != MAGIC {
            return Err(FieldError::Magic);
        }
        if r.u32()? != 1 {
            return Err(FieldError::Dimension);
        }
        let nx = r.u32()? as usize;
        let ny = r.u32()? as usize;
        let mut bounds = [[0.0; 2]; 2];
        for b in bounds.iter_mut() {
            b[0] = r.f64()?;
            b[1] = r.f64()?;
        }
        let count = nx.checked_mul(ny).ok_or(FieldError::Malformed("size"))?;
        if count.checked_mul(8).map_or(true, |c| c > bytes.len()) {
            return Err(FieldError::Malformed("values"));
        }
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            values.push(r.f64()?);
        }
        let len = r.u32()? as usize;
        let meta: FieldMeta = serde_json::from_slice(r.take(len)?)?;
        if r.pos != bytes.len() {
            return Err(FieldError::Malformed("trailing bytes"));
        }
        Self::new(bounds, nx, ny, values, meta)
    }

    /// `x,y,value` rows at 10 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,value\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.node(i, j);
                let _ = writeln!(
                    s,
                    "{:.9e},{:.9e},{:.9e}",
                    p.0[0].re,
                    p.0[0].im,
                    self.at(i, j)
                );
            }
        }
        s
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FieldError> {
        let end = self.pos.checked_add(n).ok_or(FieldError::Malformed("length"))?;
        let s = self.bytes.get(self.pos..end).ok_or(FieldError::Malformed("eof"))?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, FieldError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, FieldError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_field() -> ScalarField {
        ScalarField::from_fn(
            [[-1.0, 1.0], [0.0, 2.0]],
            17,
            21,
            FieldMeta {
                kind: "test".into(),
                ..Default::default()
            },
            |z| z.0[0].re * 2.0 + z.0[0].im,
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let f = sample_field();
        let g = ScalarField::from_bytes(&f.to_bytes()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn truncated_file_rejected() {
        let b = sample_field().to_bytes();
        for cut in [3, 20, b.len() / 2, b.len() - 1] {
            assert!(ScalarField::from_bytes(&b[..cut]).is_err());
        }
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(ScalarField::from_bytes(&bad), Err(FieldError::Magic)));
    }

    #[test]
    fn bilinear_is_exact_on_affine_data() {
        let f = sample_field();
        let v = f.sample(&Point::c1(0.123, 1.777)).unwrap();
        assert!((v - (0.246 + 1.777)).abs() < 1e-12);
        assert!(f.sample(&Point::c1(3.0, 0.0)).is_none());
    }

    #[test]
    fn small_resolution_rejected() {
        assert!(matches!(
            ScalarField::new([[0.0, 1.0]; 2], 8, 8, vec![0.0; 64], FieldMeta::default()),
            Err(FieldError::Resolution(8))
        ));
    }
}
