//! Compact subsets of `C^n`: membership, distances, dilations and point clouds.
//!
//! Sets are described symbolically. Metric queries are exact for the
//! closed-form variants and fall back to a point cloud elsewhere, with the
//! cloud error bound `2 * spacing`.

mod hull;
mod parse;

use crate::point::{rdist, Point};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

pub use parse::{parse_complex, parse_point, parse_short, to_short};

const MEMBERSHIP_TOL: f64 = 1e-12;
/// Cells per bounding-box diagonal used when a distance needs the cloud fallback.
const FALLBACK_CELLS: f64 = 128.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("dilation radius must be positive, got {0}")]
    NonPositiveDilation(f64),
    #[error("spacing {spacing} is not in (0, {extent}]")]
    BadSpacing { spacing: f64, extent: f64 },
    #[error("spacing {0} is too coarse: the cloud is empty")]
    EmptyCloud(f64),
    #[error("point {0} is not in the source set")]
    PointOutsideSet(String),
    #[error("cannot parse set description `{0}`")]
    Parse(String),
}

/// Invertible complex `n x n` matrix, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix(pub Vec<Point>);

impl CMatrix {
    pub fn identity(n: usize) -> Self {
        CMatrix(
            (0..n)
                .map(|r| {
                    Point(
                        (0..n)
                            .map(|c| Complex64::new(if r == c { 1.0 } else { 0.0 }, 0.0))
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn scalar(n: usize, s: Complex64) -> Self {
        let mut m = Self::identity(n);
        for (r, row) in m.0.iter_mut().enumerate() {
            row.0[r] = s;
        }
        m
    }

    fn to_na(&self) -> DMatrix<Complex64> {
        let n = self.0.len();
        DMatrix::from_fn(n, n, |r, c| self.0[r].0[c])
    }

    pub fn apply(&self, z: &Point) -> Point {
        Point(
            self.0
                .iter()
                .map(|row| row.0.iter().zip(&z.0).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn determinant(&self) -> Complex64 {
        self.to_na().determinant()
    }

    pub fn inverse(&self) -> Option<CMatrix> {
        let inv = self.to_na().try_inverse()?;
        let n = self.0.len();
        Some(CMatrix(
            (0..n)
                .map(|r| Point((0..n).map(|c| inv[(r, c)]).collect()))
                .collect(),
        ))
    }

    /// Operator norm on `C^n` (largest singular value).
    pub fn op_norm(&self) -> f64 {
        self.to_na().singular_values().iter().cloned().fold(0.0, f64::max)
    }
}

/// A compact subset of `C^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CompactSet {
    /// Closed Euclidean ball.
    Ball { center: Point, radius: f64 },
    /// Product of real intervals in `R^{2n}`, ordered `(re z_1, im z_1, re z_2, ...)`.
    Box { bounds: Vec<[f64; 2]> },
    Segment { a: Point, b: Point },
    ConvexHull { points: Vec<Point> },
    /// `{ matrix * w + shift : w in base }`.
    AffineImage {
        base: Box<CompactSet>,
        matrix: CMatrix,
        shift: Point,
    },
    Union { parts: Vec<CompactSet> },
    /// `base ∩ closed ball(center, radius)`.
    BallRestriction {
        base: Box<CompactSet>,
        center: Point,
        radius: f64,
    },
    /// `{ z : d(z, base) <= delta }`.
    Neighborhood { base: Box<CompactSet>, delta: f64 },
}

impl CompactSet {
    pub fn ball(center: Point, radius: f64) -> Self {
        CompactSet::Ball { center, radius }
    }

    /// Closed disk in `C`.
    pub fn disk(re: f64, im: f64, radius: f64) -> Self {
        CompactSet::Ball {
            center: Point::c1(re, im),
            radius,
        }
    }

    pub fn segment(a: Point, b: Point) -> Self {
        CompactSet::Segment { a, b }
    }

    pub fn rect(x: [f64; 2], y: [f64; 2]) -> Self {
        CompactSet::Box { bounds: vec![x, y] }
    }

    pub fn union(parts: Vec<CompactSet>) -> Self {
        CompactSet::Union { parts }
    }

    pub fn restrict(self, center: Point, radius: f64) -> Self {
        CompactSet::BallRestriction {
            base: Box::new(self),
            center,
            radius,
        }
    }

    /// Image under `z -> s z + shift` (complex scalar `s`).
    pub fn scaled(self, s: Complex64, shift: Point) -> Self {
        let n = self.dim();
        CompactSet::AffineImage {
            base: Box::new(self),
            matrix: CMatrix::scalar(n, s),
            shift,
        }
    }

    /// Complex dimension `n`.
    pub fn dim(&self) -> usize {
        match self {
            CompactSet::Ball { center, .. } => center.dim(),
            CompactSet::Box { bounds } => bounds.len() / 2,
            CompactSet::Segment { a, .. } => a.dim(),
            CompactSet::ConvexHull { points } => points.first().map_or(0, |p| p.dim()),
            CompactSet::AffineImage { shift, .. } => shift.dim(),
            CompactSet::Union { parts } => parts.first().map_or(0, |p| p.dim()),
            CompactSet::BallRestriction { base, .. } => base.dim(),
            CompactSet::Neighborhood { base, .. } => base.dim(),
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: &str| Err(GeometryError::InvalidSet(m.to_string()));
        let n = self.dim();
        if n == 0 {
            return bad("dimension must be positive");
        }
        match self {
            CompactSet::Ball { center, radius } => {
                if !(center.is_finite() && radius.is_finite() && *radius > 0.0) {
                    return bad("ball radius must be positive and finite");
                }
            }
            CompactSet::Box { bounds } => {
                if bounds.len() % 2 != 0 {
                    return bad("box needs 2n intervals");
                }
                if bounds
                    .iter()
                    .any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo <= hi))
                {
                    return bad("box intervals must satisfy lo <= hi");
                }
            }
            CompactSet::Segment { a, b } => {
                if a.dim() != b.dim() || !a.is_finite() || !b.is_finite() {
                    return bad("segment endpoints must be finite points of equal dimension");
                }
            }
            CompactSet::ConvexHull { points } => {
                if points.is_empty() {
                    return bad("convex hull needs at least one point");
                }
                if points.iter().any(|p| p.dim() != n || !p.is_finite()) {
                    return bad("hull points must be finite and of equal dimension");
                }
            }
            CompactSet::AffineImage {
                base,
                matrix,
                shift,
            } => {
                base.validate()?;
                if matrix.0.len() != n || matrix.0.iter().any(|r| r.dim() != n) || base.dim() != n
                {
                    return bad("affine matrix must be n x n");
                }
                if matrix.determinant().norm() <= 1e-12 {
                    return bad("affine matrix must be invertible (|det| > 1e-12)");
                }
                if !shift.is_finite() {
                    return bad("affine shift must be finite");
                }
            }
            CompactSet::Union { parts } => {
                if parts.is_empty() {
                    return bad("union needs at least one part");
                }
                for p in parts {
                    p.validate()?;
                    if p.dim() != n {
                        return bad("union parts must share a dimension");
                    }
                }
            }
            CompactSet::BallRestriction {
                base,
                center,
                radius,
            } => {
                base.validate()?;
                if center.dim() != n || !(*radius > 0.0 && radius.is_finite()) {
                    return bad("restriction radius must be positive");
                }
            }
            CompactSet::Neighborhood { base, delta } => {
                base.validate()?;
                if !(*delta > 0.0 && delta.is_finite()) {
                    return bad("neighborhood radius must be positive");
                }
            }
        }
        Ok(())
    }

    /// True when the set is representable but too thin for extremal functions
    /// (a single point, or a set contained in a real line of `C^n`, `n >= 2`).
    pub fn is_degenerate(&self) -> bool {
        let [lo, hi] = self.bounding_extent_pair();
        if rdist(&lo, &hi) == 0.0 {
            return true;
        }
        match self {
            CompactSet::Segment { .. } => self.dim() >= 2,
            CompactSet::ConvexHull { points } => {
                points.iter().all(|p| p.dist(&points[0]) == 0.0)
                    || (self.dim() >= 2 && points.len() <= 2)
            }
            CompactSet::Union { parts } => parts.iter().all(|p| p.is_degenerate()),
            CompactSet::AffineImage { base, .. } => base.is_degenerate(),
            _ => false,
        }
    }

    fn bounding_extent_pair(&self) -> [Vec<f64>; 2] {
        let bb = self.bounding_box();
        [
            bb.iter().map(|b| b[0]).collect(),
            bb.iter().map(|b| b[1]).collect(),
        ]
    }

    /// Axis-aligned bounding box in `R^{2n}` (may be loose for affine images).
    pub fn bounding_box(&self) -> Vec<[f64; 2]> {
        match self {
            CompactSet::Ball { center, radius } => center
                .reals()
                .iter()
                .map(|c| [c - radius, c + radius])
                .collect(),
            CompactSet::Box { bounds } => bounds.clone(),
            CompactSet::Segment { a, b } => bbox_of(&[a.reals(), b.reals()]),
            CompactSet::ConvexHull { points } => {
                bbox_of(&points.iter().map(|p| p.reals()).collect::<Vec<_>>())
            }
            CompactSet::AffineImage {
                base,
                matrix,
                shift,
            } => {
                let corners = box_corners(&base.bounding_box());
                let imgs: Vec<Vec<f64>> = corners
                    .iter()
                    .map(|c| matrix.apply(&Point::from_reals(c)).add(shift).reals())
                    .collect();
                bbox_of(&imgs)
            }
            CompactSet::Union { parts } => {
                let mut bb = parts[0].bounding_box();
                for p in &parts[1..] {
                    for (a, b) in bb.iter_mut().zip(p.bounding_box()) {
                        a[0] = a[0].min(b[0]);
                        a[1] = a[1].max(b[1]);
                    }
                }
                bb
            }
            CompactSet::BallRestriction {
                base,
                center,
                radius,
            } => {
                let ball = CompactSet::Ball {
                    center: center.clone(),
                    radius: *radius,
                }
                .bounding_box();
                base.bounding_box()
                    .iter()
                    .zip(ball)
                    .map(|(a, b)| {
                        let lo = a[0].max(b[0]);
                        let hi = a[1].min(b[1]);
                        if lo <= hi {
                            [lo, hi]
                        } else {
                            [lo, lo]
                        }
                    })
                    .collect()
            }
            CompactSet::Neighborhood { base, delta } => base
                .bounding_box()
                .iter()
                .map(|b| [b[0] - delta, b[1] + delta])
                .collect(),
        }
    }

    /// Diagonal of the bounding box; an upper bound for the diameter.
    pub fn extent(&self) -> f64 {
        let [lo, hi] = self.bounding_extent_pair();
        rdist(&lo, &hi)
    }

    /// Upper bound for `sup_{z in set} |z - c|`.
    pub fn farthest_bound(&self, c: &Point) -> f64 {
        match self {
            CompactSet::Ball { center, radius } => center.dist(c) + radius,
            CompactSet::Segment { a, b } => a.dist(c).max(b.dist(c)),
            CompactSet::ConvexHull { points } => {
                points.iter().map(|p| p.dist(c)).fold(0.0, f64::max)
            }
            CompactSet::Union { parts } => {
                parts.iter().map(|p| p.farthest_bound(c)).fold(0.0, f64::max)
            }
            CompactSet::BallRestriction {
                base,
                center,
                radius,
            } => base.farthest_bound(c).min(center.dist(c) + radius),
            CompactSet::Neighborhood { base, delta } => base.farthest_bound(c) + delta,
            _ => {
                let cr = c.reals();
                box_corners(&self.bounding_box())
                    .iter()
                    .map(|k| rdist(k, &cr))
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Exact membership for closed-form variants; preimage membership for affine images.
    pub fn contains(&self, z: &Point) -> bool {
        let tol = MEMBERSHIP_TOL * (1.0 + z.norm());
        match self {
            CompactSet::Ball { center, radius } => z.dist(center) <= radius + tol,
            CompactSet::Box { bounds } => z
                .reals()
                .iter()
                .zip(bounds)
                .all(|(x, [lo, hi])| *x >= lo - tol && *x <= hi + tol),
            CompactSet::AffineImage {
                base,
                matrix,
                shift,
            } => match matrix.inverse() {
                Some(inv) => base.contains(&inv.apply(&z.sub(shift))),
                None => false,
            },
            CompactSet::Union { parts } => parts.iter().any(|p| p.contains(z)),
            CompactSet::BallRestriction {
                base,
                center,
                radius,
            } => z.dist(center) <= radius + tol && base.contains(z),
            CompactSet::Neighborhood { base, delta } => base.distance(z) <= delta + tol,
            CompactSet::Segment { .. } | CompactSet::ConvexHull { .. } => {
                self.distance_exact(z).unwrap_or(f64::INFINITY) <= tol
            }
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            CompactSet::Ball { .. }
            | CompactSet::Box { .. }
            | CompactSet::Segment { .. }
            | CompactSet::ConvexHull { .. } => true,
            CompactSet::AffineImage { base, .. }
            | CompactSet::BallRestriction { base, .. }
            | CompactSet::Neighborhood { base, .. } => base.is_convex(),
            CompactSet::Union { parts } => parts.len() == 1 && parts[0].is_convex(),
        }
    }

    /// Nearest point of the set, where a closed form (or a convergent
    /// projection scheme) is available.
    pub fn nearest(&self, z: &Point) -> Option<Point> {
        match self {
            CompactSet::Ball { center, radius } => {
                let d = z.dist(center);
                if d <= *radius {
                    Some(z.clone())
                } else {
                    Some(center.add(&z.sub(center).scale(radius / d)))
                }
            }
            CompactSet::Box { bounds } => {
                let x: Vec<f64> = z
                    .reals()
                    .iter()
                    .zip(bounds)
                    .map(|(x, [lo, hi])| x.clamp(*lo, *hi))
                    .collect();
                Some(Point::from_reals(&x))
            }
            CompactSet::Segment { a, b } => {
                let ab = b.sub(a);
                let den: f64 = ab.0.iter().map(|c| c.norm_sqr()).sum();
                if den == 0.0 {
                    return Some(a.clone());
                }
                let num: f64 = z
                    .sub(a)
                    .0
                    .iter()
                    .zip(&ab.0)
                    .map(|(p, q)| (p * q.conj()).re)
                    .sum();
                Some(a.lerp(b, (num / den).clamp(0.0, 1.0)))
            }
            CompactSet::ConvexHull { points } => {
                let pts: Vec<Vec<f64>> = points.iter().map(|p| p.reals()).collect();
                Some(Point::from_reals(&hull::nearest_in_hull(&pts, &z.reals())))
            }
            CompactSet::Union { parts } => {
                let mut best: Option<(f64, Point)> = None;
                for p in parts {
                    let q = p.nearest(z)?;
                    let d = q.dist(z);
                    if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                        best = Some((d, q));
                    }
                }
                best.map(|(_, q)| q)
            }
            CompactSet::Neighborhood { base, delta } => {
                let q = base.nearest(z)?;
                let d = q.dist(z);
                if d <= *delta {
                    Some(z.clone())
                } else {
                    Some(q.add(&z.sub(&q).scale(delta / d)))
                }
            }
            CompactSet::BallRestriction {
                base,
                center,
                radius,
            } if base.is_convex() => {
                let ball = CompactSet::Ball {
                    center: center.clone(),
                    radius: *radius,
                };
                dykstra(base, &ball, z)
            }
            _ => None,
        }
    }

    /// Exact Euclidean distance when the variant admits it.
    pub fn distance_exact(&self, z: &Point) -> Option<f64> {
        match self {
            CompactSet::Ball { center, radius } => Some((z.dist(center) - radius).max(0.0)),
            CompactSet::Union { parts } => {
                let mut m = f64::INFINITY;
                for p in parts {
                    m = m.min(p.distance_exact(z)?);
                }
                Some(m)
            }
            CompactSet::Neighborhood { base, delta } => {
                Some((base.distance_exact(z)? - delta).max(0.0))
            }
            CompactSet::AffineImage { .. } => None,
            _ => self.nearest(z).map(|q| q.dist(z)),
        }
    }

    /// Euclidean distance to the set; exact for closed-form variants, otherwise
    /// within `2 * extent / 128` through a point-cloud fallback.
    pub fn distance(&self, z: &Point) -> f64 {
        if let Some(d) = self.distance_exact(z) {
            return d;
        }
        if self.contains(z) {
            return 0.0;
        }
        let spacing = (self.extent() / FALLBACK_CELLS).max(1e-9);
        match discretize(self, spacing) {
            Ok(cloud) => cloud
                .points
                .iter()
                .map(|p| p.dist(z))
                .fold(f64::INFINITY, f64::min),
            Err(_) => f64::INFINITY,
        }
    }

    /// The closed `delta`-neighbourhood of the set.
    pub fn dilate(&self, delta: f64) -> Result<CompactSet, GeometryError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(GeometryError::NonPositiveDilation(delta));
        }
        Ok(match self {
            CompactSet::Ball { center, radius } => CompactSet::Ball {
                center: center.clone(),
                radius: radius + delta,
            },
            CompactSet::Neighborhood { base, delta: d0 } => CompactSet::Neighborhood {
                base: base.clone(),
                delta: d0 + delta,
            },
            other => CompactSet::Neighborhood {
                base: Box::new(other.clone()),
                delta,
            },
        })
    }
}

/// The open ball `B(center, radius)` hosting relative notions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub center: Point,
    pub radius: f64,
}

impl Domain {
    pub fn new(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidSet(format!(
                "domain radius must be positive, got {radius}"
            )));
        }
        Ok(Domain { center, radius })
    }

    pub fn disk(re: f64, im: f64, radius: f64) -> Self {
        Domain {
            center: Point::c1(re, im),
            radius,
        }
    }

    pub fn contains(&self, z: &Point) -> bool {
        z.dist(&self.center) < self.radius
    }

    /// `R - sup_{z in set} |z - c|`, a lower bound for the gap between set and boundary.
    pub fn clearance(&self, set: &CompactSet) -> f64 {
        self.radius - set.farthest_bound(&self.center)
    }
}

/// Finite sample of a compact set.
#[derive(Clone, Debug)]
pub struct PointCloud {
    pub points: Vec<Point>,
    pub source: CompactSet,
    pub spacing: f64,
}

impl PointCloud {
    /// Wraps explicit points, checking that each lies in `source`.
    pub fn from_points(
        source: CompactSet,
        points: Vec<Point>,
        spacing: f64,
    ) -> Result<Self, GeometryError> {
        if let Some(p) = points.iter().find(|p| !source.contains(p)) {
            return Err(GeometryError::PointOutsideSet(p.to_string()));
        }
        if points.is_empty() {
            return Err(GeometryError::EmptyCloud(spacing));
        }
        Ok(PointCloud {
            points,
            source,
            spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }
}

/// Deterministic discretisation: an origin-anchored lattice of the given
/// spacing intersected with the set, plus boundary points projected from
/// outside lattice neighbours.
pub fn discretize(set: &CompactSet, spacing: f64) -> Result<PointCloud, GeometryError> {
    set.validate()?;
    let extent = set.extent();
    if !(spacing > 0.0 && spacing.is_finite()) || (extent > 0.0 && spacing > extent) {
        return Err(GeometryError::BadSpacing { spacing, extent });
    }
    let points = match set {
        CompactSet::Segment { a, b } => {
            let m = (a.dist(b) / spacing).ceil().max(1.0) as usize;
            let m = if a.dist(b) == 0.0 { 0 } else { m };
            (0..=m)
                .map(|k| a.lerp(b, if m == 0 { 0.0 } else { k as f64 / m as f64 }))
                .collect()
        }
        CompactSet::AffineImage {
            base,
            matrix,
            shift,
        } => {
            let s = spacing / matrix.op_norm().max(1e-300);
            let inner = discretize(base, s.min(base.extent().max(s)))?;
            inner
                .points
                .iter()
                .map(|w| matrix.apply(w).add(shift))
                .filter(|p| set.contains(p))
                .collect()
        }
        CompactSet::Union { parts } => {
            let mut seen = Dedup::new(spacing);
            let mut out = Vec::new();
            for p in parts {
                let sp = spacing.min(p.extent().max(spacing * 1e-3));
                if let Ok(c) = discretize(p, sp) {
                    for q in c.points {
                        if seen.insert(&q) {
                            out.push(q);
                        }
                    }
                }
            }
            out
        }
        _ => lattice_points(set, spacing),
    };
    if points.is_empty() {
        return Err(GeometryError::EmptyCloud(spacing));
    }
    Ok(PointCloud {
        points,
        source: set.clone(),
        spacing,
    })
}

/// Lattice spacing that yields roughly `count` interior points for a set of
/// the given real `2n`-volume.
pub fn spacing_for_count(volume: f64, dim_real: usize, count: usize) -> f64 {
    (volume / count as f64).powf(1.0 / dim_real as f64)
}

fn lattice_points(set: &CompactSet, spacing: f64) -> Vec<Point> {
    let bb = set.bounding_box();
    let dr = bb.len();
    let lo: Vec<i64> = bb.iter().map(|b| (b[0] / spacing).floor() as i64 - 1).collect();
    let hi: Vec<i64> = bb.iter().map(|b| (b[1] / spacing).ceil() as i64 + 1).collect();
    let shape: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
    let total: usize = shape.iter().product();

    let coords = |mut flat: usize| -> Vec<f64> {
        let mut x = vec![0.0; dr];
        for ax in (0..dr).rev() {
            let k = flat % shape[ax];
            flat /= shape[ax];
            x[ax] = (lo[ax] + k as i64) as f64 * spacing;
        }
        x
    };

    let inside: Vec<bool> = (0..total)
        .map(|f| set.contains(&Point::from_reals(&coords(f))))
        .collect();

    let mut seen = Dedup::new(spacing);
    let mut out = Vec::new();
    for f in 0..total {
        if inside[f] {
            let p = Point::from_reals(&coords(f));
            seen.insert(&p);
            out.push(p);
        }
    }

    let strides: Vec<usize> = (0..dr)
        .map(|ax| shape[ax + 1..].iter().product())
        .collect();
    let unflatten = |mut flat: usize| -> Vec<usize> {
        let mut k = vec![0usize; dr];
        for ax in (0..dr).rev() {
            k[ax] = flat % shape[ax];
            flat /= shape[ax];
        }
        k
    };
    let neighbour_offsets: Vec<Vec<i64>> = {
        let mut offs = vec![vec![]];
        for _ in 0..dr {
            offs = offs
                .into_iter()
                .flat_map(|o: Vec<i64>| {
                    [-1i64, 0, 1].into_iter().map(move |d| {
                        let mut v = o.clone();
                        v.push(d);
                        v
                    })
                })
                .collect();
        }
        offs.retain(|o| o.iter().any(|&d| d != 0));
        offs
    };
    let any_inside = out.len();
    for f in 0..total {
        if inside[f] {
            continue;
        }
        let k = unflatten(f);
        let z = Point::from_reals(&coords(f));
        let adjacent = if any_inside > 0 {
            neighbour_offsets.iter().any(|o| {
                let mut g = 0usize;
                for ax in 0..dr {
                    let v = k[ax] as i64 + o[ax];
                    if v < 0 || v >= shape[ax] as i64 {
                        return false;
                    }
                    g += v as usize * strides[ax];
                }
                inside[g]
            })
        } else {
            // Thin set: keep lattice points within one spacing of it.
            set.distance_exact(&z).map_or(false, |d| d <= spacing)
        };
        if !adjacent {
            continue;
        }
        if let Some(q) = set.nearest(&z) {
            if set.contains(&q) && seen.insert(&q) {
                out.push(q);
            }
        }
    }
    out
}

struct Dedup {
    quantum: f64,
    keys: HashSet<Vec<i64>>,
}

impl Dedup {
    fn new(spacing: f64) -> Self {
        Dedup {
            quantum: spacing * 1e-6,
            keys: HashSet::new(),
        }
    }

    fn insert(&mut self, p: &Point) -> bool {
        let key = p
            .reals()
            .iter()
            .map(|x| (x / self.quantum).round() as i64)
            .collect();
        self.keys.insert(key)
    }
}

fn bbox_of(pts: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let dr = pts[0].len();
    (0..dr)
        .map(|ax| {
            let lo = pts.iter().map(|p| p[ax]).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p[ax]).fold(f64::NEG_INFINITY, f64::max);
            [lo, hi]
        })
        .collect()
}

fn box_corners(bb: &[[f64; 2]]) -> Vec<Vec<f64>> {
    let dr = bb.len();
    (0..(1usize << dr))
        .map(|mask| {
            (0..dr)
                .map(|ax| bb[ax][(mask >> ax) & 1])
                .collect()
        })
        .collect()
}

/// Projection onto `a ∩ b` for convex `a`, `b` by Dykstra's alternating scheme.
fn dykstra(a: &CompactSet, b: &CompactSet, z: &Point) -> Option<Point> {
    let mut x = z.clone();
    let n = z.dim();
    let mut p = Point::origin(n);
    let mut q = Point::origin(n);
    for _ in 0..2000 {
        let y = a.nearest(&x.add(&p))?;
        p = x.add(&p).sub(&y);
        let x_new = b.nearest(&y.add(&q))?;
        q = y.add(&q).sub(&x_new);
        let step = x_new.dist(&x);
        x = x_new;
        if step < 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    // Final feasibility polish: the ball projection keeps `b`; pull into `a` if needed.
    if !a.contains(&x) {
        let y = a.nearest(&x)?;
        if b.contains(&y) {
            x = y;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_disk() -> CompactSet {
        CompactSet::disk(0.0, 0.0, 1.0)
    }

    #[test]
    fn membership_examples() {
        assert!(unit_disk().contains(&Point::c1(0.5, 0.0)));
        assert!(!unit_disk().contains(&Point::c1(2.0, 0.0)));
        let lens = unit_disk().restrict(Point::c1(1.0, 0.0), 0.5);
        assert!(lens.contains(&Point::c1(0.8, 0.0)));
        assert!(!lens.contains(&Point::c1(0.3, 0.0)));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(unit_disk().distance(&Point::c1(2.0, 0.0)), 1.0);
        assert_eq!(unit_disk().distance(&Point::c1(0.0, 0.0)), 0.0);
        let seg = CompactSet::segment(Point::c1(-1.0, 0.0), Point::c1(1.0, 0.0));
        assert!((seg.distance(&Point::c1(2.0, 0.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dilate_examples() {
        assert_eq!(
            unit_disk().dilate(0.5).unwrap(),
            CompactSet::disk(0.0, 0.0, 1.5)
        );
        let seg = CompactSet::segment(Point::c1(-1.0, 0.0), Point::c1(1.0, 0.0));
        let stadium = seg.dilate(0.1).unwrap();
        assert!(stadium.contains(&Point::c1(1.05, 0.0)));
        assert!(!stadium.contains(&Point::c1(1.15, 0.0)));
        let sq = CompactSet::rect([0.0, 1.0], [0.0, 1.0]);
        assert_eq!(sq.dilate(0.0), Err(GeometryError::NonPositiveDilation(0.0)));
    }

    #[test]
    fn discretize_disk_matches_lattice_scan() {
        let cloud = discretize(&unit_disk(), 0.1).unwrap();
        assert!(cloud.points.iter().all(|p| p.norm() <= 1.0 + 1e-12));
        // Brute-force lattice scan for the interior part.
        let mut lattice = 0;
        for i in -11..=11 {
            for j in -11..=11 {
                let (x, y) = (i as f64 * 0.1, j as f64 * 0.1);
                if (x * x + y * y).sqrt() <= 1.0 + 1e-12 {
                    lattice += 1;
                }
            }
        }
        let on_lattice = cloud
            .points
            .iter()
            .filter(|p| {
                p.reals()
                    .iter()
                    .all(|x| ((x / 0.1).round() * 0.1 - x).abs() < 1e-12)
            })
            .count();
        assert!(on_lattice >= lattice);
        assert!((300..=460).contains(&cloud.len()), "{}", cloud.len());
        // Area / spacing^2 is about 314.
        assert!((lattice as f64 - std::f64::consts::PI / 0.01).abs() < 10.0);
    }

    #[test]
    fn discretize_segment_is_one_dimensional_lattice() {
        let seg = CompactSet::segment(Point::c1(-1.0, 0.0), Point::c1(1.0, 0.0));
        assert_eq!(discretize(&seg, 0.01).unwrap().len(), 201);
    }

    #[test]
    fn discretize_triangle() {
        let tri = CompactSet::ConvexHull {
            points: vec![Point::c1(0.0, 0.0), Point::c1(1.0, 0.0), Point::c1(0.0, 1.0)],
        };
        let cloud = discretize(&tri, tri.extent() / 4.0).unwrap();
        assert!(!cloud.is_empty());
        assert!(cloud.points.iter().all(|p| tri.contains(p)));
    }

    #[test]
    fn cloud_hausdorff_bound() {
        let sets = [
            unit_disk(),
            CompactSet::rect([0.0, 1.0], [0.0, 0.5]),
            unit_disk().restrict(Point::c1(1.0, 0.0), 0.5),
        ];
        for set in sets {
            let s = 0.05;
            let cloud = discretize(&set, s).unwrap();
            let fine = discretize(&set, s / 4.0).unwrap();
            for q in &fine.points {
                let d = cloud.points.iter().map(|p| p.dist(q)).fold(f64::INFINITY, f64::min);
                assert!(d <= 2.0 * s, "{set:?} {d}");
            }
        }
    }

    #[test]
    fn too_coarse_spacing_rejected() {
        assert!(matches!(
            discretize(&unit_disk(), 10.0),
            Err(GeometryError::BadSpacing { .. })
        ));
    }

    #[test]
    fn affine_invertibility_checked() {
        let bad = CompactSet::AffineImage {
            base: Box::new(unit_disk()),
            matrix: CMatrix::scalar(1, Complex64::new(1e-13, 0.0)),
            shift: Point::c1(0.0, 0.0),
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn degenerate_flags() {
        let pt = CompactSet::ConvexHull {
            points: vec![Point::c1(0.3, 0.1)],
        };
        assert!(pt.is_degenerate());
        assert!(!unit_disk().is_degenerate());
        let line2 = CompactSet::segment(
            Point::c2(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            Point::c2(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        );
        assert!(line2.is_degenerate());
    }

    #[test]
    fn ball_restriction_distance_is_exact_for_convex_base() {
        let lens = unit_disk().restrict(Point::c1(1.0, 0.0), 0.5);
        let d = lens.distance(&Point::c1(2.0, 0.0));
        assert!((d - 1.0).abs() < 1e-9);
    }

    fn sample_sets() -> Vec<CompactSet> {
        vec![
            unit_disk(),
            CompactSet::segment(Point::c1(-1.0, 0.0), Point::c1(1.0, 0.5)),
            CompactSet::rect([0.0, 1.0], [0.0, 1.0]),
            CompactSet::ConvexHull {
                points: vec![Point::c1(0.0, 0.0), Point::c1(1.0, 0.2), Point::c1(0.3, 1.0)],
            },
            CompactSet::union(vec![
                CompactSet::disk(-1.0, 0.0, 0.3),
                CompactSet::disk(1.0, 0.0, 0.3),
            ]),
        ]
    }

    proptest! {
        #[test]
        fn dilation_membership_matches_distance(x in -3.0f64..3.0, y in -3.0f64..3.0, d in 0.01f64..1.0) {
            let z = Point::c1(x, y);
            for s in sample_sets() {
                let dist = s.distance(&z);
                // Skip the measure-zero shell where rounding decides.
                prop_assume!((dist - d).abs() > 1e-9);
                prop_assert_eq!(s.dilate(d).unwrap().contains(&z), dist <= d + 1e-12);
            }
        }

        #[test]
        fn distance_is_one_lipschitz(x in -3.0f64..3.0, y in -3.0f64..3.0, u in -3.0f64..3.0, v in -3.0f64..3.0) {
            let (z, w) = (Point::c1(x, y), Point::c1(u, v));
            for s in sample_sets() {
                prop_assert!((s.distance(&z) - s.distance(&w)).abs() <= z.dist(&w) + 1e-12);
            }
        }

        #[test]
        fn restriction_is_contained_in_both(x in -1.5f64..1.5, y in -1.5f64..1.5) {
            let z = Point::c1(x, y);
            let base = CompactSet::rect([-1.0, 1.0], [-0.5, 0.5]);
            let r = base.clone().restrict(Point::c1(0.5, 0.0), 0.7);
            if r.contains(&z) {
                prop_assert!(base.contains(&z));
                prop_assert!(z.dist(&Point::c1(0.5, 0.0)) <= 0.7 + 1e-12);
            }
        }

        #[test]
        fn identity_affine_image_is_noop(x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let z = Point::c1(x, y);
            for s in sample_sets() {
                let img = CompactSet::AffineImage {
                    base: Box::new(s.clone()),
                    matrix: CMatrix::identity(1),
                    shift: Point::c1(0.0, 0.0),
                };
                prop_assert_eq!(img.contains(&z), s.contains(&z));
            }
        }
    }
}
