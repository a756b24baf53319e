//! The Fubini–Study model of `CP^1`: global extremal functions `V_K` computed in
//! the affine chart as `L_{K,phi_FS} - phi_FS`.

use crate::fit::{fit_power_law, HolderFit};
use crate::geometry::{discretize, CompactSet, Domain, GeometryError};
use crate::point::Point;
use crate::potential::{
    relative_extremal, FieldError, FieldMeta, ObstacleSpec, PotentialError, ScalarField,
};
use crate::regularity::{modulus_of, SPHERE_SAMPLES_1D};
use crate::siciak::{ExtremalEstimate, SiciakError, WeightFn};
use crate::theorems::{verify, ClaimId, TheoremError, TheoremVerdict, VerifyInputs};
use serde_json::json;
use thiserror::Error;

/// The affine chart is rasterised on this box.
pub const CHART_BOX: [[f64; 2]; 2] = [[-4.0, 4.0], [-4.0, 4.0]];
pub const CHART_HALF_WIDTH: f64 = 4.0;
/// Nodes per axis of the chart raster (cell 0.05).
pub const CHART_NODES: usize = 161;
/// Resolution of the relative extremal solves in the sandwich check.
pub const SANDWICH_RES: usize = 256;

#[derive(Debug, Error)]
pub enum ProjectiveError {
    #[error(transparent)]
    Siciak(#[from] SiciakError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Theorem(#[from] TheoremError),
    #[error("the projective model is wired for one chart variable only")]
    Dimension,
    #[error("anchor {0} is not in the set")]
    AnchorOutside(Point),
    #[error("radius {0} does not fit in the chart box")]
    RadiusTooLarge(f64),
    #[error("restriction to radius {radius} is degenerate: {source}")]
    Restriction { radius: f64, source: SiciakError },
    #[error("chart weight amplitude must be positive, got {0}")]
    Amplitude(f64),
    #[error("lim inf of the lower weight on the domain boundary is {0}, must be > 0")]
    BoundaryWeight(f64),
    #[error("need at least 4 radii, got {0}")]
    TooFewRadii(usize),
}

/// `phi_FS(z) = log(1 + |z|^2) / 2` on the affine chart of `CP^n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FubiniStudyWeight {
    pub n: usize,
}

impl FubiniStudyWeight {
    pub fn new(n: usize) -> Self {
        FubiniStudyWeight { n }
    }

    pub fn eval(&self, z: &Point) -> f64 {
        let r = z.norm();
        0.5 * (r * r).ln_1p()
    }

    pub fn weight(&self) -> WeightFn {
        WeightFn::fubini_study()
    }
}

/// `rho(x) = A |x - c|^2` on a chart ball.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartWeight {
    pub amplitude: f64,
    pub center: Point,
}

impl ChartWeight {
    pub fn new(amplitude: f64, center: Point) -> Result<Self, ProjectiveError> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(ProjectiveError::Amplitude(amplitude));
        }
        Ok(ChartWeight { amplitude, center })
    }

    pub fn eval(&self, z: &Point) -> f64 {
        let d = z.dist(&self.center);
        self.amplitude * d * d
    }

    pub fn weight(&self) -> WeightFn {
        WeightFn::quadratic(self.amplitude, self.center.clone())
    }

    /// Infimum and supremum over a ball (attained on the boundary for the sup).
    fn range_on(&self, dom: &Domain) -> (f64, f64) {
        let off = self.center.dist(&dom.center);
        let near = (dom.radius - off).max(0.0);
        let far = dom.radius + off;
        (self.amplitude * near * near, self.amplitude * far * far)
    }
}

/// `V^_{K,phi}` evaluated pointwise: `max(L^_{K, phi_FS + phi} - phi_FS, inf_K phi)`.
///
/// The floor is the competitor `phi_FS + inf_K phi`; with `phi = 0` it is 0.
#[derive(Clone, Debug)]
pub struct GlobalExtremal {
    pub estimate: ExtremalEstimate,
    pub floor: f64,
    fs: FubiniStudyWeight,
}

impl GlobalExtremal {
    pub fn build(
        set: &CompactSet,
        weight: Option<&WeightFn>,
        degree: usize,
        spacing: f64,
    ) -> Result<Self, ProjectiveError> {
        if set.dim() != 1 {
            return Err(ProjectiveError::Dimension);
        }
        if set.is_degenerate() {
            return Err(SiciakError::Degenerate.into());
        }
        let cloud = discretize(set, spacing)?;
        let fs = FubiniStudyWeight::new(1);
        let (total, floor) = match weight {
            Some(w) => {
                let floor = cloud
                    .points
                    .iter()
                    .map(|z| w.eval(z))
                    .fold(f64::INFINITY, f64::min);
                (fs.weight().plus(w), floor)
            }
            None => (fs.weight(), 0.0),
        };
        let estimate = ExtremalEstimate::new(&cloud, degree, Some(&total))?;
        Ok(GlobalExtremal {
            estimate,
            floor,
            fs,
        })
    }

    pub fn value(&self, z: &Point) -> f64 {
        (self.estimate.raw(z) - self.fs.eval(z)).max(self.floor)
    }

    /// Value at the point at infinity of the chart.
    pub fn at_infinity(&self) -> Option<f64> {
        self.estimate.raw_at_infinity().map(|v| v.max(self.floor))
    }

    pub fn rasterize(&self, bounds: [[f64; 2]; 2], nodes: usize) -> Result<ScalarField, ProjectiveError> {
        let mut field = ScalarField::from_fn(bounds, nodes, nodes, FieldMeta::default(), |z| self.value(z))?;
        let at_inf = self.at_infinity();
        let sup = at_inf.map_or(field.max(), |v| v.max(field.max()));
        field.meta = FieldMeta {
            kind: "global_extremal".into(),
            info: json!({
                "degree": self.estimate.degree(),
                "floor": self.floor,
                "at_infinity": at_inf,
                "sup": sup,
                "set": self.estimate.source,
            }),
            ..Default::default()
        };
        Ok(field)
    }
}

/// `V^_K = max(L^_{K,phi_FS} - phi_FS, 0)` on the chart box; `info.sup` includes the
/// value at infinity.
pub fn global_extremal(set: &CompactSet, degree: usize, spacing: f64) -> Result<ScalarField, ProjectiveError> {
    GlobalExtremal::build(set, None, degree, spacing)?.rasterize(CHART_BOX, CHART_NODES)
}

/// Recorded sup of a field produced by [`global_extremal`].
pub fn recorded_sup(field: &ScalarField) -> f64 {
    field.meta.info["sup"].as_f64().unwrap_or_else(|| field.max())
}

/// Pointwise exponents of `V^_K` and `V^_{K ∩ B(a,r)}` at `a`.
#[derive(Clone, Debug)]
pub struct LocalityReport {
    pub verdict: TheoremVerdict,
    pub full: HolderFit,
    pub restricted: HolderFit,
    pub deltas: Vec<f64>,
    pub full_values: Vec<f64>,
    pub restricted_values: Vec<f64>,
}

pub fn locality_check(
    set: &CompactSet,
    a: &Point,
    r: f64,
    deltas: &[f64],
    degree: usize,
    spacing: f64,
) -> Result<LocalityReport, ProjectiveError> {
    if a.dim() != 1 {
        return Err(ProjectiveError::Dimension);
    }
    if !set.contains(a) {
        return Err(ProjectiveError::AnchorOutside(a.clone()));
    }
    if !(r > 0.0) || r >= CHART_HALF_WIDTH {
        return Err(ProjectiveError::RadiusTooLarge(r));
    }
    if deltas.len() < 4 {
        return Err(ProjectiveError::TooFewRadii(deltas.len()));
    }
    let mut deltas = deltas.to_vec();
    deltas.sort_by(f64::total_cmp);
    let restricted_set = set.clone().restrict(a.clone(), r);
    let full = GlobalExtremal::build(set, None, degree, spacing)?;
    // The restricted cloud keeps the same number of points per unit radius.
    let part = GlobalExtremal::build(&restricted_set, None, degree, spacing * r.min(1.0)).map_err(|e| match e {
        ProjectiveError::Siciak(source) => ProjectiveError::Restriction { radius: r, source },
        other => other,
    })?;
    let full_values = modulus_of(&|z| full.value(z), a, &deltas, SPHERE_SAMPLES_1D);
    let restricted_values = modulus_of(&|z| part.value(z), a, &deltas, SPHERE_SAMPLES_1D);
    // The largest radius only sets the scale; the fit uses the rest.
    let k = deltas.len() - 1;
    let f1 = fit_power_law(&deltas[..k], &full_values[..k]);
    let f2 = fit_power_law(&deltas[..k], &restricted_values[..k]);
    let inputs = VerifyInputs {
        dim: 1,
        holder_fits: vec![f1.clone(), f2.clone()],
        ..Default::default()
    };
    let verdict = verify(ClaimId::LocalityThm11, &inputs, None)?
        .with_provenance(format!("chart model, anchor {a}, r = {r}"));
    Ok(LocalityReport {
        verdict,
        full: f1,
        restricted: f2,
        deltas,
        full_values,
        restricted_values,
    })
}

/// Legs of the chart sandwich `m u_{K,rho1} <= V_K + rho1` and `V_K + rho2 <= M u_{K,rho2}`.
#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub verdict: TheoremVerdict,
    pub m: f64,
    pub big_m: f64,
    pub lower_slack: f64,
    pub upper_slack: f64,
    pub nodes: usize,
}

pub fn chart_sandwich_check(
    set: &CompactSet,
    rho1: &ChartWeight,
    rho2: &ChartWeight,
    domain: &Domain,
    degree: usize,
    spacing: f64,
    res: usize,
) -> Result<SandwichReport, ProjectiveError> {
    if set.dim() != 1 || domain.center.dim() != 1 {
        return Err(ProjectiveError::Dimension);
    }
    for w in [rho1, rho2] {
        if !(w.amplitude > 0.0 && w.amplitude.is_finite()) {
            return Err(ProjectiveError::Amplitude(w.amplitude));
        }
    }
    let (liminf1, sup1) = rho1.range_on(domain);
    if !(liminf1 > 0.0) {
        return Err(ProjectiveError::BoundaryWeight(liminf1));
    }
    let (_, sup2) = rho2.range_on(domain);
    let solve = |w: &ChartWeight| {
        relative_extremal(&ObstacleSpec {
            domain: domain.clone(),
            set: set.clone(),
            weight: Some(w.weight()),
            res,
        })
    };
    let u1 = solve(rho1)?;
    let u2 = solve(rho2)?;
    let v = GlobalExtremal::build(set, None, degree, spacing)?;
    let mut inside = Vec::new();
    for j in 0..u1.ny {
        for i in 0..u1.nx {
            let z = u1.node(i, j);
            if domain.contains(&z) {
                inside.push((i, j, v.value(&z), z));
            }
        }
    }
    let v_sup = inside.iter().map(|t| t.2).fold(0.0, f64::max);
    let m = liminf1 / (1.0 + sup1);
    let big_m = v_sup + sup2 + 1.0;
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    for (i, j, vz, z) in &inside {
        lower = lower.min(vz + rho1.eval(z) - m * u1.at(*i, *j));
        upper = upper.min(big_m * u2.at(*i, *j) - vz - rho2.eval(z));
    }
    let slack = lower.min(upper);
    let tol = ClaimId::ChartSandwich.default_tolerance();
    let verdict = TheoremVerdict::new(ClaimId::ChartSandwich, 0.0, slack, slack, tol).with_provenance(format!(
        "m = {m:.6}, M = {big_m:.6}, lower leg {lower:.4}, upper leg {upper:.4}, {} nodes",
        inside.len()
    ));
    Ok(SandwichReport {
        verdict,
        m,
        big_m,
        lower_slack: lower,
        upper_slack: upper,
        nodes: inside.len(),
    })
}

#[cfg(test)]
mod tests;
