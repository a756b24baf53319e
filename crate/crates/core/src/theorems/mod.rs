//! Exponent algebra and the harness that turns measured fits and reports
//! into pass/fail verdicts against the predicted quantities.

mod algebra;

pub use algebra::{
    convex_hcp_to_local, holder_density_to_local, parse_rational, rat, regularity_pair, to_f64,
    weak_local_to_global, weak_to_local_direct, weighted_exponent, ConvexTransfer, ExponentBudget,
    GlobalTransfer, LocalTransfer, Rational, RegularityPair, WeightedExponent,
};

use crate::capacity::{CapacityReport, DensityScan};
use crate::fit::{HolderFit, LocalHcpFit};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Default tolerance for exponents and orders.
pub const EXPONENT_TOL: f64 = 0.1;
/// Default relative tolerance for constants.
pub const CONSTANT_TOL: f64 = 0.05;
/// Default slack for inequalities between extremal quantities.
pub const INEQUALITY_TOL: f64 = 0.02;

#[derive(Debug, Error)]
pub enum TheoremError {
    #[error("invalid exponent budget: {0}")]
    Budget(String),
    #[error("epsilon = {0} must lie strictly between 0 and 1")]
    Epsilon(f64),
    #[error("cannot parse rational `{0}`")]
    Parse(String),
    #[error("unknown claim `{0}`")]
    UnknownClaim(String),
    #[error("claim {claim} needs {needed}")]
    MissingInput { claim: ClaimId, needed: &'static str },
    #[error("claim {0} is checked directly by its module, not from stored fits")]
    DirectOnly(ClaimId),
}

/// The closed set of checkable claims.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClaimId {
    /// Convex body with a global Hölder bound has the local property of order 1.
    Thm15Convex,
    /// Local `(mu, C)` bound implies capacity density `(2 pi)^n / (4^mu C)^n`.
    LemCapdensity,
    /// Pointwise exponent at `a` is unchanged by restricting to a ball about `a`.
    LocalityThm11,
    /// `2 pi / Cap(F, B(0,R))^{1/n} <= sup_{B(0,R)} L_F`.
    CapComparison,
    /// Local property `(mu, q)` implies global `2mu/(q+2)`-Hölder continuity.
    Thm12GlobalExponent,
    /// `L_F <= C delta^mu` on the `delta`-neighbourhood of `F`.
    HcpBound,
    /// Chart sandwich between relative and global extremal functions.
    ChartSandwich,
}

impl ClaimId {
    pub const ALL: [ClaimId; 7] = [
        ClaimId::Thm15Convex,
        ClaimId::LemCapdensity,
        ClaimId::LocalityThm11,
        ClaimId::CapComparison,
        ClaimId::Thm12GlobalExponent,
        ClaimId::HcpBound,
        ClaimId::ChartSandwich,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClaimId::Thm15Convex => "THM15_CONVEX",
            ClaimId::LemCapdensity => "LEM_CAPDENSITY",
            ClaimId::LocalityThm11 => "LOCALITY_THM11",
            ClaimId::CapComparison => "CAP_COMPARISON",
            ClaimId::Thm12GlobalExponent => "THM12_GLOBAL_EXPONENT",
            ClaimId::HcpBound => "HCP_BOUND",
            ClaimId::ChartSandwich => "CHART_SANDWICH",
        }
    }

    pub fn default_tolerance(&self) -> f64 {
        match self {
            ClaimId::Thm15Convex | ClaimId::LocalityThm11 | ClaimId::Thm12GlobalExponent => {
                EXPONENT_TOL
            }
            ClaimId::LemCapdensity => CONSTANT_TOL,
            ClaimId::CapComparison | ClaimId::HcpBound => INEQUALITY_TOL,
            ClaimId::ChartSandwich => 0.03,
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClaimId {
    type Err = TheoremError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClaimId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| TheoremError::UnknownClaim(s.to_string()))
    }
}

/// Outcome of one claim: `pass` iff `slack >= -tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremVerdict {
    pub claim: ClaimId,
    pub predicted: f64,
    /// Exact form of the prediction when it comes from the rational algebra.
    pub predicted_exact: Option<String>,
    pub measured: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Some input fit had an rms above the confidence threshold.
    pub low_confidence: bool,
    pub provenance: Vec<String>,
}

impl TheoremVerdict {
    pub fn new(claim: ClaimId, predicted: f64, measured: f64, slack: f64, tolerance: f64) -> Self {
        TheoremVerdict {
            claim,
            predicted,
            predicted_exact: None,
            measured,
            slack,
            tolerance,
            pass: slack >= -tolerance,
            low_confidence: false,
            provenance: Vec::new(),
        }
    }

    pub fn exact(mut self, r: Rational) -> Self {
        self.predicted_exact = Some(r.to_string());
        self
    }

    pub fn with_provenance(mut self, note: impl Into<String>) -> Self {
        self.provenance.push(note.into());
        self
    }

    pub fn low_confidence(mut self, flag: bool) -> Self {
        self.low_confidence |= flag;
        self
    }

    /// One row of the human-readable table.
    pub fn row(&self) -> String {
        format!(
            "{:<22} {:<4} predicted {:>10} measured {:>10.4} slack {:>9.4} tol {:.3}{}",
            self.claim.as_str(),
            if self.pass { "PASS" } else { "FAIL" },
            self.predicted_exact
                .clone()
                .unwrap_or_else(|| format!("{:.4}", self.predicted)),
            self.measured,
            self.slack,
            self.tolerance,
            if self.low_confidence { " (low confidence)" } else { "" }
        )
    }
}

/// Measured artifacts a claim may consume.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct VerifyInputs {
    pub dim: usize,
    pub local_fit: Option<LocalHcpFit>,
    pub holder_fits: Vec<HolderFit>,
    pub density: Option<DensityScan>,
    pub capacity: Option<CapacityReport>,
    /// `sup L^` over the comparison ball.
    pub sup_l: Option<f64>,
}

/// Compares measured inputs against the prediction for `claim`.
pub fn verify(
    claim: ClaimId,
    inputs: &VerifyInputs,
    tol: Option<f64>,
) -> Result<TheoremVerdict, TheoremError> {
    let tol = tol.unwrap_or_else(|| claim.default_tolerance());
    let n = inputs.dim.max(1) as i32;
    let missing = |needed| TheoremError::MissingInput { claim, needed };
    match claim {
        ClaimId::Thm15Convex => {
            let f = inputs.local_fit.as_ref().ok_or(missing("a LocalHcpFit"))?;
            Ok(TheoremVerdict::new(claim, 1.0, f.q, 1.0 - f.q, tol)
                .exact(rat(1, 1))
                .low_confidence(f.low_confidence)
                .with_provenance(format!("local fit mu={:.4} q={:.4} rms={:.3}", f.mu, f.q, f.rms)))
        }
        ClaimId::LemCapdensity => {
            // A local fit carries the constant of the local property; otherwise
            // the first Hölder fit is read as one.
            let (mu, c, low, source) = match (&inputs.local_fit, inputs.holder_fits.first()) {
                (Some(f), _) => (f.mu, f.c, f.low_confidence, "local"),
                (None, Some(h)) => (h.mu, h.c, h.low_confidence, "holder"),
                (None, None) => return Err(missing("a LocalHcpFit or HolderFit (mu, C)")),
            };
            // On delta <= 1 a bound C delta^mu with mu > 1 implies the one with mu = 1.
            let mu = mu.min(1.0);
            let d = inputs.density.as_ref().ok_or(missing("a DensityScan"))?;
            let predicted = crate::capacity::hcp_to_density_bound(mu, c, n as usize)
                .map_err(|_| missing("a fit with mu in (0, 1]"))?;
            let measured = d.kappa.ok_or(missing("a DensityScan with at least one capacity"))?;
            Ok(TheoremVerdict::new(claim, predicted, measured, measured / predicted - 1.0, tol)
                .low_confidence(low)
                .with_provenance(format!("{source} fit mu={mu:.4} C={c:.4}"))
                .with_provenance(format!("density scan at order q={:.4}", d.q)))
        }
        ClaimId::LocalityThm11 => {
            let [a, b] = match inputs.holder_fits.as_slice() {
                [a, b, ..] => [a, b],
                _ => return Err(missing("two HolderFits at the same anchor")),
            };
            let diff = (a.mu - b.mu).abs();
            Ok(TheoremVerdict::new(claim, 0.0, diff, -diff, tol)
                .exact(rat(0, 1))
                .low_confidence(a.low_confidence || b.low_confidence)
                .with_provenance(format!("mu full={:.4} restricted={:.4}", a.mu, b.mu)))
        }
        ClaimId::CapComparison => {
            let cap = inputs.capacity.as_ref().ok_or(missing("a CapacityReport"))?;
            let sup = inputs.sup_l.ok_or(missing("sup of L^ over the ball"))?;
            if !(cap.value > 0.0) {
                return Err(missing("a positive capacity"));
            }
            let lower = 2.0 * PI / cap.value.powf(1.0 / n as f64);
            Ok(TheoremVerdict::new(claim, lower, sup, sup - lower, tol)
                .with_provenance(format!("Cap={:.5} res={}", cap.value, cap.res)))
        }
        ClaimId::Thm12GlobalExponent => {
            let f = inputs.local_fit.as_ref().ok_or(missing("a LocalHcpFit"))?;
            let g = inputs.holder_fits.first().ok_or(missing("a global HolderFit"))?;
            let q = f.q.max(0.0);
            let predicted = 2.0 * f.mu / (q + 2.0);
            Ok(TheoremVerdict::new(claim, predicted, g.mu, g.mu - predicted, tol)
                .low_confidence(f.low_confidence || g.low_confidence)
                .with_provenance(format!("local mu={:.4} q={:.4}; global mu={:.4}", f.mu, f.q, g.mu)))
        }
        ClaimId::HcpBound | ClaimId::ChartSandwich => Err(TheoremError::DirectOnly(claim)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn holder(mu: f64, c: f64) -> HolderFit {
        HolderFit {
            mu,
            c,
            rms: 0.0,
            window: vec![],
            dropped_zeros: 0,
            degenerate: false,
            clamped: false,
            low_confidence: false,
        }
    }

    #[test]
    fn claim_ids_round_trip() {
        for c in ClaimId::ALL {
            assert_eq!(c.as_str().parse::<ClaimId>().unwrap(), c);
            let j = serde_json::to_string(&c).unwrap();
            assert_eq!(j, format!("\"{}\"", c.as_str()));
        }
        assert!(matches!("THM99".parse::<ClaimId>(), Err(TheoremError::UnknownClaim(_))));
    }

    #[test]
    fn missing_inputs_are_named() {
        let e = verify(ClaimId::Thm15Convex, &VerifyInputs::default(), None).unwrap_err();
        assert!(e.to_string().contains("LocalHcpFit"));
        let e = verify(ClaimId::CapComparison, &VerifyInputs::default(), None).unwrap_err();
        assert!(e.to_string().contains("CapacityReport"));
    }

    #[test]
    fn locality_verdict() {
        let inputs = VerifyInputs {
            dim: 1,
            holder_fits: vec![holder(0.98, 1.0), holder(1.03, 2.0)],
            ..Default::default()
        };
        let v = verify(ClaimId::LocalityThm11, &inputs, None).unwrap();
        assert!(v.pass && (v.measured - 0.05).abs() < 1e-12);
        let inputs = VerifyInputs {
            dim: 1,
            holder_fits: vec![holder(0.5, 1.0), holder(1.0, 2.0)],
            ..Default::default()
        };
        assert!(!verify(ClaimId::LocalityThm11, &inputs, None).unwrap().pass);
    }

    #[test]
    fn pass_iff_slack_within_tolerance() {
        let v = TheoremVerdict::new(ClaimId::HcpBound, 0.0, 0.0, -0.02, 0.02);
        assert!(v.pass);
        let v = TheoremVerdict::new(ClaimId::HcpBound, 0.0, 0.0, -0.0201, 0.02);
        assert!(!v.pass);
    }
}
