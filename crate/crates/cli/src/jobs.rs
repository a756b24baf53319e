//! One function per subcommand: compute, then hand back printed text and artifacts.

use crate::config::{ConfigError, Job};
use crate::output::{csv, loglog_svg, num};
use pplab::capacity::{check_cap_l_comparison, condenser_capacity, density_scan, CapacityError};
use pplab::fit::{fit_power_law, fit_surface};
use pplab::geometry::{discretize, to_short, GeometryError, PointCloud};
use pplab::point::Point;
use pplab::potential::{relative_extremal, ObstacleSpec, PotentialError};
use pplab::projective::{
    chart_sandwich_check, locality_check, ChartWeight, GlobalExtremal, ProjectiveError, CHART_BOX,
    CHART_NODES,
};
use pplab::regularity::{
    default_samples, fit_holder, global_modulus, hcp_verdict, local_hcp_scan, modulus_curve,
    ModulusCurve, RegularityError, SurfaceCell,
};
use pplab::siciak::{ExtremalEstimate, SiciakError};
use pplab::theorems::{verify, ClaimId, TheoremError, TheoremVerdict, VerifyInputs};
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JobError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Siciak(#[from] SiciakError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Regularity(#[from] RegularityError),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
    #[error(transparent)]
    Theorem(#[from] TheoremError),
    #[error("input {path}: {msg}")]
    Input { path: String, msg: String },
}

impl JobError {
    /// Configuration problems exit with 2, computation problems with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Config(_) | JobError::Input { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(String, Vec<u8>)>,
    pub verdicts: Vec<TheoremVerdict>,
}

impl Outcome {
    fn file(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    fn json(&mut self, name: &str, value: &impl Serialize) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serializes");
        bytes.push(b'\n');
        self.file(name, bytes);
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }

    pub fn failed(&self) -> bool {
        self.verdicts.iter().any(|v| !v.pass)
    }
}

pub fn execute(job: &Job) -> Result<Outcome, JobError> {
    match job.command.as_str() {
        "envelope" => envelope(job),
        "relative" => relative(job),
        "capacity" => capacity(job),
        "modulus" => modulus(job),
        "fit" => fit(job),
        "density" => density(job),
        "projective" => projective(job),
        "verify" => verify_claim(job),
        other => Err(ConfigError::Command(other.into()).into()),
    }
}

fn cloud(job: &Job) -> Result<PointCloud, JobError> {
    Ok(discretize(job.set()?, job.spacing)?)
}

fn estimate(job: &Job) -> Result<ExtremalEstimate, JobError> {
    let w = job.weight.as_ref().map(|w| w.build());
    Ok(ExtremalEstimate::new(&cloud(job)?, job.degree, w.as_ref())?)
}

fn coords(z: &Point) -> Vec<f64> {
    z.reals()
}

fn point_header(n: usize) -> Vec<String> {
    (1..=n).flat_map(|k| [format!("re{k}"), format!("im{k}")]).collect()
}

fn envelope(job: &Job) -> Result<Outcome, JobError> {
    let est = estimate(job)?;
    let mut out = Outcome::default();
    out.say(format!(
        "set {} degree {} cloud {} points (spacing {}){}",
        to_short(job.set()?),
        job.degree,
        est.cloud.len(),
        job.spacing,
        if est.is_weighted() { ", weighted" } else { "" }
    ));
    let n = job.set()?.dim();
    let mut header = point_header(n);
    header.push("value".into());
    let mut rows = Vec::new();
    for z in &job.eval {
        if z.dim() != n {
            return Err(ConfigError::Parse {
                what: "eval point dimension",
                text: z.to_string(),
            }
            .into());
        }
        let v = est.value(z);
        out.say(format!("L^{z} = {:.6}", v));
        let mut row = coords(z);
        row.push(v);
        rows.push(row);
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    out.file("envelope.csv", csv(&h, rows));
    out.file("leja.csv", est.basis.to_csv());
    out.json(
        "envelope.json",
        &json!({
            "set": to_short(job.set()?),
            "degree": job.degree,
            "spacing": job.spacing,
            "cloud": est.cloud.len(),
            "family": est.family_size(),
            "normalizer": est.normalizer,
        }),
    );
    Ok(out)
}

fn spec(job: &Job) -> Result<ObstacleSpec, JobError> {
    Ok(ObstacleSpec {
        domain: job.domain.clone(),
        set: job.set()?.clone(),
        weight: job.weight.as_ref().map(|w| w.build()),
        res: job.res,
    })
}

fn field_outputs(out: &mut Outcome, stem: &str, field: &pplab::potential::ScalarField, eval: &[Point], label: &str) {
    for z in eval {
        match field.sample(z) {
            Some(v) => out.say(format!("{label}{z} = {v:.6}")),
            None => out.say(format!("{label}{z} outside the grid")),
        }
    }
    out.file(&format!("{stem}.pplab"), field.to_bytes());
    out.file(&format!("{stem}.csv"), field.to_csv());
}

fn relative(job: &Job) -> Result<Outcome, JobError> {
    let field = relative_extremal(&spec(job)?)?;
    let mut out = Outcome::default();
    out.say(format!(
        "relative extremal on {} nodes: {} sweeps, residual {:.3e}, omega {:.6}",
        field.nx * field.ny,
        field.meta.iterations,
        field.meta.residual,
        field.meta.omega
    ));
    field_outputs(&mut out, "relative", &field, &job.eval, "u");
    Ok(out)
}

fn capacity(job: &Job) -> Result<Outcome, JobError> {
    let rep = condenser_capacity(job.set()?, &job.domain, job.res)?;
    let mut out = Outcome::default();
    out.say(format!(
        "Cap = {:.6} (res {}, contour spread {:.2e})",
        rep.value, rep.res, rep.spread
    ));
    out.json("capacity.json", &rep);
    Ok(out)
}

fn curve_outputs(out: &mut Outcome, curve: &ModulusCurve, title: &str) {
    out.file("modulus.csv", curve.to_csv());
    let pts: Vec<(f64, f64)> = curve.deltas.iter().copied().zip(curve.values.iter().copied()).collect();
    out.file("modulus.svg", loglog_svg(title, "delta", "varpi", &[("varpi", pts)]));
}

fn modulus(job: &Job) -> Result<Outcome, JobError> {
    let est = estimate(job)?;
    let curve = match &job.anchor {
        Some(a) => modulus_curve(&est, a, &job.deltas, default_samples(a.dim()))?,
        None => global_modulus(&est, &job.deltas)?,
    };
    let f = fit_holder(&curve)?;
    let mut out = Outcome::default();
    for (d, v) in curve.deltas.iter().zip(&curve.values) {
        out.say(format!("delta {} varpi {}", num(*d), num(*v)));
    }
    out.say(format!(
        "fit mu = {:.4}, C = {:.4}, rms = {:.3}{}",
        f.mu,
        f.c,
        f.rms,
        if f.low_confidence { " (low confidence)" } else { "" }
    ));
    curve_outputs(&mut out, &curve, "modulus of continuity");
    out.json("fit.json", &f);
    Ok(out)
}

fn read_input(path: &str) -> Result<Vec<Vec<f64>>, JobError> {
    let bad = |msg: String| JobError::Input {
        path: path.into(),
        msg,
    };
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (k == 0 && line.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E')) {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|_| bad(format!("line {}: not numeric", k + 1)))?);
    }
    Ok(rows)
}

fn surface_csv(cells: &[SurfaceCell]) -> String {
    csv(&["r", "delta", "varpi"], cells.iter().map(|c| vec![c.r, c.delta, c.varpi]))
}

fn fit(job: &Job) -> Result<Outcome, JobError> {
    let mut out = Outcome::default();
    if let Some(path) = &job.input {
        let rows = read_input(path)?;
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(JobError::Input {
                path: path.clone(),
                msg: "ragged rows".into(),
            });
        }
        match width {
            2 => {
                let (d, v): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r[0], r[1])).unzip();
                let f = fit_power_law(&d, &v);
                out.say(format!("fit mu = {:.4}, C = {:.4}, rms = {:.3}", f.mu, f.c, f.rms));
                out.json("fit.json", &f);
            }
            3 => {
                let cells: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r[0], r[1], r[2])).collect();
                let f = fit_surface(&cells).ok_or(RegularityError::EmptySurface)?;
                out.say(format!("fit mu = {:.4}, q = {:.4}, C = {:.4}, rms = {:.3}", f.mu, f.q, f.c, f.rms));
                out.json("fit.json", &f);
            }
            _ => {
                return Err(JobError::Input {
                    path: path.clone(),
                    msg: "expected columns delta,varpi or r,delta,varpi".into(),
                })
            }
        }
        return Ok(out);
    }
    let (f, cells) = local_hcp_scan(job.set()?, job.anchor()?, &job.radii, &job.deltas, job.degree, job.spacing)?;
    out.say(format!(
        "local fit mu = {:.4}, q = {:.4}, C = {:.4}, rms = {:.3}{}",
        f.mu,
        f.q,
        f.c,
        f.rms,
        if f.low_confidence { " (low confidence)" } else { "" }
    ));
    out.file("surface.csv", surface_csv(&cells));
    let series: Vec<(String, Vec<(f64, f64)>)> = job
        .radii
        .iter()
        .map(|&r| {
            let pts = cells.iter().filter(|c| c.r == r).map(|c| (c.delta, c.varpi)).collect();
            (format!("r = {r}"), pts)
        })
        .collect();
    let refs: Vec<(&str, Vec<(f64, f64)>)> = series.iter().map(|(l, p)| (l.as_str(), p.clone())).collect();
    out.file("surface.svg", loglog_svg("local moduli", "delta", "varpi", &refs));
    out.json("fit.json", &f);
    Ok(out)
}

fn probes(job: &Job) -> Result<Vec<Point>, JobError> {
    if !job.probes.is_empty() {
        return Ok(job.probes.clone());
    }
    Ok(vec![job.anchor()?.clone()])
}

fn density(job: &Job) -> Result<Outcome, JobError> {
    let q = job.q.unwrap_or(1.0);
    let scan = density_scan(job.set()?, &job.domain, &probes(job)?, &job.radii, q, job.res)?;
    let mut out = Outcome::default();
    match scan.kappa {
        Some(k) => out.say(format!("kappa = {k:.6} at order q = {q}")),
        None => out.say("no capacity could be measured"),
    }
    if let Some(qh) = scan.q_hat {
        out.say(format!("largest fitted slope q_hat = {qh:.4}"));
    }
    for f in &scan.failures {
        out.say(format!("failed: {f}"));
    }
    out.file("density.csv", scan.to_csv());
    let series: Vec<(String, Vec<(f64, f64)>)> = scan
        .probes
        .iter()
        .zip(&scan.caps)
        .map(|(b, row)| {
            let pts = scan.radii.iter().zip(row).filter_map(|(r, c)| c.map(|c| (*r, c))).collect();
            (format!("b = {b}"), pts)
        })
        .collect();
    let refs: Vec<(&str, Vec<(f64, f64)>)> = series.iter().map(|(l, p)| (l.as_str(), p.clone())).collect();
    out.file("density.svg", loglog_svg("capacity density", "r", "Cap", &refs));
    out.json("density.json", &scan);
    Ok(out)
}

fn projective(job: &Job) -> Result<Outcome, JobError> {
    let w = job.weight.as_ref().map(|w| w.build());
    let g = GlobalExtremal::build(job.set()?, w.as_ref(), job.degree, job.spacing)?;
    let field = g.rasterize(CHART_BOX, CHART_NODES)?;
    let mut out = Outcome::default();
    out.say(format!(
        "V^ on the chart box: sup {:.6}, value at infinity {}",
        pplab::projective::recorded_sup(&field),
        g.at_infinity().map_or("n/a".into(), |v| format!("{v:.6}"))
    ));
    for z in &job.eval {
        out.say(format!("V^{z} = {:.6}", g.value(z)));
    }
    out.file("projective.pplab", field.to_bytes());
    out.file("projective.csv", field.to_csv());
    Ok(out)
}

fn local_fit(job: &Job) -> Result<pplab::fit::LocalHcpFit, JobError> {
    Ok(local_hcp_scan(job.set()?, job.anchor()?, &job.radii, &job.deltas, job.degree, job.spacing)?.0)
}

fn verdict_for(job: &Job, claim: ClaimId) -> Result<TheoremVerdict, JobError> {
    let set = job.set()?;
    let n = set.dim();
    let v = match claim {
        ClaimId::Thm15Convex => {
            let inputs = VerifyInputs {
                dim: n,
                local_fit: Some(local_fit(job)?),
                ..Default::default()
            };
            verify(claim, &inputs, job.tol)?
        }
        ClaimId::LemCapdensity => {
            let f = local_fit(job)?;
            let q = job.q.unwrap_or(f.q.max(0.0));
            let radii = [0.5, 0.25, 0.125];
            let scan = density_scan(set, &job.domain, &probes(job)?, &radii, q, job.res)?;
            let inputs = VerifyInputs {
                dim: n,
                local_fit: Some(f),
                density: Some(scan),
                ..Default::default()
            };
            verify(claim, &inputs, job.tol)?
        }
        ClaimId::LocalityThm11 => {
            let rep = locality_check(set, job.anchor()?, job.r, &job.deltas, job.degree, job.spacing)?;
            rep.verdict
        }
        ClaimId::CapComparison => {
            let est = estimate(job)?;
            let cap = condenser_capacity(set, &job.domain, job.res)?;
            let r = set.farthest_bound(&Point::origin(n)) + 1e-3;
            check_cap_l_comparison(set, job.domain.radius, r, &est, &cap)?
        }
        ClaimId::Thm12GlobalExponent => {
            let f = local_fit(job)?;
            let global_spacing = crate::config::auto_spacing(set, 2048);
            let est = ExtremalEstimate::new(&discretize(set, global_spacing)?, job.degree, None)?;
            let g = fit_holder(&global_modulus(&est, &pplab::fit::geometric_grid(0.01, 2.0, 5))?)?;
            let inputs = VerifyInputs {
                dim: n,
                local_fit: Some(f),
                holder_fits: vec![g],
                ..Default::default()
            };
            verify(claim, &inputs, job.tol)?
        }
        ClaimId::HcpBound => {
            let est = estimate(job)?;
            let (c, mu) = match (job.c, job.mu) {
                (Some(c), Some(mu)) => (c, mu),
                _ => {
                    let g = fit_holder(&global_modulus(&est, &job.deltas)?)?;
                    (job.c.unwrap_or(g.c), job.mu.unwrap_or(g.mu.min(1.0)))
                }
            };
            hcp_verdict(&est, set, &job.deltas, c, mu)
        }
        ClaimId::ChartSandwich => {
            let o = job.domain.center.clone();
            let rho1 = ChartWeight::new(job.a1, o.clone())?;
            let rho2 = ChartWeight::new(job.a2, o)?;
            chart_sandwich_check(set, &rho1, &rho2, &job.domain, job.degree, job.spacing, job.res)?.verdict
        }
    };
    Ok(v)
}

fn verify_claim(job: &Job) -> Result<Outcome, JobError> {
    let claim = job.claim.ok_or(ConfigError::Missing("verify", "claim"))?;
    let v = verdict_for(job, claim)?;
    let mut out = Outcome::default();
    out.say(v.row());
    for p in &v.provenance {
        out.say(format!("  {p}"));
    }
    out.json("verdict.json", &v);
    out.verdicts.push(v);
    Ok(out)
}

/// The acceptance manifest as text, JSON and CSV; the JSON and CSV hold no timings.
pub fn suite() -> (Outcome, bool) {
    let results = pplab::acceptance::run_all();
    let mut out = Outcome::default();
    for r in &results {
        out.say(r.line());
    }
    let all = results.iter().all(|r| r.pass);
    let _ = write!(
        out.stdout,
        "{} of {} criteria pass\n",
        results.iter().filter(|r| r.pass).count(),
        results.len()
    );
    let payload: Vec<serde_json::Value> = results
        .iter()
        .map(|r| json!({ "id": r.id, "title": r.title, "pass": r.pass, "payload": r.payload }))
        .collect();
    out.json("suite.json", &payload);
    out.file(
        "suite.csv",
        results.iter().fold(String::from("id,pass\n"), |mut s, r| {
            let _ = writeln!(s, "{},{}", r.id, r.pass);
            s
        }),
    );
    (out, all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, JobConfig};

    fn job(text: &str) -> Job {
        resolve(&JobConfig::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn envelope_disk() {
        let j = job("command = \"envelope\"\n[geometry]\nset = \"ball:0,1\"\n[grids]\neval = [\"2,0\"]\n");
        let out = execute(&j).unwrap();
        assert!(out.stdout.contains("L^(2+0i) = 0.693"), "{}", out.stdout);
        assert!(out.files.iter().any(|(n, _)| n == "envelope.csv"));
    }

    #[test]
    fn fit_from_csv() {
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join("c.csv");
        std::fs::write(&p, "delta,varpi\n0.01,0.02\n0.02,0.04\n0.04,0.08\n0.08,0.16\n").unwrap();
        let j = job(&format!("command = \"fit\"\ninput = {:?}\n", p.to_str().unwrap()));
        let out = execute(&j).unwrap();
        assert!(out.stdout.contains("mu = 1.0000"), "{}", out.stdout);
    }

    #[test]
    fn computation_errors_exit_one() {
        let j = job("command = \"relative\"\n[geometry]\nset = \"ball:0,0.999\"\n");
        let e = execute(&j).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
