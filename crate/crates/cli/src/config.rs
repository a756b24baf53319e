//! Job configuration: a TOML document with typed sections, merged with command-line flags
//! and resolved into a fully defaulted, validated [`Job`].

use pplab::fit::geometric_grid;
use pplab::geometry::{discretize, parse_short, to_short, CompactSet, Domain};
use pplab::point::Point;
use pplab::siciak::WeightFn;
use pplab::theorems::ClaimId;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("unknown command `{0}`")]
    Command(String),
    #[error("`{0}` needs --{1}")]
    Missing(&'static str, &'static str),
    #[error("bad {what}: `{text}`")]
    Parse { what: &'static str, text: String },
    #[error("{name} = {value} is outside {range}")]
    Range { name: &'static str, value: String, range: &'static str },
}

pub const COMMANDS: [&str; 9] = [
    "envelope", "relative", "capacity", "modulus", "fit", "density", "projective", "verify", "suite",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub res: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eval: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<String>,
}

/// The on-disk job description.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub geometry: GeometrySection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub numeric: NumericSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub grids: GridSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputSection,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.into(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Values of `other` replace ours wherever they are set.
    pub fn overlay(mut self, other: JobConfig) -> JobConfig {
        macro_rules! take {
            ($($sec:ident . $f:ident),*) => {$(
                if other.$sec.$f.is_some() { self.$sec.$f = other.$sec.$f; }
            )*};
        }
        macro_rules! take_vec {
            ($($sec:ident . $f:ident),*) => {$(
                if !other.$sec.$f.is_empty() { self.$sec.$f = other.$sec.$f; }
            )*};
        }
        if !other.command.is_empty() {
            self.command = other.command;
        }
        if other.claim.is_some() {
            self.claim = other.claim;
        }
        if other.input.is_some() {
            self.input = other.input;
        }
        take!(geometry.set, geometry.domain, geometry.anchor);
        take!(numeric.degree, numeric.spacing, numeric.res, numeric.weight, numeric.q, numeric.r);
        take!(numeric.mu, numeric.c, numeric.a1, numeric.a2, numeric.tol, output.dir, output.cache);
        take_vec!(geometry.probes, grids.deltas, grids.radii, grids.eval);
        self
    }
}

/// A weight given as `none`, `fs`, `const:c` or `quad:A[,center]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum WeightSpec {
    FubiniStudy,
    Constant(f64),
    Quadratic { amplitude: f64, center: [f64; 2] },
}

impl WeightSpec {
    pub fn parse(text: &str) -> Result<Option<Self>, ConfigError> {
        let bad = || ConfigError::Parse {
            what: "weight",
            text: text.into(),
        };
        let t = text.trim();
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        Ok(match t.split_once(':') {
            None if t == "none" || t.is_empty() => None,
            None if t == "fs" => Some(WeightSpec::FubiniStudy),
            Some(("const", c)) => Some(WeightSpec::Constant(num(c)?)),
            Some(("quad", body)) => {
                let (a, center) = match body.split_once(',') {
                    Some((a, rest)) => (num(a)?, point2(rest).ok_or_else(bad)?),
                    None => (num(body)?, [0.0, 0.0]),
                };
                if !(a > 0.0) {
                    return Err(bad());
                }
                Some(WeightSpec::Quadratic { amplitude: a, center })
            }
            _ => return Err(bad()),
        })
    }

    pub fn build(&self) -> WeightFn {
        match self {
            WeightSpec::FubiniStudy => WeightFn::fubini_study(),
            WeightSpec::Constant(c) => WeightFn::constant(*c),
            WeightSpec::Quadratic { amplitude, center } => {
                WeightFn::quadratic(*amplitude, Point::c1(center[0], center[1]))
            }
        }
    }
}

fn point2(text: &str) -> Option<[f64; 2]> {
    let (a, b) = text.split_once(',')?;
    Some([a.trim().parse().ok()?, b.trim().parse().ok()?])
}

/// `x,y` is the point `x + iy` of `C`; anything else is read as `;`-separated complex coordinates.
pub fn parse_cli_point(text: &str) -> Result<Point, ConfigError> {
    let bad = || ConfigError::Parse {
        what: "point",
        text: text.into(),
    };
    if text.contains(',') {
        let coords: Option<Vec<[f64; 2]>> = text.split(';').map(point2).collect();
        let coords = coords.ok_or_else(bad)?;
        let reals: Vec<f64> = coords.iter().flat_map(|c| [c[0], c[1]]).collect();
        return Ok(Point::from_reals(&reals));
    }
    pplab::geometry::parse_point(text).ok_or_else(bad)
}

fn parse_set(text: &str) -> Result<CompactSet, ConfigError> {
    parse_short(text).map_err(|_| ConfigError::Parse {
        what: "set",
        text: text.into(),
    })
}

fn parse_domain(text: &str) -> Result<Domain, ConfigError> {
    let bad = || ConfigError::Parse {
        what: "domain",
        text: text.into(),
    };
    match parse_set(text).map_err(|_| bad())? {
        CompactSet::Ball { center, radius } => Domain::new(center, radius).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn check<T: PartialOrd + ToString>(name: &'static str, v: T, lo: T, hi: T, range: &'static str) -> Result<T, ConfigError> {
    if v >= lo && v <= hi {
        Ok(v)
    } else {
        Err(ConfigError::Range {
            name,
            value: v.to_string(),
            range,
        })
    }
}

fn check_open(name: &'static str, v: f64, hi: f64, range: &'static str) -> Result<f64, ConfigError> {
    if v > 0.0 && v <= hi {
        Ok(v)
    } else {
        Err(ConfigError::Range {
            name,
            value: v.to_string(),
            range,
        })
    }
}

/// Lattice spacing giving about `count` cloud points (point counts scale as a power of
/// the spacing; two trial discretizations calibrate it).
pub fn auto_spacing(set: &CompactSet, count: usize) -> f64 {
    let s0 = (set.extent() / 40.0).max(1e-6);
    let n0 = discretize(set, s0).map_or(0, |c| c.len());
    let s1 = s0 / 2.0;
    let n1 = discretize(set, s1).map_or(0, |c| c.len());
    if n0 < 2 || n1 <= n0 {
        return s1;
    }
    let k = (n1 as f64 / n0 as f64).log2();
    // Rounded to keep the value readable in configs and stable in hashes.
    let s = s0 * (n0 as f64 / count as f64).powf(1.0 / k);
    let scale = 10f64.powf(s.log10().floor() - 2.0);
    (s / scale).round() * scale
}

/// A fully resolved job: every default is explicit, so its digest identifies the computation.
#[derive(Clone, Debug, Serialize)]
pub struct Job {
    pub command: String,
    pub claim: Option<ClaimId>,
    pub input: Option<String>,
    #[serde(serialize_with = "ser_set")]
    pub set: Option<CompactSet>,
    pub domain: Domain,
    pub anchor: Option<Point>,
    pub probes: Vec<Point>,
    pub degree: usize,
    pub spacing: f64,
    pub res: usize,
    pub weight: Option<WeightSpec>,
    pub q: Option<f64>,
    pub r: f64,
    pub mu: Option<f64>,
    pub c: Option<f64>,
    pub a1: f64,
    pub a2: f64,
    pub tol: Option<f64>,
    pub deltas: Vec<f64>,
    pub radii: Vec<f64>,
    pub eval: Vec<Point>,
    /// Bytes of the input file, so an edited input misses the cache.
    pub input_digest: Option<String>,
}

fn ser_set<S: serde::Serializer>(set: &Option<CompactSet>, s: S) -> Result<S::Ok, S::Error> {
    match set {
        Some(k) => s.serialize_some(&to_short(k)),
        None => s.serialize_none(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Job {
    /// Stable digest of the computation (output locations excluded).
    pub fn digest(&self) -> String {
        let mut bytes = format!("pplab {}\n", env!("CARGO_PKG_VERSION")).into_bytes();
        bytes.extend(serde_json::to_vec(self).expect("job serializes"));
        sha256_hex(&bytes)
    }

    pub fn set(&self) -> Result<&CompactSet, ConfigError> {
        self.set.as_ref().ok_or(ConfigError::Missing(cmd_name(&self.command), "set"))
    }

    pub fn anchor(&self) -> Result<&Point, ConfigError> {
        self.anchor.as_ref().ok_or(ConfigError::Missing(cmd_name(&self.command), "anchor"))
    }
}

fn cmd_name(c: &str) -> &'static str {
    COMMANDS.iter().find(|k| **k == c).copied().unwrap_or("job")
}

pub fn resolve(cfg: &JobConfig) -> Result<Job, ConfigError> {
    let command = cfg.command.trim().to_string();
    if !COMMANDS.contains(&command.as_str()) {
        return Err(ConfigError::Command(command));
    }
    let set = cfg.geometry.set.as_deref().map(parse_set).transpose()?;
    let default_domain = if command == "verify" && cfg.claim.as_deref().is_some_and(|c| c.eq_ignore_ascii_case("CHART_SANDWICH")) {
        "ball:0,0.9"
    } else {
        "ball:0,1"
    };
    let domain = parse_domain(cfg.geometry.domain.as_deref().unwrap_or(default_domain))?;
    let anchor = cfg.geometry.anchor.as_deref().map(parse_cli_point).transpose()?;
    let probes = cfg
        .geometry
        .probes
        .iter()
        .map(|p| parse_cli_point(p))
        .collect::<Result<Vec<_>, _>>()?;
    let claim = cfg
        .claim
        .as_deref()
        .map(|c| {
            c.parse::<ClaimId>().map_err(|_| ConfigError::Parse {
                what: "claim",
                text: c.into(),
            })
        })
        .transpose()?;
    if command == "verify" && claim.is_none() {
        return Err(ConfigError::Missing("verify", "claim"));
    }
    let degree = check("degree", cfg.numeric.degree.unwrap_or(64), 1, 256, "[1, 256]")?;
    // The local scan reads `spacing` relative to each radius.
    let local = command == "fit" || matches!(claim, Some(ClaimId::Thm15Convex | ClaimId::LemCapdensity | ClaimId::Thm12GlobalExponent));
    let spacing = match (cfg.numeric.spacing, &set) {
        (Some(s), _) => check_open("spacing", s, 1.0, "(0, 1]")?,
        (None, _) if local => 0.03,
        (None, Some(k)) => auto_spacing(k, 2048),
        (None, None) => 0.05,
    };
    let res = check("res", cfg.numeric.res.unwrap_or(256), 16, 4096, "[16, 4096]")?;
    let weight = cfg.numeric.weight.as_deref().map(WeightSpec::parse).transpose()?.flatten();
    let q = cfg.numeric.q.map(|q| check("q", q, 0.0, 10.0, "[0, 10]")).transpose()?;
    let r = check_open("r", cfg.numeric.r.unwrap_or(0.5), 4.0, "(0, 4]")?;
    let mu = cfg.numeric.mu.map(|m| check_open("mu", m, 1.0, "(0, 1]")).transpose()?;
    let c = cfg.numeric.c.map(|c| check_open("c", c, 1e6, "(0, 1e6]")).transpose()?;
    let a1 = check_open("a1", cfg.numeric.a1.unwrap_or(0.2), 1e3, "(0, 1e3]")?;
    let a2 = check_open("a2", cfg.numeric.a2.unwrap_or(2.0), 1e3, "(0, 1e3]")?;
    let tol = cfg.numeric.tol.map(|t| check_open("tol", t, 1.0, "(0, 1]")).transpose()?;
    let deltas = if cfg.grids.deltas.is_empty() {
        if local {
            geometric_grid(0.01, 2.0, 4)
        } else {
            geometric_grid(0.01, 2.0, 5)
        }
    } else {
        cfg.grids.deltas.clone()
    };
    for d in &deltas {
        check_open("delta", *d, 4.0, "(0, 4]")?;
    }
    let radii = if cfg.grids.radii.is_empty() {
        if local {
            vec![1.0, 0.5, 0.25]
        } else {
            vec![0.5, 0.25, 0.125]
        }
    } else {
        cfg.grids.radii.clone()
    };
    for r in &radii {
        check_open("radius", *r, 4.0, "(0, 4]")?;
    }
    let eval = cfg
        .grids
        .eval
        .iter()
        .map(|p| parse_cli_point(p))
        .collect::<Result<Vec<_>, _>>()?;
    let input_digest = match &cfg.input {
        Some(path) => Some(sha256_hex(&std::fs::read(path).map_err(|source| ConfigError::Read {
            path: path.clone(),
            source,
        })?)),
        None => None,
    };
    Ok(Job {
        command,
        claim,
        input: cfg.input.clone(),
        set,
        domain,
        anchor,
        probes,
        degree,
        spacing,
        res,
        weight,
        q,
        r,
        mu,
        c,
        a1,
        a2,
        tol,
        deltas,
        radii,
        eval,
        input_digest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> JobConfig {
        JobConfig {
            command: "density".into(),
            claim: None,
            input: None,
            geometry: GeometrySection {
                set: Some("ball:0,1".into()),
                domain: Some("ball:0,3".into()),
                anchor: None,
                probes: vec!["1,0".into(), "0,1".into()],
            },
            numeric: NumericSection {
                degree: Some(48),
                res: Some(384),
                q: Some(0.7),
                ..Default::default()
            },
            grids: GridSection {
                radii: vec![0.5, 0.25],
                ..Default::default()
            },
            output: OutputSection {
                dir: Some("out".into()),
                cache: None,
            },
        }
    }

    #[test]
    fn toml_round_trip() {
        let cfg = sample();
        let text = cfg.to_toml();
        assert_eq!(JobConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn digest_ignores_output_and_tracks_parameters() {
        let a = resolve(&sample()).unwrap();
        let mut other = sample();
        other.output.dir = Some("elsewhere".into());
        assert_eq!(a.digest(), resolve(&other).unwrap().digest());
        other.numeric.degree = Some(49);
        assert_ne!(a.digest(), resolve(&other).unwrap().digest());
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = sample();
        cfg.numeric.degree = Some(0);
        assert!(matches!(resolve(&cfg), Err(ConfigError::Range { .. })));
        let mut cfg = sample();
        cfg.geometry.set = Some("blob:1".into());
        assert!(matches!(resolve(&cfg), Err(ConfigError::Parse { .. })));
        let mut cfg = sample();
        cfg.command = "nope".into();
        assert!(matches!(resolve(&cfg), Err(ConfigError::Command(_))));
        assert!(JobConfig::parse("command = \"envelope\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn points_and_weights() {
        assert_eq!(parse_cli_point("2,0").unwrap(), Point::c1(2.0, 0.0));
        assert_eq!(parse_cli_point("1+2i").unwrap(), Point::c1(1.0, 2.0));
        assert_eq!(WeightSpec::parse("none").unwrap(), None);
        assert_eq!(WeightSpec::parse("const:0.5").unwrap(), Some(WeightSpec::Constant(0.5)));
        assert!(WeightSpec::parse("quad:-1").is_err());
    }

    #[test]
    fn auto_spacing_targets_count() {
        let disk = CompactSet::disk(0.0, 0.0, 1.0);
        let n = discretize(&disk, auto_spacing(&disk, 2048)).unwrap().len();
        assert!((1600..2600).contains(&n), "{n}");
        let seg = CompactSet::segment(Point::c1(-1.0, 0.0), Point::c1(1.0, 0.0));
        let n = discretize(&seg, auto_spacing(&seg, 2048)).unwrap().len();
        assert!((1600..2600).contains(&n), "{n}");
    }
}
