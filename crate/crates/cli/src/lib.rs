//! `pplab`: batch front end for the extremal-function toolkit.
//!
//! Exit codes: 0 success, 1 computation error or failed verdict, 2 configuration error.

pub mod cache;
pub mod config;
pub mod jobs;
pub mod output;

use cache::{cache_lookup, cache_store, ArtifactEntry, Lookup, ResultRecord};
use clap::{Args, Parser, Subcommand};
use config::{resolve, sha256_hex, GeometrySection, GridSection, JobConfig, NumericSection, OutputSection};
use output::atomic_write;
use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

pub const CACHE_ENV: &str = "PPLAB_CACHE";
pub const DEFAULT_OUT: &str = "pplab-out";

#[derive(Parser, Debug)]
#[command(name = "pplab", version, about = "Extremal functions, capacities and Hölder fits on grids and point clouds")]
struct Cli {
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cache directory (else $PPLAB_CACHE, else the config, else .pplab-cache).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Always recompute and do not store.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate L^_K (or L^_{K,phi}) at points.
    Envelope(JobArgs),
    /// Solve for the relative extremal function u_{K;Omega}.
    Relative(JobArgs),
    /// Condenser capacity Cap(K, Omega).
    Capacity(JobArgs),
    /// Pointwise (with --anchor) or global modulus of continuity and its Hölder fit.
    Modulus(JobArgs),
    /// Fit a CSV curve or surface, or run the local scan at --anchor.
    Fit(JobArgs),
    /// Capacity density scan over probes and radii.
    Density(JobArgs),
    /// Global extremal function on the chart of CP^1.
    Projective(JobArgs),
    /// Check one claim and print its verdict row.
    Verify(JobArgs),
    /// Run the acceptance manifest.
    Suite,
    /// Run a job described by a TOML config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        args: JobArgs,
    },
}

#[derive(Args, Debug, Default)]
struct JobArgs {
    /// Set in short form, e.g. ball:0,1 or seg:-1,1 or box:0,1,0,1.
    #[arg(long)]
    set: Option<String>,
    /// Domain ball, e.g. ball:0,1.
    #[arg(long)]
    domain: Option<String>,
    /// Anchor point `x,y`.
    #[arg(long)]
    anchor: Option<String>,
    /// Probe points, separated by spaces or repeated.
    #[arg(long, num_args = 1..)]
    probes: Vec<String>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    res: Option<usize>,
    /// none | fs | const:c | quad:A[,x,y]
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    a2: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated radii for moduli.
    #[arg(long, value_delimiter = ',')]
    deltas: Vec<f64>,
    /// Comma-separated radii for scans.
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
    /// Evaluation points `x,y`, repeated.
    #[arg(long)]
    eval: Vec<String>,
    #[arg(long)]
    claim: Option<String>,
    /// CSV input for `fit`.
    #[arg(long)]
    input: Option<String>,
}

impl JobArgs {
    fn into_config(self, command: &str) -> JobConfig {
        JobConfig {
            command: command.into(),
            claim: self.claim,
            input: self.input,
            geometry: GeometrySection {
                set: self.set,
                domain: self.domain,
                anchor: self.anchor,
                probes: self.probes,
            },
            numeric: NumericSection {
                degree: self.degree,
                spacing: self.spacing,
                res: self.res,
                weight: self.weight,
                q: self.q,
                r: self.r,
                mu: self.mu,
                c: self.c,
                a1: self.a1,
                a2: self.a2,
                tol: self.tol,
            },
            grids: GridSection {
                deltas: self.deltas,
                radii: self.radii,
                eval: self.eval,
            },
            output: OutputSection::default(),
        }
    }
}

fn config_error(e: impl std::fmt::Display) -> i32 {
    eprintln!("pplab: {e}");
    2
}

/// Parses `argv` (program name first), runs the job and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match cli.command {
        Cmd::Suite => return run_suite(cli.out),
        Cmd::Run { config, args } => {
            let base = match JobConfig::load(&config.to_string_lossy()) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            base.overlay(args.into_config(""))
        }
        Cmd::Envelope(a) => a.into_config("envelope"),
        Cmd::Relative(a) => a.into_config("relative"),
        Cmd::Capacity(a) => a.into_config("capacity"),
        Cmd::Modulus(a) => a.into_config("modulus"),
        Cmd::Fit(a) => a.into_config("fit"),
        Cmd::Density(a) => a.into_config("density"),
        Cmd::Projective(a) => a.into_config("projective"),
        Cmd::Verify(a) => a.into_config("verify"),
    };
    if cfg.command == "suite" {
        return run_suite(cli.out.or(cfg.output.dir.map(PathBuf::from)));
    }
    let job = match resolve(&cfg) {
        Ok(j) => j,
        Err(e) => return config_error(e),
    };
    let out_dir = cli
        .out
        .or(cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let cache_dir = cli
        .cache
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .or(cfg.output.cache.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(cache::DEFAULT_DIR));
    let hash = job.digest();

    if !cli.no_cache {
        match cache_lookup(&cache_dir, &hash) {
            Lookup::Hit { record, files } => {
                if let Err(e) = write_all(&out_dir, &files) {
                    eprintln!("pplab: cannot write artifacts: {e}");
                    return 1;
                }
                print!("{}", record.stdout);
                eprintln!("pplab: cache hit {hash}");
                return i32::from(record.failed);
            }
            Lookup::Miss { warning: Some(w) } => eprintln!("pplab: warning: {w}"),
            Lookup::Miss { warning: None } => {}
        }
    }

    let started = cache::now_unix();
    let outcome = match jobs::execute(&job) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("pplab: {e}");
            return e.exit_code();
        }
    };
    let mut files = outcome.files.clone();
    files.push(("job.toml".into(), cfg_for_record(&cfg).into_bytes()));
    if let Err(e) = write_all(&out_dir, &files) {
        eprintln!("pplab: cannot write artifacts: {e}");
        return 1;
    }
    print!("{}", outcome.stdout);
    let _ = std::io::stdout().flush();
    if !cli.no_cache {
        let record = ResultRecord {
            hash: hash.clone(),
            started_unix: started,
            finished_unix: cache::now_unix(),
            artifacts: files
                .iter()
                .map(|(n, b)| ArtifactEntry {
                    name: n.clone(),
                    sha256: sha256_hex(b),
                })
                .collect(),
            stdout: outcome.stdout.clone(),
            verdicts: outcome.verdicts.iter().map(|v| v.row()).collect(),
            failed: outcome.failed(),
        };
        if let Err(e) = cache_store(&cache_dir, &record, &files) {
            eprintln!("pplab: warning: cache not written: {e}");
        }
    }
    i32::from(outcome.failed())
}

/// The job as a config file, without output locations (they do not affect results).
fn cfg_for_record(cfg: &JobConfig) -> String {
    let mut c = cfg.clone();
    c.output = OutputSection::default();
    c.to_toml()
}

fn write_all(dir: &std::path::Path, files: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    for (name, bytes) in files {
        atomic_write(&dir.join(name), bytes)?;
    }
    Ok(())
}

fn run_suite(out: Option<PathBuf>) -> i32 {
    let dir = out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let (outcome, all) = jobs::suite();
    print!("{}", outcome.stdout);
    if let Err(e) = write_all(&dir, &outcome.files) {
        eprintln!("pplab: cannot write artifacts: {e}");
        return 1;
    }
    i32::from(!all)
}
