//! `fio`: command-line driver for grids, norms, symbols and experiments.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 experiment check failed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use fio_core::config::{Config, EnsembleSpec, SCHEMA_VERSION};
use fio_core::decomp::{Bump, LpFamily, QuadratureSpec};
use fio_core::exponents::{ExponentSheet, SheetInputs};
use fio_core::io::{self as fio_io, Domain, GridData, Sidecar};
use fio_core::lab::{self, Ensemble, Experiment};
use fio_core::pseudo::{adjoint_apply, apply_with, ApplyPath, OperatorHandle};
use fio_core::spaces::{FioSpace, NormReport};
use fio_core::symbols::{
    lacunary_field, make_test_symbol, multiplier_symbol, seminorm, smooth_split, EtaProfile, TestSymbolSpec,
};
use fio_core::{forward_dft, Grid, GridFunction};
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(name = "fio", about = "FIO-Hardy norms and rough pseudodifferential operators on periodic grids")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exponent sheet at one parameter point.
    Exponents(ExponentsArgs),
    /// Norm of a grid function.
    Norm(NormArgs),
    /// Split a symbol into its smooth and rough parts.
    Smooth(SmoothArgs),
    /// Symbol-class seminorm of a symbol.
    Seminorm(SeminormArgs),
    /// Apply a(x,D) (or its adjoint) to a grid function.
    Apply(ApplyArgs),
    /// Run an experiment from a JSON config.
    Lab(LabArgs),
    /// Generate test fields and symbols.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ExponentsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 0.0)]
    m: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "delta-prime")]
    delta_prime: Option<f64>,
    /// Print the sheet as JSON.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceKind {
    Lp,
    Sobolev,
    Zygmund,
    Hfio,
    HfioAlt,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct NormArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    space: SpaceKind,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Sphere quadrature nodes for the FIO-Hardy norms.
    #[arg(long)]
    quad: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SmoothArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = Bump::STANDARD.plateau)]
    plateau: f64,
    #[arg(long, default_value_t = Bump::STANDARD.support)]
    support: f64,
    #[arg(long = "out-sharp")]
    out_sharp: PathBuf,
    #[arg(long = "out-flat")]
    out_flat: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SeminormArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 0.0)]
    m: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 2)]
    l: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PathArg {
    Direct,
    Separable,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ApplyArgs {
    #[arg(long)]
    symbol: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    path: Option<PathArg>,
    /// Apply the adjoint instead.
    #[arg(long)]
    adjoint: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExperimentArg {
    Sandwich,
    ThreeLines,
    BoundSweep,
    Pipeline,
    Embedding,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct LabArgs {
    #[arg(value_enum)]
    experiment: ExperimentArg,
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON-lines report; defaults to `output.report` of the config, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Record wall time in the report (breaks bit-reproducibility).
    #[arg(long)]
    runtime: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum GenKind {
    /// Lacunary Zygmund field (FIOG).
    Lacunary,
    /// Plane wave e^{ik·x} (FIOG).
    PlaneWave,
    /// One member of the band-limited random ensemble (FIOG).
    Ensemble,
    /// Symbol a ≡ 1 (FIOS).
    Identity,
    /// Multiplier ⟨η⟩^m (FIOS).
    Multiplier,
    /// Multiplication by a lacunary field (FIOS).
    Multiplication,
    /// Lacunary field times ⟨η⟩^m (FIOS).
    Tensor,
    /// Flat part of a lacunary field (FIOS).
    FlatOfB,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "size", short = 'N', default_value_t = 64)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Number of lacunary levels.
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(long, default_value_t = 0.0)]
    m: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Frequency of the plane wave, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Vec<i64>,
    /// Ensemble member index.
    #[arg(long, default_value_t = 0)]
    member: usize,
    /// Store DFT coefficients instead of samples.
    #[arg(long)]
    frequency: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Invalid(anyhow::Error),
    Check(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Invalid(e)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn read_function(path: &Path) -> Result<GridFunction> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(fio_io::decode_grid(&bytes).with_context(|| format!("decoding {}", path.display()))?.into_function())
}

fn read_symbol(path: &Path) -> Result<fio_core::symbols::RoughSymbol> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    fio_io::decode_symbol(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_field(path: &Path, data: GridData, provenance: serde_json::Value) -> Result<()> {
    let (bytes, grid, domain) = match &data {
        GridData::Space(f) => (fio_io::encode_function(f), f.grid().clone(), Domain::Space),
        GridData::Frequency(s) => (fio_io::encode_spectrum(s), s.grid().clone(), Domain::Frequency),
    };
    write_atomic(path, &bytes)?;
    write_atomic(&sidecar_path(path), to_json(&Sidecar::new(&grid, domain, provenance))?.as_bytes())
}

fn exponents_cmd(a: &ExponentsArgs) -> Result<()> {
    let sheet = ExponentSheet::compute(&SheetInputs {
        n: a.n,
        p: a.p,
        r: a.r,
        m: a.m,
        delta: a.delta,
        eps: a.eps,
        delta_prime: a.delta_prime,
    })?;
    let text = if a.json {
        to_json(&sheet)?
    } else {
        let mut t = format!(
            "n = {}, p = {}, r = {}, m = {}, delta = {}, eps = {}\n",
            sheet.n, sheet.p, sheet.r, sheet.m, sheet.delta, sheet.eps
        );
        for (k, v) in [
            ("s(p)", sheet.s_p),
            ("sigma", sheet.sigma),
            ("tau", sheet.tau),
            ("gamma", sheet.gamma),
            ("beta", sheet.beta),
            ("rho", sheet.rho),
            ("tau - sigma", sheet.tau_minus_sigma),
            ("sobolev lo", sheet.sobolev_lo),
            ("sobolev hi", sheet.sobolev_hi),
        ] {
            t.push_str(&format!("{k:>12}  {v}\n"));
        }
        t
    };
    emit(a.out.as_deref(), &text)
}

fn norm_cmd(a: &NormArgs) -> Result<()> {
    let f = read_function(&a.input)?;
    let grid = f.grid().clone();
    let space = || -> Result<FioSpace> {
        let mut q = QuadratureSpec::default_for(grid.dim());
        if let Some(m) = a.quad {
            q.sphere_nodes = m;
        }
        Ok(FioSpace::new(&grid, &q)?)
    };
    let report: NormReport = match a.space {
        SpaceKind::Lp => NormReport::lp(&f, a.p)?,
        SpaceKind::Sobolev => NormReport::sobolev(&f, a.s, a.p)?,
        SpaceKind::Zygmund => NormReport::zygmund(&f, a.r, &LpFamily::new(&grid))?,
        SpaceKind::Hfio => space()?.hfio_norm(&f, a.s, a.p)?,
        SpaceKind::HfioAlt => space()?.hfio_norm_alt(&f, a.s, a.p)?,
    };
    emit(a.json.as_deref(), &to_json(&report)?)
}

fn smooth_cmd(a: &SmoothArgs) -> Result<()> {
    let sym = read_symbol(&a.input)?;
    let split = smooth_split(&sym, a.beta, &Bump::new(a.plateau, a.support)?)?;
    write_atomic(&a.out_sharp, &fio_io::encode_symbol(&split.sharp))?;
    write_atomic(&a.out_flat, &fio_io::encode_symbol(&split.flat))
}

fn seminorm_cmd(a: &SeminormArgs) -> Result<()> {
    let sym = read_symbol(&a.input)?;
    let s = seminorm(&sym, a.r, a.m, a.delta, a.l)?;
    emit(a.out.as_deref(), &to_json(&s)?)
}

fn apply_cmd(a: &ApplyArgs) -> Result<()> {
    let sym = read_symbol(&a.symbol)?;
    let f = read_function(&a.input)?;
    let g = if a.adjoint {
        adjoint_apply(&sym, &f)?
    } else {
        let path = match a.path {
            Some(PathArg::Direct) => ApplyPath::Direct,
            Some(PathArg::Separable) => ApplyPath::Separable,
            None => OperatorHandle::new(&sym, None)?.path(),
        };
        apply_with(&sym, &f, path)?
    };
    let provenance = serde_json::json!({
        "command": "apply",
        "symbol": a.symbol.display().to_string(),
        "input": a.input.display().to_string(),
        "adjoint": a.adjoint,
    });
    write_field(&a.out, GridData::Space(g), provenance)
}

fn lab_cmd(a: &LabArgs) -> std::result::Result<(), Failure> {
    let cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Config::from_json(&text).with_context(|| format!("config {}", p.display()))?
        }
        None => Config::default(),
    };
    let which = match a.experiment {
        ExperimentArg::Sandwich => Experiment::Sandwich,
        ExperimentArg::ThreeLines => Experiment::ThreeLines,
        ExperimentArg::BoundSweep => Experiment::BoundSweep,
        ExperimentArg::Pipeline => Experiment::Pipeline,
        ExperimentArg::Embedding => Experiment::Embedding,
    };
    let start = std::time::Instant::now();
    let mut report = lab::run_experiment(which, &cfg).map_err(anyhow::Error::from)?;
    if a.runtime {
        report.runtime_seconds = Some(start.elapsed().as_secs_f64());
    }
    let out = a.out.clone().or_else(|| cfg.output.report.as_ref().map(PathBuf::from));
    let csv = a.csv.clone().or_else(|| cfg.output.csv.as_ref().map(PathBuf::from));
    emit(out.as_deref(), &report.to_json_lines().map_err(anyhow::Error::from)?)?;
    if let Some(p) = csv {
        write_atomic(&p, report.to_csv().as_bytes())?;
    }
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Check(format!("{} failed: {}", report.experiment, failed.join(", "))))
    }
}

fn gen_cmd(a: &GenArgs) -> Result<()> {
    let grid = Grid::new(a.n, a.size)?;
    let provenance = serde_json::json!({
        "command": "gen",
        "kind": format!("{:?}", a.kind),
        "seed": a.seed,
        "r": a.r,
        "levels": a.levels,
        "m": a.m,
    });
    let field = |f: GridFunction| -> Result<()> {
        let data = if a.frequency { GridData::Frequency(forward_dft(&f)) } else { GridData::Space(f) };
        write_field(&a.out, data, provenance.clone())
    };
    let symbol_spec = |kind: &str| TestSymbolSpec {
        r: a.r,
        levels: a.levels,
        seed: a.seed,
        m: a.m,
        delta: a.delta,
        ..TestSymbolSpec::new(kind)
    };
    match a.kind {
        GenKind::Lacunary => field(lacunary_field(&grid, a.r, a.levels, a.seed)?),
        GenKind::PlaneWave => {
            if a.k.len() != a.n {
                bail!("--k needs {} comma-separated integers", a.n);
            }
            let mut k = [0i64; 3];
            k[..a.n].copy_from_slice(&a.k);
            field(GridFunction::plane_wave(&grid, &k))
        }
        GenKind::Ensemble => {
            let spec = EnsembleSpec {
                count: a.member + 1,
                ..EnsembleSpec::default()
            };
            let ens = Ensemble::generate(&grid, &spec, a.seed)?;
            field(ens.members[a.member].clone())
        }
        GenKind::Identity => write_atomic(&a.out, &fio_io::encode_symbol(&multiplier_symbol(&grid, EtaProfile::one()))),
        GenKind::Multiplier => {
            let sym = multiplier_symbol(&grid, EtaProfile::bracket_power(Complex64::new(a.m, 0.0)));
            write_atomic(&a.out, &fio_io::encode_symbol(&sym))
        }
        GenKind::Multiplication | GenKind::Tensor | GenKind::FlatOfB => {
            let kind = match a.kind {
                GenKind::Multiplication => "multiplication",
                GenKind::Tensor => "tensor",
                _ => "flat-of-b",
            };
            let sym = make_test_symbol(&grid, &symbol_spec(kind), &Bump::STANDARD)?;
            write_atomic(&a.out, &fio_io::encode_symbol(&sym))
        }
    }
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Invalid(anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    match &cli.command {
        Command::Exponents(a) => exponents_cmd(a)?,
        Command::Norm(a) => norm_cmd(a)?,
        Command::Smooth(a) => smooth_cmd(a)?,
        Command::Seminorm(a) => seminorm_cmd(a)?,
        Command::Apply(a) => apply_cmd(a)?,
        Command::Lab(a) => lab_cmd(a)?,
        Command::Gen(a) => gen_cmd(a)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let version = format!("{} (config schema {SCHEMA_VERSION})", env!("CARGO_PKG_VERSION"));
    let parsed = Cli::command()
        .version(version)
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}
