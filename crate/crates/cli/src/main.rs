#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gkp_magic::export::{to_json_string, write_bloch_csv, write_fidelity_csv, write_success_csv};
use gkp_magic::magic::{success_curve, threshold_nbar_with, FidelityEvaluator, SuccessOptions, ThresholdOptions};
use gkp_magic::oracle::OracleConfig;
use gkp_magic::verify::{dual_route_report, heterodyne_report, oracle_report, DualRouteReport, HeterodyneReport, OracleReport};
use gkp_magic::{BlochEngine, GaussianState, LatticeKind, MagicFamily, Outcome};
use serde::Serialize;

use config::RunConfig;
use error::{CliError, CliResult};

/// GKP error correction of Gaussian states: logical Bloch vectors, magic-state
/// fidelity maps, success curves, thresholds and oracle verification.
#[derive(Debug, Parser)]
#[command(name = "gkp-magic", version)]
struct Cli {
    /// JSON file with default values for any flag (snake_case keys).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalised logical Bloch vector and outcome density at one outcome.
    Bloch(BlochArgs),
    /// Fidelity to the nearest magic state over a grid of the outcome cell.
    FidelityMap(MapArgs),
    /// Success probability P(F >= f) for thermal inputs.
    SuccessCurve(CurveArgs),
    /// Thermal occupation at which the best fidelity falls to f.
    Threshold(ThresholdArgs),
    /// Seeded dual-route and number-basis oracle checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct StateArgs {
    /// vacuum | thermal:<nbar> | gauss:<q>,<p>,<a>,<b>,<c>
    #[arg(long)]
    state: Option<String>,
    /// square | hex
    #[arg(long)]
    lattice: Option<String>,
}

#[derive(Debug, Args)]
struct BlochArgs {
    #[command(flatten)]
    common: StateArgs,
    /// Outcome (t_q, t_p).
    #[arg(long, num_args = 2, value_names = ["TQ", "TP"], allow_negative_numbers = true)]
    t: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct MapArgs {
    #[command(flatten)]
    common: StateArgs,
    /// H | T
    #[arg(long)]
    family: Option<String>,
    /// Grid points per side.
    #[arg(long)]
    resolution: Option<usize>,
    /// Fidelity CSV path (default: fidelity_map.csv in the output directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional Bloch-vector CSV path.
    #[arg(long)]
    bloch_out: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// Thermal occupations, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    nbar: Option<Vec<f64>>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    lattice: Option<String>,
    /// Ascending fidelity thresholds in [0.5, 1], comma separated.
    #[arg(long, value_delimiter = ',')]
    f_grid: Option<Vec<f64>>,
    /// Probability left on undecided cells when refinement stops.
    #[arg(long)]
    quadrature_tol: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    lattice: Option<String>,
    /// Target fidelity (default: the family's distillation threshold).
    #[arg(long)]
    f: Option<f64>,
    #[arg(long)]
    nbar_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Random cases per check.
    #[arg(long)]
    n_cases: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    comb_halfwidth: Option<usize>,
    #[arg(long)]
    dual_tol: Option<f64>,
    #[arg(long)]
    oracle_tol: Option<f64>,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    print!("{}", to_json_string(value)?);
    Ok(())
}

#[derive(Serialize)]
struct BlochOutput {
    state: GaussianState,
    lattice: LatticeKind,
    t: [f64; 2],
    pdf: f64,
    r0: f64,
    r: [f64; 3],
    purity_radius: f64,
}

fn engine(state: &GaussianState, lattice: LatticeKind) -> CliResult<BlochEngine> {
    let input = lattice
        .to_square_input(state)
        .map_err(|e| CliError::validation("state", format!("{e} (lattice {lattice})")))?;
    Ok(BlochEngine::new(&input)?)
}

fn cmd_bloch(args: BlochArgs, cfg: RunConfig) -> CliResult<()> {
    let state = config::state(args.common.state.as_deref().or(cfg.state.as_deref()))?;
    let lattice = config::lattice(args.common.lattice.as_deref().or(cfg.lattice.as_deref()))?;
    let t = match args.t {
        Some(v) => [v[0], v[1]],
        None => cfg.t.unwrap_or([0.0, 0.0]),
    };
    if !t.iter().all(|x| x.is_finite()) {
        return Err(CliError::validation("t", "must be finite"));
    }
    let engine = engine(&state, lattice)?;
    let outcome = Outcome::new(t[0], t[1]);
    let pdf = engine.pdf(outcome)?;
    let b = engine.normalized(outcome)?;
    print_json(&BlochOutput {
        state,
        lattice,
        t,
        pdf,
        r0: b.r0,
        r: b.r,
        purity_radius: b.norm3(),
    })
}

fn cmd_fidelity_map(args: MapArgs, cfg: RunConfig) -> CliResult<()> {
    let state = config::state(args.common.state.as_deref().or(cfg.state.as_deref()))?;
    let lattice = config::lattice(args.common.lattice.as_deref().or(cfg.lattice.as_deref()))?;
    let family = config::family(args.family.as_deref().or(cfg.family.as_deref()))?;
    let resolution = args.resolution.or(cfg.resolution).unwrap_or(64);
    if resolution == 0 {
        return Err(CliError::validation("resolution", "must be at least 1"));
    }
    let dir = output::out_dir(args.out_dir.or(cfg.out_dir));
    let out = args.out.or(cfg.out).unwrap_or_else(|| dir.join("fidelity_map.csv"));
    let bloch_out = args.bloch_out.or(cfg.bloch_out);
    output::ensure_writable_file(&out)?;
    if let Some(p) = &bloch_out {
        output::ensure_writable_file(p)?;
    }
    lattice
        .to_square_input(&state)
        .map_err(|e| CliError::validation("state", format!("{e} (lattice {lattice})")))?;

    let map = FidelityEvaluator::new(&state, family, lattice)?.map(resolution)?;
    output::write_atomic(&out, |w| write_fidelity_csv(w, &map))?;
    if let Some(p) = &bloch_out {
        output::write_atomic(p, |w| write_bloch_csv(w, &map))?;
    }
    print_json(&map.summary())
}

#[derive(Serialize)]
struct Sidecar {
    nbar: f64,
    family: MagicFamily,
    lattice: LatticeKind,
    quadrature_tol: f64,
}

#[derive(Serialize)]
struct CurveFiles {
    csv: PathBuf,
    json: PathBuf,
    fidelity_grid: Vec<f64>,
    probability: Vec<f64>,
}

fn default_f_grid() -> Vec<f64> {
    (0..10).map(|i| 0.5 + 0.05 * i as f64).collect()
}

fn cmd_success_curve(args: CurveArgs, cfg: RunConfig) -> CliResult<()> {
    let family = config::family(args.family.as_deref().or(cfg.family.as_deref()))?;
    let lattice = config::lattice(args.lattice.as_deref().or(cfg.lattice.as_deref()))?;
    let nbars = args.nbar.or(cfg.nbar).unwrap_or_else(|| vec![0.0]);
    if nbars.is_empty() {
        return Err(CliError::validation("nbar", "empty"));
    }
    if let Some(n) = nbars.iter().find(|n| !(**n >= 0.0 && n.is_finite())) {
        return Err(CliError::validation("nbar", format!("{n} is not a finite non-negative occupation")));
    }
    let f_grid = config::fidelity_grid(&args.f_grid.or(cfg.f_grid).unwrap_or_else(default_f_grid))?;
    let tol = config::positive("quadrature_tol", args.quadrature_tol.or(cfg.quadrature_tol).unwrap_or(1e-4))?;
    let dir = output::out_dir(args.out_dir.or(cfg.out_dir));
    output::ensure_writable_dir(&dir)?;

    let opts = SuccessOptions {
        boundary_tol: tol,
        ..SuccessOptions::default()
    };
    let mut written = Vec::with_capacity(nbars.len());
    for nbar in nbars {
        let curve = success_curve(nbar, family, lattice, &f_grid, opts)?;
        let stem = format!("success_{family}_{lattice}_nbar{nbar}");
        let csv = dir.join(format!("{stem}.csv"));
        let json = dir.join(format!("{stem}.json"));
        output::write_atomic(&csv, |w| write_success_csv(w, &curve))?;
        let sidecar = Sidecar {
            nbar,
            family,
            lattice,
            quadrature_tol: tol,
        };
        output::write_text(&json, &to_json_string(&sidecar)?)?;
        written.push(CurveFiles {
            csv,
            json,
            fidelity_grid: curve.fidelity_grid,
            probability: curve.probability,
        });
    }
    print_json(&written)
}

fn cmd_threshold(args: ThresholdArgs, cfg: RunConfig) -> CliResult<()> {
    let family = config::family(args.family.as_deref().or(cfg.family.as_deref()))?;
    let lattice = config::lattice(args.lattice.as_deref().or(cfg.lattice.as_deref()))?;
    let f = args.f.or(cfg.f).unwrap_or(family.distill_threshold());
    if !(f > 0.5 && f < 1.0) {
        return Err(CliError::validation("f", format!("{f} outside (0.5, 1)")));
    }
    let opts = ThresholdOptions {
        nbar_tol: config::positive("nbar_tol", args.nbar_tol.or(cfg.nbar_tol).unwrap_or(1e-4))?,
        ..ThresholdOptions::default()
    };
    print_json(&threshold_nbar_with(family, lattice, f, opts)?)
}

#[derive(Serialize)]
struct VerifyReport {
    seed: u64,
    n_cases: usize,
    pass: bool,
    dual_route: DualRouteReport,
    oracle: OracleReport,
    heterodyne: HeterodyneReport,
}

fn cmd_verify(args: VerifyArgs, cfg: RunConfig) -> CliResult<()> {
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let n_cases = args.n_cases.or(cfg.n_cases).unwrap_or(20);
    let defaults = OracleConfig::default();
    let oracle_config = OracleConfig {
        beta: args.beta.or(cfg.beta).unwrap_or(defaults.beta),
        cutoff: args.cutoff.or(cfg.cutoff).unwrap_or(defaults.cutoff),
        comb_halfwidth: args.comb_halfwidth.or(cfg.comb_halfwidth).unwrap_or(defaults.comb_halfwidth),
    };
    oracle_config.validate().map_err(|e| match e {
        gkp_magic::Error::OutOfRange { name, .. } => CliError::validation(name, e.to_string()),
        other => CliError::validation("oracle", other.to_string()),
    })?;
    let dual_tol = config::positive("dual_tol", args.dual_tol.or(cfg.dual_tol).unwrap_or(1e-10))?;
    let oracle_tol = config::positive("oracle_tol", args.oracle_tol.or(cfg.oracle_tol).unwrap_or(1e-3))?;
    let out = args.out.or(cfg.out);
    if let Some(p) = &out {
        output::ensure_writable_file(p)?;
    }

    let dual_route = dual_route_report(seed, n_cases, dual_tol)?;
    let oracle = oracle_report(seed, n_cases, &oracle_config, oracle_tol)?;
    let heterodyne = heterodyne_report(seed, n_cases, &oracle_config, oracle_tol)?;
    let report = VerifyReport {
        seed,
        n_cases,
        pass: dual_route.pass && oracle.pass && heterodyne.pass,
        dual_route,
        oracle,
        heterodyne,
    };
    let text = to_json_string(&report)?;
    if let Some(p) = &out {
        output::write_text(p, &text)?;
    }
    print!("{text}");
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "dual-route max {:e} (tol {dual_tol:e}), oracle max {:e}, heterodyne max {:e} (tol {oracle_tol:e})",
            report.dual_route.max_abs_err, report.oracle.max_abs_err, report.heterodyne.max_abs_err
        )))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(Path::new(path))?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Bloch(a) => cmd_bloch(a, cfg),
        Command::FidelityMap(a) => cmd_fidelity_map(a, cfg),
        Command::SuccessCurve(a) => cmd_success_curve(a, cfg),
        Command::Threshold(a) => cmd_threshold(a, cfg),
        Command::Verify(a) => cmd_verify(a, cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
