//! `thinobs`: solve thin-obstacle problems and analyze the solutions from a
//! JSON run configuration.
//!
//! Exit codes: 0 success, 1 I/O or analysis-stage failure, 2 configuration
//! error, 3 solver non-convergence, 4 validation failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thinobs::experiment::{
    check_manifest, execute, oracle_comparison, parse_grid, run_suite, ExperimentError, Plan, RunConfig, RunManifest,
    Stage,
};
use thinobs::geometry::write_field_file;
use thinobs::nonlinearity::NonlinearityModel;
use thinobs::oracles::ExactSignoriniSolution;
use thinobs::solver::{BoundaryData, SolveConfig, SolveStatus};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(name = "thinobs", version, about = "Thin obstacle problem solver and analysis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and run every analysis stage.
    Run(RunArgs),
    /// Solve only and write the field.
    Solve(RunArgs),
    /// Frequency profile and weighted monotonicity fit.
    Frequency(AnalysisArgs),
    /// Decay rates of the L2 average, sup and sup-gradient norms.
    Decay(AnalysisArgs),
    /// Blow-up sequence at the free-boundary point.
    Blowup(AnalysisArgs),
    /// Contact set and free-boundary cells.
    Freeboundary(AnalysisArgs),
    /// Brute-force solution on a small grid, compared with the solver.
    Oracle(OracleArgs),
    /// Run the invariant suite, optionally checking a finished run directory.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rho_min: Option<f64>,
    #[arg(long)]
    rho_max: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct AnalysisArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Analyze this THOB field instead of solving.
    #[arg(long)]
    field: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Grid as NxM or NxMxK.
    #[arg(long, default_value = "5x3")]
    grid: String,
    /// Take the model, boundary data and solver settings from a config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for `oracle.thob`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also check the manifest and artifacts of this run directory.
    #[arg(long)]
    run: Option<PathBuf>,
}

fn load(args: &RunArgs) -> Result<RunConfig, ExperimentError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let a = &mut cfg.analysis;
    a.rho_min = args.rho_min.unwrap_or(a.rho_min);
    a.rho_max = args.rho_max.unwrap_or(a.rho_max);
    a.alpha = args.alpha.unwrap_or(a.alpha);
    a.delta = args.delta.unwrap_or(a.delta);
    cfg.validate()?;
    Ok(cfg)
}

fn exit_for(err: &ExperimentError) -> u8 {
    match err {
        ExperimentError::Config(_) => EXIT_CONFIG,
        ExperimentError::Solve(_) => EXIT_NONCONVERGED,
        ExperimentError::Output { .. } | ExperimentError::Field { .. } => EXIT_FAILURE,
    }
}

fn report(m: &RunManifest, cfg: &RunConfig) -> u8 {
    println!("manifest: {}", cfg.output.join(thinobs::experiment::MANIFEST_FILE).display());
    println!("config digest: {}", m.config_digest);
    if let Some(s) = &m.solver {
        println!(
            "solve: {:?} after {} iterations, kkt {:.3e} (tol {:.0e}), energy {:.12e}",
            s.status,
            s.iterations,
            s.kkt.max(),
            s.tol_kkt,
            s.energy
        );
    }
    if let Some(fb) = &m.free_boundary {
        println!("free boundary: {} contact nodes, {} cells, center {:?}", fb.contact_nodes.len(), fb.cells.len(), fb.center);
    }
    if let Some(f) = &m.frequency {
        println!("frequency: N in [{:.4}, {:.4}], max doubling {:.4}", f.n_min, f.n_max, f.gamma);
    }
    if let Some(mono) = &m.monotonicity {
        println!("monotonicity: {:?}, fitted C {:?}", mono.status, mono.fitted_c);
    }
    if let Some(d) = &m.decay {
        println!("decay slopes: l2 {:.4}, sup {:.4}, sup gradient {:.4}", d.l2_slope, d.sup_slope, d.sup_gradient_slope);
    }
    if let Some(b) = &m.blowup {
        let c1: Vec<String> = b.stages.iter().map(|s| format!("{:.4}", s.c1_distance)).collect();
        println!("blow-up: C1 distances [{}], final degree {:?}", c1.join(", "), b.final_degree);
    }
    for f in &m.stage_failures {
        eprintln!("stage {} failed: {}", f.stage, f.message);
    }
    match m.solver_status() {
        Some(SolveStatus::NonConverged | SolveStatus::IllPosed) => EXIT_NONCONVERGED,
        _ if !m.stage_failures.is_empty() => EXIT_FAILURE,
        _ => 0,
    }
}

fn pipeline(args: &RunArgs, plan: Plan) -> u8 {
    let cfg = match load(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return exit_for(&e);
        }
    };
    match execute(&cfg, &plan) {
        Ok(m) => report(&m, &cfg),
        Err(e) => {
            eprintln!("{e}");
            exit_for(&e)
        }
    }
}

fn analysis(args: &AnalysisArgs, stages: &[Stage]) -> u8 {
    let mut plan = Plan::only(stages);
    plan.field = args.field.clone();
    if plan.field.is_none() {
        plan.stages.insert(0, Stage::Solve);
    }
    pipeline(&args.run, plan)
}

fn oracle(args: &OracleArgs) -> Result<u8, ExperimentError> {
    let nodes = parse_grid(&args.grid)?;
    let (model, data, solver) = match &args.config {
        Some(path) => {
            let cfg = RunConfig::load(path)?;
            if cfg.dim != nodes.len() {
                return Err(ExperimentError::Config(format!("grid {} does not match dim {}", args.grid, cfg.dim)));
            }
            let model = cfg.nonlinearity.build().map_err(|e| ExperimentError::Config(e.to_string()))?;
            let data = BoundaryData::from_spec(&cfg.boundary, cfg.dim).map_err(|e| ExperimentError::Config(e.to_string()))?;
            (model, data, cfg.solver)
        }
        None => {
            let sol = ExactSignoriniSolution::new(1.0, nodes.len(), 1).map_err(|e| ExperimentError::Config(e.to_string()))?;
            (NonlinearityModel::quadratic(), BoundaryData::oracle(sol), SolveConfig::default())
        }
    };
    let cmp = oracle_comparison(&nodes, &model, &data, &solver)?;
    if let (Some(dir), Some(field)) = (&args.out, &cmp.oracle_field) {
        std::fs::create_dir_all(dir).map_err(|source| ExperimentError::Output { path: dir.clone(), source })?;
        let path = dir.join("oracle.thob");
        write_field_file(&path, field).map_err(|e| ExperimentError::Field { path: path.clone(), reason: e.to_string() })?;
    }
    let mut json = serde_json::to_value(&cmp).expect("comparison serializes");
    if let Some(field) = &cmp.oracle_field {
        json["field"] = serde_json::json!(field.values());
    }
    println!("{}", serde_json::to_string_pretty(&json).expect("json serializes"));
    let tol = if model.is_quadratic() { 1e-8 } else { 1e-5 };
    if cmp.max_field_difference > tol || cmp.energy_difference > tol {
        eprintln!("solver differs from the oracle by more than {tol:.0e}");
        return Ok(EXIT_VALIDATION);
    }
    Ok(0)
}

fn validate(args: &ValidateArgs) -> u8 {
    let suite = run_suite(args.seed);
    for c in &suite.checks {
        println!("{} {}/{}: {}", if c.passed { "ok  " } else { "FAIL" }, c.module, c.name, c.detail);
    }
    let mut ok = suite.passed();
    if let Some(dir) = &args.run {
        match check_manifest(dir) {
            Ok(problems) => {
                for p in &problems {
                    println!("FAIL manifest: {p}");
                }
                if problems.is_empty() {
                    println!("ok   manifest: {}", dir.display());
                }
                ok &= problems.is_empty();
            }
            Err(e) => {
                println!("FAIL manifest: {e}");
                ok = false;
            }
        }
    }
    if ok {
        0
    } else {
        EXIT_VALIDATION
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run(a) => pipeline(a, Plan::full()),
        Command::Solve(a) => pipeline(a, Plan::only(&[Stage::Solve])),
        Command::Frequency(a) => analysis(a, &[Stage::FreeBoundary, Stage::Frequency, Stage::Monotonicity]),
        Command::Decay(a) => analysis(a, &[Stage::FreeBoundary, Stage::Decay]),
        Command::Blowup(a) => analysis(a, &[Stage::FreeBoundary, Stage::Blowup]),
        Command::Freeboundary(a) => analysis(a, &[Stage::FreeBoundary]),
        Command::Oracle(a) => oracle(a).unwrap_or_else(|e| {
            eprintln!("{e}");
            exit_for(&e)
        }),
        Command::Validate(a) => validate(a),
    };
    ExitCode::from(code)
}
