//! `qcrb` command-line front-end.
//!
//! Commands: `bound`, `oracle-check`, `simulate`, `allocate`, `sweep`,
//! `modes`. Every command reads a strict JSON config, writes
//! machine-readable reports into `--out`, and is byte-reproducible for a
//! fixed config and seed.
//!
//! Exit codes: 0 success, 2 config error, 3 model degeneracy (no detection
//! mode / no information), 4 verification failure.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::allocation::{optimize_allocation, random_network_audit};
use crate::config::{
    self, build_family, AllocateConfig, BoundConfig, LoModeConfig, ModesConfig,
    OracleCheckConfig, SimulateConfig, SweepConfig, BUILTIN_MODELS,
};
use crate::error::{Error, Result};
use crate::fisher::{qfi_full, FisherReport};
use crate::homodyne::{run_experiment, ExperimentRun, HomodyneConfig};
use crate::models::{DerivKind, ParametricFamily};
use crate::modes::{build_detection_basis_with_waist, hermite_gauss, mean_field_mode, ComplexField, Grid};
use crate::oracle::{
    overlap_closed_form, overlap_grid, qfi_from_overlap, qfi_from_state_path,
    random_single_mode_state, RandomStatePath,
};
use crate::pipeline::{analyze, bound_report};
use crate::plot::{write_svg, PlotSpec, Series, SeriesStyle};
use crate::report::{write_field_csv, write_json, CsvCell, CsvFile};

#[derive(Parser)]
#[command(name = "qcrb", version, about = "Quantum Cramér-Rao bounds for multimode Gaussian light")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "QCRB_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the sensitivity bound for a model.
    Bound(CommonArgs),
    /// Cross-check the direct information against the overlap route.
    OracleCheck(CommonArgs),
    /// Monte Carlo homodyne estimation experiment.
    Simulate(CommonArgs),
    /// Optimize squeezing allocation and audit random networks.
    Allocate(CommonArgs),
    /// Bound reports over a parameter sweep.
    Sweep(CommonArgs),
    /// Write the detection-mode basis to files.
    Modes(CommonArgs),
}

/// Entry point; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Bound(a)
        | Command::OracleCheck(a)
        | Command::Simulate(a)
        | Command::Allocate(a)
        | Command::Sweep(a)
        | Command::Modes(a) => a,
    };
    if let Some(threads) = common.threads {
        // ignore failure: the global pool may already exist in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::ZeroDetectionMode
        | Error::NoInformation
        | Error::ZeroMeanField
        | Error::Domain { .. }
        | Error::Purity(_) => 3,
        _ => 2,
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Bound(args) => cmd_bound(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Allocate(args) => cmd_allocate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Modes(args) => cmd_modes(args),
    }
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Bound report straight from a parsed config; shared with the C ABI.
pub fn bound_from_config(cfg: &BoundConfig) -> Result<FisherReport> {
    let family = build_family(&cfg.model, &cfg.params)?;
    let grid = cfg.grid.build()?;
    bound_report(family.as_ref(), &grid, cfg.deriv_kind()?, cfg.q)
}

fn cmd_bound(args: &CommonArgs) -> Result<i32> {
    let cfg: BoundConfig = config::load(&args.config)?;
    let report = bound_from_config(&cfg)?;
    ensure_out(&args.out)?;
    write_json(&args.out.join("report.json"), &report)?;
    print_bound_table(&cfg.model, &report);
    Ok(0)
}

fn print_bound_table(model: &str, r: &FisherReport) {
    println!("model                {model}");
    println!("q                    {}", r.q);
    println!("i_mean_term          {:.6e}", r.i_mean_term);
    println!("i_cov_term           {:.6e}", r.i_cov_term);
    println!("i_full               {:.6e}", r.i_full);
    println!("cov_term_ratio       {:.3e}", r.cov_term_ratio);
    match (r.gamma_inv_11, r.i_reduced, r.i_zero) {
        (Some(g), Some(ir), Some(iz)) => {
            println!("n                    {:.6e}", r.n.unwrap_or(f64::NAN));
            println!("u_prime_norm_sq      {:.6e}", r.u_prime_norm_sq.unwrap_or(f64::NAN));
            println!("n_prime              {:.6e}", r.n_prime.unwrap_or(f64::NAN));
            println!("gamma_inv_11         {g:.6e}");
            println!("i_reduced            {ir:.6e}");
            println!("i_zero               {iz:.6e}");
        }
        _ => println!("detection mode       none (covariance information only)"),
    }
    println!("bound_full           {:.6e}", r.delta_theta_min);
    match r.bound_linearized {
        Some(b) => println!("bound_linearized     {b:.6e}"),
        None => println!("bound_linearized     n/a"),
    }
}

#[derive(Serialize)]
struct OracleSummary {
    cases: u64,
    skipped: u64,
    worst_case: String,
    worst_rel_err: f64,
    pair_cases: u64,
    worst_pair_abs_err: f64,
    passed: bool,
}

fn default_params_for(model: &str) -> serde_json::Value {
    match model {
        "phase" => serde_json::json!({"N": 100.0}),
        "displacement" => serde_json::json!({"N": 100.0, "w": 1.0}),
        "amplitude" => serde_json::json!({"N": 100.0, "m": 1.0}),
        "rotated-squeezed" => serde_json::json!({"N": 100.0, "squeeze_db": 6.0}),
        _ => serde_json::json!({}),
    }
}

/// Step small enough that the overlap deficit stays ≈ `I h²/4 ≤ 1e-3`.
fn overlap_step(h_cfg: f64, i_direct: f64) -> f64 {
    if i_direct <= 0.0 {
        return h_cfg;
    }
    h_cfg.min(0.06 / i_direct.sqrt())
}

fn cmd_oracle_check(args: &CommonArgs) -> Result<i32> {
    let mut cfg: OracleCheckConfig = config::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let grid = cfg.grid.build()?;
    ensure_out(&args.out)?;
    let mut csv = CsvFile::create(
        &args.out.join("oracle_check.csv"),
        &["case_id", "i_fisher_direct", "i_fisher_overlap", "rel_err"],
    )?;

    let mut worst_rel: f64 = 0.0;
    let mut worst_case = String::from("none");
    let mut cases = 0u64;
    let mut skipped = 0u64;

    let models: Vec<String> = if cfg.model == "all" {
        BUILTIN_MODELS.iter().map(|s| s.to_string()).collect()
    } else {
        vec![cfg.model.clone()]
    };
    for model in &models {
        let params = if cfg.model == "all" {
            default_params_for(model)
        } else {
            cfg.params.clone()
        };
        let family = build_family(model, &params)?;
        let direct = match bound_report(family.as_ref(), &grid, DerivKind::Analytic, 1) {
            Ok(report) => report.i_full,
            Err(Error::NoInformation) | Err(Error::ZeroDetectionMode) => {
                skipped += 1;
                csv.row(&[
                    CsvCell::Str(format!("model-{model}-skipped")),
                    CsvCell::Float(f64::NAN),
                    CsvCell::Float(f64::NAN),
                    CsvCell::Float(f64::NAN),
                ])?;
                continue;
            }
            Err(e) => return Err(e),
        };
        let h = overlap_step(cfg.fd_step, direct);
        let overlap = qfi_from_overlap(family.as_ref(), &grid, h)?;
        let rel = (direct - overlap).abs() / direct;
        cases += 1;
        if rel > worst_rel {
            worst_rel = rel;
            worst_case = format!("model-{model}");
        }
        csv.row(&[
            CsvCell::Str(format!("model-{model}")),
            CsvCell::Float(direct),
            CsvCell::Float(overlap),
            CsvCell::Float(rel),
        ])?;
    }

    for k in 0..cfg.random_families {
        let m = (k as usize % 3) + 1;
        let path = RandomStatePath::sample(m, cfg.seed.wrapping_add(k));
        let (cov, cov_prime) = path.cov_and_prime();
        let (i_mean, i_cov) = qfi_full(&path.mean_prime(), &cov, &cov_prime)?;
        let direct = i_mean + i_cov;
        if direct <= 0.0 {
            skipped += 1;
            continue;
        }
        let h = overlap_step(cfg.fd_step, direct);
        let overlap = qfi_from_state_path(|theta| path.state_at(theta), h)?;
        let rel = (direct - overlap).abs() / direct;
        cases += 1;
        if rel > worst_rel {
            worst_rel = rel;
            worst_case = format!("random-family-{k}");
        }
        csv.row(&[
            CsvCell::Str(format!("random-family-{k}")),
            CsvCell::Float(direct),
            CsvCell::Float(overlap),
            CsvCell::Float(rel),
        ])?;
    }

    let mut pair_csv = CsvFile::create(
        &args.out.join("overlap_pairs.csv"),
        &["case_id", "closed_form", "grid_integration", "abs_err"],
    )?;
    let mut worst_pair: f64 = 0.0;
    for k in 0..cfg.random_pairs {
        let s1 = random_single_mode_state(cfg.seed.wrapping_add(1000 + 2 * k));
        let s2 = random_single_mode_state(cfg.seed.wrapping_add(1001 + 2 * k));
        let closed = overlap_closed_form(&s1, &s2)?.overlap_sq;
        let half_box = pair_box(&s1, &s2);
        let grid_o = overlap_grid(&s1, &s2, half_box, 256)?.overlap_sq;
        let abs_err = (closed - grid_o).abs();
        worst_pair = worst_pair.max(abs_err);
        pair_csv.row(&[
            CsvCell::Str(format!("overlap-pair-{k}")),
            CsvCell::Float(closed),
            CsvCell::Float(grid_o),
            CsvCell::Float(abs_err),
        ])?;
    }

    let passed = worst_rel < 1e-4 && worst_pair < 1e-6;
    let summary = OracleSummary {
        cases,
        skipped,
        worst_case: worst_case.clone(),
        worst_rel_err: worst_rel,
        pair_cases: cfg.random_pairs,
        worst_pair_abs_err: worst_pair,
        passed,
    };
    write_json(&args.out.join("oracle_summary.json"), &summary)?;
    if passed {
        println!("oracle check passed: {cases} cases, worst {worst_case} rel_err {worst_rel:.3e}, worst pair abs_err {worst_pair:.3e}");
        Ok(0)
    } else {
        eprintln!("oracle check FAILED: worst {worst_case} rel_err {worst_rel:.3e}, worst pair abs_err {worst_pair:.3e}");
        Ok(4)
    }
}

/// Box covering both states to well past 6σ plus the mean offsets.
fn pair_box(s1: &crate::gaussian::GaussianState, s2: &crate::gaussian::GaussianState) -> f64 {
    let mut half = 0.0f64;
    for s in [s1, s2] {
        for axis in 0..2 {
            half = half.max(s.mean()[axis].abs() + 8.0 * s.cov()[(axis, axis)].sqrt());
        }
    }
    half
}

fn resolve_lo(
    cfg: &LoModeConfig,
    family: &dyn ParametricFamily,
    grid: &Arc<Grid>,
    a_bar: &ComplexField,
    a_bar_prime: &ComplexField,
) -> Result<ComplexField> {
    match cfg {
        LoModeConfig::Named(name) => match name.as_str() {
            "detection" => {
                if a_bar_prime.norm() <= 1e-12 {
                    return Err(Error::ZeroDetectionMode);
                }
                mean_field_mode(a_bar_prime)
            }
            "mean_field" => mean_field_mode(a_bar),
            other => Err(Error::Config(format!(
                "unknown LO mode \"{other}\"; expected \"detection\", \"mean_field\" or {{\"hg\": n}}"
            ))),
        },
        LoModeConfig::Hg(h) => hermite_gauss(h.hg, family.seed_waist(), 0.0, grid),
    }
}

fn cmd_simulate(args: &CommonArgs) -> Result<i32> {
    let mut cfg: SimulateConfig = config::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let grid = cfg.grid.build()?;
    let kind = cfg.deriv_kind()?;
    ensure_out(&args.out)?;

    match cfg.sweep.clone() {
        None => {
            let family = build_family(&cfg.model, &cfg.params)?;
            let run = simulate_once(&cfg, family.as_ref(), &grid, kind, cfg.theta_true)?;
            let mut csv = CsvFile::create(
                &args.out.join("repetitions.csv"),
                &["repetition", "mean_d", "theta_hat"],
            )?;
            for rec in &run.repetitions {
                csv.row(&[
                    CsvCell::Int(rec.index as i64),
                    CsvCell::Float(rec.mean_d),
                    CsvCell::Float(rec.theta_hat),
                ])?;
            }
            write_json(&args.out.join("summary.json"), &run.report)?;
            let r = &run.report;
            println!(
                "model {} theta_true {} -> empirical δθ {:.6e}, QCR {:.6e}, ratio {:.4}{}",
                cfg.model,
                r.theta_true,
                r.empirical_delta_theta,
                r.qcr_delta_theta,
                r.ratio,
                if r.no_signal { " (no first-order signal)" } else { "" }
            );
            Ok(0)
        }
        Some(sweep) => {
            let values = sweep.values()?;
            let mut rows = Vec::new();
            let mut reports = Vec::new();
            for &value in &values {
                let (family, theta) = if sweep.param == "theta" {
                    (build_family(&cfg.model, &cfg.params)?, value)
                } else {
                    let params = config::override_param(&cfg.params, &sweep.param, value);
                    (build_family(&cfg.model, &params)?, cfg.theta_true)
                };
                let run = simulate_once(&cfg, family.as_ref(), &grid, kind, theta)?;
                rows.push((value, run.report.empirical_delta_theta, run.report.qcr_delta_theta));
                reports.push(run.report);
            }
            let mut csv = CsvFile::create(
                &args.out.join("sweep.csv"),
                &[&sweep.param, "empirical_delta_theta", "qcr_delta_theta", "ratio"],
            )?;
            for (v, emp, qcr) in &rows {
                csv.row(&[
                    CsvCell::Float(*v),
                    CsvCell::Float(*emp),
                    CsvCell::Float(*qcr),
                    CsvCell::Float(emp / qcr),
                ])?;
            }
            write_json(&args.out.join("summary.json"), &reports)?;
            let log = sweep.log.unwrap_or(false) || sweep.param == "N";
            write_svg(
                &args.out.join("plot.svg"),
                &PlotSpec {
                    title: &format!("homodyne sensitivity vs {}", sweep.param),
                    x_label: &sweep.param,
                    y_label: "delta theta",
                    log_x: log,
                    log_y: log,
                    series: vec![
                        Series {
                            name: "QCR bound",
                            points: rows.iter().map(|(v, _, q)| (*v, *q)).collect(),
                            style: SeriesStyle::Line,
                            color: "#1f77b4",
                        },
                        Series {
                            name: "empirical",
                            points: rows.iter().map(|(v, e, _)| (*v, *e)).collect(),
                            style: SeriesStyle::Points,
                            color: "#d62728",
                        },
                    ],
                },
            )?;
            println!("sweep over {} at {} points written", sweep.param, rows.len());
            Ok(0)
        }
    }
}

fn simulate_once(
    cfg: &SimulateConfig,
    family: &dyn ParametricFamily,
    grid: &Arc<Grid>,
    kind: DerivKind,
    theta_true: f64,
) -> Result<ExperimentRun> {
    let analysis = analyze(family, grid, kind)?;
    let lo = resolve_lo(&cfg.lo.mode, family, grid, &analysis.bundle.a_bar, &analysis.bundle.a_bar_prime)?;
    let hcfg = HomodyneConfig::new(lo, cfg.lo.photons, cfg.lo.phase, cfg.samples, cfg.seed)?;
    run_experiment(family, theta_true, &hcfg, cfg.repetitions, grid, kind)
}

/// One homodyne experiment straight from a parsed config (ignores any sweep
/// section); shared with the C ABI.
pub fn simulate_from_config(cfg: &SimulateConfig) -> Result<ExperimentRun> {
    let family = build_family(&cfg.model, &cfg.params)?;
    let grid = cfg.grid.build()?;
    simulate_once(cfg, family.as_ref(), &grid, cfg.deriv_kind()?, cfg.theta_true)
}

/// Allocation optimization plus audit from a parsed config; shared with the
/// C ABI.
pub fn allocate_from_config(cfg: &AllocateConfig) -> Result<AllocateOutcome> {
    let bank = crate::gaussian::SqueezerBank::from_db(&cfg.bank_db)?;
    let (network, optimizer) = optimize_allocation(&bank, cfg.detection_index)?;
    let audit = random_network_audit(&bank, cfg.trials, cfg.seed)?;
    let routing = routing_of(network.origin().expect("optimizer network comes from a unitary"));
    Ok(AllocateOutcome {
        bank_db: cfg.bank_db.clone(),
        variances: bank.variances().to_vec(),
        detection_index: cfg.detection_index,
        optimizer,
        routing,
        audit,
    })
}

/// Full allocation outcome: optimizer certificate plus audit.
#[derive(Serialize)]
pub struct AllocateOutcome {
    pub bank_db: Vec<f64>,
    pub variances: Vec<f64>,
    pub detection_index: usize,
    pub optimizer: crate::allocation::AllocationReport,
    /// Routing as a permutation: `routing[i]` is the squeezer feeding
    /// output mode `i`.
    pub routing: Vec<usize>,
    pub audit: crate::allocation::AuditReport,
}

fn cmd_allocate(args: &CommonArgs) -> Result<i32> {
    let mut cfg: AllocateConfig = config::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = allocate_from_config(&cfg)?;
    ensure_out(&args.out)?;

    let mut csv = CsvFile::create(
        &args.out.join("trials.csv"),
        &["trial", "eigenmode_alignment", "gamma_inv_11", "max_diag_gamma_inv"],
    )?;
    for rec in &out.audit.records {
        csv.row(&[
            CsvCell::Int(rec.trial as i64),
            CsvCell::Float(rec.eigenmode_alignment),
            CsvCell::Float(rec.gamma_inv_11),
            CsvCell::Float(rec.max_diag_gamma_inv),
        ])?;
    }
    let passed = out.audit.passed;
    write_json(&args.out.join("allocation.json"), &out)?;
    if passed {
        println!(
            "allocation optimal: gamma_inv_11 {:.6e} = spectral radius; audit {} trials within bound",
            out.optimizer.gamma_inv_11, out.audit.trials
        );
        Ok(0)
    } else {
        eprintln!("allocation audit FAILED: observed gamma_inv_11 above bound");
        Ok(4)
    }
}

fn routing_of(u: &nalgebra::DMatrix<num_complex::Complex64>) -> Vec<usize> {
    (0..u.nrows())
        .map(|i| {
            (0..u.ncols())
                .max_by(|&a, &b| u[(i, a)].norm().partial_cmp(&u[(i, b)].norm()).unwrap())
                .unwrap_or(i)
        })
        .collect()
}

fn cmd_sweep(args: &CommonArgs) -> Result<i32> {
    let cfg: SweepConfig = config::load(&args.config)?;
    let grid = cfg.grid.build()?;
    let kind = cfg.deriv_kind()?;
    let values = cfg.sweep.values()?;
    ensure_out(&args.out)?;
    let mut csv = CsvFile::create(
        &args.out.join("sweep.csv"),
        &[
            "model",
            "param",
            "value",
            "n",
            "q",
            "i_mean_term",
            "i_cov_term",
            "i_full",
            "gamma_inv_11",
            "bound_full",
            "bound_linearized",
        ],
    )?;
    let mut points = Vec::new();
    for &value in &values {
        let params = config::override_param(&cfg.params, &cfg.sweep.param, value);
        let family = build_family(&cfg.model, &params)?;
        let report = bound_report(family.as_ref(), &grid, kind, cfg.q)?;
        let n = params.get("N").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
        csv.row(&[
            CsvCell::Str(cfg.model.clone()),
            CsvCell::Str(cfg.sweep.param.clone()),
            CsvCell::Float(value),
            CsvCell::Float(n),
            CsvCell::Int(cfg.q as i64),
            CsvCell::Float(report.i_mean_term),
            CsvCell::Float(report.i_cov_term),
            CsvCell::Float(report.i_full),
            CsvCell::Float(report.gamma_inv_11.unwrap_or(f64::NAN)),
            CsvCell::Float(report.delta_theta_min),
            CsvCell::Float(report.bound_linearized.unwrap_or(f64::NAN)),
        ])?;
        points.push((value, report.delta_theta_min));
    }
    let log = cfg.sweep.log.unwrap_or(false) || cfg.sweep.param == "N";
    write_svg(
        &args.out.join("plot.svg"),
        &PlotSpec {
            title: &format!("QCR bound vs {}", cfg.sweep.param),
            x_label: &cfg.sweep.param,
            y_label: "delta theta min",
            log_x: log,
            log_y: log,
            series: vec![Series {
                name: "bound_full",
                points,
                style: SeriesStyle::Line,
                color: "#1f77b4",
            }],
        },
    )?;
    println!("sweep over {} at {} points written", cfg.sweep.param, values.len());
    Ok(0)
}

fn cmd_modes(args: &CommonArgs) -> Result<i32> {
    let cfg: ModesConfig = config::load(&args.config)?;
    let family = build_family(&cfg.model, &cfg.params)?;
    let grid = cfg.grid.build()?;
    let analysis = analyze(family.as_ref(), &grid, cfg.deriv_kind()?)?;
    if analysis.bundle.a_bar_prime.norm() <= 1e-12 {
        return Err(Error::ZeroDetectionMode);
    }
    let count = cfg.count.unwrap_or(family.mode_count() + 3);
    let basis = build_detection_basis_with_waist(
        &analysis.bundle.a_bar_prime,
        count,
        family.seed_waist(),
    )?;
    ensure_out(&args.out)?;
    let mut files = Vec::new();
    for (i, mode) in basis.modes().iter().enumerate() {
        let name = format!("mode_{i:03}.csv");
        write_field_csv(&args.out.join(&name), mode)?;
        files.push(name);
    }
    write_json(&args.out.join("basis.json"), &files)?;
    println!("wrote {count} detection-basis modes");
    Ok(0)
}
