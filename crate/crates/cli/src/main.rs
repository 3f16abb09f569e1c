//! Command-line driver. Exit codes: 0 on success, 2 when a physics
//! assertion fails, 1 on configuration or computation errors.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdcar_cli::config::ExperimentConfig;
use sdcar_cli::experiments::{self, SweepStatus};
use sdcar_cli::report;
use sdcar_cli::ExperimentError;

#[derive(Parser)]
#[command(name = "sdcar", version, about = "Self-dual lattice fermion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the disorder master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for JSON-lines / CSV results (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the experiment's primary tolerance (transport target for
    /// sweep, gap threshold for gapfind/crossing).
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Z2 index between the path endpoints.
    Index,
    /// Sweep the path: gap, index and flow diagnostics per grid point.
    Sweep,
    /// Locate the gap closing on the path by index bisection.
    Gapfind,
    /// Analyze the crossing: one-sided projections, splitting, weak* jump.
    Crossing,
    /// Disorder ensemble statistics at the path base point.
    Ensemble,
    /// Combes-Thomas bound verification over the ensemble.
    CtCheck,
    /// Fast internal consistency checks.
    Selftest,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, ExperimentError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| ExperimentError::Parse("--config <file> is required".into()))?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(seed) = cli.seed {
        cfg.disorder.master_seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.flow.transport_tol = tol;
        cfg.tolerances.gap_escalation = tol;
    }
    Ok(cfg)
}

fn writer(out: &Option<PathBuf>, name: &str) -> Result<Box<dyn Write>, ExperimentError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| ExperimentError::Io(e.to_string()))?;
            let f = File::create(dir.join(name)).map_err(|e| ExperimentError::Io(e.to_string()))?;
            Ok(Box::new(f))
        }
        None => Ok(Box::new(io::stdout())),
    }
}

/// Ok(true): success. Ok(false): an assertion failed (exit 2).
fn run(cli: &Cli) -> Result<bool, ExperimentError> {
    match cli.command {
        Command::Index => {
            let cfg = load_config(cli)?;
            let out = experiments::index_endpoints(&cfg)?;
            report::write_jsonl_one(writer(&cli.out, "index.jsonl")?, "index", &cfg, &out)?;
            eprintln!(
                "sigma = {:+}, intersection dim {}, kernel dim {}",
                out.report.sigma, out.report.dim_intersection, out.report.kernel_dim
            );
            Ok(out.report.methods_agree)
        }
        Command::Sweep => {
            let cfg = load_config(cli)?;
            let out = experiments::run_sweep(&cfg)?;
            report::write_jsonl(writer(&cli.out, "sweep.jsonl")?, "sweep", &cfg, &out.points)?;
            if cli.out.is_some() {
                report::sweep_csv(writer(&cli.out, "sweep.csv")?, &out)?;
            }
            match out.status {
                SweepStatus::GapClosingDetected { s_near } => {
                    eprintln!(
                        "gap closing detected near s = {s_near}; run `sdcar gapfind` to locate it"
                    );
                    Ok(true)
                }
                SweepStatus::Completed => {
                    let all_plus = out.points.iter().all(|p| p.sigma == 1);
                    let det_ok = out
                        .points
                        .iter()
                        .all(|p| ((p.det[0] - 1.0).powi(2) + p.det[1].powi(2)).sqrt() <= 1e-6);
                    eprintln!(
                        "sweep complete: gap_min = {:.6}, max transport error = {:.3e}",
                        out.gap_min,
                        out.points.iter().map(|p| p.transport_error).fold(0.0, f64::max)
                    );
                    if !all_plus {
                        eprintln!("assertion failed: sigma deviated from +1 on a gapped sweep");
                    }
                    if !det_ok {
                        eprintln!("assertion failed: det V drifted from +1");
                    }
                    Ok(all_plus && det_ok && out.flow_converged)
                }
            }
        }
        Command::Gapfind => {
            let cfg = load_config(cli)?;
            let out = experiments::find_gap_closing(&cfg)?;
            report::write_jsonl_one(writer(&cli.out, "gapfind.jsonl")?, "gapfind", &cfg, &out)?;
            if out.multiple_crossing_warning {
                eprintln!(
                    "warning: {} crossings detected; analyzing the first",
                    out.n_crossings
                );
            }
            eprintln!("gap closes at s = {} (gap {:.3e})", out.s_tilde, out.gap_at_s_tilde);
            Ok(true)
        }
        Command::Crossing => {
            let cfg = load_config(cli)?;
            let out = experiments::crossing_analysis(&cfg, None)?;
            report::write_jsonl_one(
                writer(&cli.out, "crossing.jsonl")?,
                "crossing",
                &cfg,
                &out.summary,
            )?;
            eprintln!(
                "crossing at s = {}: sigma across = {:+}, weak* jump {:.6} >= {:.6}",
                out.summary.s_tilde,
                out.summary.sigma_across,
                out.summary.weakstar_jump,
                out.summary.jump_lower_bound
            );
            let ok = out.summary.sigma_across == -1
                && out.summary.splitting_residual <= 1e-8
                && out.summary.jump_lower_bound > 0.0;
            Ok(ok)
        }
        Command::Ensemble => {
            let cfg = load_config(cli)?;
            let out = experiments::ensemble_run(&cfg, cfg.disorder.n_realizations)?;
            report::write_jsonl(
                writer(&cli.out, "ensemble.jsonl")?,
                "ensemble",
                &cfg,
                &out.records,
            )?;
            report::write_jsonl_one(
                writer(&cli.out, "ensemble_aggregate.jsonl")?,
                "ensemble",
                &cfg,
                &out.aggregate,
            )?;
            eprintln!(
                "{} realizations: mean gap {:.6}, min gap {:.6}, sigma +1/{} -1/{}",
                out.aggregate.n,
                out.aggregate.mean_gap,
                out.aggregate.min_gap,
                out.aggregate.sigma_plus,
                out.aggregate.sigma_minus
            );
            Ok(true)
        }
        Command::CtCheck => {
            let cfg = load_config(cli)?;
            let out = experiments::ct_check(&cfg, cfg.disorder.n_realizations)?;
            report::write_jsonl(writer(&cli.out, "ct.jsonl")?, "ct-check", &cfg, &out.records)?;
            eprintln!(
                "{} instances: {} violations, worst general ratio {:.4}, worst gapped ratio {:.4}",
                out.records.len(),
                out.total_violations,
                out.worst_general_ratio,
                out.worst_gapped_ratio
            );
            Ok(out.total_violations == 0)
        }
        Command::Selftest => selftest(),
    }
}

fn selftest() -> Result<bool, ExperimentError> {
    use num_complex::Complex64 as C64;
    use sdcar::pfaffian::{pfaffian, pfaffian_perm_sum, random_skew};
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        println!("[selftest] {name}: {}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };

    // Pfaffian production vs permutation-sum oracle
    let mut pf_ok = true;
    for n in [2usize, 4, 6, 8] {
        let m = random_skew(n, 7 * n as u64);
        let a = pfaffian(&m)?;
        let b = pfaffian_perm_sum(&m)?;
        pf_ok &= (a - b).norm() < 1e-12 * b.norm().max(1.0);
    }
    check("pfaffian oracle agreement", pf_ok);

    // Pf^2 = det
    let m = random_skew(12, 99);
    let pf = pfaffian(&m)?;
    check("pfaffian squared is determinant", (pf * pf - m.determinant()).norm() < 1e-9);

    // index methods agree on a rotated pair
    let space = sdcar::SelfDualSpace::synthetic(4);
    let u = sdcar::random_bogoliubov(&space, 11);
    let p0 = sdcar::BasisProjection::canonical(&space);
    let p1 = sdcar::BasisProjection::new(
        space.clone(),
        u.matrix().adjoint() * p0.matrix() * u.matrix(),
    )?;
    let rep = sdcar::z2::z2_index(&p0, &p1, Some(u.matrix()))?;
    check("index methods agree", rep.methods_agree && rep.sigma == 1);

    // CAR anticommutator under the tracial state
    let s = sdcar::qf::tracial_symbol(&space);
    let m2 = sdcar::qf::Monomial::from_indices(&space, &[0, 1]);
    let v = sdcar::qf::evaluate(&s, &m2)?;
    check("tracial two-point value", (v - C64::new(0.5, 0.0)).norm() < 1e-12);

    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
