mod checks;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use condensate_core::experiments::{
    condition_report, gronwall_envelope, run_convergence, write_sweep_outputs, EnvelopeMode,
    Regime, SweepConfig,
};
use condensate_core::grid::Grid;
use condensate_core::meanfield::{evolve, trajectory_csv, EvolveConfig, MeanFieldKind, Orbital};
use condensate_core::scattering::{build_micro, micro_norms, positivity_check};

use config::{ChecksConfig, FileConfig, KindSpec, MeanFieldRunConfig, ScatterConfig};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_CHECKS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "condensate-lab",
    about = "N-boson lattice dynamics, mean-field solvers and scattering structure",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file (defaults are used when omitted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed override for randomized suites
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress output
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact-identity and invariant suites
    Checks,
    /// Sweep the compensated scattering structure over N
    Scatter,
    /// Single mean-field trajectory
    Meanfield,
    /// N-convergence sweep of the coupled dynamics
    Converge,
    /// Envelope and initial-condition tables
    Report,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, String> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config file {}: {e}", p.display()))?;
            toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", p.display()))
        }
    }
}

fn ensure_out(dir: &Path) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))
}

fn cmd_checks(cfg: &ChecksConfig, seed: u64, out: &Path, quiet: bool) -> Result<bool, String> {
    let report = checks::run_checks(cfg, seed).map_err(|e| format!("checks failed: {e}"))?;
    let path = out.join("checks.json");
    let json = serde_json::to_string_pretty(&report).expect("serializable report");
    std::fs::write(&path, &json).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    if !quiet {
        eprintln!(
            "checks: max identity residual {:.3e}, inequalities {}/{} clean, pass = {}",
            report.max_identity_residual,
            report.inequalities.trials
                - report.inequalities.q1q2_violations
                - report.inequalities.one_body_violations,
            report.inequalities.trials,
            report.pass
        );
        eprintln!("wrote {}", path.display());
    }
    Ok(report.pass)
}

fn cmd_scatter(cfg: &ScatterConfig, out: &Path, quiet: bool) -> Result<(), String> {
    let v = cfg.potential.build();
    let mut csv =
        String::from("N,a,R_out,l2_g,l1_g,bound_l2,bound_l1,pointwise_ok,lowest_eig,beta1,beta2\n");
    for &b1 in &cfg.beta1 {
        for &b2 in &cfg.beta2 {
            if b1 >= b2 {
                continue;
            }
            for &n in &cfg.n_list {
                let ms = build_micro(&v, b1, b2, n, cfg.big_r)
                    .map_err(|e| format!("microstructure at N={n}, b1={b1}, b2={b2}: {e}"))?;
                let rep = micro_norms(&ms);
                let eig = positivity_check(&v, &ms)
                    .map_err(|e| format!("positivity at N={n}: {e}"))?;
                csv.push_str(&format!(
                    "{n},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.12e},{b1},{b2}\n",
                    ms.a / n,
                    ms.outer_radius,
                    rep.l2_g,
                    rep.l1_g,
                    rep.bound_l2,
                    rep.bound_l1,
                    rep.pointwise_ok,
                    eig
                ));
            }
        }
    }
    let path = out.join("scatter.csv");
    std::fs::write(&path, csv).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    if !quiet {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_meanfield(cfg: &MeanFieldRunConfig, out: &Path, quiet: bool) -> Result<(), String> {
    let grid = Grid::new(cfg.points, cfg.length).map_err(|e| format!("bad grid: {e}"))?;
    let kind = match &cfg.kind {
        KindSpec::Free => MeanFieldKind::Free,
        KindSpec::Gp { coupling } => MeanFieldKind::Gp {
            coupling: *coupling,
        },
        KindSpec::Hartree { profile } => {
            let m = cfg.points;
            let values = (0..m)
                .map(|i| {
                    let d = i.min(m - i);
                    condensate_core::Complex64::new(profile.get(d).copied().unwrap_or(0.0), 0.0)
                })
                .collect();
            MeanFieldKind::Hartree(
                condensate_core::grid::GridFunction::new(grid, values).expect("length matches"),
            )
        }
    };
    let phi0 = Orbital::new(cfg.phi0.build(grid), 0.0).map_err(|e| format!("bad phi0: {e}"))?;
    let evolve_cfg = EvolveConfig {
        total_time: cfg.total_time,
        dt: cfg.dt,
        sample_stride: cfg.sample_stride,
        kinetic: cfg.kinetic,
    };
    let traj =
        evolve(&phi0, &evolve_cfg, &kind, &cfg.trap).map_err(|e| format!("evolution failed: {e}"))?;
    let csv = trajectory_csv(&traj.samples, &kind, &cfg.trap, cfg.kinetic);
    let path = out.join("trajectory.csv");
    std::fs::write(&path, csv).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    let report_path = out.join("regularity.json");
    std::fs::write(
        &report_path,
        serde_json::to_string_pretty(&traj.report).expect("serializable report"),
    )
    .map_err(|e| format!("cannot write {}: {e}", report_path.display()))?;
    if !quiet {
        eprintln!(
            "meanfield: {} samples, sup|phi| = {:.6}, decay integral = {:.6}",
            traj.samples.len(),
            traj.report.sup_linf,
            traj.report.decay_integral
        );
        eprintln!("wrote {} and {}", path.display(), report_path.display());
    }
    Ok(())
}

fn cmd_converge(cfg: &SweepConfig, out: &Path, quiet: bool) -> Result<(), String> {
    let results = run_convergence(cfg).map_err(|e| format!("bad sweep config: {e}"))?;
    write_sweep_outputs(out, cfg, &results).map_err(|e| format!("cannot write outputs: {e}"))?;
    if !quiet {
        for r in &results {
            match r {
                condensate_core::experiments::SweepResult::Done(o) => eprintln!(
                    "N = {}: alpha_T = {:.6e}, fitted C = {:.3}",
                    o.particles,
                    o.final_alpha2(),
                    o.fitted_c
                ),
                condensate_core::experiments::SweepResult::Failed { particles, error } => {
                    eprintln!("N = {particles}: failed ({error})")
                }
            }
        }
        eprintln!("wrote {}", out.join("summary.csv").display());
    }
    Ok(())
}

fn cmd_report(cfg: &SweepConfig, out: &Path, quiet: bool) -> Result<(), String> {
    let mode = match cfg.regime {
        Regime::Hartree => EnvelopeMode::Hartree,
        Regime::GpProxy => EnvelopeMode::Gp {
            gamma: cfg.envelope_gamma,
        },
    };
    let mut csv = String::from("N,cond1,cond2,cond1_rescaled,cond2_rescaled,envelope_T\n");
    for &n in &cfg.n_list {
        let rep = condition_report(cfg, n).map_err(|e| format!("conditions at N={n}: {e}"))?;
        let envelope = gronwall_envelope(
            0.0,
            cfg.envelope_c,
            n as f64,
            cfg.total_time,
            mode,
            cfg.total_time,
        )
        .map_err(|e| format!("envelope at N={n}: {e}"))?;
        csv.push_str(&format!(
            "{n},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            rep.cond1, rep.cond2, rep.cond1_rescaled, rep.cond2_rescaled, envelope
        ));
    }
    let path = out.join("report.csv");
    std::fs::write(&path, csv).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    if !quiet {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run() -> Result<bool, (u8, String)> {
    let cli = Cli::try_parse().map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let file = load_config(cli.config.as_deref()).map_err(|m| (EXIT_CONFIG, m))?;
    ensure_out(&cli.out).map_err(|m| (EXIT_CONFIG, m))?;
    let seed = cli.seed.or(file.seed).unwrap_or(0);

    match cli.command {
        Command::Checks => {
            let cfg = file.checks.unwrap_or_default();
            let pass = cmd_checks(&cfg, seed, &cli.out, cli.quiet)
                .map_err(|m| (EXIT_NUMERIC, m))?;
            Ok(pass)
        }
        Command::Scatter => {
            let cfg = file.scatter.unwrap_or_default();
            cmd_scatter(&cfg, &cli.out, cli.quiet).map_err(|m| (EXIT_NUMERIC, m))?;
            Ok(true)
        }
        Command::Meanfield => {
            let cfg = file.meanfield.unwrap_or_default();
            cmd_meanfield(&cfg, &cli.out, cli.quiet).map_err(|m| (EXIT_NUMERIC, m))?;
            Ok(true)
        }
        Command::Converge => {
            let mut cfg = file.sweep.unwrap_or_else(config::default_sweep);
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            cfg.validate().map_err(|e| (EXIT_CONFIG, e.to_string()))?;
            cmd_converge(&cfg, &cli.out, cli.quiet).map_err(|m| (EXIT_NUMERIC, m))?;
            Ok(true)
        }
        Command::Report => {
            let cfg = file.sweep.unwrap_or_else(config::default_sweep);
            cfg.validate().map_err(|e| (EXIT_CONFIG, e.to_string()))?;
            cmd_report(&cfg, &cli.out, cli.quiet).map_err(|m| (EXIT_NUMERIC, m))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECKS),
        Err((code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
