//! The convergence laboratory: N-sweeps of the coupled exact/mean-field
//! dynamics, Gronwall envelopes, initial-condition diagnostics and
//! reproducible CSV/JSON outputs.

pub mod config;
pub mod convergence;
pub mod envelope;
pub mod identity;

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{ConfigError, InteractionSpec, LatticeSpec, Phi0Preset, Regime, SweepConfig};
pub use convergence::{condition_report, run_single, ConditionReport, RunError, RunOutcome, RunRecord};
pub use envelope::{gronwall_envelope, EnvelopeError, EnvelopeMode};
pub use identity::{
    commutator_crosscheck, derivative_identity_report, IdentityConvergenceReport,
};

/// Worker cap: the environment variable wins, then the N-count.
pub const THREADS_ENV: &str = "CONDENSATE_LAB_THREADS";

fn worker_count(jobs: usize) -> usize {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    cap.min(jobs.max(1))
}

/// Per-N outcome or recorded failure; the sweep never aborts siblings.
#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum SweepResult {
    Done(RunOutcome),
    Failed { particles: usize, error: String },
}

/// Runs every N of the config on a bounded worker pool; results come back
/// sorted by N regardless of scheduling.
pub fn run_convergence(cfg: &SweepConfig) -> Result<Vec<SweepResult>, ConfigError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cfg.n_list.len()))
        .build()
        .expect("worker pool");
    let mut results: Vec<(usize, SweepResult)> = pool.install(|| {
        cfg.n_list
            .par_iter()
            .map(|&n| {
                let out = match run_single(cfg, n) {
                    Ok(o) => SweepResult::Done(o),
                    Err(e) => SweepResult::Failed {
                        particles: n,
                        error: e.to_string(),
                    },
                };
                (n, out)
            })
            .collect()
    });
    results.sort_by_key(|(n, _)| *n);
    Ok(results.into_iter().map(|(_, r)| r).collect())
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

/// CSV rows of one run: t, alpha, alpha2, overlap, energies, envelope.
pub fn run_csv(out: &RunOutcome) -> String {
    let mut s = String::from(
        "t,alpha,alpha2,condensate_overlap,energy_per_particle,mean_field_energy,envelope\n",
    );
    for r in &out.records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt(r.t),
            fmt(r.alpha),
            fmt(r.alpha2),
            fmt(r.condensate_overlap),
            fmt(r.energy_per_particle),
            fmt(r.mean_field_energy),
            fmt(r.envelope),
        ));
    }
    s
}

/// Summary CSV over N: the final convergence measure ⟨Ψ,(n̂)²Ψ⟩, its
/// envelope and the initial-condition diagnostics. Failed runs carry NaN
/// data columns.
pub fn summary_csv(results: &[SweepResult]) -> String {
    let mut s = String::from("N,alpha_T,envelope_T,cond1,cond2\n");
    for r in results {
        match r {
            SweepResult::Done(out) => {
                let last = out.records.last().expect("at least the t=0 row");
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    out.particles,
                    fmt(last.alpha2),
                    fmt(last.envelope),
                    fmt(out.cond1),
                    fmt(out.cond2),
                ));
            }
            SweepResult::Failed { particles, .. } => {
                s.push_str(&format!("{particles},NaN,NaN,NaN,NaN\n"));
            }
        }
    }
    s
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    version: &'static str,
    config: &'a SweepConfig,
    fitted_c: Vec<(usize, f64)>,
    failures: Vec<(usize, String)>,
}

/// Writes run_N*.csv, summary.csv and meta.json into `dir`. Output bytes
/// are a pure function of the config (worker scheduling cannot leak in).
pub fn write_sweep_outputs(
    dir: &Path,
    cfg: &SweepConfig,
    results: &[SweepResult],
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut fitted = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            SweepResult::Done(out) => {
                fs::write(
                    dir.join(format!("run_N{}.csv", out.particles)),
                    run_csv(out),
                )?;
                fitted.push((out.particles, out.fitted_c));
            }
            SweepResult::Failed { particles, error } => {
                failures.push((*particles, error.clone()));
            }
        }
    }
    fs::write(dir.join("summary.csv"), summary_csv(results))?;
    let meta = SweepMeta {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        fitted_c: fitted,
        failures,
    };
    fs::write(
        dir.join("meta.json"),
        serde_json::to_string_pretty(&meta).expect("serializable meta"),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{InteractionSpec, LatticeSpec, Phi0Preset};
    use crate::meanfield::ExternalPotential;

    fn tiny_config() -> SweepConfig {
        SweepConfig {
            regime: Regime::Hartree,
            n_list: vec![2, 3],
            lattice: LatticeSpec {
                sites: 5,
                spacing: 1.0,
            },
            interaction: InteractionSpec {
                profile: vec![0.8, 0.3],
                lambda: 1.0,
                beta: 0.5,
            },
            trap: ExternalPotential::StaticHarmonic { omega: 1.0 },
            phi0: Phi0Preset::Gaussian { width: 0.7 },
            total_time: 0.1,
            dt: 0.01,
            sample_stride: 5,
            krylov_dim: 20,
            envelope_c: 2.0,
            envelope_gamma: 0.1,
            delta: 0.1,
            seed: 9,
        }
    }

    #[test]
    fn sweep_outputs_are_deterministic() {
        let cfg = tiny_config();
        let a = run_convergence(&cfg).unwrap();
        let b = run_convergence(&cfg).unwrap();
        assert_eq!(summary_csv(&a), summary_csv(&b));
        for (x, y) in a.iter().zip(&b) {
            if let (SweepResult::Done(ox), SweepResult::Done(oy)) = (x, y) {
                assert_eq!(run_csv(ox), run_csv(oy));
            } else {
                panic!("runs failed");
            }
        }
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let mut cfg = tiny_config();
        // second N blows past the default tensor-free basis guard
        cfg.n_list = vec![2, 120];
        let results = run_convergence(&cfg).unwrap();
        assert!(matches!(results[0], SweepResult::Done(_)));
        match &results[1] {
            SweepResult::Failed { particles, .. } => assert_eq!(*particles, 120),
            other => panic!("expected failure, got {other:?}"),
        }
        let csv = summary_csv(&results);
        assert!(csv.contains("120,NaN"));
    }

    #[test]
    fn config_validation_catches_bad_input() {
        let mut cfg = tiny_config();
        cfg.n_list = vec![4, 2];
        assert!(matches!(cfg.validate(), Err(ConfigError::BadNList)));
        let mut cfg = tiny_config();
        cfg.interaction.profile = vec![1.0, 0.5, 0.2, 0.1];
        assert!(matches!(cfg.validate(), Err(ConfigError::ProfileTooWide)));
        let mut cfg = tiny_config();
        cfg.dt = 0.0;
        assert!(matches!(cfg.validate(), Err(ConfigError::BadTimes)));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = tiny_config();
        let text = toml::to_string(&cfg).unwrap();
        let back: SweepConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.n_list, cfg.n_list);
        assert_eq!(back.lattice.sites, cfg.lattice.sites);
        assert!(matches!(back.trap, ExternalPotential::StaticHarmonic { .. }));
    }
}
