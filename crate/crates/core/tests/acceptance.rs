//! Acceptance suite: every release-gating property of the crate, one test
//! per criterion, each printing a single PASS/FAIL line (visible under
//! `cargo test -- --nocapture` or on failure).
//!
//! Run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use condensate_core::counting::oracle::{identity_suite, oracle_pk_weights};
use condensate_core::counting::{alpha_moment, pk_weights, reduced_density};
use condensate_core::experiments::{
    derivative_identity_report, commutator_crosscheck, gronwall_envelope, run_convergence,
    run_single, summary_csv, EnvelopeMode, InteractionSpec, LatticeSpec, Phi0Preset, Regime,
    SweepConfig, SweepResult,
};
use condensate_core::grid::Grid;
use condensate_core::manybody::{
    product_state, to_first_quantized, OccupationBasis, SiteOrbital, SymmetricState, TensorBudget,
};
use condensate_core::meanfield::{
    evolve, gp_energy, EvolveConfig, ExternalPotential, KineticKind, MeanFieldKind, Orbital,
};
use condensate_core::scattering::{
    born_approximation, build_micro, micro_norms, positivity_check, scattering_length,
    RadialPotential,
};

fn verdict(id: &str, pass: bool, detail: &str) {
    println!(
        "[{}] {id}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{id} failed: {detail}");
}

fn within(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

fn random_orbital(m: usize, rng: &mut impl Rng) -> SiteOrbital {
    let amps: Vec<Complex64> = (0..m)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    SiteOrbital::from_amplitudes(amps.into_iter().map(|z| z / n).collect()).unwrap()
}

fn hartree_sweep(n_list: Vec<usize>, total_time: f64, dt: f64, seed: u64) -> SweepConfig {
    SweepConfig {
        regime: Regime::Hartree,
        n_list,
        lattice: LatticeSpec {
            sites: 8,
            spacing: 1.0,
        },
        interaction: InteractionSpec {
            profile: vec![1.0, 0.5],
            lambda: 1.0,
            beta: 0.5,
        },
        trap: ExternalPotential::StaticHarmonic { omega: 1.0 },
        phi0: Phi0Preset::Gaussian { width: 1.0 },
        total_time,
        dt,
        sample_stride: 10,
        krylov_dim: 20,
        envelope_c: 1.0,
        envelope_gamma: 0.1,
        delta: 0.1,
        seed,
    }
}

#[test]
fn c01_projector_identity_suite() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 2..=4usize {
        for m in 3..=5usize {
            let report = identity_suite(1000 + (n * 10 + m) as u64, n, m, 20).unwrap();
            worst = worst.max(report.max_identity_residual());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "C01 projector identities",
        worst <= 1e-10 && within(elapsed, Duration::from_secs(30)),
        &format!("max residual {worst:.3e} (tol 1e-10), {elapsed:.2?} (budget 30s)"),
    );
}

#[test]
fn c02_operator_inequalities() {
    let dims = [(2usize, 3usize), (2, 4), (3, 3), (3, 4), (4, 3), (4, 5)];
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    let mut violations = 0usize;
    let mut max_excess = f64::NEG_INFINITY;
    let mut trials = 0usize;
    'outer: loop {
        for &(n, m) in &dims {
            if trials >= 500 {
                break 'outer;
            }
            let report = identity_suite(rng.gen(), n, m, 1).unwrap();
            let excess = report.max_inequality_excess();
            if excess > 1e-12 {
                violations += 1;
            }
            max_excess = max_excess.max(excess);
            trials += 1;
        }
    }
    verdict(
        "C02 operator inequalities",
        violations == 0,
        &format!("{trials} trials, {violations} violations, max excess {max_excess:.3e} (slack 1e-12)"),
    );
}

#[test]
fn c03_density_matrix_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut worst_identity: f64 = 0.0;
    for &(n, m) in &[(2usize, 4usize), (3, 4), (4, 5)] {
        let basis = OccupationBasis::new(n, m).unwrap();
        for _ in 0..10 {
            let psi = SymmetricState::random(basis.clone(), &mut rng);
            let phi = random_orbital(m, &mut rng);
            let mu = reduced_density(&psi, 0.7, &phi).unwrap();
            let a2 = alpha_moment(&psi, &phi, 2.0).unwrap();
            worst_identity = worst_identity.max((1.0 - mu.condensate_overlap - a2).abs());
        }
    }
    // rank-one form on product states
    let mut worst_rank_one: f64 = 0.0;
    for m in [3usize, 5] {
        let phi = random_orbital(m, &mut rng);
        let psi = product_state(&phi, 4).unwrap();
        let h = 0.9;
        let mu = reduced_density(&psi, h, &phi).unwrap();
        let u = phi.amplitudes();
        for x in 0..m {
            for y in 0..m {
                let expect = u[x] * u[y].conj() / h;
                worst_rank_one = worst_rank_one.max((mu.kernel[x * m + y] - expect).norm());
            }
        }
    }
    verdict(
        "C03 density-matrix identity",
        worst_identity <= 1e-12 && worst_rank_one <= 1e-12,
        &format!(
            "depletion identity {worst_identity:.3e}, rank-one deviation {worst_rank_one:.3e} (tol 1e-12)"
        ),
    );
}

#[test]
fn c04_backend_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut worst: f64 = 0.0;
    for &(n, m) in &[(2usize, 3usize), (2, 5), (3, 4), (4, 4), (4, 5)] {
        let basis = OccupationBasis::new(n, m).unwrap();
        for _ in 0..5 {
            let psi = SymmetricState::random(basis.clone(), &mut rng);
            let phi = random_orbital(m, &mut rng);
            let fast = pk_weights(&psi, &phi).unwrap();
            let tensor = to_first_quantized(&psi, TensorBudget::default()).unwrap();
            let slow = oracle_pk_weights(&tensor, &phi);
            for (a, b) in fast.weights.iter().zip(&slow.weights) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    verdict(
        "C04 backend equivalence",
        worst <= 1e-10,
        &format!("max weight deviation {worst:.3e} (tol 1e-10)"),
    );
}

#[test]
fn c05_derivative_identity() {
    let start = Instant::now();
    let cfg = SweepConfig {
        lattice: LatticeSpec {
            sites: 6,
            spacing: 1.0,
        },
        trap: ExternalPotential::None,
        ..hartree_sweep(vec![3], 0.5, 0.01, 5)
    };
    let report = derivative_identity_report(&cfg, 3, &[0.02, 0.01, 0.005]).unwrap();
    let orders_ok = report.orders.iter().all(|o| (o - 2.0).abs() <= 0.3);

    // algebraic cross-check against the direct commutator at N=2, M=4
    let cfg2 = SweepConfig {
        lattice: LatticeSpec {
            sites: 4,
            spacing: 1.0,
        },
        ..cfg.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let basis = OccupationBasis::new(2, 4).unwrap();
    let grid = cfg2.grid().unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let state = SymmetricState::random(basis.clone(), &mut rng);
        let phi = Orbital::new(cfg2.phi0.build(grid), 0.0).unwrap();
        let (decomposed, oracle) = commutator_crosscheck(&cfg2, 2, &state, &phi).unwrap();
        worst = worst.max((decomposed - oracle).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        "C05 derivative identity",
        orders_ok && worst <= 1e-10 && within(elapsed, Duration::from_secs(120)),
        &format!(
            "orders {:?} (target 2±0.3), commutator deviation {worst:.3e} (tol 1e-10), {elapsed:.2?} (budget 2min)",
            report.orders
        ),
    );
}

#[test]
fn c06_hartree_convergence_trend() {
    let start = Instant::now();
    let cfg = hartree_sweep(vec![2, 4, 6, 8], 1.0, 0.01, 6);
    let results = run_convergence(&cfg).unwrap();
    let mut finals = Vec::new();
    let mut fitted = Vec::new();
    let mut dominated = true;
    for r in &results {
        match r {
            SweepResult::Done(out) => {
                finals.push(out.final_alpha2());
                fitted.push(out.fitted_c);
                // the fitted envelope must sit above every sample
                let alpha0 = out.records[0].alpha2;
                for rec in &out.records {
                    let env = gronwall_envelope(
                        alpha0,
                        out.fitted_c,
                        out.particles as f64,
                        rec.t,
                        EnvelopeMode::Hartree,
                        0.0,
                    )
                    .unwrap();
                    if rec.alpha2 > env + 1e-12 {
                        dominated = false;
                    }
                }
            }
            SweepResult::Failed { particles, error } => {
                panic!("N = {particles} failed: {error}")
            }
        }
    }
    let decreasing = finals.windows(2).all(|w| w[1] < w[0]);
    let halved = finals[3] < 0.5 * finals[0];
    let c_ok = fitted.iter().all(|c| *c <= 50.0);
    let elapsed = start.elapsed();
    verdict(
        "C06 Hartree convergence trend",
        decreasing && halved && dominated && c_ok && within(elapsed, Duration::from_secs(600)),
        &format!(
            "alpha_T = {finals:?} (strictly decreasing, last < half of first), fitted C = {fitted:?} (≤ 50), envelope dominates: {dominated}, {elapsed:.2?} (budget 10min)"
        ),
    );
}

#[test]
fn c07_mean_field_solver() {
    let grid = Grid::new(256, 16.0).unwrap();
    // norm conservation over one unit of time
    let sigma = 0.9;
    let phi0 = Orbital::new(
        grid.sample_real(|x| (-(x - 8.0) * (x - 8.0) / (4.0 * sigma * sigma)).exp())
            .normalized(),
        0.0,
    )
    .unwrap();
    let kind = MeanFieldKind::Gp { coupling: 1.2 };
    let trap = ExternalPotential::StaticHarmonic { omega: 1.0 };
    let cfg = EvolveConfig {
        total_time: 1.0,
        dt: 1e-3,
        sample_stride: 100,
        kinetic: KineticKind::Spectral,
    };
    let traj = evolve(&phi0, &cfg, &kind, &trap).unwrap();
    let norm_drift = traj
        .samples
        .iter()
        .map(|o| (o.psi.l2() - 1.0).abs())
        .fold(0.0f64, f64::max);

    // energy drift scales as dt² for a static trap
    let drift = |dt: f64| {
        let cfg = EvolveConfig {
            total_time: 0.5,
            dt,
            sample_stride: usize::MAX,
            kinetic: KineticKind::Spectral,
        };
        let t = evolve(&phi0, &cfg, &kind, &trap).unwrap();
        let e0 = gp_energy(&phi0, &trap, 0.0, &kind, KineticKind::Spectral).e_total;
        let e1 = gp_energy(
            t.samples.last().unwrap(),
            &trap,
            0.5,
            &kind,
            KineticKind::Spectral,
        )
        .e_total;
        (e1 - e0).abs()
    };
    let ratio = drift(4e-3) / drift(2e-3);

    // analytic free spreading
    let amp = (2.0 * std::f64::consts::PI * 0.25).powf(-0.25);
    let free0 = Orbital::new(
        grid.sample(|x| Complex64::new(amp * (-(x - 8.0) * (x - 8.0) / 1.0).exp(), 0.0)),
        0.0,
    )
    .unwrap();
    let t_end = 0.1;
    let free_cfg = EvolveConfig {
        total_time: t_end,
        dt: 1e-4,
        sample_stride: usize::MAX,
        kinetic: KineticKind::Spectral,
    };
    let free_traj = evolve(&free0, &free_cfg, &MeanFieldKind::Free, &ExternalPotential::None)
        .unwrap();
    let out = free_traj.samples.last().unwrap();
    let width = Complex64::new(0.25, t_end);
    let pref = Complex64::new(1.0, t_end / 0.25).powf(-0.5);
    let mut gauss_err: f64 = 0.0;
    for (i, z) in out.psi.values().iter().enumerate() {
        let x = grid.coord(i) - 8.0;
        let expect = amp * pref * (Complex64::new(-x * x, 0.0) / (4.0 * width)).exp();
        gauss_err = gauss_err.max((z - expect).norm());
    }

    verdict(
        "C07 mean-field solver",
        norm_drift <= 1e-10 && (ratio - 4.0).abs() <= 0.5 && gauss_err <= 1e-6,
        &format!(
            "norm drift {norm_drift:.3e} (tol 1e-10), halving ratio {ratio:.2} (4±0.5), Gaussian error {gauss_err:.3e} (tol 1e-6)"
        ),
    );
}

#[test]
fn c08_scattering_oracles() {
    let kappa = 2.0f64;
    let barrier = scattering_length(&RadialPotential::barrier(kappa * kappa, 1.0))
        .unwrap()
        .a;
    let barrier_expect = 1.0 - kappa.tanh() / kappa;
    let barrier_err = (barrier - barrier_expect).abs() / barrier_expect;

    let kw = 1.2f64;
    let well = scattering_length(&RadialPotential::well(kw * kw, 1.0)).unwrap().a;
    let well_expect = 1.0 - kw.tan() / kw;
    let well_err = (well - well_expect).abs() / well_expect.abs();

    let weak = RadialPotential::barrier(1e-3, 1.0);
    let born = born_approximation(&weak);
    let scat = scattering_length(&weak).unwrap().a;
    let born_gap = (scat - born).abs() / born;

    verdict(
        "C08 scattering oracles",
        barrier_err <= 1e-6 && well_err <= 1e-6 && born_gap < 0.01,
        &format!(
            "barrier rel err {barrier_err:.3e}, well rel err {well_err:.3e} (tol 1e-6), Born gap {born_gap:.3e} (< 1%)"
        ),
    );
}

#[test]
fn c09_microstructure_bounds() {
    let start = Instant::now();
    let v = RadialPotential::barrier(1.0, 1.0);
    let mut all_ok = true;
    let mut detail = String::new();
    for &beta1 in &[0.25, 2.0 / 7.0] {
        for &beta2 in &[0.5, 1.0] {
            for &n in &[100.0, 1000.0, 10000.0] {
                let ms = build_micro(&v, beta1, beta2, n, 1.0).unwrap();
                let rep = micro_norms(&ms);
                let eig = positivity_check(&v, &ms).unwrap();
                let scat_ok = ms.scat_residual.abs() <= 1e-8 * (ms.a / n);
                let ok = scat_ok
                    && rep.l2_ok
                    && rep.l1_ok
                    && rep.pointwise_ok
                    && rep.f_monotone
                    && rep.f_above_j
                    && eig >= -1e-8;
                if !ok {
                    all_ok = false;
                    detail.push_str(&format!(
                        "(b1={beta1:.3},b2={beta2},N={n}: scat {} l2 {} l1 {} pw {} mono {} fj {} eig {eig:.2e}) ",
                        scat_ok, rep.l2_ok, rep.l1_ok, rep.pointwise_ok, rep.f_monotone, rep.f_above_j
                    ));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if detail.is_empty() {
        detail = format!("12 structures clean, {elapsed:.2?} (budget 1min)");
    }
    verdict(
        "C09 microstructure bounds",
        all_ok && within(elapsed, Duration::from_secs(60)),
        &detail,
    );
}

#[test]
fn c10_hard_barrier_class() {
    // strong barrier behaves like a hard sphere of its support radius
    let kappa = 200.0f64;
    let v = RadialPotential::barrier(kappa * kappa, 1.0);
    let n = 1000.0;
    let scat = scattering_length(&v.regime_scaled(n, 1.0)).unwrap().a;
    let gap = (scat - 1.0 / n).abs() / (1.0 / n);
    verdict(
        "C10 hard-barrier class",
        gap < 0.01,
        &format!("scat(v_N) = {scat:.6e} vs 1/N = {:.6e}, rel gap {gap:.3e} (< 1%)", 1.0 / n),
    );
}

#[test]
fn c11_envelope_asymptotics() {
    let mut prev = f64::INFINITY;
    let mut values = Vec::new();
    let mut decreasing = true;
    for &n in &[1e3, 1e4, 1e5, 1e6] {
        let e = gronwall_envelope(0.0, 1.0, n, 1.0, EnvelopeMode::Gp { gamma: 0.1 }, 1.0).unwrap();
        values.push(e);
        if e >= prev {
            decreasing = false;
        }
        prev = e;
    }
    verdict(
        "C11 envelope asymptotics",
        decreasing,
        &format!("gp envelope over N = 1e3..1e6: {values:?} (decreasing)"),
    );
}

#[test]
fn c12_determinism() {
    // identity suite twice with one seed
    let a = serde_json::to_string(&identity_suite(99, 3, 4, 10).unwrap()).unwrap();
    let b = serde_json::to_string(&identity_suite(99, 3, 4, 10).unwrap()).unwrap();
    // convergence sweep twice, full file bytes
    let cfg = hartree_sweep(vec![2, 3], 0.1, 0.01, 12);
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let ra = run_convergence(&cfg).unwrap();
    let rb = run_convergence(&cfg).unwrap();
    condensate_core::experiments::write_sweep_outputs(dir_a.path(), &cfg, &ra).unwrap();
    condensate_core::experiments::write_sweep_outputs(dir_b.path(), &cfg, &rb).unwrap();
    let mut same = a == b && summary_csv(&ra) == summary_csv(&rb);
    for name in ["summary.csv", "run_N2.csv", "run_N3.csv", "meta.json"] {
        let fa = std::fs::read(dir_a.path().join(name)).unwrap();
        let fb = std::fs::read(dir_b.path().join(name)).unwrap();
        same = same && fa == fb;
    }
    verdict(
        "C12 determinism",
        same,
        "identity report and sweep outputs byte-identical across reruns",
    );
}

#[test]
fn c06b_free_gas_stays_product() {
    // supporting check for the trend criterion: v = 0 keeps alpha at zero
    let mut cfg = hartree_sweep(vec![3], 0.3, 0.01, 7);
    cfg.interaction.profile = vec![];
    let out = run_single(&cfg, 3).unwrap();
    let worst = out
        .records
        .iter()
        .map(|r| r.alpha.abs())
        .fold(0.0f64, f64::max);
    verdict(
        "C06b non-interacting factorization",
        worst <= 1e-10,
        &format!("max alpha {worst:.3e} along the free trajectory (tol 1e-10)"),
    );
}
