//! One check per acceptance criterion. Each prints a `PASS`/`FAIL` line with
//! the measured quantities and then asserts the criterion.

use std::cell::Cell;
use std::time::Instant;

use collective_cooling::cli::config::{Cutoffs, ScenarioTag};
use collective_cooling::cli::sweep::{run_sweep, write_sweep, SweepAxis, SweepSpec};
use collective_cooling::cli::{oracle_comparison, preset, run_config};
use collective_cooling::integrator::IntegratorConfig;
use collective_cooling::model::{derive_couplings, DerivedCouplings, PhysicalParams};
use collective_cooling::moments::{
    conserved_q, rhs_common, rhs_individual, states_of, MomentRates, MomentState, MomentSystem, ScenarioKind,
};
use collective_cooling::quantum::basis::{ProductBasis, SystemOperators};
use collective_cooling::quantum::dicke::{brute_force_symmetric, build_dicke_ladder, contraction_defect, hp_operators};
use collective_cooling::quantum::lindblad::{lindblad_rhs, DensityMatrix};
use collective_cooling::quantum::oracle_moments;
use collective_cooling::quantum::sparse::max_abs_diff;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

fn verdict(id: u32, title: &str, pass: bool, detail: String) {
    println!("{} criterion {id} ({title}): {detail}", if pass { "PASS" } else { "FAIL" });
}

fn rate_criterion(id: u32, title: &str, name: &str) {
    let cfg = preset(name).unwrap();
    let start = Instant::now();
    let out = run_config(&cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let c = &out.report.comparison;
    let rel = c.relative_error.unwrap();
    let pass = rel <= 0.05 && elapsed < 10.0;
    verdict(
        id,
        title,
        pass,
        format!(
            "fitted rate {:.8} over [{}, {}] vs analytic {:.8}, relative error {:.4} (tolerance 0.05), runtime {:.3} s",
            c.fit.rate, c.fit.fit_window[0], c.fit.fit_window[1], c.analytic_rate, rel, elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_1_common_mode_cooling_rate() {
    rate_criterion(1, "common-mode cooling rate", "fig2a");
}

#[test]
fn criterion_2_individual_mode_cooling_rate() {
    rate_criterion(2, "individual-mode cooling rate", "fig2b");
}

fn identity_residual(s: &MomentState, r: &MomentRates, x: f64, y: f64, kappa: f64) -> (f64, f64) {
    let lhs = r.m;
    let a = x / (2.0 * y) * (kappa * s.k3 + 2.0 * r.k3);
    let b = (x * x) / (y * y) * (kappa * s.n + r.n);
    let scale = [
        lhs,
        x / (2.0 * y) * kappa * s.k3,
        x / y * r.k3,
        x / y * y * s.u1,
        x / y * x * s.u2,
        x * x / (y * y) * kappa * s.n,
        x * x / (y * y) * r.n,
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()));
    ((lhs - (a - b)).abs(), scale)
}

#[test]
fn criterion_3_kappa_identity() {
    let worst = [Cell::new(0.0f64), Cell::new(0.0f64)];
    let strategy =
        ((1u64..=1_000_000_000u64), (1e-3f64..10.0, 1e-3f64..10.0, 0.0f64..10.0), prop::array::uniform6(-1e6f64..1e6));
    let mut runner = TestRunner::new(Config { cases: 10_000, failure_persistence: None, ..Config::default() });
    let result = runner.run(&strategy, |(n_particles, (x, y, kappa), v)| {
        let params = PhysicalParams { n_particles, kappa, ..PhysicalParams::large_ensemble() };
        let c = DerivedCouplings::from_xy(x, y);
        let state = MomentState::from_slice(0.0, &v);
        for (k, rates) in
            [rhs_common(&state, &c, &params).unwrap(), rhs_individual(&state, &c, &params).unwrap()].iter().enumerate()
        {
            let (res, scale) = identity_residual(&state, rates, x, y, kappa);
            let rel = if scale > 0.0 { res / scale } else { res };
            worst[k].set(worst[k].get().max(rel));
            prop_assert!(rel <= 1e-12, "relative residual {rel}");
        }
        Ok(())
    });
    let pass = result.is_ok();
    verdict(
        3,
        "kappa identity",
        pass,
        format!(
            "10000 random states and parameters per scenario, worst relative residual common {:.2e}, individual {:.2e} (tolerance 1e-12)",
            worst[0].get(), worst[1].get()
        ),
    );
    assert!(pass, "{result:?}");
}

#[test]
fn criterion_4_conservation() {
    let mut cfg = preset("fig2a").unwrap();
    cfg.params.kappa = 0.0;
    let c = derive_couplings(&cfg.params).unwrap();
    let t_end = 100.0 / c.x;
    let system = MomentSystem::new(ScenarioKind::common(), &c, &cfg.params);
    let traj = system.simulate(&cfg.initial.state(cfg.params.n_particles), t_end, &cfg.integrator).unwrap();
    let states = states_of(&traj);
    let q0 = conserved_q(&states[0], &c).unwrap();
    let drift = states.iter().map(|s| (conserved_q(s, &c).unwrap() - q0).abs() / q0.abs()).fold(0.0, f64::max);

    let excitation = Cell::new(0.0f64);
    let mut runner = TestRunner::new(Config { cases: 10_000, failure_persistence: None, ..Config::default() });
    let strategy = ((1e-3f64..10.0, 1e-3f64..10.0), prop::array::uniform6(-1e6f64..1e6));
    let result = runner.run(&strategy, |((x, y), v)| {
        let params = PhysicalParams { kappa: 0.0, ..PhysicalParams::large_ensemble() };
        let r = rhs_common(&MomentState::from_slice(0.0, &v), &DerivedCouplings::from_xy(x, y), &params).unwrap();
        let total = (r.m + r.n) + r.s3;
        excitation.set(excitation.get().max(total.abs()));
        prop_assert!(total == 0.0);
        Ok(())
    });
    let pass = drift < 1e-8 && result.is_ok();
    verdict(
        4,
        "conservation at kappa = 0",
        pass,
        format!(
            "max |Q(t) - Q(0)|/|Q(0)| = {drift:.2e} over [0, {t_end}] (tolerance 1e-8); max |d(m+n+s3)/dt| = {:e} over 10000 random states", excitation.get()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_algebra_oracle() {
    let mut ladder_err = 0.0f64;
    for n in 2..=5u32 {
        let bf = brute_force_symmetric(n).unwrap();
        let l = build_dicke_ladder(n as usize).unwrap();
        ladder_err = ladder_err
            .max(max_abs_diff(&bf.sigma_plus, &l.sigma_plus))
            .max(max_abs_diff(&bf.sigma_minus, &l.sigma_minus))
            .max(max_abs_diff(&bf.sigma3, &l.sigma3));
    }
    let mut hp_err = 0.0f64;
    for n in 1..=20 {
        let hp = hp_operators(n, n + 1).unwrap();
        hp_err = hp_err.max(max_abs_diff(&hp.sigma_plus, &build_dicke_ladder(n).unwrap().sigma_plus));
    }
    let mut defect_err = 0.0f64;
    for n in [10usize, 100, 1000, 4096] {
        for (l, d) in contraction_defect(n, 8).unwrap().iter().enumerate() {
            defect_err = defect_err.max((d - 2.0 * l as f64 / n as f64).abs());
        }
    }
    let pass = ladder_err <= 1e-13 && hp_err <= 1e-12 && defect_err <= 1e-14;
    verdict(
        5,
        "algebra oracle",
        pass,
        format!(
            "ladder vs brute force N=2..5 max error {ladder_err:.2e} (1e-13); HP reconstruction N<=20 {hp_err:.2e}; contraction defect vs 2l/N {defect_err:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_lindblad_well_posedness() {
    let cfg = preset("dicke4").unwrap();
    assert_eq!(cfg.cutoffs, Some(Cutoffs { phonon: 6, photon: 6 }));
    let out = run_config(&cfg).unwrap();
    let ex = out.report.exact.unwrap();

    let basis = ProductBasis::common(4, 6, 6).unwrap();
    let ops = SystemOperators::new(&basis).unwrap();
    let c = derive_couplings(&cfg.params).unwrap();
    let vac = DensityMatrix::basis_state(basis.dim(), basis.common_index(0, 0, 0));
    let d = lindblad_rhs(&vac, &ops.hamiltonian(&c), &ops.cavity, cfg.params.kappa).unwrap();
    let vac_norm = d.iter().fold(0.0f64, |m, z| m.max(z.norm()));

    let pass = ex.max_trace_residual <= 1e-10
        && ex.max_hermiticity_residual <= 1e-12
        && ex.min_eigenvalue >= -1e-8
        && vac_norm < 1e-14;
    verdict(
        6,
        "Lindblad well-posedness",
        pass,
        format!(
            "N=4, P=C=6, {} records: trace residual {:.2e}, hermiticity {:.2e}, min eigenvalue {:.2e}, vacuum |drho/dt| {:e}",
            out.rows.len(),
            ex.max_trace_residual,
            ex.max_hermiticity_residual,
            ex.min_eigenvalue,
            vac_norm
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_oracle_equivalence() {
    let cfg = preset("fig2a").unwrap();
    let report = oracle_comparison(&cfg, 1e-6).unwrap();
    let clamped = &report.variants[0];
    let linear = &report.variants[1];
    verdict(
        7,
        "oracle equivalence",
        report.pass,
        format!(
            "clamped moment ODE vs covariance oracle max relative deviation {:.3e} (m {:.2e}, n {:.2e}, s3+N/2 {:.2e}, u1 {:.2e}, u2 {:.2e}, k3 {:.2e}; tolerance 1e-6); \
             covariance integration vs matrix exponential {:.2e}; unfactorized linear closure {:.2e}",
            clamped.max,
            clamped.m,
            clamped.n,
            clamped.s3,
            clamped.u1,
            clamped.u2,
            clamped.k3,
            report.closed_form_deviation,
            linear.max
        ),
    );
    assert!(report.pass);
}

/// Exact run at fixed `x`, `y`, `κ` with `N` particles and two phonons.
fn exact_deviation(n: u64) -> f64 {
    let mut cfg = preset("dicke4").unwrap();
    let (x, y) = (0.25, 1.0);
    let sqrt_n = (n as f64).sqrt();
    cfg.params.n_particles = n;
    cfg.params.g = y / sqrt_n;
    cfg.params.rabi = vec![2.0 * x / (sqrt_n * cfg.params.eta)];
    cfg.cutoffs = Some(Cutoffs { phonon: 4, photon: 4 });
    cfg.initial.m0 = 2.0;
    cfg.t_end = 100.0;
    cfg.fit.window = Some([40.0, 100.0]);
    assert_eq!(cfg.scenario, ScenarioTag::DickeExact);
    let out = run_config(&cfg).unwrap();
    let c = derive_couplings(&cfg.params).unwrap();
    let times: Vec<f64> = out.rows.iter().map(|r| r[0]).collect();
    let oracle = oracle_moments(&MomentState::ground(2.0, n), &c, cfg.params.kappa, n as f64, &times).unwrap();
    out.rows.iter().zip(&oracle).map(|(r, o)| (r[1] - o.m).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_8_small_n_trend() {
    let devs: Vec<f64> = [2u64, 4, 8].iter().map(|&n| exact_deviation(n)).collect();
    let pass = devs[0] > devs[1] && devs[1] > devs[2];
    verdict(
        8,
        "small-N trend",
        pass,
        format!(
            "max |m_exact - m_oracle| for N=2, 4, 8: {:.4e}, {:.4e}, {:.4e} (must decrease)",
            devs[0], devs[1], devs[2]
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_sweep_determinism() {
    let mut base = preset("fig2a").unwrap();
    base.integrator = IntegratorConfig { record_stride: Some(0.5), ..IntegratorConfig::default() };
    let spec = SweepSpec {
        base: Some(base),
        preset: None,
        axes: vec![
            SweepAxis { name: "params.rabi.0".into(), values: vec![0.005, 0.01, 0.02] },
            SweepAxis { name: "params.g".into(), values: vec![0.8e-3, 1e-3, 1.25e-3] },
        ],
        jobs: None,
    };
    let render = |jobs| {
        let rows = run_sweep(&spec, jobs).unwrap();
        let mut buf = Vec::new();
        write_sweep(&mut buf, &spec, &rows).unwrap();
        buf
    };
    let first = render(4);
    let second = render(3);
    let lines = String::from_utf8_lossy(&first).lines().count();
    let pass = first == second && lines == 10;
    verdict(
        9,
        "sweep determinism",
        pass,
        format!("3x3 sweep rendered twice ({} bytes, {} lines): identical = {}", first.len(), lines, first == second),
    );
    assert!(pass);
}
