//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use foulwall::calibration::{area_averaged_rate, calibrate_diffusivity, CalibrationSpec};
use foulwall::channel::{assemble_wall_cells, march_channel, ChannelConfig};
use foulwall::interface::{
    fit_logistic, fit_velocity_polynomials, interface_mass_fraction, logistic_xi, LogisticParams,
    VelocityPolynomials,
};
use foulwall::pipeline::{execute, wall_function_rate, write_run, RunOptions, TWO_STEP_CSV, WALL_FUNCTION_CSV};
use foulwall::scenario::Scenario;
use foulwall::subgrid::{
    build_mesh, solve_conservative, solve_momentum, Eddy, Frame, SpeciesWallBc, WallCondition,
};
use foulwall::two_step::{
    deposition_full, deposition_reduced, rate_constant, TwoStepForm, TwoStepInputs, TwoStepParams,
};
use foulwall::wall_law::{nu_t_plus, u_plus};
use foulwall::{solve_wall_cell, FluidState, PropertyModel, SubgridSettings, WallCellBC, WallLawParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and budgets, one block per criterion.
const MOMENTUM_REL_TOL: f64 = 5e-3;
const MOMENTUM_BUDGET: Duration = Duration::from_secs(1);
const CONTINUITY_TOL: f64 = 1e-12;
const FLUX_SPREAD_TOL: f64 = 1e-6;
const FLUX_SETS: usize = 24;
const FLUX_BUDGET: Duration = Duration::from_secs(10);
const TWO_STEP_SAMPLES: usize = 10_000;
const TWO_STEP_GAP_TOL: f64 = 1e-2;
const TWO_STEP_RATIO: f64 = 1e4;
const TWO_STEP_BUDGET: Duration = Duration::from_secs(5);
const ARRHENIUS_TOL: f64 = 1e-10;
const LOGISTIC_REL_TOL: f64 = 1e-3;
const POLY_TOL: f64 = 1e-10;
const FIT_BUDGET: Duration = Duration::from_secs(5);
const CALIBRATION_REL_TOL: f64 = 1e-3;
const CALIBRATION_MAX_ITER: usize = 60;
const CALIBRATION_BUDGET: Duration = Duration::from_secs(120);
const REFINEMENT_TOL: f64 = 1e-2;
const MIN_ORDER: f64 = 1.9;
const Y_PLUS_BAND: [f64; 2] = [15.0, 45.0];
const ENERGY_BALANCE_TOL: f64 = 1e-10;
const CLAMP_SAMPLES: usize = 10_000;
const MIDPOINT_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn default_scenario() -> Scenario {
    Scenario::load(&scenario_path("u0.200.toml")).expect("default scenario loads")
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn wall_law_momentum() -> Outcome {
    let p = WallLawParams::default();
    let props = PropertyModel::constant(1000.0, 8e-4, 3.64e-5);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut nodes = 0;
    for u_tau in [0.0124, 0.0227, 0.05] {
        let bc = WallCellBC {
            t_wall: 330.0,
            bulk: FluidState::new(330.0, vec![4e-4, 1.0 - 4e-4]).unwrap(),
            u_bulk: 0.2,
            species_wall: vec![SpeciesWallBc::Dirichlet(4e-4), SpeciesWallBc::Balance],
            q_wall: 0.0,
            u_tau,
            y_bulk: 2.34e-3,
        };
        let mesh = build_mesh(bc.y_bulk, 300, 1e-4).unwrap();
        let frame = Frame::new(&mesh, &bc, &props, Eddy::WallLaw(p), 0.0).unwrap();
        let u = solve_momentum(&frame);
        // index 0 is the wall point, then the 300 mesh nodes
        for (up, yp) in u.iter().zip(&frame.y_plus).skip(1) {
            worst = worst.max(rel(*up, u_plus(*yp, &p).unwrap()));
            nodes += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        worst < MOMENTUM_REL_TOL && nodes == 900 && elapsed < MOMENTUM_BUDGET,
        format!("max rel err {worst:.2e} over {nodes} nodes, {elapsed:.2?}"),
    )
}

fn wall_law_branches() -> Outcome {
    let p = WallLawParams::default();
    let ys = p.y_star_plus;
    let (below, above) = (ys.next_down(), ys.next_up());
    let jump_u = rel(u_plus(below, &p).unwrap(), u_plus(above, &p).unwrap());
    let inner = nu_t_plus(ys, &p).unwrap();
    let outer = nu_t_plus(above, &p).unwrap();
    let inner_want = (ys / p.a_inner).powi(2);
    let outer_want = p.kappa * above;
    let ok = jump_u < CONTINUITY_TOL
        && rel(inner, inner_want) < CONTINUITY_TOL
        && rel(outer, outer_want) < CONTINUITY_TOL
        && outer - inner > 1.0;
    check(
        ok,
        format!("u+ one-sided gap {jump_u:.1e}; nu_t+ {inner:.6} -> {outer:.6} (jump {:.4})", outer - inner),
    )
}

fn flux_conservation() -> Outcome {
    let props = PropertyModel::water_like();
    let p = WallLawParams::default();
    let settings = SubgridSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    let (mut worst_species, mut worst_energy) = (0.0f64, 0.0f64);
    for _ in 0..FLUX_SETS {
        let t_bulk = rng.random_range(300.0..335.0);
        let x_bulk = rng.random_range(2e-4..6e-4);
        let bc = WallCellBC {
            t_wall: t_bulk + rng.random_range(2.0..30.0),
            bulk: FluidState::new(t_bulk, vec![x_bulk, 1.0 - x_bulk]).unwrap(),
            u_bulk: rng.random_range(0.1..0.5),
            species_wall: vec![
                SpeciesWallBc::Dirichlet(x_bulk * rng.random_range(0.0..1.5)),
                SpeciesWallBc::Balance,
            ],
            q_wall: 52_500.0,
            u_tau: rng.random_range(5e-3..4e-2),
            y_bulk: rng.random_range(1e-3..3e-3),
        };
        let r = solve_wall_cell(&bc, &props, &p, &settings).map_err(|e| format!("solve failed: {e}"))?;
        worst_species = worst_species.max(r.residuals.species_flux_spread);
        worst_energy = worst_energy.max(r.residuals.energy_flux_spread);
    }
    let elapsed = start.elapsed();
    check(
        worst_species < FLUX_SPREAD_TOL && worst_energy < FLUX_SPREAD_TOL && elapsed < FLUX_BUDGET,
        format!("{FLUX_SETS} sets: species spread {worst_species:.1e}, energy spread {worst_energy:.1e}, {elapsed:.2?}"),
    )
}

fn two_step_asymptotics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let (mut in_regime, mut worst_gap, mut bound_violations) = (0usize, 0.0f64, 0usize);
    for _ in 0..TWO_STEP_SAMPLES {
        let params = TwoStepParams {
            mass_transfer_coefficient: 10f64.powf(rng.random_range(-6.0..-2.0)),
            form: TwoStepForm::Full,
            ..TwoStepParams::default()
        };
        let mut s = TwoStepInputs {
            c_bulk: 0.0,
            c_sat: rng.random_range(0.01..0.5),
            u_tau: rng.random_range(1e-3..0.1),
            mu: rng.random_range(3e-4..1e-3),
            rho: rng.random_range(950.0..1000.0),
            temperature: rng.random_range(300.0..360.0),
        };
        let kr = rate_constant(s.temperature, &params).unwrap();
        let d = params.mass_transfer_coefficient * s.rho * s.u_tau * s.u_tau / (kr * s.mu);
        let ratio = 10f64.powf(rng.random_range(-2.0..8.0));
        let dc = d / ratio;
        s.c_bulk = s.c_sat + dc;
        let full = deposition_full(&s, &params).unwrap();
        let reduced = deposition_reduced(&s, &params).unwrap();
        let cap = (params.mass_transfer_coefficient * dc).min(reduced);
        if full > cap * (1.0 + 1e-12) {
            bound_violations += 1;
        }
        if ratio >= TWO_STEP_RATIO {
            in_regime += 1;
            worst_gap = worst_gap.max(rel(full, reduced));
        }
    }
    let elapsed = start.elapsed();
    check(
        bound_violations == 0 && worst_gap < TWO_STEP_GAP_TOL && in_regime > 0 && elapsed < TWO_STEP_BUDGET,
        format!(
            "{TWO_STEP_SAMPLES} tuples, {in_regime} with D/dC >= 1e4: max gap {worst_gap:.1e}, {bound_violations} bound violations, {elapsed:.2?}"
        ),
    )
}

fn arrhenius_anchor() -> Outcome {
    let params = TwoStepParams {
        k0: 1.62e22,
        activation_energy: 148_000.0,
        gas_constant: 8.3145,
        ..TwoStepParams::default()
    };
    let got = rate_constant(343.15, &params).unwrap();
    let want = 1.62e22 * (-148_000.0f64 / (8.3145 * 343.15)).exp();
    let err = rel(got, want);
    check(err < ARRHENIUS_TOL, format!("k_r(343.15 K) = {got:.10e}, rel err {err:.1e}"))
}

fn fit_recovery() -> Outcome {
    let truth = VelocityPolynomials {
        a_coeffs: [4.05e-4, 3e-5, -2e-5, 1e-5],
        b_coeffs: [350.0, -60.0, 20.0],
        c_coeffs: [80.0, 40.0, -20.0],
        validity: [0.2, 0.4],
    };
    let start = Instant::now();
    let velocities = [0.2, 0.3, 0.333, 0.4];
    let mut worst_logistic = 0.0f64;
    let mut exact = Vec::new();
    for &u in &velocities {
        let planted = truth.params_at_velocity(u).unwrap();
        let samples: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 300.0 + 80.0 * i as f64 / 39.0;
                (t, logistic_xi(t, &planted).unwrap())
            })
            .collect();
        let fit = fit_logistic(&samples).map_err(|e| format!("logistic fit at u = {u}: {e}"))?;
        for (g, w) in [(fit.params.a, planted.a), (fit.params.b, planted.b), (fit.params.c, planted.c)] {
            worst_logistic = worst_logistic.max(rel(g, w));
        }
        exact.push((u, planted));
    }
    let fitted = fit_velocity_polynomials(&exact).map_err(|e| e.to_string())?.polynomials;
    let pairs = fitted
        .a_coeffs
        .iter()
        .zip(&truth.a_coeffs)
        .chain(fitted.b_coeffs.iter().zip(&truth.b_coeffs))
        .chain(fitted.c_coeffs.iter().zip(&truth.c_coeffs));
    let worst_poly = pairs.map(|(g, w)| rel(*g, *w)).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    check(
        worst_logistic < LOGISTIC_REL_TOL && worst_poly < POLY_TOL && elapsed < FIT_BUDGET,
        format!("logistic max rel err {worst_logistic:.1e}, polynomial max rel err {worst_poly:.1e}, {elapsed:.2?}"),
    )
}

fn calibration_round_trip() -> Outcome {
    let scenario = default_scenario();
    let (n_axial, n_nodes) = (scenario.file.channel.n_axial, scenario.file.subgrid.n_nodes);
    let field = march_channel(&scenario.file.channel, &scenario.props, &scenario.file.wall_law).unwrap();
    let cells = assemble_wall_cells(&field, &scenario.interface_model().unwrap(), &scenario.props).unwrap();
    let areas = field.cell_areas();
    let d0 = 2.1e-5;
    let start = Instant::now();
    let target = wall_function_rate(&scenario, &cells, &areas, d0, None).map_err(|e| e.to_string())?;
    let spec = CalibrationSpec::new(target, 1e-6, 1e-3);
    let c = calibrate_diffusivity(&spec, |d| wall_function_rate(&scenario, &cells, &areas, d, None))
        .map_err(|e| format!("calibration failed: {e}"))?;
    let elapsed = start.elapsed();
    let err = rel(c.diffusivity, d0);
    check(
        n_axial == 20
            && n_nodes == 300
            && err < CALIBRATION_REL_TOL
            && c.trace.len() <= CALIBRATION_MAX_ITER
            && elapsed < CALIBRATION_BUDGET,
        format!("D0 {d0:e}, D* {:e} (rel err {err:.1e}) in {} iterations, {elapsed:.2?}", c.diffusivity, c.trace.len()),
    )
}

fn grid_convergence() -> Outcome {
    let base = default_scenario();
    let rate = |n: usize| -> Result<f64, String> {
        let mut s = base.clone();
        s.file.subgrid.n_nodes = n;
        let out = execute(&s, &RunOptions::default()).map_err(|e| e.to_string())?;
        let run = &out.runs[0];
        let j: Vec<f64> = run.rows.iter().map(|r| r.j_dep_kg_m2_s).collect();
        let a: Vec<f64> = run.rows.iter().map(|r| r.area_m2).collect();
        area_averaged_rate(&j, &a).map_err(|e| e.to_string())
    };
    let (j300, j1200) = (rate(300)?, rate(1200)?);
    let delta = rel(j300, j1200);

    // G(y) = 1 + y^2 on [0, 1] with phi(0) = 0, phi(1) = 1 has flux 4 / pi
    let exact_flux = 1.0 / std::f64::consts::FRAC_PI_4;
    let error = |n: usize| {
        let y = build_mesh(1.0, n, 1e-2).unwrap().with_wall();
        let g: Vec<f64> = y.iter().map(|v| 1.0 + v * v).collect();
        let s = solve_conservative(&y, &g, None, WallCondition::Value(0.0), 1.0).unwrap();
        (s.mean_flux() - exact_flux).abs()
    };
    let order = [21, 41, 81]
        .iter()
        .map(|&n| (error(n) / error(2 * n - 1)).log2())
        .fold(f64::INFINITY, f64::min);
    check(
        delta < REFINEMENT_TOL && order >= MIN_ORDER,
        format!("j_dep 300 nodes {j300:.6e} vs 1200 nodes {j1200:.6e} (rel {delta:.1e}); manufactured order {order:.3}"),
    )
}

fn channel_plausibility() -> Outcome {
    let props = PropertyModel::water_like();
    let p = WallLawParams::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for u_in in [0.2, 0.4] {
        let cfg = ChannelConfig {
            u_in,
            ..ChannelConfig::default()
        };
        let f = march_channel(&cfg, &props, &p).map_err(|e| e.to_string())?;
        let (lo, hi) = f
            .stations
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.y_plus), hi.max(s.y_plus)));
        let rho_in = props.eval(cfg.t_in).unwrap().rho;
        let cp = props.heat_capacity;
        let absorbed: f64 = f
            .stations
            .iter()
            .map(|s| {
                let rise = f.bulk_temperature_at(s.x + 0.5 * s.dx, rho_in, cp)
                    - f.bulk_temperature_at(s.x - 0.5 * s.dx, rho_in, cp);
                rho_in * cfg.u_in * cfg.gap * cp * rise
            })
            .sum();
        let supplied = cfg.q_wall * cfg.heated_walls as f64 * cfg.length;
        let balance = rel(absorbed, supplied);
        let in_band = lo >= Y_PLUS_BAND[0] && hi <= Y_PLUS_BAND[1];
        ok &= in_band && balance < ENERGY_BALANCE_TOL;
        lines.push(format!("u_in {u_in}: y+ {lo:.1}..{hi:.1}, balance {balance:.1e}"));
    }
    check(ok, lines.join("; "))
}

fn interface_clamp() -> Outcome {
    let props = PropertyModel::water_like();
    let vp = default_scenario().file.interface_bc.polynomials.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut violations = 0;
    let mut clamped = 0;
    for _ in 0..CLAMP_SAMPLES {
        let t = rng.random_range(props.t_min..props.t_max);
        let u = rng.random_range(vp.validity[0]..=vp.validity[1]);
        let x_sat = props.x_sat(t).unwrap();
        let x = interface_mass_fraction(t, u, &vp, x_sat, 6.5).map_err(|e| e.to_string())?;
        if x < x_sat {
            violations += 1;
        }
        if x == x_sat {
            clamped += 1;
        }
    }
    let mut worst_mid = 0.0f64;
    for (a, b, c) in [(4e-4, 340.0, 60.0), (4.1e-4, 330.0, 95.0), (3.5e-4, 355.0, 25.0), (1.0, 1.0, 1.0)] {
        let p = LogisticParams { a, b, c };
        worst_mid = worst_mid.max(rel(logistic_xi(b, &p).unwrap(), a / 2.0));
    }
    check(
        violations == 0 && worst_mid < MIDPOINT_TOL,
        format!("{CLAMP_SAMPLES} samples ({clamped} clamped), {violations} below X_sat; midpoint rel err {worst_mid:.1e}"),
    )
}

fn reproducibility() -> Outcome {
    let scenario = default_scenario();
    let tmp = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for jobs in [1, 4] {
        let dir = tmp.path().join(format!("jobs{jobs}"));
        let opts = RunOptions {
            jobs: Some(jobs),
            profiles: true,
            out: Some(dir.clone()),
            ..RunOptions::default()
        };
        let out = execute(&scenario, &opts).map_err(|e| e.to_string())?;
        write_run(&out, &scenario, &opts, &dir).map_err(|e| e.to_string())?;
        dirs.push(dir);
    }
    let mut files: Vec<PathBuf> = [WALL_FUNCTION_CSV, TWO_STEP_CSV, "summary.csv", "comparison.csv"]
        .iter()
        .map(PathBuf::from)
        .collect();
    let mut profiles: Vec<PathBuf> = std::fs::read_dir(dirs[0].join("profiles"))
        .unwrap()
        .map(|e| Path::new("profiles").join(e.unwrap().file_name()))
        .collect();
    profiles.sort();
    files.extend(profiles);
    let differing: Vec<String> = files
        .iter()
        .filter(|f| std::fs::read(dirs[0].join(f)).ok() != std::fs::read(dirs[1].join(f)).ok())
        .map(|f| f.display().to_string())
        .collect();
    check(
        differing.is_empty() && files.len() > 4,
        format!("{} CSVs compared between --jobs 1 and --jobs 4, differing: {differing:?}", files.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("wall-law consistency", wall_law_momentum),
        ("wall-law branch values", wall_law_branches),
        ("flux conservation", flux_conservation),
        ("two-step asymptotics", two_step_asymptotics),
        ("Arrhenius anchor", arrhenius_anchor),
        ("fit recovery", fit_recovery),
        ("calibration round trip", calibration_round_trip),
        ("grid convergence", grid_convergence),
        ("channel plausibility", channel_plausibility),
        ("interface clamp", interface_clamp),
        ("reproducibility", reproducibility),
    ];
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        writeln!(out, "criterion {:>2} {tag} {name}: {detail}", i + 1).unwrap();
    }
    writeln!(out, "acceptance: {} passed, {failed} failed", criteria.len() - failed).unwrap();
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
