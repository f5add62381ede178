//! Batch pipeline: channel, interface BC, wall-cell solves and reporting.
//!
//! Everything is computed in memory first; files are written only once a
//! run has completed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicUsize;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{area_averaged_rate, calibrate_diffusivity, Calibration};
use crate::channel::{assemble_wall_cells, march_channel, FrozenFlowField};
use crate::error::{Error, ErrorKind, Result};
use crate::frozen::{load_frozen, save_frozen};
use crate::interface::{fit_logistic, fit_velocity_polynomials, read_profile_csv, Fragment, LogisticFit};
use crate::props::PropertyModel;
use crate::scenario::Scenario;
use crate::subgrid::{solve_wall_cell, DepositionResult, SpeciesWallBc, WallCellBC};
use crate::two_step::{concentration, deposition, TwoStepInputs};

pub const WALL_FUNCTION_CSV: &str = "cells_wall_function.csv";
pub const TWO_STEP_CSV: &str = "cells_two_step.csv";
pub const FROZEN_FLOW_FILE: &str = "frozen_flow.txt";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Reuse this flow field instead of marching the channel.
    pub frozen_flow: Option<PathBuf>,
    /// Dump subgrid profiles for every wall cell.
    pub profiles: bool,
    /// Overrides the scenario's output directory.
    pub out: Option<PathBuf>,
    /// Worker threads for the wall-cell solves; all cores when `None`.
    pub jobs: Option<usize>,
}

impl RunOptions {
    pub fn output_dir(&self, scenario: &Scenario) -> PathBuf {
        self.out.clone().unwrap_or_else(|| scenario.output_dir())
    }
}

/// One row of a per-cell result CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub cell: usize,
    pub x_m: f64,
    /// Heated area per unit span [m2/m].
    pub area_m2: f64,
    #[serde(rename = "T_wall_K")]
    pub t_wall: f64,
    #[serde(rename = "T_bulk_K")]
    pub t_bulk: f64,
    pub u_bulk_m_s: f64,
    pub u_tau_m_s: f64,
    #[serde(rename = "X_wall")]
    pub x_wall: f64,
    pub j_dep_kg_m2_s: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    WallFunction,
    TwoStep,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::WallFunction => "wall_function",
            Self::TwoStep => "two_step",
        }
    }

    fn csv_name(self) -> &'static str {
        match self {
            Self::WallFunction => WALL_FUNCTION_CSV,
            Self::TwoStep => TWO_STEP_CSV,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelRun {
    pub model: ModelKind,
    pub rows: Vec<CellRow>,
    pub area_averaged: f64,
    /// Cells with an undersaturated bulk (two-step only).
    pub undersaturated: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub field: FrozenFlowField,
    pub runs: Vec<ModelRun>,
    /// Subgrid solutions, kept when profiles were requested.
    pub profiles: Option<Vec<DepositionResult>>,
    pub comparison: Option<Comparison>,
    pub channel_seconds: f64,
}

impl RunOutput {
    pub fn run(&self, model: ModelKind) -> Option<&ModelRun> {
        self.runs.iter().find(|r| r.model == model)
    }
}

pub fn flow_field(scenario: &Scenario, frozen: Option<&Path>) -> Result<FrozenFlowField> {
    match frozen {
        Some(p) => load_frozen(p),
        None => march_channel(&scenario.file.channel, &scenario.props, &scenario.file.wall_law),
    }
}

/// Runs `f` on a thread pool of the requested size.
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == Some(0) {
        return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Solves every wall cell; results keep the cell order.
pub fn solve_cells(cells: &[WallCellBC], scenario: &Scenario, props: &PropertyModel, jobs: Option<usize>) -> Result<Vec<DepositionResult>> {
    let s = &scenario.file;
    with_pool(jobs, || {
        cells
            .par_iter()
            .map(|bc| solve_wall_cell(bc, props, &s.wall_law, &s.subgrid))
            .collect::<Vec<_>>()
    })?
    .into_iter()
    .collect()
}

fn wall_x(bc: &WallCellBC) -> f64 {
    bc.species_wall
        .iter()
        .find_map(|w| match w {
            SpeciesWallBc::Dirichlet(x) => Some(*x),
            _ => None,
        })
        .unwrap_or(0.0)
}

pub fn wall_function_rows(field: &FrozenFlowField, cells: &[WallCellBC], results: &[DepositionResult], dep: usize) -> Vec<CellRow> {
    field
        .stations
        .iter()
        .zip(cells)
        .zip(results)
        .enumerate()
        .map(|(i, ((s, bc), r))| CellRow {
            cell: i,
            x_m: s.x,
            area_m2: s.dx,
            t_wall: s.t_wall,
            t_bulk: s.t_bulk,
            u_bulk_m_s: s.u_bulk,
            u_tau_m_s: s.u_tau,
            x_wall: wall_x(bc),
            j_dep_kg_m2_s: r.j_dep[dep],
            iterations: r.iterations,
            residual: r.residuals.picard_change,
        })
        .collect()
}

/// Two-step rates at every station, wall-temperature properties.
pub fn two_step_rows(field: &FrozenFlowField, scenario: &Scenario) -> Result<(Vec<CellRow>, usize)> {
    let props = &scenario.props;
    let params = &scenario.file.two_step;
    let undersaturated = AtomicUsize::new(0);
    let rows = field
        .stations
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let wall = props.eval(s.t_wall)?;
            let bulk = props.eval(s.t_bulk)?;
            let inputs = TwoStepInputs {
                c_bulk: concentration(bulk.rho, field.config.x_in),
                c_sat: concentration(wall.rho, wall.x_sat),
                u_tau: s.u_tau,
                mu: wall.mu,
                rho: wall.rho,
                temperature: s.t_wall,
            };
            Ok(CellRow {
                cell: i,
                x_m: s.x,
                area_m2: s.dx,
                t_wall: s.t_wall,
                t_bulk: s.t_bulk,
                u_bulk_m_s: s.u_bulk,
                u_tau_m_s: s.u_tau,
                x_wall: wall.x_sat,
                j_dep_kg_m2_s: deposition(&inputs, params, &undersaturated)?,
                iterations: 0,
                residual: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, undersaturated.into_inner()))
}

fn averaged(rows: &[CellRow]) -> Result<f64> {
    let j: Vec<f64> = rows.iter().map(|r| r.j_dep_kg_m2_s).collect();
    let a: Vec<f64> = rows.iter().map(|r| r.area_m2).collect();
    area_averaged_rate(&j, &a)
}

/// Computes a full scenario run without touching the filesystem (apart
/// from reading a frozen flow field or interface data).
pub fn execute(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutput> {
    let start = Instant::now();
    let field = flow_field(scenario, opts.frozen_flow.as_deref())?;
    let channel_seconds = start.elapsed().as_secs_f64();
    let model = scenario.file.fouling_model;
    let mut runs = Vec::new();
    let mut profiles = None;

    if model.wall_function() {
        let t = Instant::now();
        let interface = scenario.interface_model()?;
        let cells = assemble_wall_cells(&field, &interface, &scenario.props)?;
        let results = solve_cells(&cells, scenario, &scenario.props, opts.jobs)?;
        let rows = wall_function_rows(&field, &cells, &results, scenario.props.depositing_index());
        runs.push(ModelRun {
            model: ModelKind::WallFunction,
            area_averaged: averaged(&rows)?,
            rows,
            undersaturated: 0,
            seconds: t.elapsed().as_secs_f64(),
        });
        if opts.profiles {
            profiles = Some(results);
        }
    }
    if model.two_step() {
        let t = Instant::now();
        let (rows, undersaturated) = two_step_rows(&field, scenario)?;
        runs.push(ModelRun {
            model: ModelKind::TwoStep,
            area_averaged: averaged(&rows)?,
            rows,
            undersaturated,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    let comparison = match runs.as_slice() {
        [a, b] => Some(compare_rows(&a.rows, &b.rows)?),
        _ => None,
    };
    Ok(RunOutput {
        field,
        runs,
        profiles,
        comparison,
        channel_seconds,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Ingest {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_cells_csv(path: &Path) -> Result<Vec<CellRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<CellRow>, _>>()
        .map_err(|e| csv_error(path, e))?;
    if rows.is_empty() {
        return Err(Error::Ingest {
            path: path.to_path_buf(),
            message: "no cells".into(),
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SummaryRow {
    model: &'static str,
    cells: usize,
    area_m2: f64,
    area_averaged_j_dep_kg_m2_s: f64,
    max_j_dep_kg_m2_s: f64,
    undersaturated_cells: usize,
}

#[derive(Serialize)]
struct Manifest {
    version: &'static str,
    scenario: String,
    config_sha256: String,
    fouling_model: crate::scenario::FoulingModel,
    frozen_flow: Option<String>,
    jobs: Option<usize>,
    profiles: bool,
    timings: Timings,
}

#[derive(Serialize)]
struct Timings {
    channel_s: f64,
    wall_function_s: Option<f64>,
    two_step_s: Option<f64>,
}

/// Writes all artifacts of a completed run into `dir`.
pub fn write_run(output: &RunOutput, scenario: &Scenario, opts: &RunOptions, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    for run in &output.runs {
        write_rows(&dir.join(run.model.csv_name()), &run.rows)?;
    }
    let summary: Vec<SummaryRow> = output
        .runs
        .iter()
        .map(|r| SummaryRow {
            model: r.model.name(),
            cells: r.rows.len(),
            area_m2: r.rows.iter().map(|c| c.area_m2).sum(),
            area_averaged_j_dep_kg_m2_s: r.area_averaged,
            max_j_dep_kg_m2_s: r.rows.iter().map(|c| c.j_dep_kg_m2_s).fold(f64::NEG_INFINITY, f64::max),
            undersaturated_cells: r.undersaturated,
        })
        .collect();
    write_rows(&dir.join("summary.csv"), &summary)?;
    if let Some(c) = &output.comparison {
        write_comparison(c, dir)?;
    }
    if let Some(results) = &output.profiles {
        write_profiles(results, &scenario.props, &dir.join("profiles"))?;
    }
    let seconds = |m| output.run(m).map(|r| r.seconds);
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        scenario: scenario.path.display().to_string(),
        config_sha256: scenario.config_hash.clone(),
        fouling_model: scenario.file.fouling_model,
        frozen_flow: opts.frozen_flow.as_ref().map(|p| p.display().to_string()),
        jobs: opts.jobs,
        profiles: opts.profiles,
        timings: Timings {
            channel_s: output.channel_seconds,
            wall_function_s: seconds(ModelKind::WallFunction),
            two_step_s: seconds(ModelKind::TwoStep),
        },
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&dir.join("manifest.toml"), text)
}

fn write_profiles(results: &[DepositionResult], props: &PropertyModel, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    for (i, r) in results.iter().enumerate() {
        let path = dir.join(format!("cell_{i:04}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        let mut header = vec!["y_m".to_string(), "y_plus".into(), "u_plus".into(), "T_K".into()];
        header.extend(props.species.iter().map(|s| format!("X_{}", s.name)));
        w.write_record(&header).map_err(|e| csv_error(&path, e))?;
        for k in 0..r.y.len() {
            let mut rec = vec![r.y[k], r.y_plus[k], r.u_plus[k], r.temperature[k]];
            rec.extend(r.mass_fractions.iter().map(|x| x[k]));
            w.write_record(rec.iter().map(|v| v.to_string())).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Loads, runs and writes a scenario. Returns the output directory.
///
/// A numerical failure leaves a `diagnostic.txt` in the output directory.
pub fn run_scenario(path: &Path, opts: &RunOptions) -> Result<PathBuf> {
    let scenario = Scenario::load(path)?;
    let dir = opts.output_dir(&scenario);
    match execute(&scenario, opts) {
        Ok(output) => {
            write_run(&output, &scenario, opts, &dir)?;
            Ok(dir)
        }
        Err(e) => {
            if e.kind() == ErrorKind::Numerical {
                write_diagnostic(&dir, &e)?;
            }
            Err(e)
        }
    }
}

pub fn write_diagnostic(dir: &Path, e: &Error) -> Result<()> {
    create_dir(dir)?;
    let mut text = format!("error: {e}\n");
    if let Error::NotConverged { history, .. } = e {
        text.push_str("history:\n");
        for (i, h) in history.iter().enumerate() {
            let _ = writeln!(text, "{} {h:e}", i + 1);
        }
    }
    write_file(&dir.join("diagnostic.txt"), text)
}

/// Computes the channel and saves the flow field.
pub fn run_frozen(path: &Path, opts: &RunOptions) -> Result<PathBuf> {
    let scenario = Scenario::load(path)?;
    let field = march_channel(&scenario.file.channel, &scenario.props, &scenario.file.wall_law)?;
    let dir = opts.output_dir(&scenario);
    create_dir(&dir)?;
    let file = dir.join(FROZEN_FLOW_FILE);
    save_frozen(&field, &file)?;
    Ok(file)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub cell: usize,
    pub x_m: f64,
    pub j_a: f64,
    pub j_b: f64,
    /// `j_a / j_b`; 1 when both vanish.
    pub ratio: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub average_a: f64,
    pub average_b: f64,
    pub area_averaged_ratio: f64,
    pub max_abs_difference: f64,
    pub mean_abs_difference: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        1.0
    } else {
        a / b
    }
}

pub fn compare_rows(a: &[CellRow], b: &[CellRow]) -> Result<Comparison> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} vs {} stations", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("comparison runs"));
    }
    if let Some((p, q)) = a
        .iter()
        .zip(b)
        .find(|(p, q)| (p.x_m - q.x_m).abs() > 1e-12 * p.x_m.abs().max(q.x_m.abs()))
    {
        return Err(Error::GridMismatch(format!("cell {} at x = {} vs x = {}", p.cell, p.x_m, q.x_m)));
    }
    let rows: Vec<ComparisonRow> = a
        .iter()
        .zip(b)
        .map(|(p, q)| ComparisonRow {
            cell: p.cell,
            x_m: p.x_m,
            j_a: p.j_dep_kg_m2_s,
            j_b: q.j_dep_kg_m2_s,
            ratio: ratio(p.j_dep_kg_m2_s, q.j_dep_kg_m2_s),
            difference: p.j_dep_kg_m2_s - q.j_dep_kg_m2_s,
        })
        .collect();
    let (average_a, average_b) = (averaged(a)?, averaged(b)?);
    let diffs = rows.iter().map(|r| r.difference.abs());
    Ok(Comparison {
        area_averaged_ratio: ratio(average_a, average_b),
        max_abs_difference: diffs.clone().fold(0.0, f64::max),
        mean_abs_difference: diffs.sum::<f64>() / rows.len() as f64,
        average_a,
        average_b,
        rows,
    })
}

pub fn write_comparison(c: &Comparison, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    write_rows(&dir.join("comparison.csv"), &c.rows)?;
    let mut text = String::new();
    let _ = writeln!(text, "stations:                 {}", c.rows.len());
    let _ = writeln!(text, "area-averaged j_dep (a):  {:e} kg/(m2 s)", c.average_a);
    let _ = writeln!(text, "area-averaged j_dep (b):  {:e} kg/(m2 s)", c.average_b);
    let _ = writeln!(text, "area-averaged ratio a/b:  {}", c.area_averaged_ratio);
    let _ = writeln!(text, "max |a - b|:              {:e}", c.max_abs_difference);
    let _ = writeln!(text, "mean |a - b|:             {:e}", c.mean_abs_difference);
    let (lo, hi) = c
        .rows
        .iter()
        .map(|r| r.ratio)
        .filter(|r| r.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r), h.max(r)));
    if lo <= hi {
        let _ = writeln!(text, "local ratio range:        {lo} .. {hi}");
    }
    write_file(&dir.join("comparison.txt"), text)
}

/// Compares two per-cell CSVs and writes the report into `dir`.
pub fn run_compare(a: &Path, b: &Path, dir: &Path) -> Result<Comparison> {
    let c = compare_rows(&read_cells_csv(a)?, &read_cells_csv(b)?)?;
    write_comparison(&c, dir)?;
    Ok(c)
}

/// Area-averaged wall-function rate of `cells` for diffusivity `d`.
pub fn wall_function_rate(scenario: &Scenario, cells: &[WallCellBC], areas: &[f64], d: f64, jobs: Option<usize>) -> Result<f64> {
    let props = scenario.props.with_diffusivity(d);
    let results = solve_cells(cells, scenario, &props, jobs)?;
    let dep = props.depositing_index();
    let j: Vec<f64> = results.iter().map(|r| r.j_dep[dep]).collect();
    area_averaged_rate(&j, areas)
}

/// Calibrates the diffusivity; writes the trace and result into the output
/// directory.
pub fn run_calibration(path: &Path, opts: &RunOptions) -> Result<(Calibration, PathBuf)> {
    let scenario = Scenario::load(path)?;
    let spec = scenario
        .file
        .calibration
        .ok_or_else(|| Error::Config("scenario has no [calibration] block".into()))?;
    let field = flow_field(&scenario, opts.frozen_flow.as_deref())?;
    let interface = scenario.interface_model()?;
    let cells = assemble_wall_cells(&field, &interface, &scenario.props)?;
    let areas = field.cell_areas();
    let dir = opts.output_dir(&scenario);
    let calibration = match calibrate_diffusivity(&spec, |d| wall_function_rate(&scenario, &cells, &areas, d, opts.jobs)) {
        Ok(c) => c,
        Err(e) => {
            if e.kind() == ErrorKind::Numerical {
                write_diagnostic(&dir, &e)?;
            }
            return Err(e);
        }
    };
    create_dir(&dir)?;
    write_rows(&dir.join("calibration_trace.csv"), &calibration.trace)?;
    let text = format!(
        "target_rate = {:e}\ndiffusivity = {:e}\nrate = {:e}\niterations = {}\n",
        spec.target_rate,
        calibration.diffusivity,
        calibration.rate,
        calibration.trace.len()
    );
    write_file(&dir.join("calibration.toml"), text)?;
    Ok((calibration, dir))
}

#[derive(Debug, Clone, Serialize)]
struct LogisticRow {
    file: String,
    u_in: f64,
    a: f64,
    b: f64,
    c: f64,
    rmse: f64,
    sigma_a: f64,
    sigma_b: f64,
    sigma_c: f64,
    iterations: usize,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub fits: Vec<(f64, LogisticFit)>,
    pub fragment: Option<PathBuf>,
}

/// Fits the logistic per data file, then the velocity polynomials. The
/// per-velocity report is written even when the polynomial step fails.
pub fn run_fit(files: &[PathBuf], dir: &Path) -> Result<FitOutcome> {
    if files.is_empty() {
        return Err(Error::EmptyInput("fit data files"));
    }
    let mut fits = Vec::new();
    let mut rows = Vec::new();
    for f in files {
        let data = read_profile_csv(f)?;
        let fit = fit_logistic(&data.fit_samples())?;
        let se = fit.std_errors();
        rows.push(LogisticRow {
            file: f.display().to_string(),
            u_in: data.u_in,
            a: fit.params.a,
            b: fit.params.b,
            c: fit.params.c,
            rmse: fit.rmse,
            sigma_a: se[0],
            sigma_b: se[1],
            sigma_c: se[2],
            iterations: fit.iterations,
        });
        fits.push((data.u_in, fit));
    }
    create_dir(dir)?;
    write_rows(&dir.join("logistic_fits.csv"), &rows)?;

    let per_velocity: Vec<_> = fits.iter().map(|(u, f)| (*u, f.params)).collect();
    let mut report = String::new();
    for r in &rows {
        let _ = writeln!(
            report,
            "u_in = {}: a = {:e}, b = {}, c = {}, rmse = {:e}",
            r.u_in, r.a, r.b, r.c, r.rmse
        );
    }
    let poly = fit_velocity_polynomials(&per_velocity);
    match &poly {
        Ok(v) => {
            let _ = writeln!(
                report,
                "polynomial rms residuals: a {:e}, b {:e}, c {:e}",
                v.residuals[0], v.residuals[1], v.residuals[2]
            );
        }
        Err(e) => {
            let _ = writeln!(report, "polynomial step: {e}");
        }
    }
    write_file(&dir.join("fit_report.txt"), &report)?;
    let v = poly?;
    let path = dir.join("interface_fragment.toml");
    let text = format!("# fitted interface parameters\n{}", Fragment::new(v.polynomials).to_toml());
    write_file(&path, text)?;
    Ok(FitOutcome {
        fits,
        fragment: Some(path),
    })
}
