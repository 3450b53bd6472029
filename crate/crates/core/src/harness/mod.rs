//! Experiment harness behind the command-line tool: simulation, solver runs,
//! parameter sweeps, and symmetric/asymmetric comparisons.
//!
//! Every command writes into the config's output directory. Given the same
//! config and seed, all files except the wall-clock field of `summary.json`
//! are byte-identical across runs and thread counts.

pub mod config;
pub mod presets;

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::operator::{CdpOperator, MeasurementOperator, Operator, PtychoOperator};
use crate::par;
use crate::pnp::{pnp_run, snr_db, PnpConfig, RunHistory};

pub use config::{
    apply_override, simulate, ExperimentConfig, Geometry, Input, NoiseConfig, Problem, Scene,
};

/// Threshold used by the symmetric/asymmetric comparison.
pub const SYMMETRY_TOL_DB: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ScanLayout {
    height: usize,
    width: usize,
    wrap: bool,
    positions: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SceneStamp {
    scene_hash: String,
    problem: Problem,
    frames: usize,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::format(path, e.to_string()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes the scene files: `truth.c128`, the operator (`mask_k.c128`, or
/// `probe.c128` with `positions.json`), `data.f64`, `scene.json` and
/// `config.json`.
pub fn write_scene(dir: &Path, cfg: &ExperimentConfig, scene: &Scene) -> Result<()> {
    ensure_dir(dir)?;
    io::write_c128(&dir.join("truth.c128"), &scene.truth)?;
    match &scene.op {
        Operator::Cdp(op) => {
            for (k, m) in op.masks().iter().enumerate() {
                io::write_c128(&dir.join(format!("mask_{k}.c128")), m)?;
            }
        }
        Operator::Ptycho(op) => {
            io::write_c128(&dir.join("probe.c128"), op.probe())?;
            let (height, width) = op.image_shape();
            write_json(
                &dir.join("positions.json"),
                &ScanLayout {
                    height,
                    width,
                    wrap: op.wraps(),
                    positions: op.positions().to_vec(),
                },
            )?;
        }
    }
    io::write_data(&dir.join("data.f64"), &scene.data)?;
    write_json(
        &dir.join("scene.json"),
        &SceneStamp {
            scene_hash: cfg.scene_hash(),
            problem: cfg.problem,
            frames: scene.op.num_frames(),
        },
    )?;
    let mut text = cfg.to_json();
    text.push('\n');
    write_text(&dir.join("config.json"), &text)
}

/// Reads a scene written by [`write_scene`]. Returns `None` when `dir` holds
/// no scene, and a configuration error when it holds one simulated from a
/// different config.
pub fn read_scene(dir: &Path, cfg: &ExperimentConfig) -> Result<Option<Scene>> {
    let stamp_path = dir.join("scene.json");
    if !stamp_path.exists() {
        return Ok(None);
    }
    let stamp: SceneStamp = read_json(&stamp_path)?;
    if stamp.scene_hash != cfg.scene_hash() {
        return Err(Error::config(
            "output",
            format!(
                "{} holds measurements simulated from a different config; rerun simulate",
                dir.display()
            ),
        ));
    }
    let truth = io::read_c128(&dir.join("truth.c128"))?;
    let op: Operator = match stamp.problem {
        Problem::Cdp => {
            let masks = (0..stamp.frames)
                .map(|k| io::read_c128(&dir.join(format!("mask_{k}.c128"))))
                .collect::<Result<Vec<_>>>()?;
            CdpOperator::new(masks)?.into()
        }
        Problem::Ptycho => {
            let probe = io::read_c128(&dir.join("probe.c128"))?;
            let layout: ScanLayout = read_json(&dir.join("positions.json"))?;
            PtychoOperator::new(
                layout.height,
                layout.width,
                probe,
                layout.positions,
                layout.wrap,
            )?
            .into()
        }
    };
    let data = io::read_data(&dir.join("data.f64"))?;
    if data.len() != op.output_len() {
        return Err(Error::dim(op.output_len(), data.len()));
    }
    let mut solver = cfg.solver;
    solver.seed = cfg.init_seed();
    Ok(Some(Scene {
        truth,
        op,
        data,
        solver,
    }))
}

/// Simulates the scene and writes it to `cfg.output`.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Scene> {
    let scene = simulate(cfg)?;
    write_scene(&cfg.output, cfg, &scene)?;
    Ok(scene)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_snr_db: f64,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub config_hash: String,
}

/// Scene from disk if present, otherwise simulated in memory.
fn scene_for(cfg: &ExperimentConfig) -> Result<Scene> {
    match read_scene(&cfg.output, cfg)? {
        Some(scene) => Ok(scene),
        None => simulate(cfg),
    }
}

/// Runs the solver without touching the filesystem.
pub fn solve(scene: &Scene) -> Result<(crate::image::ComplexImage, RunHistory)> {
    let out = pnp_run(&scene.op, &scene.data, &scene.solver, Some(&scene.truth))?;
    Ok((out.image, out.history))
}

/// Runs the solver on the scene in `cfg.output` (simulating it in memory if
/// absent) and writes `recon.c128`, `recon.png`, `history.csv` and
/// `summary.json`. On divergence the partial history is still written.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let scene = scene_for(cfg)?;
    let dir = &cfg.output;
    ensure_dir(dir)?;
    let start = Instant::now();
    let (image, history) = match solve(&scene) {
        Ok(r) => r,
        Err(Error::Diverged {
            iteration,
            rel_err,
            history,
        }) => {
            write_text(&dir.join("history.csv"), &history.to_csv())?;
            return Err(Error::Diverged {
                iteration,
                rel_err,
                history,
            });
        }
        Err(e) => return Err(e),
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    io::write_c128(&dir.join("recon.c128"), &image)?;
    io::write_magnitude_png(&dir.join("recon.png"), &image)?;
    write_text(&dir.join("history.csv"), &history.to_csv())?;
    let summary = RunSummary {
        final_snr_db: snr_db(&image, &scene.truth)?,
        iterations: history.len(),
        wall_seconds,
        config_hash: cfg.hash(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Lambda,
    R,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::R => "r",
        }
    }

    fn apply(&self, solver: &mut PnpConfig, factor: f64) {
        match self {
            SweepAxis::Lambda => solver.lambda *= factor,
            SweepAxis::R => solver.r *= factor,
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepAxis::Lambda),
            "r" => Ok(SweepAxis::R),
            _ => Err(Error::config(
                "axis",
                format!("expected lambda or r, got `{s}`"),
            )),
        }
    }
}

/// `2^{-l}, …, 2^{l}`.
pub fn dyadic_factors(l: u32) -> Vec<f64> {
    let l = l as i32;
    (-l..=l).map(|e| 2f64.powi(e)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub factor: f64,
    pub lambda: f64,
    pub r: f64,
    pub final_snr_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    /// Index of the best row (first one on ties).
    pub argmax: usize,
    /// Both end rows strictly below the maximum.
    pub endpoints_below_peak: bool,
}

impl SweepReport {
    pub const CSV_HEADER: &'static str = "factor,lambda,r,final_snr_db";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for row in &self.rows {
            s.push_str(&format!(
                "{:e},{:e},{:e},{:e}\n",
                row.factor, row.lambda, row.r, row.final_snr_db
            ));
        }
        s
    }

    fn from_rows(axis: SweepAxis, rows: Vec<SweepRow>) -> Self {
        let mut argmax = 0;
        for (i, row) in rows.iter().enumerate() {
            if row.final_snr_db > rows[argmax].final_snr_db {
                argmax = i;
            }
        }
        let peak = rows[argmax].final_snr_db;
        let endpoints_below_peak = rows.len() > 2
            && rows[0].final_snr_db < peak
            && rows[rows.len() - 1].final_snr_db < peak;
        Self {
            axis,
            rows,
            argmax,
            endpoints_below_peak,
        }
    }
}

/// Computes the sweep without writing files. Points run concurrently.
pub fn sweep(scene: &Scene, axis: SweepAxis, factors: &[f64]) -> Result<SweepReport> {
    if factors.is_empty() {
        return Err(Error::config("factors", "sweep needs at least one factor"));
    }
    let results = par::map_range(factors.len(), |i| {
        let mut solver = scene.solver;
        axis.apply(&mut solver, factors[i]);
        let out = pnp_run(&scene.op, &scene.data, &solver, Some(&scene.truth))?;
        Ok(SweepRow {
            factor: factors[i],
            lambda: solver.lambda,
            r: solver.r,
            final_snr_db: snr_db(&out.image, &scene.truth)?,
        })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::from_rows(axis, rows))
}

/// Sweeps one parameter and writes `sweep_<axis>.csv` and
/// `sweep_<axis>.json`.
pub fn cmd_sweep(cfg: &ExperimentConfig, axis: SweepAxis, factors: &[f64]) -> Result<SweepReport> {
    let scene = scene_for(cfg)?;
    let report = sweep(&scene, axis, factors)?;
    ensure_dir(&cfg.output)?;
    write_text(
        &cfg.output.join(format!("sweep_{}.csv", axis.name())),
        &report.to_csv(),
    )?;
    write_json(
        &cfg.output.join(format!("sweep_{}.json", axis.name())),
        &report,
    )?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub threshold_db: f64,
    pub symmetric_iterations: Option<usize>,
    pub asymmetric_iterations: Option<usize>,
    pub symmetric_final_snr_db: f64,
    pub asymmetric_final_snr_db: f64,
    #[serde(skip)]
    pub symmetric: RunHistory,
    #[serde(skip)]
    pub asymmetric: RunHistory,
}

/// Runs both multiplier schedules on the same scene.
pub fn compare_symmetry(scene: &Scene) -> Result<SymmetryReport> {
    let run = |symmetric: bool| {
        let mut solver = scene.solver;
        solver.symmetric = symmetric;
        pnp_run(&scene.op, &scene.data, &solver, Some(&scene.truth))
    };
    let sym = run(true)?;
    let asym = run(false)?;
    let last = |h: &RunHistory| h.last().map_or(f64::NAN, |r| r.snr_db);
    Ok(SymmetryReport {
        threshold_db: SYMMETRY_TOL_DB,
        symmetric_iterations: sym.history.iterations_to_within(SYMMETRY_TOL_DB),
        asymmetric_iterations: asym.history.iterations_to_within(SYMMETRY_TOL_DB),
        symmetric_final_snr_db: last(&sym.history),
        asymmetric_final_snr_db: last(&asym.history),
        symmetric: sym.history,
        asymmetric: asym.history,
    })
}

/// Writes `history_symmetric.csv`, `history_asymmetric.csv` and
/// `symmetry.json`.
pub fn cmd_compare_symmetry(cfg: &ExperimentConfig) -> Result<SymmetryReport> {
    let scene = scene_for(cfg)?;
    let report = compare_symmetry(&scene)?;
    let dir = &cfg.output;
    ensure_dir(dir)?;
    write_text(
        &dir.join("history_symmetric.csv"),
        &report.symmetric.to_csv(),
    )?;
    write_text(
        &dir.join("history_asymmetric.csv"),
        &report.asymmetric.to_csv(),
    )?;
    write_json(&dir.join("symmetry.json"), &report)?;
    Ok(report)
}
