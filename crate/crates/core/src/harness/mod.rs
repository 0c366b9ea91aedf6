//! Experiment orchestration: forward model → optional perturbation →
//! reconstruction → evaluation, with every stage persisted to disk.

pub mod compare;
pub mod config;
pub mod io;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::json;

use crate::budget::cascade;
use crate::forward::{
    build_disk_model_with, build_interval_model_with, build_rectangle_model_with, make_partition,
    perturb_dataset, true_boundary_distances, BoundaryPartition, DistanceTable, MeshResolution, ModelKind,
    ModelManifold, Region, SpectralDataset,
};
use crate::metric::{evaluate_run, EvalReport, FiniteMetricSpace, RunMeta};
use crate::slicing::{build_rstar, rstar_to_metric_space, ReconstructionParams, Rstar};
use crate::volume::{VolumeOracle, VolumeParams};
use crate::{Error, Result};

pub use compare::{compare, Comparison};
pub use config::{preset, ExperimentConfig, ReconstructionSettings, RunMode, VolumeSettings, PRESETS};
pub use io::VolumeRow;

/// Files written by [`run`], in pipeline order.
pub const ARTIFACTS: [&str; 5] = ["dataset.json", "volumes.csv", "rstar.json", "x.json", "report.json"];

/// Timestamped stage log kept apart from the deterministic artifacts.
pub const SIDECAR: &str = "run.log";

fn default_mesh(kind: &ModelKind) -> MeshResolution {
    match kind {
        ModelKind::Interval { .. } => MeshResolution::default(),
        ModelKind::Rectangle { .. } => MeshResolution { interior: 128, boundary: 512 },
        ModelKind::Disk { .. } => MeshResolution { interior: 96, boundary: 512 },
    }
}

/// Resolves `J` and δ, taking them from the cascade in reference mode.
pub fn effective_config(cfg: &ExperimentConfig) -> Result<ExperimentConfig> {
    let mut out = cfg.clone();
    if cfg.mode == RunMode::ReferenceCascade {
        let gc = cfg.geometry.as_ref().ok_or_else(|| Error::Config {
            field: "geometry".into(),
            reason: "reference-cascade mode needs geometry constants".into(),
        })?;
        let c = cascade(cfg.eta, gc)?;
        if c.underflow || !(c.values.j <= 4096.0) {
            return Err(Error::Config {
                field: "mode".into(),
                reason: format!("cascade is not representable at eta = {}: ln delta = {}, ln J = {}", cfg.eta, c.ln.delta, c.ln.j),
            });
        }
        out.j = c.values.j as usize;
        out.delta = c.values.delta;
    }
    Ok(out)
}

/// Exact model and dataset with `J` modes.
pub fn build_model(cfg: &ExperimentConfig) -> Result<(ModelManifold, SpectralDataset)> {
    let mesh = cfg.mesh.unwrap_or_else(|| default_mesh(&cfg.model));
    match cfg.model {
        ModelKind::Interval { length } => build_interval_model_with(length, cfg.j, mesh),
        ModelKind::Rectangle { lx, ly } => build_rectangle_model_with(lx, ly, cfg.j, mesh),
        ModelKind::Disk { radius } => build_disk_model_with(radius, cfg.j, mesh),
    }
}

/// The dataset the reconstruction sees: exact, or perturbed by δ with the seed.
pub fn observed_dataset(cfg: &ExperimentConfig, exact: &SpectralDataset) -> Result<SpectralDataset> {
    if cfg.delta > 0.0 {
        perturb_dataset(exact, cfg.delta, cfg.seed)
    } else {
        Ok(exact.clone())
    }
}

pub fn partition(cfg: &ExperimentConfig, model: &ModelManifold) -> Result<BoundaryPartition> {
    make_partition(model, cfg.eta)
}

pub fn volume_params(cfg: &ExperimentConfig) -> VolumeParams {
    let v = cfg.volume;
    VolumeParams {
        j: cfg.j,
        big_lambda: v.big_lambda,
        gamma: v.gamma,
        eps1: v.eps1,
        c0: v.c0,
        c0_prime: v.c0_prime,
        solver: cfg.solver,
    }
}

pub fn reconstruction_params(cfg: &ExperimentConfig, model: &ModelManifold) -> Result<ReconstructionParams> {
    let r = &cfg.reconstruction;
    let d = r.diameter.unwrap_or(model.diameter);
    let mut p = ReconstructionParams::new(model.n, cfg.eta, r.i0, r.l, d)?;
    if let Some(e) = r.epsilon {
        p.epsilon = e;
    }
    if let Some(m) = r.max_points {
        p.max_points = m;
    }
    Ok(p)
}

pub struct Reconstruction {
    pub rstar: Rstar,
    pub volumes: Vec<VolumeRow>,
    pub x: FiniteMetricSpace,
    pub negative_slices: usize,
}

pub fn reconstruct(
    cfg: &ExperimentConfig,
    model: &ModelManifold,
    ds: &SpectralDataset,
    part: &BoundaryPartition,
) -> Result<Reconstruction> {
    let params = reconstruction_params(cfg, model)?;
    let oracle = VolumeOracle::new(ds, part, volume_params(cfg), params.diameter)?;
    let rstar = build_rstar(&oracle, part.len(), &params)?;
    let table = DistanceTable::new(model, part);
    let volumes = oracle
        .cache()
        .reports()
        .iter()
        .map(|r| VolumeRow::new(r, Some(table.volume(&Region::Influence(r.alpha.clone())))))
        .collect();
    let x = if rstar.functions.is_empty() {
        FiniteMetricSpace::new(Vec::new(), Vec::new())?
    } else {
        rstar_to_metric_space(&rstar.functions, params.eta)?
    };
    Ok(Reconstruction { rstar, volumes, x, negative_slices: oracle.cache().negative_slices() })
}

pub fn truth_spacing(cfg: &ExperimentConfig, model: &ModelManifold) -> f64 {
    cfg.sample_spacing.unwrap_or(if model.n == 1 { cfg.eta / 4.0 } else { cfg.eta / 2.0 })
}

pub fn evaluate(
    cfg: &ExperimentConfig,
    model: &ModelManifold,
    part: &BoundaryPartition,
    values: &[Vec<f64>],
) -> Result<EvalReport> {
    let truth = true_boundary_distances(model, part, truth_spacing(cfg, model))?;
    let meta = RunMeta { eta: cfg.eta, delta: cfg.delta, j: cfg.j };
    evaluate_run(values, &truth.values, &truth.space, meta, cfg.seed)
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: EvalReport,
    pub dir: PathBuf,
    /// 0 on success, 1 when the reconstruction is empty.
    pub exit_code: i32,
}

struct Sidecar {
    lines: Vec<String>,
    start: Instant,
}

impl Sidecar {
    fn new() -> Self {
        Sidecar { lines: Vec::new(), start: Instant::now() }
    }

    fn note(&mut self, stage: &str, detail: String) {
        let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let ms = self.start.elapsed().as_secs_f64() * 1e3;
        self.lines.push(format!("{unix:.3} +{ms:.1}ms {stage}: {detail}"));
    }
}

/// Runs every stage and writes [`ARTIFACTS`] plus the sidecar log into `dir`.
pub fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let mut log = Sidecar::new();
    let cfg = effective_config(cfg)?;
    let (model, exact) = build_model(&cfg)?;
    let ds = observed_dataset(&cfg, &exact)?;
    io::write_dataset(&dir.join(ARTIFACTS[0]), &ds)?;
    log.note("forward", format!("{} modes, delta {}", ds.len(), cfg.delta));
    let part = partition(&cfg, &model)?;
    let rec = reconstruct(&cfg, &model, &ds, &part)?;
    io::write_volumes(&dir.join(ARTIFACTS[1]), &rec.volumes)?;
    io::write_rstar(&dir.join(ARTIFACTS[2]), &rec.rstar.functions)?;
    io::write_metric_space(&dir.join(ARTIFACTS[3]), &rec.x)?;
    log.note(
        "reconstruct",
        format!(
            "N {} solves {} slices {} accepted {} negative slices {}",
            part.len(),
            rec.volumes.len(),
            rec.rstar.stats.slices,
            rec.rstar.functions.len(),
            rec.negative_slices
        ),
    );
    let values: Vec<Vec<f64>> = rec.rstar.functions.iter().map(|f| f.values.clone()).collect();
    let report = evaluate(&cfg, &model, &part, &values)?;
    io::write_report(&dir.join(ARTIFACTS[4]), &report)?;
    log.note("evaluate", format!("status {} hausdorff {:?}", report.status, report.hausdorff));
    io::write_text(&dir.join(SIDECAR), &(log.lines.join("\n") + "\n"))?;
    let exit_code = if report.status == "ok" { 0 } else { 1 };
    Ok(RunOutcome { report, dir: dir.to_path_buf(), exit_code })
}

/// Machine-readable error record.
pub fn error_json(err: &Error) -> String {
    let v = json!({
        "error": {
            "kind": err.kind(),
            "field": err.field(),
            "message": err.to_string(),
            "exit_code": err.exit_code(),
        }
    });
    io::to_json_pretty(&v).expect("error record serializes")
}
