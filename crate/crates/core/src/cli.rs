//! Config-to-files driver behind the `tcmc` binary.

use crate::export::{export_mesh, ExportError, MeshFormat};
use crate::frame::{grid_for, Coords, FrameError, FrameField, Pipeline};
use crate::geometry::{analyze, cmc_invariants, InvariantSummary, SingularityReport, SurfaceAnalysis};
use crate::potentials::{parse_spec, print_config, Diagnostic, PotentialError, Settings, Spec};
use crate::tolerances::{ToleranceError, Tolerances};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// `|⟨f_x, f_y⟩|` below this fraction of `‖f_x‖‖f_y‖` is too close to the
/// singular set for the curvature check.
const CMC_MARGIN: f64 = 1e-2;

#[derive(Clone, Debug)]
pub struct RunFlags {
    pub grid: Option<(usize, usize)>,
    pub lambda: Option<f64>,
    pub format: MeshFormat,
    pub out: PathBuf,
    /// Also write `<stem>.report.json`.
    pub report_json: bool,
}

impl Default for RunFlags {
    fn default() -> Self {
        Self { grid: None, lambda: None, format: MeshFormat::Obj, out: PathBuf::from("."), report_json: false }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(PotentialError),
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Tolerances(#[from] ToleranceError),
    #[error("numeric failure: {0}")]
    Numeric(FrameError),
    #[error(transparent)]
    Export(#[from] ExportError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) | RunError::Validation(_) | RunError::Tolerances(_) => 2,
            RunError::Numeric(_) => 3,
            RunError::Read { .. } | RunError::Export(_) => 1,
        }
    }
}

impl From<PotentialError> for RunError {
    fn from(e: PotentialError) -> Self {
        match e {
            PotentialError::Parse { .. } => RunError::Parse(e),
            PotentialError::Validation { .. } => RunError::Validation(e.to_string()),
        }
    }
}

impl From<FrameError> for RunError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::Grid(msg) => RunError::Validation(msg),
            other => RunError::Numeric(other),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub path: String,
    pub family: &'static str,
    /// Effective config after flag overrides, in config syntax.
    pub text: String,
    pub settings: Settings,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridStats {
    pub coords: &'static str,
    pub shape: [usize; 2],
    pub step: [f64; 2],
    pub cells: BTreeMap<&'static str, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveReport {
    /// Grid axis the curve is parametrized by.
    pub axis: usize,
    pub points: Vec<[f64; 2]>,
    pub reports: Vec<SingularityReport>,
    /// Exact classification from Cauchy data, where the point lies on the data curve.
    pub predicted: Vec<Option<SingularityReport>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Invariants {
    #[serde(flatten)]
    pub cmc: InvariantSummary,
    pub birkhoff_residual_max: f64,
    pub max_rank_ratio: f64,
    pub max_tail: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub grid: GridStats,
    pub curves: Vec<CurveReport>,
    /// Points where numeric and predicted types differ.
    pub disagreements: usize,
    pub invariants: Invariants,
    pub diagnostics: Vec<Diagnostic>,
    pub outputs: Vec<String>,
}

/// Config with command-line overrides applied. An even `nu` on a `(u, v)`
/// grid is rounded up so that `u = 0` stays a grid line.
pub fn load_config(text: &str, flags: &RunFlags) -> Result<(Spec, Settings, Vec<Diagnostic>), RunError> {
    let parsed = parse_spec(text)?;
    let mut settings = parsed.settings;
    if let Some((na, nb)) = flags.grid {
        let na = if parsed.spec.uses_uv_grid() && na % 2 == 0 {
            log::info!("rounding nu = {na} up to {}", na + 1);
            na + 1
        } else {
            na
        };
        settings.grid = (na, nb);
    }
    if let Some(lambda) = flags.lambda {
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(RunError::Validation(format!("lambda must be finite and non-zero, got {lambda}")));
        }
        settings.lambda = lambda;
    }
    Ok((parsed.spec, settings, parsed.diagnostics))
}

/// Builds the surface described by a config.
pub fn build_field(spec: &Spec, settings: &Settings, tol: &Tolerances) -> Result<FrameField, RunError> {
    let pipeline = Pipeline::from_spec(spec, settings, tol.clone());
    let grid = grid_for(&pipeline, settings)?;
    Ok(FrameField::build(pipeline, grid)?)
}

fn curve_reports(spec: &Spec, field: &FrameField, analysis: &SurfaceAnalysis, tol: &Tolerances) -> Vec<CurveReport> {
    let g = &field.grid;
    let mut reports = analysis.reports.iter();
    analysis
        .curves
        .iter()
        .map(|curve| {
            let points: Vec<[f64; 2]> = curve.points.iter().map(|&(i, j)| g.param(i, j)).collect();
            let mine: Vec<SingularityReport> = reports.by_ref().take(points.len()).cloned().collect();
            let predicted = curve
                .points
                .iter()
                .map(|&(i, j)| match spec {
                    Spec::Cauchy(data) if g.coords == Coords::UV && i == g.center_column() => {
                        Some(data.predict_type(g.param(i, j)[1], tol))
                    }
                    _ => None,
                })
                .collect();
            CurveReport { axis: curve.axis, points, reports: mine, predicted }
        })
        .collect()
}

/// Assembles the report for a computed field.
pub fn report_for(
    path: &str,
    spec: &Spec,
    settings: &Settings,
    diagnostics: Vec<Diagnostic>,
    field: &FrameField,
    analysis: &SurfaceAnalysis,
    tol: &Tolerances,
) -> RunReport {
    let g = &field.grid;
    let counts = field.cell_counts();
    let names = ["big", "P1", "P-1", "P2", "P-2", "deeper"];
    let cells = names.iter().copied().zip(counts).collect();
    let curves = curve_reports(spec, field, analysis, tol);
    let disagreements = curves
        .iter()
        .flat_map(|c| c.reports.iter().zip(&c.predicted))
        .filter(|(r, p)| p.as_ref().is_some_and(|p| p.kind != r.kind))
        .count();
    RunReport {
        config: ConfigEcho {
            path: path.to_string(),
            family: spec.section(),
            text: print_config(spec, settings),
            settings: settings.clone(),
        },
        grid: GridStats {
            coords: if g.coords == Coords::UV { "uv" } else { "xy" },
            shape: [g.na, g.nb],
            step: [g.da, g.db],
            cells,
        },
        curves,
        disagreements,
        invariants: Invariants {
            cmc: cmc_invariants(field, &analysis.derivatives, CMC_MARGIN),
            birkhoff_residual_max: field.max_residual(),
            max_rank_ratio: analysis.max_rank_ratio,
            max_tail: field.max_tail(),
        },
        diagnostics,
        outputs: Vec::new(),
    }
}

/// Parses `config_path`, builds and classifies the surface, and writes the
/// mesh (and optionally the JSON report) into `flags.out`.
pub fn run(config_path: &Path, flags: &RunFlags, tol: &Tolerances) -> Result<RunReport, RunError> {
    let read_err = |source| RunError::Read { path: config_path.display().to_string(), source };
    let text = std::fs::read_to_string(config_path).map_err(read_err)?;
    let (spec, settings, diagnostics) = load_config(&text, flags)?;
    let field = build_field(&spec, &settings, tol)?;
    let analysis = analyze(&field, tol);
    let mut report =
        report_for(&config_path.display().to_string(), &spec, &settings, diagnostics, &field, &analysis, tol);

    let out_err = |source| ExportError::Io { path: flags.out.display().to_string(), source };
    std::fs::create_dir_all(&flags.out).map_err(out_err)?;
    let stem = config_path.file_stem().and_then(|s| s.to_str()).unwrap_or("surface");
    let mesh_path = flags.out.join(format!("{stem}.{}", flags.format.extension()));
    export_mesh(&field, &analysis, flags.format, &mesh_path)?;
    report.outputs.push(mesh_path.display().to_string());
    if flags.report_json {
        let report_path = flags.out.join(format!("{stem}.report.json"));
        report.outputs.push(report_path.display().to_string());
        let json = serde_json::to_string_pretty(&report).expect("report is serializable");
        std::fs::write(&report_path, json)
            .map_err(|source| ExportError::Io { path: report_path.display().to_string(), source })?;
    }
    Ok(report)
}

/// Tolerances from the override file named in the environment, if any.
pub fn tolerances_from_env() -> Result<Tolerances, RunError> {
    Ok(Tolerances::from_env()?)
}
