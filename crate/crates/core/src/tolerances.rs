//! Numerical thresholds shared by every pipeline stage.
//!
//! Defaults can be overridden by a `key = value` file whose path is given in
//! the [`TOLERANCE_ENV`] environment variable.

use serde::Serialize;
use std::path::Path;
use thiserror::Error;

/// Environment variable naming a tolerance override file.
pub const TOLERANCE_ENV: &str = "TCMC_TOLERANCES";

#[derive(Debug, Error)]
pub enum ToleranceError {
    #[error("cannot read tolerance file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("tolerance file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Accepted `‖minus·plus − Φ‖∞` for a Birkhoff factorization.
    pub birkhoff_residual: f64,
    /// Condition estimate above which a point is off the big cell.
    pub birkhoff_condition: f64,
    /// `|c₋₁|` / `|b₋₁|` below which a shifted factorization counts as on a small cell.
    pub small_cell_pivot: f64,
    /// Tail mass that triggers a warning.
    pub tail_warning: f64,
    /// Tail mass that aborts integration.
    pub tail_overflow: f64,
    /// Determinant drift that aborts inversion.
    pub det_drift: f64,
    /// Singular-value ratio and transversality (sine of angle) threshold.
    pub rank: f64,
    /// Exact-zero test on evaluated data.
    pub zero: f64,
    /// Agreement between independent routes.
    pub agreement: f64,
    /// Relative size of `dχ` below which a singular point is degenerate.
    pub nondegeneracy: f64,
    /// Root multiplicity test for potential coefficient functions.
    pub root: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            birkhoff_residual: 1e-9,
            birkhoff_condition: 1e8,
            small_cell_pivot: 1e-3,
            tail_warning: 1e-8,
            tail_overflow: 1e-6,
            det_drift: 1e-6,
            rank: 1e-6,
            zero: 1e-8,
            agreement: 1e-5,
            nondegeneracy: 1e-6,
            root: 1e-9,
        }
    }
}

impl Tolerances {
    /// Defaults, overridden by the file in [`TOLERANCE_ENV`] when it is set.
    pub fn from_env() -> Result<Self, ToleranceError> {
        match std::env::var_os(TOLERANCE_ENV) {
            Some(path) => Self::default().with_overrides_from(Path::new(&path)),
            None => Ok(Self::default()),
        }
    }

    pub fn with_overrides_from(self, path: &Path) -> Result<Self, ToleranceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ToleranceError::Io { path: path.display().to_string(), source })?;
        self.with_overrides(&text)
    }

    pub fn with_overrides(mut self, text: &str) -> Result<Self, ToleranceError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ToleranceError::Parse { line: i + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let value: f64 =
                value.trim().parse().map_err(|_| err(format!("bad number {:?}", value.trim())))?;
            if !(value.is_finite() && value > 0.0) {
                return Err(err(format!("tolerance must be positive, got {value}")));
            }
            let slot = match key.trim() {
                "birkhoff_residual" => &mut self.birkhoff_residual,
                "birkhoff_condition" => &mut self.birkhoff_condition,
                "small_cell_pivot" => &mut self.small_cell_pivot,
                "tail_warning" => &mut self.tail_warning,
                "tail_overflow" => &mut self.tail_overflow,
                "det_drift" => &mut self.det_drift,
                "rank" => &mut self.rank,
                "zero" => &mut self.zero,
                "agreement" => &mut self.agreement,
                "nondegeneracy" => &mut self.nondegeneracy,
                "root" => &mut self.root,
                other => return Err(err(format!("unknown tolerance {other:?}"))),
            };
            *slot = value;
        }
        Ok(self)
    }
}
