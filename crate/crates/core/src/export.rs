//! Mesh and table output for a computed [`FrameField`].
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! binary64 exactly.

use crate::frame::FrameField;
use crate::geometry::{MinkVec, SingularCurve, SurfaceAnalysis};
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Ply,
    Csv,
}

impl MeshFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MeshFormat::Obj => "obj",
            MeshFormat::Ply => "ply",
            MeshFormat::Csv => "csv",
        }
    }
}

impl FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::Ply),
            "csv" => Ok(MeshFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected obj, ply or csv)")),
        }
    }
}

impl fmt::Display for MeshFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Vertex numbering: every grid point carrying a surface point gets one.
pub struct MeshTopology {
    /// Vertex index (0-based) of each grid point, if any.
    pub vertex_of: Vec<Option<usize>>,
    pub vertices: Vec<MinkVec>,
    /// Quads (counter-clockwise in parameter space) over cells whose corners are all on the big cell.
    pub faces: Vec<[usize; 4]>,
    /// Singular curves split into runs of consecutive vertices.
    pub polylines: Vec<Vec<usize>>,
}

pub fn mesh_topology(field: &FrameField, curves: &[SingularCurve]) -> MeshTopology {
    let g = &field.grid;
    let mut vertex_of = vec![None; g.len()];
    let mut vertices = Vec::new();
    for (k, s) in field.samples.iter().enumerate() {
        if let Some(f) = s.f {
            vertex_of[k] = Some(vertices.len());
            vertices.push(f);
        }
    }
    let mut faces = Vec::new();
    for j in 0..g.nb.saturating_sub(1) {
        for i in 0..g.na.saturating_sub(1) {
            let corners = [g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)];
            let on_cell = corners.iter().all(|&k| field.samples[k].cell.is_big_cell());
            if let (true, [Some(a), Some(b), Some(c), Some(d)]) = (on_cell, corners.map(|k| vertex_of[k])) {
                faces.push([a, b, c, d]);
            }
        }
    }
    let mut polylines = Vec::new();
    for curve in curves {
        let mut run = Vec::new();
        for &(i, j) in &curve.points {
            match vertex_of[g.index(i, j)] {
                Some(v) => run.push(v),
                None => {
                    if run.len() > 1 {
                        polylines.push(std::mem::take(&mut run));
                    }
                    run.clear();
                }
            }
        }
        if run.len() > 1 {
            polylines.push(run);
        }
    }
    MeshTopology { vertex_of, vertices, faces, polylines }
}

pub fn write_obj<W: Write>(mesh: &MeshTopology, mut w: W) -> io::Result<()> {
    writeln!(w, "# vertices (t, x1, x2)")?;
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", num(v.t), num(v.x1), num(v.x2))?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1)?;
    }
    for line in &mesh.polylines {
        write!(w, "l")?;
        for v in line {
            write!(w, " {}", v + 1)?;
        }
        writeln!(w)?;
    }
    w.flush()
}

/// ASCII PLY; polylines become `edge` elements.
pub fn write_ply<W: Write>(mesh: &MeshTopology, mut w: W) -> io::Result<()> {
    let edges: usize = mesh.polylines.iter().map(|l| l.len() - 1).sum();
    writeln!(w, "ply\nformat ascii 1.0")?;
    writeln!(w, "element vertex {}", mesh.vertices.len())?;
    writeln!(w, "property double t\nproperty double x1\nproperty double x2")?;
    writeln!(w, "element face {}", mesh.faces.len())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "element edge {edges}")?;
    writeln!(w, "property int vertex1\nproperty int vertex2\nend_header")?;
    for v in &mesh.vertices {
        writeln!(w, "{} {} {}", num(v.t), num(v.x1), num(v.x2))?;
    }
    for f in &mesh.faces {
        writeln!(w, "4 {} {} {} {}", f[0], f[1], f[2], f[3])?;
    }
    for line in &mesh.polylines {
        for pair in line.windows(2) {
            writeln!(w, "{} {}", pair[0], pair[1])?;
        }
    }
    w.flush()
}

/// Column names of the CSV table, in order.
pub const CSV_COLUMNS: &[&str] = &[
    "i", "j", "a", "b", "stratum", "cell_c_minus1", "cell_b_minus1", "f_t", "f_x1", "f_x2", "normal_t",
    "normal_x1", "normal_x2", "n_e_t", "n_e_x1", "n_e_x2", "z_t", "z_x1", "z_x2", "c1", "b2", "c_minus1", "residual",
    "condition", "plus_norm", "chi",
];

/// One row per grid point. Absent values are empty fields; `plus_norm`
/// (sup norm of the plus factor) measures the approach to a blow-up point.
pub fn write_csv<W: Write>(field: &FrameField, chi: Option<&[Option<f64>]>, w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_COLUMNS)?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let vec3 = |v: Option<MinkVec>| [opt(v.map(|v| v.t)), opt(v.map(|v| v.x1)), opt(v.map(|v| v.x2))];
    for (k, s) in field.samples.iter().enumerate() {
        let (i, j) = field.grid.ij(k);
        let [a, b] = field.grid.param(i, j);
        let mut row = vec![
            i.to_string(),
            j.to_string(),
            num(a),
            num(b),
            s.cell.stratum.name().to_string(),
            num(s.cell.c_minus1),
            num(s.cell.b_minus1),
        ];
        for v in [s.f, s.normal, s.n_e, s.z] {
            row.extend(vec3(v));
        }
        row.extend([opt(s.c1), opt(s.b2), opt(s.c_minus1), num(s.residual), num(s.condition), num(s.plus_norm)]);
        row.push(opt(chi.and_then(|c| c[k])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads one column of a table written by [`write_csv`].
pub fn read_csv_column<R: io::Read>(r: R, column: &str) -> Result<Vec<Option<f64>>, csv::Error> {
    let mut rd = csv::Reader::from_reader(r);
    let pos = rd.headers()?.iter().position(|h| h == column);
    let mut values = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let field = pos.and_then(|p| rec.get(p)).unwrap_or("");
        values.push(field.parse::<f64>().ok());
    }
    Ok(values)
}

/// Writes `field` to `path` in the given format.
pub fn export_mesh(
    field: &FrameField,
    analysis: &SurfaceAnalysis,
    format: MeshFormat,
    path: &Path,
) -> Result<(), ExportError> {
    let io_err = |source| ExportError::Io { path: path.display().to_string(), source };
    let file = BufWriter::new(File::create(path).map_err(io_err)?);
    match format {
        MeshFormat::Obj => write_obj(&mesh_topology(field, &analysis.curves), file).map_err(io_err),
        MeshFormat::Ply => write_ply(&mesh_topology(field, &analysis.curves), file).map_err(io_err),
        MeshFormat::Csv => write_csv(field, Some(&analysis.chi.chi), file).map_err(ExportError::from),
    }
}
