mod common;

use common::*;
use std::path::Path;
use tcmc::birkhoff::{CellClass, Stratum};
use tcmc::cli::{load_config, run, RunError, RunFlags};
use tcmc::export::*;
use tcmc::frame::{dalembert_construct, FrameField};
use tcmc::geometry::{analyze, SingularCurve};
use tcmc::tolerances::Tolerances;

fn small_pair(grid: (usize, usize)) -> FrameField {
    dalembert_construct(&pair_with_beta(&[1.0]), &settings((-0.2, 0.2), grid), Default::default()).unwrap()
}

fn obj_text(field: &FrameField, curves: &[SingularCurve]) -> String {
    let mut buf = Vec::new();
    write_obj(&mesh_topology(field, curves), &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn count(text: &str, prefix: &str) -> usize {
    text.lines().filter(|l| l.starts_with(prefix)).count()
}

#[test]
fn two_by_two_grid_gives_one_quad() {
    let text = obj_text(&small_pair((2, 2)), &[]);
    assert_eq!(count(&text, "v "), 4);
    assert_eq!(count(&text, "f "), 1);
}

#[test]
fn cells_touching_a_small_cell_point_are_dropped() {
    let mut field = small_pair((4, 3));
    for j in 0..3 {
        let k = field.grid.index(1, j);
        field.samples[k].cell = CellClass { stratum: Stratum::P1, c_minus1: 0.0, b_minus1: 1.0 };
    }
    let k = field.grid.index(3, 0);
    field.samples[k].cell = CellClass { stratum: Stratum::Pm1, c_minus1: 1.0, b_minus1: 0.0 };
    field.samples[k].f = None;
    let curve = SingularCurve { axis: 1, points: (0..3).map(|j| (1, j)).collect() };
    let mesh = mesh_topology(&field, &[curve]);
    assert_eq!(mesh.vertices.len(), 11);
    assert_eq!(mesh.faces.len(), 1);
    assert_eq!(mesh.polylines, vec![vec![1, 4, 8]]);
    for face in &mesh.faces {
        for v in face {
            let k = mesh.vertex_of.iter().position(|x| *x == Some(*v)).unwrap();
            assert!(field.samples[k].cell.is_big_cell());
        }
    }
    let mut ply = Vec::new();
    write_ply(&mesh, &mut ply).unwrap();
    let ply = String::from_utf8(ply).unwrap();
    assert!(ply.contains("element vertex 11\n") && ply.contains("element face 1\n") && ply.contains("element edge 2\n"));
}

#[test]
fn csv_round_trips_chi_exactly() {
    let field = small_pair((9, 9));
    let analysis = analyze(&field, &Tolerances::default());
    let mut buf = Vec::new();
    write_csv(&field, Some(&analysis.chi.chi), &mut buf).unwrap();
    let back = read_csv_column(buf.as_slice(), "chi").unwrap();
    assert_eq!(back.len(), 81);
    for (a, b) in back.iter().zip(&analysis.chi.chi) {
        assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
    }
    let header = String::from_utf8(buf).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, CSV_COLUMNS.join(","));
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const CROSS_CAP: &str = "[cauchy]\ns = 2 0 0.2\nt = 0 1\ntheta = 0 1\nH = 1\ninterval = -0.3 0.3\ngrid = 11 31\n";

#[test]
fn run_writes_mesh_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "crosscap.conf", CROSS_CAP);
    let flags = RunFlags { out: dir.path().join("out"), report_json: true, ..Default::default() };
    let report = run(&config, &flags, &Tolerances::default()).unwrap();
    assert_eq!(report.outputs.len(), 2);
    assert!(report.outputs.iter().all(|p| Path::new(p).exists()));
    assert_eq!(report.curves.len(), 1);
    let at_zero = report.curves[0].points.iter().position(|p| p[1].abs() < 1e-12).unwrap();
    assert_eq!(report.curves[0].reports[at_zero].kind, tcmc::geometry::SingularityType::CuspidalCrossCap);
    assert_eq!(report.disagreements, 0);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report.outputs[1]).unwrap()).unwrap();
    assert_eq!(json["grid"]["cells"]["P1"], 31);
    assert_eq!(json["curves"][0]["reports"][at_zero]["type"], "CuspidalCrossCap");
}

#[test]
fn csv_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "crosscap.conf", CROSS_CAP);
    let mut bytes = Vec::new();
    for sub in ["a", "b"] {
        let flags = RunFlags { out: dir.path().join(sub), format: MeshFormat::Csv, ..Default::default() };
        let report = run(&config, &flags, &Tolerances::default()).unwrap();
        bytes.push(std::fs::read(&report.outputs[0]).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let flags = RunFlags { out: dir.path().join("out"), ..Default::default() };
    let tol = Tolerances::default();
    let empty = write_config(dir.path(), "empty.conf", "");
    let err = run(&empty, &flags, &tol).unwrap_err();
    assert!(matches!(err, RunError::Parse(_)));
    assert_eq!(err.exit_code(), 2);

    let bad_theta = write_config(dir.path(), "theta.conf", &CROSS_CAP.replace("theta = 0 1", "theta = 1 1"));
    assert_eq!(run(&bad_theta, &flags, &tol).unwrap_err().exit_code(), 2);

    let blowup = "[pair]\nalpha = 40\nbeta = 40\ngamma = 1\ndelta = 1\nH = 1\ntruncation = 4\ngrid = 5 5\n";
    let numeric = write_config(dir.path(), "tail.conf", blowup);
    let err = run(&numeric, &flags, &tol).unwrap_err();
    assert!(matches!(err, RunError::Numeric(_)), "{err}");
    assert_eq!(err.exit_code(), 3);

    let missing = dir.path().join("missing.conf");
    assert_eq!(run(&missing, &flags, &tol).unwrap_err().exit_code(), 1);
}

#[test]
fn flags_override_the_config() {
    let flags = RunFlags { grid: Some((20, 7)), lambda: Some(0.5), ..Default::default() };
    let (_, settings, _) = load_config(CROSS_CAP, &flags).unwrap();
    assert_eq!(settings.grid, (21, 7));
    assert_eq!(settings.lambda, 0.5);
    let zero = RunFlags { lambda: Some(0.0), ..Default::default() };
    assert_eq!(load_config(CROSS_CAP, &zero).unwrap_err().exit_code(), 2);
}

#[test]
fn format_names() {
    assert_eq!("PLY".parse::<MeshFormat>().unwrap(), MeshFormat::Ply);
    assert!("stl".parse::<MeshFormat>().is_err());
}
