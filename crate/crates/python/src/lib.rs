//! Python bindings: `import cadfit`.
//!
//! Programs and reports cross the boundary as JSON strings.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use cadfit::cli::{eval_paths, random_program, Complexity, EvalOptions};
use cadfit::geometry::write_stl;
use cadfit::program::{deserialize_program, emit_script as emit, serialize_program, tessellate_solid};
use cadfit::{iterative_fit, load_mesh, Error, FitConfig, Solid};

fn to_py(e: Error) -> PyErr {
    let msg = format!("{}: {e}", e.kind());
    match e {
        Error::Io { .. } => PyIOError::new_err(msg),
        Error::Config(_)
        | Error::MalformedStl(_)
        | Error::EmptyMesh
        | Error::InvalidMesh(_)
        | Error::DegenerateBounds
        | Error::NotWatertight(_)
        | Error::InvalidProgram { .. } => PyValueError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

/// Fits a program to a watertight STL. Returns `(program_json, report_json)`.
#[pyfunction]
#[pyo3(signature = (mesh_path, config_json=None, seed=None))]
fn reconstruct(py: Python<'_>, mesh_path: &str, config_json: Option<&str>, seed: Option<u64>) -> PyResult<(String, String)> {
    let mut cfg = match config_json {
        Some(text) => FitConfig::from_json(text).map_err(to_py)?,
        None => FitConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let path = mesh_path.to_string();
    py.detach(move || {
        let mesh = load_mesh(&path)?;
        let (program, report) = iterative_fit(&mesh, &cfg)?;
        let report = serde_json::to_string(&report).expect("report serializes");
        Ok((serialize_program(&program), report))
    })
    .map_err(to_py)
}

/// Compares a program JSON or STL file against a ground-truth STL.
/// Returns the metrics as a JSON string.
#[pyfunction]
#[pyo3(signature = (pred_path, gt_path, align=true))]
fn evaluate(py: Python<'_>, pred_path: &str, gt_path: &str, align: bool) -> PyResult<String> {
    let (pred, gt) = (pred_path.to_string(), gt_path.to_string());
    py.detach(move || eval_paths(pred.as_ref(), gt.as_ref(), &EvalOptions { align }))
        .map(|r| serde_json::to_string(&r).expect("report serializes"))
        .map_err(to_py)
}

/// The `index`-th random benchmark program of a complexity level.
#[pyfunction]
#[pyo3(signature = (complexity, seed=0, index=0))]
fn generate(complexity: &str, seed: u64, index: usize) -> PyResult<String> {
    let c = match complexity {
        "easy" => Complexity::Easy,
        "medium" => Complexity::Medium,
        "hard" => Complexity::Hard,
        other => return Err(PyValueError::new_err(format!("unknown complexity {other:?}"))),
    };
    random_program(c, seed, index).map(|p| serialize_program(&p)).map_err(to_py)
}

/// CadQuery-style script text for a program JSON string.
#[pyfunction]
fn emit_script(program_json: &str) -> PyResult<String> {
    deserialize_program(program_json).map(|p| emit(&p)).map_err(to_py)
}

/// Tessellates a program JSON string into a binary STL at `stl_path`.
/// Returns the triangle count.
#[pyfunction]
#[pyo3(signature = (program_json, stl_path, resolution=128))]
fn tessellate(py: Python<'_>, program_json: &str, stl_path: &str, resolution: usize) -> PyResult<usize> {
    let program = deserialize_program(program_json).map_err(to_py)?;
    let path = stl_path.to_string();
    py.detach(move || {
        let mesh = tessellate_solid(&Solid::new(program)?, resolution)?;
        write_stl(&mesh, &path)?;
        Ok(mesh.faces.len())
    })
    .map_err(to_py)
}

#[pymodule(name = "cadfit")]
fn cadfit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(emit_script, m)?)?;
    m.add_function(wrap_pyfunction!(tessellate, m)?)?;
    Ok(())
}
