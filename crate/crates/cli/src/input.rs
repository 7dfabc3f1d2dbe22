//! Loading states and point sets from files, stdin or pseudo-paths.

use std::io::Read;

use unpol::design;
use unpol::fixtures::table1_state;
use unpol::majorana::{state_constellation, Constellation};
use unpol::nalgebra::Vector3;
use unpol::spinstate::SpinState;
use unpol::HalfInt;

use crate::CliError;

fn read_source(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Validation(format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))
}

fn fixture_spin(path: &str) -> Option<Result<HalfInt, CliError>> {
    path.strip_prefix("fixture:")
        .map(|s| s.parse::<HalfInt>().map_err(CliError::from))
}

/// `fixture:S`, `-` for stdin, or a JSON state file.
pub fn load_state(path: &str) -> Result<SpinState, CliError> {
    if let Some(spin) = fixture_spin(path) {
        return Ok(table1_state(spin?)?);
    }
    Ok(serde_json::from_str(&read_source(path)?).map_err(unpol::Error::from)?)
}

/// `fixture:S`, `solid:<name>`, `-`, or a file holding either a constellation
/// object or a bare array of `[x, y, z]` vectors.
pub fn load_points(path: &str) -> Result<Constellation, CliError> {
    if let Some(spin) = fixture_spin(path) {
        return Ok(state_constellation(&table1_state(spin?)?));
    }
    if let Some(name) = path.strip_prefix("solid:") {
        return match name {
            "tetrahedron" => Ok(design::tetrahedron()),
            "octahedron" => Ok(design::octahedron()),
            "cube" => Ok(design::cube()),
            "icosahedron" => Ok(design::icosahedron()),
            "dodecahedron" => Ok(design::dodecahedron()),
            _ => Err(CliError::Validation(format!("unknown solid {name:?}"))),
        };
    }
    let text = read_source(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(unpol::Error::from)?;
    if value.is_array() {
        let raw: Vec<[f64; 3]> = serde_json::from_value(value).map_err(unpol::Error::from)?;
        let vs: Vec<Vector3<f64>> = raw.iter().map(|v| Vector3::from(*v)).collect();
        if vs.iter().any(|v| !(v.norm() > 0.0 && v.norm().is_finite())) {
            return Err(CliError::Validation(
                "point vectors must be nonzero and finite".into(),
            ));
        }
        return Ok(Constellation::from_vectors(&vs)?);
    }
    Ok(serde_json::from_value(value).map_err(unpol::Error::from)?)
}

/// `x,y,z` with a nonzero norm.
pub fn parse_axis(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad axis component {p:?}: {e}"))
        })
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] if x.is_finite() && y.is_finite() && z.is_finite() => Ok([x, y, z]),
        [_, _, _] => Err("axis components must be finite".into()),
        _ => Err(format!("axis needs three components, got {}", parts.len())),
    }
}
