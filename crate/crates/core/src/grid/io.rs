use std::path::Path;

use super::{Grid, GridError};

pub fn load_grid(path: impl AsRef<Path>) -> Result<Grid, GridError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| GridError::Io { path: path.display().to_string(), source })?;
    grid_from_json(&text)
}

pub fn save_grid(grid: &Grid, path: impl AsRef<Path>) -> Result<(), GridError> {
    let path = path.as_ref();
    std::fs::write(path, grid_to_json(grid))
        .map_err(|source| GridError::Io { path: path.display().to_string(), source })
}

pub fn grid_to_json(grid: &Grid) -> String {
    let mut s = serde_json::to_string_pretty(grid).expect("grid serializes");
    s.push('\n');
    s
}

/// Parses a grid and checks field-level invariants. Errors carry a JSON
/// path such as `$.lines[3].length`.
pub fn grid_from_json(text: &str) -> Result<Grid, GridError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let grid: Grid = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner().to_string();
        let mut path = json_path(&e.path().to_string());
        if let Some(field) = missing_field(&inner) {
            if path == "$" {
                path = format!("$.{field}");
            } else {
                path = format!("{path}.{field}");
            }
        }
        GridError::Parse { path, message: inner }
    })?;
    check_fields(&grid)?;
    Ok(grid)
}

pub(crate) fn json_path(p: &str) -> String {
    if p == "." || p.is_empty() {
        "$".to_string()
    } else {
        format!("$.{p}")
    }
}

fn missing_field(msg: &str) -> Option<&str> {
    let rest = msg.strip_prefix("missing field `")?;
    rest.split('`').next()
}

fn schema(path: String, message: impl Into<String>) -> GridError {
    GridError::Schema { path, message: message.into() }
}

fn check_fields(g: &Grid) -> Result<(), GridError> {
    for (i, b) in g.buses.iter().enumerate() {
        if !(b.vn > 0.0) {
            return Err(schema(format!("$.buses[{i}].vn"), "nominal voltage must be positive"));
        }
        if !b.x.is_finite() || !b.y.is_finite() {
            return Err(schema(format!("$.buses[{i}]"), "coordinates must be finite"));
        }
    }
    for (i, t) in g.line_types.iter().enumerate() {
        if !(t.r_per_km >= 0.0) {
            return Err(schema(format!("$.line_types[{i}].r_per_km"), "must be non-negative"));
        }
        if !(t.x_per_km >= 0.0) {
            return Err(schema(format!("$.line_types[{i}].x_per_km"), "must be non-negative"));
        }
        if !(t.i_max > 0.0) {
            return Err(schema(format!("$.line_types[{i}].i_max"), "ampacity must be positive"));
        }
    }
    for (i, l) in g.lines.iter().enumerate() {
        if !(l.length > 0.0) || !l.length.is_finite() {
            return Err(schema(format!("$.lines[{i}].length"), "length must be positive"));
        }
    }
    for (i, t) in g.transformers.iter().enumerate() {
        if !(t.sn > 0.0) {
            return Err(schema(format!("$.transformers[{i}].sn"), "rating must be positive"));
        }
        for (name, v) in &t.setpoint_by_scenario {
            if !(0.9..=1.1).contains(v) {
                return Err(schema(
                    format!("$.transformers[{i}].setpoint_by_scenario.{name}"),
                    "setpoint outside [0.9, 1.1] pu",
                ));
            }
        }
    }
    for (i, inj) in g.injections.iter().enumerate() {
        if !(inj.sn >= 0.0) {
            return Err(schema(format!("$.injections[{i}].sn"), "power must be non-negative"));
        }
        if let Some(pf) = inj.p_factor {
            if !(pf > 0.0 && pf <= 1.0) {
                return Err(schema(format!("$.injections[{i}].p_factor"), "power factor outside (0, 1]"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_buses_key_is_reported_at_root_path() {
        let err = grid_from_json(r#"{"line_types": [], "lines": []}"#).unwrap_err();
        match err {
            GridError::Parse { path, .. } => assert_eq!(path, "$.buses"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_type_names_nested_path() {
        let text = r#"{"buses": [{"id": "a", "kind": "junction", "x": 0, "y": 0, "vn": "high"}],
            "line_types": [], "lines": [], "switches": [], "transformers": [],
            "injections": [], "external_sources": []}"#;
        match grid_from_json(text).unwrap_err() {
            GridError::Parse { path, .. } => assert_eq!(path, "$.buses[0].vn"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
