//! Flat key=value configuration for the quadrature spec.

use std::path::Path;

use hs_sharp_core::QuadratureSpec;

pub fn quadrature_spec(path: Option<&Path>) -> Result<QuadratureSpec, String> {
    let mut spec = QuadratureSpec::default();
    let Some(path) = path else {
        return Ok(spec);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key=value, got {raw:?}", lineno + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        let parse_err = |e| format!("config line {}: bad value for {key}: {e}", lineno + 1);
        match key {
            "base_order" => spec.base_order = value.parse().map_err(|e| parse_err(format!("{e}")))?,
            "max_refinements" => {
                spec.max_refinements = value.parse().map_err(|e| parse_err(format!("{e}")))?
            }
            "abs_tol" => spec.abs_tol = value.parse().map_err(|e| parse_err(format!("{e}")))?,
            "rel_tol" => spec.rel_tol = value.parse().map_err(|e| parse_err(format!("{e}")))?,
            other => return Err(format!("config line {}: unknown key {other:?}", lineno + 1)),
        }
    }
    spec.validate().map_err(|e| format!("invalid config: {e}"))?;
    Ok(spec)
}
