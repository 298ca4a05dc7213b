//! Deterministic report serialization: JSON with fixed 12-significant-digit
//! float formatting and stable field order, plus CSV round-trips for grid
//! fields.
//!
//! Identical configurations must produce byte-identical output, so floats
//! are always written as `d.dddddddddddE e` scientific notation and no map
//! with nondeterministic iteration order ever reaches the serializer.

use std::io::Write;

use serde::Serialize;

use crate::conformal::{PlaneConformalGrid, PolarGrid};
use crate::sphere_field::{SphereField, SpherePatch};
use crate::{Error, Result};

struct FixedFloatFormatter;

impl serde_json::ser::Formatter for FixedFloatFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        if value == 0.0 {
            return writer.write_all(b"0.0");
        }
        write!(writer, "{:.11e}", value)
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize a report to JSON with 12-significant-digit floats, stable field
/// order, UTF-8, no BOM, trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloatFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::InvalidParameter(e.to_string()))
}

/// CSV dump of a polar conformal grid: header row with the grid spec, then
/// row-major values (one radius row per line).
pub fn polar_grid_to_csv(field: &PlaneConformalGrid) -> String {
    let g = &field.grid;
    let mut out = String::from("r_min,r_max,n_r,n_theta\n");
    out.push_str(&format!("{:.17e},{:.17e},{},{}\n", g.r_min, g.r_max, g.n_r, g.n_theta));
    for i in 0..g.n_r {
        let row: Vec<String> = (0..g.n_theta)
            .map(|j| format!("{:.17e}", field.u[g.idx(i, j)]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parse a polar grid CSV produced by [`polar_grid_to_csv`].
pub fn polar_grid_from_csv(text: &str) -> Result<PlaneConformalGrid> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::GridFormat("empty file".into()))?;
    if header.trim() != "r_min,r_max,n_r,n_theta" {
        return Err(Error::GridFormat(format!("unexpected header: {header}")));
    }
    let spec = lines.next().ok_or_else(|| Error::GridFormat("missing grid spec".into()))?;
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::GridFormat("grid spec needs 4 fields".into()));
    }
    let r_min: f64 = parts[0].parse().map_err(|_| Error::GridFormat("bad r_min".into()))?;
    let r_max: f64 = parts[1].parse().map_err(|_| Error::GridFormat("bad r_max".into()))?;
    let n_r: usize = parts[2].parse().map_err(|_| Error::GridFormat("bad n_r".into()))?;
    let n_theta: usize = parts[3].parse().map_err(|_| Error::GridFormat("bad n_theta".into()))?;
    let grid = PolarGrid::new(r_min, r_max, n_r, n_theta)?;
    let mut u = Vec::with_capacity(grid.len());
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::GridFormat(format!("bad value: {tok}")))?;
            u.push(v);
        }
    }
    if u.len() != grid.len() {
        return Err(Error::GridFormat(format!(
            "expected {} values, got {}",
            grid.len(),
            u.len()
        )));
    }
    Ok(PlaneConformalGrid { grid, u, k: None, radial: None, incomplete_flag: false })
}

/// CSV dump of a sphere-patch field.
pub fn sphere_field_to_csv(field: &SphereField) -> String {
    let p = &field.patch;
    let mut out = String::from("a_min,a_max,b_min,b_max,n_a,n_b\n");
    out.push_str(&format!(
        "{:.17e},{:.17e},{:.17e},{:.17e},{},{}\n",
        p.a_range.0, p.a_range.1, p.b_range.0, p.b_range.1, p.n_a, p.n_b
    ));
    for i in 0..p.n_a {
        let row: Vec<String> = (0..p.n_b)
            .map(|j| format!("{:.17e}", field.values[field.idx(i, j)]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parse a sphere-patch CSV produced by [`sphere_field_to_csv`] (axis frame
/// defaults to the first coordinate axis).
pub fn sphere_field_from_csv(text: &str) -> Result<SphereField> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::GridFormat("empty file".into()))?;
    if header.trim() != "a_min,a_max,b_min,b_max,n_a,n_b" {
        return Err(Error::GridFormat(format!("unexpected header: {header}")));
    }
    let spec = lines.next().ok_or_else(|| Error::GridFormat("missing patch spec".into()))?;
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 6 {
        return Err(Error::GridFormat("patch spec needs 6 fields".into()));
    }
    let a0: f64 = parts[0].parse().map_err(|_| Error::GridFormat("bad a_min".into()))?;
    let a1: f64 = parts[1].parse().map_err(|_| Error::GridFormat("bad a_max".into()))?;
    let b0: f64 = parts[2].parse().map_err(|_| Error::GridFormat("bad b_min".into()))?;
    let b1: f64 = parts[3].parse().map_err(|_| Error::GridFormat("bad b_max".into()))?;
    let n_a: usize = parts[4].parse().map_err(|_| Error::GridFormat("bad n_a".into()))?;
    let n_b: usize = parts[5].parse().map_err(|_| Error::GridFormat("bad n_b".into()))?;
    let patch = SpherePatch::about_x1((a0, a1), (b0, b1), n_a, n_b);
    let mut values = Vec::with_capacity(n_a * n_b);
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::GridFormat(format!("bad value: {tok}")))?;
            values.push(v);
        }
    }
    if values.len() != n_a * n_b {
        return Err(Error::GridFormat(format!(
            "expected {} values, got {}",
            n_a * n_b,
            values.len()
        )));
    }
    Ok(SphereField { patch, values, jets: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[derive(Serialize)]
    struct Sample {
        name: &'static str,
        value: f64,
        items: Vec<f64>,
    }

    #[test]
    fn json_uses_fixed_float_format() {
        let s = Sample { name: "x", value: 1.0 / 3.0, items: vec![0.0, 2.0] };
        let text = to_json(&s).unwrap();
        assert_eq!(
            text,
            "{\"name\":\"x\",\"value\":3.33333333333e-1,\"items\":[0.0,2.00000000000e0]}\n"
        );
        // Byte-stable across repeated serialization.
        assert_eq!(text, to_json(&s).unwrap());
    }

    #[test]
    fn polar_csv_round_trip() {
        let field = catalog::model_metric(0.5, 0.1, 100.0, 16, 8).unwrap();
        let text = polar_grid_to_csv(&field);
        let back = polar_grid_from_csv(&text).unwrap();
        assert_eq!(back.grid, field.grid);
        for (a, b) in back.u.iter().zip(&field.u) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sphere_csv_round_trip() {
        let field = catalog::equidistant_support_field(0.5, 12, 10);
        let text = sphere_field_to_csv(&field);
        let back = sphere_field_from_csv(&text).unwrap();
        assert_eq!(back.patch.n_a, 12);
        for (a, b) in back.values.iter().zip(&field.values) {
            assert_eq!(a, b);
        }
    }
}
