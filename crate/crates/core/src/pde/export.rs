//! Plain-text CSV form of grid fields.
//!
//! Every node is written, Dirichlet nodes included, column by column with
//! `eta` varying fastest. Values carry 9 significant digits.

use super::grid::{Grid, GridField, GridKind};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    /// `xi` for strip fields, `s` for tube fields
    pub axis: String,
    pub rows: Vec<[f64; 3]>,
}

pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.8e}")
    }
}

pub fn field_to_csv(field: &GridField) -> String {
    let g = field.grid();
    let axis = match g.kind() {
        GridKind::Strip => "xi",
        GridKind::Tube => "s",
    };
    let mut out = String::with_capacity(40 * (g.ncols() + 2) * (g.nrows() + 2));
    let _ = writeln!(out, "{axis},eta,value");
    let (c0, c1) = if g.periodic() { (0, g.ncols() as isize) } else { (-1, g.ncols() as isize + 1) };
    for c in c0..c1 {
        let s = g.s_origin() + c as f64 * g.hs();
        for j in -1..=(g.nrows() as isize) {
            let eta = -1.0 + (j + 1) as f64 * g.heta();
            let inside = c >= 0 && (c as usize) < g.ncols() && j >= 0 && (j as usize) < g.nrows();
            let v = if inside { field.at(c as usize, j as usize) } else { 0.0 };
            let _ = writeln!(out, "{},{},{}", format_sig9(s), format_sig9(eta), format_sig9(v));
        }
    }
    out
}

pub fn parse_field_csv(text: &str) -> Result<FieldTable> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty field file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() != 3 || !(cols[0] == "xi" || cols[0] == "s") || cols[1] != "eta" || cols[2] != "value" {
        return Err(Error::Parse(format!("unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for (ln, line) in lines {
        let mut vals = [0.0; 3];
        let mut parts = line.split(',');
        for v in vals.iter_mut() {
            let tok = parts.next().ok_or_else(|| Error::Parse(format!("line {}: expected 3 columns", ln + 1)))?;
            *v = tok
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: `{}`: {e}", ln + 1, tok.trim())))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("line {}: non-finite value", ln + 1)));
            }
        }
        if parts.next().is_some() {
            return Err(Error::Parse(format!("line {}: expected 3 columns", ln + 1)));
        }
        rows.push(vals);
    }
    Ok(FieldTable { axis: cols[0].to_string(), rows })
}

/// Rebuilds a field on `grid` from a parsed table written for the same grid.
pub fn field_from_table(grid: &Arc<Grid>, table: &FieldTable) -> Result<GridField> {
    let (c0, c1) = if grid.periodic() { (0, grid.ncols() as isize) } else { (-1, grid.ncols() as isize + 1) };
    let expected = (c1 - c0) as usize * (grid.nrows() + 2);
    if table.rows.len() != expected {
        return Err(Error::Parse(format!("expected {expected} rows, found {}", table.rows.len())));
    }
    let mut values = vec![0.0; grid.len()];
    let mut it = table.rows.iter();
    let tol = 1e-6 * grid.hs().min(grid.heta());
    for c in c0..c1 {
        let s = grid.s_origin() + c as f64 * grid.hs();
        for j in -1..=(grid.nrows() as isize) {
            let row = it.next().expect("row count checked");
            let eta = -1.0 + (j + 1) as f64 * grid.heta();
            if (row[0] - s).abs() > tol.max(1e-8 * s.abs()) || (row[1] - eta).abs() > tol {
                return Err(Error::Parse(format!("node ({}, {}) does not match the grid", row[0], row[1])));
            }
            let inside = c >= 0 && (c as usize) < grid.ncols() && j >= 0 && (j as usize) < grid.nrows();
            if inside {
                values[grid.idx(c as usize, j as usize)] = row[2];
            }
        }
    }
    GridField::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::grid::build_strip_grid;

    #[test]
    fn round_trip_keeps_nine_digits() {
        let g = build_strip_grid(1.0, 0.25).unwrap();
        let f = GridField::from_fn(g.clone(), |x, e| (1.0 + x).exp() * (1.0 - e * e) / 3.0);
        let text = field_to_csv(&f);
        assert!(text.starts_with("xi,eta,value\n"));
        let back = field_from_table(&g, &parse_field_csv(&text).unwrap()).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 1e-8 * a.abs());
        }
    }

    #[test]
    fn malformed_lines_are_errors() {
        assert!(parse_field_csv("").is_err());
        assert!(parse_field_csv("x,y,z\n").is_err());
        assert!(parse_field_csv("xi,eta,value\n1,2\n").is_err());
        assert!(parse_field_csv("xi,eta,value\n1,2,nan\n").is_err());
        assert!(parse_field_csv("xi,eta,value\n1,2,3,4\n").is_err());
    }
}
