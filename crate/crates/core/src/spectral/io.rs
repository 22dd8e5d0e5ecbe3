//! Plain-text serialization of fields in frequency space.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::field::Field;
use super::grid::SpectralGrid;
use crate::error::{Error, Result};

pub const CONVENTION: &str = "forward = ∫e^{−ixξ}, discrete coefficients scaled by L/n";

/// CSV with a commented header and one row per mode in m-order.
pub fn field_to_csv(f: &Field) -> String {
    let g = f.grid();
    let mut out = String::new();
    writeln!(out, "# n_points = {}", g.n_points()).unwrap();
    writeln!(out, "# length = {:e}", g.length()).unwrap();
    writeln!(out, "# convention = {CONVENTION}").unwrap();
    out.push_str("m,xi,re,im\n");
    for (i, c) in f.coeffs().iter().enumerate() {
        writeln!(out, "{},{:e},{:e},{:e}", g.mode(i), g.xi(i), c.re, c.im).unwrap();
    }
    out
}

pub fn field_from_csv(text: &str) -> Result<Field> {
    let bad = |msg: &str| Error::InvalidParameter(format!("field csv: {msg}"));
    let mut n = None;
    let mut length = None;
    let mut rows = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(h) = line.strip_prefix('#') {
            let (key, value) = h.split_once('=').ok_or_else(|| bad("malformed header"))?;
            match key.trim() {
                "n_points" => n = Some(value.trim().parse::<usize>().map_err(|_| bad("n_points"))?),
                "length" => length = Some(value.trim().parse::<f64>().map_err(|_| bad("length"))?),
                "convention" if value.trim() != CONVENTION => return Err(bad("unknown convention")),
                _ => {}
            }
        } else if !line.starts_with("m,") {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(bad("expected 4 columns"));
            }
            let m: i64 = cols[0].parse().map_err(|_| bad("mode index"))?;
            let re: f64 = cols[2].parse().map_err(|_| bad("real part"))?;
            let im: f64 = cols[3].parse().map_err(|_| bad("imaginary part"))?;
            rows.push((m, Complex64::new(re, im)));
        }
    }
    let grid = SpectralGrid::new(n.ok_or_else(|| bad("missing n_points"))?, length.ok_or_else(|| bad("missing length"))?)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.n_points()];
    if rows.len() != grid.n_points() {
        return Err(bad("row count differs from n_points"));
    }
    for (m, c) in rows {
        let slot = grid.slot(m).ok_or_else(|| bad("mode outside grid"))?;
        coeffs[slot] = c;
    }
    Field::from_coeffs(&grid, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let g = SpectralGrid::new(16, 7.5).unwrap();
        let f = Field::from_fn(&g, |x| (x / 3.0).sin() + 0.25);
        let back = field_from_csv(&field_to_csv(&f)).unwrap();
        assert_eq!(back.grid(), f.grid());
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1.0));
        }
    }

    #[test]
    fn rejects_truncated_input() {
        let g = SpectralGrid::new(8, 1.0).unwrap();
        let text = field_to_csv(&Field::zeros(&g));
        let cut: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(field_from_csv(&cut).is_err());
    }
}
