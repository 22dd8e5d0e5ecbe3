use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::spectral::sign_convention;

pub const SCHEMA_VERSION: u32 = 1;

pub fn code_version() -> String {
    format!("bolab-core {}", env!("CARGO_PKG_VERSION"))
}

/// A named pass/fail decision with the measured value and its bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, bound: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), measured, bound: bound.into(), pass }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self::new(name, measured, format!("<= {limit:e}"), measured <= limit)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self::new(name, measured, format!(">= {limit:e}"), measured >= limit)
    }

    pub fn within(name: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        Self::new(name, measured, format!("{target:.6} +/- {tol}"), (measured - target).abs() <= tol)
    }
}

/// One row of the plotting series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Point {
    pub label: String,
    pub x: f64,
    pub y: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<(String, f64)>,
}

impl Point {
    pub fn new(label: impl Into<String>, x: f64, y: f64) -> Self {
        Self { label: label.into(), x, y, extra: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.extra.push((key.to_string(), value));
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn from_checks(checks: &[Check]) -> Self {
        if checks.iter().all(|c| c.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub id: String,
    pub params: serde_json::Value,
    pub points: Vec<Point>,
    pub slope: Option<f64>,
    pub ci: Option<[f64; 2]>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub sign_convention: String,
    pub code_version: String,
    pub seed: Option<u64>,
}

impl ExperimentReport {
    pub fn new(id: impl Into<String>, params: impl Serialize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            id: id.into(),
            params: serde_json::to_value(params).expect("serializable parameters"),
            points: Vec::new(),
            slope: None,
            ci: None,
            checks: Vec::new(),
            verdict: Verdict::Pass,
            notes: Vec::new(),
            sign_convention: sign_convention(),
            code_version: code_version(),
            seed: None,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
        self.verdict = Verdict::from_checks(&self.checks);
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }

    pub fn series_csv(&self) -> String {
        let mut keys: Vec<String> = Vec::new();
        for p in &self.points {
            for (k, _) in &p.extra {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
        let mut out = String::from("label,x,y");
        for k in &keys {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for p in &self.points {
            write!(out, "{},{:e},{:e}", p.label, p.x, p.y).unwrap();
            for k in &keys {
                match p.extra.iter().find(|(name, _)| name == k) {
                    Some((_, v)) => write!(out, ",{v:e}").unwrap(),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}: {}", self.id, if self.passed() { "PASS" } else { "FAIL" }).unwrap();
        if let Some(s) = self.slope {
            write!(out, "slope = {s:.4}").unwrap();
            if let Some([lo, hi]) = self.ci {
                write!(out, " (95% CI [{lo:.4}, {hi:.4}])").unwrap();
            }
            out.push('\n');
        }
        for c in &self.checks {
            writeln!(out, "  [{}] {} = {:.6e} (want {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.measured, c.bound)
                .unwrap();
        }
        for n in &self.notes {
            writeln!(out, "  note: {n}").unwrap();
        }
        writeln!(out, "  {}", self.sign_convention).unwrap();
        out
    }

    /// Writes `report.json`, `series.csv` and `summary.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json())?;
        fs::write(dir.join("series.csv"), self.series_csv())?;
        fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }
}

/// Least-squares line with a 95% confidence interval on the slope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci: [f64; 2],
    pub residuals: Vec<f64>,
}

pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(Error::InvalidParameter("slope fit needs at least three paired points".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("slope fit needs distinct abscissae".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - intercept - slope * x).collect();
    let dof = nf - 2.0;
    let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / dof;
    let se = (s2 / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom").inverse_cdf(0.975);
    Ok(SlopeFit { slope, intercept, ci: [slope - t * se, slope + t * se], residuals })
}

/// Slope of `log y` against `log x`.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = fit_slope(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-13);
        assert!((f.ci[1] - f.ci[0]).abs() < 1e-10);
    }

    #[test]
    fn power_law_slope() {
        let xs = [64.0, 128.0, 256.0, 512.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.7)).collect();
        assert!((fit_log_slope(&xs, &ys).unwrap().slope + 0.7).abs() < 1e-12);
        assert!(fit_log_slope(&[1.0, 2.0, 3.0], &[1.0, -1.0, 2.0]).is_err());
    }

    #[test]
    fn confidence_interval_covers_noisy_slope() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [0.1, 0.9, 2.1, 2.9, 4.1];
        let f = fit_slope(&xs, &ys).unwrap();
        assert!(f.ci[0] < 1.0 && 1.0 < f.ci[1]);
    }

    #[test]
    fn verdict_tracks_checks() {
        let mut r = ExperimentReport::new("t", serde_json::json!({"a": 1}));
        r.check(Check::at_most("x", 1.0, 2.0));
        assert!(r.passed());
        r.check(Check::at_least("y", 1.0, 2.0));
        assert!(!r.passed());
        assert!(r.to_json().contains("\"verdict\": \"FAIL\""));
        assert!(!r.to_json().contains("timestamp"));
    }

    #[test]
    fn csv_fills_missing_columns() {
        let mut r = ExperimentReport::new("t", ());
        r.points.push(Point::new("a", 1.0, 2.0).with("z", 3.0));
        r.points.push(Point::new("b", 1.0, 2.0));
        let csv = r.series_csv();
        assert_eq!(csv.lines().next().unwrap(), "label,x,y,z");
        assert!(csv.lines().nth(2).unwrap().ends_with(','));
    }
}
