//! Refinement studies for the gauge-equation and Duhamel residuals.

use serde::Serialize;

use super::report::{Check, ExperimentReport, Point};
use crate::error::{Error, Result};
use crate::gauge::{gauge_equation_residual, InnerRoute};
use crate::solver::{duhamel_residual, evolve, SolverConfig};
use crate::spectral::{Field, SpectralGrid};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeStudySpec {
    pub k: u32,
    /// Slice spacing on the coarsest level.
    pub slice_spacing: f64,
    /// Solver steps per slice, kept across levels so the step halves with the spacing.
    pub stride: usize,
    pub n_slices: usize,
    pub levels: usize,
    pub route: InnerRoute,
    pub min_ratio: f64,
    pub max_relative: f64,
}

impl GaugeStudySpec {
    pub fn validate(&self, grid: &SpectralGrid) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::InvalidParameter("refinement study needs >= 2 levels".into()));
        }
        if self.n_slices < 5 {
            return Err(Error::TooFewSlices { needed: 5, got: self.n_slices });
        }
        if self.stride == 0 || !(self.slice_spacing > 0.0) {
            return Err(Error::InvalidParameter("slice spacing and stride must be positive".into()));
        }
        let dt = self.slice_spacing / self.stride as f64;
        let bound = SolverConfig::stability_bound(grid);
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("coarse step {dt} exceeds stability bound {bound}")));
        }
        Ok(())
    }
}

/// Gauge residual of the rescaled equation on successively halved step and slice spacing.
pub fn gauge_refinement(u0: &Field, spec: &GaugeStudySpec) -> Result<ExperimentReport> {
    spec.validate(u0.grid())?;
    let mut report = ExperimentReport::new("gauge_residual", spec);
    let mut abs = Vec::new();
    let mut rel = Vec::new();
    for level in 0..spec.levels {
        let h = spec.slice_spacing / 2f64.powi(level as i32);
        let mut cfg = SolverConfig::new(spec.k, h / spec.stride as f64, h * (spec.n_slices - 1) as f64);
        cfg.rescaled = true;
        cfg.stride = spec.stride;
        let traj = evolve(u0, &cfg)?;
        let (r, _) = gauge_equation_residual(&traj, spec.route)?;
        report.points.push(Point::new("residual", h, r.residual_norm).with("relative", r.relative_residual).with("dt", r.dt));
        abs.push(r.residual_norm);
        rel.push(r.relative_residual);
    }
    let worst_ratio = abs.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
    report.check(Check::at_least("halving_ratio_min", worst_ratio, spec.min_ratio));
    report.check(Check::at_most("finest_relative_residual", *rel.last().expect("levels"), spec.max_relative));
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DuhamelStudySpec {
    pub config: SolverConfig,
    /// Slice strides, coarse to fine, each half the previous.
    pub strides: Vec<usize>,
    pub max_residual: f64,
    pub min_ratio: f64,
}

/// Duhamel residual of one trajectory at several slice strides.
pub fn duhamel_refinement(u0: &Field, spec: &DuhamelStudySpec) -> Result<ExperimentReport> {
    if spec.strides.len() < 2 {
        return Err(Error::InvalidParameter("refinement study needs >= 2 strides".into()));
    }
    let mut report = ExperimentReport::new("duhamel_residual", spec);
    let mut res = Vec::new();
    for &stride in &spec.strides {
        let mut cfg = spec.config.clone();
        cfg.stride = stride;
        let r = duhamel_residual(&evolve(u0, &cfg)?)?;
        report.points.push(Point::new("residual", stride as f64, r));
        res.push(r);
    }
    let worst_ratio = res.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
    report.check(Check::at_most("finest_residual", *res.last().expect("strides"), spec.max_residual));
    report.check(Check::at_least("halving_ratio_min", worst_ratio, spec.min_ratio));
    Ok(report)
}
