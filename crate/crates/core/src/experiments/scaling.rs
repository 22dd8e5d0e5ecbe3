//! The scaling symmetry `u ↦ λ^{1/k} u(λx, λ²t)` on initial data and along the flow.

use serde::Serialize;

use super::report::{Check, ExperimentReport, Point};
use crate::error::Result;
use crate::norms::sobolev_norm;
use crate::solver::{evolve, rescale, rescale_traj, SolverConfig};
use crate::spectral::{relative_distance, Field};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingSpec {
    pub k: u32,
    pub lambdas: Vec<f64>,
    pub s_list: Vec<f64>,
    pub norm_tol: f64,
    /// Flow-commutation run; `None` checks initial data only.
    pub flow: Option<SolverConfig>,
    pub flow_tol: f64,
}

/// `‖rescale(u₀, λ)‖_{Ḣ^s} / ‖u₀‖_{Ḣ^s}` and the law `λ^{s+1/k-1/2}`.
pub fn norm_ratio(u0: &Field, lambda: f64, k: u32, s: f64) -> Result<(f64, f64)> {
    let before = sobolev_norm(u0, s, true)?;
    let after = sobolev_norm(&rescale(u0, lambda, k)?, s, true)?;
    Ok((after / before, lambda.powf(s + 1.0 / k as f64 - 0.5)))
}

/// Largest relative slice distance between `evolve(rescale(u₀))` and `rescale(evolve(u₀))`.
pub fn flow_commutation(u0: &Field, lambda: f64, cfg: &SolverConfig) -> Result<f64> {
    let direct = rescale_traj(&evolve(u0, cfg)?, lambda)?;
    let l2 = lambda * lambda;
    let mut scaled = cfg.clone();
    scaled.dt /= l2;
    scaled.t_end /= l2;
    let flowed = evolve(&rescale(u0, lambda, cfg.k)?, &scaled)?;
    Ok(direct
        .field
        .slices()
        .iter()
        .zip(flowed.field.slices())
        .map(|(a, b)| relative_distance(a, b))
        .fold(0.0, f64::max))
}

pub fn scaling_invariance_check(u0: &Field, spec: &ScalingSpec) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("scaling", spec);
    for &lambda in &spec.lambdas {
        for &s in &spec.s_list {
            let (ratio, law) = norm_ratio(u0, lambda, spec.k, s)?;
            report.points.push(Point::new(format!("lambda={lambda}"), s, ratio).with("law", law));
            report.check(Check::at_most(format!("norm_law_lambda{lambda}_s{s}"), (ratio - law).abs() / law, spec.norm_tol));
        }
        if let Some(cfg) = &spec.flow {
            let d = flow_commutation(u0, lambda, cfg)?;
            report.points.push(Point::new("flow_commutation", lambda, d));
            report.check(Check::at_most(format!("flow_commutation_lambda{lambda}"), d, spec.flow_tol));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralGrid;

    fn data() -> Field {
        let g = SpectralGrid::new(512, 40.0).unwrap();
        Field::from_fn(&g, |x| 0.1 * (-(x * x)).exp())
    }

    #[test]
    fn identity_scaling() {
        let u = data();
        for s in [0.1, 0.3, 0.49] {
            let (r, law) = norm_ratio(&u, 1.0, 12, s).unwrap();
            assert!((r - 1.0).abs() < 1e-14 && law == 1.0);
        }
    }

    #[test]
    fn critical_norm_is_invariant() {
        let u = data();
        let (r, _) = norm_ratio(&u, 2.0, 12, 5.0 / 12.0).unwrap();
        assert!((r - 1.0).abs() < 1e-10, "{r}");
        let (r, law) = norm_ratio(&u, 2.0, 12, 0.3).unwrap();
        assert!((law - 2f64.powf(0.3 + 1.0 / 12.0 - 0.5)).abs() < 1e-15);
        assert!((r - law).abs() < 1e-10 * law);
    }

    #[test]
    fn report_collects_checks() {
        let spec = ScalingSpec { k: 12, lambdas: vec![1.0, 2.0], s_list: vec![0.3], norm_tol: 1e-10, flow: None, flow_tol: 1e-6 };
        let r = scaling_invariance_check(&data(), &spec).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks.len(), 2);
    }
}
