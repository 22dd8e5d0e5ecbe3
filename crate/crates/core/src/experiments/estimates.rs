//! Ratio statistics for the linear estimates of the free group on seeded wave-packet ensembles.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::report::{fit_log_slope, Check, ExperimentReport, Point};
use crate::error::{Error, Result};
use crate::norms::{sobolev_norm, xst_norm, MixedNormAccumulator, MixedNormSpec, SpaceTimeField};
use crate::spectral::{fractional_derivative, free_evolve, lowpass_p0, Field, SpectralGrid};

/// Which estimate a ratio measures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    /// `‖D^{1/2}V(t)φ‖_{L^∞_x L²_T} / ‖φ‖_{L²}`.
    KatoSmoothing,
    /// `‖D^{-1/4}V(t)φ‖_{L⁴_x L^∞_T} / ‖φ‖_{L²}` on mean-zero data.
    MaximalFunction,
    /// `‖P₀V(t)φ‖_{L²_x L^∞_T} / ‖P₀φ‖_{L²}`.
    LowFrequency,
}

impl Estimate {
    pub fn label(self) -> &'static str {
        match self {
            Estimate::KatoSmoothing => "kato_smoothing",
            Estimate::MaximalFunction => "maximal_function",
            Estimate::LowFrequency => "low_frequency",
        }
    }
}

/// Unit-interval draws that [`PacketDraw::realize`] maps onto a grid-dependent parameter box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PacketDraw {
    pub u_frequency: f64,
    pub u_width: f64,
    pub u_position: f64,
}

/// `exp(-(x-x₀)²/(2w²)) e^{iξ(x-x₀)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Packet {
    pub frequency: f64,
    pub width: f64,
    pub position: f64,
}

impl Packet {
    pub fn field(&self, grid: &SpectralGrid) -> Field {
        let Packet { frequency, width, position } = *self;
        Field::from_fn_complex(grid, |x| {
            let y = x - position;
            Complex64::from_polar((-(y * y) / (2.0 * width * width)).exp(), frequency * y)
        })
    }
}

/// Parameter box for packet ensembles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PacketFamily {
    /// `[lo, hi]` of the center frequency; log-uniform when `log_frequency`.
    pub frequency: (f64, f64),
    pub log_frequency: bool,
    pub width: (f64, f64),
    /// Positions as a fraction of `L`, centered at 0.
    pub position_fraction: f64,
}

impl PacketFamily {
    /// Log-uniform center frequency in `[8, ξ_max/4]`, width in `[1, 4]`.
    pub fn high(grid: &SpectralGrid) -> Self {
        Self { frequency: (8.0, (grid.xi_max() / 4.0).max(8.0)), log_frequency: true, width: (1.0, 4.0), position_fraction: 0.25 }
    }

    /// Broad packets with center `|ξ| ≤ 0.1`, seen mostly by `P₀`.
    pub fn low() -> Self {
        Self { frequency: (-0.1, 0.1), log_frequency: false, width: (10.0, 40.0), position_fraction: 0.125 }
    }

    pub fn realize(&self, d: &PacketDraw, grid: &SpectralGrid) -> Packet {
        let (flo, fhi) = self.frequency;
        let frequency = if self.log_frequency { flo * (fhi / flo).powf(d.u_frequency) } else { flo + (fhi - flo) * d.u_frequency };
        let width = self.width.0 + (self.width.1 - self.width.0) * d.u_width;
        let position = (d.u_position - 0.5) * self.position_fraction * grid.length();
        Packet { frequency, width, position }
    }
}

pub fn draw_packets(n_trials: usize, seed: u64) -> Vec<PacketDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_trials).map(|_| PacketDraw { u_frequency: rng.gen(), u_width: rng.gen(), u_position: rng.gen() }).collect()
}

/// Rejects grids where a packet can travel a quarter period within `T`.
pub fn check_wrap_around(grid: &SpectralGrid, t: f64) -> Result<()> {
    let lhs = 2.0 * grid.xi_max() * t;
    let rhs = grid.length() / 4.0;
    if lhs < rhs {
        Ok(())
    } else {
        Err(Error::WrapAround { lhs, rhs })
    }
}

fn times(t: f64, n_times: usize) -> Vec<f64> {
    (0..n_times).map(|i| t * i as f64 / (n_times - 1) as f64).collect()
}

/// `(LHS, RHS)` of one estimate for one datum, sampled at `n_times` uniform times on `[0, T]`.
pub fn estimate_sides(estimate: Estimate, phi: &Field, t: f64, n_times: usize) -> Result<(f64, f64)> {
    if n_times < 2 {
        return Err(Error::InvalidParameter("need at least two time samples".into()));
    }
    let g = phi.grid();
    let (base, spec, rhs) = match estimate {
        Estimate::KatoSmoothing => (fractional_derivative(phi, 0.5)?, MixedNormSpec::x_outer(f64::INFINITY, 2.0), phi.l2_norm()),
        Estimate::MaximalFunction => {
            let phi = phi.without_mean();
            (fractional_derivative(&phi, -0.25)?, MixedNormSpec::x_outer(4.0, f64::INFINITY), phi.l2_norm())
        }
        Estimate::LowFrequency => {
            if !(t < 1.0) {
                return Err(Error::InvalidParameter(format!("low-frequency estimate needs T < 1, got {t}")));
            }
            let low = lowpass_p0(phi);
            let rhs = low.l2_norm();
            (low, MixedNormSpec::x_outer(2.0, f64::INFINITY), rhs)
        }
    };
    let ts = times(t, n_times);
    let w = crate::norms::trapezoid_weights(&ts);
    let mut acc = MixedNormAccumulator::new(g.n_points(), g.dx(), spec);
    for (&tau, &wi) in ts.iter().zip(&w) {
        acc.push(free_evolve(&base, tau).values(), wi);
    }
    Ok((acc.finish()?, rhs))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioStatistics {
    pub n_trials: usize,
    /// Per-trial ratios on the finest rung.
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    pub resolution_ladder: Vec<(usize, f64)>,
}

impl RatioStatistics {
    /// Largest over smallest `sup_ratio` across the ladder.
    pub fn ladder_drift(&self) -> f64 {
        let sups = self.resolution_ladder.iter().map(|(_, s)| *s);
        let hi = sups.clone().fold(f64::MIN, f64::max);
        let lo = sups.fold(f64::MAX, f64::min);
        hi / lo
    }
}

/// Ensemble and grid ladder shared by the ratio experiments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSetup {
    pub length: f64,
    pub n_ladder: Vec<usize>,
    pub t: f64,
    pub n_times: usize,
    pub n_trials: usize,
    pub seed: u64,
}

impl RatioSetup {
    pub fn validate(&self) -> Result<()> {
        if self.n_ladder.is_empty() || self.n_trials == 0 || self.n_times < 2 {
            return Err(Error::InvalidParameter("ratio setup needs a ladder, trials and >= 2 times".into()));
        }
        if !(self.t > 0.0) {
            return Err(Error::InvalidParameter(format!("T must be positive, got {}", self.t)));
        }
        for &n in &self.n_ladder {
            check_wrap_around(&SpectralGrid::new(n, self.length)?, self.t)?;
        }
        Ok(())
    }
}

fn ensemble_ratios(estimate: Estimate, grid: &SpectralGrid, draws: &[PacketDraw], setup: &RatioSetup) -> Result<Vec<f64>> {
    let family = match estimate {
        Estimate::LowFrequency => PacketFamily::low(),
        _ => PacketFamily::high(grid),
    };
    draws
        .iter()
        .map(|d| {
            let phi = family.realize(d, grid).field(grid);
            let (lhs, rhs) = estimate_sides(estimate, &phi, setup.t, setup.n_times)?;
            Ok(lhs / rhs)
        })
        .collect()
}

fn ratio_statistics(estimate: Estimate, setup: &RatioSetup) -> Result<RatioStatistics> {
    setup.validate()?;
    let draws = draw_packets(setup.n_trials, setup.seed);
    let mut ladder = Vec::new();
    let mut finest = Vec::new();
    for &n in &setup.n_ladder {
        let grid = SpectralGrid::new(n, setup.length)?;
        let ratios = ensemble_ratios(estimate, &grid, &draws, setup)?;
        if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidParameter(format!("{} produced a non-positive ratio", estimate.label())));
        }
        ladder.push((n, ratios.iter().cloned().fold(0.0, f64::max)));
        finest = ratios;
    }
    Ok(RatioStatistics { n_trials: setup.n_trials, sup_ratio: ladder.last().expect("nonempty").1, ratios: finest, resolution_ladder: ladder })
}

pub fn kato_smoothing_ratio(setup: &RatioSetup) -> Result<RatioStatistics> {
    ratio_statistics(Estimate::KatoSmoothing, setup)
}

pub fn maximal_function_ratio(setup: &RatioSetup) -> Result<RatioStatistics> {
    ratio_statistics(Estimate::MaximalFunction, setup)
}

pub fn lowfreq_ratio(setup: &RatioSetup) -> Result<RatioStatistics> {
    if !(setup.t < 1.0) {
        return Err(Error::InvalidParameter(format!("low-frequency estimate needs T < 1, got {}", setup.t)));
    }
    ratio_statistics(Estimate::LowFrequency, setup)
}

/// `‖V(·)φ‖_{X^s_T} / ‖φ‖_{H^s}` per packet, on every rung.
pub fn xst_group_ratio(setup: &RatioSetup, s: f64) -> Result<RatioStatistics> {
    setup.validate()?;
    if !(setup.t < 1.0) {
        return Err(Error::InvalidParameter(format!("group estimate needs T < 1, got {}", setup.t)));
    }
    let draws = draw_packets(setup.n_trials, setup.seed);
    let mut ladder = Vec::new();
    let mut finest = Vec::new();
    for &n in &setup.n_ladder {
        let grid = SpectralGrid::new(n, setup.length)?;
        let family = PacketFamily::high(&grid);
        let ratios = draws
            .iter()
            .map(|d| {
                let phi = family.realize(d, &grid).field(&grid);
                let u = SpaceTimeField::sample(setup.t, setup.n_times, |t| free_evolve(&phi, t))?;
                Ok(xst_norm(&u, s)?.total() / sobolev_norm(&phi, s, false)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        ladder.push((n, ratios.iter().cloned().fold(0.0, f64::max)));
        finest = ratios;
    }
    Ok(RatioStatistics { n_trials: setup.n_trials, sup_ratio: ladder.last().expect("nonempty").1, ratios: finest, resolution_ladder: ladder })
}

/// Kato ratio of single torus modes `e^{iξx}` for the given frequencies, with the fitted growth exponent.
pub fn plane_wave_control(grid: &SpectralGrid, t: f64, n_times: usize, frequencies: &[f64]) -> Result<(Vec<(f64, f64)>, f64)> {
    let dxi = grid.dxi();
    let mut out = Vec::new();
    for &f in frequencies {
        let xi = (f / dxi).round() * dxi;
        let phi = Field::from_fn_complex(grid, |x| Complex64::from_polar(1.0, xi * x));
        let (lhs, rhs) = estimate_sides(Estimate::KatoSmoothing, &phi, t, n_times)?;
        out.push((xi, lhs / rhs));
    }
    let xs: Vec<f64> = out.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = out.iter().map(|p| p.1).collect();
    Ok((out, fit_log_slope(&xs, &ys)?.slope))
}

/// Drift and control checks for the Kato smoothing, maximal-function and low-frequency estimates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatesSpec {
    pub setup: RatioSetup,
    pub max_drift: f64,
    pub control_frequencies: Vec<f64>,
    pub control_exponent_tol: f64,
}

pub fn run_estimates(spec: &EstimatesSpec) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("linear_estimates", spec);
    report.seed = Some(spec.setup.seed);
    let runs = [
        (Estimate::KatoSmoothing, kato_smoothing_ratio(&spec.setup)?),
        (Estimate::MaximalFunction, maximal_function_ratio(&spec.setup)?),
        (Estimate::LowFrequency, lowfreq_ratio(&spec.setup)?),
    ];
    for (est, stats) in &runs {
        for (n, sup) in &stats.resolution_ladder {
            report.points.push(Point::new(est.label(), *n as f64, *sup));
        }
        report.check(Check::new(
            format!("{}_ladder_drift", est.label()),
            stats.ladder_drift(),
            format!("< {}", spec.max_drift),
            stats.ladder_drift() < spec.max_drift,
        ));
    }
    let finest = *spec.setup.n_ladder.iter().max().expect("nonempty ladder");
    let grid = SpectralGrid::new(finest, spec.setup.length)?;
    let (control, exponent) = plane_wave_control(&grid, spec.setup.t, spec.setup.n_times, &spec.control_frequencies)?;
    for (xi, r) in &control {
        let exact = (xi * spec.setup.t / spec.setup.length).sqrt();
        report.points.push(Point::new("plane_wave", *xi, *r).with("exact", exact));
    }
    report.check(Check::within("plane_wave_exponent", exponent, 0.5, spec.control_exponent_tol));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_around_is_enforced() {
        let g = SpectralGrid::new(4096, 400.0).unwrap();
        assert!(check_wrap_around(&g, 0.25).is_ok());
        assert!(matches!(check_wrap_around(&g, 2.0), Err(Error::WrapAround { .. })));
    }

    #[test]
    fn lowfreq_vanishes_without_low_modes() {
        let g = SpectralGrid::new(256, 2.0 * PI).unwrap();
        // P₀ is supported in |ξ| < 1/4, so the lattice 0, ±1, … only keeps the mean
        let phi = Field::from_fn(&g, |x| (5.0 * x).cos() + (9.0 * x).sin());
        let (lhs, _) = estimate_sides(Estimate::LowFrequency, &phi, 0.5, 16).unwrap();
        assert!(lhs <= 1e-12);
        assert!(estimate_sides(Estimate::LowFrequency, &phi, 1.0, 16).is_err());
    }

    #[test]
    fn single_low_mode_maximal_ratio() {
        let l = 2.0 * PI;
        let g = SpectralGrid::new(64, l).unwrap();
        let phi = Field::from_fn_complex(&g, |x| Complex64::from_polar(1.0, x));
        let (lhs, rhs) = estimate_sides(Estimate::MaximalFunction, &phi, 0.5, 9).unwrap();
        assert!((lhs - l.powf(0.25)).abs() < 1e-12 && (rhs - l.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_exponent_is_one_half() {
        let g = SpectralGrid::new(2048, 100.0).unwrap();
        let (pts, slope) = plane_wave_control(&g, 0.1, 64, &[4.0, 8.0, 16.0, 32.0]).unwrap();
        assert!((slope - 0.5).abs() < 1e-3, "{slope}");
        for (xi, r) in pts {
            let exact = (xi * 0.1 / 100.0).sqrt();
            assert!((r - exact).abs() < 1e-10 * exact);
        }
    }

    #[test]
    fn draws_are_seeded() {
        assert_eq!(draw_packets(4, 7), draw_packets(4, 7));
        assert_ne!(draw_packets(4, 7), draw_packets(4, 8));
    }

    #[test]
    fn xst_single_low_mode_is_finite() {
        let g = SpectralGrid::new(128, 20.0 * PI).unwrap();
        let phi = Field::from_fn(&g, |x| (0.1 * x).cos());
        let u = SpaceTimeField::sample(0.5, 17, |t| free_evolve(&phi, t)).unwrap();
        let c = xst_norm(&u, 0.3).unwrap();
        assert!([c.energy, c.smoothing, c.maximal, c.low_maximal].iter().all(|v| v.is_finite() && *v > 0.0));
        let high = Field::from_fn(&g, |x| (3.0 * x).cos());
        let u = SpaceTimeField::sample(0.5, 17, |t| free_evolve(&high, t)).unwrap();
        assert!(xst_norm(&u, 0.3).unwrap().low_maximal <= 1e-12);
    }
}
