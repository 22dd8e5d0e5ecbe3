//! Integrating-factor Runge–Kutta integration of the generalized Benjamin–Ono equation.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::SpaceTimeField;
use crate::spectral::field::nan_max;
use crate::spectral::{dispersion, dispersion_sign, sign_convention, Field, SpectralGrid};

/// Ratio of the blow-up threshold to the initial sup norm.
pub const BLOWUP_FACTOR: f64 = 1e6;

/// Sign in front of the nonlinearity in `∂ₜu + H∂ₓ²u ± uᵏ∂ₓu = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearSign {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    TwoThirds,
    None,
}

/// How the nonlinear term is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearForm {
    /// `∂ₓ(u^{k+1})/(k+1)`.
    Conservative,
    /// `uᵏ ∂ₓu`.
    Product,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub k: u32,
    pub sign: NonlinearSign,
    /// Solve `uₜ + Huₓₓ = 2uᵏuₓ` instead of the signed equation.
    pub rescaled: bool,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: Dealias,
    pub filter_strength: f64,
    /// Steps between recorded slices.
    pub stride: usize,
    pub form: NonlinearForm,
    /// Nonlinearity switch; off reduces the scheme to the free group.
    pub nonlinear: bool,
}

impl SolverConfig {
    pub fn new(k: u32, dt: f64, t_end: f64) -> Self {
        Self {
            k,
            sign: NonlinearSign::Plus,
            rescaled: false,
            dt,
            t_end,
            dealias: Dealias::TwoThirds,
            filter_strength: 0.0,
            stride: 1,
            form: NonlinearForm::Conservative,
            nonlinear: true,
        }
    }

    /// Coefficient `c` in `uₜ = -Huₓₓ + c ∂ₓ(u^{k+1})`.
    pub fn flux_coefficient(&self) -> f64 {
        if !self.nonlinear {
            return 0.0;
        }
        let kp = self.k as f64 + 1.0;
        if self.rescaled {
            2.0 / kp
        } else {
            match self.sign {
                NonlinearSign::Plus => -1.0 / kp,
                NonlinearSign::Minus => 1.0 / kp,
            }
        }
    }

    /// Largest admissible step on `grid`.
    pub fn stability_bound(grid: &SpectralGrid) -> f64 {
        0.5 / grid.xi_max().powi(2)
    }

    pub fn validate(&self, grid: &SpectralGrid) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        if !(self.filter_strength >= 0.0) {
            return Err(Error::InvalidParameter("filter_strength must be >= 0".into()));
        }
        let bound = Self::stability_bound(grid);
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("dt = {} exceeds stability bound {bound}", self.dt)));
        }
        Ok(())
    }

    /// Number of steps and the step actually taken.
    ///
    /// The step count is rounded up to a multiple of the stride, so `t_end` is hit exactly
    /// and recorded slices are uniformly spaced.
    pub fn schedule(&self) -> (usize, f64) {
        let raw = ((self.t_end / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let steps = raw.div_ceil(self.stride) * self.stride;
        (steps, self.t_end / steps as f64)
    }
}

/// Per-slice conservation record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    pub mass: f64,
    pub l2: f64,
    pub linf: f64,
}

impl LedgerRow {
    fn of(t: f64, u: &Field) -> Self {
        Self { t, mass: u.coeff(0).re, l2: u.l2_norm(), linf: u.sup_norm() }
    }
}

/// Recorded solution with its configuration and conservation ledger.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SolverConfig,
    /// Step size used, `t_end / steps`.
    pub dt_effective: f64,
    pub field: SpaceTimeField,
    pub ledger: Vec<LedgerRow>,
}

impl Trajectory {
    pub fn grid(&self) -> &SpectralGrid {
        self.field.grid()
    }

    /// Largest relative drift of mass and L² norm against the first slice.
    pub fn conservation_drift(&self) -> (f64, f64) {
        let first = self.ledger[0];
        let scale_mass = first.mass.abs().max(f64::MIN_POSITIVE);
        let scale_l2 = first.l2.max(f64::MIN_POSITIVE);
        self.ledger.iter().fold((0.0, 0.0), |(m, l), r| {
            (f64::max(m, (r.mass - first.mass).abs() / scale_mass), f64::max(l, (r.l2 - first.l2).abs() / scale_l2))
        })
    }

    pub fn ledger_csv(&self) -> String {
        let mut out = String::from("t,mass,L2,Linf\n");
        for r in &self.ledger {
            writeln!(out, "{:e},{:e},{:e},{:e}", r.t, r.mass, r.l2, r.linf).unwrap();
        }
        out
    }

    /// Header with configuration echo and sign convention, then one row per slice and sample.
    pub fn to_text(&self) -> String {
        let g = self.grid();
        let mut out = String::new();
        writeln!(out, "# config = {}", serde_json::to_string(&self.config).expect("serializable")).unwrap();
        writeln!(out, "# n_points = {}", g.n_points()).unwrap();
        writeln!(out, "# length = {:e}", g.length()).unwrap();
        writeln!(out, "# sign_convention = {}", sign_convention()).unwrap();
        out.push_str("t,x,u\n");
        for (t, s) in self.field.times().iter().zip(self.field.slices()) {
            for (j, v) in s.values().iter().enumerate() {
                writeln!(out, "{:e},{:e},{:e}", t, g.x(j), v.re).unwrap();
            }
        }
        out
    }
}

/// Precomputed propagators and masks for one grid and configuration.
#[derive(Clone, Debug)]
pub struct Solver {
    grid: SpectralGrid,
    config: SolverConfig,
    dt: f64,
    steps: usize,
    full: Vec<Complex64>,
    half: Vec<Complex64>,
    /// `c · iξ · mask · filter`, applied to the transform of the flux.
    flux_symbol: Vec<Complex64>,
    /// `iξ · mask` for the product form.
    derivative_symbol: Vec<Complex64>,
    mask: Vec<f64>,
}

impl Solver {
    pub fn new(grid: &SpectralGrid, config: SolverConfig) -> Result<Self> {
        config.validate(grid)?;
        let (steps, dt) = config.schedule();
        let sigma = dispersion_sign();
        let n = grid.n_points();
        let m_max = (n / 2) as f64;
        let cut = n as f64 / 3.0;
        let mut full = Vec::with_capacity(n);
        let mut half = Vec::with_capacity(n);
        let mut flux_symbol = Vec::with_capacity(n);
        let mut derivative_symbol = Vec::with_capacity(n);
        let mut mask = Vec::with_capacity(n);
        let c = config.flux_coefficient();
        for i in 0..n {
            let xi = grid.xi(i);
            let m = grid.mode(i).unsigned_abs() as f64;
            let phase = sigma * dispersion(xi);
            full.push(Complex64::from_polar(1.0, phase * dt));
            half.push(Complex64::from_polar(1.0, phase * dt * 0.5));
            let keep = match config.dealias {
                Dealias::TwoThirds => m < cut,
                Dealias::None => i != grid.nyquist_slot(),
            };
            let filter = (-config.filter_strength * (m / m_max).powi(36)).exp();
            let w = if keep { filter } else { 0.0 };
            mask.push(w);
            flux_symbol.push(Complex64::new(0.0, c * xi * w));
            derivative_symbol.push(Complex64::new(0.0, xi * w));
        }
        Ok(Self { grid: grid.clone(), config, dt, steps, full, half, flux_symbol, derivative_symbol, mask })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Transform of the nonlinear term of `uₜ = -Huₓₓ + N(u)` from the coefficients of `u`.
    fn nonlinear_coeffs(&self, coeffs: &[Complex64]) -> (Vec<Complex64>, f64) {
        let values = self.grid.inverse(coeffs);
        let sup = values.iter().map(|v| v.re.abs()).fold(0.0, nan_max);
        if !self.config.nonlinear {
            return (vec![Complex64::new(0.0, 0.0); coeffs.len()], sup);
        }
        let k = self.config.k as i32;
        let out = match self.config.form {
            NonlinearForm::Conservative => {
                let flux: Vec<Complex64> = values.iter().map(|v| Complex64::new(v.re.powi(k + 1), 0.0)).collect();
                let f = self.grid.forward(&flux);
                f.iter().zip(&self.flux_symbol).map(|(a, b)| a * b).collect()
            }
            NonlinearForm::Product => {
                let ux: Vec<Complex64> = coeffs.iter().zip(&self.derivative_symbol).map(|(a, b)| a * b).collect();
                let ux = self.grid.inverse(&ux);
                let scale = self.config.flux_coefficient() * (self.config.k as f64 + 1.0);
                let prod: Vec<Complex64> =
                    values.iter().zip(&ux).map(|(u, d)| Complex64::new(scale * u.re.powi(k) * d.re, 0.0)).collect();
                let p = self.grid.forward(&prod);
                p.iter().zip(&self.mask).map(|(a, w)| a * w).collect()
            }
        };
        (out, sup)
    }

    /// Nonlinear term as a field.
    pub fn nonlinear_rhs(&self, u: &Field) -> Result<Field> {
        if !u.is_real() {
            return Err(Error::ComplexInput);
        }
        Field::from_coeffs(&self.grid, self.nonlinear_coeffs(u.coeffs()).0)
    }

    /// One Lawson RK4 step on coefficients; returns the new coefficients and the sup norm at the start.
    fn step_coeffs(&self, u: &[Complex64]) -> (Vec<Complex64>, f64) {
        let h = self.dt;
        let (e, e2) = (&self.full, &self.half);
        let (k1, sup) = self.nonlinear_coeffs(u);
        let a: Vec<Complex64> = (0..u.len()).map(|i| e2[i] * (u[i] + 0.5 * h * k1[i])).collect();
        let (k2, _) = self.nonlinear_coeffs(&a);
        let b: Vec<Complex64> = (0..u.len()).map(|i| e2[i] * u[i] + 0.5 * h * k2[i]).collect();
        let (k3, _) = self.nonlinear_coeffs(&b);
        let c: Vec<Complex64> = (0..u.len()).map(|i| e[i] * u[i] + h * e2[i] * k3[i]).collect();
        let (k4, _) = self.nonlinear_coeffs(&c);
        let next = (0..u.len())
            .map(|i| e[i] * u[i] + h / 6.0 * (e[i] * k1[i] + 2.0 * e2[i] * (k2[i] + k3[i]) + k4[i]))
            .collect();
        (next, sup)
    }

    pub fn step(&self, u: &Field) -> Result<Field> {
        if !u.is_real() {
            return Err(Error::ComplexInput);
        }
        self.check_grid(u)?;
        Field::from_coeffs(&self.grid, self.step_coeffs(u.coeffs()).0)
    }

    fn check_grid(&self, u: &Field) -> Result<()> {
        if u.grid().same_as(&self.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn evolve(&self, u0: &Field) -> Result<Trajectory> {
        if !u0.is_real() {
            return Err(Error::ComplexInput);
        }
        self.check_grid(u0)?;
        let limit = BLOWUP_FACTOR * u0.sup_norm().max(f64::MIN_POSITIVE);
        let mut times = vec![0.0];
        let mut slices = vec![u0.clone()];
        let mut ledger = vec![LedgerRow::of(0.0, u0)];
        let mut coeffs = u0.coeffs().to_vec();
        for n in 1..=self.steps {
            let (next, sup) = self.step_coeffs(&coeffs);
            let t = n as f64 * self.dt;
            if !(sup <= limit) {
                return Err(Error::BlowUp { t: t - self.dt, sup, limit });
            }
            coeffs = next;
            if n % self.config.stride == 0 {
                let mut f = Field::from_coeffs(&self.grid, coeffs.clone())?;
                if !f.is_real() {
                    f = f.re();
                }
                if !(f.sup_norm() <= limit) {
                    return Err(Error::BlowUp { t, sup: f.sup_norm(), limit });
                }
                ledger.push(LedgerRow::of(t, &f));
                times.push(t);
                slices.push(f);
            }
        }
        Ok(Trajectory {
            config: self.config.clone(),
            dt_effective: self.dt,
            field: SpaceTimeField::new(times, slices)?,
            ledger,
        })
    }
}

pub fn nonlinear_rhs(u: &Field, cfg: &SolverConfig) -> Result<Field> {
    let mut cfg = cfg.clone();
    cfg.dt = SolverConfig::stability_bound(u.grid());
    cfg.t_end = cfg.dt;
    Solver::new(u.grid(), cfg)?.nonlinear_rhs(u)
}

pub fn evolve(u0: &Field, cfg: &SolverConfig) -> Result<Trajectory> {
    Solver::new(u0.grid(), cfg.clone())?.evolve(u0)
}

/// Quadrature weights for `∫_{t_0}^{t_j} g` on uniform nodes `0..=j`, spacing 1.
///
/// Composite Simpson for even `j`, Simpson plus a closing 3/8 panel for odd `j ≥ 3`,
/// and the cubic through the first four nodes for `j = 1`.
fn fourth_order_weights(j: usize) -> Vec<f64> {
    let mut w = vec![0.0; j.max(3) + 1];
    match j {
        0 => {}
        1 => {
            for (i, c) in [9.0, 19.0, -5.0, 1.0].iter().enumerate() {
                w[i] = c / 24.0;
            }
        }
        _ => {
            let simpson_end = if j % 2 == 0 { j } else { j - 3 };
            for i in (0..simpson_end).step_by(2) {
                w[i] += 1.0 / 3.0;
                w[i + 1] += 4.0 / 3.0;
                w[i + 2] += 1.0 / 3.0;
            }
            if j % 2 == 1 {
                let s = simpson_end;
                for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[s + o] += 3.0 / 8.0 * c;
                }
            }
        }
    }
    w
}

/// Largest `‖u(t) - V(t)u₀ - ∫₀ᵗ V(t-τ) N(u(τ)) dτ‖_{L²} / ‖u₀‖_{L²}` over the stored slices.
pub fn duhamel_residual(traj: &Trajectory) -> Result<f64> {
    let field = &traj.field;
    if field.len() < 9 {
        return Err(Error::TooFewSlices { needed: 9, got: field.len() });
    }
    let times = field.times();
    let h = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::InvalidParameter("Duhamel quadrature needs uniformly spaced slices".into()));
    }
    let g = field.grid();
    let mut cfg = traj.config.clone();
    cfg.dt = SolverConfig::stability_bound(g).min(cfg.dt);
    let solver = Solver::new(g, cfg.clone())?;
    let nl: Vec<Vec<Complex64>> = field.slices().iter().map(|s| solver.nonlinear_coeffs(s.coeffs()).0).collect();
    let u0 = &field.slices()[0];
    let norm0 = u0.l2_norm();
    if norm0 == 0.0 {
        return Ok(0.0);
    }
    let sigma = dispersion_sign();
    let phases: Vec<f64> = (0..g.n_points()).map(|i| sigma * dispersion(g.xi(i))).collect();
    let mut worst: f64 = 0.0;
    for j in 1..field.len() {
        let tj = times[j];
        let w = fourth_order_weights(j);
        let mut diff_sq = 0.0;
        for i in 0..g.n_points() {
            let mut integral = Complex64::new(0.0, 0.0);
            for (l, wl) in w.iter().enumerate() {
                if *wl != 0.0 {
                    integral += wl * Complex64::from_polar(1.0, phases[i] * (tj - times[l])) * nl[l][i];
                }
            }
            let predicted = Complex64::from_polar(1.0, phases[i] * tj) * u0.coeffs()[i] + h * integral;
            diff_sq += (field.slices()[j].coeffs()[i] - predicted).norm_sqr();
        }
        worst = worst.max((diff_sq / g.length()).sqrt() / norm0);
    }
    Ok(worst)
}

/// `λ^{1/k} u₀(λx)` on the grid of length `L/λ`, reusing the samples.
pub fn rescale(u0: &Field, lambda: f64, k: u32) -> Result<Field> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let g = u0.grid();
    let grid = SpectralGrid::new(g.n_points(), g.length() / lambda)?;
    let a = lambda.powf(1.0 / k as f64);
    let v = u0.values().iter().map(|z| z * a).collect();
    Field::from_complex(&grid, v)
}

/// Rescales every slice and maps times `t ↦ t/λ²`.
pub fn rescale_traj(traj: &Trajectory, lambda: f64) -> Result<Trajectory> {
    let k = traj.config.k;
    let l2 = lambda * lambda;
    let slices = traj.field.slices().iter().map(|s| rescale(s, lambda, k)).collect::<Result<Vec<_>>>()?;
    let times = traj.field.times().iter().map(|t| t / l2).collect();
    let field = SpaceTimeField::new(times, slices)?;
    let ledger = field.times().iter().zip(field.slices()).map(|(&t, s)| LedgerRow::of(t, s)).collect();
    let mut config = traj.config.clone();
    config.dt /= l2;
    config.t_end /= l2;
    Ok(Trajectory { config, dt_effective: traj.dt_effective / l2, field, ledger })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{free_evolve, relative_distance};

    fn gaussian(grid: &SpectralGrid, a: f64) -> Field {
        Field::from_fn(grid, |x| a * (-(x * x)).exp())
    }

    fn grid() -> SpectralGrid {
        SpectralGrid::new(256, 30.0).unwrap()
    }

    #[test]
    fn zero_and_constant_have_no_flux() {
        let g = grid();
        let cfg = SolverConfig::new(12, 1e-4, 1e-3);
        assert!(nonlinear_rhs(&Field::zeros(&g), &cfg).unwrap().sup_norm() == 0.0);
        assert!(nonlinear_rhs(&Field::from_fn(&g, |_| 0.7), &cfg).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn conservative_and_product_forms_agree() {
        let g = SpectralGrid::new(512, 30.0).unwrap();
        let u = gaussian(&g, 0.8);
        let mut cfg = SolverConfig::new(3, 1e-5, 1e-5);
        let a = nonlinear_rhs(&u, &cfg).unwrap();
        cfg.form = NonlinearForm::Product;
        let b = nonlinear_rhs(&u, &cfg).unwrap();
        assert!(relative_distance(&a, &b) < 1e-10, "{}", relative_distance(&a, &b));
    }

    #[test]
    fn stability_bound_is_enforced() {
        let g = grid();
        let bound = SolverConfig::stability_bound(&g);
        assert!(Solver::new(&g, SolverConfig::new(2, 2.0 * bound, 1.0)).is_err());
        assert!(Solver::new(&g, SolverConfig::new(2, 0.0, 1.0)).is_err());
        assert!(Solver::new(&g, SolverConfig::new(2, bound, 1.0)).is_ok());
    }

    #[test]
    fn linear_mode_is_exact() {
        let g = grid();
        let u0 = gaussian(&g, 1.0);
        let mut cfg = SolverConfig::new(12, SolverConfig::stability_bound(&g), 0.02);
        cfg.nonlinear = false;
        let traj = evolve(&u0, &cfg).unwrap();
        for (t, s) in traj.field.times().iter().zip(traj.field.slices()) {
            assert!(relative_distance(s, &free_evolve(&u0, *t)) < 1e-12);
        }
        assert!(duhamel_residual(&traj).unwrap() < 1e-12);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = grid();
        let traj = evolve(&Field::zeros(&g), &SolverConfig::new(12, 1e-4, 1e-3)).unwrap();
        assert!(traj.field.slices().iter().all(|s| s.sup_norm() == 0.0));
        assert_eq!(duhamel_residual(&traj).unwrap(), 0.0);
    }

    #[test]
    fn quadrature_weights_integrate_cubics() {
        for j in 1..12 {
            let w = fourth_order_weights(j);
            for p in 0..4 {
                let approx: f64 = w.iter().enumerate().map(|(i, wi)| wi * (i as f64).powi(p)).sum();
                let exact = (j as f64).powi(p + 1) / (p + 1) as f64;
                assert!((approx - exact).abs() < 1e-10 * exact.max(1.0), "j={j} p={p}");
            }
        }
    }

    #[test]
    fn complex_input_rejected() {
        let g = grid();
        let z = Field::from_fn_complex(&g, |x| Complex64::new(0.0, (-(x * x)).exp()));
        assert!(matches!(evolve(&z, &SolverConfig::new(2, 1e-4, 1e-3)), Err(Error::ComplexInput)));
    }

    #[test]
    fn rescale_identity_and_norm_law() {
        let g = grid();
        let u0 = gaussian(&g, 0.5);
        let same = rescale(&u0, 1.0, 12).unwrap();
        assert!(relative_distance(&same, &u0) == 0.0);
        let r = rescale(&u0, 2.0, 12).unwrap();
        let s = 0.3;
        let ratio = crate::norms::sobolev_norm(&r, s, true).unwrap() / crate::norms::sobolev_norm(&u0, s, true).unwrap();
        assert!((ratio - 2f64.powf(s + 1.0 / 12.0 - 0.5)).abs() < 1e-12);
        assert!(rescale(&u0, 0.0, 12).is_err());
    }

    #[test]
    fn blow_up_guard_trips() {
        // huge data make the explicit nonlinear substep unstable
        let g = SpectralGrid::new(64, 10.0).unwrap();
        let u0 = Field::from_fn(&g, |x| 1e3 * (-(x * x) * 4.0).exp());
        let cfg = SolverConfig { dealias: Dealias::None, ..SolverConfig::new(5, 1e-3, 1.0) };
        assert!(matches!(evolve(&u0, &cfg), Err(Error::BlowUp { .. })));
    }
}
