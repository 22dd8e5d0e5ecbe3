//! Gauge transformation, the bilinear operator G, and the residual of the gauged equation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::SpaceTimeField;
use crate::solver::Trajectory;
use crate::spectral::{
    antiderivative, hilbert, inverse_derivative, project_half_line, second_derivative, sign_convention,
    spectral_derivative, Field, HalfLine,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Half-width of the measurement window as a fraction of L.
pub const WINDOW_FRACTION: f64 = 0.25;

/// `u`, the tapered antiderivative `F` of `uᵏ` (or of `uᵏ/2`), and `w = P₊(e^{-iF}u)`.
#[derive(Clone, Debug)]
pub struct GaugeState {
    pub u: Field,
    pub f: Field,
    pub w: Field,
    pub k: u32,
}

/// `w = P₊(e^{-iF}u)` with `F = ∫uᵏ`, or `F = ½∫uᵏ` when `half` is set.
pub fn gauge_transform(u: &Field, k: u32, half: bool) -> Result<GaugeState> {
    if !u.is_real() {
        return Err(Error::ComplexInput);
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("gauge needs k >= 2, got {k}")));
    }
    let mut uk = u.powi(k as i32);
    if half {
        uk = uk.scale_real(0.5);
    }
    let f = antiderivative(&uk).tapered();
    let phase = gauge_factor(&f);
    let w = project_half_line(&(&phase * u), HalfLine::Plus);
    Ok(GaugeState { u: u.clone(), f, w, k })
}

/// `e^{-iF}` from real samples of `F`.
fn gauge_factor(f: &Field) -> Field {
    f.map_values(|z| Complex64::from_polar(1.0, -z.re))
}

/// `G(f, g)` by direct frequency convolution with kernel `½ ξ₁(ξ-ξ₁)/ξ · [sgn ξ₁ + sgn(ξ-ξ₁)]`.
///
/// Products whose frequency leaves the grid are dropped, which matches the projected form
/// when both inputs are supported in `|m| < n/4`.
pub fn bilinear_g_direct(f: &Field, g: &Field) -> Result<Field> {
    f.check_grid(g)?;
    let grid = f.grid();
    let n = grid.n_points();
    let scale = 1.0 / grid.length();
    let fc = f.coeffs();
    let gc = g.coeffs();
    let nonzero_f: Vec<usize> = (0..n).filter(|&i| fc[i] != Complex64::new(0.0, 0.0)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, slot) in out.iter_mut().enumerate() {
        let m = grid.mode(i);
        if m == 0 {
            continue;
        }
        let xi = grid.xi(i);
        let mut acc = Complex64::new(0.0, 0.0);
        for &a in &nonzero_f {
            let m1 = grid.mode(a);
            let Some(b) = grid.slot(m - m1) else { continue };
            let (x1, x2) = (grid.xi(a), grid.xi(b));
            let sg = sgn(x1) + sgn(x2);
            if sg != 0.0 {
                acc += 0.5 * x1 * x2 / xi * sg * fc[a] * gc[b];
            }
        }
        *slot = acc * scale;
    }
    Field::from_coeffs(grid, out)
}

fn sgn(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum()
    }
}

/// `G(f, g) = ∂ₓ^{-1}(-i P₊fₓ P₊gₓ + i P₋fₓ P₋gₓ)`.
pub fn bilinear_g_projected(f: &Field, g: &Field) -> Result<Field> {
    f.check_grid(g)?;
    let (fx, gx) = (spectral_derivative(f), spectral_derivative(g));
    let plus = &project_half_line(&fx, HalfLine::Plus) * &project_half_line(&gx, HalfLine::Plus);
    let minus = &project_half_line(&fx, HalfLine::Minus) * &project_half_line(&gx, HalfLine::Minus);
    Ok(inverse_derivative(&(&minus - &plus).scale(I)))
}

/// How the inner integrand `u^{k-2}uₓHuₓ` is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerRoute {
    /// Pointwise product `uₓ · Huₓ`.
    Direct,
    /// `∂ₓG(u, u)`.
    ViaG,
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeResidualReport {
    pub k: u32,
    pub n_points: usize,
    pub length: f64,
    pub dt: f64,
    pub slice_spacing: f64,
    pub window: f64,
    /// Largest windowed residual over the interior slices.
    pub residual_norm: f64,
    /// `residual_norm` divided by the largest windowed norm of the right-hand side.
    pub relative_residual: f64,
    pub per_slice_residuals: Vec<f64>,
    pub sign_convention: String,
}

/// Residual of the gauged equation along a solution of `uₜ + Huₓₓ = 2uᵏuₓ`.
///
/// `wₜ` comes from the five-point centered stencil, so the first and last two slices are skipped.
pub fn gauge_equation_residual(traj: &Trajectory, route: InnerRoute) -> Result<(GaugeResidualReport, SpaceTimeField)> {
    if !traj.config.rescaled {
        return Err(Error::NotRescaled);
    }
    let k = traj.config.k;
    let field = &traj.field;
    if field.len() < 5 {
        return Err(Error::TooFewSlices { needed: 5, got: field.len() });
    }
    let times = field.times();
    let h = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::InvalidParameter("gauge residual needs uniformly spaced slices".into()));
    }
    let grid = field.grid().clone();
    let window = WINDOW_FRACTION * grid.length();
    let states = field.slices().iter().map(|u| gauge_transform(u, k, false)).collect::<Result<Vec<_>>>()?;

    let mut residuals = Vec::new();
    let mut res_times = Vec::new();
    let mut per_slice = Vec::new();
    let mut rhs_scale: f64 = 0.0;
    for j in 2..field.len() - 2 {
        let w = |o: usize| &states[o].w;
        let wt = (&(&(w(j - 2) - w(j + 2)) + &(w(j + 1) - w(j - 1)).scale_real(8.0))).scale_real(1.0 / (12.0 * h));
        let lhs = &wt + &hilbert(&second_derivative(w(j)));
        let rhs = gauge_rhs(&states[j], route)?;
        let res = &lhs - &rhs;
        let r = res.l2_norm_window(window);
        rhs_scale = rhs_scale.max(rhs.l2_norm_window(window));
        per_slice.push(r);
        res_times.push(times[j]);
        residuals.push(res);
    }
    let residual_norm = per_slice.iter().copied().fold(0.0, f64::max);
    let relative_residual = if rhs_scale > 0.0 { residual_norm / rhs_scale } else { residual_norm };
    let report = GaugeResidualReport {
        k,
        n_points: grid.n_points(),
        length: grid.length(),
        dt: traj.dt_effective,
        slice_spacing: h,
        window,
        residual_norm,
        relative_residual,
        per_slice_residuals: per_slice,
        sign_convention: sign_convention(),
    };
    Ok((report, SpaceTimeField::new(res_times, residuals)?))
}

/// Right side `P₊[2e^{-iF}(-kuᵏP₋uₓ - iP₋uₓₓ)] - ik(k-1)P₊(e^{-iF} u ∫u^{k-2}uₓHuₓ)`.
pub fn gauge_rhs(state: &GaugeState, route: InnerRoute) -> Result<Field> {
    let k = state.k as i32;
    let kf = state.k as f64;
    let u = &state.u;
    let phase = gauge_factor(&state.f);
    let ux = spectral_derivative(u);
    let pm_ux = project_half_line(&ux, HalfLine::Minus);
    let pm_uxx = project_half_line(&second_derivative(u), HalfLine::Minus);
    let bracket = &(&u.powi(k) * &pm_ux).scale_real(-kf) - &pm_uxx.scale(I);
    let first = project_half_line(&(&phase * &bracket).scale_real(2.0), HalfLine::Plus);

    let interaction = match route {
        InnerRoute::Direct => &ux * &hilbert(&ux),
        InnerRoute::ViaG => spectral_derivative(&bilinear_g_projected(u, u)?),
    };
    let integrand = &u.powi(k - 2) * &interaction;
    let inner = antiderivative(&integrand).tapered();
    let second = project_half_line(&(&(&phase * u) * &inner), HalfLine::Plus).scale(-I * kf * (kf - 1.0));
    Ok(&first + &second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{relative_distance, SpectralGrid};
    use std::f64::consts::PI;

    fn gaussian(g: &SpectralGrid, a: f64) -> Field {
        Field::from_fn(g, |x| a * (-(x * x)).exp())
    }

    #[test]
    fn zero_gauge() {
        let g = SpectralGrid::new(128, 40.0).unwrap();
        let s = gauge_transform(&Field::zeros(&g), 12, false).unwrap();
        assert_eq!(s.w.sup_norm(), 0.0);
    }

    #[test]
    fn gauge_contracts_and_is_one_sided() {
        let g = SpectralGrid::new(512, 40.0).unwrap();
        let u = gaussian(&g, 1.1);
        let s = gauge_transform(&u, 4, false).unwrap();
        assert!(s.w.l2_norm() <= u.l2_norm());
        let neg: f64 = (0..g.n_points()).filter(|&i| g.xi(i) < 0.0).map(|i| s.w.coeffs()[i].norm_sqr()).sum();
        let total: f64 = s.w.coeffs().iter().map(|c| c.norm_sqr()).sum();
        assert!(neg <= 1e-12 * total);
        let win = WINDOW_FRACTION * g.length();
        let pu = &gauge_factor(&s.f) * &u;
        assert!((pu.l2_norm_window(win) - u.l2_norm_window(win)).abs() < 1e-10 * u.l2_norm_window(win));
    }

    #[test]
    fn small_amplitude_gauge_is_close_to_projection() {
        let g = SpectralGrid::new(512, 40.0).unwrap();
        let k = 3;
        let dev = |a: f64| {
            let u = gaussian(&g, a);
            let s = gauge_transform(&u, k, false).unwrap();
            (&s.w - &project_half_line(&u, HalfLine::Plus)).l2_norm()
        };
        let order = (dev(0.1) / dev(0.05)).log2();
        assert!((order - (k as f64 + 1.0)).abs() < 0.05, "order {order}");
    }

    #[test]
    fn complex_input_rejected() {
        let g = SpectralGrid::new(64, 10.0).unwrap();
        let z = Field::from_fn_complex(&g, |x| Complex64::new(x.cos(), 1.0));
        assert!(matches!(gauge_transform(&z, 3, false), Err(Error::ComplexInput)));
    }

    #[test]
    fn g_of_cosine() {
        let g = SpectralGrid::new(64, 2.0 * PI).unwrap();
        let c = Field::from_fn(&g, f64::cos);
        let expected = Field::from_fn(&g, |x| 0.25 * (2.0 * x).cos());
        for out in [bilinear_g_projected(&c, &c).unwrap(), bilinear_g_direct(&c, &c).unwrap()] {
            assert!((&out - &expected).sup_norm() < 1e-12);
        }
        let z = Field::zeros(&g);
        assert_eq!(bilinear_g_projected(&z, &z).unwrap().sup_norm(), 0.0);
        let one = Field::from_fn(&g, |_| 1.0);
        assert!(bilinear_g_direct(&one, &c).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn g_is_symmetric_and_bilinear() {
        let g = SpectralGrid::new(64, 2.0 * PI).unwrap();
        let f1 = Field::from_fn(&g, |x| x.sin() + 0.3 * (3.0 * x).cos());
        let f2 = Field::from_fn(&g, |x| (2.0 * x).cos() - 0.5 * (5.0 * x).sin());
        let h = Field::from_fn(&g, |x| (x.cos()).exp());
        let a = bilinear_g_direct(&f1, &f2).unwrap();
        let b = bilinear_g_direct(&f2, &f1).unwrap();
        assert!(relative_distance(&a, &b) < 1e-12);
        let lhs = bilinear_g_projected(&(&f1.scale_real(2.0) + &f2.scale_real(-3.0)), &h).unwrap();
        let rhs = &bilinear_g_projected(&f1, &h).unwrap().scale_real(2.0) - &bilinear_g_projected(&f2, &h).unwrap().scale_real(3.0);
        assert!(relative_distance(&lhs, &rhs) < 1e-12);
    }
}
