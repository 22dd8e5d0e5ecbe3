use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::field::Field;
use super::grid::SpectralGrid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A Fourier multiplier `m(ξ)` with a label used in error messages.
#[derive(Clone)]
pub struct MultiplierSymbol {
    name: String,
    kind: SymbolKind,
}

#[derive(Clone)]
enum SymbolKind {
    Function(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
    Tabulated { grid: SpectralGrid, values: Vec<Complex64> },
}

impl MultiplierSymbol {
    pub fn new(name: impl Into<String>, symbol: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), kind: SymbolKind::Function(Arc::new(symbol)) }
    }

    pub fn real(name: impl Into<String>, symbol: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |xi| Complex64::new(symbol(xi), 0.0))
    }

    /// Symbol given by its values on the frequency slots of `grid`.
    pub fn tabulated(name: impl Into<String>, grid: &SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidParameter("tabulated symbol length differs from grid".into()));
        }
        Ok(Self { name: name.into(), kind: SymbolKind::Tabulated { grid: grid.clone(), values } })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Symbol values on the slots of `grid`.
    pub fn on_grid(&self, grid: &SpectralGrid) -> Result<Vec<Complex64>> {
        let values = match &self.kind {
            SymbolKind::Function(f) => (0..grid.n_points()).map(|i| f(grid.xi(i))).collect::<Vec<_>>(),
            SymbolKind::Tabulated { grid: g, values } => {
                if !g.same_as(grid) {
                    return Err(Error::GridMismatch);
                }
                values.clone()
            }
        };
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::UnboundedSymbol { name: self.name.clone(), xi: grid.xi(i) });
        }
        Ok(values)
    }
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol").field("name", &self.name).finish()
    }
}

pub fn apply_multiplier(f: &Field, m: &MultiplierSymbol) -> Result<Field> {
    let sym = m.on_grid(f.grid())?;
    let c = f.coeffs().iter().zip(&sym).map(|(c, s)| c * s).collect();
    Field::from_coeffs(f.grid(), c)
}

/// Multiplies by a real symbol evaluated at each slot's frequency.
pub(crate) fn apply_real_symbol(f: &Field, symbol: impl Fn(f64) -> f64) -> Field {
    let g = f.grid();
    f.map_coeffs(|i, c| c * symbol(g.xi(i)))
}

pub fn hilbert_symbol() -> MultiplierSymbol {
    MultiplierSymbol::new("hilbert", |xi| -I * sign(xi))
}

pub fn hilbert(f: &Field) -> Field {
    let g = f.grid();
    f.map_coeffs(|i, c| -I * sign(g.xi(i)) * c)
}

/// `D^α` with symbol `|ξ|^α`; for `α < 0` the zero mode maps to 0 and the input must be mean-zero.
pub fn fractional_derivative(f: &Field, alpha: f64) -> Result<Field> {
    if alpha < -1.0 {
        return Err(Error::InvalidParameter(format!("alpha must be >= -1, got {alpha}")));
    }
    if alpha < 0.0 && !f.is_mean_zero() {
        return Err(Error::NonzeroMean { mean: f.mean().norm() });
    }
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    Ok(apply_real_symbol(f, |xi| if xi == 0.0 { 0.0 } else { xi.abs().powf(alpha) }))
}

/// `∂ₓ`; the unpaired Nyquist mode is dropped so real fields stay real.
pub fn spectral_derivative(f: &Field) -> Field {
    let g = f.grid();
    let ny = g.nyquist_slot();
    f.map_coeffs(|i, c| if i == ny { Complex64::new(0.0, 0.0) } else { I * g.xi(i) * c })
}

/// `∂ₓ²`.
pub fn second_derivative(f: &Field) -> Field {
    let g = f.grid();
    f.map_coeffs(|i, c| -g.xi(i).powi(2) * c)
}

/// `∂ₓ^{-1}` with symbol `1/(iξ)`, zero and Nyquist modes dropped.
pub fn inverse_derivative(f: &Field) -> Field {
    let g = f.grid();
    let (zero, ny) = (g.zero_slot(), g.nyquist_slot());
    f.map_coeffs(|i, c| if i == zero || i == ny { Complex64::new(0.0, 0.0) } else { c / (I * g.xi(i)) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfLine {
    Plus,
    Minus,
}

/// `P₊` or `P₋`; the zero mode is shared with weight 1/2.
pub fn project_half_line(f: &Field, side: HalfLine) -> Field {
    apply_real_symbol(f, |xi| half_line_weight(xi, side))
}

pub fn half_line_weight(xi: f64, side: HalfLine) -> f64 {
    match (side, xi.partial_cmp(&0.0)) {
        (_, Some(std::cmp::Ordering::Equal)) => 0.5,
        (HalfLine::Plus, Some(std::cmp::Ordering::Greater)) => 1.0,
        (HalfLine::Minus, Some(std::cmp::Ordering::Less)) => 1.0,
        _ => 0.0,
    }
}

fn sign(xi: f64) -> f64 {
    if xi > 0.0 {
        1.0
    } else if xi < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Dispersion relation `p(ξ) = ξ|ξ|`.
pub fn dispersion(xi: f64) -> f64 {
    xi * xi.abs()
}

fn evolve_with_sign(f: &Field, t: f64, sigma: f64) -> Field {
    let g = f.grid();
    f.map_coeffs(|i, c| c * Complex64::from_polar(1.0, sigma * t * dispersion(g.xi(i))))
}

/// Sign `σ` in `V(t) = e^{σ i t ξ|ξ|}`, chosen so that `V(t)u₀` solves `∂ₜu + H∂ₓ²u = 0`.
///
/// Determined once by comparing a centered time difference of both candidates
/// against `-H∂ₓ²u` on a smooth test field.
pub fn dispersion_sign() -> f64 {
    static SIGMA: OnceLock<f64> = OnceLock::new();
    *SIGMA.get_or_init(|| {
        let (plus, minus) = sign_residuals();
        if plus < minus {
            1.0
        } else {
            -1.0
        }
    })
}

/// Linear-equation residuals for `σ = +1` and `σ = -1`.
pub fn sign_residuals() -> (f64, f64) {
    let grid = SpectralGrid::new(64, 2.0 * std::f64::consts::PI).expect("valid grid");
    let u0 = Field::from_fn(&grid, |x| (x.sin()).exp() + (2.0 * x).cos());
    let dt = 1e-4;
    let residual = |sigma: f64| {
        let up = evolve_with_sign(&u0, dt, sigma);
        let um = evolve_with_sign(&u0, -dt, sigma);
        let ut = (&up - &um).scale_real(0.5 / dt);
        let lin = hilbert(&second_derivative(&u0));
        (&ut + &lin).l2_norm() / u0.l2_norm()
    };
    (residual(1.0), residual(-1.0))
}

/// Human-readable label for the active sign, embedded in reports.
pub fn sign_convention() -> String {
    let s = if dispersion_sign() > 0.0 { "+" } else { "-" };
    format!("V(t) = exp({s}i t xi|xi|)")
}

pub fn free_evolve_symbol(t: f64) -> MultiplierSymbol {
    let sigma = dispersion_sign();
    MultiplierSymbol::new(format!("V({t})"), move |xi| Complex64::from_polar(1.0, sigma * t * dispersion(xi)))
}

/// The free group `V(t)`.
pub fn free_evolve(f: &Field, t: f64) -> Field {
    evolve_with_sign(f, t, dispersion_sign())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::relative_distance;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(64, 2.0 * PI).unwrap()
    }

    fn close(a: &Field, b: &Field, tol: f64) -> bool {
        let d = (a - b).sup_norm();
        d <= tol * a.sup_norm().max(b.sup_norm()).max(1.0)
    }

    #[test]
    fn identity_and_sqrt_symbols() {
        let g = grid();
        let f = Field::from_fn_complex(&g, |x| Complex64::from_polar(1.0, 4.0 * x));
        let one = MultiplierSymbol::real("one", |_| 1.0);
        assert!(close(&apply_multiplier(&f, &one).unwrap(), &f, 1e-13));
        let half = MultiplierSymbol::real("sqrt", |xi: f64| xi.abs().sqrt());
        assert!(close(&apply_multiplier(&f, &half).unwrap(), &f.scale_real(2.0), 1e-12));
    }

    #[test]
    fn unbounded_symbol_is_reported() {
        let g = grid();
        let f = Field::from_fn(&g, f64::cos);
        let bad = MultiplierSymbol::real("inv", |xi: f64| 1.0 / xi);
        assert!(matches!(apply_multiplier(&f, &bad), Err(Error::UnboundedSymbol { .. })));
    }

    #[test]
    fn tabulated_symbol_checks_grid() {
        let g = grid();
        let other = SpectralGrid::new(32, 2.0 * PI).unwrap();
        let m = MultiplierSymbol::tabulated("t", &g, vec![Complex64::new(1.0, 0.0); 64]).unwrap();
        let f = Field::from_fn(&other, f64::cos);
        assert!(matches!(apply_multiplier(&f, &m), Err(Error::GridMismatch)));
    }

    #[test]
    fn hilbert_of_cosine_and_constant() {
        let g = grid();
        let h = hilbert(&Field::from_fn(&g, f64::cos));
        assert!(close(&h, &Field::from_fn(&g, f64::sin), 1e-13));
        assert!(hilbert(&Field::from_fn(&g, |_| 1.0)).sup_norm() < 1e-14);
        let hs = apply_multiplier(&Field::from_fn(&g, f64::cos), &hilbert_symbol()).unwrap();
        assert!(close(&hs, &h, 1e-14));
    }

    #[test]
    fn fractional_derivative_cases() {
        let g = grid();
        let c = Field::from_fn(&g, f64::cos);
        assert!(close(&fractional_derivative(&c, 1.0).unwrap(), &c, 1e-12));
        let e4 = Field::from_fn_complex(&g, |x| Complex64::from_polar(1.0, 4.0 * x));
        let d = fractional_derivative(&e4, -0.5).unwrap();
        assert!(close(&d, &e4.scale_real(0.5), 1e-12));
        let shifted = Field::from_fn(&g, |x| 1.0 + x.cos());
        assert!(matches!(fractional_derivative(&shifted, -0.5), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn half_line_projections_of_exponentials() {
        let g = grid();
        let ep = Field::from_fn_complex(&g, |x| Complex64::from_polar(1.0, x));
        let em = Field::from_fn_complex(&g, |x| Complex64::from_polar(1.0, -x));
        assert!(close(&project_half_line(&ep, HalfLine::Plus), &ep, 1e-13));
        assert!(project_half_line(&em, HalfLine::Plus).sup_norm() < 1e-13);
    }

    #[test]
    fn selected_sign_solves_linear_equation() {
        let (plus, minus) = sign_residuals();
        assert!(minus < 1e-6, "minus residual {minus}");
        assert!(plus > 1.0, "plus residual {plus}");
        assert_eq!(dispersion_sign(), -1.0);
    }

    #[test]
    fn free_evolution_time_derivative_matches_equation() {
        let g = SpectralGrid::new(128, 4.0 * PI).unwrap();
        let u0 = Field::from_fn(&g, |x| (-(x * x)).exp());
        let t = 0.3;
        let errs: Vec<f64> = [1e-2, 5e-3]
            .iter()
            .map(|&dt| {
                let ut = (&free_evolve(&u0, t + dt) - &free_evolve(&u0, t - dt)).scale_real(0.5 / dt);
                let rhs = hilbert(&second_derivative(&free_evolve(&u0, t)));
                (&ut + &rhs).l2_norm()
            })
            .collect();
        // second order: halving dt divides the error by about 4
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    fn band_limited(coeffs: Vec<(f64, f64)>) -> Field {
        let g = SpectralGrid::new(64, 2.0 * PI).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); 64];
        for (m, (re, im)) in coeffs.into_iter().enumerate() {
            let m = m as i64 - 10;
            c[g.slot(m).unwrap()] = Complex64::new(re, im);
        }
        Field::from_coeffs(&g, c).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn half_line_identities(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 21)) {
            let f = band_limited(c);
            let p = project_half_line(&f, HalfLine::Plus);
            let m = project_half_line(&f, HalfLine::Minus);
            prop_assert!(relative_distance(&(&p + &m), &f) < 1e-12);
            let ih = hilbert(&f).scale(I);
            prop_assert!(relative_distance(&ih, &(&p - &m)) < 1e-12);
        }

        #[test]
        fn hilbert_squared_is_minus_identity(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 21)) {
            let f = band_limited(c).without_mean();
            prop_assert!(relative_distance(&hilbert(&hilbert(&f)), &f.scale_real(-1.0)) < 1e-12);
        }

        #[test]
        fn fractional_powers_compose(
            c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 21),
            a in 0.0f64..2.0,
            b in 0.0f64..2.0,
        ) {
            let f = band_limited(c).without_mean();
            let ab = fractional_derivative(&fractional_derivative(&f, a).unwrap(), b).unwrap();
            let direct = fractional_derivative(&f, a + b).unwrap();
            prop_assert!(relative_distance(&ab, &direct) < 1e-12);
        }

        #[test]
        fn free_group_is_unitary_group(
            c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 21),
            t1 in -0.05f64..0.05,
            t2 in -0.05f64..0.05,
        ) {
            let f = band_limited(c);
            let v = free_evolve(&f, t1);
            prop_assert!((v.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
            let composed = free_evolve(&v, t2);
            prop_assert!(relative_distance(&composed, &free_evolve(&f, t1 + t2)) < 1e-12);
        }
    }
}
