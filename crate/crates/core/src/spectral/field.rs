use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// Relative size of imaginary parts below which samples are treated as real.
const REAL_TOL: f64 = 1e-12;

/// A function of x held in both physical and frequency representation.
///
/// The two representations are kept consistent: every constructor computes one
/// from the other. Arithmetic operators panic if operand grids differ.
#[derive(Clone, Debug)]
pub struct Field {
    grid: SpectralGrid,
    values: Vec<Complex64>,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl Field {
    pub fn zeros(grid: &SpectralGrid) -> Self {
        let n = grid.n_points();
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); n],
            coeffs: vec![Complex64::new(0.0, 0.0); n],
            real: true,
        }
    }

    pub fn from_real(grid: &SpectralGrid, values: &[f64]) -> Result<Self> {
        check_len(grid, values.len())?;
        let values: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let coeffs = grid.forward(&values);
        Ok(Self { grid: grid.clone(), values, coeffs, real: true })
    }

    pub fn from_complex(grid: &SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        check_len(grid, values.len())?;
        let coeffs = grid.forward(&values);
        Ok(Self::assemble(grid, values, coeffs))
    }

    /// Builds a field from m-ordered coefficients; realness is detected from the samples.
    pub fn from_coeffs(grid: &SpectralGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        check_len(grid, coeffs.len())?;
        let values = grid.inverse(&coeffs);
        Ok(Self::assemble(grid, values, coeffs))
    }

    pub fn from_fn(grid: &SpectralGrid, f: impl Fn(f64) -> f64) -> Self {
        let v: Vec<f64> = grid.points().into_iter().map(f).collect();
        Self::from_real(grid, &v).expect("length matches grid")
    }

    pub fn from_fn_complex(grid: &SpectralGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let v: Vec<Complex64> = grid.points().into_iter().map(f).collect();
        Self::from_complex(grid, v).expect("length matches grid")
    }

    fn assemble(grid: &SpectralGrid, mut values: Vec<Complex64>, coeffs: Vec<Complex64>) -> Self {
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let imag = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        let real = imag <= REAL_TOL * scale.max(f64::MIN_POSITIVE);
        if real {
            values.iter_mut().for_each(|v| v.im = 0.0);
        }
        Self { grid: grid.clone(), values, coeffs, real }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Coefficient of mode `m`, zero if the mode is off the grid.
    pub fn coeff(&self, m: i64) -> Complex64 {
        self.grid.slot(m).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Spatial mean `c_0 / L`.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[self.grid.zero_slot()] / self.grid.length()
    }

    /// True when the zero mode is negligible relative to the coefficient ℓ² mass.
    pub fn is_mean_zero(&self) -> bool {
        let c0 = self.coeffs[self.grid.zero_slot()].norm();
        let total = self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        c0 <= 1e-12 * total.max(f64::MIN_POSITIVE) || c0 == 0.0
    }

    /// Removes the zero mode.
    pub fn without_mean(&self) -> Field {
        let mut c = self.coeffs.clone();
        c[self.grid.zero_slot()] = Complex64::new(0.0, 0.0);
        Field::from_coeffs(&self.grid, c).expect("length matches grid")
    }

    /// `‖f‖_{L²}` via the torus Parseval identity `(1/L) Σ |c_m|²`.
    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.grid.length()).sqrt()
    }

    /// `‖f‖_{L²}` over the samples whose `x` satisfies `|x| < half_width`.
    pub fn l2_norm_window(&self, half_width: f64) -> f64 {
        let dx = self.grid.dx();
        let sum: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(j, _)| self.grid.x(*j).abs() < half_width)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        (sum * dx).sqrt()
    }

    /// Largest sample modulus; NaN if any sample is NaN.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, nan_max)
    }

    /// Real part as a new (real) field.
    pub fn re(&self) -> Field {
        Field::from_real(&self.grid, &self.real_values()).expect("length matches grid")
    }

    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        let v = self.values.iter().map(|&z| f(z)).collect();
        Field::from_complex(&self.grid, v).expect("length matches grid")
    }

    pub fn map_coeffs(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Field {
        let c = self.coeffs.iter().enumerate().map(|(i, &z)| f(i, z)).collect();
        Field::from_coeffs(&self.grid, c).expect("length matches grid")
    }

    /// Integer power of a field, pointwise.
    pub fn powi(&self, k: i32) -> Field {
        self.map_values(|z| if self.real { Complex64::new(z.re.powi(k), 0.0) } else { z.powi(k) })
    }

    pub fn scale(&self, a: Complex64) -> Field {
        let values = self.values.iter().map(|v| v * a).collect();
        let coeffs = self.coeffs.iter().map(|c| c * a).collect();
        Self::assemble(&self.grid, values, coeffs)
    }

    pub fn scale_real(&self, a: f64) -> Field {
        self.scale(Complex64::new(a, 0.0))
    }

    pub fn try_add(&self, other: &Field) -> Result<Field> {
        self.check_grid(other)?;
        Ok(self.combine(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Field) -> Result<Field> {
        self.check_grid(other)?;
        Ok(self.combine(other, |a, b| a - b))
    }

    /// Pointwise product in physical space.
    pub fn try_mul(&self, other: &Field) -> Result<Field> {
        self.check_grid(other)?;
        let v = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Field::from_complex(&self.grid, v)
    }

    pub fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn combine(&self, other: &Field, op: impl Fn(Complex64, Complex64) -> Complex64) -> Field {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| op(a, b)).collect();
        Self::assemble(&self.grid, values, coeffs)
    }

    /// Max relative deviation between stored coefficients and a fresh transform of the samples.
    pub fn consistency_error(&self) -> f64 {
        let fresh = self.grid.forward(&self.values);
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        fresh
            .iter()
            .zip(&self.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Largest `|c(-ξ) - conj c(ξ)|` over paired modes, relative to the largest coefficient.
    pub fn conjugate_symmetry_error(&self) -> f64 {
        let n = self.grid.n_points() as i64;
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        (0..n / 2)
            .map(|m| (self.coeff(-m) - self.coeff(m).conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

/// `max` that propagates NaN.
pub(crate) fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn check_len(grid: &SpectralGrid, len: usize) -> Result<()> {
    if len == grid.n_points() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "expected {} samples, got {len}",
            grid.n_points()
        )))
    }
}

/// Relative ℓ² distance between two fields, `‖a - b‖ / max(‖a‖, ‖b‖)`.
pub fn relative_distance(a: &Field, b: &Field) -> f64 {
    let diff: f64 = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm_sqr()).sum();
    let na: f64 = a.coeffs.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.coeffs.iter().map(|x| x.norm_sqr()).sum();
    let denom = na.max(nb);
    if denom == 0.0 {
        0.0
    } else {
        (diff / denom).sqrt()
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.try_add(rhs).expect("grid mismatch in Field + Field")
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.try_sub(rhs).expect("grid mismatch in Field - Field")
    }
}

impl Mul for &Field {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        self.try_mul(rhs).expect("grid mismatch in Field * Field")
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scale_real(rhs)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale_real(-1.0)
    }
}
