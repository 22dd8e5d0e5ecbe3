use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic grid on `[-L/2, L/2)` with `n` samples.
///
/// Discrete coefficients follow the continuum convention
/// `f̂(ξ) = ∫ e^{-ixξ} f(x) dx`, approximated by `c_m = (L/n) Σ_j f(x_j) e^{-iξ_m x_j}`
/// with `ξ_m = 2πm/L`. Coefficient vectors are stored in m-index order
/// `m = -n/2, …, n/2 - 1`, so slot `i` holds mode `m = i - n/2`.
#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralGrid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 8, got {n_points}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n: n_points,
            length,
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Frequency spacing `2π/L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest |ξ| on the grid (the Nyquist mode `m = -n/2`).
    pub fn xi_max(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Mode number stored in slot `i`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        i as i64 - (self.n / 2) as i64
    }

    /// Slot holding mode `m`, if it is on the grid.
    pub fn slot(&self, m: i64) -> Option<usize> {
        let i = m + (self.n / 2) as i64;
        (0..self.n as i64).contains(&i).then_some(i as usize)
    }

    #[inline]
    pub fn xi(&self, i: usize) -> f64 {
        self.mode(i) as f64 * self.dxi()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.xi(i)).collect()
    }

    /// Slot of the zero mode.
    pub fn zero_slot(&self) -> usize {
        self.n / 2
    }

    /// Slot of the unpaired Nyquist mode `m = -n/2`.
    pub fn nyquist_slot(&self) -> usize {
        0
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn same_as(&self, other: &SpectralGrid) -> bool {
        self.n == other.n && self.length == other.length
    }

    pub(crate) fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let scale = self.length / n as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, slot) in out.iter_mut().enumerate() {
            let m = self.mode(i);
            let k = m.rem_euclid(n as i64) as usize;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *slot = buf[k] * (scale * sign);
        }
        out
    }

    pub(crate) fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (i, c) in coeffs.iter().enumerate() {
            let m = self.mode(i);
            let k = m.rem_euclid(n as i64) as usize;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            buf[k] = c * sign;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.length;
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n_points", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}
