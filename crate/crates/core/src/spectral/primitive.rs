use num_complex::Complex64;

use super::field::Field;
use super::multiplier::{inverse_derivative, spectral_derivative};

/// Start of the boundary taper as a fraction of L, measured from the left end.
const TAPER_START: f64 = 0.9;

/// `∫_{-L/2}^x f`, split into a periodic part and a linear ramp.
#[derive(Clone, Debug)]
pub struct Antiderivative {
    periodic: Field,
    slope: Complex64,
}

/// Antiderivative with `F(-L/2) = 0`, the torus surrogate for `∫_{-∞}^x f`.
pub fn antiderivative(f: &Field) -> Antiderivative {
    let slope = f.mean();
    let p = inverse_derivative(&f.without_mean());
    let p0 = p.values()[0];
    let periodic = p.map_values(|z| z - p0);
    Antiderivative { periodic, slope }
}

impl Antiderivative {
    pub fn periodic_part(&self) -> &Field {
        &self.periodic
    }

    /// Mean of the integrand, the slope of the ramp.
    pub fn slope(&self) -> Complex64 {
        self.slope
    }

    /// `F(L/2)`, the integral over the whole period.
    pub fn total(&self) -> Complex64 {
        self.slope * self.periodic.grid().length()
    }

    /// Samples of `F` on the grid; not periodic when the slope is nonzero.
    pub fn field(&self) -> Field {
        let g = self.periodic.grid().clone();
        let half = 0.5 * g.length();
        let v = self
            .periodic
            .values()
            .iter()
            .enumerate()
            .map(|(j, z)| z + self.slope * (g.x(j) + half))
            .collect();
        Field::from_complex(&g, v).expect("length matches grid")
    }

    /// `F - F(L/2) S(x)` with `S` a smooth step over the outermost tenth of the domain.
    ///
    /// Equal to `F` on `x < 0.4 L` and periodic-smooth on the torus.
    pub fn tapered(&self) -> Field {
        let g = self.periodic.grid().clone();
        let total = self.total();
        let f = self.field();
        let v = f
            .values()
            .iter()
            .enumerate()
            .map(|(j, z)| z - total * boundary_step(g.x(j), g.length()))
            .collect();
        Field::from_complex(&g, v).expect("length matches grid")
    }

    /// Spectral derivative, which reproduces the integrand.
    pub fn derivative(&self) -> Field {
        spectral_derivative(&self.periodic).map_values(|z| z + self.slope)
    }
}

fn smooth_tail(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// C^∞ step on `[-L/2, L/2)`: 0 left of `0.4 L`, 1 at the right end.
pub fn boundary_step(x: f64, length: f64) -> f64 {
    let tau = (x + 0.5 * length - TAPER_START * length) / ((1.0 - TAPER_START) * length);
    if tau <= 0.0 {
        0.0
    } else if tau >= 1.0 {
        1.0
    } else {
        let a = smooth_tail(tau);
        a / (a + smooth_tail(1.0 - tau))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::relative_distance;
    use crate::spectral::grid::SpectralGrid;
    use std::f64::consts::PI;

    #[test]
    fn cosine_integrates_to_sine() {
        let g = SpectralGrid::new(64, 2.0 * PI).unwrap();
        let a = antiderivative(&Field::from_fn(&g, f64::cos));
        assert!((&a.field() - &Field::from_fn(&g, f64::sin)).sup_norm() < 1e-13);
        assert!(a.field().values()[0].norm() < 1e-15);
    }

    #[test]
    fn constant_gives_ramp() {
        let g = SpectralGrid::new(32, 10.0).unwrap();
        let a = antiderivative(&Field::from_fn(&g, |_| 2.0));
        let expected = Field::from_fn(&g, |x| 2.0 * (x + 5.0));
        assert!((&a.field() - &expected).sup_norm() < 1e-12);
        assert!((a.total().re - 20.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_round_trip() {
        let g = SpectralGrid::new(256, 30.0).unwrap();
        let f = Field::from_fn(&g, |x| (-(x - 1.0).powi(2)).exp() * (1.0 + 0.3 * x.sin()));
        let a = antiderivative(&f);
        assert!(relative_distance(&a.derivative(), &f) < 1e-10);
    }

    #[test]
    fn taper_is_confined_and_periodic() {
        let (g, len) = (SpectralGrid::new(1024, 40.0).unwrap(), 40.0);
        let f = Field::from_fn(&g, |x| (-(x * x)).exp());
        let a = antiderivative(&f);
        let (full, tap) = (a.field(), a.tapered());
        for j in 0..1024 {
            let x = g.x(j);
            let d = (full.values()[j] - tap.values()[j]).norm();
            if x < 0.4 * len {
                assert!(d == 0.0);
            }
        }
        // periodic smoothness: the tapered antiderivative differentiates back to f in the interior
        let df = spectral_derivative(&tap);
        for j in 0..1024 {
            if g.x(j).abs() < 0.25 * len {
                assert!((df.values()[j] - f.values()[j]).norm() < 1e-10);
            }
        }
        assert_eq!(boundary_step(-20.0, len), 0.0);
        assert!((boundary_step(18.0, len) - 0.5).abs() < 1e-12);
    }
}
