use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{sobolev_norm, SpaceTimeField};
use crate::error::{Error, Result};
use crate::spectral::{fractional_derivative, lowpass_p0};

/// Which variable the outer norm is taken in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// `‖f‖_{L^p_x L^q_T}`.
    XOuter,
    /// `‖f‖_{L^q_T L^p_x}`.
    TOuter,
}

/// Exponents `p` (space) and `q` (time), each in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub p: f64,
    pub q: f64,
    pub order: Order,
}

impl MixedNormSpec {
    pub fn new(p: f64, q: f64, order: Order) -> Result<Self> {
        for (name, e) in [("p", p), ("q", q)] {
            if !(e >= 1.0) {
                return Err(Error::InvalidParameter(format!("exponent {name} = {e} outside [1, inf]")));
            }
        }
        Ok(Self { p, q, order })
    }

    pub fn x_outer(p: f64, q: f64) -> Self {
        Self::new(p, q, Order::XOuter).expect("valid exponents")
    }

    pub fn t_outer(p: f64, q: f64) -> Self {
        Self::new(p, q, Order::TOuter).expect("valid exponents")
    }
}

/// Streaming evaluation of a mixed norm: slices are pushed one at a time with their quadrature weight.
#[derive(Clone, Debug)]
pub struct MixedNormAccumulator {
    spec: MixedNormSpec,
    dx: f64,
    per_point: Vec<f64>,
    over_time: f64,
    pushed: usize,
}

impl MixedNormAccumulator {
    pub fn new(n_points: usize, dx: f64, spec: MixedNormSpec) -> Self {
        let per_point = match spec.order {
            Order::XOuter => vec![0.0; n_points],
            Order::TOuter => Vec::new(),
        };
        Self { spec, dx, per_point, over_time: 0.0, pushed: 0 }
    }

    /// Adds one time slice with time weight `weight` (ignored when `q = ∞`).
    pub fn push(&mut self, values: &[Complex64], weight: f64) {
        let MixedNormSpec { p, q, order } = self.spec;
        self.pushed += 1;
        match order {
            Order::XOuter => {
                for (acc, v) in self.per_point.iter_mut().zip(values) {
                    let a = v.norm();
                    if q.is_infinite() {
                        *acc = acc.max(a);
                    } else {
                        *acc += weight * a.powf(q);
                    }
                }
            }
            Order::TOuter => {
                let n = spatial_norm(values.iter().map(|v| v.norm()), p, self.dx);
                if q.is_infinite() {
                    self.over_time = self.over_time.max(n);
                } else {
                    self.over_time += weight * n.powf(q);
                }
            }
        }
    }

    pub fn finish(&self) -> Result<f64> {
        if self.pushed == 0 {
            return Err(Error::InvalidParameter("empty trajectory".into()));
        }
        let MixedNormSpec { p, q, order } = self.spec;
        Ok(match order {
            Order::XOuter => {
                let inner = self.per_point.iter().map(|&a| if q.is_infinite() { a } else { a.powf(1.0 / q) });
                spatial_norm(inner, p, self.dx)
            }
            Order::TOuter => {
                if q.is_infinite() {
                    self.over_time
                } else {
                    self.over_time.powf(1.0 / q)
                }
            }
        })
    }
}

fn spatial_norm(abs_values: impl Iterator<Item = f64>, p: f64, dx: f64) -> f64 {
    if p.is_infinite() {
        abs_values.fold(0.0, f64::max)
    } else {
        (abs_values.map(|a| a.powf(p)).sum::<f64>() * dx).powf(1.0 / p)
    }
}

/// Mixed Lebesgue norm with trapezoid quadrature in time and a Riemann sum in space.
pub fn mixed_norm(u: &SpaceTimeField, spec: MixedNormSpec) -> Result<f64> {
    let mut acc = MixedNormAccumulator::new(u.grid().n_points(), u.grid().dx(), spec);
    for (slice, w) in u.slices().iter().zip(u.trapezoid_weights()) {
        acc.push(slice.values(), w);
    }
    acc.finish()
}

/// The four parts of the resolution norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XstComponents {
    /// `sup_t ‖u‖_{H^s}`.
    pub energy: f64,
    /// `‖D^{s+1/2}u‖_{L^∞_x L²_T}`.
    pub smoothing: f64,
    /// `‖D^{s-1/4}u‖_{L⁴_x L^∞_T}`, with the zero mode removed first.
    pub maximal: f64,
    /// `‖P₀u‖_{L²_x L^∞_T}`.
    pub low_maximal: f64,
}

impl XstComponents {
    pub fn total(&self) -> f64 {
        self.energy + self.smoothing + self.maximal + self.low_maximal
    }
}

pub fn xst_norm(u: &SpaceTimeField, s: f64) -> Result<XstComponents> {
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::InvalidParameter(format!("s = {s} outside (0, 1/2)")));
    }
    let g = u.grid();
    let mut energy: f64 = 0.0;
    let mut smooth = MixedNormAccumulator::new(g.n_points(), g.dx(), MixedNormSpec::x_outer(f64::INFINITY, 2.0));
    let mut maximal = MixedNormAccumulator::new(g.n_points(), g.dx(), MixedNormSpec::x_outer(4.0, f64::INFINITY));
    let mut low = MixedNormAccumulator::new(g.n_points(), g.dx(), MixedNormSpec::x_outer(2.0, f64::INFINITY));
    for (slice, w) in u.slices().iter().zip(u.trapezoid_weights()) {
        energy = energy.max(sobolev_norm(slice, s, false)?);
        smooth.push(fractional_derivative(slice, s + 0.5)?.values(), w);
        maximal.push(fractional_derivative(&slice.without_mean(), s - 0.25)?.values(), w);
        low.push(lowpass_p0(slice).values(), w);
    }
    Ok(XstComponents {
        energy,
        smoothing: smooth.finish()?,
        maximal: maximal.finish()?,
        low_maximal: low.finish()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{free_evolve, Field, SpectralGrid};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn two_pi_grid() -> SpectralGrid {
        SpectralGrid::new(64, 2.0 * PI).unwrap()
    }

    #[test]
    fn constant_field() {
        let g = two_pi_grid();
        let u = SpaceTimeField::sample(1.0, 11, |_| Field::from_fn(&g, |_| 1.0)).unwrap();
        let v = mixed_norm(&u, MixedNormSpec::x_outer(2.0, 4.0)).unwrap();
        assert!((v - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cosine_sup_in_time() {
        let g = two_pi_grid();
        let u = SpaceTimeField::sample(1.0, 5, |_| Field::from_fn(&g, f64::cos)).unwrap();
        let v = mixed_norm(&u, MixedNormSpec::x_outer(2.0, f64::INFINITY)).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn separable_factorizes() {
        let g = two_pi_grid();
        let h = |t: f64| 1.0 + t;
        let u = SpaceTimeField::sample(1.0, 201, |t| Field::from_fn(&g, |x| (1.0 + x.sin()) * h(t))).unwrap();
        let gp: f64 = (g.points().iter().map(|x| (1.0 + x.sin()).abs().powi(3)).sum::<f64>() * g.dx()).cbrt();
        // ∫₀¹ (1+t)² dt = 7/3
        let expected = gp * (7.0f64 / 3.0).sqrt();
        let v = mixed_norm(&u, MixedNormSpec::x_outer(3.0, 2.0)).unwrap();
        assert!((v - expected).abs() < 1e-4 * expected);
    }

    #[test]
    fn equal_exponents_commute() {
        let g = SpectralGrid::new(128, 20.0).unwrap();
        let phi = Field::from_fn(&g, |x| (-(x * x)).exp());
        let u = SpaceTimeField::sample(0.5, 101, |t| free_evolve(&phi, t)).unwrap();
        let a = mixed_norm(&u, MixedNormSpec::x_outer(4.0, 4.0)).unwrap();
        let b = mixed_norm(&u, MixedNormSpec::t_outer(4.0, 4.0)).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn xst_of_zero_and_of_low_free_wave() {
        let g = two_pi_grid();
        let z = SpaceTimeField::sample(0.5, 5, |_| Field::zeros(&g)).unwrap();
        assert_eq!(xst_norm(&z, 0.3).unwrap().total(), 0.0);
        let phi = Field::from_fn(&g, f64::cos);
        let u = SpaceTimeField::sample(0.5, 33, |t| free_evolve(&phi, t)).unwrap();
        let c = xst_norm(&u, 0.3).unwrap();
        assert!(c.total().is_finite() && c.energy > 0.0);
        // cos has no modes in |ξ| ≤ 1/4
        assert!(c.low_maximal < 1e-12);
        assert!((c.total() - (c.energy + c.smoothing + c.maximal + c.low_maximal)).abs() == 0.0);
    }

    #[test]
    fn empty_accumulator_errors() {
        let acc = MixedNormAccumulator::new(8, 1.0, MixedNormSpec::x_outer(2.0, 2.0));
        assert!(acc.finish().is_err());
        assert!(MixedNormSpec::new(0.5, 2.0, Order::XOuter).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn homogeneous_and_monotone(
            c in -3.0f64..3.0,
            p in 1.0f64..8.0,
            q in 1.0f64..8.0,
            a in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let g = SpectralGrid::new(32, 6.0).unwrap();
            let make = |scale: f64| SpaceTimeField::sample(1.0, 9, |t| {
                Field::from_fn(&g, |x| scale * (a[0] + a[1] * x.sin() + a[2] * (t * x).cos() + a[3] * t))
            }).unwrap();
            for spec in [MixedNormSpec::x_outer(p, q), MixedNormSpec::t_outer(p, q)] {
                let base = mixed_norm(&make(1.0), spec).unwrap();
                let scaled = mixed_norm(&make(c), spec).unwrap();
                prop_assert!((scaled - c.abs() * base).abs() <= 1e-10 * base.max(1e-300) + 1e-300);
                let bigger = mixed_norm(&make(1.5), spec).unwrap();
                prop_assert!(bigger >= base);
            }
        }
    }
}
