//! Sobolev, mixed space-time and resolution norms; admissibility bookkeeping.

pub mod admissible;
pub mod mixed;

pub use admissible::{
    audit_csv, audit_passes, failing_ids, is_one_admissible, lemma_triplets, minimal_k_for_n9, n9_triplet, norm_family_audit, AdmissibleTriplet,
    AuditRow, NormFamilyEntry,
};
pub use mixed::{mixed_norm, xst_norm, MixedNormAccumulator, MixedNormSpec, Order, XstComponents};

use crate::error::{Error, Result};
use crate::spectral::{Field, SpectralGrid};

/// A trajectory: fields sampled at strictly increasing times on one grid.
#[derive(Clone, Debug)]
pub struct SpaceTimeField {
    grid: SpectralGrid,
    times: Vec<f64>,
    slices: Vec<Field>,
}

impl SpaceTimeField {
    pub fn new(times: Vec<f64>, slices: Vec<Field>) -> Result<Self> {
        let first = slices.first().ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
        if times.len() != slices.len() {
            return Err(Error::InvalidParameter("times and slices differ in length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("times must be strictly increasing".into()));
        }
        let grid = first.grid().clone();
        if slices.iter().any(|s| !s.grid().same_as(&grid)) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, times, slices })
    }

    /// Samples `f(t)` at `n_times` uniform times on `[0, t_end]`.
    pub fn sample(t_end: f64, n_times: usize, f: impl Fn(f64) -> Field) -> Result<Self> {
        if n_times < 2 {
            return Err(Error::InvalidParameter("need at least two time samples".into()));
        }
        let times: Vec<f64> = (0..n_times).map(|i| t_end * i as f64 / (n_times - 1) as f64).collect();
        let slices = times.iter().map(|&t| f(t)).collect();
        Self::new(times, slices)
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    /// Applies `f` to every slice.
    pub fn map(&self, f: impl Fn(&Field) -> Result<Field>) -> Result<Self> {
        let slices = self.slices.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(self.times.clone(), slices)
    }

    /// Trapezoid weights for the stored times.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.times)
    }
}

pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = times[i] - times[i - 1];
        w[i - 1] += 0.5 * h;
        w[i] += 0.5 * h;
    }
    w
}

/// `‖f‖_{H^s}` (or `‖f‖_{Ḣ^s}`) with Plancherel weight `1/2π` for the transform `∫e^{-ixξ}f`.
pub fn sobolev_norm(f: &Field, s: f64, homogeneous: bool) -> Result<f64> {
    if homogeneous && s < 0.0 && !f.is_mean_zero() {
        return Err(Error::NonzeroMean { mean: f.mean().norm() });
    }
    let g = f.grid();
    let zero = g.zero_slot();
    let sum: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let xi = g.xi(i);
            let w = if homogeneous {
                if i == zero {
                    0.0
                } else {
                    xi.abs().powf(2.0 * s)
                }
            } else {
                (1.0 + xi * xi).powf(s)
            };
            w * c.norm_sqr()
        })
        .sum();
    Ok((sum / g.length()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_and_single_mode() {
        let g = SpectralGrid::new(64, 2.0 * PI).unwrap();
        assert_eq!(sobolev_norm(&Field::zeros(&g), 0.7, false).unwrap(), 0.0);
        let e = Field::from_fn_complex(&g, |x| Complex64::from_polar(1.0, 3.0 * x));
        assert!((sobolev_norm(&e, 0.0, false).unwrap() - e.l2_norm()).abs() < 1e-13);
        // |3|^{2·0.5} weight on one mode
        let h = sobolev_norm(&e, 0.5, true).unwrap();
        assert!((h - 3f64.sqrt() * e.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn negative_homogeneous_needs_mean_zero() {
        let g = SpectralGrid::new(32, 2.0 * PI).unwrap();
        let f = Field::from_fn(&g, |x| 1.0 + x.cos());
        assert!(sobolev_norm(&f, -0.3, true).is_err());
        assert!(sobolev_norm(&f.without_mean(), -0.3, true).is_ok());
    }

    #[test]
    fn trajectory_validation() {
        let g = SpectralGrid::new(16, 1.0).unwrap();
        let z = Field::zeros(&g);
        assert!(SpaceTimeField::new(vec![0.0, 0.0], vec![z.clone(), z.clone()]).is_err());
        assert!(SpaceTimeField::new(vec![], vec![]).is_err());
        let other = Field::zeros(&SpectralGrid::new(8, 1.0).unwrap());
        assert!(SpaceTimeField::new(vec![0.0, 1.0], vec![z, other]).is_err());
    }

    proptest! {
        #[test]
        fn inhomogeneous_norm_grows_with_s(
            c in prop::collection::vec(-1.0f64..1.0, 9),
            s1 in -1.0f64..1.0,
            ds in 0.0f64..1.0,
        ) {
            let g = SpectralGrid::new(32, 5.0).unwrap();
            let f = Field::from_fn(&g, |x| c.iter().enumerate().map(|(m, a)| a * (m as f64 * x).cos()).sum());
            let a = sobolev_norm(&f, s1, false).unwrap();
            let b = sobolev_norm(&f, s1 + ds, false).unwrap();
            prop_assert!(b >= a * (1.0 - 1e-14));
        }
    }
}
