//! Smooth dyadic frequency decomposition.

use super::field::Field;
use super::multiplier::{apply_real_symbol, half_line_weight, HalfLine};

fn bump_tail(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Smooth cutoff: 1 on `|ξ| ≤ 1`, 0 on `|ξ| ≥ 2`, monotone in between.
pub fn psi(xi: f64) -> f64 {
    let t = xi.abs();
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let a = bump_tail(2.0 - t);
        let b = bump_tail(t - 1.0);
        a / (a + b)
    }
}

/// Dyadic bump `η(ξ) = ψ(ξ) − ψ(2ξ)`, supported in `1/2 ≤ |ξ| ≤ 2`.
pub fn eta(xi: f64) -> f64 {
    psi(xi) - psi(2.0 * xi)
}

/// Symbol of `Qⱼ`.
pub fn q_symbol(j: i32, xi: f64) -> f64 {
    eta(xi * 2f64.powi(-j))
}

/// Symbol of `P₀`: the sum of `η(2^{-j}ξ)` over `j ≤ -3`, closed at `ξ = 0` with value 1.
pub fn p0_symbol(xi: f64) -> f64 {
    psi(8.0 * xi)
}

/// Symbol of `P_{≤k}`, vanishing at `ξ = 0`.
pub fn leq_symbol(k: i32, xi: f64) -> f64 {
    if xi == 0.0 {
        0.0
    } else {
        psi(xi * 2f64.powi(-k))
    }
}

/// Symbol of `P_{≥k}`, vanishing at `ξ = 0`.
pub fn geq_symbol(k: i32, xi: f64) -> f64 {
    1.0 - psi(xi * 2f64.powi(1 - k))
}

/// `Qⱼ`.
pub fn lp_block(f: &Field, j: i32) -> Field {
    apply_real_symbol(f, |xi| q_symbol(j, xi))
}

pub fn lowpass_p0(f: &Field) -> Field {
    apply_real_symbol(f, p0_symbol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    Leq,
    Geq,
}

/// `P_{≤k}` or `P_{≥k}`.
pub fn band_projection(f: &Field, k: i32, band: Band) -> Field {
    match band {
        Band::Leq => apply_real_symbol(f, |xi| leq_symbol(k, xi)),
        Band::Geq => apply_real_symbol(f, |xi| geq_symbol(k, xi)),
    }
}

/// `P̃ = P_{≥-2}`, the complement of `P₀`.
pub fn p_tilde(f: &Field) -> Field {
    band_projection(f, -2, Band::Geq)
}

/// `P̃± = P± P̃`.
pub fn p_tilde_half(f: &Field, side: HalfLine) -> Field {
    apply_real_symbol(f, |xi| half_line_weight(xi, side) * geq_symbol(-2, xi))
}

/// Range of block indices whose support meets the grid's nonzero frequencies.
pub fn block_range(f: &Field) -> (i32, i32) {
    let g = f.grid();
    let lo = (g.dxi() / 2.0).log2().floor() as i32 - 1;
    let hi = g.xi_max().log2().ceil() as i32 + 1;
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::relative_distance;
    use crate::spectral::grid::SpectralGrid;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn cutoff_shape() {
        assert_eq!(psi(0.0), 1.0);
        assert_eq!(psi(1.0), 1.0);
        assert_eq!(psi(2.0), 0.0);
        assert!((psi(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = psi(1.0 + i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
        assert_eq!(eta(0.4), 0.0);
        assert_eq!(eta(2.1), 0.0);
        assert_eq!(p0_symbol(0.3), 0.0);
    }

    #[test]
    fn partition_of_unity_pointwise() {
        for &xi in &[1e-3, 0.07, 0.5, 1.0, 3.3, 17.0, 1000.0] {
            let s: f64 = (-20..=20).map(|j| q_symbol(j, xi)).sum();
            assert!((s - 1.0).abs() < 1e-14, "xi = {xi}: {s}");
            let tele: f64 = p0_symbol(xi) + (-2..=20).map(|j| q_symbol(j, xi)).sum::<f64>();
            assert!((tele - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn blocks_have_dyadic_support() {
        let g = SpectralGrid::new(64, 2.0 * PI).unwrap();
        let e2 = Field::from_fn_complex(&g, |x| Complex64::from_polar(1.0, 2.0 * x));
        assert!(lp_block(&e2, 3).sup_norm() < 1e-15);
        assert!(lowpass_p0(&e2).sup_norm() < 1e-15);
    }

    fn random_field(c: Vec<(f64, f64)>) -> Field {
        let g = SpectralGrid::new(256, 40.0).unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 256];
        for (i, (re, im)) in c.into_iter().enumerate() {
            coeffs[g.slot(i as i64 - 60).unwrap()] = Complex64::new(re, im);
        }
        Field::from_coeffs(&g, coeffs).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn far_blocks_are_orthogonal(
            c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 121),
            j in -4i32..4,
            gap in 2i32..5,
        ) {
            let f = random_field(c);
            let qq = lp_block(&lp_block(&f, j + gap), j);
            prop_assert!(qq.sup_norm() <= 1e-14 * f.sup_norm().max(1.0));
        }

        #[test]
        fn decompositions_reconstruct(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 121)) {
            let f = random_field(c);
            let (_, hi) = block_range(&f);
            let mut sum = lowpass_p0(&f);
            for j in -2..=hi {
                sum = &sum + &lp_block(&f, j);
            }
            prop_assert!(relative_distance(&sum, &f) < 1e-12);
            let smooth = &(&p_tilde_half(&f, HalfLine::Minus) + &lowpass_p0(&f)) + &p_tilde_half(&f, HalfLine::Plus);
            prop_assert!(relative_distance(&smooth, &f) < 1e-12);

            let mz = f.without_mean();
            let (lo, hi) = block_range(&mz);
            let mut blocks = Field::zeros(mz.grid());
            for j in lo..=hi {
                blocks = &blocks + &lp_block(&mz, j);
            }
            prop_assert!(relative_distance(&blocks, &mz) < 1e-12);
        }
    }
}
