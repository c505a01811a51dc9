//! Random Fourier features for the Gaussian kernel `exp(-|x - x'|^2 / sigma^2)`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Frozen frequencies and phases. One instance is shared by every agent of a PN.
#[derive(Debug, Clone, PartialEq)]
pub struct RffParams {
    /// `dim_out x dim_in`, one frequency per row.
    pub frequencies: DMatrix<f64>,
    pub phases: DVector<f64>,
    pub dim_in: usize,
    pub dim_out: usize,
    pub kernel_width: f64,
    pub seed: u64,
}

impl RffParams {
    pub const DEFAULT_DIM_OUT: usize = 100;
    pub const DEFAULT_KERNEL_WIDTH: f64 = 1.0;

    /// Frequencies are N(0, 2/sigma^2) per coordinate, phases U[0, 2pi).
    pub fn sample(dim_in: usize, dim_out: usize, kernel_width: f64, seed: u64) -> Result<Self> {
        if dim_in < 1 || dim_out < 1 {
            return Err(Error::InvalidDimension(format!(
                "input dimension {dim_in} and feature dimension {dim_out} must both be at least 1"
            )));
        }
        if !(kernel_width > 0.0) || !kernel_width.is_finite() {
            return Err(Error::InvalidParameter(format!("kernel width must be positive, got {kernel_width}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal =
            Normal::new(0.0, 2f64.sqrt() / kernel_width).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        // row-major draw order so the stream does not depend on nalgebra's storage
        let mut freq = Vec::with_capacity(dim_out * dim_in);
        for _ in 0..dim_out * dim_in {
            freq.push(normal.sample(&mut rng));
        }
        let frequencies = DMatrix::from_row_slice(dim_out, dim_in, &freq);
        let phases = DVector::from_iterator(dim_out, (0..dim_out).map(|_| rng.random_range(0.0..TAU)));
        Ok(Self { frequencies, phases, dim_in, dim_out, kernel_width, seed })
    }

    /// `z_i = sqrt(2/D) cos(w_i . x + theta_i)`
    pub fn map(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: x.len() });
        }
        let scale = (2.0 / self.dim_out as f64).sqrt();
        let proj = &self.frequencies * DVector::from_column_slice(x);
        Ok(DVector::from_iterator(
            self.dim_out,
            proj.iter().zip(self.phases.iter()).map(|(p, th)| scale * (p + th).cos()),
        ))
    }
}

pub fn sample_rff_params(p: usize, d: usize, sigma: f64, seed: u64) -> Result<RffParams> {
    RffParams::sample(p, d, sigma, seed)
}

pub fn map_features(params: &RffParams, x: &[f64]) -> Result<DVector<f64>> {
    params.map(x)
}

pub fn approx_kernel(z1: &DVector<f64>, z2: &DVector<f64>) -> Result<f64> {
    if z1.len() != z2.len() {
        return Err(Error::DimensionMismatch { expected: z1.len(), got: z2.len() });
    }
    Ok(z1.dot(z2))
}

/// The kernel the features approximate.
pub fn gaussian_kernel(x1: &[f64], x2: &[f64], sigma: f64) -> f64 {
    let d2: f64 = x1.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (sigma * sigma)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn manual(freq: f64, phase: f64) -> RffParams {
        RffParams {
            frequencies: DMatrix::from_element(1, 1, freq),
            phases: DVector::from_element(1, phase),
            dim_in: 1,
            dim_out: 1,
            kernel_width: 1.0,
            seed: 0,
        }
    }

    #[test]
    fn same_seed_same_params() {
        let a = RffParams::sample(1, 1, 1.0, 42).unwrap();
        let b = RffParams::sample(1, 1, 1.0, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn frequency_variance_matches_sampling_law() {
        let p = RffParams::sample(6, 2048, 1.0, 7).unwrap();
        let n = p.frequencies.len() as f64;
        let mean = p.frequencies.iter().sum::<f64>() / n;
        let var = p.frequencies.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 2.0).abs() < 0.2, "variance {var}");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(RffParams::sample(2, 0, 1.0, 0), Err(Error::InvalidDimension(_))));
        assert!(matches!(RffParams::sample(0, 3, 1.0, 0), Err(Error::InvalidDimension(_))));
        assert!(matches!(RffParams::sample(2, 3, 0.0, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(RffParams::sample(2, 3, -1.0, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn zero_frequency_cases() {
        let z = manual(0.0, 0.0).map(&[3.7]).unwrap();
        assert!((z[0] - SQRT_2).abs() < 1e-15);
        let z = manual(0.0, FRAC_PI_2).map(&[-1.0]).unwrap();
        assert!(z[0].abs() < 1e-15);
    }

    #[test]
    fn wrong_input_length() {
        let p = RffParams::sample(3, 4, 1.0, 1).unwrap();
        assert!(matches!(p.map(&[1.0, 2.0]), Err(Error::DimensionMismatch { expected: 3, got: 2 })));
        let a = DVector::zeros(3);
        let b = DVector::zeros(4);
        assert!(approx_kernel(&a, &b).is_err());
    }

    #[test]
    fn squared_norm_near_one() {
        let p = RffParams::sample(6, 2048, 1.0, 3).unwrap();
        let x = [0.1, 0.5, 0.9, 0.3, 0.7, 0.2];
        let z = p.map(&x).unwrap();
        // direct summation of the cosine-squared expansion
        let mut expected = 0.0;
        for i in 0..p.dim_out {
            let arg: f64 = (0..6).map(|k| p.frequencies[(i, k)] * x[k]).sum::<f64>() + p.phases[i];
            expected += 1.0 + (2.0 * arg).cos();
        }
        expected /= p.dim_out as f64;
        let n2 = z.norm_squared();
        assert!((n2 - expected).abs() < 1e-12);
        assert!((0.8..=1.2).contains(&n2), "|z|^2 = {n2}");
        assert!((approx_kernel(&z, &z).unwrap() - 1.0).abs() < 0.15);
        assert_eq!(approx_kernel(&DVector::zeros(2048), &z).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn coordinates_bounded(seed in any::<u64>(), d in 1usize..64, x in prop::collection::vec(-50.0f64..50.0, 3)) {
            let p = RffParams::sample(3, d, 0.7, seed).unwrap();
            let z = p.map(&x).unwrap();
            let bound = (2.0 / d as f64).sqrt() * (1.0 + 1e-12);
            prop_assert!(z.iter().all(|v| v.abs() <= bound));
            prop_assert!(approx_kernel(&z, &z).unwrap() <= 2.0 + 1e-9);
            prop_assert!(p.phases.iter().all(|t| (0.0..=TAU).contains(t)));
        }

        #[test]
        fn mapping_is_deterministic(seed in any::<u64>(), x in prop::collection::vec(-5.0f64..5.0, 4)) {
            let a = RffParams::sample(4, 16, 2.0, seed).unwrap();
            let b = RffParams::sample(4, 16, 2.0, seed).unwrap();
            prop_assert_eq!(a.map(&x).unwrap(), b.map(&x).unwrap());
        }
    }
}
