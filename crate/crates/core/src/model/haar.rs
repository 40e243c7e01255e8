//! Orthonormal Haar wavelet transform.
//!
//! Coefficient layout for a length-`2^m` signal: index 0 holds the scaling
//! (DC) coefficient, followed by detail coefficients from the coarsest level
//! (1 coefficient) to the finest (`2^(m-1)` coefficients).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const INV_SQRT2: f64 = core::f64::consts::FRAC_1_SQRT_2;

fn check_len(len: usize) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::LengthNotPowerOfTwo(len));
    }
    Ok(())
}

pub fn haar_forward(signal: &[f64]) -> Result<Vec<f64>> {
    check_len(signal.len())?;
    let mut out = signal.to_vec();
    let mut tmp = vec![0.0; signal.len()];
    let mut len = signal.len();
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (out[2 * i], out[2 * i + 1]);
            tmp[i] = (a + b) * INV_SQRT2;
            tmp[half + i] = (a - b) * INV_SQRT2;
        }
        out[..len].copy_from_slice(&tmp[..len]);
        len = half;
    }
    Ok(out)
}

pub fn haar_inverse(coeffs: &[f64]) -> Result<Vec<f64>> {
    check_len(coeffs.len())?;
    let mut out = coeffs.to_vec();
    let mut tmp = vec![0.0; coeffs.len()];
    let mut len = 1;
    while len < coeffs.len() {
        for i in 0..len {
            let (s, d) = (out[i], out[len + i]);
            tmp[2 * i] = (s + d) * INV_SQRT2;
            tmp[2 * i + 1] = (s - d) * INV_SQRT2;
        }
        len *= 2;
        out[..len].copy_from_slice(&tmp[..len]);
    }
    Ok(out)
}

/// Piecewise-constant signal of length `len`: `levels[b]` on
/// `breaks[b-1]..breaks[b]` (with implicit `0` and `len` at the ends).
pub fn block_constant(len: usize, breaks: &[usize], levels: &[f64]) -> Vec<f64> {
    assert_eq!(breaks.len() + 1, levels.len());
    let mut out = Vec::with_capacity(len);
    let mut block = 0;
    for i in 0..len {
        while block < breaks.len() && i >= breaks[block] {
            block += 1;
        }
        out.push(levels[block]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn constant_maps_to_scaling_coefficient() {
        let c = 1.7;
        let h = haar_forward(&[c; 8]).unwrap();
        assert!((h[0] - c * 8f64.sqrt()).abs() < 1e-14);
        assert!(h[1..].iter().all(|&x| x.abs() < 1e-14));
    }

    #[test]
    fn unit_vector_keeps_norm() {
        let h = haar_forward(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let n: f64 = h.iter().map(|x| x * x).sum();
        assert!((n - 1.0).abs() < 1e-15);
    }

    #[test]
    fn round_trip_random() {
        let mut rng = Rng::new(9);
        let x: Vec<f64> = (0..1024).map(|_| rng.gaussian()).collect();
        let back = haar_inverse(&haar_forward(&x).unwrap()).unwrap();
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12);
    }

    #[test]
    fn block_signal_is_sparse() {
        let m = 10;
        let x = block_constant(1 << m, &[300, 700], &[1.0, -2.0, 0.5]);
        let h = haar_forward(&x).unwrap();
        let nnz = h.iter().filter(|v| v.abs() > 1e-10).count();
        assert!(nnz <= 3 * m + 1, "{nnz}");
    }

    #[test]
    fn rejects_bad_length() {
        assert_eq!(haar_forward(&[1.0; 6]), Err(Error::LengthNotPowerOfTwo(6)));
        assert_eq!(haar_inverse(&[]), Err(Error::LengthNotPowerOfTwo(0)));
    }
}
