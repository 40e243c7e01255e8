use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `Φ⁻¹(3/4)`: the MAD of a standard Gaussian. `mad(x) / GAUSSIAN_MAD_SCALE`
/// is a consistent estimate of the standard deviation of Gaussian data.
pub const GAUSSIAN_MAD_SCALE: f64 = 0.674_489_750_196_081_7;

/// Median; for even lengths the midpoint of the two central order statistics.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v: Vec<f64> = values.to_vec();
    Ok(median_in_place(&mut v))
}

fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (lower, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *m;
    if n % 2 == 1 {
        upper
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (below + upper)
    }
}

/// Median absolute deviation `median(|v_i - median(v)|)`.
pub fn mad(values: &[f64]) -> Result<f64> {
    let med = median(values)?;
    let mut dev: Vec<f64> = values.iter().map(|&x| libm::fabs(x - med)).collect();
    Ok(median_in_place(&mut dev))
}
