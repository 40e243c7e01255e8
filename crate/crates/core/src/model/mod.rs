//! The spiked covariance model: spikes, model parameters and sampled data.
//!
//! An observation is `x = Σ_q √β_q u_q v_q + z` with `u_q ~ N(0, 1)` and
//! `z ~ N(0, I_p)` all independent, and the `v_q` orthonormal and sparse.

mod haar;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use haar::{block_constant, haar_forward, haar_inverse};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, MatrixView};
use crate::rng::Rng;

/// How the nonzero entries of a spike are generated.
#[derive(Clone, Debug, PartialEq)]
pub enum SpikeKind {
    /// `±1/√k` with independent random signs.
    UniformMagnitude,
    /// Magnitudes uniform on `[θ/√k, 1/√k]`, random signs, then normalised.
    SignedUniform,
    /// Given values on the support (same order as `support`), normalised.
    Explicit(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpikeSpec {
    pub p: usize,
    pub support: Vec<usize>,
    pub kind: SpikeKind,
    /// Lower bound parameter: nonzero entries satisfy `|v_i| ≥ θ/√k`.
    pub theta: f64,
}

impl SpikeSpec {
    pub fn new(p: usize, support: Vec<usize>, kind: SpikeKind, theta: f64) -> Self {
        SpikeSpec {
            p,
            support,
            kind,
            theta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.support.len();
        if k == 0 {
            return Err(Error::InfeasibleSpec("empty support".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InfeasibleSpec(format!(
                "theta must lie in (0, 1], got {}",
                self.theta
            )));
        }
        let mut sorted = self.support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k {
            return Err(Error::InfeasibleSpec("support indices are not distinct".into()));
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i >= self.p) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                dim: self.p,
            });
        }
        if let SpikeKind::Explicit(values) = &self.kind {
            if values.len() != k {
                return Err(Error::InfeasibleSpec(format!(
                    "{} explicit values for a support of size {}",
                    values.len(),
                    k
                )));
            }
        }
        Ok(())
    }
}

/// Unit-norm spike supported exactly on `spec.support`.
pub fn make_spike(spec: &SpikeSpec, rng: &mut Rng) -> Result<Vec<f64>> {
    spec.validate()?;
    let k = spec.support.len();
    let root_k = libm::sqrt(k as f64);
    let mut values: Vec<f64> = match &spec.kind {
        SpikeKind::UniformMagnitude => (0..k).map(|_| rng.sign() / root_k).collect(),
        SpikeKind::SignedUniform => (0..k)
            .map(|_| {
                let mag = rng.uniform_in(spec.theta / root_k, 1.0 / root_k);
                rng.sign() * mag
            })
            .collect(),
        SpikeKind::Explicit(v) => v.clone(),
    };
    let norm = libm::sqrt(values.iter().map(|x| x * x).sum::<f64>());
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InfeasibleSpec("spike values have zero or non-finite norm".into()));
    }
    values.iter_mut().for_each(|x| *x /= norm);
    let floor = spec.theta / root_k;
    if let Some(min) = values.iter().map(|x| libm::fabs(*x)).reduce(f64::min) {
        // tiny slack for the rounding of the normalisation
        if min < floor * (1.0 - 1e-12) {
            return Err(Error::InfeasibleSpec(format!(
                "smallest entry {min} is below theta/sqrt(k) = {floor} after normalisation"
            )));
        }
    }
    let mut v = vec![0.0; spec.p];
    for (&i, &x) in spec.support.iter().zip(&values) {
        v[i] = x;
    }
    Ok(v)
}

/// A complete spiked covariance instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    p: usize,
    betas: Vec<f64>,
    spikes: Vec<Vec<f64>>,
    gamma: Option<f64>,
}

impl ModelParams {
    /// Validates: distinct, strictly decreasing, nonnegative signal
    /// strengths (a zero strength gives the null model); unit-norm spikes;
    /// overlapping spikes orthogonal and within the entry-ratio bound
    /// `gamma` on their shared support.
    pub fn new(p: usize, betas: Vec<f64>, spikes: Vec<Vec<f64>>, gamma: Option<f64>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        if betas.len() != spikes.len() {
            return Err(Error::InvalidModel(format!(
                "{} strengths for {} spikes",
                betas.len(),
                spikes.len()
            )));
        }
        if betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::InvalidModel("strengths must be finite and nonnegative".into()));
        }
        if betas.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::InvalidModel("strengths must be strictly decreasing".into()));
        }
        for (q, v) in spikes.iter().enumerate() {
            if v.len() != p {
                return Err(Error::InvalidModel(format!("spike {q} has length {}, expected {p}", v.len())));
            }
            let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidModel(format!("spike {q} has norm {norm}")));
            }
        }
        for a in 0..spikes.len() {
            for b in (a + 1)..spikes.len() {
                let shared: Vec<usize> = (0..p).filter(|&i| spikes[a][i] != 0.0 && spikes[b][i] != 0.0).collect();
                if shared.is_empty() {
                    continue;
                }
                let ip: f64 = spikes[a].iter().zip(&spikes[b]).map(|(x, y)| x * y).sum();
                if ip.abs() > 1e-10 {
                    return Err(Error::InvalidModel(format!("spikes {a} and {b} are not orthogonal ({ip})")));
                }
                let Some(g) = gamma else {
                    return Err(Error::InvalidModel(format!(
                        "spikes {a} and {b} overlap but no ratio bound gamma was given"
                    )));
                };
                for &i in &shared {
                    let ratio = (spikes[a][i] / spikes[b][i]).abs();
                    if ratio > g || 1.0 / ratio > g {
                        return Err(Error::InvalidModel(format!(
                            "entry ratio {ratio} at index {i} exceeds gamma = {g}"
                        )));
                    }
                }
            }
        }
        Ok(ModelParams {
            p,
            betas,
            spikes,
            gamma,
        })
    }

    /// Pure noise: no spikes.
    pub fn null(p: usize) -> Self {
        ModelParams {
            p,
            betas: Vec::new(),
            spikes: Vec::new(),
            gamma: None,
        }
    }

    /// `betas.len()` spikes on disjoint supports of sizes `ks`, drawn
    /// uniformly at random from `[p]`, with entries of the given kind.
    pub fn disjoint(
        p: usize,
        betas: &[f64],
        ks: &[usize],
        kind: SpikeKind,
        theta: f64,
        rng: &mut Rng,
    ) -> Result<Self> {
        if betas.len() != ks.len() {
            return Err(Error::InvalidModel(format!(
                "{} strengths for {} support sizes",
                betas.len(),
                ks.len()
            )));
        }
        let total: usize = ks.iter().sum();
        if total > p {
            return Err(Error::InvalidModel(format!(
                "supports of total size {total} do not fit in dimension {p}"
            )));
        }
        // one random subset, then shuffled into consecutive groups
        let mut pool = rng.sample_indices(p, total);
        for i in (1..pool.len()).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            pool.swap(i, j);
        }
        let mut spikes = Vec::with_capacity(ks.len());
        let mut start = 0;
        for &k in ks {
            let mut support = pool[start..start + k].to_vec();
            support.sort_unstable();
            start += k;
            let spec = SpikeSpec::new(p, support, kind.clone(), theta);
            spikes.push(make_spike(&spec, rng)?);
        }
        ModelParams::new(p, betas.to_vec(), spikes, None)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn r(&self) -> usize {
        self.spikes.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn spikes(&self) -> &[Vec<f64>] {
        &self.spikes
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn support(&self, q: usize) -> Vec<usize> {
        (0..self.p).filter(|&i| self.spikes[q][i] != 0.0).collect()
    }

    pub fn support_sizes(&self) -> Vec<usize> {
        (0..self.r()).map(|q| self.support(q).len()).collect()
    }

    /// `∪_q supp(v_q)`, ascending.
    pub fn union_support(&self) -> Vec<usize> {
        (0..self.p)
            .filter(|&i| self.spikes.iter().any(|v| v[i] != 0.0))
            .collect()
    }

    /// The same model with every spike negated.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.spikes {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        out
    }
}

/// `2n` observations (rows) of dimension `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    /// Half-sample size; `x` has exactly `2n` rows.
    pub n: usize,
    pub seed: Option<u64>,
    pub truth: Option<ModelParams>,
}

impl Dataset {
    pub fn new(x: Matrix, seed: Option<u64>, truth: Option<ModelParams>) -> Result<Self> {
        if x.rows() < 2 || x.rows() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "a dataset needs an even, positive number of rows (got {})",
                x.rows()
            )));
        }
        if let Some(t) = &truth {
            if t.p() != x.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "model dimension {} vs data dimension {}",
                    t.p(),
                    x.cols()
                )));
            }
        }
        let n = x.rows() / 2;
        Ok(Dataset { x, n, seed, truth })
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn first_half(&self) -> MatrixView<'_> {
        self.x.row_range(0, self.n)
    }

    pub fn second_half(&self) -> MatrixView<'_> {
        self.x.row_range(self.n, 2 * self.n)
    }
}

/// Draws `2n` observations from `params` using `Rng::new(seed)`.
///
/// Generation order, row by row: first `u_{1,i}, …, u_{r,i}`, then the `p`
/// noise entries `z_{i,1}, …, z_{i,p}`. Signal terms are added only on the
/// spike supports, so off-support entries are exactly the noise draws.
pub fn sample_dataset(params: &ModelParams, n: usize, seed: u64) -> Dataset {
    assert!(n >= 1, "half-sample size must be positive");
    let p = params.p();
    let mut rng = Rng::new(seed);
    let supports: Vec<Vec<usize>> = (0..params.r()).map(|q| params.support(q)).collect();
    let scales: Vec<f64> = params.betas().iter().map(|&b| libm::sqrt(b)).collect();
    let mut data = vec![0.0; 2 * n * p];
    let mut u = vec![0.0; params.r()];
    for row in data.chunks_exact_mut(p) {
        rng.fill_gaussian(&mut u);
        rng.fill_gaussian(row);
        for q in 0..params.r() {
            let coef = scales[q] * u[q];
            let v = &params.spikes()[q];
            for &i in &supports[q] {
                row[i] += coef * v[i];
            }
        }
    }
    let x = Matrix::new(2 * n, p, data).expect("sized above");
    Dataset {
        x,
        n,
        seed: Some(seed),
        truth: Some(params.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_magnitude_entries() {
        let mut rng = Rng::new(1);
        let spec = SpikeSpec::new(10, vec![1, 3, 5, 7], SpikeKind::UniformMagnitude, 1.0);
        let v = make_spike(&spec, &mut rng).unwrap();
        for (i, &x) in v.iter().enumerate() {
            if spec.support.contains(&i) {
                assert!((x.abs() - 0.5).abs() < 1e-15);
            } else {
                assert_eq!(x, 0.0);
            }
        }
        let e = make_spike(&SpikeSpec::new(6, vec![4], SpikeKind::UniformMagnitude, 1.0), &mut rng).unwrap();
        assert_eq!(e.iter().filter(|x| **x != 0.0).count(), 1);
        assert_eq!(e[4].abs(), 1.0);
    }

    #[test]
    fn signed_uniform_respects_floor() {
        let mut rng = Rng::new(2);
        let spec = SpikeSpec::new(40, (0..10).collect(), SpikeKind::SignedUniform, 0.5);
        let floor = 0.5 / 10f64.sqrt();
        for _ in 0..1000 {
            let v = make_spike(&spec, &mut rng).unwrap();
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!(v[..10].iter().all(|x| x.abs() >= floor));
        }
    }

    #[test]
    fn explicit_spike_below_floor_is_infeasible() {
        let mut rng = Rng::new(3);
        let spec = SpikeSpec::new(4, vec![0, 1], SpikeKind::Explicit(vec![1.0, 0.01]), 0.9);
        assert!(matches!(make_spike(&spec, &mut rng), Err(Error::InfeasibleSpec(_))));
        let bad = SpikeSpec::new(4, vec![0, 9], SpikeKind::UniformMagnitude, 1.0);
        assert!(matches!(make_spike(&bad, &mut rng), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn model_validation() {
        let e0 = vec![1.0, 0.0, 0.0];
        let e1 = vec![0.0, 1.0, 0.0];
        assert!(ModelParams::new(3, vec![2.0, 1.0], vec![e0.clone(), e1.clone()], None).is_ok());
        assert!(ModelParams::new(3, vec![1.0, 1.0], vec![e0.clone(), e1.clone()], None).is_err());
        assert!(ModelParams::new(3, vec![1.0, 2.0], vec![e0.clone(), e1], None).is_err());
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let a = vec![h, h, 0.0];
        let b = vec![h, -h, 0.0];
        assert!(ModelParams::new(3, vec![2.0, 1.0], vec![a.clone(), b.clone()], None).is_err());
        assert!(ModelParams::new(3, vec![2.0, 1.0], vec![a.clone(), b], Some(1.0)).is_ok());
        assert!(ModelParams::new(3, vec![2.0, 1.0], vec![a, e0], Some(10.0)).is_err());
    }

    #[test]
    fn disjoint_supports() {
        let mut rng = Rng::new(4);
        let m = ModelParams::disjoint(100, &[3.0, 2.0], &[5, 7], SpikeKind::UniformMagnitude, 1.0, &mut rng).unwrap();
        assert_eq!(m.support_sizes(), vec![5, 7]);
        assert_eq!(m.union_support().len(), 12);
        let ip: f64 = m.spikes()[0].iter().zip(&m.spikes()[1]).map(|(x, y)| x * y).sum();
        assert_eq!(ip, 0.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut rng = Rng::new(5);
        let m = ModelParams::disjoint(30, &[2.0], &[5], SpikeKind::UniformMagnitude, 1.0, &mut rng).unwrap();
        let a = sample_dataset(&m, 20, 77);
        let b = sample_dataset(&m, 20, 77);
        assert_eq!(a, b);
        assert_eq!(a.x.rows(), 40);
        assert_ne!(sample_dataset(&m, 20, 78).x, a.x);
    }

    #[test]
    fn null_model_is_white_noise() {
        let d = sample_dataset(&ModelParams::null(50), 2000, 6);
        let m = d.x.rows() as f64;
        let mean_diag: f64 = (0..50)
            .map(|j| (0..d.x.rows()).map(|i| d.x.get(i, j).powi(2)).sum::<f64>() / m)
            .sum::<f64>()
            / 50.0;
        // se of the mean of 50 diagonal entries, each with variance 2/m
        assert!((mean_diag - 1.0).abs() < 4.0 * (2.0 / m / 50.0).sqrt());
    }

    #[test]
    fn dataset_row_contract() {
        assert!(Dataset::new(Matrix::zeros(3, 2), None, None).is_err());
        assert!(Dataset::new(Matrix::zeros(0, 2), None, None).is_err());
        let d = Dataset::new(Matrix::zeros(4, 2), None, None).unwrap();
        assert_eq!(d.n, 2);
        assert!(Dataset::new(Matrix::zeros(4, 2), None, Some(ModelParams::null(3))).is_err());
    }
}
