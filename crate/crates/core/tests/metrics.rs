use covthresh_core::linalg::{gram_centered, soft_threshold_matrix, DenseSymmetric};
use covthresh_core::metrics::*;
use covthresh_core::model::*;
use covthresh_core::rng::Rng;
use proptest::prelude::*;

fn unit(rng: &mut Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

#[test]
fn noise_only_data_has_no_signal_block() {
    let d = sample_dataset(&ModelParams::null(60), 80, 3);
    let diag = decomposition_diagnostics(&d, 2.0).unwrap();
    assert_eq!(diag.norm_s_minus_signal, 0.0);
    assert_eq!(diag.norm_r1, 0.0);
    assert!(diag.norm_n > 0.0);
}

#[test]
fn signal_block_norm_matches_dense_reference() {
    let mut rng = Rng::new(4);
    let model = ModelParams::disjoint(80, &[4.0, 2.0], &[6, 5], SpikeKind::UniformMagnitude, 1.0, &mut rng).unwrap();
    let d = sample_dataset(&model, 200, 5);
    let diag = decomposition_diagnostics(&d, 2.0).unwrap();
    let sigma = gram_centered(d.first_half(), true, 1.0).unwrap();
    let b = decompose(&sigma, 2.0 / 200f64.sqrt(), &model).unwrap();
    let s = b.s.to_dense();
    let dense = DenseSymmetric::from_fn(80, |i, j| {
        s.get(i, j) - model.betas().iter().zip(model.spikes()).map(|(be, v)| be * v[i] * v[j]).sum::<f64>()
    });
    let reference = covthresh_core::linalg::spectral_norm(&dense, 1e-10).unwrap();
    assert!((diag.norm_s_minus_signal - reference).abs() <= 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn loss_is_symmetric_and_sign_blind(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = Rng::new(seed);
        let a = unit(&mut rng, n);
        let b = unit(&mut rng, n);
        let l = vector_loss(&a, &b).unwrap();
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        prop_assert!((l - vector_loss(&b, &a).unwrap()).abs() <= 1e-15);
        prop_assert!((l - vector_loss(&neg, &b).unwrap()).abs() <= 1e-15);
        let direct = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
            .min(a.iter().zip(&b).map(|(x, y)| (x + y).powi(2)).sum::<f64>().sqrt());
        prop_assert!((l - direct).abs() <= 1e-7);
    }

    #[test]
    fn support_counts_are_consistent(
        est in proptest::collection::btree_set(0usize..40, 0..20),
        tru in proptest::collection::btree_set(0usize..40, 0..20),
    ) {
        let e: Vec<usize> = est.iter().copied().collect();
        let t: Vec<usize> = tru.iter().copied().collect();
        let m = support_metrics(&e, &t, 40).unwrap();
        prop_assert_eq!(m.exact, m.symdiff == 0);
        prop_assert!((0.0..=1.0).contains(&m.fraction));
        prop_assert_eq!(m.symdiff, est.symmetric_difference(&tru).count());
        if !t.is_empty() {
            prop_assert!((m.fraction + m.false_neg as f64 / t.len() as f64 - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn blocks_partition_the_thresholded_matrix(seed in any::<u64>(), k1 in 1usize..6, k2 in 1usize..6, tau in 0.0f64..3.0) {
        let mut rng = Rng::new(seed);
        let model = ModelParams::disjoint(30, &[3.0, 1.5], &[k1, k2], SpikeKind::UniformMagnitude, 1.0, &mut rng).unwrap();
        let d = sample_dataset(&model, 25, seed);
        let sigma = gram_centered(d.first_half(), true, 1.0).unwrap();
        let level = tau / 5.0;
        let eta = soft_threshold_matrix(&sigma, level, false).to_dense();
        let b = decompose(&sigma, level, &model).unwrap();
        let parts = [b.s.to_dense(), b.n.to_dense(), b.r1.to_dense(), b.r2.to_dense()];
        for i in 0..30 {
            for j in 0..30 {
                let nonzero = parts.iter().filter(|m| m.get(i, j) != 0.0).count();
                prop_assert!(nonzero <= 1);
                let sum: f64 = parts.iter().map(|m| m.get(i, j)).sum();
                prop_assert_eq!(sum, eta.get(i, j));
            }
        }
    }
}
