mod common;

use common::jacobi::{reference_eigen, spectral_norm_reference};
use covthresh_core::linalg::*;
use covthresh_core::rng::Rng;
use proptest::prelude::*;

fn random_symmetric(n: usize, rng: &mut Rng) -> DenseSymmetric {
    DenseSymmetric::from_fn(n, |_, _| rng.gaussian())
}

#[test]
fn gram_of_square_noise_sits_at_the_spectral_edge() {
    // For n = p the spectrum of G - I fills [-1, 3] (edge 2√α + α with α = 1).
    let mut rng = Rng::new(500);
    let x = Matrix::from_fn(500, 500, |_, _| rng.gaussian());
    let g = gram_centered(x.view(), true, 1.0).unwrap();
    let oracle = spectral_norm_reference(g.as_slice(), 500);
    let alpha: f64 = 1.0;
    let edge = 2.0 * alpha.sqrt() + alpha;
    assert!((oracle - edge).abs() <= 0.3, "oracle norm {oracle}");
    let ours = spectral_norm(&g, 1e-9).unwrap();
    assert!((ours - oracle).abs() <= 1e-8 * oracle.max(1.0));
}

#[test]
fn top_three_of_random_50_match_reference() {
    let mut rng = Rng::new(50);
    let m = random_symmetric(50, &mut rng);
    let oracle = reference_eigen(m.as_slice(), 50);
    for solver in [Solver::Auto, Solver::Lanczos, Solver::Dense] {
        let pairs = top_r_eigenpairs(&m, 3, &EigenOptions::default().with_solver(solver)).unwrap();
        for (e, (val, vec)) in pairs.iter().zip(&oracle) {
            assert!((e.value - val).abs() <= 1e-8, "{solver:?}: {} vs {val}", e.value);
            let ip: f64 = e.vector.iter().zip(vec).map(|(a, b)| a * b).sum();
            assert!(ip.abs() >= 1.0 - 1e-6);
            assert!(e.residual <= 1e-9);
        }
        for a in 0..3 {
            for b in (a + 1)..3 {
                let ip: f64 = pairs[a].vector.iter().zip(&pairs[b].vector).map(|(x, y)| x * y).sum();
                assert!(ip.abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn spectral_norm_of_goe_matches_reference() {
    let mut rng = Rng::new(100);
    let m = DenseSymmetric::from_fn(100, |i, j| {
        let z = rng.gaussian();
        if i == j {
            z * 2f64.sqrt()
        } else {
            z
        }
    })
    .scaled(1.0 / 10.0);
    let oracle = spectral_norm_reference(m.as_slice(), 100);
    let tol = 1e-9;
    let ours = spectral_norm(&m, tol).unwrap();
    assert!((ours - oracle).abs() <= 10.0 * tol, "{ours} vs {oracle}");
}

#[test]
fn lanczos_on_large_thresholded_matrix_matches_dense() {
    let mut rng = Rng::new(7);
    let x = Matrix::from_fn(300, 400, |_, _| rng.gaussian());
    let g = gram_centered(x.view(), true, 1.0).unwrap();
    let eta = soft_threshold_matrix(&g, 2.5 / 300f64.sqrt(), false);
    let lz = top_r_eigenpairs(&eta, 4, &EigenOptions::default().with_solver(Solver::Lanczos)).unwrap();
    let dn = top_r_eigenpairs(&eta, 4, &EigenOptions::default().with_solver(Solver::Dense)).unwrap();
    for (a, b) in lz.iter().zip(&dn) {
        assert!((a.value - b.value).abs() <= 1e-8);
    }
}

#[test]
fn mad_of_gaussian_sample_recovers_sigma() {
    let mut rng = Rng::new(61);
    let sigma = 2.5;
    let draws: Vec<f64> = (0..1_000_000).map(|_| sigma * rng.gaussian()).collect();
    let est = mad(&draws).unwrap() / GAUSSIAN_MAD_SCALE;
    assert!((est / sigma - 1.0).abs() < 0.01);
    assert_eq!(mad(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
    assert_eq!(mad(&[]), Err(covthresh_core::Error::EmptyInput));
}

fn finite() -> impl Strategy<Value = f64> {
    -1e6f64..1e6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn soft_threshold_is_odd_lipschitz_shrinking(z in finite(), w in finite(), t in 0.0f64..1e3) {
        let a = soft_threshold(z, t);
        prop_assert_eq!(soft_threshold(-z, t), -a);
        prop_assert!(a.abs() <= z.abs());
        prop_assert!((a - soft_threshold(w, t)).abs() <= (z - w).abs() * (1.0 + 1e-15) + 1e-9);
        prop_assert_eq!(soft_threshold(z, 0.0), z);
    }

    #[test]
    fn soft_threshold_scales(z in finite(), t in 0.0f64..1e3, k in -20i32..20) {
        // powers of two keep the scaling exact in floating point
        let c = 2f64.powi(k);
        prop_assert_eq!(soft_threshold(c * z, c * t), c * soft_threshold(z, t));
    }

    #[test]
    fn sparse_threshold_matches_dense(seed in any::<u64>(), n in 1usize..30, level in 0.0f64..2.0) {
        let mut rng = Rng::new(seed);
        let m = random_symmetric(n, &mut rng);
        let s = soft_threshold_matrix(&m, level, false);
        let d = s.to_dense();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(d.get(i, j), soft_threshold(m.get(i, j), level));
                prop_assert_eq!(d.get(i, j), d.get(j, i));
            }
        }
        let y: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        s.matvec(&y, &mut a);
        d.matvec(&y, &mut b);
        let scale = b.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-12 * scale);
        }
        let explicit = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| d.get(i, j) != 0.0).count();
        prop_assert_eq!(s.nnz(), explicit);
    }

    #[test]
    fn gram_is_positive_semidefinite(seed in any::<u64>(), rows in 1usize..20, cols in 1usize..25) {
        let mut rng = Rng::new(seed);
        let x = Matrix::from_fn(rows, cols, |_, _| rng.gaussian());
        let g = gram_centered(x.view(), false, 0.0).unwrap();
        let smallest = reference_eigen(g.as_slice(), cols).last().unwrap().0;
        prop_assert!(smallest >= -1e-9);
    }

    #[test]
    fn eigenpairs_match_reference(seed in any::<u64>(), n in 3usize..60, sparse in any::<bool>()) {
        let mut rng = Rng::new(seed);
        let mut m = random_symmetric(n, &mut rng);
        if sparse {
            m = soft_threshold_matrix(&m, 1.0, false).to_dense();
        }
        let oracle = reference_eigen(m.as_slice(), n);
        let tol = 1e-9;
        let pairs = top_r_eigenpairs(&m, 3, &EigenOptions::default().with_solver(Solver::Lanczos)).unwrap();
        let mut mv = vec![0.0; n];
        for (e, (val, _)) in pairs.iter().zip(&oracle) {
            m.matvec(&e.vector, &mut mv);
            let rq: f64 = e.vector.iter().zip(&mv).map(|(a, b)| a * b).sum();
            prop_assert!((rq - e.value).abs() <= tol);
            prop_assert!((e.value - val).abs() <= tol);
        }
    }

    #[test]
    fn spectral_norm_bounds_rayleigh_quotients(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = Rng::new(seed);
        let m = random_symmetric(n, &mut rng);
        let norm = spectral_norm(&m, 1e-9).unwrap();
        let mut my = vec![0.0; n];
        for _ in 0..10 {
            let mut y: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            y.iter_mut().for_each(|v| *v /= ny);
            m.matvec(&y, &mut my);
            let rq: f64 = y.iter().zip(&my).map(|(a, b)| a * b).sum();
            prop_assert!(norm + 1e-9 >= rq.abs());
        }
    }
}
