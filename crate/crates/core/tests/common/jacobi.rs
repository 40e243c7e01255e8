// Reference symmetric eigensolver for tests: row-cyclic Jacobi with the
// rotation angle from atan2. Kept simple; only the rows p, q are rotated and
// the columns restored by symmetry.

/// Eigenvalues (descending) and matching eigenvectors of the row-major
/// symmetric `a` (`n × n`).
pub fn reference_eigen(a: &[f64], n: usize) -> Vec<(f64, Vec<f64>)> {
    let mut m = a.to_vec();
    // eigenvectors are the rows of vt
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * m[i * n + j] * m[i * n + j])
            .sum();
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[p * n + p], m[q * n + q]);
                let phi = 0.5 * (2.0 * apq).atan2(aqq - app);
                let (s, c) = phi.sin_cos();
                rotate_rows(&mut m, n, p, q, c, s);
                for k in 0..n {
                    if k != p && k != q {
                        m[k * n + p] = m[p * n + k];
                        m[k * n + q] = m[q * n + k];
                    }
                }
                m[p * n + p] = c * c * app - 2.0 * c * s * apq + s * s * aqq;
                m[q * n + q] = s * s * app + 2.0 * c * s * apq + c * c * aqq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                rotate_rows(&mut vt, n, p, q, c, s);
            }
        }
    }
    let mut out: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| (m[j * n + j], vt[j * n..(j + 1) * n].to_vec()))
        .collect();
    out.sort_by(|x, y| y.0.total_cmp(&x.0));
    out
}

fn rotate_rows(m: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = m.split_at_mut(q * n);
    let rp = &mut head[p * n..(p + 1) * n];
    let rq = &mut tail[..n];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

pub fn spectral_norm_reference(a: &[f64], n: usize) -> f64 {
    reference_eigen(a, n).iter().map(|e| e.0.abs()).fold(0.0, f64::max)
}
