//! The two dense factorizations this crate needs: a Cholesky-based
//! positivity test and a cyclic Jacobi eigensolver for Hermitian matrices.
//! Both are deterministic — same input bits, same output bits — which the
//! reproducibility guarantees elsewhere rely on.

use crate::tensor::{C64, CMatrix};

/// True when every eigenvalue of the Hermitian matrix `m` exceeds `-floor`.
///
/// Checked by attempting a Cholesky factorization of `m + floor*I`, which
/// succeeds exactly when that shifted matrix is positive definite. No
/// eigenvalues are ever computed.
pub fn psd_within(m: &CMatrix, floor: f64) -> bool {
    let n = m.dim();
    // lower-triangular factor, built in place
    let mut l = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = m.get(j, j).re + floor;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let pivot = d.sqrt();
        l[j * n + j] = C64::new(pivot, 0.0);
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / pivot;
        }
    }
    true
}

/// Eigenvalues (ascending) and eigenvectors (matching columns of the
/// returned matrix) of a Hermitian matrix, via cyclic Jacobi rotations.
///
/// Deterministic tie-breaking: equal eigenvalues keep their rotation order,
/// and each column is phased so its first non-negligible component is real
/// and positive.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.dim();
    // Symmetrize so accumulated error cannot push us off the Hermitian
    // manifold mid-iteration.
    let mut a = CMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            let v = (m.get(r, c) + m.get(c, r).conj()) * C64::new(0.5, 0.0);
            a.set(r, c, v);
        }
    }
    let mut v = CMatrix::identity(n);
    let fro: f64 = a
        .data()
        .iter()
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let rotate_tol = 1e-16 * fro;
    let done_tol = 1e-14 * fro;

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q).norm_sqr();
            }
        }
        if off.sqrt() <= done_tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a.get(p, q);
                let zmod = z.norm();
                if zmod <= rotate_tol {
                    continue;
                }
                let phase = z / zmod;
                let alpha = a.get(p, p).re;
                let beta = a.get(q, q).re;
                let tau = (beta - alpha) / (2.0 * zmod);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (tau * tau + 1.0).sqrt())
                } else {
                    -1.0 / (-tau + (tau * tau + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rotation U with U[p][p]=c, U[p][q]=s*e^{i theta},
                // U[q][p]=-s*e^{-i theta}, U[q][q]=c zeroes a[p][q]
                let cp = C64::new(c, 0.0);
                let se_m = phase.conj() * s;
                let se_p = phase * s;
                // columns: A <- A*U, V <- V*U
                for r in 0..n {
                    let arp = a.get(r, p);
                    let arq = a.get(r, q);
                    a.set(r, p, arp * cp - arq * se_m);
                    a.set(r, q, arp * se_p + arq * cp);
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, vrp * cp - vrq * se_m);
                    v.set(r, q, vrp * se_p + vrq * cp);
                }
                // rows: A <- U^dag * A
                for col in 0..n {
                    let apc = a.get(p, col);
                    let aqc = a.get(q, col);
                    a.set(p, col, apc * cp - aqc * se_p);
                    a.set(q, col, apc * se_m + aqc * cp);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .re
            .partial_cmp(&a.get(j, j).re)
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = CMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        let mut column: Vec<C64> = (0..n).map(|r| v.get(r, old_col)).collect();
        if let Some(lead) = column.iter().find(|x| x.norm() > 1e-12) {
            let fix = lead.conj() / lead.norm();
            for x in &mut column {
                *x *= fix;
            }
        }
        for (r, &x) in column.iter().enumerate() {
            vectors.set(r, new_col, x);
        }
    }
    (eigenvalues, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian(dim: usize, seed: u64) -> CMatrix {
        let mut rng = rng::seeded(seed);
        let g = rng::complex_gaussians(&mut rng, dim * dim);
        let mut m = CMatrix::zeros(dim);
        for r in 0..dim {
            for col in 0..dim {
                let x = g[r * dim + col];
                let y = g[col * dim + r];
                m.set(r, col, (x + y.conj()) * c(0.5, 0.0));
            }
        }
        m
    }

    #[test]
    fn pauli_x_eigensystem() {
        let x = CMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let (vals, vecs) = hermitian_eigen(&x);
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-13);
        // |-> and |+>, leading component phased real positive
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(vecs.get(0, 0).re, s, epsilon = 1e-13);
        assert_abs_diff_eq!(vecs.get(1, 0).re, -s, epsilon = 1e-13);
        assert_abs_diff_eq!(vecs.get(0, 1).re, s, epsilon = 1e-13);
        assert_abs_diff_eq!(vecs.get(1, 1).re, s, epsilon = 1e-13);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        for seed in 0..4u64 {
            let m = random_hermitian(7, seed);
            let (vals, vecs) = hermitian_eigen(&m);
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            // unitarity
            let gram = vecs.adjoint().mul_mat(&vecs);
            assert!(gram.max_abs_diff(&CMatrix::identity(7)) < 1e-11);
            // V diag(vals) V^dag == m
            let mut lambda = CMatrix::zeros(7);
            for (i, &l) in vals.iter().enumerate() {
                lambda.set(i, i, c(l, 0.0));
            }
            let rebuilt = vecs.mul_mat(&lambda).mul_mat(&vecs.adjoint());
            assert!(rebuilt.max_abs_diff(&m) < 1e-11 * (1.0 + vals[6].abs()));
        }
    }

    #[test]
    fn eigen_is_bitwise_deterministic() {
        let m = random_hermitian(6, 42);
        let (va, ma) = hermitian_eigen(&m);
        let (vb, mb) = hermitian_eigen(&m);
        assert_eq!(va, vb);
        assert_eq!(ma, mb);
    }

    #[test]
    fn cholesky_positivity_boundary() {
        // gram matrix: PSD by construction
        let g = random_hermitian(5, 9);
        let psd = g.mul_mat(&g.adjoint());
        assert!(psd_within(&psd, 1e-9));

        let mut indefinite = CMatrix::identity(3);
        indefinite.set(2, 2, c(-0.5, 0.0));
        assert!(!psd_within(&indefinite, 1e-9));
        // ...but a large enough shift admits it
        assert!(psd_within(&indefinite, 0.6));

        // exactly singular PSD passes under the shift
        let mut singular = CMatrix::zeros(2);
        singular.set(0, 0, c(1.0, 0.0));
        assert!(psd_within(&singular, 1e-9));
    }
}
