//! Dense complex linear algebra helpers, including a cyclic Jacobi
//! eigensolver for Hermitian matrices.

use ndarray::Array2;
use num_complex::Complex64;

pub type CMat = Array2<Complex64>;

pub fn trace(a: &CMat) -> Complex64 {
    a.diag().sum()
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn rehermitize(a: &CMat) -> CMat {
    (a + &dagger(a)).mapv(|z| z * 0.5)
}

/// Largest elementwise |a_ij - conj(a_ji)|.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

pub fn frobenius_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

/// Eigenvalues (ascending) and eigenvectors (as columns) of a Hermitian
/// matrix, by cyclic Jacobi rotations.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let (vals, vecs) = jacobi(a, true);
    (vals, vecs.expect("vectors requested"))
}

/// Eigenvalues only (ascending).
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    jacobi(a, false).0
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigenvalues(a)[0]
}

fn jacobi(a: &CMat, want_vectors: bool) -> (Vec<f64>, Option<CMat>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix required");
    let mut m: Vec<Complex64> = a.iter().copied().collect();
    let mut v: Vec<Complex64> = if want_vectors {
        let mut id = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            id[i * n + i] = Complex64::new(1.0, 0.0);
        }
        id
    } else {
        Vec::new()
    };
    let scale = frobenius_norm(a).max(1e-300);
    let tol = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r <= tol / (n as f64) {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let phase = apq / r; // e^{i beta}
                let theta = 0.5 * (2.0 * r).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                // U restricted to the (p, q) plane:
                //   [ c          -s        ]
                //   [ s e^{-ib}   c e^{-ib} ]
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(-s, 0.0);
                let uqp = phase.conj() * s;
                let uqq = phase.conj() * c;
                // columns: B = M U
                for i in 0..n {
                    let mip = m[i * n + p];
                    let miq = m[i * n + q];
                    m[i * n + p] = mip * upp + miq * uqp;
                    m[i * n + q] = mip * upq + miq * uqq;
                }
                // rows: M' = U^dagger B
                for j in 0..n {
                    let mpj = m[p * n + j];
                    let mqj = m[q * n + j];
                    m[p * n + j] = upp.conj() * mpj + uqp.conj() * mqj;
                    m[q * n + j] = upq.conj() * mpj + uqq.conj() * mqj;
                }
                m[p * n + q] = Complex64::new(0.0, 0.0);
                m[q * n + p] = Complex64::new(0.0, 0.0);
                if want_vectors {
                    for i in 0..n {
                        let vip = v[i * n + p];
                        let viq = v[i * n + q];
                        v[i * n + p] = vip * upp + viq * uqp;
                        v[i * n + q] = vip * upq + viq * uqq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vecs = want_vectors.then(|| {
        let mut out = Array2::zeros((n, n));
        for (col, &src) in order.iter().enumerate() {
            for i in 0..n {
                out[(i, col)] = v[i * n + src];
            }
        }
        out
    });
    (vals, vecs)
}

/// A random dense Hermitian matrix with entries of order one.
pub fn random_hermitian<R: rand::Rng>(dim: usize, rng: &mut R) -> CMat {
    let mut a: CMat = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            a[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    rehermitize(&a)
}
