//! Pointwise r×r complex matrix kernels on row-major slices.
//!
//! Fields store one matrix per grid point back to back, so these helpers
//! operate on `&[Complex64]` windows of length `r*r` rather than on owned
//! matrix types. Factorizations defer to `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(r: usize) -> Vec<C64> {
    let mut m = vec![ZERO; r * r];
    for i in 0..r {
        m[i * r + i] = ONE;
    }
    m
}

/// `out += scale * a * b`.
#[inline]
pub fn mul_acc(a: &[C64], b: &[C64], out: &mut [C64], r: usize, scale: C64) {
    for i in 0..r {
        for k in 0..r {
            let aik = a[i * r + k] * scale;
            if aik == ZERO {
                continue;
            }
            for j in 0..r {
                out[i * r + j] += aik * b[k * r + j];
            }
        }
    }
}

pub fn mul(a: &[C64], b: &[C64], r: usize) -> Vec<C64> {
    let mut out = vec![ZERO; r * r];
    mul_acc(a, b, &mut out, r, ONE);
    out
}

pub fn mul_vec(a: &[C64], x: &[C64], r: usize) -> Vec<C64> {
    (0..r).map(|i| (0..r).map(|k| a[i * r + k] * x[k]).sum()).collect()
}

pub fn mul3(a: &[C64], b: &[C64], c: &[C64], r: usize) -> Vec<C64> {
    mul(&mul(a, b, r), c, r)
}

pub fn conj_transpose(a: &[C64], r: usize) -> Vec<C64> {
    let mut out = vec![ZERO; r * r];
    for i in 0..r {
        for j in 0..r {
            out[j * r + i] = a[i * r + j].conj();
        }
    }
    out
}

/// Adjoint of `m` with respect to `h(s, s') = s'^† H s`: `H⁻¹ m^† H`.
pub fn h_adjoint(m: &[C64], h: &[C64], h_inv: &[C64], r: usize) -> Vec<C64> {
    mul3(h_inv, &conj_transpose(m, r), h, r)
}

pub fn trace(a: &[C64], r: usize) -> C64 {
    (0..r).map(|i| a[i * r + i]).sum()
}

pub fn commutator(a: &[C64], b: &[C64], r: usize) -> Vec<C64> {
    let mut out = mul(a, b, r);
    mul_acc(b, a, &mut out, r, -ONE);
    out
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Frobenius distance from Hermitian: `max |a - a^†|`.
pub fn hermitian_defect(a: &[C64], r: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in 0..r {
            worst = worst.max((a[i * r + j] - a[j * r + i].conj()).norm());
        }
    }
    worst
}

pub fn to_dmatrix(a: &[C64], r: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(r, r, a)
}

pub fn from_dmatrix(m: &DMatrix<C64>) -> Vec<C64> {
    let r = m.nrows();
    let mut out = vec![ZERO; r * r];
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = m[(i, j)];
        }
    }
    out
}

pub fn inverse(a: &[C64], r: usize) -> Option<Vec<C64>> {
    match r {
        1 => {
            if a[0].norm() == 0.0 {
                None
            } else {
                Some(vec![a[0].inv()])
            }
        }
        2 => {
            let det = a[0] * a[3] - a[1] * a[2];
            if det.norm() == 0.0 || !det.is_finite() {
                return None;
            }
            let d = det.inv();
            Some(vec![a[3] * d, -a[1] * d, -a[2] * d, a[0] * d])
        }
        _ => to_dmatrix(a, r).try_inverse().map(|m| from_dmatrix(&m)),
    }
}

pub fn determinant(a: &[C64], r: usize) -> C64 {
    match r {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        _ => to_dmatrix(a, r).determinant(),
    }
}

/// Eigenvalues (ascending) and row-major eigenvector matrix (columns are
/// eigenvectors) of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &[C64], r: usize) -> (Vec<f64>, Vec<C64>) {
    let m = to_dmatrix(a, r);
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = vec![ZERO; r * r];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..r {
            vectors[row * r + col] = eig.eigenvectors[(row, src)];
        }
    }
    (values, vectors)
}

pub fn min_hermitian_eigenvalue(a: &[C64], r: usize) -> f64 {
    if r == 1 {
        return a[0].re;
    }
    hermitian_eigen(a, r).0[0]
}

/// Lower Cholesky factor of a Hermitian positive-definite matrix.
pub fn cholesky(a: &[C64], r: usize) -> Option<Vec<C64>> {
    let m = to_dmatrix(a, r);
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    herm.cholesky().map(|c| from_dmatrix(&c.l()))
}

/// `f(S)` for Hermitian `S`, through its spectral decomposition.
pub fn hermitian_function(s: &[C64], r: usize, f: impl Fn(f64) -> f64) -> Vec<C64> {
    if r == 1 {
        return vec![C64::new(f(s[0].re), 0.0)];
    }
    let (values, vectors) = hermitian_eigen(s, r);
    let mut out = vec![ZERO; r * r];
    for (k, &lambda) in values.iter().enumerate() {
        let fk = f(lambda);
        for i in 0..r {
            for j in 0..r {
                out[i * r + j] += vectors[i * r + k] * fk * vectors[j * r + k].conj();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(r: usize, seed: u64) -> Vec<C64> {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..r * r)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                C64::new(a, b)
            })
            .collect()
    }

    #[test]
    fn inverse_small_and_general() {
        for r in 1..=3 {
            let mut a = sample(r, 7 + r as u64);
            for i in 0..r {
                a[i * r + i] += C64::new(2.0, 0.0);
            }
            let inv = inverse(&a, r).unwrap();
            let prod = mul(&a, &inv, r);
            let id = identity(r);
            for (x, y) in prod.iter().zip(&id) {
                assert!((x - y).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn h_adjoint_pairing() {
        // h(M* s, s') = h(s, M s') with h(s, s') = s'^† H s.
        let r = 2;
        let b = sample(r, 3);
        let mut h = mul(&conj_transpose(&b, r), &b, r);
        h[0] += ONE;
        h[3] += ONE;
        let h_inv = inverse(&h, r).unwrap();
        let m = sample(r, 11);
        let m_star = h_adjoint(&m, &h, &h_inv, r);
        let s = [C64::new(0.3, -1.0), C64::new(0.7, 0.2)];
        let sp = [C64::new(-0.4, 0.5), C64::new(1.1, 0.9)];
        let pair = |x: &[C64], y: &[C64]| -> C64 {
            let mut acc = ZERO;
            for i in 0..r {
                for j in 0..r {
                    acc += y[i].conj() * h[i * r + j] * x[j];
                }
            }
            acc
        };
        let apply = |m: &[C64], v: &[C64]| -> Vec<C64> {
            (0..r).map(|i| (0..r).map(|j| m[i * r + j] * v[j]).sum()).collect()
        };
        let lhs = pair(&apply(&m_star, &s), &sp);
        let rhs = pair(&s, &apply(&m, &sp));
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn hermitian_exp_log_roundtrip() {
        let r = 2;
        let b = sample(r, 5);
        let s: Vec<C64> = {
            let bt = conj_transpose(&b, r);
            b.iter().zip(&bt).map(|(x, y)| (x + y) * 0.5).collect()
        };
        let e = hermitian_function(&s, r, f64::exp);
        let back = hermitian_function(&e, r, f64::ln);
        for (x, y) in s.iter().zip(&back) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn cholesky_reconstructs() {
        let r = 3;
        let b = sample(r, 9);
        let mut h = mul(&conj_transpose(&b, r), &b, r);
        for i in 0..r {
            h[i * r + i] += ONE;
        }
        let l = cholesky(&h, r).unwrap();
        let back = mul(&l, &conj_transpose(&l, r), r);
        for (x, y) in h.iter().zip(&back) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
