//! Dense complex linear algebra shared by the single-particle layer and the
//! small-dimension Fock-space oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Largest entry of `|m - m†|`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Operator 2-norm (largest singular value).
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Delegates to faer; nalgebra's `SymmetricEigen` loses accuracy on
/// Hermitian blocks of a few dozen rows with clustered spectra.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let a = faer::Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("self-adjoint eigensolver converges on finite input");
    let s = eig.S().column_vector();
    let u = eig.U();
    let values = (0..n).map(|k| s[k].re).collect();
    (values, CMat::from_fn(n, n, |i, j| u[(i, j)]))
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn eigh_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("self-adjoint eigensolver converges on finite input");
    let s = eig.S().column_vector();
    let u = eig.U();
    let values = (0..n).map(|k| s[k]).collect();
    (values, DMatrix::from_fn(n, n, |i, j| u[(i, j)]))
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).0
}

/// `exp(-i h t)` for Hermitian `h`, through its eigenbasis.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let (values, vectors) = eigh(h);
    let mut scaled = vectors.clone();
    for (k, &e) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -e * t);
        for r in 0..scaled.nrows() {
            scaled[(r, k)] *= phase;
        }
    }
    &scaled * vectors.adjoint()
}

/// Rotate `v` so its first non-negligible component is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    if let Some(first) = v.iter().copied().find(|z| z.norm() > 1e-14) {
        let rot = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_pauli_x_is_rotation() {
        let u = expm_hermitian(&sigma_x(), 0.3);
        let want = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(0.3f64.cos(), 0.0),
                C64::new(0.0, -(0.3f64.sin())),
                C64::new(0.0, -(0.3f64.sin())),
                C64::new(0.3f64.cos(), 0.0),
            ],
        );
        assert!(max_abs(&(u - want)) < 1e-14);
    }

    #[test]
    fn kron_dimensions_and_entries() {
        let k = kron(&sigma_x(), &sigma_z());
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(0, 2)], ONE);
        assert_eq!(k[(1, 3)], -ONE);
        assert_eq!(k[(0, 0)], ZERO);
    }

    #[test]
    fn phase_fix_makes_leading_entry_positive() {
        let mut v = vec![ZERO, C64::new(0.0, -2.0), C64::new(1.0, 1.0)];
        fix_phase(&mut v);
        assert!(v[1].im.abs() < 1e-15 && v[1].re > 0.0);
        assert!((v[2].norm() - 2f64.sqrt()).abs() < 1e-15);
    }
}
