//! Dense complex linear algebra shared by the pipeline modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance below which an input counts as Hermitian and is symmetrized.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Slack on the operator-norm promise of a stored block.
pub const NORM_SLACK: f64 = 1e-9;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}

pub fn vec_from_real(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| c(x)))
}

pub fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = c(v);
    }
    m
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entry of `m - m†`.
pub fn asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Returns the Hermitian part when `m` is Hermitian up to [`HERMITIAN_TOL`].
pub fn hermitize(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let a = asymmetry(m);
    if a > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry: a });
    }
    Ok((m + m.adjoint()).scale(0.5))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let h = hermitize(m)?;
    let n = h.nrows();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// Eigenvalues closer than this are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-12;

/// Replaces each run of near-equal eigenvalues by its mean.
fn merge_clusters(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] < CLUSTER_TOL {
            end += 1;
        }
        if end - start > 1 {
            let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
            out[start..end].iter_mut().for_each(|v| *v = mean);
        }
        start = end;
    }
    out
}

/// `V f(Λ) V†` for Hermitian `m`.
pub fn hermitian_fn<F>(m: &CMatrix, f: F) -> Result<CMatrix>
where
    F: Fn(f64) -> C64,
{
    let (values, vectors) = eigh(m)?;
    let merged = merge_clusters(&values);
    Ok(spectral_sum(&merged, &vectors, f))
}

pub fn spectral_sum<F>(values: &[f64], vectors: &CMatrix, f: F) -> CMatrix
where
    F: Fn(f64) -> C64,
{
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let fv = f(v);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= fv);
    }
    scaled * vectors.adjoint()
}

/// Square root of a positive semidefinite matrix, clamping round-off negatives.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    hermitian_fn(m, |x| c(x.max(0.0).sqrt()))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Natural logarithm floored at one, used for every asymptotic log factor.
pub fn lg(x: f64) -> f64 {
    x.max(std::f64::consts::E).ln()
}

pub fn normalize(v: &CVector) -> Result<CVector> {
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.unscale(n))
}

/// `|⟨a, b⟩|` for unit vectors.
pub fn fidelity(a: &CVector, b: &CVector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    // clamp the rounding excess so fidelities stay in [0, 1]
    (a.dotc(b).norm() / (na * nb)).min(1.0)
}

/// `‖a e^{iθ} - b‖` minimized over the phase, for unit vectors.
pub fn aligned_distance(a: &CVector, b: &CVector) -> f64 {
    (2.0 - 2.0 * fidelity(a, b)).max(0.0).sqrt()
}

pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    for (k, z) in m.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite entry at ({}, {})",
                k % m.nrows(),
                k / m.nrows()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), c(2.0)],
        );
        let (vals, vecs) = eigh(&m).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let back = spectral_sum(&vals, &vecs, c);
        assert!(max_abs_diff(&back, &m) < 1e-12);
    }

    #[test]
    fn hermitize_rejects_asymmetric() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(hermitize(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn lg_is_floored() {
        assert_eq!(lg(1.0), 1.0);
        assert!((lg(100.0) - 100f64.ln()).abs() < 1e-15);
    }
}
