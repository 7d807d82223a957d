//! Seeded instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix, CVector, C64};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut Rng64) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn real_gaussian(rng: &mut Rng64) -> f64 {
    rng.sample(StandardNormal)
}

pub fn unit_vector(n: usize, rng: &mut Rng64) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| gaussian(rng));
        if let Ok(u) = linalg::normalize(&v) {
            return u;
        }
    }
}

pub fn real_unit_vector(n: usize, rng: &mut Rng64) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| C64::new(real_gaussian(rng), 0.0));
        if let Ok(u) = linalg::normalize(&v) {
            return u;
        }
    }
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-like unitary from Gram-Schmidt on a Gaussian matrix.
pub fn unitary(n: usize, rng: &mut Rng64) -> CMatrix {
    let g = gaussian_matrix(n, n, rng);
    let mut q = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut w = g.column(j).into_owned();
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i).into_owned();
                let h = qi.dotc(&w);
                w -= qi * h;
            }
        }
        let norm = w.norm();
        q.set_column(j, &w.unscale(norm));
    }
    q
}

/// `U diag(values) U†` with a random unitary `U`.
pub fn with_spectrum(values: &[f64], rng: &mut Rng64) -> CMatrix {
    let u = unitary(values.len(), rng);
    let d = linalg::diag(values);
    let m = &u * d * u.adjoint();
    (&m + m.adjoint()).scale(0.5)
}

/// Hermitian matrix with spectrum drawn uniformly from `[lo, hi]`.
pub fn hermitian_in(n: usize, lo: f64, hi: f64, rng: &mut Rng64) -> CMatrix {
    let vals: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    with_spectrum(&vals, rng)
}

/// PSD matrix with top eigenvalue in `[0.5, 1]`, gaps at least `gap` among the top `r + 1`.
pub fn gapped_psd(n: usize, gap: f64, r: usize, rng: &mut Rng64) -> (CMatrix, Vec<f64>) {
    let top: f64 = rng.random_range(0.5..=1.0);
    let mut vals = Vec::with_capacity(n);
    let mut cur = top;
    for _ in 0..r.min(n) {
        vals.push(cur);
        cur -= gap * rng.random_range(1.0..1.5);
    }
    let floor = cur.max(0.0);
    while vals.len() < n {
        vals.push(rng.random_range(0.0..=floor));
    }
    (with_spectrum(&vals, rng), vals)
}
