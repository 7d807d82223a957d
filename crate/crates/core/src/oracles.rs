//! Classical reference computations.
//!
//! These routines share no code path with the pipeline modules: eigenpairs
//! come from a cyclic complex Jacobi sweep, least squares from twice-iterated
//! Gram-Schmidt, linear solves from partially pivoted LU. Pipelines reach them
//! only through [`OracleAccess`], which records every read.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};

const ASYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

fn check_hermitian(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    if worst > ASYMMETRY_TOL {
        return Err(Error::NotHermitian { asymmetry: worst });
    }
    Ok(())
}

fn off_diagonal(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues ascending with orthonormal eigenvectors as columns.
pub fn eig_hermitian(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(a)?;
    let n = a.nrows();
    let mut m = a.clone();
    for i in 0..n {
        for j in 0..i {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
    }
    let mut v = CMatrix::identity(n, n);
    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tol = 1e-15 * scale.max(f64::MIN_POSITIVE) * (n as f64).sqrt();
    let mut off = off_diagonal(&m);
    let mut sweeps = 0;
    while off > tol {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::Convergence("Jacobi sweeps exhausted".into()));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        let next = off_diagonal(&m);
        // round-off floor reached
        if next > 0.5 * off && next < 1e-12 * scale {
            break;
        }
        off = next;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[(x, x)].re.total_cmp(&m[(y, y)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok((values, vectors))
}

fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let phase = apq / r; // e^{iφ}
    let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    let pc = phase.conj(); // e^{-iφ}
    let n = m.nrows();
    // columns: A <- A G
    for k in 0..n {
        let ap = m[(k, p)];
        let aq = m[(k, q)];
        m[(k, p)] = ap * cs - aq * pc * sn;
        m[(k, q)] = ap * sn + aq * pc * cs;
    }
    // rows: A <- G† A
    for k in 0..n {
        let ap = m[(p, k)];
        let aq = m[(q, k)];
        m[(p, k)] = ap * cs - aq * phase * sn;
        m[(q, k)] = ap * sn + aq * phase * cs;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
    for k in 0..n {
        let vp = v[(k, p)];
        let vq = v[(k, q)];
        v[(k, p)] = vp * cs - vq * pc * sn;
        v[(k, q)] = vp * sn + vq * pc * cs;
    }
}

/// `exp(-i A t)` through the eigen-decomposition.
pub fn expm_hermitian(a: &CMatrix, t: f64) -> Result<CMatrix> {
    let (vals, vecs) = eig_hermitian(a)?;
    let mut scaled = vecs.clone();
    for (k, &l) in vals.iter().enumerate() {
        let f = C64::new(0.0, -l * t).exp();
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= f);
    }
    Ok(scaled * vecs.adjoint())
}

/// `exp(m)` by scaling and squaring a truncated Taylor series.
pub fn expm_taylor(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm: f64 = m.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) > 0.5 {
        squarings += 1;
    }
    let a = m.unscale(2f64.powi(squarings as i32));
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &a / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let n = a.nrows();
    if !a.is_square() || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve with {}x{} matrix and length-{} rhs",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = lu.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if mag <= 1e-14 * scale {
            return Err(Error::Singular { smallest: mag });
        }
        if piv != k {
            lu.swap_rows(piv, k);
            x.swap_rows(piv, k);
        }
        let d = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / d;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in (k + 1)..n {
            s -= lu[(k, j)] * x[j];
        }
        x[k] = s / lu[(k, k)];
    }
    Ok(x)
}

/// Minimizer of `‖F x - y‖` for full-column-rank `F`.
pub fn solve_least_squares(f: &CMatrix, y: &CVector) -> Result<CVector> {
    let (m, n) = f.shape();
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "least squares with {m} rows and length-{} rhs",
            y.len()
        )));
    }
    if n > m {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let mut q = CMatrix::zeros(m, n);
    let mut r = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut w = f.column(j).into_owned();
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let h = qi.dotc(&w);
                r[(i, j)] += h;
                w -= qi * h;
            }
        }
        let norm = w.norm();
        r[(j, j)] = C64::new(norm, 0.0);
        let lead = r[(0, 0)].re.max(norm);
        if norm <= 1e-12 * lead || norm == 0.0 {
            return Err(Error::RankDeficient {
                condition: lead / norm,
            });
        }
        q.set_column(j, &w.unscale(norm));
    }
    let qty = q.adjoint() * y;
    let mut x = CVector::zeros(n);
    for k in (0..n).rev() {
        let mut s = qty[k];
        for j in (k + 1)..n {
            s -= r[(k, j)] * x[j];
        }
        x[k] = s / r[(k, k)];
    }
    Ok(x)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    let mut h = CMatrix::zeros(m + n, m + n);
    h.view_mut((0, n), (n, m)).copy_from(&a.adjoint());
    h.view_mut((n, 0), (m, n)).copy_from(a);
    let (vals, _) = eig_hermitian(&h)?;
    let k = m.min(n);
    Ok(vals.iter().rev().take(k).map(|v| v.max(0.0)).collect())
}

/// `σ_max / σ_min`.
pub fn condition_number(a: &CMatrix) -> Result<f64> {
    let s = singular_values(a)?;
    let max = s.first().copied().unwrap_or(0.0);
    let min = s.last().copied().unwrap_or(0.0);
    if min <= 1e-15 * max || min == 0.0 {
        return Err(Error::Singular { smallest: min });
    }
    Ok(max / min)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRead {
    pub call: String,
    pub purpose: String,
}

/// Logged gateway to the reference routines.
#[derive(Debug, Clone, Default)]
pub struct OracleAccess {
    reads: Vec<OracleRead>,
    verbose: bool,
}

pub const ORACLE_LOG_ENV: &str = "BLOCKENC_ORACLE_LOG";

impl OracleAccess {
    /// Verbose when `BLOCKENC_ORACLE_LOG=1`.
    pub fn from_env() -> Self {
        Self {
            reads: Vec::new(),
            verbose: std::env::var(ORACLE_LOG_ENV).map(|v| v == "1").unwrap_or(false),
        }
    }

    pub fn quiet() -> Self {
        Self::default()
    }

    pub fn reads(&self) -> &[OracleRead] {
        &self.reads
    }

    pub fn into_reads(self) -> Vec<OracleRead> {
        self.reads
    }

    fn record(&mut self, call: &str, purpose: &str) {
        if self.verbose {
            eprintln!("[oracle] {call}: {purpose}");
        }
        self.reads.push(OracleRead {
            call: call.to_string(),
            purpose: purpose.to_string(),
        });
    }

    pub fn eig(&mut self, a: &CMatrix, purpose: &str) -> Result<(Vec<f64>, CMatrix)> {
        self.record("eig_hermitian", purpose);
        eig_hermitian(a)
    }

    pub fn expm(&mut self, a: &CMatrix, t: f64, purpose: &str) -> Result<CMatrix> {
        self.record("expm_hermitian", purpose);
        expm_hermitian(a, t)
    }

    pub fn solve(&mut self, a: &CMatrix, b: &CVector, purpose: &str) -> Result<CVector> {
        self.record("solve", purpose);
        solve(a, b)
    }

    pub fn least_squares(&mut self, f: &CMatrix, y: &CVector, purpose: &str) -> Result<CVector> {
        self.record("solve_least_squares", purpose);
        solve_least_squares(f, y)
    }

    pub fn singular_values(&mut self, a: &CMatrix, purpose: &str) -> Result<Vec<f64>> {
        self.record("singular_values", purpose);
        singular_values(a)
    }

    pub fn condition_number(&mut self, a: &CMatrix, purpose: &str) -> Result<f64> {
        self.record("condition_number", purpose);
        condition_number(a)
    }
}
