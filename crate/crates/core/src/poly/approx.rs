//! Chebyshev approximants for the transforms the algorithms need.

use serde::{Deserialize, Serialize};

use super::chebyshev::{self, clenshaw, ChebyshevPolynomial, GRID_POINTS};
use crate::error::{Error, Result};
use crate::par;

/// Grid measurements are checked against `eps` shrunk by this factor, leaving
/// room for peaks that fall between grid points.
const GRID_MARGIN: f64 = 0.995;
const MAX_NODES: usize = 8192;

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Interpolation coefficients with a tail below `floor`.
fn resolved_coeffs<F>(f: F, start: usize, floor: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    let mut n = start.max(32);
    loop {
        let c = chebyshev::interpolate(&f, n);
        let tail = c[3 * n / 4..].iter().map(|v| v.abs()).fold(0.0, f64::max);
        if tail <= floor {
            return Ok(c);
        }
        if n >= MAX_NODES {
            return Err(Error::Convergence(format!(
                "Chebyshev coefficients still {tail:e} at {n} nodes"
            )));
        }
        n *= 2;
    }
}

/// Truncated interpolant of `exp(-beta (1 - x))` on `[-1, 1]`.
pub fn exp_decay_poly(beta: f64, eps: f64) -> Result<ChebyshevPolynomial> {
    check_eps(eps)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let f = move |x: f64| (-beta * (1.0 - x)).exp();
    let guess = (2.0 * (beta * (1.0 / eps).ln()).sqrt()) as usize + 16;
    let coeffs = resolved_coeffs(f, 2 * guess, eps * 1e-3)?;
    let xs = chebyshev::grid(GRID_POINTS);
    let (d, err) = chebyshev::shortest_truncation(&coeffs, eps * GRID_MARGIN, |c| {
        chebyshev::sup_error(c, f, &xs)
    });
    Ok(ChebyshevPolynomial::new(
        coeffs[..=d].to_vec(),
        "exp-decay",
        &[("beta", beta), ("eps", eps)],
        err,
    ))
}

/// Degree scale `sqrt(max(beta, ln(1/eps)) ln(1/eps))` for the decay approximant.
pub fn exp_decay_degree_bound(beta: f64, eps: f64) -> f64 {
    let l = (1.0 / eps).ln();
    (beta.max(l) * l).sqrt()
}

/// Bessel functions `J_0(t) ..= J_kmax(t)` by Miller's backward recurrence.
pub fn bessel_j(kmax: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if t == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let x = t.abs();
    let start = {
        let m = kmax.max(x.ceil() as usize) + 20 + (10.0 * x.sqrt()) as usize;
        m + (m % 2)
    };
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    // J_0 + 2 Σ J_{2k} = 1
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    for k in 0..=kmax {
        let v = vals[k] / norm;
        out[k] = if t < 0.0 && k % 2 == 1 { -v } else { v };
    }
    out
}

/// Even part `cos(x t)` and odd part `sin(x t)` of `exp(-i x t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiAnger {
    pub cos: ChebyshevPolynomial,
    pub sin: ChebyshevPolynomial,
    pub degree: usize,
    pub sup_error: f64,
}

impl JacobiAnger {
    pub fn evaluate(&self, x: f64) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.cos.evaluate(x), -self.sin.evaluate(x))
    }
}

/// Jacobi-Anger coefficient vector `a_k` with `exp(-i x t) = Σ a_k T_k(x)` split by parity.
fn jacobi_anger_coeffs(t: f64, kmax: usize) -> Vec<f64> {
    let j = bessel_j(kmax, t);
    (0..=kmax)
        .map(|k| {
            if k == 0 {
                j[0]
            } else {
                let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                2.0 * sign * j[k]
            }
        })
        .collect()
}

fn split_parity(a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let even = a.iter().enumerate().map(|(k, &v)| if k % 2 == 0 { v } else { 0.0 }).collect();
    let odd = a.iter().enumerate().map(|(k, &v)| if k % 2 == 1 { v } else { 0.0 }).collect();
    (even, odd)
}

pub fn jacobi_anger_poly(t: f64, eps: f64) -> Result<JacobiAnger> {
    check_eps(eps)?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let kmax = (1.5 * t.abs() + 2.0 * (1.0 / eps).ln() + 30.0) as usize;
    let a = jacobi_anger_coeffs(t, kmax);
    let xs = chebyshev::grid(GRID_POINTS);
    let err = |c: &[f64]| {
        let (even, odd) = split_parity(c);
        par::max_over(&xs, |x| {
            let re = clenshaw(&even, x) - (x * t).cos();
            let im = clenshaw(&odd, x) - (x * t).sin();
            re.hypot(im)
        })
    };
    let (d, sup) = chebyshev::shortest_truncation(&a, eps * GRID_MARGIN, err);
    let (even, odd) = split_parity(&a[..=d]);
    let params = [("t", t), ("eps", eps)];
    Ok(JacobiAnger {
        cos: ChebyshevPolynomial::new(even, "cos", &params, sup),
        sin: ChebyshevPolynomial::new(odd, "sin", &params, sup),
        degree: d,
        sup_error: sup,
    })
}

/// Growth scale `t + ln(1/eps) / ln(e + ln(1/eps) / t)` of the truncation degree.
pub fn jacobi_anger_degree_bound(t: f64, eps: f64) -> f64 {
    let l = (1.0 / eps).ln();
    let t = t.abs();
    if t == 0.0 {
        return 0.0;
    }
    t + l / (std::f64::consts::E + l / t).ln()
}

const STEP_GRID: usize = 4001;

/// Error outside the band of the best smoothed-step interpolant of degree `d`.
fn step_error(d: usize, delta: f64, outside: &[f64]) -> f64 {
    let eval = |k: f64| {
        let c = chebyshev::interpolate(|u| 0.5 * (1.0 + libm::erf(k * u)), (2 * d + 16).max(64));
        let c = &c[..=d];
        par::max_over(outside, |u| {
            let target = if u > 0.0 { 1.0 } else { 0.0 };
            (clenshaw(c, u) - target).abs()
        })
    };
    // golden-section search over ln k
    let (mut a, mut b) = (0.5f64.ln(), (40.0 / delta).ln());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = eval(x1.exp());
    let mut f2 = eval(x2.exp());
    for _ in 0..40 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = eval(x1.exp());
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = eval(x2.exp());
        }
    }
    f1.min(f2)
}

/// Smallest degree whose step approximant on `[0, 1]` (jump at 1/2, transition
/// width `delta`) has error at most `eps` away from the transition.
pub fn step_degree_estimate(delta: f64, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    // x in [0, 1] maps to u = 2x - 1; the band |x - 1/2| < delta/2 becomes |u| < delta
    let outside: Vec<f64> = chebyshev::grid(STEP_GRID)
        .into_iter()
        .filter(|u| u.abs() >= delta)
        .collect();
    if outside.is_empty() {
        return Ok(0);
    }
    let constant = outside.iter().all(|&u| u > 0.0) || outside.iter().all(|&u| u <= 0.0);
    if constant {
        return Ok(0);
    }
    let passes = |d: usize| step_error(d, delta, &outside) <= eps;
    let mut hi = 1;
    while !passes(hi) {
        hi *= 2;
        if hi > 1 << 16 {
            return Err(Error::Convergence("step degree search diverged".into()));
        }
    }
    let mut lo = 0;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
