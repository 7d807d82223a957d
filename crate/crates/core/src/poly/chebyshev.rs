use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::par;

pub const BASIS: &str = "chebyshev-T";

/// Number of points in the default validation grid on `[-1, 1]`.
pub const GRID_POINTS: usize = 20_001;

/// Real polynomial `Σ c_k T_k(x)` with a record of what it approximates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevPolynomial {
    pub basis: String,
    pub coeffs: Vec<f64>,
    pub target: String,
    pub params: BTreeMap<String, f64>,
    pub sup_error: f64,
    pub degree: usize,
}

impl ChebyshevPolynomial {
    pub fn new(coeffs: Vec<f64>, target: &str, params: &[(&str, f64)], sup_error: f64) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self {
            basis: BASIS.to_string(),
            degree: coeffs.len() - 1,
            coeffs,
            target: target.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            sup_error,
        }
    }

    /// Clenshaw evaluation.
    pub fn evaluate(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, x)
    }

    /// Largest `|P(x)|` over the validation grid.
    pub fn max_abs(&self) -> f64 {
        par::max_over(&grid(GRID_POINTS), |x| self.evaluate(x).abs())
    }

    /// Grid check for the `|P| ≤ 1/2` condition of the singular-value transform.
    pub fn qsvt_admissible(&self) -> bool {
        self.max_abs() <= 0.5 + 1e-12
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            sup_error: self.sup_error * factor.abs(),
            ..self.clone()
        }
    }

    /// Rescaled by `1 / (2 (1 + sup_error))` so `|P| ≤ 1/2` whenever `|target| ≤ 1`.
    pub fn halved(&self) -> Self {
        let s = 1.0 / (2.0 * (1.0 + self.sup_error));
        let mut h = self.scaled(s);
        h.params.insert("scale".into(), s);
        h
    }

    /// Even, odd, or mixed parity of the coefficient pattern.
    pub fn parity(&self) -> Parity {
        let even = self.coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0);
        let odd = self.coeffs.iter().step_by(2).all(|&c| c == 0.0);
        match (even, odd) {
            (true, _) => Parity::Even,
            (_, true) => Parity::Odd,
            _ => Parity::Mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// `n` evenly spaced points covering `[-1, 1]`.
pub fn grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
        .collect()
}

/// Interpolation coefficients at `n` first-kind Chebyshev nodes.
pub fn interpolate<F>(f: F, n: usize) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    let pi = std::f64::consts::PI;
    let theta: Vec<f64> = (0..n).map(|k| pi * (k as f64 + 0.5) / n as f64).collect();
    let fx: Vec<f64> = theta.iter().map(|t| f(t.cos())).collect();
    let mut c: Vec<f64> = (0..n)
        .map(|j| {
            let s: f64 = theta
                .iter()
                .zip(&fx)
                .map(|(t, v)| v * (j as f64 * t).cos())
                .sum();
            2.0 * s / n as f64
        })
        .collect();
    c[0] *= 0.5;
    c
}

/// Sup distance between `coeffs` and `f` on `xs`.
pub fn sup_error<F>(coeffs: &[f64], f: F, xs: &[f64]) -> f64
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    par::max_over(xs, |x| (clenshaw(coeffs, x) - f(x)).abs())
}

/// Smallest truncation of `coeffs` that stays within `target` of `f` on `xs`.
///
/// Starts from the degree where the coefficient tail alone is below `target`
/// and walks down while the grid error still passes.
pub fn shortest_truncation<E>(coeffs: &[f64], target: f64, err: E) -> (usize, f64)
where
    E: Fn(&[f64]) -> f64,
{
    let n = coeffs.len();
    let mut tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        tail[k] = tail[k + 1] + coeffs[k].abs();
    }
    let mut d = (0..n).find(|&d| tail[d + 1] <= target).unwrap_or(n - 1);
    let mut best = (d, err(&coeffs[..=d]));
    while d > 0 {
        let e = err(&coeffs[..d]);
        if e > target {
            break;
        }
        d -= 1;
        best = (d, e);
    }
    best
}
