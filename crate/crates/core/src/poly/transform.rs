//! Eigen- and singular-value transforms applied to encoded blocks.

use super::chebyshev::{ChebyshevPolynomial, Parity};
use crate::encoding::{BlockEncoding, ResourceCost};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, C64};

/// Slack on spectrum-range checks.
pub const SPECTRUM_TOL: f64 = 1e-9;

fn transformed_cost(cost: &ResourceCost, multiplier: u64) -> ResourceCost {
    let mut out = cost.repeated(multiplier.max(1));
    out.depth += multiplier as f64;
    out.ancillas += 2;
    out
}

fn propagated_error(enc: &BlockEncoding, degree: f64) -> f64 {
    4.0 * degree * (enc.error() / enc.alpha()).sqrt()
}

/// `P(B)` for a Hermitian block `B` and `|P| ≤ 1/2` on `[-1, 1]`.
pub fn apply_polynomial(enc: &BlockEncoding, p: &ChebyshevPolynomial) -> Result<BlockEncoding> {
    let max_abs = p.max_abs();
    if max_abs > 0.5 + 1e-12 {
        return Err(Error::NotAdmissible { max_abs });
    }
    let block = linalg::hermitian_fn(enc.block(), |x| c(p.evaluate(x)))?;
    let error = propagated_error(enc, p.degree as f64) + p.sup_error;
    BlockEncoding::new(block, 1.0, error, transformed_cost(enc.cost(), p.degree as u64))
}

/// Applies `f` exactly, with `p` as the admissible polynomial the circuit would
/// realize; its sup error enters the error budget.
pub fn apply_polynomial_target<F>(
    enc: &BlockEncoding,
    p: &ChebyshevPolynomial,
    f: F,
) -> Result<BlockEncoding>
where
    F: Fn(f64) -> f64,
{
    let max_abs = p.max_abs();
    if max_abs > 0.5 + 1e-12 {
        return Err(Error::NotAdmissible { max_abs });
    }
    let block = linalg::hermitian_fn(enc.block(), |x| c(f(x)))?;
    let error = propagated_error(enc, p.degree as f64) + p.sup_error;
    BlockEncoding::new(block, 1.0, error, transformed_cost(enc.cost(), p.degree as u64))
}

/// Singular-value transform of a general block: `W P(Σ) V†` for odd `P`,
/// `V P(Σ) V†` for even `P`.
pub fn apply_singular_value_polynomial(
    enc: &BlockEncoding,
    p: &ChebyshevPolynomial,
) -> Result<BlockEncoding> {
    let max_abs = p.max_abs();
    if max_abs > 0.5 + 1e-12 {
        return Err(Error::NotAdmissible { max_abs });
    }
    let b = enc.block();
    let svd = b.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Convergence("SVD failed".into())),
    };
    let sig: Vec<C64> = svd.singular_values.iter().map(|&s| c(p.evaluate(s))).collect();
    let block = match p.parity() {
        Parity::Odd => {
            let mut us = u.clone();
            for (k, s) in sig.iter().enumerate() {
                us.column_mut(k).iter_mut().for_each(|z| *z *= s);
            }
            us * vt
        }
        Parity::Even => {
            let v = vt.adjoint();
            let mut vs = v.clone();
            for (k, s) in sig.iter().enumerate() {
                vs.column_mut(k).iter_mut().for_each(|z| *z *= s);
            }
            // directions beyond the rank map to P(0)
            let n = b.ncols();
            let mut out = vs * &vt;
            if sig.len() < n {
                let p0 = p.evaluate(0.0);
                let proj = CMatrix::identity(n, n) - &v * &vt;
                out += proj.scale(p0);
            }
            out
        }
        Parity::Mixed => {
            return Err(Error::InvalidParameter(
                "singular-value transform needs a definite parity".into(),
            ))
        }
    };
    let error = propagated_error(enc, p.degree as f64) + p.sup_error;
    BlockEncoding::new(block, 1.0, error, transformed_cost(enc.cost(), p.degree as u64))
}

fn spectrum(enc: &BlockEncoding) -> Result<(Vec<f64>, CMatrix)> {
    linalg::eigh(enc.block())
}

fn check_kappa(kappa: f64, eps: f64) -> Result<()> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be at least 1, got {kappa}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Query multiplier `κ (1 + c) ln²(κ^{1+c} / eps)` of the power transforms.
pub fn power_multiplier(c_exp: f64, kappa: f64, eps: f64) -> u64 {
    let l = linalg::lg(kappa.powf(1.0 + c_exp) / eps);
    (kappa * (1.0 + c_exp) * l * l).ceil() as u64
}

fn power_degree(c_exp: f64, kappa: f64, eps: f64) -> f64 {
    (kappa * (1.0 + c_exp) * linalg::lg(kappa.powf(1.0 + c_exp) / eps)).ceil()
}

/// `M^{-c} / (2 κ^c)` for a block with spectrum magnitudes in `[1/κ, 1]`.
///
/// Negative eigenvalues are accepted for `c = 1`, where the odd extension of
/// the inverse applies.
pub fn negative_power(enc: &BlockEncoding, c_exp: f64, kappa: f64, eps: f64) -> Result<BlockEncoding> {
    check_kappa(kappa, eps)?;
    if !(c_exp > 0.0 && c_exp <= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent must lie in (0, 1], got {c_exp}")));
    }
    let (vals, vecs) = spectrum(enc)?;
    let lo = 1.0 / kappa;
    for &v in &vals {
        let a = v.abs();
        let signed_ok = v >= 0.0 || c_exp == 1.0;
        if !signed_ok || a < lo - SPECTRUM_TOL || a > 1.0 + SPECTRUM_TOL {
            return Err(Error::SpectrumOutOfRange {
                value: v,
                range: format!("[{lo:e}, 1]"),
            });
        }
    }
    let scale = 1.0 / (2.0 * kappa.powf(c_exp));
    let block = linalg::spectral_sum(&vals, &vecs, |v| {
        let m = v.abs().max(lo).powf(-c_exp) * scale;
        c(if v < 0.0 { -m } else { m })
    });
    let error = eps + propagated_error(enc, power_degree(c_exp, kappa, eps));
    BlockEncoding::new(block, 1.0, error, transformed_cost(enc.cost(), power_multiplier(c_exp, kappa, eps)))
}

/// `M^c / 2` for a PSD block whose non-zero eigenvalues lie in `[1/κ, 1]`.
///
/// Eigenvalues within [`SPECTRUM_TOL`] of zero are taken as an exact kernel
/// and map to zero.
pub fn positive_power(enc: &BlockEncoding, c_exp: f64, kappa: f64, eps: f64) -> Result<BlockEncoding> {
    check_kappa(kappa, eps)?;
    if !(c_exp > 0.0 && c_exp < 1.0) {
        return Err(Error::InvalidParameter(format!("exponent must lie in (0, 1), got {c_exp}")));
    }
    let (vals, vecs) = spectrum(enc)?;
    let lo = 1.0 / kappa;
    for &v in &vals {
        let kernel = v.abs() <= SPECTRUM_TOL;
        if !kernel && (v < lo - SPECTRUM_TOL || v > 1.0 + SPECTRUM_TOL) {
            return Err(Error::SpectrumOutOfRange {
                value: v,
                range: format!("{{0}} ∪ [{lo:e}, 1]"),
            });
        }
    }
    let block = linalg::spectral_sum(&vals, &vecs, |v| {
        if v.abs() <= SPECTRUM_TOL {
            c(0.0)
        } else {
            c(0.5 * v.max(0.0).powf(c_exp))
        }
    });
    let mult = {
        let l = linalg::lg(kappa / eps);
        (kappa * l * l).ceil() as u64
    };
    let error = eps + propagated_error(enc, (kappa * linalg::lg(kappa / eps)).ceil());
    BlockEncoding::new(block, 1.0, error, transformed_cost(enc.cost(), mult))
}
