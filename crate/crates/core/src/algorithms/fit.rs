//! Least-squares fitting `λ = (F†F)⁻¹F†y` through the Hermitian embedding
//! `F′ = [[0, F†], [F, 0]]`.

use serde::{Deserialize, Serialize};

use super::{check_eps, encode_psd};
use crate::encoding::{self, BlockEncoding, ResourceCost};
use crate::error::{Error, Result, Warning};
use crate::linalg::{self, c, CMatrix, CVector, C64};
use crate::oracles::OracleAccess;
use crate::poly;
use crate::state_prep;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitProblem {
    /// `F_ij = f_j(x_i)`, one row per sample.
    pub design: CMatrix,
    pub targets: CVector,
    pub basis: Vec<String>,
}

impl FitProblem {
    pub fn new(design: CMatrix, targets: CVector) -> Self {
        let basis = (1..=design.ncols()).map(|j| format!("f{j}")).collect();
        Self {
            design,
            targets,
            basis,
        }
    }

    /// Monomial design `F_ij = x_i^j` for `j = 1..=terms`.
    pub fn polynomial(xs: &[f64], ys: &[f64], terms: usize) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} inputs against {} targets",
                xs.len(),
                ys.len()
            )));
        }
        let design = CMatrix::from_fn(xs.len(), terms, |i, j| c(xs[i].powi(j as i32 + 1)));
        Ok(Self {
            design,
            targets: linalg::vec_from_real(ys),
            basis: (1..=terms).map(|j| format!("x^{j}")).collect(),
        })
    }

    /// `(x, x², …)` for the monomial design.
    pub fn monomials(x: f64, terms: usize) -> CVector {
        CVector::from_fn(terms, |j, _| c(x.powi(j as i32 + 1)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    /// `λ_s / κ_F` for the rescaled problem, the unnormalized output branch.
    pub amplitudes: CVector,
    pub solution_state: CVector,
    /// `λ` in the units of the original problem.
    pub coefficients: CVector,
    pub fidelity: f64,
    pub kappa_f: f64,
    /// `‖F‖` divided out of the design.
    pub design_scale: f64,
    /// `‖y‖` divided out of the targets.
    pub target_norm: f64,
    pub success_probability: f64,
    pub cost: ResourceCost,
    pub warnings: Vec<Warning>,
}

/// Permutation `Π` with `F′Π = [[F†, 0], [0, F]]`.
fn block_swap(n: usize, m: usize) -> CMatrix {
    let mut p = CMatrix::zeros(n + m, n + m);
    for col in 0..m {
        p[(n + col, col)] = c(1.0);
    }
    for col in m..n + m {
        p[(col - m, col)] = c(1.0);
    }
    p
}

/// Encoding of `(F†F)⁻¹F† / κ_F` for `‖F‖ ≤ 1`.
fn pseudo_inverse_encoding(f: &CMatrix, sigma_max: f64, sigma_min: f64, eps: f64) -> Result<BlockEncoding> {
    let (m, n) = f.shape();
    let mut fp = CMatrix::zeros(n + m, n + m);
    fp.view_mut((0, n), (n, m)).copy_from(&f.adjoint());
    fp.view_mut((n, 0), (m, n)).copy_from(f);

    // F†F / ‖F′‖_F² from the column density of F′
    let rho = state_prep::density_from_columns(&fp, None)?;
    let gram = encoding::principal_block(&rho, n, n)?;
    let fro2 = linalg::frobenius(&fp).powi(2);
    let inverse = poly::negative_power(&gram, 1.0, fro2 / (sigma_min * sigma_min), eps)?;

    // F′ / 8 from the PSD shift (I + F′) / 2
    let id = linalg::identity(n + m);
    let shift = encode_psd(&(&id + &fp).scale(0.5), eps)?;
    let quarter = encoding::scale_down(&shift, 2.0)?;
    let quarter_id = encoding::scale_down(&BlockEncoding::identity(n + m), 4.0)?;
    let eighth = encoding::linear_combination(&[(1.0, &quarter), (-1.0, &quarter_id)])?.into_unit_alpha();

    let swap = BlockEncoding::new(block_swap(n, m), 1.0, 0.0, ResourceCost::unit(0))?;
    let swapped = encoding::product(&eighth, &swap)?;
    let adjoint = encoding::principal_block(&swapped, n, m)?;
    let composed = encoding::product(&inverse, &adjoint)?;
    // composed carries σ_min² (F†F)⁻¹F† / 16
    encoding::amplify_auto(&composed, 16.0 / (sigma_max * sigma_min), eps)
}

pub fn data_fit(problem: &FitProblem, eps: f64, oracle: &mut OracleAccess) -> Result<FitOutcome> {
    check_eps(eps)?;
    let (m, n) = problem.design.shape();
    if problem.targets.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{m} samples against {} targets",
            problem.targets.len()
        )));
    }
    if n == 0 || m < n {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    linalg::ensure_finite(&problem.design)?;
    let target_norm = problem.targets.norm();
    let y = linalg::normalize(&problem.targets)?;
    let design_scale = linalg::op_norm(&problem.design);
    if design_scale == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let mut warnings = Vec::new();
    if (design_scale - 1.0).abs() > 1e-12 {
        warnings.push(Warning::Rescaled {
            what: "design".into(),
            factor: 1.0 / design_scale,
        });
    }
    let f = problem.design.unscale(design_scale);

    let sv = oracle
        .singular_values(&f, "full column rank and condition number of the design")
        .map_err(|_| Error::RankDeficient {
            condition: f64::INFINITY,
        })?;
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let sigma_min = sv.get(n - 1).copied().unwrap_or(0.0);
    let kappa_f = sigma_max / sigma_min;
    if !(sigma_min > 0.0) || kappa_f > 1e8 {
        return Err(Error::RankDeficient { condition: kappa_f });
    }

    let enc = pseudo_inverse_encoding(&f, sigma_max, sigma_min, eps)?;
    let amplitudes = enc.block() * &y;
    let post = encoding::apply_to_state_with_floor(&enc, &y, f64::MIN_POSITIVE)?;
    let reference = oracle.least_squares(&f, &y, "least-squares reference")?;
    let coefficients = amplitudes.scale(kappa_f * target_norm / design_scale);
    Ok(FitOutcome {
        fidelity: linalg::fidelity(&post.state, &reference),
        amplitudes,
        solution_state: post.state,
        coefficients,
        kappa_f,
        design_scale,
        target_norm,
        success_probability: post.probability,
        cost: post.cost,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// `Σ_j λ_j x̃_j / (‖x̃‖ κ_F ‖y‖)` on the rescaled problem.
    pub overlap: f64,
    /// `f(x̃, λ)` in original units.
    pub value: C64,
}

pub fn predict(fit: &FitOutcome, x_tilde: &CVector) -> Result<Prediction> {
    if x_tilde.len() != fit.amplitudes.len() {
        return Err(Error::DimensionMismatch(format!(
            "feature vector of length {} for {} coefficients",
            x_tilde.len(),
            fit.amplitudes.len()
        )));
    }
    let norm = x_tilde.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let raw: C64 = x_tilde.iter().zip(fit.amplitudes.iter()).map(|(x, a)| x * a).sum();
    Ok(Prediction {
        overlap: raw.norm() / norm,
        value: raw * (fit.kappa_f * fit.target_norm / fit.design_scale),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, vec_from_real};

    #[test]
    fn square_design_interpolates() {
        let f = CMatrix::from_row_slice(2, 2, &[c(0.9), c(0.2), c(0.1), c(0.5)]);
        let y = vec_from_real(&[0.3, -0.7]);
        let out = data_fit(&FitProblem::new(f.clone(), y.clone()), 1e-8, &mut OracleAccess::quiet()).unwrap();
        let want = crate::oracles::solve(&f, &y).unwrap();
        assert!((&out.coefficients - &want).norm() < 1e-9 * want.norm());
    }

    #[test]
    fn prediction_of_aligned_and_orthogonal_inputs() {
        let f = diag(&[1.0, 0.5]);
        let y = vec_from_real(&[0.6, 0.8]);
        let out = data_fit(&FitProblem::new(f, y), 1e-8, &mut OracleAccess::quiet()).unwrap();
        let along = predict(&out, &out.amplitudes.map(|z| z.conj())).unwrap();
        assert!((along.overlap - out.amplitudes.norm()).abs() < 1e-12);
        let ortho = CVector::from_vec(vec![-out.amplitudes[1], out.amplitudes[0]]);
        assert!(predict(&out, &ortho).unwrap().overlap < 1e-12);
    }
}
