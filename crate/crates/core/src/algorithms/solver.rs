//! Hermitian linear systems through inverse powers of encoded matrices.

use serde::{Deserialize, Serialize};

use super::check_eps;
use crate::encoding::{self, BlockEncoding, ResourceCost};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::oracles::OracleAccess;
use crate::poly;
use crate::state_prep::{self, ColumnOptions, FrobeniusHandling};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolvePath {
    #[default]
    Auto,
    /// `(A A†)^{-1/2}` from the column density of a PSD `A`.
    Psd,
    /// Inverse of `A / 8` built from the shift `(I + A) / 2`.
    Shifted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub eps: f64,
    pub path: SolvePath,
    /// Condition numbers above this count as singular.
    pub kappa_max: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            path: SolvePath::Auto,
            kappa_max: 1e6,
        }
    }
}

impl SolveConfig {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub solution: CVector,
    pub path: SolvePath,
    pub kappa: f64,
    pub success_probability: f64,
    /// `1 / (4 κ²)`.
    pub predicted_success: f64,
    pub fidelity: f64,
    /// `‖A x̂ ‖A⁻¹b‖ - b‖` with `b` normalized.
    pub residual: f64,
    pub encoding_error: f64,
    pub cost: ResourceCost,
}

/// Block encoding of `|λ|_min A⁻¹ / 2` and the `κ` it was built for.
pub fn inverse_encoding(a: &CMatrix, cfg: &SolveConfig) -> Result<(BlockEncoding, SolvePath, f64)> {
    check_eps(cfg.eps)?;
    let a = linalg::hermitize(a)?;
    let n = a.nrows();
    // the condition number is classical preprocessing here
    let (vals, _) = linalg::eigh(&a)?;
    let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if max >= 1.0 {
        let value = if vals[n - 1].abs() >= vals[0].abs() { vals[n - 1] } else { vals[0] };
        return Err(Error::SpectrumOutOfRange {
            value,
            range: "(-1, 1)".into(),
        });
    }
    if min < 1.0 / cfg.kappa_max {
        return Err(Error::Singular { smallest: min });
    }
    let psd = vals[0] > 0.0;
    let path = match cfg.path {
        SolvePath::Auto if psd => SolvePath::Psd,
        SolvePath::Auto => SolvePath::Shifted,
        SolvePath::Psd if !psd => {
            return Err(Error::NotPsd {
                min_eigenvalue: vals[0],
            })
        }
        p => p,
    };
    let enc = match path {
        SolvePath::Psd => {
            let rho = state_prep::density_from_columns(&a, None)?;
            let fro2 = linalg::frobenius(&a).powi(2);
            let kappa_rho = fro2 / (min * min);
            poly::negative_power(&rho, 0.5, kappa_rho, cfg.eps)?
        }
        _ => {
            let shifted = (linalg::identity(n) + &a).scale(0.5);
            let opts = ColumnOptions {
                frobenius: FrobeniusHandling::Remove,
                eps: cfg.eps,
                ..ColumnOptions::default()
            };
            let m = state_prep::encode_from_columns(&shifted, &opts)?.encoding;
            let quarter_shift = encoding::scale_down(&m, 2.0)?;
            let quarter_id = encoding::scale_down(&BlockEncoding::identity(n), 4.0)?;
            let eighth = encoding::linear_combination(&[(1.0, &quarter_shift), (-1.0, &quarter_id)])?
                .into_unit_alpha();
            poly::negative_power(&eighth, 1.0, 8.0 / min, cfg.eps)?
        }
    };
    Ok((enc, path, max / min))
}

pub fn linear_solve(
    a: &CMatrix,
    b: &CVector,
    cfg: &SolveConfig,
    oracle: &mut OracleAccess,
) -> Result<SolveOutcome> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let b = linalg::normalize(b)?;
    let (enc, path, kappa) = inverse_encoding(a, cfg)?;
    let post = encoding::apply_to_state_with_floor(&enc, &b, f64::MIN_POSITIVE)?;
    let reference = oracle.solve(a, &b, "direct inverse for fidelity and residual")?;
    let scale = reference.norm();
    // the residual is phase sensitive; align before measuring
    let phase = {
        let ip = post.state.dotc(&reference);
        if ip.norm() > 0.0 { ip / ip.norm() } else { linalg::c(1.0) }
    };
    let residual = (a * post.state.map(|z| z * phase).scale(scale) - &b).norm();
    Ok(SolveOutcome {
        fidelity: linalg::fidelity(&post.state, &reference),
        solution: post.state,
        path,
        kappa,
        success_probability: post.probability,
        predicted_success: 1.0 / (4.0 * kappa * kappa),
        residual,
        encoding_error: enc.error(),
        cost: post.cost,
    })
}
