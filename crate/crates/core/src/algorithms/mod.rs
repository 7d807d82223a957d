//! Application pipelines built from the block-encoding primitives.

pub mod fit;
pub mod ground;
pub mod ode;
pub mod pca;
pub mod simulation;
pub mod solver;

use serde::{Deserialize, Serialize};

use crate::encoding::{self, BlockEncoding};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::poly;
use crate::state_prep::{self, ColumnOptions, FrobeniusHandling};

pub use fit::{data_fit, predict, FitOutcome, FitProblem, Prediction};
pub use ground::{ground_excited_energies, ground_state_ite, EnergyOutcome, IteOutcome};
pub use ode::{
    build_ode_system, default_steps, multistep_table, simulate_via_linear_solve, Hamiltonian,
    MultistepTable, OdeOutcome, OdeSpec, OdeSystem,
};
pub use pca::{
    gd_steps_for, pca_gradient_descent, pca_gradient_descent_from, pca_power_top_r, power_iterations,
    EigenLevel, GdOutcome, GradientConfig, PcaOutcome, PowerMethodConfig,
};
pub use simulation::{simulate_direct, SimulationOutcome};
pub use solver::{linear_solve, SolveConfig, SolveOutcome, SolvePath};

/// Encoding of a PSD matrix with `‖A‖ ≤ 1` whose corner is `A` itself.
pub fn encode_psd(a: &CMatrix, eps: f64) -> Result<BlockEncoding> {
    let opts = ColumnOptions {
        frobenius: FrobeniusHandling::Remove,
        eps,
        ..ColumnOptions::default()
    };
    Ok(state_prep::encode_from_columns(a, &opts)?.encoding)
}

/// Encoding of a Hermitian `H` with `‖H‖ ≤ 1` from the PSD shift `(I + H) / 2`:
/// combine `2 (I + H)/2 - I = H` at subnormalization 3, then amplify by 3.
pub fn encode_hermitian(h: &CMatrix, eps: f64) -> Result<BlockEncoding> {
    let n = h.nrows();
    let shifted = (linalg::identity(n) + h).scale(0.5);
    let m = encode_psd(&shifted, eps)?;
    let id = BlockEncoding::identity(n);
    let lcu = encoding::linear_combination(&[(2.0, &m), (-1.0, &id)])?.into_unit_alpha();
    encoding::amplify_auto(&lcu, 3.0, eps)
}

/// Boost that maps a success probability `g` onto the rank-one kernel of the
/// DME step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostReport {
    pub gamma: f64,
    pub beta: f64,
    /// `e^{-2 β (1 - γ)}`.
    pub factor: f64,
    /// `P(0) = e^{-β}`, the value the exp-decay polynomial leaves on the kernel.
    pub kernel_leakage: f64,
    pub degree: usize,
}

/// `β = ln(1 / (1 - ε)) / (2 (1 - γ))`.
pub fn boost_beta(gamma: f64, eps: f64) -> Result<f64> {
    if !(gamma >= 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok((1.0 / (1.0 - eps)).ln() / (2.0 * (1.0 - gamma)))
}

pub fn boost_factor(beta: f64, gamma: f64) -> f64 {
    (-2.0 * beta * (1.0 - gamma)).exp()
}

pub fn boost(gamma: f64, eps: f64) -> Result<BoostReport> {
    // gamma within eps of one already meets the target unboosted
    if gamma >= 1.0 - eps {
        check_eps(eps)?;
        return Ok(BoostReport {
            gamma,
            beta: 0.0,
            factor: 1.0,
            kernel_leakage: 1.0,
            degree: 0,
        });
    }
    let g = gamma.max(0.0);
    let beta = boost_beta(g, eps)?;
    let degree = poly::exp_decay_poly(beta.max(1e-12), eps)?.degree;
    Ok(BoostReport {
        gamma,
        beta,
        factor: boost_factor(beta, g),
        kernel_leakage: (-beta).exp(),
        degree,
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")))
    }
}
