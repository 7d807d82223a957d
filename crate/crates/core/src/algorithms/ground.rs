//! Ground states by imaginary-time evolution, and the two lowest energies by
//! PCA on `(I - H) / 2`.

use serde::{Deserialize, Serialize};

use super::pca::{pca_power_top_r, PcaOutcome, PowerMethodConfig};
use super::{boost, check_eps, encode_psd, BoostReport};
use crate::encoding::{self, BlockEncoding, ResourceCost};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::oracles::OracleAccess;
use crate::poly;
use crate::random;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteOutcome {
    pub state: CVector,
    pub time: f64,
    /// `max_{i ≥ 1} |a_i|² / |a_0|²` of the start state.
    pub a: f64,
    pub gap: f64,
    /// `Σ_{i ≥ 1} (|a_i|² / |a_0|²) e^{-2t(E_i - E_0)}`.
    pub tail_sum: f64,
    pub overlap: f64,
    pub ground_energy: f64,
    /// Post-selection probability of the evolution step.
    pub success_probability: f64,
    pub boost: BoostReport,
    pub degree: usize,
    pub cost: ResourceCost,
}

/// `t = ln(2a(N - 1)/ε) / Δ`, clamped at zero.
pub fn ite_time(gap: f64, a: f64, dim: usize, eps: f64) -> f64 {
    if a <= 0.0 || dim < 2 {
        return 0.0;
    }
    ((2.0 * a * (dim as f64 - 1.0) / eps).ln() / gap).max(0.0)
}

/// Weighted excited-state remainder after imaginary time `t`.
pub fn tail_sum(energies: &[f64], weights: &[f64], t: f64) -> f64 {
    let e0 = energies[0];
    let w0 = weights[0];
    energies
        .iter()
        .zip(weights)
        .skip(1)
        .map(|(e, w)| (w / w0) * (-2.0 * t * (e - e0)).exp())
        .sum()
}

fn check_hamiltonian(h: &CMatrix) -> Result<CMatrix> {
    let h = linalg::hermitize(h)?;
    let norm = linalg::op_norm(&h);
    if norm > 1.0 + linalg::NORM_SLACK {
        return Err(Error::NormPromiseViolated { norm, bound: 1.0 });
    }
    Ok(h)
}

pub fn ground_state_ite(h: &CMatrix, eps: f64, seed: u64, oracle: &mut OracleAccess) -> Result<IteOutcome> {
    let n = h.nrows();
    let psi = random::unit_vector(n, &mut random::rng(seed));
    ground_state_ite_from(h, eps, &psi, oracle)
}

/// Applies `e^{-2t(I - M)} = e^{-t(I + H)}` with `M = (I - H)/2` to `start`.
pub fn ground_state_ite_from(
    h: &CMatrix,
    eps: f64,
    start: &CVector,
    oracle: &mut OracleAccess,
) -> Result<IteOutcome> {
    check_eps(eps)?;
    let h = check_hamiltonian(h)?;
    let n = h.nrows();
    if start.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "start of length {} for dimension {n}",
            start.len()
        )));
    }
    let psi = linalg::normalize(start)?;
    let (energies, vecs) = oracle.eig(&h, "spectral gap and start amplitudes")?;
    let gap = if n > 1 { energies[1] - energies[0] } else { f64::INFINITY };
    if gap < 1e-10 {
        return Err(Error::DegenerateGround { gap });
    }
    let weights: Vec<f64> = (0..n).map(|i| vecs.column(i).dotc(&psi).norm_sqr()).collect();
    if weights[0].sqrt() < 1e-12 {
        return Err(Error::ZeroOverlap);
    }
    let a = weights.iter().skip(1).fold(0.0f64, |m, w| m.max(w / weights[0]));
    let t = ite_time(gap, a, n, eps);
    let tail = tail_sum(&energies, &weights, t);

    let shifted = (linalg::identity(n) - &h).scale(0.5);
    let (op, degree) = if t == 0.0 {
        (BlockEncoding::identity(n), 0)
    } else {
        let enc = encode_psd(&shifted, eps / 4.0)?;
        let beta = 2.0 * t;
        let p = poly::exp_decay_poly(beta, eps / 4.0)?.halved();
        let scale = p.params["scale"];
        let half = poly::apply_polynomial_target(&enc, &p, |x| scale * (-beta * (1.0 - x)).exp())?;
        (encoding::amplify_auto(&half, 2.0, eps / 4.0)?, p.degree)
    };
    let post = encoding::apply_to_state_with_floor(&op, &psi, f64::MIN_POSITIVE)?;
    let b = boost(post.probability.min(1.0), eps)?;
    let ground = vecs.column(0).into_owned();
    let mut cost = post.cost.clone();
    cost.depth += b.degree as f64;
    cost.queries = cost.queries.saturating_add(b.degree as u64);
    Ok(IteOutcome {
        overlap: ground.dotc(&post.state).norm(),
        ground_energy: post.state.dotc(&(&h * &post.state)).re,
        state: post.state,
        time: t,
        a,
        gap,
        tail_sum: tail,
        success_probability: post.probability,
        boost: b,
        degree,
        cost,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyOutcome {
    pub e0: f64,
    pub e1: f64,
    pub oracle_e0: f64,
    pub oracle_e1: f64,
    pub pca: PcaOutcome,
}

pub fn ground_excited_energies(
    h: &CMatrix,
    eps: f64,
    seed: u64,
    oracle: &mut OracleAccess,
) -> Result<EnergyOutcome> {
    check_eps(eps)?;
    let h = check_hamiltonian(h)?;
    let n = h.nrows();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two levels".into()));
    }
    let (energies, _) = oracle.eig(&h, "spectral gaps for the iteration count")?;
    let g1 = 0.5 * (energies[1] - energies[0]);
    if g1 < 1e-10 {
        return Err(Error::DegenerateGround { gap: 2.0 * g1 });
    }
    let mu2 = 0.5 * (1.0 - energies[1]);
    let g2 = if n > 2 { 0.5 * (energies[2] - energies[1]) } else { mu2 };
    let gap = if g2 > 1e-8 { g1.min(g2) } else { g1 };
    let shifted = (linalg::identity(n) - &h).scale(0.5);
    let enc = encode_psd(&shifted, eps / 2.0)?;
    let cfg = PowerMethodConfig::new(gap, eps / 2.0, 2, seed);
    let pca = pca_power_top_r(&enc, &cfg, oracle)?;
    Ok(EnergyOutcome {
        e0: 1.0 - 2.0 * pca.levels[0].eigenvalue,
        e1: 1.0 - 2.0 * pca.levels[1].eigenvalue,
        oracle_e0: energies[0],
        oracle_e1: energies[1],
        pca,
    })
}
