//! Principal components by the power method with deflation, and by gradient
//! descent on the Rayleigh quotient.

use serde::{Deserialize, Serialize};

use super::{boost, check_eps, BoostReport};
use crate::encoding::{self, extract_block, BlockEncoding, ResourceCost};
use crate::error::{Error, Result, Warning};
use crate::linalg::{self, CMatrix, CVector};
use crate::oracles::OracleAccess;
use crate::random;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMethodConfig {
    pub gap_delta: f64,
    pub eps: f64,
    pub r: usize,
    pub seed: u64,
    pub k_override: Option<usize>,
}

impl PowerMethodConfig {
    pub fn new(gap_delta: f64, eps: f64, r: usize, seed: u64) -> Self {
        Self {
            gap_delta,
            eps,
            r,
            seed,
            k_override: None,
        }
    }

    pub fn iterations(&self, n: usize) -> usize {
        self.k_override
            .unwrap_or_else(|| power_iterations(self.gap_delta, n, self.eps))
    }
}

/// `k = ceil((1/Δ) ln(n/ε))`.
pub fn power_iterations(gap: f64, n: usize, eps: f64) -> usize {
    ((n as f64 / eps).ln() / gap).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenLevel {
    pub eigenvalue: f64,
    pub eigenvector: CVector,
    pub iterations: usize,
    /// `|⟨ψ, v⟩|` of the random start against the oracle eigenvector.
    pub start_overlap: f64,
    /// `ln ‖B^k ψ‖²` accumulated over the normalized iteration.
    pub log_success_probability: f64,
    pub boost: BoostReport,
    pub oracle_eigenvalue: f64,
    pub eigenvalue_error: f64,
    /// `|⟨v̂, v⟩|` against the oracle eigenvector.
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaOutcome {
    pub levels: Vec<EigenLevel>,
    pub cost: ResourceCost,
    /// Repetitions of the overlap estimate, `ceil(1/ε)`, charged analytically.
    pub swap_test_repetitions: u64,
    pub warnings: Vec<Warning>,
}

fn square_dim(enc: &BlockEncoding) -> Result<usize> {
    let (r, c) = enc.dims();
    if r != c {
        return Err(Error::DimensionMismatch(format!("expected a square block, got {r}x{c}")));
    }
    Ok(r)
}

/// Descending oracle spectrum of the encoded PSD operator.
fn reference_spectrum(c_enc: &BlockEncoding, oracle: &mut OracleAccess) -> Result<(Vec<f64>, CMatrix)> {
    let c = linalg::hermitize(&extract_block(c_enc))?;
    let (mut vals, vecs) = oracle.eig(&c, "reference eigenpairs: start overlap, gap check, deltas")?;
    if vals[0] < -1e-9 {
        return Err(Error::NotPsd {
            min_eigenvalue: vals[0],
        });
    }
    let n = vals.len();
    vals.reverse();
    let vecs = CMatrix::from_fn(n, n, |i, j| vecs[(i, n - 1 - j)]);
    Ok((vals, vecs))
}

/// Top-`r` eigenpairs of the encoded PSD operator.
pub fn pca_power_top_r(
    c_enc: &BlockEncoding,
    cfg: &PowerMethodConfig,
    oracle: &mut OracleAccess,
) -> Result<PcaOutcome> {
    let n = square_dim(c_enc)?;
    check_eps(cfg.eps)?;
    if cfg.r == 0 || cfg.r > n {
        return Err(Error::InvalidParameter(format!("r must lie in 1..={n}, got {}", cfg.r)));
    }
    if !(cfg.gap_delta > 0.0) {
        return Err(Error::NonPositiveParameter {
            name: "gap_delta".into(),
            value: cfg.gap_delta,
        });
    }
    let (ovals, ovecs) = reference_spectrum(c_enc, oracle)?;
    let mut rng = random::rng(cfg.seed);
    let mut warnings = Vec::new();
    let mut levels = Vec::with_capacity(cfg.r);
    let mut cost = ResourceCost::free();
    let mut current = c_enc.clone();
    let k = cfg.iterations(n);

    for level in 0..cfg.r {
        let v_or = ovecs.column(level).into_owned();
        let next = ovals.get(level + 1).copied().unwrap_or(0.0);
        let measured = ovals[level] - next;
        if measured < cfg.gap_delta {
            warnings.push(Warning::GapTooSmall {
                level: level + 1,
                configured: cfg.gap_delta,
                measured,
            });
        }
        if level == 0 && measured < 1e-8 {
            warnings.push(Warning::DegenerateTopEigenvalue { gap: measured });
        }

        let psi = random::unit_vector(n, &mut rng);
        let start_overlap = v_or.dotc(&psi).norm();
        if start_overlap < 1e-6 {
            return Err(Error::OverlapCollapse {
                overlap: start_overlap,
            });
        }

        let mut x = psi;
        let mut log_p = 0.0;
        for _ in 0..k {
            let y = current.block() * &x;
            let norm = y.norm();
            if norm == 0.0 {
                return Err(Error::ZeroOutcome { probability: 0.0 });
            }
            log_p += 2.0 * norm.ln();
            x = y.unscale(norm);
        }
        let op = extract_block(&current);
        let eigenvalue = x.dotc(&(&op * &x)).re;

        let b = boost(log_p.exp().min(1.0), cfg.eps)?;
        let mut pcost = current.cost().repeated(2 * k as u64);
        pcost.depth += b.degree as f64;
        pcost.queries = pcost.queries.saturating_add(b.degree as u64);
        let projector = BlockEncoding::new(&x * x.adjoint(), 1.0, 1.0 - b.factor, pcost.clone())?;
        cost = ResourceCost::sequential(&cost, &pcost);

        levels.push(EigenLevel {
            eigenvalue,
            eigenvector: x,
            iterations: k,
            start_overlap,
            log_success_probability: log_p,
            boost: b,
            oracle_eigenvalue: ovals[level],
            eigenvalue_error: (eigenvalue - ovals[level]).abs(),
            overlap: 0.0,
        });
        let lvl = levels.last_mut().expect("pushed above");
        lvl.overlap = v_or.dotc(&lvl.eigenvector).norm();

        if level + 1 < cfg.r {
            let tail = encoding::product(&current, &projector)?;
            current = encoding::linear_combination(&[(1.0, &current), (-1.0, &tail)])?;
        }
    }
    Ok(PcaOutcome {
        levels,
        cost,
        swap_test_repetitions: (1.0 / cfg.eps).ceil() as u64,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientConfig {
    pub eta: f64,
    pub steps: Option<usize>,
    pub eps: f64,
    pub seed: u64,
}

impl Default for GradientConfig {
    fn default() -> Self {
        Self {
            eta: 0.4,
            steps: None,
            eps: 1e-6,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdOutcome {
    pub eigenvector: CVector,
    pub eigenvalue: f64,
    /// Phase-aligned distance to the oracle top eigenvector, one entry per
    /// iterate starting with the initial state.
    pub residuals: Vec<f64>,
    /// `μ₂ / μ₁` of `M = (1 - 2η) I + η C`.
    pub ratio: f64,
    pub steps: usize,
    pub overlap: f64,
    pub cost: ResourceCost,
    pub warnings: Vec<Warning>,
}

/// `T = ceil(ln(1/ε) / |ln ρ|)`.
pub fn gd_steps_for(eps: f64, ratio: f64) -> usize {
    const CAP: usize = 100_000;
    let rate = ratio.ln().abs();
    if rate == 0.0 || !rate.is_finite() {
        return CAP;
    }
    ((1.0 / eps).ln() / rate).ceil().clamp(1.0, CAP as f64) as usize
}

pub fn pca_gradient_descent(
    c_enc: &BlockEncoding,
    cfg: &GradientConfig,
    oracle: &mut OracleAccess,
) -> Result<GdOutcome> {
    let n = square_dim(c_enc)?;
    let start = random::unit_vector(n, &mut random::rng(cfg.seed));
    pca_gradient_descent_from(c_enc, cfg, &start, oracle)
}

/// Iterates `X ← M X M / tr(M X M)` from the rank-one `|x₀⟩⟨x₀|`.
pub fn pca_gradient_descent_from(
    c_enc: &BlockEncoding,
    cfg: &GradientConfig,
    start: &CVector,
    oracle: &mut OracleAccess,
) -> Result<GdOutcome> {
    let n = square_dim(c_enc)?;
    check_eps(cfg.eps)?;
    if !(cfg.eta > 0.0 && cfg.eta < 0.5) {
        return Err(Error::StepSizeOutOfRange(cfg.eta));
    }
    if start.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "start of length {} for a {n}x{n} block",
            start.len()
        )));
    }
    let x0 = linalg::normalize(start)?;
    let (ovals, ovecs) = reference_spectrum(c_enc, oracle)?;
    let mut warnings = Vec::new();
    let gap = ovals[0] - ovals.get(1).copied().unwrap_or(0.0);
    if gap < 1e-8 {
        warnings.push(Warning::DegenerateTopEigenvalue { gap });
    }
    let shift = 1.0 - 2.0 * cfg.eta;
    let mu1 = shift + cfg.eta * ovals[0];
    let mu2 = shift + cfg.eta * ovals.get(1).copied().unwrap_or(0.0);
    let ratio = mu2 / mu1;
    let steps = cfg.steps.unwrap_or_else(|| gd_steps_for(cfg.eps, ratio));

    let id = BlockEncoding::identity(n);
    let m_enc = encoding::linear_combination(&[(shift, &id), (cfg.eta, c_enc)])?;
    let v1 = ovecs.column(0).into_owned();

    let readout = |x: &CMatrix| -> Result<CVector> {
        let j = (0..n)
            .max_by(|&a, &b| x.column(a).norm().total_cmp(&x.column(b).norm()))
            .unwrap_or(0);
        linalg::normalize(&x.column(j).into_owned())
    };

    let mut x = BlockEncoding::exact(&x0 * x0.adjoint())?;
    let mut residuals = Vec::with_capacity(steps + 1);
    residuals.push(linalg::aligned_distance(&x0, &v1));
    let mut v = x0;
    for _ in 0..steps {
        let left = encoding::product(&m_enc, &x)?;
        let y = encoding::product(&left, &m_enc)?;
        let next = extract_block(&y);
        let tr = next.trace().re;
        if !(tr > 0.0) {
            return Err(Error::ZeroOutcome { probability: tr.max(0.0) });
        }
        x = BlockEncoding::exact(next.unscale(tr))?;
        v = readout(x.block())?;
        residuals.push(linalg::aligned_distance(&v, &v1));
    }
    let c = extract_block(c_enc);
    let eigenvalue = v.dotc(&(&c * &v)).re;
    let overlap = v1.dotc(&v).norm();
    let cost = m_enc.cost().repeated(2 * steps as u64);
    Ok(GdOutcome {
        eigenvector: v,
        eigenvalue,
        residuals,
        ratio,
        steps,
        overlap,
        cost,
        warnings,
    })
}
