//! Schrödinger dynamics as one global linear system from a multistep scheme.
//!
//! Unknowns are `ψ_0, …, ψ_N` stacked in order. Row block 0 pins `ψ_0`; row
//! block `j ≥ 1` is forward Euler for `j = 1`, the central difference around
//! `j - 1` while `j < 2K`, and the order-`K` table around `j - K` after that.

use serde::{Deserialize, Serialize};

use super::check_eps;
use super::solver::{linear_solve, SolveConfig, SolveOutcome};
use crate::encoding::ResourceCost;
use crate::error::{Error, Result, Warning};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::oracles::OracleAccess;

/// Coefficients of `Σ α_l ψ_{c+l} + iΔ Σ β_l H_{c+l} ψ_{c+l} = 0` for `l ∈ [-K, K]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistepTable {
    pub k: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub declared_order: usize,
    pub measured_order: usize,
}

/// Largest `p` with `Σ α_l l^q = q Σ β_l l^{q-1}` for all `q ≤ p`.
pub fn consistency_order(alpha: &[f64], beta: &[f64]) -> Option<usize> {
    let k = (alpha.len() as i64 - 1) / 2;
    let ls: Vec<f64> = (-k..=k).map(|l| l as f64).collect();
    let cond = |q: i32| {
        let lhs: f64 = alpha.iter().zip(&ls).map(|(a, l)| a * l.powi(q)).sum();
        let rhs: f64 = if q == 0 {
            0.0
        } else {
            q as f64 * beta.iter().zip(&ls).map(|(b, l)| b * l.powi(q - 1)).sum::<f64>()
        };
        let scale = 1.0 + alpha.iter().map(|a| a.abs()).sum::<f64>() * (k.max(1) as f64).powi(q);
        (lhs - rhs).abs() <= 1e-10 * scale
    };
    if !cond(0) {
        return None;
    }
    let mut p = 0;
    while p < 16 && cond(p as i32 + 1) {
        p += 1;
    }
    Some(p)
}

/// Central difference for `K = 1` and Adams-Moulton tables spanning `2K`
/// steps for `K = 2, 3`.
pub fn multistep_table(k: usize) -> Result<MultistepTable> {
    let (alpha, beta, declared): (Vec<f64>, Vec<f64>, usize) = match k {
        1 => (vec![-1.0, 0.0, 1.0], vec![0.0, 2.0, 0.0], 2),
        2 => {
            let b = [-19.0, 106.0, -264.0, 646.0, 251.0];
            (vec![0.0, 0.0, 0.0, -1.0, 1.0], b.iter().map(|v| v / 720.0).collect(), 5)
        }
        3 => {
            let b = [-863.0, 6312.0, -20211.0, 37504.0, -46461.0, 65112.0, 19087.0];
            (
                vec![0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0],
                b.iter().map(|v| v / 60480.0).collect(),
                7,
            )
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "multistep order must be 1, 2 or 3, got {k}"
            )))
        }
    };
    let measured = consistency_order(&alpha, &beta).unwrap_or(0);
    Ok(MultistepTable {
        k,
        alpha,
        beta,
        declared_order: declared,
        measured_order: measured,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Hamiltonian {
    Constant(CMatrix),
    /// `H(kΔ)` for `k = 0..=N`.
    Schedule(Vec<CMatrix>),
}

impl Hamiltonian {
    fn dim(&self) -> Result<usize> {
        match self {
            Hamiltonian::Constant(h) => Ok(h.nrows()),
            Hamiltonian::Schedule(hs) => hs
                .first()
                .map(|h| h.nrows())
                .ok_or_else(|| Error::InvalidParameter("empty schedule".into())),
        }
    }

    fn at(&self, k: usize) -> &CMatrix {
        match self {
            Hamiltonian::Constant(h) => h,
            Hamiltonian::Schedule(hs) => &hs[k.min(hs.len() - 1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSpec {
    pub hamiltonian: Hamiltonian,
    pub psi0: CVector,
    pub t: f64,
    pub order_k: usize,
    /// Defaults to [`default_steps`].
    pub steps: Option<usize>,
}

/// `N = ceil(t^{1 + 1/K} / ε^{1/K})`.
pub fn default_steps(t: f64, eps: f64, k: usize) -> usize {
    let k = k as f64;
    (t.abs().powf(1.0 + 1.0 / k) / eps.powf(1.0 / k)).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSystem {
    pub matrix: CMatrix,
    pub rhs: CVector,
    pub dim: usize,
    pub steps: usize,
    pub dt: f64,
    pub table: MultistepTable,
    pub warnings: Vec<Warning>,
}

impl OdeSystem {
    /// Measured `κ` of the assembled system.
    pub fn condition_number(&self, oracle: &mut OracleAccess) -> Result<f64> {
        oracle.condition_number(&self.matrix, "condition number of the multistep system")
    }

    /// Splits a stacked solution into its per-step blocks.
    pub fn blocks(&self, x: &CVector) -> Vec<CVector> {
        (0..=self.steps)
            .map(|k| x.rows(k * self.dim, self.dim).into_owned())
            .collect()
    }
}

pub fn build_ode_system(spec: &OdeSpec) -> Result<OdeSystem> {
    let n = spec.hamiltonian.dim()?;
    let steps = spec
        .steps
        .ok_or_else(|| Error::InvalidParameter("step count must be set to build the system".into()))?;
    if steps == 0 {
        return Err(Error::InvalidParameter("step count must be at least 1".into()));
    }
    if !(spec.t > 0.0 && spec.t.is_finite()) {
        return Err(Error::NonPositiveParameter {
            name: "t".into(),
            value: spec.t,
        });
    }
    if spec.psi0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "initial state of length {} for dimension {n}",
            spec.psi0.len()
        )));
    }
    if let Hamiltonian::Schedule(hs) = &spec.hamiltonian {
        if hs.len() != steps + 1 {
            return Err(Error::DimensionMismatch(format!(
                "schedule has {} entries for {steps} steps",
                hs.len()
            )));
        }
    }
    match &spec.hamiltonian {
        Hamiltonian::Constant(h) => {
            linalg::hermitize(h)?;
        }
        Hamiltonian::Schedule(hs) => {
            for h in hs {
                if h.shape() != (n, n) {
                    return Err(Error::DimensionMismatch("schedule entries differ in shape".into()));
                }
                linalg::hermitize(h)?;
            }
        }
    }
    let table = multistep_table(spec.order_k)?;
    let mut warnings = Vec::new();
    if table.measured_order != table.declared_order {
        warnings.push(Warning::InvalidCoefficients {
            declared_order: table.declared_order,
            measured_order: table.measured_order,
        });
    }
    let dt = spec.t / steps as f64;
    let dim = n * (steps + 1);
    let mut a = CMatrix::zeros(dim, dim);
    let idt = C64::new(0.0, dt);

    // adds coef * ψ_col + (i Δ h) * ψ_col into row block `row`
    let mut put = |row: usize, col: usize, alpha: f64, beta: f64| {
        let h = spec.hamiltonian.at(col);
        for i in 0..n {
            a[(row * n + i, col * n + i)] += C64::new(alpha, 0.0);
            if beta != 0.0 {
                for j in 0..n {
                    a[(row * n + i, col * n + j)] += idt * beta * h[(i, j)];
                }
            }
        }
    };
    put(0, 0, 1.0, 0.0);
    let k = spec.order_k;
    for j in 1..=steps {
        if j == 1 {
            put(1, 1, 1.0, 0.0);
            put(1, 0, -1.0, 1.0);
        } else if j < 2 * k {
            put(j, j, 1.0, 0.0);
            put(j, j - 1, 0.0, 2.0);
            put(j, j - 2, -1.0, 0.0);
        } else {
            let c = j - k;
            for (idx, (&al, &be)) in table.alpha.iter().zip(&table.beta).enumerate() {
                if al != 0.0 || be != 0.0 {
                    put(j, c + idx - k, al, be);
                }
            }
        }
    }
    let mut rhs = CVector::zeros(dim);
    rhs.rows_mut(0, n).copy_from(&spec.psi0);
    Ok(OdeSystem {
        matrix: a,
        rhs,
        dim: n,
        steps,
        dt,
        table,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeOutcome {
    /// Normalized `ψ_k` for `k = 0..=N`.
    pub states: Vec<CVector>,
    pub steps: usize,
    pub dt: f64,
    pub kappa: f64,
    /// `|⟨ψ_k, ψ(kΔ)⟩|` per step against the oracle propagator.
    pub fidelities: Vec<f64>,
    pub solve_fidelity: f64,
    pub success_probability: f64,
    pub cost: ResourceCost,
    pub warnings: Vec<Warning>,
}

/// Exact step propagators: `exp(-iHkΔ)ψ_0` for constant `H`, otherwise the
/// ordered product of midpoint steps.
fn reference_states(spec: &OdeSpec, steps: usize, dt: f64, oracle: &mut OracleAccess) -> Result<Vec<CVector>> {
    let psi0 = linalg::normalize(&spec.psi0)?;
    let mut out = vec![psi0.clone()];
    match &spec.hamiltonian {
        Hamiltonian::Constant(h) => {
            let u = oracle.expm(&linalg::hermitize(h)?, dt, "reference step propagator")?;
            let mut cur = psi0;
            for _ in 0..steps {
                cur = &u * cur;
                out.push(cur.clone());
            }
        }
        Hamiltonian::Schedule(hs) => {
            let mut cur = psi0;
            for k in 0..steps {
                let mid = linalg::hermitize(&(&hs[k] + &hs[k + 1]).scale(0.5))?;
                let u = oracle.expm(&mid, dt, "reference step propagator")?;
                cur = &u * cur;
                out.push(cur.clone());
            }
        }
    }
    Ok(out)
}

/// Solves the multistep system through the Hermitian embedding
/// `[[0, S], [S†, 0]] (u, v) = (b, 0)` with `S` the system scaled below unit norm.
pub fn simulate_via_linear_solve(spec: &OdeSpec, eps: f64, oracle: &mut OracleAccess) -> Result<OdeOutcome> {
    check_eps(eps)?;
    let steps = spec
        .steps
        .unwrap_or_else(|| default_steps(spec.t, eps, spec.order_k));
    let spec_n = OdeSpec {
        steps: Some(steps),
        ..spec.clone()
    };
    let sys = build_ode_system(&spec_n)?;
    let dim = sys.matrix.nrows();
    let s = sys.matrix.unscale(1.01 * linalg::op_norm(&sys.matrix));
    let mut herm = CMatrix::zeros(2 * dim, 2 * dim);
    herm.view_mut((0, dim), (dim, dim)).copy_from(&s);
    herm.view_mut((dim, 0), (dim, dim)).copy_from(&s.adjoint());
    let mut rhs = CVector::zeros(2 * dim);
    rhs.rows_mut(0, dim).copy_from(&sys.rhs);

    let cfg = SolveConfig {
        eps,
        ..SolveConfig::default()
    };
    let SolveOutcome {
        solution,
        kappa,
        fidelity,
        success_probability,
        cost,
        ..
    } = linear_solve(&herm, &rhs, &cfg, oracle)?;
    let lower = solution.rows(dim, dim).into_owned();
    let states: Vec<CVector> = sys
        .blocks(&lower)
        .iter()
        .map(linalg::normalize)
        .collect::<Result<_>>()?;
    let reference = reference_states(&spec_n, steps, sys.dt, oracle)?;
    let fidelities = states
        .iter()
        .zip(&reference)
        .map(|(a, b)| linalg::fidelity(a, b))
        .collect();
    Ok(OdeOutcome {
        states,
        steps,
        dt: sys.dt,
        kappa,
        fidelities,
        solve_fidelity: fidelity,
        success_probability,
        cost,
        warnings: sys.warnings,
    })
}
