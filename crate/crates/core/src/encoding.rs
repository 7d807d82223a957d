//! Block encodings as dense top-left blocks with a resource ledger.
//!
//! A [`BlockEncoding`] stores the block `B` that a unitary carries in its
//! ancilla-zero corner, together with a subnormalization `alpha`. The operator
//! it claims to encode is `alpha * B`, approximated within `error` in operator
//! norm. `‖B‖ ≤ 1` always holds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ceil_log2, CMatrix, CVector, C64, NORM_SLACK};

/// Default probability below which a post-selected branch counts as empty.
pub const ZERO_OUTCOME_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceCost {
    pub depth: f64,
    pub ancillas: usize,
    pub queries: u64,
    pub classical_preprocessing: f64,
    pub success_probability: f64,
}

impl ResourceCost {
    pub fn free() -> Self {
        Self {
            depth: 0.0,
            ancillas: 0,
            queries: 0,
            classical_preprocessing: 0.0,
            success_probability: 1.0,
        }
    }

    pub fn unit(ancillas: usize) -> Self {
        Self {
            depth: 1.0,
            ancillas,
            queries: 1,
            ..Self::free()
        }
    }

    /// Cost of running `self` `m` times in sequence.
    pub fn repeated(&self, m: u64) -> Self {
        Self {
            depth: self.depth * m as f64,
            queries: self.queries.saturating_mul(m),
            ..self.clone()
        }
    }

    /// Cost of running `a` and then `b`.
    pub fn sequential(a: &Self, b: &Self) -> Self {
        Self {
            depth: a.depth + b.depth,
            ancillas: a.ancillas + b.ancillas,
            queries: a.queries.saturating_add(b.queries),
            classical_preprocessing: a.classical_preprocessing + b.classical_preprocessing,
            success_probability: a.success_probability * b.success_probability,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncoding {
    block: CMatrix,
    alpha: f64,
    error: f64,
    cost: ResourceCost,
}

impl BlockEncoding {
    pub fn new(block: CMatrix, alpha: f64, error: f64, cost: ResourceCost) -> Result<Self> {
        linalg::ensure_finite(&block)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(error >= 0.0) {
            return Err(Error::InvalidParameter(format!("error must be non-negative, got {error}")));
        }
        let norm = linalg::op_norm(&block);
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::NormPromiseViolated {
                norm,
                bound: 1.0,
            });
        }
        Ok(Self {
            block,
            alpha,
            error,
            cost,
        })
    }

    /// Exact encoding whose corner is `block` itself.
    pub fn exact(block: CMatrix) -> Result<Self> {
        Self::new(block, 1.0, 0.0, ResourceCost::unit(1))
    }

    /// Encodes `a` with subnormalization `alpha ≥ ‖a‖`.
    pub fn from_operator(a: &CMatrix, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Self::new(a.unscale(alpha), alpha, 0.0, ResourceCost::unit(1))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            block: linalg::identity(n),
            alpha: 1.0,
            error: 0.0,
            cost: ResourceCost::free(),
        }
    }

    pub fn block(&self) -> &CMatrix {
        &self.block
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn error(&self) -> f64 {
        self.error
    }

    pub fn cost(&self) -> &ResourceCost {
        &self.cost
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.cost.ancillas
    }

    pub fn dims(&self) -> (usize, usize) {
        self.block.shape()
    }

    pub(crate) fn with_cost(mut self, cost: ResourceCost) -> Self {
        self.cost = cost;
        self
    }

    /// Reads the same unitary as an `alpha = 1` encoding of its corner.
    pub fn into_unit_alpha(self) -> Self {
        Self {
            error: self.error / self.alpha,
            alpha: 1.0,
            ..self
        }
    }
}

/// The operator the encoding claims: `alpha * block`.
pub fn extract_block(enc: &BlockEncoding) -> CMatrix {
    enc.block.scale(enc.alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection {
    pub state: CVector,
    pub probability: f64,
    pub cost: ResourceCost,
}

pub fn apply_to_state(enc: &BlockEncoding, phi: &CVector) -> Result<PostSelection> {
    apply_to_state_with_floor(enc, phi, ZERO_OUTCOME_FLOOR)
}

/// Applies the unitary to `|0⟩|phi⟩` and post-selects the ancilla-zero branch.
pub fn apply_to_state_with_floor(
    enc: &BlockEncoding,
    phi: &CVector,
    floor: f64,
) -> Result<PostSelection> {
    if phi.len() != enc.block.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} against block with {} columns",
            phi.len(),
            enc.block.ncols()
        )));
    }
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    let out = &enc.block * phi;
    let probability = out.norm_squared();
    if probability < floor || probability == 0.0 {
        return Err(Error::ZeroOutcome { probability });
    }
    let mut cost = enc.cost.clone();
    cost.success_probability *= probability;
    Ok(PostSelection {
        state: out.unscale(probability.sqrt()),
        probability,
        cost,
    })
}

pub fn product(a: &BlockEncoding, b: &BlockEncoding) -> Result<BlockEncoding> {
    if a.block.ncols() != b.block.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "product of {:?} and {:?} blocks",
            a.dims(),
            b.dims()
        )));
    }
    let block = &a.block * &b.block;
    let error = a.alpha * b.error + b.alpha * a.error;
    let cost = ResourceCost::sequential(&a.cost, &b.cost);
    BlockEncoding::new(block, a.alpha * b.alpha, error, cost)
}

/// Weighted sum `Σ c_i A_i` through a prepare/select/unprepare circuit.
pub fn linear_combination(terms: &[(f64, &BlockEncoding)]) -> Result<BlockEncoding> {
    let (_, first) = terms.first().ok_or(Error::EmptyTermList)?;
    let dims = first.dims();
    if let Some((_, bad)) = terms.iter().find(|(_, e)| e.dims() != dims) {
        return Err(Error::DimensionMismatch(format!(
            "linear combination of {:?} and {:?} blocks",
            dims,
            bad.dims()
        )));
    }
    let s: f64 = terms.iter().map(|(ci, e)| (ci * e.alpha).abs()).sum();
    if s == 0.0 {
        return Err(Error::DegenerateCombination);
    }
    let mut block = CMatrix::zeros(dims.0, dims.1);
    for (ci, e) in terms {
        block += e.block.scale(ci * e.alpha / s);
    }
    let error = terms.iter().map(|(ci, e)| ci.abs() * e.error).sum();
    let cost = ResourceCost {
        depth: terms.iter().map(|(_, e)| e.cost.depth).sum(),
        ancillas: terms.iter().map(|(_, e)| e.cost.ancillas).max().unwrap_or(0) + ceil_log2(terms.len()),
        queries: terms.iter().map(|(_, e)| e.cost.queries).fold(0u64, u64::saturating_add),
        classical_preprocessing: terms.iter().map(|(_, e)| e.cost.classical_preprocessing).sum(),
        success_probability: terms.iter().map(|(_, e)| e.cost.success_probability).product(),
    };
    BlockEncoding::new(block, s, error, cost)
}

pub fn tensor_product(a: &BlockEncoding, b: &BlockEncoding) -> Result<BlockEncoding> {
    let block = linalg::kron(&a.block, &b.block);
    let error = a.alpha * b.error + b.alpha * a.error + a.error * b.error;
    let cost = ResourceCost {
        depth: a.cost.depth.max(b.cost.depth),
        ancillas: a.cost.ancillas + b.cost.ancillas,
        queries: a.cost.queries.saturating_add(b.cost.queries),
        classical_preprocessing: a.cost.classical_preprocessing + b.cost.classical_preprocessing,
        success_probability: a.cost.success_probability * b.cost.success_probability,
    };
    BlockEncoding::new(block, a.alpha * b.alpha, error, cost)
}

/// Encodes the operator divided by `p > 1`, using one extra ancilla.
pub fn scale_down(enc: &BlockEncoding, p: f64) -> Result<BlockEncoding> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale factor must exceed 1, got {p}")));
    }
    let mut cost = enc.cost.clone();
    cost.depth += 1.0;
    cost.ancillas += 1;
    BlockEncoding::new(enc.block.unscale(p), enc.alpha, enc.error / p, cost)
}

/// Query count of singular-value amplification by `gamma` with margin `delta`.
pub fn amplification_queries(gamma: f64, delta: f64, eps: f64) -> u64 {
    ((gamma / delta) * (gamma / eps).ln()).ceil().max(1.0) as u64
}

/// Multiplies every singular value of the block by `gamma ≥ 1`.
pub fn amplify(enc: &BlockEncoding, gamma: f64, delta: f64, eps: f64) -> Result<BlockEncoding> {
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be at least 1, got {gamma}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let sigma = linalg::op_norm(&enc.block);
    if sigma * gamma > 1.0 + NORM_SLACK {
        return Err(Error::AmplificationOverflow {
            product: sigma * gamma,
        });
    }
    let m = amplification_queries(gamma, delta, eps);
    let mut cost = enc.cost.repeated(m);
    cost.ancillas += 1;
    let error = gamma * enc.error + eps * gamma * sigma * enc.alpha;
    BlockEncoding::new(enc.block.scale(gamma), enc.alpha, error, cost)
}

/// [`amplify`] with the margin taken from the current top singular value.
pub fn amplify_auto(enc: &BlockEncoding, gamma: f64, eps: f64) -> Result<BlockEncoding> {
    let sigma = linalg::op_norm(&enc.block);
    let delta = (1.0 - gamma * sigma).clamp(1e-3, 0.5);
    amplify(enc, gamma, delta, eps)
}

/// Multiplies the block by a unit-modulus phase.
pub fn with_phase(enc: &BlockEncoding, phase: C64) -> Result<BlockEncoding> {
    if (phase.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("phase must have modulus 1, got {phase}")));
    }
    Ok(BlockEncoding {
        block: enc.block.map(|z| z * phase),
        ..enc.clone()
    })
}

/// The leading `rows x cols` corner of the block.
pub fn principal_block(enc: &BlockEncoding, rows: usize, cols: usize) -> Result<BlockEncoding> {
    let (r, c) = enc.dims();
    if rows == 0 || cols == 0 || rows > r || cols > c {
        return Err(Error::DimensionMismatch(format!(
            "corner {rows}x{cols} of a {r}x{c} block"
        )));
    }
    let mut cost = enc.cost.clone();
    if (rows, cols) != (r, c) {
        cost.ancillas += 1;
    }
    BlockEncoding::new(
        enc.block.view((0, 0), (rows, cols)).into_owned(),
        enc.alpha,
        enc.error,
        cost,
    )
}

/// Exact encoding of `|j⟩⟨j|`, `j` counted from 1.
pub fn encode_projector(j: usize, n: usize) -> Result<BlockEncoding> {
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    let mut block = CMatrix::zeros(n, n);
    block[(j - 1, j - 1)] = C64::new(1.0, 0.0);
    let q = ceil_log2(n).max(1);
    let cost = ResourceCost {
        depth: q as f64,
        ancillas: q,
        queries: 1,
        ..ResourceCost::free()
    };
    BlockEncoding::new(block, 1.0, 0.0, cost)
}

/// Exact encoding of `diag(psi)` for a unit vector `psi`.
pub fn encode_diagonal(psi: &CVector) -> Result<BlockEncoding> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    let n = psi.len();
    let q = ceil_log2(n);
    let block = CMatrix::from_diagonal(psi);
    let cost = ResourceCost {
        depth: q.max(1) as f64,
        ancillas: q + 3,
        queries: 1,
        ..ResourceCost::free()
    };
    BlockEncoding::new(block, 1.0, 0.0, cost)
}

/// Unitary `[[B, √(I-BB†)], [√(I-B†B), -B†]]` with the block in its corner.
pub fn unitary_dilation(enc: &BlockEncoding) -> Result<CMatrix> {
    let b = &enc.block;
    if !b.is_square() {
        return Err(Error::DimensionMismatch("dilation needs a square block".into()));
    }
    let n = b.nrows();
    let id = linalg::identity(n);
    let bd = b.adjoint();
    let top = linalg::psd_sqrt(&(&id - b * &bd))?;
    let bottom = linalg::psd_sqrt(&(&id - &bd * b))?;
    let mut u = CMatrix::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(b);
    u.view_mut((0, n), (n, n)).copy_from(&top);
    u.view_mut((n, 0), (n, n)).copy_from(&bottom);
    u.view_mut((n, n), (n, n)).copy_from(&(-bd));
    Ok(u)
}
