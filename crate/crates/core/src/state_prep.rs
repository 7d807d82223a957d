//! State preparation and the encodings built from prepared states.

use serde::{Deserialize, Serialize};

use crate::encoding::{self, BlockEncoding, ResourceCost};
use crate::error::{Error, Result};
use crate::linalg::{self, lg, CMatrix, CVector, C64};
use crate::poly;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedState {
    pub state: CVector,
    pub cost: ResourceCost,
}

fn nonzeros(v: &CVector) -> usize {
    v.iter().filter(|z| z.norm() != 0.0).count()
}

/// Circuit cost of loading a dense unit vector.
pub fn prepare_dense_state(amplitudes: &CVector, partition_hint: Option<usize>) -> Result<PreparedState> {
    let norm = amplitudes.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let n = amplitudes.len();
    let s = nonzeros(amplitudes);
    let cost = ResourceCost {
        depth: lg(s as f64 * lg(n as f64)),
        ancillas: s,
        queries: 1,
        classical_preprocessing: partition_hint.map(|p| p as f64).unwrap_or_else(|| lg(n as f64)),
        success_probability: 1.0,
    };
    Ok(PreparedState {
        state: amplitudes.clone(),
        cost,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorTerm {
    pub weight: f64,
    pub factors: Vec<CVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorSumSpec {
    pub terms: Vec<TensorTerm>,
}

/// Normalized `Σ α_i ψ_i1 ⊗ … ⊗ ψ_ik` from per-factor preparation circuits.
///
/// Each factor is normalized first, as its preparation unitary would.
pub fn prepare_tensor_sum(spec: &TensorSumSpec) -> Result<PreparedState> {
    let first = spec.terms.first().ok_or(Error::EmptyTermList)?;
    let k = first.factors.len();
    if k == 0 {
        return Err(Error::ProfileMismatch("terms need at least one factor".into()));
    }
    let dims: Vec<usize> = first.factors.iter().map(|f| f.len()).collect();
    let mut total_weight = 0.0;
    let mut s_max = 0;
    let mut phi: Option<CVector> = None;
    for term in &spec.terms {
        if !(term.weight > 0.0 && term.weight.is_finite()) {
            return Err(Error::NonPositiveWeight(term.weight));
        }
        let these: Vec<usize> = term.factors.iter().map(|f| f.len()).collect();
        if these != dims {
            return Err(Error::ProfileMismatch(format!("factor dims {these:?} against {dims:?}")));
        }
        let mut prod = CVector::from_element(1, C64::new(term.weight, 0.0));
        for f in &term.factors {
            s_max = s_max.max(nonzeros(f));
            let unit = linalg::normalize(f)?;
            prod = prod.kronecker(&unit);
        }
        total_weight += term.weight;
        phi = Some(match phi {
            None => prod,
            Some(acc) => acc + prod,
        });
    }
    let phi = phi.expect("at least one term");
    let norm = phi.norm();
    if norm < 1e-14 * total_weight {
        return Err(Error::ZeroVector);
    }
    let d = dims.iter().copied().max().unwrap_or(1) as f64;
    let cost = ResourceCost {
        depth: spec.terms.len() as f64 * lg(d),
        ancillas: k * s_max,
        queries: spec.terms.len() as u64,
        classical_preprocessing: lg(d),
        success_probability: (norm / total_weight).powi(2),
    };
    Ok(PreparedState {
        state: phi.unscale(norm),
        cost,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FrobeniusHandling {
    /// Encode `A / ‖A‖_F`.
    #[default]
    Keep,
    /// Amplify or scale by `‖A‖_F` to encode `A` itself.
    Remove,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnOptions {
    pub strict_psd: bool,
    pub frobenius: FrobeniusHandling,
    pub eps: f64,
    pub partition_hint: Option<usize>,
}

impl Default for ColumnOptions {
    fn default() -> Self {
        Self {
            strict_psd: true,
            frobenius: FrobeniusHandling::Keep,
            eps: 1e-6,
            partition_hint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub encoding: BlockEncoding,
    pub frobenius: f64,
    /// Condition number of the encoded matrix on its support.
    pub kappa: f64,
}

/// Partial trace of `|ψ⟩⟨ψ|` over the leading register of size `outer`.
fn trace_leading(psi: &CVector, outer: usize, inner: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(inner, inner);
    for i in 0..outer {
        let seg = psi.rows(i * inner, inner);
        rho += &seg * seg.adjoint();
    }
    rho
}

fn density_cost(prep: &ResourceCost, outer: usize) -> ResourceCost {
    ResourceCost {
        depth: 2.0 * prep.depth + 1.0,
        ancillas: prep.ancillas + linalg::ceil_log2(outer) + 1,
        queries: 2,
        classical_preprocessing: prep.classical_preprocessing,
        success_probability: 1.0,
    }
}

/// Exact encoding of `A A† / ‖A‖_F²`, the reduced state of `Σ_i |i⟩ ⊗ A^i`
/// with the column index traced out.
pub fn density_from_columns(a: &CMatrix, partition_hint: Option<usize>) -> Result<BlockEncoding> {
    let (n, m) = a.shape();
    let fro = linalg::frobenius(a);
    if fro == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    // column i sits in the leading register: psi[i * n + j] = A[j, i] / ‖A‖_F
    let psi = CVector::from_fn(n * m, |k, _| a[(k % n, k / n)] / fro);
    let prep = prepare_dense_state(&psi, partition_hint)?;
    let rho = trace_leading(&prep.state, m, n);
    BlockEncoding::new(rho, 1.0, 0.0, density_cost(&prep.cost, m))
}

/// Encodes `A / ‖A‖_F` from the state of its columns: trace out the column
/// register to get `A A† / ‖A‖_F²`, take the square root, and remove the
/// factor one half by amplification. For PSD input this is `A / ‖A‖_F`.
pub fn encode_from_columns(a: &CMatrix, opts: &ColumnOptions) -> Result<EncodedMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    linalg::ensure_finite(a)?;
    let n = a.nrows();
    let fro = linalg::frobenius(a);
    if fro == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let norm = linalg::op_norm(a);
    if norm > 1.0 + linalg::NORM_SLACK {
        return Err(Error::NormPromiseViolated { norm, bound: 1.0 });
    }
    if opts.strict_psd {
        let (vals, _) = linalg::eigh(a)?;
        if vals[0] < -1e-10 {
            return Err(Error::NotPsd {
                min_eigenvalue: vals[0],
            });
        }
    }
    let dme = density_from_columns(a, opts.partition_hint)?;
    let (vals, _) = linalg::eigh(dme.block())?;
    let top = vals.last().copied().unwrap_or(0.0);
    let low = vals
        .iter()
        .copied()
        .find(|&v| v > poly::SPECTRUM_TOL)
        .unwrap_or(top);
    let kappa_rho = 1.0 / low;
    let root = poly::positive_power(&dme, 0.5, kappa_rho, opts.eps)?;
    let mut enc = encoding::amplify_auto(&root, 2.0, opts.eps)?;
    if opts.frobenius == FrobeniusHandling::Remove {
        enc = if fro > 1.0 {
            encoding::amplify_auto(&enc, fro, opts.eps)?
        } else if fro < 1.0 {
            encoding::scale_down(&enc, 1.0 / fro)?
        } else {
            enc
        };
    }
    let kappa = (top / low).sqrt();
    let s = a.iter().filter(|z| z.norm() != 0.0).count() as f64;
    let mut cost = enc.cost().clone();
    cost.depth = fro * lg(s) * kappa * lg(kappa / opts.eps).powi(2);
    cost.classical_preprocessing = opts
        .partition_hint
        .map(|p| p as f64)
        .unwrap_or_else(|| lg((n * n) as f64));
    Ok(EncodedMatrix {
        encoding: enc.with_cost(cost),
        frobenius: fro,
        kappa,
    })
}

/// Samples as rows, one feature per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: CMatrix,
}

impl Dataset {
    pub fn new(samples: CMatrix) -> Self {
        Self { samples }
    }

    pub fn frobenius(&self) -> f64 {
        linalg::frobenius(&self.samples)
    }

    /// Rescaled so `Σ_i ‖x_i‖² = 1`, with the factor applied.
    pub fn frobenius_normalized(&self) -> Result<(Dataset, f64)> {
        let f = self.frobenius();
        if f == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        Ok((Dataset::new(self.samples.unscale(f)), 1.0 / f))
    }

    /// `(1/m) Xᵀ X̄ - μ μ†`, computed directly.
    pub fn covariance(&self) -> CMatrix {
        let m = self.samples.nrows() as f64;
        let x = &self.samples;
        let second = x.transpose() * x.map(|z| z.conj()) / C64::new(m, 0.0);
        let mu = x.row_sum().transpose() / C64::new(m, 0.0);
        second - &mu * mu.adjoint()
    }
}

/// Walsh-Hadamard transform of the sample register, zero row only.
fn hadamard_zero_row(x: &CMatrix) -> CVector {
    let m = x.nrows() as f64;
    x.row_sum().transpose() / C64::new(m.sqrt(), 0.0)
}

/// Encoding of `C / 2` with `C = (1/m) Xᵀ X̄ - μ μ†`.
pub fn build_covariance(ds: &Dataset) -> Result<BlockEncoding> {
    let (m, n) = ds.samples.shape();
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    let total = linalg::frobenius(&ds.samples);
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm: total });
    }
    let phi = CVector::from_fn(m * n, |k, _| ds.samples[(k / n, k % n)]);
    let prep = prepare_dense_state(&phi, None)?;
    let second = BlockEncoding::new(
        trace_leading(&prep.state, m, n),
        1.0,
        0.0,
        density_cost(&prep.cost, m),
    )?;
    let (second, mean) = if m > 1 {
        let s = hadamard_zero_row(&ds.samples);
        let mut hcost = density_cost(&prep.cost, m);
        hcost.depth += linalg::ceil_log2(m) as f64;
        hcost.ancillas += 1;
        let corner = BlockEncoding::new(&s * s.adjoint(), 1.0, 0.0, hcost)?;
        (
            encoding::scale_down(&second, m as f64)?,
            encoding::scale_down(&corner, m as f64)?,
        )
    } else {
        // a single sample has zero covariance
        (second.clone(), second)
    };
    let c = encoding::linear_combination(&[(1.0, &second), (-1.0, &mean)])?;
    Ok(c.into_unit_alpha())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::extract_block;
    use crate::linalg::{c, diag, max_abs_diff};

    #[test]
    fn dense_state_validation() {
        let v = CVector::from_vec(vec![c(0.6), c(0.8)]);
        assert!(prepare_dense_state(&v, None).is_ok());
        let bad = CVector::from_vec(vec![c(1.0), c(1.0)]);
        assert!(matches!(prepare_dense_state(&bad, None), Err(Error::NotNormalized { .. })));
        let z = CVector::zeros(3);
        assert_eq!(prepare_dense_state(&z, None), Err(Error::ZeroVector));
        let hinted = prepare_dense_state(&v, Some(4)).unwrap();
        assert_eq!(hinted.cost.classical_preprocessing, 4.0);
    }

    fn e(i: usize, n: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[i] = c(1.0);
        v
    }

    #[test]
    fn bell_like_tensor_sum() {
        let spec = TensorSumSpec {
            terms: vec![
                TensorTerm {
                    weight: 1.0,
                    factors: vec![e(0, 2), e(0, 2)],
                },
                TensorTerm {
                    weight: 1.0,
                    factors: vec![e(1, 2), e(1, 2)],
                },
            ],
        };
        let out = prepare_tensor_sum(&spec).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let want = CVector::from_vec(vec![c(h), c(0.0), c(0.0), c(h)]);
        assert!((out.state - want).norm() < 1e-15);
        assert!((out.cost.success_probability - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cancelling_terms() {
        let spec = TensorSumSpec {
            terms: vec![
                TensorTerm {
                    weight: 1.0,
                    factors: vec![e(0, 2)],
                },
                TensorTerm {
                    weight: 1.0,
                    factors: vec![-e(0, 2)],
                },
            ],
        };
        assert_eq!(prepare_tensor_sum(&spec), Err(Error::ZeroVector));
    }

    #[test]
    fn mismatched_profiles() {
        let spec = TensorSumSpec {
            terms: vec![
                TensorTerm {
                    weight: 1.0,
                    factors: vec![e(0, 2)],
                },
                TensorTerm {
                    weight: 1.0,
                    factors: vec![e(0, 3)],
                },
            ],
        };
        assert!(matches!(prepare_tensor_sum(&spec), Err(Error::ProfileMismatch(_))));
    }

    #[test]
    fn columns_of_identity() {
        let out = encode_from_columns(&linalg::identity(2), &ColumnOptions::default()).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!(max_abs_diff(&extract_block(&out.encoding), &diag(&[h, h])) < 1e-12);
    }

    #[test]
    fn columns_of_rank_one_projector() {
        let out = encode_from_columns(&diag(&[1.0, 0.0]), &ColumnOptions::default()).unwrap();
        assert!(max_abs_diff(&extract_block(&out.encoding), &diag(&[1.0, 0.0])) < 1e-12);
    }

    #[test]
    fn columns_errors() {
        let opts = ColumnOptions::default();
        assert_eq!(
            encode_from_columns(&CMatrix::zeros(2, 2), &opts).unwrap_err(),
            Error::ZeroMatrix
        );
        assert!(matches!(
            encode_from_columns(&diag(&[0.5, -0.5]), &opts),
            Err(Error::NotPsd { .. })
        ));
        assert!(matches!(
            encode_from_columns(&diag(&[1.5, 0.5]), &opts),
            Err(Error::NormPromiseViolated { .. })
        ));
    }

    #[test]
    fn remove_frobenius_recovers_matrix() {
        let a = diag(&[0.5, 0.3, 0.2]);
        let opts = ColumnOptions {
            frobenius: FrobeniusHandling::Remove,
            ..ColumnOptions::default()
        };
        let out = encode_from_columns(&a, &opts).unwrap();
        assert!(max_abs_diff(&extract_block(&out.encoding), &a) < 1e-12);
    }

    #[test]
    fn two_sample_covariance() {
        let h = 1.0 / 2f64.sqrt();
        let x = CMatrix::from_row_slice(2, 2, &[c(h), c(0.0), c(0.0), c(h)]);
        let enc = build_covariance(&Dataset::new(x)).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[c(1.0), c(-1.0), c(-1.0), c(1.0)]).scale(1.0 / 8.0);
        assert!(max_abs_diff(&extract_block(&enc).scale(2.0), &want) < 1e-15);
    }

    #[test]
    fn covariance_requires_power_of_two() {
        let x = CMatrix::from_element(3, 2, c(1.0 / 6f64.sqrt()));
        assert_eq!(build_covariance(&Dataset::new(x)), Err(Error::NotPowerOfTwo(3)));
    }
}
