//! `exp(-iHt)` from the Jacobi-Anger expansion applied to an encoded `H`.

use super::{check_eps, encode_hermitian};
use crate::encoding::{self, extract_block, BlockEncoding};
use crate::error::{Error, Result, Warning};
use crate::linalg::{self, CMatrix, C64};
use crate::oracles::OracleAccess;
use crate::poly;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub unitary: BlockEncoding,
    pub degree: usize,
    pub sup_error: f64,
    /// `‖H‖` when it exceeded one, else one.
    pub rescale: f64,
    pub effective_time: f64,
    /// `‖extract - expm(H, t)‖` against the oracle.
    pub oracle_error: f64,
    pub warnings: Vec<Warning>,
}

pub fn simulate_direct(
    h: &CMatrix,
    t: f64,
    eps: f64,
    oracle: &mut OracleAccess,
) -> Result<SimulationOutcome> {
    check_eps(eps)?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let h = linalg::hermitize(h)?;
    let n = h.nrows();
    let norm = linalg::op_norm(&h);
    let mut warnings = Vec::new();
    let rescale = if norm > 1.0 { norm } else { 1.0 };
    if rescale > 1.0 {
        warnings.push(Warning::Rescaled {
            what: "hamiltonian".into(),
            factor: 1.0 / rescale,
        });
    }
    let hs = h.unscale(rescale);
    let ts = t * rescale;

    let (unitary, degree, sup_error) = if ts == 0.0 || norm == 0.0 {
        (BlockEncoding::identity(n), 0, 0.0)
    } else {
        let enc = encode_hermitian(&hs, eps / 4.0)?;
        let ja = poly::jacobi_anger_poly(ts, eps / 4.0)?;
        let cos = poly::apply_polynomial(&enc, &ja.cos.halved())?;
        let sin = poly::apply_polynomial(&enc, &ja.sin.halved())?;
        let sin = encoding::with_phase(&sin, C64::new(0.0, -1.0))?;
        let sum = encoding::linear_combination(&[(1.0, &cos), (1.0, &sin)])?.into_unit_alpha();
        let u = encoding::amplify_auto(&sum, 4.0, eps / 4.0)?;
        (u, ja.degree, ja.sup_error)
    };
    let exact = oracle.expm(&h, t, "reference propagator")?;
    let oracle_error = linalg::op_norm(&(extract_block(&unitary) - exact));
    Ok(SimulationOutcome {
        unitary,
        degree,
        sup_error,
        rescale,
        effective_time: ts,
        oracle_error,
        warnings,
    })
}
