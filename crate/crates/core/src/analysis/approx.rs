use crate::decoherence::LambdaMatrix;
use crate::error::{Error, Result};
use crate::linalg::{trace_norm, CMatrix};

use super::ProcessMatrix;

fn delta_chi(pm: &ProcessMatrix, lam: &LambdaMatrix) -> Result<CMatrix> {
    let reference = pm
        .reference
        .as_ref()
        .ok_or_else(|| Error::Undefined("process matrix carries no ideal reference".into()))?;
    if lam.basis1.label() != pm.basis1.label() || lam.basis2.label() != pm.basis2.label() {
        return Err(Error::BasisMismatch {
            expected: format!("{}⊗{}", pm.basis1.label(), pm.basis2.label()),
            found: format!("{}⊗{}", lam.basis1.label(), lam.basis2.label()),
        });
    }
    Ok(&pm.chi - reference)
}

/// `ε = Tr|δχ − λ τ_g| / Tr|δχ|` with `δχ = χ − χ_ideal`.
pub fn approx_error(pm: &ProcessMatrix, lam: &LambdaMatrix, tau_g: f64) -> Result<f64> {
    let d = delta_chi(pm, lam)?;
    let den = trace_norm(&d)?;
    if den < 1e-14 {
        return Err(Error::Undefined("δχ vanishes".into()));
    }
    Ok(trace_norm(&(&d - &lam.mat.scale_real(tau_g)))? / den)
}

/// Per-element relative deviations `|δχ_mn − λ_mn τ_g| / |δχ_mn|` at the
/// requested positions.
pub fn element_deviations(
    pm: &ProcessMatrix,
    lam: &LambdaMatrix,
    tau_g: f64,
    positions: &[(usize, usize)],
) -> Result<Vec<((usize, usize), f64)>> {
    let d = delta_chi(pm, lam)?;
    positions
        .iter()
        .map(|&p| {
            let v = d[p];
            if v.norm() < 1e-300 {
                return Err(Error::Undefined(format!("δχ vanishes at {p:?}")));
            }
            Ok((p, (v - lam.mat[p] * tau_g).norm() / v.norm()))
        })
        .collect()
}
