use crate::channels::GateKind;
use crate::decoherence::LambdaMatrix;
use crate::error::{Error, Result};
use crate::linalg::{kron, partial_trace, trace_norm, CMatrix, Subsystem};

use super::ProcessMatrix;

const UNDEFINED_BELOW: f64 = 1e-14;

/// Reduced matrices `(Tr₂ M, Tr₁ M)` of a product-basis matrix.
pub fn reduced_pair(m: &CMatrix, dims: (usize, usize)) -> Result<(CMatrix, CMatrix)> {
    Ok((partial_trace(m, Subsystem::Second, dims)?, partial_trace(m, Subsystem::First, dims)?))
}

/// Product approximation `χ̃ = Tr₂χ ⊗ Tr₁χ / Tr χ`.
pub fn factorized_chi(pm: &ProcessMatrix) -> Result<CMatrix> {
    let dims = (pm.basis1.len(), pm.basis2.len());
    let (a, b) = reduced_pair(&pm.chi, dims)?;
    let tr = pm.chi.trace();
    if tr.norm() < UNDEFINED_BELOW {
        return Err(Error::Undefined("Tr χ vanishes".into()));
    }
    Ok(kron(&a, &b).scale(tr.inv()))
}

/// `ε_NL = Tr|χ − χ̃| / Tr|χ − χ_ideal|`, meaningful only when the
/// subsystems are not coupled by the Hamiltonian.
pub fn epsilon_nl(pm: &ProcessMatrix, chi_ideal: &CMatrix) -> Result<f64> {
    if let Some(g) = pm.gate {
        if g.kind != GateKind::Identity {
            return Err(Error::UnsupportedGate {
                gate: g.kind.to_string(),
                reason: "ε_NL requires uncoupled subsystems (identity gate)".into(),
            });
        }
    }
    let den = trace_norm(&(&pm.chi - chi_ideal))?;
    if den < UNDEFINED_BELOW {
        return Err(Error::Undefined("χ equals χ_ideal; no decoherence to characterize".into()));
    }
    Ok(trace_norm(&(&pm.chi - &factorized_chi(pm)?))? / den)
}

/// `λ̃ = λ̃⁽¹⁾ ⊗ χ^{I(2)} + χ^{I(1)} ⊗ λ̃⁽²⁾` with `λ̃⁽¹⁾ = Tr₂λ / Tr χ^{I(2)}`
/// and `λ̃⁽²⁾ = Tr₁λ / Tr χ^{I(1)}`.
pub fn local_part(lam: &LambdaMatrix) -> Result<CMatrix> {
    let ci1 = lam.basis1.identity_chi()?;
    let ci2 = lam.basis2.identity_chi()?;
    let (l1, l2) = reduced_pair(&lam.mat, (lam.basis1.len(), lam.basis2.len()))?;
    let l1 = l1.scale(ci2.trace().inv());
    let l2 = l2.scale(ci1.trace().inv());
    Ok(&kron(&l1, &ci2) + &kron(&ci1, &l2))
}

/// `ε′_NL = Tr|λ − λ̃| / Tr|λ|`.
pub fn epsilon_nl_prime(lam: &LambdaMatrix) -> Result<f64> {
    let den = trace_norm(&lam.mat)?;
    if den < UNDEFINED_BELOW {
        return Err(Error::Undefined("λ vanishes".into()));
    }
    Ok(trace_norm(&(&lam.mat - &local_part(lam)?))? / den)
}
