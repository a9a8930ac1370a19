use serde::{Deserialize, Serialize};

use crate::bases::{BasisId, OperatorBasis};
use crate::channels::GateSpec;
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, CMatrix};

/// Physicality figures of a process matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub trace_re: f64,
    pub trace_im: f64,
    pub hermiticity_residual: f64,
    /// Smallest eigenvalue of the Hermitian part; negative values signal a
    /// map that is not completely positive.
    pub min_eigenvalue: f64,
    /// Largest mismatch between the reconstructed map and the data it was
    /// reconstructed from, when it came out of tomography.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linearity_residual: Option<f64>,
}

/// A χ-matrix in a product basis, optionally tagged with the gate it
/// describes and a reference (ideal) χ.
#[derive(Clone, Debug)]
pub struct ProcessMatrix {
    pub chi: CMatrix,
    pub basis1: OperatorBasis,
    pub basis2: OperatorBasis,
    pub gate: Option<GateSpec>,
    pub reference: Option<CMatrix>,
    pub diagnostics: Diagnostics,
}

impl ProcessMatrix {
    pub fn new(chi: CMatrix, basis1: OperatorBasis, basis2: OperatorBasis) -> Result<Self> {
        let n = basis1.len() * basis2.len();
        if chi.rows() != n || chi.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n} process matrix"),
                found: format!("{}x{}", chi.rows(), chi.cols()),
            });
        }
        if chi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let tr = chi.trace();
        let diagnostics = Diagnostics {
            trace_re: tr.re,
            trace_im: tr.im,
            hermiticity_residual: chi.hermiticity_residual(),
            min_eigenvalue: min_eigenvalue(&chi.hermitian_part())?,
            linearity_residual: None,
        };
        Ok(ProcessMatrix { chi, basis1, basis2, gate: None, reference: None, diagnostics })
    }

    pub fn pauli(chi: CMatrix) -> Result<Self> {
        let p = BasisId::Pauli.single_qubit();
        Self::new(chi, p.clone(), p)
    }

    pub fn with_gate(mut self, gate: GateSpec) -> Self {
        self.gate = Some(gate);
        self
    }

    pub fn with_reference(mut self, reference: CMatrix) -> Self {
        self.reference = Some(reference);
        self
    }

    /// Named basis family when both factors are the same known basis.
    pub fn basis_id(&self) -> Option<BasisId> {
        let id: BasisId = self.basis1.label().parse().ok()?;
        (self.basis2.label() == self.basis1.label()).then_some(id)
    }

    pub fn is_pauli(&self) -> bool {
        self.basis_id() == Some(BasisId::Pauli)
    }

    /// Upper bound of `Tr χ` for a trace-nonincreasing map, `d / Q`.
    pub fn trace_bound(&self) -> f64 {
        let d = (self.basis1.dim() * self.basis2.dim()) as f64;
        d / (self.basis1.norm() * self.basis2.norm())
    }

    /// Hermiticity and `Tr χ ≤ d/Q` to a relative tolerance.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let scale = self.chi.max_abs().max(1.0);
        if self.diagnostics.hermiticity_residual > tol * scale {
            return Err(Error::NotHermitian { residual: self.diagnostics.hermiticity_residual });
        }
        let bound = self.trace_bound();
        if self.diagnostics.trace_re > bound * (1.0 + tol) {
            return Err(Error::Inconsistent(format!(
                "Tr χ = {:.12} exceeds the trace-nonincreasing bound {bound}",
                self.diagnostics.trace_re
            )));
        }
        Ok(())
    }

    /// Complete positivity to `tol` on the smallest eigenvalue.
    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.diagnostics.min_eigenvalue >= -tol
    }
}
