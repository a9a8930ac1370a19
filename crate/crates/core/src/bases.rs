//! Operator bases, index packings and the reorderings that take a
//! superoperator to a process matrix.
//!
//! Index conventions: a pair of indices over a `d`-level system packs as
//! `⟨ij⟩ = d·i + j`. For a bipartite system with factor dimensions
//! `(d1, d2)` there are two four-index packings, see [`IndexConvention`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, inverse, kron, paulis, solve, CMatrix, C64, EXACT_ZERO_TOL};

/// Index packings for a bipartite system with factor dimensions `d1`, `d2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexConvention {
    pub d1: usize,
    pub d2: usize,
}

impl IndexConvention {
    pub const TWO_QUBITS: IndexConvention = IndexConvention { d1: 2, d2: 2 };

    pub fn new(d1: usize, d2: usize) -> Self {
        Self { d1, d2 }
    }

    /// Dimension of the joint Hilbert space.
    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    /// Size of the superoperator / process-matrix index range.
    pub fn super_dim(&self) -> usize {
        self.dim() * self.dim()
    }

    /// `⟨ij⟩ = d·i + j`.
    #[inline]
    pub fn pair(d: usize, i: usize, j: usize) -> usize {
        d * i + j
    }

    /// `⟨i1 j1 i2 j2⟩ = i1·d1·d2² + j1·d2² + i2·d2 + j2`, i.e. the pair
    /// `(⟨i1 j1⟩, ⟨i2 j2⟩)` in product ordering.
    #[inline]
    pub fn split(&self, i1: usize, j1: usize, i2: usize, j2: usize) -> usize {
        let (d1, d2) = (self.d1, self.d2);
        i1 * d1 * d2 * d2 + j1 * d2 * d2 + i2 * d2 + j2
    }

    /// `⟨i1 i2 j1 j2⟩ = i1·d1·d2² + i2·d1·d2 + j1·d2 + j2`, i.e. the pair
    /// `(⟨i1 i2⟩, ⟨j1 j2⟩)` over the joint space.
    #[inline]
    pub fn joint(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> usize {
        let (d1, d2) = (self.d1, self.d2);
        i1 * d1 * d2 * d2 + i2 * d1 * d2 + j1 * d2 + j2
    }

    /// All `(a1, b1, a2, b2)` with `a1, b1 < d1` and `a2, b2 < d2`.
    pub fn quadruples(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> {
        let (d1, d2) = (self.d1, self.d2);
        (0..d1).flat_map(move |a1| {
            (0..d1).flat_map(move |b1| {
                (0..d2).flat_map(move |a2| (0..d2).map(move |b2| (a1, b1, a2, b2)))
            })
        })
    }
}

/// Named basis families understood by the document formats and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisId {
    /// Products of `{I, X, Y, Z}`, `Tr(E_n† E_m) = d δ_nm`.
    Pauli,
    /// Pauli with `Y → -iY`.
    ModifiedPauli,
    /// Matrix units `|i⟩⟨j|`, orthonormal.
    Elementary,
}

impl BasisId {
    pub fn single_qubit(self) -> OperatorBasis {
        match self {
            BasisId::Pauli => pauli_basis_1q(),
            BasisId::ModifiedPauli => modified_pauli_basis_1q(),
            BasisId::Elementary => elementary_basis(2),
        }
    }

    pub fn two_qubit(self) -> OperatorBasis {
        let b = self.single_qubit();
        OperatorBasis::product(&b, &b)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BasisId::Pauli => "pauli",
            BasisId::ModifiedPauli => "modified_pauli",
            BasisId::Elementary => "elementary",
        }
    }
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BasisId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pauli" => Ok(BasisId::Pauli),
            "modified_pauli" => Ok(BasisId::ModifiedPauli),
            "elementary" => Ok(BasisId::Elementary),
            other => Err(Error::Unknown { kind: "basis".into(), name: other.into() }),
        }
    }
}

/// Ordered set of `d²` linearly independent `d x d` operators.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    label: String,
    dim: usize,
    ops: Vec<CMatrix>,
    norm: f64,
    orthogonal: bool,
}

impl OperatorBasis {
    /// Builds a basis and detects orthogonality: when the Gram matrix equals
    /// `Q·I` to 1e-12 the basis is flagged orthogonal with normalization `Q`.
    pub fn new(label: impl Into<String>, ops: Vec<CMatrix>) -> Result<Self> {
        let label = label.into();
        let dim = ops.first().map_or(0, |m| m.rows());
        if dim == 0 || ops.len() != dim * dim {
            return Err(Error::invalid(
                "basis",
                format!("need d² operators of size d x d, got {} operators of size {dim}", ops.len()),
            ));
        }
        if ops.iter().any(|m| m.rows() != dim || m.cols() != dim) {
            return Err(Error::invalid("basis", "operators must all be d x d"));
        }
        let mut basis = Self { label, dim, ops, norm: 1.0, orthogonal: false };
        let e = basis.ebold();
        if inverse(&e).is_err() {
            return Err(Error::invalid(basis.label.clone(), "operators are linearly dependent"));
        }
        let gram = basis.gram();
        let q = gram[(0, 0)].re;
        let target = CMatrix::identity(gram.rows()).scale_real(q);
        if q > 0.0 && gram.max_abs_diff(&target) <= EXACT_ZERO_TOL * q.max(1.0) {
            basis.norm = q;
            basis.orthogonal = true;
        }
        Ok(basis)
    }

    /// Product basis `E_{⟨n1 n2⟩} = E1_{n1} ⊗ E2_{n2}`.
    pub fn product(b1: &OperatorBasis, b2: &OperatorBasis) -> OperatorBasis {
        let mut ops = Vec::with_capacity(b1.ops.len() * b2.ops.len());
        for e1 in &b1.ops {
            for e2 in &b2.ops {
                ops.push(kron(e1, e2));
            }
        }
        let orthogonal = b1.orthogonal && b2.orthogonal;
        OperatorBasis {
            label: format!("{}⊗{}", b1.label, b2.label),
            dim: b1.dim * b2.dim,
            ops,
            norm: if orthogonal { b1.norm * b2.norm } else { 1.0 },
            orthogonal,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn op(&self, n: usize) -> &CMatrix {
        &self.ops[n]
    }

    /// Normalization `Q` in `Tr(E_n† E_m) = Q δ_nm`; meaningful only when
    /// [`OperatorBasis::is_orthogonal`].
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn gram(&self) -> CMatrix {
        let e = self.ebold();
        &e.adjoint() * &e
    }

    /// Column `n` holds the row-major vectorization of `E_n`.
    pub fn ebold(&self) -> CMatrix {
        ebold_matrix(self)
    }

    fn require_orthogonal(&self) -> Result<()> {
        if self.orthogonal {
            Ok(())
        } else {
            Err(Error::NonOrthogonalBasis(self.label.clone()))
        }
    }

    /// Expansion coefficients `k_n = Tr(E_n† K)/Q` of an operator.
    pub fn coefficients(&self, k: &CMatrix) -> Result<Vec<C64>> {
        self.require_orthogonal()?;
        if k.rows() != self.dim || k.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0} operator", self.dim),
                found: format!("{}x{}", k.rows(), k.cols()),
            });
        }
        Ok(self.ops.iter().map(|e| hs_inner(e, k) / self.norm).collect())
    }

    /// Process matrix of the identity map, `χ^I_mn = (Tr E_m)* Tr E_n / Q²`.
    pub fn identity_chi(&self) -> Result<CMatrix> {
        self.require_orthogonal()?;
        let tr: Vec<C64> = self.ops.iter().map(|e| e.trace()).collect();
        let q2 = self.norm * self.norm;
        Ok(CMatrix::from_fn(self.len(), self.len(), |m, n| tr[m].conj() * tr[n] / q2))
    }
}

/// Hilbert–Schmidt inner product `Tr(A† B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn pauli_basis_1q() -> OperatorBasis {
    OperatorBasis::new("pauli", paulis().to_vec()).expect("Pauli matrices form a basis")
}

/// Two-qubit Pauli basis in base-4 order `{I⊗I, I⊗X, …, Z⊗Z}`, `Q = 4`.
pub fn pauli_basis_2q() -> OperatorBasis {
    let p = pauli_basis_1q();
    OperatorBasis::product(&p, &p)
}

/// `{I, X, -iY, Z}`.
pub fn modified_pauli_basis_1q() -> OperatorBasis {
    let [i, x, y, z] = paulis();
    OperatorBasis::new("modified_pauli", vec![i, x, y.scale(c(0.0, -1.0)), z])
        .expect("modified Pauli matrices form a basis")
}

pub fn modified_pauli_basis_2q() -> OperatorBasis {
    let p = modified_pauli_basis_1q();
    OperatorBasis::product(&p, &p)
}

/// Matrix units `F_{⟨ij⟩} = |i⟩⟨j|`, orthonormal (`Q = 1`).
pub fn elementary_basis(d: usize) -> OperatorBasis {
    assert!(d >= 2, "elementary basis needs d >= 2");
    let ops = (0..d * d)
        .map(|n| {
            let mut m = CMatrix::zeros(d, d);
            m[(n / d, n % d)] = c(1.0, 0.0);
            m
        })
        .collect();
    OperatorBasis::new("elementary", ops).expect("matrix units form a basis")
}

/// `𝑬_{⟨ij⟩ n} = (E_n)_{ij}`.
pub fn ebold_matrix(basis: &OperatorBasis) -> CMatrix {
    let d = basis.dim;
    CMatrix::from_fn(d * d, basis.ops.len(), |row, n| basis.ops[n][(row / d, row % d)])
}

fn require_dim(m: &CMatrix, n: usize, what: &str) -> Result<()> {
    if m.rows() == n && m.cols() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: format!("{n}x{n} {what}"),
            found: format!("{}x{}", m.rows(), m.cols()),
        })
    }
}

/// `J_{⟨ij⟩⟨kl⟩} = 𝓛_{⟨ik⟩⟨jl⟩}` for a `d`-level system.
pub fn reorder_l_to_j(l: &CMatrix, d: usize) -> Result<CMatrix> {
    require_dim(l, d * d, "superoperator")?;
    let mut j_mat = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for m in 0..d {
                    j_mat[(d * i + j, d * k + m)] = l[(d * i + k, d * j + m)];
                }
            }
        }
    }
    Ok(j_mat)
}

/// `J̃_{⟨i1 k1 i2 k2⟩⟨j1 l1 j2 l2⟩} = 𝓛_{⟨i1 i2 j1 j2⟩⟨k1 k2 l1 l2⟩}`.
///
/// The same reordering takes a decoherence generator `𝑳` to `ν`.
pub fn reorder_l_to_jtilde(l: &CMatrix, conv: IndexConvention) -> Result<CMatrix> {
    let n = conv.super_dim();
    require_dim(l, n, "superoperator")?;
    let mut jt = CMatrix::zeros(n, n);
    for (i1, k1, i2, k2) in conv.quadruples() {
        let row = conv.split(i1, k1, i2, k2);
        for (j1, l1, j2, l2) in conv.quadruples() {
            let col = conv.split(j1, l1, j2, l2);
            jt[(row, col)] = l[(conv.joint(i1, i2, j1, j2), conv.joint(k1, k2, l1, l2))];
        }
    }
    Ok(jt)
}

/// `χ = (Q1 Q2)⁻² (𝑬1† ⊗ 𝑬2†) J̃ (𝑬1 ⊗ 𝑬2)` for orthogonal factor bases.
pub fn chi_from_jtilde(jt: &CMatrix, b1: &OperatorBasis, b2: &OperatorBasis) -> Result<CMatrix> {
    b1.require_orthogonal()?;
    b2.require_orthogonal()?;
    require_dim(jt, b1.len() * b2.len(), "J̃ matrix")?;
    let e = kron(&b1.ebold(), &b2.ebold());
    let q = b1.norm * b2.norm;
    Ok((&(&e.adjoint() * jt) * &e).scale_real(1.0 / (q * q)))
}

/// Inverse of [`reorder_l_to_jtilde`].
pub fn reorder_jtilde_to_l(jt: &CMatrix, conv: IndexConvention) -> Result<CMatrix> {
    let n = conv.super_dim();
    require_dim(jt, n, "J̃ matrix")?;
    let mut l = CMatrix::zeros(n, n);
    for (i1, k1, i2, k2) in conv.quadruples() {
        let row = conv.split(i1, k1, i2, k2);
        for (j1, l1, j2, l2) in conv.quadruples() {
            let col = conv.split(j1, l1, j2, l2);
            l[(conv.joint(i1, i2, j1, j2), conv.joint(k1, k2, l1, l2))] = jt[(row, col)];
        }
    }
    Ok(l)
}

/// Inverse of [`chi_from_jtilde`]: `J̃ = (𝑬1 ⊗ 𝑬2) χ (𝑬1 ⊗ 𝑬2)†`.
pub fn jtilde_from_chi(chi: &CMatrix, b1: &OperatorBasis, b2: &OperatorBasis) -> Result<CMatrix> {
    b1.require_orthogonal()?;
    b2.require_orthogonal()?;
    require_dim(chi, b1.len() * b2.len(), "process matrix")?;
    let e = kron(&b1.ebold(), &b2.ebold());
    Ok(&(&e * chi) * &e.adjoint())
}

/// General single-system conversion `χ = 𝑬⁻¹ J (𝑬⁻¹)†`, valid for any
/// (possibly oblique) basis with `d ≤ 4`.
pub fn chi_from_j_general(j: &CMatrix, basis: &OperatorBasis) -> Result<CMatrix> {
    if basis.dim > 4 {
        return Err(Error::invalid(
            "basis",
            format!("general conversion is limited to d ≤ 4, got d = {}", basis.dim),
        ));
    }
    require_dim(j, basis.len(), "J matrix")?;
    let einv = inverse(&basis.ebold())?;
    Ok(&(&einv * j) * &einv.adjoint())
}

/// `χ' = V χ V†` for the change of basis `from → to`, where
/// `E_n = Σ_{n'} V_{n'n} E'_{n'}`.
pub fn basis_change(chi: &CMatrix, from: &OperatorBasis, to: &OperatorBasis) -> Result<CMatrix> {
    let v = basis_transform(from, to)?;
    require_dim(chi, v.cols(), "process matrix")?;
    Ok(&(&v * chi) * &v.adjoint())
}

/// Transformation matrix `V` with `E_n = Σ_{n'} V_{n'n} E'_{n'}`.
/// For an orthogonal target `V_{nm} = Tr(E'_n† E_m)/Q'`.
pub fn basis_transform(from: &OperatorBasis, to: &OperatorBasis) -> Result<CMatrix> {
    if from.dim != to.dim {
        return Err(Error::DimensionMismatch {
            expected: format!("bases over dimension {}", from.dim),
            found: format!("dimension {}", to.dim),
        });
    }
    if to.orthogonal {
        let n = to.len();
        let v = CMatrix::from_fn(n, n, |a, b| hs_inner(&to.ops[a], &from.ops[b]) / to.norm);
        if inverse(&v).is_err() {
            return Err(Error::Singular);
        }
        Ok(v)
    } else {
        solve(&to.ebold(), &from.ebold())
    }
}
