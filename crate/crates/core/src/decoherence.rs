//! Markovian decoherence generators for two qubits and their λ-matrices.
//!
//! All generators are 16x16 matrices acting on row-major vectorized density
//! matrices, `ρ̇ = 𝑳 ρ`, in the computational basis `|j1 j2⟩` with
//! `j = 2 j1 + j2` (qubit 1 is the most significant tensor factor). Rates
//! are in 1/s.
//!
//! The noise correlation times of the correlated-dephasing and
//! noisy-coupling models only enter through their validity conditions
//! (`Γ τ_c ≪ 1`, `S τ_c ≪ 1`); they are assumptions of the models and are
//! not checked at runtime.

use std::fmt;

use crate::bases::{
    chi_from_jtilde, pauli_basis_1q, reorder_l_to_jtilde, IndexConvention,
    OperatorBasis,
};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, C64};

/// Single-qubit Bloch-equation parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitRelaxation {
    /// Downward (emission) rate `Γ_d`.
    pub gamma_down: f64,
    /// Upward (absorption) rate `Γ_u`.
    pub gamma_up: f64,
    /// Coherence decay rate `1/T2`.
    pub dephasing_rate: f64,
}

impl QubitRelaxation {
    pub const NONE: QubitRelaxation =
        QubitRelaxation { gamma_down: 0.0, gamma_up: 0.0, dephasing_rate: 0.0 };

    /// From `T1`, `T2` and the upward rate; `T1 = 1/(Γ_d + Γ_u)`.
    /// Infinite times mean the corresponding process is absent.
    pub fn from_times(t1: f64, t2: f64, gamma_up: f64) -> Result<Self> {
        if t1.is_nan() || t1 <= 0.0 {
            return Err(Error::invalid("t1", format!("must be positive, got {t1}")));
        }
        if t2.is_nan() || t2 <= 0.0 {
            return Err(Error::invalid("t2", format!("must be positive, got {t2}")));
        }
        let total = if t1.is_infinite() { 0.0 } else { 1.0 / t1 };
        let q = QubitRelaxation {
            gamma_down: total - gamma_up,
            gamma_up,
            dephasing_rate: if t2.is_infinite() { 0.0 } else { 1.0 / t2 },
        };
        q.validate()?;
        Ok(q)
    }

    /// Zero-temperature energy relaxation only (`T2 = 2 T1`).
    pub fn energy_relaxation(t1: f64) -> Self {
        let g = 1.0 / t1;
        QubitRelaxation { gamma_down: g, gamma_up: 0.0, dephasing_rate: g / 2.0 }
    }

    /// Energy relaxation with both rates and no pure dephasing.
    pub fn thermal_relaxation(gamma_down: f64, gamma_up: f64) -> Self {
        QubitRelaxation { gamma_down, gamma_up, dephasing_rate: (gamma_down + gamma_up) / 2.0 }
    }

    /// Pure dephasing at rate `Γ` with no energy relaxation.
    pub fn pure_dephasing(gamma: f64) -> Self {
        QubitRelaxation { gamma_down: 0.0, gamma_up: 0.0, dephasing_rate: gamma }
    }

    /// `Γ = 1/T2 − (Γ_d + Γ_u)/2`.
    pub fn pure_dephasing_rate(&self) -> f64 {
        self.dephasing_rate - (self.gamma_down + self.gamma_up) / 2.0
    }

    pub fn t1(&self) -> f64 {
        1.0 / (self.gamma_down + self.gamma_up)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_d", self.gamma_down),
            ("gamma_u", self.gamma_up),
            ("1/t2", self.dephasing_rate),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(name, format!("rate must be finite and non-negative, got {v}")));
            }
        }
        let pd = self.pure_dephasing_rate();
        if pd < -1e-12 * self.dephasing_rate.max(1.0) {
            return Err(Error::invalid(
                "t2",
                format!("pure-dephasing rate 1/T2 − (Γd+Γu)/2 = {pd:.4e} is negative (T2 > 2·T1)"),
            ));
        }
        Ok(())
    }
}

/// A Markovian decoherence mechanism acting on two qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecoherenceModel {
    /// Independent Bloch equations on each qubit.
    LocalBloch { qubit1: QubitRelaxation, qubit2: QubitRelaxation },
    /// Pure dephasing with partially correlated frequency noise,
    /// `Γ̄ = 2κ√(Γ1 Γ2)`.
    CorrelatedDephasing { gamma1: f64, gamma2: f64, kappa: f64 },
    /// Fluctuating coupling strength `S + s(t)`.
    NoisyCoupling { gamma_s: f64 },
    /// Noisy coupling between strongly detuned qubits (secular form).
    DetunedNoisyCoupling { gamma_s_prime: f64 },
}

impl fmt::Display for DecoherenceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl DecoherenceModel {
    pub fn local_energy_relaxation(t1: f64) -> Self {
        let q = QubitRelaxation::energy_relaxation(t1);
        DecoherenceModel::LocalBloch { qubit1: q, qubit2: q }
    }

    /// Both qubits with the same `T1`, `T2` at zero temperature.
    pub fn local_t1_t2(t1: f64, t2: f64) -> Result<Self> {
        let q = QubitRelaxation::from_times(t1, t2, 0.0)?;
        Ok(DecoherenceModel::LocalBloch { qubit1: q, qubit2: q })
    }

    pub fn local_pure_dephasing(gamma: f64) -> Self {
        let q = QubitRelaxation::pure_dephasing(gamma);
        DecoherenceModel::LocalBloch { qubit1: q, qubit2: q }
    }

    pub fn correlated_dephasing(gamma_pd: f64, kappa: f64) -> Self {
        DecoherenceModel::CorrelatedDephasing { gamma1: gamma_pd, gamma2: gamma_pd, kappa }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DecoherenceModel::LocalBloch { .. } => "local_bloch",
            DecoherenceModel::CorrelatedDephasing { .. } => "correlated_dephasing",
            DecoherenceModel::NoisyCoupling { .. } => "noisy_coupling",
            DecoherenceModel::DetunedNoisyCoupling { .. } => "detuned_noisy_coupling",
        }
    }

    /// Models derived for the detuned-idle frame only.
    pub fn is_detuned_only(&self) -> bool {
        matches!(self, DecoherenceModel::DetunedNoisyCoupling { .. })
    }

    /// Models derived for resonant qubits only.
    pub fn is_resonant_only(&self) -> bool {
        matches!(self, DecoherenceModel::NoisyCoupling { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let rate = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("rate must be finite and non-negative, got {v}")))
            }
        };
        match *self {
            DecoherenceModel::LocalBloch { qubit1, qubit2 } => {
                qubit1.validate()?;
                qubit2.validate()
            }
            DecoherenceModel::CorrelatedDephasing { gamma1, gamma2, kappa } => {
                rate("gamma_pd_1", gamma1)?;
                rate("gamma_pd_2", gamma2)?;
                if !(-1.0..=1.0).contains(&kappa) {
                    return Err(Error::invalid("kappa", format!("must lie in [-1, 1], got {kappa}")));
                }
                Ok(())
            }
            DecoherenceModel::NoisyCoupling { gamma_s } => rate("gamma_s", gamma_s),
            DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime } => {
                rate("gamma_s_prime", gamma_s_prime)
            }
        }
    }

    /// The 16x16 generator `𝑳` of this mechanism.
    pub fn generator(&self) -> Result<CMatrix> {
        self.validate()?;
        Ok(match *self {
            DecoherenceModel::LocalBloch { qubit1, qubit2 } => {
                lift_local(&local_bloch_generator_1q(&qubit1)?, &local_bloch_generator_1q(&qubit2)?)?
            }
            DecoherenceModel::CorrelatedDephasing { gamma1, gamma2, kappa } => {
                cd_generator(gamma1, gamma2, kappa)?
            }
            DecoherenceModel::NoisyCoupling { gamma_s } => nc_generator(gamma_s)?,
            DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime } => {
                detuned_nc_generator(gamma_s_prime)?
            }
        })
    }
}

/// Superoperator of a linear map on `d x d` matrices: column `⟨kl⟩` holds
/// the vectorized image of `|k⟩⟨l|`.
pub fn superoperator_of(d: usize, map: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(d * d, d * d);
    for k in 0..d {
        for l in 0..d {
            let mut unit = CMatrix::zeros(d, d);
            unit[(k, l)] = c(1.0, 0.0);
            let image = map(&unit);
            for i in 0..d {
                for j in 0..d {
                    out[(d * i + j, d * k + l)] = image[(i, j)];
                }
            }
        }
    }
    out
}

/// Applies a superoperator to a density matrix.
pub fn apply_superoperator(l: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
    let v = l.matmul(&rho.vectorize())?;
    CMatrix::unvectorize(&v, rho.rows())
}

/// One-qubit Bloch generator in the by-element basis `(ρ00, ρ01, ρ10, ρ11)`.
pub fn local_bloch_generator_1q(q: &QubitRelaxation) -> Result<CMatrix> {
    q.validate()?;
    let (gd, gu, g2) = (q.gamma_down, q.gamma_up, q.dephasing_rate);
    Ok(CMatrix::from_real_rows(&[
        &[-gu, 0.0, 0.0, gd],
        &[0.0, -g2, 0.0, 0.0],
        &[0.0, 0.0, -g2, 0.0],
        &[gu, 0.0, 0.0, -gd],
    ]))
}

/// Two-qubit generator of independent local decoherence:
/// `𝑳_{⟨i1i2j1j2⟩⟨k1k2l1l2⟩} = 𝑳1_{⟨i1j1⟩⟨k1l1⟩} δ_{i2k2} δ_{j2l2}
///  + 𝑳2_{⟨i2j2⟩⟨k2l2⟩} δ_{i1k1} δ_{j1l1}`.
pub fn lift_local(l1: &CMatrix, l2: &CMatrix) -> Result<CMatrix> {
    for (name, l) in [("qubit 1", l1), ("qubit 2", l2)] {
        if l.rows() != 4 || l.cols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: format!("4x4 generator for {name}"),
                found: format!("{}x{}", l.rows(), l.cols()),
            });
        }
    }
    let conv = IndexConvention::TWO_QUBITS;
    let mut out = CMatrix::zeros(16, 16);
    for (i1, j1, i2, j2) in conv.quadruples() {
        let row = conv.joint(i1, i2, j1, j2);
        for (k1, l1i, k2, l2i) in conv.quadruples() {
            let col = conv.joint(k1, k2, l1i, l2i);
            let mut v = C64::new(0.0, 0.0);
            if i2 == k2 && j2 == l2i {
                v += l1[(2 * i1 + j1, 2 * k1 + l1i)];
            }
            if i1 == k1 && j1 == l1i {
                v += l2[(2 * i2 + j2, 2 * k2 + l2i)];
            }
            out[(row, col)] = v;
        }
    }
    Ok(out)
}

/// Correlated pure dephasing: `(L ρ)_ab = −c_ab ρ_ab` with the decay table
/// built from `Γ1`, `Γ2` and `Γ± = Γ1 + Γ2 ± Γ̄`.
pub fn cd_generator(gamma1: f64, gamma2: f64, kappa: f64) -> Result<CMatrix> {
    DecoherenceModel::CorrelatedDephasing { gamma1, gamma2, kappa }.validate()?;
    let gbar = 2.0 * kappa * (gamma1 * gamma2).sqrt();
    let gp = gamma1 + gamma2 + gbar;
    let gm = gamma1 + gamma2 - gbar;
    let rates = [
        [0.0, gamma2, gamma1, gp],
        [gamma2, 0.0, gm, gamma1],
        [gamma1, gm, 0.0, gamma2],
        [gp, gamma1, gamma2, 0.0],
    ];
    Ok(CMatrix::from_fn(16, 16, |r, col| {
        if r == col {
            c(-rates[r / 4][r % 4], 0.0)
        } else {
            c(0.0, 0.0)
        }
    }))
}

/// Noisy coupling generator for resonant qubits.
pub fn nc_generator(gamma_s: f64) -> Result<CMatrix> {
    DecoherenceModel::NoisyCoupling { gamma_s }.validate()?;
    Ok(superoperator_of(4, |r| nc_action(r, gamma_s, false)))
}

/// Noisy coupling between strongly detuned qubits: the `ρ21` term of the
/// second row and the `ρ12` term of the third row are dropped.
pub fn detuned_nc_generator(gamma_s_prime: f64) -> Result<CMatrix> {
    DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime }.validate()?;
    Ok(superoperator_of(4, |r| nc_action(r, gamma_s_prime, true)))
}

fn nc_action(r: &CMatrix, g: f64, secular: bool) -> CMatrix {
    let z = c(0.0, 0.0);
    let cross = if secular { 0.0 } else { 2.0 };
    let m = CMatrix::from_rows(&[
        &[z, -r[(0, 1)], -r[(0, 2)], z],
        &[
            -r[(1, 0)],
            r[(1, 1)] * -2.0 + r[(2, 2)] * 2.0,
            r[(1, 2)] * -2.0 + r[(2, 1)] * cross,
            -r[(1, 3)],
        ],
        &[
            -r[(2, 0)],
            r[(1, 2)] * cross - r[(2, 1)] * 2.0,
            r[(1, 1)] * 2.0 - r[(2, 2)] * 2.0,
            -r[(2, 3)],
        ],
        &[z, -r[(3, 1)], -r[(3, 2)], z],
    ]);
    m.scale_real(g)
}

/// Decoherence counterpart of a process matrix:
/// `L[ρ] = Σ λ_mn E_m ρ E_n†` in a product basis.
#[derive(Clone, Debug)]
pub struct LambdaMatrix {
    pub mat: CMatrix,
    pub basis1: OperatorBasis,
    pub basis2: OperatorBasis,
    /// Free-form description of where the matrix came from.
    pub source: String,
}

impl LambdaMatrix {
    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.mat.is_hermitian(tol)
    }

    /// Rebuilds the generator `𝑳` from `λ`.
    pub fn generator(&self) -> CMatrix {
        generator_from_lambda(&self.mat, &OperatorBasis::product(&self.basis1, &self.basis2))
    }
}

/// `λ = (Q1 Q2)⁻² (𝑬1† ⊗ 𝑬2†) ν (𝑬1 ⊗ 𝑬2)` with `ν` the `J̃`-style
/// reordering of `𝑳`.
pub fn lambda_from_generator(
    l: &CMatrix,
    b1: &OperatorBasis,
    b2: &OperatorBasis,
) -> Result<LambdaMatrix> {
    let nu = reorder_l_to_jtilde(l, IndexConvention::new(b1.dim(), b2.dim()))?;
    let mat = chi_from_jtilde(&nu, b1, b2)?;
    Ok(LambdaMatrix {
        mat,
        basis1: b1.clone(),
        basis2: b2.clone(),
        source: "generator".into(),
    })
}

/// `ν`, the elementary-basis λ-matrix.
pub fn nu_from_generator(l: &CMatrix) -> Result<CMatrix> {
    reorder_l_to_jtilde(l, IndexConvention::TWO_QUBITS)
}

/// Generator of `ρ ↦ Σ λ_mn E_m ρ E_n†`.
pub fn generator_from_lambda(lambda: &CMatrix, basis: &OperatorBasis) -> CMatrix {
    let d = basis.dim();
    superoperator_of(d, |rho| {
        let mut out = CMatrix::zeros(d, d);
        for (m, n, v) in lambda.entries() {
            if v.norm() == 0.0 {
                continue;
            }
            let term = &(basis.op(m) * rho) * &basis.op(n).adjoint();
            out += &term.scale(v);
        }
        out
    })
}

/// Pauli-basis λ of noisy coupling between strongly detuned qubits.
pub fn detuned_nc_lambda(gamma_s_prime: f64) -> Result<LambdaMatrix> {
    DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime }.validate()?;
    let g = gamma_s_prime;
    let mut m = CMatrix::zeros(16, 16);
    m[(0, 0)] = c(-g, 0.0);
    for (a, b) in [(0, 15), (15, 0)] {
        m[(a, b)] = c(g / 2.0, 0.0);
    }
    for (a, b) in [(5, 5), (10, 10), (5, 10), (10, 5), (6, 6), (9, 9)] {
        m[(a, b)] = c(g / 4.0, 0.0);
    }
    for (a, b) in [(6, 9), (9, 6)] {
        m[(a, b)] = c(-g / 4.0, 0.0);
    }
    let p = pauli_basis_1q();
    Ok(LambdaMatrix { mat: m, basis1: p.clone(), basis2: p, source: "detuned_noisy_coupling".into() })
}

/// Default ratio `|Δω̃| / |S|` required for the strong-detuning expansions.
pub const MIN_DETUNING_RATIO: f64 = 10.0;

/// First-order coherent correction `δχ^c` (Pauli basis) of a detuned idle
/// operation from the residual exchange coupling.
///
/// `detuning` is the eigenfrequency difference `Δω̃` in rad/s. With
/// `averaged` the fast oscillations are averaged out; otherwise the
/// correction at time `t` is returned.
pub fn detuned_coherent_correction(
    coupling: f64,
    detuning: f64,
    averaged: bool,
    t: f64,
) -> Result<CMatrix> {
    detuned_coherent_correction_with_ratio(coupling, detuning, averaged, t, MIN_DETUNING_RATIO)
}

pub fn detuned_coherent_correction_with_ratio(
    coupling: f64,
    detuning: f64,
    averaged: bool,
    t: f64,
    min_ratio: f64,
) -> Result<CMatrix> {
    let limit = min_ratio * coupling.abs();
    if detuning.abs() < limit || detuning == 0.0 {
        return Err(Error::DetuningTooSmall { detuning: detuning.abs(), ratio: min_ratio, limit });
    }
    let amp = coupling / (4.0 * detuning);
    let mut m = CMatrix::zeros(16, 16);
    let (avg_factor, osc) = if averaged {
        (1.0, 0.0)
    } else {
        let phase = detuning * t;
        (1.0 - phase.cos(), phase.sin())
    };
    let a = amp * avg_factor;
    m[(0, 9)] = c(0.0, a);
    m[(6, 0)] = c(0.0, a);
    m[(0, 6)] = c(0.0, -a);
    m[(9, 0)] = c(0.0, -a);
    if !averaged {
        let b = amp * osc;
        m[(0, 5)] = c(0.0, b);
        m[(0, 10)] = c(0.0, b);
        m[(5, 0)] = c(0.0, -b);
        m[(10, 0)] = c(0.0, -b);
    }
    Ok(m)
}

/// Number of entries with modulus above `tol`.
pub fn nonzero_count(mat: &CMatrix, tol: f64) -> usize {
    mat.count_nonzero(tol)
}

/// Pauli-basis λ of a model, the common case.
pub fn pauli_lambda(model: &DecoherenceModel) -> Result<LambdaMatrix> {
    let p = pauli_basis_1q();
    let mut lam = lambda_from_generator(&model.generator()?, &p, &p)?;
    lam.source = model.name().into();
    Ok(lam)
}

/// Sum of the Pauli-basis λ-matrices of several models.
pub fn combined_pauli_lambda(models: &[DecoherenceModel]) -> Result<LambdaMatrix> {
    let mut total = CMatrix::zeros(16, 16);
    for m in models {
        total += &pauli_lambda(m)?.mat;
    }
    let p = pauli_basis_1q();
    Ok(LambdaMatrix { mat: total, basis1: p.clone(), basis2: p, source: "combined".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm;

    fn assert_entries(m: &CMatrix, expect: &[((usize, usize), C64)], tol: f64) {
        let mut reference = CMatrix::zeros(m.rows(), m.cols());
        for &((i, j), v) in expect {
            reference[(i, j)] = v;
        }
        let diff = m.max_abs_diff(&reference);
        assert!(diff < tol, "max deviation {diff:e}\n{m:?}");
    }

    #[test]
    fn bloch_generator_zero_temperature() {
        let (t1, t2) = (90e-9, 60e-9);
        let q = QubitRelaxation::from_times(t1, t2, 0.0).unwrap();
        let l = local_bloch_generator_1q(&q).unwrap();
        assert_eq!(l[(0, 3)], c(1.0 / t1, 0.0));
        assert_eq!(l[(3, 3)], c(-1.0 / t1, 0.0));
        assert_eq!(l[(1, 1)], c(-1.0 / t2, 0.0));
        assert_eq!(l[(2, 2)], c(-1.0 / t2, 0.0));
        assert_eq!(l.count_nonzero(0.0), 4);
        assert_eq!(local_bloch_generator_1q(&QubitRelaxation::NONE).unwrap().count_nonzero(0.0), 0);
    }

    #[test]
    fn bloch_decay_matches_closed_form() {
        let t1 = 90e-9;
        let q = QubitRelaxation::energy_relaxation(t1);
        let l = local_bloch_generator_1q(&q).unwrap();
        for &t in &[1e-9, 30e-9, 200e-9] {
            let prop = expm(&l.scale_real(t)).unwrap();
            let rho1 = CMatrix::diag_real(&[0.0, 1.0]);
            let out = apply_superoperator(&prop, &rho1).unwrap();
            assert!((out[(1, 1)].re - (-t / t1).exp()).abs() < 1e-13);
            assert!((out[(0, 0)].re - (1.0 - (-t / t1).exp())).abs() < 1e-13);
        }
    }

    #[test]
    fn negative_pure_dephasing_rejected() {
        assert!(QubitRelaxation::from_times(50e-9, 200e-9, 0.0).is_err());
        assert!(QubitRelaxation::from_times(50e-9, 100e-9, 0.0).is_ok());
        assert!(matches!(
            DecoherenceModel::correlated_dephasing(1.0, 1.5).validate(),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn lift_local_zero_cases() {
        let z = CMatrix::zeros(4, 4);
        assert_eq!(lift_local(&z, &z).unwrap().count_nonzero(0.0), 0);
        assert!(lift_local(&CMatrix::zeros(3, 3), &z).is_err());
    }

    #[test]
    fn lift_local_eight_loop_oracle() {
        let q = QubitRelaxation { gamma_down: 1.3, gamma_up: 0.4, dephasing_rate: 2.1 };
        let l1 = local_bloch_generator_1q(&q).unwrap();
        let l = lift_local(&l1, &CMatrix::zeros(4, 4)).unwrap();
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        for k1 in 0..2 {
                            for k2 in 0..2 {
                                for l1i in 0..2 {
                                    for l2i in 0..2 {
                                        let row = 8 * i1 + 4 * i2 + 2 * j1 + j2;
                                        let col = 8 * k1 + 4 * k2 + 2 * l1i + l2i;
                                        let expect = if i2 == k2 && j2 == l2i {
                                            l1[(2 * i1 + j1, 2 * k1 + l1i)]
                                        } else {
                                            c(0.0, 0.0)
                                        };
                                        assert_eq!(l[(row, col)], expect);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn local_lambda_entries() {
        // distinct rates on both qubits, T > 0, with pure dephasing
        let q1 = QubitRelaxation { gamma_down: 3.0, gamma_up: 1.0, dephasing_rate: 2.0 + 0.7 };
        let q2 = QubitRelaxation { gamma_down: 5.0, gamma_up: 2.0, dephasing_rate: 3.5 + 1.1 };
        let model = DecoherenceModel::LocalBloch { qubit1: q1, qubit2: q2 };
        let lam = pauli_lambda(&model).unwrap().mat;
        let gp1 = (3.0 + 1.0) / 4.0;
        let gm1 = (3.0 - 1.0) / 4.0;
        let gp2 = (5.0 + 2.0) / 4.0;
        let gm2 = (5.0 - 2.0) / 4.0;
        let (pd1, pd2) = (0.7, 1.1);
        let r = |x: f64| c(x, 0.0);
        assert_entries(
            &lam,
            &[
                ((0, 0), r(-2.0 * (gp1 + gp2) - (pd1 + pd2) / 2.0)),
                ((1, 1), r(gp2)),
                ((2, 2), r(gp2)),
                ((4, 4), r(gp1)),
                ((8, 8), r(gp1)),
                ((0, 3), r(gm2)),
                ((3, 0), r(gm2)),
                ((0, 12), r(gm1)),
                ((12, 0), r(gm1)),
                ((2, 1), c(0.0, gm2)),
                ((1, 2), c(0.0, -gm2)),
                ((8, 4), c(0.0, gm1)),
                ((4, 8), c(0.0, -gm1)),
                ((3, 3), r(pd2 / 2.0)),
                ((12, 12), r(pd1 / 2.0)),
            ],
            1e-12,
        );
        // temperature ratio
        assert!((lam[(0, 3)].re / lam[(1, 1)].re - gm2 / gp2).abs() < 1e-14);
    }

    #[test]
    fn cd_lambda_and_action() {
        let (g, kappa) = (2.0, 0.6);
        let l = cd_generator(g, g, kappa).unwrap();
        let lam = pauli_lambda(&DecoherenceModel::correlated_dephasing(g, kappa)).unwrap().mat;
        let r = |x: f64| c(x, 0.0);
        let k = kappa * g / 2.0;
        assert_entries(
            &lam,
            &[
                ((0, 0), r(-g)),
                ((3, 3), r(g / 2.0)),
                ((12, 12), r(g / 2.0)),
                ((3, 12), r(k)),
                ((12, 3), r(k)),
                ((0, 15), r(-k)),
                ((15, 0), r(-k)),
            ],
            1e-12,
        );
        // ρ03 decays at Γ+
        let gp = 2.0 * g + 2.0 * kappa * g;
        assert!((l[(3, 3)].re + gp).abs() < 1e-14);
        // κ = 0 is local pure dephasing
        let local = DecoherenceModel::LocalBloch {
            qubit1: QubitRelaxation::pure_dephasing(1.5),
            qubit2: QubitRelaxation::pure_dephasing(0.5),
        };
        let cd0 = cd_generator(1.5, 0.5, 0.0).unwrap();
        assert!(cd0.max_abs_diff(&local.generator().unwrap()) < 1e-15);
    }

    #[test]
    fn nc_lambda_and_action() {
        let g = 1.7;
        let l = nc_generator(g).unwrap();
        let mut rho = CMatrix::zeros(4, 4);
        rho[(1, 1)] = c(0.3, 0.0);
        rho[(2, 2)] = c(0.7, 0.0);
        let out = apply_superoperator(&l, &rho).unwrap();
        assert!((out[(1, 1)].re - g * (-2.0 * 0.3 + 2.0 * 0.7)).abs() < 1e-14);
        let lam = pauli_lambda(&DecoherenceModel::NoisyCoupling { gamma_s: g }).unwrap().mat;
        let h = c(g / 2.0, 0.0);
        assert_entries(
            &lam,
            &[
                ((0, 0), c(-g, 0.0)),
                ((5, 5), h),
                ((10, 10), h),
                ((5, 10), h),
                ((10, 5), h),
                ((0, 15), h),
                ((15, 0), h),
            ],
            1e-12,
        );
        assert_eq!(nc_generator(0.0).unwrap().count_nonzero(0.0), 0);
    }

    #[test]
    fn detuned_nc_lambda_matches_secular_generator() {
        let g = 0.9;
        let listed = detuned_nc_lambda(g).unwrap();
        assert!(listed.trace().norm() < 1e-15);
        assert!(listed.is_hermitian(0.0));
        let p = pauli_basis_1q();
        let from_gen = lambda_from_generator(&detuned_nc_generator(g).unwrap(), &p, &p).unwrap();
        assert!(from_gen.mat.max_abs_diff(&listed.mat) < 1e-12);
        assert_eq!(detuned_nc_lambda(0.0).unwrap().mat.count_nonzero(0.0), 0);
        // and rebuilding the generator from λ closes the loop
        assert!(listed.generator().max_abs_diff(&detuned_nc_generator(g).unwrap()) < 1e-12);
    }

    #[test]
    fn coherent_correction_cases() {
        let s = 1.0e7;
        let z = detuned_coherent_correction(0.0, 10.0 * s, true, 0.0).unwrap();
        assert_eq!(z.count_nonzero(0.0), 0);
        let m = detuned_coherent_correction(s, 10.0 * s, true, 0.0).unwrap();
        assert!((m[(0, 9)] - c(0.0, 0.025)).norm() < 1e-15);
        assert!((m[(6, 0)] - c(0.0, 0.025)).norm() < 1e-15);
        assert!((m[(0, 6)] + c(0.0, 0.025)).norm() < 1e-15);
        assert!(m.is_hermitian(0.0));
        let dw = 10.0 * s;
        let full_period = detuned_coherent_correction(s, dw, false, 2.0 * std::f64::consts::PI / dw)
            .unwrap();
        assert!(full_period.max_abs() < 1e-15);
        assert!(matches!(
            detuned_coherent_correction(s, 5.0 * s, true, 0.0),
            Err(Error::DetuningTooSmall { .. })
        ));
    }

    #[test]
    fn generators_are_trace_preserving() {
        let models = [
            DecoherenceModel::local_t1_t2(90e-9, 60e-9).unwrap(),
            DecoherenceModel::correlated_dephasing(1e7, -0.3),
            DecoherenceModel::NoisyCoupling { gamma_s: 1e7 },
            DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime: 1e7 },
        ];
        for m in &models {
            let l = m.generator().unwrap();
            // Tr ρ̇ = 0: sum of the diagonal-output rows vanishes column-wise
            for col in 0..16 {
                let s: C64 = (0..4).map(|i| l[(5 * i, col)]).sum();
                assert!(s.norm() < 1e-6, "{m}: column {col} leaks trace {s}");
            }
            let lam = pauli_lambda(m).unwrap();
            assert!(lam.is_hermitian(1e-12 * 1e7));
            assert!(lam.trace().norm() < 1e-12 * 1e7);
        }
    }
}
