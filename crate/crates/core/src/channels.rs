//! Gate Hamiltonians, evolution maps and the simulated tomography pipeline.

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analysis::ProcessMatrix;
use crate::bases::{
    chi_from_jtilde, jtilde_from_chi, pauli_basis_1q, pauli_basis_2q, reorder_jtilde_to_l,
    reorder_l_to_jtilde, IndexConvention, OperatorBasis,
};
use crate::decoherence::{
    detuned_coherent_correction_with_ratio, detuned_nc_lambda, pauli_lambda, DecoherenceModel,
    MIN_DETUNING_RATIO,
};
use crate::error::{Error, Result};
use crate::linalg::{c, expm, kron, CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Identity,
    SqrtIswap,
    XyEvolution,
    DetunedIdle,
}

impl GateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GateKind::Identity => "identity",
            GateKind::SqrtIswap => "sqrt_iswap",
            GateKind::XyEvolution => "xy_evolution",
            GateKind::DetunedIdle => "detuned_idle",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A two-qubit operation. Frequencies are angular (rad/s), times in s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    /// Coupling strength `S`.
    pub coupling: f64,
    /// Qubit detuning `Δω`, used by [`GateKind::DetunedIdle`] only.
    pub detuning: f64,
    pub duration: f64,
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}

impl GateSpec {
    pub fn identity(duration: f64) -> Self {
        GateSpec { kind: GateKind::Identity, coupling: 0.0, detuning: 0.0, duration }
    }

    /// `√iSWAP` with duration fixed to `π/2S`.
    pub fn sqrt_iswap(coupling: f64) -> Self {
        GateSpec {
            kind: GateKind::SqrtIswap,
            coupling,
            detuning: 0.0,
            duration: PI / (2.0 * coupling),
        }
    }

    pub fn xy_evolution(coupling: f64, duration: f64) -> Self {
        GateSpec { kind: GateKind::XyEvolution, coupling, detuning: 0.0, duration }
    }

    pub fn detuned_idle(coupling: f64, detuning: f64, duration: f64) -> Result<Self> {
        let g = GateSpec { kind: GateKind::DetunedIdle, coupling, detuning, duration };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_ratio(MIN_DETUNING_RATIO)
    }

    pub fn validate_with_ratio(&self, min_ratio: f64) -> Result<()> {
        if !self.duration.is_finite() || self.duration < 0.0 {
            return Err(Error::invalid("duration", format!("must be finite and ≥ 0, got {}", self.duration)));
        }
        if !self.coupling.is_finite() || !self.detuning.is_finite() {
            return Err(Error::invalid("coupling", "coupling and detuning must be finite"));
        }
        match self.kind {
            GateKind::Identity => Ok(()),
            GateKind::SqrtIswap => {
                if self.coupling <= 0.0 {
                    return Err(Error::invalid("coupling", "√iSWAP needs S > 0"));
                }
                let expect = PI / (2.0 * self.coupling);
                if (self.duration - expect).abs() > 1e-9 * expect {
                    return Err(Error::invalid(
                        "duration",
                        format!("√iSWAP duration is fixed to π/2S = {expect:.6e} s, got {:.6e} s", self.duration),
                    ));
                }
                Ok(())
            }
            GateKind::XyEvolution => Ok(()),
            GateKind::DetunedIdle => {
                let limit = min_ratio * self.coupling.abs();
                if self.detuning.abs() < limit || self.detuning == 0.0 {
                    return Err(Error::DetuningTooSmall {
                        detuning: self.detuning.abs(),
                        ratio: min_ratio,
                        limit,
                    });
                }
                Ok(())
            }
        }
    }

    /// Difference of eigenfrequencies `Δω̃ = √(Δω² + S²)·sgn(Δω)`.
    pub fn effective_detuning(&self) -> f64 {
        self.detuning.hypot(self.coupling) * self.detuning.signum()
    }

    /// Whether the gate carries an inter-qubit Hamiltonian coupling.
    pub fn has_coupling(&self) -> bool {
        !matches!(self.kind, GateKind::Identity) && self.coupling != 0.0
    }

    pub fn with_duration(&self, duration: f64) -> Self {
        GateSpec { duration, ..*self }
    }
}

/// `H/ℏ` in rad/s in the computational basis `⟨j1 j2⟩ = 2 j1 + j2`.
///
/// For a detuned idle this is the static level-repulsion term only.
pub fn hamiltonian(spec: &GateSpec) -> CMatrix {
    let mut h = CMatrix::zeros(4, 4);
    match spec.kind {
        GateKind::Identity => {}
        GateKind::SqrtIswap | GateKind::XyEvolution => {
            h[(1, 2)] = c(spec.coupling / 2.0, 0.0);
            h[(2, 1)] = c(spec.coupling / 2.0, 0.0);
        }
        GateKind::DetunedIdle => {
            // |1⟩⟨1| ⊗ I − I ⊗ |1⟩⟨1| = diag(0, −1, 1, 0)
            let a = (spec.detuning - spec.effective_detuning()) / 2.0;
            h[(1, 1)] = c(-a, 0.0);
            h[(2, 2)] = c(a, 0.0);
        }
    }
    h
}

/// Generator of `ρ̇ = −i[H, ρ]`:
/// `(𝑳_coh)_{⟨ij⟩⟨kl⟩} = i(H_lj δ_ik − H_ik δ_jl)`.
pub fn coherent_generator(h: &CMatrix) -> Result<CMatrix> {
    if !h.is_square() {
        return Err(Error::NotSquare { what: "Hamiltonian".into(), rows: h.rows(), cols: h.cols() });
    }
    let scale = h.max_abs().max(1.0);
    if !h.is_hermitian(1e-12 * scale) {
        return Err(Error::NotHermitian { residual: h.hermiticity_residual() });
    }
    let d = h.rows();
    let i = c(0.0, 1.0);
    let mut l = CMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            let row = d * a + b;
            for k in 0..d {
                for m in 0..d {
                    let mut v = C64::new(0.0, 0.0);
                    if a == k {
                        v += h[(m, b)];
                    }
                    if b == m {
                        v -= h[(a, k)];
                    }
                    if v != C64::new(0.0, 0.0) {
                        l[(row, d * k + m)] = i * v;
                    }
                }
            }
        }
    }
    Ok(l)
}

/// `U(t) = exp(−iHt)`.
pub fn unitary(spec: &GateSpec) -> Result<CMatrix> {
    if spec.kind == GateKind::DetunedIdle {
        return Err(Error::UnsupportedGate {
            gate: spec.kind.to_string(),
            reason: "the detuned-idle Hamiltonian is time dependent in the rotating frame".into(),
        });
    }
    spec.validate()?;
    expm(&hamiltonian(spec).scale(c(0.0, -spec.duration)))
}

/// Superoperator of `ρ ↦ U ρ U†`.
pub fn unitary_superoperator(u: &CMatrix) -> CMatrix {
    kron(u, &u.conj())
}

/// Rank-one process matrix `χ_mn = k_m k_n*` of a single Kraus operator.
pub fn chi_from_kraus(k: &CMatrix, basis: &OperatorBasis) -> Result<CMatrix> {
    let coef = basis.coefficients(k)?;
    Ok(CMatrix::from_fn(coef.len(), coef.len(), |m, n| coef[m] * coef[n].conj()))
}

/// Process matrix of a Kraus decomposition `ρ ↦ Σ K_i ρ K_i†`.
pub fn chi_from_kraus_set(ks: &[CMatrix], basis: &OperatorBasis) -> Result<CMatrix> {
    let n = basis.len();
    let mut chi = CMatrix::zeros(n, n);
    for k in ks {
        chi += &chi_from_kraus(k, basis)?;
    }
    Ok(chi)
}

/// Pauli-basis process matrix of the decoherence-free gate. A detuned idle
/// is ideally the identity.
pub fn ideal_chi(spec: &GateSpec) -> Result<CMatrix> {
    let u = match spec.kind {
        GateKind::DetunedIdle => CMatrix::identity(4),
        _ => unitary(spec)?,
    };
    chi_from_kraus(&u, &pauli_basis_2q())
}

/// Superoperator `𝓛` of a gate together with its construction context.
#[derive(Clone, Debug)]
pub struct EvolutionMap {
    lmat: CMatrix,
    generator: Option<CMatrix>,
    convention: IndexConvention,
    gate: GateSpec,
    models: Vec<DecoherenceModel>,
}

impl EvolutionMap {
    pub fn superoperator(&self) -> &CMatrix {
        &self.lmat
    }

    /// Total generator `𝑳_coh + Σ 𝑳`; absent for detuned idles, whose map
    /// is built from the first-order χ expansion.
    pub fn generator(&self) -> Option<&CMatrix> {
        self.generator.as_ref()
    }

    pub fn convention(&self) -> IndexConvention {
        self.convention
    }

    pub fn gate(&self) -> &GateSpec {
        &self.gate
    }

    pub fn models(&self) -> &[DecoherenceModel] {
        &self.models
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let v = self.lmat.matmul(&rho.vectorize())?;
        CMatrix::unvectorize(&v, rho.rows())
    }

    /// Output states for the sixteen tomography inputs.
    pub fn tomography_outputs(&self) -> Result<Vec<CMatrix>> {
        qpt_initial_states().iter().map(|r| self.apply(r)).collect()
    }

    /// `J̃` reordering of `𝓛`.
    pub fn jtilde(&self) -> Result<CMatrix> {
        reorder_l_to_jtilde(&self.lmat, self.convention)
    }

    /// Direct conversion `𝓛 → J̃ → χ` in a product basis.
    pub fn chi(&self, b1: &OperatorBasis, b2: &OperatorBasis) -> Result<ProcessMatrix> {
        let chi = chi_from_jtilde(&self.jtilde()?, b1, b2)?;
        ProcessMatrix::new(chi, b1.clone(), b2.clone()).map(|p| p.with_gate(self.gate))
    }

    pub fn pauli_chi(&self) -> Result<ProcessMatrix> {
        let p = pauli_basis_1q();
        self.chi(&p, &p)
    }
}

fn check_compatibility(spec: &GateSpec, models: &[DecoherenceModel]) -> Result<()> {
    for m in models {
        let bad = if spec.kind == GateKind::DetunedIdle {
            m.is_resonant_only()
        } else {
            m.is_detuned_only()
        };
        if bad {
            return Err(Error::IncompatibleModel { model: m.name().into(), gate: spec.kind.to_string() });
        }
    }
    Ok(())
}

/// `𝓛 = exp((𝑳_coh + Σ 𝑳_model) t)`.
///
/// A detuned idle is not exponentiated: its map is rebuilt from the
/// first-order expansion `χ ≈ χ^I + δχ^c + λ t`, with the coherent
/// correction evaluated at the gate time.
pub fn evolution_map(spec: &GateSpec, models: &[DecoherenceModel]) -> Result<EvolutionMap> {
    spec.validate()?;
    check_compatibility(spec, models)?;
    for m in models {
        m.validate()?;
    }
    let convention = IndexConvention::TWO_QUBITS;
    if spec.kind == GateKind::DetunedIdle {
        let chi = detuned_chi_approx(spec, models, false)?;
        let p = pauli_basis_1q();
        let lmat = reorder_jtilde_to_l(&jtilde_from_chi(&chi, &p, &p)?, convention)?;
        return Ok(EvolutionMap { lmat, generator: None, convention, gate: *spec, models: models.to_vec() });
    }
    let mut gen = coherent_generator(&hamiltonian(spec))?;
    for m in models {
        gen += &m.generator()?;
    }
    let lmat = expm(&gen.scale_real(spec.duration))?;
    Ok(EvolutionMap { lmat, generator: Some(gen), convention, gate: *spec, models: models.to_vec() })
}

/// Map to first order in the dissipator,
/// `e^{𝑳_coh t} + ∫₀ᵗ e^{𝑳_coh (t−τ)} 𝑳 e^{𝑳_coh τ} dτ`, evaluated through the
/// exponential of the block generator `[[𝑳_coh, 𝑳], [0, 𝑳_coh]]`.
pub fn first_order_map(spec: &GateSpec, models: &[DecoherenceModel]) -> Result<EvolutionMap> {
    if spec.kind == GateKind::DetunedIdle {
        return Err(Error::UnsupportedGate {
            gate: spec.kind.to_string(),
            reason: "the detuned idle is already defined through its first-order expansion".into(),
        });
    }
    spec.validate()?;
    check_compatibility(spec, models)?;
    let coh = coherent_generator(&hamiltonian(spec))?;
    let mut diss = CMatrix::zeros(16, 16);
    for m in models {
        diss += &m.generator()?;
    }
    let t = spec.duration;
    let block = CMatrix::from_fn(32, 32, |r, col| match (r < 16, col < 16) {
        (true, true) => coh[(r, col)] * t,
        (true, false) => diss[(r, col - 16)] * t,
        (false, false) => coh[(r - 16, col - 16)] * t,
        (false, true) => C64::new(0.0, 0.0),
    });
    let e = expm(&block)?;
    let lmat = CMatrix::from_fn(16, 16, |r, col| e[(r, col)] + e[(r, col + 16)]);
    Ok(EvolutionMap {
        lmat,
        generator: None,
        convention: IndexConvention::TWO_QUBITS,
        gate: *spec,
        models: models.to_vec(),
    })
}

/// Pauli-basis `χ^I + δχ^c + λ t` for a detuned idle.
pub fn detuned_chi_approx(
    spec: &GateSpec,
    models: &[DecoherenceModel],
    averaged: bool,
) -> Result<CMatrix> {
    if spec.kind != GateKind::DetunedIdle {
        return Err(Error::UnsupportedGate {
            gate: spec.kind.to_string(),
            reason: "the first-order detuned expansion applies to detuned idles only".into(),
        });
    }
    spec.validate()?;
    check_compatibility(spec, models)?;
    let mut chi = pauli_basis_2q().identity_chi()?;
    chi += &detuned_coherent_correction_with_ratio(
        spec.coupling,
        spec.effective_detuning(),
        averaged,
        spec.duration,
        MIN_DETUNING_RATIO,
    )?;
    chi += &detuned_lambda(models)?.scale_real(spec.duration);
    Ok(chi)
}

/// Pauli-basis λ of the decoherence acting on detuned qubits.
pub fn detuned_lambda(models: &[DecoherenceModel]) -> Result<CMatrix> {
    let mut lam = CMatrix::zeros(16, 16);
    for m in models {
        let part = match *m {
            DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime } => {
                detuned_nc_lambda(gamma_s_prime)?.mat
            }
            DecoherenceModel::NoisyCoupling { .. } => {
                return Err(Error::IncompatibleModel {
                    model: m.name().into(),
                    gate: GateKind::DetunedIdle.to_string(),
                })
            }
            _ => pauli_lambda(m)?.mat,
        };
        lam += &part;
    }
    Ok(lam)
}

/// Single-qubit tomography inputs `|0⟩, |1⟩, |+⟩, |+i⟩` as projectors.
pub fn single_qubit_initial_states() -> [CMatrix; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(s, 0.0), c(s, 0.0)],
        [c(s, 0.0), c(0.0, s)],
    ];
    kets.map(|k| CMatrix::from_fn(2, 2, |i, j| k[i] * k[j].conj()))
}

/// The sixteen product inputs `ρ⁰_{⟨n1 n2⟩} = ρ_{n1} ⊗ ρ_{n2}`.
pub fn qpt_initial_states() -> Vec<CMatrix> {
    let one = single_qubit_initial_states();
    let mut out = Vec::with_capacity(16);
    for a in &one {
        for b in &one {
            out.push(kron(a, b));
        }
    }
    out
}

/// Closed-form inverse of the single-qubit input matrix `R0`, whose column
/// `n` is the vectorized `n`-th input state.
pub fn r0_inverse() -> CMatrix {
    let h = 0.5;
    CMatrix::from_rows(&[
        &[c(1.0, 0.0), c(-h, -h), c(-h, h), c(0.0, 0.0)],
        &[c(0.0, 0.0), c(-h, -h), c(-h, h), c(1.0, 0.0)],
        &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)],
    ])
}

/// Options for [`qpt_extract_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QptOptions {
    /// Tolerance for Hermiticity, trace and linearity checks.
    pub tol: f64,
}

impl Default for QptOptions {
    fn default() -> Self {
        QptOptions { tol: 1e-9 }
    }
}

/// Standard tomography on the outputs of the sixteen inputs from
/// [`qpt_initial_states`], with default tolerances.
pub fn qpt_extract(outputs: &[CMatrix], b1: &OperatorBasis, b2: &OperatorBasis) -> Result<ProcessMatrix> {
    qpt_extract_with(outputs, b1, b2, &QptOptions::default())
}

/// Reconstructs `𝓛` from output states and converts it to χ.
///
/// Violations of positivity are recorded in the diagnostics, not repaired.
pub fn qpt_extract_with(
    outputs: &[CMatrix],
    b1: &OperatorBasis,
    b2: &OperatorBasis,
    opts: &QptOptions,
) -> Result<ProcessMatrix> {
    if outputs.len() != 16 {
        return Err(Error::DimensionMismatch {
            expected: "16 output states".into(),
            found: format!("{} states", outputs.len()),
        });
    }
    for (index, rho) in outputs.iter().enumerate() {
        if rho.rows() != 4 || rho.cols() != 4 {
            return Err(Error::InvalidState {
                index,
                reason: format!("expected a 4x4 matrix, got {}x{}", rho.rows(), rho.cols()),
            });
        }
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState { index, reason: "non-finite entry".into() });
        }
        let res = rho.hermiticity_residual();
        if res > opts.tol {
            return Err(Error::InvalidState { index, reason: format!("not Hermitian (residual {res:.3e})") });
        }
        let tr = rho.trace().re;
        if tr > 1.0 + opts.tol {
            return Err(Error::InvalidState { index, reason: format!("trace {tr:.12} exceeds 1") });
        }
    }
    let r = CMatrix::from_fn(16, 16, |row, n| outputs[n][(row / 4, row % 4)]);
    let r0inv = r0_inverse();
    let lprime = &r * &kron(&r0inv, &r0inv);
    let conv = IndexConvention::TWO_QUBITS;
    let mut lmat = CMatrix::zeros(16, 16);
    for (i1, j1, i2, j2) in conv.quadruples() {
        let src = conv.split(i1, j1, i2, j2);
        let dst = conv.joint(i1, i2, j1, j2);
        for m in 0..16 {
            lmat[(m, dst)] = lprime[(m, src)];
        }
    }
    // The reconstructed map must reproduce every measured output.
    let mut residual = 0.0_f64;
    for (n, rho0) in qpt_initial_states().iter().enumerate() {
        let v = lmat.matmul(&rho0.vectorize())?;
        for k in 0..16 {
            residual = residual.max((v[(k, 0)] - r[(k, n)]).norm());
        }
    }
    if residual > opts.tol {
        return Err(Error::Inconsistent(format!("linear-map residual {residual:.3e} exceeds tolerance")));
    }
    let chi = chi_from_jtilde(&reorder_l_to_jtilde(&lmat, conv)?, b1, b2)?;
    let mut pm = ProcessMatrix::new(chi, b1.clone(), b2.clone())?;
    pm.diagnostics.linearity_residual = Some(residual);
    pm.validate(opts.tol)?;
    Ok(pm)
}

/// Adds Gaussian noise of standard deviation `sigma` to every output
/// entry while keeping each state Hermitian with unchanged trace.
pub fn perturb_outputs(outputs: &[CMatrix], sigma: f64, seed: u64) -> Result<Vec<CMatrix>> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid("noise", format!("σ must be finite and ≥ 0, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid("noise", e.to_string()))?;
    Ok(outputs
        .iter()
        .map(|rho| {
            let d = rho.rows();
            let mut out = rho.clone();
            let mut diag = Vec::with_capacity(d);
            for i in 0..d {
                diag.push(normal.sample(&mut rng));
                for j in (i + 1)..d {
                    let z = c(normal.sample(&mut rng), normal.sample(&mut rng));
                    out[(i, j)] += z;
                    out[(j, i)] += z.conj();
                }
            }
            let mean = diag.iter().sum::<f64>() / d as f64;
            for (i, x) in diag.into_iter().enumerate() {
                out[(i, i)] += c(x - mean, 0.0);
            }
            out
        })
        .collect())
}

/// `V_nm = Tr(E_n† U E_m)/Q`, so that `U E_m = Σ_n V_nm E_n`.
pub fn interaction_transform(u: &CMatrix, basis: &OperatorBasis) -> Result<CMatrix> {
    if !basis.is_orthogonal() {
        return Err(Error::NonOrthogonalBasis(basis.label().into()));
    }
    let n = basis.len();
    let ue: Vec<CMatrix> = basis.ops().iter().map(|e| u * e).collect();
    Ok(CMatrix::from_fn(n, n, |a, b| {
        crate::bases::hs_inner(basis.op(a), &ue[b]) / basis.norm()
    }))
}

/// Interaction-picture process matrix `χ^int` of a map with ideal unitary
/// `U`, from `𝓛^int = 𝓤⁻¹ 𝓛`.
pub fn interaction_chi(map: &EvolutionMap, u: &CMatrix) -> Result<CMatrix> {
    let uinv = unitary_superoperator(&u.adjoint());
    let lint = &uinv * map.superoperator();
    let p = pauli_basis_1q();
    chi_from_jtilde(&reorder_l_to_jtilde(&lint, map.convention())?, &p, &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inverse, paulis};
    use rand::Rng;

    fn random_density(rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(4, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let rho = &a * &a.adjoint();
        let tr = rho.trace().re;
        rho.scale_real(1.0 / tr)
    }

    fn s20() -> f64 {
        2.0 * PI * 20e6
    }

    #[test]
    fn hamiltonian_forms() {
        assert_eq!(hamiltonian(&GateSpec::identity(1e-8)).max_abs(), 0.0);
        let s = s20();
        let h = hamiltonian(&GateSpec::sqrt_iswap(s));
        assert_eq!(h.count_nonzero(0.0), 2);
        assert_eq!(h[(1, 2)], c(s / 2.0, 0.0));
        let [_, x, y, _] = paulis();
        let xy = (&kron(&x, &x) + &kron(&y, &y)).scale_real(s / 4.0);
        assert!(h.max_abs_diff(&xy) < 1e-6);
    }

    #[test]
    fn coherent_generator_matches_conjugation() {
        let spec = GateSpec::xy_evolution(s20(), 7.3e-9);
        let l = coherent_generator(&hamiltonian(&spec)).unwrap();
        assert!(l.count_nonzero(0.0) > 0);
        let prop = expm(&l.scale_real(spec.duration)).unwrap();
        let u = unitary(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let rho = random_density(&mut rng);
            let direct = &(&u * &rho) * &u.adjoint();
            let via = CMatrix::unvectorize(&prop.matmul(&rho.vectorize()).unwrap(), 4).unwrap();
            assert!(direct.max_abs_diff(&via) < 1e-10);
        }
        let on_identity = l.matmul(&CMatrix::identity(4).vectorize()).unwrap();
        assert!(on_identity.max_abs() < 1e-6);
        assert_eq!(coherent_generator(&CMatrix::zeros(4, 4)).unwrap().max_abs(), 0.0);
        let mut bad = CMatrix::zeros(4, 4);
        bad[(0, 1)] = c(1.0, 0.0);
        assert!(coherent_generator(&bad).is_err());
    }

    #[test]
    fn unitary_cases() {
        let s = s20();
        assert!(unitary(&GateSpec::xy_evolution(s, 0.0)).unwrap().max_abs_diff(&CMatrix::identity(4)) < 1e-15);
        let u = unitary(&GateSpec::sqrt_iswap(s)).unwrap();
        let [i, x, y, z] = paulis();
        let r2 = 2f64.sqrt();
        let expect = (&(&kron(&i, &i).scale_real(2.0 + r2)
            - &(&kron(&x, &x) + &kron(&y, &y)).scale(c(0.0, r2)))
            + &kron(&z, &z).scale_real(2.0 - r2))
            .scale_real(0.25);
        assert!(u.max_abs_diff(&expect) < 1e-13);
        let iswap = unitary(&GateSpec::xy_evolution(s, PI / s)).unwrap();
        assert!((iswap[(1, 2)] - c(0.0, -1.0)).norm() < 1e-13);
        assert!((iswap[(2, 1)] - c(0.0, -1.0)).norm() < 1e-13);
        assert!(iswap[(1, 1)].norm() < 1e-13);
        let det = GateSpec::detuned_idle(s, 20.0 * s, 1e-8).unwrap();
        assert!(matches!(unitary(&det), Err(Error::UnsupportedGate { .. })));
    }

    #[test]
    fn kraus_chi_cases() {
        let p = pauli_basis_2q();
        let chi = chi_from_kraus(&CMatrix::identity(4), &p).unwrap();
        assert!((chi[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(chi.count_nonzero(1e-15), 1);
        let [i, x, _, _] = paulis();
        let chi = chi_from_kraus(&kron(&x, &i), &p).unwrap();
        assert!((chi[(4, 4)] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(chi.count_nonzero(1e-15), 1);
    }

    #[test]
    fn initial_states_and_r0() {
        let states = qpt_initial_states();
        assert_eq!(states.len(), 16);
        let mut zero = CMatrix::zeros(4, 4);
        zero[(0, 0)] = c(1.0, 0.0);
        assert_eq!(states[0].max_abs_diff(&zero), 0.0);
        for s in &states {
            assert!((s.trace() - c(1.0, 0.0)).norm() < 1e-15);
            assert!(s.is_psd(1e-14));
        }
        let one = single_qubit_initial_states();
        let r0 = CMatrix::from_fn(4, 4, |row, n| one[n][(row / 2, row % 2)]);
        assert!(inverse(&r0).unwrap().max_abs_diff(&r0_inverse()) < 1e-15);
    }

    #[test]
    fn extraction_of_identity_and_unitary() {
        let p = pauli_basis_1q();
        let ident = qpt_extract(&qpt_initial_states(), &p, &p).unwrap();
        assert!(ident.chi.max_abs_diff(&pauli_basis_2q().identity_chi().unwrap()) < 1e-14);
        let u = unitary(&GateSpec::sqrt_iswap(s20())).unwrap();
        let outs: Vec<CMatrix> =
            qpt_initial_states().iter().map(|r| &(&u * r) * &u.adjoint()).collect();
        let pm = qpt_extract(&outs, &p, &p).unwrap();
        assert!(pm.chi.max_abs_diff(&ideal_chi(&GateSpec::sqrt_iswap(s20())).unwrap()) < 1e-12);
    }

    #[test]
    fn extraction_matches_direct_conversion() {
        let spec = GateSpec::sqrt_iswap(s20());
        let map = evolution_map(&spec, &[DecoherenceModel::local_t1_t2(90e-9, 60e-9).unwrap()]).unwrap();
        let p = pauli_basis_1q();
        let via_qpt = qpt_extract(&map.tomography_outputs().unwrap(), &p, &p).unwrap();
        let direct = map.pauli_chi().unwrap();
        assert!(via_qpt.chi.max_abs_diff(&direct.chi) < 1e-12);
    }

    #[test]
    fn extraction_rejects_bad_data() {
        let p = pauli_basis_1q();
        let mut outs = qpt_initial_states();
        outs[7][(0, 1)] += c(0.3, 0.0);
        match qpt_extract(&outs, &p, &p) {
            Err(Error::InvalidState { index, .. }) => assert_eq!(index, 7),
            other => panic!("unexpected {other:?}"),
        }
        let mut outs = qpt_initial_states();
        outs[3] = outs[3].scale_real(1.5);
        assert!(matches!(qpt_extract(&outs, &p, &p), Err(Error::InvalidState { index: 3, .. })));
        assert!(qpt_extract(&outs[..15], &p, &p).is_err());
    }

    #[test]
    fn perturbation_is_seeded_and_trace_preserving() {
        let outs = qpt_initial_states();
        let a = perturb_outputs(&outs, 1e-3, 9).unwrap();
        let b = perturb_outputs(&outs, 1e-3, 9).unwrap();
        let c2 = perturb_outputs(&outs, 1e-3, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c2);
        for (x, y) in a.iter().zip(&outs) {
            assert!((x.trace() - y.trace()).norm() < 1e-15);
            assert!(x.is_hermitian(0.0));
        }
        let p = pauli_basis_1q();
        let pm = qpt_extract(&a, &p, &p).unwrap();
        assert!(pm.diagnostics.min_eigenvalue < 0.0);
    }

    #[test]
    fn incompatible_models_rejected() {
        let s = s20();
        let nc_det = DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime: 1e6 };
        assert!(matches!(
            evolution_map(&GateSpec::sqrt_iswap(s), &[nc_det]),
            Err(Error::IncompatibleModel { .. })
        ));
        let det = GateSpec::detuned_idle(s, 20.0 * s, 1e-8).unwrap();
        assert!(matches!(
            evolution_map(&det, &[DecoherenceModel::NoisyCoupling { gamma_s: 1e6 }]),
            Err(Error::IncompatibleModel { .. })
        ));
        assert!(GateSpec::detuned_idle(s, 5.0 * s, 1e-8).is_err());
    }

    #[test]
    fn detuned_map_reproduces_expansion() {
        let s = s20();
        let det = GateSpec::detuned_idle(s, 15.0 * s, 8e-9).unwrap();
        let models = [
            DecoherenceModel::local_energy_relaxation(90e-9),
            DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime: 1.0 / 90e-9 },
        ];
        let map = evolution_map(&det, &models).unwrap();
        let expect = detuned_chi_approx(&det, &models, false).unwrap();
        assert!(map.pauli_chi().unwrap().chi.max_abs_diff(&expect) < 1e-13);
        // trace preservation of the rebuilt map
        let out = map.apply(&qpt_initial_states()[5]).unwrap();
        assert!((out.trace() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn interaction_picture_consistency() {
        let spec = GateSpec::sqrt_iswap(s20());
        let map = evolution_map(&spec, &[DecoherenceModel::NoisyCoupling { gamma_s: 1e7 }]).unwrap();
        let u = unitary(&spec).unwrap();
        let chi_int = interaction_chi(&map, &u).unwrap();
        let v = interaction_transform(&u, &pauli_basis_2q()).unwrap();
        let back = &(&v * &chi_int) * &v.adjoint();
        assert!(back.max_abs_diff(&map.pauli_chi().unwrap().chi) < 1e-10);
    }

    #[test]
    fn first_order_map_is_linear_in_rate() {
        let spec = GateSpec::sqrt_iswap(s20());
        let ideal = evolution_map(&spec, &[]).unwrap();
        let m1 = first_order_map(&spec, &[DecoherenceModel::local_energy_relaxation(90e-9)]).unwrap();
        let m2 = first_order_map(&spec, &[DecoherenceModel::local_energy_relaxation(45e-9)]).unwrap();
        let d1 = m1.superoperator() - ideal.superoperator();
        let d2 = m2.superoperator() - ideal.superoperator();
        assert!((&d1.scale_real(2.0) - &d2).max_abs() < 1e-12);
        // agrees with the exact map to second order
        let exact = evolution_map(&spec, &[DecoherenceModel::local_energy_relaxation(1e-5)]).unwrap();
        let approx = first_order_map(&spec, &[DecoherenceModel::local_energy_relaxation(1e-5)]).unwrap();
        assert!(exact.superoperator().max_abs_diff(approx.superoperator()) < 1e-5);
    }
}
