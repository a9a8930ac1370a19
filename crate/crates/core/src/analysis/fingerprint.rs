use serde::{Deserialize, Serialize};

use crate::bases::pauli_basis_2q;
use crate::channels::{evolution_map, ideal_chi, GateKind, GateSpec};
use crate::decoherence::detuned_coherent_correction;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

use super::exact::{nc_ratio_from_signature, NC_SIGNATURE_BASELINE, NC_SIGNATURE_POSITIONS};
use super::first_order::{
    er_main_positions, er_minor_elements, Mechanism, ER_DIAG_COEFF,
    ER_DIAG_POSITIONS, ER_IMAG_NEGATIVE, ER_IMAG_POSITIVE, PD_CORR_POSITIONS, PD_DIAG_POSITIONS,
    PD_MAIN_COEFF, PD_MINOR_COEFF, PD_MINOR_NEGATIVE, PD_MINOR_POSITIVE,
};
use super::refine::{refine, FitParameters, Refinement};
use super::ProcessMatrix;

pub type Position = (usize, usize);

/// Positions shared by correlated dephasing and noisy coupling when the
/// qubits are not coupled by the Hamiltonian.
pub const SHARED_POSITIONS: [Position; 2] = [(0, 15), (15, 0)];

/// Identity-gate noisy-coupling positions (all `+Γ_s t/2`).
pub const NC_IDENTITY_POSITIONS: [Position; 4] = [(5, 5), (10, 10), (5, 10), (10, 5)];
/// Detuned-idle noisy-coupling positions with positive sign.
pub const NC_DETUNED_POSITIVE: [Position; 6] = [(5, 5), (10, 10), (5, 10), (10, 5), (6, 6), (9, 9)];
pub const NC_DETUNED_NEGATIVE: [Position; 2] = [(6, 9), (9, 6)];

/// Relative correlation-element magnitude below which a `κ` estimate is
/// considered unreliable.
pub const KAPPA_RELIABILITY: f64 = 0.1;
/// `|κ|` from which dephasing is attributed to correlated noise.
pub const KAPPA_CORRELATED: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub name: String,
    pub value: f64,
    /// Direct inversion of the first-order element formulas.
    pub first_order: f64,
    pub unit: String,
    pub reliable: bool,
}

impl RateEstimate {
    fn new(name: &str, value: f64, unit: &str) -> Self {
        RateEstimate {
            name: name.into(),
            value,
            first_order: value,
            unit: unit.into(),
            reliable: value.is_finite(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismFinding {
    pub mechanism: Mechanism,
    /// Share of the total extra mass attributed to this mechanism.
    pub evidence: f64,
    pub mass: f64,
    pub flagged: bool,
    pub matched_positions: Vec<Position>,
    pub estimated_rates: Vec<RateEstimate>,
    pub notes: Vec<String>,
}

impl MechanismFinding {
    fn empty(mechanism: Mechanism) -> Self {
        MechanismFinding {
            mechanism,
            evidence: 0.0,
            mass: 0.0,
            flagged: false,
            matched_positions: Vec::new(),
            estimated_rates: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn rate(&self, name: &str) -> Option<f64> {
        self.estimated_rates.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerprintReport {
    pub gate: GateKind,
    /// Sum of `|δχ|` over positions where the ideal χ vanishes, plus the
    /// noisy-coupling growth mass for `√iSWAP`.
    pub total_mass: f64,
    /// Extra mass at positions matched by no mechanism.
    pub residual: f64,
    pub findings: Vec<MechanismFinding>,
    pub notes: Vec<String>,
    pub refinement: Option<Refinement>,
}

impl FingerprintReport {
    pub fn finding(&self, m: Mechanism) -> &MechanismFinding {
        self.findings.iter().find(|f| f.mechanism == m).expect("every mechanism is reported")
    }

    pub fn evidence(&self, m: Mechanism) -> f64 {
        self.finding(m).evidence
    }

    pub fn flagged(&self) -> Vec<Mechanism> {
        self.findings.iter().filter(|f| f.flagged).map(|f| f.mechanism).collect()
    }

    /// Mechanism with the highest evidence, if any mass was found.
    pub fn strongest(&self) -> Option<Mechanism> {
        self.findings
            .iter()
            .filter(|f| f.evidence > 0.0)
            .max_by(|a, b| a.evidence.total_cmp(&b.evidence))
            .map(|f| f.mechanism)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FingerprintOptions {
    /// Evidence from which a mechanism is flagged.
    pub flag_threshold: f64,
    /// Standard deviation of entry noise in the input, used by the one-sided
    /// noisy-coupling test for `√iSWAP`.
    pub noise_sigma: f64,
    /// Total extra mass below which nothing is reported.
    pub min_mass: f64,
    /// Correct the `√iSWAP` first-order estimates for higher orders by
    /// matching them against simulated maps.
    pub calibrate: bool,
    /// Run the least-squares refinement after the rate estimates.
    pub refine: bool,
}

impl Default for FingerprintOptions {
    fn default() -> Self {
        FingerprintOptions { flag_threshold: 0.1, noise_sigma: 0.0, min_mass: 1e-12, calibrate: true, refine: false }
    }
}

/// Signature positions of every mechanism for a gate.
#[derive(Clone, Debug, PartialEq)]
pub struct Signatures {
    pub energy_relaxation: Vec<Position>,
    pub dephasing_diagonal: Vec<Position>,
    pub dephasing_correlation: Vec<Position>,
    /// Smaller dephasing elements, present for `√iSWAP` only.
    pub dephasing_minor: Vec<Position>,
    /// Noisy-coupling positions where the ideal χ vanishes.
    pub noisy_coupling: Vec<Position>,
    /// Positions shared by correlated dephasing and noisy coupling.
    pub shared: Vec<Position>,
    /// Whether noisy coupling is detected through growth of ideal elements.
    pub noisy_coupling_growth: bool,
}

impl Signatures {
    pub fn for_gate(kind: GateKind) -> Result<Self> {
        let pd_diag = PD_DIAG_POSITIONS.to_vec();
        let pd_corr = PD_CORR_POSITIONS.to_vec();
        match kind {
            GateKind::SqrtIswap => {
                let mut er = er_main_positions();
                er.extend(er_minor_elements().into_iter().map(|(p, _)| p));
                Ok(Signatures {
                    energy_relaxation: er,
                    dephasing_diagonal: pd_diag,
                    dephasing_correlation: pd_corr,
                    dephasing_minor: PD_MINOR_POSITIVE.iter().chain(&PD_MINOR_NEGATIVE).copied().collect(),
                    noisy_coupling: Vec::new(),
                    shared: Vec::new(),
                    noisy_coupling_growth: true,
                })
            }
            GateKind::Identity | GateKind::DetunedIdle => Ok(Signatures {
                energy_relaxation: er_main_positions(),
                dephasing_diagonal: pd_diag,
                dephasing_correlation: pd_corr,
                dephasing_minor: Vec::new(),
                noisy_coupling: if kind == GateKind::Identity {
                    NC_IDENTITY_POSITIONS.to_vec()
                } else {
                    NC_DETUNED_POSITIVE.iter().chain(&NC_DETUNED_NEGATIVE).copied().collect()
                },
                shared: SHARED_POSITIONS.to_vec(),
                noisy_coupling_growth: false,
            }),
            GateKind::XyEvolution => Err(Error::UnsupportedGate {
                gate: kind.to_string(),
                reason: "fingerprints are defined for identity, √iSWAP and detuned idle".into(),
            }),
        }
    }

    /// Every position attributed to some mechanism.
    pub fn all(&self) -> Vec<Position> {
        let mut v: Vec<Position> = self
            .energy_relaxation
            .iter()
            .chain(&self.dephasing_diagonal)
            .chain(&self.dephasing_correlation)
            .chain(&self.dephasing_minor)
            .chain(&self.noisy_coupling)
            .chain(&self.shared)
            .copied()
            .collect();
        if self.noisy_coupling_growth {
            v.extend(NC_SIGNATURE_POSITIONS);
        }
        v
    }
}

/// Reference χ that decoherence is measured against, including the
/// coherent correction of a detuned idle.
pub fn reference_chi(gate: &GateSpec) -> Result<CMatrix> {
    match gate.kind {
        GateKind::Identity => pauli_basis_2q().identity_chi(),
        GateKind::SqrtIswap => ideal_chi(gate),
        GateKind::DetunedIdle => Ok(&pauli_basis_2q().identity_chi()?
            + &detuned_coherent_correction(gate.coupling, gate.effective_detuning(), false, gate.duration)?),
        GateKind::XyEvolution => Err(Error::UnsupportedGate {
            gate: gate.kind.to_string(),
            reason: "fingerprints are defined for identity, √iSWAP and detuned idle".into(),
        }),
    }
}

pub fn fingerprint(pm: &ProcessMatrix) -> Result<FingerprintReport> {
    fingerprint_with(pm, &FingerprintOptions::default())
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

struct Masses<'a> {
    delta: &'a CMatrix,
    ideal_support: Vec<bool>,
}

impl Masses<'_> {
    fn at(&self, p: Position) -> f64 {
        if self.ideal_support[p.0 * 16 + p.1] {
            0.0
        } else {
            self.delta[p].norm()
        }
    }

    fn sum(&self, ps: &[Position]) -> f64 {
        ps.iter().map(|&p| self.at(p)).sum()
    }
}

/// Identifies decoherence mechanisms from the extra elements of a
/// Pauli-basis χ and estimates their rates.
pub fn fingerprint_with(pm: &ProcessMatrix, opts: &FingerprintOptions) -> Result<FingerprintReport> {
    let gate = check_input(pm)?;
    let mut report = first_order_report(pm, &gate, opts)?;
    if opts.calibrate && gate.kind == GateKind::SqrtIswap {
        calibrate(&mut report, &gate, opts)?;
    }
    if opts.refine {
        let start = FitParameters::from_report(&report, &gate);
        report.refinement = Some(refine(pm, &gate, start)?);
    }
    Ok(report)
}

pub const CALIBRATION_MAX_ITER: usize = 50;
pub const CALIBRATION_TOL: f64 = 1e-9;

/// Fixed-point correction of the rate estimates: the flagged mechanisms are
/// simulated at the current estimates and the estimates are rescaled until
/// the first-order readout of the simulation matches that of the input.
fn calibrate(report: &mut FingerprintReport, gate: &GateSpec, opts: &FingerprintOptions) -> Result<()> {
    let target = FitParameters::read(report, gate, true);
    let active = target.active();
    if active.is_empty() {
        return Ok(());
    }
    let mut p = target;
    let mut converged = false;
    for _ in 0..CALIBRATION_MAX_ITER {
        let sim = evolution_map(gate, &p.models(gate))?.pauli_chi()?.with_gate(*gate);
        let apparent = FitParameters::read(&first_order_report(&sim, gate, opts)?, gate, false);
        let mut change: f64 = 0.0;
        for &i in &active {
            let (cur, t, a) = (p.get(i), target.get(i), apparent.get(i));
            let next = if i == FitParameters::KAPPA {
                cur + t - a
            } else if a > 0.0 {
                cur * t / a
            } else {
                cur
            };
            p.set(i, next);
            let scale = if i == FitParameters::KAPPA { 1.0 } else { cur.abs().max(f64::MIN_POSITIVE) };
            change = change.max((p.get(i) - cur).abs() / scale);
        }
        if change < CALIBRATION_TOL {
            converged = true;
            break;
        }
    }
    p.write(report);
    if !converged {
        report.notes.push("rate calibration did not converge; estimates are approximate".into());
    }
    Ok(())
}

fn check_input(pm: &ProcessMatrix) -> Result<GateSpec> {
    if !pm.is_pauli() {
        return Err(Error::BasisMismatch {
            expected: "pauli".into(),
            found: format!("{}⊗{}", pm.basis1.label(), pm.basis2.label()),
        });
    }
    let gate = pm.gate.ok_or_else(|| Error::UnsupportedGate {
        gate: "unknown".into(),
        reason: "the process matrix carries no gate context".into(),
    })?;
    Signatures::for_gate(gate.kind)?;
    Ok(gate)
}

fn first_order_report(pm: &ProcessMatrix, gate: &GateSpec, opts: &FingerprintOptions) -> Result<FingerprintReport> {
    let sig = Signatures::for_gate(gate.kind)?;
    let ideal = match gate.kind {
        GateKind::SqrtIswap => ideal_chi(gate)?,
        _ => pauli_basis_2q().identity_chi()?,
    };
    let reference = reference_chi(gate)?;
    let delta = &pm.chi - &reference;
    let ideal_support: Vec<bool> = ideal.iter().map(|z| z.norm() > 1e-12).collect();
    let masses = Masses { delta: &delta, ideal_support };
    let all_extra: f64 = (0..16)
        .flat_map(|m| (0..16).map(move |n| (m, n)))
        .map(|p| masses.at(p))
        .sum();

    let s = gate.coupling;
    let t = gate.duration;
    let mut notes = Vec::new();
    let re = |p: Position| delta[p].re;

    // energy relaxation
    let mut er = MechanismFinding::empty(Mechanism::EnergyRelaxation);
    er.mass = masses.sum(&sig.energy_relaxation);
    er.matched_positions = sig.energy_relaxation.clone();
    match gate.kind {
        GateKind::SqrtIswap => {
            let main: Vec<Position> =
                ER_DIAG_POSITIONS.iter().chain(&ER_IMAG_POSITIVE).chain(&ER_IMAG_NEGATIVE).copied().collect();
            let a = mean(main.iter().map(|&p| masses.at(p)));
            if a > 0.0 {
                er.estimated_rates.push(RateEstimate::new("t1", ER_DIAG_COEFF / (s * a), "s"));
            }
        }
        _ => {
            for (q, diag, cross) in [
                ("q1", [(4, 4), (8, 8)], [(0, 12), (12, 0)]),
                ("q2", [(1, 1), (2, 2)], [(0, 3), (3, 0)]),
            ] {
                let plus = mean(diag.iter().map(|&p| re(p)));
                let minus = mean(cross.iter().map(|&p| re(p)));
                if plus > 0.0 && t > 0.0 {
                    let total = 4.0 * plus / t;
                    let gamma_u = 2.0 * (plus - minus) / t;
                    er.estimated_rates.push(RateEstimate::new(&format!("t1_{q}"), 1.0 / total, "s"));
                    er.estimated_rates.push(RateEstimate::new(&format!("gamma_u_{q}"), gamma_u.max(0.0), "1/s"));
                }
            }
        }
    }

    // dephasing, attributed to local or correlated noise through κ
    let pd_mass = masses.sum(&sig.dephasing_diagonal)
        + masses.sum(&sig.dephasing_correlation)
        + masses.sum(&sig.dephasing_minor);
    let d = mean(sig.dephasing_diagonal.iter().map(|&p| re(p)));
    let cr = mean(sig.dephasing_correlation.iter().map(|&p| re(p)));
    let mut pd_rates = Vec::new();
    let mut pd_notes = Vec::new();
    let mut kappa = 0.0;
    if d > opts.min_mass {
        let relative = (cr / d).abs();
        let reliable = relative >= KAPPA_RELIABILITY;
        match gate.kind {
            GateKind::SqrtIswap => {
                let (a, b) = (PD_MAIN_COEFF, PD_MINOR_COEFF);
                kappa = ((a * cr - b * d) / (a * d - b * cr)).clamp(-1.0, 1.0);
                let gamma = s * d / (a + b * kappa);
                pd_rates.push(RateEstimate::new("gamma_pd", gamma, "1/s"));
            }
            _ => {
                let g1 = 2.0 * re((12, 12)) / t;
                let g2 = 2.0 * re((3, 3)) / t;
                let gbar = 4.0 * cr / t;
                kappa = if g1 > 0.0 && g2 > 0.0 {
                    (gbar / (2.0 * (g1 * g2).sqrt())).clamp(-1.0, 1.0)
                } else {
                    0.0
                };
                pd_rates.push(RateEstimate::new("gamma_pd", 0.5 * (g1 + g2), "1/s"));
                pd_rates.push(RateEstimate::new("gamma_pd_1", g1, "1/s"));
                pd_rates.push(RateEstimate::new("gamma_pd_2", g2, "1/s"));
            }
        }
        let mut k = RateEstimate::new("kappa", kappa, "1");
        k.reliable = reliable;
        if !reliable {
            pd_notes.push(format!(
                "correlation elements are {relative:.3} of the diagonal ones; κ estimate unreliable"
            ));
        }
        pd_rates.push(k);
    }
    let correlated = kappa.abs() >= KAPPA_CORRELATED;

    // noisy coupling
    let mut nc = MechanismFinding::empty(Mechanism::NoisyCoupling);
    let mut growth = 0.0;
    let mut nc_expected_shared = 0.0;
    if sig.noisy_coupling_growth {
        let threshold = NC_SIGNATURE_BASELINE + 3.0 * opts.noise_sigma;
        let mags: Vec<f64> = NC_SIGNATURE_POSITIONS.iter().map(|&p| pm.chi[p].norm()).collect();
        growth = mags.iter().map(|m| (m - threshold).max(0.0)).sum();
        nc.mass = growth;
        if growth > 0.0 {
            nc.matched_positions = NC_SIGNATURE_POSITIONS.to_vec();
            if let Some(r) = nc_ratio_from_signature(mean(mags.iter().copied())) {
                nc.estimated_rates.push(RateEstimate::new("gamma_s", r * s, "1/s"));
            }
            nc.notes.push("|χ5,15| family above its ideal value: consistent with noisy coupling".into());
        } else {
            nc.notes.push("no growth of the |χ5,15| family; noisy coupling not excluded".into());
        }
    } else {
        nc.mass = masses.sum(&sig.noisy_coupling);
        nc.matched_positions = sig.noisy_coupling.clone();
        let signed = mean(sig.noisy_coupling.iter().map(|&p| {
            if NC_DETUNED_NEGATIVE.contains(&p) {
                -re(p)
            } else {
                re(p)
            }
        }));
        if signed > 0.0 && t > 0.0 {
            if gate.kind == GateKind::Identity {
                nc.estimated_rates.push(RateEstimate::new("gamma_s", 2.0 * signed / t, "1/s"));
                nc_expected_shared = signed;
            } else {
                nc.estimated_rates.push(RateEstimate::new("gamma_s_prime", 4.0 * signed / t, "1/s"));
                nc_expected_shared = 2.0 * signed;
            }
        }
    }

    // shared (0,15) pair: split by the expected contributions
    let mut pd_shared = 0.0;
    if !sig.shared.is_empty() {
        let shared_mass = masses.sum(&sig.shared);
        let cd_expected = if correlated { cr.abs() } else { 0.0 };
        let weight = cd_expected + nc_expected_shared;
        if shared_mass > 0.0 && weight > 0.0 {
            pd_shared = shared_mass * cd_expected / weight;
            nc.mass += shared_mass * nc_expected_shared / weight;
            if nc_expected_shared > 0.0 {
                nc.matched_positions.extend(&sig.shared);
            }
            if correlated && re((0, 15)) * cr > 0.0 {
                notes.push("sign of χ0,15 does not follow the correlated-dephasing pattern".into());
            }
        }
    }

    let mut lpd = MechanismFinding::empty(Mechanism::LocalPureDephasing);
    let mut cd = MechanismFinding::empty(Mechanism::CorrelatedDephasing);
    let target = if correlated { &mut cd } else { &mut lpd };
    target.mass = pd_mass + pd_shared;
    target.matched_positions = sig
        .dephasing_diagonal
        .iter()
        .chain(&sig.dephasing_correlation)
        .chain(&sig.dephasing_minor)
        .copied()
        .collect();
    if correlated && pd_shared > 0.0 {
        target.matched_positions.extend(&sig.shared);
    }
    target.estimated_rates = pd_rates;
    target.notes = pd_notes;

    let total = all_extra + growth;
    let matched = er.mass + lpd.mass + cd.mass + nc.mass - growth;
    let residual = (all_extra - matched).max(0.0);
    let mut findings = vec![er, lpd, cd, nc];
    for f in &mut findings {
        if total > opts.min_mass {
            f.evidence = (f.mass / total).clamp(0.0, 1.0);
        }
        f.flagged = f.evidence >= opts.flag_threshold;
        if f.mass == 0.0 {
            f.matched_positions.clear();
        }
    }
    if total <= opts.min_mass {
        notes.push("no extra elements above the noise floor".into());
    }
    Ok(FingerprintReport {
        gate: gate.kind,
        total_mass: if total > opts.min_mass { total } else { 0.0 },
        residual: if total > opts.min_mass { residual } else { 0.0 },
        findings,
        notes,
        refinement: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::exact_cd_chi;
    use crate::channels::evolution_map;
    use crate::decoherence::{DecoherenceModel, QubitRelaxation};
    use std::collections::HashSet;
    use std::f64::consts::PI;

    fn s20() -> f64 {
        2.0 * PI * 20e6
    }

    fn run(gate: GateSpec, models: &[DecoherenceModel]) -> FingerprintReport {
        let pm = evolution_map(&gate, models).unwrap().pauli_chi().unwrap();
        fingerprint(&pm).unwrap()
    }

    #[test]
    fn ideal_input_has_no_findings() {
        for gate in [GateSpec::sqrt_iswap(s20()), GateSpec::identity(1e-8)] {
            let r = run(gate, &[]);
            assert!(r.findings.iter().all(|f| f.evidence == 0.0 && !f.flagged));
            assert_eq!(r.residual, 0.0);
            assert_eq!(r.total_mass, 0.0);
        }
    }

    #[test]
    fn signatures_are_disjoint() {
        for kind in [GateKind::SqrtIswap, GateKind::Identity, GateKind::DetunedIdle] {
            let sig = Signatures::for_gate(kind).unwrap();
            let groups: Vec<HashSet<Position>> = vec![
                sig.energy_relaxation.iter().copied().collect(),
                sig.dephasing_diagonal
                    .iter()
                    .chain(&sig.dephasing_correlation)
                    .chain(&sig.dephasing_minor)
                    .copied()
                    .collect(),
                sig.noisy_coupling.iter().copied().collect(),
                if sig.noisy_coupling_growth {
                    NC_SIGNATURE_POSITIONS.iter().copied().collect()
                } else {
                    HashSet::new()
                },
                sig.shared.iter().copied().collect(),
            ];
            for i in 0..groups.len() {
                for j in (i + 1)..groups.len() {
                    assert!(groups[i].is_disjoint(&groups[j]), "{kind}: groups {i} and {j} overlap");
                }
            }
        }
    }

    #[test]
    fn exact_cd_input() {
        let s = s20();
        let gate = GateSpec::sqrt_iswap(s);
        let pm = ProcessMatrix::pauli(exact_cd_chi(1.0 / 90e-9, s).unwrap()).unwrap().with_gate(gate);
        let r = fingerprint(&pm).unwrap();
        let cd = r.finding(Mechanism::CorrelatedDephasing);
        assert!(cd.flagged);
        let kappa = cd.rate("kappa").unwrap();
        assert!((0.9..=1.1).contains(&kappa), "κ = {kappa}");
        assert!(r.evidence(Mechanism::EnergyRelaxation) < 0.05);
        assert!(r.evidence(Mechanism::NoisyCoupling) < 0.05);
    }

    #[test]
    fn identity_gate_rates() {
        let t = 1e-9;
        let q1 = QubitRelaxation::from_times(80e-9, 100e-9, 2e6).unwrap();
        let q2 = QubitRelaxation::from_times(120e-9, 150e-9, 1e6).unwrap();
        let r = run(GateSpec::identity(t), &[DecoherenceModel::LocalBloch { qubit1: q1, qubit2: q2 }]);
        let er = r.finding(Mechanism::EnergyRelaxation);
        assert!(er.flagged);
        assert!((er.rate("t1_q1").unwrap() / 80e-9 - 1.0).abs() < 0.05);
        assert!((er.rate("t1_q2").unwrap() / 120e-9 - 1.0).abs() < 0.05);
        assert!((er.rate("gamma_u_q1").unwrap() / 2e6 - 1.0).abs() < 0.1);
        assert!(r.finding(Mechanism::LocalPureDephasing).flagged);
        assert!(r.evidence(Mechanism::NoisyCoupling) < 0.01);
    }

    #[test]
    fn identity_gate_shared_positions() {
        let t = 2e-9;
        let g = 1.0 / 90e-9;
        let r = run(GateSpec::identity(t), &[DecoherenceModel::correlated_dephasing(g, 0.6)]);
        let cd = r.finding(Mechanism::CorrelatedDephasing);
        assert!(cd.flagged && cd.matched_positions.contains(&(0, 15)));
        assert!((cd.rate("kappa").unwrap() - 0.6).abs() < 0.02);
        assert!(r.residual < 1e-2 * r.total_mass);
        let r = run(GateSpec::identity(t), &[DecoherenceModel::NoisyCoupling { gamma_s: g }]);
        let nc = r.finding(Mechanism::NoisyCoupling);
        assert!(nc.flagged && nc.matched_positions.contains(&(0, 15)));
        assert!((nc.rate("gamma_s").unwrap() / g - 1.0).abs() < 0.05);
        assert!(r.evidence(Mechanism::CorrelatedDephasing) == 0.0);
    }

    #[test]
    fn detuned_idle_noisy_coupling() {
        let s = s20();
        let gate = GateSpec::detuned_idle(s, 20.0 * s, 5e-9).unwrap();
        let g = 1.0 / 90e-9;
        let r = run(gate, &[DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime: g }]);
        let nc = r.finding(Mechanism::NoisyCoupling);
        assert!(nc.flagged);
        assert!((nc.rate("gamma_s_prime").unwrap() / g - 1.0).abs() < 1e-9);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn calibrated_mixture_estimates() {
        let r = run(GateSpec::sqrt_iswap(s20()), &[DecoherenceModel::local_t1_t2(90e-9, 60e-9).unwrap()]);
        assert_eq!(r.flagged(), vec![Mechanism::EnergyRelaxation, Mechanism::LocalPureDephasing]);
        let er = &r.finding(Mechanism::EnergyRelaxation).estimated_rates[0];
        assert!((er.value / 90e-9 - 1.0).abs() < 1e-6);
        // the direct inversion is biased low in rate by higher orders
        assert!(er.first_order > 1.15 * 90e-9);
        let g = r.finding(Mechanism::LocalPureDephasing).rate("gamma_pd").unwrap();
        assert!((g * 90e-9 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        let pm = ProcessMatrix::pauli(pauli_basis_2q().identity_chi().unwrap()).unwrap();
        assert!(matches!(fingerprint(&pm), Err(Error::UnsupportedGate { .. })));
        let e = crate::bases::elementary_basis(2);
        let pm = ProcessMatrix::new(CMatrix::identity(16), e.clone(), e).unwrap().with_gate(GateSpec::identity(1.0));
        assert!(matches!(fingerprint(&pm), Err(Error::BasisMismatch { .. })));
    }
}
