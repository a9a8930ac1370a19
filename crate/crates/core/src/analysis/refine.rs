use serde::{Deserialize, Serialize};

use crate::channels::{evolution_map, GateKind, GateSpec};
use crate::decoherence::{DecoherenceModel, QubitRelaxation};
use crate::error::Result;
use crate::linalg::CMatrix;

use super::fingerprint::{FingerprintReport, MechanismFinding};
use super::first_order::Mechanism;
use super::ProcessMatrix;

/// Improvement of the objective per sweep below which the fit stops.
pub const REFINE_TOL: f64 = 1e-12;
pub const REFINE_MAX_SWEEPS: usize = 400;

/// Model parameters fitted by [`refine`]. Rates are in 1/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParameters {
    /// Zero-temperature relaxation rates `1/T1` of qubits 1 and 2.
    pub relaxation_q1: f64,
    pub relaxation_q2: f64,
    pub gamma_pd_1: f64,
    pub gamma_pd_2: f64,
    pub kappa: f64,
    /// `Γ_s`, or `Γ_s'` for a detuned idle.
    pub gamma_s: f64,
}

impl FitParameters {
    pub const ZERO: FitParameters = FitParameters {
        relaxation_q1: 0.0,
        relaxation_q2: 0.0,
        gamma_pd_1: 0.0,
        gamma_pd_2: 0.0,
        kappa: 0.0,
        gamma_s: 0.0,
    };

    pub(crate) const KAPPA: usize = 4;

    /// Starting point taken from the estimates of flagged mechanisms.
    pub fn from_report(report: &FingerprintReport, gate: &GateSpec) -> Self {
        Self::read(report, gate, true)
    }

    pub(crate) fn read(report: &FingerprintReport, gate: &GateSpec, flagged_only: bool) -> Self {
        let mut p = FitParameters::ZERO;
        let use_finding = |f: &MechanismFinding| (f.flagged || !flagged_only) && !f.estimated_rates.is_empty();
        let er = report.finding(Mechanism::EnergyRelaxation);
        if use_finding(er) {
            let inv = |t: Option<f64>| t.filter(|t| *t > 0.0).map_or(0.0, |t| 1.0 / t);
            match gate.kind {
                GateKind::SqrtIswap => {
                    p.relaxation_q1 = inv(er.rate("t1"));
                    p.relaxation_q2 = p.relaxation_q1;
                }
                _ => {
                    p.relaxation_q1 = inv(er.rate("t1_q1"));
                    p.relaxation_q2 = inv(er.rate("t1_q2"));
                }
            }
        }
        for m in [Mechanism::LocalPureDephasing, Mechanism::CorrelatedDephasing] {
            let f = report.finding(m);
            if use_finding(f) {
                let g = f.rate("gamma_pd").unwrap_or(0.0).max(0.0);
                p.gamma_pd_1 = f.rate("gamma_pd_1").unwrap_or(g).max(0.0);
                p.gamma_pd_2 = f.rate("gamma_pd_2").unwrap_or(g).max(0.0);
                if m == Mechanism::CorrelatedDephasing || !flagged_only {
                    p.kappa = f.rate("kappa").unwrap_or(0.0).clamp(-1.0, 1.0);
                }
            }
        }
        let nc = report.finding(Mechanism::NoisyCoupling);
        if use_finding(nc) {
            p.gamma_s = nc.rate("gamma_s").or(nc.rate("gamma_s_prime")).unwrap_or(0.0).max(0.0);
        }
        p
    }

    /// Indices of the parameters that describe some mechanism.
    pub(crate) fn active(&self) -> Vec<usize> {
        (0..6)
            .filter(|&i| {
                if i == Self::KAPPA {
                    self.kappa != 0.0 && (self.gamma_pd_1 > 0.0 || self.gamma_pd_2 > 0.0)
                } else {
                    self.get(i) > 0.0
                }
            })
            .collect()
    }

    /// Stores `√iSWAP` estimates back into the findings they came from.
    pub(crate) fn write(&self, report: &mut FingerprintReport) {
        let mut put = |m: Mechanism, name: &str, v: f64| {
            if let Some(f) = report.findings.iter_mut().find(|f| f.mechanism == m && f.flagged) {
                if let Some(r) = f.estimated_rates.iter_mut().find(|r| r.name == name) {
                    r.value = v;
                }
            }
        };
        if self.relaxation_q1 > 0.0 {
            put(Mechanism::EnergyRelaxation, "t1", 1.0 / self.relaxation_q1);
        }
        for m in [Mechanism::LocalPureDephasing, Mechanism::CorrelatedDephasing] {
            put(m, "gamma_pd", self.gamma_pd_1);
        }
        put(Mechanism::CorrelatedDephasing, "kappa", self.kappa);
        put(Mechanism::NoisyCoupling, "gamma_s", self.gamma_s);
    }

    pub(crate) fn get(&self, i: usize) -> f64 {
        [self.relaxation_q1, self.relaxation_q2, self.gamma_pd_1, self.gamma_pd_2, self.kappa, self.gamma_s][i]
    }

    pub(crate) fn set(&mut self, i: usize, v: f64) {
        let slot = match i {
            0 => &mut self.relaxation_q1,
            1 => &mut self.relaxation_q2,
            2 => &mut self.gamma_pd_1,
            3 => &mut self.gamma_pd_2,
            4 => &mut self.kappa,
            _ => &mut self.gamma_s,
        };
        *slot = if i == 4 { v.clamp(-1.0, 1.0) } else { v.max(0.0) };
    }

    pub fn models(&self, gate: &GateSpec) -> Vec<DecoherenceModel> {
        let mut models = Vec::new();
        let er = |g: f64| {
            if g > 0.0 {
                QubitRelaxation::thermal_relaxation(g, 0.0)
            } else {
                QubitRelaxation::NONE
            }
        };
        if self.relaxation_q1 > 0.0 || self.relaxation_q2 > 0.0 {
            models.push(DecoherenceModel::LocalBloch {
                qubit1: er(self.relaxation_q1),
                qubit2: er(self.relaxation_q2),
            });
        }
        if self.gamma_pd_1 > 0.0 || self.gamma_pd_2 > 0.0 {
            models.push(DecoherenceModel::CorrelatedDephasing {
                gamma1: self.gamma_pd_1,
                gamma2: self.gamma_pd_2,
                kappa: self.kappa,
            });
        }
        if self.gamma_s > 0.0 {
            models.push(if gate.kind == GateKind::DetunedIdle {
                DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime: self.gamma_s }
            } else {
                DecoherenceModel::NoisyCoupling { gamma_s: self.gamma_s }
            });
        }
        models
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub parameters: FitParameters,
    /// `‖χ_model − χ‖_F²` at the fitted parameters.
    pub objective: f64,
    pub sweeps: usize,
    pub converged: bool,
}

fn model_chi(gate: &GateSpec, p: &FitParameters) -> Result<CMatrix> {
    Ok(evolution_map(gate, &p.models(gate))?.pauli_chi()?.chi)
}

fn objective(gate: &GateSpec, p: &FitParameters, target: &CMatrix) -> Result<f64> {
    let d = &model_chi(gate, p)? - target;
    Ok(d.frobenius_norm().powi(2))
}

/// Least-squares fit of the mechanism rates to a Pauli-basis χ by
/// coordinate descent with adaptive step sizes.
pub fn refine(pm: &ProcessMatrix, gate: &GateSpec, start: FitParameters) -> Result<Refinement> {
    let rate_scale = match gate.kind {
        GateKind::SqrtIswap => gate.coupling,
        _ => 1.0 / gate.duration,
    };
    let floor = [1e-3 * rate_scale, 1e-3 * rate_scale, 1e-3 * rate_scale, 1e-3 * rate_scale, 0.05, 1e-3 * rate_scale];
    let mut p = start;
    let mut steps: Vec<f64> = (0..6).map(|i| (0.2 * p.get(i).abs()).max(floor[i])).collect();
    let mut best = objective(gate, &p, &pm.chi)?;
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < REFINE_MAX_SWEEPS {
        sweeps += 1;
        let before = best;
        for (i, step) in steps.iter_mut().enumerate() {
            // κ is irrelevant without dephasing
            if i == FitParameters::KAPPA && p.gamma_pd_1 == 0.0 && p.gamma_pd_2 == 0.0 {
                *step = 0.0;
                continue;
            }
            let mut moved = false;
            for dir in [1.0, -1.0] {
                let mut q = p;
                q.set(i, p.get(i) + dir * *step);
                if q.get(i) == p.get(i) {
                    continue;
                }
                let f = objective(gate, &q, &pm.chi)?;
                if f < best {
                    best = f;
                    p = q;
                    moved = true;
                    *step *= 1.5;
                    break;
                }
            }
            if !moved {
                *step *= 0.5;
            }
        }
        let small = steps.iter().enumerate().all(|(i, &st)| st < 1e-7 * floor[i].max(p.get(i).abs()));
        if before - best < REFINE_TOL && small {
            converged = true;
            break;
        }
    }
    Ok(Refinement { parameters: p, objective: best, sweeps, converged })
}
