use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, C64};

/// Decoherence mechanisms distinguished by the analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    EnergyRelaxation,
    LocalPureDephasing,
    CorrelatedDephasing,
    NoisyCoupling,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::EnergyRelaxation,
        Mechanism::LocalPureDephasing,
        Mechanism::CorrelatedDephasing,
        Mechanism::NoisyCoupling,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::EnergyRelaxation => "energy_relaxation",
            Mechanism::LocalPureDephasing => "local_pure_dephasing",
            Mechanism::CorrelatedDephasing => "correlated_dephasing",
            Mechanism::NoisyCoupling => "noisy_coupling",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mechanism {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy_relaxation" | "er" => Ok(Mechanism::EnergyRelaxation),
            "local_pure_dephasing" | "lpd" => Ok(Mechanism::LocalPureDephasing),
            "correlated_dephasing" | "cd" => Ok(Mechanism::CorrelatedDephasing),
            "noisy_coupling" | "nc" => Ok(Mechanism::NoisyCoupling),
            other => Err(Error::Unknown { kind: "mechanism".into(), name: other.into() }),
        }
    }
}

/// Rates entering the first-order formulas (1/s, dimensionless `κ`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RateSet {
    pub t1: Option<f64>,
    pub gamma_pd: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma_s: Option<f64>,
}

/// Default `rate/S` above which the first-order expansion is flagged.
pub const WEAK_DECOHERENCE_LIMIT: f64 = 0.2;

/// Sparse first-order extra elements of the `√iSWAP` χ (Pauli basis).
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderExtras {
    pub entries: BTreeMap<(usize, usize), C64>,
    /// Dimensionless expansion parameter `rate/S`.
    pub rate_over_s: f64,
    /// Whether `rate_over_s` is within the weak-decoherence limit.
    pub weak: bool,
}

/// Coefficient of the `χ11` family, `(π + 2√2)/16`, per unit `1/(S T1)`.
pub const ER_DIAG_COEFF: f64 = (PI + 2.0 * SQRT_2) / 16.0;
/// Coefficient of the `χ03` family, `π(2 + √2)/32`.
pub const ER_CROSS_COEFF: f64 = PI * (2.0 + SQRT_2) / 32.0;
/// Coefficient `(3π + 2)/16` of the dominant dephasing elements.
pub const PD_MAIN_COEFF: f64 = (3.0 * PI + 2.0) / 16.0;
/// Coefficient `(π − 2)/16` of the subdominant dephasing elements.
pub const PD_MINOR_COEFF: f64 = (PI - 2.0) / 16.0;

pub const ER_DIAG_POSITIONS: [(usize, usize); 4] = [(1, 1), (2, 2), (4, 4), (8, 8)];
pub const ER_CROSS_POSITIONS: [(usize, usize); 4] = [(0, 3), (3, 0), (0, 12), (12, 0)];
/// Positions with value `+i·ER_DIAG_COEFF/(S T1)`.
pub const ER_IMAG_POSITIVE: [(usize, usize); 2] = [(2, 1), (8, 4)];
pub const ER_IMAG_NEGATIVE: [(usize, usize); 2] = [(1, 2), (4, 8)];

/// Smaller first-order energy-relaxation elements of `√iSWAP`, per unit
/// `1/(S T1)`. Positions and values were resolved from the exponentiated
/// pipeline at `S T1 → ∞`; the values coincide with the listed closed forms
/// to better than 1e-9.
pub fn er_minor_elements() -> Vec<((usize, usize), C64)> {
    let a = PI / (16.0 * SQRT_2);
    let b = PI * (2.0 - SQRT_2) / 32.0;
    let d = (PI - 2.0 * SQRT_2) / 16.0;
    let mut v = Vec::with_capacity(20);
    for pos in [(3, 5), (3, 10), (12, 5), (12, 10)] {
        v.push((pos, c(0.0, a)));
        v.push(((pos.1, pos.0), c(0.0, -a)));
    }
    for pos in [(3, 15), (15, 3), (12, 15), (15, 12)] {
        v.push((pos, c(b, 0.0)));
    }
    for k in [7, 11, 13, 14] {
        v.push(((k, k), c(d, 0.0)));
    }
    for (p, q) in [(11, 7), (14, 13)] {
        v.push(((p, q), c(0.0, d)));
        v.push(((q, p), c(0.0, -d)));
    }
    v
}

/// Positions of the dominant energy-relaxation elements.
pub fn er_main_positions() -> Vec<(usize, usize)> {
    ER_DIAG_POSITIONS
        .iter()
        .chain(&ER_CROSS_POSITIONS)
        .chain(&ER_IMAG_POSITIVE)
        .chain(&ER_IMAG_NEGATIVE)
        .copied()
        .collect()
}

pub const PD_DIAG_POSITIONS: [(usize, usize); 2] = [(3, 3), (12, 12)];
pub const PD_CORR_POSITIONS: [(usize, usize); 2] = [(3, 12), (12, 3)];
/// `χ66 = χ99 = −χ69 = −χ96` family of dephasing under `√iSWAP`.
pub const PD_MINOR_POSITIVE: [(usize, usize); 2] = [(6, 6), (9, 9)];
pub const PD_MINOR_NEGATIVE: [(usize, usize); 2] = [(6, 9), (9, 6)];

fn require(rate: Option<f64>, name: &str) -> Result<f64> {
    match rate {
        Some(v) if v.is_finite() && v >= 0.0 => Ok(v),
        Some(v) => Err(Error::invalid(name, format!("must be finite and ≥ 0, got {v}"))),
        None => Err(Error::invalid(name, "required by this mechanism")),
    }
}

/// First-order extra elements of the `√iSWAP` χ for one mechanism.
///
/// Noisy coupling produces no extra elements and returns an empty map.
pub fn first_order_extras(mechanism: Mechanism, rates: &RateSet, s: f64) -> Result<FirstOrderExtras> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::invalid("coupling", format!("S must be positive, got {s}")));
    }
    let mut entries = BTreeMap::new();
    let rate = match mechanism {
        Mechanism::EnergyRelaxation => {
            let t1 = rates.t1.ok_or_else(|| Error::invalid("t1", "required by this mechanism"))?;
            if t1.is_nan() || t1 <= 0.0 {
                return Err(Error::invalid("t1", format!("must be positive, got {t1}")));
            }
            let x = 1.0 / (s * t1);
            for p in ER_DIAG_POSITIONS {
                entries.insert(p, c(ER_DIAG_COEFF * x, 0.0));
            }
            for p in ER_CROSS_POSITIONS {
                entries.insert(p, c(ER_CROSS_COEFF * x, 0.0));
            }
            for p in ER_IMAG_POSITIVE {
                entries.insert(p, c(0.0, ER_DIAG_COEFF * x));
            }
            for p in ER_IMAG_NEGATIVE {
                entries.insert(p, c(0.0, -ER_DIAG_COEFF * x));
            }
            for (p, v) in er_minor_elements() {
                entries.insert(p, v * x);
            }
            1.0 / t1
        }
        Mechanism::LocalPureDephasing | Mechanism::CorrelatedDephasing => {
            let g = require(rates.gamma_pd, "gamma_pd")?;
            let kappa = if mechanism == Mechanism::LocalPureDephasing {
                0.0
            } else {
                let k = rates.kappa.ok_or_else(|| Error::invalid("kappa", "required by this mechanism"))?;
                if !(-1.0..=1.0).contains(&k) {
                    return Err(Error::invalid("kappa", format!("must lie in [-1, 1], got {k}")));
                }
                k
            };
            let x = g / s;
            let diag = (PD_MAIN_COEFF + PD_MINOR_COEFF * kappa) * x;
            let corr = (PD_MINOR_COEFF + PD_MAIN_COEFF * kappa) * x;
            let minor = PD_MINOR_COEFF * (1.0 - kappa) * x;
            for p in PD_DIAG_POSITIONS {
                entries.insert(p, c(diag, 0.0));
            }
            for p in PD_CORR_POSITIONS {
                entries.insert(p, c(corr, 0.0));
            }
            for p in PD_MINOR_POSITIVE {
                entries.insert(p, c(minor, 0.0));
            }
            for p in PD_MINOR_NEGATIVE {
                entries.insert(p, c(-minor, 0.0));
            }
            g
        }
        Mechanism::NoisyCoupling => require(rates.gamma_s, "gamma_s")?,
    };
    let rate_over_s = rate / s;
    Ok(FirstOrderExtras { entries, rate_over_s, weak: rate_over_s <= WEAK_DECOHERENCE_LIMIT })
}

/// Second-order energy-relaxation elements `(π²/64)(S T1)⁻²` that share
/// positions with the dephasing signature.
pub fn er_second_order_dephasing_elements(t1: f64, s: f64) -> Vec<((usize, usize), f64)> {
    let v = PI * PI / 64.0 / (s * t1).powi(2);
    PD_DIAG_POSITIONS.iter().chain(&PD_CORR_POSITIONS).map(|&p| (p, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{evolution_map, ideal_chi, GateSpec};
    use crate::decoherence::DecoherenceModel;

    fn s20() -> f64 {
        2.0 * PI * 20e6
    }

    #[test]
    fn closed_form_values() {
        assert!((ER_DIAG_COEFF - 0.37313).abs() < 1e-5);
        assert!((ER_CROSS_COEFF - 0.3352).abs() < 1e-4);
        assert!((PD_MAIN_COEFF - 0.71405).abs() < 1e-5);
        assert!((PD_MINOR_COEFF - 0.0713).abs() < 1e-4);
        let er = first_order_extras(
            Mechanism::EnergyRelaxation,
            &RateSet { t1: Some(90e-9), ..Default::default() },
            s20(),
        )
        .unwrap();
        assert_eq!(er.entries.len(), 32);
        assert!(er.weak);
        let nc = first_order_extras(
            Mechanism::NoisyCoupling,
            &RateSet { gamma_s: Some(1e6), ..Default::default() },
            s20(),
        )
        .unwrap();
        assert!(nc.entries.is_empty());
        assert!("bogus".parse::<Mechanism>().is_err());
        assert!(first_order_extras(Mechanism::CorrelatedDephasing, &RateSet::default(), s20()).is_err());
    }

    #[test]
    fn weak_flag() {
        let r = RateSet { gamma_pd: Some(0.5 * s20()), ..Default::default() };
        assert!(!first_order_extras(Mechanism::LocalPureDephasing, &r, s20()).unwrap().weak);
    }

    #[test]
    fn er_elements_match_pipeline_at_weak_decoherence() {
        // the pipeline oracle behind the minor-element table
        let s = s20();
        let t1 = 1e-2;
        let spec = GateSpec::sqrt_iswap(s);
        let chi = evolution_map(&spec, &[DecoherenceModel::local_energy_relaxation(t1)])
            .unwrap()
            .pauli_chi()
            .unwrap()
            .chi;
        let ideal = ideal_chi(&spec).unwrap();
        let delta = (&chi - &ideal).scale_real(s * t1);
        let model = first_order_extras(
            Mechanism::EnergyRelaxation,
            &RateSet { t1: Some(t1), ..Default::default() },
            s,
        )
        .unwrap();
        for (m, n, v) in delta.entries() {
            if ideal[(m, n)].norm() > 1e-12 {
                continue;
            }
            let expect = model.entries.get(&(m, n)).map_or(c(0.0, 0.0), |e| e * (s * t1));
            assert!((v - expect).norm() < 1e-6, "({m},{n}): {v} vs {expect}");
        }
    }

    #[test]
    fn dephasing_elements_match_pipeline_at_weak_decoherence() {
        let s = s20();
        let g = 1e-6 * s;
        let spec = GateSpec::sqrt_iswap(s);
        let ideal = ideal_chi(&spec).unwrap();
        for &kappa in &[0.0, 0.5, -0.8] {
            let chi = evolution_map(&spec, &[DecoherenceModel::correlated_dephasing(g, kappa)])
                .unwrap()
                .pauli_chi()
                .unwrap()
                .chi;
            let delta = (&chi - &ideal).scale_real(s / g);
            let model = first_order_extras(
                Mechanism::CorrelatedDephasing,
                &RateSet { gamma_pd: Some(g), kappa: Some(kappa), ..Default::default() },
                s,
            )
            .unwrap();
            for (m, n, v) in delta.entries() {
                if ideal[(m, n)].norm() > 1e-12 {
                    continue;
                }
                let expect = model.entries.get(&(m, n)).map_or(c(0.0, 0.0), |e| e * (s / g));
                assert!((v - expect).norm() < 1e-5, "κ={kappa} ({m},{n}): {v} vs {expect}");
            }
        }
    }

    #[test]
    fn second_order_er_on_dephasing_positions() {
        let s = s20();
        let t1 = 2000.0 / s;
        let spec = GateSpec::sqrt_iswap(s);
        let chi = evolution_map(&spec, &[DecoherenceModel::local_energy_relaxation(t1)])
            .unwrap()
            .pauli_chi()
            .unwrap()
            .chi;
        for (p, v) in er_second_order_dephasing_elements(t1, s) {
            assert!((chi[p].re - v).abs() < 0.01 * v, "{p:?}: {} vs {v}", chi[p].re);
        }
    }
}
