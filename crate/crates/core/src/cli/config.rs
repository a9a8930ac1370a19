//! Run configuration. Times are in ns, `S/2π` and `Δω/2π` in MHz and
//! decoherence rates in 1/µs; everything is converted to seconds and rad/s
//! once, in [`RunConfig::gate_spec`] and [`RunConfig::models`].

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bases::BasisId;
use crate::channels::{GateKind, GateSpec, QptOptions};
use crate::decoherence::{DecoherenceModel, QubitRelaxation, MIN_DETUNING_RATIO};
use crate::error::{Error, Result};

pub const NS: f64 = 1e-9;
pub const PER_US: f64 = 1e6;

/// Angular frequency of 1 MHz.
pub const MHZ: f64 = 2.0 * PI * 1e6;

pub fn mhz_to_rad(f: f64) -> f64 {
    f * MHZ
}

pub fn rad_to_mhz(w: f64) -> f64 {
    w / MHZ
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub kind: GateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_mhz: Option<f64>,
    /// Smallest accepted `|Δω|/|S|` for a detuned idle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_detuning_ratio: Option<f64>,
}

/// Decoherence parameters; absent fields mean the process is absent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_q1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_q1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_u_q1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_q2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_q2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_u_q2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_pd_1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_pd_2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_s_prime: Option<f64>,
}

impl DecoherenceConfig {
    pub const FIELDS: [&'static str; 11] = [
        "t1_q1", "t2_q1", "gamma_u_q1", "t1_q2", "t2_q2", "gamma_u_q2", "gamma_pd_1", "gamma_pd_2",
        "kappa", "gamma_s", "gamma_s_prime",
    ];

    pub fn field_mut(&mut self, name: &str) -> Result<&mut Option<f64>> {
        Ok(match name {
            "t1_q1" => &mut self.t1_q1,
            "t2_q1" => &mut self.t2_q1,
            "gamma_u_q1" => &mut self.gamma_u_q1,
            "t1_q2" => &mut self.t1_q2,
            "t2_q2" => &mut self.t2_q2,
            "gamma_u_q2" => &mut self.gamma_u_q2,
            "gamma_pd_1" => &mut self.gamma_pd_1,
            "gamma_pd_2" => &mut self.gamma_pd_2,
            "kappa" => &mut self.kappa,
            "gamma_s" => &mut self.gamma_s,
            "gamma_s_prime" => &mut self.gamma_s_prime,
            other => return Err(Error::Unknown { kind: "parameter".into(), name: other.into() }),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Hermiticity, trace and linearity checks of tomography data.
    #[serde(default = "default_tol")]
    pub qpt: f64,
}

fn default_tol() -> f64 {
    QptOptions::default().tol
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { qpt: default_tol() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gate: GateConfig,
    #[serde(default)]
    pub decoherence: DecoherenceConfig,
    #[serde(default = "default_basis")]
    pub basis: BasisId,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_basis() -> BasisId {
    BasisId::Pauli
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be non-negative and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn new(gate: GateConfig) -> Self {
        RunConfig {
            gate,
            decoherence: DecoherenceConfig::default(),
            basis: BasisId::Pauli,
            format: OutputFormat::Json,
            tolerances: Tolerances::default(),
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        positive("tolerances.qpt", self.tolerances.qpt)?;
        self.gate_spec()?;
        self.models()?;
        Ok(())
    }

    pub fn gate_spec(&self) -> Result<GateSpec> {
        let g = &self.gate;
        let coupling = || -> Result<f64> {
            let v = g.coupling_mhz.ok_or_else(|| Error::invalid("gate.coupling_mhz", "required for this gate"))?;
            Ok(mhz_to_rad(positive("gate.coupling_mhz", v)?))
        };
        let duration = || -> Result<f64> {
            let v = g.duration_ns.ok_or_else(|| Error::invalid("gate.duration_ns", "required for this gate"))?;
            Ok(non_negative("gate.duration_ns", v)? * NS)
        };
        let spec = match g.kind {
            GateKind::Identity => GateSpec::identity(duration()?),
            GateKind::SqrtIswap => {
                let spec = GateSpec::sqrt_iswap(coupling()?);
                if let Some(t) = g.duration_ns {
                    let expect = spec.duration / NS;
                    if (t - expect).abs() > 1e-6 * expect {
                        return Err(Error::invalid(
                            "gate.duration_ns",
                            format!("√iSWAP lasts π/2S = {expect:.6} ns, got {t}"),
                        ));
                    }
                }
                spec
            }
            GateKind::XyEvolution => GateSpec::xy_evolution(coupling()?, duration()?),
            GateKind::DetunedIdle => {
                let detuning = g
                    .detuning_mhz
                    .ok_or_else(|| Error::invalid("gate.detuning_mhz", "required for a detuned idle"))?;
                let ratio = positive("gate.min_detuning_ratio", g.min_detuning_ratio.unwrap_or(MIN_DETUNING_RATIO))?;
                let spec = GateSpec {
                    kind: GateKind::DetunedIdle,
                    coupling: coupling()?,
                    detuning: mhz_to_rad(detuning),
                    duration: duration()?,
                };
                spec.validate_with_ratio(ratio)?;
                return Ok(spec);
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    fn qubit(&self, t1: Option<f64>, t2: Option<f64>, gamma_u: Option<f64>, q: &str) -> Result<Option<QubitRelaxation>> {
        if t1.is_none() && t2.is_none() && gamma_u.is_none() {
            return Ok(None);
        }
        let f = |name: &str| format!("{name}_{q}");
        let t1 = match t1 {
            Some(v) => positive(&f("t1"), v)? * NS,
            None => f64::INFINITY,
        };
        let t2 = match t2 {
            Some(v) => positive(&f("t2"), v)? * NS,
            None => 2.0 * t1,
        };
        let gu = non_negative(&f("gamma_u"), gamma_u.unwrap_or(0.0))? * PER_US;
        if gu > 0.0 && gu > 1.0 / t1 {
            return Err(Error::invalid(f("gamma_u"), "upward rate exceeds 1/T1"));
        }
        if t2 > 2.0 * t1 * (1.0 + 1e-12) {
            return Err(Error::invalid(f("t2"), "T2 may not exceed 2 T1"));
        }
        QubitRelaxation::from_times(t1, t2, gu).map(Some)
    }

    pub fn models(&self) -> Result<Vec<DecoherenceModel>> {
        let d = &self.decoherence;
        let mut models = Vec::new();
        let q1 = self.qubit(d.t1_q1, d.t2_q1, d.gamma_u_q1, "q1")?;
        let q2 = self.qubit(d.t1_q2, d.t2_q2, d.gamma_u_q2, "q2")?;
        if q1.is_some() || q2.is_some() {
            models.push(DecoherenceModel::LocalBloch {
                qubit1: q1.unwrap_or(QubitRelaxation::NONE),
                qubit2: q2.unwrap_or(QubitRelaxation::NONE),
            });
        }
        if d.gamma_pd_1.is_some() || d.gamma_pd_2.is_some() {
            let g1 = non_negative("gamma_pd_1", d.gamma_pd_1.unwrap_or(0.0))? * PER_US;
            let g2 = non_negative("gamma_pd_2", d.gamma_pd_2.unwrap_or(0.0))? * PER_US;
            let kappa = d.kappa.unwrap_or(0.0);
            if !(-1.0..=1.0).contains(&kappa) {
                return Err(Error::invalid("kappa", format!("must lie in [-1, 1], got {kappa}")));
            }
            models.push(DecoherenceModel::CorrelatedDephasing { gamma1: g1, gamma2: g2, kappa });
        } else if d.kappa.is_some() {
            return Err(Error::invalid("kappa", "needs gamma_pd_1 or gamma_pd_2"));
        }
        if let Some(g) = d.gamma_s {
            if self.gate.kind == GateKind::DetunedIdle {
                return Err(Error::invalid("gamma_s", "use gamma_s_prime for a detuned idle"));
            }
            models.push(DecoherenceModel::NoisyCoupling { gamma_s: non_negative("gamma_s", g)? * PER_US });
        }
        if let Some(g) = d.gamma_s_prime {
            if self.gate.kind != GateKind::DetunedIdle {
                return Err(Error::invalid("gamma_s_prime", "only valid for a detuned idle"));
            }
            models.push(DecoherenceModel::DetunedNoisyCoupling {
                gamma_s_prime: non_negative("gamma_s_prime", g)? * PER_US,
            });
        }
        Ok(models)
    }
}
