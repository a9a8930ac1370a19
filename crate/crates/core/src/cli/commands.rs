use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    epsilon_nl_prime, fingerprint_with, FingerprintOptions, FingerprintReport,
    Mechanism, Table1, ER_CROSS_POSITIONS, ER_DIAG_POSITIONS, ER_IMAG_NEGATIVE, ER_IMAG_POSITIVE,
    NC_SIGNATURE_POSITIONS, PD_CORR_POSITIONS, PD_DIAG_POSITIONS,
};
use crate::bases::BasisId;
use crate::channels::{
    evolution_map, ideal_chi, perturb_outputs, qpt_extract_with, GateKind, GateSpec, QptOptions,
};
use crate::decoherence::{combined_pauli_lambda, DecoherenceModel};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

use super::config::{mhz_to_rad, RunConfig, NS, PER_US};
use super::document::{grid_csv, ChiDocument, GateHeader, OutputsDocument, Units};

fn model_names(models: &[DecoherenceModel]) -> Vec<String> {
    models.iter().map(|m| m.name().to_string()).collect()
}

/// χ document of a configured run and the tomography outputs behind it.
///
/// Without noise χ comes straight from the evolution map; with noise the
/// perturbed outputs are passed through tomography.
pub fn simulate(cfg: &RunConfig, noise: Option<(f64, u64)>) -> Result<(ChiDocument, OutputsDocument)> {
    let gate = cfg.gate_spec()?;
    let models = cfg.models()?;
    let map = evolution_map(&gate, &models)?;
    let mut outputs = map.tomography_outputs()?;
    let b = cfg.basis.single_qubit();
    let pm = match noise {
        None => map.chi(&b, &b)?,
        Some((sigma, seed)) => {
            outputs = perturb_outputs(&outputs, sigma, seed)?;
            qpt_extract_with(&outputs, &b, &b, &QptOptions { tol: cfg.tolerances.qpt })?.with_gate(gate)
        }
    };
    Ok((ChiDocument::from_process(&pm, model_names(&models))?, OutputsDocument::new(Some(&gate), &outputs)))
}

pub(crate) fn qpt(data: &OutputsDocument, cfg: Option<&RunConfig>, tol: Option<f64>) -> Result<ChiDocument> {
    let states = data.states()?;
    let basis = cfg.map_or(BasisId::Pauli, |c| c.basis).single_qubit();
    let tol = tol.or(cfg.map(|c| c.tolerances.qpt)).unwrap_or(QptOptions::default().tol);
    let mut pm = qpt_extract_with(&states, &basis, &basis, &QptOptions { tol })?;
    let gate = match (&data.gate, cfg) {
        (Some(h), _) => Some(h.to_spec()?),
        (None, Some(c)) => Some(c.gate_spec()?),
        (None, None) => None,
    };
    if let Some(g) = gate {
        pm = pm.with_gate(g);
    }
    ChiDocument::from_process(&pm, Vec::new())
}

/// Fingerprint report with times in ns and rates in 1/µs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerprintDocument {
    pub gate: GateHeader,
    pub units: Units,
    pub report: FingerprintReport,
}

impl FingerprintDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("mechanism,evidence,flagged,mass\n");
        for f in &self.report.findings {
            let _ = writeln!(s, "{},{:?},{},{:?}", f.mechanism, f.evidence, f.flagged, f.mass);
        }
        s
    }
}

pub fn fingerprint_document(
    doc: &ChiDocument,
    gate: Option<GateSpec>,
    refine: bool,
    noise: f64,
) -> Result<FingerprintDocument> {
    let mut pm = doc.to_process()?;
    if let Some(g) = gate {
        pm = pm.with_gate(g);
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid("noise", format!("must be finite and ≥ 0, got {noise}")));
    }
    let opts = FingerprintOptions { noise_sigma: noise, refine, ..Default::default() };
    let mut report = fingerprint_with(&pm, &opts)?;
    for f in &mut report.findings {
        for r in &mut f.estimated_rates {
            let (scale, unit) = match r.unit.as_str() {
                "s" => (NS, "ns"),
                "1/s" => (PER_US, "1/us"),
                _ => continue,
            };
            r.value /= scale;
            r.first_order /= scale;
            r.unit = unit.into();
        }
    }
    if let Some(fit) = &mut report.refinement {
        let p = &mut fit.parameters;
        for v in [&mut p.relaxation_q1, &mut p.relaxation_q2, &mut p.gamma_pd_1, &mut p.gamma_pd_2, &mut p.gamma_s] {
            *v /= PER_US;
        }
    }
    Ok(FingerprintDocument {
        gate: GateHeader::from_spec(pm.gate.as_ref().expect("fingerprint checked the gate")),
        units: Units::default(),
        report,
    })
}

pub(crate) fn table1_text(t: &Table1) -> String {
    let mut s = format!("{:<8}", "");
    for c in &t.columns {
        let _ = write!(s, "{c:>8}");
    }
    s.push('\n');
    for r in &t.rows {
        let _ = write!(s, "{:<8}", r.name);
        for n in &r.counts {
            let _ = write!(s, "{n:>8}");
        }
        let _ = writeln!(s, "  {}", if r.matches() { "PASS" } else { "FAIL" });
        if !r.matches() {
            let _ = write!(s, "{:<8}", "  paper");
            for n in &r.expected {
                let _ = write!(s, "{n:>8}");
            }
            s.push('\n');
        }
    }
    s
}

pub(crate) fn table1_csv(t: &Table1) -> String {
    let mut s = format!("row,{},status\n", t.columns.join(","));
    for r in &t.rows {
        let counts: Vec<String> = r.counts.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "{},{},{}", r.name, counts.join(","), if r.matches() { "PASS" } else { "FAIL" });
    }
    s
}

pub const FIGURES: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: String,
    /// `re` or `im`.
    pub part: String,
    pub positions: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureSidecar {
    pub figure: String,
    pub description: String,
    pub gate: GateHeader,
    pub units: Units,
    pub models: Vec<String>,
    pub re_file: String,
    pub im_file: String,
    pub annotations: Vec<Annotation>,
}

#[derive(Clone, Debug)]
pub struct FigureData {
    pub sidecar: FigureSidecar,
    pub chi: CMatrix,
}

impl FigureData {
    /// File names and contents: Re grid, Im grid, JSON sidecar.
    pub fn files(&self) -> Vec<(String, String)> {
        let mut side = serde_json::to_string_pretty(&self.sidecar).expect("sidecar serializes");
        side.push('\n');
        vec![
            (self.sidecar.re_file.clone(), grid_csv(&self.chi, |z| z.re)),
            (self.sidecar.im_file.clone(), grid_csv(&self.chi, |z| z.im)),
            (format!("{}.json", self.sidecar.figure), side),
        ]
    }
}

fn note(label: &str, part: &str, positions: &[(usize, usize)]) -> Annotation {
    Annotation { label: label.into(), part: part.into(), positions: positions.to_vec() }
}

/// Pauli-basis χ of `√iSWAP` at `S/2π = 20 MHz` for the published figures.
pub fn figure(name: &str) -> Result<FigureData> {
    let gate = GateSpec::sqrt_iswap(mhz_to_rad(20.0));
    let rate = 1.0 / (90.0 * NS);
    let (description, models, annotations) = match name {
        "fig1" => ("ideal √iSWAP", vec![], vec![]),
        "fig2" => (
            "local decoherence, T1 = 90 ns, T2 = 60 ns",
            vec![DecoherenceModel::local_t1_t2(90.0 * NS, 60.0 * NS)?],
            vec![
                note("pure dephasing", "re", &PD_DIAG_POSITIONS),
                note(
                    "energy relaxation",
                    "re",
                    &[ER_DIAG_POSITIONS.as_slice(), ER_CROSS_POSITIONS.as_slice()].concat(),
                ),
                note(
                    "energy relaxation",
                    "im",
                    &[ER_IMAG_POSITIVE.as_slice(), ER_IMAG_NEGATIVE.as_slice()].concat(),
                ),
            ],
        ),
        "fig3" => (
            "correlated pure dephasing, Γ_PD = 1/(90 ns), κ = 0.5",
            vec![DecoherenceModel::correlated_dephasing(rate, 0.5)],
            vec![note("correlated dephasing", "re", &PD_CORR_POSITIONS)],
        ),
        "fig4" => (
            "noisy coupling, Γ_s = 1/(90 ns); marked elements exceed (√2−1)/8",
            vec![DecoherenceModel::NoisyCoupling { gamma_s: rate }],
            vec![note("noisy coupling", "im", &NC_SIGNATURE_POSITIONS)],
        ),
        other => return Err(Error::Unknown { kind: "figure".into(), name: other.into() }),
    };
    let chi = evolution_map(&gate, &models)?.pauli_chi()?.chi;
    let annotations = if annotations.is_empty() {
        let nz: Vec<(usize, usize)> = (0..16)
            .flat_map(|m| (0..16).map(move |n| (m, n)))
            .filter(|&p| chi[p].norm() > 1e-12)
            .collect();
        vec![note("nonzero elements", "abs", &nz)]
    } else {
        annotations
    };
    Ok(FigureData {
        sidecar: FigureSidecar {
            figure: name.into(),
            description: description.into(),
            gate: GateHeader::from_spec(&gate),
            units: Units::default(),
            models: model_names(&models),
            re_file: format!("{name}_re.csv"),
            im_file: format!("{name}_im.csv"),
            annotations,
        },
        chi,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    /// `Tr(χ_ideal χ)` in the Pauli basis.
    pub fidelity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_nl_prime: Option<f64>,
    /// Fingerprint evidence per mechanism, when the gate supports it.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub evidence: BTreeMap<Mechanism, f64>,
}

fn set_param(cfg: &mut RunConfig, param: &str, value: f64) -> Result<()> {
    match param {
        "duration_ns" => cfg.gate.duration_ns = Some(value),
        "coupling_mhz" => cfg.gate.coupling_mhz = Some(value),
        "detuning_mhz" => cfg.gate.detuning_mhz = Some(value),
        other => *cfg.decoherence.field_mut(other)? = Some(value),
    }
    cfg.validate()
}

fn sweep_point(cfg: &RunConfig, param: &str, value: f64) -> Result<SweepRow> {
    let mut cfg = cfg.clone();
    set_param(&mut cfg, param, value)?;
    let gate = cfg.gate_spec()?;
    let models = cfg.models()?;
    let pm = evolution_map(&gate, &models)?.pauli_chi()?;
    let ideal = ideal_chi(&gate)?;
    let fidelity = (&ideal * &pm.chi).trace().re;
    let epsilon_nl_prime = if models.is_empty() {
        None
    } else {
        epsilon_nl_prime(&combined_pauli_lambda(&models)?).ok()
    };
    let evidence = if gate.kind == GateKind::XyEvolution {
        BTreeMap::new()
    } else {
        let r = fingerprint_with(&pm, &FingerprintOptions { calibrate: false, ..Default::default() })?;
        r.findings.iter().map(|f| (f.mechanism, f.evidence)).collect()
    };
    Ok(SweepRow {
        value,
        fidelity,
        trace: pm.diagnostics.trace_re,
        min_eigenvalue: pm.diagnostics.min_eigenvalue,
        epsilon_nl_prime,
        evidence,
    })
}

/// Evaluates the configuration at each parameter value, in parallel.
pub fn sweep(cfg: &RunConfig, param: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    values.par_iter().map(|&v| sweep_point(cfg, param, v)).collect()
}

pub(crate) fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("value,fidelity,trace,min_eigenvalue,epsilon_nl_prime");
    for m in Mechanism::ALL {
        let _ = write!(s, ",{m}");
    }
    s.push('\n');
    for r in rows {
        let _ = write!(s, "{:?},{:?},{:?},{:?},", r.value, r.fidelity, r.trace, r.min_eigenvalue);
        if let Some(e) = r.epsilon_nl_prime {
            let _ = write!(s, "{e:?}");
        }
        for m in Mechanism::ALL {
            s.push(',');
            if let Some(e) = r.evidence.get(&m) {
                let _ = write!(s, "{e:?}");
            }
        }
        s.push('\n');
    }
    s
}
