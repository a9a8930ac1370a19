//! JSON documents exchanged by the command-line tool. Complex entries are
//! `[re, im]` pairs in row-major order.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{Diagnostics, ProcessMatrix};
use crate::bases::BasisId;
use crate::channels::{GateKind, GateSpec};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

use super::config::{mhz_to_rad, rad_to_mhz, NS};

pub type ComplexGrid = Vec<Vec<[f64; 2]>>;

pub fn grid_from_matrix(m: &CMatrix) -> ComplexGrid {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_grid(grid: &ComplexGrid, what: &str) -> Result<CMatrix> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    if grid.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!("{what}: rows have different lengths")));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| c(grid[i][j][0], grid[i][j][1])))
}

/// Gate context in command-line units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateHeader {
    pub kind: GateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_mhz: Option<f64>,
    pub duration_ns: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_mhz: Option<f64>,
}

impl GateHeader {
    pub fn from_spec(g: &GateSpec) -> Self {
        GateHeader {
            kind: g.kind,
            coupling_mhz: (g.kind != GateKind::Identity).then(|| rad_to_mhz(g.coupling)),
            duration_ns: g.duration / NS,
            detuning_mhz: (g.kind == GateKind::DetunedIdle).then(|| rad_to_mhz(g.detuning)),
        }
    }

    pub fn to_spec(&self) -> Result<GateSpec> {
        let coupling = || {
            self.coupling_mhz
                .map(mhz_to_rad)
                .ok_or_else(|| Error::invalid("gate.coupling_mhz", "missing from document"))
        };
        let duration = self.duration_ns * NS;
        let spec = match self.kind {
            GateKind::Identity => GateSpec::identity(duration),
            GateKind::SqrtIswap => GateSpec::sqrt_iswap(coupling()?),
            GateKind::XyEvolution => GateSpec::xy_evolution(coupling()?, duration),
            GateKind::DetunedIdle => {
                let detuning = self
                    .detuning_mhz
                    .map(mhz_to_rad)
                    .ok_or_else(|| Error::invalid("gate.detuning_mhz", "missing from document"))?;
                GateSpec { kind: GateKind::DetunedIdle, coupling: coupling()?, detuning, duration }
            }
        };
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub time: String,
    pub frequency: String,
    pub rate: String,
}

impl Default for Units {
    fn default() -> Self {
        Units { time: "ns".into(), frequency: "MHz (ω/2π)".into(), rate: "1/us".into() }
    }
}

/// A process matrix with its basis, gate context and diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiDocument {
    pub basis: BasisId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateHeader>,
    #[serde(default)]
    pub units: Units,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<String>,
    pub chi: ComplexGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

impl ChiDocument {
    pub fn from_process(pm: &ProcessMatrix, models: Vec<String>) -> Result<Self> {
        let basis = pm.basis_id().ok_or_else(|| Error::BasisMismatch {
            expected: "a named product basis".into(),
            found: format!("{}⊗{}", pm.basis1.label(), pm.basis2.label()),
        })?;
        Ok(ChiDocument {
            basis,
            gate: pm.gate.as_ref().map(GateHeader::from_spec),
            units: Units::default(),
            models,
            chi: grid_from_matrix(&pm.chi),
            diagnostics: Some(pm.diagnostics),
        })
    }

    /// Rebuilds the process matrix; diagnostics are recomputed, except the
    /// linearity residual which is carried over.
    pub fn to_process(&self) -> Result<ProcessMatrix> {
        let chi = matrix_from_grid(&self.chi, "chi")?;
        let b = self.basis.single_qubit();
        let mut pm = ProcessMatrix::new(chi, b.clone(), b)?;
        if let Some(g) = &self.gate {
            pm = pm.with_gate(g.to_spec()?);
        }
        pm.diagnostics.linearity_residual = self.diagnostics.and_then(|d| d.linearity_residual);
        Ok(pm)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    /// One `m,n,re,im` line per element.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,n,re,im\n");
        for (m, row) in self.chi.iter().enumerate() {
            for (n, z) in row.iter().enumerate() {
                let _ = writeln!(s, "{m},{n},{:?},{:?}", z[0], z[1]);
            }
        }
        s
    }
}

/// The sixteen tomography outputs; `outputs[4 n1 + n2]` is the state
/// produced from input `|ψ_n1⟩⊗|ψ_n2⟩` with `ψ ∈ {|0⟩, |1⟩, |+⟩, |+i⟩}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateHeader>,
    pub outputs: Vec<ComplexGrid>,
}

impl OutputsDocument {
    pub fn new(gate: Option<&GateSpec>, outputs: &[CMatrix]) -> Self {
        OutputsDocument {
            gate: gate.map(GateHeader::from_spec),
            outputs: outputs.iter().map(grid_from_matrix).collect(),
        }
    }

    pub fn states(&self) -> Result<Vec<CMatrix>> {
        self.outputs
            .iter()
            .enumerate()
            .map(|(i, g)| matrix_from_grid(g, &format!("output {i}")))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }
}

/// A real 16x16 grid as CSV without header.
pub fn grid_csv(m: &CMatrix, part: fn(crate::linalg::C64) -> f64) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:?}", part(m[(i, j)]))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}
