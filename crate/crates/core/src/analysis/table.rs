use serde::{Deserialize, Serialize};

use crate::channels::{evolution_map, GateSpec};
use crate::decoherence::{
    combined_pauli_lambda, nonzero_count, nu_from_generator, DecoherenceModel, QubitRelaxation,
};
use crate::error::Result;
use crate::linalg::CMatrix;

pub const TABLE1_COLUMNS: [&str; 8] = ["ER_T>0", "ER_T=0", "LPD", "LD_T>0", "LD_T=0", "CD", "CCD", "NC"];
pub const TABLE1_ROWS: [&str; 4] = ["lambda", "nu", "chi", "jtilde"];

/// Published nonzero counts, rows in [`TABLE1_ROWS`] order.
pub const TABLE1_EXPECTED: [[usize; 8]; 4] = [
    [13, 13, 3, 15, 15, 7, 7, 7],
    [32, 23, 12, 32, 23, 12, 10, 16],
    [64, 64, 4, 64, 64, 8, 8, 8],
    [36, 25, 16, 36, 25, 16, 16, 20],
];

/// Rate used for every mechanism, 1/(90 ns).
pub const TABLE1_RATE: f64 = 1.0 / 90e-9;
/// Identity-gate duration for the χ and `J̃` rows.
pub const TABLE1_TIME: f64 = 10e-9;
/// Relative tolerance for the analytic λ and ν rows (times the rate).
pub const TABLE1_GENERATOR_TOL: f64 = 1e-12;
/// Absolute tolerance for the exponentiated χ and `J̃` rows.
pub const TABLE1_MAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub name: String,
    pub counts: Vec<usize>,
    pub expected: Vec<usize>,
}

impl Table1Row {
    pub fn matches(&self) -> bool {
        self.counts == self.expected
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub columns: Vec<String>,
    pub rows: Vec<Table1Row>,
}

impl Table1 {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(Table1Row::matches)
    }

    pub fn mismatches(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.counts.iter().zip(&r.expected).filter(|(a, b)| a != b).count())
            .sum()
    }
}

/// Models behind each column, at generic (non-degenerate) rates.
pub fn table1_models() -> Vec<(&'static str, DecoherenceModel)> {
    let g = TABLE1_RATE;
    let both = |q: QubitRelaxation| DecoherenceModel::LocalBloch { qubit1: q, qubit2: q };
    let thermal = QubitRelaxation::thermal_relaxation(g, 0.3 * g);
    let cold = QubitRelaxation::thermal_relaxation(g, 0.0);
    let with_pd = |q: QubitRelaxation| QubitRelaxation { dephasing_rate: q.dephasing_rate + g, ..q };
    let models = [
        both(thermal),
        both(cold),
        DecoherenceModel::local_pure_dephasing(g),
        both(with_pd(thermal)),
        both(with_pd(cold)),
        DecoherenceModel::correlated_dephasing(g, 0.5),
        DecoherenceModel::correlated_dephasing(g, 1.0),
        DecoherenceModel::NoisyCoupling { gamma_s: g },
    ];
    TABLE1_COLUMNS.iter().copied().zip(models).collect()
}

/// Recomputes the number of nonzero elements of λ (Pauli), ν, χ (Pauli)
/// and `J̃` for each model; χ and `J̃` are for the identity gate.
pub fn table1() -> Result<Table1> {
    let mut counts = vec![Vec::new(); 4];
    let gate = GateSpec::identity(TABLE1_TIME);
    for (_, model) in table1_models() {
        let lam = combined_pauli_lambda(std::slice::from_ref(&model))?;
        let nu: CMatrix = nu_from_generator(&model.generator()?)?;
        let map = evolution_map(&gate, std::slice::from_ref(&model))?;
        let tol = TABLE1_GENERATOR_TOL * TABLE1_RATE;
        counts[0].push(nonzero_count(&lam.mat, tol));
        counts[1].push(nonzero_count(&nu, tol));
        counts[2].push(nonzero_count(&map.pauli_chi()?.chi, TABLE1_MAP_TOL));
        counts[3].push(nonzero_count(&map.jtilde()?, TABLE1_MAP_TOL));
    }
    Ok(Table1 {
        columns: TABLE1_COLUMNS.iter().map(|s| s.to_string()).collect(),
        rows: TABLE1_ROWS
            .iter()
            .zip(counts)
            .zip(TABLE1_EXPECTED)
            .map(|((name, counts), expected)| Table1Row {
                name: name.to_string(),
                counts,
                expected: expected.to_vec(),
            })
            .collect(),
    })
}
