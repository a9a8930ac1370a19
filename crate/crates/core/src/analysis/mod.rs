//! Nonlocality metrics, analytic reference solutions, mechanism
//! fingerprinting and the first-order approximation study.

mod approx;
mod exact;
mod fingerprint;
mod first_order;
mod nonlocality;
mod process;
mod refine;
mod table;

pub use approx::{approx_error, element_deviations};
pub use exact::{
    exact_cd_chi, exact_nc_chi, nc_gamma, nc_h, nc_ratio_from_signature, nc_signature,
    nc_signature_crossing, nc_signature_peak, IDEAL_BLOCK, NC_SIGNATURE_BASELINE,
    NC_SIGNATURE_POSITIONS,
};
pub use first_order::*;
pub use nonlocality::{epsilon_nl, epsilon_nl_prime, factorized_chi, local_part, reduced_pair};
pub use process::{Diagnostics, ProcessMatrix};
pub use fingerprint::{
    fingerprint, fingerprint_with, reference_chi, FingerprintOptions, FingerprintReport,
    MechanismFinding, Position, RateEstimate, Signatures, KAPPA_CORRELATED, KAPPA_RELIABILITY,
    NC_DETUNED_NEGATIVE, NC_DETUNED_POSITIVE, NC_IDENTITY_POSITIONS, SHARED_POSITIONS,
};
pub use refine::{refine, FitParameters, Refinement, REFINE_MAX_SWEEPS, REFINE_TOL};
pub use table::{
    table1, table1_models, Table1, Table1Row, TABLE1_COLUMNS, TABLE1_EXPECTED, TABLE1_GENERATOR_TOL,
    TABLE1_MAP_TOL, TABLE1_RATE, TABLE1_ROWS, TABLE1_TIME,
};
