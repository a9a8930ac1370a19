use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, C64};

/// Indices of the nonzero elements of the ideal `√iSWAP` χ.
pub const IDEAL_BLOCK: [usize; 4] = [0, 5, 10, 15];

/// Magnitude `(√2 − 1)/8` of the ideal `χ_{5,15}` family.
pub const NC_SIGNATURE_BASELINE: f64 = (SQRT_2 - 1.0) / 8.0;

/// The ideal pattern positions watched by the noisy-coupling growth test.
pub const NC_SIGNATURE_POSITIONS: [(usize, usize); 4] = [(5, 15), (10, 15), (15, 5), (15, 10)];

fn check_rates(rate: f64, name: &str, s: f64) -> Result<()> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::invalid(name, format!("must be finite and ≥ 0, got {rate}")));
    }
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::invalid("coupling", format!("S must be positive, got {s}")));
    }
    Ok(())
}

fn place_block(block: [[C64; 4]; 4]) -> CMatrix {
    let mut chi = CMatrix::zeros(16, 16);
    for (a, &m) in IDEAL_BLOCK.iter().enumerate() {
        for (b, &n) in IDEAL_BLOCK.iter().enumerate() {
            chi[(m, n)] = block[a][b] / 8.0;
        }
    }
    chi
}

/// Exact Pauli-basis χ of `√iSWAP` under fully correlated dephasing
/// (`κ = 1`, `Γ1 = Γ2 = Γ_PD`).
pub fn exact_cd_chi(gamma_pd: f64, s: f64) -> Result<CMatrix> {
    check_rates(gamma_pd, "gamma_pd", s)?;
    let g = (-PI * gamma_pd / (2.0 * s)).exp();
    let g4 = g.powi(4);
    let fp = 2.0 + g4 + 2.0 * SQRT_2 * g;
    let fm = 2.0 + g4 - 2.0 * SQRT_2 * g;
    let gp = SQRT_2 * g + 1.0;
    let gm = SQRT_2 * g - 1.0;
    let r = |x: f64| c(x, 0.0);
    let i = |x: f64| c(0.0, x);
    let mut chi = place_block([
        [r(fp), i(gp), i(gp), r(g4)],
        [i(-gp), r(1.0), r(1.0), i(-gm)],
        [i(-gp), r(1.0), r(1.0), i(-gm)],
        [r(g4), i(gm), i(gm), r(fm)],
    ]);
    let extra = (1.0 - (-2.0 * PI * gamma_pd / s).exp()) / 8.0;
    for pos in [(3, 3), (3, 12), (12, 3), (12, 12)] {
        chi[pos] = r(extra);
    }
    Ok(chi)
}

/// `γ_c = exp(−π Γ_s / 2S)`.
pub fn nc_gamma(ratio: f64) -> f64 {
    (-PI * ratio / 2.0).exp()
}

/// `h_± = √2 γ_c ± γ_c⁴`.
pub fn nc_h(gamma: f64) -> (f64, f64) {
    (SQRT_2 * gamma + gamma.powi(4), SQRT_2 * gamma - gamma.powi(4))
}

/// Exact Pauli-basis χ of `√iSWAP` under noisy coupling.
pub fn exact_nc_chi(gamma_s: f64, s: f64) -> Result<CMatrix> {
    check_rates(gamma_s, "gamma_s", s)?;
    let g = nc_gamma(gamma_s / s);
    let (hp, hm) = nc_h(g);
    let r = |x: f64| c(x, 0.0);
    let i = |x: f64| c(0.0, x);
    Ok(place_block([
        [r(3.0 + 2.0 * SQRT_2 * g), i(hp), i(hp), r(1.0)],
        [i(-hp), r(1.0), r(1.0), i(-hm)],
        [i(-hp), r(1.0), r(1.0), i(-hm)],
        [r(1.0), i(hm), i(hm), r(3.0 - 2.0 * SQRT_2 * g)],
    ]))
}

/// `|χ_{5,15}| = h₋/8` as a function of `Γ_s/S`.
pub fn nc_signature(ratio: f64) -> f64 {
    nc_h(nc_gamma(ratio)).1 / 8.0
}

/// Location and height of the maximum of [`nc_signature`]; the maximum
/// sits at `γ_c = 2^{-1/2}`.
pub fn nc_signature_peak() -> (f64, f64) {
    let gamma = SQRT_2 / 2.0;
    let ratio = -2.0 * gamma.ln() / PI;
    (ratio, nc_signature(ratio))
}

/// The nonzero `Γ_s/S` at which [`nc_signature`] falls back to its ideal
/// value `(√2 − 1)/8`.
pub fn nc_signature_crossing() -> f64 {
    let (peak, _) = nc_signature_peak();
    let f = |r: f64| nc_signature(r) - NC_SIGNATURE_BASELINE;
    let (mut lo, mut hi) = (peak, peak);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverts [`nc_signature`] on the weak-decoherence branch
/// `Γ_s/S ∈ [0, peak]`; values above the peak map to the peak.
pub fn nc_ratio_from_signature(value: f64) -> Option<f64> {
    let (peak, top) = nc_signature_peak();
    if !(value.is_finite()) || value < NC_SIGNATURE_BASELINE {
        return None;
    }
    if value >= top {
        return Some(peak);
    }
    let (mut lo, mut hi) = (0.0, peak);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if nc_signature(mid) < value {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
