#![allow(dead_code)]

use std::f64::consts::PI;

use qpt_core::channels::GateSpec;
use qpt_core::decoherence::{DecoherenceModel, QubitRelaxation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const S20: f64 = 2.0 * PI * 20e6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn qubit(rng: &mut ChaCha8Rng, scale: f64) -> QubitRelaxation {
    let gamma_down = log_uniform(rng, 1e-3, 1.0) * scale;
    let gamma_up = rng.random_range(0.0..0.5) * gamma_down;
    let pd = rng.random_range(0.0..1.0) * scale;
    QubitRelaxation { gamma_down, gamma_up, dephasing_rate: (gamma_down + gamma_up) / 2.0 + pd }
}

/// A gate with a random subset of compatible decoherence models; rates are
/// up to a few times the coupling so that strong decoherence is covered.
pub fn random_case(rng: &mut ChaCha8Rng) -> (GateSpec, Vec<DecoherenceModel>) {
    let s = S20 * rng.random_range(0.5..2.0);
    let scale = s * log_uniform(rng, 1e-3, 2.0);
    let gate = match rng.random_range(0..4) {
        0 => GateSpec::identity(rng.random_range(1.0..50.0) * 1e-9),
        1 => GateSpec::sqrt_iswap(s),
        2 => GateSpec::xy_evolution(s, rng.random_range(0.1..2.0) / s),
        _ => GateSpec::detuned_idle(s, s * rng.random_range(10.0..40.0), rng.random_range(1.0..20.0) / s).unwrap(),
    };
    let detuned = gate.kind == qpt_core::channels::GateKind::DetunedIdle;
    // keep the first-order detuned expansion in its weak-decoherence domain
    let scale = if detuned { scale.min(0.05 / gate.duration) } else { scale };
    let mut models = Vec::new();
    if rng.random_bool(0.7) {
        models.push(DecoherenceModel::LocalBloch { qubit1: qubit(rng, scale), qubit2: qubit(rng, scale) });
    }
    if rng.random_bool(0.5) {
        models.push(DecoherenceModel::CorrelatedDephasing {
            gamma1: log_uniform(rng, 1e-3, 1.0) * scale,
            gamma2: log_uniform(rng, 1e-3, 1.0) * scale,
            kappa: rng.random_range(-1.0..1.0),
        });
    }
    if rng.random_bool(0.5) || models.is_empty() {
        let g = log_uniform(rng, 1e-3, 1.0) * scale;
        models.push(if detuned {
            DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime: g }
        } else {
            DecoherenceModel::NoisyCoupling { gamma_s: g }
        });
    }
    (gate, models)
}
