//! C interface to `qpt-core`.
//!
//! Objects cross the boundary as opaque handles created and released by
//! this library. Every fallible function returns a [`QptStatus`]; on failure
//! a description is kept per thread and read with
//! [`qpt_last_error_message`]. Units are SI (seconds, rad/s, 1/s).

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qpt_core::analysis::{epsilon_nl_prime, fingerprint_with, FingerprintOptions, ProcessMatrix};
use qpt_core::bases::pauli_basis_1q;
use qpt_core::channels::{evolution_map, ideal_chi, qpt_extract, GateSpec};
use qpt_core::decoherence::{combined_pauli_lambda, DecoherenceModel, QubitRelaxation};
use qpt_core::linalg::{c, trace_norm, CMatrix};
use qpt_core::Error;

/// Number of doubles in the sixteen interleaved 4x4 output states.
pub const QPT_OUTPUTS_LEN: usize = 16 * 16 * 2;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Inconsistent data, e.g. non-Hermitian input states.
    Consistency = 3,
    Unsupported = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QptGateKind {
    Identity = 0,
    SqrtIswap = 1,
    XyEvolution = 2,
    DetunedIdle = 3,
}

/// Gate description. For `SqrtIswap` the duration is ignored and fixed to
/// `π/2S`; `detuning` is used only by `DetunedIdle`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct QptGate {
    pub kind: QptGateKind,
    pub coupling: f64,
    pub detuning: f64,
    pub duration: f64,
}

/// Complex matrix handle.
pub struct QptMatrix(CMatrix);

/// Ordered set of decoherence models.
#[derive(Default)]
pub struct QptModels(Vec<DecoherenceModel>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> QptStatus {
    match e {
        Error::UnsupportedGate { .. } | Error::IncompatibleModel { .. } | Error::BasisMismatch { .. } => {
            QptStatus::Unsupported
        }
        e if e.is_consistency_failure() => QptStatus::Consistency,
        _ => QptStatus::InvalidArgument,
    }
}

struct Fail(QptStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QptStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and the thread's
/// last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QptStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QptStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            QptStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn gate_spec(g: &QptGate) -> Result<GateSpec, Fail> {
    let spec = match g.kind {
        QptGateKind::Identity => GateSpec::identity(g.duration),
        QptGateKind::SqrtIswap => GateSpec::sqrt_iswap(g.coupling),
        QptGateKind::XyEvolution => GateSpec::xy_evolution(g.coupling, g.duration),
        QptGateKind::DetunedIdle => GateSpec::detuned_idle(g.coupling, g.detuning, g.duration)?,
    };
    spec.validate()?;
    Ok(spec)
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn qpt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn qpt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn qpt_models_new() -> *mut QptModels {
    Box::into_raw(Box::default())
}

/// # Safety
/// `models` must be null or a handle from [`qpt_models_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qpt_models_free(models: *mut QptModels) {
    if !models.is_null() {
        drop(Box::from_raw(models));
    }
}

unsafe fn push(models: *mut QptModels, m: DecoherenceModel) -> QptStatus {
    guard(|| {
        let set = models.as_mut().ok_or_else(|| null("models"))?;
        m.validate()?;
        set.0.push(m);
        Ok(())
    })
}

/// Local Bloch equations; `dephasing_rate_k` is `1/T2` of qubit k.
///
/// # Safety
/// `models` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qpt_models_add_local(
    models: *mut QptModels,
    gamma_down_1: f64,
    gamma_up_1: f64,
    dephasing_rate_1: f64,
    gamma_down_2: f64,
    gamma_up_2: f64,
    dephasing_rate_2: f64,
) -> QptStatus {
    let q = |d, u, r| QubitRelaxation { gamma_down: d, gamma_up: u, dephasing_rate: r };
    push(
        models,
        DecoherenceModel::LocalBloch {
            qubit1: q(gamma_down_1, gamma_up_1, dephasing_rate_1),
            qubit2: q(gamma_down_2, gamma_up_2, dephasing_rate_2),
        },
    )
}

/// # Safety
/// `models` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qpt_models_add_correlated_dephasing(
    models: *mut QptModels,
    gamma_1: f64,
    gamma_2: f64,
    kappa: f64,
) -> QptStatus {
    push(models, DecoherenceModel::CorrelatedDephasing { gamma1: gamma_1, gamma2: gamma_2, kappa })
}

/// # Safety
/// `models` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qpt_models_add_noisy_coupling(models: *mut QptModels, gamma_s: f64) -> QptStatus {
    push(models, DecoherenceModel::NoisyCoupling { gamma_s })
}

/// # Safety
/// `models` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qpt_models_add_detuned_noisy_coupling(
    models: *mut QptModels,
    gamma_s_prime: f64,
) -> QptStatus {
    push(models, DecoherenceModel::DetunedNoisyCoupling { gamma_s_prime })
}

/// Pauli-basis χ of the gate under the given models (null for none).
///
/// # Safety
/// `gate` must point to a valid gate, `models` must be null or live, and
/// `out` must be writable. The result is released with [`qpt_matrix_free`].
#[no_mangle]
pub unsafe extern "C" fn qpt_simulate_chi(
    gate: *const QptGate,
    models: *const QptModels,
    out: *mut *mut QptMatrix,
) -> QptStatus {
    guard(|| {
        let spec = gate_spec(deref(gate, "gate")?)?;
        let models = models.as_ref().map_or(&[][..], |m| &m.0[..]);
        let chi = evolution_map(&spec, models)?.pauli_chi()?.chi;
        write_out(out, QptMatrix(chi))
    })
}

/// Pauli-basis χ of the ideal gate.
///
/// # Safety
/// As for [`qpt_simulate_chi`].
#[no_mangle]
pub unsafe extern "C" fn qpt_ideal_chi(gate: *const QptGate, out: *mut *mut QptMatrix) -> QptStatus {
    guard(|| {
        let spec = gate_spec(deref(gate, "gate")?)?;
        write_out(out, QptMatrix(ideal_chi(&spec)?))
    })
}

/// Writes the sixteen tomography output states into `buf` as interleaved
/// `re, im` pairs, state `4 n1 + n2` first in row-major order.
///
/// # Safety
/// `buf` must hold `len` doubles; `len` must be at least
/// [`QPT_OUTPUTS_LEN`].
#[no_mangle]
pub unsafe extern "C" fn qpt_tomography_outputs(
    gate: *const QptGate,
    models: *const QptModels,
    buf: *mut f64,
    len: usize,
) -> QptStatus {
    guard(|| {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len < QPT_OUTPUTS_LEN {
            return Err(Fail(QptStatus::BufferTooSmall, format!("need {QPT_OUTPUTS_LEN} doubles, got {len}")));
        }
        let spec = gate_spec(deref(gate, "gate")?)?;
        let models = models.as_ref().map_or(&[][..], |m| &m.0[..]);
        let outs = evolution_map(&spec, models)?.tomography_outputs()?;
        let dst = std::slice::from_raw_parts_mut(buf, QPT_OUTPUTS_LEN);
        for (k, z) in outs.iter().flat_map(|m| m.iter()).enumerate() {
            dst[2 * k] = z.re;
            dst[2 * k + 1] = z.im;
        }
        Ok(())
    })
}

/// Standard two-qubit tomography: reconstructs the Pauli-basis χ from the
/// sixteen output states laid out as in [`qpt_tomography_outputs`].
///
/// # Safety
/// `outputs` must hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpt_extract_chi(outputs: *const f64, len: usize, out: *mut *mut QptMatrix) -> QptStatus {
    guard(|| {
        if outputs.is_null() {
            return Err(null("outputs"));
        }
        if len != QPT_OUTPUTS_LEN {
            return Err(Fail(QptStatus::InvalidArgument, format!("expected {QPT_OUTPUTS_LEN} doubles, got {len}")));
        }
        let src = std::slice::from_raw_parts(outputs, len);
        let states: Vec<CMatrix> = src
            .chunks_exact(32)
            .map(|s| CMatrix::from_fn(4, 4, |i, j| c(s[2 * (4 * i + j)], s[2 * (4 * i + j) + 1])))
            .collect();
        let p = pauli_basis_1q();
        write_out(out, QptMatrix(qpt_extract(&states, &p, &p)?.chi))
    })
}

/// Fingerprint report of a Pauli-basis χ for `gate`, as a JSON string
/// released with [`qpt_string_free`]. `noise_sigma` is the standard
/// deviation of entry noise (0 for exact data).
///
/// # Safety
/// `chi` and `gate` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qpt_fingerprint_json(
    chi: *const QptMatrix,
    gate: *const QptGate,
    refine: bool,
    noise_sigma: f64,
    out: *mut *mut c_char,
) -> QptStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let chi = deref(chi, "chi")?;
        let spec = gate_spec(deref(gate, "gate")?)?;
        let pm = ProcessMatrix::pauli(chi.0.clone())?.with_gate(spec);
        let opts = FingerprintOptions { refine, noise_sigma, ..Default::default() };
        let report = fingerprint_with(&pm, &opts)?;
        let json = serde_json::to_string(&report).map_err(|e| Fail(QptStatus::Panic, e.to_string()))?;
        *out = CString::new(json).expect("JSON has no nul").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn qpt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `Tr|M|` of a Hermitian matrix.
///
/// # Safety
/// `m` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qpt_trace_norm(m: *const QptMatrix, out: *mut f64) -> QptStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        let v = trace_norm(&m.0)?;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = v;
        Ok(())
    })
}

/// Nonlocality measure `ε′_NL` of the combined λ-matrix of the models.
///
/// # Safety
/// `models` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qpt_epsilon_nl_prime(models: *const QptModels, out: *mut f64) -> QptStatus {
    guard(|| {
        let models = deref(models, "models")?;
        let v = epsilon_nl_prime(&combined_pauli_lambda(&models.0)?)?;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = v;
        Ok(())
    })
}

/// Number of rows (matrices are square), or 0 for null.
///
/// # Safety
/// `m` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn qpt_matrix_dim(m: *const QptMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// # Safety
/// `m` must be live; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn qpt_matrix_get(
    m: *const QptMatrix,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> QptStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        let n = m.0.rows();
        if row >= n || col >= m.0.cols() {
            return Err(Fail(QptStatus::InvalidArgument, format!("index ({row}, {col}) outside {n}x{n}")));
        }
        if re.is_null() || im.is_null() {
            return Err(null("output pointer"));
        }
        let z = m.0[(row, col)];
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Copies the matrix into `buf` as interleaved `re, im` in row-major order.
///
/// # Safety
/// `m` must be live and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qpt_matrix_copy(m: *const QptMatrix, buf: *mut f64, len: usize) -> QptStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        let need = 2 * m.0.rows() * m.0.cols();
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len < need {
            return Err(Fail(QptStatus::BufferTooSmall, format!("need {need} doubles, got {len}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (k, z) in m.0.iter().enumerate() {
            dst[2 * k] = z.re;
            dst[2 * k + 1] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a matrix handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qpt_matrix_free(m: *mut QptMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}
