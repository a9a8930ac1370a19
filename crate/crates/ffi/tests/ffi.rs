use std::ffi::CStr;
use std::f64::consts::PI;
use std::ptr;

use qpt_ffi::*;

const S: f64 = 2.0 * PI * 20e6;
const G: f64 = 1.0 / 90e-9;

fn sqrt_iswap() -> QptGate {
    QptGate { kind: QptGateKind::SqrtIswap, coupling: S, detuning: 0.0, duration: 0.0 }
}

fn last_error() -> String {
    let p = qpt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn to_vec(m: *const QptMatrix) -> Vec<f64> {
    let n = unsafe { qpt_matrix_dim(m) };
    let mut buf = vec![0.0; 2 * n * n];
    assert_eq!(unsafe { qpt_matrix_copy(m, buf.as_mut_ptr(), buf.len()) }, QptStatus::Ok);
    buf
}

#[test]
fn ideal_chi_elements() {
    let mut chi = ptr::null_mut();
    assert_eq!(unsafe { qpt_ideal_chi(&sqrt_iswap(), &mut chi) }, QptStatus::Ok);
    assert!(qpt_last_error_message().is_null());
    assert_eq!(unsafe { qpt_matrix_dim(chi) }, 16);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { qpt_matrix_get(chi, 0, 0, &mut re, &mut im) }, QptStatus::Ok);
    assert!((re - (3.0 + 2.0 * 2f64.sqrt()) / 8.0).abs() < 1e-12 && im.abs() < 1e-12);
    assert_eq!(unsafe { qpt_matrix_get(chi, 0, 5, &mut re, &mut im) }, QptStatus::Ok);
    assert!((im - (2f64.sqrt() + 1.0) / 8.0).abs() < 1e-12);
    assert_eq!(unsafe { qpt_matrix_get(chi, 16, 0, &mut re, &mut im) }, QptStatus::InvalidArgument);
    assert!(last_error().contains("outside"));
    let mut norm = 0.0;
    assert_eq!(unsafe { qpt_trace_norm(chi, &mut norm) }, QptStatus::Ok);
    assert!((norm - 1.0).abs() < 1e-12);
    unsafe { qpt_matrix_free(chi) };
}

#[test]
fn simulate_extract_round_trip() {
    let models = qpt_models_new();
    unsafe {
        assert_eq!(qpt_models_add_local(models, G, 0.0, 1.0 / 60e-9, G, 0.0, 1.0 / 60e-9), QptStatus::Ok);
        assert_eq!(qpt_models_add_noisy_coupling(models, 0.2 * G), QptStatus::Ok);
    }
    let gate = sqrt_iswap();
    let mut chi = ptr::null_mut();
    assert_eq!(unsafe { qpt_simulate_chi(&gate, models, &mut chi) }, QptStatus::Ok);
    let mut outs = vec![0.0; QPT_OUTPUTS_LEN];
    assert_eq!(unsafe { qpt_tomography_outputs(&gate, models, outs.as_mut_ptr(), outs.len()) }, QptStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { qpt_extract_chi(outs.as_ptr(), outs.len(), &mut back) }, QptStatus::Ok);
    let (a, b) = (to_vec(chi), to_vec(back));
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    assert_eq!(unsafe { qpt_tomography_outputs(&gate, models, outs.as_mut_ptr(), 10) }, QptStatus::BufferTooSmall);
    unsafe {
        qpt_matrix_free(chi);
        qpt_matrix_free(back);
        qpt_models_free(models);
    }
}

#[test]
fn non_hermitian_outputs_are_a_consistency_failure() {
    let gate = QptGate { kind: QptGateKind::Identity, coupling: 0.0, detuning: 0.0, duration: 1e-8 };
    let mut outs = vec![0.0; QPT_OUTPUTS_LEN];
    assert_eq!(unsafe { qpt_tomography_outputs(&gate, ptr::null(), outs.as_mut_ptr(), outs.len()) }, QptStatus::Ok);
    outs[3 * 32 + 2] += 0.1;
    let mut chi = ptr::null_mut();
    assert_eq!(unsafe { qpt_extract_chi(outs.as_ptr(), outs.len(), &mut chi) }, QptStatus::Consistency);
    assert!(chi.is_null());
    assert!(last_error().contains('3'), "{}", last_error());
}

#[test]
fn fingerprint_flags_correlated_dephasing() {
    let models = qpt_models_new();
    assert_eq!(unsafe { qpt_models_add_correlated_dephasing(models, G, G, 0.5) }, QptStatus::Ok);
    let gate = sqrt_iswap();
    let mut chi = ptr::null_mut();
    assert_eq!(unsafe { qpt_simulate_chi(&gate, models, &mut chi) }, QptStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { qpt_fingerprint_json(chi, &gate, false, 0.0, &mut json) }, QptStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { qpt_string_free(json) };
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let cd = report["findings"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["mechanism"] == "correlated_dephasing")
        .unwrap();
    assert_eq!(cd["flagged"], true);
    let kappa = cd["estimated_rates"].as_array().unwrap().iter().find(|r| r["name"] == "kappa").unwrap();
    assert!((kappa["value"].as_f64().unwrap() - 0.5).abs() < 0.05);
    let xy = QptGate { kind: QptGateKind::XyEvolution, coupling: S, detuning: 0.0, duration: 1e-8 };
    assert_eq!(unsafe { qpt_fingerprint_json(chi, &xy, false, 0.0, &mut json) }, QptStatus::Unsupported);
    unsafe {
        qpt_matrix_free(chi);
        qpt_models_free(models);
    }
}

#[test]
fn nonlocality_of_models() {
    let models = qpt_models_new();
    let mut eps = -1.0;
    assert_eq!(unsafe { qpt_models_add_noisy_coupling(models, G) }, QptStatus::Ok);
    assert_eq!(unsafe { qpt_epsilon_nl_prime(models, &mut eps) }, QptStatus::Ok);
    assert!((eps - (2.0 * 2f64.sqrt() - 1.0)).abs() < 1e-9);
    unsafe { qpt_models_free(models) };
}

#[test]
fn invalid_arguments_and_nulls() {
    let models = qpt_models_new();
    assert_eq!(unsafe { qpt_models_add_correlated_dephasing(models, G, G, 2.0) }, QptStatus::InvalidArgument);
    assert!(last_error().contains("kappa") || last_error().contains("κ"), "{}", last_error());
    assert_eq!(unsafe { qpt_models_add_noisy_coupling(ptr::null_mut(), G) }, QptStatus::NullPointer);
    let mut chi = ptr::null_mut();
    assert_eq!(unsafe { qpt_simulate_chi(ptr::null(), models, &mut chi) }, QptStatus::NullPointer);
    let detuned = QptGate { kind: QptGateKind::DetunedIdle, coupling: S, detuning: 2.0 * S, duration: 1e-8 };
    assert_eq!(unsafe { qpt_ideal_chi(&detuned, &mut chi) }, QptStatus::InvalidArgument);
    assert_eq!(unsafe { qpt_models_add_detuned_noisy_coupling(models, G) }, QptStatus::Ok);
    assert_eq!(unsafe { qpt_simulate_chi(&sqrt_iswap(), models, &mut chi) }, QptStatus::Unsupported);
    assert_eq!(unsafe { qpt_matrix_dim(ptr::null()) }, 0);
    unsafe {
        qpt_matrix_free(ptr::null_mut());
        qpt_string_free(ptr::null_mut());
        qpt_models_free(models);
    }
    let v = unsafe { CStr::from_ptr(qpt_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn last_error_is_per_thread() {
    let mut chi = ptr::null_mut();
    assert_eq!(unsafe { qpt_simulate_chi(ptr::null(), ptr::null(), &mut chi) }, QptStatus::NullPointer);
    std::thread::spawn(|| assert!(qpt_last_error_message().is_null())).join().unwrap();
    assert!(last_error().contains("gate"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/qpt.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["qpt_simulate_chi", "qpt_extract_chi", "qpt_fingerprint_json", "qpt_last_error_message"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(out) = std::process::Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c99", header]).output()
    else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_program_links_and_runs() {
    // target/<profile>/deps/<test> → target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libqpt_ffi.a");
    if !lib.exists() {
        return;
    }
    let manifest = env!("CARGO_MANIFEST_DIR");
    let exe = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("qpt_roundtrip");
    let Ok(out) = std::process::Command::new("cc")
        .args(["-std=c99", "-D_DEFAULT_SOURCE", "-I"])
        .arg(format!("{manifest}/include"))
        .arg(format!("{manifest}/tests/c/roundtrip.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
    else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = std::process::Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "exit {:?}: {stdout}", run.status.code());
    assert!(stdout.contains("error: gate is null"), "{stdout}");
}
