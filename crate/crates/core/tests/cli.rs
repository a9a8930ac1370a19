use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qpt_core::analysis::{exact_nc_chi, Mechanism, NC_SIGNATURE_BASELINE};
use qpt_core::bases::pauli_basis_2q;
use qpt_core::channels::{evolution_map, ideal_chi, GateSpec};
use qpt_core::cli::{mhz_to_rad, ChiDocument, FingerprintDocument, OutputsDocument};
use qpt_core::decoherence::DecoherenceModel;
use qpt_core::linalg::CMatrix;
use tempfile::TempDir;

fn qpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpt")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn chi_of(p: &Path) -> CMatrix {
    ChiDocument::load(p).unwrap().to_process().unwrap().chi
}

const SQRT_ISWAP: &str = "[gate]\nkind = \"sqrt_iswap\"\ncoupling_mhz = 20.0\n";
const FIG2: &str = "[gate]\nkind = \"sqrt_iswap\"\ncoupling_mhz = 20.0\n\n[decoherence]\nt1_q1 = 90.0\nt2_q1 = 60.0\nt1_q2 = 90.0\nt2_q2 = 60.0\n";
const FIG3: &str = "[gate]\nkind = \"sqrt_iswap\"\ncoupling_mhz = 20.0\n\n[decoherence]\ngamma_pd_1 = 11.11111111111111\ngamma_pd_2 = 11.11111111111111\nkappa = 0.5\n";
const FIG4: &str = "[gate]\nkind = \"sqrt_iswap\"\ncoupling_mhz = 20.0\n\n[decoherence]\ngamma_s = 11.11111111111111\n";

fn simulate(dir: &TempDir, name: &str, config: &str) -> PathBuf {
    let cfg = write(dir, &format!("{name}.toml"), config);
    let out = dir.path().join(format!("{name}.json"));
    let o = qpt(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn fingerprint(path: &Path) -> FingerprintDocument {
    let o = qpt(&["fingerprint", s(path)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn simulate_ideal_gate() {
    let dir = TempDir::new().unwrap();
    let chi = chi_of(&simulate(&dir, "ideal", SQRT_ISWAP));
    let ideal = ideal_chi(&GateSpec::sqrt_iswap(mhz_to_rad(20.0))).unwrap();
    assert!(chi.max_abs_diff(&ideal) < 1e-12);
}

#[test]
fn simulate_matches_library_pipeline() {
    let dir = TempDir::new().unwrap();
    let gate = GateSpec::sqrt_iswap(mhz_to_rad(20.0));
    let fig2 = evolution_map(&gate, &[DecoherenceModel::local_t1_t2(90e-9, 60e-9).unwrap()])
        .unwrap()
        .pauli_chi()
        .unwrap();
    assert!(chi_of(&simulate(&dir, "fig2", FIG2)).max_abs_diff(&fig2.chi) < 1e-12);
    let nc = exact_nc_chi(1.0 / 90e-9, gate.coupling).unwrap();
    assert!(chi_of(&simulate(&dir, "fig4", FIG4)).max_abs_diff(&nc) < 1e-9);
}

#[test]
fn qpt_reproduces_simulation() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig2.toml", FIG2);
    let chi = dir.path().join("chi.json");
    let outs = dir.path().join("outs.json");
    let o = qpt(&["simulate", "--config", s(&cfg), "--out", s(&chi), "--outputs", s(&outs)]);
    assert!(o.status.success());
    let back = dir.path().join("back.json");
    let o = qpt(&["qpt", s(&outs), "--out", s(&back)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(chi_of(&chi).max_abs_diff(&chi_of(&back)) < 1e-12);
    let doc = ChiDocument::load(&back).unwrap();
    assert!(doc.diagnostics.unwrap().linearity_residual.unwrap() < 1e-12);
}

#[test]
fn qpt_identity_outputs() {
    let dir = TempDir::new().unwrap();
    let states = qpt_core::channels::qpt_initial_states();
    let input = write(&dir, "id.json", &OutputsDocument::new(None, &states).to_json());
    let o = qpt(&["qpt", s(&input)]);
    assert!(o.status.success());
    let doc: ChiDocument = ChiDocument::parse(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    let chi = doc.to_process().unwrap().chi;
    assert!(chi.max_abs_diff(&pauli_basis_2q().identity_chi().unwrap()) < 1e-12);
}

#[test]
fn qpt_rejects_non_hermitian_state() {
    let dir = TempDir::new().unwrap();
    let mut states = qpt_core::channels::qpt_initial_states();
    states[5][(0, 1)] += qpt_core::linalg::c(0.1, 0.0);
    let input = write(&dir, "bad.json", &OutputsDocument::new(None, &states).to_json());
    let o = qpt(&["qpt", s(&input)]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("output state 5"), "{err}");
    let wrong = write(&dir, "short.json", "{\"outputs\": []}");
    assert_eq!(qpt(&["qpt", s(&wrong)]).status.code(), Some(2));
}

#[test]
fn fingerprint_correlated_dephasing() {
    let dir = TempDir::new().unwrap();
    let r = fingerprint(&simulate(&dir, "fig3", FIG3)).report;
    let cd = r.finding(Mechanism::CorrelatedDephasing);
    assert!(cd.flagged);
    let kappa = cd.rate("kappa").unwrap();
    assert!((0.35..=0.65).contains(&kappa), "κ = {kappa}");
    let g = cd.rate("gamma_pd").unwrap();
    assert!((g / 11.111 - 1.0).abs() < 0.15, "Γ = {g} 1/us");
}

#[test]
fn fingerprint_ideal_has_no_findings() {
    let dir = TempDir::new().unwrap();
    let r = fingerprint(&simulate(&dir, "ideal", SQRT_ISWAP)).report;
    assert!(r.flagged().is_empty());
    assert!(r.findings.iter().all(|f| f.evidence == 0.0));
}

#[test]
fn fingerprint_mixture_with_refinement() {
    let dir = TempDir::new().unwrap();
    let cfg = "[gate]\nkind = \"sqrt_iswap\"\ncoupling_mhz = 20.0\n\n[decoherence]\nt1_q1 = 90.0\nt1_q2 = 90.0\ngamma_s = 11.11111111111111\n";
    let chi = simulate(&dir, "mix", cfg);
    let o = qpt(&["fingerprint", s(&chi), "--refine"]);
    assert!(o.status.success());
    let doc: FingerprintDocument = serde_json::from_slice(&o.stdout).unwrap();
    let r = doc.report;
    assert!(r.finding(Mechanism::EnergyRelaxation).flagged);
    assert!(r.finding(Mechanism::NoisyCoupling).flagged);
    assert!(r.evidence(Mechanism::LocalPureDephasing) < 0.1);
    assert!(r.evidence(Mechanism::CorrelatedDephasing) < 0.1);
    let fit = r.refinement.unwrap();
    assert!((fit.parameters.gamma_s / 11.111 - 1.0).abs() < 0.01);
    assert_eq!(doc.units.rate, "1/us");
}

#[test]
fn fingerprint_rejects_other_bases() {
    let dir = TempDir::new().unwrap();
    let chi = simulate(&dir, "elem", &format!("basis = \"elementary\"\n{SQRT_ISWAP}"));
    let o = qpt(&["fingerprint", s(&chi)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("basis mismatch"));
}

#[test]
fn table1_passes() {
    let o = qpt(&["table1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.matches("PASS").count(), 4);
    assert!(text.contains("      13      13       3      15      15       7       7       7"));
    let o = qpt(&["table1", "--format", "csv"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("jtilde,36,25,16,36,25,16,16,20,PASS"));
}

#[test]
fn figures_write_grids_and_annotations() {
    let dir = TempDir::new().unwrap();
    for name in ["fig1", "fig2", "fig3", "fig4"] {
        let o = qpt(&["figure", name, "--out", s(dir.path())]);
        assert!(o.status.success());
        let re = std::fs::read_to_string(dir.path().join(format!("{name}_re.csv"))).unwrap();
        assert_eq!(re.lines().count(), 16);
        assert!(re.lines().all(|l| l.split(',').count() == 16));
        assert!(dir.path().join(format!("{name}_im.csv")).exists());
    }
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig2.json")).unwrap()).unwrap();
    let pd = &side["annotations"][0];
    assert_eq!(pd["label"], "pure dephasing");
    assert_eq!(pd["positions"], serde_json::json!([[3, 3], [12, 12]]));
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig4.json")).unwrap()).unwrap();
    assert_eq!(side["annotations"][0]["positions"], serde_json::json!([[5, 15], [10, 15], [15, 5], [15, 10]]));
    let re = std::fs::read_to_string(dir.path().join("fig4_im.csv")).unwrap();
    let row5: Vec<f64> = re.lines().nth(5).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!(row5[15].abs() > NC_SIGNATURE_BASELINE, "{}", row5[15]);
    assert_eq!(qpt(&["figure", "fig7"]).status.code(), Some(2));
}

#[test]
fn noise_needs_seed_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "a.toml", FIG2);
    let run = |seed: &str| qpt(&["simulate", "--config", s(&cfg), "--noise", "1e-4", "--seed", seed]).stdout;
    assert_eq!(run("11"), run("11"));
    assert_ne!(run("11"), run("12"));
    assert_eq!(qpt(&["simulate", "--config", s(&cfg), "--noise", "1e-4"]).status.code(), Some(2));
}

#[test]
fn chi_document_round_trip_through_files() {
    let dir = TempDir::new().unwrap();
    let path = simulate(&dir, "fig2", FIG2);
    let first = std::fs::read_to_string(&path).unwrap();
    let again = ChiDocument::parse(&first).unwrap().to_json();
    assert_eq!(first, again);
}

#[test]
fn config_errors_exit_2_with_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.toml", "[gate]\nkind = \"identity\"\nduration_ns = 10.0\n[decoherence]\nt1_q1 = 10.0\nt2_q1 = 50.0\n");
    let o = qpt(&["simulate", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t2_q1"));
    assert_eq!(qpt(&["simulate", "--config", "/nonexistent.toml"]).status.code(), Some(2));
    assert_eq!(qpt(&["bogus"]).status.code(), Some(2));
}

#[test]
fn sweep_runs_in_parallel_and_orders_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "a.toml", FIG3);
    let o = qpt(&["sweep", "--config", s(&cfg), "--param", "kappa", "--values", "0,0.25,0.5,0.75,1", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}
