use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chiralmol_core::chirality::current_operators;
use chiralmol_core::spectral::{DARK_TOL, SPECTRUM_TOL};
use chiralmol_core::*;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chiralmol"))
}

fn run(dir: &Path, name: &str, args: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(name);
    let output = bin()
        .args(args)
        .arg("--out")
        .arg(&out)
        .output()
        .expect("binary runs");
    (output, out)
}

fn ok(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let (o, path) = run(dir, name, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty(), "data must not go to stdout");
    path
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    run(dir, "ignored.out", args).0.status.code().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_at_the_df_point() {
    let dir = TempDir::new().unwrap();
    let path = ok(dir.path(), "s.csv", &["spectrum", "--j", "0.1", "--delta", "0", "--phi", "pi"]);
    let (header, rows) = read_csv(&path);
    assert_eq!(&header[..5], &["mode", "re_eps", "im_eps", "gamma_r", "is_dark"]);
    let re = column(&header, &rows, "re_eps");
    let im = column(&header, &rows, "im_eps");
    let target = 2f64.sqrt() * 0.1;
    assert!(re.iter().any(|x| (x - target).abs() < 1e-12));
    assert!(re.iter().any(|x| (x + target).abs() < 1e-12));
    assert!(im.iter().any(|x| (x + 1.0).abs() < 1e-12));
    let dark = rows.iter().filter(|r| r[4] == "true").count();
    assert_eq!(dark, 2);
}

#[test]
fn spectrum_without_decay() {
    let dir = TempDir::new().unwrap();
    let path = ok(dir.path(), "s.csv", &["spectrum", "--gamma0", "0", "--delta", "0.3", "--phi", "1.1"]);
    let (header, rows) = read_csv(&path);
    assert!(column(&header, &rows, "gamma_r").iter().all(|g| *g == 0.0));
}

#[test]
fn spectrum_matches_library_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    let args = ["spectrum", "--j", "0.23", "--delta", "-0.41", "--phi", "0.7pi"];
    let a = ok(dir.path(), "a.csv", &args);
    let b = ok(dir.path(), "b.csv", &args);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let p = SystemParams::new(1.0, 0.23, -0.41, 0.7 * PI).unwrap();
    let s = numeric_spectrum(&build_hamiltonian(&p), SPECTRUM_TOL).unwrap();
    let (header, rows) = read_csv(&a);
    let re = column(&header, &rows, "re_eps");
    let im = column(&header, &rows, "im_eps");
    for r in 0..3 {
        assert_eq!(re[r], s.eigenvalues[r].re);
        assert_eq!(im[r], s.eigenvalues[r].im);
    }
    let g2 = exceptional_distance(&p);
    assert_eq!(column(&header, &rows, "re_gamma_sq")[0], g2.re);
    assert_eq!(column(&header, &rows, "condition")[0], s.condition);
}

#[test]
fn config_file_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# spectrum run\nj = 0.2\ndelta = 0.1\nphi = 0.5pi\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let from_file = ok(dir.path(), "f.csv", &["spectrum", "--config", cfg_s]);
    let overridden = ok(dir.path(), "o.csv", &["spectrum", "--config", cfg_s, "--j", "0.3"]);
    let direct = ok(dir.path(), "d.csv", &["spectrum", "--j", "0.3", "--delta", "0.1", "--phi", "0.5pi"]);
    let flags_last = ok(dir.path(), "l.csv", &["spectrum", "--j=0.3", "--config", cfg_s, "--format", "csv"]);
    let bytes = |p: &PathBuf| std::fs::read(p).unwrap();
    assert_ne!(bytes(&from_file), bytes(&overridden));
    assert_eq!(bytes(&overridden), bytes(&direct));
    assert_eq!(bytes(&flags_last), bytes(&direct));

    std::fs::write(&cfg, "j = 0.2\nresolution = 3\n").unwrap();
    assert_eq!(code(dir.path(), &["spectrum", "--config", cfg_s]), 2);
    std::fs::write(&cfg, "j 0.2\n").unwrap();
    assert_eq!(code(dir.path(), &["spectrum", "--config", cfg_s]), 2);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(d, &["spectrum", "--unknown-key", "1"]), 2);
    assert_eq!(code(d, &["spectrum", "--j", "abc"]), 2);
    assert_eq!(code(d, &["spectrum", "--gamma0", "-1"]), 2);
    assert_eq!(code(d, &["spectrum", "--format", "xml"]), 2);
    assert_eq!(code(d, &["chirality-map", "--phi_count", "1"]), 2);
    assert_eq!(code(d, &["gate-calibrate", "--gate", "cnot"]), 2);
    assert_eq!(code(d, &["optimize", "--format", "csv"]), 2);
    let no_out = bin().args(["spectrum"]).output().unwrap();
    assert_eq!(no_out.status.code(), Some(2));
    // J = 1/√8 at φ = 0 sits on an exceptional point
    assert_eq!(code(d, &["spectrum", "--j", "0.35355339059327373", "--delta", "0", "--phi", "0"]), 4);
}

#[test]
fn optimizer_not_found_writes_best_effort_record() {
    let dir = TempDir::new().unwrap();
    let args = ["optimize", "--delta_min", "0.4", "--delta_max", "0.5", "--phi_min", "2", "--phi_max", "2.1"];
    let (o, path) = run(dir.path(), "o.json", &args);
    assert_eq!(o.status.code(), Some(3));
    let rec = read_json(&path);
    assert_eq!(rec["target"], "chirality");
    assert!(rec["search"]["objective"].as_f64().unwrap() > 1e-2);
}

#[test]
fn chirality_map_layout_and_values() {
    let dir = TempDir::new().unwrap();
    let args = [
        "chirality-map", "--delta_min", "-0.4", "--delta_max", "0.4", "--delta_count", "9",
        "--phi_min", "0", "--phi_max", "2pi", "--phi_count", "9",
    ];
    let path = ok(dir.path(), "m.csv", &args);
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["delta", "phi", "eta_max"]);
    assert_eq!(rows.len(), 81);
    let d = column(&header, &rows, "delta");
    let p = column(&header, &rows, "phi");
    let eta = column(&header, &rows, "eta_max");
    // φ outer, Δ inner
    assert_eq!(p[0], p[8]);
    assert_ne!(d[0], d[1]);
    for k in 0..81 {
        let (pi_, di) = (k / 9, k % 9);
        if pi_ == 4 || pi_ == 0 || pi_ == 8 {
            assert!(eta[k].abs() < 1e-10, "φ = {} row", p[k]);
        }
        // (Δ, φ) ↦ (−Δ, 2π − φ) leaves η_max unchanged
        let mirror = (8 - pi_) * 9 + (8 - di);
        assert!((eta[k] - eta[mirror]).abs() < 1e-8);
        let direct = chiralmol_core::chirality::chirality_at(0.1, d[k], p[k]).unwrap().eta_max;
        assert_eq!(eta[k], direct);
    }
}

#[test]
fn chirality_map_reaches_unity_at_the_chiral_point() {
    let dir = TempDir::new().unwrap();
    let r = find_perfect_chirality(0.1, chiralmol_core::optimize::DEFAULT_CHIRAL_BOUNDS).unwrap();
    let (d, p) = (r.point[0].to_string(), r.point[1].to_string());
    let (d_hi, p_hi) = ((r.point[0] + 0.01).to_string(), (r.point[1] + 0.01).to_string());
    let args = [
        "chirality-map", "--delta_min", &d, "--delta_max", &d_hi, "--delta_count", "2",
        "--phi_min", &p, "--phi_max", &p_hi, "--phi_count", "2",
    ];
    let path = ok(dir.path(), "m.csv", &args);
    let (header, rows) = read_csv(&path);
    assert!((column(&header, &rows, "delta")[0] + 0.132).abs() < 1e-3);
    assert!((column(&header, &rows, "phi")[0] / PI - 0.088).abs() < 1e-3);
    assert!(column(&header, &rows, "eta_max")[0] >= 1.0 - 1e-6);
}

#[test]
fn sweeps_are_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let args = ["chirality-map", "--delta_count", "13", "--phi_count", "11"];
    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    let mut four = args.to_vec();
    four.extend(["--threads", "4"]);
    let a = ok(dir.path(), "a.csv", &one);
    let b = ok(dir.path(), "b.csv", &four);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn json_table_format() {
    let dir = TempDir::new().unwrap();
    let path = ok(dir.path(), "m.json", &["chirality-map", "--delta_count", "3", "--phi_count", "2", "--format", "json"]);
    let v = read_json(&path);
    assert_eq!(v["columns"][2], "eta_max");
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

const OPERATING_POINT: [&str; 6] = ["--delta", "-0.1293", "--phi", "0.0835pi", "--theta", "0.9974pi"];

#[test]
fn wavepacket_flux_matches_operator_currents() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["wavepackets"];
    args.extend(OPERATING_POINT);
    let path = ok(dir.path(), "w.csv", &args);
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["t", "re_aL", "im_aL", "re_aR", "im_aR", "abs_aL", "abs_aR"]);
    let t = column(&header, &rows, "t");
    let integral = |name: &str| {
        let y: Vec<f64> = column(&header, &rows, name).iter().map(|a| a * a).collect();
        chiralmol_core::dynamics::trapezoid(&t, &y)
    };
    let (ql, qr) = (integral("abs_aL"), integral("abs_aR"));

    let p = SystemParams::new(1.0, 0.1, -0.1293, 0.0835 * PI).unwrap();
    let ops = current_operators(&p, DARK_TOL).unwrap();
    let c0 = MolecularAmplitude(local_phase_gate(2, 0.9974 * PI).unwrap() * chiralmol_core::model::basis::zero());
    let (il, ir) = integrated_currents(&c0, &ops);
    assert!((ql - il).abs() < 1e-5 && (qr - ir).abs() < 1e-5, "{ql} {il} {qr} {ir}");
    assert!(ql < 0.02 * qr);
    assert!((chirality(ql, qr).unwrap() - 0.976).abs() < 2e-3);
}

#[test]
fn dark_state_emits_nothing() {
    let dir = TempDir::new().unwrap();
    let args = ["wavepackets", "--delta", "0", "--phi", "pi", "--theta", "0", "--t_end", "20", "--samples", "201"];
    let path = ok(dir.path(), "w.csv", &args);
    let (header, rows) = read_csv(&path);
    assert_eq!(rows.len(), 201);
    for name in ["abs_aL", "abs_aR"] {
        assert!(column(&header, &rows, name).iter().all(|a| a.abs() < 1e-12));
    }
}

#[test]
fn evolve_ode_and_modal_agree() {
    let dir = TempDir::new().unwrap();
    let base = ["evolve", "--j", "0.2", "--delta", "0.1", "--phi", "0.4pi", "--state", "atom2", "--t_end", "15", "--samples", "31"];
    let a = ok(dir.path(), "a.csv", &base);
    let mut modal = base.to_vec();
    modal.extend(["--method", "modal"]);
    let b = ok(dir.path(), "b.csv", &modal);
    let (ha, ra) = read_csv(&a);
    let (hb, rb) = read_csv(&b);
    assert_eq!(ra.len(), 31);
    for name in ["re_c1", "im_c2", "re_c3", "norm", "re_aR"] {
        let (x, y) = (column(&ha, &ra, name), column(&hb, &rb, name));
        assert!(x.iter().zip(&y).all(|(u, v)| (u - v).abs() < 1e-8), "{name}");
    }
    let norm = column(&ha, &ra, "norm");
    assert!(norm.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn error_map_around_the_operating_point() {
    let dir = TempDir::new().unwrap();
    let mut args = vec![
        "error-map", "--dtheta_min", "-0.02", "--dtheta_max", "0.02", "--dtheta_count", "5",
        "--ddelta_min", "-0.004", "--ddelta_max", "0.004", "--ddelta_count", "5",
    ];
    args.extend(OPERATING_POINT);
    let path = ok(dir.path(), "e.csv", &args);
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["dtheta", "ddelta", "max_error"]);
    let err = column(&header, &rows, "max_error");
    let at = |ti: usize, di: usize| err[ti * 5 + di];
    assert!((at(2, 2) - 0.0127).abs() < 5e-4, "{}", at(2, 2));
    for k in 0..2 {
        assert!(at(k, 2) > at(k + 1, 2) && at(4 - k, 2) > at(3 - k, 2));
        assert!(at(2, k) > at(2, k + 1) && at(2, 4 - k) > at(2, 3 - k));
    }
    let dth = column(&header, &rows, "dtheta");
    let dd = column(&header, &rows, "ddelta");
    for k in [0, 7, 24] {
        let r = protocol2_report(0.1, (-0.1293 + dd[k], 0.0835 * PI, 0.9974 * PI + dth[k])).unwrap();
        assert_eq!(err[k], r.bloch_max_error);
    }
}

#[test]
fn optimize_chirality() {
    let dir = TempDir::new().unwrap();
    let a = ok(dir.path(), "a.json", &["optimize", "--target", "chirality"]);
    let b = ok(dir.path(), "b.json", &["optimize"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v = read_json(&a);
    let point = &v["search"]["point"];
    assert!((point[0].as_f64().unwrap() + 0.132).abs() < 1e-3);
    assert!((point[1].as_f64().unwrap() / PI - 0.088).abs() < 1e-3);
    assert!(v["search"]["objective"].as_f64().unwrap() < 1e-10);
    assert!(v["u_plus_angles"]["theta2"].is_f64());
    assert!((v["protocol1"]["e1"].as_f64().unwrap() - 0.0192).abs() < 1e-3);
}

#[test]
fn optimize_protocol2_matches_library() {
    let dir = TempDir::new().unwrap();
    let v = read_json(&ok(dir.path(), "p.json", &["optimize", "--target", "protocol2"]));
    let lib = optimize_protocol2(0.1, None).unwrap();
    let point: Vec<f64> = v["search"]["point"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(point, lib.point);
    assert!((point[0] + 0.1293).abs() < 5e-4);
    assert!((point[2] / PI - 0.9974).abs() < 5e-4);
    assert!((v["report"]["bloch_max_error"].as_f64().unwrap() - 0.0127).abs() < 5e-4);
    assert_eq!(code(dir.path(), &["optimize", "--target", "protocol2", "--delta", "-0.1"]), 2);
    assert_eq!(code(dir.path(), &["optimize", "--target", "readout"]), 2);
}

#[test]
fn gate_calibration() {
    let dir = TempDir::new().unwrap();
    let h = read_json(&ok(dir.path(), "h.json", &["gate-calibrate", "--gate", "hadamard"]));
    let scan = &h["hadamard_scan"];
    assert!(scan["best_fidelity"].as_f64().unwrap() > 0.999);
    assert!(scan["axis_angle_time"].is_f64() && scan["reference_time"].is_f64());
    assert!(h["fidelity"].as_f64().unwrap() > 0.999);

    let id = read_json(&ok(dir.path(), "i.json", &["gate-calibrate", "--gate", "identity"]));
    assert_eq!(id["drive"]["Pulses"].as_array().unwrap().len(), 0);
    assert_eq!(id["fidelity"].as_f64().unwrap(), 1.0);

    let x = read_json(&ok(dir.path(), "x.json", &["gate-calibrate", "--gate", "x"]));
    let pulses = x["drive"]["Pulses"].as_array().unwrap();
    assert_eq!(pulses.len(), 1);
    let d0 = pulses[0]["amplitude"].as_f64().unwrap();
    let t = pulses[0]["duration"].as_f64().unwrap();
    assert!((t * d0 / 2.0 - PI).abs() < 1e-9);

    let m = read_json(&ok(dir.path(), "m.json", &["gate-calibrate", "--matrix", "0,0,1,0,1,0,0,0"]));
    assert!(m["fidelity"].as_f64().unwrap() > 1.0 - 1e-12);
    assert_eq!(code(dir.path(), &["gate-calibrate", "--matrix", "1,0,1,0,0,0,1,0"]), 2);
}
