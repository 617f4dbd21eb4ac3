use std::f64::consts::PI;
use std::result::Result;

use chiralmol_core::chirality::current_operators;
use chiralmol_core::control::{calibrate_rotation, gates, hadamard_scan, AMPLITUDE_CAP_FRACTION};
use chiralmol_core::dynamics::{evolve_ode_with, OdeOptions};
use chiralmol_core::model::basis;
use chiralmol_core::optimize::DEFAULT_CHIRAL_BOUNDS;
use chiralmol_core::readout::protocol1_report_at;
use chiralmol_core::spectral::{ModeLabel, DARK_TOL, SPECTRUM_TOL};
use chiralmol_core::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::table::{Cell, Table};
use crate::CliError;

pub enum Output {
    Table { table: Table, missing: usize },
    Json(Value),
}

impl Output {
    fn table(table: Table) -> Self {
        Output::Table { table, missing: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CommandKind {
    Spectrum,
    Evolve,
    ChiralityMap,
    Wavepackets,
    ErrorMap,
    Optimize,
    GateCalibrate,
}

const PARAMS: [&str; 4] = ["gamma0", "j", "delta", "phi"];

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::Evolve => "evolve",
            CommandKind::ChiralityMap => "chirality-map",
            CommandKind::Wavepackets => "wavepackets",
            CommandKind::ErrorMap => "error-map",
            CommandKind::Optimize => "optimize",
            CommandKind::GateCalibrate => "gate-calibrate",
        }
    }

    pub fn allowed_keys(self) -> Vec<&'static str> {
        let extra: &[&str] = match self {
            CommandKind::Spectrum => &["spectrum_tol", "dark_tol"],
            CommandKind::Evolve => &[
                "state",
                "bloch_theta",
                "bloch_phi",
                "t_end",
                "samples",
                "tol",
                "method",
                "drive_amplitude",
                "drive_frequency",
                "drive_phase",
            ],
            CommandKind::ChiralityMap => &[
                "delta_min",
                "delta_max",
                "delta_count",
                "phi_min",
                "phi_max",
                "phi_count",
            ],
            CommandKind::Wavepackets => &["state", "theta", "gate_atom", "t_end", "dt", "samples", "tol"],
            CommandKind::ErrorMap => &[
                "theta",
                "dtheta_min",
                "dtheta_max",
                "dtheta_count",
                "ddelta_min",
                "ddelta_max",
                "ddelta_count",
            ],
            CommandKind::Optimize => &["target", "theta", "delta_min", "delta_max", "phi_min", "phi_max"],
            CommandKind::GateCalibrate => &["gate", "matrix", "amplitude_cap", "samples"],
        };
        PARAMS.iter().chain(extra).copied().collect()
    }

    pub fn default_json(self) -> bool {
        matches!(self, CommandKind::Optimize | CommandKind::GateCalibrate)
    }

    pub fn run(self, cfg: &RunConfig) -> Result<Output, CliError> {
        match self {
            CommandKind::Spectrum => spectrum(cfg),
            CommandKind::Evolve => evolve(cfg),
            CommandKind::ChiralityMap => chirality_map_cmd(cfg),
            CommandKind::Wavepackets => wavepackets(cfg),
            CommandKind::ErrorMap => error_map(cfg),
            CommandKind::Optimize => optimize(cfg),
            CommandKind::GateCalibrate => gate_calibrate(cfg),
        }
    }
}

fn params(cfg: &RunConfig, delta: f64, phi: f64) -> Result<SystemParams, CliError> {
    Ok(SystemParams::new(
        cfg.f64_or("gamma0", 1.0)?,
        cfg.f64_or("j", 0.1)?,
        cfg.f64_or("delta", delta)?,
        cfg.f64_or("phi", phi)?,
    )?)
}

fn j_only(cfg: &RunConfig) -> Result<f64, CliError> {
    if cfg.f64_or("gamma0", 1.0)? != 1.0 {
        return Err(CliError::Config(
            "this command works in units of the waveguide decay rate; gamma0 must be 1".into(),
        ));
    }
    let j = cfg.f64_or("j", 0.1)?;
    if !(j > 0.0) {
        return Err(CliError::Config(format!("j must be positive, got {j}")));
    }
    Ok(j)
}

fn label_name(l: Option<ModeLabel>) -> &'static str {
    match l {
        Some(ModeLabel::Zero) => "zero",
        Some(ModeLabel::Plus) => "plus",
        Some(ModeLabel::Minus) => "minus",
        None => "",
    }
}

fn spectrum(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = params(cfg, 0.0, PI)?;
    let s = numeric_spectrum(&build_hamiltonian(&p), cfg.f64_or("spectrum_tol", SPECTRUM_TOL)?)?;
    let modes = classify_modes(&s, cfg.f64_or("dark_tol", DARK_TOL)?);
    let g2 = exceptional_distance(&p);
    let mut t = Table::new(&[
        "mode",
        "re_eps",
        "im_eps",
        "gamma_r",
        "is_dark",
        "label",
        "re_gamma_sq",
        "im_gamma_sq",
        "condition",
    ]);
    for (r, m) in modes.iter().enumerate() {
        t.push(vec![
            Cell::Int(r as i64),
            s.eigenvalues[r].re.into(),
            s.eigenvalues[r].im.into(),
            m.gamma.into(),
            Cell::Bool(m.is_dark),
            Cell::Text(label_name(m.label).into()),
            g2.re.into(),
            g2.im.into(),
            s.condition.into(),
        ]);
    }
    Ok(Output::table(t))
}

fn named_state(cfg: &RunConfig, default: &str) -> Result<MolecularAmplitude, CliError> {
    let state = cfg.str_or("state", default);
    let v = match state {
        "zero" => basis::zero(),
        "one" => basis::one(),
        "antisymmetric" => basis::antisymmetric(),
        "atom1" => MolecularAmplitude::excited(1).0,
        "atom2" => MolecularAmplitude::excited(2).0,
        "atom3" => MolecularAmplitude::excited(3).0,
        "bloch" => {
            let l = LogicalState::from_bloch(cfg.f64_or("bloch_theta", 0.0)?, cfg.f64_or("bloch_phi", 0.0)?);
            embed_logical(&l)?.0
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown state {other:?} (zero, one, antisymmetric, atom1, atom2, atom3, bloch)"
            )))
        }
    };
    Ok(MolecularAmplitude(v))
}

fn sample_count(cfg: &RunConfig, default: usize) -> Result<usize, CliError> {
    let n = cfg.usize_or("samples", default)?;
    if n < 2 {
        return Err(CliError::Config(format!("samples must be at least 2, got {n}")));
    }
    Ok(n)
}

/// ODE trajectory whose grid contains exactly `samples` equally spaced points.
fn sampled_trajectory<F: Fn(f64) -> f64>(
    c0: &MolecularAmplitude,
    p: &SystemParams,
    delta_of_t: F,
    t_end: f64,
    samples: usize,
    tol: f64,
) -> Result<(Vec<f64>, Vec<usize>, Trajectory), CliError> {
    let intervals = samples - 1;
    let base = intervals * 8usize.div_ceil(intervals);
    let opts = OdeOptions {
        tol,
        max_step: t_end / base as f64 * (1.0 + 1e-12),
        ..Default::default()
    };
    let traj = evolve_ode_with(c0, p, delta_of_t, t_end, &opts)?;
    let stride = (traj.len() - 1) / intervals;
    let idx: Vec<usize> = (0..samples).map(|k| k * stride).collect();
    let times = idx.iter().map(|&i| traj.times[i]).collect();
    Ok((times, idx, traj))
}

fn positive(cfg: &RunConfig, key: &str, default: f64) -> Result<f64, CliError> {
    let v = cfg.f64_or(key, default)?;
    if !(v > 0.0) {
        return Err(CliError::Config(format!("{key} must be positive, got {v}")));
    }
    Ok(v)
}

fn evolve(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = params(cfg, 0.0, PI)?;
    let c0 = named_state(cfg, "atom1")?;
    let t_end = positive(cfg, "t_end", 50.0)?;
    let samples = sample_count(cfg, 501)?;
    let tol = positive(cfg, "tol", 1e-10)?;
    let drive = DriveSpec {
        amplitude: cfg.f64_or("drive_amplitude", 0.0)?,
        drive_frequency: cfg.f64_or("drive_frequency", 2.0 * std::f64::consts::SQRT_2 * p.j)?,
        drive_phase: cfg.f64_or("drive_phase", 0.0)?,
        duration: t_end,
    };
    drive.validate()?;

    let states: Vec<(f64, MolecularAmplitude)> = match cfg.str_or("method", "ode") {
        "ode" => {
            let (times, idx, traj) = sampled_trajectory(&c0, &p, |t| p.delta + drive.detuning(t), t_end, samples, tol)?;
            times.into_iter().zip(idx.iter().map(|&i| traj.states[i])).collect()
        }
        "modal" => {
            if drive.amplitude != 0.0 {
                return Err(CliError::Config("method=modal needs drive_amplitude = 0".into()));
            }
            let s = numeric_spectrum(&build_hamiltonian(&p), SPECTRUM_TOL)?;
            (0..samples)
                .map(|k| {
                    let t = t_end * k as f64 / (samples - 1) as f64;
                    Ok((t, evolve_modal(&c0, &s, t)?))
                })
                .collect::<Result<_, CliError>>()?
        }
        other => return Err(CliError::Config(format!("unknown method {other:?} (ode, modal)"))),
    };

    let mut t = Table::new(&[
        "t", "re_c1", "im_c1", "re_c2", "im_c2", "re_c3", "im_c3", "norm", "re_aL", "im_aL", "re_aR", "im_aR",
    ]);
    for (time, c) in states {
        let (al, ar) = emission_amplitudes(&c, &p);
        let mut row = vec![time.into()];
        for z in c.vector().iter() {
            row.push(z.re.into());
            row.push(z.im.into());
        }
        row.extend([c.norm().into(), al.re.into(), al.im.into(), ar.re.into(), ar.im.into()]);
        t.push(row);
    }
    Ok(Output::table(t))
}

fn chirality_map_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let j = j_only(cfg)?;
    let deltas = cfg.grid("delta", -0.5, 0.5, 101)?;
    let phis = cfg.grid("phi", 0.0, 2.0 * PI, 101)?;
    let map = chirality_map(j, &deltas, &phis)?;
    let mut t = Table::new(&["delta", "phi", "eta_max"]);
    for (pi_, &phi) in phis.iter().enumerate() {
        for (di, &d) in deltas.iter().enumerate() {
            t.push(vec![d.into(), phi.into(), map.get(pi_, di).into()]);
        }
    }
    Ok(Output::Table {
        missing: map.missing(),
        table: t,
    })
}

/// Protocol-2 operating point; keys left unset are taken from the optimizer.
fn operating_point(cfg: &RunConfig, j: f64) -> Result<(f64, f64, f64), CliError> {
    let given = (cfg.f64_opt("delta")?, cfg.f64_opt("phi")?, cfg.f64_opt("theta")?);
    if let (Some(d), Some(p), Some(t)) = given {
        return Ok((d, p, t));
    }
    let best = optimize_protocol2(j, None)?;
    eprintln!(
        "operating point from protocol-2 optimization: delta={}, phi={}, theta={}",
        best.point[0], best.point[1], best.point[2]
    );
    Ok((
        given.0.unwrap_or(best.point[0]),
        given.1.unwrap_or(best.point[1]),
        given.2.unwrap_or(best.point[2]),
    ))
}

fn wavepackets(cfg: &RunConfig) -> Result<Output, CliError> {
    let j = j_only(cfg)?;
    let (delta, phi, theta) = operating_point(cfg, j)?;
    let p = SystemParams::new(1.0, j, delta, phi)?;
    let logical = match cfg.str_or("state", "zero") {
        "zero" => basis::zero(),
        "one" => basis::one(),
        other => return Err(CliError::Config(format!("unknown state {other:?} (zero, one)"))),
    };
    let atom = cfg.usize_or("gate_atom", 2)?;
    let c0 = MolecularAmplitude(local_phase_gate(atom, theta)? * logical);

    let s = numeric_spectrum(&build_hamiltonian(&p), SPECTRUM_TOL)?;
    let slowest = s
        .decay_rates()
        .into_iter()
        .filter(|g| *g > 1e-6)
        .fold(f64::INFINITY, f64::min);
    let t_default = if slowest.is_finite() { 40.0 / slowest } else { 40.0 };
    let t_end = positive(cfg, "t_end", t_default)?;
    let dt = positive(cfg, "dt", 0.02)?;
    let samples = sample_count(cfg, (t_end / dt).ceil() as usize + 1)?;
    let tol = positive(cfg, "tol", 1e-9)?;
    let (times, idx, traj) = sampled_trajectory(&c0, &p, |_| p.delta, t_end, samples, tol)?;

    let mut t = Table::new(&["t", "re_aL", "im_aL", "re_aR", "im_aR", "abs_aL", "abs_aR"]);
    for (time, &i) in times.iter().zip(&idx) {
        let (al, ar) = (traj.alpha_l[i], traj.alpha_r[i]);
        t.push(vec![
            (*time).into(),
            al.re.into(),
            al.im.into(),
            ar.re.into(),
            ar.im.into(),
            al.norm().into(),
            ar.norm().into(),
        ]);
    }
    if let Ok(ops) = current_operators(&p, DARK_TOL) {
        let (il, ir) = integrated_currents(&c0, &ops);
        match chirality(il, ir) {
            Ok(eta) => eprintln!("integrated currents: left={il:.6e} right={ir:.6e} eta={eta:.6}"),
            Err(_) => eprintln!("integrated currents: left={il:.6e} right={ir:.6e} (state does not radiate)"),
        }
    }
    Ok(Output::table(t))
}

fn error_map(cfg: &RunConfig) -> Result<Output, CliError> {
    let j = j_only(cfg)?;
    let base = operating_point(cfg, j)?;
    let dthetas = cfg.grid("dtheta", -0.1 * base.2.abs(), 0.1 * base.2.abs(), 11)?;
    let ddeltas = cfg.grid("ddelta", -0.1 * base.0.abs(), 0.1 * base.0.abs(), 11)?;
    let map = robustness_map(j, base, &dthetas, &ddeltas)?;
    let mut t = Table::new(&["dtheta", "ddelta", "max_error"]);
    for (ti, &dth) in dthetas.iter().enumerate() {
        for (di, &dd) in ddeltas.iter().enumerate() {
            t.push(vec![dth.into(), dd.into(), map.get(ti, di).into()]);
        }
    }
    Ok(Output::Table {
        missing: map.missing(),
        table: t,
    })
}

fn optimize(cfg: &RunConfig) -> Result<Output, CliError> {
    let j = j_only(cfg)?;
    match cfg.str_or("target", "chirality") {
        "chirality" => {
            for key in ["delta", "phi", "theta"] {
                if cfg.contains(key) {
                    return Err(CliError::Config(format!("{key} is not used by target=chirality")));
                }
            }
            let d = DEFAULT_CHIRAL_BOUNDS;
            let bounds = [
                (cfg.f64_or("delta_min", d[0].0)?, cfg.f64_or("delta_max", d[0].1)?),
                (cfg.f64_or("phi_min", d[1].0)?, cfg.f64_or("phi_max", d[1].1)?),
            ];
            let r = match find_perfect_chirality(j, bounds) {
                Ok(r) => r,
                Err(Error::NotFound(best)) => {
                    return Err(CliError::NotFound(json!({ "target": "chirality", "j": j, "search": best })))
                }
                Err(e) => return Err(e.into()),
            };
            let point = (r.point[0], r.point[1]);
            let angles = derive_u_plus_angles(j, point).ok();
            let report = angles.as_ref().and_then(|a| protocol1_report_at(j, point, a).ok());
            Ok(Output::Json(json!({
                "target": "chirality",
                "j": j,
                "search": r,
                "u_plus_angles": angles,
                "protocol1": report,
            })))
        }
        "protocol2" => {
            for key in ["delta_min", "delta_max", "phi_min", "phi_max"] {
                if cfg.contains(key) {
                    return Err(CliError::Config(format!("{key} is not used by target=protocol2")));
                }
            }
            let start = match (cfg.f64_opt("delta")?, cfg.f64_opt("phi")?, cfg.f64_opt("theta")?) {
                (None, None, None) => None,
                (Some(d), Some(p), Some(t)) => Some((d, p, t)),
                _ => return Err(CliError::Config("give all of delta, phi, theta as a start point, or none".into())),
            };
            let r = match optimize_protocol2(j, start) {
                Ok(r) => r,
                Err(Error::NotFound(best)) => {
                    return Err(CliError::NotFound(json!({ "target": "protocol2", "j": j, "search": best })))
                }
                Err(e) => return Err(e.into()),
            };
            let report = protocol2_report(j, (r.point[0], r.point[1], r.point[2]))?;
            Ok(Output::Json(json!({
                "target": "protocol2",
                "j": j,
                "search": r,
                "report": report,
            })))
        }
        other => Err(CliError::Config(format!("unknown target {other:?} (chirality, protocol2)"))),
    }
}

fn matrix_json(m: &Mat2) -> Value {
    json!([[[m[(0, 0)].re, m[(0, 0)].im], [m[(0, 1)].re, m[(0, 1)].im]],
           [[m[(1, 0)].re, m[(1, 0)].im], [m[(1, 1)].re, m[(1, 1)].im]]])
}

/// Eight comma-separated numbers: re, im of u00, u01, u10, u11.
fn parse_matrix(s: &str) -> Result<Mat2, CliError> {
    let nums: Vec<f64> = s
        .split(',')
        .map(|x| crate::config::parse_number(x).ok_or_else(|| CliError::Config(format!("matrix: bad entry {x:?}"))))
        .collect::<Result<_, _>>()?;
    if nums.len() != 8 {
        return Err(CliError::Config(format!("matrix needs 8 numbers, got {}", nums.len())));
    }
    let z = |k: usize| C64::new(nums[2 * k], nums[2 * k + 1]);
    Ok(Mat2::new(z(0), z(1), z(2), z(3)))
}

fn gate_calibrate(cfg: &RunConfig) -> Result<Output, CliError> {
    let j = j_only(cfg)?;
    for key in ["delta", "phi"] {
        if cfg.contains(key) {
            return Err(CliError::Config(format!("{key} is not used by gate-calibrate")));
        }
    }
    let (name, target) = match (cfg.contains("gate"), cfg.contains("matrix")) {
        (true, true) => return Err(CliError::Config("give either gate or matrix, not both".into())),
        (false, true) => ("matrix".to_string(), parse_matrix(cfg.str_or("matrix", ""))?),
        (_, false) => {
            let name = cfg.str_or("gate", "hadamard").to_ascii_lowercase();
            let m = gates::by_name(&name).ok_or_else(|| {
                CliError::Config(format!("unknown gate {name:?} (identity, x, y, z, hadamard, s, t)"))
            })?;
            (name, m)
        }
    };
    let cap = positive(cfg, "amplitude_cap", AMPLITUDE_CAP_FRACTION * j)?;
    let report = calibrate_rotation(&target, j, cap)?;
    let mut out = json!({
        "gate": name,
        "j": j,
        "amplitude_cap": cap,
        "target": matrix_json(&report.target),
        "achieved": matrix_json(&report.achieved),
        "fidelity": report.fidelity,
        "drive": report.drive,
    });
    if matches!(name.as_str(), "hadamard" | "h") {
        let scan = hadamard_scan(j, sample_count(cfg, 2000)?)?;
        out["hadamard_scan"] = serde_json::to_value(scan).expect("scan serializes");
    } else if cfg.contains("samples") {
        return Err(CliError::Config("samples only applies to the hadamard scan".into()));
    }
    Ok(Output::Json(out))
}
