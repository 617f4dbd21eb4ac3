//! Control of the decoherence-free logical qubit.
//!
//! At φ = π the span of |0_L⟩, |1_L⟩ is invariant under the full
//! Hamiltonian for any detuning Δ(t), and the logical dynamics is
//! `√2J σ_z − Δ/2 σ_x` (plus a global phase Δ/2). A resonant modulation
//! Δ(t) = Δ₀cos(ω_d t + ϕ) gives, in the frame rotating at ω_d/2 about σ_z,
//! `(2√2J − ω_d)/2 σ_z − Δ₀/4 (σ_x cos ϕ + σ_y sin ϕ)`.
//!
//! Pauli matrices act on (a0, a1) = amplitudes on (|0_L⟩, |1_L⟩), with
//! |1_L⟩ as the +1 eigenstate of σ_z (see [`crate::linalg::pauli`]).

use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

use crate::dynamics::{evolve_ode_with, OdeOptions};
use crate::error::{Error, Result};
use crate::linalg::{cr, pauli, wrap_angle, Mat2, C64, I};
use crate::model::{embed_logical, project_logical, DriveSpec, LogicalState, SystemParams};

/// H = hz σ_z + hx σ_x + hy σ_y on the logical qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogicalHamiltonian {
    pub hz: f64,
    pub hx: f64,
    pub hy: f64,
}

impl LogicalHamiltonian {
    pub fn matrix(&self) -> Mat2 {
        pauli::z() * cr(self.hz) + pauli::x() * cr(self.hx) + pauli::y() * cr(self.hy)
    }

    pub fn magnitude(&self) -> f64 {
        (self.hz * self.hz + self.hx * self.hx + self.hy * self.hy).sqrt()
    }

    /// `exp(−iHt)` in closed form.
    pub fn propagator(&self, t: f64) -> Mat2 {
        let m = self.magnitude();
        if m == 0.0 || t == 0.0 {
            return Mat2::identity();
        }
        let angle = m * t;
        let axis = self.matrix() / cr(m);
        Mat2::identity() * cr(angle.cos()) - axis * (I * angle.sin())
    }
}

/// Static-detuning logical Hamiltonian: (√2J, −Δ/2, 0).
pub fn logical_hamiltonian(j: f64, delta: f64) -> LogicalHamiltonian {
    LogicalHamiltonian {
        hz: SQRT_2 * j,
        hx: -delta / 2.0,
        hy: 0.0,
    }
}

/// Rotating-frame Hamiltonian of a monochromatic drive.
pub fn effective_drive_hamiltonian(j: f64, d: &DriveSpec) -> LogicalHamiltonian {
    LogicalHamiltonian {
        hz: (2.0 * SQRT_2 * j - d.drive_frequency) / 2.0,
        hx: -(d.amplitude / 4.0) * d.drive_phase.cos(),
        hy: -(d.amplitude / 4.0) * d.drive_phase.sin(),
    }
}

pub fn apply(u: &Mat2, l: &LogicalState) -> LogicalState {
    LogicalState::new(
        u[(0, 0)] * l.a0 + u[(0, 1)] * l.a1,
        u[(1, 0)] * l.a0 + u[(1, 1)] * l.a1,
    )
}

pub fn evolve_logical(l0: &LogicalState, h: &LogicalHamiltonian, t: f64) -> Result<LogicalState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Validation(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(apply(&h.propagator(t), l0))
}

/// |tr(U†V)|²/4, clamped to [0, 1].
pub fn gate_fidelity(target: &Mat2, achieved: &Mat2) -> f64 {
    ((target.adjoint() * achieved).trace().norm_sqr() / 4.0).clamp(0.0, 1.0)
}

/// Standard single-qubit targets on the logical basis.
pub mod gates {
    use super::*;

    pub fn identity() -> Mat2 {
        Mat2::identity()
    }

    pub fn x() -> Mat2 {
        pauli::x()
    }

    pub fn y() -> Mat2 {
        pauli::y()
    }

    pub fn z() -> Mat2 {
        pauli::z()
    }

    pub fn hadamard() -> Mat2 {
        (pauli::z() + pauli::x()) / cr(SQRT_2)
    }

    /// Phase gate `diag` on (|1_L⟩ up): e^{−iθ/2 σ_z} up to global phase.
    pub fn phase(theta: f64) -> Mat2 {
        Mat2::new(C64::from_polar(1.0, theta / 2.0), C64::ZERO, C64::ZERO, C64::from_polar(1.0, -theta / 2.0))
    }

    pub fn by_name(name: &str) -> Option<Mat2> {
        match name.to_ascii_lowercase().as_str() {
            "identity" | "id" | "i" => Some(identity()),
            "x" | "x-gate" => Some(x()),
            "y" | "y-gate" => Some(y()),
            "z" | "z-gate" => Some(z()),
            "hadamard" | "h" => Some(hadamard()),
            "s" => Some(phase(PI / 2.0)),
            "t" => Some(phase(PI / 4.0)),
            _ => None,
        }
    }
}

/// Rotation angle θ ∈ [0, π] and unit axis n with U ∝ exp(−iθ/2 n·σ).
pub fn axis_angle(u: &Mat2) -> (f64, [f64; 3]) {
    let det = u.determinant();
    let mut v = u / det.sqrt();
    if v.trace().re < 0.0 {
        v = -v;
    }
    let cos_half = (v.trace().re / 2.0).clamp(-1.0, 1.0);
    let comp = |s: Mat2| ((s * v).trace() * I / 2.0).re;
    let n = [comp(pauli::x()), comp(pauli::y()), comp(pauli::z())];
    let sin_half = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let theta = 2.0 * sin_half.atan2(cos_half);
    if sin_half < 1e-15 {
        return (0.0, [0.0, 0.0, 1.0]);
    }
    (theta, n.map(|x| x / sin_half))
}

fn check_unitary(u: &Mat2) -> Result<()> {
    let dev = (u.adjoint() * u - Mat2::identity()).norm();
    if dev > 1e-10 || !dev.is_finite() {
        return Err(Error::Validation(format!("target is not unitary (‖U†U − 1‖ = {dev:e})")));
    }
    Ok(())
}

fn z_pulse(j: f64, angle: f64) -> DriveSpec {
    // free evolution √2J σ_z: Rz(2√2J t)
    DriveSpec {
        amplitude: 0.0,
        drive_frequency: 0.0,
        drive_phase: 0.0,
        duration: angle.rem_euclid(2.0 * PI) / (2.0 * SQRT_2 * j),
    }
}

fn equatorial_pulse(j: f64, angle: f64, nx: f64, ny: f64, amplitude: f64) -> DriveSpec {
    // resonant drive rotates about −(cos ϕ, sin ϕ) at rate Δ₀/2
    DriveSpec {
        amplitude,
        drive_frequency: 2.0 * SQRT_2 * j,
        drive_phase: wrap_angle(ny.atan2(nx) + PI),
        duration: angle / (amplitude / 2.0),
    }
}

const ANGLE_EPS: f64 = 1e-12;

/// Resonant pulse sequence (time order) implementing `target` up to a global
/// phase. Equatorial axes take one drive pulse; other axes a Z–X–Z sandwich
/// whose Z segments are free evolution.
pub fn synthesize_rotation(target: &Mat2, j: f64, amplitude_cap: f64) -> Result<Vec<DriveSpec>> {
    check_unitary(target)?;
    if !(amplitude_cap > 0.0) || !amplitude_cap.is_finite() {
        return Err(Error::Validation("amplitude_cap must be positive".into()));
    }
    if !(j > 0.0) {
        return Err(Error::Validation("J must be positive for gate synthesis".into()));
    }
    let (theta, n) = axis_angle(target);
    if theta < ANGLE_EPS {
        return Ok(Vec::new());
    }
    if n[2].abs() < 1e-12 {
        let (mut nx, mut ny) = (n[0], n[1]);
        // θ = π: both axis signs work; prefer the one with |ϕ| ≤ π/2
        if (theta - PI).abs() < 1e-9 && wrap_angle(ny.atan2(nx) + PI).abs() > PI / 2.0 + 1e-12 {
            nx = -nx;
            ny = -ny;
        }
        return Ok(vec![equatorial_pulse(j, theta, nx, ny, amplitude_cap)]);
    }
    if n[0].abs() < 1e-12 && n[1].abs() < 1e-12 {
        let angle = if n[2] > 0.0 { theta } else { -theta };
        return Ok(vec![z_pulse(j, angle)]);
    }

    let (a, b, cc) = zxz_euler(target);
    let mut pulses = Vec::with_capacity(3);
    if cc.rem_euclid(2.0 * PI).min(2.0 * PI - cc.rem_euclid(2.0 * PI)) > ANGLE_EPS {
        pulses.push(z_pulse(j, cc));
    }
    if b > ANGLE_EPS {
        pulses.push(equatorial_pulse(j, b, 1.0, 0.0, amplitude_cap));
    }
    if a.rem_euclid(2.0 * PI).min(2.0 * PI - a.rem_euclid(2.0 * PI)) > ANGLE_EPS {
        pulses.push(z_pulse(j, a));
    }
    Ok(pulses)
}

/// Angles (a, b, c) with U ∝ Rz(a) Rx(b) Rz(c), b ∈ [0, π].
pub fn zxz_euler(u: &Mat2) -> (f64, f64, f64) {
    // reorder to (|1_L⟩, |0_L⟩) where the Paulis take their textbook form
    let v = u / u.determinant().sqrt();
    let v00 = v[(1, 1)];
    let v01 = v[(1, 0)];
    let b = 2.0 * v01.norm().atan2(v00.norm());
    let sum = if v00.norm() > 1e-14 { -2.0 * v00.arg() } else { 0.0 };
    let diff = if v01.norm() > 1e-14 { -2.0 * (I * v01).arg() } else { 0.0 };
    ((sum + diff) / 2.0, b, (sum - diff) / 2.0)
}

/// Product of the pulses' rotating-frame propagators (later pulses on the
/// left).
pub fn compose_pulses(j: f64, pulses: &[DriveSpec]) -> Mat2 {
    pulses.iter().fold(Mat2::identity(), |acc, d| {
        effective_drive_hamiltonian(j, d).propagator(d.duration) * acc
    })
}

#[derive(Debug, Clone, Serialize)]
pub enum GateDrive {
    Pulses(Vec<DriveSpec>),
    StaticDetuning { delta: f64, duration: f64 },
}

#[derive(Debug, Clone)]
pub struct GateReport {
    pub target: Mat2,
    pub achieved: Mat2,
    pub fidelity: f64,
    pub drive: GateDrive,
}

pub fn calibrate_rotation(target: &Mat2, j: f64, amplitude_cap: f64) -> Result<GateReport> {
    let pulses = synthesize_rotation(target, j, amplitude_cap)?;
    let achieved = compose_pulses(j, &pulses);
    Ok(GateReport {
        target: *target,
        achieved,
        fidelity: gate_fidelity(target, &achieved),
        drive: GateDrive::Pulses(pulses),
    })
}

/// Default drive amplitude cap relative to J.
pub const AMPLITUDE_CAP_FRACTION: f64 = 0.1;

/// Fidelity of the static-detuning Hadamard (Δ = −2√2J) against duration.
#[derive(Debug, Clone, Serialize)]
pub struct HadamardScan {
    pub delta: f64,
    pub times: Vec<f64>,
    pub fidelities: Vec<f64>,
    pub best_time: f64,
    pub best_fidelity: f64,
    /// π/(4J): a π rotation about (x+z)/√2 at rate |h| = 2J.
    pub axis_angle_time: f64,
    pub axis_angle_fidelity: f64,
    /// π/(2J), the commonly quoted duration.
    pub reference_time: f64,
    pub reference_fidelity: f64,
    pub reference_is_optimal: bool,
}

pub fn hadamard_scan(j: f64, samples: usize) -> Result<HadamardScan> {
    if !(j > 0.0) || samples < 2 {
        return Err(Error::Validation("hadamard scan needs J > 0 and ≥ 2 samples".into()));
    }
    let delta = -2.0 * SQRT_2 * j;
    let h = logical_hamiltonian(j, delta);
    let target = gates::hadamard();
    let fid = |t: f64| gate_fidelity(&target, &h.propagator(t));
    let t_max = 2.0 * PI / j;
    let dt = t_max / samples as f64;
    let times: Vec<f64> = (1..=samples).map(|k| k as f64 * dt).collect();
    let fidelities: Vec<f64> = times.iter().map(|&t| fid(t)).collect();
    let mut best = 0;
    for (k, &f) in fidelities.iter().enumerate() {
        if f > fidelities[best] + 1e-12 {
            best = k;
        }
    }
    let lo = (times[best] - dt).max(0.0);
    let hi = times[best] + dt;
    let best_time = golden_max(fid, lo, hi, 1e-12);
    let best_fidelity = fid(best_time);
    let axis_angle_time = PI / (4.0 * j);
    let reference_time = PI / (2.0 * j);
    let reference_fidelity = fid(reference_time);
    Ok(HadamardScan {
        delta,
        times,
        fidelities,
        best_time,
        best_fidelity,
        axis_angle_time,
        axis_angle_fidelity: fid(axis_angle_time),
        reference_time,
        reference_fidelity,
        reference_is_optimal: reference_fidelity >= best_fidelity - 1e-6,
    })
}

/// Golden-section maximization of a unimodal function on [lo, hi].
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

const FULL_MODEL_TOL: f64 = 1e-9;
const LEAKAGE_LIMIT: f64 = 1e-6;

fn require_df_phase(p: &SystemParams) -> Result<()> {
    if (p.phase() + cr(1.0)).norm() > 1e-9 {
        return Err(Error::Validation(format!(
            "full-model drive checks need φ = π (mod 2π), got φ = {}",
            p.phi
        )));
    }
    Ok(())
}

/// Logical states along a full three-level trajectory driven by `d`, with the
/// largest leakage out of the logical subspace.
fn driven_logical_trajectory(
    l0: &LogicalState,
    d: &DriveSpec,
    p: &SystemParams,
) -> Result<(Vec<f64>, Vec<LogicalState>, f64)> {
    d.validate()?;
    require_df_phase(p)?;
    let c0 = embed_logical(l0)?;
    let opts = OdeOptions {
        tol: FULL_MODEL_TOL,
        max_step: 0.1,
        ..OdeOptions::default()
    };
    let traj = evolve_ode_with(&c0, p, |t| d.detuning(t), d.duration, &opts)?;
    let mut leakage: f64 = 0.0;
    let states = traj
        .states
        .iter()
        .map(|c| {
            let (l, r) = project_logical(c);
            leakage = leakage.max(r);
            l
        })
        .collect();
    Ok((traj.times, states, leakage))
}

/// Largest trace distance, over the trajectory, between the full model
/// (moved to the rotating frame) and the rotating-wave prediction.
pub fn rwa_check(l0: &LogicalState, j: f64, d: &DriveSpec, p: &SystemParams) -> Result<f64> {
    if d.amplitude.abs() > j.abs() {
        return Err(Error::Validation("drive amplitude must not exceed J".into()));
    }
    let (times, states, leakage) = driven_logical_trajectory(l0, d, &p.with_delta(0.0))?;
    if leakage > LEAKAGE_LIMIT {
        return Err(Error::Leakage(leakage));
    }
    let heff = effective_drive_hamiltonian(j, d);
    let stride = (times.len() / 400).max(1);
    let mut worst: f64 = 0.0;
    for k in (0..times.len()).step_by(stride).chain(std::iter::once(times.len() - 1)) {
        let t = times[k];
        let frame = gates::phase(-d.drive_frequency * t);
        let rotated = apply(&frame, &states[k]);
        let predicted = apply(&heff.propagator(t), l0);
        worst = worst.max(rotated.trace_distance(&predicted));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RabiMeasurement {
    /// Fitted Ω in P₁(t) = sin²(Ωt/2).
    pub frequency: f64,
    /// Δ₀/2
    pub expected: f64,
    pub leakage: f64,
}

/// Drive |0_L⟩ resonantly in the full model and fit the |1_L⟩ population.
pub fn measure_rabi_frequency(j: f64, amplitude: f64, periods: f64, p: &SystemParams) -> Result<RabiMeasurement> {
    if !(amplitude > 0.0) || !(periods > 0.0) {
        return Err(Error::Validation("amplitude and periods must be positive".into()));
    }
    let expected = amplitude / 2.0;
    let d = DriveSpec {
        amplitude,
        drive_frequency: 2.0 * SQRT_2 * j,
        drive_phase: 0.0,
        duration: periods * 2.0 * PI / expected,
    };
    let (times, states, leakage) = driven_logical_trajectory(&LogicalState::zero(), &d, &p.with_delta(0.0))?;
    let stride = (times.len() / 4000).max(1);
    let samples: Vec<(f64, f64)> = (0..times.len())
        .step_by(stride)
        .map(|k| (times[k], states[k].a1.norm_sqr() / states[k].norm_sqr()))
        .collect();
    let sse = |omega: f64| -> f64 {
        samples
            .iter()
            .map(|&(t, p1)| {
                let m = (omega * t / 2.0).sin().powi(2);
                (m - p1) * (m - p1)
            })
            .sum()
    };
    let grid: Vec<f64> = (0..=400).map(|k| expected * (0.5 + k as f64 / 400.0)).collect();
    let best = grid
        .iter()
        .copied()
        .min_by(|a, b| sse(*a).total_cmp(&sse(*b)))
        .unwrap();
    let step = expected / 400.0;
    let frequency = golden_max(|w| -sse(w), best - step, best + step, 1e-12 * expected);
    Ok(RabiMeasurement {
        frequency,
        expected,
        leakage,
    })
}
