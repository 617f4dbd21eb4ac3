//! Local gates, the U₊ preparation circuit and the two chiral readout
//! protocols.
//!
//! A logical state is read out by switching to a chiral point and recording
//! the port the photon leaves through: right ⇒ |0_L⟩, left ⇒ |1_L⟩.
//! `e0` and `e1` are the wrong-port probabilities of the two basis images,
//! conditioned on emission.

use rayon::prelude::*;
use serde::Serialize;

use crate::chirality::{chirality, current_operators, integrated_currents, CurrentOperators};
use crate::error::{Error, Result};
use crate::linalg::{cr, Mat2, Mat3, Vec3, C64, I};
use crate::model::{basis, embed_logical, LogicalState, MolecularAmplitude, SystemParams};
use crate::optimize::{derive_u_plus_angles, find_perfect_chirality, UPlusAngles, DEFAULT_CHIRAL_BOUNDS};
use crate::simplex::{minimize, NelderMeadOptions};
use crate::spectral::DARK_TOL;

/// Total emission below this makes the readout of a state undefined.
pub const EMISSION_FLOOR: f64 = 1e-12;

/// `S_n(θ)`: multiplies c_n by e^{iθ}.
pub fn local_phase_gate(n: usize, theta: f64) -> Result<Mat3> {
    if !(1..=3).contains(&n) {
        return Err(Error::Validation(format!("atom index must be 1, 2 or 3, got {n}")));
    }
    let mut m = Mat3::identity();
    m[(n - 1, n - 1)] = C64::from_polar(1.0, theta);
    Ok(m)
}

fn basis_matrix() -> Mat3 {
    Mat3::from_columns(&[basis::zero(), basis::one(), basis::antisymmetric()])
}

/// Lift a logical 2×2 operator to the molecule, identity on the
/// antisymmetric complement.
pub fn lift_logical(u: &Mat2) -> Mat3 {
    let mut block = Mat3::identity();
    for r in 0..2 {
        for c in 0..2 {
            block[(r, c)] = u[(r, c)];
        }
    }
    let b = basis_matrix();
    b * block * b.adjoint()
}

/// `R(α) = exp(−iσ_y α)` on the logical span.
pub fn logical_rotation(alpha: f64) -> Mat3 {
    let y = crate::linalg::pauli::y();
    lift_logical(&(Mat2::identity() * cr(alpha.cos()) - y * (I * alpha.sin())))
}

/// S₂(θ₂) S₁(θ₁) R(α) applied to the image of `l`.
pub fn prepare_chiral_state(l: &LogicalState, angles: (f64, f64, f64)) -> Result<MolecularAmplitude> {
    let (t1, t2, alpha) = angles;
    let c = embed_logical(l)?;
    let u = local_phase_gate(2, t2)? * local_phase_gate(1, t1)? * logical_rotation(alpha);
    Ok(MolecularAmplitude(u * c.vector()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GateDescriptor {
    LogicalRotation { alpha: f64 },
    PhaseShift { atom: usize, theta: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolReport {
    pub params_used: SystemParams,
    /// In application order.
    pub gates: Vec<GateDescriptor>,
    pub eta0: f64,
    pub eta1: f64,
    pub e0: f64,
    pub e1: f64,
    /// Largest wrong-assignment probability over the Bloch sphere.
    pub bloch_max_error: f64,
    /// Largest |P_R(ψ) − cos²(ϑ/2)| over the Bloch sphere.
    pub coherent_max_error: f64,
    pub normalization_deficit: f64,
}

/// Reduced right-port and total-emission forms on the prepared images.
#[derive(Debug, Clone, Copy)]
pub struct ReadoutForms {
    pub right: Mat2,
    pub total: Mat2,
}

impl ReadoutForms {
    pub fn new(ops: &CurrentOperators, prep0: &Vec3, prep1: &Vec3) -> Self {
        let p = nalgebra::Matrix3x2::from_columns(&[*prep0, *prep1]);
        let herm = |m: Mat2| (m + m.adjoint()) * cr(0.5);
        Self {
            right: herm(p.adjoint() * ops.i_right * p),
            total: herm(p.adjoint() * ops.total() * p),
        }
    }

    /// Conditional right-port probability of cos(ϑ/2)|0⟩ + e^{iϕ}sin(ϑ/2)|1⟩.
    pub fn right_probability(&self, theta: f64, phi: f64) -> Result<f64> {
        let v = nalgebra::Vector2::new(cr((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phi));
        let tot = v.dotc(&(self.total * v)).re;
        if !(tot >= EMISSION_FLOOR) {
            return Err(Error::UndefinedChirality);
        }
        Ok(v.dotc(&(self.right * v)).re / tot)
    }

    pub fn coherent_error(&self, theta: f64, phi: f64) -> Result<f64> {
        Ok((self.right_probability(theta, phi)? - (theta / 2.0).cos().powi(2)).abs())
    }

    /// max over the sphere of |P_R(ψ) − cos²(ϑ/2)|: dense grid, then simplex
    /// refinement of the three best cells.
    pub fn coherent_max_error(&self) -> Result<f64> {
        let (nt, np) = (61usize, 120usize);
        let mut cells = Vec::with_capacity(nt * np);
        for a in 0..nt {
            let theta = std::f64::consts::PI * a as f64 / (nt - 1) as f64;
            for b in 0..np {
                let phi = 2.0 * std::f64::consts::PI * b as f64 / np as f64;
                cells.push((self.coherent_error(theta, phi)?, theta, phi));
            }
        }
        cells.sort_by(|x, y| y.0.total_cmp(&x.0));
        let bounds = [(0.0, std::f64::consts::PI), (-std::f64::consts::PI, 3.0 * std::f64::consts::PI)];
        let opts = NelderMeadOptions {
            ftol: 1e-14,
            xtol: 1e-10,
            max_iter: 2000,
            initial_fraction: 1e-2,
        };
        let mut best = cells[0].0;
        for &(_, theta, phi) in cells.iter().take(3) {
            let m = minimize(
                |x: &[f64]| -self.coherent_error(x[0], x[1]).unwrap_or(f64::NAN),
                &[theta, phi],
                &bounds,
                &opts,
            );
            best = best.max(-m.value);
        }
        Ok(best)
    }
}

/// Per-state figures of a readout with prepared basis images `prep0`, `prep1`.
fn evaluate(
    ops: &CurrentOperators,
    prep0: &MolecularAmplitude,
    prep1: &MolecularAmplitude,
    with_coherent: bool,
) -> Result<(f64, f64, f64, f64, f64, f64)> {
    let (l0, r0) = integrated_currents(prep0, ops);
    let (l1, r1) = integrated_currents(prep1, ops);
    if l0 + r0 < EMISSION_FLOOR || l1 + r1 < EMISSION_FLOOR {
        return Err(Error::UndefinedChirality);
    }
    let eta0 = chirality(l0, r0)?;
    let eta1 = chirality(l1, r1)?;
    let e0 = l0 / (l0 + r0);
    let e1 = r1 / (l1 + r1);
    let deficit = (1.0 - (l0 + r0) / prep0.norm_sqr())
        .abs()
        .max((1.0 - (l1 + r1) / prep1.norm_sqr()).abs());
    let coherent = if with_coherent {
        ReadoutForms::new(ops, prep0.vector(), prep1.vector()).coherent_max_error()?
    } else {
        f64::NAN
    };
    Ok((eta0, eta1, e0, e1, deficit, coherent))
}

/// Wrong-assignment probability of cos(ϑ/2)|0⟩ + e^{iϕ}sin(ϑ/2)|1⟩: the
/// state is assigned 0 or 1 with Born weights, each read out with its own
/// error.
pub fn assignment_error(e0: f64, e1: f64, theta: f64) -> f64 {
    let c = (theta / 2.0).cos().powi(2);
    c * e0 + (1.0 - c) * e1
}

/// Maximum of [`assignment_error`] over the sphere (attained at a pole).
pub fn bloch_max_error(e0: f64, e1: f64) -> f64 {
    e0.max(e1)
}

fn report(
    ops: &CurrentOperators,
    gates: Vec<GateDescriptor>,
    prep0: &MolecularAmplitude,
    prep1: &MolecularAmplitude,
) -> Result<ProtocolReport> {
    let (eta0, eta1, e0, e1, normalization_deficit, coherent_max_error) = evaluate(ops, prep0, prep1, true)?;
    Ok(ProtocolReport {
        params_used: ops.params,
        gates,
        eta0,
        eta1,
        e0,
        e1,
        bloch_max_error: bloch_max_error(e0, e1),
        coherent_max_error,
        normalization_deficit,
    })
}

/// Protocol 1: U₊ then emission at the perfect-chirality point.
pub fn protocol1_report(j: f64) -> Result<ProtocolReport> {
    let found = find_perfect_chirality(j, DEFAULT_CHIRAL_BOUNDS)?;
    let (delta, phi) = (found.point[0], found.point[1]);
    let angles = derive_u_plus_angles(j, (delta, phi))?;
    protocol1_report_at(j, (delta, phi), &angles)
}

pub fn protocol1_report_at(j: f64, point: (f64, f64), angles: &UPlusAngles) -> Result<ProtocolReport> {
    let p = SystemParams::new(1.0, j, point.0, point.1)?;
    let ops = current_operators(&p, DARK_TOL)?;
    let a = (angles.theta1, angles.theta2, angles.alpha);
    let prep0 = prepare_chiral_state(&LogicalState::zero(), a)?;
    let prep1 = prepare_chiral_state(&LogicalState::one(), a)?;
    let gates = vec![
        GateDescriptor::LogicalRotation { alpha: angles.alpha },
        GateDescriptor::PhaseShift { atom: 1, theta: angles.theta1 },
        GateDescriptor::PhaseShift { atom: 2, theta: angles.theta2 },
    ];
    report(&ops, gates, &prep0, &prep1)
}

fn protocol2_images(theta: f64) -> Result<(MolecularAmplitude, MolecularAmplitude)> {
    let s2 = local_phase_gate(2, theta)?;
    let p0 = s2 * embed_logical(&LogicalState::zero())?.vector();
    let p1 = s2 * embed_logical(&LogicalState::one())?.vector();
    Ok((MolecularAmplitude(p0), MolecularAmplitude(p1)))
}

/// Protocol 2: S₂(θ) then emission at (Δ, φ).
pub fn protocol2_report(j: f64, point: (f64, f64, f64)) -> Result<ProtocolReport> {
    let (delta, phi, theta) = point;
    let p = SystemParams::new(1.0, j, delta, phi)?;
    let ops = current_operators(&p, DARK_TOL)?;
    let (prep0, prep1) = protocol2_images(theta)?;
    report(&ops, vec![GateDescriptor::PhaseShift { atom: 2, theta }], &prep0, &prep1)
}

/// [`bloch_max_error`] of protocol 2 without the coherent maximization.
pub fn protocol2_max_error(j: f64, point: (f64, f64, f64)) -> Result<f64> {
    let (delta, phi, theta) = point;
    let p = SystemParams::new(1.0, j, delta, phi)?;
    let ops = current_operators(&p, DARK_TOL)?;
    let (prep0, prep1) = protocol2_images(theta)?;
    let (_, _, e0, e1, _, _) = evaluate(&ops, &prep0, &prep1, false)?;
    Ok(bloch_max_error(e0, e1))
}

/// Protocol-2 Bloch-sphere error over offsets (δθ, δΔ) at fixed φ.
#[derive(Debug, Clone, Serialize)]
pub struct RobustnessMap {
    pub base: (f64, f64, f64),
    pub dthetas: Vec<f64>,
    pub ddeltas: Vec<f64>,
    /// Row-major, δθ outer and δΔ inner.
    pub values: Vec<Option<f64>>,
}

impl RobustnessMap {
    pub fn get(&self, theta_idx: usize, delta_idx: usize) -> Option<f64> {
        self.values[theta_idx * self.ddeltas.len() + delta_idx]
    }

    pub fn missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

pub fn robustness_map(
    j: f64,
    base: (f64, f64, f64),
    dtheta_grid: &[f64],
    ddelta_grid: &[f64],
) -> Result<RobustnessMap> {
    if dtheta_grid.iter().chain(ddelta_grid).any(|x| !x.is_finite()) {
        return Err(Error::Validation("robustness grids must be finite".into()));
    }
    let points: Vec<(f64, f64)> = dtheta_grid
        .iter()
        .flat_map(|&dt| ddelta_grid.iter().map(move |&dd| (dt, dd)))
        .collect();
    let values = points
        .par_iter()
        .map(|&(dt, dd)| protocol2_max_error(j, (base.0 + dd, base.1, base.2 + dt)).ok())
        .collect();
    Ok(RobustnessMap {
        base,
        dthetas: dtheta_grid.to_vec(),
        ddeltas: ddelta_grid.to_vec(),
        values,
    })
}
