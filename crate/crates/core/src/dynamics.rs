//! Time evolution of the molecular amplitudes and the emitted field.

use crate::error::{Error, Result};
use crate::linalg::{bilinear, cr, Vec3, C64, I};
use crate::model::{MolecularAmplitude, SystemParams};
use crate::spectral::{hamiltonian_matrix, Spectrum};

/// Emission bras ⟨α_L|, ⟨α_R| as rows acting bilinearly on `c`:
/// `√(γ₀/2)(1, e^{±iφ}, 0)`.
pub fn emission_bras(p: &SystemParams) -> (Vec3, Vec3) {
    let s = cr((p.gamma0 / 2.0).sqrt());
    let e = p.phase();
    (
        Vec3::new(s, s * e, C64::ZERO),
        Vec3::new(s, s * e.conj(), C64::ZERO),
    )
}

/// (α_L, α_R) = √(γ₀/2)(c₁ + e^{±iφ}c₂).
pub fn emission_amplitudes(c: &MolecularAmplitude, p: &SystemParams) -> (C64, C64) {
    let (l, r) = emission_bras(p);
    (bilinear(&l, c.vector()), bilinear(&r, c.vector()))
}

/// `c(t) = Σ_r e^{−iε_r t} |ε_r⟩⟨ε′_r|c₀⟩`
pub fn evolve_modal(c0: &MolecularAmplitude, s: &Spectrum, t: f64) -> Result<MolecularAmplitude> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Validation(format!("time must be finite and non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(*c0);
    }
    let v = (0..3).fold(Vec3::zeros(), |acc, r| {
        let weight = bilinear(&s.left[r], c0.vector()) * (-I * s.eigenvalues[r] * t).exp();
        acc + s.right[r] * weight
    });
    Ok(MolecularAmplitude(v))
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MolecularAmplitude>,
    pub alpha_l: Vec<C64>,
    pub alpha_r: Vec<C64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &MolecularAmplitude {
        self.states.last().expect("trajectory has at least one sample")
    }

    /// Trapezoidal ∫|α_L|² dt and ∫|α_R|² dt over the grid.
    pub fn integrated_flux(&self) -> (f64, f64) {
        let l: Vec<f64> = self.alpha_l.iter().map(|a| a.norm_sqr()).collect();
        let r: Vec<f64> = self.alpha_r.iter().map(|a| a.norm_sqr()).collect();
        (trapezoid(&self.times, &l), trapezoid(&self.times, &r))
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Step-halving controls for [`evolve_ode_with`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub tol: f64,
    pub max_depth: u32,
    /// Upper bound on the first grid's step.
    pub max_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_depth: 20,
            max_step: 0.25,
        }
    }
}

/// Integrate `i ċ = H(Δ(t)) c` with the default step-halving controls and the
/// given tolerance.
pub fn evolve_ode<F>(
    c0: &MolecularAmplitude,
    p: &SystemParams,
    delta_of_t: F,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory>
where
    F: Fn(f64) -> f64,
{
    evolve_ode_with(
        c0,
        p,
        delta_of_t,
        t_end,
        &OdeOptions {
            tol,
            ..OdeOptions::default()
        },
    )
}

/// Classical RK4 on a uniform grid, doubling the number of steps until two
/// successive grids agree to `tol` (max norm over the shared sample points).
pub fn evolve_ode_with<F>(
    c0: &MolecularAmplitude,
    p: &SystemParams,
    delta_of_t: F,
    t_end: f64,
    opts: &OdeOptions,
) -> Result<Trajectory>
where
    F: Fn(f64) -> f64,
{
    p.validate()?;
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::Validation(format!("t_end must be finite and non-negative, got {t_end}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Validation("tol must be positive".into()));
    }
    if t_end == 0.0 {
        return Ok(attach_emission(vec![0.0], vec![c0.0], p));
    }

    let mut steps = ((t_end / opts.max_step).ceil() as usize).max(8);
    let mut coarse = rk4_grid(c0.0, p, &delta_of_t, t_end, steps)?;
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_depth {
        steps *= 2;
        let fine = rk4_grid(c0.0, p, &delta_of_t, t_end, steps)?;
        change = coarse
            .iter()
            .zip(fine.iter().step_by(2))
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if change < opts.tol {
            let dt = t_end / steps as f64;
            let times = (0..=steps).map(|k| k as f64 * dt).collect();
            return Ok(attach_emission(times, fine, p));
        }
        coarse = fine;
    }
    Err(Error::Convergence {
        depth: opts.max_depth,
        change,
    })
}

fn attach_emission(times: Vec<f64>, states: Vec<Vec3>, p: &SystemParams) -> Trajectory {
    let (bl, br) = emission_bras(p);
    let alpha_l = states.iter().map(|c| bilinear(&bl, c)).collect();
    let alpha_r = states.iter().map(|c| bilinear(&br, c)).collect();
    Trajectory {
        times,
        states: states.into_iter().map(MolecularAmplitude).collect(),
        alpha_l,
        alpha_r,
    }
}

fn rk4_grid<F>(c0: Vec3, p: &SystemParams, delta_of_t: &F, t_end: f64, steps: usize) -> Result<Vec<Vec3>>
where
    F: Fn(f64) -> f64,
{
    let phase = p.phase();
    let dt = t_end / steps as f64;
    let rhs = |t: f64, c: &Vec3| -> Result<Vec3> {
        let d = delta_of_t(t);
        if !d.is_finite() {
            return Err(Error::Integration(format!("non-finite detuning {d} at t = {t}")));
        }
        Ok(hamiltonian_matrix(p.gamma0, p.j, d, phase) * c * (-I))
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut c = c0;
    out.push(c);
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = rhs(t, &c)?;
        let k2 = rhs(t + 0.5 * dt, &(c + k1 * cr(0.5 * dt)))?;
        let k3 = rhs(t + 0.5 * dt, &(c + k2 * cr(0.5 * dt)))?;
        let k4 = rhs(t + dt, &(c + k3 * cr(dt)))?;
        c += (k1 + k2 * cr(2.0) + k3 * cr(2.0) + k4) * cr(dt / 6.0);
        out.push(c);
    }
    Ok(out)
}

/// |(‖c(0)‖² − ‖c(T)‖²) − ∫₀^T (|α_L|² + |α_R|²) dt| with trapezoidal
/// quadrature on the trajectory grid.
pub fn flux_balance(traj: &Trajectory) -> f64 {
    if traj.is_empty() {
        return 0.0;
    }
    let loss = traj.states[0].norm_sqr() - traj.last().norm_sqr();
    let (l, r) = traj.integrated_flux();
    (loss - (l + r)).abs()
}
