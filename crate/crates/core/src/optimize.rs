//! Searches for perfect-chirality operating points, the U₊ preparation angles
//! and the protocol-2 minimal-error point.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

use crate::chirality::{current_operators, max_chirality, CurrentOperators, RANK_TOL};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_pencil, wrap_angle, Vec3, C64};
use crate::model::{LogicalState, MolecularAmplitude, SystemParams};
use crate::readout::{prepare_chiral_state, protocol2_max_error};
use crate::simplex::{minimize, NelderMeadOptions};
use crate::spectral::DARK_TOL;

/// Default (Δ, φ) search box.
pub const DEFAULT_CHIRAL_BOUNDS: [(f64, f64); 2] = [(-0.5, 0.5), (0.0, PI)];

/// Grid points must reach this objective for the search to proceed.
pub const GRID_ACCEPT: f64 = 1e-2;

/// Objective below which a perfect-chirality search counts as converged.
pub const CHIRAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub point: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub point: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
    /// Every refined local minimum, best first.
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone)]
pub struct ChiralSearchOptions {
    pub grid: usize,
    pub max_candidates: usize,
    pub simplex: NelderMeadOptions,
}

impl Default for ChiralSearchOptions {
    fn default() -> Self {
        Self {
            grid: 200,
            max_candidates: 8,
            simplex: NelderMeadOptions {
                ftol: 1e-20,
                xtol: 1e-12,
                max_iter: 4000,
                initial_fraction: 1e-2,
            },
        }
    }
}

/// Smallest eigenvalue of the pencil (Î_L, Î_L + Î_R) on the range of the
/// sum: zero exactly when some radiating state never emits to the left.
pub fn left_kernel_objective(ops: &CurrentOperators) -> Option<f64> {
    let pairs = hermitian_pencil(&ops.i_left, &ops.total(), RANK_TOL)?;
    pairs.first().map(|p| p.value.max(0.0))
}

fn chiral_objective(j: f64, delta: f64, phi: f64) -> f64 {
    SystemParams::new(1.0, j, delta, phi)
        .and_then(|p| current_operators(&p, DARK_TOL))
        .ok()
        .and_then(|ops| left_kernel_objective(&ops))
        .unwrap_or(f64::INFINITY)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn check_bounds(bounds: &[(f64, f64)]) -> Result<()> {
    for &(lo, hi) in bounds {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::Validation(format!("invalid bound [{lo}, {hi}]")));
        }
    }
    Ok(())
}

pub fn find_perfect_chirality(j: f64, bounds: [(f64, f64); 2]) -> Result<SearchResult> {
    find_perfect_chirality_with(j, bounds, &ChiralSearchOptions::default())
}

pub fn find_perfect_chirality_with(
    j: f64,
    bounds: [(f64, f64); 2],
    opts: &ChiralSearchOptions,
) -> Result<SearchResult> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::Validation(format!("J must be positive, got {j}")));
    }
    check_bounds(&bounds)?;
    if opts.grid < 2 {
        return Err(Error::Validation("grid needs at least 2 points per axis".into()));
    }
    let deltas = linspace(bounds[0].0, bounds[0].1, opts.grid);
    let phis = linspace(bounds[1].0, bounds[1].1, opts.grid);
    let n = opts.grid;
    let values: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| chiral_objective(j, deltas[k / n], phis[k % n]))
        .collect();
    let at = |a: usize, b: usize| values[a * n + b];

    let mut minima: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let v = at(a, b);
            if !(v < GRID_ACCEPT) {
                continue;
            }
            let mut is_min = true;
            for da in -1i64..=1 {
                for db in -1i64..=1 {
                    let (x, y) = (a as i64 + da, b as i64 + db);
                    if (da, db) == (0, 0) || x < 0 || y < 0 || x >= n as i64 || y >= n as i64 {
                        continue;
                    }
                    if at(x as usize, y as usize) < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                minima.push((v, a, b));
            }
        }
    }
    minima.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));

    if minima.is_empty() {
        let best = (0..n * n)
            .min_by(|&x, &y| values[x].total_cmp(&values[y]))
            .unwrap_or(0);
        return Err(Error::NotFound(Box::new(SearchResult {
            point: vec![deltas[best / n], phis[best % n]],
            objective: values[best],
            iterations: 0,
            converged: false,
            history: Vec::new(),
            candidates: Vec::new(),
        })));
    }
    minima.truncate(opts.max_candidates);

    let refined: Vec<_> = minima
        .par_iter()
        .map(|&(_, a, b)| {
            minimize(
                |x: &[f64]| chiral_objective(j, x[0], x[1]),
                &[deltas[a], phis[b]],
                &bounds,
                &opts.simplex,
            )
        })
        .collect();

    let mut candidates: Vec<Candidate> = Vec::new();
    for m in &refined {
        let dup = candidates.iter().any(|c| {
            (c.point[0] - m.point[0]).abs() < 1e-6 && (c.point[1] - m.point[1]).abs() < 1e-6
        });
        if !dup {
            candidates.push(Candidate {
                point: m.point.clone(),
                objective: m.value,
            });
        }
    }
    candidates.sort_by(|x, y| x.objective.total_cmp(&y.objective));
    let best = refined
        .iter()
        .min_by(|x, y| x.value.total_cmp(&y.value))
        .expect("at least one refinement");
    Ok(SearchResult {
        point: best.point.clone(),
        objective: best.value,
        iterations: best.iterations,
        converged: best.value < CHIRAL_TOL,
        history: best.history.clone(),
        candidates,
    })
}

/// Angles of S₂(θ₂) S₁(θ₁) R(α) preparing the perfect-chirality state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UPlusAngles {
    pub theta1: f64,
    pub theta2: f64,
    pub alpha: f64,
    /// ||c₁| − |c₂|| of the normalized target.
    pub reach_residual: f64,
    /// ‖Î_L · prepared‖
    pub left_residual: f64,
}

const REACH_TOL: f64 = 1e-6;

/// Angles (θ₁, θ₂, α) with S₂S₁R(α)|0_L⟩ ∝ `target`, smallest |α| among the
/// equivalent branches.
pub fn u_plus_angles_for_state(target: &Vec3) -> Result<(f64, f64, f64, f64)> {
    let norm = target.norm();
    if !(norm > 0.0) {
        return Err(Error::Validation("target state is zero".into()));
    }
    let mut v = target / C64::from(norm);
    let pivot = if v[2].norm() > 1e-12 { v[2] } else { v[0] };
    v *= pivot.conj() / pivot.norm();
    let residual = (v[0].norm() - v[1].norm()).abs();
    if residual > REACH_TOL {
        return Err(Error::Unreachable(residual));
    }
    // R(α)|0_L⟩ = ((c−s)/2, (c−s)/2, −√2(c+s)/2)
    let x = 0.5 * (v[0].norm() + v[1].norm());
    let y = v[2].re;
    let mut best: Option<(f64, f64, f64)> = None;
    for sigma in [1.0, -1.0] {
        for k in [1.0, -1.0] {
            let cos = k * (2.0 * sigma * x - SQRT_2 * y) / 2.0;
            let sin = k * (-SQRT_2 * y - 2.0 * sigma * x) / 2.0;
            let alpha = sin.atan2(cos);
            let shift = if sigma < 0.0 { PI } else { 0.0 };
            let t1 = wrap_angle(v[0].arg() + shift);
            let t2 = wrap_angle(v[1].arg() + shift);
            if best.is_none_or(|b| alpha.abs() < b.2.abs() - 1e-15) {
                best = Some((t1, t2, alpha));
            }
        }
    }
    let (t1, t2, a) = best.expect("four branches");
    Ok((t1, t2, a, residual))
}

pub fn derive_u_plus_angles(j: f64, chiral_point: (f64, f64)) -> Result<UPlusAngles> {
    let p = SystemParams::new(1.0, j, chiral_point.0, chiral_point.1)?;
    let ops = current_operators(&p, DARK_TOL)?;
    let ext = max_chirality(&ops, RANK_TOL)?;
    let (theta1, theta2, alpha, reach_residual) = u_plus_angles_for_state(ext.state_max.vector())?;
    let prepared = prepare_chiral_state(&LogicalState::zero(), (theta1, theta2, alpha))?;
    Ok(UPlusAngles {
        theta1,
        theta2,
        alpha,
        reach_residual,
        left_residual: (ops.i_left * prepared.vector()).norm(),
    })
}

/// Prepared-state fidelity |⟨a|b⟩|²/(‖a‖²‖b‖²).
pub fn state_fidelity(a: &MolecularAmplitude, b: &MolecularAmplitude) -> f64 {
    a.vector().dotc(b.vector()).norm_sqr() / (a.norm_sqr() * b.norm_sqr())
}

/// Minimize the protocol-2 Bloch-sphere error over (Δ, φ, θ).
pub fn optimize_protocol2(j: f64, start: Option<(f64, f64, f64)>) -> Result<SearchResult> {
    let start = match start {
        Some(s) => s,
        None => {
            let chiral = find_perfect_chirality(j, DEFAULT_CHIRAL_BOUNDS)?;
            let (d, phi) = (chiral.point[0], chiral.point[1]);
            (d, phi, PI - phi)
        }
    };
    let x0 = [start.0, start.1, start.2];
    if x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("start point must be finite".into()));
    }
    let bounds = [
        (x0[0] - 1.0, x0[0] + 1.0),
        (x0[1] - PI / 2.0, x0[1] + PI / 2.0),
        (x0[2] - PI, x0[2] + PI),
    ];
    let opts = NelderMeadOptions {
        ftol: 1e-12,
        xtol: 1e-9,
        max_iter: 5000,
        initial_fraction: 1e-2,
    };
    let f = |x: &[f64]| protocol2_max_error(j, (x[0], x[1], x[2])).unwrap_or(f64::INFINITY);
    let m = minimize(f, &x0, &bounds, &opts);
    let result = SearchResult {
        candidates: vec![Candidate {
            point: m.point.clone(),
            objective: m.value,
        }],
        point: m.point,
        objective: m.value,
        iterations: m.iterations,
        converged: m.converged,
        history: m.history,
    };
    if !result.converged || !result.objective.is_finite() {
        return Err(Error::NotFound(Box::new(result)));
    }
    Ok(result)
}
