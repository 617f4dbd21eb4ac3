//! Integrated chiral currents, the chirality functional and its extremal
//! states.
//!
//! The time-integrated left/right emission probabilities are quadratic forms
//! `I_X = c₀† Î_X c₀` of the initial state. With the biorthogonal expansion
//! `c(t) = Σ_s e^{−iε_s t}|ε_s⟩⟨ε′_s|c₀⟩` the time integral is done mode pair by
//! mode pair:
//!
//! `Î_X = Σ_{r,s} ⟨ε′_r|† · conj(a_r) a_s · i/(ε_r* − ε_s) · ⟨ε′_s|`,
//! with `a_r = ⟨α_X|ε_r⟩`.
//!
//! Close to an exceptional point the expansion is ill-conditioned, so
//! [`current_operators`] switches to solving `iH†Î − iÎH = −|α_X⟩⟨α_X|`
//! directly.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::emission_bras;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, hermitian_pencil, lyapunov_integral, Mat3, Vec3, C64, I};
use crate::model::{MolecularAmplitude, SystemParams};
use crate::spectral::{
    build_hamiltonian, exceptional_distance, numeric_spectrum, Spectrum, DARK_TOL, SPECTRUM_TOL,
};

/// Relative rank cut-off for the pencil `(Î_R − Î_L, Î_R + Î_L)`.
pub const RANK_TOL: f64 = 1e-10;

/// |Γ²| below which the Lyapunov route replaces the modal expansion.
pub const EP_SWITCH: f64 = 1e-6;

/// Both currents below this make the chirality undefined.
pub const SILENT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentOperators {
    pub i_left: Mat3,
    pub i_right: Mat3,
    pub params: SystemParams,
    /// Number of eigenmodes that couple to at least one port.
    pub radiating_rank: usize,
}

impl CurrentOperators {
    pub fn total(&self) -> Mat3 {
        self.i_left + self.i_right
    }

    pub fn difference(&self) -> Mat3 {
        self.i_right - self.i_left
    }
}

pub fn build_current_operators(
    s: &Spectrum,
    p: &SystemParams,
    dark_tol: f64,
) -> Result<CurrentOperators> {
    let (bra_l, bra_r) = emission_bras(p);
    let gammas = s.decay_rates();
    let overlaps = |bra: &Vec3| -> [C64; 3] {
        [0, 1, 2].map(|r| crate::linalg::bilinear(bra, &s.right[r]))
    };
    let ov_l = overlaps(&bra_l);
    let ov_r = overlaps(&bra_r);

    let build = |ov: &[C64; 3]| -> Result<Mat3> {
        let mut acc = Mat3::zeros();
        for r in 0..3 {
            for q in 0..3 {
                if gammas[r] + gammas[q] <= dark_tol {
                    let (ar, aq) = (ov[r].norm(), ov[q].norm());
                    if ar <= dark_tol && aq <= dark_tol {
                        continue;
                    }
                    let (mode, overlap) = if ar > aq { (r, ar) } else { (q, aq) };
                    return Err(Error::DivergentCurrent { mode, overlap });
                }
                let weight = ov[r].conj() * ov[q] * I / (s.eigenvalues[r].conj() - s.eigenvalues[q]);
                acc += s.left[r].conjugate() * s.left[q].transpose() * weight;
            }
        }
        Ok(hermitian_part(&acc))
    };

    let i_left = build(&ov_l)?;
    let i_right = build(&ov_r)?;
    let radiating_rank = (0..3)
        .filter(|&r| ov_l[r].norm() + ov_r[r].norm() > dark_tol)
        .count();
    Ok(CurrentOperators {
        i_left,
        i_right,
        params: *p,
        radiating_rank,
    })
}

/// Current operators straight from the parameters: the modal expansion away
/// from exceptional points, the Lyapunov solve next to them.
pub fn current_operators(p: &SystemParams, dark_tol: f64) -> Result<CurrentOperators> {
    let ham = build_hamiltonian(p);
    if exceptional_distance(p).norm() >= EP_SWITCH {
        match numeric_spectrum(&ham, SPECTRUM_TOL) {
            Ok(s) => return build_current_operators(&s, p, dark_tol),
            Err(Error::ExceptionalPoint(..)) => {}
            Err(e) => return Err(e),
        }
    }
    current_operators_lyapunov(p)
}

/// Î_X from `iH†Î − iÎH = −|α_X⟩⟨α_X|`; valid whenever every radiating mode
/// decays.
pub fn current_operators_lyapunov(p: &SystemParams) -> Result<CurrentOperators> {
    let h = build_hamiltonian(p).h;
    let (bra_l, bra_r) = emission_bras(p);
    let solve = |bra: &Vec3| -> Result<Mat3> {
        let a = bra.conjugate() * bra.transpose();
        let x = lyapunov_integral(&h, &a).ok_or_else(|| {
            let ev = analytic_pair(p);
            Error::ExceptionalPoint(ev.0, ev.1)
        })?;
        if x.iter().any(|z| !z.is_finite()) {
            let ev = analytic_pair(p);
            return Err(Error::ExceptionalPoint(ev.0, ev.1));
        }
        Ok(hermitian_part(&x))
    };
    let i_left = solve(&bra_l)?;
    let i_right = solve(&bra_r)?;
    let total = i_left + i_right;
    let eig = nalgebra::SymmetricEigen::new(total);
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let radiating_rank = eig.eigenvalues.iter().filter(|&&x| x > RANK_TOL * max).count();
    Ok(CurrentOperators {
        i_left,
        i_right,
        params: *p,
        radiating_rank,
    })
}

fn analytic_pair(p: &SystemParams) -> (C64, C64) {
    let a = crate::spectral::analytic_spectrum(p);
    (a.plus, a.minus)
}

/// (I_L, I_R) = (c₀†Î_Lc₀, c₀†Î_Rc₀), clamped at zero.
pub fn integrated_currents(c0: &MolecularAmplitude, ops: &CurrentOperators) -> (f64, f64) {
    let q = |m: &Mat3| -> f64 {
        let v = c0.vector();
        let x = v.dotc(&(m * v)).re;
        if x < 0.0 && x > -1e-10 {
            0.0
        } else {
            x
        }
    };
    (q(&ops.i_left), q(&ops.i_right))
}

/// η = (I_R − I_L)/(I_R + I_L)
pub fn chirality(i_left: f64, i_right: f64) -> Result<f64> {
    if i_left.abs() < SILENT_TOL && i_right.abs() < SILENT_TOL {
        return Err(Error::UndefinedChirality);
    }
    let total = i_left + i_right;
    if !(total > 0.0) {
        return Err(Error::UndefinedChirality);
    }
    Ok(((i_right - i_left) / total).clamp(-1.0, 1.0))
}

/// Largest and smallest chirality over radiating initial states.
#[derive(Debug, Clone, Copy)]
pub struct ChiralityExtrema {
    pub eta_max: f64,
    pub state_max: MolecularAmplitude,
    pub eta_min: f64,
    pub state_min: MolecularAmplitude,
}

/// Extremal generalized eigenvalues of `(Î_R − Î_L) c = η (Î_R + Î_L) c` on
/// the range of `Î_R + Î_L`.
pub fn max_chirality(ops: &CurrentOperators, rank_tol: f64) -> Result<ChiralityExtrema> {
    let total = ops.total();
    let scale = total.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale < SILENT_TOL {
        return Err(Error::UndefinedChirality);
    }
    let pairs =
        hermitian_pencil(&ops.difference(), &total, rank_tol).ok_or(Error::UndefinedChirality)?;
    let lo = pairs.first().ok_or(Error::UndefinedChirality)?;
    let hi = pairs.last().ok_or(Error::UndefinedChirality)?;
    Ok(ChiralityExtrema {
        eta_max: hi.value.clamp(-1.0, 1.0),
        state_max: MolecularAmplitude(hi.vector),
        eta_min: lo.value.clamp(-1.0, 1.0),
        state_min: MolecularAmplitude(lo.vector),
    })
}

/// η_max over a (Δ, φ) grid at γ₀ = 1; `None` where chirality is undefined or
/// the operators could not be built.
#[derive(Debug, Clone, Serialize)]
pub struct ChiralityMap {
    pub j: f64,
    pub deltas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Row-major, φ outer and Δ inner.
    pub values: Vec<Option<f64>>,
}

impl ChiralityMap {
    pub fn get(&self, phi_idx: usize, delta_idx: usize) -> Option<f64> {
        self.values[phi_idx * self.deltas.len() + delta_idx]
    }

    pub fn missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

pub fn chirality_at(j: f64, delta: f64, phi: f64) -> Result<ChiralityExtrema> {
    let p = SystemParams::new(1.0, j, delta, phi)?;
    let ops = current_operators(&p, DARK_TOL)?;
    max_chirality(&ops, RANK_TOL)
}

pub fn chirality_map(j: f64, delta_grid: &[f64], phi_grid: &[f64]) -> Result<ChiralityMap> {
    if delta_grid.is_empty() || phi_grid.is_empty() {
        return Err(Error::Validation("chirality map grids must be non-empty".into()));
    }
    if delta_grid.iter().chain(phi_grid).any(|x| !x.is_finite()) || !j.is_finite() {
        return Err(Error::Validation("chirality map inputs must be finite".into()));
    }
    let points: Vec<(f64, f64)> = phi_grid
        .iter()
        .flat_map(|&phi| delta_grid.iter().map(move |&d| (d, phi)))
        .collect();
    let values = points
        .par_iter()
        .map(|&(d, phi)| chirality_at(j, d, phi).ok().map(|x| x.eta_max))
        .collect();
    Ok(ChiralityMap {
        j,
        deltas: delta_grid.to_vec(),
        phis: phi_grid.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::basis;
    use std::f64::consts::PI;

    fn ops(g: f64, j: f64, d: f64, phi: f64) -> CurrentOperators {
        current_operators(&SystemParams::new(g, j, d, phi).unwrap(), DARK_TOL).unwrap()
    }

    #[test]
    fn df_point_currents() {
        let o = ops(1.0, 0.1, 0.0, PI);
        for v in [basis::zero(), basis::one()] {
            let (l, r) = integrated_currents(&MolecularAmplitude(v), &o);
            assert!(l.abs() < 1e-14 && r.abs() < 1e-14);
        }
        let (l, r) = integrated_currents(&MolecularAmplitude(basis::antisymmetric()), &o);
        assert!((l - 0.5).abs() < 1e-12 && (r - 0.5).abs() < 1e-12);
        assert_eq!(o.radiating_rank, 1);
    }

    #[test]
    fn chiral_point_kernel_is_right_emitter() {
        let o = ops(1.0, 0.1, -0.132, 0.088 * PI);
        let eig = nalgebra::SymmetricEigen::new(o.i_left);
        let k = (0..3)
            .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .unwrap();
        assert!(eig.eigenvalues[k] < 1e-3);
        let v = MolecularAmplitude(eig.eigenvectors.column(k).into_owned());
        let (l, r) = integrated_currents(&v, &o);
        assert!(chirality(l, r).unwrap() > 0.99);
    }

    #[test]
    fn chirality_examples() {
        assert_eq!(chirality(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(chirality(0.5, 0.5).unwrap(), 0.0);
        assert!(matches!(chirality(0.0, 1e-15), Err(Error::UndefinedChirality)));
    }

    #[test]
    fn eta_zero_on_symmetric_rows() {
        for phi in [0.0, PI] {
            for d in [-0.3, 0.0, 0.2] {
                let x = max_chirality(&ops(1.0, 0.1, d, phi), RANK_TOL).unwrap();
                assert!(x.eta_max.abs() < 1e-10, "phi={phi} d={d}: {}", x.eta_max);
            }
        }
    }

    #[test]
    fn pencil_spectrum_is_symmetric() {
        let x = max_chirality(&ops(1.0, 0.1, 0.3, 0.5 * PI), RANK_TOL).unwrap();
        assert!((x.eta_max + x.eta_min).abs() < 1e-10);
    }

    #[test]
    fn divergent_current_is_reported() {
        let p = SystemParams::new(1.0, 0.1, 0.0, PI).unwrap();
        let mut s = numeric_spectrum(&build_hamiltonian(&p), SPECTRUM_TOL).unwrap();
        // pretend the antisymmetric (radiating) mode does not decay
        let k = (0..3).find(|&r| s.eigenvalues[r].im < -0.5).unwrap();
        s.eigenvalues[k] = C64::new(s.eigenvalues[k].re, 0.0);
        let r = build_current_operators(&s, &p, DARK_TOL);
        assert!(matches!(r, Err(Error::DivergentCurrent { .. })), "{r:?}");
    }

    #[test]
    fn lyapunov_and_modal_agree() {
        let p = SystemParams::new(1.0, 0.1, 0.3, 0.5 * PI).unwrap();
        let s = numeric_spectrum(&build_hamiltonian(&p), SPECTRUM_TOL).unwrap();
        let a = build_current_operators(&s, &p, DARK_TOL).unwrap();
        let b = current_operators_lyapunov(&p).unwrap();
        assert!((a.i_left - b.i_left).norm() < 1e-10);
        assert!((a.i_right - b.i_right).norm() < 1e-10);
    }

    #[test]
    fn map_layout() {
        let m = chirality_map(0.1, &[-0.1, 0.0, 0.1], &[0.3, PI]).unwrap();
        assert_eq!(m.values.len(), 6);
        for d in 0..3 {
            assert!(m.get(1, d).is_none_or(|x| x.abs() < 1e-10));
        }
        assert!(chirality_map(0.1, &[], &[0.0]).is_err());
    }
}
