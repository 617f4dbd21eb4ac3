//! Effective non-Hermitian Hamiltonian and its biorthogonal spectral
//! decomposition.
//!
//! The Hamiltonian is complex symmetric (`H = Hᵀ`), so left eigenvectors are
//! the unconjugated transposes of the right ones once the right vectors are
//! normalized under the bilinear form `vᵀv = 1`. Eigenvalues come from the
//! closed-form cubic, polished and paired with eigenvectors obtained from
//! cross products of the rows of `H − λ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{bilinear, condition_number, cr, cross, max_abs_vec, Mat3, Vec3, C64, I};
use crate::model::SystemParams;

/// Default threshold on γ_r below which a mode counts as dark.
pub const DARK_TOL: f64 = 1e-9;

/// Default tolerance for [`numeric_spectrum`].
pub const SPECTRUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveHamiltonian {
    pub h: Mat3,
    pub params: SystemParams,
}

pub fn build_hamiltonian(p: &SystemParams) -> EffectiveHamiltonian {
    EffectiveHamiltonian {
        h: hamiltonian_matrix(p.gamma0, p.j, p.delta, p.phase()),
        params: *p,
    }
}

pub(crate) fn hamiltonian_matrix(gamma0: f64, j: f64, delta: f64, phase: C64) -> Mat3 {
    let d = C64::new(0.0, -0.5 * gamma0);
    let off = C64::new(0.0, -0.5 * gamma0) * phase;
    let j = cr(j);
    Mat3::new(d, off, j, off, d, j, j, j, cr(delta))
}

/// Which closed-form branch an eigenvalue belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeLabel {
    /// ε₀, the mode on the antisymmetric vector (1, −1, 0)/√2.
    Zero,
    Plus,
    Minus,
}

/// Closed-form eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEigenvalues {
    pub zero: C64,
    pub plus: C64,
    pub minus: C64,
}

impl AnalyticEigenvalues {
    pub fn as_array(&self) -> [(ModeLabel, C64); 3] {
        [
            (ModeLabel::Zero, self.zero),
            (ModeLabel::Plus, self.plus),
            (ModeLabel::Minus, self.minus),
        ]
    }
}

/// Γ²; its modulus measures the distance to the ε₊ = ε₋ exceptional point.
pub fn exceptional_distance(p: &SystemParams) -> C64 {
    let one_plus = cr(1.0) + p.phase();
    let g = cr(p.gamma0) * one_plus;
    cr(4.0 * (p.delta * p.delta + 8.0 * p.j * p.j)) - g * (g - I * (4.0 * p.delta))
}

pub fn analytic_spectrum(p: &SystemParams) -> AnalyticEigenvalues {
    let e = p.phase();
    let zero = I * 0.5 * (e - 1.0) * p.gamma0;
    // principal square root: branch cut on the negative real axis
    let gamma = exceptional_distance(p).sqrt();
    let base = cr(2.0 * p.delta) - I * (cr(1.0) + e) * p.gamma0;
    AnalyticEigenvalues {
        zero,
        plus: (base + gamma) * 0.25,
        minus: (base - gamma) * 0.25,
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: [C64; 3],
    /// Right eigenvectors, `vᵀv = 1`.
    pub right: [Vec3; 3],
    /// Left eigenvectors stored as column vectors: row `r` is `left[r]ᵀ`.
    pub left: [Vec3; 3],
    /// Closed-form branch of each eigenvalue, when it could be matched.
    pub labels: [Option<ModeLabel>; 3],
    /// Singular-value ratio of the right-eigenvector matrix.
    pub condition: f64,
}

impl Spectrum {
    /// γ_r = −Im ε_r
    pub fn decay_rates(&self) -> [f64; 3] {
        self.eigenvalues.map(|e| -e.im)
    }

    pub fn min_decay_rate(&self) -> f64 {
        self.decay_rates().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// max_{r,s} |⟨ε′_r|ε_s⟩ − δ_rs|
    pub fn biorthogonality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..3 {
            for s in 0..3 {
                let target = if r == s { 1.0 } else { 0.0 };
                let d = (bilinear(&self.left[r], &self.right[s]) - cr(target)).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Σ_r ε_r |ε_r⟩⟨ε′_r|
    pub fn reconstruct(&self) -> Mat3 {
        (0..3).fold(Mat3::zeros(), |acc, r| {
            acc + self.right[r] * self.left[r].transpose() * self.eigenvalues[r]
        })
    }

    pub fn index_of(&self, label: ModeLabel) -> Option<usize> {
        self.labels.iter().position(|l| *l == Some(label))
    }
}

/// Characteristic-polynomial coefficients (a2, a1, a0) of
/// λ³ + a2 λ² + a1 λ + a0.
fn char_poly(h: &Mat3) -> (C64, C64, C64) {
    let tr = h.trace();
    let minors = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)]
        + h[(0, 0)] * h[(2, 2)]
        - h[(0, 2)] * h[(2, 0)]
        + h[(1, 1)] * h[(2, 2)]
        - h[(1, 2)] * h[(2, 1)];
    (-tr, minors, -h.determinant())
}

fn poly(a: (C64, C64, C64), x: C64) -> C64 {
    ((x + a.0) * x + a.1) * x + a.2
}

fn poly_deriv(a: (C64, C64, C64), x: C64) -> C64 {
    (x * 3.0 + a.0 * 2.0) * x + a.1
}

/// Cardano roots with the cube-root branch chosen by matching the trace and
/// determinant, then Newton-polished.
fn cubic_roots(h: &Mat3) -> [C64; 3] {
    let a = char_poly(h);
    let (a2, a1, a0) = a;
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = a2 * a2 * a2 * (2.0 / 27.0) - a2 * a1 / 3.0 + a0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);

    let candidate = |sign: f64| -> Option<[C64; 3]> {
        let u3 = -q / 2.0 + disc * sign;
        if u3.norm() == 0.0 {
            return None;
        }
        let u = u3.powf(1.0 / 3.0);
        let mut roots = [C64::ZERO; 3];
        let mut w = cr(1.0);
        for r in roots.iter_mut() {
            let uk = u * w;
            *r = uk - p / (uk * 3.0) - shift;
            w *= omega;
        }
        Some(roots)
    };

    let tr = h.trace();
    let det = h.determinant();
    let mismatch = |r: &[C64; 3]| (r[0] + r[1] + r[2] - tr).norm() + (r[0] * r[1] * r[2] - det).norm();
    let mut roots = match (candidate(1.0), candidate(-1.0)) {
        (Some(x), Some(y)) => {
            if mismatch(&x) <= mismatch(&y) {
                x
            } else {
                y
            }
        }
        (Some(x), None) | (None, Some(x)) => x,
        // p = q = 0: triple root
        (None, None) => [-shift; 3],
    };

    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = poly_deriv(a, *r);
            if d.norm() == 0.0 {
                break;
            }
            let next = *r - poly(a, *r) / d;
            if next.is_finite() && poly(a, next).norm() < poly(a, *r).norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    roots
}

fn scale_of(h: &Mat3) -> f64 {
    h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300)
}

/// Null vector of `h − λ` from the largest cross product of row pairs, with
/// the relative size of that cross product (≈ 0 when the rank is ≤ 1).
fn null_vector(h: &Mat3, lambda: C64) -> (Vec3, f64) {
    let m = h - Mat3::identity() * lambda;
    let rows: [Vec3; 3] = [0, 1, 2].map(|i| m.row(i).transpose());
    let mut best = (Vec3::zeros(), 0.0);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let v = cross(&rows[i], &rows[j]);
        let n = v.norm();
        if n > best.1 {
            best = (v, n);
        }
    }
    let mscale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rel = if mscale > 0.0 { best.1 / (mscale * mscale) } else { 0.0 };
    (best.0, rel)
}

fn residual(h: &Mat3, v: &Vec3, lambda: C64) -> f64 {
    let n = v.norm();
    if n == 0.0 {
        return f64::INFINITY;
    }
    (h * v - v * lambda).norm() / n
}

/// One inverse-iteration step and a bilinear Rayleigh-quotient update.
fn refine(h: &Mat3, v: Vec3, lambda: C64) -> (Vec3, C64) {
    let mut best = (v, lambda, residual(h, &v, lambda));
    let shifted = h - Mat3::identity() * lambda;
    if let Some(w) = shifted.lu().solve(&v) {
        let n = w.norm();
        if n.is_finite() && n > 0.0 {
            let w = w / cr(n);
            let r = residual(h, &w, lambda);
            if r < best.2 {
                best = (w, lambda, r);
            }
        }
    }
    let v = best.0;
    let vv = bilinear(&v, &v);
    if vv.norm() > 1e-6 * v.norm_squared() {
        let rq = bilinear(&v, &(h * v)) / vv;
        if residual(h, &v, rq) < best.2 {
            best.1 = rq;
        }
    }
    (best.0, best.1)
}

/// Orthonormal (bilinear) basis of a two-dimensional eigenspace of a
/// rank-one `h − λ`.
fn degenerate_basis(h: &Mat3, lambda: C64) -> Option<[Vec3; 2]> {
    let m = h - Mat3::identity() * lambda;
    let r = (0..3)
        .map(|i| m.row(i).transpose())
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    let units = [Vec3::x(), Vec3::y(), Vec3::z()];
    let mut candidates: Vec<Vec3> = if r.norm() == 0.0 {
        units.to_vec()
    } else {
        units.iter().map(|e| cross(&r, e)).collect()
    };
    if r.norm() > 0.0 {
        let extra: Vec<Vec3> = candidates.iter().map(|x| cross(&r, x)).collect();
        candidates.extend(extra);
    }
    candidates.retain(|x| x.norm() > 1e-12 * (1.0 + r.norm()));
    // bilinear Gram–Schmidt, skipping isotropic directions
    for a in 0..candidates.len() {
        let x1 = candidates[a];
        let n1 = bilinear(&x1, &x1);
        if n1.norm() < 1e-8 * x1.norm_squared() {
            continue;
        }
        let x1 = x1 / n1.sqrt();
        for x in candidates.iter().skip(a + 1) {
            let x2 = x - x1 * bilinear(&x1, x);
            let n2 = bilinear(&x2, &x2);
            if x2.norm() > 1e-8 * x.norm() && n2.norm() > 1e-8 * x2.norm_squared() {
                return Some([x1, x2 / n2.sqrt()]);
            }
        }
    }
    None
}

fn fix_sign(v: Vec3) -> Vec3 {
    // first component of (near-)maximal magnitude
    let top = max_abs_vec(&v);
    let k = (0..3).find(|&a| v[a].norm() >= top * (1.0 - 1e-12)).unwrap_or(0);
    if v[k].re < 0.0 {
        -v
    } else {
        v
    }
}

fn closest_pair(vals: &[C64; 3], r: usize) -> (C64, C64) {
    let other = (0..3)
        .filter(|&s| s != r)
        .min_by(|&a, &b| (vals[a] - vals[r]).norm().total_cmp(&(vals[b] - vals[r]).norm()))
        .unwrap();
    (vals[r], vals[other])
}

/// Complex-Schur eigenvalues, used when refinement of the cubic stalls.
fn schur_eigenvalues(h: &Mat3) -> [C64; 3] {
    let t = h.schur().unpack().1;
    [t[(0, 0)], t[(1, 1)], t[(2, 2)]]
}

fn simple_vector(h: &Mat3, lambda: C64, scale: f64) -> (Vec3, C64) {
    let (v, _) = null_vector(h, lambda);
    let (mut v, mut lam) = refine(h, v, lambda);
    if residual(h, &v, lam) > 1e-10 * scale {
        let nearest = schur_eigenvalues(h)
            .into_iter()
            .min_by(|a, b| (*a - lambda).norm().total_cmp(&(*b - lambda).norm()))
            .unwrap();
        let (w, _) = null_vector(h, nearest);
        let (w, l2) = refine(h, w, nearest);
        if residual(h, &w, l2) < residual(h, &v, lam) {
            v = w;
            lam = l2;
        }
    }
    (v, lam)
}

pub fn numeric_spectrum(ham: &EffectiveHamiltonian, tol: f64) -> Result<Spectrum> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tol must be positive, got {tol}")));
    }
    let h = &ham.h;
    let scale = scale_of(h);
    let mut vals = cubic_roots(h);
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    // roots split by ~√ε·scale at a defective point
    let cluster_tol = 1e-6 * scale;
    let mut vecs: [Vec3; 3] = [Vec3::zeros(); 3];
    let mut done = [false; 3];
    for r in 0..3 {
        if done[r] {
            continue;
        }
        let partners: Vec<usize> = (r + 1..3)
            .filter(|&s| (vals[s] - vals[r]).norm() < cluster_tol)
            .collect();
        match partners.len() {
            0 => {
                let (v, lam) = simple_vector(h, vals[r], scale);
                vals[r] = lam;
                vecs[r] = v;
                done[r] = true;
            }
            1 => {
                let s = partners[0];
                let mean = (vals[r] + vals[s]) * 0.5;
                let (_, rank2) = null_vector(h, mean);
                if rank2 > 1e-7 {
                    // close but separate roots: an exceptional point if the
                    // two vectors have (numerically) merged
                    let (v, a) = simple_vector(h, vals[r], scale);
                    let (w, b) = simple_vector(h, vals[s], scale);
                    let overlap = v.dotc(&w).norm() / (v.norm() * w.norm());
                    if !(overlap < 1.0 - 1e-6) {
                        return Err(Error::ExceptionalPoint(vals[r], vals[s]));
                    }
                    vals[r] = a;
                    vals[s] = b;
                    vecs[r] = v;
                    vecs[s] = w;
                    done[r] = true;
                    done[s] = true;
                    continue;
                }
                let basis =
                    degenerate_basis(h, mean).ok_or(Error::ExceptionalPoint(vals[r], vals[s]))?;
                vals[r] = mean;
                vals[s] = mean;
                vecs[r] = basis[0];
                vecs[s] = basis[1];
                done[r] = true;
                done[s] = true;
            }
            _ => {
                let mean = (vals[0] + vals[1] + vals[2]) / 3.0;
                let m = h - Mat3::identity() * mean;
                if m.iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-7 * scale {
                    return Err(Error::ExceptionalPoint(vals[0], vals[1]));
                }
                vals = [mean; 3];
                vecs = [Vec3::x(), Vec3::y(), Vec3::z()];
                done = [true; 3];
            }
        }
    }

    for r in 0..3 {
        let v = vecs[r];
        let vv = bilinear(&v, &v);
        if vv.norm() < tol * v.norm_squared() {
            return Err(Error::ExceptionalPoint(vals[r], closest_pair(&vals, r).1));
        }
        vecs[r] = fix_sign(v / vv.sqrt());
    }

    let vmat = Mat3::from_columns(&vecs);
    let condition = condition_number(&vmat);
    if !(condition <= 1.0 / tol) {
        let (a, b) = (0..3)
            .map(|r| closest_pair(&vals, r))
            .min_by(|x, y| (x.0 - x.1).norm().total_cmp(&(y.0 - y.1).norm()))
            .unwrap();
        return Err(Error::ExceptionalPoint(a, b));
    }

    if *h == h.adjoint() {
        vals.iter_mut().for_each(|e| e.im = 0.0);
    }

    let labels = attach_labels(&vals, &analytic_spectrum(&ham.params), scale);
    Ok(Spectrum {
        eigenvalues: vals,
        right: vecs,
        left: vecs,
        labels,
        condition,
    })
}

/// Match numeric eigenvalues to the closed-form branches (best permutation).
fn attach_labels(vals: &[C64; 3], analytic: &AnalyticEigenvalues, scale: f64) -> [Option<ModeLabel>; 3] {
    let a = analytic.as_array();
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best: Option<([usize; 3], f64)> = None;
    for perm in PERMS {
        let worst = (0..3)
            .map(|r| (vals[r] - a[perm[r]].1).norm())
            .fold(0.0, f64::max);
        if best.is_none_or(|(_, w)| worst < w) {
            best = Some((perm, worst));
        }
    }
    let (perm, worst) = best.unwrap();
    if worst < 1e-6 * scale.max(1.0) {
        [0, 1, 2].map(|r| Some(a[perm[r]].0))
    } else {
        [None; 3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeInfo {
    pub omega: f64,
    pub gamma: f64,
    pub is_dark: bool,
    pub label: Option<ModeLabel>,
}

pub fn classify_modes(s: &Spectrum, dark_tol: f64) -> [ModeInfo; 3] {
    [0, 1, 2].map(|r| {
        let e = s.eigenvalues[r];
        ModeInfo {
            omega: e.re,
            gamma: -e.im,
            is_dark: -e.im < dark_tol,
            label: s.labels[r],
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::basis;
    use std::f64::consts::{PI, SQRT_2};

    fn params(g: f64, j: f64, d: f64, phi: f64) -> SystemParams {
        SystemParams::new(g, j, d, phi).unwrap()
    }

    #[test]
    fn hamiltonian_at_phi_pi() {
        let h = build_hamiltonian(&params(1.0, 0.1, 0.0, PI)).h;
        let expect = Mat3::new(
            C64::new(0.0, -0.5),
            C64::new(0.0, 0.5),
            cr(0.1),
            C64::new(0.0, 0.5),
            C64::new(0.0, -0.5),
            cr(0.1),
            cr(0.1),
            cr(0.1),
            C64::ZERO,
        );
        assert!((h - expect).norm() < 1e-15);
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn hamiltonian_trivial_limits() {
        assert_eq!(build_hamiltonian(&params(0.0, 0.0, 0.0, 0.0)).h, Mat3::zeros());
        let h = build_hamiltonian(&params(0.0, 0.3, 0.2, 1.234)).h;
        assert!((h - h.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn analytic_df_point() {
        let a = analytic_spectrum(&params(1.0, 0.1, 0.0, PI));
        assert!((a.zero - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((a.plus - cr(SQRT_2 * 0.1)).norm() < 1e-15);
        assert!((a.minus - cr(-SQRT_2 * 0.1)).norm() < 1e-15);
    }

    #[test]
    fn analytic_block_diagonal_limit() {
        let a = analytic_spectrum(&params(1.0, 0.0, 0.5, PI));
        let mut got = [a.zero, a.plus, a.minus];
        got.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let want = [C64::new(0.0, -1.0), C64::ZERO, cr(0.5)];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() < 1e-15, "{g} vs {w}");
        }
    }

    #[test]
    fn gamma_squared_examples() {
        let g = exceptional_distance(&params(1.0, 0.3, 0.0, PI));
        assert!((g - cr(32.0 * 0.09)).norm() < 1e-14);
        let g = exceptional_distance(&params(1.0, 0.0, 0.0, 0.0));
        assert!((g - cr(-4.0)).norm() < 1e-14);
    }

    #[test]
    fn numeric_df_point() {
        let p = params(1.0, 0.1, 0.0, PI);
        let s = numeric_spectrum(&build_hamiltonian(&p), SPECTRUM_TOL).unwrap();
        let expect = [cr(-SQRT_2 * 0.1), C64::new(0.0, -1.0), cr(SQRT_2 * 0.1)];
        for (e, w) in s.eigenvalues.iter().zip(expect) {
            assert!((e - w).norm() < 1e-12, "{e} vs {w}");
        }
        // ε₋ ↔ |0_L⟩ (sign fixed by the −√2/2 entry), ε₊ ↔ |1_L⟩, ε₀ ↔ antisymmetric
        assert!((s.right[0] + basis::zero()).norm() < 1e-12);
        assert!((s.right[2] - basis::one()).norm() < 1e-12);
        assert!((s.right[1] - basis::antisymmetric()).norm() < 1e-12);
        assert_eq!(s.labels, [Some(ModeLabel::Minus), Some(ModeLabel::Zero), Some(ModeLabel::Plus)]);
    }

    #[test]
    fn hermitian_limit_real_vectors() {
        let p = params(0.0, 0.3, 0.2, 0.7);
        let s = numeric_spectrum(&build_hamiltonian(&p), SPECTRUM_TOL).unwrap();
        for e in s.eigenvalues {
            assert!(e.im.abs() < 1e-12);
        }
        // real symmetric block: vectors real up to sign, so left = conj(right)
        let h = build_hamiltonian(&p).h;
        let herm = nalgebra::SymmetricEigen::new(h);
        let mut hv: Vec<f64> = herm.eigenvalues.iter().cloned().collect();
        hv.sort_by(f64::total_cmp);
        for (a, b) in s.eigenvalues.iter().zip(hv) {
            assert!((a.re - b).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_df_and_phi_zero() {
        let s = numeric_spectrum(&build_hamiltonian(&params(1.0, 0.1, 0.0, PI)), SPECTRUM_TOL).unwrap();
        let modes = classify_modes(&s, DARK_TOL);
        assert_eq!(modes.iter().filter(|m| m.is_dark).count(), 2);
        assert!(modes.iter().any(|m| (m.gamma - 1.0).abs() < 1e-12));

        let s = numeric_spectrum(&build_hamiltonian(&params(1.0, 0.1, 0.0, 0.0)), SPECTRUM_TOL).unwrap();
        let modes = classify_modes(&s, DARK_TOL);
        let dark: Vec<usize> = (0..3).filter(|&r| modes[r].is_dark).collect();
        assert_eq!(dark.len(), 1);
        assert!(s.eigenvalues[dark[0]].norm() < 1e-12);
        let v = s.right[dark[0]];
        assert!((v - basis::antisymmetric()).norm() < 1e-12 || (v + basis::antisymmetric()).norm() < 1e-12);

        let s = numeric_spectrum(&build_hamiltonian(&params(1.0, 0.1, 0.2, 0.3 * PI)), SPECTRUM_TOL).unwrap();
        assert!(classify_modes(&s, 1e-6).iter().all(|m| !m.is_dark));
    }

    #[test]
    fn degenerate_but_diagonalizable() {
        // J = 0, Δ = 0, φ = π: eigenvalue 0 twice (e3 and symmetric pair)
        let s = numeric_spectrum(&build_hamiltonian(&params(1.0, 0.0, 0.0, PI)), SPECTRUM_TOL).unwrap();
        assert!(s.biorthogonality_residual() < 1e-10);
        assert!((s.reconstruct() - build_hamiltonian(&params(1.0, 0.0, 0.0, PI)).h).norm() < 1e-10);
        let zero = numeric_spectrum(&build_hamiltonian(&params(0.0, 0.0, 0.0, 0.0)), SPECTRUM_TOL).unwrap();
        assert!(zero.eigenvalues.iter().all(|e| e.norm() == 0.0));
    }

    #[test]
    fn exceptional_point_is_reported() {
        // Γ² = 0 at φ = 0, Δ = 0 requires 32J² = 4 ⇒ J = 1/√8
        let p = params(1.0, 1.0 / 8f64.sqrt(), 0.0, 0.0);
        assert!(exceptional_distance(&p).norm() < 1e-14);
        let r = numeric_spectrum(&build_hamiltonian(&p), SPECTRUM_TOL);
        assert!(matches!(r, Err(Error::ExceptionalPoint(_, _))), "{r:?}");
    }

    #[test]
    fn rejects_bad_tol() {
        let h = build_hamiltonian(&params(1.0, 0.1, 0.0, PI));
        assert!(numeric_spectrum(&h, 0.0).is_err());
    }
}
