//! Small dense complex linear algebra used across the crate.

use nalgebra::{DMatrix, Matrix2, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use std::f64::consts::PI;

pub type C64 = Complex64;
pub type Vec3 = Vector3<C64>;
pub type Mat3 = Matrix3<C64>;
pub type Mat2 = Matrix2<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Unconjugated bilinear product `aᵀ b`.
#[inline]
pub fn bilinear(a: &Vec3, b: &Vec3) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Unconjugated cross product; `r · (r × y) = 0` holds bilinearly.
#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    Vec3::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

pub fn hermitian_part(m: &Mat3) -> Mat3 {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &Vec3) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Wrap an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Ratio of largest to smallest singular value.
pub fn condition_number(m: &Mat3) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// One generalized eigenpair of a Hermitian pencil.
#[derive(Debug, Clone)]
pub struct PencilPair {
    pub value: f64,
    /// Unit Euclidean norm.
    pub vector: Vec3,
}

/// Generalized eigenpairs of the Hermitian pencil `(a, b)` with `b` positive
/// semidefinite, restricted to the range of `b`.
///
/// Eigenvalues of `b` below `rank_tol · max(eig(b))` are discarded; the
/// remaining directions are whitened and the reduced standard problem is
/// solved. Returns pairs sorted by ascending eigenvalue, or `None` when `b`
/// is numerically zero.
pub fn hermitian_pencil(a: &Mat3, b: &Mat3, rank_tol: f64) -> Option<Vec<PencilPair>> {
    let b = hermitian_part(b);
    let a = hermitian_part(a);
    let eig = SymmetricEigen::new(b);
    let bmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if !(bmax > 0.0) || bmax < 1e-300 {
        return None;
    }
    let keep: Vec<usize> = (0..3)
        .filter(|&k| eig.eigenvalues[k] > rank_tol * bmax)
        .collect();
    let k = keep.len();
    // columns of w: v_k / sqrt(λ_k)
    let mut w = DMatrix::<C64>::zeros(3, k);
    for (col, &idx) in keep.iter().enumerate() {
        let s = 1.0 / eig.eigenvalues[idx].sqrt();
        for row in 0..3 {
            w[(row, col)] = eig.eigenvectors[(row, idx)] * s;
        }
    }
    let a_dyn = DMatrix::from_fn(3, 3, |r, c| a[(r, c)]);
    let reduced = w.adjoint() * &a_dyn * &w;
    let reduced = (&reduced + reduced.adjoint()).scale(0.5);
    let red = SymmetricEigen::new(reduced);
    let mut pairs: Vec<PencilPair> = (0..k)
        .map(|j| {
            let u = red.eigenvectors.column(j);
            let full = &w * u;
            let mut v = Vec3::new(full[0], full[1], full[2]);
            let n = v.norm();
            if n > 0.0 {
                v /= cr(n);
            }
            PencilPair {
                value: red.eigenvalues[j],
                vector: v,
            }
        })
        .collect();
    pairs.sort_by(|x, y| x.value.total_cmp(&y.value));
    Some(pairs)
}

/// Solve `iH†X − iXH = −A` for `X`.
///
/// `X = ∫₀^∞ e^{iH†t} A e^{−iHt} dt` whenever the integral converges. Returns
/// `None` if the 9×9 system is singular.
pub fn lyapunov_integral(h: &Mat3, a: &Mat3) -> Option<Mat3> {
    // column-major vec: vec(PXQ) = (Qᵀ ⊗ P) vec(X)
    let p = h.adjoint() * I;
    let q = h * (-I);
    let mut big = DMatrix::<C64>::zeros(9, 9);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                // I ⊗ P : block (j,j) holds P
                big[(3 * j + i, 3 * j + k)] += p[(i, k)];
                // Qᵀ ⊗ I : block (j,k) holds Q[k,j]·I
                big[(3 * j + i, 3 * k + i)] += q[(k, j)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_fn(9, |idx, _| -a[(idx % 3, idx / 3)]);
    let sol = big.lu().solve(&rhs)?;
    Some(Mat3::from_fn(|r, c| sol[3 * c + r]))
}

/// Pauli matrices on the logical qubit in the index order (|0_L⟩, |1_L⟩),
/// with |1_L⟩ as the "up" state: σ_z = |1⟩⟨1| − |0⟩⟨0|.
pub mod pauli {
    use super::{c, Mat2, C64};

    pub fn identity() -> Mat2 {
        Mat2::identity()
    }

    pub fn z() -> Mat2 {
        Mat2::new(c(-1.0, 0.0), C64::ZERO, C64::ZERO, c(1.0, 0.0))
    }

    pub fn x() -> Mat2 {
        Mat2::new(C64::ZERO, c(1.0, 0.0), c(1.0, 0.0), C64::ZERO)
    }

    /// σ_y = −i|1⟩⟨0| + i|0⟩⟨1|.
    pub fn y() -> Mat2 {
        Mat2::new(C64::ZERO, c(0.0, 1.0), c(0.0, -1.0), C64::ZERO)
    }
}
