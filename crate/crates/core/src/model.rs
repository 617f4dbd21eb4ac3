//! Parameter records and state representations.
//!
//! Conventions: ħ = 1, frequencies in units of the waveguide decay rate γ₀,
//! times in 1/γ₀. The photon phase φ is stored unwrapped; every function
//! that consumes it only uses `e^{iφ}`.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{cr, Vec3, C64};

/// Physical parameters of the molecule–waveguide system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Waveguide-induced decay rate γ₀.
    pub gamma0: f64,
    /// Intramolecular coupling between atom 3 and atoms 1, 2.
    pub j: f64,
    /// Detuning of atom 3.
    pub delta: f64,
    /// Photon phase accumulated between the two coupling points (radians).
    pub phi: f64,
}

impl SystemParams {
    pub fn new(gamma0: f64, j: f64, delta: f64, phi: f64) -> Result<Self> {
        let p = Self {
            gamma0,
            j,
            delta,
            phi,
        };
        p.validate()?;
        Ok(p)
    }

    /// Decoherence-free point: Δ = 0, φ = π, γ₀ = 1.
    pub fn df_point(j: f64) -> Self {
        Self {
            gamma0: 1.0,
            j,
            delta: 0.0,
            phi: std::f64::consts::PI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma0", self.gamma0),
            ("j", self.j),
            ("delta", self.delta),
            ("phi", self.phi),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        if self.gamma0 < 0.0 {
            return Err(Error::Validation(format!(
                "gamma0 must be non-negative, got {}",
                self.gamma0
            )));
        }
        Ok(())
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    pub fn with_phi(self, phi: f64) -> Self {
        Self { phi, ..self }
    }

    /// `e^{iφ}`
    pub fn phase(&self) -> C64 {
        C64::from_polar(1.0, self.phi)
    }
}

/// Amplitudes (c₁, c₂, c₃) on the singly-excited atomic states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MolecularAmplitude(pub Vec3);

impl MolecularAmplitude {
    pub fn new(c1: C64, c2: C64, c3: C64) -> Self {
        Self(Vec3::new(c1, c2, c3))
    }

    pub fn from_real(c1: f64, c2: f64, c3: f64) -> Self {
        Self::new(cr(c1), cr(c2), cr(c3))
    }

    /// Localized excitation on atom `n` (1-based).
    pub fn excited(n: usize) -> Self {
        let mut v = Vec3::zeros();
        v[n - 1] = cr(1.0);
        Self(v)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn vector(&self) -> &Vec3 {
        &self.0
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self(self.0 / cr(n))
    }
}

impl From<Vec3> for MolecularAmplitude {
    fn from(v: Vec3) -> Self {
        Self(v)
    }
}

/// Amplitudes on the logical basis |0_L⟩, |1_L⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalState {
    pub a0: C64,
    pub a1: C64,
}

impl LogicalState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(a0: C64, a1: C64) -> Self {
        Self { a0, a1 }
    }

    pub fn zero() -> Self {
        Self::new(cr(1.0), C64::ZERO)
    }

    pub fn one() -> Self {
        Self::new(C64::ZERO, cr(1.0))
    }

    /// `cos(ϑ/2)|0_L⟩ + e^{iϕ} sin(ϑ/2)|1_L⟩`
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        Self::new(
            cr((theta / 2.0).cos()),
            C64::from_polar((theta / 2.0).sin(), phi),
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self::new(self.a0 / n, self.a1 / n)
    }

    pub fn inner(&self, other: &LogicalState) -> C64 {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    /// Trace distance between the pure states (normalization applied).
    pub fn trace_distance(&self, other: &LogicalState) -> f64 {
        let ov = self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr());
        (1.0 - ov).max(0.0).sqrt()
    }
}

/// Monochromatic modulation Δ(t) = Δ₀ cos(ω_d t + ϕ) applied for `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub amplitude: f64,
    pub drive_frequency: f64,
    pub drive_phase: f64,
    pub duration: f64,
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::Validation(format!(
                "drive duration must be finite and non-negative, got {}",
                self.duration
            )));
        }
        if !self.amplitude.is_finite()
            || !self.drive_frequency.is_finite()
            || !self.drive_phase.is_finite()
        {
            return Err(Error::Validation("drive parameters must be finite".into()));
        }
        Ok(())
    }

    /// Instantaneous detuning at time `t`.
    pub fn detuning(&self, t: f64) -> f64 {
        self.amplitude * (self.drive_frequency * t + self.drive_phase).cos()
    }
}

/// Molecular images of the logical basis and the antisymmetric complement.
pub mod basis {
    use super::*;

    const HALF: f64 = 0.5;

    /// |0_L⟩ = (1, 1, −√2)/2
    pub fn zero() -> Vec3 {
        Vec3::new(cr(HALF), cr(HALF), cr(-FRAC_1_SQRT_2))
    }

    /// |1_L⟩ = (1, 1, +√2)/2
    pub fn one() -> Vec3 {
        Vec3::new(cr(HALF), cr(HALF), cr(FRAC_1_SQRT_2))
    }

    /// (1, −1, 0)/√2, the superradiant/antisymmetric mode.
    pub fn antisymmetric() -> Vec3 {
        Vec3::new(cr(FRAC_1_SQRT_2), cr(-FRAC_1_SQRT_2), C64::ZERO)
    }
}

pub fn embed_logical(l: &LogicalState) -> Result<MolecularAmplitude> {
    let n = l.norm_sqr();
    if (n - 1.0).abs() > LogicalState::NORM_TOL {
        return Err(Error::Validation(format!(
            "logical state not normalized: |a0|²+|a1|² = {n}"
        )));
    }
    Ok(MolecularAmplitude(
        basis::zero() * l.a0 + basis::one() * l.a1,
    ))
}

/// Components along the logical basis plus the norm of what is left over on
/// the antisymmetric complement.
pub fn project_logical(c: &MolecularAmplitude) -> (LogicalState, f64) {
    let v = c.vector();
    let a0 = basis::zero().dotc(v);
    let a1 = basis::one().dotc(v);
    let residual = basis::antisymmetric().dotc(v).norm();
    (LogicalState::new(a0, a1), residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn embed_zero_state() {
        let c = embed_logical(&LogicalState::zero()).unwrap();
        assert!(close(
            c.vector(),
            &Vec3::new(cr(0.5), cr(0.5), cr(-SQRT_2 / 2.0)),
            1e-15
        ));
    }

    #[test]
    fn embed_minus_state_is_atom_three() {
        let l = LogicalState::new(cr(-FRAC_1_SQRT_2), cr(FRAC_1_SQRT_2));
        let c = embed_logical(&l).unwrap();
        assert!(close(c.vector(), MolecularAmplitude::excited(3).vector(), 1e-15));
    }

    #[test]
    fn embed_plus_state_cancels_atom_three() {
        let l = LogicalState::new(cr(FRAC_1_SQRT_2), cr(FRAC_1_SQRT_2));
        let c = embed_logical(&l).unwrap();
        assert!(close(
            c.vector(),
            &Vec3::new(cr(FRAC_1_SQRT_2), cr(FRAC_1_SQRT_2), C64::ZERO),
            1e-15
        ));
    }

    #[test]
    fn embed_rejects_unnormalized() {
        let l = LogicalState::new(cr(1.0), cr(0.1));
        assert!(matches!(embed_logical(&l), Err(Error::Validation(_))));
    }

    #[test]
    fn project_examples() {
        let (l, r) = project_logical(&MolecularAmplitude(basis::zero()));
        assert!((l.a0 - cr(1.0)).norm() < 1e-15 && l.a1.norm() < 1e-15 && r < 1e-15);

        let (l, r) = project_logical(&MolecularAmplitude(basis::antisymmetric()));
        assert!(l.a0.norm() < 1e-15 && l.a1.norm() < 1e-15);
        assert!((r - 1.0).abs() < 1e-15);

        // (1,0,0): ⟨0_L|e1⟩ = ⟨1_L|e1⟩ = 1/2, residual 1/√2
        let (l, r) = project_logical(&MolecularAmplitude::excited(1));
        assert!((l.a0 - cr(0.5)).norm() < 1e-15);
        assert!((l.a1 - cr(0.5)).norm() < 1e-15);
        assert!((r - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn basis_orthonormal() {
        let vs = [basis::zero(), basis::one(), basis::antisymmetric()];
        for (i, a) in vs.iter().enumerate() {
            for (j, b) in vs.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((a.dotc(b) - cr(expect)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(1.0, 0.1, 0.0, PI).is_ok());
        assert!(SystemParams::new(-1.0, 0.1, 0.0, PI).is_err());
        assert!(SystemParams::new(1.0, f64::NAN, 0.0, PI).is_err());
        assert!(SystemParams::new(1.0, 0.1, f64::INFINITY, PI).is_err());
    }

    #[test]
    fn drive_validation() {
        let d = DriveSpec {
            amplitude: 0.01,
            drive_frequency: 0.2,
            drive_phase: 0.0,
            duration: -1.0,
        };
        assert!(d.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn embed_project_roundtrip(t in 0.0..PI, p in -PI..PI) {
            let l = LogicalState::from_bloch(t, p);
            let c = embed_logical(&l).unwrap();
            proptest::prop_assert!((c.norm() - 1.0).abs() < 1e-14);
            let (back, r) = project_logical(&c);
            proptest::prop_assert!(r < 1e-12);
            proptest::prop_assert!((back.a0 - l.a0).norm() < 1e-12);
            proptest::prop_assert!((back.a1 - l.a1).norm() < 1e-12);
        }
    }
}
