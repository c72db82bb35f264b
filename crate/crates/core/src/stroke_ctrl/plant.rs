//! Single-body model of the stroke device.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::StrokeError;
use crate::stroke_ref::RefPoint;

/// Physical parameters of the club drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokePlantParams {
    /// Club mass m_c, kg.
    pub club_mass: f64,
    /// Inertia J about the club axis, kg·m².
    pub inertia: f64,
    /// m/s²
    pub gravity: f64,
    /// Axis to centre of mass, m.
    pub com_distance: f64,
    /// Viscous friction d, kg·m²/s.
    pub viscous_friction: f64,
    /// Axis to friction point r, m.
    pub friction_radius: f64,
    /// Sliding friction coefficient μ_c.
    pub friction_coeff: f64,
    /// Axis to hitting point h, m.
    pub hit_length: f64,
    /// Motor torque limit, N·m.
    pub torque_limit: f64,
    /// Belt drive ratio between motor and club shaft.
    pub gear_ratio: f64,
}

impl Default for StrokePlantParams {
    fn default() -> Self {
        Self {
            club_mass: 0.5241,
            inertia: 0.1445,
            gravity: 9.81,
            com_distance: 0.4702,
            viscous_friction: 0.0132,
            friction_radius: 0.0245,
            friction_coeff: 1.5136,
            hit_length: 0.6,
            torque_limit: 15.0,
            gear_ratio: 4.0,
        }
    }
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Linearisation `ẋ = A x + b u`, `y = cᵀ x` at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    pub a: Matrix2<f64>,
    pub b: Vector2<f64>,
    pub c: Vector2<f64>,
}

impl StrokePlantParams {
    pub fn validate(&self) -> Result<(), StrokeError> {
        let fields = [
            ("club_mass", self.club_mass),
            ("inertia", self.inertia),
            ("gravity", self.gravity),
            ("com_distance", self.com_distance),
            ("viscous_friction", self.viscous_friction),
            ("friction_radius", self.friction_radius),
            ("friction_coeff", self.friction_coeff),
            ("hit_length", self.hit_length),
            ("torque_limit", self.torque_limit),
            ("gear_ratio", self.gear_ratio),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(StrokeError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// m_c·g·a
    pub fn gravity_torque_gain(&self) -> f64 {
        self.club_mass * self.gravity * self.com_distance
    }

    /// Friction torque `M_d = d·φ̇ + r·μ_c·sgn(φ̇)·|m_c·φ̇²·a + m_c·g·cos φ|`.
    pub fn friction_torque(&self, phi: f64, phidot: f64) -> f64 {
        let normal = self.club_mass * phidot * phidot * self.com_distance
            + self.club_mass * self.gravity * phi.cos();
        self.viscous_friction * phidot
            + self.friction_radius * self.friction_coeff * sgn(phidot) * normal.abs()
    }

    /// Motor torque that makes the nominal model follow `w` exactly.
    pub fn inverse_dynamics(&self, w: &RefPoint) -> f64 {
        (self.inertia * w.phiddot
            + self.gravity_torque_gain() * w.phi.sin()
            + self.friction_torque(w.phi, w.phidot))
            / self.gear_ratio
    }

    pub fn linearize(&self, phi_r: f64) -> LinearModel {
        linearize(self, phi_r)
    }
}

/// Right-hand side `(φ̇, φ̈)` of the nonlinear plant.
pub fn plant_deriv(p: &StrokePlantParams, x: [f64; 2], u: f64) -> [f64; 2] {
    let [phi, phidot] = x;
    let phiddot = (-p.gravity_torque_gain() * phi.sin() - p.friction_torque(phi, phidot)
        + p.gear_ratio * u)
        / p.inertia;
    [phidot, phiddot]
}

/// Jacobian linearisation at `(φ_R, 0)` without the sliding-friction term.
pub fn linearize(p: &StrokePlantParams, phi_r: f64) -> LinearModel {
    let a21 = -(p.gravity_torque_gain() / p.inertia) * phi_r.cos();
    let a22 = -p.viscous_friction / p.inertia;
    LinearModel {
        a: Matrix2::new(0.0, 1.0, a21, a22),
        b: Vector2::new(0.0, p.gear_ratio / p.inertia),
        c: Vector2::new(1.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn hanging_equilibrium() {
        assert_eq!(plant_deriv(&StrokePlantParams::default(), [0.0, 0.0], 0.0), [0.0, 0.0]);
    }

    #[test]
    fn horizontal_club_falls() {
        let d = plant_deriv(&StrokePlantParams::default(), [PI / 2.0, 0.0], 0.0);
        assert_eq!(d[0], 0.0);
        assert_abs_diff_eq!(d[1], -16.729, epsilon = 2e-3);
        assert_abs_diff_eq!(d[1], -0.5241 * 9.81 * 0.4702 / 0.1445, epsilon = 1e-12);
    }

    #[test]
    fn moving_club_feels_both_frictions() {
        let p = StrokePlantParams::default();
        let d = plant_deriv(&p, [0.0, 1.0], 0.0);
        let expected = (-0.0132 - 0.0245 * 1.5136 * (0.5241 * 0.4702 + 0.5241 * 9.81)) / 0.1445;
        assert_eq!(d[0], 1.0);
        assert_abs_diff_eq!(d[1], expected, epsilon = 1e-12);
    }

    #[test]
    fn linearization_values() {
        let p = StrokePlantParams::default();
        let m = linearize(&p, 0.0);
        assert_abs_diff_eq!(m.a[(1, 0)], -16.729, epsilon = 2e-3);
        assert_abs_diff_eq!(m.a[(1, 1)], -0.09135, epsilon = 1e-5);
        assert_abs_diff_eq!(m.b[1], 27.682, epsilon = 1e-3);
        assert_eq!((m.a[(0, 0)], m.a[(0, 1)], m.b[0]), (0.0, 1.0, 0.0));
        assert_eq!((m.c[0], m.c[1]), (1.0, 0.0));
        assert_abs_diff_eq!(linearize(&p, PI / 2.0).a[(1, 0)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(linearize(&p, PI).a[(1, 0)], -m.a[(1, 0)], epsilon = 1e-12);
    }

    #[test]
    fn linearization_matches_finite_difference_of_smooth_part() {
        let p = StrokePlantParams { friction_coeff: 1e-300, ..StrokePlantParams::default() };
        let phi_r = 0.7;
        let m = linearize(&p, phi_r);
        let h = 1e-6;
        let da = (plant_deriv(&p, [phi_r + h, 0.0], 0.0)[1] - plant_deriv(&p, [phi_r - h, 0.0], 0.0)[1]) / (2.0 * h);
        assert_abs_diff_eq!(m.a[(1, 0)], da, epsilon = 1e-6);
    }

    #[test]
    fn inverse_dynamics_reproduces_reference_acceleration() {
        let p = StrokePlantParams::default();
        let w = RefPoint { phi: -0.4, phidot: 3.0, phiddot: 20.0 };
        let u = p.inverse_dynamics(&w);
        let d = plant_deriv(&p, [w.phi, w.phidot], u);
        assert_abs_diff_eq!(d[1], w.phiddot, epsilon = 1e-12);
    }
}
