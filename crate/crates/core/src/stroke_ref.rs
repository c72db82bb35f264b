//! Lunge / strike / reset reference trajectory for the club angle.
//!
//! The club swings back to `−φ_l` over `T_l` (lunge), sweeps through the
//! hanging position `φ = 0` at the commanded rate `‖v_s‖/h` (strike), and
//! returns from `+φ_l` to rest over another `T_l` (reset). All three phases
//! are cosine blends, so `φ` and `φ̇` are continuous everywhere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stroke speeds above this (m/s) are rejected.
pub const DEFAULT_MAX_STROKE_SPEED: f64 = 6.0;

#[derive(Debug, Error, PartialEq)]
pub enum StrokeRefError {
    #[error("stroke reference parameter `{name}` must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("stroke speed {speed} m/s exceeds the limit of {limit} m/s")]
    TooFast { speed: f64, limit: f64 },
}

/// Reference sample `w = [φ, φ̇]` plus the reference acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RefPoint {
    pub phi: f64,
    pub phidot: f64,
    pub phiddot: f64,
}

/// A club-angle reference signal.
pub trait ClubReference: Sync {
    fn at(&self, t: f64) -> RefPoint;
    /// Time after which the reference stays constant.
    fn duration(&self) -> f64;
    /// Instant at which the club should pass `φ = 0` with the stroke speed, if any.
    fn impact_time(&self) -> Option<f64> {
        None
    }
    /// Interval in which an upward zero crossing of `φ` counts as the impact.
    fn strike_window(&self) -> Option<(f64, f64)> {
        None
    }
    /// Commanded club rate at impact, rad/s.
    fn impact_rate(&self) -> Option<f64> {
        None
    }
}

/// Which segment of the piecewise reference is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    Lunge,
    Strike,
    Reset,
}

/// Parameters of the three-phase stroke.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeRefParams {
    /// Lunge/reset magnitude φ_l, rad (positive; the lunge ends at −φ_l).
    pub lunge_angle: f64,
    /// T_l, s.
    pub lunge_duration: f64,
    /// Axis-to-hitting-point length h, m.
    pub hit_length: f64,
    /// ‖v_s‖, m/s.
    pub stroke_speed: f64,
}

impl StrokeRefParams {
    pub const DEFAULT_LUNGE_ANGLE: f64 = 0.9;
    pub const DEFAULT_LUNGE_DURATION: f64 = 0.35;
    pub const DEFAULT_HIT_LENGTH: f64 = 0.6;

    /// Default lunge geometry with the given stroke speed (m/s).
    pub fn with_speed(stroke_speed: f64) -> Result<Self, StrokeRefError> {
        let p = Self {
            lunge_angle: Self::DEFAULT_LUNGE_ANGLE,
            lunge_duration: Self::DEFAULT_LUNGE_DURATION,
            hit_length: Self::DEFAULT_HIT_LENGTH,
            stroke_speed,
        };
        p.validate(DEFAULT_MAX_STROKE_SPEED)?;
        Ok(p)
    }

    /// Default geometry, commanded by club angular rate φ̇_s (rad/s).
    pub fn with_angular_rate(phidot_s: f64) -> Result<Self, StrokeRefError> {
        Self::with_speed(phidot_s * Self::DEFAULT_HIT_LENGTH)
    }

    pub fn validate(&self, max_speed: f64) -> Result<(), StrokeRefError> {
        for (name, value) in [
            ("lunge_angle", self.lunge_angle),
            ("lunge_duration", self.lunge_duration),
            ("hit_length", self.hit_length),
            ("stroke_speed", self.stroke_speed),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(StrokeRefError::NonPositive { name, value });
            }
        }
        if self.stroke_speed > max_speed {
            return Err(StrokeRefError::TooFast { speed: self.stroke_speed, limit: max_speed });
        }
        Ok(())
    }

    /// Commanded club rate at impact, φ̇_s = ‖v_s‖ / h.
    pub fn impact_rate(&self) -> f64 {
        stroke_speed_from_vector(self.stroke_speed, self.hit_length)
    }

    /// φ_l·π·h / ‖v_s‖
    pub fn strike_duration(&self) -> f64 {
        self.lunge_angle * PI * self.hit_length / self.stroke_speed
    }

    pub fn strike_start(&self) -> f64 {
        self.lunge_duration
    }

    pub fn strike_end(&self) -> f64 {
        self.lunge_duration + self.strike_duration()
    }

    pub fn end_time(&self) -> f64 {
        2.0 * self.lunge_duration + self.strike_duration()
    }

    /// Strike-phase instant where φ crosses zero.
    pub fn zero_crossing_time(&self) -> f64 {
        self.lunge_duration + 0.5 * self.strike_duration()
    }

    pub fn phase(&self, t: f64) -> Phase {
        if t <= 0.0 || t > self.end_time() {
            Phase::Idle
        } else if t <= self.strike_start() {
            Phase::Lunge
        } else if t <= self.strike_end() {
            Phase::Strike
        } else {
            Phase::Reset
        }
    }

    /// `(φ, φ̇)` at time `t`.
    pub fn ref_at(&self, t: f64) -> (f64, f64) {
        let p = self.at(t);
        (p.phi, p.phidot)
    }
}

impl ClubReference for StrokeRefParams {
    fn at(&self, t: f64) -> RefPoint {
        let phi_l = self.lunge_angle;
        let t_l = self.lunge_duration;
        let blend = PI / t_l;
        // angular frequency of the strike cosine
        let strike = self.stroke_speed / (phi_l * self.hit_length);
        match self.phase(t) {
            Phase::Idle => RefPoint::default(),
            Phase::Lunge => {
                let (s, c) = (blend * t).sin_cos();
                RefPoint {
                    phi: 0.5 * phi_l * (c - 1.0),
                    phidot: -0.5 * phi_l * blend * s,
                    phiddot: -0.5 * phi_l * blend * blend * c,
                }
            }
            Phase::Strike => {
                let (s, c) = (strike * (t - t_l)).sin_cos();
                RefPoint {
                    phi: -phi_l * c,
                    phidot: self.impact_rate() * s,
                    phiddot: self.impact_rate() * strike * c,
                }
            }
            Phase::Reset => {
                let (s, c) = (blend * (t - self.strike_end())).sin_cos();
                RefPoint {
                    phi: 0.5 * phi_l * (c + 1.0),
                    phidot: -0.5 * phi_l * blend * s,
                    phiddot: -0.5 * phi_l * blend * blend * c,
                }
            }
        }
    }

    fn duration(&self) -> f64 {
        self.end_time()
    }

    fn impact_time(&self) -> Option<f64> {
        Some(self.zero_crossing_time())
    }

    fn strike_window(&self) -> Option<(f64, f64)> {
        Some((self.strike_start(), self.strike_end()))
    }

    fn impact_rate(&self) -> Option<f64> {
        Some(StrokeRefParams::impact_rate(self))
    }
}

/// Constant set-point (no stroke).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HoldReference {
    pub phi: f64,
}

impl ClubReference for HoldReference {
    fn at(&self, _t: f64) -> RefPoint {
        RefPoint { phi: self.phi, phidot: 0.0, phiddot: 0.0 }
    }

    fn duration(&self) -> f64 {
        0.0
    }
}

/// Club angular rate that realises translational stroke speed `v_s_norm`.
pub fn stroke_speed_from_vector(v_s_norm: f64, h: f64) -> f64 {
    v_s_norm / h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig6() -> StrokeRefParams {
        StrokeRefParams::with_speed(4.8).unwrap()
    }

    #[test]
    fn starts_at_rest() {
        assert_eq!(fig6().ref_at(0.0), (0.0, 0.0));
    }

    #[test]
    fn lunge_ends_at_negative_lunge_angle() {
        let (phi, phidot) = fig6().ref_at(0.35);
        assert_abs_diff_eq!(phi, -0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(phidot, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_crossing_has_stroke_rate() {
        let p = fig6();
        let t = 0.35 + 0.5 * PI * 0.9 * 0.6 / 4.8;
        assert_abs_diff_eq!(p.zero_crossing_time(), t, epsilon = 1e-15);
        let (phi, phidot) = p.ref_at(t);
        assert_abs_diff_eq!(phi, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(phidot, 8.0, epsilon = 1e-14);
    }

    #[test]
    fn strike_duration_value() {
        assert_abs_diff_eq!(fig6().strike_duration(), 0.35343, epsilon = 1e-5);
    }

    #[test]
    fn rate_from_speed() {
        assert_eq!(stroke_speed_from_vector(0.6, 0.6), 1.0);
        assert_abs_diff_eq!(stroke_speed_from_vector(4.8, 0.6), 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(stroke_speed_from_vector(1.7155, 0.6), 2.8592, epsilon = 1e-4);
    }

    #[test]
    fn zero_outside_support() {
        let p = fig6();
        assert_eq!(p.ref_at(-1.0), (0.0, 0.0));
        assert_eq!(p.ref_at(p.end_time() + 1e-9), (0.0, 0.0));
        assert_eq!(p.phase(p.end_time() + 1.0), Phase::Idle);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StrokeRefParams::with_speed(0.0).is_err());
        assert!(matches!(StrokeRefParams::with_speed(7.0), Err(StrokeRefError::TooFast { .. })));
        assert!(StrokeRefParams::with_speed(6.0).is_ok());
    }

    #[test]
    fn acceleration_matches_rate_derivative() {
        let p = fig6();
        let h = 1e-6;
        for i in 1..200 {
            let t = p.end_time() * i as f64 / 200.0;
            if [p.strike_start(), p.strike_end()].iter().any(|b| (t - b).abs() < 1e-4) {
                continue;
            }
            let fd = (p.at(t + h).phidot - p.at(t - h).phidot) / (2.0 * h);
            assert!((p.at(t).phiddot - fd).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }
}
