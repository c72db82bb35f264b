//! Closed-loop stroke simulation: nonlinear plant, scheduled controller and
//! observer integrated together with fixed-step RK4.

use std::io::Write;
use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::plant::{plant_deriv, StrokePlantParams};
use super::schedule::{GainSchedule, OperatingPoint};
use super::StrokeError;
use crate::stroke_ref::ClubReference;

/// Model used inside the observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverModel {
    /// `x̂̇ = (A − L cᵀ) x̂ + b u + L y` with the scheduled linear model.
    Linear,
    /// `x̂̇ = f(x̂, u) + L (y − cᵀ x̂)` with the full plant model.
    #[default]
    Nonlinear,
}

/// How the feedforward torque `u*` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedforwardMode {
    /// `u* = F_u · w` from the scheduled linear model.
    Static,
    /// Torque that makes the nominal nonlinear plant follow the reference.
    #[default]
    InverseDynamics,
}

/// Signal used to pick the operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleOn {
    #[default]
    Estimate,
    Measurement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrokeSimConfig {
    /// Integrator and controller step, s.
    pub dt: f64,
    /// Simulated time after the reference has ended, s.
    pub settle_time: f64,
    /// Total simulated time; overrides `settle_time` when set.
    pub duration: Option<f64>,
    pub observer: ObserverModel,
    pub feedforward: FeedforwardMode,
    pub schedule_on: ScheduleOn,
    /// Plant state `(φ, φ̇)` at t = 0.
    pub initial_state: [f64; 2],
    /// Observer state at t = 0.
    pub initial_estimate: [f64; 2],
    /// Keep every n-th step in the time series.
    pub record_every: usize,
}

impl Default for StrokeSimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            settle_time: 0.3,
            duration: None,
            observer: ObserverModel::default(),
            feedforward: FeedforwardMode::default(),
            schedule_on: ScheduleOn::default(),
            initial_state: [0.0; 2],
            initial_estimate: [0.0; 2],
            record_every: 10,
        }
    }
}

impl StrokeSimConfig {
    pub fn validate(&self) -> Result<(), StrokeError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(StrokeError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.settle_time >= 0.0 && self.settle_time.is_finite()) {
            return Err(StrokeError::InvalidConfig(format!("settle_time must be ≥ 0, got {}", self.settle_time)));
        }
        if let Some(d) = self.duration {
            if !(d > 0.0 && d.is_finite()) {
                return Err(StrokeError::InvalidConfig(format!("duration must be positive, got {d}")));
            }
        }
        if self.record_every == 0 {
            return Err(StrokeError::InvalidConfig("record_every must be at least 1".into()));
        }
        if self.initial_state.iter().chain(&self.initial_estimate).any(|v| !v.is_finite()) {
            return Err(StrokeError::InvalidConfig("initial states must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeSample {
    pub t: f64,
    pub phi: f64,
    pub phidot: f64,
    pub phi_ref: f64,
    pub phidot_ref: f64,
    /// Saturated motor torque applied over the following step, N·m.
    pub u: f64,
    pub xhat1: f64,
    pub xhat2: f64,
}

impl StrokeSample {
    /// ‖x̂ − x‖
    pub fn estimation_error(&self) -> f64 {
        (self.xhat1 - self.phi).hypot(self.xhat2 - self.phidot)
    }
}

/// Aggregate figures of one simulated stroke.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeSummary {
    pub commanded_impact_rate: Option<f64>,
    pub realized_impact_rate: Option<f64>,
    pub impact_time: Option<f64>,
    pub relative_error: Option<f64>,
    pub max_abs_torque: f64,
    pub torque_limit: f64,
    pub saturated_steps: usize,
    pub duration: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct StrokeSimResult {
    pub samples: Vec<StrokeSample>,
    /// `(t, φ̇)` at the strike-phase upward zero crossing of `φ`.
    pub impact: Option<(f64, f64)>,
    pub commanded_impact_rate: Option<f64>,
    pub max_abs_torque: f64,
    pub torque_limit: f64,
    pub saturated_steps: usize,
    pub steps: usize,
    pub duration: f64,
}

impl StrokeSimResult {
    /// Club rate at the impact crossing, rad/s.
    pub fn realized_impact_speed(&self) -> Option<f64> {
        self.impact.map(|(_, rate)| rate)
    }

    pub fn relative_impact_error(&self) -> Option<f64> {
        match (self.realized_impact_speed(), self.commanded_impact_rate) {
            (Some(r), Some(c)) if c != 0.0 => Some((r - c) / c),
            _ => None,
        }
    }

    pub fn summary(&self) -> StrokeSummary {
        StrokeSummary {
            commanded_impact_rate: self.commanded_impact_rate,
            realized_impact_rate: self.realized_impact_speed(),
            impact_time: self.impact.map(|(t, _)| t),
            relative_error: self.relative_impact_error(),
            max_abs_torque: self.max_abs_torque,
            torque_limit: self.torque_limit,
            saturated_steps: self.saturated_steps,
            duration: self.duration,
            steps: self.steps,
        }
    }

    /// CSV with header `t,phi,phidot,phi_ref,phidot_ref,u,xhat1,xhat2`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), StrokeError> {
        let mut wr = csv::Writer::from_writer(w);
        for s in &self.samples {
            wr.serialize(s)?;
        }
        wr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<(), StrokeError> {
        let f = std::fs::File::create(path)
            .map_err(|source| StrokeError::Io { path: path.to_path_buf(), source })?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

type State = [f64; 4];

fn add_scaled(z: &State, k: &State, h: f64) -> State {
    [z[0] + h * k[0], z[1] + h * k[1], z[2] + h * k[2], z[3] + h * k[3]]
}

fn joint_deriv(p: &StrokePlantParams, op: &OperatingPoint, model: ObserverModel, z: &State, u: f64) -> State {
    let [x1, x2] = plant_deriv(p, [z[0], z[1]], u);
    let y = z[0];
    let xh = Vector2::new(z[2], z[3]);
    let dxh = match model {
        ObserverModel::Nonlinear => {
            let f = plant_deriv(p, [z[2], z[3]], u);
            Vector2::new(f[0], f[1]) + op.l * (y - z[2])
        }
        ObserverModel::Linear => {
            let m = &op.model;
            (m.a - op.l * m.c.transpose()) * xh + m.b * u + op.l * y
        }
    };
    [x1, x2, dxh[0], dxh[1]]
}

/// Simulates the closed loop following `reference`.
pub fn simulate_stroke(
    p: &StrokePlantParams,
    schedule: &GainSchedule,
    reference: &dyn ClubReference,
    cfg: &StrokeSimConfig,
) -> Result<StrokeSimResult, StrokeError> {
    p.validate()?;
    cfg.validate()?;
    if schedule.is_empty() {
        return Err(StrokeError::InvalidConfig("gain schedule is empty".into()));
    }
    let duration = cfg.duration.unwrap_or(reference.duration() + cfg.settle_time);
    let steps = (duration / cfg.dt).ceil().max(1.0) as usize;
    let window = reference.strike_window();
    let u_max = p.torque_limit;

    let mut z: State = [cfg.initial_state[0], cfg.initial_state[1], cfg.initial_estimate[0], cfg.initial_estimate[1]];
    let mut samples = Vec::with_capacity(steps / cfg.record_every + 2);
    let mut impact = None;
    let mut max_abs_torque = 0.0_f64;
    let mut saturated_steps = 0;

    for step in 0..=steps {
        let t = step as f64 * cfg.dt;
        let w = reference.at(t);
        let sched_var = match cfg.schedule_on {
            ScheduleOn::Estimate => z[2],
            ScheduleOn::Measurement => z[0],
        };
        let op = schedule.point_for(sched_var);
        let target = Vector2::new(w.phi, w.phidot);
        let u_ff = match cfg.feedforward {
            FeedforwardMode::Static => op.f_u.dot(&target),
            FeedforwardMode::InverseDynamics => p.inverse_dynamics(&w),
        };
        let u_fb = -op.k.dot(&(Vector2::new(z[2], z[3]) - target));
        let raw = u_ff + u_fb;
        let u = raw.clamp(-u_max, u_max);
        if raw != u {
            saturated_steps += 1;
        }
        max_abs_torque = max_abs_torque.max(u.abs());

        if step % cfg.record_every == 0 || step == steps {
            samples.push(StrokeSample {
                t,
                phi: z[0],
                phidot: z[1],
                phi_ref: w.phi,
                phidot_ref: w.phidot,
                u,
                xhat1: z[2],
                xhat2: z[3],
            });
        }
        if step == steps {
            break;
        }

        let h = cfg.dt;
        let k1 = joint_deriv(p, op, cfg.observer, &z, u);
        let k2 = joint_deriv(p, op, cfg.observer, &add_scaled(&z, &k1, 0.5 * h), u);
        let k3 = joint_deriv(p, op, cfg.observer, &add_scaled(&z, &k2, 0.5 * h), u);
        let k4 = joint_deriv(p, op, cfg.observer, &add_scaled(&z, &k3, h), u);
        let mut next = z;
        for j in 0..4 {
            next[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t_next = (step + 1) as f64 * cfg.dt;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(StrokeError::NonFinite { step: step + 1, t: t_next });
        }

        if impact.is_none() {
            if let Some((start, end)) = window {
                if t >= start && t <= end && z[0] < 0.0 && next[0] >= 0.0 {
                    let s = -z[0] / (next[0] - z[0]);
                    impact = Some((t + s * h, z[1] + s * (next[1] - z[1])));
                }
            }
        }
        z = next;
    }

    Ok(StrokeSimResult {
        samples,
        impact,
        commanded_impact_rate: reference.impact_rate(),
        max_abs_torque,
        torque_limit: u_max,
        saturated_steps,
        steps,
        duration: steps as f64 * cfg.dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stroke_ctrl::{design_schedule, LqrWeights};
    use crate::stroke_ref::{HoldReference, StrokeRefParams};

    fn schedule() -> GainSchedule {
        design_schedule(&StrokePlantParams::default(), &LqrWeights::default()).unwrap()
    }

    #[test]
    fn fig6_stroke_reaches_commanded_rate() {
        let p = StrokePlantParams::default();
        let r = StrokeRefParams::with_angular_rate(8.0).unwrap();
        let res = simulate_stroke(&p, &schedule(), &r, &StrokeSimConfig::default()).unwrap();
        let err = res.relative_impact_error().unwrap();
        assert!(err.abs() <= 0.02, "relative error {err}");
        assert!(res.samples.iter().all(|s| s.u.abs() <= p.torque_limit));
    }

    #[test]
    fn rest_stays_at_rest() {
        let p = StrokePlantParams::default();
        let cfg = StrokeSimConfig { duration: Some(1.0), ..Default::default() };
        let res = simulate_stroke(&p, &schedule(), &HoldReference::default(), &cfg).unwrap();
        assert!(res.impact.is_none());
        for s in &res.samples {
            assert_eq!((s.phi, s.phidot, s.u, s.xhat1, s.xhat2), (0.0, 0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn csv_header() {
        let p = StrokePlantParams::default();
        let cfg = StrokeSimConfig { duration: Some(0.01), ..Default::default() };
        let res = simulate_stroke(&p, &schedule(), &HoldReference::default(), &cfg).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,phi,phidot,phi_ref,phidot_ref,u,xhat1,xhat2");
        assert_eq!(text.lines().count(), 1 + res.samples.len());
    }

    #[test]
    fn rejects_bad_step() {
        let cfg = StrokeSimConfig { dt: 0.0, ..Default::default() };
        let err = simulate_stroke(&StrokePlantParams::default(), &schedule(), &HoldReference::default(), &cfg);
        assert!(matches!(err, Err(StrokeError::InvalidConfig(_))));
    }
}
