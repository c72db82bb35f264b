//! Golf-ball rolling dynamics on the green and simulated training strokes.
//!
//! Per unit mass the ball obeys
//!
//! ```text
//! ẍ = −g·sin αx − (F_r/m)·|cos β|·sgn(ẋ)
//! ÿ = −g·sin αy − (F_r/m)·|sin β|·sgn(ẏ)
//! F_r = m·g·μ·cos αx·cos αy,   β = atan2(ẏ, ẋ)
//! ```
//!
//! with slope angles taken from the [`SurfaceModel`]. Rollouts use classic
//! fixed-step RK4.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::par;
use crate::surface::{Rect, SurfaceModel};

/// Below this speed the rolling-resistance term is switched off.
pub const DEFAULT_FRICTION_DEAD_ZONE: f64 = 1e-4;
/// Speed under which a ball held by static friction is considered at rest.
pub const DEFAULT_STOP_SPEED: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum BallError {
    #[error("non-finite ball state at step {step} (t = {t} s)")]
    NonFinite { step: usize, t: f64 },
    #[error("invalid rollout configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid ball parameters: {0}")]
    InvalidParams(String),
    #[error("stroke {index}: no accepted rollout after {attempts} attempts")]
    SamplingExhausted { index: usize, attempts: usize },
    #[error("dataset CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Physical parameters of the ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallParams {
    /// kg
    pub mass: f64,
    /// m/s²
    pub gravity: f64,
    /// Rolling resistance coefficient μ_b.
    pub rolling_resistance: f64,
}

impl Default for BallParams {
    fn default() -> Self {
        Self { mass: 0.046, gravity: 9.81, rolling_resistance: 0.15 }
    }
}

impl BallParams {
    pub fn validate(&self) -> Result<(), BallError> {
        if !(self.mass > 0.0 && self.gravity > 0.0 && self.rolling_resistance >= 0.0)
            || !self.rolling_resistance.is_finite()
        {
            return Err(BallError::InvalidParams(format!("{self:?}")));
        }
        Ok(())
    }

    /// Flat-green deceleration `g·μ`.
    pub fn flat_deceleration(&self) -> f64 {
        self.gravity * self.rolling_resistance
    }
}

/// `q = [x, y, ẋ, ẏ]` in the I frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BallState {
    pub x: f64,
    pub y: f64,
    pub xdot: f64,
    pub ydot: f64,
}

impl BallState {
    pub const fn new(x: f64, y: f64, xdot: f64, ydot: f64) -> Self {
        Self { x, y, xdot, ydot }
    }

    pub fn from_parts(position: Vec2, velocity: Vec2) -> Self {
        Self::new(position.x, position.y, velocity.x, velocity.y)
    }

    pub fn at_rest(position: Vec2) -> Self {
        Self::from_parts(position, Vec2::ZERO)
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.xdot, self.ydot)
    }

    pub fn speed(&self) -> f64 {
        self.xdot.hypot(self.ydot)
    }

    pub fn is_finite(&self) -> bool {
        self.position().is_finite() && self.velocity().is_finite()
    }

    fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.xdot, self.ydot]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

/// Hole location and capture rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleSpec {
    pub center: Vec2,
    /// m
    pub radius: f64,
    /// m/s; faster balls roll over the hole.
    pub capture_speed: f64,
}

impl HoleSpec {
    pub const REGULATION_RADIUS: f64 = 0.054;
    pub const DEFAULT_CAPTURE_SPEED: f64 = 0.5;

    pub fn at(center: Vec2) -> Self {
        Self { center, radius: Self::REGULATION_RADIUS, capture_speed: Self::DEFAULT_CAPTURE_SPEED }
    }

    pub fn captures(&self, state: &BallState) -> bool {
        state.position().distance(self.center) < self.radius && state.speed() < self.capture_speed
    }
}

/// Integration and termination settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutConfig {
    /// s
    pub dt: f64,
    /// s
    pub t_max: f64,
    /// m/s
    pub stop_speed: f64,
    /// m/s
    pub friction_dead_zone: f64,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 30.0,
            stop_speed: DEFAULT_STOP_SPEED,
            friction_dead_zone: DEFAULT_FRICTION_DEAD_ZONE,
        }
    }
}

impl RolloutConfig {
    pub fn validate(&self) -> Result<(), BallError> {
        let ok = self.dt > 0.0
            && self.t_max > 0.0
            && self.stop_speed > 0.0
            && self.friction_dead_zone >= 0.0
            && self.friction_dead_zone < self.stop_speed
            && self.t_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(BallError::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// How a rollout ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// At rest on the green, held by static friction.
    Stopped,
    /// Dropped into the hole.
    Captured,
    /// Rolled past the green bounds.
    LeftGreen,
    /// Still moving at `t_max`.
    TimedOut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutSample {
    pub t: f64,
    pub state: BallState,
}

/// Time-ordered trajectory plus termination reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub samples: Vec<RolloutSample>,
    pub outcome: Outcome,
}

impl Rollout {
    pub fn last(&self) -> &RolloutSample {
        self.samples.last().expect("a rollout always holds its initial sample")
    }

    pub fn final_position(&self) -> Vec2 {
        self.last().state.position()
    }

    pub fn duration(&self) -> f64 {
        self.last().t
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), BallError> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["t", "x", "y", "xdot", "ydot"])?;
        for s in &self.samples {
            let q = s.state;
            wtr.write_record(
                [s.t, q.x, q.y, q.xdot, q.ydot].iter().map(|v| v.to_string()),
            )?;
        }
        wtr.flush().map_err(|source| BallError::Io { path: "<writer>".into(), source })?;
        Ok(())
    }
}

/// Per-unit-mass acceleration `(ẍ, ÿ)` with the default friction dead zone.
pub fn ball_accel(params: &BallParams, surface: &SurfaceModel, state: &BallState) -> Vec2 {
    ball_accel_with_dead_zone(params, surface, state, DEFAULT_FRICTION_DEAD_ZONE)
}

pub fn ball_accel_with_dead_zone(
    params: &BallParams,
    surface: &SurfaceModel,
    state: &BallState,
    dead_zone: f64,
) -> Vec2 {
    let alpha = surface.slope_angles(state.position());
    let g = params.gravity;
    let mut acc = Vec2::new(-g * alpha.alpha_x.sin(), -g * alpha.alpha_y.sin());
    if state.speed() >= dead_zone && state.speed() > 0.0 {
        // F_r / m_b
        let resist = g * params.rolling_resistance * alpha.alpha_x.cos() * alpha.alpha_y.cos();
        let beta = state.ydot.atan2(state.xdot);
        acc.x -= resist * beta.cos().abs() * sgn(state.xdot);
        acc.y -= resist * beta.sin().abs() * sgn(state.ydot);
    }
    acc
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

/// Whether static friction holds a ball at rest at `p`.
pub fn held_by_friction(params: &BallParams, surface: &SurfaceModel, p: Vec2) -> bool {
    let alpha = surface.slope_angles(p);
    let g = params.gravity;
    let downslope = g * alpha.alpha_x.sin().hypot(alpha.alpha_y.sin());
    let limit = g * params.rolling_resistance * alpha.alpha_x.cos() * alpha.alpha_y.cos();
    downslope <= limit
}

struct Dynamics<'a> {
    params: &'a BallParams,
    surface: &'a SurfaceModel,
    dead_zone: f64,
}

impl Dynamics<'_> {
    fn deriv(&self, q: [f64; 4]) -> [f64; 4] {
        let a = ball_accel_with_dead_zone(self.params, self.surface, &BallState::from_array(q), self.dead_zone);
        [q[2], q[3], a.x, a.y]
    }

    fn rk4(&self, q: [f64; 4], dt: f64) -> ([f64; 4], [f64; 4]) {
        let k1 = self.deriv(q);
        let k2 = self.deriv(axpy(q, 0.5 * dt, k1));
        let k3 = self.deriv(axpy(q, 0.5 * dt, k2));
        let k4 = self.deriv(axpy(q, dt, k3));
        let mut out = q;
        for i in 0..4 {
            out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        (out, k1)
    }

    /// Rest point reached by coasting from a slow state along its current
    /// direction at the current deceleration.
    fn coast_to_rest(&self, t: f64, state: BallState) -> RolloutSample {
        let speed = state.speed();
        let Some(dir) = state.velocity().normalized() else {
            return RolloutSample { t, state: BallState::at_rest(state.position()) };
        };
        let a = ball_accel_with_dead_zone(self.params, self.surface, &state, self.dead_zone);
        let decel = -a.dot(dir);
        if decel <= 0.0 {
            return RolloutSample { t, state: BallState::at_rest(state.position()) };
        }
        let dist = speed * speed / (2.0 * decel);
        RolloutSample { t: t + speed / decel, state: BallState::at_rest(state.position() + dir * dist) }
    }
}

fn axpy(q: [f64; 4], a: f64, k: [f64; 4]) -> [f64; 4] {
    [q[0] + a * k[0], q[1] + a * k[1], q[2] + a * k[2], q[3] + a * k[3]]
}

/// Cubic Hermite interpolation of the state inside one step.
fn hermite(q0: [f64; 4], d0: [f64; 4], q1: [f64; 4], d1: [f64; 4], dt: f64, s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = h00 * q0[i] + h10 * dt * d0[i] + h01 * q1[i] + h11 * dt * d1[i];
    }
    out
}

/// Rolls the ball from `q0` until it rests, drops, leaves the green or times out.
pub fn simulate(
    params: &BallParams,
    surface: &SurfaceModel,
    hole: Option<&HoleSpec>,
    q0: BallState,
    cfg: &RolloutConfig,
) -> Result<Rollout, BallError> {
    let rollout = simulate_unless(params, surface, hole, q0, cfg, |_| false)?;
    Ok(rollout.expect("rollout is never abandoned"))
}

/// Like [`simulate`], but gives up and returns `None` as soon as `abandon`
/// holds for a state after a step. Saves time when rejection sampling.
fn simulate_unless(
    params: &BallParams,
    surface: &SurfaceModel,
    hole: Option<&HoleSpec>,
    q0: BallState,
    cfg: &RolloutConfig,
    abandon: impl Fn(&BallState) -> bool,
) -> Result<Option<Rollout>, BallError> {
    params.validate()?;
    cfg.validate()?;
    if !q0.is_finite() {
        return Err(BallError::NonFinite { step: 0, t: 0.0 });
    }
    let dynamics = Dynamics { params, surface, dead_zone: cfg.friction_dead_zone };
    let bounds = *surface.bounds();
    let captured = |s: &BallState| hole.is_some_and(|h| h.captures(s));
    let held = |s: &BallState| held_by_friction(params, surface, s.position());

    let mut samples = vec![RolloutSample { t: 0.0, state: q0 }];
    let finish = |mut samples: Vec<RolloutSample>, rest: RolloutSample| {
        if rest.t > samples.last().map_or(f64::NEG_INFINITY, |s| s.t) {
            samples.push(rest);
        }
        let outcome = if captured(&rest.state) {
            Outcome::Captured
        } else if !bounds.contains(rest.state.position()) {
            Outcome::LeftGreen
        } else {
            Outcome::Stopped
        };
        Rollout { samples, outcome }
    };

    if captured(&q0) {
        return Ok(Some(Rollout { samples, outcome: Outcome::Captured }));
    }
    if !bounds.contains(q0.position()) {
        return Ok(Some(Rollout { samples, outcome: Outcome::LeftGreen }));
    }
    if q0.speed() < cfg.stop_speed && held(&q0) {
        let rest = dynamics.coast_to_rest(0.0, q0);
        return Ok(Some(finish(samples, rest)));
    }

    let mut q = q0.as_array();
    let mut t = 0.0;
    let mut step = 0usize;
    loop {
        let t_next = ((step + 1) as f64 * cfg.dt).min(cfg.t_max);
        let dt = t_next - t;
        if dt <= 1e-12 {
            return Ok(Some(Rollout { samples, outcome: Outcome::TimedOut }));
        }
        let (next, d0) = dynamics.rk4(q, dt);
        step += 1;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(BallError::NonFinite { step, t: t + dt });
        }
        let prev_state = BallState::from_array(q);
        let next_state = BallState::from_array(next);

        if prev_state.speed() >= cfg.stop_speed && next_state.speed() < cfg.stop_speed {
            // Locate the threshold crossing inside the step so the rest point
            // does not depend on where the step grid happens to fall.
            let d1 = dynamics.deriv(next);
            let speed_at = |s: f64| BallState::from_array(hermite(q, d0, next, d1, dt, s)).speed();
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if speed_at(mid) >= cfg.stop_speed {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let crossing = BallState::from_array(hermite(q, d0, next, d1, dt, hi));
            if abandon(&crossing) {
                return Ok(None);
            }
            if held(&crossing) {
                let tc = t + hi * dt;
                samples.push(RolloutSample { t: tc, state: crossing });
                let rest = dynamics.coast_to_rest(tc, crossing);
                return Ok(Some(finish(samples, rest)));
            }
        }

        if abandon(&next_state) {
            return Ok(None);
        }
        q = next;
        t = t_next;
        samples.push(RolloutSample { t, state: next_state });

        if captured(&next_state) {
            return Ok(Some(Rollout { samples, outcome: Outcome::Captured }));
        }
        if !bounds.contains(next_state.position()) {
            return Ok(Some(Rollout { samples, outcome: Outcome::LeftGreen }));
        }
        if next_state.speed() < cfg.stop_speed && held(&next_state) {
            let rest = dynamics.coast_to_rest(t, next_state);
            return Ok(Some(finish(samples, rest)));
        }
    }
}

/// One simulated training stroke: launch state and rest position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingStroke {
    pub start: BallState,
    pub end: Vec2,
}

/// Rows `(x0, y0, ẋ0, ẏ0, xe, ye)` produced on one surface.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StrokeDataset {
    pub rows: Vec<TrainingStroke>,
}

#[derive(Serialize, Deserialize)]
struct DatasetRow {
    x0: f64,
    y0: f64,
    xdot0: f64,
    ydot0: f64,
    xe: f64,
    ye: f64,
}

impl StrokeDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), BallError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for r in &self.rows {
            wtr.serialize(DatasetRow {
                x0: r.start.x,
                y0: r.start.y,
                xdot0: r.start.xdot,
                ydot0: r.start.ydot,
                xe: r.end.x,
                ye: r.end.y,
            })?;
        }
        wtr.flush().map_err(|source| BallError::Io { path: "<writer>".into(), source })?;
        Ok(())
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, BallError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let rows = rdr
            .deserialize::<DatasetRow>()
            .map(|r| {
                r.map(|r| TrainingStroke {
                    start: BallState::new(r.x0, r.y0, r.xdot0, r.ydot0),
                    end: Vec2::new(r.xe, r.ye),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { rows })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, BallError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|source| BallError::Io { path: path.display().to_string(), source })?;
        Self::from_csv_reader(file)
    }
}

/// How training strokes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeSampling {
    pub count: usize,
    /// Start positions are uniform over this rectangle.
    pub region: Rect,
    /// Launch speed range, m/s.
    pub speed_range: (f64, f64),
    pub seed: u64,
    /// Redraws allowed per stroke when a rollout does not come to rest on the green.
    pub max_attempts: usize,
    /// Also redraw strokes whose ball at some point moves against its launch
    /// direction (rolls back down a slope). Keeps the rest-point map invertible.
    #[serde(default)]
    pub direct_only: bool,
}

impl StrokeSampling {
    /// Defaults: speeds 0.1 to 4 m/s, 1000 redraws, direct strokes only.
    pub fn new(count: usize, region: Rect, seed: u64) -> Self {
        Self { count, region, speed_range: (0.1, 4.0), seed, max_attempts: 1000, direct_only: true }
    }
}

/// Simulates `sampling.count` random strokes and records where each comes to
/// rest. Strokes that leave the green, time out or drop into `hole` are
/// redrawn. Stroke `i` draws from its own RNG stream, so the dataset is the
/// same whether rollouts run in parallel or not.
pub fn generate_training_strokes(
    params: &BallParams,
    surface: &SurfaceModel,
    hole: Option<&HoleSpec>,
    sampling: &StrokeSampling,
    cfg: &RolloutConfig,
) -> Result<StrokeDataset, BallError> {
    params.validate()?;
    cfg.validate()?;
    sampling
        .region
        .validate()
        .map_err(|e| BallError::InvalidConfig(e.to_string()))?;
    let (v_lo, v_hi) = sampling.speed_range;
    if sampling.count == 0 || !(v_lo > 0.0 && v_hi >= v_lo && v_hi.is_finite()) {
        return Err(BallError::InvalidConfig(format!(
            "need count > 0 and 0 < v_min <= v_max, got count {} range {:?}",
            sampling.count, sampling.speed_range
        )));
    }
    let region = sampling.region;
    let rows = par::try_map_range(sampling.count, |index| {
        let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
        rng.set_stream(index as u64);
        for _ in 0..sampling.max_attempts {
            let p = Vec2::new(
                rng.random_range(region.x_min..=region.x_max),
                rng.random_range(region.y_min..=region.y_max),
            );
            let speed = if v_hi > v_lo { rng.random_range(v_lo..=v_hi) } else { v_lo };
            let dir = rng.random_range(0.0..std::f64::consts::TAU);
            let start = BallState::from_parts(p, Vec2::from_polar(speed, dir));
            let v0 = start.velocity();
            let turned_back = |s: &BallState| sampling.direct_only && s.velocity().dot(v0) < 0.0;
            let rollout = simulate_unless(params, surface, hole, start, cfg, turned_back)?;
            if let Some(r) = rollout.filter(|r| r.outcome == Outcome::Stopped) {
                return Ok(TrainingStroke { start, end: r.final_position() });
            }
        }
        Err(BallError::SamplingExhausted { index, attempts: sampling.max_attempts })
    })?;
    Ok(StrokeDataset { rows })
}
