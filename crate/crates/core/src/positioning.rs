//! Differential-drive kinematics of the positioning robot and PSO-planned
//! wheel-travel sequences that bring the club frame C to a pre-stroke pose.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::{Matrix2, Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{normalize_angle, Pose2D, Vec2};
use crate::pso::{self, PsoConfig, PsoError};

#[derive(Debug, Error)]
pub enum PositioningError {
    #[error("stroke velocity is zero, the club heading is undefined")]
    ZeroStrokeVelocity,
    #[error("invalid robot geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid positioning configuration: {0}")]
    InvalidConfig(String),
    #[error("wheel increment {value} at step {step} exceeds the limit {limit}")]
    StepLimit { step: usize, value: f64, limit: f64 },
    #[error(transparent)]
    Pso(#[from] PsoError),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotGeom {
    /// Wheel track W, m.
    pub track_width: f64,
    /// Pose of the club frame C in the robot frame G.
    pub club_offset: Pose2D,
    /// Distance of C behind the ball along the stroke direction, m.
    pub ball_offset: f64,
}

impl Default for RobotGeom {
    fn default() -> Self {
        Self { track_width: 0.5, club_offset: Pose2D::new(0.4, 0.0, 0.0), ball_offset: 0.03 }
    }
}

impl RobotGeom {
    pub fn validate(&self) -> Result<(), PositioningError> {
        if !(self.track_width > 0.0 && self.track_width.is_finite()) {
            return Err(PositioningError::InvalidGeometry(format!(
                "track width must be positive, got {}",
                self.track_width
            )));
        }
        if !(self.ball_offset >= 0.0 && self.ball_offset.is_finite()) {
            return Err(PositioningError::InvalidGeometry(format!(
                "ball offset must be non-negative, got {}",
                self.ball_offset
            )));
        }
        Ok(())
    }

    /// Pose of C in I for a robot pose `g`.
    pub fn club_pose(&self, g: &Pose2D) -> Pose2D {
        g.compose(&self.club_offset)
    }

    /// Robot pose that puts C at `c`.
    pub fn base_pose_for_club(&self, c: &Pose2D) -> Pose2D {
        c.compose(&self.club_offset.inverse())
    }
}

/// Wheel travel increments `(θ₁, θ₂)` per step, m. θ₁ is the right wheel.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlSequence {
    pub steps: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct SeqRow {
    i: usize,
    theta1: f64,
    theta2: f64,
}

impl ControlSequence {
    pub fn zeros(n: usize) -> Self {
        Self { steps: vec![[0.0; 2]; n] }
    }

    pub fn from_flat(v: &[f64]) -> Self {
        Self { steps: v.chunks_exact(2).map(|c| [c[0], c[1]]).collect() }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.steps.iter().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn check_limit(&self, step_max: f64) -> Result<(), PositioningError> {
        for (step, s) in self.steps.iter().enumerate() {
            for &value in s {
                if !(value.abs() <= step_max) {
                    return Err(PositioningError::StepLimit { step, value, limit: step_max });
                }
            }
        }
        Ok(())
    }

    /// CSV with header `i,theta1,theta2`, `i` counting from 1.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), PositioningError> {
        let mut wr = csv::Writer::from_writer(w);
        for (k, s) in self.steps.iter().enumerate() {
            wr.serialize(SeqRow { i: k + 1, theta1: s[0], theta2: s[1] })?;
        }
        wr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, PositioningError> {
        let mut rd = csv::Reader::from_reader(r);
        let mut steps = Vec::new();
        for row in rd.deserialize() {
            let row: SeqRow = row?;
            steps.push([row.theta1, row.theta2]);
        }
        Ok(Self { steps })
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<(), PositioningError> {
        let f = std::fs::File::create(path)
            .map_err(|source| PositioningError::Io { path: path.to_path_buf(), source })?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// `Q_p` (pose error) and `R_p` (per-step effort) of the positioning cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositioningWeights {
    pub q: [[f64; 3]; 3],
    pub r: [[f64; 2]; 2],
}

impl Default for PositioningWeights {
    fn default() -> Self {
        Self { q: [[100.0, 0.0, 0.0], [0.0, 100.0, 0.0], [0.0, 0.0, 10.0]], r: [[1e-4, 0.0], [0.0, 1e-4]] }
    }
}

impl PositioningWeights {
    pub fn validate(&self) -> Result<(), PositioningError> {
        let q = Matrix3::from_fn(|i, j| self.q[i][j]);
        let r = Matrix2::from_fn(|i, j| self.r[i][j]);
        let psd3 = (q - q.transpose()).amax() <= 1e-12 && SymmetricEigen::new(q).eigenvalues.min() >= -1e-12;
        let psd2 = (r - r.transpose()).amax() <= 1e-12 && SymmetricEigen::new(r).eigenvalues.min() >= -1e-12;
        if !(psd3 && psd2) {
            return Err(PositioningError::InvalidConfig("Q_p and R_p must be symmetric PSD".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PositioningConfig {
    /// Horizon N.
    pub steps: usize,
    /// Per-wheel travel limit per step, m.
    pub step_max: f64,
    pub weights: PositioningWeights,
    pub pso: PsoConfig,
    /// Put a turn–drive–turn sequence into the initial swarm.
    pub warm_start: bool,
}

impl Default for PositioningConfig {
    fn default() -> Self {
        Self {
            steps: 10,
            step_max: 0.3,
            weights: PositioningWeights::default(),
            pso: PsoConfig::default(),
            warm_start: true,
        }
    }
}

/// Club pose for a stroke of the ball at `ball` with velocity `v_s`: C's
/// x-axis along `v_s`, origin `ball_offset` behind the ball.
pub fn target_club_pose(ball: Vec2, v_s: Vec2, geom: &RobotGeom) -> Result<Pose2D, PositioningError> {
    let dir = v_s.normalized().ok_or(PositioningError::ZeroStrokeVelocity)?;
    Ok(Pose2D::from_parts(ball - dir * geom.ball_offset, v_s.angle()))
}

/// sin(x)/x
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Advances a robot pose by one pair of wheel increments along the exact arc.
pub fn step_pose(g: &Pose2D, theta: [f64; 2], track_width: f64) -> Pose2D {
    let dpsi = (theta[1] - theta[0]) / track_width;
    let ds = 0.5 * (theta[0] + theta[1]);
    let chord = ds * sinc(0.5 * dpsi);
    let mid = g.psi + 0.5 * dpsi;
    Pose2D::new(g.x + chord * mid.cos(), g.y + chord * mid.sin(), g.psi + dpsi)
}

/// Final robot pose G after applying `seq` from `start`.
pub fn rollout_base(geom: &RobotGeom, start: &Pose2D, seq: &ControlSequence) -> Pose2D {
    seq.steps.iter().fold(*start, |g, &th| step_pose(&g, th, geom.track_width))
}

/// Final club pose C (in I) after applying `seq` from robot pose `start`.
pub fn rollout_kinematics(geom: &RobotGeom, start: &Pose2D, seq: &ControlSequence) -> Pose2D {
    geom.club_pose(&rollout_base(geom, start, seq))
}

/// Pose error `g_d − g_e` with the angle wrapped into (−π, π].
pub fn pose_error(target: &Pose2D, reached: &Pose2D) -> [f64; 3] {
    [target.x - reached.x, target.y - reached.y, normalize_angle(target.psi - reached.psi)]
}

/// `J_p = eᵀ Q_p e + Σ Θ(i)ᵀ R_p Θ(i)`.
pub fn positioning_cost(
    geom: &RobotGeom,
    start: &Pose2D,
    target_c: &Pose2D,
    weights: &PositioningWeights,
    seq: &ControlSequence,
) -> f64 {
    let e = pose_error(target_c, &rollout_kinematics(geom, start, seq));
    let mut j = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            j += e[a] * weights.q[a][b] * e[b];
        }
    }
    for th in &seq.steps {
        for a in 0..2 {
            for b in 0..2 {
                j += th[a] * weights.r[a][b] * th[b];
            }
        }
    }
    j
}

/// Rotate in place, drive straight, rotate in place; spread over `n` steps
/// and clamped to `step_max`. Exact whenever the three segments fit.
pub fn turn_drive_turn(
    geom: &RobotGeom,
    start: &Pose2D,
    target_c: &Pose2D,
    n: usize,
    step_max: f64,
) -> ControlSequence {
    let w = geom.track_width;
    let goal = geom.base_pose_for_club(target_c);
    let d = goal.position() - start.position();
    let dist = d.norm();

    // (wheel travel per unit of segment, segment magnitudes)
    let plan = |reverse: bool| -> [f64; 3] {
        if dist < 1e-12 {
            return [normalize_angle(goal.psi - start.psi), 0.0, 0.0];
        }
        let dir = if reverse { d.angle() + std::f64::consts::PI } else { d.angle() };
        let drive = if reverse { -dist } else { dist };
        [normalize_angle(dir - start.psi), drive, normalize_angle(goal.psi - dir)]
    };
    let load = |seg: &[f64; 3]| [seg[0].abs() * w / 2.0, seg[1].abs(), seg[2].abs() * w / 2.0];
    let min_steps = |seg: &[f64; 3]| -> [usize; 3] { load(seg).map(|l| (l / step_max - 1e-12).ceil().max(0.0) as usize) };

    let fwd = plan(false);
    let bwd = plan(true);
    let (kf, kb) = (min_steps(&fwd), min_steps(&bwd));
    let (sf, sb) = (kf.iter().sum::<usize>(), kb.iter().sum::<usize>());
    let (seg, mut k) = if sb < sf || (sb == sf && load(&bwd).iter().sum::<f64>() < load(&fwd).iter().sum::<f64>()) {
        (bwd, kb)
    } else {
        (fwd, kf)
    };
    let l = load(&seg);

    // Too many steps needed: shrink the largest allocations.
    while k.iter().sum::<usize>() > n {
        let j = (0..3).filter(|&j| k[j] > 1).max_by_key(|&j| k[j]);
        match j {
            Some(j) => k[j] -= 1,
            None => break,
        }
    }
    // Spare steps go to the segment with the highest per-step load.
    while k.iter().sum::<usize>() < n {
        let j = (0..3)
            .filter(|&j| l[j] > 0.0)
            .max_by(|&a, &b| (l[a] / k[a].max(1) as f64).total_cmp(&(l[b] / k[b].max(1) as f64)));
        match j {
            Some(j) => k[j] += 1,
            None => break,
        }
    }

    let mut steps = Vec::with_capacity(n);
    for (j, &kj) in k.iter().enumerate() {
        for _ in 0..kj {
            let per = seg[j] / kj as f64;
            let th = if j == 1 { [per, per] } else { [-per * w / 2.0, per * w / 2.0] };
            steps.push(th.map(|v| v.clamp(-step_max, step_max)));
        }
    }
    steps.truncate(n);
    steps.resize(n, [0.0; 2]);
    ControlSequence { steps }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositioningPlan {
    pub sequence: ControlSequence,
    pub cost: f64,
    pub start_base: Pose2D,
    pub target_club: Pose2D,
    pub end_club: Pose2D,
    pub end_base: Pose2D,
    pub position_error: f64,
    pub heading_error: f64,
    pub evaluations: usize,
}

/// JSON end-pose summary written next to the sequence CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub start_base: Pose2D,
    pub target_club: Pose2D,
    pub end_club: Pose2D,
    pub end_base: Pose2D,
    pub position_error_m: f64,
    pub heading_error_rad: f64,
    pub cost: f64,
    pub steps: usize,
    pub evaluations: usize,
}

impl PositioningPlan {
    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            start_base: self.start_base,
            target_club: self.target_club,
            end_club: self.end_club,
            end_base: self.end_base,
            position_error_m: self.position_error,
            heading_error_rad: self.heading_error,
            cost: self.cost,
            steps: self.sequence.len(),
            evaluations: self.evaluations,
        }
    }
}

/// Minimises `J_p` over wheel sequences of length `cfg.steps`.
pub fn plan_positioning(
    geom: &RobotGeom,
    start: &Pose2D,
    target_c: &Pose2D,
    cfg: &PositioningConfig,
) -> Result<PositioningPlan, PositioningError> {
    geom.validate()?;
    cfg.weights.validate()?;
    if cfg.steps == 0 {
        return Err(PositioningError::InvalidConfig("horizon must be at least one step".into()));
    }
    if !(cfg.step_max > 0.0 && cfg.step_max.is_finite()) {
        return Err(PositioningError::InvalidConfig(format!("step_max must be positive, got {}", cfg.step_max)));
    }
    let bounds = vec![(-cfg.step_max, cfg.step_max); 2 * cfg.steps];
    let seeds = if cfg.warm_start {
        vec![
            turn_drive_turn(geom, start, target_c, cfg.steps, cfg.step_max).to_flat(),
            vec![0.0; 2 * cfg.steps],
        ]
    } else {
        Vec::new()
    };
    let objective =
        |x: &[f64]| positioning_cost(geom, start, target_c, &cfg.weights, &ControlSequence::from_flat(x));
    let res = pso::minimize_seeded(objective, &bounds, &cfg.pso, &seeds)?;
    let sequence = ControlSequence::from_flat(&res.best_position);
    let end_base = rollout_base(geom, start, &sequence);
    let end_club = geom.club_pose(&end_base);
    let e = pose_error(target_c, &end_club);
    Ok(PositioningPlan {
        sequence,
        cost: res.best_value,
        start_base: *start,
        target_club: *target_c,
        end_club,
        end_base,
        position_error: e[0].hypot(e[1]),
        heading_error: e[2].abs(),
        evaluations: res.evaluations,
    })
}
