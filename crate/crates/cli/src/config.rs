//! Scenario configuration. Field names carry their SI unit; every default is
//! written back out in `resolved_config.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use golfbot_core::ball::{BallParams, HoleSpec, RolloutConfig, StrokeSampling};
use golfbot_core::geometry::{Pose2D, Vec2};
use golfbot_core::learn::{TrainConfig, Trainer};
use golfbot_core::play::PlayConfig;
use golfbot_core::positioning::{PositioningConfig, PositioningWeights, RobotGeom};
use golfbot_core::pso::PsoConfig;
use golfbot_core::stroke_ctrl::{
    FeedforwardMode, LqrWeights, ObserverModel, ScheduleOn, StrokePlantParams, StrokeSimConfig,
};
use golfbot_core::stroke_ref::StrokeRefParams;
use golfbot_core::surface::{NamedSurface, Rect};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub green: GreenCfg,
    pub surface: SurfaceSource,
    pub ball: PointCfg,
    pub hole: HoleCfg,
    pub robot_start: PoseCfg,
    pub ball_params: BallParamsCfg,
    pub rollout: RolloutCfg,
    pub data: DataCfg,
    pub training: TrainingCfg,
    pub planner: PlannerCfg,
    pub stroke: StrokeCfg,
    pub plant: PlantCfg,
    pub lqr: LqrWeights,
    pub robot: RobotCfg,
    pub positioning: PositioningCfg,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            green: GreenCfg::default(),
            surface: SurfaceSource::default(),
            ball: PointCfg { x_m: -0.5, y_m: 0.0 },
            hole: HoleCfg::default(),
            robot_start: PoseCfg { x_m: -1.0, y_m: -0.5, heading_rad: 0.0 },
            ball_params: BallParamsCfg::default(),
            rollout: RolloutCfg::default(),
            data: DataCfg::default(),
            training: TrainingCfg::default(),
            planner: PlannerCfg::default(),
            stroke: StrokeCfg::default(),
            plant: PlantCfg::default(),
            lqr: LqrWeights::default(),
            robot: RobotCfg::default(),
            positioning: PositioningCfg::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenCfg {
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub y_min_m: f64,
    pub y_max_m: f64,
}

impl Default for GreenCfg {
    fn default() -> Self {
        Self { x_min_m: -2.0, x_max_m: 2.0, y_min_m: -2.0, y_max_m: 2.0 }
    }
}

/// Exactly one of the three sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSource {
    Named(NamedSurface),
    /// Point cloud CSV `x,y,z`, fitted with a tensor polynomial.
    CloudCsv { path: PathBuf, degree: (usize, usize) },
    /// A surface model JSON written by `fit-surface`.
    ModelJson(PathBuf),
}

impl Default for SurfaceSource {
    fn default() -> Self {
        SurfaceSource::Named(NamedSurface::Flat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointCfg {
    pub x_m: f64,
    pub y_m: f64,
}

impl PointCfg {
    pub fn vec(&self) -> Vec2 {
        Vec2::new(self.x_m, self.y_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseCfg {
    pub x_m: f64,
    pub y_m: f64,
    pub heading_rad: f64,
}

impl PoseCfg {
    pub fn pose(&self) -> Pose2D {
        Pose2D::new(self.x_m, self.y_m, self.heading_rad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoleCfg {
    pub x_m: f64,
    pub y_m: f64,
    pub radius_m: f64,
    pub capture_speed_m_s: f64,
}

impl Default for HoleCfg {
    fn default() -> Self {
        Self {
            x_m: 0.5,
            y_m: 0.0,
            radius_m: HoleSpec::REGULATION_RADIUS,
            capture_speed_m_s: HoleSpec::DEFAULT_CAPTURE_SPEED,
        }
    }
}

impl HoleCfg {
    pub fn spec(&self) -> HoleSpec {
        HoleSpec { center: Vec2::new(self.x_m, self.y_m), radius: self.radius_m, capture_speed: self.capture_speed_m_s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BallParamsCfg {
    pub mass_kg: f64,
    pub gravity_m_s2: f64,
    pub rolling_resistance: f64,
}

impl Default for BallParamsCfg {
    fn default() -> Self {
        let b = BallParams::default();
        Self { mass_kg: b.mass, gravity_m_s2: b.gravity, rolling_resistance: b.rolling_resistance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RolloutCfg {
    pub dt_s: f64,
    pub t_max_s: f64,
    pub stop_speed_m_s: f64,
    pub friction_dead_zone_m_s: f64,
}

impl Default for RolloutCfg {
    fn default() -> Self {
        let r = RolloutConfig::default();
        Self { dt_s: r.dt, t_max_s: r.t_max, stop_speed_m_s: r.stop_speed, friction_dead_zone_m_s: r.friction_dead_zone }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataCfg {
    pub count: usize,
    pub speed_min_m_s: f64,
    pub speed_max_m_s: f64,
    /// Rollout step used while generating strokes.
    pub dt_s: f64,
    pub direct_only: bool,
    pub max_attempts: usize,
}

impl Default for DataCfg {
    fn default() -> Self {
        let s = StrokeSampling::new(3000, Rect::centered(1.0), 0);
        Self {
            count: s.count,
            speed_min_m_s: s.speed_range.0,
            speed_max_m_s: s.speed_range.1,
            dt_s: 5e-3,
            direct_only: s.direct_only,
            max_attempts: s.max_attempts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    #[default]
    Inverse,
    Forward,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingCfg {
    pub model: ModelChoice,
    /// Train on this dataset instead of generating one.
    pub dataset_csv: Option<PathBuf>,
    pub trainer: Trainer,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub damping: f64,
    pub validation_fraction: f64,
    pub patience: usize,
    pub hidden: Vec<usize>,
}

impl Default for TrainingCfg {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            model: ModelChoice::default(),
            dataset_csv: None,
            trainer: t.trainer,
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            momentum: t.momentum,
            damping: t.damping,
            validation_fraction: t.validation_fraction,
            patience: t.patience,
            hidden: t.hidden,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PlanMethod {
    #[default]
    Inverse,
    Forward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerCfg {
    pub method: PlanMethod,
    /// Trained model files; models are trained from scratch when absent.
    pub inverse_model_json: Option<PathBuf>,
    pub forward_model_json: Option<PathBuf>,
    /// Forward planner search box half-width per velocity component.
    pub v_max_m_s: f64,
    pub pso: PsoConfig,
}

impl Default for PlannerCfg {
    fn default() -> Self {
        Self {
            method: PlanMethod::default(),
            inverse_model_json: None,
            forward_model_json: None,
            v_max_m_s: 4.0,
            pso: PsoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrokeCfg {
    /// Commanded club rate at impact for `stroke-sim`.
    pub phi_dot_s_rad_s: f64,
    pub lunge_angle_rad: f64,
    pub lunge_duration_s: f64,
    pub transfer_coefficient: f64,
    pub max_stroke_speed_m_s: f64,
    pub dt_s: f64,
    pub settle_time_s: f64,
    pub duration_s: Option<f64>,
    pub observer: ObserverModel,
    pub feedforward: FeedforwardMode,
    pub schedule_on: ScheduleOn,
    pub initial_state_rad_rad_s: [f64; 2],
    pub initial_estimate_rad_rad_s: [f64; 2],
    pub record_every: usize,
}

impl Default for StrokeCfg {
    fn default() -> Self {
        let s = StrokeSimConfig::default();
        let play = PlayConfig::default();
        Self {
            phi_dot_s_rad_s: 8.0,
            lunge_angle_rad: StrokeRefParams::DEFAULT_LUNGE_ANGLE,
            lunge_duration_s: StrokeRefParams::DEFAULT_LUNGE_DURATION,
            transfer_coefficient: play.transfer_coefficient,
            max_stroke_speed_m_s: play.max_stroke_speed,
            dt_s: s.dt,
            settle_time_s: s.settle_time,
            duration_s: s.duration,
            observer: s.observer,
            feedforward: s.feedforward,
            schedule_on: s.schedule_on,
            initial_state_rad_rad_s: s.initial_state,
            initial_estimate_rad_rad_s: s.initial_estimate,
            record_every: s.record_every,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantCfg {
    pub club_mass_kg: f64,
    pub inertia_kg_m2: f64,
    pub gravity_m_s2: f64,
    pub com_distance_m: f64,
    pub viscous_friction_kg_m2_s: f64,
    pub friction_radius_m: f64,
    pub friction_coeff: f64,
    pub hit_length_m: f64,
    pub torque_limit_n_m: f64,
    pub gear_ratio: f64,
}

impl Default for PlantCfg {
    fn default() -> Self {
        let p = StrokePlantParams::default();
        Self {
            club_mass_kg: p.club_mass,
            inertia_kg_m2: p.inertia,
            gravity_m_s2: p.gravity,
            com_distance_m: p.com_distance,
            viscous_friction_kg_m2_s: p.viscous_friction,
            friction_radius_m: p.friction_radius,
            friction_coeff: p.friction_coeff,
            hit_length_m: p.hit_length,
            torque_limit_n_m: p.torque_limit,
            gear_ratio: p.gear_ratio,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotCfg {
    pub track_width_m: f64,
    pub club_offset: PoseCfg,
    pub ball_offset_m: f64,
}

impl Default for RobotCfg {
    fn default() -> Self {
        let g = RobotGeom::default();
        Self {
            track_width_m: g.track_width,
            club_offset: PoseCfg { x_m: g.club_offset.x, y_m: g.club_offset.y, heading_rad: g.club_offset.psi },
            ball_offset_m: g.ball_offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PositioningCfg {
    /// Club pose to reach for `position`; defaults to the stroke pose for
    /// the ball aimed straight at the hole.
    pub target_club: Option<PoseCfg>,
    pub steps: usize,
    pub step_max_m: f64,
    pub q: [[f64; 3]; 3],
    pub r: [[f64; 2]; 2],
    pub warm_start: bool,
    pub pso: PsoConfig,
}

impl Default for PositioningCfg {
    fn default() -> Self {
        let p = PositioningConfig::default();
        Self {
            target_club: None,
            steps: p.steps,
            step_max_m: p.step_max,
            q: p.weights.q,
            r: p.weights.r,
            warm_start: p.warm_start,
            pso: p.pso,
        }
    }
}

fn positive(path: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{path}: must be positive and finite, got {v}")))
    }
}

fn finite(path: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{path}: must be finite, got {v}")))
    }
}

fn file_exists(path: &str, p: &Path) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{path}: file not found: {}", p.display())))
    }
}

impl ScenarioConfig {
    /// Reads a config file; unknown or mistyped fields are reported with
    /// their path.
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let at = e.path().to_string();
            CliError::Config(format!("{}: {at}: {}", path.display(), e.into_inner()))
        })
    }

    /// Checks values that serde cannot. Every message starts with the field path.
    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.green;
        for (p, v) in [("green.x_min_m", g.x_min_m), ("green.x_max_m", g.x_max_m), ("green.y_min_m", g.y_min_m), ("green.y_max_m", g.y_max_m)] {
            finite(p, v)?;
        }
        if !(g.x_min_m < g.x_max_m && g.y_min_m < g.y_max_m) {
            return Err(CliError::Config("green: minimum must lie below maximum on both axes".into()));
        }
        match &self.surface {
            SurfaceSource::Named(_) => {}
            SurfaceSource::CloudCsv { path, .. } => file_exists("surface.cloud_csv.path", path)?,
            SurfaceSource::ModelJson(path) => file_exists("surface.model_json", path)?,
        }
        for (p, v) in [("ball.x_m", self.ball.x_m), ("ball.y_m", self.ball.y_m), ("hole.x_m", self.hole.x_m), ("hole.y_m", self.hole.y_m)] {
            finite(p, v)?;
        }
        positive("hole.radius_m", self.hole.radius_m)?;
        positive("hole.capture_speed_m_s", self.hole.capture_speed_m_s)?;
        let rs = &self.robot_start;
        for (p, v) in [("robot_start.x_m", rs.x_m), ("robot_start.y_m", rs.y_m), ("robot_start.heading_rad", rs.heading_rad)] {
            finite(p, v)?;
        }
        positive("ball_params.mass_kg", self.ball_params.mass_kg)?;
        positive("ball_params.gravity_m_s2", self.ball_params.gravity_m_s2)?;
        positive("ball_params.rolling_resistance", self.ball_params.rolling_resistance)?;
        positive("rollout.dt_s", self.rollout.dt_s)?;
        positive("rollout.t_max_s", self.rollout.t_max_s)?;
        positive("rollout.stop_speed_m_s", self.rollout.stop_speed_m_s)?;
        if !(0.0..self.rollout.stop_speed_m_s).contains(&self.rollout.friction_dead_zone_m_s) {
            return Err(CliError::Config("rollout.friction_dead_zone_m_s: must lie in [0, stop_speed_m_s)".into()));
        }
        if self.data.count == 0 || self.data.max_attempts == 0 {
            return Err(CliError::Config("data.count and data.max_attempts: must be at least 1".into()));
        }
        positive("data.speed_min_m_s", self.data.speed_min_m_s)?;
        positive("data.dt_s", self.data.dt_s)?;
        if !(self.data.speed_max_m_s >= self.data.speed_min_m_s && self.data.speed_max_m_s.is_finite()) {
            return Err(CliError::Config("data.speed_max_m_s: must be finite and ≥ data.speed_min_m_s".into()));
        }
        if let Some(p) = &self.training.dataset_csv {
            file_exists("training.dataset_csv", p)?;
        }
        self.train_config()
            .validate()
            .map_err(|e| CliError::Config(format!("training: {e}")))?;
        if let Some(p) = &self.planner.inverse_model_json {
            file_exists("planner.inverse_model_json", p)?;
        }
        if let Some(p) = &self.planner.forward_model_json {
            file_exists("planner.forward_model_json", p)?;
        }
        positive("planner.v_max_m_s", self.planner.v_max_m_s)?;
        let s = &self.stroke;
        positive("stroke.phi_dot_s_rad_s", s.phi_dot_s_rad_s)?;
        positive("stroke.lunge_angle_rad", s.lunge_angle_rad)?;
        positive("stroke.lunge_duration_s", s.lunge_duration_s)?;
        positive("stroke.transfer_coefficient", s.transfer_coefficient)?;
        positive("stroke.max_stroke_speed_m_s", s.max_stroke_speed_m_s)?;
        self.stroke_sim()
            .validate()
            .map_err(|e| CliError::Config(format!("stroke: {e}")))?;
        self.plant_params()
            .validate()
            .map_err(|e| CliError::Config(format!("plant: {e}")))?;
        let q = self.lqr.q;
        if !(q[0][1] == q[1][0] && q[0][0] >= 0.0 && q[1][1] >= 0.0 && q[0][0] * q[1][1] >= q[0][1] * q[0][1]) {
            return Err(CliError::Config("lqr.q: must be symmetric positive semidefinite".into()));
        }
        positive("lqr.r", self.lqr.r)?;
        self.robot_geom()
            .validate()
            .map_err(|e| CliError::Config(format!("robot: {e}")))?;
        if let Some(t) = &self.positioning.target_club {
            for (p, v) in [("positioning.target_club.x_m", t.x_m), ("positioning.target_club.y_m", t.y_m), ("positioning.target_club.heading_rad", t.heading_rad)] {
                finite(p, v)?;
            }
        }
        if self.positioning.steps == 0 {
            return Err(CliError::Config("positioning.steps: must be at least 1".into()));
        }
        positive("positioning.step_max_m", self.positioning.step_max_m)?;
        self.positioning_config()
            .weights
            .validate()
            .map_err(|e| CliError::Config(format!("positioning: {e}")))?;
        Ok(())
    }

    pub fn green_rect(&self) -> Rect {
        let g = self.green;
        Rect { x_min: g.x_min_m, x_max: g.x_max_m, y_min: g.y_min_m, y_max: g.y_max_m }
    }

    pub fn ball_params(&self) -> BallParams {
        let b = self.ball_params;
        BallParams { mass: b.mass_kg, gravity: b.gravity_m_s2, rolling_resistance: b.rolling_resistance }
    }

    pub fn rollout_config(&self) -> RolloutConfig {
        let r = self.rollout;
        RolloutConfig { dt: r.dt_s, t_max: r.t_max_s, stop_speed: r.stop_speed_m_s, friction_dead_zone: r.friction_dead_zone_m_s }
    }

    pub fn data_rollout_config(&self) -> RolloutConfig {
        RolloutConfig { dt: self.data.dt_s, ..self.rollout_config() }
    }

    pub fn sampling(&self) -> StrokeSampling {
        let d = self.data;
        StrokeSampling {
            count: d.count,
            region: self.green_rect(),
            speed_range: (d.speed_min_m_s, d.speed_max_m_s),
            seed: self.seed,
            max_attempts: d.max_attempts,
            direct_only: d.direct_only,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.training;
        TrainConfig {
            trainer: t.trainer,
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            momentum: t.momentum,
            damping: t.damping,
            validation_fraction: t.validation_fraction,
            seed: self.seed,
            patience: t.patience,
            hidden: t.hidden.clone(),
        }
    }

    pub fn planner_pso(&self) -> PsoConfig {
        PsoConfig { seed: self.seed, ..self.planner.pso }
    }

    pub fn stroke_sim(&self) -> StrokeSimConfig {
        let s = &self.stroke;
        StrokeSimConfig {
            dt: s.dt_s,
            settle_time: s.settle_time_s,
            duration: s.duration_s,
            observer: s.observer,
            feedforward: s.feedforward,
            schedule_on: s.schedule_on,
            initial_state: s.initial_state_rad_rad_s,
            initial_estimate: s.initial_estimate_rad_rad_s,
            record_every: s.record_every,
        }
    }

    pub fn stroke_reference(&self, phi_dot_s: f64) -> StrokeRefParams {
        let h = self.plant.hit_length_m;
        StrokeRefParams {
            lunge_angle: self.stroke.lunge_angle_rad,
            lunge_duration: self.stroke.lunge_duration_s,
            hit_length: h,
            stroke_speed: phi_dot_s * h,
        }
    }

    pub fn plant_params(&self) -> StrokePlantParams {
        let p = self.plant;
        StrokePlantParams {
            club_mass: p.club_mass_kg,
            inertia: p.inertia_kg_m2,
            gravity: p.gravity_m_s2,
            com_distance: p.com_distance_m,
            viscous_friction: p.viscous_friction_kg_m2_s,
            friction_radius: p.friction_radius_m,
            friction_coeff: p.friction_coeff,
            hit_length: p.hit_length_m,
            torque_limit: p.torque_limit_n_m,
            gear_ratio: p.gear_ratio,
        }
    }

    pub fn robot_geom(&self) -> RobotGeom {
        let r = self.robot;
        RobotGeom { track_width: r.track_width_m, club_offset: r.club_offset.pose(), ball_offset: r.ball_offset_m }
    }

    pub fn positioning_config(&self) -> PositioningConfig {
        let p = &self.positioning;
        PositioningConfig {
            steps: p.steps,
            step_max: p.step_max_m,
            weights: PositioningWeights { q: p.q, r: p.r },
            pso: PsoConfig { seed: self.seed, ..p.pso },
            warm_start: p.warm_start,
        }
    }

    pub fn play_config(&self) -> PlayConfig {
        PlayConfig {
            ball: self.ball_params(),
            rollout: self.rollout_config(),
            robot: self.robot_geom(),
            positioning: self.positioning_config(),
            plant: self.plant_params(),
            stroke_sim: self.stroke_sim(),
            lunge_angle: self.stroke.lunge_angle_rad,
            lunge_duration: self.stroke.lunge_duration_s,
            transfer_coefficient: self.stroke.transfer_coefficient,
            max_stroke_speed: self.stroke.max_stroke_speed_m_s,
        }
    }
}
