//! One complete shot: plan the stroke, drive the robot into place, swing the
//! club and roll the ball.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{simulate, BallError, BallParams, BallState, HoleSpec, Outcome, RolloutConfig};
use crate::geometry::{normalize_angle, Pose2D, Vec2};
use crate::learn::{plan_stroke_inverse, LearnError, StrokeModel};
use crate::positioning::{plan_positioning, PositioningConfig, PositioningError, PositioningPlan, RobotGeom};
use crate::stroke_ctrl::{simulate_stroke, GainSchedule, StrokeError, StrokePlantParams, StrokeSimConfig};
use crate::stroke_ref::{StrokeRefError, StrokeRefParams, DEFAULT_MAX_STROKE_SPEED};
use crate::surface::SurfaceModel;

/// A failed stage aborts the shot.
#[derive(Debug, Error)]
pub enum PlayError {
    #[error("stage `plan`: {0}")]
    Plan(#[from] LearnError),
    #[error("stage `position`: {0}")]
    Position(#[from] PositioningError),
    #[error("stage `stroke`: {0}")]
    Stroke(#[from] StrokeError),
    #[error("stage `stroke`: club never passed the ball inside the strike window")]
    NoImpact,
    #[error("stage `roll`: {0}")]
    Roll(#[from] BallError),
    #[error("invalid play configuration: {0}")]
    InvalidConfig(String),
}

impl From<StrokeRefError> for PlayError {
    fn from(e: StrokeRefError) -> Self {
        PlayError::Stroke(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlayConfig {
    pub ball: BallParams,
    pub rollout: RolloutConfig,
    pub robot: RobotGeom,
    pub positioning: PositioningConfig,
    pub plant: StrokePlantParams,
    pub stroke_sim: StrokeSimConfig,
    /// φ_l, rad.
    pub lunge_angle: f64,
    /// T_l, s.
    pub lunge_duration: f64,
    /// Ball launch speed per unit club speed at impact.
    pub transfer_coefficient: f64,
    /// Planned stroke speeds above this are refused, m/s.
    pub max_stroke_speed: f64,
}

impl Default for PlayConfig {
    fn default() -> Self {
        Self {
            ball: BallParams::default(),
            rollout: RolloutConfig::default(),
            robot: RobotGeom::default(),
            positioning: PositioningConfig::default(),
            plant: StrokePlantParams::default(),
            stroke_sim: StrokeSimConfig::default(),
            lunge_angle: StrokeRefParams::DEFAULT_LUNGE_ANGLE,
            lunge_duration: StrokeRefParams::DEFAULT_LUNGE_DURATION,
            transfer_coefficient: 1.0,
            max_stroke_speed: DEFAULT_MAX_STROKE_SPEED,
        }
    }
}

/// Where things are before the shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub ball: Vec2,
    pub hole: HoleSpec,
    /// Pose of the robot base G.
    pub robot_start: Pose2D,
}

/// Positioning stage outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionStage {
    pub target_club: Pose2D,
    pub end_club: Pose2D,
    pub position_error_m: f64,
    pub heading_error_rad: f64,
    pub cost: f64,
}

/// Stroke stage outcome. `launch_speed_m_s` is exactly
/// `transfer_coefficient · hit_length · realized_impact_rate_rad_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeStage {
    pub commanded_impact_rate_rad_s: f64,
    pub realized_impact_rate_rad_s: f64,
    pub relative_rate_error: f64,
    pub club_speed_at_impact_m_s: f64,
    pub launch_speed_m_s: f64,
    /// Launch direction minus planned direction, rad.
    pub launch_direction_error_rad: f64,
    pub max_abs_torque: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub captured: bool,
    pub outcome: Outcome,
    pub final_position: Vec2,
    pub final_distance_to_hole_m: f64,
    pub planned_v_s: Vec2,
    pub launch_velocity: Vec2,
    pub position: Option<PositionStage>,
    pub stroke: Option<StrokeStage>,
    pub roll_duration_s: f64,
    pub warnings: Vec<String>,
}

impl GameReport {
    fn already_holed(s: &Scenario) -> Self {
        GameReport {
            captured: true,
            outcome: Outcome::Captured,
            final_position: s.ball,
            final_distance_to_hole_m: s.ball.distance(s.hole.center),
            planned_v_s: Vec2::ZERO,
            launch_velocity: Vec2::ZERO,
            position: None,
            stroke: None,
            roll_duration_s: 0.0,
            warnings: vec!["ball already in the hole, no stroke played".into()],
        }
    }
}

/// Plays one shot with the inverse planner and a precomputed gain schedule.
pub fn play_shot(
    surface: &SurfaceModel,
    inverse: &StrokeModel,
    schedule: &GainSchedule,
    scenario: &Scenario,
    cfg: &PlayConfig,
) -> Result<GameReport, PlayError> {
    if !(cfg.transfer_coefficient > 0.0 && cfg.transfer_coefficient.is_finite()) {
        return Err(PlayError::InvalidConfig(format!(
            "transfer_coefficient must be positive, got {}",
            cfg.transfer_coefficient
        )));
    }
    if scenario.ball.distance(scenario.hole.center) < scenario.hole.radius {
        return Ok(GameReport::already_holed(scenario));
    }

    let mut warnings = Vec::new();
    for (name, p) in [("ball", scenario.ball), ("hole", scenario.hole.center)] {
        if !surface.contains(p) {
            warnings.push(format!("{name} at ({:.3}, {:.3}) lies outside the green", p.x, p.y));
        }
    }
    let plan = plan_stroke_inverse(inverse, scenario.ball, scenario.hole.center)?;
    if !plan.in_domain {
        warnings.push("ball or hole lies outside the planner's training range".into());
    }
    let v_s = plan.v_s;

    let target = crate::positioning::target_club_pose(scenario.ball, v_s, &cfg.robot)?;
    let pos: PositioningPlan = plan_positioning(&cfg.robot, &scenario.robot_start, &target, &cfg.positioning)?;
    let position = PositionStage {
        target_club: target,
        end_club: pos.end_club,
        position_error_m: pos.position_error,
        heading_error_rad: pos.heading_error,
        cost: pos.cost,
    };

    // Command the club speed that launches the ball at ‖v_s‖.
    let h = cfg.plant.hit_length;
    let reference = StrokeRefParams {
        lunge_angle: cfg.lunge_angle,
        lunge_duration: cfg.lunge_duration,
        hit_length: h,
        stroke_speed: v_s.norm() / cfg.transfer_coefficient,
    };
    reference.validate(cfg.max_stroke_speed)?;
    let swing = simulate_stroke(&cfg.plant, schedule, &reference, &cfg.stroke_sim)?;
    let realized = swing.realized_impact_speed().ok_or(PlayError::NoImpact)?;
    let commanded = reference.impact_rate();
    let club_speed = h * realized;
    let launch_speed = cfg.transfer_coefficient * club_speed;
    // The club face points along C's x-axis wherever the robot actually ended up.
    let launch_velocity = Vec2::from_polar(launch_speed, pos.end_club.psi);
    let stroke = StrokeStage {
        commanded_impact_rate_rad_s: commanded,
        realized_impact_rate_rad_s: realized,
        relative_rate_error: (realized - commanded) / commanded,
        club_speed_at_impact_m_s: club_speed,
        launch_speed_m_s: launch_speed,
        launch_direction_error_rad: normalize_angle(pos.end_club.psi - v_s.angle()),
        max_abs_torque: swing.max_abs_torque,
    };

    let roll = simulate(
        &cfg.ball,
        surface,
        Some(&scenario.hole),
        BallState::from_parts(scenario.ball, launch_velocity),
        &cfg.rollout,
    )?;
    let final_position = roll.final_position();
    match roll.outcome {
        Outcome::LeftGreen => warnings.push("ball rolled off the green".into()),
        Outcome::TimedOut => warnings.push("ball still moving when the rollout time ran out".into()),
        _ => {}
    }
    Ok(GameReport {
        captured: roll.outcome == Outcome::Captured,
        outcome: roll.outcome,
        final_position,
        final_distance_to_hole_m: final_position.distance(scenario.hole.center),
        planned_v_s: v_s,
        launch_velocity,
        position: Some(position),
        stroke: Some(stroke),
        roll_duration_s: roll.duration(),
        warnings,
    })
}
