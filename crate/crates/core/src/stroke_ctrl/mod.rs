//! Stroke device: plant model, gain-scheduled LQR with feedforward and
//! observer, and closed-loop simulation.

mod plant;
pub mod riccati;
mod schedule;
mod sim;

use std::path::PathBuf;

use thiserror::Error;

pub use plant::{linearize, plant_deriv, LinearModel, StrokePlantParams};
pub use riccati::RiccatiError;
pub use schedule::{
    design_schedule, design_schedule_on, eig2, place_observer, GainSchedule, LqrWeights, OperatingPoint,
    ScheduleGrid,
};
pub use sim::{
    simulate_stroke, FeedforwardMode, ObserverModel, ScheduleOn, StrokeSample, StrokeSimConfig, StrokeSimResult,
    StrokeSummary,
};

#[derive(Debug, Error)]
pub enum StrokeError {
    #[error("invalid stroke plant parameters: {0}")]
    InvalidParams(String),
    #[error("invalid stroke controller configuration: {0}")]
    InvalidConfig(String),
    #[error("Riccati solve failed at operating point φ_R = {phi:.4} rad: {source}")]
    Riccati {
        phi: f64,
        #[source]
        source: RiccatiError,
    },
    #[error("closed loop is not Hurwitz at operating point φ_R = {phi:.4} rad")]
    NotHurwitz { phi: f64 },
    #[error("observer pair is not observable at operating point φ_R = {phi:.4} rad")]
    Unobservable { phi: f64 },
    #[error("stroke simulation produced a non-finite state at step {step} (t = {t:.4} s)")]
    NonFinite { step: usize, t: f64 },
    #[error(transparent)]
    Reference(#[from] crate::stroke_ref::StrokeRefError),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
