//! Simulation and planning stack for a two-robot golf putting system: green
//! surface fitting, ball rollout, stroke-device control, robot positioning
//! and learned stroke planning.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ball;
pub mod geometry;
pub mod par;
pub mod stroke_ctrl;
pub mod stroke_ref;
pub mod surface;
pub mod pso;
pub mod positioning;
pub mod learn;
pub mod play;
