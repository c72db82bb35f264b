//! Neural models of the ball dynamics and the stroke planners built on them.
//!
//! The forward model maps a launch state `(x₀, y₀, ẋ₀, ẏ₀)` to the rest
//! position `(x_e, y_e)` and is inverted numerically with PSO. The inverse
//! model maps `(x₀, y₀, x_e, y_e)` straight to the launch velocity.

mod mlp;
mod train;

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::StrokeDataset;
use crate::geometry::Vec2;
use crate::pso::{self, PsoConfig, PsoError};

pub use mlp::{Layer, Mlp, MlpModel, MlpRepr, Normalizer};
pub use train::{train_network, TrainConfig, TrainHistory, Trainer};

/// Smallest dataset accepted for training.
pub const MIN_TRAINING_ROWS: usize = 100;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("dataset has {got} rows, at least {need} are required")]
    TooFewRows { got: usize, need: usize },
    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("expected a {expected:?} model, got {got:?}")]
    WrongKind { expected: ModelKind, got: ModelKind },
    #[error(transparent)]
    Pso(#[from] PsoError),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `(x₀, y₀, ẋ₀, ẏ₀) → (x_e, y_e)`
    Forward,
    /// `(x₀, y₀, x_e, y_e) → (ẋ₀, ẏ₀)`
    Inverse,
}

/// A trained stroke model with its validation error.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeModel {
    pub kind: ModelKind,
    pub model: MlpModel,
    /// Validation RMSE per output, in output units (m or m/s).
    pub validation_rmse: Vec<f64>,
    pub history: TrainHistory,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    kind: ModelKind,
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    normalizers: mlp::NormalizerPair,
    validation_rmse: Vec<f64>,
}

impl StrokeModel {
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.model.predict(x)
    }

    pub fn to_json(&self) -> Result<String, LearnError> {
        let repr = self.model.net.to_repr();
        let file = ModelFile {
            kind: self.kind,
            sizes: repr.sizes,
            weights: repr.weights,
            biases: repr.biases,
            normalizers: mlp::NormalizerPair { input: self.model.input.clone(), output: self.model.output.clone() },
            validation_rmse: self.validation_rmse.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, LearnError> {
        let f: ModelFile = serde_json::from_str(text)?;
        let net = Mlp::from_repr(&MlpRepr { sizes: f.sizes, weights: f.weights, biases: f.biases })?;
        let model = MlpModel::new(net, f.normalizers.input, f.normalizers.output)?;
        if model.net.n_inputs() != 4 || model.net.n_outputs() != 2 {
            return Err(LearnError::Shape(format!("stroke models are 4 → 2, got {:?}", model.net.sizes())));
        }
        Ok(Self { kind: f.kind, model, validation_rmse: f.validation_rmse, history: TrainHistory::default() })
    }

    pub fn write_json(&self, path: &Path) -> Result<(), LearnError> {
        std::fs::write(path, self.to_json()?).map_err(|source| LearnError::Io { path: path.to_path_buf(), source })
    }

    pub fn read_json(path: &Path) -> Result<Self, LearnError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| LearnError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    fn expect(&self, kind: ModelKind) -> Result<(), LearnError> {
        if self.kind != kind {
            return Err(LearnError::WrongKind { expected: kind, got: self.kind });
        }
        Ok(())
    }
}

fn rows_for(ds: &StrokeDataset, kind: ModelKind) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    ds.rows
        .iter()
        .map(|r| {
            let s = r.start;
            match kind {
                ModelKind::Forward => (vec![s.x, s.y, s.xdot, s.ydot], vec![r.end.x, r.end.y]),
                ModelKind::Inverse => (vec![s.x, s.y, r.end.x, r.end.y], vec![s.xdot, s.ydot]),
            }
        })
        .unzip()
}

fn matrix(rows: &[Vec<f64>], idx: &[usize], norm: &Normalizer) -> DMatrix<f64> {
    let dim = norm.dim();
    let mut m = DMatrix::zeros(idx.len(), dim);
    for (r, &i) in idx.iter().enumerate() {
        let z = norm.normalize(&rows[i]);
        for d in 0..dim {
            m[(r, d)] = z[d];
        }
    }
    m
}

fn train_kind(ds: &StrokeDataset, cfg: &TrainConfig, kind: ModelKind) -> Result<StrokeModel, LearnError> {
    cfg.validate()?;
    if ds.len() < MIN_TRAINING_ROWS {
        return Err(LearnError::TooFewRows { got: ds.len(), need: MIN_TRAINING_ROWS });
    }
    let (inputs, outputs) = rows_for(ds, kind);
    if inputs.iter().chain(&outputs).flatten().any(|v| !v.is_finite()) {
        return Err(LearnError::Shape("dataset contains non-finite values".into()));
    }
    let split = train::split_indices(ds.len(), cfg.validation_fraction, cfg.seed);
    let pick = |rows: &[Vec<f64>]| split.train.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>();
    let in_norm = Normalizer::fit(&pick(&inputs));
    let out_norm = Normalizer::fit(&pick(&outputs));

    let x = matrix(&inputs, &split.train, &in_norm);
    let y = matrix(&outputs, &split.train, &out_norm);
    let xv = matrix(&inputs, &split.validation, &in_norm);
    let yv = matrix(&outputs, &split.validation, &out_norm);

    let mut sizes = vec![4];
    sizes.extend(&cfg.hidden);
    sizes.push(2);
    let mut net = Mlp::new_seeded(&sizes, cfg.seed)?;
    let history = train_network(&mut net, &x, &y, &xv, &yv, cfg)?;
    let model = MlpModel::new(net, in_norm, out_norm)?;

    let mut sq = [0.0; 2];
    for &i in &split.validation {
        let p = model.predict(&inputs[i]);
        for d in 0..2 {
            sq[d] += (p[d] - outputs[i][d]).powi(2);
        }
    }
    let validation_rmse = sq.iter().map(|s| (s / split.validation.len() as f64).sqrt()).collect();
    Ok(StrokeModel { kind, model, validation_rmse, history })
}

/// Learns the rest position from the launch state.
pub fn train_forward(ds: &StrokeDataset, cfg: &TrainConfig) -> Result<StrokeModel, LearnError> {
    train_kind(ds, cfg, ModelKind::Forward)
}

/// Learns the launch velocity from start and rest positions.
pub fn train_inverse(ds: &StrokeDataset, cfg: &TrainConfig) -> Result<StrokeModel, LearnError> {
    train_kind(ds, cfg, ModelKind::Inverse)
}

/// A planned stroke velocity `v_s` in the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokePlan {
    pub v_s: Vec2,
    /// Predicted rest position under `v_s` (forward planner) or the target (inverse).
    pub predicted_end: Vec2,
    /// Objective value `J_b` at `v_s`; zero for the inverse planner.
    pub cost: f64,
    /// False when the query lies outside twice the training range.
    pub in_domain: bool,
    pub evaluations: usize,
}

/// Weights of `J_b` on `(x, y, ẋ, ẏ)` of the terminal ball state.
pub const JB_WEIGHTS: [f64; 4] = [1.0, 1.0, 1.0, 1.0];

/// `J_b = (q_e − q_H)ᵀ W (q_e − q_H)` with zero terminal velocities.
pub fn stroke_objective(end: Vec2, hole: Vec2) -> f64 {
    let e = [end.x - hole.x, end.y - hole.y, 0.0, 0.0];
    e.iter().zip(JB_WEIGHTS).map(|(v, w)| w * v * v).sum()
}

/// Minimises `J_b` over launch velocities in `[−v_max, v_max]²` using the
/// forward model as the ball simulator.
pub fn plan_stroke_forward(
    forward: &StrokeModel,
    ball: Vec2,
    hole: Vec2,
    cfg: &PsoConfig,
    v_max: f64,
) -> Result<StrokePlan, LearnError> {
    forward.expect(ModelKind::Forward)?;
    if !(v_max > 0.0 && v_max.is_finite()) {
        return Err(LearnError::InvalidConfig(format!("v_max must be positive, got {v_max}")));
    }
    let end_for = |v: &[f64]| {
        let p = forward.predict(&[ball.x, ball.y, v[0], v[1]]);
        Vec2::new(p[0], p[1])
    };
    let res = pso::minimize(|v: &[f64]| stroke_objective(end_for(v), hole), &[(-v_max, v_max); 2], cfg)?;
    let v_s = Vec2::new(res.best_position[0], res.best_position[1]);
    let in_domain = forward.model.input.in_domain(&[ball.x, ball.y, v_s.x, v_s.y]);
    Ok(StrokePlan {
        v_s,
        predicted_end: end_for(&res.best_position),
        cost: res.best_value,
        in_domain,
        evaluations: res.evaluations,
    })
}

/// One evaluation of the inverse model.
pub fn plan_stroke_inverse(inverse: &StrokeModel, ball: Vec2, hole: Vec2) -> Result<StrokePlan, LearnError> {
    inverse.expect(ModelKind::Inverse)?;
    let (v, in_domain) = inverse.model.predict_checked(&[ball.x, ball.y, hole.x, hole.y]);
    Ok(StrokePlan { v_s: Vec2::new(v[0], v[1]), predicted_end: hole, cost: 0.0, in_domain, evaluations: 1 })
}
