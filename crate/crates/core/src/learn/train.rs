//! Trainers: Levenberg–Marquardt on the full batch, or gradient descent with
//! momentum.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trainer {
    #[default]
    LevenbergMarquardt,
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub trainer: Trainer,
    /// Epochs for gradient descent; iterations for Levenberg–Marquardt.
    pub epochs: usize,
    /// Mini-batch size for gradient descent; 0 means full batch.
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Initial Levenberg–Marquardt damping.
    pub damping: f64,
    pub validation_fraction: f64,
    pub seed: u64,
    /// Stop after this many epochs without a validation improvement.
    pub patience: usize,
    pub hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            trainer: Trainer::default(),
            epochs: 300,
            batch_size: 0,
            learning_rate: 1e-2,
            momentum: 0.9,
            damping: 1e-2,
            validation_fraction: 0.1,
            seed: 0,
            patience: 100,
            hidden: vec![30],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |m: String| Err(LearnError::InvalidConfig(m));
        if self.epochs == 0 || self.patience == 0 {
            return bad("epochs and patience must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must lie in [0, 1), got {}", self.momentum));
        }
        if !(self.damping > 0.0 && self.damping.is_finite()) {
            return bad(format!("damping must be positive, got {}", self.damping));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction <= 0.5) {
            return bad(format!("validation fraction must lie in (0, 0.5], got {}", self.validation_fraction));
        }
        if self.hidden.contains(&0) {
            return bad("hidden layers must have at least one unit".into());
        }
        Ok(())
    }
}

/// Loss curves of one training run (normalised units).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub validation_loss: Vec<f64>,
    pub best_epoch: usize,
}

pub(crate) struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

pub(crate) fn split_indices(n: usize, fraction: f64, seed: u64) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let n_val = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let validation = idx[..n_val].to_vec();
    let mut train = idx[n_val..].to_vec();
    train.sort_unstable();
    Split { train, validation }
}

/// Trains `net` in place and returns the loss curves. The parameters with the
/// lowest validation loss are kept.
pub fn train_network(
    net: &mut Mlp,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    xv: &DMatrix<f64>,
    yv: &DMatrix<f64>,
    cfg: &TrainConfig,
) -> Result<TrainHistory, LearnError> {
    cfg.validate()?;
    match cfg.trainer {
        Trainer::LevenbergMarquardt => levenberg_marquardt(net, x, y, xv, yv, cfg),
        Trainer::GradientDescent => gradient_descent(net, x, y, xv, yv, cfg),
    }
}

struct BestTracker {
    best: f64,
    params: Vec<f64>,
    epoch: usize,
    since: usize,
}

impl BestTracker {
    fn new(net: &Mlp, val: f64) -> Self {
        Self { best: val, params: net.params(), epoch: 0, since: 0 }
    }

    /// Returns true when patience is exhausted.
    fn update(&mut self, net: &Mlp, val: f64, epoch: usize, patience: usize) -> bool {
        if val < self.best {
            self.best = val;
            self.params = net.params();
            self.epoch = epoch;
            self.since = 0;
        } else {
            self.since += 1;
        }
        self.since >= patience
    }
}

fn gradient_descent(
    net: &mut Mlp,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    xv: &DMatrix<f64>,
    yv: &DMatrix<f64>,
    cfg: &TrainConfig,
) -> Result<TrainHistory, LearnError> {
    let n = x.nrows();
    let batch = if cfg.batch_size == 0 { n } else { cfg.batch_size.min(n) };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..n).collect();
    let mut velocity = vec![0.0; net.n_params()];
    let mut hist = TrainHistory {
        train_loss: vec![net.loss(x, y)],
        validation_loss: vec![net.loss(xv, yv)],
        best_epoch: 0,
    };
    let mut best = BestTracker::new(net, hist.validation_loss[0]);

    for epoch in 1..=cfg.epochs {
        if batch < n {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            let (g_loss, grad) = if batch == n {
                net.loss_gradient(x, y)
            } else {
                net.loss_gradient(&x.select_rows(chunk), &y.select_rows(chunk))
            };
            if !g_loss.is_finite() {
                return Err(LearnError::Diverged { epoch });
            }
            let mut p = net.params();
            for k in 0..p.len() {
                velocity[k] = cfg.momentum * velocity[k] - cfg.learning_rate * grad[k];
                p[k] += velocity[k];
            }
            net.set_params(&p);
        }
        let tl = net.loss(x, y);
        let vl = net.loss(xv, yv);
        if !tl.is_finite() {
            return Err(LearnError::Diverged { epoch });
        }
        hist.train_loss.push(tl);
        hist.validation_loss.push(vl);
        if best.update(net, vl, epoch, cfg.patience) {
            break;
        }
    }
    net.set_params(&best.params);
    hist.best_epoch = best.epoch;
    Ok(hist)
}

fn levenberg_marquardt(
    net: &mut Mlp,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    xv: &DMatrix<f64>,
    yv: &DMatrix<f64>,
    cfg: &TrainConfig,
) -> Result<TrainHistory, LearnError> {
    let mut lambda = cfg.damping;
    let mut loss = net.loss(x, y);
    if !loss.is_finite() {
        return Err(LearnError::Diverged { epoch: 0 });
    }
    let mut hist = TrainHistory { train_loss: vec![loss], validation_loss: vec![net.loss(xv, yv)], best_epoch: 0 };
    let mut best = BestTracker::new(net, hist.validation_loss[0]);
    let n_p = net.n_params();

    'outer: for epoch in 1..=cfg.epochs {
        let (r, j) = net.residual_jacobian(x, y);
        // Explicit transpose: the plain product uses the blocked GEMM kernel.
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        let p0 = net.params();
        loop {
            let mut a = jtj.clone();
            for k in 0..n_p {
                a[(k, k)] += lambda;
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => DVector::zeros(n_p),
            };
            let trial: Vec<f64> = p0.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            net.set_params(&trial);
            let trial_loss = net.loss(x, y);
            if trial_loss.is_finite() && trial_loss < loss {
                loss = trial_loss;
                lambda = (lambda / 10.0).max(1e-12);
                break;
            }
            lambda *= 10.0;
            if lambda > 1e10 {
                net.set_params(&p0);
                break 'outer;
            }
        }
        hist.train_loss.push(loss);
        let vl = net.loss(xv, yv);
        hist.validation_loss.push(vl);
        if best.update(net, vl, epoch, cfg.patience) {
            break;
        }
    }
    net.set_params(&best.params);
    hist.best_epoch = best.epoch;
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (DMatrix<f64>, DMatrix<f64>) {
        let x = DMatrix::from_fn(60, 2, |i, j| ((i * 7 + j * 3) % 11) as f64 / 5.0 - 1.0);
        let y = DMatrix::from_fn(60, 1, |i, _| (x[(i, 0)] * 1.3).sin() + 0.5 * x[(i, 1)]);
        (x, y)
    }

    #[test]
    fn small_step_descent_is_monotone() {
        let (x, y) = toy();
        let mut net = Mlp::new_seeded(&[2, 8, 1], 0).unwrap();
        let cfg = TrainConfig { trainer: Trainer::GradientDescent, learning_rate: 1e-4, epochs: 200, ..Default::default() };
        let h = train_network(&mut net, &x, &y, &x, &y, &cfg).unwrap();
        assert!(h.train_loss.windows(2).all(|w| w[1] <= w[0]));
        assert!(h.train_loss.last() < h.train_loss.first());
    }

    #[test]
    fn lm_fits_smooth_function() {
        let (x, y) = toy();
        let mut net = Mlp::new_seeded(&[2, 8, 1], 0).unwrap();
        let h = train_network(&mut net, &x, &y, &x, &y, &TrainConfig { epochs: 100, ..Default::default() }).unwrap();
        assert!(*h.train_loss.last().unwrap() < 1e-5, "{:?}", h.train_loss.last());
        assert!(h.train_loss.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn split_is_disjoint_and_complete() {
        let s = split_indices(100, 0.1, 3);
        assert_eq!(s.validation.len(), 10);
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn divergence_is_reported() {
        let (x, y) = toy();
        let mut net = Mlp::new_seeded(&[2, 8, 1], 0).unwrap();
        let cfg = TrainConfig { trainer: Trainer::GradientDescent, learning_rate: 1e6, momentum: 0.0, ..Default::default() };
        assert!(matches!(train_network(&mut net, &x, &y, &x, &y, &cfg), Err(LearnError::Diverged { .. })));
    }
}
