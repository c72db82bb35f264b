//! Bounded global-best particle swarm minimiser with inertia weight.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;

#[derive(Debug, Error, PartialEq)]
pub enum PsoError {
    #[error("invalid PSO configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid bounds in dimension {dim}: lo = {lo}, hi = {hi}")]
    InvalidBounds { dim: usize, lo: f64, hi: f64 },
    #[error("seed particle {index} has length {len}, expected {expected}")]
    SeedDimension { index: usize, len: usize, expected: usize },
    #[error("objective returned {value} at {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    /// Stop a run once the best value improved by less than this over
    /// `stall_iterations` iterations. 0 disables early stopping.
    pub tolerance: f64,
    pub stall_iterations: usize,
    /// Extra independent swarms; the best result over all runs is kept.
    pub restarts: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            iterations: 200,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            seed: 0,
            tolerance: 0.0,
            stall_iterations: 25,
            restarts: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<(), PsoError> {
        let bad = |msg: String| Err(PsoError::InvalidConfig(msg));
        if self.swarm_size < 2 {
            return bad(format!("swarm_size must be at least 2, got {}", self.swarm_size));
        }
        if !(0.0..1.0).contains(&self.inertia) {
            return bad(format!("inertia must lie in [0, 1), got {}", self.inertia));
        }
        if !(self.cognitive > 0.0 && self.cognitive.is_finite()) || !(self.social > 0.0 && self.social.is_finite()) {
            return bad(format!("c1 and c2 must be positive, got {} and {}", self.cognitive, self.social));
        }
        if !(self.tolerance >= 0.0) {
            return bad(format!("tolerance must be ≥ 0, got {}", self.tolerance));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    /// Best value after initialisation and after every iteration, over all runs.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

fn check_bounds(bounds: &[(f64, f64)]) -> Result<(), PsoError> {
    for (dim, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(PsoError::InvalidBounds { dim, lo, hi });
        }
    }
    if bounds.is_empty() {
        return Err(PsoError::InvalidConfig("at least one dimension is required".into()));
    }
    Ok(())
}

/// Minimises `objective` over the box `bounds`.
pub fn minimize<F>(objective: F, bounds: &[(f64, f64)], cfg: &PsoConfig) -> Result<PsoResult, PsoError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    minimize_seeded(objective, bounds, cfg, &[])
}

/// Like [`minimize`], with some initial particles of every run placed at
/// `seeds` (clamped into the box) instead of at random.
pub fn minimize_seeded<F>(
    objective: F,
    bounds: &[(f64, f64)],
    cfg: &PsoConfig,
    seeds: &[Vec<f64>],
) -> Result<PsoResult, PsoError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    check_bounds(bounds)?;
    for (index, s) in seeds.iter().enumerate() {
        if s.len() != bounds.len() {
            return Err(PsoError::SeedDimension { index, len: s.len(), expected: bounds.len() });
        }
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut history = Vec::new();
    let mut evaluations = 0;
    for run in 0..=cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(run as u64);
        let (x, f) = run_swarm(&objective, bounds, cfg, seeds, &mut rng, &mut |value| {
            let prev = history.last().copied().unwrap_or(f64::INFINITY);
            history.push(value.min(prev));
        }, &mut evaluations)?;
        if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
            best = Some((x, f));
        }
    }
    let (best_position, best_value) = best.expect("at least one run");
    Ok(PsoResult { best_position, best_value, history, evaluations })
}

fn evaluate<F>(objective: &F, points: &[Vec<f64>]) -> Result<Vec<f64>, PsoError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values = par::map_slice(points, |x| objective(x));
    for (x, &v) in points.iter().zip(&values) {
        if !v.is_finite() {
            return Err(PsoError::NonFinite { point: x.clone(), value: v });
        }
    }
    Ok(values)
}

fn run_swarm<F>(
    objective: &F,
    bounds: &[(f64, f64)],
    cfg: &PsoConfig,
    seeds: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
    record: &mut dyn FnMut(f64),
    evaluations: &mut usize,
) -> Result<(Vec<f64>, f64), PsoError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = bounds.len();
    let vmax: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.5 * (hi - lo)).collect();
    let mut pos: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|i| match seeds.get(i) {
            Some(s) => s.iter().zip(bounds).map(|(&v, &(lo, hi))| v.clamp(lo, hi)).collect(),
            None => bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect(),
        })
        .collect();
    let mut vel: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|_| vmax.iter().map(|&m| rng.random_range(-m..m)).collect())
        .collect();

    let values = evaluate(objective, &pos)?;
    *evaluations += pos.len();
    let mut pbest = pos.clone();
    let mut pbest_val = values;
    let mut g = argmin(&pbest_val);
    let mut gbest = pbest[g].clone();
    let mut gbest_val = pbest_val[g];
    record(gbest_val);
    let mut stall_ref = gbest_val;
    let mut stall = 0;

    for _ in 0..cfg.iterations {
        for (i, (x, v)) in pos.iter_mut().zip(vel.iter_mut()).enumerate() {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let mut vd = cfg.inertia * v[d]
                    + cfg.cognitive * r1 * (pbest[i][d] - x[d])
                    + cfg.social * r2 * (gbest[d] - x[d]);
                vd = vd.clamp(-vmax[d], vmax[d]);
                let (lo, hi) = bounds[d];
                let mut xd = x[d] + vd;
                if xd > hi {
                    xd = hi - (xd - hi);
                    vd = -vd;
                } else if xd < lo {
                    xd = lo + (lo - xd);
                    vd = -vd;
                }
                x[d] = xd.clamp(lo, hi);
                v[d] = vd;
            }
        }
        let values = evaluate(objective, &pos)?;
        *evaluations += pos.len();
        for (i, &f) in values.iter().enumerate() {
            if f < pbest_val[i] {
                pbest_val[i] = f;
                pbest[i].clone_from(&pos[i]);
            }
        }
        g = argmin(&pbest_val);
        if pbest_val[g] < gbest_val {
            gbest_val = pbest_val[g];
            gbest.clone_from(&pbest[g]);
        }
        record(gbest_val);

        if cfg.tolerance > 0.0 {
            if stall_ref - gbest_val < cfg.tolerance {
                stall += 1;
                if stall >= cfg.stall_iterations.max(1) {
                    break;
                }
            } else {
                stall = 0;
                stall_ref = gbest_val;
            }
        }
    }
    Ok((gbest, gbest_val))
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn sphere_minimum() {
        let r = minimize(sphere, &[(-5.0, 5.0); 2], &PsoConfig::default()).unwrap();
        assert!(r.best_value < 1e-6);
    }

    #[test]
    fn rosenbrock_minimum() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(f, &[(-2.0, 2.0); 2], &PsoConfig::default()).unwrap();
        assert!((r.best_position[0] - 1.0).abs() < 1e-2 && (r.best_position[1] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn parabola_vertex() {
        let r = minimize(|x: &[f64]| (x[0] - 3.0).powi(2), &[(0.0, 10.0)], &PsoConfig::default()).unwrap();
        assert!((r.best_position[0] - 3.0).abs() < 1e-4);
    }

    #[test]
    fn history_is_monotone_and_points_stay_inside() {
        let seen = Mutex::new(Vec::new());
        let bounds = [(-1.0, 0.5), (2.0, 3.0), (-10.0, -9.0)];
        let f = |x: &[f64]| {
            seen.lock().unwrap().push(x.to_vec());
            (x[0] - 7.0).powi(2) + x[1].sin() + x[2] * x[2]
        };
        let cfg = PsoConfig { restarts: 1, ..Default::default() };
        let r = minimize(f, &bounds, &cfg).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.history.len(), 2 * (cfg.iterations + 1));
        let seen = seen.into_inner().unwrap();
        assert_eq!(seen.len(), r.evaluations);
        for x in seen {
            for (v, (lo, hi)) in x.iter().zip(bounds) {
                assert!(*v >= lo && *v <= hi);
            }
        }
    }

    #[test]
    fn same_seed_same_result() {
        let cfg = PsoConfig { seed: 42, iterations: 50, ..Default::default() };
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] + 0.1).powi(4) + 0.1 * (5.0 * x[0]).cos();
        let a = minimize(f, &[(-1.0, 1.0); 2], &cfg).unwrap();
        let b = minimize(f, &[(-1.0, 1.0); 2], &cfg).unwrap();
        assert_eq!(a, b);
        let c = minimize(f, &[(-1.0, 1.0); 2], &PsoConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn early_stop_on_flat_objective() {
        let cfg = PsoConfig { tolerance: 1e-12, stall_iterations: 5, ..Default::default() };
        let r = minimize(|_: &[f64]| 1.0, &[(0.0, 1.0)], &cfg).unwrap();
        assert_eq!(r.history.len(), 6);
    }

    #[test]
    fn seeded_particle_is_used() {
        let cfg = PsoConfig { iterations: 0, ..Default::default() };
        let r = minimize_seeded(sphere, &[(-5.0, 5.0); 3], &cfg, &[vec![0.0; 3]]).unwrap();
        assert_eq!(r.best_value, 0.0);
    }

    #[test]
    fn errors() {
        let cfg = PsoConfig::default();
        assert!(matches!(minimize(sphere, &[(1.0, 1.0)], &cfg), Err(PsoError::InvalidBounds { dim: 0, .. })));
        assert!(matches!(
            minimize(|x: &[f64]| if x[0] > 0.0 { f64::NAN } else { 0.0 }, &[(-1.0, 1.0)], &cfg),
            Err(PsoError::NonFinite { .. })
        ));
        let bad = PsoConfig { swarm_size: 1, ..cfg };
        assert!(matches!(minimize(sphere, &[(0.0, 1.0)], &bad), Err(PsoError::InvalidConfig(_))));
        let bad = PsoConfig { inertia: 1.0, ..cfg };
        assert!(minimize(sphere, &[(0.0, 1.0)], &bad).is_err());
    }
}
