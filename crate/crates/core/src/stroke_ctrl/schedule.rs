//! Gain-scheduled LQR, feedforward and observer design over a grid of club
//! angles.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, RowVector2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::plant::{linearize, LinearModel, StrokePlantParams};
use super::riccati::{care_residual, solve_care};
use super::StrokeError;
use crate::par;

/// LQR weights `Q` (2×2) and scalar `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LqrWeights {
    pub q: [[f64; 2]; 2],
    pub r: f64,
}

impl Default for LqrWeights {
    fn default() -> Self {
        Self { q: [[5.0, 0.0], [0.0, 1.0]], r: 1.0 }
    }
}

/// Grid of linearisation angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleGrid {
    pub phi_min: f64,
    pub phi_max: f64,
    pub step: f64,
}

impl Default for ScheduleGrid {
    fn default() -> Self {
        Self { phi_min: -PI, phi_max: PI, step: 0.01 }
    }
}

impl ScheduleGrid {
    pub fn len(&self) -> usize {
        ((self.phi_max - self.phi_min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angle(&self, i: usize) -> f64 {
        self.phi_min + i as f64 * self.step
    }
}

/// Controller, feedforward and observer gains for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub phi: f64,
    pub model: LinearModel,
    /// State feedback `u_c = −k·(x̂ − x*)`.
    pub k: Vector2<f64>,
    /// Feedforward `u* = F_u·w`.
    pub f_u: Vector2<f64>,
    /// Observer output-injection gain.
    pub l: Vector2<f64>,
    pub closed_loop_poles: [Complex64; 2],
    /// Poles requested for the observer error dynamics.
    pub observer_targets: [f64; 2],
    /// Realised eigenvalues of `A − L cᵀ`.
    pub observer_poles: [Complex64; 2],
    pub riccati_residual: f64,
}

/// Immutable table of [`OperatingPoint`]s on a uniform grid.
#[derive(Debug, Clone)]
pub struct GainSchedule {
    grid: ScheduleGrid,
    points: Vec<OperatingPoint>,
}

impl GainSchedule {
    pub fn grid(&self) -> &ScheduleGrid {
        &self.grid
    }

    pub fn points(&self) -> &[OperatingPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `argmin_i |φ − φ_Ri|` on the uniform grid.
    pub fn index_for(&self, phi: f64) -> usize {
        let raw = ((phi - self.grid.phi_min) / self.grid.step).round();
        if raw.is_nan() || raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.points.len() - 1)
        }
    }

    pub fn point_for(&self, phi: f64) -> &OperatingPoint {
        &self.points[self.index_for(phi)]
    }
}

/// Eigenvalues of a real 2×2 matrix.
pub fn eig2(m: &Matrix2<f64>) -> [Complex64; 2] {
    let half_tr = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let det = m.determinant();
    let disc = half_tr * half_tr - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // Avoid cancellation in the smaller root.
        let big = if half_tr >= 0.0 { half_tr + s } else { half_tr - s };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (lo, hi) = if big < small { (big, small) } else { (small, big) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(half_tr, -s), Complex64::new(half_tr, s)]
    }
}

/// Observer gain placing the eigenvalues of `A − L cᵀ` at `poles`
/// (Ackermann's formula on the dual pair).
pub fn place_observer(a: &Matrix2<f64>, c: &Vector2<f64>, poles: [f64; 2]) -> Option<Vector2<f64>> {
    let ct = RowVector2::new(c[0], c[1]);
    let obs = Matrix2::from_rows(&[ct, ct * a]);
    let obs_inv = obs.try_inverse()?;
    let sum = poles[0] + poles[1];
    let prod = poles[0] * poles[1];
    let char_poly = a * a - a * sum + Matrix2::identity() * prod;
    Some(char_poly * obs_inv * Vector2::new(0.0, 1.0))
}

/// Observer targets: twice the closed-loop poles, real parts only.
fn observer_targets(cl: &[Complex64; 2]) -> [f64; 2] {
    if cl[0].im != 0.0 || cl[1].im != 0.0 {
        let re = 2.0 * cl[0].re.min(cl[1].re);
        [re, re]
    } else {
        [2.0 * cl[0].re, 2.0 * cl[1].re]
    }
}

fn design_point(p: &StrokePlantParams, w: &LqrWeights, phi: f64) -> Result<OperatingPoint, StrokeError> {
    let model = linearize(p, phi);
    let a = DMatrix::from_row_slice(2, 2, model.a.as_slice()).transpose();
    let b = DMatrix::from_column_slice(2, 1, model.b.as_slice());
    let q = DMatrix::from_row_slice(2, 2, &[w.q[0][0], w.q[0][1], w.q[1][0], w.q[1][1]]);
    let r = DMatrix::from_element(1, 1, w.r);
    let riccati = solve_care(&a, &b, &q, &r).map_err(|source| StrokeError::Riccati { phi, source })?;
    let residual = care_residual(&a, &b, &q, &r, &riccati);
    let k_row = b.transpose() * &riccati / w.r;
    let k = Vector2::new(k_row[(0, 0)], k_row[(0, 1)]);

    let closed = model.a - model.b * k.transpose();
    let closed_loop_poles = eig2(&closed);
    if closed_loop_poles.iter().any(|l| !(l.re < 0.0)) {
        return Err(StrokeError::NotHurwitz { phi });
    }

    let b21 = model.b[1];
    let f_u = -Vector2::new(model.a[(1, 0)], model.a[(1, 1)]) / b21;

    let targets = observer_targets(&closed_loop_poles);
    let l = place_observer(&model.a, &model.c, targets).ok_or(StrokeError::Unobservable { phi })?;
    let observer_poles = eig2(&(model.a - l * model.c.transpose()));

    Ok(OperatingPoint {
        phi,
        model,
        k,
        f_u,
        l,
        closed_loop_poles,
        observer_targets: targets,
        observer_poles,
        riccati_residual: residual,
    })
}

/// Designs the full schedule on the default grid (`[−π, π]`, 0.01 rad).
pub fn design_schedule(p: &StrokePlantParams, weights: &LqrWeights) -> Result<GainSchedule, StrokeError> {
    design_schedule_on(p, weights, ScheduleGrid::default())
}

pub fn design_schedule_on(
    p: &StrokePlantParams,
    weights: &LqrWeights,
    grid: ScheduleGrid,
) -> Result<GainSchedule, StrokeError> {
    p.validate()?;
    if !(grid.step > 0.0 && grid.phi_max >= grid.phi_min) {
        return Err(StrokeError::InvalidConfig(format!("bad schedule grid {grid:?}")));
    }
    if !(weights.r > 0.0) {
        return Err(StrokeError::InvalidConfig(format!("R must be positive, got {}", weights.r)));
    }
    let points = par::try_map_range(grid.len(), |i| design_point(p, weights, grid.angle(i)))?;
    Ok(GainSchedule { grid, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_size() {
        let g = ScheduleGrid::default();
        assert_eq!(g.len(), 629);
        assert!(g.angle(628) <= PI);
    }

    #[test]
    fn feedforward_at_hanging_point() {
        let p = StrokePlantParams::default();
        let s = design_schedule_on(&p, &LqrWeights::default(), ScheduleGrid { phi_min: 0.0, phi_max: 0.0, step: 0.01 })
            .unwrap();
        let op = s.points()[0];
        assert_abs_diff_eq!(op.f_u[0], 0.60437, epsilon = 1e-4);
        assert_abs_diff_eq!(op.f_u[1], 0.0033, epsilon = 1e-4);
        assert_abs_diff_eq!(op.f_u[0], 0.5241 * 9.81 * 0.4702 / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn observer_placement_hits_targets() {
        let a = Matrix2::new(0.0, 1.0, -16.7, -0.09);
        let c = Vector2::new(1.0, 0.0);
        let l = place_observer(&a, &c, [-5.0, -50.0]).unwrap();
        let e = eig2(&(a - l * c.transpose()));
        assert_abs_diff_eq!(e[0].re, -50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(e[1].re, -5.0, epsilon = 1e-9);
    }

    #[test]
    fn complex_closed_loop_maps_to_double_real_pole() {
        let t = observer_targets(&[Complex64::new(-1.0, -2.0), Complex64::new(-1.0, 2.0)]);
        assert_eq!(t, [-2.0, -2.0]);
    }

    #[test]
    fn nearest_index() {
        let s = design_schedule(&StrokePlantParams::default(), &LqrWeights::default()).unwrap();
        assert_eq!(s.index_for(-10.0), 0);
        assert_eq!(s.index_for(10.0), 628);
        let i = s.index_for(0.004);
        let best = (0..s.len())
            .min_by(|&a, &b| (s.points()[a].phi - 0.004).abs().total_cmp(&(s.points()[b].phi - 0.004).abs()))
            .unwrap();
        assert_eq!(i, best);
    }
}
