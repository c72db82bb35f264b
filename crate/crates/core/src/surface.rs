//! Green surface model: a tensor-product polynomial height field fitted to a
//! point cloud by linear least squares.
//!
//! The model is `z = Σ c[i][j] · x^i · y^j` over `0 ≤ i ≤ dx`, `0 ≤ j ≤ dy`,
//! in I-frame metres. Partials come from differentiating the coefficients, so
//! slope angles are exact for the fitted polynomial.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("need at least {needed} points for degree ({dx}, {dy}), got {got}")]
    TooFewPoints { needed: usize, got: usize, dx: usize, dy: usize },
    #[error("regression matrix is rank deficient: rank {rank} of {columns} basis functions (points do not span the degree ({dx}, {dy}) basis)")]
    RankDeficient { rank: usize, columns: usize, dx: usize, dy: usize },
    #[error("point {index} ({x}, {y}) lies outside the green bounds")]
    PointOutOfBounds { index: usize, x: f64, y: f64 },
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("expected {expected} coefficients for degree ({dx}, {dy}), got {got}")]
    CoefficientCount { expected: usize, got: usize, dx: usize, dy: usize },
    #[error("non-finite surface coefficient at index {0}")]
    NonFiniteCoefficient(usize),
    #[error("point cloud CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("surface JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("I/O on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Axis-aligned rectangle in the I frame (metres).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self, SurfaceError> {
        let r = Self { x_min, x_max, y_min, y_max };
        r.validate()?;
        Ok(r)
    }

    /// Square `[-half, half]²`.
    pub fn centered(half: f64) -> Self {
        Self { x_min: -half, x_max: half, y_min: -half, y_max: half }
    }

    pub fn validate(&self) -> Result<(), SurfaceError> {
        let all_finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(SurfaceError::InvalidBounds(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Nearest point inside the rectangle and whether clamping was needed.
    pub fn clamp(&self, p: Vec2) -> (Vec2, bool) {
        let q = Vec2::new(p.x.clamp(self.x_min, self.x_max), p.y.clamp(self.y_min, self.y_max));
        (q, q != p)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }
}

/// Raw `(x, y, z)` samples of the green, metres.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
struct CloudRow {
    x: f64,
    y: f64,
    z: f64,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Self {
        Self { points }
    }

    /// Samples `f` on an `nx × ny` grid spanning `bounds` (edges included).
    pub fn sample_grid(bounds: &Rect, nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut points = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let x = lerp(bounds.x_min, bounds.x_max, i, nx);
            for j in 0..ny {
                let y = lerp(bounds.y_min, bounds.y_max, j, ny);
                points.push([x, y, f(x, y)]);
            }
        }
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reads `x,y,z` CSV with a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, SurfaceError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for row in rdr.deserialize::<CloudRow>() {
            let row = row?;
            points.push([row.x, row.y, row.z]);
        }
        Ok(Self { points })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, SurfaceError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|source| SurfaceError::Io { path: path.display().to_string(), source })?;
        Self::from_csv_reader(file)
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<(), SurfaceError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for p in &self.points {
            wtr.serialize(CloudRow { x: p[0], y: p[1], z: p[2] })?;
        }
        wtr.flush().map_err(|source| SurfaceError::Io { path: "<writer>".into(), source })?;
        Ok(())
    }
}

fn lerp(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// Residual statistics of a surface fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub points: usize,
    pub rms_residual: f64,
    pub max_abs_residual: f64,
    pub rank: usize,
}

/// Slope angles `α_x = atan(∂f/∂x)`, `α_y = atan(∂f/∂y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeAngles {
    pub alpha_x: f64,
    pub alpha_y: f64,
}

/// Full evaluation at one query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub height: f64,
    pub gradient: Vec2,
    /// The query lay outside the bounds and was clamped onto them.
    pub clamped: bool,
}

impl SurfaceSample {
    pub fn slope_angles(&self) -> SlopeAngles {
        SlopeAngles { alpha_x: self.gradient.x.atan(), alpha_y: self.gradient.y.atan() }
    }
}

/// Immutable polynomial height field over a rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SurfaceModelRepr", into = "SurfaceModelRepr")]
pub struct SurfaceModel {
    degree: (usize, usize),
    bounds: Rect,
    /// Row-major `(dx+1) × (dy+1)`; entry `[i][j]` multiplies `x^i y^j`.
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SurfaceModelRepr {
    degree: (usize, usize),
    bounds: Rect,
    coeffs: Vec<f64>,
}

impl TryFrom<SurfaceModelRepr> for SurfaceModel {
    type Error = SurfaceError;
    fn try_from(r: SurfaceModelRepr) -> Result<Self, SurfaceError> {
        SurfaceModel::from_coeffs(r.degree, r.bounds, r.coeffs)
    }
}

impl From<SurfaceModel> for SurfaceModelRepr {
    fn from(m: SurfaceModel) -> Self {
        Self { degree: m.degree, bounds: m.bounds, coeffs: m.coeffs }
    }
}

impl SurfaceModel {
    pub fn from_coeffs(
        degree: (usize, usize),
        bounds: Rect,
        coeffs: Vec<f64>,
    ) -> Result<Self, SurfaceError> {
        bounds.validate()?;
        let expected = (degree.0 + 1) * (degree.1 + 1);
        if coeffs.len() != expected {
            return Err(SurfaceError::CoefficientCount {
                expected,
                got: coeffs.len(),
                dx: degree.0,
                dy: degree.1,
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(SurfaceError::NonFiniteCoefficient(i));
        }
        Ok(Self { degree, bounds, coeffs })
    }

    /// Builds a model from a closure returning `c[i][j]` for each term.
    pub fn from_terms(
        degree: (usize, usize),
        bounds: Rect,
        term: impl Fn(usize, usize) -> f64,
    ) -> Result<Self, SurfaceError> {
        let mut coeffs = Vec::with_capacity((degree.0 + 1) * (degree.1 + 1));
        for i in 0..=degree.0 {
            for j in 0..=degree.1 {
                coeffs.push(term(i, j));
            }
        }
        Self::from_coeffs(degree, bounds, coeffs)
    }

    pub fn flat(bounds: Rect) -> Self {
        Self { degree: (0, 0), bounds, coeffs: vec![0.0] }
    }

    pub fn degree(&self) -> (usize, usize) {
        self.degree
    }

    pub fn bounds(&self) -> &Rect {
        &self.bounds
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^i y^j`.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i * (self.degree.1 + 1) + j]
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.bounds.contains(p)
    }

    /// Height, gradient and clamp flag at `p`. Out-of-bounds queries are
    /// evaluated at the nearest in-bounds point.
    pub fn sample(&self, p: Vec2) -> SurfaceSample {
        let (q, clamped) = self.bounds.clamp(p);
        let (dx, dy) = self.degree;
        let xp = powers(q.x, dx);
        let yp = powers(q.y, dy);
        let mut z = 0.0;
        let mut fx = 0.0;
        let mut fy = 0.0;
        for i in 0..=dx {
            for j in 0..=dy {
                let c = self.coeff(i, j);
                if c == 0.0 {
                    continue;
                }
                z += c * xp[i] * yp[j];
                if i > 0 {
                    fx += c * i as f64 * xp[i - 1] * yp[j];
                }
                if j > 0 {
                    fy += c * j as f64 * xp[i] * yp[j - 1];
                }
            }
        }
        SurfaceSample { height: z, gradient: Vec2::new(fx, fy), clamped }
    }

    pub fn height(&self, p: Vec2) -> f64 {
        self.sample(p).height
    }

    /// Analytic `(∂f/∂x, ∂f/∂y)`.
    pub fn gradient(&self, p: Vec2) -> Vec2 {
        self.sample(p).gradient
    }

    pub fn slope_angles(&self, p: Vec2) -> SlopeAngles {
        self.sample(p).slope_angles()
    }

    pub fn to_json(&self) -> Result<String, SurfaceError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, SurfaceError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self, SurfaceError> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path)
            .map_err(|source| SurfaceError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&s)
    }
}

fn powers(v: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 1.0;
    for _ in 0..=n {
        out.push(acc);
        acc *= v;
    }
    out
}

/// Least-squares fit of a degree `(dx, dy)` tensor-product polynomial.
pub fn fit_surface(
    cloud: &PointCloud,
    degree: (usize, usize),
    bounds: Rect,
) -> Result<(SurfaceModel, FitReport), SurfaceError> {
    bounds.validate()?;
    let (dx, dy) = degree;
    let columns = (dx + 1) * (dy + 1);
    let n = cloud.len();
    if n < columns {
        return Err(SurfaceError::TooFewPoints { needed: columns, got: n, dx, dy });
    }
    for (index, p) in cloud.points.iter().enumerate() {
        if !p.iter().all(|v| v.is_finite()) {
            return Err(SurfaceError::NonFinitePoint { index });
        }
        if !bounds.contains(Vec2::new(p[0], p[1])) {
            return Err(SurfaceError::PointOutOfBounds { index, x: p[0], y: p[1] });
        }
    }

    let mut design = DMatrix::<f64>::zeros(n, columns);
    let mut rhs = DVector::<f64>::zeros(n);
    for (r, p) in cloud.points.iter().enumerate() {
        let xp = powers(p[0], dx);
        let yp = powers(p[1], dy);
        for i in 0..=dx {
            for j in 0..=dy {
                design[(r, i * (dy + 1) + j)] = xp[i] * yp[j];
            }
        }
        rhs[r] = p[2];
    }

    // Column equilibration before the SVD keeps the rank test scale-free.
    let scales: Vec<f64> = (0..columns)
        .map(|c| {
            let s = design.column(c).norm();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = design.clone();
    for (c, s) in scales.iter().enumerate() {
        scaled.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = scaled.svd(true, true);
    let s_max = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * s_max).count();
    if rank < columns {
        return Err(SurfaceError::RankDeficient { rank, columns, dx, dy });
    }
    let y = svd
        .solve(&rhs, 0.0)
        .map_err(|_| SurfaceError::RankDeficient { rank, columns, dx, dy })?;
    let coeffs: Vec<f64> = y.iter().zip(&scales).map(|(v, s)| v / s).collect();

    let fitted = &design * DVector::from_column_slice(&coeffs);
    let residuals = &rhs - fitted;
    let rms = (residuals.norm_squared() / n as f64).sqrt();
    let max_abs = residuals.amax();
    let model = SurfaceModel::from_coeffs(degree, bounds, coeffs)?;
    Ok((model, FitReport { points: n, rms_residual: rms, max_abs_residual: max_abs, rank }))
}

/// Built-in analytic test surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedSurface {
    /// `z = 0`
    Flat,
    /// `z = 0.1 x`
    TiltX01,
    /// `z = 0.05 (x² + y²)`
    Bowl005,
}

impl NamedSurface {
    pub const ALL: [NamedSurface; 3] = [Self::Flat, Self::TiltX01, Self::Bowl005];

    pub fn name(self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::TiltX01 => "tilt_x_01",
            Self::Bowl005 => "bowl_005",
        }
    }

    pub fn height(self, x: f64, y: f64) -> f64 {
        match self {
            Self::Flat => 0.0,
            Self::TiltX01 => 0.1 * x,
            Self::Bowl005 => 0.05 * (x * x + y * y),
        }
    }

    pub fn build(self, bounds: Rect) -> SurfaceModel {
        let model = match self {
            Self::Flat => return SurfaceModel::flat(bounds),
            Self::TiltX01 => SurfaceModel::from_terms((1, 0), bounds, |i, _| if i == 1 { 0.1 } else { 0.0 }),
            Self::Bowl005 => SurfaceModel::from_terms((2, 2), bounds, |i, j| match (i, j) {
                (2, 0) | (0, 2) => 0.05,
                _ => 0.0,
            }),
        };
        model.expect("built-in surface coefficients are valid")
    }
}

impl std::str::FromStr for NamedSurface {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| format!("unknown surface `{s}` (expected flat, tilt_x_01 or bowl_005)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn green() -> Rect {
        Rect::centered(2.0)
    }

    #[test]
    fn constant_plane_fit() {
        let cloud = PointCloud::sample_grid(&green(), 10, 10, |_, _| 0.02);
        let (m, rep) = fit_surface(&cloud, (1, 1), green()).unwrap();
        assert!(rep.rms_residual < 1e-12);
        assert_abs_diff_eq!(m.coeff(0, 0), 0.02, epsilon = 1e-13);
        assert_abs_diff_eq!(m.height(Vec2::new(0.7, -1.3)), 0.02, epsilon = 1e-13);
    }

    #[test]
    fn tilted_plane_fit_has_exact_gradient() {
        let cloud = PointCloud::sample_grid(&green(), 10, 10, |x, _| 0.1 * x);
        let (m, rep) = fit_surface(&cloud, (1, 1), green()).unwrap();
        assert!(rep.rms_residual < 1e-12);
        for p in [Vec2::new(0.0, 0.0), Vec2::new(1.5, -1.9), Vec2::new(-2.0, 2.0)] {
            let g = m.gradient(p);
            assert_abs_diff_eq!(g.x, 0.1, epsilon = 1e-12);
            assert_abs_diff_eq!(g.y, 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(m.height(Vec2::new(1.0, 3.0)), 0.1, epsilon = 1e-12);
        let a = m.slope_angles(Vec2::new(0.3, 0.3));
        assert_abs_diff_eq!(a.alpha_x, 0.1f64.atan(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.alpha_x, 0.09967, epsilon = 1e-5);
        assert_abs_diff_eq!(a.alpha_y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn noisy_bowl_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.001).unwrap();
        let points = (0..400)
            .map(|_| {
                let x = rng.random_range(-2.0..=2.0);
                let y = rng.random_range(-2.0..=2.0);
                [x, y, 0.05 * (x * x + y * y) + noise.sample(&mut rng)]
            })
            .collect();
        let (m, rep) = fit_surface(&PointCloud::new(points), (2, 2), green()).unwrap();
        assert!(rep.rms_residual <= 0.002, "rms {}", rep.rms_residual);
        assert_abs_diff_eq!(m.height(Vec2::new(1.0, 1.0)), 0.1, epsilon = 2e-3);
        let a = m.slope_angles(Vec2::new(1.0, 0.0));
        assert_abs_diff_eq!(a.alpha_x, 0.1f64.atan(), epsilon = 3e-3);
        assert_abs_diff_eq!(a.alpha_y, 0.0, epsilon = 3e-3);
    }

    #[test]
    fn exact_bowl_slope() {
        let m = NamedSurface::Bowl005.build(green());
        let a = m.slope_angles(Vec2::new(1.0, 0.0));
        assert_abs_diff_eq!(a.alpha_x, 0.1f64.atan(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.alpha_y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.height(Vec2::new(1.0, 1.0)), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn flat_model_is_zero_everywhere() {
        let m = SurfaceModel::flat(green());
        assert_eq!(m.height(Vec2::new(0.4, 1.1)), 0.0);
        let a = m.slope_angles(Vec2::new(-1.0, 1.0));
        assert_eq!((a.alpha_x, a.alpha_y), (0.0, 0.0));
    }

    #[test]
    fn rank_deficient_cloud_is_rejected() {
        // All points on the line y = 0 cannot determine y-dependence.
        let points = (0..20).map(|i| [i as f64 * 0.1 - 1.0, 0.0, 0.0]).collect();
        let err = fit_surface(&PointCloud::new(points), (1, 1), green()).unwrap_err();
        match err {
            SurfaceError::RankDeficient { rank, columns, .. } => {
                assert_eq!(columns, 4);
                assert_eq!(rank, 2);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn too_few_points() {
        let cloud = PointCloud::new(vec![[0.0, 0.0, 0.0]; 3]);
        assert!(matches!(
            fit_surface(&cloud, (1, 1), green()),
            Err(SurfaceError::TooFewPoints { needed: 4, got: 3, .. })
        ));
    }

    #[test]
    fn out_of_bounds_query_is_clamped_and_flagged() {
        let m = NamedSurface::TiltX01.build(green());
        let s = m.sample(Vec2::new(3.0, 0.0));
        assert!(s.clamped);
        assert_abs_diff_eq!(s.height, 0.2, epsilon = 1e-15);
        assert!(!m.sample(Vec2::new(2.0, 0.0)).clamped);
    }

    #[test]
    fn polynomial_of_same_degree_is_recovered() {
        let truth = SurfaceModel::from_terms((3, 3), green(), |i, j| {
            0.01 * ((i * 4 + j) as f64 - 7.0) / (1.0 + (i + j) as f64)
        })
        .unwrap();
        let cloud = PointCloud::sample_grid(&green(), 9, 9, |x, y| truth.height(Vec2::new(x, y)));
        let (m, rep) = fit_surface(&cloud, (3, 3), green()).unwrap();
        assert!(rep.rms_residual < 1e-13);
        for (a, b) in m.coeffs().iter().zip(truth.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn analytic_partials_match_finite_differences() {
        let truth = SurfaceModel::from_terms((3, 3), green(), |i, j| {
            0.02 * (((i * 7 + j * 3) % 5) as f64 - 2.0) / (1.0 + (i * j) as f64)
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-5;
        for _ in 0..100 {
            let p = Vec2::new(rng.random_range(-1.9..1.9), rng.random_range(-1.9..1.9));
            let g = truth.gradient(p);
            let fx = (truth.height(p + Vec2::new(h, 0.0)) - truth.height(p - Vec2::new(h, 0.0))) / (2.0 * h);
            let fy = (truth.height(p + Vec2::new(0.0, h)) - truth.height(p - Vec2::new(0.0, h))) / (2.0 * h);
            assert!((g.x - fx).abs() <= 1e-6 * g.x.abs().max(1e-3), "{} vs {fx}", g.x);
            assert!((g.y - fy).abs() <= 1e-6 * g.y.abs().max(1e-3), "{} vs {fy}", g.y);
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = NamedSurface::Bowl005.build(green());
        let back = SurfaceModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"degree":[1,1],"bounds":{"x_min":-1,"x_max":1,"y_min":-1,"y_max":1},"coeffs":[0,0,0]}"#;
        assert!(SurfaceModel::from_json(bad).is_err());
    }

    #[test]
    fn csv_cloud_round_trip() {
        let cloud = PointCloud::sample_grid(&green(), 3, 3, |x, y| x * y);
        let mut buf = Vec::new();
        cloud.to_csv_writer(&mut buf).unwrap();
        assert!(std::str::from_utf8(&buf).unwrap().starts_with("x,y,z\n"));
        assert_eq!(PointCloud::from_csv_reader(buf.as_slice()).unwrap(), cloud);
    }

    #[test]
    fn named_surface_parse() {
        assert_eq!("bowl_005".parse::<NamedSurface>().unwrap(), NamedSurface::Bowl005);
        assert!("hill".parse::<NamedSurface>().is_err());
    }
}
