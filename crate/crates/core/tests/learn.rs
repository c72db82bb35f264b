use std::sync::OnceLock;

use golfbot_core::ball::*;
use golfbot_core::geometry::Vec2;
use golfbot_core::learn::*;
use golfbot_core::pso::PsoConfig;
use golfbot_core::surface::*;

const C: f64 = 2.0 * 9.81 * 0.15;

fn flat_data() -> &'static StrokeDataset {
    static DS: OnceLock<StrokeDataset> = OnceLock::new();
    DS.get_or_init(|| {
        let green = Rect::centered(2.0);
        let cfg = RolloutConfig { dt: 5e-3, ..Default::default() };
        generate_training_strokes(&BallParams::default(), &SurfaceModel::flat(green), None, &StrokeSampling::new(3000, green, 21), &cfg)
            .unwrap()
    })
}

fn inverse() -> &'static StrokeModel {
    static M: OnceLock<StrokeModel> = OnceLock::new();
    M.get_or_init(|| train_inverse(flat_data(), &TrainConfig::default()).unwrap())
}

fn forward() -> &'static StrokeModel {
    static M: OnceLock<StrokeModel> = OnceLock::new();
    M.get_or_init(|| train_forward(flat_data(), &TrainConfig::default()).unwrap())
}

#[test]
fn inverse_one_metre_east() {
    let p = plan_stroke_inverse(inverse(), Vec2::new(-0.5, 0.2), Vec2::new(0.5, 0.2)).unwrap();
    let v = C.sqrt();
    assert!((p.v_s.norm() - v).abs() / v < 0.05, "{:?}", p.v_s);
    assert!(p.v_s.y.atan2(p.v_s.x).abs().to_degrees() < 2.0);
    assert!(p.in_domain);
}

#[test]
fn inverse_bearing_within_two_degrees() {
    let hole = Vec2::new(0.1, -0.2);
    for k in 0..12 {
        let ball = hole + Vec2::from_polar(0.4 + 0.1 * k as f64, 0.52 * k as f64);
        let p = plan_stroke_inverse(inverse(), ball, hole).unwrap();
        let d = hole - ball;
        let err = d.cross(p.v_s).atan2(d.dot(p.v_s)).abs().to_degrees();
        assert!(err < 2.0, "ball {ball:?}: {err}°");
    }
}

#[test]
fn inverse_zero_distance_gives_a_tap() {
    let p = plan_stroke_inverse(inverse(), Vec2::new(0.3, 0.3), Vec2::new(0.3, 0.3)).unwrap();
    assert!(p.v_s.norm() <= 0.15, "{:?}", p.v_s);
}

#[test]
fn inverse_is_mirror_symmetric_about_the_hole() {
    let hole = Vec2::ZERO;
    for b in [Vec2::new(0.8, 0.3), Vec2::new(-0.4, 1.1), Vec2::new(1.2, -0.9)] {
        let a = plan_stroke_inverse(inverse(), b, hole).unwrap().v_s;
        let m = plan_stroke_inverse(inverse(), -b, hole).unwrap().v_s;
        assert!((a + m).norm() <= 0.05 * a.norm(), "{a:?} vs {m:?}");
    }
}

#[test]
fn forward_model_accuracy() {
    let m = forward();
    assert!(m.validation_rmse.iter().all(|r| *r <= 0.05), "{:?}", m.validation_rmse);
    let rows = &flat_data().rows[..200];
    let mean_err: f64 = rows
        .iter()
        .map(|r| {
            let s = r.start;
            let p = m.predict(&[s.x, s.y, s.xdot, s.ydot]);
            Vec2::new(p[0], p[1]).distance(r.end)
        })
        .sum::<f64>()
        / rows.len() as f64;
    assert!(mean_err < 2.0 * m.validation_rmse[0].hypot(m.validation_rmse[1]));
}

#[test]
fn forward_planner_matches_analytic_and_inverse() {
    let ball = Vec2::new(-0.5, 0.0);
    let hole = Vec2::new(0.5, 0.0);
    let f = plan_stroke_forward(forward(), ball, hole, &PsoConfig::default(), 4.0).unwrap();
    let v = C.sqrt();
    assert!((f.v_s - Vec2::new(v, 0.0)).norm() < 0.05 * v, "{:?}", f.v_s);
    let i = plan_stroke_inverse(inverse(), ball, hole).unwrap();
    assert!((f.v_s - i.v_s).norm() < 0.1);
    let tap = plan_stroke_forward(forward(), ball, ball, &PsoConfig::default(), 4.0).unwrap();
    assert!(tap.v_s.norm() <= 0.15, "{:?}", tap.v_s);
}

#[test]
fn same_seed_same_weights() {
    let ds = StrokeDataset { rows: flat_data().rows[..300].to_vec() };
    let cfg = TrainConfig { epochs: 15, seed: 4, ..Default::default() };
    let a = train_inverse(&ds, &cfg).unwrap();
    let b = train_inverse(&ds, &cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let c = train_inverse(&ds, &TrainConfig { seed: 5, ..cfg }).unwrap();
    assert_ne!(a.model, c.model);
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inverse.json");
    inverse().write_json(&path).unwrap();
    let back = StrokeModel::read_json(&path).unwrap();
    let q = [0.2, -0.7, 1.0, 0.4];
    assert_eq!(back.predict(&q), inverse().predict(&q));
    assert_eq!(back.kind, ModelKind::Inverse);
}

#[test]
fn out_of_range_queries_are_flagged() {
    let p = plan_stroke_inverse(inverse(), Vec2::new(0.0, 0.0), Vec2::new(9.0, 0.0)).unwrap();
    assert!(!p.in_domain);
}
