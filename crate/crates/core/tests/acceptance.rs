//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use golfbot_core::ball::*;
use golfbot_core::geometry::{Pose2D, Vec2};
use golfbot_core::learn::*;
use golfbot_core::play::*;
use golfbot_core::positioning::*;
use golfbot_core::pso::{minimize, PsoConfig};
use golfbot_core::stroke_ctrl::*;
use golfbot_core::stroke_ref::{ClubReference, StrokeRefParams};
use golfbot_core::surface::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C: f64 = 2.0 * 9.81 * 0.15;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn green() -> Rect {
    Rect::centered(2.0)
}

fn data_cfg() -> RolloutConfig {
    RolloutConfig { dt: 5e-3, ..Default::default() }
}

fn stroke_tracking() -> Verdict {
    let t = Instant::now();
    let p = StrokePlantParams::default();
    let sched = design_schedule(&p, &LqrWeights::default()).unwrap();
    let mut worst = 0.0f64;
    for rate in [2.0, 4.0, 6.0, 8.0, 10.0] {
        let r = StrokeRefParams::with_angular_rate(rate).unwrap();
        let res = simulate_stroke(&p, &sched, &r, &StrokeSimConfig::default()).unwrap();
        worst = worst.max(res.relative_impact_error().map_or(f64::INFINITY, f64::abs));
    }
    let el = secs(t.elapsed());
    verdict(
        worst <= 0.02 && el < 10.0,
        format!("worst impact-rate error {:.4}% over 2..10 rad/s, {el:.2} s", 100.0 * worst),
    )
}

fn schedule_soundness() -> Verdict {
    let t = Instant::now();
    let sched = design_schedule(&StrokePlantParams::default(), &LqrWeights::default()).unwrap();
    let el = secs(t.elapsed());
    let (mut max_re, mut max_res, mut max_obs) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for op in sched.points() {
        for pole in op.closed_loop_poles {
            max_re = max_re.max(pole.re);
        }
        max_res = max_res.max(op.riccati_residual);
        let mut got: Vec<f64> = op.observer_poles.iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        let mut want = op.observer_targets.to_vec();
        want.sort_by(f64::total_cmp);
        let mut want_from_cl: Vec<f64> = op.closed_loop_poles.iter().map(|z| 2.0 * z.re).collect();
        want_from_cl.sort_by(f64::total_cmp);
        if op.closed_loop_poles[0].im != 0.0 {
            let m = want_from_cl[0].min(want_from_cl[1]);
            want_from_cl = vec![m, m];
        }
        for k in 0..2 {
            let scale = want[k].abs().max(1.0);
            max_obs = max_obs
                .max((got[k] - want[k]).abs() / scale)
                .max((want[k] - want_from_cl[k]).abs() / scale)
                .max(op.observer_poles[k].im.abs() / scale);
        }
    }
    verdict(
        sched.len() == 629 && max_re < 0.0 && max_res < 1e-8 && max_obs < 1e-6 && el < 5.0,
        format!(
            "{} points, max Re(λ_cl) {max_re:.3}, max Riccati residual {max_res:.1e}, observer placement error {max_obs:.1e}, {el:.2} s",
            sched.len()
        ),
    )
}

fn ball_oracles() -> Verdict {
    let params = BallParams::default();
    let flat = SurfaceModel::flat(Rect::centered(5.0));
    let cfg = RolloutConfig::default();
    let mut stop_err = 0.0f64;
    for v in [0.5, 1.0, 2.0, 3.0] {
        let r = simulate(&params, &flat, None, BallState::new(0.0, 0.0, v, 0.0), &cfg).unwrap();
        stop_err = stop_err.max((r.final_position().x - v * v / C).abs());
    }

    let tilt = NamedSurface::TiltX01.build(green());
    let frictionless = BallParams { rolling_resistance: 0.0, ..params };
    let r = simulate(&frictionless, &tilt, None, BallState::new(1.0, 0.0, 0.0, 0.0), &RolloutConfig { t_max: 1.0, ..cfg })
        .unwrap();
    let acc = 9.81 * 0.1f64.atan().sin();
    let incline_err = r
        .samples
        .iter()
        .map(|s| {
            let x = 1.0 - 0.5 * acc * s.t * s.t;
            (s.state.x - x).abs() / x.abs()
        })
        .fold(0.0, f64::max);

    let mut geom_err = 0.0f64;
    let p0 = Vec2::new(0.3, -0.2);
    let base = simulate(&params, &flat, None, BallState::from_parts(p0, Vec2::new(1.7, 0.0)), &cfg).unwrap();
    for theta in [0.4, 1.9, -2.6] {
        let r = simulate(&params, &flat, None, BallState::from_parts(p0, Vec2::from_polar(1.7, theta)), &cfg).unwrap();
        let u = Vec2::from_polar(1.0, theta);
        for (a, b) in base.samples.iter().zip(&r.samples) {
            let rotated = p0 + (a.state.position() - p0).rotated(theta);
            geom_err = geom_err.max(rotated.distance(b.state.position()));
            geom_err = geom_err.max(u.cross(b.state.position() - p0).abs());
        }
        if r.samples.len() != base.samples.len() {
            geom_err = f64::INFINITY;
        }
    }
    verdict(
        stop_err < 1e-3 && incline_err < 1e-6 && geom_err < 1e-9,
        format!("stop distance error {stop_err:.1e} m, incline relative error {incline_err:.1e}, equivariance/straightness {geom_err:.1e} m"),
    )
}

fn reference_suite() -> Verdict {
    let (mut jump, mut rate_err, mut dur_err) = (0.0f64, 0.0f64, 0.0f64);
    for v in [0.6, 1.2, 2.4, 3.6, 4.8] {
        let p = StrokeRefParams::with_speed(v).unwrap();
        for tb in [0.0, p.strike_start(), p.strike_end(), p.end_time()] {
            let (a, b) = (p.at(tb), p.at(tb + tb.max(1.0) * f64::EPSILON));
            jump = jump.max((a.phi - b.phi).abs()).max((a.phidot - b.phidot).abs());
        }
        let w = p.at(p.zero_crossing_time());
        rate_err = rate_err.max((w.phidot - v / p.hit_length).abs());
        dur_err = dur_err.max((p.strike_duration() - p.lunge_angle * PI * p.hit_length / v).abs());
    }
    verdict(
        jump < 1e-12 && rate_err == 0.0 && dur_err < 1e-15,
        format!("max boundary jump {jump:.1e}, zero-crossing rate error {rate_err:.1e}, duration error {dur_err:.1e} s"),
    )
}

fn grid_points() -> Vec<Vec2> {
    let mut out = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            let b = Vec2::new(-1.5 + 0.75 * i as f64, -1.5 + 0.75 * j as f64);
            if b.norm() > 1e-9 {
                out.push(b);
            }
        }
    }
    out
}

struct FlatModels {
    inverse: StrokeModel,
    forward: StrokeModel,
}

fn inverse_planner(flat: &mut Option<FlatModels>) -> Verdict {
    let params = BallParams::default();
    let hole = Vec2::ZERO;

    let t = Instant::now();
    let s = SurfaceModel::flat(green());
    let ds = generate_training_strokes(&params, &s, None, &StrokeSampling::new(3000, green(), 1), &data_cfg()).unwrap();
    let gen_flat = secs(t.elapsed());
    let t = Instant::now();
    let inverse = train_inverse(&ds, &TrainConfig::default()).unwrap();
    let train_flat = secs(t.elapsed());
    let (mut speed_err, mut bearing_err) = (0.0f64, 0.0f64);
    for b in grid_points() {
        let v = plan_stroke_inverse(&inverse, b, hole).unwrap().v_s;
        let d = hole - b;
        let want = (C * d.norm()).sqrt();
        speed_err = speed_err.max((v.norm() - want).abs() / want);
        bearing_err = bearing_err.max(d.cross(v).atan2(d.dot(v)).abs().to_degrees());
    }
    let forward = train_forward(&ds, &TrainConfig::default()).unwrap();
    *flat = Some(FlatModels { inverse, forward });

    let t = Instant::now();
    let bowl = NamedSurface::Bowl005.build(green());
    let ds = generate_training_strokes(&params, &bowl, None, &StrokeSampling::new(3000, green(), 1), &data_cfg()).unwrap();
    let gen_bowl = secs(t.elapsed());
    let t = Instant::now();
    let bowl_inv = train_inverse(&ds, &TrainConfig::default()).unwrap();
    let train_bowl = secs(t.elapsed());
    let mut ring_miss = 0.0f64;
    for k in 0..8 {
        let b = Vec2::from_polar(1.0, k as f64 * PI / 4.0);
        let v = plan_stroke_inverse(&bowl_inv, b, hole).unwrap().v_s;
        let r = simulate(&params, &bowl, None, BallState::from_parts(b, v), &RolloutConfig::default()).unwrap();
        ring_miss = ring_miss.max(r.final_position().distance(hole));
    }

    let pass = speed_err < 0.05
        && bearing_err < 2.0
        && ring_miss <= 0.15
        && gen_flat.max(gen_bowl) < 10.0
        && train_flat.max(train_bowl) < 60.0;
    verdict(
        pass,
        format!(
            "flat speed {:.2}% bearing {bearing_err:.2}°, bowl ring miss {ring_miss:.3} m; generation {gen_flat:.1}/{gen_bowl:.1} s, training {train_flat:.1}/{train_bowl:.1} s",
            100.0 * speed_err
        ),
    )
}

fn planner_equivalence(flat: &FlatModels) -> Verdict {
    let hole = Vec2::ZERO;
    let (mut gap, mut t_inv, mut t_fwd) = (0.0f64, 0.0, 0.0);
    for b in grid_points() {
        let t = Instant::now();
        let i = plan_stroke_inverse(&flat.inverse, b, hole).unwrap();
        t_inv += secs(t.elapsed());
        let t = Instant::now();
        let f = plan_stroke_forward(&flat.forward, b, hole, &PsoConfig::default(), 4.0).unwrap();
        t_fwd += secs(t.elapsed());
        gap = gap.max((i.v_s - f.v_s).norm());
    }
    let ratio = t_inv / t_fwd;
    verdict(
        gap < 0.1 && ratio <= 0.01,
        format!("max |v_fwd − v_inv| {gap:.3} m/s, inverse/forward time {:.4}%", 100.0 * ratio),
    )
}

fn positioning() -> Verdict {
    let g = RobotGeom::default();
    let cfg = PositioningConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut pos, mut head) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let start = Pose2D::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-PI..PI));
        let seq = ControlSequence {
            steps: (0..cfg.steps).map(|_| [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)]).collect(),
        };
        let target = rollout_kinematics(&g, &start, &seq);
        let plan = plan_positioning(&g, &start, &target, &cfg).unwrap();
        let e = pose_error(&target, &rollout_kinematics(&g, &start, &plan.sequence));
        pos = pos.max(e[0].hypot(e[1]));
        head = head.max(e[2].abs());
    }
    let start = Pose2D::new(0.2, -0.1, 0.7);
    let zero = plan_positioning(&g, &start, &g.club_pose(&start), &cfg).unwrap();
    verdict(
        pos < 0.02 && head < 0.03 && zero.cost < 1e-6,
        format!("worst of 20: {pos:.1e} m, {head:.1e} rad; zero task J_p {:.1e}", zero.cost),
    )
}

fn end_to_end() -> Verdict {
    let t = Instant::now();
    let s = SurfaceModel::flat(green());
    let ds = generate_training_strokes(&BallParams::default(), &s, None, &StrokeSampling::new(3000, green(), 8), &data_cfg())
        .unwrap();
    let inverse = train_inverse(&ds, &TrainConfig::default()).unwrap();
    let cfg = PlayConfig::default();
    let sched = design_schedule(&cfg.plant, &LqrWeights::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let (mut captured, mut worst) = (0, 0.0f64);
    for _ in 0..25 {
        let hole = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let ball = hole + Vec2::from_polar(rng.random_range(0.3..1.5), rng.random_range(-PI..PI));
        let ball = Vec2::new(ball.x.clamp(-1.8, 1.8), ball.y.clamp(-1.8, 1.8));
        let robot = Pose2D::from_parts(
            ball + Vec2::from_polar(rng.random_range(0.3..1.0), rng.random_range(-PI..PI)),
            rng.random_range(-PI..PI),
        );
        let scenario = Scenario { ball, hole: HoleSpec::at(hole), robot_start: robot };
        match play_shot(&s, &inverse, &sched, &scenario, &cfg) {
            Ok(r) => {
                captured += r.captured as usize;
                worst = worst.max(r.final_distance_to_hole_m);
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    let el = secs(t.elapsed());
    verdict(
        captured >= 20 && worst <= 0.20 && el < 120.0,
        format!("{captured}/25 captured, worst final distance {worst:.3} m, {el:.1} s with training"),
    )
}

fn learning_internals() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut grad_err = 0.0f64;
    for (k, sizes) in [vec![4, 30, 2], vec![3, 7, 5, 2], vec![2, 4, 1]].into_iter().enumerate() {
        let net = Mlp::new_seeded(&sizes, k as u64).unwrap();
        let x = DMatrix::from_fn(6, sizes[0], |_, _| rng.random_range(-1.0..1.0));
        let y = DMatrix::from_fn(6, *sizes.last().unwrap(), |_, _| rng.random_range(-1.0..1.0));
        let (_, g) = net.loss_gradient(&x, &y);
        let p0 = net.params();
        for (i, gi) in g.iter().enumerate() {
            let h = 1e-6;
            let mut probe = net.clone();
            let mut p = p0.clone();
            p[i] = p0[i] + h;
            probe.set_params(&p);
            let up = probe.loss(&x, &y);
            p[i] = p0[i] - h;
            probe.set_params(&p);
            let fd = (up - probe.loss(&x, &y)) / (2.0 * h);
            grad_err = grad_err.max((fd - gi).abs() / fd.abs().max(gi.abs()).max(1e-3));
        }
    }

    let cfg = PsoConfig::default();
    let sphere = minimize(|x: &[f64]| x.iter().map(|v| v * v).sum(), &[(-5.0, 5.0); 4], &cfg).unwrap();
    let rosen = minimize(
        |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
        &[(-2.0, 2.0); 2],
        &cfg,
    )
    .unwrap();
    let pso_ok = sphere.best_value < 1e-8
        && (rosen.best_position[0] - 1.0).abs() < 1e-2
        && (rosen.best_position[1] - 1.0).abs() < 1e-2;

    let csv_bytes = || {
        let ds = generate_training_strokes(
            &BallParams::default(),
            &NamedSurface::Bowl005.build(green()),
            None,
            &StrokeSampling::new(300, green(), 99),
            &data_cfg(),
        )
        .unwrap();
        let mut out = Vec::new();
        ds.write_csv(&mut out).unwrap();
        let r = StrokeRefParams::with_angular_rate(6.0).unwrap();
        let p = StrokePlantParams::default();
        let sched = design_schedule(&p, &LqrWeights::default()).unwrap();
        simulate_stroke(&p, &sched, &r, &StrokeSimConfig::default()).unwrap().write_csv(&mut out).unwrap();
        let g = RobotGeom::default();
        let plan = plan_positioning(&g, &Pose2D::IDENTITY, &Pose2D::new(1.0, 0.5, 2.0), &PositioningConfig::default())
            .unwrap();
        plan.sequence.write_csv(&mut out).unwrap();
        out
    };
    let identical = csv_bytes() == csv_bytes();
    verdict(
        grad_err < 1e-5 && pso_ok && identical,
        format!(
            "gradient check {grad_err:.1e}, PSO sphere {:.1e} rosenbrock ({:.4}, {:.4}), CSV byte-identical: {identical}",
            sphere.best_value, rosen.best_position[0], rosen.best_position[1]
        ),
    )
}

// Runs without the libtest harness so the PASS/FAIL lines are always shown.
fn main() {
    let mut flat = None;
    let results = vec![
        ("1 stroke tracking", stroke_tracking()),
        ("2 controller/observer soundness", schedule_soundness()),
        ("3 ball dynamics oracles", ball_oracles()),
        ("4 reference trajectory suite", reference_suite()),
        ("5 inverse planner", inverse_planner(&mut flat)),
        ("6 forward+PSO vs inverse", planner_equivalence(flat.as_ref().unwrap())),
        ("7 positioning", positioning()),
        ("8 end-to-end play", end_to_end()),
        ("9 learning internals", learning_internals()),
    ];
    for (name, v) in &results {
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    let failed: Vec<_> = results.iter().filter(|(_, v)| !v.pass).map(|(n, _)| *n).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
