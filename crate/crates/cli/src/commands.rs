use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use golfbot_core::ball::{generate_training_strokes, StrokeDataset};
use golfbot_core::geometry::Vec2;
use golfbot_core::learn::{
    plan_stroke_forward, plan_stroke_inverse, train_forward, train_inverse, ModelKind, StrokeModel, StrokePlan,
};
use golfbot_core::play::{play_shot, Scenario};
use golfbot_core::positioning::{plan_positioning, target_club_pose};
use golfbot_core::stroke_ctrl::{design_schedule, simulate_stroke, GainSchedule};
use golfbot_core::stroke_ref::stroke_speed_from_vector;
use golfbot_core::surface::{fit_surface, PointCloud, SurfaceModel};

use crate::config::{ModelChoice, PlanMethod, PointCfg, ScenarioConfig, SurfaceSource};
use crate::{runtime, Cli, CliError, Command};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::read(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    apply_overrides(&mut cfg, &cli.command)?;
    cfg.validate()?;

    let out = Output::create(&cli.out)?;
    out.json("resolved_config.json", &cfg)?;

    match &cli.command {
        Command::FitSurface { .. } => fit(&cfg, &out),
        Command::GenData { .. } => gen_data(&cfg, &out),
        Command::Train { .. } => train(&cfg, &out),
        Command::Plan { .. } => plan(&cfg, &out),
        Command::StrokeSim { .. } => stroke_sim(&cfg, &out),
        Command::Position => position(&cfg, &out),
        Command::Play { .. } => play(&cfg, &out),
    }
}

fn point(v: &[f64]) -> PointCfg {
    PointCfg { x_m: v[0], y_m: v[1] }
}

fn apply_overrides(cfg: &mut ScenarioConfig, cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::FitSurface { cloud, degree } => {
            let degree = degree.as_ref().map(|d| (d[0], d[1]));
            match (&mut cfg.surface, cloud) {
                (SurfaceSource::CloudCsv { path, degree: d }, c) => {
                    if let Some(c) = c {
                        *path = c.clone();
                    }
                    if let Some(dg) = degree {
                        *d = dg;
                    }
                }
                (_, Some(c)) => {
                    cfg.surface = SurfaceSource::CloudCsv { path: c.clone(), degree: degree.unwrap_or((3, 3)) };
                }
                (_, None) => {
                    return Err(CliError::Config(
                        "surface: fit-surface needs `surface.cloud_csv` in the config or --cloud".into(),
                    ))
                }
            }
        }
        Command::GenData { count } => {
            if let Some(n) = count {
                cfg.data.count = *n;
            }
        }
        Command::Train { model, data } => {
            if let Some(m) = model {
                cfg.training.model = *m;
            }
            if let Some(d) = data {
                cfg.training.dataset_csv = Some(d.clone());
            }
        }
        Command::Plan { method, model_file, ball, hole } => {
            if let Some(m) = method {
                cfg.planner.method = *m;
            }
            if let Some(f) = model_file {
                match cfg.planner.method {
                    PlanMethod::Inverse => cfg.planner.inverse_model_json = Some(f.clone()),
                    PlanMethod::Forward => cfg.planner.forward_model_json = Some(f.clone()),
                }
            }
            if let Some(b) = ball {
                cfg.ball = point(b);
            }
            if let Some(h) = hole {
                let p = point(h);
                cfg.hole.x_m = p.x_m;
                cfg.hole.y_m = p.y_m;
            }
        }
        Command::StrokeSim { phi_dot } => {
            if let Some(r) = phi_dot {
                cfg.stroke.phi_dot_s_rad_s = *r;
            }
        }
        Command::Position => {}
        Command::Play { model_file, ball, hole } => {
            if let Some(f) = model_file {
                cfg.planner.inverse_model_json = Some(f.clone());
            }
            if let Some(b) = ball {
                cfg.ball = point(b);
            }
            if let Some(h) = hole {
                let p = point(h);
                cfg.hole.x_m = p.x_m;
                cfg.hole.y_m = p.y_m;
            }
        }
    }
    Ok(())
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| runtime(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn file(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
        Ok((path, BufWriter::new(f)))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let (path, mut w) = self.file(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(runtime)?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn text(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let (path, mut w) = self.file(name)?;
        w.write_all(body.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

fn note(msg: impl AsRef<str>) {
    eprintln!("golfbot: {}", msg.as_ref());
}

fn load_surface(cfg: &ScenarioConfig) -> Result<SurfaceModel, CliError> {
    let green = cfg.green_rect();
    match &cfg.surface {
        SurfaceSource::Named(n) => Ok(n.build(green)),
        SurfaceSource::CloudCsv { path, degree } => {
            let cloud = PointCloud::read_csv(path).map_err(|e| CliError::Config(format!("surface.cloud_csv: {e}")))?;
            let (model, _) = fit_surface(&cloud, *degree, green).map_err(runtime)?;
            Ok(model)
        }
        SurfaceSource::ModelJson(path) => {
            SurfaceModel::read_json(path).map_err(|e| CliError::Config(format!("surface.model_json: {e}")))
        }
    }
}

fn fit(cfg: &ScenarioConfig, out: &Output) -> Result<(), CliError> {
    let SurfaceSource::CloudCsv { path, degree } = &cfg.surface else {
        unreachable!("overrides guarantee a cloud source");
    };
    let cloud = PointCloud::read_csv(path).map_err(|e| CliError::Config(format!("surface.cloud_csv: {e}")))?;
    let (model, report) = fit_surface(&cloud, *degree, cfg.green_rect()).map_err(runtime)?;
    let p = out.text("surface.json", &(model.to_json().map_err(runtime)? + "\n"))?;
    out.json("fit_report.json", &report)?;
    note(format!(
        "fitted {} points, degree {:?}, RMS residual {:.3e} m -> {}",
        report.points,
        degree,
        report.rms_residual,
        p.display()
    ));
    Ok(())
}

fn dataset(cfg: &ScenarioConfig, surface: &SurfaceModel) -> Result<StrokeDataset, CliError> {
    if let Some(p) = &cfg.training.dataset_csv {
        return StrokeDataset::read_csv(p).map_err(|e| CliError::Config(format!("training.dataset_csv: {e}")));
    }
    let t = Instant::now();
    let ds = generate_training_strokes(&cfg.ball_params(), surface, None, &cfg.sampling(), &cfg.data_rollout_config())
        .map_err(runtime)?;
    note(format!("simulated {} strokes in {:.1} s", ds.len(), t.elapsed().as_secs_f64()));
    Ok(ds)
}

fn gen_data(cfg: &ScenarioConfig, out: &Output) -> Result<(), CliError> {
    let surface = load_surface(cfg)?;
    let ds = dataset(&ScenarioConfig { training: Default::default(), ..cfg.clone() }, &surface)?;
    let (path, w) = out.file("dataset.csv")?;
    ds.write_csv(w).map_err(runtime)?;
    note(format!("wrote {}", path.display()));
    Ok(())
}

#[derive(Serialize)]
struct TrainReport {
    kind: ModelKind,
    rows: usize,
    validation_rmse: Vec<f64>,
    iterations: usize,
    best_iteration: usize,
    final_train_loss: f64,
    best_validation_loss: f64,
}

fn train_one(kind: ModelKind, ds: &StrokeDataset, cfg: &ScenarioConfig, out: &Output) -> Result<(StrokeModel, TrainReport), CliError> {
    let t = Instant::now();
    let tc = cfg.train_config();
    let model = match kind {
        ModelKind::Inverse => train_inverse(ds, &tc),
        ModelKind::Forward => train_forward(ds, &tc),
    }
    .map_err(runtime)?;
    let name = match kind {
        ModelKind::Inverse => "inverse_model.json",
        ModelKind::Forward => "forward_model.json",
    };
    let path = out.text(name, &(model.to_json().map_err(runtime)? + "\n"))?;
    note(format!(
        "trained {kind:?} model in {:.1} s, validation RMSE {:?} -> {}",
        t.elapsed().as_secs_f64(),
        model.validation_rmse,
        path.display()
    ));
    let h = &model.history;
    let report = TrainReport {
        kind,
        rows: ds.len(),
        validation_rmse: model.validation_rmse.clone(),
        iterations: h.train_loss.len().saturating_sub(1),
        best_iteration: h.best_epoch,
        final_train_loss: h.train_loss.last().copied().unwrap_or(f64::NAN),
        best_validation_loss: h.validation_loss.get(h.best_epoch).copied().unwrap_or(f64::NAN),
    };
    Ok((model, report))
}

fn train(cfg: &ScenarioConfig, out: &Output) -> Result<(), CliError> {
    let surface = load_surface(cfg)?;
    let ds = dataset(cfg, &surface)?;
    let kinds: &[ModelKind] = match cfg.training.model {
        ModelChoice::Inverse => &[ModelKind::Inverse],
        ModelChoice::Forward => &[ModelKind::Forward],
        ModelChoice::Both => &[ModelKind::Inverse, ModelKind::Forward],
    };
    let mut reports = Vec::new();
    for &k in kinds {
        reports.push(train_one(k, &ds, cfg, out)?.1);
    }
    out.json("train_report.json", &reports)?;
    Ok(())
}

fn model_for(kind: ModelKind, cfg: &ScenarioConfig, surface: &SurfaceModel, out: &Output) -> Result<StrokeModel, CliError> {
    let (file, field) = match kind {
        ModelKind::Inverse => (&cfg.planner.inverse_model_json, "planner.inverse_model_json"),
        ModelKind::Forward => (&cfg.planner.forward_model_json, "planner.forward_model_json"),
    };
    if let Some(p) = file {
        let m = StrokeModel::read_json(p).map_err(|e| CliError::Config(format!("{field}: {e}")))?;
        if m.kind != kind {
            return Err(CliError::Config(format!("{field}: {} holds a {:?} model", p.display(), m.kind)));
        }
        return Ok(m);
    }
    note(format!("no {field} given, training one"));
    let ds = dataset(cfg, surface)?;
    Ok(train_one(kind, &ds, cfg, out)?.0)
}

#[derive(Serialize)]
struct PlanReport {
    method: PlanMethod,
    ball: Vec2,
    hole: Vec2,
    v_s: Vec2,
    speed_m_s: f64,
    heading_rad: f64,
    phi_dot_s_rad_s: f64,
    predicted_end: Vec2,
    cost: f64,
    in_domain: bool,
    evaluations: usize,
}

fn plan(cfg: &ScenarioConfig, out: &Output) -> Result<(), CliError> {
    let surface = load_surface(cfg)?;
    let (ball, hole) = (cfg.ball.vec(), cfg.hole.spec().center);
    let plan: StrokePlan = match cfg.planner.method {
        PlanMethod::Inverse => {
            let m = model_for(ModelKind::Inverse, cfg, &surface, out)?;
            plan_stroke_inverse(&m, ball, hole).map_err(runtime)?
        }
        PlanMethod::Forward => {
            let m = model_for(ModelKind::Forward, cfg, &surface, out)?;
            plan_stroke_forward(&m, ball, hole, &cfg.planner_pso(), cfg.planner.v_max_m_s).map_err(runtime)?
        }
    };
    if !plan.in_domain {
        note("warning: query lies outside the model's training range");
    }
    let report = PlanReport {
        method: cfg.planner.method,
        ball,
        hole,
        v_s: plan.v_s,
        speed_m_s: plan.v_s.norm(),
        heading_rad: plan.v_s.angle(),
        phi_dot_s_rad_s: stroke_speed_from_vector(plan.v_s.norm(), cfg.plant.hit_length_m),
        predicted_end: plan.predicted_end,
        cost: plan.cost,
        in_domain: plan.in_domain,
        evaluations: plan.evaluations,
    };
    let p = out.json("plan.json", &report)?;
    note(format!("v_s = ({:.4}, {:.4}) m/s -> {}", plan.v_s.x, plan.v_s.y, p.display()));
    Ok(())
}

fn schedule(cfg: &ScenarioConfig) -> Result<GainSchedule, CliError> {
    design_schedule(&cfg.plant_params(), &cfg.lqr).map_err(runtime)
}

fn stroke_sim(cfg: &ScenarioConfig, out: &Output) -> Result<(), CliError> {
    let reference = cfg.stroke_reference(cfg.stroke.phi_dot_s_rad_s);
    reference
        .validate(cfg.stroke.max_stroke_speed_m_s)
        .map_err(|e| CliError::Config(format!("stroke.phi_dot_s_rad_s: {e}")))?;
    let sched = schedule(cfg)?;
    let res = simulate_stroke(&cfg.plant_params(), &sched, &reference, &cfg.stroke_sim()).map_err(runtime)?;
    let (_, w) = out.file("stroke.csv")?;
    res.write_csv(w).map_err(runtime)?;
    let summary = res.summary();
    out.json("stroke_summary.json", &summary)?;
    match summary.relative_error {
        Some(e) => note(format!(
            "impact rate {:.4} rad/s vs {:.4} commanded ({:+.3}%)",
            summary.realized_impact_rate.unwrap_or(f64::NAN),
            reference.impact_rate(),
            100.0 * e
        )),
        None => note("warning: the club never passed φ = 0 inside the strike window"),
    }
    Ok(())
}

fn position(cfg: &ScenarioConfig, out: &Output) -> Result<(), CliError> {
    let geom = cfg.robot_geom();
    let target = match cfg.positioning.target_club {
        Some(t) => t.pose(),
        None => {
            let aim = cfg.hole.spec().center - cfg.ball.vec();
            target_club_pose(cfg.ball.vec(), aim, &geom)
                .map_err(|e| CliError::Config(format!("positioning.target_club: not given and {e} (ball on hole)")))?
        }
    };
    let plan = plan_positioning(&geom, &cfg.robot_start.pose(), &target, &cfg.positioning_config()).map_err(runtime)?;
    let (_, w) = out.file("sequence.csv")?;
    plan.sequence.write_csv(w).map_err(runtime)?;
    out.json("position_summary.json", &plan.summary())?;
    note(format!(
        "club pose error {:.2e} m, {:.2e} rad after {} steps",
        plan.position_error,
        plan.heading_error,
        plan.sequence.len()
    ));
    Ok(())
}

fn play(cfg: &ScenarioConfig, out: &Output) -> Result<(), CliError> {
    let surface = load_surface(cfg)?;
    let inverse = model_for(ModelKind::Inverse, cfg, &surface, out)?;
    let sched = schedule(cfg)?;
    let scenario = Scenario { ball: cfg.ball.vec(), hole: cfg.hole.spec(), robot_start: cfg.robot_start.pose() };
    let report = play_shot(&surface, &inverse, &sched, &scenario, &cfg.play_config()).map_err(runtime)?;
    let p = out.json("game_report.json", &report)?;
    for w in &report.warnings {
        note(format!("warning: {w}"));
    }
    note(format!(
        "{:?}, {:.3} m from the hole -> {}",
        report.outcome,
        report.final_distance_to_hole_m,
        p.display()
    ));
    Ok(())
}
