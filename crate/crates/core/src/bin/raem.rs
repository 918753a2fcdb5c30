use std::fs;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use raem::fisher::write_scores_csv;
use raem::mask::{risk_profile_with_driver, RiskDriver};
use raem::pipeline::{emit_report, evaluate_scene, run_experiment, wasserstein2, ExperimentConfig, Session, ViewSpec};
use raem::risk::DistanceDistribution;
use raem::world::{build_world, capture_rgbd, ground_truth_point_cloud, write_xyz, CaptureSettings};
use raem::{Error, Result, SceneModel};

#[derive(Parser)]
#[command(name = "raem", version, about = "Risk-aware next-best-view selection on synthetic rooms")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Driver {
    Avar,
    Mean,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML); defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Risk confidence level.
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    beta1: Option<f64>,
    #[arg(long, global = true)]
    beta2: Option<f64>,
    /// Depth-loss weight.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Fisher prior added to every diagonal entry.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true, value_enum)]
    raem: Option<Toggle>,
    #[arg(long = "risk-driver", global = true, value_enum)]
    risk_driver: Option<Driver>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-truth world generation.
    World {
        #[command(subcommand)]
        action: WorldAction,
    },
    /// Ray-cast one RGB-D frame (the configured initial view by default).
    Capture {
        #[arg(long, value_parser = parse_vec3)]
        eye: Option<[f64; 3]>,
        #[arg(long, value_parser = parse_vec3)]
        target: Option<[f64; 3]>,
    },
    /// Risk profile along the payload path.
    Risk {
        /// Scene JSON; without it the scene is reconstructed from the initial view.
        #[arg(long)]
        scene: Option<PathBuf>,
    },
    /// Next-best-view scoring.
    Nbv {
        #[command(subcommand)]
        action: NbvAction,
    },
    /// Full acquisition experiments.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
    /// Evaluation metrics.
    Eval {
        #[command(subcommand)]
        action: EvalAction,
    },
}

#[derive(Subcommand)]
enum WorldAction {
    /// Writes world.json, gt_cloud.xyz and path.csv.
    Build,
}

#[derive(Subcommand)]
enum NbvAction {
    /// Scores one candidate pool after the initial view (and the stages
    /// before `--stage`) and writes scores.csv.
    Score {
        /// Zero-based stage whose pool is scored.
        #[arg(long, default_value_t = 0)]
        stage: usize,
    },
}

#[derive(Subcommand)]
enum ExperimentAction {
    /// Runs the protocol and writes the report plus scene.json.
    Run,
}

#[derive(Subcommand)]
enum EvalAction {
    /// W2 between two normals, or per waypoint for a saved scene.
    W2 {
        /// `mean,std` of the first law.
        #[arg(long, value_parser = parse_pair, requires = "b")]
        a: Option<(f64, f64)>,
        /// `mean,std` of the second law.
        #[arg(long, value_parser = parse_pair)]
        b: Option<(f64, f64)>,
        /// Scene JSON evaluated against the ground truth of the config.
        #[arg(long, conflicts_with = "a")]
        scene: Option<PathBuf>,
    },
}

fn parse_floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    parse_floats::<3>(s)
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    parse_floats::<2>(s).map(|[a, b]| (a, b))
}

impl Common {
    fn experiment_config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.eps {
            c.eps = v;
        }
        if let Some(v) = self.beta1 {
            c.beta1 = v;
        }
        if let Some(v) = self.beta2 {
            c.beta2 = v;
        }
        if let Some(v) = self.gamma {
            c.train.gamma = v;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(t) = self.raem {
            c.raem = t == Toggle::On;
        }
        if let Some(d) = self.risk_driver {
            c.risk_driver = match d {
                Driver::Avar => RiskDriver::Avar,
                Driver::Mean => RiskDriver::Mean,
            };
        }
        c.validate()?;
        Ok(c)
    }
}

fn create_dir(dir: &FsPath) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn load_scene_or_initial(scene: &Option<PathBuf>, config: &ExperimentConfig) -> Result<SceneModel> {
    match scene {
        Some(p) => SceneModel::load(p),
        None => Ok(Session::start(config.clone())?.scene().clone()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.common.experiment_config()?;
    let out = &cli.common.out;
    create_dir(out)?;
    match cli.command {
        Command::World {
            action: WorldAction::Build,
        } => {
            let world = build_world(&config.world, config.seed)?;
            write(out.join("world.json"), &world.to_json())?;
            let cloud = ground_truth_point_cloud(&world, config.gt_density, config.sigma_hat, config.seed)?;
            let mut xyz = Vec::new();
            write_xyz(&cloud, &mut xyz).map_err(|e| Error::io(out.join("gt_cloud.xyz"), e))?;
            write(out.join("gt_cloud.xyz"), &String::from_utf8_lossy(&xyz))?;
            let path = config.path()?;
            let rows = path
                .waypoints()
                .iter()
                .enumerate()
                .map(|(k, p)| vec![k.to_string(), p.x.to_string(), p.y.to_string(), p.z.to_string()]);
            write(out.join("path.csv"), &csv_string(&["k", "x", "y", "z"], rows)?)?;
            println!("{} primitives, {} ground-truth points", world.primitives.len(), cloud.len());
        }
        Command::Capture { eye, target } => {
            let world = build_world(&config.world, config.seed)?;
            let view = ViewSpec {
                eye: eye.unwrap_or(config.initial_view.eye),
                target: target.unwrap_or(config.initial_view.target),
            };
            let image = capture_rgbd(&world, &view.pose(), &config.camera()?, &CaptureSettings::default());
            image.write_ppm(&out.join("view.ppm"))?;
            image.write_depth_grid(&out.join("view.depth.txt"))?;
            println!("wrote view.ppm and view.depth.txt under {}", out.display());
        }
        Command::Risk { scene } => {
            let scene = load_scene_or_initial(&scene, &config)?;
            let profile = risk_profile_with_driver(&config.path()?, &scene, &config.mask_params()?, config.risk_driver);
            let mut csv = Vec::new();
            profile.write_csv(&mut csv)?;
            write(out.join("risk_profile.csv"), &String::from_utf8_lossy(&csv))?;
            for (k, e) in profile.entries.iter().enumerate() {
                println!("k={k:2} alpha={:.4} r_mask={:.4}", e.alpha, e.r_mask);
            }
        }
        Command::Nbv {
            action: NbvAction::Score { stage },
        } => {
            let mut session = Session::start(config.clone())?;
            for _ in 0..stage {
                if !session.run_next_stage()? {
                    break;
                }
            }
            let stage_config = config
                .stages
                .get(stage)
                .ok_or_else(|| Error::InvalidArgument(format!("config has no stage {stage}")))?;
            let plan = session.plan_round(stage_config)?;
            let mut csv = Vec::new();
            write_scores_csv(&plan.scores, &mut csv)?;
            write(out.join("scores.csv"), &String::from_utf8_lossy(&csv))?;
            println!("best candidate {} with score {:.6e}", plan.best, plan.eig);
        }
        Command::Experiment {
            action: ExperimentAction::Run,
        } => {
            let report = run_experiment(&config)?;
            if !report.valid {
                return Err(Error::InvalidArgument(format!(
                    "experiment failed: {}",
                    report.failure.unwrap_or_default()
                )));
            }
            let files = emit_report(&report, out)?;
            write(out.join("config.toml"), &config.to_toml())?;
            println!(
                "{} files written; mean W2 {:.6}, max W2 {:.6}",
                files.len(),
                report.mean_w2,
                report.max_w2
            );
        }
        Command::Eval {
            action: EvalAction::W2 { a, b, scene },
        } => match (a, b, scene) {
            (Some(a), Some(b), None) => {
                let d = |(mean, std): (f64, f64)| DistanceDistribution::new(mean, std);
                println!("{}", wasserstein2(&d(a)?, &d(b)?));
            }
            (None, None, Some(p)) => {
                let world = build_world(&config.world, config.seed)?;
                let cloud = ground_truth_point_cloud(&world, config.gt_density, config.sigma_hat, config.seed)?;
                let scene = SceneModel::load(&p)?;
                let metrics = evaluate_scene(&scene, &config.path()?, &cloud, &config.confidence()?)?;
                let rows = metrics.iter().map(|m| {
                    vec![
                        m.waypoint.to_string(),
                        m.perceived.mean.to_string(),
                        m.perceived.std.to_string(),
                        m.ground_truth.mean.to_string(),
                        m.ground_truth.std.to_string(),
                        m.w2.to_string(),
                    ]
                });
                let header = ["k", "perceived_mean", "perceived_std", "gt_mean", "gt_std", "w2"];
                write(out.join("w2.csv"), &csv_string(&header, rows)?)?;
                let mean = metrics.iter().map(|m| m.w2).sum::<f64>() / metrics.len() as f64;
                println!("mean W2 {mean:.6}");
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "eval w2 needs either --a and --b, or --scene".into(),
                ))
            }
        },
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
