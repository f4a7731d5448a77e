use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use trackdur::anchors::{collect_centers, kmeans, write_anchor_file, DEFAULT_MAX_ITER, DEFAULT_TOL};
use trackdur::config::ToolConfig;
use trackdur::datamodel::{EvalWindow, Sequence};
use trackdur::error::{Error, Result};
use trackdur::fpslab::{controlled_window, fps_sweep, stride_for_rate, SweepSpec};
use trackdur::ingest::{
    convert_positions, estimate_velocities, parse_positions, read_tracks_file, write_tracks_file,
    GridConfig, ParseOptions,
};
use trackdur::matching::SimilarityMode;
use trackdur::metrics::{class_report, postprocess_filter, Roi};
use trackdur::synthgen::{degrade, gen_scene, SynthSpec};

const THREADS_ENV: &str = "TRACKDUR_THREADS";
const DEFAULT_RATES: &str = "30,15,10,6,5,3,2,1";

#[derive(Parser)]
#[command(
    name = "trackdur",
    version,
    about = "Evaluate multi-camera 3D trackers: HOTA, DetA, AssA, LocA, AP and mean identity-run duration",
    after_help = "Set TRACKDUR_THREADS to cap the worker threads. Exit codes: 0 success, 2 input error, 1 internal error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one tracker output against ground truth
    Evaluate(EvaluateArgs),
    /// Score tracker outputs produced at several inference rates on one controlled window
    SweepFps(SweepArgs),
    /// Convert grid position-id annotations into the track CSV format
    Convert(ConvertArgs),
    /// Build a k-means anchor bank from ground-truth box centers
    GenAnchors(AnchorArgs),
    /// Generate a synthetic ground-truth scene and a degraded tracker output
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Similarity {
    BevIou,
    CenterDistance,
}

/// Options shared by the scoring commands. Unset flags fall back to the
/// config file, then to built-in defaults.
#[derive(Args)]
struct Scoring {
    /// JSON config file; flags override its values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Native frame rate of the input files [default: 30] [config: native_fps]
    #[arg(long, value_name = "FPS")]
    native_fps: Option<f64>,
    /// Reference evaluation rate F0; frames are taken every native/eval steps [default: every frame at the native rate] [config: eval_fps]
    #[arg(long, value_name = "FPS")]
    eval_fps: Option<f64>,
    /// Score only the first N ground-truth frames [default: all] [config: max_frames]
    #[arg(long, value_name = "N")]
    max_frames: Option<usize>,
    /// Pairwise similarity [default: bev-iou] [config: similarity.mode]
    #[arg(long, value_enum)]
    similarity: Option<Similarity>,
    /// Distance in meters at which center similarity reaches zero [default: 1] [config: similarity.d_max]
    #[arg(long, value_name = "METERS")]
    d_max: Option<f64>,
    /// Comma-separated gate thresholds averaged by HOTA [default: 0.05,0.10,...,0.95] [config: alpha_grid]
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    /// Gate used for the run-duration metric [default: 0.5] [config: dur_alpha]
    #[arg(long, value_name = "ALPHA")]
    dur_alpha: Option<f64>,
    /// Gate used for detection AP [default: 0.5] [config: ap_alpha]
    #[arg(long, value_name = "ALPHA")]
    ap_alpha: Option<f64>,
    /// Drop predictions below this confidence [default: 0] [config: conf_threshold]
    #[arg(long, value_name = "CONF")]
    conf_threshold: Option<f64>,
    /// Class whose run duration is reported on its own [default: none] [config: primary_class]
    #[arg(long, value_name = "CLASS")]
    primary_class: Option<u32>,
    /// Print one table row per class [default: off] [config: none]
    #[arg(long)]
    per_class: bool,
    /// Write the JSON report here [default: none, table only] [config: none]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

impl Scoring {
    fn resolve(&self) -> Result<ToolConfig> {
        let mut cfg = ToolConfig::load(self.config.as_deref())?;
        if let Some(v) = self.native_fps {
            cfg.native_fps = v;
        }
        if let Some(v) = self.eval_fps {
            cfg.eval_fps = Some(v);
        }
        if let Some(v) = self.max_frames {
            cfg.max_frames = Some(v);
        }
        if let Some(v) = self.similarity {
            cfg.similarity.mode = match v {
                Similarity::BevIou => SimilarityMode::BevIou,
                Similarity::CenterDistance => SimilarityMode::CenterDistance,
            };
        }
        if let Some(v) = self.d_max {
            cfg.similarity.d_max = v;
        }
        if let Some(v) = &self.alpha_grid {
            cfg.alpha_grid = v.clone();
        }
        if let Some(v) = self.dur_alpha {
            cfg.dur_alpha = v;
        }
        if let Some(v) = self.ap_alpha {
            cfg.ap_alpha = v;
        }
        if let Some(v) = self.conf_threshold {
            cfg.conf_threshold = v;
        }
        if let Some(v) = self.primary_class {
            cfg.primary_class = Some(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Ground-truth track CSV
    #[arg(long, value_name = "PATH")]
    gt: PathBuf,
    /// Tracker output CSV
    #[arg(long, value_name = "PATH")]
    pred: PathBuf,
    #[command(flatten)]
    scoring: Scoring,
}

#[derive(Args)]
struct SweepArgs {
    /// Ground-truth track CSV at the native rate
    #[arg(long, value_name = "PATH")]
    gt: PathBuf,
    /// Directory holding one `<rate>fps.csv` tracker output per rate
    #[arg(long, value_name = "DIR")]
    pred_dir: PathBuf,
    /// Comma-separated inference rates [default: 30,15,10,6,5,3,2,1] [config: none]
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = DEFAULT_RATES)]
    rates: Vec<f64>,
    #[command(flatten)]
    scoring: Scoring,
}

#[derive(Args)]
struct ConvertArgs {
    /// `frame,person_id,position_id` annotation CSV
    #[arg(long, value_name = "PATH")]
    positions: PathBuf,
    /// Grid geometry JSON [default: the config's grid section, else the built-in grid] [config: grid]
    #[arg(long, value_name = "PATH")]
    grid_config: Option<PathBuf>,
    /// JSON config file; flags override its values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Annotation frame rate [default: 30] [config: native_fps]
    #[arg(long, value_name = "FPS")]
    fps: Option<f64>,
    /// Output track CSV; with --split, the stem names `<stem>_train.csv` and `<stem>_test.csv`
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Put the first N frames in a train file and the rest in a test file [default: no split] [config: none]
    #[arg(long, value_name = "N")]
    split: Option<usize>,
}

#[derive(Args)]
struct AnchorArgs {
    /// Ground-truth track CSV supplying box centers
    #[arg(long, value_name = "PATH")]
    gt: PathBuf,
    /// JSON config file; flags override its values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Number of anchors [default: 900] [config: anchor_k]
    #[arg(long)]
    k: Option<usize>,
    /// k-means++ seed [default: 0] [config: anchor_seed]
    #[arg(long)]
    seed: Option<u64>,
    /// Lloyd iteration cap [default: 300] [config: none]
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Stop once no center moves more than this many meters [default: 1e-6] [config: none]
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Anchor bank CSV to write
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Scene and degradation JSON (`{"scene": {...}, "degrade": {...}}`); missing keys take defaults
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,
    /// Ground-truth CSV to write
    #[arg(long, value_name = "PATH")]
    out_gt: PathBuf,
    /// Degraded tracker CSV to write
    #[arg(long, value_name = "PATH")]
    out_pred: PathBuf,
    /// Resolved spec JSON for provenance [default: <out-pred stem>.spec.json] [config: none]
    #[arg(long, value_name = "PATH")]
    out_spec: Option<PathBuf>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Drop ground truth outside the configured region and weak predictions.
fn prepare(gt: Sequence, pred: Sequence, cfg: &ToolConfig) -> Result<(Sequence, Sequence)> {
    let (mut gt, mut pred) = (gt, pred);
    if let Some(n) = cfg.max_frames {
        gt = gt.truncated(n);
        if let Some((_, last)) = gt.span() {
            pred.frames.retain(|f| f.index <= last);
        }
    }
    let roi = cfg.roi.clone().unwrap_or_else(Roi::everything);
    if cfg.roi.is_some() {
        gt = postprocess_filter(&gt, &roi, f64::NEG_INFINITY)?;
    }
    if cfg.roi.is_some() || cfg.conf_threshold > 0.0 {
        pred = postprocess_filter(&pred, &roi, cfg.conf_threshold)?;
    }
    Ok((gt, pred))
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let cfg = args.scoring.resolve()?;
    let opts = ParseOptions::tracks(cfg.native_fps);
    let gt = read_tracks_file(&args.gt, &opts)?;
    let pred = read_tracks_file(&args.pred, &opts)?;
    let (gt, pred) = prepare(gt, pred, &cfg)?;
    let window = match cfg.eval_fps {
        Some(r) => controlled_window(&gt, cfg.native_fps, r)?,
        None => EvalWindow::full(&gt)?,
    };
    let report = class_report(&gt, &pred, &window, &cfg.report_options())?;
    if let Some(out) = &args.scoring.out {
        write_text(out, &report.to_json())?;
    }
    print!("{}", report.render_table(args.scoring.per_class));
    Ok(())
}

fn rate_file_name(rate: f64) -> String {
    if rate.fract() == 0.0 {
        format!("{}fps.csv", rate as u64)
    } else {
        format!("{rate}fps.csv")
    }
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let cfg = args.scoring.resolve()?;
    let eval_fps = cfg
        .eval_fps
        .ok_or_else(|| Error::Config("the sweep needs an evaluation rate (--eval-fps or eval_fps)".into()))?;
    let opts = ParseOptions::tracks(cfg.native_fps);
    let gt = read_tracks_file(&args.gt, &opts)?;
    let mut outputs = Vec::with_capacity(args.rates.len());
    for &rate in &args.rates {
        let path = args.pred_dir.join(rate_file_name(rate));
        let mut pred = read_tracks_file(&path, &opts)?;
        pred.frame_stride = stride_for_rate(cfg.native_fps, rate)?;
        let (_, pred) = prepare(gt.clone(), pred, &cfg)?;
        outputs.push((rate, pred));
    }
    let (gt, _) = prepare(gt, Sequence::new("", cfg.native_fps), &cfg)?;
    let spec = SweepSpec {
        native_fps: cfg.native_fps,
        inference_rates: args.rates.clone(),
        eval_fps,
        report: cfg.report_options(),
    };
    let table = fps_sweep(&gt, &outputs, &spec)?;
    if let Some(out) = &args.scoring.out {
        write_text(out, &table.to_json())?;
    }
    print!("{}", table.render_table());
    Ok(())
}

fn split_paths(out: &Path) -> (PathBuf, PathBuf) {
    let stem = out.file_stem().map_or("converted".into(), |s| s.to_string_lossy().into_owned());
    let dir = out.parent().unwrap_or(Path::new(""));
    (
        dir.join(format!("{stem}_train.csv")),
        dir.join(format!("{stem}_test.csv")),
    )
}

fn convert(args: &ConvertArgs) -> Result<()> {
    let mut cfg = ToolConfig::load(args.config.as_deref())?;
    if let Some(path) = &args.grid_config {
        let grid: GridConfig = serde_json::from_str(&read_text(path)?)
            .map_err(|e| Error::Config(e.to_string()).in_file(path))?;
        cfg.grid = grid;
    }
    if let Some(fps) = args.fps {
        cfg.native_fps = fps;
    }
    cfg.validate()?;
    let file = fs::File::open(&args.positions).map_err(|source| Error::Io {
        path: args.positions.clone(),
        source,
    })?;
    let records = parse_positions(file).map_err(|e| e.in_file(&args.positions))?;
    let mut seq = estimate_velocities(&convert_positions(&records, &cfg.grid, cfg.native_fps)?);
    if let Some(stem) = args.out.file_stem() {
        seq.scene_name = stem.to_string_lossy().into_owned();
    }
    match args.split {
        None => {
            let rows = write_tracks_file(&seq, &args.out)?;
            println!("wrote {rows} boxes in {} frames to {}", seq.frames.len(), args.out.display());
        }
        Some(n) => {
            let (train, test) = seq.split_at(n);
            let (train_path, test_path) = split_paths(&args.out);
            for (part, path) in [(&train, &train_path), (&test, &test_path)] {
                let rows = write_tracks_file(part, path)?;
                println!("wrote {rows} boxes in {} frames to {}", part.frames.len(), path.display());
            }
        }
    }
    Ok(())
}

fn gen_anchors(args: &AnchorArgs) -> Result<()> {
    let cfg = ToolConfig::load(args.config.as_deref())?;
    let k = args.k.unwrap_or(cfg.anchor_k);
    let seed = args.seed.unwrap_or(cfg.anchor_seed);
    let gt = read_tracks_file(&args.gt, &ParseOptions::detections(cfg.native_fps))?;
    let points = collect_centers(&gt)?;
    let bank = kmeans(&points, k, seed, args.max_iter, args.tol)?;
    write_anchor_file(&bank, &args.out)?;
    println!(
        "{} anchors from {} centers, inertia {:.6}, {} iterations -> {}",
        bank.k,
        points.len(),
        bank.inertia,
        bank.history.len(),
        args.out.display()
    );
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let spec: SynthSpec = serde_json::from_str(&read_text(&args.spec)?)
        .map_err(|e| Error::Config(e.to_string()).in_file(&args.spec))?;
    let gt = gen_scene(&spec.scene)?;
    let pred = degrade(&gt, &spec.degrade)?;
    let gt_rows = write_tracks_file(&gt, &args.out_gt)?;
    let pred_rows = write_tracks_file(&pred, &args.out_pred)?;
    let spec_path = args.out_spec.clone().unwrap_or_else(|| {
        let stem = args.out_pred.file_stem().map_or("synth".into(), |s| s.to_string_lossy().into_owned());
        args.out_pred.with_file_name(format!("{stem}.spec.json"))
    });
    let mut text = serde_json::to_string_pretty(&spec).expect("spec serializes");
    text.push('\n');
    write_text(&spec_path, &text)?;
    println!(
        "{} frames: {gt_rows} ground-truth boxes, {pred_rows} tracker boxes; spec in {}",
        gt.frames.len(),
        spec_path.display()
    );
    Ok(())
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Evaluate(a) => evaluate(a),
        Command::SweepFps(a) => sweep(a),
        Command::Convert(a) => convert(a),
        Command::GenAnchors(a) => gen_anchors(a),
        Command::Synth(a) => synth(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
