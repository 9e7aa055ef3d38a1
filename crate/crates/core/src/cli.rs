//! Command-line frontend: `extract`, `eval`, `histogram` and `synth`.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 I/O error,
//! 3 shape mismatch. Machine-readable summaries are printed on a line
//! starting with `RESULT `.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bgmodels::{snapshot, ModelRegistry};
use crate::colorspace::{frame_to_hsv, layer_histogram, Layer, DEFAULT_HISTOGRAM_BINS};
use crate::error::{exit_code, Error, Result};
use crate::imageio;
use crate::metrics::evaluate_indexed;
use crate::morphology::{CleanOrder, SeShape};
use crate::pipeline::{
    extract, load_sequence, write_masks, write_raw_masks, ModelSource, PipelineConfig,
};
use crate::synthgen::{generate, write_scene, SceneSpec};

#[derive(Debug, Parser)]
#[command(
    name = "silhouette",
    version,
    about = "Extract moving silhouettes by background subtraction on the HSV Value plane"
)]
pub struct Cli {
    /// Increase verbosity; -v echoes the effective configuration.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run background subtraction over a frame directory and write masks.
    Extract(Box<ExtractArgs>),
    /// Score predicted masks against ground-truth masks.
    Eval(EvalArgs),
    /// Write hue, saturation and value histograms of one frame as CSV.
    Histogram(HistogramArgs),
    /// Generate a synthetic scene with ground-truth masks.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// JSON pipeline configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory of PNG or binary PPM frames, in lexicographic order.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for mask_NNNNNN.png files.
    #[arg(long = "output-dir", visible_alias = "out", alias = "output_dir")]
    pub output_dir: Option<PathBuf>,
    /// Glob on file names selecting frames (default: all .png/.ppm files).
    #[arg(long)]
    pub pattern: Option<String>,
    /// Background model: framediff, gaussian or gmm.
    #[arg(long)]
    pub approach: Option<String>,
    #[arg(long = "train-frames", alias = "train_frames")]
    pub train_frames: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long = "k-sigma", alias = "k_sigma")]
    pub k_sigma: Option<f64>,
    #[arg(long = "k-max", alias = "k_max")]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Background-portion threshold of the mixture.
    #[arg(long = "T", alias = "bg-threshold")]
    pub bg_threshold: Option<f64>,
    #[arg(long = "match-k", alias = "match_k")]
    pub match_k: Option<f64>,
    #[arg(long = "var-init", alias = "var_init")]
    pub var_init: Option<f64>,
    #[arg(long = "var-floor", alias = "var_floor")]
    pub var_floor: Option<f64>,
    #[arg(long = "w-init", alias = "w_init")]
    pub w_init: Option<f64>,
    /// square or cross.
    #[arg(long = "se-shape", alias = "se_shape")]
    pub se_shape: Option<String>,
    #[arg(long = "se-radius", alias = "se_radius")]
    pub se_radius: Option<usize>,
    /// open_close, close_open, dilate_erode, erode_dilate or none.
    #[arg(long = "clean-order", alias = "clean_order")]
    pub clean_order: Option<String>,
    /// Empty-scene frame to use as the frame-differencing reference.
    #[arg(long = "reference-frame", alias = "reference_frame")]
    pub reference_frame: Option<PathBuf>,
    /// Also write pre-morphology masks under raw/.
    #[arg(long = "emit-raw", alias = "emit_raw")]
    pub emit_raw: bool,
    /// Resume from a saved model snapshot instead of training.
    #[arg(long = "state-in")]
    pub state_in: Option<PathBuf>,
    /// Save the final model snapshot here.
    #[arg(long = "state-out")]
    pub state_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of predicted mask_NNNNNN.png files.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground-truth mask_NNNNNN.png files.
    #[arg(long)]
    pub truth: PathBuf,
    /// Exclude frames with index below this warm-up count.
    #[arg(long)]
    pub skip: Option<usize>,
    /// Approach that produced the predictions; picks the default skip.
    #[arg(long)]
    pub approach: Option<String>,
    /// CSV report path (default: <pred>/eval.csv).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long, default_value_t = DEFAULT_HISTOGRAM_BINS)]
    pub bins: usize,
    /// Directory for histogram_{hue,saturation,value}.csv (default: current).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Built-in scene: walker, walker-clean or walker-drift.
    #[arg(long, conflicts_with = "spec")]
    pub preset: Option<String>,
    /// JSON scene spec.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Output directory; frames/, truth/ and scene.json are written inside.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long = "frame-count", alias = "frame_count")]
    pub frame_count: Option<usize>,
    #[arg(long = "noise-sigma", alias = "noise_sigma")]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Mover velocity in pixels per frame, as VX,VY.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub velocity: Option<[f64; 2]>,
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected VX,VY")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([num(a)?, num(b)?])
}

/// Parses `args` and runs the chosen subcommand, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit_code::CONFIG
            } else {
                exit_code::OK
            };
            let _ = e.print();
            return code;
        }
    };
    let verbose = cli.verbose;
    let outcome = match cli.command {
        Command::Extract(a) => cmd_extract(*a, verbose),
        Command::Eval(a) => cmd_eval(a),
        Command::Histogram(a) => cmd_histogram(a),
        Command::Synth(a) => cmd_synth(a, verbose),
    };
    match outcome {
        Ok(()) => exit_code::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Layers flag overrides on top of the config file (or defaults).
pub fn effective_config(args: &ExtractArgs) -> Result<PipelineConfig> {
    let mut cfg = match &args.config {
        Some(path) => PipelineConfig::from_json_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = &args.approach {
        cfg.approach = v.clone();
    }
    if args.train_frames.is_some() {
        cfg.train_frames = args.train_frames;
    }
    macro_rules! set {
        ($($field:ident).+ <- $flag:expr) => {
            if let Some(v) = $flag {
                cfg.$($field).+ = v;
            }
        };
    }
    set!(tau <- args.tau);
    set!(k_sigma <- args.k_sigma);
    set!(gmm.k_max <- args.k_max);
    set!(gmm.alpha <- args.alpha);
    set!(gmm.bg_threshold <- args.bg_threshold);
    set!(gmm.match_k <- args.match_k);
    set!(gmm.var_init <- args.var_init);
    set!(gmm.var_floor <- args.var_floor);
    set!(se_radius <- args.se_radius);
    if args.w_init.is_some() {
        cfg.gmm.w_init = args.w_init;
    }
    if let Some(s) = &args.se_shape {
        cfg.se_shape = s.parse::<SeShape>()?;
    }
    if let Some(s) = &args.clean_order {
        cfg.clean_order = s.parse::<CleanOrder>()?;
    }
    if args.output_dir.is_some() {
        cfg.output_dir = args.output_dir.clone();
    }
    if args.reference_frame.is_some() {
        cfg.reference_frame = args.reference_frame.clone();
    }
    cfg.emit_raw |= args.emit_raw;
    Ok(cfg)
}

fn cmd_extract(args: ExtractArgs, verbose: u8) -> Result<()> {
    let registry = ModelRegistry::builtin();
    let cfg = effective_config(&args)?;
    cfg.validate(&registry)?;
    if verbose >= 1 {
        eprintln!(
            "effective config: {}",
            serde_json::to_string(&cfg).expect("config serializes")
        );
    }
    let out_dir = cfg
        .output_dir
        .clone()
        .ok_or_else(|| Error::Config("no output directory (use --out or output_dir)".into()))?;
    if !args.input.is_dir() {
        return Err(Error::read(&args.input, "input directory not found"));
    }

    let seq = load_sequence(&args.input, args.pattern.as_deref())?;
    let source = if let Some(path) = &args.state_in {
        ModelSource::Resume(snapshot::load(path, &registry)?)
    } else if let Some(path) = &cfg.reference_frame {
        let plane = crate::colorspace::rgb_value_plane(&imageio::read_rgb_frame(path)?);
        ModelSource::Reference(plane)
    } else {
        ModelSource::Train
    };
    let extraction = extract(seq.planes(), &cfg, &registry, source)?;
    let written = write_masks(&extraction.result, &out_dir)?;
    if cfg.emit_raw {
        write_raw_masks(&extraction.result, &out_dir)?;
    }
    if let Some(path) = &args.state_out {
        snapshot::save(extraction.model.as_ref(), path)?;
    }
    let timing = extraction.result.timing;
    println!(
        "RESULT approach={} frames_in={} masks_written={} ms_per_frame={:.3} fps={:.1}",
        cfg.approach,
        seq.len(),
        written,
        timing.ms_per_frame(),
        timing.frames_per_sec()
    );
    Ok(())
}

fn default_skip(approach: Option<&str>) -> Result<usize> {
    let Some(name) = approach else { return Ok(0) };
    let registry = ModelRegistry::builtin();
    let factory = registry.get(name)?;
    Ok(match factory.min_train_frames() {
        0 => 30,
        _ => factory.default_train_frames(),
    })
}

/// Pairs predictions with truth by frame index.
fn align(pred_dir: &Path, truth_dir: &Path) -> Result<Vec<(usize, PathBuf, PathBuf)>> {
    for d in [pred_dir, truth_dir] {
        if !d.is_dir() {
            return Err(Error::read(d, "directory not found"));
        }
    }
    let preds = imageio::list_masks(pred_dir)?;
    let truths = imageio::list_masks(truth_dir)?;
    let first = preds
        .first()
        .map(|p| p.0)
        .ok_or_else(|| Error::EmptyInput(format!("no masks in {}", pred_dir.display())))?;

    let pred_map: std::collections::BTreeMap<_, _> = preds.into_iter().collect();
    let truth_map: std::collections::BTreeMap<_, _> = truths.into_iter().collect();
    if let Some((idx, path)) = pred_map.iter().find(|(i, _)| !truth_map.contains_key(i)) {
        return Err(Error::Config(format!(
            "{} has no ground truth {} in {}",
            path.display(),
            imageio::mask_file_name(*idx),
            truth_dir.display()
        )));
    }
    if let Some((idx, _)) = truth_map
        .range(first..)
        .find(|(i, _)| !pred_map.contains_key(i))
    {
        return Err(Error::Config(format!(
            "prediction {} missing from {}",
            imageio::mask_file_name(*idx),
            pred_dir.display()
        )));
    }
    Ok(pred_map
        .into_iter()
        .map(|(i, p)| {
            let t = truth_map[&i].clone();
            (i, p, t)
        })
        .collect())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let skip_index = match args.skip {
        Some(s) => s,
        None => default_skip(args.approach.as_deref())?,
    };
    let pairs = align(&args.pred, &args.truth)?;
    let skip_pairs = pairs.iter().take_while(|(i, _, _)| *i < skip_index).count();
    let mut indices = Vec::with_capacity(pairs.len());
    let mut preds = Vec::with_capacity(pairs.len());
    let mut truths = Vec::with_capacity(pairs.len());
    for (i, p, t) in &pairs {
        indices.push(*i);
        preds.push(imageio::read_mask(p)?);
        truths.push(imageio::read_mask(t)?);
    }
    let mut report = evaluate_indexed(&indices, &preds, &truths, skip_pairs)?;
    report.skip = skip_index;

    let csv_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.pred.join("eval.csv"));
    std::fs::write(&csv_path, report.to_csv()).map_err(|e| Error::write(&csv_path, e))?;
    if let Some(path) = &args.json {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, json + "\n").map_err(|e| Error::write(path, e))?;
    }
    println!(
        "# error percentage over frames with index >= {skip_index} ({} evaluated)",
        report.frames_evaluated
    );
    println!("{}", report.summary_line());
    Ok(())
}

fn cmd_histogram(args: HistogramArgs) -> Result<()> {
    if args.bins == 0 {
        return Err(Error::Config("--bins must be at least 1".into()));
    }
    let frame = imageio::read_rgb_frame(&args.frame)?;
    let hsv = frame_to_hsv(&frame);
    std::fs::create_dir_all(&args.out).map_err(|e| Error::write(&args.out, e))?;
    for layer in Layer::ALL {
        let hist = layer_histogram(&hsv, layer, args.bins)?;
        let path = args.out.join(format!("histogram_{layer}.csv"));
        std::fs::write(&path, hist.to_csv()).map_err(|e| Error::write(&path, e))?;
    }
    println!(
        "RESULT pixels={} bins={} out={}",
        frame.width() * frame.height(),
        args.bins,
        args.out.display()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs, verbose: u8) -> Result<()> {
    let mut spec = match (&args.preset, &args.spec) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
            serde_json::from_str::<SceneSpec>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        (Some(name), None) => SceneSpec::preset(name)?,
        (None, None) => SceneSpec::preset("walker")?,
    };
    if let Some(v) = args.width {
        spec.width = v;
    }
    if let Some(v) = args.height {
        spec.height = v;
    }
    if let Some(v) = args.frame_count {
        spec.frame_count = v;
    }
    if let Some(v) = args.noise_sigma {
        spec.noise_sigma = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(v) = &args.velocity {
        let mover = spec.mover.as_mut().ok_or(Error::Spec {
            field: "mover.velocity",
            reason: "scene has no mover".into(),
        })?;
        mover.velocity = *v;
    }
    if verbose >= 1 {
        eprintln!(
            "effective scene: {}",
            serde_json::to_string(&spec).expect("spec serializes")
        );
    }
    let scene = generate(&spec)?;
    write_scene(&spec, &scene, &args.out)?;
    println!(
        "RESULT frames={} width={} height={} out={}",
        spec.frame_count,
        spec.width,
        spec.height,
        args.out.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_extract(extra: &[&str]) -> ExtractArgs {
        let mut argv = vec!["silhouette", "extract", "--input", "in"];
        argv.extend_from_slice(extra);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Extract(a) => *a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_file_and_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"approach":"gaussian","tau":0.2,"gmm":{"alpha":0.05}}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();

        let cfg = effective_config(&parse_extract(&["--config", p])).unwrap();
        assert_eq!(cfg.approach, "gaussian");
        assert_eq!(cfg.tau, 0.2);
        assert_eq!(cfg.gmm.alpha, 0.05);
        assert_eq!(cfg.k_sigma, 2.5);

        let cfg = effective_config(&parse_extract(&[
            "--config",
            p,
            "--tau",
            "0.3",
            "--approach",
            "gmm",
            "--T",
            "0.4",
            "--clean-order",
            "none",
            "--se-shape",
            "cross",
        ]))
        .unwrap();
        assert_eq!(cfg.approach, "gmm");
        assert_eq!(cfg.tau, 0.3);
        assert_eq!(cfg.gmm.bg_threshold, 0.4);
        assert_eq!(cfg.gmm.alpha, 0.05);
        assert_eq!(cfg.clean_order, CleanOrder::None);
        assert_eq!(cfg.se_shape, SeShape::Cross);
    }

    #[test]
    fn bad_enum_flags_are_config_errors() {
        let err = effective_config(&parse_extract(&["--se-shape", "blob"])).unwrap_err();
        assert_eq!(err.exit_code(), exit_code::CONFIG);
    }

    #[test]
    fn default_skips() {
        assert_eq!(default_skip(None).unwrap(), 0);
        assert_eq!(default_skip(Some("gmm")).unwrap(), 30);
        assert_eq!(default_skip(Some("gaussian")).unwrap(), 20);
        assert_eq!(default_skip(Some("framediff")).unwrap(), 1);
        assert!(default_skip(Some("nope")).is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["silhouette", "extract"]), exit_code::CONFIG);
        assert_eq!(run(["silhouette", "frobnicate"]), exit_code::CONFIG);
        assert_eq!(run(["silhouette", "--help"]), exit_code::OK);
    }
}
