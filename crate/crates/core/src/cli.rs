//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on usage errors (bad flags, invalid option
//! values), 2 on data errors (unreadable or malformed inputs, size
//! mismatches). Outputs are written to a temporary sibling and renamed into
//! place, so a failed run leaves no partial files.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::evaluation::{confusion, metrics, overlay};
use crate::image::Image;
use crate::io::{
    read_image, read_mask, write_image, write_mask, write_metrics_csv, write_overlay,
    ImageFileFormat, MetricsReport, ReportRow,
};
use crate::par::Execution;
use crate::segmentation::{
    binarize, score_map, select_optimal_level, sweep_levels_with, ScoreKind, SegmentOptions,
    SweepConfig, ThresholdPolicy, DEFAULT_J_MIN,
};
use crate::starlet::starlet_decompose;
use crate::synth::{generate, SynthParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "starseg",
    version,
    about = "Starlet segmentation of bright particles in grayscale micrographs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the detail planes w_1..w_L and the residual c_L.
    Decompose(DecomposeArgs),
    /// Segment an image into a particle mask.
    Segment(SegmentArgs),
    /// Compare a predicted mask with ground truth.
    Evaluate(EvaluateArgs),
    /// Segment at a range of depths and report metrics for each.
    Sweep(SweepArgs),
    /// Generate a synthetic image and its truth mask.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Directory receiving w1.pgm..wL.pgm and residual.pgm.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also dump unnormalized planes as CSV (one row per image row).
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long, default_value_t = DEFAULT_J_MIN)]
    pub j_min: usize,
    /// `otsu`, `positive`, or a numeric threshold.
    #[arg(long, default_value = "otsu", value_parser = parse_policy)]
    pub threshold: ThresholdPolicy,
    /// Subtract the input image from the detail sum before thresholding.
    #[arg(long)]
    pub subtract_input: bool,
    /// Mask output (`.pgm` or `.png`).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the min-max normalized score map.
    #[arg(long)]
    pub score: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Overlay output (`.ppm` or `.png`).
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    /// Metrics CSV output; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Identifier for the CSV `image` column (defaults to the prediction file stem).
    #[arg(long)]
    pub image_id: Option<String>,
    /// Value for the CSV `level` column.
    #[arg(long, default_value_t = 0)]
    pub level: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Input image; repeat together with --gt for a batch.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long, required = true)]
    pub gt: Vec<PathBuf>,
    /// Inclusive depth range, `LO..HI`.
    #[arg(long, default_value = "3..10", value_parser = parse_range)]
    pub range: (usize, usize),
    #[arg(long, default_value_t = DEFAULT_J_MIN)]
    pub j_min: usize,
    #[arg(long, default_value = "otsu", value_parser = parse_policy)]
    pub threshold: ThresholdPolicy,
    /// Subtract the input image from the detail sum before thresholding.
    #[arg(long)]
    pub subtract_input: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long, default_value_t = 20)]
    pub blobs: usize,
    #[arg(long, default_value_t = 3.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 8.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 0.6)]
    pub peak: f64,
    #[arg(long, default_value_t = 0.25)]
    pub background: f64,
    #[arg(long, default_value_t = 0.1)]
    pub roughness: f64,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long)]
    pub allow_overlap: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SynthArgs {
    pub fn params(&self) -> SynthParams {
        SynthParams {
            width: self.width,
            height: self.height,
            blob_count: self.blobs,
            radius_range: (self.r_min, self.r_max),
            blob_peak: self.peak,
            background_level: self.background,
            roughness_amplitude: self.roughness,
            noise_sigma: self.noise,
            allow_overlap: self.allow_overlap,
            seed: self.seed,
        }
    }
}

pub fn parse_policy(s: &str) -> Result<ThresholdPolicy, String> {
    match s {
        "otsu" => Ok(ThresholdPolicy::Otsu),
        "positive" => Ok(ThresholdPolicy::Positive),
        _ => s
            .parse::<f64>()
            .map_err(|_| format!("expected otsu, positive, or a number, got {s:?}"))
            .and_then(|t| ThresholdPolicy::fixed(t).map_err(|e| e.to_string())),
    }
}

pub fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound in {s:?}"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad upper bound in {s:?}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_image(path: &Path) -> Result<Image, Failure> {
    read_image(&read_file(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_mask(path: &Path) -> Result<crate::image::BinaryMask, Failure> {
    read_mask(&read_file(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn format_for(path: &Path, rgb: bool) -> Result<ImageFileFormat, Failure> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    ImageFileFormat::from_extension(ext, rgb).ok_or_else(|| {
        let allowed = if rgb { ".ppm or .png" } else { ".pgm or .png" };
        Failure::Usage(format!("{}: output must be {allowed}", path.display()))
    })
}

/// Writes every `(path, bytes)` pair through a temporary sibling and renames
/// once all temporaries exist. Temporaries are removed on failure.
fn commit(outputs: &[(PathBuf, Vec<u8>)]) -> Result<(), Failure> {
    let mut staged: Vec<(PathBuf, &Path)> = Vec::with_capacity(outputs.len());
    let cleanup = |staged: &[(PathBuf, &Path)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for (path, bytes) in outputs {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
        let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
        if let Err(e) = fs::write(&tmp, bytes) {
            cleanup(&staged);
            return Err(Failure::Data(format!("{}: {e}", path.display())));
        }
        staged.push((tmp, path));
    }
    for (tmp, path) in &staged {
        if let Err(e) = fs::rename(tmp, path) {
            cleanup(&staged);
            return Err(Failure::Data(format!("{}: {e}", path.display())));
        }
    }
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn raw_csv(img: &Image) -> Vec<u8> {
    let mut out = String::new();
    for y in 0..img.height() {
        let row: Vec<String> = img.row(y).iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn score_kind(subtract_input: bool) -> ScoreKind {
    if subtract_input {
        ScoreKind::DetailSumMinusInput
    } else {
        ScoreKind::DetailSum
    }
}

fn check_j_min(levels: usize, j_min: usize) -> Result<(), Failure> {
    if j_min == 0 {
        return Err(Failure::Usage("--j-min must be at least 1".into()));
    }
    if levels < j_min {
        return Err(Failure::Usage(format!(
            "--levels {levels} is below j_min = {j_min}: the score map sums detail levels {j_min}..L"
        )));
    }
    Ok(())
}

fn decompose(args: &DecomposeArgs) -> Result<(), Failure> {
    if args.levels == 0 {
        return Err(Failure::Usage("--levels must be at least 1".into()));
    }
    let img = load_image(&args.input)?;
    let d = starlet_decompose(&img, args.levels)?;
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::Data(format!("{}: {e}", args.out_dir.display())))?;
    let mut outputs = Vec::new();
    for (i, w) in d.details().iter().enumerate() {
        let j = i + 1;
        outputs.push((
            args.out_dir.join(format!("w{j}.pgm")),
            write_image(&w.normalized(), ImageFileFormat::PgmBinary)?,
        ));
        if args.raw {
            outputs.push((args.out_dir.join(format!("w{j}.csv")), raw_csv(w)));
        }
    }
    outputs.push((
        args.out_dir.join("residual.pgm"),
        write_image(d.residual(), ImageFileFormat::PgmBinary)?,
    ));
    if args.raw {
        outputs.push((args.out_dir.join("residual.csv"), raw_csv(d.residual())));
    }
    commit(&outputs)
}

fn segment(args: &SegmentArgs) -> Result<(), Failure> {
    check_j_min(args.levels, args.j_min)?;
    let mask_format = format_for(&args.out, false)?;
    let score_format = args
        .score
        .as_deref()
        .map(|p| format_for(p, false))
        .transpose()?;
    let img = load_image(&args.input)?;
    let d = starlet_decompose(&img, args.levels)?;
    let score = score_map(&d, &img, args.j_min, score_kind(args.subtract_input))?;
    let mask = binarize(&score, args.threshold);
    let mut outputs = vec![(args.out.clone(), write_mask(&mask, mask_format)?)];
    if let (Some(path), Some(fmt)) = (&args.score, score_format) {
        outputs.push((
            path.clone(),
            write_image(&score.to_image().normalized(), fmt)?,
        ));
    }
    commit(&outputs)
}

fn evaluate(args: &EvaluateArgs) -> Result<(), Failure> {
    let overlay_format = args
        .overlay
        .as_deref()
        .map(|p| format_for(p, true))
        .transpose()?;
    let pred = load_mask(&args.pred)?;
    let gt = load_mask(&args.gt)?;
    let counts = confusion(&pred, &gt)?;
    let m = metrics(&counts)?;
    let report = MetricsReport {
        rows: vec![ReportRow {
            image: args.image_id.clone().unwrap_or_else(|| stem(&args.pred)),
            level: args.level,
            counts,
            metrics: m,
            chosen: false,
        }],
    };
    let csv = write_metrics_csv(&report);
    let mut outputs = Vec::new();
    if let (Some(path), Some(fmt)) = (&args.overlay, overlay_format) {
        outputs.push((path.clone(), write_overlay(&overlay(&pred, &gt)?, fmt)?));
    }
    match &args.out {
        Some(path) => outputs.push((path.clone(), csv)),
        None => print!("{}", String::from_utf8_lossy(&csv)),
    }
    commit(&outputs)
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    if args.input.len() != args.gt.len() {
        return Err(Failure::Usage(format!(
            "{} --input paths but {} --gt paths",
            args.input.len(),
            args.gt.len()
        )));
    }
    check_j_min(args.range.0, args.j_min)?;
    let cfg = SweepConfig {
        lo: args.range.0,
        hi: args.range.1,
        options: SegmentOptions {
            j_min: args.j_min,
            policy: args.threshold,
            score: score_kind(args.subtract_input),
        },
    };
    let jobs: Vec<(&PathBuf, &PathBuf)> = args.input.iter().zip(&args.gt).collect();
    // Files run concurrently; each file's sweep runs its own loops sequentially.
    let results = Execution::default().map(&jobs, |(input, gt)| -> Result<_, Failure> {
        let img = load_image(input)?;
        let gt = load_mask(gt)?;
        let sweep = sweep_levels_with(&img, &gt, cfg, Execution::Sequential)?;
        let chosen = select_optimal_level(&sweep.entries)?;
        Ok((stem(input), sweep, chosen))
    });
    let mut report = MetricsReport::default();
    for r in results {
        let (id, sweep, chosen) = r?;
        if let Some(cap) = sweep.capped_at {
            eprintln!(
                "{id}: levels capped at {cap} (requested up to {}) by image size",
                sweep.requested.1
            );
        }
        report.push_sweep(&id, &sweep, Some(chosen));
    }
    commit(&[(args.out.clone(), write_metrics_csv(&report))])
}

fn synth(args: &SynthArgs) -> Result<(), Failure> {
    let image_format = format_for(&args.out, false)?;
    let truth_format = format_for(&args.truth, false)?;
    let params = args.params();
    params
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let sample = generate(&params)?;
    commit(&[
        (args.out.clone(), write_image(&sample.image, image_format)?),
        (args.truth.clone(), write_mask(&sample.truth, truth_format)?),
    ])
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Decompose(a) => decompose(a),
        Command::Segment(a) => segment(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Sweep(a) => sweep(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            EXIT_DATA
        }
    }
}
