//! `hmt` subcommands.
//!
//! Exit codes: 0 on success, 1 for operational failures (unreadable or
//! malformed files, mismatched inputs), 2 for usage errors (unknown flags,
//! invalid values or combinations).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heatmap_codec::{
    encode, DecodeConfig, DecodeMethod, Decoder, EncodingConfig, EncodingMode, GaussianParams, Normalization,
    NoiseModel, Quantiser, TrialSpec,
};

use crate::bench::{self, EvalOptions};
use crate::format::{read_heatmaps, write_heatmaps};
use crate::keypoints::{read_keypoints, write_keypoints, Keypoint, KeypointDocument};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "hmt", version, about = "Keypoint heatmap encoding, decoding and benchmarking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one Gaussian target heatmap per keypoint.
    Encode(EncodeArgs),
    /// Decode a heatmap file into keypoints.
    Decode(DecodeArgs),
    /// Run the synthetic decoder benchmark.
    Bench(BenchArgs),
    /// PCK and mean error of predictions against ground truth.
    Eval(EvalArgs),
    /// Print the header and per-heatmap maxima of a heatmap file.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Biased,
    Unbiased,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum QuantiseArg {
    Floor,
    Ceil,
    Round,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormalizationArg {
    Normalized,
    #[value(name = "peak_one")]
    PeakOne,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Argmax,
    Shift,
    Dark,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseArg {
    None,
    Gaussian,
    Impulse,
}

impl From<ModeArg> for EncodingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Biased => EncodingMode::Biased,
            ModeArg::Unbiased => EncodingMode::Unbiased,
        }
    }
}

impl From<QuantiseArg> for Quantiser {
    fn from(q: QuantiseArg) -> Self {
        match q {
            QuantiseArg::Floor => Quantiser::Floor,
            QuantiseArg::Ceil => Quantiser::Ceil,
            QuantiseArg::Round => Quantiser::Round,
        }
    }
}

impl From<NormalizationArg> for Normalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::Normalized => Normalization::Normalized,
            NormalizationArg::PeakOne => Normalization::PeakOne,
        }
    }
}

impl From<MethodArg> for DecodeMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Argmax => DecodeMethod::Argmax,
            MethodArg::Shift => DecodeMethod::StandardShift,
            MethodArg::Dark => DecodeMethod::Dark,
        }
    }
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Keypoint document with original-image coordinates.
    #[arg(long)]
    pub keypoints: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub height: usize,
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub sigma: f64,
    /// Resolution reduction ratio; defaults to the document's `lambda`.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value = "unbiased")]
    pub mode: ModeArg,
    /// Quantiser for biased encoding [default: floor].
    #[arg(long, value_enum)]
    pub quantise: Option<QuantiseArg>,
    #[arg(long, value_enum, default_value = "peak_one")]
    pub normalization: NormalizationArg,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub heatmaps: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "dark")]
    pub method: MethodArg,
    /// Modulate heatmaps before decoding (default when --sigma is given).
    #[arg(long, overrides_with = "no_modulate")]
    pub modulate: bool,
    /// Skip modulation.
    #[arg(long)]
    pub no_modulate: bool,
    /// Gaussian σ of the training targets, heatmap pixels.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = heatmap_codec::decode::DEFAULT_STEP_CAP)]
    pub step_cap: f64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long, default_value_t = 48)]
    pub width: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_lo: f64,
    #[arg(long, default_value_t = 3.0)]
    pub sigma_hi: f64,
    #[arg(long, default_value_t = 4.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "unbiased")]
    pub encoding: ModeArg,
    #[arg(long, value_enum, default_value = "floor")]
    pub quantise: QuantiseArg,
    #[arg(long, value_enum, default_value = "none")]
    pub noise: NoiseArg,
    /// Noise amplitude as a fraction of the heatmap peak.
    #[arg(long, default_value_t = 0.02)]
    pub amplitude: f64,
    /// Impulse probability per pixel.
    #[arg(long, default_value_t = 0.02)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit the machine-readable report.
    #[arg(long)]
    pub json: bool,
    /// Include throughput in the JSON report (makes it run-dependent).
    #[arg(long)]
    pub timing: bool,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub pck_threshold: f64,
    /// Normalisation distance, original-image pixels.
    #[arg(long)]
    pub norm: f64,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub heatmaps: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Failed(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn positive(flag: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("{flag} must be a finite number > 0, got {v}")))
    }
}

/// Executes a parsed command, writing data to `out` and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Encode(a) => cmd_encode(a, err),
        Command::Decode(a) => cmd_decode(a),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Inspect(a) => cmd_inspect(a, out),
    }
}

fn io_out(e: std::io::Error) -> CliError {
    CliError::Failed(Error::Io { path: "<stdout>".into(), source: e })
}

fn with_file(path: &std::path::Path, e: Error) -> CliError {
    match e {
        Error::Io { .. } => CliError::Failed(e),
        other => CliError::Failed(Error::InvalidInput(format!("{}: {other}", path.display()))),
    }
}

pub fn cmd_encode(a: EncodeArgs, err: &mut dyn Write) -> Result<(), CliError> {
    let sigma = GaussianParams::new(positive("--sigma", a.sigma)?).map_err(|e| usage(format!("--sigma: {e}")))?;
    if a.height < 3 || a.width < 3 {
        return Err(usage("--height and --width must be at least 3"));
    }
    let doc = read_keypoints(&a.keypoints).map_err(|e| with_file(&a.keypoints, e))?;
    let lambda = match a.lambda {
        Some(l) => positive("--lambda", l)?,
        None => doc.lambda,
    };
    let mode = EncodingMode::from(a.mode);
    if mode == EncodingMode::Unbiased && a.quantise.is_some() {
        let _ = writeln!(err, "warning: --quantise is ignored with --mode unbiased");
    }
    let config = EncodingConfig::new(lambda, sigma)
        .with_mode(mode)
        .with_quantiser(a.quantise.map(Into::into).unwrap_or_default())
        .with_normalization(a.normalization.into());
    if doc.keypoints.is_empty() {
        return Err(CliError::Failed(Error::InvalidInput(format!("{}: no keypoints", a.keypoints.display()))));
    }
    let heatmaps = doc
        .keypoints
        .iter()
        .map(|k| encode(k.point(), &config, a.height, a.width).map(|(h, _)| h))
        .collect::<heatmap_codec::Result<Vec<_>>>()
        .map_err(|e| CliError::Failed(e.into()))?;
    write_heatmaps(&a.out, &heatmaps)?;
    Ok(())
}

pub fn decode_config(a: &DecodeArgs) -> Result<DecodeConfig, CliError> {
    let lambda = positive("--lambda", a.lambda)?;
    let step_cap = positive("--step-cap", a.step_cap)?;
    let sigma = a
        .sigma
        .map(|s| positive("--sigma", s).and_then(|s| GaussianParams::new(s).map_err(|e| usage(e.to_string()))))
        .transpose()?;
    let method = DecodeMethod::from(a.method);
    if method == DecodeMethod::Dark && sigma.is_none() {
        return Err(usage("--method dark requires --sigma"));
    }
    if a.modulate && sigma.is_none() {
        return Err(usage("--modulate requires --sigma"));
    }
    // modulation is on by default whenever a σ is available
    let modulate = !a.no_modulate && sigma.is_some();
    let config = DecodeConfig {
        method,
        modulate,
        sigma,
        step_cap,
        ..DecodeConfig::argmax(lambda)
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

pub fn cmd_decode(a: DecodeArgs) -> Result<(), CliError> {
    let config = decode_config(&a)?;
    let heatmaps = read_heatmaps(&a.heatmaps).map_err(|e| with_file(&a.heatmaps, e))?;
    let decoder = Decoder::new(config).map_err(|e| usage(e.to_string()))?;
    let results: Vec<_> = heatmaps.iter().map(|h| decoder.decode(h)).collect();
    let doc = KeypointDocument {
        lambda: config.lambda,
        keypoints: results.iter().map(|r| Keypoint::new(r.p_hat.x, r.p_hat.y, r.confidence)).collect(),
        fallbacks: Some(results.iter().map(|r| r.fallback).collect()),
    };
    write_keypoints(&a.out, &doc)?;
    Ok(())
}

pub fn trial_spec(a: &BenchArgs) -> Result<TrialSpec, CliError> {
    if a.trials == 0 {
        return Err(usage("--trials must be >= 1"));
    }
    if a.workers == 0 {
        return Err(usage("--workers must be >= 1"));
    }
    if !(a.sigma_lo > 0.0 && a.sigma_lo <= a.sigma_hi && a.sigma_hi.is_finite()) {
        return Err(usage(format!("--sigma-lo/--sigma-hi must satisfy 0 < lo <= hi, got {} and {}", a.sigma_lo, a.sigma_hi)));
    }
    positive("--lambda", a.lambda)?;
    if !(a.amplitude.is_finite() && a.amplitude >= 0.0) {
        return Err(usage(format!("--amplitude must be >= 0, got {}", a.amplitude)));
    }
    if !(0.0..=1.0).contains(&a.density) {
        return Err(usage(format!("--density must lie in [0, 1], got {}", a.density)));
    }
    let noise = match a.noise {
        NoiseArg::None => NoiseModel::none(),
        NoiseArg::Gaussian => NoiseModel::gaussian(a.amplitude),
        NoiseArg::Impulse => NoiseModel::impulse(a.amplitude, a.density),
    };
    let spec = TrialSpec::new(a.trials, a.height, a.width, (a.sigma_lo, a.sigma_hi), a.lambda, a.seed)
        .with_encoding(a.encoding.into(), a.quantise.into())
        .with_noise(noise);
    spec.validate().map_err(|e| usage(format!("--height/--width: {e}")))?;
    Ok(spec)
}

pub fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = trial_spec(&a)?;
    let methods = bench::default_methods(&spec)?;
    let options = EvalOptions { workers: a.workers, timing_repeats: 3, ..Default::default() };
    let stats = bench::evaluate(&spec, &methods, &options)?;
    if a.json {
        out.write_all(bench::report_json(&spec, &stats, a.timing).as_bytes()).map_err(io_out)?;
    } else {
        let mut text = bench::compare_report(&stats);
        if let (Some(ratio), Some(dark)) =
            (bench::overhead_ratio(&stats), stats.iter().find(|s| s.method == DecodeMethod::Dark && s.modulate))
        {
            text.push_str(&format!(
                "\ndark+dm costs {ratio:.2}x argmax per heatmap; {:.0} heatmaps/s with {} worker(s)\n",
                dark.throughput, a.workers
            ));
        }
        out.write_all(text.as_bytes()).map_err(io_out)?;
    }
    Ok(())
}

pub fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let threshold = positive("--pck-threshold", a.pck_threshold)?;
    let norm = positive("--norm", a.norm)?;
    let pred = read_keypoints(&a.pred).map_err(|e| with_file(&a.pred, e))?;
    let gt = read_keypoints(&a.gt).map_err(|e| with_file(&a.gt, e))?;
    if pred.keypoints.len() != gt.keypoints.len() {
        return Err(CliError::Failed(Error::InvalidInput(format!(
            "{} has {} keypoints but {} has {}",
            a.pred.display(),
            pred.keypoints.len(),
            a.gt.display(),
            gt.keypoints.len()
        ))));
    }
    let p: Vec<_> = pred.keypoints.iter().map(Keypoint::point).collect();
    let g: Vec<_> = gt.keypoints.iter().map(Keypoint::point).collect();
    let result = heatmap_codec::pck(&p, &g, threshold, norm).map_err(|e| CliError::Failed(e.into()))?;
    let mean = p.iter().zip(&g).map(|(a, b)| a.distance(*b)).sum::<f64>() / p.len() as f64;
    writeln!(out, "keypoints: {}", p.len()).map_err(io_out)?;
    writeln!(out, "pck@{threshold} (norm {norm}): {}", result.fraction).map_err(io_out)?;
    writeln!(out, "mean error: {mean}").map_err(io_out)?;
    Ok(())
}

pub fn cmd_inspect(a: InspectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let heatmaps = read_heatmaps(&a.heatmaps).map_err(|e| with_file(&a.heatmaps, e))?;
    let (h, w) = (heatmaps[0].height(), heatmaps[0].width());
    let mut text = format!("HMAP v1 f32le K={} H={h} W={w}\n", heatmaps.len());
    for (k, map) in heatmaps.iter().enumerate() {
        let (m, v) = heatmap_codec::argmax_decode(map);
        text.push_str(&format!("{k}: max {v} at ({}, {}) min {}\n", m.x, m.y, map.min()));
    }
    out.write_all(text.as_bytes()).map_err(io_out)
}
