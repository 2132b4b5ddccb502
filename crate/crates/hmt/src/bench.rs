//! Synthetic decoder benchmark.
//!
//! [`evaluate`] generates the trials of a [`TrialSpec`], decodes each with
//! every configured method and summarises the original-space Euclidean error
//! against the pre-quantisation ground truth. Trials are processed in chunks;
//! within a chunk, generation and decoding fan out over `workers` threads.
//! Per-trial errors are collected in index order, so every statistic except
//! throughput is identical for any worker count.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use heatmap_codec::metrics::pck_from_errors;
use heatmap_codec::synth::generate_trial;
use heatmap_codec::{
    DecodeConfig, DecodeMethod, Decoder, EncodingMode, ErrorSummary, Fallback, FallbackCounts, GaussianParams,
    Heatmap, NoiseKind, PckResult, Quantiser, Trial, TrialSpec,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub label: String,
    pub config: DecodeConfig,
}

impl MethodSpec {
    pub fn new(label: impl Into<String>, config: DecodeConfig) -> Self {
        Self { label: label.into(), config }
    }
}

/// Argmax, standard shift, and dark with and without modulation. The
/// modulation σ is the midpoint of the spec's σ range.
pub fn default_methods(spec: &TrialSpec) -> Result<Vec<MethodSpec>> {
    let sigma = GaussianParams::new(spec.nominal_sigma())?;
    let lambda = spec.lambda;
    Ok(vec![
        MethodSpec::new("argmax", DecodeConfig::argmax(lambda)),
        MethodSpec::new("shift", DecodeConfig::standard_shift(lambda)),
        MethodSpec::new("dark+dm", DecodeConfig::dark(lambda, sigma)),
        MethodSpec::new("dark", DecodeConfig::dark(lambda, sigma).with_modulation(false)),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Worker threads; 1 runs everything on the calling thread.
    pub workers: usize,
    /// PCK thresholds, as fractions of `pck_norm`.
    pub pck_thresholds: Vec<f64>,
    /// PCK normalisation distance; defaults to λ (one heatmap pixel).
    pub pck_norm: Option<f64>,
    /// Each chunk is decoded this many times and the fastest pass is timed.
    pub timing_repeats: usize,
    pub chunk_size: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            pck_thresholds: vec![0.1, 0.25, 0.5],
            pck_norm: None,
            timing_repeats: 1,
            chunk_size: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub label: String,
    pub method: DecodeMethod,
    pub modulate: bool,
    /// Original-image pixels.
    pub summary: ErrorSummary,
    pub pck: Vec<PckResult>,
    pub fallbacks: FallbackCounts,
    /// Heatmaps decoded per second (wall clock, all workers).
    pub throughput: f64,
    /// Per-trial errors in trial order.
    pub errors: Vec<f64>,
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn generate_chunk(spec: &TrialSpec, range: std::ops::Range<usize>, parallel: bool) -> Result<Vec<Trial>> {
    let res: heatmap_codec::Result<Vec<Trial>> = if parallel {
        range.into_par_iter().map(|i| generate_trial(spec, i)).collect()
    } else {
        range.map(|i| generate_trial(spec, i)).collect()
    };
    Ok(res?)
}

fn decode_chunk(decoder: &Decoder, heatmaps: &[&Heatmap], parallel: bool) -> Vec<heatmap_codec::DecodeResult> {
    if parallel {
        heatmaps.par_iter().map(|h| decoder.decode(h)).collect()
    } else {
        heatmaps.iter().map(|h| decoder.decode(h)).collect()
    }
}

pub fn evaluate(spec: &TrialSpec, methods: &[MethodSpec], options: &EvalOptions) -> Result<Vec<ErrorStats>> {
    spec.validate()?;
    if methods.is_empty() {
        return Err(Error::InvalidInput("at least one decode method is required".into()));
    }
    let decoders = methods.iter().map(|m| Decoder::new(m.config)).collect::<heatmap_codec::Result<Vec<_>>>()?;
    let parallel = options.workers > 1;
    let chunk = options.chunk_size.max(1);
    let repeats = options.timing_repeats.max(1);

    let mut errors = vec![Vec::with_capacity(spec.count); methods.len()];
    let mut fallbacks = vec![FallbackCounts::default(); methods.len()];
    let mut elapsed = vec![Duration::ZERO; methods.len()];

    with_pool(options.workers, || -> Result<()> {
        let mut start = 0;
        while start < spec.count {
            let end = (start + chunk).min(spec.count);
            let trials = generate_chunk(spec, start..end, parallel)?;
            let heatmaps: Vec<&Heatmap> = trials.iter().map(|t| &t.heatmap).collect();
            for (k, decoder) in decoders.iter().enumerate() {
                let mut best = Duration::MAX;
                let mut results = Vec::new();
                for _ in 0..repeats {
                    let t0 = Instant::now();
                    results = decode_chunk(decoder, &heatmaps, parallel);
                    best = best.min(t0.elapsed());
                }
                elapsed[k] += best;
                for (r, t) in results.iter().zip(&trials) {
                    errors[k].push(r.p_hat.distance(t.center));
                    fallbacks[k].record(r.fallback);
                }
            }
            start = end;
        }
        Ok(())
    })??;

    let norm = options.pck_norm.unwrap_or(spec.lambda);
    Ok(methods
        .iter()
        .zip(errors)
        .zip(fallbacks)
        .zip(elapsed)
        .map(|(((m, errs), fb), dt)| ErrorStats {
            label: m.label.clone(),
            method: m.config.method,
            modulate: m.config.modulate,
            summary: ErrorSummary::from_errors(&errs).expect("count >= 1"),
            pck: options.pck_thresholds.iter().map(|&t| pck_from_errors(&errs, t, norm)).collect(),
            fallbacks: fb,
            throughput: spec.count as f64 / dt.as_secs_f64().max(1e-12),
            errors: errs,
        })
        .collect())
}

/// Cost of the modulated dark decoder relative to argmax, per heatmap.
pub fn overhead_ratio(stats: &[ErrorStats]) -> Option<f64> {
    let argmax = stats.iter().find(|s| s.method == DecodeMethod::Argmax)?;
    let dark = stats.iter().find(|s| s.method == DecodeMethod::Dark && s.modulate)?;
    Some(argmax.throughput / dark.throughput)
}

const FALLBACK_HEADERS: [(&str, Fallback); 5] = [
    ("none", Fallback::None),
    ("border", Fallback::Border),
    ("nnd", Fallback::NonNegativeDefinite),
    ("capped", Fallback::StepCapped),
    ("ambig", Fallback::AmbiguousSecondMax),
];

/// Aligned plain-text table, one row per method in input order.
pub fn compare_report(stats: &[ErrorStats]) -> String {
    let mut header: Vec<String> = ["method", "mean", "median", "p95"].iter().map(|s| s.to_string()).collect();
    if let Some(first) = stats.first() {
        header.extend(first.pck.iter().map(|p| format!("pck@{}", p.threshold)));
    }
    header.extend(FALLBACK_HEADERS.iter().map(|(h, _)| h.to_string()));
    header.push("heatmaps/s".into());

    let rows: Vec<Vec<String>> = stats
        .iter()
        .map(|s| {
            let mut row = vec![
                s.label.clone(),
                format!("{:.6}", s.summary.mean),
                format!("{:.6}", s.summary.median),
                format!("{:.6}", s.summary.p95),
            ];
            row.extend(s.pck.iter().map(|p| format!("{:.4}", p.fraction)));
            row.extend(FALLBACK_HEADERS.iter().map(|(_, f)| s.fallbacks.get(*f).to_string()));
            row.push(format!("{:.0}", s.throughput));
            row
        })
        .collect();

    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&rows) {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| if c == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

#[derive(Serialize)]
struct SpecJson {
    trials: usize,
    height: usize,
    width: usize,
    sigma_lo: f64,
    sigma_hi: f64,
    lambda: f64,
    encoding: &'static str,
    quantiser: &'static str,
    noise: &'static str,
    amplitude: f64,
    density: f64,
    seed: u64,
}

#[derive(Serialize)]
struct PckJson {
    threshold: f64,
    norm: f64,
    fraction: f64,
}

#[derive(Serialize)]
struct FallbackJson {
    none: usize,
    border: usize,
    non_negative_definite: usize,
    step_capped: usize,
    ambiguous_second_max: usize,
}

#[derive(Serialize)]
struct MethodJson<'a> {
    label: &'a str,
    method: &'static str,
    modulate: bool,
    count: usize,
    mean: f64,
    median: f64,
    p95: f64,
    max: f64,
    std_error: f64,
    pck: Vec<PckJson>,
    fallbacks: FallbackJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    throughput: Option<f64>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    spec: SpecJson,
    methods: Vec<MethodJson<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    overhead_ratio: Option<f64>,
}

pub fn encoding_label(mode: EncodingMode) -> &'static str {
    match mode {
        EncodingMode::Biased => "biased",
        EncodingMode::Unbiased => "unbiased",
    }
}

pub fn quantiser_label(q: Quantiser) -> &'static str {
    match q {
        Quantiser::Floor => "floor",
        Quantiser::Ceil => "ceil",
        Quantiser::Round => "round",
    }
}

pub fn noise_label(kind: NoiseKind) -> &'static str {
    match kind {
        NoiseKind::None => "none",
        NoiseKind::GaussianAdditive => "gaussian",
        NoiseKind::Impulse => "impulse",
    }
}

/// Machine-readable report. Timing fields are included only when
/// `include_timing` is set, so the default document is byte-identical
/// across runs with the same spec.
pub fn report_json(spec: &TrialSpec, stats: &[ErrorStats], include_timing: bool) -> String {
    let report = ReportJson {
        spec: SpecJson {
            trials: spec.count,
            height: spec.height,
            width: spec.width,
            sigma_lo: spec.sigma_range.0,
            sigma_hi: spec.sigma_range.1,
            lambda: spec.lambda,
            encoding: encoding_label(spec.encoding_mode),
            quantiser: quantiser_label(spec.quantiser),
            noise: noise_label(spec.noise.kind),
            amplitude: spec.noise.amplitude,
            density: spec.noise.density,
            seed: spec.seed,
        },
        methods: stats
            .iter()
            .map(|s| MethodJson {
                label: &s.label,
                method: s.method.label(),
                modulate: s.modulate,
                count: s.summary.count,
                mean: s.summary.mean,
                median: s.summary.median,
                p95: s.summary.p95,
                max: s.summary.max,
                std_error: s.summary.std_error,
                pck: s.pck.iter().map(|p| PckJson { threshold: p.threshold, norm: p.norm, fraction: p.fraction }).collect(),
                fallbacks: FallbackJson {
                    none: s.fallbacks.none,
                    border: s.fallbacks.border,
                    non_negative_definite: s.fallbacks.non_negative_definite,
                    step_capped: s.fallbacks.step_capped,
                    ambiguous_second_max: s.fallbacks.ambiguous_second_max,
                },
                throughput: include_timing.then_some(s.throughput),
            })
            .collect(),
        overhead_ratio: if include_timing { overhead_ratio(stats) } else { None },
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serialises");
    s.push('\n');
    s
}
