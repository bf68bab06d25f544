//! The full classification experiment: spectra → kernel → kernel PCA →
//! classifier, repeated over deterministic splits and aggregated.
//!
//! The kernel is built over all rows before splitting (transductive
//! protocol), so spectra, kernel, and embedding are computed once and only
//! the split and classifier vary per run. Wall-clock timings live in
//! [`RunTimings`], outside the report, so reports are byte-identical across
//! reruns of the same seed.

use std::time::Instant;

use crate::alphabet::{Alphabet, AmbiguityPolicy};
use crate::classify::{knn_classify, nearest_centroid_classify};
use crate::error::{Error, Result};
use crate::fasta::SequenceRecord;
use crate::heatmap::{class_heatmap, ClassHeatmap};
use crate::kernel::{kernel_matrix, psd_adjust, KernelKind, PsdMode};
use crate::kernel_pca::{project, Embedding, KpcaTransform};
use crate::metrics::{evaluate, MetricBlock};
use crate::spectrum::spectrum_matrix;
use crate::split::{stratified_split, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classifier {
    Knn,
    Centroid,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub k: usize,
    /// Alphabet selector: `dna`, `protein`, or `custom:<chars>`.
    pub alphabet: String,
    /// L1-normalize spectra (frequencies) rather than raw counts.
    pub normalize: bool,
    pub policy: AmbiguityPolicy,
    /// Scalar applied to spectra before kernel construction.
    pub lift_scale: f64,
    pub kernel: KernelKind,
    pub psd_mode: PsdMode,
    pub psd_epsilon: Option<f64>,
    pub kpca_transform: KpcaTransform,
    pub components: usize,
    pub classifier: Classifier,
    pub neighbors: usize,
    pub split: SplitSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 3,
            alphabet: "dna".into(),
            normalize: true,
            policy: AmbiguityPolicy::MaskKmers,
            lift_scale: 1.0,
            kernel: KernelKind::HyperboloidDistance,
            psd_mode: PsdMode::Clip,
            psd_epsilon: None,
            kpca_transform: KpcaTransform::Raw,
            components: 100,
            classifier: Classifier::Knn,
            neighbors: 5,
            split: SplitSpec::default(),
        }
    }
}

/// Deterministic experiment report; serializes with stable key order.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    pub n: usize,
    pub classes: Vec<String>,
    /// The transform actually used (differs from the config on fallback).
    pub effective_transform: KpcaTransform,
    pub retained_components: usize,
    pub dropped_negative_eigenvalues: usize,
    pub diag_shift: f64,
    pub per_run: Vec<MetricBlock>,
    pub mean: MetricBlock,
    pub sd: MetricBlock,
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Wall-clock measurements, reported separately so the report itself stays
/// reproducible byte-for-byte.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunTimings {
    pub spectra_sec: f64,
    pub kernel_sec: f64,
    pub kpca_sec: f64,
    /// Classifier time per run (fit + predict).
    pub per_run_classifier_sec: Vec<f64>,
    pub total_sec: f64,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub report: EvalReport,
    pub embedding: Embedding,
    pub heatmap: ClassHeatmap,
    pub ids: Vec<String>,
    pub labels: Vec<String>,
    pub timings: RunTimings,
}

pub fn run_experiment(
    records: &[SequenceRecord],
    config: &ExperimentConfig,
) -> Result<ExperimentOutput> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    if matches!(config.kernel, KernelKind::Adjusted(_)) {
        return Err(Error::Numerical(
            "experiment kernel must be hyperboloid_distance or euclidean_distance".into(),
        ));
    }
    if !(config.lift_scale.is_finite() && config.lift_scale > 0.0) {
        return Err(Error::Numerical(format!(
            "lift scale {} must be finite and positive",
            config.lift_scale
        )));
    }
    if config.split.runs == 0 {
        return Err(Error::SplitInfeasible("runs must be at least 1".into()));
    }
    if config.classifier == Classifier::Knn && config.neighbors == 0 {
        return Err(Error::Numerical("neighbors must be at least 1".into()));
    }
    let alphabet = Alphabet::parse_spec(&config.alphabet)?;

    let mut ids = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for rec in records {
        let label = rec
            .label
            .clone()
            .ok_or_else(|| Error::MissingLabel(rec.id.clone()))?;
        ids.push(rec.id.clone());
        labels.push(label);
    }
    let mut classes = labels.clone();
    classes.sort();
    classes.dedup();

    let total_start = Instant::now();
    let mut warnings = Vec::new();

    let stage = Instant::now();
    let mut spectra = spectrum_matrix(
        records,
        config.k,
        &alphabet,
        config.policy,
        config.normalize,
    )?;
    let spectra_sec = stage.elapsed().as_secs_f64();

    let zero_rows: Vec<&str> = (0..spectra.rows())
        .filter(|&i| spectra.row(i).iter().all(|&v| v == 0.0))
        .map(|i| ids[i].as_str())
        .collect();
    if !zero_rows.is_empty() {
        warnings.push(format!(
            "{} all-zero spectra (sequence shorter than k or fully masked): {}",
            zero_rows.len(),
            zero_rows.join(", ")
        ));
    }

    if config.lift_scale != 1.0 {
        for v in spectra.data_mut() {
            *v *= config.lift_scale;
        }
    }

    let stage = Instant::now();
    let kernel = kernel_matrix(&spectra, config.kernel)?;
    let adjusted = psd_adjust(&kernel, config.psd_mode, config.psd_epsilon)?;
    let kernel_sec = stage.elapsed().as_secs_f64();

    // Distance matrices fed raw can center to a NSD operator (metrics of
    // negative type do); fall back to classical MDS when that happens and
    // say so in the warnings.
    let stage = Instant::now();
    let components = config
        .components
        .min(records.len().saturating_sub(1))
        .max(1);
    let (embedding, effective_transform) = match project(
        &adjusted,
        components,
        config.psd_mode,
        config.kpca_transform,
    ) {
        Ok(embedding) => (embedding, config.kpca_transform),
        Err(Error::DegenerateKernel) if config.kpca_transform == KpcaTransform::Raw => {
            warnings.push(
                "raw kernel is degenerate after centering; fell back to the mds transform".into(),
            );
            let embedding = project(&adjusted, components, config.psd_mode, KpcaTransform::Mds)?;
            (embedding, KpcaTransform::Mds)
        }
        Err(e) => return Err(e),
    };
    let kpca_sec = stage.elapsed().as_secs_f64();

    let heatmap = class_heatmap(&embedding.coords, &labels)?;
    warnings.extend(heatmap.warnings.iter().cloned());

    let mut per_run = Vec::with_capacity(config.split.runs);
    let mut per_run_classifier_sec = Vec::with_capacity(config.split.runs);
    for run in 0..config.split.runs {
        let split = stratified_split(&labels, &config.split, run).map_err(|e| e.in_run(run))?;
        if run == 0 {
            warnings.extend(split.warnings.iter().map(|w| format!("split: {w}")));
        }
        let train_rows = embedding.coords.select_rows(&split.train);
        let test_rows = embedding.coords.select_rows(&split.test);
        let train_labels: Vec<String> = split.train.iter().map(|&i| labels[i].clone()).collect();
        let test_truth: Vec<String> = split.test.iter().map(|&i| labels[i].clone()).collect();

        let stage = Instant::now();
        let (predictions, scores) = match config.classifier {
            Classifier::Knn => {
                knn_classify(&train_rows, &train_labels, &test_rows, config.neighbors)
                    .map_err(|e| e.in_run(run))?
            }
            Classifier::Centroid => {
                nearest_centroid_classify(&train_rows, &train_labels, &test_rows)
                    .map_err(|e| e.in_run(run))?
            }
        };
        per_run_classifier_sec.push(stage.elapsed().as_secs_f64());

        let block = evaluate(&predictions, &scores, &test_truth).map_err(|e| e.in_run(run))?;
        per_run.push(block);
    }

    let (mean, sd) = summarize(&per_run);
    let report = EvalReport {
        config: config.clone(),
        n: records.len(),
        classes,
        effective_transform,
        retained_components: embedding.components(),
        dropped_negative_eigenvalues: embedding.dropped_negative,
        diag_shift: adjusted.diag_shift(),
        per_run,
        mean,
        sd,
        warnings,
    };
    let timings = RunTimings {
        spectra_sec,
        kernel_sec,
        kpca_sec,
        per_run_classifier_sec,
        total_sec: total_start.elapsed().as_secs_f64(),
    };
    Ok(ExperimentOutput {
        report,
        embedding,
        heatmap,
        ids,
        labels,
        timings,
    })
}

/// Flat TSV of per-run metrics plus mean/sd rows, for tabulation.
pub fn write_metrics_tsv<W: std::io::Write>(w: &mut W, report: &EvalReport) -> Result<()> {
    writeln!(
        w,
        "run\taccuracy\tprecision_weighted\trecall_weighted\tf1_weighted\tf1_macro\troc_auc_ovr"
    )?;
    let mut row = |tag: &str, b: &MetricBlock| {
        writeln!(
            w,
            "{tag}\t{}\t{}\t{}\t{}\t{}\t{}",
            b.accuracy,
            b.precision_weighted,
            b.recall_weighted,
            b.f1_weighted,
            b.f1_macro,
            b.roc_auc_ovr
        )
    };
    for (i, block) in report.per_run.iter().enumerate() {
        row(&i.to_string(), block)?;
    }
    row("mean", &report.mean)?;
    row("sd", &report.sd)?;
    Ok(())
}

/// Per-metric mean and standard deviation (sample sd for ≥ 2 runs, 0 for a
/// single run).
pub fn summarize(blocks: &[MetricBlock]) -> (MetricBlock, MetricBlock) {
    let fields: [fn(&MetricBlock) -> f64; 6] = [
        |b| b.accuracy,
        |b| b.precision_weighted,
        |b| b.recall_weighted,
        |b| b.f1_weighted,
        |b| b.f1_macro,
        |b| b.roc_auc_ovr,
    ];
    let n = blocks.len() as f64;
    let mut means = [0.0f64; 6];
    let mut sds = [0.0f64; 6];
    for (slot, field) in means.iter_mut().zip(fields) {
        *slot = blocks.iter().map(field).sum::<f64>() / n;
    }
    if blocks.len() >= 2 {
        for ((slot, field), mean) in sds.iter_mut().zip(fields).zip(means) {
            let ss: f64 = blocks.iter().map(|b| (field(b) - mean).powi(2)).sum();
            *slot = (ss / (n - 1.0)).sqrt();
        }
    }
    let pack = |v: [f64; 6]| MetricBlock {
        accuracy: v[0],
        precision_weighted: v[1],
        recall_weighted: v[2],
        f1_weighted: v[3],
        f1_macro: v[4],
        roc_auc_ovr: v[5],
    };
    (pack(means), pack(sds))
}
