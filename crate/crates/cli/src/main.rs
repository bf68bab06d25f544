//! `lorentzseq` — hyperboloid-kernel sequence classification pipeline.
//!
//! Subcommands compose the stages: `gen` synthesizes a labeled dataset,
//! `spectrum` builds k-mer spectra, `kernel` the pairwise kernel matrix,
//! `embed` kernel-PCA coordinates, `pipeline` the full multi-run
//! classification experiment, and `selfcheck` the built-in invariant suite.
//! Every command writes a manifest.json that pins the configuration and
//! seed needed to reproduce its outputs bit-for-bit.

mod selfcheck;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lorentzseq::alphabet::{Alphabet, AmbiguityPolicy};
use lorentzseq::error::Error;
use lorentzseq::experiment::{run_experiment, write_metrics_tsv, Classifier, ExperimentConfig};
use lorentzseq::fasta::{parse_fasta, to_fasta, SequenceRecord};
use lorentzseq::heatmap::write_heatmap_csv;
use lorentzseq::kernel::{kernel_matrix, psd_adjust, KernelKind, KernelMatrix, PsdMode};
use lorentzseq::kernel_pca::{project, write_eigenvalues_csv, write_embedding_tsv, KpcaTransform};
use lorentzseq::labels::{load_labels, validate_records};
use lorentzseq::spectrum::{spectrum_matrix, write_spectrum_tsv};
use lorentzseq::split::SplitSpec;
use lorentzseq::synth::{generate_mutation_tree, SynthConfig};

#[derive(Parser)]
#[command(name = "lorentzseq", version, about)]
struct Cli {
    /// Worker threads (falls back to LORENTZSEQ_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic mutation-tree dataset (FASTA + labels CSV)
    Gen(GenArgs),
    /// Compute k-mer spectra and export them as TSV + binary
    Spectrum(StageArgs),
    /// Build the pairwise kernel matrix and export it as HKM1 binary
    Kernel(KernelArgs),
    /// Kernel PCA on an existing kernel matrix file
    Embed(EmbedArgs),
    /// Full experiment: spectra, kernel, kernel PCA, classify, evaluate
    Pipeline(PipelineArgs),
    /// Run the built-in invariant suite
    Selfcheck(SelfcheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelChoice {
    Hyperboloid,
    Euclidean,
}

impl KernelChoice {
    fn kind(self) -> KernelKind {
        match self {
            KernelChoice::Hyperboloid => KernelKind::HyperboloidDistance,
            KernelChoice::Euclidean => KernelKind::EuclideanDistance,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PsdChoice {
    Clip,
    Shift,
}

impl PsdChoice {
    fn mode(self) -> PsdMode {
        match self {
            PsdChoice::Clip => PsdMode::Clip,
            PsdChoice::Shift => PsdMode::Shift,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformChoice {
    Raw,
    Mds,
}

impl TransformChoice {
    fn transform(self) -> KpcaTransform {
        match self {
            TransformChoice::Raw => KpcaTransform::Raw,
            TransformChoice::Mds => KpcaTransform::Mds,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierChoice {
    Knn,
    Centroid,
}

impl ClassifierChoice {
    fn classifier(self) -> Classifier {
        match self {
            ClassifierChoice::Knn => Classifier::Knn,
            ClassifierChoice::Centroid => Classifier::Centroid,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Number of clades (classes)
    #[arg(long, default_value_t = 4)]
    classes: usize,
    /// Number of sequences
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Sequence length
    #[arg(long, default_value_t = 300)]
    length: usize,
    /// Per-site substitution probability within a clade
    #[arg(long, default_value_t = 0.02)]
    mu_within: f64,
    /// Per-site substitution probability between clades
    #[arg(long, default_value_t = 0.15)]
    mu_between: f64,
    /// Alphabet: dna, protein, or custom:CHARS
    #[arg(long, default_value = "dna")]
    alphabet: String,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SpectrumOpts {
    /// k-mer length
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Alphabet: dna, protein, or custom:CHARS
    #[arg(long, default_value = "dna")]
    alphabet: String,
    /// L1-normalize spectra to frequencies (default)
    #[arg(long, conflicts_with = "raw_counts")]
    normalize: bool,
    /// Keep raw k-mer counts instead of frequencies
    #[arg(long)]
    raw_counts: bool,
    /// Error on residues outside the alphabet instead of masking their k-mers
    #[arg(long)]
    reject_ambiguous: bool,
}

impl SpectrumOpts {
    fn normalize(&self) -> bool {
        !self.raw_counts
    }

    fn policy(&self) -> AmbiguityPolicy {
        if self.reject_ambiguous {
            AmbiguityPolicy::Reject
        } else {
            AmbiguityPolicy::MaskKmers
        }
    }
}

#[derive(Args)]
struct StageArgs {
    /// FASTA input
    #[arg(long)]
    fasta: PathBuf,
    /// Label CSV (`id,label`)
    #[arg(long)]
    labels: PathBuf,
    #[command(flatten)]
    spectrum: SpectrumOpts,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Distance kernel to build
    #[arg(long, value_enum, default_value_t = KernelChoice::Hyperboloid)]
    kernel: KernelChoice,
    /// Scalar applied to spectra before lifting
    #[arg(long, default_value_t = 1.0)]
    lift_scale: f64,
    /// Apply a PSD adjustment to the kernel before writing it
    #[arg(long, value_enum)]
    psd: Option<PsdChoice>,
    /// Also export the kernel as CSV (17 significant digits)
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct EmbedArgs {
    /// Kernel matrix in HKM1 binary format
    #[arg(long)]
    kernel_file: PathBuf,
    /// Optional FASTA to recover sequence ids for the TSV
    #[arg(long)]
    fasta: Option<PathBuf>,
    /// Negative-eigenvalue handling: clip in kernel PCA or shift the diagonal
    #[arg(long, value_enum, default_value_t = PsdChoice::Clip)]
    psd: PsdChoice,
    /// Kernel transform: feed the matrix raw or apply classical MDS
    #[arg(long, value_enum, default_value_t = TransformChoice::Raw)]
    kpca_transform: TransformChoice,
    /// Embedding dimensions to retain (capped at n-1)
    #[arg(long, default_value_t = 100)]
    components: usize,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Distance kernel to build
    #[arg(long, value_enum, default_value_t = KernelChoice::Hyperboloid)]
    kernel: KernelChoice,
    /// Scalar applied to spectra before lifting
    #[arg(long, default_value_t = 1.0)]
    lift_scale: f64,
    /// Negative-eigenvalue handling: clip in kernel PCA or shift the diagonal
    #[arg(long, value_enum, default_value_t = PsdChoice::Clip)]
    psd: PsdChoice,
    /// Kernel transform: feed the matrix raw or apply classical MDS
    #[arg(long, value_enum, default_value_t = TransformChoice::Raw)]
    kpca_transform: TransformChoice,
    /// Embedding dimensions to retain (capped at n-1)
    #[arg(long, default_value_t = 100)]
    components: usize,
    /// Classifier run on the embedding
    #[arg(long, value_enum, default_value_t = ClassifierChoice::Knn)]
    classifier: ClassifierChoice,
    /// kNN neighbor count
    #[arg(long, default_value_t = 5)]
    neighbors: usize,
    /// Fraction of each class held out per run
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
    /// Number of train/test runs to average
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Base seed for the split sequence
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SelfcheckArgs {
    /// Force the named property to fail (test builds only)
    #[arg(long, value_name = "PROPERTY")]
    inject_fault: Option<String>,
    /// Also write a manifest.json with per-property results and timing
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Usage errors exit 2, computation errors exit 1.
enum CliError {
    Usage(String),
    Compute(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Compute(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = resolve_threads(cli.threads);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot build thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Gen(args) => cmd_gen(&args, threads),
        Command::Spectrum(args) => cmd_spectrum(&args, threads),
        Command::Kernel(args) => cmd_kernel(&args, threads),
        Command::Embed(args) => cmd_embed(&args, threads),
        Command::Pipeline(args) => cmd_pipeline(&args, threads),
        Command::Selfcheck(args) => selfcheck::run(&args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("LORENTZSEQ_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .filter(|&n| n > 0)
    .unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

/// Tracks written artifacts so a failing stage leaves no partial output.
struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    fn new(dir: &Path) -> CliResult<ArtifactWriter> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Usage(format!("cannot create `{}`: {e}", dir.display())))?;
        Ok(ArtifactWriter {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| {
            self.cleanup();
            CliError::Compute(format!("cannot write `{}`: {e}", path.display()))
        })?;
        self.written.push(path.clone());
        Ok(path)
    }

    fn cleanup(&self) {
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
    }

    fn names(&self) -> Vec<String> {
        self.written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }
}

fn read_input(path: &Path, what: &str) -> CliResult<Vec<u8>> {
    fs::read(path)
        .map_err(|e| CliError::Usage(format!("cannot read {what} `{}`: {e}", path.display())))
}

/// Parse, label, and validate the dataset behind a stage command.
/// Bad input is a usage error (exit 2) carrying the offending file.
fn load_dataset(args: &StageArgs) -> CliResult<(Vec<SequenceRecord>, Alphabet)> {
    let invalid = |path: &Path| {
        let path = path.display().to_string();
        move |e: Error| CliError::Usage(format!("in `{path}`: {e}"))
    };
    let alphabet = Alphabet::parse_spec(&args.spectrum.alphabet)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let fasta_bytes = read_input(&args.fasta, "FASTA file")?;
    let records = parse_fasta(&fasta_bytes).map_err(invalid(&args.fasta))?;
    let label_bytes = read_input(&args.labels, "label file")?;
    let labels = load_labels(&label_bytes).map_err(invalid(&args.labels))?;
    let validated = validate_records(&records, &labels, &alphabet, args.spectrum.policy())
        .map_err(invalid(&args.fasta))?;
    Ok((validated, alphabet))
}

fn validate_spectrum_opts(opts: &SpectrumOpts) -> CliResult<()> {
    if opts.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let alphabet =
        Alphabet::parse_spec(&opts.alphabet).map_err(|e| CliError::Usage(e.to_string()))?;
    let dim = alphabet
        .kmer_space(opts.k)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    // budget fits 4^8 for DNA and 20^4 for protein
    const DIM_BUDGET: usize = 160_000;
    if dim > DIM_BUDGET {
        return Err(CliError::Usage(format!(
            "|Σ|^k = {dim} exceeds the spectrum dimension budget; lower --k"
        )));
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct DatasetStats {
    n: usize,
    classes: usize,
    class_names: Vec<String>,
    min_len: usize,
    max_len: usize,
    mean_len: f64,
}

fn dataset_stats(records: &[SequenceRecord]) -> DatasetStats {
    let mut class_names: Vec<String> = records.iter().filter_map(|r| r.label.clone()).collect();
    class_names.sort();
    class_names.dedup();
    let lens: Vec<usize> = records.iter().map(|r| r.residues.len()).collect();
    DatasetStats {
        n: records.len(),
        classes: class_names.len(),
        class_names,
        min_len: lens.iter().copied().min().unwrap_or(0),
        max_len: lens.iter().copied().max().unwrap_or(0),
        mean_len: if lens.is_empty() {
            0.0
        } else {
            lens.iter().sum::<usize>() as f64 / lens.len() as f64
        },
    }
}

fn write_manifest(writer: &mut ArtifactWriter, manifest: &serde_json::Value) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    writer.write("manifest.json", &bytes)?;
    Ok(())
}

fn cmd_gen(args: &GenArgs, threads: usize) -> CliResult<()> {
    if args.classes == 0 || args.n == 0 || args.length == 0 {
        return Err(CliError::Usage(
            "--classes, --n, and --length must be positive".into(),
        ));
    }
    for (name, mu) in [
        ("--mu-within", args.mu_within),
        ("--mu-between", args.mu_between),
    ] {
        if !(0.0..=1.0).contains(&mu) {
            return Err(CliError::Usage(format!("{name} must be in [0, 1]")));
        }
    }
    let alphabet =
        Alphabet::parse_spec(&args.alphabet).map_err(|e| CliError::Usage(e.to_string()))?;
    let config = SynthConfig {
        classes: args.classes,
        n: args.n,
        length: args.length,
        mu_within: args.mu_within,
        mu_between: args.mu_between,
        seed: args.seed,
    };
    let records = generate_mutation_tree(&config, &alphabet);

    let mut writer = ArtifactWriter::new(&args.out)?;
    writer.write("sequences.fasta", to_fasta(&records).as_bytes())?;
    let mut labels_csv = String::from("id,label\n");
    for rec in &records {
        labels_csv.push_str(&format!(
            "{},{}\n",
            rec.id,
            rec.label.as_deref().expect("generator labels every record")
        ));
    }
    writer.write("labels.csv", labels_csv.as_bytes())?;
    let manifest = json!({
        "command": "gen",
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads,
        "config": {
            "classes": args.classes,
            "n": args.n,
            "length": args.length,
            "mu_within": args.mu_within,
            "mu_between": args.mu_between,
            "alphabet": args.alphabet,
            "seed": args.seed,
        },
        "dataset": dataset_stats(&records),
        "artifacts": writer.names(),
    });
    write_manifest(&mut writer, &manifest)?;
    println!(
        "generated {} sequences in {} clades -> {}",
        args.n,
        args.classes,
        args.out.display()
    );
    Ok(())
}

fn cmd_spectrum(args: &StageArgs, threads: usize) -> CliResult<()> {
    validate_spectrum_opts(&args.spectrum)?;
    let (records, alphabet) = load_dataset(args)?;
    let matrix = spectrum_matrix(
        &records,
        args.spectrum.k,
        &alphabet,
        args.spectrum.policy(),
        args.spectrum.normalize(),
    )?;
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();

    let mut writer = ArtifactWriter::new(&args.out)?;
    let mut tsv = Vec::new();
    write_spectrum_tsv(&mut tsv, &matrix, &ids, args.spectrum.k, &alphabet)?;
    writer.write("spectrum.tsv", &tsv)?;
    let mut binary = Vec::new();
    matrix.write_binary(&mut binary)?;
    writer.write("spectrum.hsm", &binary)?;

    let manifest = json!({
        "command": "spectrum",
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads,
        "inputs": { "fasta": args.fasta.display().to_string(), "labels": args.labels.display().to_string() },
        "config": {
            "k": args.spectrum.k,
            "alphabet": args.spectrum.alphabet,
            "normalize": args.spectrum.normalize(),
            "policy": if args.spectrum.reject_ambiguous { "reject" } else { "mask_kmers" },
        },
        "dataset": dataset_stats(&records),
        "spectrum_dim": matrix.cols(),
        "artifacts": writer.names(),
    });
    write_manifest(&mut writer, &manifest)?;
    println!(
        "wrote {}x{} spectrum matrix -> {}",
        matrix.rows(),
        matrix.cols(),
        args.out.display()
    );
    Ok(())
}

fn build_kernel(
    records: &[SequenceRecord],
    alphabet: &Alphabet,
    opts: &SpectrumOpts,
    kind: KernelKind,
    lift_scale: f64,
    psd: Option<PsdMode>,
) -> CliResult<KernelMatrix> {
    let mut spectra = spectrum_matrix(records, opts.k, alphabet, opts.policy(), opts.normalize())?;
    if lift_scale != 1.0 {
        for v in spectra.data_mut() {
            *v *= lift_scale;
        }
    }
    let kernel = kernel_matrix(&spectra, kind)?;
    Ok(match psd {
        Some(mode) => psd_adjust(&kernel, mode, None)?,
        None => kernel,
    })
}

fn cmd_kernel(args: &KernelArgs, threads: usize) -> CliResult<()> {
    validate_spectrum_opts(&args.stage.spectrum)?;
    if !(args.lift_scale.is_finite() && args.lift_scale > 0.0) {
        return Err(CliError::Usage(
            "--lift-scale must be finite and positive".into(),
        ));
    }
    let (records, alphabet) = load_dataset(&args.stage)?;
    let kernel = build_kernel(
        &records,
        &alphabet,
        &args.stage.spectrum,
        args.kernel.kind(),
        args.lift_scale,
        args.psd.map(PsdChoice::mode),
    )?;

    let mut writer = ArtifactWriter::new(&args.stage.out)?;
    let mut binary = Vec::new();
    kernel.write_binary(&mut binary)?;
    writer.write("kernel.hkm", &binary)?;
    if args.csv {
        let mut csv = Vec::new();
        kernel.write_csv(&mut csv)?;
        writer.write("kernel.csv", &csv)?;
    }
    let manifest = json!({
        "command": "kernel",
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads,
        "inputs": { "fasta": args.stage.fasta.display().to_string(), "labels": args.stage.labels.display().to_string() },
        "config": {
            "k": args.stage.spectrum.k,
            "alphabet": args.stage.spectrum.alphabet,
            "normalize": args.stage.spectrum.normalize(),
            "policy": if args.stage.spectrum.reject_ambiguous { "reject" } else { "mask_kmers" },
            "kernel": match args.kernel { KernelChoice::Hyperboloid => "hyperboloid", KernelChoice::Euclidean => "euclidean" },
            "lift_scale": args.lift_scale,
            "psd": args.psd.map(|p| match p { PsdChoice::Clip => "clip", PsdChoice::Shift => "shift" }),
        },
        "dataset": dataset_stats(&records),
        "n": kernel.n(),
        "diag_shift": kernel.diag_shift(),
        "artifacts": writer.names(),
    });
    write_manifest(&mut writer, &manifest)?;
    println!(
        "wrote {0}x{0} kernel matrix (diag_shift {1}) -> {2}",
        kernel.n(),
        kernel.diag_shift(),
        args.stage.out.display()
    );
    Ok(())
}

fn cmd_embed(args: &EmbedArgs, threads: usize) -> CliResult<()> {
    if args.components == 0 {
        return Err(CliError::Usage("--components must be at least 1".into()));
    }
    let bytes = read_input(&args.kernel_file, "kernel file")?;
    let kernel = KernelMatrix::read_binary(&mut bytes.as_slice())?;
    let ids: Vec<String> = match &args.fasta {
        Some(path) => {
            let fasta_bytes = read_input(path, "FASTA file")?;
            let records = parse_fasta(&fasta_bytes)?;
            if records.len() != kernel.n() {
                return Err(CliError::Usage(format!(
                    "FASTA has {} records but the kernel is {}x{}",
                    records.len(),
                    kernel.n(),
                    kernel.n()
                )));
            }
            records.into_iter().map(|r| r.id).collect()
        }
        None => (0..kernel.n()).map(|i| format!("s{i}")).collect(),
    };

    let adjusted = match args.psd {
        PsdChoice::Shift => psd_adjust(&kernel, PsdMode::Shift, None)?,
        PsdChoice::Clip => kernel.clone(),
    };
    let components = args.components.min(kernel.n().saturating_sub(1)).max(1);
    let transform = args.kpca_transform.transform();
    let embedding =
        project(&adjusted, components, args.psd.mode(), transform).map_err(|e| {
            match (e, transform) {
                (Error::DegenerateKernel, KpcaTransform::Raw) => CliError::Compute(
                    "kernel is degenerate: no positive eigenvalues after centering; \
                 distance matrices fed raw usually need --kpca-transform mds"
                        .into(),
                ),
                (other, _) => other.into(),
            }
        })?;

    let mut writer = ArtifactWriter::new(&args.out)?;
    let mut tsv = Vec::new();
    write_embedding_tsv(&mut tsv, &ids, &embedding)?;
    writer.write("embedding.tsv", &tsv)?;
    let mut eigs = Vec::new();
    write_eigenvalues_csv(&mut eigs, &embedding)?;
    writer.write("eigenvalues.csv", &eigs)?;

    let manifest = json!({
        "command": "embed",
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads,
        "inputs": { "kernel_file": args.kernel_file.display().to_string() },
        "config": {
            "psd": match args.psd { PsdChoice::Clip => "clip", PsdChoice::Shift => "shift" },
            "kpca_transform": match args.kpca_transform { TransformChoice::Raw => "raw", TransformChoice::Mds => "mds" },
            "components": args.components,
        },
        "n": kernel.n(),
        "retained_components": embedding.components(),
        "dropped_negative_eigenvalues": embedding.dropped_negative,
        "diag_shift": adjusted.diag_shift(),
        "artifacts": writer.names(),
    });
    write_manifest(&mut writer, &manifest)?;
    println!(
        "wrote {}-component embedding for {} samples -> {}",
        embedding.components(),
        kernel.n(),
        args.out.display()
    );
    Ok(())
}

fn cmd_pipeline(args: &PipelineArgs, threads: usize) -> CliResult<()> {
    validate_spectrum_opts(&args.stage.spectrum)?;
    if !(args.test_fraction > 0.0 && args.test_fraction < 1.0) {
        return Err(CliError::Usage("--test-fraction must be in (0, 1)".into()));
    }
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    if args.neighbors == 0 {
        return Err(CliError::Usage("--neighbors must be at least 1".into()));
    }
    if !(args.lift_scale.is_finite() && args.lift_scale > 0.0) {
        return Err(CliError::Usage(
            "--lift-scale must be finite and positive".into(),
        ));
    }
    let (records, _alphabet) = load_dataset(&args.stage)?;

    let config = ExperimentConfig {
        k: args.stage.spectrum.k,
        alphabet: args.stage.spectrum.alphabet.clone(),
        normalize: args.stage.spectrum.normalize(),
        policy: args.stage.spectrum.policy(),
        lift_scale: args.lift_scale,
        kernel: args.kernel.kind(),
        psd_mode: args.psd.mode(),
        psd_epsilon: None,
        kpca_transform: args.kpca_transform.transform(),
        components: args.components,
        classifier: args.classifier.classifier(),
        neighbors: args.neighbors,
        split: SplitSpec {
            test_fraction: args.test_fraction,
            runs: args.runs,
            base_seed: args.seed,
            stratified: true,
        },
    };
    let output = run_experiment(&records, &config)
        .map_err(|e| CliError::Compute(format!("pipeline stage failed: {e}")))?;

    let mut writer = ArtifactWriter::new(&args.stage.out)?;
    let mut report = output.report.to_json().into_bytes();
    report.push(b'\n');
    writer.write("report.json", &report)?;
    let mut embedding_tsv = Vec::new();
    write_embedding_tsv(&mut embedding_tsv, &output.ids, &output.embedding)?;
    writer.write("embedding.tsv", &embedding_tsv)?;
    let mut eigs = Vec::new();
    write_eigenvalues_csv(&mut eigs, &output.embedding)?;
    writer.write("eigenvalues.csv", &eigs)?;
    let mut heat = Vec::new();
    write_heatmap_csv(&mut heat, &output.heatmap)?;
    writer.write("heatmap.csv", &heat)?;
    let mut metrics_tsv = Vec::new();
    write_metrics_tsv(&mut metrics_tsv, &output.report)?;
    writer.write("metrics.tsv", &metrics_tsv)?;

    let manifest = json!({
        "command": "pipeline",
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads,
        "inputs": { "fasta": args.stage.fasta.display().to_string(), "labels": args.stage.labels.display().to_string() },
        "config": config,
        "dataset": dataset_stats(&records),
        "timings": output.timings,
        "warnings": output.report.warnings,
        "artifacts": writer.names(),
    });
    write_manifest(&mut writer, &manifest)?;
    println!(
        "pipeline complete: {} runs, mean accuracy {:.4} (sd {:.4}) -> {}",
        output.report.per_run.len(),
        output.report.mean.accuracy,
        output.report.sd.accuracy,
        args.stage.out.display()
    );
    Ok(())
}
