//! `zzt`: zigzag persistence of layer stacks from the command line.
//!
//! Exit codes: 0 success, 1 validation or computation failure, 2 usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use zzt_core::descriptors::{epi_difference, Normalization};
use zzt_core::pipeline::{layer_complexes, subset_diagrams, PipelineConfig, VrSettings};
use zzt_core::zigzag::interleave_states;
use zzt_core::{
    generate, oracle, prune_layers, read_layerstack, run, scan_k, sliding_windows,
    write_layerstack, EdgeFilter, EffectiveImage, LayerStack, SynthSpec,
};

const CACHE_ENV: &str = "ZZT_CACHE_DIR";

#[derive(Parser)]
#[command(
    name = "zzt",
    version,
    about = "Zigzag persistence of layer-indexed point clouds"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every random choice (overrides the seed in a synth spec).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a layer-stack directory.
    Validate { stack: PathBuf },
    /// Zigzag diagrams and effective images.
    Compute {
        stack: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Births frequency, inter-layer persistence and Betti curves per alpha.
    Descriptors {
        stack: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Layers on the inter-layer persistence plateau.
    Prune {
        stack: PathBuf,
        #[arg(long, default_value_t = zzt_core::pruning::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = zzt_core::pruning::DEFAULT_PRUNE_ALPHA, allow_hyphen_values = true)]
        alpha: f64,
        /// Homology dimension whose persistence drives the choice.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Contiguous blocks of layers.
    Windows {
        #[arg(long)]
        layers: usize,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 2)]
        step: usize,
    },
    /// Difference of two mass-normalised effective images.
    Diff {
        image_a: PathBuf,
        image_b: PathBuf,
        /// Dimension to pick when a file holds several images.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Total interval counts per k.
    ScanK {
        stack: PathBuf,
        #[arg(long)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Write a synthetic layer stack from a JSON spec.
    Synth {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-check diagrams against brute-force homology (small inputs only).
    OracleCheck {
        stack: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
}

/// Pipeline settings; flags override the JSON config file.
#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    subset_size: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Calibrate a per-layer radius filter to this many components.
    #[arg(long, requires = "vr_tolerance")]
    vr_target: Option<usize>,
    #[arg(long, requires = "vr_target")]
    vr_tolerance: Option<usize>,
    #[arg(long, value_parser = parse_filter)]
    edge_filter: Option<EdgeFilter>,
    #[arg(long)]
    simplex_cap: Option<usize>,
    /// Count a feature as persisting only if it outlives the later layer.
    #[arg(long)]
    strict_death: bool,
    #[arg(long, value_parser = parse_normalization)]
    normalization: Option<Normalization>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

fn parse_filter(s: &str) -> Result<EdgeFilter, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| "expected remove_short or keep_short".to_string())
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| "expected global or paper_literal".to_string())
}

enum Failure {
    Usage(String),
    Invalid(String),
}

impl From<zzt_core::Error> for Failure {
    fn from(e: zzt_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

impl PipelineArgs {
    fn resolve(&self) -> CliResult<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))?
            }
            None => PipelineConfig::default(),
        };
        if let Some(k) = self.k {
            cfg.k_nn = k;
        }
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(s) = self.subset_size {
            cfg.subset_size = s;
        }
        if let Some(a) = &self.alphas {
            cfg.alphas = a.clone();
        }
        if let Some(d) = &self.dims {
            cfg.homology_dims = d.clone();
        }
        if let (Some(t), Some(tol)) = (self.vr_target, self.vr_tolerance) {
            cfg.vr = Some(VrSettings {
                beta0_target: t,
                beta0_tolerance: tol,
            });
        }
        if let Some(f) = self.edge_filter {
            cfg.edge_filter = f;
        }
        if let Some(c) = self.simplex_cap {
            cfg.simplex_cap = c;
        }
        if self.strict_death {
            cfg.inclusive_death = false;
        }
        if let Some(n) = self.normalization {
            cfg.normalization = n;
        }
        if let Ok(dir) = std::env::var(CACHE_ENV) {
            cfg.cache_dir = Some(dir.into());
        }
        if let Some(dir) = &self.cache_dir {
            cfg.cache_dir = Some(dir.clone());
        }
        cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn to_json(value: &impl Serialize) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Invalid(e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| Failure::Invalid(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, value: &impl Serialize) -> CliResult {
    let text = to_json(value)?;
    match out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> CliResult<LayerStack> {
    Ok(read_layerstack(path)?)
}

fn load_image(path: &Path, dim: usize) -> CliResult<EffectiveImage> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    if let Ok(img) = serde_json::from_str::<EffectiveImage>(&text) {
        return Ok(img);
    }
    let all: Vec<EffectiveImage> = serde_json::from_str(&text).map_err(|e| {
        Failure::Invalid(format!(
            "{}: not an effective image file: {e}",
            path.display()
        ))
    })?;
    all.into_iter().find(|i| i.p == dim).ok_or_else(|| {
        Failure::Invalid(format!("{}: no image for dimension {dim}", path.display()))
    })
}

#[derive(Serialize)]
struct StackSummary {
    n_layers: usize,
    n_points: usize,
    dim: usize,
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Validate { stack } => {
            let s = load(&stack)?;
            emit(
                None,
                &StackSummary {
                    n_layers: s.n_layers(),
                    n_points: s.n_points(),
                    dim: s.dim(),
                },
            )
        }
        Command::Compute {
            stack,
            out,
            pipeline,
        } => {
            let cfg = pipeline.resolve()?;
            let result = run(&load(&stack)?, &cfg)?;
            write_file(&out.join("diagrams.json"), &to_json(&result.subsets)?)?;
            write_file(&out.join("images.json"), &to_json(&result.images)?)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Descriptors {
            stack,
            out,
            pipeline,
        } => {
            let cfg = pipeline.resolve()?;
            let result = run(&load(&stack)?, &cfg)?;
            #[derive(Serialize)]
            struct Descriptors<'a> {
                descriptors: &'a [zzt_core::pipeline::DescriptorSet],
                betti: &'a [zzt_core::pipeline::BettiSet],
                warnings: &'a [String],
            }
            let all = Descriptors {
                descriptors: &result.descriptors,
                betti: &result.betti,
                warnings: &result.warnings,
            };
            write_file(&out.join("descriptors.json"), &to_json(&all)?)?;
            for d in &result.descriptors {
                let tag = format!("p{}_alpha{}", d.p, d.alpha);
                write_file(&out.join(format!("births_{tag}.csv")), &d.births.to_csv())?;
                write_file(&out.join(format!("zbar_{tag}.csv")), &d.zbar.to_csv())?;
            }
            for b in &result.betti {
                write_file(&out.join(format!("betti_p{}.csv", b.p)), &b.curve.to_csv())?;
            }
            Ok(())
        }
        Command::Prune {
            stack,
            threshold,
            alpha,
            dim,
            out,
            pipeline,
        } => {
            let mut cfg = pipeline.resolve()?;
            cfg.alphas = vec![alpha];
            cfg.homology_dims = vec![dim];
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            if !(threshold > 0.0 && threshold <= 1.0) {
                return Err(Failure::Usage(format!(
                    "--threshold {threshold} must be in (0, 1]"
                )));
            }
            let result = run(&load(&stack)?, &cfg)?;
            let zbar = &result
                .descriptor(dim, alpha)
                .expect("requested descriptor")
                .zbar
                .values;
            emit(out.as_deref(), &prune_layers(zbar, threshold, alpha)?)
        }
        Command::Windows {
            layers,
            window,
            step,
        } => {
            let blocks =
                sliding_windows(layers, window, step).map_err(|e| Failure::Usage(e.to_string()))?;
            emit(None, &blocks)
        }
        Command::Diff {
            image_a,
            image_b,
            dim,
            out,
        } => {
            let (a, b) = (load_image(&image_a, dim)?, load_image(&image_b, dim)?);
            emit(out.as_deref(), &epi_difference(&a, &b)?)
        }
        Command::ScanK {
            stack,
            k_min,
            k_max,
            pipeline,
        } => {
            let cfg = pipeline.resolve()?;
            emit(None, &scan_k(&load(&stack)?, k_min..=k_max, &cfg)?)
        }
        Command::Synth { spec, out } => {
            let text = fs::read_to_string(&spec)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", spec.display())))?;
            let mut spec: SynthSpec = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("bad synth spec {}: {e}", spec.display())))?;
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            write_layerstack(&generate(&spec)?, &out)?;
            Ok(())
        }
        Command::OracleCheck { stack, pipeline } => {
            let cfg = pipeline.resolve()?;
            let stack = load(&stack)?;
            let diagrams = subset_diagrams(&stack, &cfg)?;
            let size = cfg.subset_size.min(stack.n_points());
            let mut reports = Vec::new();
            for (sub, diagram) in &diagrams {
                let points = stack.select_points(sub.points[0], sub.points[1]);
                let (cx, _) = layer_complexes(&points, &cfg)?;
                let states = interleave_states(&cx)?;
                let report = oracle::verify_diagram(diagram, &states)?;
                reports.push(report);
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            #[derive(Serialize)]
            struct Check {
                subset_size: usize,
                passed: bool,
                reports: Vec<oracle::OracleReport>,
            }
            emit(
                None,
                &Check {
                    subset_size: size,
                    passed: failed == 0,
                    reports,
                },
            )?;
            if failed > 0 {
                return Err(Failure::Invalid(format!(
                    "{failed} subset diagram(s) failed the oracle"
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
