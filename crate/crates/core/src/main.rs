use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fprcal::distances::{distance_matrix, pca_basis};
use fprcal::harness::{
    emit_curves, load_distances, load_pattern_set, load_query_distances, run_calibration,
    run_evaluation, write_matrix_csv, write_query_distances, CalibrationRun, ConstraintChoice,
    DataSource, DistanceFormat, ModelFile,
};
use fprcal::model::{FitConstraints, FitOptions, GoodnessMetric};
use fprcal::synth::{self, EmbeddingConfig, SyntheticPopulation};
use fprcal::thresholds::ThresholdMethod;
use fprcal::{Error, Result};

const DEFAULT_FPRS: &str = "0.005,0.0025,0.001,0.0005";

#[derive(Debug, Parser)]
#[command(
    name = "fprcal",
    version,
    about = "Per-class verification thresholds at a target false-positive rate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic population: training distance matrix and query distances.
    Synth {
        #[command(flatten)]
        embedding: EmbeddingArgs,
        /// Queries drawn per class for the test set.
        #[arg(long, default_value_t = 6)]
        queries: usize,
        /// Output directory; receives train.csv and test.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit every class and write a model file with thresholds.
    Fit {
        /// Distance matrix (CSV) or distance map (JSON). Without it a synthetic
        /// population is generated from the embedding options.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Input distances lie in [0, 1) and are passed through -ln(1 - d).
        #[arg(long)]
        bounded: bool,
        /// Dimensionality bounds, e.g. 15:22.
        #[arg(long, value_name = "LOW:HIGH", value_parser = parse_dim_range, default_value = "15:22")]
        dim_range: (u32, u32),
        /// Sigma grid, e.g. 0.5:2:50. When omitted, 50 steps spanning a factor of
        /// two either side of the scale implied by the mean squared distance.
        #[arg(long, value_name = "LOW:HIGH:STEPS", value_parser = parse_sigma_range)]
        sigma_range: Option<(f64, f64, usize)>,
        #[arg(long, value_enum, default_value_t = GoodnessArg::Ncc)]
        goodness: GoodnessArg,
        /// Classes with fewer distances than this are not fitted.
        #[arg(long, default_value_t = 10)]
        min_samples: usize,
        #[command(flatten)]
        targets: TargetArgs,
        #[command(flatten)]
        embedding: EmbeddingArgs,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute thresholds in an existing model file.
    Threshold {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        targets: TargetArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure the false-positive rate each threshold attains on impostor trials.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Query distances: query,true_class,claimed_class,distance.
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        bounded: bool,
        /// Report file; `.csv` writes CSV, anything else JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write empirical and fitted CDFs of one class.
    Curves {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "class")]
        class_id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Subspace distances between pattern-set files, as a square CSV matrix.
    Setdist {
        /// Pattern-set files (CSV rows or JSON array of vectors).
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        /// Subspace dimension per set.
        #[arg(long)]
        dp: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct TargetArgs {
    /// Target false-positive rates, comma separated.
    #[arg(long, value_delimiter = ',', default_value = DEFAULT_FPRS)]
    fpr: Vec<f64>,
    /// Threshold methods, comma separated.
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [MethodArg::GenericData, MethodArg::ClassData, MethodArg::Model])]
    method: Vec<MethodArg>,
}

#[derive(Debug, Args)]
struct EmbeddingArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 18)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    classes: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma_between: f64,
    #[arg(long, default_value_t = 0.3)]
    sigma_within: f64,
}

impl EmbeddingArgs {
    fn config(&self) -> EmbeddingConfig {
        EmbeddingConfig {
            dim: self.dim,
            n_classes: self.classes,
            sigma_between: self.sigma_between,
            sigma_within: self.sigma_within,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GoodnessArg {
    Ncc,
    Bhattacharyya,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    GenericData,
    ClassData,
    Model,
}

impl From<FormatArg> for DistanceFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => DistanceFormat::Csv,
            FormatArg::Json => DistanceFormat::Json,
        }
    }
}

impl From<GoodnessArg> for GoodnessMetric {
    fn from(g: GoodnessArg) -> Self {
        match g {
            GoodnessArg::Ncc => GoodnessMetric::Ncc,
            GoodnessArg::Bhattacharyya => GoodnessMetric::Bhattacharyya,
        }
    }
}

impl From<MethodArg> for ThresholdMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::GenericData => ThresholdMethod::GenericData,
            MethodArg::ClassData => ThresholdMethod::ClassData,
            MethodArg::Model => ThresholdMethod::Model,
        }
    }
}

fn parse_dim_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LOW:HIGH")?;
    let lo = lo.trim().parse().map_err(|e| format!("LOW: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("HIGH: {e}"))?;
    Ok((lo, hi))
}

fn parse_sigma_range(s: &str) -> std::result::Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [lo, hi, steps] = parts[..] else {
        return Err("expected LOW:HIGH:STEPS".into());
    };
    Ok((
        lo.parse().map_err(|e| format!("LOW: {e}"))?,
        hi.parse().map_err(|e| format!("HIGH: {e}"))?,
        steps.parse().map_err(|e| format!("STEPS: {e}"))?,
    ))
}

fn methods(args: &TargetArgs) -> Vec<ThresholdMethod> {
    let mut out: Vec<ThresholdMethod> = Vec::new();
    for &m in &args.method {
        let m = m.into();
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            embedding,
            queries,
            out,
        } => {
            let pop = synth::generate(&embedding.config(), queries)?;
            fs::create_dir_all(&out)?;
            let ids: Vec<String> = (0..pop.n_classes())
                .map(SyntheticPopulation::class_id)
                .collect();
            write_matrix_csv(
                create(&out.join("train.csv"))?,
                &ids,
                &synth::training_distance_matrix(&pop),
            )?;
            write_query_distances(
                create(&out.join("test.csv"))?,
                &synth::query_distances(&pop),
            )?;
        }
        Command::Fit {
            input,
            format,
            bounded,
            dim_range,
            sigma_range,
            goodness,
            min_samples,
            targets,
            embedding,
            out,
        } => {
            let source = match input {
                Some(path) => {
                    let format =
                        format.map_or_else(|| DistanceFormat::from_path(&path), Into::into);
                    // Surface loader warnings before fitting.
                    for w in load_distances(&path, format, bounded)?.warnings {
                        eprintln!("warning: {w}");
                    }
                    DataSource::File {
                        path,
                        format,
                        bounded,
                    }
                }
                None => DataSource::Synth(embedding.config()),
            };
            let constraints = match sigma_range {
                Some((lo, hi, steps)) => ConstraintChoice::Fixed(FitConstraints::new(
                    dim_range.0,
                    dim_range.1,
                    lo,
                    hi,
                    steps,
                )?),
                None => ConstraintChoice::Auto {
                    dim_low: dim_range.0,
                    dim_high: dim_range.1,
                    sigma_steps: 50,
                },
            };
            let run = CalibrationRun {
                constraints,
                fit_options: FitOptions {
                    goodness: goodness.into(),
                    min_samples,
                    ..FitOptions::default()
                },
                target_fprs: targets.fpr.clone(),
                methods: methods(&targets),
                source,
            };
            let model = run_calibration(&run)?;
            for c in &model.classes {
                for e in &c.errors {
                    eprintln!("warning: class {}: {e}", c.class_id);
                }
            }
            model.save(&out)?;
        }
        Command::Threshold {
            model,
            targets,
            out,
        } => {
            let mut file = ModelFile::load(&model)?;
            file.recompute_thresholds(&targets.fpr, &methods(&targets))?;
            file.save(&out)?;
        }
        Command::Eval {
            model,
            test,
            bounded,
            out,
        } => {
            let file = ModelFile::load(&model)?;
            let trials = load_query_distances(&test, bounded)?;
            let report = run_evaluation(&file, &trials)?;
            print!("{}", report.to_table());
            if let Some(path) = out {
                if path
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
                {
                    report.write_csv(create(&path)?)?;
                } else {
                    fs::write(&path, report.to_json()?)?;
                }
            }
        }
        Command::Curves {
            model,
            class_id,
            out,
        } => {
            emit_curves(&ModelFile::load(&model)?, &class_id, &out)?;
        }
        Command::Setdist { inputs, dp, out } => {
            let mut ids = Vec::with_capacity(inputs.len());
            let mut bases = Vec::with_capacity(inputs.len());
            for path in &inputs {
                let set = load_pattern_set(path, DistanceFormat::from_path(path))?;
                bases.push(pca_basis(&set, dp).map_err(|e| match e {
                    Error::RankDeficient { .. } => {
                        Error::InvalidConfig(format!("{}: {e}", path.display()))
                    }
                    other => other,
                })?);
                ids.push(set.class_label);
            }
            write_matrix_csv(create(&out)?, &ids, &distance_matrix(&bases)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::FAILURE
        }
    }
}
