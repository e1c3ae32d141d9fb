use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fedids::dataset::{load_csv, preprocess};
use fedids::harness::{self, Algorithm, ExperimentConfig, ExperimentReport};

const REPORT_FILE: &str = "sweep_report.json";

#[derive(Parser)]
#[command(
    name = "fedids",
    version,
    about = "Federated k-means intrusion detection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Preprocess the configured dataset and write the feature matrix.
    Preprocess {
        #[command(flatten)]
        common: Common,
    },
    /// Train and evaluate every (algorithm, k, r) combination.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        /// Write an NDJSON message trace per federated run into <out>/traces.
        #[arg(long)]
        trace: bool,
    },
    /// Pick (r, k) from a sweep report.
    Select {
        #[command(flatten)]
        input: ReportInput,
        #[arg(long, value_parser = parse_algo)]
        algo: Option<Algorithm>,
    },
    /// Write curve CSVs, the summary table and the manifest.
    Report {
        #[command(flatten)]
        input: ReportInput,
    },
    /// Write a labelled three-blob CSV for trying the pipeline.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        rows_per_blob: usize,
        #[arg(long, default_value_t = 0.05)]
        std_dev: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Grid {
    /// Restrict the sweep to one algorithm.
    #[arg(long, value_parser = parse_algo)]
    algo: Option<Algorithm>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    k_stride: Option<usize>,
    /// Comma-separated round counts, e.g. 0,5,10.
    #[arg(long, value_delimiter = ',')]
    rounds: Option<Vec<usize>>,
}

#[derive(Args)]
struct ReportInput {
    /// Sweep report; defaults to <out>/sweep_report.json.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl ReportInput {
    fn load(&self) -> fedids::Result<ExperimentReport> {
        let path = self
            .report
            .clone()
            .unwrap_or_else(|| self.out.join(REPORT_FILE));
        ExperimentReport::load(&path)
    }
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: fedids::Error| e.to_string())
}

fn load_config(common: &Common) -> fedids::Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn apply_grid(config: &mut ExperimentConfig, grid: &Grid) -> fedids::Result<()> {
    let s = &mut config.sweep;
    if let Some(a) = grid.algo {
        s.algorithms = vec![a];
    }
    if let Some(v) = grid.k_min {
        s.k_min = v;
    }
    if let Some(v) = grid.k_max {
        s.k_max = v;
    }
    if let Some(v) = grid.k_stride {
        s.k_stride = v;
    }
    if let Some(v) = &grid.rounds {
        s.rounds = v.clone();
    }
    config.validate()
}

fn create_dir(dir: &Path) -> fedids::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| fedids::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> fedids::Result<()> {
    match cli.command {
        Command::Preprocess { common } => {
            let config = load_config(&common)?;
            let table = load_csv(&config.data.path, &config.data.schema)?;
            let data = preprocess(&table, config.data.selection_threshold)?;
            create_dir(&config.output_dir)?;
            let path = config.output_dir.join("preprocessed.csv");
            data.write_csv(&path)?;
            println!(
                "{} of {} rows kept, {} features -> {}",
                data.len(),
                table.rows.len(),
                data.dim(),
                path.display()
            );
        }
        Command::Sweep {
            common,
            grid,
            trace,
        } => {
            let mut config = load_config(&common)?;
            apply_grid(&mut config, &grid)?;
            create_dir(&config.output_dir)?;
            let trace_dir = trace.then(|| config.output_dir.join("traces"));
            if let Some(dir) = &trace_dir {
                create_dir(dir)?;
            }
            let report = harness::sweep_with(&config, trace_dir.as_deref())?;
            let path = config.output_dir.join(REPORT_FILE);
            report.save(&path)?;
            let skipped = report.runs.iter().filter(|r| r.metrics().is_none()).count();
            println!(
                "{} runs ({} skipped) on {} clients -> {}",
                report.runs.len(),
                skipped,
                report.n_clients,
                path.display()
            );
        }
        Command::Select { input, algo } => {
            let report = input.load()?;
            let algos = match algo {
                Some(a) => vec![a],
                None => report.config.sweep.algorithms.clone(),
            };
            for a in algos {
                match harness::select_model(&report, a) {
                    Ok(sel) => println!(
                        "{a}: k={} r={}  [{}]",
                        sel.k,
                        sel.r.map_or("/".into(), |r| r.to_string()),
                        sel.rationale
                    ),
                    Err(e) => println!("{a}: {e}"),
                }
            }
        }
        Command::Report { input } => {
            let report = input.load()?;
            for p in harness::emit_reports(&report, &input.out)? {
                println!("{}", p.display());
            }
        }
        Command::Synth {
            out,
            rows_per_blob,
            std_dev,
            seed,
        } => {
            fedids::synth::three_blobs(rows_per_blob, std_dev, seed)?.write_csv(&out)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
