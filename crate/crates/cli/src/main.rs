use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dpcost::report::{
    emit_records, first_saving_bin, parse_records, render_scatter, Format, Metric,
};
use dpcost::simulation::accuracy_grid;
use dpcost::{
    boundary_interval, classify, cost_init, cost_random, parse_matrix, parse_prediction,
    project_view, run_grid, summarize, CostParams, GridConfig, ModelKind, Project,
};

/// Costs and cost-saving boundaries of defect prediction models.
#[derive(Debug, Parser)]
#[command(name = "dpcost", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a defect matrix and report whether it is well formed.
    Validate { matrix: PathBuf },
    /// Print dataset statistics of a defect matrix.
    Summarize { matrix: PathBuf },
    /// Cost of acting on a prediction and its profit over the trivial baselines.
    Cost {
        #[command(flatten)]
        input: PredictionInput,
        #[arg(long)]
        c_ratio: f64,
        #[command(flatten)]
        costs: CostFlags,
    },
    /// Range of cost ratios for which a prediction saves costs.
    Boundaries {
        #[command(flatten)]
        input: PredictionInput,
        #[command(flatten)]
        costs: CostFlags,
    },
    /// Run the simulated-predictor grid and write the records.
    Simulate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        acc_min: f64,
        #[arg(long, default_value_t = 0.95)]
        acc_max: f64,
        #[arg(long, default_value_t = 0.05)]
        acc_step: f64,
        #[arg(long, default_value_t = 100)]
        reps: u32,
        /// QA failure probabilities to evaluate (repeatable).
        #[arg(long = "p-qf", num_args = 1.., default_values_t = [0.0, 0.5])]
        p_qf: Vec<f64>,
        /// Restrict to these model kinds (repeatable); all six by default.
        #[arg(long = "kind", value_parser = parse_kind)]
        kinds: Vec<ModelKind>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scatter plot of boundaries against precision or recall.
    Plot {
        /// Record CSV written by `simulate`.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricArg,
        #[arg(long, value_parser = parse_kind)]
        kind: ModelKind,
        /// Only plot records with this QA failure probability.
        #[arg(long)]
        p_qf: Option<f64>,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, clap::Args)]
struct PredictionInput {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    /// `<constant|size>:<n-to-m|1-to-m|1-to-1>`
    #[arg(long, value_parser = parse_kind)]
    kind: ModelKind,
}

#[derive(Debug, clap::Args)]
struct CostFlags {
    #[arg(long, default_value_t = 0.0)]
    p_qf: f64,
    #[arg(long, default_value_t = 0.0)]
    c_init: f64,
    #[arg(long, default_value_t = 0.0)]
    c_exec: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Precision,
    Recall,
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: dpcost::Error| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_matrix(path: &Path) -> Result<Project> {
    let project = parse_matrix(&read(path)?).with_context(|| format!("{}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(project.with_name(name))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

struct Evaluated {
    view: Project,
    outcome: dpcost::OutcomeSummary,
    params: CostParams,
}

fn evaluate(input: &PredictionInput, costs: &CostFlags, c_ratio: f64) -> Result<Evaluated> {
    let project = load_matrix(&input.matrix)?;
    let prediction = parse_prediction(&read(&input.predictions)?, &project)
        .with_context(|| format!("{}", input.predictions.display()))?;
    let view = project_view(&project, input.kind.relationship)?;
    let outcome = classify(&view, &prediction)?;
    let params = CostParams::new(c_ratio, costs.p_qf, input.kind.qa_mode)
        .with_fixed_costs(costs.c_init, costs.c_exec);
    params.validate()?;
    Ok(Evaluated {
        view,
        outcome,
        params,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { matrix } => {
            let p = load_matrix(&matrix)?;
            let s = summarize(&p);
            println!(
                "ok: {} artifacts ({} defective), {} defects",
                s.n_artifacts, s.n_defective, s.n_defects
            );
        }
        Command::Summarize { matrix } => {
            let p = load_matrix(&matrix)?;
            let s = summarize(&p);
            println!("project\t|S|\t|S_DEF|\t|D|\tmean(|d|)\tmean(LOC)");
            println!(
                "{}\t{}\t{}\t{}\t{:.2}\t{:.2}",
                p.name(),
                s.n_artifacts,
                s.n_defective,
                s.n_defects,
                s.mean_members,
                s.mean_size
            );
            if s.no_defects {
                println!("note: no defects, mean(|d|) reported as 0");
            }
        }
        Command::Cost {
            input,
            c_ratio,
            costs,
        } => {
            let e = evaluate(&input, &costs, c_ratio)?;
            let cost = cost_init(&e.view, &e.outcome, &e.params, input.kind)?;
            let no_qa = cost_random(&e.view, 0.0, &e.params)?;
            let all_qa = cost_random(&e.view, 1.0, &e.params)?;
            println!("cost={cost}");
            println!("cost_no_qa={no_qa} profit_vs_no_qa={}", no_qa - cost);
            println!("cost_qa_all={all_qa} profit_vs_qa_all={}", all_qa - cost);
        }
        Command::Boundaries { input, costs } => {
            let e = evaluate(&input, &costs, 1.0)?;
            let iv = boundary_interval(&e.view, &e.outcome, &e.params, input.kind)?;
            println!(
                "lower={} upper={} saving={}",
                iv.lower, iv.upper, iv.cost_saving_possible
            );
        }
        Command::Simulate {
            matrix,
            seed,
            acc_min,
            acc_max,
            acc_step,
            reps,
            p_qf,
            kinds,
            format,
            out,
        } => {
            let project = load_matrix(&matrix)?;
            let config = GridConfig {
                accuracies: accuracy_grid(acc_min, acc_max, acc_step)?,
                repetitions: reps,
                p_qf_values: p_qf,
                seed,
                model_kinds: if kinds.is_empty() {
                    ModelKind::ALL.to_vec()
                } else {
                    kinds
                },
            };
            let records = run_grid(&project, &config)?;
            let format = match format {
                OutputFormat::Csv => Format::Csv,
                OutputFormat::Json => Format::Json,
            };
            write_output(out.as_deref(), &emit_records(&records, format))?;
            if out.is_some() {
                eprintln!("wrote {} records", records.len());
            }
        }
        Command::Plot {
            input,
            metric,
            kind,
            p_qf,
            bins,
            out,
        } => {
            if bins < 2 {
                bail!("--bins must be at least 2");
            }
            let mut records = parse_records(&read(&input)?, Format::Csv)
                .with_context(|| format!("{}", input.display()))?;
            if let Some(p) = p_qf {
                records.retain(|r| r.p_qf == p);
            }
            let metric = match metric {
                MetricArg::Precision => Metric::Precision,
                MetricArg::Recall => Metric::Recall,
            };
            let svg = render_scatter(&records, metric, kind, bins)?;
            write_output(Some(&out), &svg)?;
            match first_saving_bin(&records, metric, kind, bins) {
                Some(edge) => println!(
                    "cost saving in most runs from {} >= {edge}",
                    metric.name()
                ),
                None => println!("cost saving in no {} bin", metric.name()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
