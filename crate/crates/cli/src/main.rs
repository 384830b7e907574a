use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vwmhqae::harness::commands::{
    cmd_evaluate, cmd_experiment, cmd_generate, cmd_headmode, cmd_params, cmd_predict, cmd_train,
};
use vwmhqae::harness::experiment::{ranking, ranking_table};
use vwmhqae::harness::report::metrics_text;
use vwmhqae::harness::RunConfig;
use vwmhqae::{Error, ErrorCategory};

/// Multi-headed quality-driven autoencoder soft sensors.
#[derive(Debug, Parser)]
#[command(name = "vwmhqae", version)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print nothing on success except requested tables.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and score it on the test split.
    Train,
    /// Score a checkpoint on a labelled CSV or the configured test split.
    Evaluate {
        #[arg(long, value_name = "PATH")]
        checkpoint: PathBuf,
        #[arg(long, value_name = "CSV")]
        data: Option<PathBuf>,
    },
    /// Per-head probabilities and labels for a features CSV.
    Predict {
        #[arg(long, value_name = "PATH")]
        checkpoint: PathBuf,
        #[arg(long, value_name = "CSV")]
        data: PathBuf,
    },
    /// Run the model comparison grid.
    Experiment,
    /// Multi-headed outputs versus the head as a categorical input.
    HeadmodeCompare,
    /// Parameter table of a stacked model.
    Params {
        /// Input width; defaults to the configured data.
        #[arg(long)]
        input: Option<usize>,
        /// Comma-separated hidden widths; defaults to the configured dims.
        #[arg(long, value_delimiter = ',')]
        hidden: Option<Vec<usize>>,
        /// Number of outputs; defaults to the configured data.
        #[arg(long)]
        heads: Option<usize>,
    },
    /// Write the synthetic dataset to CSV.
    Generate,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn exit_code(c: ErrorCategory) -> u8 {
    match c {
        ErrorCategory::Config => 1,
        ErrorCategory::Data | ErrorCategory::Internal => 2,
        ErrorCategory::Numeric => 3,
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn report(f: Failure) -> ExitCode {
    let (category, code, message) = match f {
        Failure::Usage(m) => ("usage", 1, m),
        Failure::Run(e) => (e.category().as_str(), exit_code(e.category()), e.to_string()),
    };
    eprintln!("vwmhqae: error category={category} exit={code} message={}", one_line(&message));
    ExitCode::from(code)
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli)?;
    let say = |s: String| {
        if !cli.quiet {
            println!("{s}");
        }
    };
    match &cli.command {
        Command::Train => {
            let out = cmd_train::<f64>(&cfg)?;
            say(format!("{}\nwrote {}", metrics_text(&out.report), cfg.out_dir.display()));
        }
        Command::Evaluate { checkpoint, data } => {
            let r = cmd_evaluate::<f64>(&cfg, checkpoint, data.as_deref())?;
            say(metrics_text(&r));
        }
        Command::Predict { checkpoint, data } => {
            let p = cmd_predict::<f64>(&cfg, checkpoint, data)?;
            say(format!("wrote {}", p.display()));
        }
        Command::Experiment => {
            let res = cmd_experiment::<f64>(&cfg)?;
            say(format!(
                "{}\nruns ok {}/{}; wrote {}",
                ranking_table(&ranking(&res)).render(),
                res.n_ok(),
                res.runs.len(),
                cfg.out_dir.display()
            ));
        }
        Command::HeadmodeCompare => {
            let res = cmd_headmode::<f64>(&cfg)?;
            let faster = res.iter().filter(|r| r.multihead_faster()).count();
            say(format!(
                "multi-head reached the reference first in {faster}/{} seeds; wrote {}",
                res.len(),
                cfg.out_dir.display()
            ));
        }
        Command::Params { input, hidden, heads } => {
            let (default_input, default_heads) = match &cfg.data.csv {
                Some(src) => (src.schema.features.len(), src.schema.heads.len()),
                None => (cfg.data.synthetic.n_features, cfg.data.synthetic.n_heads()),
            };
            let hidden = hidden.clone().unwrap_or_else(|| cfg.dims.hidden.clone());
            let (_, text) = cmd_params(input.unwrap_or(default_input), &hidden, heads.unwrap_or(default_heads))?;
            print!("{text}");
        }
        Command::Generate => {
            let p = cmd_generate::<f64>(&cfg)?;
            say(format!("wrote {}", p.display()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            return report(Failure::Usage(first.to_string()));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}
