use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rex_core::corpus::{
    evaluate, generate_synthetic, load_corpus, load_negatives, save_corpus, save_negatives, training_set, xval,
    EvalConfig, Method, SynthParams,
};
use rex_core::learner::{load_model, save_model, train, TrainConfig};
use rex_core::loss::LossKind;

/// Learns regular expressions that describe batches of strings.
#[derive(Parser)]
#[command(name = "rex", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a model on a labelled corpus.
    Train {
        #[arg(short = 'c', long)]
        corpus: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Decode one expression per batch.
    Predict {
        #[arg(short = 'm', long)]
        model: PathBuf,
        #[arg(short = 'i', long)]
        input: PathBuf,
        /// Write to a file instead of stdout.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Leave-one-out evaluation against a negative set.
    Eval {
        #[arg(short = 'c', long)]
        corpus: PathBuf,
        #[arg(short = 'n', long)]
        negatives: Option<PathBuf>,
        /// Evaluate this model instead of retraining per fold.
        #[arg(short = 'm', long)]
        model: Option<PathBuf>,
        /// Strings of each batch shown to the decoder.
        #[arg(long, default_value_t = 5)]
        prefix: usize,
        /// JSON report path; the table goes to stdout.
        #[arg(short = 'o', long, default_value = "report.json")]
        output: PathBuf,
        /// Include wall-clock time in the report.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Generate a synthetic corpus and negative set.
    Gen {
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Negative strings, one per line.
        #[arg(short = 'n', long)]
        negatives: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        templates: usize,
        #[arg(long, default_value_t = 12)]
        batch_size: usize,
        #[arg(long = "negative-count", default_value_t = 500)]
        negative_count: usize,
        #[arg(long, default_value_t = 3)]
        max_slots: usize,
    },
    /// Leave-one-out evaluation with C tuned by inner cross validation.
    Xval {
        #[arg(short = 'c', long)]
        corpus: PathBuf,
        #[arg(short = 'n', long)]
        negatives: Option<PathBuf>,
        /// Candidate values of C.
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,1,10")]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 5)]
        prefix: usize,
        #[arg(short = 'o', long, default_value = "xval.json")]
        output: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Tree,
    ZeroOne,
}

#[derive(Args)]
struct TrainArgs {
    /// JSON training configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "C", allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    /// Parse-tree cap for losses and matching lists.
    #[arg(long)]
    cap: Option<usize>,
    /// Shortest constant run an alignment keeps.
    #[arg(long)]
    min_run: Option<usize>,
}

impl TrainArgs {
    fn resolve(&self) -> Result<TrainConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => TrainConfig::default(),
        };
        if let Some(c) = self.c {
            cfg.c = c;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(l) = self.loss {
            cfg.loss = match l {
                LossArg::Tree => LossKind::Tree,
                LossArg::ZeroOne => LossKind::ZeroOne,
            };
        }
        if let Some(cap) = self.cap {
            cfg.decode.cap = cap;
        }
        if let Some(m) = self.min_run {
            cfg.decode.align.min_run = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn negatives(path: &Option<PathBuf>) -> Result<Vec<String>> {
    Ok(match path {
        Some(p) => load_negatives(p)?,
        None => Vec::new(),
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Train { corpus, output, train: t } => {
            let cfg = t.resolve()?;
            let records = load_corpus(&corpus)?;
            let data = training_set(&records).with_context(|| format!("in {}", corpus.display()))?;
            let result = train(&data, &cfg)?;
            if !result.converged {
                log::warn!("training stopped after {} passes without converging", result.passes);
            }
            save_model(&result.model, &output)?;
            log::info!(
                "trained on {} batches: {} constraints, objective {:.6}",
                data.len(),
                result.working_set.constraints.len(),
                result.objective()
            );
        }
        Cmd::Predict { model, input, output } => {
            let model = load_model(&model)?;
            let records = load_corpus(&input)?;
            let mut out = String::new();
            for (i, r) in records.iter().enumerate() {
                if r.strings.is_empty() {
                    bail!("{}: batch {} is empty", input.display(), i + 1);
                }
                let y = model.decode(&r.strings)?;
                out.push_str(&y.to_string());
                out.push('\n');
            }
            match output {
                Some(p) => std::fs::write(&p, out).with_context(|| format!("writing {}", p.display()))?,
                None => std::io::stdout().write_all(out.as_bytes())?,
            }
        }
        Cmd::Eval {
            corpus,
            negatives: neg,
            model,
            prefix,
            output,
            timing,
            train: t,
        } => {
            let start = Instant::now();
            let records = load_corpus(&corpus)?;
            let neg = negatives(&neg)?;
            let model = model.map(|p| load_model(&p)).transpose()?;
            let mut methods = vec![Method::Alignment];
            match model {
                Some(_) => methods.push(Method::Given),
                None => methods.extend([Method::Rex(LossKind::Tree), Method::Rex(LossKind::ZeroOne)]),
            }
            let cfg = EvalConfig {
                prefix,
                train: t.resolve()?,
                methods,
            };
            let mut report = evaluate(model.as_ref(), &records, &neg, &cfg)?;
            if timing {
                report.seconds = Some(start.elapsed().as_secs_f64());
            }
            write_json(&report, &output)?;
            print!("{}", report.table());
        }
        Cmd::Gen {
            output,
            negatives,
            seed,
            templates,
            batch_size,
            negative_count,
            max_slots,
        } => {
            let s = generate_synthetic(&SynthParams {
                seed,
                templates,
                batch_size,
                negatives: negative_count,
                max_slots,
                ..SynthParams::default()
            })?;
            save_corpus(&s.corpus, &output)?;
            save_negatives(&s.negatives, &negatives)?;
        }
        Cmd::Xval {
            corpus,
            negatives: neg,
            grid,
            folds,
            prefix,
            output,
            train: t,
        } => {
            let records = load_corpus(&corpus)?;
            let neg = negatives(&neg)?;
            let cfg = EvalConfig {
                prefix,
                train: t.resolve()?,
                methods: Vec::new(),
            };
            let report = xval(&records, &neg, &grid, folds, &cfg)?;
            write_json(&report, &output)?;
            print!("{}", report.report.table());
            let cs: Vec<String> = report.selected_c.iter().map(|c| c.to_string()).collect();
            println!("selected C per fold: {}", cs.join(" "));
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REX_LOG", "warn")).init();
    if let Err(e) = run(Cli::parse()) {
        // library errors already embed their cause in the message
        let mut msg = e.to_string();
        for cause in e.chain().skip(1) {
            let c = cause.to_string();
            if !msg.ends_with(&c) {
                msg = format!("{msg}: {c}");
            }
        }
        eprintln!("rex: {msg}");
        std::process::exit(1);
    }
}
