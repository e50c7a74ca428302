//! Leave-one-out evaluation.
//!
//! For every labelled batch, a model is trained on the remaining batches
//! (or a given model is reused), an expression is decoded from a prefix of
//! the batch, and it is scored on the rest of the batch (true positives),
//! on the negative set (false positives) and against the annotation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{training_set, CorpusRecord};
use crate::align::progressive_align;
use crate::learner::{train, train_prepared, Example, Model, Prepared, TrainConfig, TrainingSet};
use crate::loss::{batch_loss, zero_one_loss, LossKind};
use crate::matcher::CompiledRegex;
use crate::regex::Regex;
use crate::{Error, Result};

/// A way of producing an expression from a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// The progressive alignment itself.
    Alignment,
    /// A model trained on the other batches with the given loss.
    Rex(LossKind),
    /// The model passed to [`evaluate`].
    Given,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Alignment => "alignment",
            Method::Rex(LossKind::Tree) => "rex-tree",
            Method::Rex(LossKind::ZeroOne) => "rex-zero-one",
            Method::Given => "model",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Number of strings of each batch the decoder sees.
    pub prefix: usize,
    pub train: TrainConfig,
    pub methods: Vec<Method>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            prefix: 5,
            train: TrainConfig::default(),
            methods: vec![Method::Alignment, Method::Rex(LossKind::Tree), Method::Rex(LossKind::ZeroOne)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub batch: usize,
    pub method: String,
    pub regex: String,
    pub predicted: String,
    pub tree_loss: f64,
    pub zero_one_loss: f64,
    pub tp_rate: f64,
    pub fp_rate: f64,
}

/// Mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        let n = xs.len();
        if n == 0 {
            return Stat { mean: 0.0, stderr: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Stat { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub tree_loss: Stat,
    pub zero_one_loss: Stat,
    pub tp_rate: Stat,
    pub fp_rate: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub batches: usize,
    pub negatives: usize,
    pub summaries: Vec<MethodSummary>,
    pub rows: Vec<BatchRow>,
    /// Wall-clock seconds; left out unless requested so reports stay
    /// reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl EvalReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method.name())
    }

    /// A fixed-width table of the summaries.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<14} {:>16} {:>16} {:>16} {:>16}\n",
            "method", "tree loss", "0/1 loss", "TP rate", "FP rate"
        );
        let cell = |x: &Stat| format!("{:.4} ± {:.4}", x.mean, x.stderr);
        for m in &self.summaries {
            s.push_str(&format!(
                "{:<14} {:>16} {:>16} {:>16} {:>16}\n",
                m.method,
                cell(&m.tree_loss),
                cell(&m.zero_one_loss),
                cell(&m.tp_rate),
                cell(&m.fp_rate)
            ));
        }
        s
    }
}

fn rate(r: &Regex, xs: &[String]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let c = CompiledRegex::new(r);
    xs.iter().filter(|x| c.is_match(x)).count() as f64 / xs.len() as f64
}

/// The alignment of the batch as an expression.
pub fn alignment_baseline<S: AsRef<str>>(batch: &[S], config: &TrainConfig) -> Result<Regex> {
    Ok(progressive_align(batch, &config.decode.align)?.to_regex())
}

struct Split<'a> {
    index: usize,
    example: &'a Example,
    prefix: &'a [String],
    rest: &'a [String],
}

fn score_row(split: &Split, method: Method, yhat: &Regex, negatives: &[String], cap: usize) -> Result<BatchRow> {
    let y = &split.example.regex;
    Ok(BatchRow {
        batch: split.index,
        method: method.name().to_string(),
        regex: y.to_string(),
        predicted: yhat.to_string(),
        tree_loss: batch_loss(y, yhat, split.prefix, cap)?,
        zero_one_loss: zero_one_loss(y, yhat),
        tp_rate: rate(yhat, split.rest),
        fp_rate: rate(yhat, negatives),
    })
}

fn others(data: &TrainingSet, i: usize) -> Result<TrainingSet> {
    let rest: Vec<Example> = data
        .examples()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, e)| e.clone())
        .collect();
    TrainingSet::new(rest)
}

fn splits<'a>(data: &'a TrainingSet, prefix: usize) -> Result<Vec<Split<'a>>> {
    if prefix == 0 {
        return Err(Error::InvalidConfig("prefix must be positive".into()));
    }
    data.examples()
        .iter()
        .enumerate()
        .map(|(index, example)| {
            if example.batch.len() <= prefix {
                return Err(Error::InsufficientData(format!(
                    "batch {index} has {} strings; a prefix of {prefix} leaves none held out",
                    example.batch.len()
                )));
            }
            let (p, r) = example.batch.split_at(prefix);
            Ok(Split {
                index,
                example,
                prefix: p,
                rest: r,
            })
        })
        .collect()
}

fn summarize(methods: &[Method], rows: &[BatchRow]) -> Vec<MethodSummary> {
    methods
        .iter()
        .map(|m| {
            let mine: Vec<&BatchRow> = rows.iter().filter(|r| r.method == m.name()).collect();
            let col = |f: fn(&BatchRow) -> f64| Stat::of(&mine.iter().map(|r| f(r)).collect::<Vec<_>>());
            MethodSummary {
                method: m.name().to_string(),
                tree_loss: col(|r| r.tree_loss),
                zero_one_loss: col(|r| r.zero_one_loss),
                tp_rate: col(|r| r.tp_rate),
                fp_rate: col(|r| r.fp_rate),
            }
        })
        .collect()
}

/// Evaluates the configured methods by leave-one-out over `corpus`.
/// `Method::Given` requires `model`.
pub fn evaluate(
    model: Option<&Model>,
    corpus: &[CorpusRecord],
    negatives: &[String],
    config: &EvalConfig,
) -> Result<EvalReport> {
    let start = Instant::now();
    let data = training_set(corpus)?;
    let cap = config.train.decode.cap;
    if config.methods.iter().any(|m| matches!(m, Method::Rex(_))) && data.len() < 2 {
        return Err(Error::InsufficientData("leave-one-out needs at least two batches".into()));
    }
    if config.methods.contains(&Method::Given) && model.is_none() {
        return Err(Error::InvalidConfig("method `model` needs a model".into()));
    }
    let splits = splits(&data, config.prefix)?;
    let folds: Vec<Vec<BatchRow>> = splits
        .par_iter()
        .map(|split| {
            let mut rows = Vec::new();
            for &method in &config.methods {
                let yhat = match method {
                    Method::Alignment => alignment_baseline(split.prefix, &config.train)?,
                    Method::Given => model.expect("checked above").decode(split.prefix)?,
                    Method::Rex(kind) => {
                        let cfg = TrainConfig { loss: kind, ..config.train };
                        let t = train(&others(&data, split.index)?, &cfg)?;
                        t.model.decode(split.prefix)?
                    }
                };
                rows.push(score_row(split, method, &yhat, negatives, cap)?);
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<BatchRow> = folds.into_iter().flatten().collect();
    log::info!("evaluated {} batches in {:.1}s", data.len(), start.elapsed().as_secs_f64());
    Ok(EvalReport {
        config: config.clone(),
        batches: data.len(),
        negatives: negatives.len(),
        summaries: summarize(&config.methods, &rows),
        rows,
        seconds: None,
    })
}

/// Chooses C from `grid` by k-fold cross validation on `data`, minimizing
/// the mean validation loss of the configured kind. Ties go to the
/// earlier grid value.
pub fn select_c(data: &TrainingSet, grid: &[f64], folds: usize, config: &TrainConfig) -> Result<(f64, Vec<f64>)> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty C grid".into()));
    }
    let m = data.len();
    let k = folds.min(m);
    if k < 2 {
        return Err(Error::InsufficientData("cross validation needs at least two examples".into()));
    }
    let mut totals = vec![0.0; grid.len()];
    for f in 0..k {
        let (train_ex, valid): (Vec<_>, Vec<_>) = data.examples().iter().enumerate().partition(|(i, _)| i % k != f);
        let train_set = TrainingSet::new(train_ex.into_iter().map(|(_, e)| e.clone()).collect())?;
        let pool = train_set.pool();
        let decoder = crate::decoder::Decoder::new(&pool, config.decode);
        let mut prepared = train_set
            .examples()
            .iter()
            .map(|ex| Prepared::new(&decoder, ex, config.loss))
            .collect::<Result<Vec<_>>>()?;
        for (g, &c) in grid.iter().enumerate() {
            let cfg = TrainConfig { c, ..*config };
            let t = train_prepared(pool.clone(), &mut prepared, &cfg)?;
            for (_, ex) in &valid {
                let yhat = decoder.decode(&t.model.weights, &ex.batch)?;
                totals[g] += match config.loss {
                    LossKind::Tree => batch_loss(&ex.regex, &yhat, &ex.batch, config.decode.cap)?,
                    LossKind::ZeroOne => zero_one_loss(&ex.regex, &yhat),
                } / m as f64;
            }
        }
    }
    let best = (0..grid.len()).fold(0, |b, g| if totals[g] < totals[b] { g } else { b });
    Ok((grid[best], totals))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XvalReport {
    pub grid: Vec<f64>,
    pub inner_folds: usize,
    /// The C chosen for each held-out batch.
    pub selected_c: Vec<f64>,
    pub report: EvalReport,
}

/// Leave-one-out evaluation of a trained model with C tuned by inner
/// cross validation on each training split; the alignment baseline is
/// reported alongside.
pub fn xval(
    corpus: &[CorpusRecord],
    negatives: &[String],
    grid: &[f64],
    inner_folds: usize,
    config: &EvalConfig,
) -> Result<XvalReport> {
    let data = training_set(corpus)?;
    if data.len() < 3 {
        return Err(Error::InsufficientData("nested cross validation needs at least three batches".into()));
    }
    let cap = config.train.decode.cap;
    let splits = splits(&data, config.prefix)?;
    let method = Method::Rex(config.train.loss);
    let folds: Vec<(f64, Vec<BatchRow>)> = splits
        .par_iter()
        .map(|split| {
            let rest = others(&data, split.index)?;
            let (c, _) = select_c(&rest, grid, inner_folds, &config.train)?;
            let t = train(&rest, &TrainConfig { c, ..config.train })?;
            let yhat = t.model.decode(split.prefix)?;
            let base = alignment_baseline(split.prefix, &config.train)?;
            Ok((
                c,
                vec![
                    score_row(split, Method::Alignment, &base, negatives, cap)?,
                    score_row(split, method, &yhat, negatives, cap)?,
                ],
            ))
        })
        .collect::<Result<_>>()?;
    let selected_c = folds.iter().map(|(c, _)| *c).collect();
    let rows: Vec<BatchRow> = folds.into_iter().flat_map(|(_, r)| r).collect();
    let methods = vec![Method::Alignment, method];
    let report = EvalReport {
        config: EvalConfig {
            methods: methods.clone(),
            ..config.clone()
        },
        batches: data.len(),
        negatives: negatives.len(),
        summaries: summarize(&methods, &rows),
        rows,
        seconds: None,
    };
    Ok(XvalReport {
        grid: grid.to_vec(),
        inner_folds,
        selected_c,
        report,
    })
}
