//! Cutting-plane training of the linear model.
//!
//! Each pass runs loss-augmented decoding on every example; an output whose
//! margin violation exceeds the example's current slack by more than
//! `epsilon` joins the working set, and the problem restricted to the
//! working set is re-solved. Training stops after a pass that adds nothing.

mod model;
mod solver;

pub use model::{load_model, save_model, MODEL_FORMAT_VERSION};

use serde::{Deserialize, Serialize};

use crate::decoder::{DecodeConfig, Decoder, SearchSpace};
use crate::features::{psi, FEATURE_TREE_CAP, PSI_DIM};
use crate::loss::{LossKind, TruthPaths};
use crate::matcher::CompiledRegex;
use crate::regex::{print_regex, subexpression_pool, Pool, Regex};
use crate::{Error, Result};

use solver::DualSolver;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Regularization constant.
    pub c: f64,
    /// Violation tolerance for adding constraints.
    pub epsilon: f64,
    pub loss: LossKind,
    pub decode: DecodeConfig,
    /// Upper bound on cutting-plane passes.
    pub max_passes: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            epsilon: 1e-3,
            loss: LossKind::Tree,
            decode: DecodeConfig::default(),
            max_passes: 200,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.decode.cap == 0 {
            return Err(Error::InvalidConfig("parse-tree cap must be positive".into()));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidConfig("max_passes must be positive".into()));
        }
        Ok(())
    }
}

/// One training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub batch: Vec<String>,
    pub regex: Regex,
}

/// A validated, non-empty list of examples.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    examples: Vec<Example>,
}

impl TrainingSet {
    pub fn new(examples: Vec<Example>) -> Result<TrainingSet> {
        if examples.is_empty() {
            return Err(Error::InsufficientData("no training examples".into()));
        }
        for ex in &examples {
            if ex.batch.is_empty() {
                return Err(Error::EmptyBatch);
            }
            let c = CompiledRegex::new(&ex.regex);
            if let Some(x) = ex.batch.iter().find(|x| !c.is_match(x)) {
                return Err(Error::not_in_language(&ex.regex, x));
            }
        }
        Ok(TrainingSet { examples })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn pool(&self) -> Pool {
        subexpression_pool(self.examples.iter().map(|e| &e.regex))
    }
}

/// Weights, the training pool and the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub weights: Vec<f64>,
    pub pool: Pool,
    pub config: TrainConfig,
}

impl Model {
    /// The untrained model over a pool.
    pub fn zero(pool: Pool, config: TrainConfig) -> Model {
        Model {
            weights: vec![0.0; PSI_DIM],
            pool,
            config,
        }
    }

    pub fn decoder(&self) -> Decoder {
        Decoder::new(&self.pool, self.config.decode)
    }

    pub fn decode<S: AsRef<str>>(&self, batch: &[S]) -> Result<Regex> {
        self.decoder().decode(&self.weights, batch)
    }
}

/// A margin constraint of one example.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub example: usize,
    pub ybar: Regex,
    /// `Δ(y_i, ȳ, x_i)`
    pub loss: f64,
    /// `Ψ(x_i, y_i) − Ψ(x_i, ȳ)`
    pub dpsi: Vec<f64>,
}

/// The constraints generated so far.
#[derive(Debug, Clone, Default)]
pub struct WorkingSet {
    pub constraints: Vec<Constraint>,
}

impl WorkingSet {
    pub fn for_example(&self, i: usize) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(move |c| c.example == i)
    }
}

/// Margin violation of a constraint, `Δ − w·δψ`, not floored.
pub fn slack(w: &[f64], c: &Constraint) -> f64 {
    c.loss - dot(w, &c.dpsi)
}

/// Per-example slacks `ξ_i` implied by a working set.
pub fn slacks(w: &[f64], ws: &WorkingSet, m: usize) -> Vec<f64> {
    let mut xi = vec![0.0f64; m];
    for c in &ws.constraints {
        xi[c.example] = xi[c.example].max(slack(w, c));
    }
    xi
}

/// `½‖w‖² + (C/m) Σ_i ξ_i` over the working set.
pub fn objective(w: &[f64], c: f64, ws: &WorkingSet, m: usize) -> f64 {
    0.5 * dot(w, w) + c / m as f64 * slacks(w, ws, m).iter().sum::<f64>()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-example state kept across passes.
pub struct Prepared {
    pub space: SearchSpace,
    truth: TruthPaths,
    /// Per-wildcard loss terms of loss-augmented decoding.
    terms: Vec<Vec<f64>>,
    /// Position of the annotated expression in the space.
    pub truth_choice: Option<Vec<usize>>,
    pub psi_true: Vec<f64>,
}

impl Prepared {
    pub fn new(decoder: &Decoder, ex: &Example, kind: LossKind) -> Result<Prepared> {
        let cap = decoder.config().cap;
        let space = decoder.space(&ex.batch)?;
        let mut truth = TruthPaths::new(&ex.regex, &ex.batch, cap)?;
        let terms = space.loss_terms(&mut truth, kind)?;
        let truth_choice = space.locate(&ex.regex);
        let psi_true = match &truth_choice {
            Some(c) => space.features(c).dense(),
            None => psi(&ex.batch, &ex.regex, FEATURE_TREE_CAP)?.dense(),
        };
        Ok(Prepared {
            space,
            truth,
            terms,
            truth_choice,
            psi_true,
        })
    }

    /// Loss-augmented decoding under `w`; `None` when the space has no
    /// alternative to the annotated expression.
    pub fn most_violated(&self, w: &[f64]) -> Result<Option<Vec<usize>>> {
        match self
            .space
            .loss_augmented_argmax(w, &self.terms, self.truth_choice.as_deref())
        {
            Ok(c) => Ok(Some(c)),
            Err(Error::DegenerateSpace) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Batch loss of an instantiation against the annotation.
    pub fn loss(&mut self, kind: LossKind, ybar: &Regex) -> Result<f64> {
        self.truth.loss_of(kind, ybar)
    }

    pub fn constraint(&mut self, example: usize, kind: LossKind, choice: &[usize]) -> Result<Constraint> {
        let ybar = self.space.instantiate(choice);
        let loss = self.loss(kind, &ybar)?;
        let f = self.space.features(choice).dense();
        let dpsi = self.psi_true.iter().zip(&f).map(|(a, b)| a - b).collect();
        Ok(Constraint {
            example,
            ybar,
            loss,
            dpsi,
        })
    }
}

/// The outcome of training.
#[derive(Debug, Clone)]
pub struct Training {
    pub model: Model,
    pub working_set: WorkingSet,
    pub passes: usize,
    /// Number of training examples.
    pub examples: usize,
    /// Whether a pass without new constraints was reached.
    pub converged: bool,
    /// Working-set objective after each re-solve.
    pub history: Vec<f64>,
}

impl Training {
    pub fn objective(&self) -> f64 {
        self.history.last().copied().unwrap_or(0.0)
    }

    pub fn slacks(&self) -> Vec<f64> {
        slacks(&self.model.weights, &self.working_set, self.examples)
    }
}

/// Trains a model on `data`.
pub fn train(data: &TrainingSet, config: &TrainConfig) -> Result<Training> {
    config.validate()?;
    let pool = data.pool();
    let decoder = Decoder::new(&pool, config.decode);
    let mut prepared = data
        .examples()
        .iter()
        .map(|ex| Prepared::new(&decoder, ex, config.loss))
        .collect::<Result<Vec<_>>>()?;
    train_prepared(pool, &mut prepared, config)
}

/// Training over examples whose search spaces are already built.
pub fn train_prepared(pool: Pool, prepared: &mut [Prepared], config: &TrainConfig) -> Result<Training> {
    config.validate()?;
    let m = prepared.len();
    if m == 0 {
        return Err(Error::InsufficientData("no training examples".into()));
    }
    let budget = config.c / m as f64;
    let mut w = vec![0.0; PSI_DIM];
    let mut ws = WorkingSet::default();
    let mut seen: Vec<std::collections::HashSet<String>> = vec![Default::default(); m];
    let mut solver = DualSolver::default();
    let mut history = Vec::new();
    let mut passes = 0;
    let mut converged = false;

    while passes < config.max_passes {
        passes += 1;
        let mut added = 0;
        for (i, p) in prepared.iter_mut().enumerate() {
            let Some(choice) = p.most_violated(&w)? else { continue };
            let c = p.constraint(i, config.loss, &choice)?;
            let xi = ws
                .for_example(i)
                .map(|c| slack(&w, c))
                .fold(0.0f64, f64::max);
            let h = slack(&w, &c);
            let text = print_regex(&c.ybar);
            if h <= xi + config.epsilon || seen[i].contains(&text) {
                continue;
            }
            log::debug!("pass {passes}: example {i} adds {text} (violation {h:.6}, slack {xi:.6})");
            seen[i].insert(text);
            solver.push(i, c.dpsi.clone(), c.loss);
            ws.constraints.push(c);
            solver.solve(budget, m);
            w = solver.weights(PSI_DIM);
            history.push(objective(&w, config.c, &ws, m));
            added += 1;
        }
        log::info!(
            "pass {passes}: {added} new constraints, {} total, objective {:.6}",
            ws.constraints.len(),
            history.last().copied().unwrap_or(0.0)
        );
        if added == 0 {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("cutting plane stopped after {passes} passes without converging");
    }
    Ok(Training {
        model: Model {
            weights: w,
            pool,
            config: *config,
        },
        working_set: ws,
        passes,
        examples: m,
        converged,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::parse_regex;

    fn ex(strings: &[&str], y: &str) -> Example {
        Example {
            batch: strings.iter().map(|s| s.to_string()).collect(),
            regex: parse_regex(y).unwrap(),
        }
    }

    #[test]
    fn rejects_bad_config_and_data() {
        let cfg = TrainConfig { c: 0.0, ..TrainConfig::default() };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        assert!(TrainingSet::new(vec![]).is_err());
        assert!(matches!(
            TrainingSet::new(vec![ex(&["ab"], "a")]),
            Err(Error::NotInLanguage { .. })
        ));
    }

    #[test]
    fn trivial_examples_need_no_constraints() {
        let data = TrainingSet::new(vec![ex(&["abc", "abc"], "abc"), ex(&["abc"], "abc")]).unwrap();
        let t = train(&data, &TrainConfig::default()).unwrap();
        assert!(t.working_set.constraints.is_empty());
        assert!(t.model.weights.iter().all(|&x| x == 0.0));
        assert!(t.converged);
    }

    #[test]
    fn separable_example_is_recovered() {
        let data = TrainingSet::new(vec![ex(&["id 12 ok", "id 345 ok", "id 7 ok"], "id \\d+ ok")]).unwrap();
        let cfg = TrainConfig { c: 10.0, ..TrainConfig::default() };
        let t = train(&data, &cfg).unwrap();
        assert!(t.converged);
        let y = t.model.decode(&data.examples()[0].batch).unwrap();
        assert_eq!(y.to_string(), "id \\d+ ok");
        for c in &t.working_set.constraints {
            let xi = slacks(&t.model.weights, &t.working_set, 1)[0];
            assert!(slack(&t.model.weights, c) <= xi + 1e-9);
        }
    }

    #[test]
    fn objective_at_zero() {
        let w = vec![0.0; PSI_DIM];
        assert_eq!(objective(&w, 1.0, &WorkingSet::default(), 3), 0.0);
        let ws = WorkingSet {
            constraints: (0..3)
                .map(|i| Constraint {
                    example: i,
                    ybar: Regex::Epsilon,
                    loss: 1.0,
                    dpsi: vec![0.0; PSI_DIM],
                })
                .collect(),
        };
        assert_eq!(objective(&w, 2.5, &ws, 3), 2.5);
    }
}
