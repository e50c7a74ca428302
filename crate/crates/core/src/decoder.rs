//! Search-space construction and decoding.
//!
//! A batch is aligned; every wildcard of the alignment gets a list of
//! candidate fillers built from the training pool and from the strings the
//! wildcard matches. The score of an instantiation decomposes into a
//! constant part plus one term per wildcard, so the argmax is taken
//! wildcard by wildcard.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::align::{progressive_align, wildcard, AlignConfig, Alignment};
use crate::features::{constant_part, has_concat_root, psi_compiled, psi_decomposed_compiled, FeatureVec, FEATURE_TREE_CAP};
use crate::loss::{LossKind, TruthPaths};
use crate::matcher::{CompiledRegex, DEFAULT_TREE_CAP};
use crate::regex::{print_regex, ClassItem, Pool, Regex};
use crate::{Error, Result};

/// Settings shared by decoding and training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    /// Parse-tree cap for matching lists and losses.
    pub cap: usize,
    pub align: AlignConfig,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            cap: DEFAULT_TREE_CAP,
            align: AlignConfig::default(),
        }
    }
}

/// Candidate fillers of one wildcard together with their features.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub matching_list: BTreeSet<String>,
    pub candidates: Vec<Regex>,
    pub features: Vec<FeatureVec>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn scores(&self, w: &[f64]) -> Vec<f64> {
        self.features.iter().map(|f| f.dot(w)).collect()
    }
}

/// All specializations of an alignment reachable from the pool.
#[derive(Debug, Clone)]
pub struct SearchSpace {
    pub alignment: Alignment,
    pub batch: Vec<String>,
    pub sets: Vec<CandidateSet>,
    constant: FeatureVec,
}

/// The pool, compiled once for repeated membership tests.
pub struct Decoder {
    pool: Vec<(Regex, CompiledRegex)>,
    config: DecodeConfig,
}

fn char_set_items(r: &Regex) -> Option<Vec<ClassItem>> {
    match r {
        Regex::Class(items) => Some(items.clone()),
        Regex::Macro(m) => Some(vec![ClassItem::Macro(*m)]),
        _ => None,
    }
}

fn covers(items: &[ClassItem], c: char) -> bool {
    items.iter().any(|it| it.contains(c))
}

/// Minimum and maximum length of the strings in `m`.
fn length_bounds(m: &BTreeSet<String>) -> (u32, u32) {
    let lens = m.iter().map(|s| s.chars().count() as u32);
    (lens.clone().min().unwrap_or(0), lens.max().unwrap_or(0))
}

/// The explicit disjunction of the strings of `m`, in sorted order.
pub fn disjunction_of(m: &BTreeSet<String>) -> Regex {
    Regex::alt(m.iter().map(|s| Regex::literal_str(s)).collect())
}

impl Decoder {
    pub fn new(pool: &Pool, config: DecodeConfig) -> Decoder {
        Decoder {
            pool: pool.iter().map(|(_, r)| (r.clone(), CompiledRegex::new(r))).collect(),
            config,
        }
    }

    pub fn config(&self) -> &DecodeConfig {
        &self.config
    }

    pub fn pool_len(&self) -> usize {
        self.pool.len()
    }

    /// Candidate fillers for a wildcard matching the strings of `m`, in
    /// tie-break order: pool members generating `m`, extended classes,
    /// quantified classes, and last the disjunction of `m`.
    pub fn candidates(&self, m: &BTreeSet<String>) -> Vec<Regex> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut push = |r: Regex, out: &mut Vec<Regex>| {
            if seen.insert(print_regex(&r)) {
                out.push(r);
            }
        };
        for (r, c) in &self.pool {
            if m.iter().all(|x| c.is_match(x)) {
                push(r.clone(), &mut out);
            }
        }

        let chars: BTreeSet<char> = m.iter().flat_map(|s| s.chars()).collect();
        let single = m.iter().all(|s| s.chars().count() == 1);
        let mut covering = Vec::new();
        let mut extended = Vec::new();
        for (r, _) in &self.pool {
            let Some(items) = char_set_items(r) else { continue };
            if chars.iter().all(|&c| covers(&items, c)) {
                covering.push(r.clone());
                continue;
            }
            let ranged = items.iter().any(|it| !matches!(it, ClassItem::Char(_)));
            if !ranged || !chars.iter().any(|&c| covers(&items, c)) {
                continue;
            }
            let mut ext: Vec<ClassItem> = chars
                .iter()
                .filter(|&&c| !covers(&items, c))
                .map(|&c| ClassItem::Char(c))
                .collect();
            ext.extend(items);
            extended.push(Regex::Class(ext));
        }
        for r in &extended {
            if single {
                push(r.clone(), &mut out);
            }
        }
        covering.extend(extended);

        let (l, u) = length_bounds(m);
        for class in covering {
            let b = || Box::new(class.clone());
            push(Regex::Star(b()), &mut out);
            if l == u {
                push(Regex::Repeat(b(), l), &mut out);
            } else {
                push(Regex::RepeatRange(b(), l, u), &mut out);
            }
            if u <= 1 {
                push(Regex::Optional(b()), &mut out);
            }
            if l > 0 {
                push(Regex::Plus(b()), &mut out);
            }
        }
        push(disjunction_of(m), &mut out);
        out
    }

    /// The search space of an alignment over a batch.
    pub fn space_for<S: AsRef<str>>(&self, alignment: &Alignment, batch: &[S]) -> Result<SearchSpace> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let batch: Vec<String> = batch.iter().map(|s| s.as_ref().to_string()).collect();
        let lists = alignment.matching_lists(&batch)?;
        let concat_root = has_concat_root(alignment);
        let mut sets = Vec::with_capacity(lists.len());
        for m in lists {
            let candidates = self.candidates(&m);
            let features = candidates
                .iter()
                .map(|y| {
                    let c = CompiledRegex::new(y);
                    if concat_root {
                        psi_decomposed_compiled(y, &c, &m, FEATURE_TREE_CAP)
                    } else {
                        let strings: Vec<&String> = m.iter().collect();
                        psi_compiled(&strings, &c, FEATURE_TREE_CAP)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            sets.push(CandidateSet {
                matching_list: m,
                candidates,
                features,
            });
        }
        Ok(SearchSpace {
            constant: constant_part(alignment, &batch)?,
            alignment: alignment.clone(),
            batch,
            sets,
        })
    }

    /// Aligns the batch and builds its search space.
    pub fn space<S: AsRef<str>>(&self, batch: &[S]) -> Result<SearchSpace> {
        let a = progressive_align(batch, &self.config.align)?;
        self.space_for(&a, batch)
    }

    /// The highest-scoring expression for a batch under weights `w`.
    pub fn decode<S: AsRef<str>>(&self, w: &[f64], batch: &[S]) -> Result<Regex> {
        let space = self.space(batch)?;
        Ok(space.instantiate(&space.argmax(w)))
    }
}

/// Builds the search space of `alignment` over `batch` from `pool`.
pub fn build_candidates<S: AsRef<str>>(
    pool: &Pool,
    alignment: &Alignment,
    batch: &[S],
    config: DecodeConfig,
) -> Result<SearchSpace> {
    Decoder::new(pool, config).space_for(alignment, batch)
}

/// Index of the first maximum.
fn first_max(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

impl SearchSpace {
    /// Number of instantiations.
    pub fn size(&self) -> u128 {
        self.sets.iter().map(|s| s.len() as u128).product()
    }

    pub fn instantiate(&self, choice: &[usize]) -> Regex {
        let fill: Vec<Regex> = self
            .sets
            .iter()
            .zip(choice)
            .map(|(s, &k)| s.candidates[k].clone())
            .collect();
        self.alignment.instantiate(&fill)
    }

    /// Joint features of an instantiation, assembled from the parts.
    pub fn features(&self, choice: &[usize]) -> FeatureVec {
        let mut f = self.constant.clone();
        for (s, &k) in self.sets.iter().zip(choice) {
            f.merge(&s.features[k]);
        }
        f
    }

    pub fn constant_features(&self) -> &FeatureVec {
        &self.constant
    }

    /// Per-wildcard argmax; ties go to the earlier candidate.
    pub fn argmax(&self, w: &[f64]) -> Vec<usize> {
        self.sets.iter().map(|s| first_max(&s.scores(w))).collect()
    }

    /// The choice vector that instantiates to `y`, if `y` is in the space.
    pub fn locate(&self, y: &Regex) -> Option<Vec<usize>> {
        let n = self.sets.len();
        let slots: Vec<Regex> = if has_concat_root(&self.alignment) {
            let Regex::Concat(children) = y else { return None };
            let mut it = children.iter();
            let mut slots = Vec::with_capacity(n);
            for (j, c) in self.alignment.constants().iter().enumerate() {
                if j > 0 {
                    slots.push(it.next()?.clone());
                }
                for ch in c.chars() {
                    if it.next()? != &Regex::Literal(ch) {
                        return None;
                    }
                }
            }
            if it.next().is_some() {
                return None;
            }
            slots
        } else if n == 1 {
            vec![y.clone()]
        } else {
            return (print_regex(y) == print_regex(&self.alignment.to_regex())).then(Vec::new);
        };
        let choice: Option<Vec<usize>> = self
            .sets
            .iter()
            .zip(&slots)
            .map(|(s, slot)| {
                let text = print_regex(slot);
                s.candidates.iter().position(|c| print_regex(c) == text)
            })
            .collect();
        choice.filter(|c| print_regex(&self.instantiate(c)) == print_regex(y))
    }

    /// Losses of the partial instantiations used by loss-augmented
    /// decoding: for wildcard `j` and candidate `k`, the loss of the
    /// alignment with only wildcard `j` replaced by candidate `k`.
    pub fn loss_terms(&self, truth: &mut TruthPaths, kind: LossKind) -> Result<Vec<Vec<f64>>> {
        let n = self.sets.len();
        let mut out = Vec::with_capacity(n);
        for (j, s) in self.sets.iter().enumerate() {
            let mut row = Vec::with_capacity(s.len());
            for cand in &s.candidates {
                let mut fill = vec![wildcard(); n];
                fill[j] = cand.clone();
                row.push(truth.loss_of(kind, &self.alignment.instantiate(&fill))?);
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Loss-augmented argmax given precomputed loss terms. When the result
    /// equals `truth`, the wildcard whose switch to its runner-up costs the
    /// least is switched.
    pub fn loss_augmented_argmax(&self, w: &[f64], terms: &[Vec<f64>], truth: Option<&[usize]>) -> Result<Vec<usize>> {
        let totals: Vec<Vec<f64>> = self
            .sets
            .iter()
            .zip(terms)
            .map(|(s, t)| s.scores(w).iter().zip(t).map(|(a, b)| a + b).collect())
            .collect();
        let mut choice: Vec<usize> = totals.iter().map(|t| first_max(t)).collect();
        if truth == Some(choice.as_slice()) {
            let mut best: Option<(f64, usize, usize)> = None;
            for (j, t) in totals.iter().enumerate() {
                let top = choice[j];
                let mut runner: Option<usize> = None;
                for k in 0..t.len() {
                    if k != top && runner.is_none_or(|r| t[k] > t[r]) {
                        runner = Some(k);
                    }
                }
                if let Some(r) = runner {
                    let drop = t[top] - t[r];
                    if best.is_none_or(|(d, _, _)| drop < d) {
                        best = Some((drop, j, r));
                    }
                }
            }
            let (_, j, r) = best.ok_or(Error::DegenerateSpace)?;
            choice[j] = r;
        }
        Ok(choice)
    }
}

/// Loss-augmented decoding of one training example.
pub fn loss_augmented_decode<S: AsRef<str>>(
    decoder: &Decoder,
    w: &[f64],
    batch: &[S],
    y_true: &Regex,
    kind: LossKind,
) -> Result<Regex> {
    let space = decoder.space(batch)?;
    let mut truth = TruthPaths::new(y_true, batch, decoder.config.cap)?;
    let terms = space.loss_terms(&mut truth, kind)?;
    let located = space.locate(y_true);
    let choice = space.loss_augmented_argmax(w, &terms, located.as_deref())?;
    Ok(space.instantiate(&choice))
}
