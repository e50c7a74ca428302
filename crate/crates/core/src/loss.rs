//! Losses between an annotated expression and a prediction.
//!
//! The tree loss compares, character by character, the sets of labels on
//! the root-to-character paths of the parse trees of both expressions. The
//! batch loss averages it over strings, charging 1 for every string the
//! prediction fails to generate.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::matcher::{CompiledRegex, ParseNode, ParseTrees, DEFAULT_TREE_CAP};
use crate::regex::{print_regex, Regex};
use crate::{Error, Result};

/// Which loss the learner optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    #[default]
    Tree,
    ZeroOne,
}

/// Interns labels so path sets are small sorted integer vectors.
#[derive(Default)]
struct Labels {
    ids: HashMap<String, u32>,
}

impl Labels {
    fn id(&mut self, s: &str) -> u32 {
        if let Some(&i) = self.ids.get(s) {
            return i;
        }
        let i = self.ids.len() as u32;
        self.ids.insert(s.to_string(), i);
        i
    }
}

/// Path sets of one tree, one sorted vector per character.
type Paths = Vec<Vec<u32>>;

fn tree_paths(root: &ParseNode, texts: &[u32], input: &[char], labels: &mut Labels) -> Paths {
    fn go(n: &ParseNode, texts: &[u32], input: &[char], labels: &mut Labels, stack: &mut Vec<u32>, out: &mut Paths) {
        stack.push(texts[n.node]);
        if n.children.is_empty() {
            if n.end == n.start + 1 {
                let mut set = stack.clone();
                set.push(labels.id(&print_regex(&Regex::Literal(input[n.start]))));
                set.sort_unstable();
                set.dedup();
                out.push(set);
            }
        } else {
            for c in &n.children {
                go(c, texts, input, labels, stack, out);
            }
        }
        stack.pop();
    }
    let mut out = Vec::with_capacity(input.len());
    go(root, texts, input, labels, &mut Vec::new(), &mut out);
    out
}

fn all_paths(c: &CompiledRegex, trees: &ParseTrees, labels: &mut Labels) -> Vec<Paths> {
    let texts: Vec<u32> = c.syntax().nodes().iter().map(|n| labels.id(&n.text)).collect();
    trees
        .trees
        .iter()
        .map(|t| tree_paths(&t.root, &texts, t.input(), labels))
        .collect()
}

fn overlap(a: &[u32], b: &[u32]) -> f64 {
    let (mut i, mut j, mut k) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                k += 1;
                i += 1;
                j += 1;
            }
        }
    }
    k as f64 / a.len().max(b.len()) as f64
}

fn paths_loss(truth: &[Paths], pred: &[Paths], len: usize) -> f64 {
    if len == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for t in truth {
        let mut best = 0.0f64;
        for u in pred {
            let s: f64 = t.iter().zip(u).map(|(a, b)| overlap(a, b)).sum::<f64>() / len as f64;
            best = best.max(s);
        }
        total += best;
    }
    (1.0 - total / truth.len() as f64).clamp(0.0, 1.0)
}

/// Tree loss between `y` and `yhat` on a string both generate.
pub fn tree_loss(y: &Regex, yhat: &Regex, x: &str, cap: usize) -> Result<f64> {
    let (cy, cp) = (CompiledRegex::new(y), CompiledRegex::new(yhat));
    let (ty, tp) = (cy.parse_trees(x, cap), cp.parse_trees(x, cap));
    if ty.is_empty() {
        return Err(Error::not_in_language(y, x));
    }
    if tp.is_empty() {
        return Err(Error::not_in_language(yhat, x));
    }
    let mut labels = Labels::default();
    let a = all_paths(&cy, &ty, &mut labels);
    let b = all_paths(&cp, &tp, &mut labels);
    Ok(paths_loss(&a, &b, x.chars().count()))
}

/// Batch loss: mean over strings of the tree loss, or 1 where `yhat` fails
/// to generate the string.
pub fn batch_loss<S: AsRef<str>>(y: &Regex, yhat: &Regex, batch: &[S], cap: usize) -> Result<f64> {
    TruthPaths::new(y, batch, cap)?.loss(yhat)
}

/// Zero-one loss on canonical forms.
pub fn zero_one_loss(y: &Regex, yhat: &Regex) -> f64 {
    if print_regex(y) == print_regex(yhat) {
        0.0
    } else {
        1.0
    }
}

/// Loss of the selected kind for a batch.
pub fn loss<S: AsRef<str>>(kind: LossKind, y: &Regex, yhat: &Regex, batch: &[S], cap: usize) -> Result<f64> {
    match kind {
        LossKind::Tree => batch_loss(y, yhat, batch, cap),
        LossKind::ZeroOne => Ok(zero_one_loss(y, yhat)),
    }
}

/// The annotated side of the batch loss, prepared once and evaluated
/// against many predictions.
pub struct TruthPaths {
    y: Regex,
    text: String,
    strings: Vec<Vec<char>>,
    cap: usize,
    labels: Labels,
    paths: Vec<Vec<Paths>>,
}

impl TruthPaths {
    pub fn new<S: AsRef<str>>(y: &Regex, batch: &[S], cap: usize) -> Result<TruthPaths> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let cy = CompiledRegex::new(y);
        let mut labels = Labels::default();
        let mut strings = Vec::with_capacity(batch.len());
        let mut paths = Vec::with_capacity(batch.len());
        for x in batch {
            let x = x.as_ref();
            let trees = cy.parse_trees(x, cap);
            if trees.is_empty() {
                return Err(Error::not_in_language(y, x));
            }
            paths.push(all_paths(&cy, &trees, &mut labels));
            strings.push(x.chars().collect());
        }
        Ok(TruthPaths {
            y: y.clone(),
            text: print_regex(y),
            strings,
            cap,
            labels,
            paths,
        })
    }

    pub fn regex(&self) -> &Regex {
        &self.y
    }

    /// Batch loss of `yhat`.
    pub fn loss(&mut self, yhat: &Regex) -> Result<f64> {
        if print_regex(yhat) == self.text {
            return Ok(0.0);
        }
        let cp = CompiledRegex::new(yhat);
        let mut total = 0.0;
        for (x, truth) in self.strings.iter().zip(&self.paths) {
            let s: String = x.iter().collect();
            let tp = cp.parse_trees(&s, self.cap);
            total += if tp.is_empty() {
                1.0
            } else {
                let pred = all_paths(&cp, &tp, &mut self.labels);
                paths_loss(truth, &pred, x.len())
            };
        }
        Ok(total / self.strings.len() as f64)
    }

    /// Loss of the selected kind.
    pub fn loss_of(&mut self, kind: LossKind, yhat: &Regex) -> Result<f64> {
        match kind {
            LossKind::Tree => self.loss(yhat),
            LossKind::ZeroOne => Ok(zero_one_loss(&self.y, yhat)),
        }
    }
}

/// Default cap for loss evaluation.
pub const DEFAULT_LOSS_CAP: usize = DEFAULT_TREE_CAP;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::parse_trees;
    use crate::regex::parse_regex;
    use std::collections::BTreeSet;

    fn re(s: &str) -> Regex {
        parse_regex(s).unwrap()
    }

    /// Direct evaluation from string-labelled path sets.
    fn oracle(y: &str, yhat: &str, x: &str) -> f64 {
        let sets = |r: &str| -> Vec<Vec<BTreeSet<String>>> {
            parse_trees(&re(r), x, 1000)
                .trees
                .iter()
                .map(|t| (1..=x.len()).map(|i| t.path_labels(i).unwrap()).collect())
                .collect()
        };
        let (a, b) = (sets(y), sets(yhat));
        let n = x.len() as f64;
        let mut sum = 0.0;
        for t in &a {
            let mut best = 0.0f64;
            for u in &b {
                let mut s = 0.0;
                for (p, q) in t.iter().zip(u) {
                    s += p.intersection(q).count() as f64 / p.len().max(q.len()) as f64;
                }
                best = best.max(s / n);
            }
            sum += best;
        }
        1.0 - sum / a.len() as f64
    }

    #[test]
    fn identity_is_zero() {
        assert_eq!(tree_loss(&re("[b0-9]{2}c(aa|b)*"), &re("[b0-9]{2}c(aa|b)*"), "1bc", 32).unwrap(), 0.0);
        assert_eq!(tree_loss(&re("a|a"), &re("a|a"), "a", 32).unwrap(), 0.0);
        assert_eq!(tree_loss(&re("a*"), &re("b*"), "", 32).unwrap(), 0.0);
    }

    #[test]
    fn ab_against_char_disjunctions() {
        let d = tree_loss(&re("ab"), &re("(a|b)(a|b)"), "ab", 32).unwrap();
        assert!(d > 0.0 && d < 1.0);
        // paths {ab, a} vs {(a|b)(a|b), (a|b), a}: 1/3 per character
        assert!((d - 2.0 / 3.0).abs() < 1e-15);
        assert!((d - oracle("ab", "(a|b)(a|b)", "ab")).abs() < 1e-15);
    }

    #[test]
    fn batch_examples() {
        let y = re("ab");
        assert_eq!(batch_loss(&y, &y, &["ab"], 32).unwrap(), 0.0);
        assert_eq!(batch_loss(&y, &re("cd"), &["ab"], 32).unwrap(), 1.0);
        let yhat = re("(ab|ba)");
        assert_eq!(
            batch_loss(&y, &yhat, &["ab"], 32).unwrap(),
            tree_loss(&y, &yhat, "ab", 32).unwrap()
        );
        // one rejected string of two
        let half = batch_loss(&re("a|b"), &re("a"), &["a", "b"], 32).unwrap();
        assert!((half - 0.5 * (1.0 + tree_loss(&re("a|b"), &re("a"), "a", 32).unwrap())).abs() < 1e-15);
        assert!(matches!(batch_loss::<&str>(&y, &y, &[], 32), Err(Error::EmptyBatch)));
        assert!(matches!(batch_loss(&y, &y, &["b"], 32), Err(Error::NotInLanguage { .. })));
    }

    #[test]
    fn zero_one() {
        assert_eq!(zero_one_loss(&re("a"), &re("a")), 0.0);
        assert_eq!(zero_one_loss(&re("a"), &re("b")), 1.0);
        assert_eq!(zero_one_loss(&re("(a|b)"), &re("(b|a)")), 1.0);
    }

    #[test]
    fn oracle_cases() {
        for (y, yhat, x) in [
            ("(a|aa)(a|aa)", "a*", "aaa"),
            ("(a|a)b", "[ab]+", "ab"),
            ("\\d+x", "[0-9]{2}.", "12x"),
            ("(a*)*", "a{2}", "aa"),
        ] {
            let got = tree_loss(&re(y), &re(yhat), x, 1000).unwrap();
            assert!((got - oracle(y, yhat, x)).abs() < 1e-12, "{y} {yhat} {x}");
        }
    }
}
