//! Alignments of strings: constants alternating with `.*` wildcards.
//!
//! Pairwise alignments are maximal (longest common subsequence, computed in
//! linear space). Batches are aligned progressively by folding the pairwise
//! step over the strings; wildcards of the partial result are rendered as a
//! sentinel that matches nothing.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::regex::{Regex, Shorthand};
use crate::{Error, Result};

/// `a_0 .* a_1 … .* a_n`. Interior constants are non-empty; the two end
/// constants may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alignment {
    constants: Vec<String>,
}

/// Order in which the progressive aligner folds a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderPolicy {
    /// Longest strings first, ties in lexicographic order.
    #[default]
    LengthDescending,
    /// The order the batch was given in.
    AsGiven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignConfig {
    pub order: OrderPolicy,
    /// Constant runs shorter than this are absorbed into the neighboring
    /// wildcards.
    pub min_run: usize,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            order: OrderPolicy::LengthDescending,
            min_run: 1,
        }
    }
}

/// The wildcard expression `.*`.
pub fn wildcard() -> Regex {
    Regex::Star(Box::new(Regex::Macro(Shorthand::Any)))
}

impl Alignment {
    /// Builds an alignment from its constants, merging empty interior
    /// constants into the surrounding wildcards.
    pub fn new<S: Into<String>>(constants: Vec<S>) -> Alignment {
        let mut cs: Vec<String> = constants.into_iter().map(Into::into).collect();
        if cs.is_empty() {
            cs.push(String::new());
        }
        let last = cs.len() - 1;
        let mut out = Vec::with_capacity(cs.len());
        for (i, c) in cs.into_iter().enumerate() {
            if c.is_empty() && i != 0 && i != last {
                continue;
            }
            out.push(c);
        }
        Alignment { constants: out }
    }

    /// The alignment of a single string: the string itself.
    pub fn constant(s: &str) -> Alignment {
        Alignment {
            constants: vec![s.to_string()],
        }
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn wildcard_count(&self) -> usize {
        self.constants.len() - 1
    }

    /// Total number of constant characters.
    pub fn constant_len(&self) -> usize {
        self.constants.iter().map(|c| c.chars().count()).sum()
    }

    /// The expression with wildcard `j` (zero-based) replaced by `fill[j]`.
    pub fn instantiate(&self, fill: &[Regex]) -> Regex {
        assert_eq!(fill.len(), self.wildcard_count(), "one expression per wildcard");
        let mut parts = Vec::new();
        for (j, c) in self.constants.iter().enumerate() {
            if j > 0 {
                parts.push(fill[j - 1].clone());
            }
            parts.extend(c.chars().map(Regex::Literal));
        }
        Regex::concat(parts)
    }

    pub fn to_regex(&self) -> Regex {
        self.instantiate(&vec![wildcard(); self.wildcard_count()])
    }

    /// The constants and wildcards as one symbol sequence; `None` marks a
    /// wildcard.
    fn render(&self) -> Vec<Option<char>> {
        let mut out = Vec::new();
        for (j, c) in self.constants.iter().enumerate() {
            if j > 0 {
                out.push(None);
            }
            out.extend(c.chars().map(Some));
        }
        out
    }

    /// Whether `x` is generated, with wildcards matching any string.
    pub fn accepts(&self, x: &str) -> bool {
        self.locate(x).is_some()
    }

    /// Leftmost placement of the constants in `x`: the byte span of each.
    fn locate(&self, x: &str) -> Option<Vec<(usize, usize)>> {
        let cs = &self.constants;
        let n = cs.len() - 1;
        if n == 0 {
            return (x == cs[0]).then(|| vec![(0, x.len())]);
        }
        if !x.starts_with(cs[0].as_str()) {
            return None;
        }
        let last = &cs[n];
        if x.len() < last.len() || !x.ends_with(last.as_str()) {
            return None;
        }
        let tail = x.len() - last.len();
        let mut spans = vec![(0, cs[0].len())];
        let mut pos = cs[0].len();
        for c in &cs[1..n] {
            let at = pos + x.get(pos..)?.find(c.as_str())?;
            pos = at + c.len();
            spans.push((at, pos));
        }
        if pos > tail {
            return None;
        }
        spans.push((tail, x.len()));
        Some(spans)
    }

    /// The wildcard fillers of `x` under the leftmost convention.
    pub fn segment(&self, x: &str) -> Result<Vec<String>> {
        let spans = self
            .locate(x)
            .ok_or_else(|| Error::not_in_language(&self.to_regex(), x))?;
        Ok(spans.windows(2).map(|w| x[w[0].1..w[1].0].to_string()).collect())
    }

    /// Per-wildcard matching lists `M_1 … M_n` over the batch.
    pub fn matching_lists<S: AsRef<str>>(&self, batch: &[S]) -> Result<Vec<BTreeSet<String>>> {
        let mut lists = vec![BTreeSet::new(); self.wildcard_count()];
        for x in batch {
            for (m, s) in lists.iter_mut().zip(self.segment(x.as_ref())?) {
                m.insert(s);
            }
        }
        Ok(lists)
    }

    /// Absorbs constant runs shorter than `min_run` into wildcards. An
    /// alignment without wildcards is returned unchanged.
    pub fn filter_short_runs(&self, min_run: usize) -> Alignment {
        if self.wildcard_count() == 0 || min_run <= 1 {
            return self.clone();
        }
        let cs = self
            .constants
            .iter()
            .map(|c| if c.chars().count() >= min_run { c.clone() } else { String::new() })
            .collect();
        Alignment::new(cs)
    }

    fn from_pairs(a: &[Option<char>], b_len: usize, pairs: &[(usize, usize)]) -> Alignment {
        let mut constants = vec![String::new()];
        let mut prev: Option<(usize, usize)> = None;
        for &(i, j) in pairs {
            let adjacent = match prev {
                None => i == 0 && j == 0,
                Some((pi, pj)) => i == pi + 1 && j == pj + 1,
            };
            if !adjacent {
                constants.push(String::new());
            }
            constants.last_mut().unwrap().push(a[i].expect("sentinels never match"));
            prev = Some((i, j));
        }
        let at_end = match prev {
            None => a.is_empty() && b_len == 0,
            Some((i, j)) => i + 1 == a.len() && j + 1 == b_len,
        };
        if !at_end {
            constants.push(String::new());
        }
        Alignment::new(constants)
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_regex())
    }
}

fn same(a: Option<char>, b: Option<char>) -> bool {
    a.is_some() && a == b
}

/// Last row of the LCS length table of `a` against every prefix of `b`.
fn lcs_row<'a>(a: impl Iterator<Item = &'a Option<char>>, b: &[Option<char>]) -> Vec<usize> {
    let mut prev = vec![0; b.len() + 1];
    let mut cur = vec![0; b.len() + 1];
    for &x in a {
        for (j, &y) in b.iter().enumerate() {
            cur[j + 1] = if same(x, y) {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev
}

/// Matched index pairs of a longest common subsequence, by Hirschberg's
/// divide and conquer.
fn hirschberg(a: &[Option<char>], b: &[Option<char>], ao: usize, bo: usize, out: &mut Vec<(usize, usize)>) {
    if a.is_empty() || b.is_empty() {
        return;
    }
    if a.len() == 1 {
        if let Some(j) = b.iter().position(|&y| same(a[0], y)) {
            out.push((ao, bo + j));
        }
        return;
    }
    let mid = a.len() / 2;
    let fwd = lcs_row(a[..mid].iter(), b);
    let rb: Vec<Option<char>> = b.iter().rev().copied().collect();
    let bwd = lcs_row(a[mid..].iter().rev(), &rb);
    let m = b.len();
    let k = (0..=m).max_by_key(|&k| (fwd[k] + bwd[m - k], std::cmp::Reverse(k))).unwrap();
    hirschberg(&a[..mid], &b[..k], ao, bo, out);
    hirschberg(&a[mid..], &b[k..], ao + mid, bo + k, out);
}

fn align_symbols(a: &[Option<char>], b: &str) -> Alignment {
    let bs: Vec<Option<char>> = b.chars().map(Some).collect();
    let mut pairs = Vec::new();
    hirschberg(a, &bs, 0, 0, &mut pairs);
    Alignment::from_pairs(a, bs.len(), &pairs)
}

/// A maximal alignment of two strings.
pub fn pairwise_align(x1: &str, x2: &str) -> Alignment {
    let a: Vec<Option<char>> = x1.chars().map(Some).collect();
    align_symbols(&a, x2)
}

/// Folds the pairwise step over an existing alignment and one more string.
pub fn extend_alignment(a: &Alignment, x: &str) -> Alignment {
    align_symbols(&a.render(), x)
}

/// An alignment generating every string of `batch`.
pub fn progressive_align<S: AsRef<str>>(batch: &[S], config: &AlignConfig) -> Result<Alignment> {
    let mut order: Vec<&str> = batch.iter().map(AsRef::as_ref).collect();
    if order.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if config.order == OrderPolicy::LengthDescending {
        order.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then(a.cmp(b)));
    }
    let mut acc = Alignment::constant(order[0]);
    for x in &order[1..] {
        if !acc.accepts(x) {
            acc = extend_alignment(&acc, x);
        }
    }
    Ok(acc.filter_short_runs(config.min_run))
}
