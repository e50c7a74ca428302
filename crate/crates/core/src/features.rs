//! The joint feature map of a batch and an expression.
//!
//! Layout (version [`FEATURE_LAYOUT_VERSION`]), 660 dimensions:
//!
//! - `0..400`: edge block, `20 * lambda(parent) + lambda(child)`, summed
//!   over syntax-tree edges;
//! - `400..660`: node block, `400 + 20 * attribute + lambda(node)`, the
//!   attributes of each node's matching list placed in the column of the
//!   node's operator.
//!
//! Components are accumulated exactly and rounded once, so a vector's
//! value does not depend on the order its terms were added in.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::align::Alignment;
use crate::matcher::CompiledRegex;
use crate::regex::{ClassItem, Regex, Shorthand};
use crate::{Error, Result};

pub const FEATURE_LAYOUT_VERSION: u32 = 1;

/// Parse-tree cap the decoder and learner use for the matching lists of
/// Ψ. Only the first derivation counts: its filler spans are exactly the
/// alignment's leftmost segments, so Ψ of an instantiation splits over the
/// wildcards even when the instantiation is ambiguous.
pub const FEATURE_TREE_CAP: usize = 1;
pub const LAMBDA_DIM: usize = 20;
pub const PHI_DIM: usize = 13;
pub const EDGE_DIM: usize = LAMBDA_DIM * LAMBDA_DIM;
pub const PSI_DIM: usize = EDGE_DIM + PHI_DIM * LAMBDA_DIM;

pub const OP_CONCAT: usize = 0;
pub const OP_ALT: usize = 1;
pub const OP_CLASS: usize = 2;
pub const OP_STAR: usize = 3;
pub const OP_OPTIONAL: usize = 4;
pub const OP_PLUS: usize = 5;
pub const OP_REPEAT: usize = 6;
pub const OP_REPEAT_RANGE: usize = 7;
/// First of the ten range and macro indices.
pub const OP_RANGES: usize = 8;
pub const OP_CHAR: usize = 18;
pub const OP_EPSILON: usize = 19;

/// Display names of the operator indices.
pub const LAMBDA_NAMES: [&str; LAMBDA_DIM] = [
    "concat", "alt", "class", "star", "optional", "plus", "repeat", "repeat-range", "0-9", "a-f",
    "a-z", "A-F", "A-Z", "\\S", "\\e", "\\w", "\\d", ".", "char", "epsilon",
];

/// Display names of the attributes.
pub const PHI_NAMES: [&str; PHI_DIM] = [
    "bias",
    "mean-len",
    "min-len",
    "max-len",
    "has-empty",
    "frac-digit",
    "frac-upper",
    "frac-lower",
    "frac-space",
    "frac-other",
    "distinct",
    "all-identical",
    "all-same-len",
];

const RANGES: [(char, char); 5] = [('0', '9'), ('a', 'f'), ('a', 'z'), ('A', 'F'), ('A', 'Z')];

fn macro_index(m: Shorthand) -> usize {
    OP_RANGES
        + 5
        + match m {
            Shorthand::NonSpace => 0,
            Shorthand::Url => 1,
            Shorthand::Word => 2,
            Shorthand::Digit => 3,
            Shorthand::Any => 4,
        }
}

/// Index of the top-level operator of `y`.
pub fn lambda_index(y: &Regex) -> usize {
    match y {
        Regex::Concat(_) => OP_CONCAT,
        Regex::Alt(_) => OP_ALT,
        Regex::Class(items) => match items.as_slice() {
            [ClassItem::Range(lo, hi)] => RANGES
                .iter()
                .position(|r| *r == (*lo, *hi))
                .map_or(OP_CLASS, |i| OP_RANGES + i),
            [ClassItem::Macro(m)] => macro_index(*m),
            _ => OP_CLASS,
        },
        Regex::Star(_) => OP_STAR,
        Regex::Optional(_) => OP_OPTIONAL,
        Regex::Plus(_) => OP_PLUS,
        Regex::Repeat(..) => OP_REPEAT,
        Regex::RepeatRange(..) => OP_REPEAT_RANGE,
        Regex::Macro(m) => macro_index(*m),
        Regex::Literal(_) => OP_CHAR,
        Regex::Epsilon => OP_EPSILON,
    }
}

/// One-hot encoding of the top-level operator.
pub fn lambda_vec(y: &Regex) -> [f64; LAMBDA_DIM] {
    let mut v = [0.0; LAMBDA_DIM];
    v[lambda_index(y)] = 1.0;
    v
}

/// Attributes of a set of strings.
pub fn phi_vec<'a, I>(m: I) -> Result<[f64; PHI_DIM]>
where
    I: IntoIterator<Item = &'a String>,
{
    let set: BTreeSet<&str> = m.into_iter().map(String::as_str).collect();
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let lens: Vec<usize> = set.iter().map(|s| s.chars().count()).collect();
    let (mut digit, mut upper, mut lower, mut space, mut other) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for c in set.iter().flat_map(|s| s.chars()) {
        match c {
            '0'..='9' => digit += 1,
            'A'..='Z' => upper += 1,
            'a'..='z' => lower += 1,
            ' ' | '\t' | '\n' => space += 1,
            _ => other += 1,
        }
    }
    let chars: usize = lens.iter().sum();
    let frac = |k: usize| if chars == 0 { 0.0 } else { k as f64 / chars as f64 };
    let min = *lens.iter().min().unwrap();
    let max = *lens.iter().max().unwrap();
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    Ok([
        1.0,
        chars as f64 / set.len() as f64,
        min as f64,
        max as f64,
        flag(set.contains("")),
        frac(digit),
        frac(upper),
        frac(lower),
        frac(space),
        frac(other),
        set.len() as f64,
        flag(set.len() == 1),
        flag(min == max),
    ])
}

/// Error-free accumulation of `f64` terms, rounded once on read.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn merge(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    /// The exact sum, correctly rounded.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            let y = p[n - 1];
            n -= 1;
            hi = x + y;
            lo = y - (hi - x);
            if lo != 0.0 {
                break;
            }
        }
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

/// A sparse realization of the joint feature vector.
#[derive(Clone, Default)]
pub struct FeatureVec {
    terms: BTreeMap<usize, ExactSum>,
}

impl FeatureVec {
    pub fn new() -> FeatureVec {
        FeatureVec::default()
    }

    pub fn add(&mut self, index: usize, value: f64) {
        assert!(index < PSI_DIM);
        if value != 0.0 {
            self.terms.entry(index).or_default().add(value);
        }
    }

    pub fn add_edge(&mut self, parent: usize, child: usize) {
        self.add(parent * LAMBDA_DIM + child, 1.0);
    }

    pub fn add_node(&mut self, op: usize, phi: &[f64; PHI_DIM]) {
        for (a, &v) in phi.iter().enumerate() {
            self.add(EDGE_DIM + a * LAMBDA_DIM + op, v);
        }
    }

    pub fn merge(&mut self, other: &FeatureVec) {
        for (&i, s) in &other.terms {
            self.terms.entry(i).or_default().merge(s);
        }
    }

    pub fn get(&self, index: usize) -> f64 {
        self.terms.get(&index).map_or(0.0, ExactSum::value)
    }

    /// Non-zero components in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.terms.iter().map(|(&i, s)| (i, s.value())).filter(|&(_, v)| v != 0.0)
    }

    pub fn dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; PSI_DIM];
        for (i, x) in self.entries() {
            v[i] = x;
        }
        v
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.entries().map(|(i, x)| w[i] * x).sum()
    }
}

impl PartialEq for FeatureVec {
    fn eq(&self, other: &FeatureVec) -> bool {
        self.entries().eq(other.entries())
    }
}

impl fmt::Debug for FeatureVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries()).finish()
    }
}

/// Joint features of a batch and an expression generating it. Syntax nodes
/// whose matching list is empty (unused branches) contribute no node
/// features.
pub fn psi<S: AsRef<str>>(batch: &[S], y: &Regex, cap: usize) -> Result<FeatureVec> {
    psi_compiled(batch, &CompiledRegex::new(y), cap)
}

pub fn psi_compiled<S: AsRef<str>>(batch: &[S], y: &CompiledRegex, cap: usize) -> Result<FeatureVec> {
    let syn = y.syntax();
    let ops: Vec<usize> = syn.nodes().iter().map(|n| lambda_index(&n.label)).collect();
    let mut f = FeatureVec::new();
    for (p, c) in syn.edges() {
        f.add_edge(ops[p], ops[c]);
    }
    let lists = y.matching_lists(batch, cap)?;
    for (v, m) in lists.iter().enumerate() {
        if !m.is_empty() {
            f.add_node(ops[v], &phi_vec(m)?);
        }
    }
    Ok(f)
}

/// Features of one wildcard filler: its own joint features plus the edge
/// from the enclosing concatenation.
pub fn psi_decomposed(y_j: &Regex, m_j: &BTreeSet<String>, cap: usize) -> Result<FeatureVec> {
    psi_decomposed_compiled(y_j, &CompiledRegex::new(y_j), m_j, cap)
}

pub(crate) fn psi_decomposed_compiled(
    y_j: &Regex,
    c: &CompiledRegex,
    m_j: &BTreeSet<String>,
    cap: usize,
) -> Result<FeatureVec> {
    let batch: Vec<&String> = m_j.iter().collect();
    let mut f = psi_compiled(&batch, c, cap)?;
    f.add_edge(OP_CONCAT, lambda_index(y_j));
    Ok(f)
}

/// Whether instantiations of `a` have a concatenation at the root, so
/// each filler hangs off it.
pub fn has_concat_root(a: &Alignment) -> bool {
    a.constant_len() + a.wildcard_count() >= 2
}

/// Features contributed by the root and the constant characters of an
/// instantiation of `a` over `batch`.
pub fn constant_part<S: AsRef<str>>(a: &Alignment, batch: &[S]) -> Result<FeatureVec> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut f = FeatureVec::new();
    let whole: BTreeSet<String> = batch.iter().map(|s| s.as_ref().to_string()).collect();
    if !has_concat_root(a) {
        if a.wildcard_count() == 0 {
            f.add_node(OP_CHAR, &phi_vec(&whole)?);
        }
        return Ok(f);
    }
    f.add_node(OP_CONCAT, &phi_vec(&whole)?);
    for c in a.constants().iter().flat_map(|s| s.chars()) {
        f.add_edge(OP_CONCAT, OP_CHAR);
        f.add_node(OP_CHAR, &phi_vec(&BTreeSet::from([c.to_string()]))?);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::parse_regex;
    use proptest::prelude::*;

    fn re(s: &str) -> Regex {
        parse_regex(s).unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_index(&re("a|b")), OP_ALT);
        assert_eq!(lambda_index(&re("\\d")), OP_RANGES + 8);
        assert_eq!(lambda_index(&re("[\\d]")), OP_RANGES + 8);
        assert_eq!(lambda_index(&re("ab")), OP_CONCAT);
        assert_eq!(lambda_index(&re("[0-9]")), OP_RANGES);
        assert_eq!(lambda_index(&re("[A-Z]")), OP_RANGES + 4);
        assert_eq!(lambda_index(&re("[b-k]")), OP_CLASS);
        assert_eq!(lambda_index(&re("[b0-9]")), OP_CLASS);
        assert_eq!(lambda_index(&re(".")), OP_RANGES + 9);
        assert_eq!(lambda_index(&Regex::Epsilon), OP_EPSILON);
        assert_eq!(lambda_vec(&re("a")).iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn phi_examples() {
        let p = phi_vec(&set(&["12", "b4"])).unwrap();
        assert_eq!(p, [1.0, 2.0, 2.0, 2.0, 0.0, 0.75, 0.0, 0.25, 0.0, 0.0, 2.0, 0.0, 1.0]);
        let p = phi_vec(&set(&[""])).unwrap();
        assert_eq!(p[1], 0.0);
        assert_eq!(p[4], 1.0);
        assert!(p[5..10].iter().all(|&x| x == 0.0));
        let p = phi_vec(&set(&["AA"])).unwrap();
        assert_eq!(p[6], 1.0);
        assert_eq!(p[11], 1.0);
        assert!(matches!(phi_vec(&set(&[])), Err(Error::EmptySet)));
    }

    #[test]
    fn psi_of_ab() {
        let f = psi(&["ab"], &re("ab"), 32).unwrap();
        let d = f.dense();
        assert_eq!(d[OP_CONCAT * LAMBDA_DIM + OP_CHAR], 2.0);
        assert_eq!(d[..EDGE_DIM].iter().sum::<f64>(), 2.0);
        let (pab, pa, pb) = (
            phi_vec(&set(&["ab"])).unwrap(),
            phi_vec(&set(&["a"])).unwrap(),
            phi_vec(&set(&["b"])).unwrap(),
        );
        for k in 0..PHI_DIM {
            assert_eq!(d[EDGE_DIM + k * LAMBDA_DIM + OP_CONCAT], pab[k]);
            assert_eq!(d[EDGE_DIM + k * LAMBDA_DIM + OP_CHAR], pa[k] + pb[k]);
        }
    }

    #[test]
    fn psi_single_node_has_no_edges() {
        let d = psi(&["a"], &re("a"), 32).unwrap().dense();
        assert!(d[..EDGE_DIM].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn psi_of_figure_two_expression() {
        let d = psi(&["12c", "b4caa"], &re("[b0-9]{2}c(aa|b)*"), 32).unwrap().dense();
        let p = phi_vec(&set(&["12", "b4"])).unwrap();
        for k in 0..PHI_DIM {
            assert_eq!(d[EDGE_DIM + k * LAMBDA_DIM + OP_REPEAT], p[k]);
        }
    }

    #[test]
    fn decomposed_examples() {
        let f = psi_decomposed(&re("a"), &set(&["a"]), 32).unwrap();
        let d = f.dense();
        assert_eq!(d[OP_CONCAT * LAMBDA_DIM + OP_CHAR], 1.0);
        assert_eq!(d[..EDGE_DIM].iter().sum::<f64>(), 1.0);
        let d = psi_decomposed(&re("(12|b4)"), &set(&["12", "b4"]), 32).unwrap().dense();
        assert_eq!(d[OP_CONCAT * LAMBDA_DIM + OP_ALT], 1.0);
        assert_eq!(d[OP_ALT * LAMBDA_DIM + OP_CONCAT], 2.0);
        assert_eq!(d[OP_CONCAT * LAMBDA_DIM + OP_CHAR], 4.0);
    }

    #[test]
    fn decomposition_of_figure_two_prefix() {
        let a = Alignment::new(vec!["", "c"]);
        let batch = ["12c", "b4c"];
        let y_1 = re("[b0-9]{2}");
        let m = a.matching_lists(&batch).unwrap();
        let mut rhs = constant_part(&a, &batch).unwrap();
        rhs.merge(&psi_decomposed(&y_1, &m[0], 32).unwrap());
        assert_eq!(psi(&batch, &a.instantiate(&[y_1]), 32).unwrap(), rhs);
    }

    #[test]
    fn exact_sum_is_order_free() {
        let xs = [0.1, 1e16, 0.3, -1e16, 0.7, 1.0 / 3.0];
        let mut a = ExactSum::default();
        let mut b = ExactSum::default();
        xs.iter().for_each(|&x| a.add(x));
        xs.iter().rev().for_each(|&x| b.add(x));
        assert_eq!(a.value(), b.value());
    }

    proptest! {
        #[test]
        fn exact_sum_permutation(xs in proptest::collection::vec(-1e6f64..1e6, 0..30), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut ys = xs.clone();
            ys.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut a = ExactSum::default();
            let mut b = ExactSum::default();
            xs.iter().for_each(|&x| a.add(x));
            ys.iter().for_each(|&x| b.add(x));
            prop_assert_eq!(a.value(), b.value());
        }
    }
}
