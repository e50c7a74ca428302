//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rex_core::corpus::sample_string;
use rex_core::regex::{parse_regex, print_regex, ClassItem, Regex};

const ATOMS: &[&str] = &["a", "b", "0", "1", "[ab]", "[0-9]", "[a0]", "\\d", "[a-b]"];
const POSTFIX: &[&str] = &["*", "+", "?", "{2}", "{1,2}", "{0,1}", "{0,2}"];

fn random_text<R: Rng>(rng: &mut R, depth: u32) -> String {
    let atom = |rng: &mut R| ATOMS.choose(rng).unwrap().to_string();
    if depth == 0 {
        return atom(rng);
    }
    match rng.gen_range(0..10) {
        0..=2 => atom(rng),
        3..=5 => (0..rng.gen_range(2..=3)).map(|_| random_piece(rng, depth - 1)).collect(),
        6..=7 => {
            let alts: Vec<String> = (0..rng.gen_range(2..=3)).map(|_| random_text(rng, depth - 1)).collect();
            format!("({})", alts.join("|"))
        }
        _ => random_piece(rng, depth - 1),
    }
}

fn random_piece<R: Rng>(rng: &mut R, depth: u32) -> String {
    let inner = random_text(rng, depth);
    let base = if inner.chars().count() == 1 || inner.starts_with('[') && inner.ends_with(']') && !inner[1..].contains('[') || inner == "\\d" {
        inner
    } else {
        format!("({inner})")
    };
    if rng.gen_bool(0.4) {
        format!("{base}{}", POSTFIX.choose(rng).unwrap())
    } else {
        base
    }
}

/// A random expression over a four-letter alphabet.
pub fn random_regex<R: Rng>(rng: &mut R, depth: u32) -> Regex {
    loop {
        let t = random_text(rng, depth);
        if let Ok(r) = parse_regex(&t) {
            return r;
        }
    }
}

pub fn sample_batch<R: Rng>(rng: &mut R, y: &Regex, n: usize) -> Vec<String> {
    (0..n).map(|_| sample_string(rng, y)).collect()
}

/// A derivation built directly from the AST.
#[derive(Debug, Clone)]
pub struct Deriv {
    pub label: String,
    pub start: usize,
    pub end: usize,
    pub kids: Vec<Deriv>,
}

fn class_leaf(items: &[ClassItem]) -> bool {
    matches!(items, [ClassItem::Range(..) | ClassItem::Macro(_)])
}

fn item_label(it: &ClassItem) -> String {
    match *it {
        ClassItem::Char(c) => print_regex(&Regex::Literal(c)),
        ClassItem::Range(..) => print_regex(&Regex::Class(vec![*it])),
        ClassItem::Macro(m) => print_regex(&Regex::Macro(m)),
    }
}

/// Every derivation of `x[i..j]` from `r`. Repetitions either run exactly
/// their minimum count (possibly with empty iterations) or run more often
/// with every iteration non-empty.
pub fn derivations(r: &Regex, x: &[char], i: usize, j: usize) -> Vec<Deriv> {
    let label = print_regex(r);
    let node = |kids: Vec<Deriv>| Deriv {
        label: label.clone(),
        start: i,
        end: j,
        kids,
    };
    match r {
        Regex::Epsilon => {
            if i == j {
                vec![node(vec![])]
            } else {
                vec![]
            }
        }
        Regex::Literal(_) | Regex::Macro(_) => {
            if j == i + 1 && r.char_matches(x[i]) {
                vec![node(vec![])]
            } else {
                vec![]
            }
        }
        Regex::Class(items) => {
            if j != i + 1 || !r.char_matches(x[i]) {
                return vec![];
            }
            if class_leaf(items) {
                return vec![node(vec![])];
            }
            let it = items.iter().find(|it| it.contains(x[i])).unwrap();
            vec![node(vec![Deriv {
                label: item_label(it),
                start: i,
                end: j,
                kids: vec![],
            }])]
        }
        Regex::Concat(cs) => seq(cs, x, i, j).into_iter().map(node).collect(),
        Regex::Alt(cs) => cs
            .iter()
            .flat_map(|c| derivations(c, x, i, j))
            .map(|d| node(vec![d]))
            .collect(),
        Regex::Star(b) => reps(b, 0, None, x, i, j).into_iter().map(node).collect(),
        Regex::Plus(b) => reps(b, 1, None, x, i, j).into_iter().map(node).collect(),
        Regex::Optional(b) => reps(b, 0, Some(1), x, i, j).into_iter().map(node).collect(),
        Regex::Repeat(b, k) => reps(b, *k as usize, Some(*k as usize), x, i, j).into_iter().map(node).collect(),
        Regex::RepeatRange(b, lo, hi) => reps(b, *lo as usize, Some(*hi as usize), x, i, j)
            .into_iter()
            .map(node)
            .collect(),
    }
}

fn seq(cs: &[Regex], x: &[char], i: usize, j: usize) -> Vec<Vec<Deriv>> {
    let Some((first, rest)) = cs.split_first() else {
        return if i == j { vec![vec![]] } else { vec![] };
    };
    let mut out = Vec::new();
    for k in i..=j {
        for d in derivations(first, x, i, k) {
            for mut tail in seq(rest, x, k, j) {
                tail.insert(0, d.clone());
                out.push(tail);
            }
        }
    }
    out
}

/// Exactly `k` iterations; `nonempty` forbids empty ones.
fn iterations(b: &Regex, k: usize, nonempty: bool, x: &[char], i: usize, j: usize) -> Vec<Vec<Deriv>> {
    if k == 0 {
        return if i == j { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let lo = if nonempty { i + 1 } else { i };
    for m in lo..=j {
        for d in derivations(b, x, i, m) {
            for mut tail in iterations(b, k - 1, nonempty, x, m, j) {
                tail.insert(0, d.clone());
                out.push(tail);
            }
        }
    }
    out
}

fn reps(b: &Regex, min: usize, max: Option<usize>, x: &[char], i: usize, j: usize) -> Vec<Vec<Deriv>> {
    let mut out = iterations(b, min, false, x, i, j);
    // more than the minimum, all non-empty: at most j - i iterations
    let top = max.unwrap_or(j - i).min(j - i);
    for k in (min + 1)..=top {
        out.extend(iterations(b, k, true, x, i, j));
    }
    out
}

/// All derivations of the whole string.
pub fn all_derivations(r: &Regex, x: &str) -> Vec<Deriv> {
    let cs: Vec<char> = x.chars().collect();
    derivations(r, &cs, 0, cs.len())
}

/// Labels on the path from the root to character `pos`, ending in the
/// character itself.
pub fn path_set(d: &Deriv, x: &[char], pos: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::from([print_regex(&Regex::Literal(x[pos]))]);
    let mut cur = Some(d);
    while let Some(n) = cur {
        out.insert(n.label.clone());
        cur = n.kids.iter().find(|k| k.start <= pos && pos < k.end);
    }
    out
}

/// Tree loss evaluated directly from materialized path sets.
pub fn oracle_tree_loss(ty: &[Deriv], tyhat: &[Deriv], x: &str) -> f64 {
    let cs: Vec<char> = x.chars().collect();
    let n = cs.len();
    if n == 0 {
        return 0.0;
    }
    let paths = |t: &Deriv| -> Vec<BTreeSet<String>> { (0..n).map(|p| path_set(t, &cs, p)).collect() };
    let py: Vec<_> = ty.iter().map(paths).collect();
    let ph: Vec<_> = tyhat.iter().map(paths).collect();
    let mut total = 0.0;
    for t in &py {
        let mut best = 0.0f64;
        for u in &ph {
            let s: f64 = (0..n)
                .map(|p| t[p].intersection(&u[p]).count() as f64 / t[p].len().max(u[p].len()) as f64)
                .sum::<f64>()
                / n as f64;
            best = best.max(s);
        }
        total += best;
    }
    1.0 - total / py.len() as f64
}
