//! Synthetic campaigns: random message templates, batches sampled from
//! them, and a negative set of strings that belong to no campaign.
//!
//! Templates alternate constant text with variable slots. Constants are
//! runs of words that begin and end with a space where they touch a slot,
//! and slot fillers never contain spaces, so a batch's alignment usually
//! recovers the template's skeleton.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CorpusRecord;
use crate::matcher::CompiledRegex;
use crate::regex::{parse_regex, ClassItem, Regex};
use crate::{Error, Result};

const WORDS: &[&str] = &[
    "Dear", "customer", "your", "order", "code", "is", "ready", "click", "here", "to", "claim", "the", "prize",
    "account", "number", "Reference", "call", "now", "free", "offer", "ID", "shipped", "via", "tracking",
    "regards", "visit", "winner", "update", "login", "at", "today", "invoice", "due", "for", "member", "bonus",
    "First name:", "Surname:", "Password:", "Amount:", "Hello", "from", "team", "expires", "on",
];

const SLOTS: &[&str] = &[
    "\\d+",
    "[0-9]{2,4}",
    "\\d{3}",
    "[a-z]+",
    "[A-Z][a-z]+",
    "\\S+",
    "[\\S]+",
    "\\w+",
    "[a-f0-9]{8}",
    "(EUR|GBP)",
    "\\e+",
    "[A-Z]{2}\\d{4}",
    "[a-z]{3,6}",
    "[A-Z]+",
];

/// Longest run drawn for unbounded quantifiers.
const MAX_RUN: usize = 8;

/// Distribution of uniform noise strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub alphabet: String,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            alphabet: (' '..='~').collect(),
            min_len: 5,
            max_len: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    pub templates: usize,
    pub batch_size: usize,
    /// Number of negative strings.
    pub negatives: usize,
    /// Fraction of the negatives that are uniform noise.
    pub noise_fraction: f64,
    /// Fraction of the negatives that copy a corpus template's constant
    /// text but fill one slot with a string outside the slot's language.
    /// The remainder come from distractor templates outside the corpus.
    pub near_miss_fraction: f64,
    pub distractors: usize,
    /// Largest number of slots per template.
    pub max_slots: usize,
    pub noise: NoiseParams,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            seed: 0,
            templates: 30,
            batch_size: 12,
            negatives: 500,
            noise_fraction: 0.4,
            near_miss_fraction: 0.3,
            distractors: 10,
            max_slots: 3,
            noise: NoiseParams::default(),
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.templates == 0 || self.batch_size == 0 {
            return bad("templates and batch_size must be positive");
        }
        let fractions = [self.noise_fraction, self.near_miss_fraction];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || fractions.iter().sum::<f64>() > 1.0 {
            return bad("negative fractions must lie in [0, 1] and sum to at most 1");
        }
        if self.noise_fraction + self.near_miss_fraction < 1.0 && self.negatives > 0 && self.distractors == 0 {
            return bad("template negatives need at least one distractor");
        }
        if self.max_slots == 0 {
            return bad("max_slots must be positive");
        }
        if self.noise.alphabet.is_empty() || self.noise.min_len > self.noise.max_len {
            return bad("noise needs a non-empty alphabet and min_len <= max_len");
        }
        Ok(())
    }
}

/// A generated corpus with its negatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub corpus: Vec<CorpusRecord>,
    pub templates: Vec<Regex>,
    pub negatives: Vec<String>,
}

fn class_chars(items: &[ClassItem]) -> Vec<char> {
    let mut out = Vec::new();
    for it in items {
        match *it {
            ClassItem::Char(c) => out.push(c),
            ClassItem::Range(lo, hi) => out.extend(lo..=hi),
            ClassItem::Macro(m) => out.extend(m.chars()),
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// A random member of `L(r)`. Unbounded quantifiers repeat at most eight
/// times; shorthands never produce tab or newline.
pub fn sample_string<R: Rng>(rng: &mut R, r: &Regex) -> String {
    let mut s = String::new();
    sample_into(rng, r, &mut s);
    s
}

fn sample_into<R: Rng>(rng: &mut R, r: &Regex, out: &mut String) {
    let repeat = |rng: &mut R, k: usize, c: &Regex, out: &mut String| {
        for _ in 0..k {
            sample_into(rng, c, out);
        }
    };
    match r {
        Regex::Literal(c) => out.push(*c),
        Regex::Class(items) => {
            let cs: Vec<char> = class_chars(items).into_iter().filter(|c| !matches!(c, '\t' | '\n')).collect();
            out.push(*cs.choose(rng).expect("non-empty class"));
        }
        Regex::Macro(m) => {
            let cs: Vec<char> = m.chars().into_iter().filter(|c| !matches!(c, '\t' | '\n')).collect();
            out.push(*cs.choose(rng).expect("non-empty macro"));
        }
        Regex::Concat(cs) => cs.iter().for_each(|c| sample_into(rng, c, out)),
        Regex::Alt(cs) => {
            let c = cs.choose(rng).unwrap();
            sample_into(rng, c, out)
        }
        Regex::Star(c) => {
            let k = rng.gen_range(0..=MAX_RUN);
            repeat(rng, k, c, out)
        }
        Regex::Plus(c) => {
            let k = rng.gen_range(1..=MAX_RUN);
            repeat(rng, k, c, out)
        }
        Regex::Optional(c) => {
            let k = rng.gen_range(0..=1);
            repeat(rng, k, c, out)
        }
        Regex::Repeat(c, k) => repeat(rng, *k as usize, c, out),
        Regex::RepeatRange(c, lo, hi) => {
            let k = rng.gen_range(*lo..=*hi) as usize;
            repeat(rng, k, c, out)
        }
        Regex::Epsilon => {}
    }
}

/// A string with the constant text of `t` in which one slot is filled with
/// spaceless noise that the slot does not generate. `None` if `t` has no
/// slot or no such filler turned up.
fn near_miss<R: Rng>(rng: &mut R, t: &Regex, noise: &NoiseParams) -> Option<String> {
    let parts = match t {
        Regex::Concat(cs) => cs.as_slice(),
        other => std::slice::from_ref(other),
    };
    let slots: Vec<usize> = (0..parts.len()).filter(|&k| !matches!(parts[k], Regex::Literal(_))).collect();
    let &j = slots.choose(rng)?;
    let slot = CompiledRegex::new(&parts[j]);
    let whole = CompiledRegex::new(t);
    let p = NoiseParams {
        alphabet: noise.alphabet.chars().filter(|c| *c != ' ').collect(),
        min_len: 1,
        max_len: 8,
    };
    if p.alphabet.is_empty() {
        return None;
    }
    for _ in 0..50 {
        let fill = noise_strings(rng, 1, &p).pop().unwrap();
        if slot.is_match(&fill) {
            continue;
        }
        let mut s = String::new();
        for (k, part) in parts.iter().enumerate() {
            if k == j {
                s.push_str(&fill);
            } else {
                sample_into(rng, part, &mut s);
            }
        }
        if !whole.is_match(&s) {
            return Some(s);
        }
    }
    None
}

/// Uniform noise strings.
pub fn noise_strings<R: Rng>(rng: &mut R, n: usize, p: &NoiseParams) -> Vec<String> {
    let alphabet: Vec<char> = p.alphabet.chars().collect();
    (0..n)
        .map(|_| {
            let len = rng.gen_range(p.min_len..=p.max_len);
            (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
        })
        .collect()
}

fn words<R: Rng>(rng: &mut R) -> String {
    let k = rng.gen_range(1..=3);
    (0..k).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn random_template<R: Rng>(rng: &mut R, max_slots: usize) -> Regex {
    let slots = rng.gen_range(1..=max_slots);
    let mut parts = Vec::new();
    let lit = |s: &str, parts: &mut Vec<Regex>| parts.extend(s.chars().map(Regex::Literal));
    if rng.gen_bool(0.8) {
        lit(&format!("{} ", words(rng)), &mut parts);
    }
    for j in 0..slots {
        if j > 0 {
            lit(&format!(" {} ", words(rng)), &mut parts);
        }
        parts.push(parse_regex(SLOTS.choose(rng).unwrap()).expect("slot table parses"));
    }
    if rng.gen_bool(0.7) {
        let end = if rng.gen_bool(0.5) { "." } else { "" };
        lit(&format!(" {}{end}", words(rng)), &mut parts);
    }
    Regex::concat(parts)
}

fn sample_batch<R: Rng>(rng: &mut R, t: &Regex, n: usize) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n * 20 {
        if out.len() == n {
            break;
        }
        let s = sample_string(rng, t);
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    while out.len() < n {
        out.push(sample_string(rng, t));
    }
    out
}

/// Generates a labelled corpus and negatives, deterministically in the seed.
pub fn generate_synthetic(p: &SynthParams) -> Result<Synthetic> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut seen = HashSet::new();
    let mut fresh = |rng: &mut ChaCha8Rng| loop {
        let t = random_template(rng, p.max_slots);
        if seen.insert(t.to_string()) {
            return t;
        }
    };
    let templates: Vec<Regex> = (0..p.templates).map(|_| fresh(&mut rng)).collect();
    let distractors: Vec<Regex> = (0..p.distractors).map(|_| fresh(&mut rng)).collect();
    let corpus = templates
        .iter()
        .map(|t| CorpusRecord::labelled(sample_batch(&mut rng, t, p.batch_size), t))
        .collect();
    let compiled: Vec<CompiledRegex> = templates.iter().map(CompiledRegex::new).collect();
    let outside = |x: &str| compiled.iter().all(|m| !m.is_match(x));
    let n_noise = (p.negatives as f64 * p.noise_fraction).round() as usize;
    let n_near = ((p.negatives as f64 * p.near_miss_fraction).round() as usize).min(p.negatives - n_noise);
    let mut negatives = Vec::with_capacity(p.negatives);
    let noise = |rng: &mut ChaCha8Rng| -> Result<String> {
        (0..1000)
            .map(|_| noise_strings(rng, 1, &p.noise).pop().unwrap())
            .find(|s| outside(s))
            .ok_or_else(|| Error::InvalidParams("corpus templates accept nearly all noise".to_string()))
    };
    for _ in 0..n_noise {
        negatives.push(noise(&mut rng)?);
    }
    for k in 0..n_near {
        if let Some(s) = near_miss(&mut rng, &templates[k % templates.len()], &p.noise).filter(|s| outside(s)) {
            negatives.push(s);
        }
    }
    while negatives.len() < p.negatives {
        let k = negatives.len();
        // a distractor may overlap a corpus template; fall back to noise
        let s = match distractors.is_empty() {
            true => None,
            false => (0..50)
                .map(|_| sample_string(&mut rng, &distractors[k % distractors.len()]))
                .find(|s| outside(s)),
        };
        let s = match s {
            Some(s) => s,
            None => noise(&mut rng)?,
        };
        negatives.push(s);
    }
    negatives.shuffle(&mut rng);
    Ok(Synthetic {
        corpus,
        templates,
        negatives,
    })
}
