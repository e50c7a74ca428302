//! Corpora of labelled batches, synthetic campaigns and evaluation.
//!
//! A corpus is a JSON Lines file with one batch per line:
//!
//! ```text
//! {"strings":["12c","b4caa"],"regex":"[b0-9]{2}c(aa|b)*"}
//! ```
//!
//! `regex` may be omitted for unlabeled batches. Negative sets are plain
//! text, one string per line.

mod eval;
mod synth;

pub use eval::{
    alignment_baseline, evaluate, select_c, xval, BatchRow, EvalConfig, EvalReport, Method, MethodSummary, Stat,
    XvalReport,
};
pub use synth::{generate_synthetic, noise_strings, sample_string, NoiseParams, SynthParams, Synthetic};

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::learner::{Example, TrainingSet};
use crate::matcher::CompiledRegex;
use crate::regex::{parse_regex, Regex};
use crate::{Error, Result};

/// One batch, optionally labelled with its expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub strings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regex: Option<String>,
}

impl CorpusRecord {
    pub fn labelled(strings: Vec<String>, regex: &Regex) -> CorpusRecord {
        CorpusRecord {
            strings,
            regex: Some(regex.to_string()),
        }
    }

    /// Checks the expression and membership of every string.
    pub fn validate(&self) -> std::result::Result<Option<Regex>, String> {
        let Some(text) = &self.regex else { return Ok(None) };
        let r = parse_regex(text).map_err(|e| format!("bad regex {text:?}: {e}"))?;
        let c = CompiledRegex::new(&r);
        if let Some((i, s)) = self.strings.iter().enumerate().find(|(_, s)| !c.is_match(s)) {
            return Err(format!("string {i} {s:?} does not match {text}"));
        }
        Ok(Some(r))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parses corpus text; `path` is only used in diagnostics.
pub fn parse_corpus(text: &str, path: &Path) -> Result<Vec<CorpusRecord>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Corpus {
            path: path.to_path_buf(),
            line: n + 1,
            msg,
        };
        let rec: CorpusRecord = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        rec.validate().map_err(err)?;
        out.push(rec);
    }
    Ok(out)
}

pub fn load_corpus(path: &Path) -> Result<Vec<CorpusRecord>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_corpus(&text, path)
}

pub fn format_corpus(records: &[CorpusRecord]) -> String {
    let mut s = String::new();
    for r in records {
        writeln!(s, "{}", serde_json::to_string(r).expect("records serialize")).unwrap();
    }
    s
}

pub fn save_corpus(records: &[CorpusRecord], path: &Path) -> Result<()> {
    std::fs::write(path, format_corpus(records)).map_err(io_err(path))
}

pub fn load_negatives(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text.lines().map(str::to_string).collect())
}

pub fn save_negatives(strings: &[String], path: &Path) -> Result<()> {
    let mut s = String::new();
    for x in strings {
        s.push_str(x);
        s.push('\n');
    }
    std::fs::write(path, s).map_err(io_err(path))
}

/// Labelled records as training examples.
pub fn training_set(records: &[CorpusRecord]) -> Result<TrainingSet> {
    let mut examples = Vec::new();
    for r in records {
        let Some(text) = &r.regex else {
            return Err(Error::InsufficientData("corpus has an unlabeled batch".into()));
        };
        examples.push(Example {
            batch: r.strings.clone(),
            regex: parse_regex(text)?,
        });
    }
    TrainingSet::new(examples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_one_record() {
        let text = r#"{"strings":["12c","b4caa"],"regex":"[b0-9]{2}c(aa|b)*"}"#;
        let recs = parse_corpus(text, Path::new("c.jsonl")).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].strings, ["12c", "b4caa"]);
        assert_eq!(format_corpus(&recs), format!("{text}\n"));
    }

    #[test]
    fn empty_corpus() {
        assert!(parse_corpus("", Path::new("c.jsonl")).unwrap().is_empty());
    }

    #[test]
    fn non_member_names_string_and_line() {
        let text = "{\"strings\":[\"ab\"]}\n{\"strings\":[\"12c\",\"b4ca\"],\"regex\":\"[b0-9]{2}c(aa|b)*\"}";
        let err = parse_corpus(text, Path::new("c.jsonl")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("c.jsonl:2"), "{msg}");
        assert!(msg.contains("string 1 \"b4ca\""), "{msg}");
    }

    #[test]
    fn malformed_line() {
        let err = parse_corpus("{\"strings\":", Path::new("c.jsonl")).unwrap_err();
        assert!(matches!(err, Error::Corpus { line: 1, .. }));
    }

    #[test]
    fn unlabeled_records_keep_their_shape() {
        let text = "{\"strings\":[\"a\",\"b\"]}\n";
        let recs = parse_corpus(text, Path::new("u.jsonl")).unwrap();
        assert_eq!(recs[0].regex, None);
        assert_eq!(format_corpus(&recs), text);
        assert!(training_set(&recs).is_err());
    }
}
