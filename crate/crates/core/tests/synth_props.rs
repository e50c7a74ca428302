use rex_core::corpus::{generate_synthetic, parse_corpus, format_corpus, SynthParams};
use rex_core::matcher::CompiledRegex;
use std::path::Path;

fn params(seed: u64) -> SynthParams {
    SynthParams {
        seed,
        templates: 12,
        batch_size: 6,
        negatives: 200,
        ..SynthParams::default()
    }
}

#[test]
fn negatives_belong_to_no_template() {
    for seed in 0..5 {
        let s = generate_synthetic(&params(seed)).unwrap();
        assert_eq!(s.negatives.len(), 200);
        let compiled: Vec<CompiledRegex> = s.templates.iter().map(CompiledRegex::new).collect();
        for x in &s.negatives {
            assert!(compiled.iter().all(|m| !m.is_match(x)), "seed {seed}: {x:?} matches a template");
        }
    }
}

#[test]
fn batches_are_members_of_their_label() {
    let s = generate_synthetic(&params(7)).unwrap();
    assert_eq!(s.corpus.len(), 12);
    for (r, t) in s.corpus.iter().zip(&s.templates) {
        assert_eq!(r.regex.as_deref(), Some(t.to_string().as_str()));
        let m = CompiledRegex::new(t);
        assert!(r.strings.iter().all(|x| m.is_match(x)));
        assert_eq!(r.validate().unwrap().as_ref(), Some(t));
    }
}

#[test]
fn corpus_text_round_trips() {
    let s = generate_synthetic(&params(3)).unwrap();
    let text = format_corpus(&s.corpus);
    let back = parse_corpus(&text, Path::new("mem.jsonl")).unwrap();
    assert_eq!(back, s.corpus);
}

#[test]
fn near_misses_share_constant_text() {
    // with only near misses, every negative keeps some template's words
    let p = SynthParams {
        noise_fraction: 0.0,
        near_miss_fraction: 1.0,
        ..params(11)
    };
    let s = generate_synthetic(&p).unwrap();
    let words: Vec<String> = s
        .corpus
        .iter()
        .flat_map(|r| r.strings[0].split(' ').filter(|w| w.len() > 2).map(str::to_string).collect::<Vec<_>>())
        .collect();
    let sharing = s.negatives.iter().filter(|x| words.iter().any(|w| x.contains(w.as_str()))).count();
    assert!(sharing * 10 >= s.negatives.len() * 9, "{sharing} of {}", s.negatives.len());
}
