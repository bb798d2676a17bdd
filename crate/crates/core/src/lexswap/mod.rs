//! Adjective Swap: replace adjectives with WordNet antonyms while leaving
//! labels alone.

mod tagger;
mod tokenize;
mod wordnet;

pub use tagger::{LexiconTagger, PosTag, Tagger, NEVER_ADJECTIVE};
pub use tokenize::{is_single_word, tokenize, word_count, Token};
pub use wordnet::{parse_wordnet_adjectives, AdjectiveLexicon, WordNetError};

use std::path::PathBuf;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::driftgen::{check_increasing, Annotation, DriftError, DriftKind, DriftMethod, DriftSpec, DriftedStream};

/// Environment variable naming a directory with `index.adj` and `data.adj`.
pub const WORDNET_DIR_ENV: &str = "DRIFTFORGE_WORDNET_DIR";

/// The WordNet 3.0 adjective files shipped with the crate.
pub fn bundled_wordnet_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join("wordnet")
}

/// Result of swapping one text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Swapped {
    pub text: String,
    pub replaced: usize,
}

/// Replaces each tagged adjective that has a single-word antonym, keeping
/// every other byte of `text` as is.
///
/// The antonym comes from the first sense with a single-word antonym. An
/// uppercase first letter carries over to the replacement.
pub fn adjective_swap(text: &str, lexicon: &AdjectiveLexicon, tagger: &dyn Tagger) -> Swapped {
    let tokens = tokenize(text);
    let tags = tagger.tag(&tokens);
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    let mut replaced = 0;
    for (tok, tag) in tokens.iter().zip(tags) {
        if tag != PosTag::Adjective || !tok.is_word {
            continue;
        }
        let Some(antonym) = lexicon.replacement(&tok.norm) else {
            continue;
        };
        out.push_str(&text[cursor..tok.span.start]);
        out.push_str(&match_case(&tok.surface, antonym));
        cursor = tok.span.end;
        replaced += 1;
    }
    out.push_str(&text[cursor..]);
    Swapped { text: out, replaced }
}

fn match_case(original: &str, replacement: &str) -> String {
    let upper_first = original.chars().next().is_some_and(char::is_uppercase);
    let mut chars = replacement.chars();
    match chars.next() {
        Some(first) if upper_first => first.to_uppercase().chain(chars).collect(),
        _ => replacement.to_string(),
    }
}

/// Applies [`adjective_swap`] to the instances in every region that follows
/// an odd number of drift points. With three points the regions go
/// original, swapped, original, swapped.
pub fn adjective_swap_stream(
    stream: &Corpus,
    points: &[usize],
    lexicon: &AdjectiveLexicon,
    tagger: &dyn Tagger,
) -> Result<DriftedStream, DriftError> {
    check_increasing(points)?;
    let len = stream.len();
    let instances = stream
        .instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let crossed = points.partition_point(|&p| p <= i);
            let mut inst = inst.clone();
            if crossed % 2 == 1 {
                inst.text = adjective_swap(&inst.text, lexicon, tagger).text;
            }
            inst
        })
        .collect();
    let annotations = points
        .iter()
        .filter(|&&p| p <= len)
        .map(|&p| Annotation::new(p, DriftKind::AdjSwap))
        .collect();
    let spec = DriftSpec::new(DriftMethod::AdjectiveSwap, points.to_vec());
    Ok(DriftedStream::derived(stream, instances, annotations, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TextInstance;
    use chrono::{TimeZone, Utc};

    fn lexicon() -> AdjectiveLexicon {
        AdjectiveLexicon::from_entries([
            ("good", vec![vec!["ill_will"], vec!["bad", "evil"]]),
            ("friendly", vec![vec!["unfriendly", "hostile"]]),
            ("cheap", vec![vec!["well-made"]]),
            ("fast", vec![]),
        ])
    }

    fn swap(text: &str) -> Swapped {
        let lex = lexicon();
        adjective_swap(text, &lex, &LexiconTagger::new(&lex))
    }

    #[test]
    fn swaps_and_keeps_case() {
        let out = swap("Good prices and friendly service, this is the epitome of a neighborhood hotspot.");
        assert_eq!(out.text, "Bad prices and unfriendly service, this is the epitome of a neighborhood hotspot.");
        assert_eq!(out.replaced, 2);
    }

    #[test]
    fn skips_multiword_and_missing_antonyms() {
        let out = swap("cheap and fast");
        assert_eq!(out.text, "cheap and fast");
        assert_eq!(out.replaced, 0);
    }

    #[test]
    fn no_adjectives_is_identity() {
        let out = swap("12345 !!!");
        assert_eq!(out, Swapped { text: "12345 !!!".into(), replaced: 0 });
        assert_eq!(swap("").text, "");
    }

    #[test]
    fn spacing_and_punctuation_survive() {
        let out = swap("  GOOD!!\tgood\n(friendly)");
        assert_eq!(out.text, "  Bad!!\tbad\n(unfriendly)");
    }

    fn stream(n: usize) -> Corpus {
        let instances = (0..n)
            .map(|i| TextInstance {
                id: i.to_string(),
                timestamp: Utc.timestamp_opt(i as i64 * 10, 0).unwrap(),
                text: "good food".into(),
                label: i % 3,
            })
            .collect();
        Corpus::new("s", 3, instances)
    }

    #[test]
    fn one_point_swaps_the_tail() {
        let lex = lexicon();
        let s = stream(6);
        let out = adjective_swap_stream(&s, &[4], &lex, &LexiconTagger::new(&lex)).unwrap();
        let texts: Vec<_> = out.instances.iter().map(|i| i.text.as_str()).collect();
        assert_eq!(texts, ["good food", "good food", "good food", "good food", "bad food", "bad food"]);
        assert_eq!(out.labels(), s.labels());
        assert_eq!(out.annotations, [Annotation::new(4, DriftKind::AdjSwap)]);
    }

    #[test]
    fn three_points_alternate() {
        let lex = lexicon();
        let out = adjective_swap_stream(&stream(8), &[2, 4, 6], &lex, &LexiconTagger::new(&lex)).unwrap();
        let swapped: Vec<bool> = out.instances.iter().map(|i| i.text.starts_with("bad")).collect();
        assert_eq!(swapped, [false, false, true, true, false, false, true, true]);
        assert_eq!(out.annotations.len(), 3);
    }

    #[test]
    fn points_past_the_end_change_nothing() {
        let lex = lexicon();
        let s = stream(5);
        let out = adjective_swap_stream(&s, &[10], &lex, &LexiconTagger::new(&lex)).unwrap();
        assert_eq!(out.instances, s.instances);
        assert!(out.annotations.is_empty());
        assert!(adjective_swap_stream(&s, &[3, 3], &lex, &LexiconTagger::new(&lex)).is_err());
    }
}
