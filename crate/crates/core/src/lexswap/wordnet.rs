//! Reader for the adjective half of the WordNet 3.0 plain-text database
//! (`index.adj` and `data.adj`), keeping only what antonym lookup needs.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WordNetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file} byte {offset}: malformed line: {reason}")]
    Malformed {
        file: &'static str,
        offset: usize,
        reason: String,
    },
    #[error("{file} byte {offset}: dangling synset offset {target}")]
    Dangling {
        file: &'static str,
        offset: usize,
        target: u64,
    },
}

#[derive(Debug, Clone)]
struct Synset {
    /// Lowercased lemmas with syntactic markers like `(a)` removed.
    words: Vec<String>,
    antonyms: Vec<AntonymPointer>,
    line_offset: usize,
}

#[derive(Debug, Clone, Copy)]
struct AntonymPointer {
    target: u64,
    /// 1-based word numbers; 0 means the whole synset.
    source_word: usize,
    target_word: usize,
}

/// Adjective lemma to per-sense antonym lists, senses in index order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdjectiveLexicon {
    entries: HashMap<String, Vec<Vec<String>>>,
}

impl AdjectiveLexicon {
    pub fn from_dir(dir: &Path) -> Result<Self, WordNetError> {
        parse_wordnet_adjectives(&dir.join("index.adj"), &dir.join("data.adj"))
    }

    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<Vec<S>>)>,
        S: Into<String>,
    {
        let entries = entries
            .into_iter()
            .map(|(lemma, senses)| {
                let senses = senses
                    .into_iter()
                    .map(|ants| ants.into_iter().map(|a| a.into().to_lowercase()).collect())
                    .collect();
                (lemma.into().to_lowercase(), senses)
            })
            .collect();
        Self { entries }
    }

    /// Parses the contents of `index.adj` and `data.adj`.
    pub fn parse(index_src: &str, data_src: &str) -> Result<Self, WordNetError> {
        let synsets = parse_data(data_src)?;
        let mut entries = HashMap::new();
        for (offset, line) in lines_with_offsets(index_src) {
            if line.starts_with("  ") || line.trim().is_empty() {
                continue;
            }
            let (lemma, sense_offsets) = parse_index_line(line, offset)?;
            let mut senses = Vec::with_capacity(sense_offsets.len());
            for target in sense_offsets {
                let synset = synsets.get(&target).ok_or(WordNetError::Dangling {
                    file: "index.adj",
                    offset,
                    target,
                })?;
                senses.push(sense_antonyms(&lemma, synset, &synsets)?);
            }
            entries.insert(lemma, senses);
        }
        Ok(Self { entries })
    }

    pub fn senses(&self, lemma: &str) -> Option<&[Vec<String>]> {
        self.entries.get(lemma).map(Vec::as_slice)
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.entries.contains_key(lemma)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_antonym(&self, lemma: &str, candidate: &str) -> bool {
        self.senses(lemma)
            .is_some_and(|senses| senses.iter().flatten().any(|a| a == candidate))
    }

    /// First antonym of the first sense that has a single-word antonym.
    pub fn replacement(&self, lemma: &str) -> Option<&str> {
        self.senses(lemma)?
            .iter()
            .find_map(|ants| ants.iter().find(|a| super::is_single_word(a)))
            .map(String::as_str)
    }
}

pub fn parse_wordnet_adjectives(index_path: &Path, data_path: &Path) -> Result<AdjectiveLexicon, WordNetError> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|source| WordNetError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    AdjectiveLexicon::parse(&read(index_path)?, &read(data_path)?)
}

fn lines_with_offsets(src: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    src.split_inclusive('\n').map(move |raw| {
        let start = offset;
        offset += raw.len();
        (start, raw.trim_end_matches(['\n', '\r']))
    })
}

fn clean_lemma(raw: &str) -> String {
    let base = match raw.find('(') {
        Some(i) if raw.ends_with(')') => &raw[..i],
        _ => raw,
    };
    base.to_lowercase()
}

fn parse_index_line(line: &str, offset: usize) -> Result<(String, Vec<u64>), WordNetError> {
    let bad = |reason: &str| WordNetError::Malformed {
        file: "index.adj",
        offset,
        reason: reason.to_string(),
    };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 6 {
        return Err(bad("too few fields"));
    }
    let lemma = fields[0].to_lowercase();
    let synset_cnt: usize = fields[2].parse().map_err(|_| bad("bad synset_cnt"))?;
    let p_cnt: usize = fields[3].parse().map_err(|_| bad("bad p_cnt"))?;
    // lemma pos synset_cnt p_cnt [ptr...] sense_cnt tagsense_cnt offsets...
    let offsets_start = 4 + p_cnt + 2;
    let offsets = fields
        .get(offsets_start..offsets_start + synset_cnt)
        .ok_or_else(|| bad("truncated synset offsets"))?;
    let offsets = offsets
        .iter()
        .map(|s| s.parse::<u64>().map_err(|_| bad("bad synset offset")))
        .collect::<Result<_, _>>()?;
    Ok((lemma, offsets))
}

fn parse_data(src: &str) -> Result<HashMap<u64, Synset>, WordNetError> {
    let mut synsets = HashMap::new();
    for (offset, line) in lines_with_offsets(src) {
        if line.starts_with("  ") || line.trim().is_empty() {
            continue;
        }
        let (key, synset) = parse_data_line(line, offset)?;
        synsets.insert(key, synset);
    }
    Ok(synsets)
}

fn parse_data_line(line: &str, offset: usize) -> Result<(u64, Synset), WordNetError> {
    let bad = |reason: &str| WordNetError::Malformed {
        file: "data.adj",
        offset,
        reason: reason.to_string(),
    };
    let body = line.split(" | ").next().unwrap_or(line);
    let fields: Vec<&str> = body.split_whitespace().collect();
    let get = |i: usize| fields.get(i).copied().ok_or_else(|| bad("truncated record"));

    let synset_offset: u64 = get(0)?.parse().map_err(|_| bad("bad synset offset"))?;
    let w_cnt = usize::from_str_radix(get(3)?, 16).map_err(|_| bad("bad w_cnt"))?;
    let mut cursor = 4;
    let mut words = Vec::with_capacity(w_cnt);
    for _ in 0..w_cnt {
        words.push(clean_lemma(get(cursor)?));
        cursor += 2;
    }
    let p_cnt: usize = get(cursor)?.parse().map_err(|_| bad("bad p_cnt"))?;
    cursor += 1;
    let mut antonyms = Vec::new();
    for _ in 0..p_cnt {
        let symbol = get(cursor)?;
        let target: u64 = get(cursor + 1)?.parse().map_err(|_| bad("bad pointer offset"))?;
        let pos = get(cursor + 2)?;
        let src_tgt = get(cursor + 3)?;
        cursor += 4;
        if symbol != "!" || !matches!(pos, "a" | "s") {
            continue;
        }
        if src_tgt.len() != 4 {
            return Err(bad("bad source/target field"));
        }
        let source_word = usize::from_str_radix(&src_tgt[..2], 16).map_err(|_| bad("bad source word"))?;
        let target_word = usize::from_str_radix(&src_tgt[2..], 16).map_err(|_| bad("bad target word"))?;
        antonyms.push(AntonymPointer {
            target,
            source_word,
            target_word,
        });
    }
    Ok((
        synset_offset,
        Synset {
            words,
            antonyms,
            line_offset: offset,
        },
    ))
}

fn sense_antonyms(lemma: &str, synset: &Synset, synsets: &HashMap<u64, Synset>) -> Result<Vec<String>, WordNetError> {
    let positions: Vec<usize> = synset
        .words
        .iter()
        .enumerate()
        .filter(|(_, w)| *w == lemma)
        .map(|(i, _)| i + 1)
        .collect();
    let mut out: Vec<String> = Vec::new();
    for ptr in &synset.antonyms {
        if ptr.source_word != 0 && !positions.contains(&ptr.source_word) {
            continue;
        }
        let target = synsets.get(&ptr.target).ok_or(WordNetError::Dangling {
            file: "data.adj",
            offset: synset.line_offset,
            target: ptr.target,
        })?;
        let picked: Vec<&String> = if ptr.target_word == 0 {
            target.words.iter().collect()
        } else {
            let word = target.words.get(ptr.target_word - 1).ok_or_else(|| WordNetError::Malformed {
                file: "data.adj",
                offset: synset.line_offset,
                reason: format!("antonym pointer names word {} of a {}-word synset", ptr.target_word, target.words.len()),
            })?;
            vec![word]
        };
        for word in picked {
            if !out.contains(word) {
                out.push(word.clone());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Offsets are the synset keys; they need not match byte positions.
    const DATA: &str = "  1 license header line\n\
00000010 00 a 02 good 0 full(a) 0 001 ! 00000020 a 0101 | having desirable qualities\n\
00000020 00 a 01 bad 0 001 ! 00000010 a 0101 | having undesirable qualities\n\
00000030 00 a 01 good 1 001 ! 00000040 a 0000 | morally admirable\n\
00000040 00 a 02 evil 0 ill 0 000 | morally wrong\n\
00000050 00 s 01 fine 0 000 | satellite, no antonyms\n";

    const INDEX: &str = "  1 license header line\n\
bad a 1 1 ! 1 0 00000020  \n\
fine a 1 0 1 0 00000050  \n\
full a 1 1 ! 1 0 00000010  \n\
good a 2 1 ! 2 1 00000010 00000030  \n";

    #[test]
    fn resolves_lexical_and_semantic_antonyms() {
        let lex = AdjectiveLexicon::parse(INDEX, DATA).unwrap();
        assert_eq!(lex.len(), 4);
        let good = lex.senses("good").unwrap();
        assert_eq!(good, [vec!["bad".to_string()], vec!["evil".to_string(), "ill".to_string()]]);
        // the pointer on 00000010 is specific to word 1 (good), not full
        assert_eq!(lex.senses("full").unwrap(), [Vec::<String>::new()]);
        assert_eq!(lex.senses("fine").unwrap(), [Vec::<String>::new()]);
        assert_eq!(lex.replacement("good"), Some("bad"));
        assert_eq!(lex.replacement("fine"), None);
        assert!(lex.senses("purple").is_none());
        assert!(lex.is_antonym("good", "evil"));
    }

    #[test]
    fn dangling_offset_is_reported() {
        let index = "good a 1 1 ! 1 0 00000099  \n";
        let err = AdjectiveLexicon::parse(index, DATA).unwrap_err();
        assert!(matches!(err, WordNetError::Dangling { target: 99, offset: 0, .. }));

        let data = "00000010 00 a 01 good 0 001 ! 00000077 a 0101 | x\n";
        let index = "good a 1 1 ! 1 0 00000010  \n";
        assert!(matches!(
            AdjectiveLexicon::parse(index, data),
            Err(WordNetError::Dangling { target: 77, .. })
        ));
    }

    #[test]
    fn malformed_lines_report_byte_offset() {
        let index = "bad a 1 1 ! 1 0 00000020  \ngood a 2\n";
        match AdjectiveLexicon::parse(index, DATA).unwrap_err() {
            WordNetError::Malformed { file, offset, .. } => {
                assert_eq!(file, "index.adj");
                assert_eq!(offset, 27);
            }
            other => panic!("unexpected {other:?}"),
        }
        let data = "00000010 00 a zz good 0 000 | x\n";
        assert!(matches!(
            AdjectiveLexicon::parse("", data),
            Err(WordNetError::Malformed { file: "data.adj", offset: 0, .. })
        ));
    }

    #[test]
    fn markers_are_stripped() {
        assert_eq!(clean_lemma("galore(ip)"), "galore");
        assert_eq!(clean_lemma("American"), "american");
    }
}
