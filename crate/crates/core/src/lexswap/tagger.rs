use super::{AdjectiveLexicon, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Adjective,
    Other,
}

/// Assigns one tag per token. Any tagger honoring this contract can stand
/// in for the lexicon-based default.
pub trait Tagger: Send + Sync {
    fn tag(&self, tokens: &[Token]) -> Vec<PosTag>;
}

/// Function words that are never tagged as adjectives.
pub const NEVER_ADJECTIVE: &[&str] = &["a", "the", "this", "that", "is", "are"];

/// Tags a word token as an adjective when WordNet lists it as one.
///
/// Context is ignored, so nominal uses ("the good") are tagged too.
#[derive(Debug, Clone, Copy)]
pub struct LexiconTagger<'a> {
    lexicon: &'a AdjectiveLexicon,
}

impl<'a> LexiconTagger<'a> {
    pub fn new(lexicon: &'a AdjectiveLexicon) -> Self {
        Self { lexicon }
    }
}

impl Tagger for LexiconTagger<'_> {
    fn tag(&self, tokens: &[Token]) -> Vec<PosTag> {
        tokens
            .iter()
            .map(|tok| {
                if tok.is_word && !NEVER_ADJECTIVE.contains(&tok.norm.as_str()) && self.lexicon.contains(&tok.norm) {
                    PosTag::Adjective
                } else {
                    PosTag::Other
                }
            })
            .collect()
    }
}
