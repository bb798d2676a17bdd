use std::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Byte range in the source text.
    pub span: Range<usize>,
    pub norm: String,
    /// False for punctuation and symbols.
    pub is_word: bool,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}'
}

/// Splits text into maximal runs of letters, digits and apostrophes. Every
/// other non-whitespace character becomes its own non-word token, so
/// `co-op` yields `co`, `-`, `op`. Whitespace is never part of a token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;
    let flush = |tokens: &mut Vec<Token>, start: usize, end: usize| {
        let surface = &text[start..end];
        tokens.push(Token {
            surface: surface.to_string(),
            span: start..end,
            norm: surface.to_lowercase(),
            is_word: true,
        });
    };
    for (pos, c) in text.char_indices() {
        if is_word_char(c) {
            word_start.get_or_insert(pos);
            continue;
        }
        if let Some(start) = word_start.take() {
            flush(&mut tokens, start, pos);
        }
        if !c.is_whitespace() {
            let end = pos + c.len_utf8();
            tokens.push(Token {
                surface: text[pos..end].to_string(),
                span: pos..end,
                norm: text[pos..end].to_string(),
                is_word: false,
            });
        }
    }
    if let Some(start) = word_start {
        flush(&mut tokens, start, text.len());
    }
    tokens
}

/// Number of word tokens in `text`.
pub fn word_count(text: &str) -> usize {
    tokenize(text).iter().filter(|t| t.is_word).count()
}

/// True when `s` tokenizes to exactly one word token covering all of it.
pub fn is_single_word(s: &str) -> bool {
    let tokens = tokenize(s);
    tokens.len() == 1 && tokens[0].is_word && tokens[0].span == (0..s.len())
}
