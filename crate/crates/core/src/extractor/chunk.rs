//! Token windows over long contexts with offsets back into the original.

use crate::lang::{detect_script_class, LanguageTag, ScriptClass};

use super::ExtractError;

/// A token as a `[start, end)` range of scalar-value offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tokenizer {
    /// Maximal runs of non-whitespace characters.
    Whitespace,
    /// Every non-whitespace character.
    Character,
}

impl Tokenizer {
    pub fn for_script(class: ScriptClass) -> Self {
        match class {
            ScriptClass::WhitespaceDelimited => Tokenizer::Whitespace,
            ScriptClass::CharacterDelimited => Tokenizer::Character,
        }
    }

    /// Uses the hint's script class when given, otherwise guesses from text.
    pub fn for_text(text: &str, hint: Option<&LanguageTag>) -> Self {
        Self::for_script(hint.map_or_else(|| detect_script_class(text), LanguageTag::script_class))
    }

    pub fn tokenize(self, text: &str) -> Vec<Token> {
        let mut tokens = Vec::new();
        match self {
            Tokenizer::Character => {
                for (i, c) in text.chars().enumerate() {
                    if !c.is_whitespace() {
                        tokens.push(Token { start: i, end: i + 1 });
                    }
                }
            }
            Tokenizer::Whitespace => {
                let mut start = None;
                let mut n = 0;
                for (i, c) in text.chars().enumerate() {
                    match (c.is_whitespace(), start) {
                        (true, Some(s)) => {
                            tokens.push(Token { start: s, end: i });
                            start = None;
                        }
                        (false, None) => start = Some(i),
                        _ => {}
                    }
                    n = i + 1;
                }
                if let Some(s) = start {
                    tokens.push(Token { start: s, end: n });
                }
            }
        }
        tokens
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub text: String,
    /// Scalar-value offset of `text` in the original context.
    pub base_offset: usize,
    /// Token range `[first_token, end_token)` of the original tokenization.
    pub first_token: usize,
    pub end_token: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkMap {
    pub chunks: Vec<Chunk>,
    pub window: usize,
    pub stride: usize,
}

/// Splits `context` into windows of `window` tokens starting every `stride`
/// tokens, stopping at the first window that reaches the last token.
///
/// The first chunk starts at offset 0 and the last one runs to the end of the
/// context, so leading and trailing whitespace is covered too.
pub fn chunk_context(
    context: &str,
    window: usize,
    stride: usize,
    tokenizer: Tokenizer,
) -> Result<ChunkMap, ExtractError> {
    if stride == 0 || window <= stride {
        return Err(ExtractError::DegenerateWindow { window, stride });
    }
    let chars: Vec<char> = context.chars().collect();
    let tokens = tokenizer.tokenize(context);
    let n = tokens.len();
    if n <= window {
        return Ok(ChunkMap {
            chunks: vec![Chunk { text: context.to_string(), base_offset: 0, first_token: 0, end_token: n }],
            window,
            stride,
        });
    }
    let mut chunks = Vec::new();
    let mut first = 0;
    loop {
        let end = (first + window).min(n);
        let last = end == n;
        let start_char = if first == 0 { 0 } else { tokens[first].start };
        let end_char = if last { chars.len() } else { tokens[end - 1].end };
        chunks.push(Chunk {
            text: chars[start_char..end_char].iter().collect(),
            base_offset: start_char,
            first_token: first,
            end_token: end,
        });
        if last {
            break;
        }
        first += stride;
    }
    Ok(ChunkMap { chunks, window, stride })
}
