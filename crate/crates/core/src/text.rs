//! Character-offset helpers. Every offset in this crate counts Unicode
//! scalar values, never bytes.

/// Number of Unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Slices `s` by scalar-value offsets `[start, end)`.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut begin_byte = None;
    for (i, (b, _)) in s.char_indices().enumerate() {
        if i == start {
            begin_byte = Some(b);
        }
        if i == end {
            return begin_byte.map(|bb| &s[bb..b]);
        }
    }
    let n = char_len(s);
    if end == n {
        let bb = if start == n { s.len() } else { begin_byte? };
        return Some(&s[bb..]);
    }
    None
}

/// Precomputed byte positions for repeated slicing of the same text.
#[derive(Debug, Clone)]
pub struct CharIndex<'a> {
    text: &'a str,
    bytes: Vec<usize>,
}

impl<'a> CharIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        Self { text, bytes }
    }

    pub fn len(&self) -> usize {
        self.bytes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice(&self, start: usize, end: usize) -> Option<&'a str> {
        if start > end || end > self.len() {
            return None;
        }
        Some(&self.text[self.bytes[start]..self.bytes[end]])
    }

    /// Scalar-value offset of a byte position that lies on a char boundary.
    pub fn char_offset_of_byte(&self, byte: usize) -> Option<usize> {
        self.bytes.binary_search(&byte).ok()
    }
}
