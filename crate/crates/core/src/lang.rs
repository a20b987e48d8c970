//! Language tags and script classes.

use std::fmt;
use std::str::FromStr;

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// How a writing system delimits words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScriptClass {
    WhitespaceDelimited,
    CharacterDelimited,
}

static LANG_TAG_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[a-z]{2,3}(-[a-z0-9]+)*$").expect("valid regex"));

/// Primary subtags whose scripts do not separate words with spaces.
const CHARACTER_DELIMITED: &[&str] = &["ja", "zh", "th", "lo", "km", "my", "bo"];

/// A lowercase BCP-47-style language tag such as `en`, `fr` or `ja`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LanguageTag {
    code: String,
    script_class: ScriptClass,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid language tag {0:?}: expected lowercase [a-z]{{2,3}}(-[a-z0-9]+)*")]
pub struct InvalidLanguageTag(pub String);

impl LanguageTag {
    pub fn new(code: &str) -> Result<Self, InvalidLanguageTag> {
        if !LANG_TAG_RE.is_match(code) {
            return Err(InvalidLanguageTag(code.to_string()));
        }
        let primary = code.split('-').next().unwrap_or(code);
        let script_class = if CHARACTER_DELIMITED.contains(&primary) {
            ScriptClass::CharacterDelimited
        } else {
            ScriptClass::WhitespaceDelimited
        };
        Ok(Self { code: code.to_string(), script_class })
    }

    /// Same as [`LanguageTag::new`] but with an explicit script class.
    pub fn with_script_class(code: &str, script_class: ScriptClass) -> Result<Self, InvalidLanguageTag> {
        let mut tag = Self::new(code)?;
        tag.script_class = script_class;
        Ok(tag)
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    /// Primary subtag, e.g. `pt` for `pt-br`.
    pub fn primary(&self) -> &str {
        self.code.split('-').next().unwrap_or(&self.code)
    }

    pub fn script_class(&self) -> ScriptClass {
        self.script_class
    }

    pub fn en() -> Self {
        Self::new("en").expect("static tag")
    }

    pub fn fr() -> Self {
        Self::new("fr").expect("static tag")
    }

    pub fn ja() -> Self {
        Self::new("ja").expect("static tag")
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

impl FromStr for LanguageTag {
    type Err = InvalidLanguageTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl Serialize for LanguageTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.code)
    }
}

impl<'de> Deserialize<'de> for LanguageTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let code = String::deserialize(deserializer)?;
        LanguageTag::new(&code).map_err(serde::de::Error::custom)
    }
}

/// True for characters from scripts that are written without word spacing.
pub fn is_character_delimited_char(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF   // hiragana, katakana
        | 0x31F0..=0x31FF
        | 0x3400..=0x4DBF // CJK ext A
        | 0x4E00..=0x9FFF // CJK unified
        | 0xF900..=0xFAFF
        | 0xFF66..=0xFF9F // halfwidth katakana
        | 0x0E00..=0x0EFF // thai, lao
        | 0x1780..=0x17FF // khmer
        | 0x1000..=0x109F // myanmar
        | 0x20000..=0x2FA1F)
}

/// Guesses the script class of free text: character-delimited when such
/// characters make up at least a third of the letters.
pub fn detect_script_class(text: &str) -> ScriptClass {
    let mut letters = 0usize;
    let mut cjk = 0usize;
    for c in text.chars().filter(|c| c.is_alphanumeric()) {
        letters += 1;
        if is_character_delimited_char(c) {
            cjk += 1;
        }
    }
    if letters > 0 && cjk * 3 >= letters {
        ScriptClass::CharacterDelimited
    } else {
        ScriptClass::WhitespaceDelimited
    }
}
