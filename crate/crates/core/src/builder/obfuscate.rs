//! Reserved-keyword replacement for "unnatural" program variants.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sql::RESERVED_WORDS;

/// Replacement tokens used when no mapping is configured. All uppercase, so
/// they can never collide with normalized (lowercase) column names.
const DEFAULT_TOKENS: [(&str, &str); 10] = [
    ("SELECT", "QZV"),
    ("WHERE", "XJQ"),
    ("AND", "VKZ"),
    ("OR", "ZXW"),
    ("IN", "JQX"),
    ("COUNT", "WQZ"),
    ("SUM", "QXJ"),
    ("AVG", "ZJV"),
    ("MAX", "XZQ"),
    ("MIN", "VJX"),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObfuscateError {
    #[error("keyword map sends both {0} and {1} to `{2}`")]
    NotInjective(String, String, String),
    #[error("keyword map has no entry for reserved word {0}")]
    Missing(String),
    #[error("replacement `{0}` is not a single word")]
    BadToken(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KeywordMap(BTreeMap<String, String>);

impl Default for KeywordMap {
    fn default() -> Self {
        KeywordMap(DEFAULT_TOKENS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
    }
}

fn is_word(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_word_char)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl KeywordMap {
    /// An injective map of single-word replacements; need not be total.
    pub fn new(map: BTreeMap<String, String>) -> Result<Self, ObfuscateError> {
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, v) in &map {
            if !is_word(v) {
                return Err(ObfuscateError::BadToken(v.clone()));
            }
            if let Some(prev) = seen.insert(v, k) {
                return Err(ObfuscateError::NotInjective(prev.to_string(), k.clone(), v.clone()));
            }
        }
        Ok(KeywordMap(map))
    }

    /// Like [`KeywordMap::new`], additionally requiring an entry for every
    /// reserved word.
    pub fn total(map: BTreeMap<String, String>) -> Result<Self, ObfuscateError> {
        if let Some(w) = RESERVED_WORDS.iter().find(|w| !map.contains_key(**w)) {
            return Err(ObfuscateError::Missing(w.to_string()));
        }
        Self::new(map)
    }

    pub fn identity() -> Self {
        KeywordMap(RESERVED_WORDS.iter().map(|w| (w.to_string(), w.to_string())).collect())
    }

    pub fn inverse(&self) -> KeywordMap {
        KeywordMap(self.0.iter().map(|(k, v)| (v.clone(), k.clone())).collect())
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.0.get(word).map(String::as_str)
    }

    pub fn replacements(&self) -> HashSet<&str> {
        self.0.values().map(String::as_str).collect()
    }
}

/// Replaces whole words found in `mapping`, leaving single-quoted strings
/// untouched.
pub fn obfuscate_keywords(program: &str, mapping: &KeywordMap) -> String {
    let mut out = String::with_capacity(program.len());
    let mut chars = program.char_indices().peekable();
    let mut in_quote = false;
    while let Some((i, c)) = chars.next() {
        if in_quote {
            out.push(c);
            if c == '\'' {
                if chars.peek().map(|(_, n)| *n) == Some('\'') {
                    out.push(chars.next().unwrap().1);
                } else {
                    in_quote = false;
                }
            }
        } else if c == '\'' {
            in_quote = true;
            out.push(c);
        } else if is_word_char(c) {
            let mut end = i + c.len_utf8();
            while let Some(&(j, n)) = chars.peek() {
                if !is_word_char(n) {
                    break;
                }
                end = j + n.len_utf8();
                chars.next();
            }
            let word = &program[i..end];
            out.push_str(mapping.get(word).unwrap_or(word));
        } else {
            out.push(c);
        }
    }
    out
}

pub fn deobfuscate_keywords(program: &str, mapping: &KeywordMap) -> String {
    obfuscate_keywords(program, &mapping.inverse())
}
