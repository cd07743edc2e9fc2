//! Extracting a choice letter from free-form model output.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParsedChoice {
    A,
    B,
    /// Full raw output, kept for review.
    Invalid(String),
}

impl ParsedChoice {
    pub fn label(&self) -> &'static str {
        match self {
            ParsedChoice::A => "A",
            ParsedChoice::B => "B",
            ParsedChoice::Invalid(_) => "invalid",
        }
    }
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// First standalone `A` or `B` (case-sensitive, word-delimited). Tokens
/// that are part of an "Option A:" echo are skipped when a later
/// standalone token exists.
pub fn parse_choice(raw: &str) -> ParsedChoice {
    let chars: Vec<(usize, char)> = raw.char_indices().collect();
    let mut first_echo = None;
    for (k, &(byte, c)) in chars.iter().enumerate() {
        if c != 'A' && c != 'B' {
            continue;
        }
        let before = k.checked_sub(1).map(|j| chars[j].1);
        let after = chars.get(k + 1).map(|x| x.1);
        if before.is_some_and(is_word) || after.is_some_and(is_word) {
            continue;
        }
        let choice = if c == 'A' { ParsedChoice::A } else { ParsedChoice::B };
        let echo = raw[..byte].to_ascii_lowercase().trim_end().ends_with("option")
            && after == Some(':');
        if echo {
            first_echo.get_or_insert(choice);
            continue;
        }
        return choice;
    }
    first_echo.unwrap_or_else(|| ParsedChoice::Invalid(raw.to_string()))
}
