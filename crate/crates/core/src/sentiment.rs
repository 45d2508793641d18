//! Lexicon-driven polarity scoring for tip text.
//!
//! Every token found in the lexicon moves a per-tip polarity counter by +1 or
//! -1; the tip is labelled by the sign of the final count.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{data_lines, read_text, LoadError};

const BUNDLED_LEXICON: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn value(self) -> i64 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }
}

/// Tip classification. Ordered `Negative < Neutral < Positive` for output sorting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
        SentimentLabel::Positive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::Positive => "positive",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SentimentLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown sentiment label `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TipScore {
    pub polarity_sum: i64,
    pub label: SentimentLabel,
    /// Tokens produced by [`tokenize`].
    pub scored_words: usize,
    /// Tokens found in the lexicon.
    pub matched_words: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: HashMap<String, Polarity>,
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon, LoadError> {
    Lexicon::parse(&read_text(path)?)
}

impl Lexicon {
    /// General-purpose English word list shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEXICON).expect("bundled lexicon is valid")
    }

    /// Parses `word<TAB>positive|negative` lines; words are lowercased.
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let mut lexicon = Lexicon::default();
        for (line, content) in data_lines(text) {
            let cols: Vec<&str> = content.split('\t').collect();
            if cols.len() != 2 {
                return Err(LoadError::ColumnCount {
                    line,
                    expected: 2,
                    found: cols.len(),
                });
            }
            let word = cols[0].trim().to_lowercase();
            if word.is_empty() {
                return Err(LoadError::EmptyField { line, column: 1 });
            }
            // a word the tokenizer would split can never be looked up
            if !word.chars().all(char::is_alphanumeric) {
                return Err(LoadError::InvalidWord { line, word });
            }
            let polarity = match cols[1].trim() {
                "positive" => Polarity::Positive,
                "negative" => Polarity::Negative,
                token => {
                    return Err(LoadError::UnknownPolarity {
                        line,
                        token: token.to_string(),
                    })
                }
            };
            lexicon.insert(line, word, polarity)?;
        }
        Ok(lexicon)
    }

    fn insert(&mut self, line: usize, word: String, polarity: Polarity) -> Result<(), LoadError> {
        match self.entries.get(&word) {
            Some(&existing) if existing != polarity => Err(LoadError::Conflict { line, word }),
            Some(_) => Ok(()),
            None => {
                self.entries.insert(word, polarity);
                Ok(())
            }
        }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Polarity)>) -> Result<Self, LoadError> {
        let mut lexicon = Lexicon::default();
        for (i, (word, polarity)) in pairs.into_iter().enumerate() {
            lexicon.insert(i + 1, word.to_lowercase(), polarity)?;
        }
        Ok(lexicon)
    }

    /// Polarity of a lowercase token; `None` is the implicit neutral 0.
    pub fn polarity(&self, word: &str) -> Option<Polarity> {
        self.entries.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, Polarity)> {
        self.entries.iter().map(|(w, p)| (w.as_str(), *p))
    }
}

fn tokens(text: &str) -> impl Iterator<Item = Cow<'_, str>> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| {
            if t.chars().any(char::is_uppercase) {
                Cow::Owned(t.to_lowercase())
            } else {
                Cow::Borrowed(t)
            }
        })
}

/// Splits on every non-alphanumeric character and lowercases each piece.
/// Empty pieces are dropped; order is preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    tokens(text).map(Cow::into_owned).collect()
}

/// Sign threshold: > 0 positive, < 0 negative, 0 neutral.
pub fn classify(polarity_sum: i64) -> SentimentLabel {
    match polarity_sum.signum() {
        1 => SentimentLabel::Positive,
        -1 => SentimentLabel::Negative,
        _ => SentimentLabel::Neutral,
    }
}

pub fn score_tip(lexicon: &Lexicon, text: &str) -> TipScore {
    let mut polarity_sum = 0i64;
    let mut scored_words = 0;
    let mut matched_words = 0;
    for token in tokens(text) {
        scored_words += 1;
        if let Some(p) = lexicon.polarity(&token) {
            matched_words += 1;
            polarity_sum += p.value();
        }
    }
    TipScore {
        polarity_sum,
        label: classify(polarity_sum),
        scored_words,
        matched_words,
    }
}
