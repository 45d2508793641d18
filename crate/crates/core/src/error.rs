use std::io;
use std::path::PathBuf;

/// Failure loading a tab-separated lookup file (region mapper or lexicon).
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: expected {expected} tab-separated columns, found {found}")]
    ColumnCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: column {column} is empty")]
    EmptyField { line: usize, column: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: unknown polarity `{token}` (expected `positive` or `negative`)")]
    UnknownPolarity { line: usize, token: String },
    #[error("line {line}: `{word}` listed as both positive and negative")]
    Conflict { line: usize, word: String },
    #[error("line {line}: `{word}` can never match a token")]
    InvalidWord { line: usize, word: String },
}

/// Non-comment, non-blank lines of a tab-separated file, 1-based line numbers.
/// Accepts LF or CRLF endings.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

pub(crate) fn read_text(path: &std::path::Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}
