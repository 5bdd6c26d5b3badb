//! Valence word lists.
//!
//! File format: UTF-8 text, one `token<TAB>valence` pair per line, valence an
//! integer in `[-5, 5]`. Lines starting with `#` are comments; a comment of
//! the form `# version: <name>` sets the lexicon version. Tokens must be
//! lowercase and unique.

use std::collections::HashMap;
use std::path::Path;

const BUNDLED: &str = include_str!("../../data/lexicon-en.tsv");

pub const MIN_VALENCE: i8 = -5;
pub const MAX_VALENCE: i8 = 5;

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: expected `token<TAB>valence`")]
    Syntax { line: usize },
    #[error("line {line}: valence {value:?} is not an integer in [-5, 5]")]
    Valence { line: usize, value: String },
    #[error("line {line}: token {token:?} is not lowercase")]
    NotLowercase { line: usize, token: String },
    #[error("line {line}: duplicate token {token:?}")]
    Duplicate { line: usize, token: String },
    #[error("reading lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    version: String,
    valences: HashMap<String, i8>,
}

impl Lexicon {
    /// The English crisis-communication list shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut version = String::from("unversioned");
        let mut valences = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    version = v.trim().to_owned();
                }
                continue;
            }
            let (token, value) = trimmed.split_once('\t').ok_or(LexiconError::Syntax { line })?;
            let token = token.trim();
            if token.is_empty() {
                return Err(LexiconError::Syntax { line });
            }
            let valence = value
                .trim()
                .parse::<i8>()
                .ok()
                .filter(|v| (MIN_VALENCE..=MAX_VALENCE).contains(v))
                .ok_or_else(|| LexiconError::Valence {
                    line,
                    value: value.trim().to_owned(),
                })?;
            if token.to_lowercase() != token {
                return Err(LexiconError::NotLowercase {
                    line,
                    token: token.to_owned(),
                });
            }
            if valences.insert(token.to_owned(), valence).is_some() {
                return Err(LexiconError::Duplicate {
                    line,
                    token: token.to_owned(),
                });
            }
        }
        Ok(Self { version, valences })
    }

    /// Builds a lexicon from pairs, applying the same validation as parsing.
    pub fn from_pairs<'a>(version: &str, pairs: impl IntoIterator<Item = (&'a str, i8)>) -> Result<Self, LexiconError> {
        let mut text = format!("# version: {version}\n");
        for (token, valence) in pairs {
            text.push_str(&format!("{token}\t{valence}\n"));
        }
        Self::parse(&text)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn get(&self, token: &str) -> Option<i8> {
        self.valences.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i8)> {
        self.valences.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_version() {
        let lex = Lexicon::parse("# version: test-1\n# a comment\n\ngood\t3\nbad\t-3\n").unwrap();
        assert_eq!(lex.version(), "test-1");
        assert_eq!(lex.get("good"), Some(3));
        assert_eq!(lex.get("bad"), Some(-3));
        assert_eq!(lex.len(), 2);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            Lexicon::parse("good 3\n"),
            Err(LexiconError::Syntax { line: 1 })
        ));
        assert!(matches!(Lexicon::parse("good\t6\n"), Err(LexiconError::Valence { .. })));
        assert!(matches!(Lexicon::parse("good\tx\n"), Err(LexiconError::Valence { .. })));
        assert!(matches!(
            Lexicon::parse("Good\t1\n"),
            Err(LexiconError::NotLowercase { .. })
        ));
        assert!(matches!(
            Lexicon::parse("good\t1\ngood\t2\n"),
            Err(LexiconError::Duplicate { line: 2, .. })
        ));
    }

    #[test]
    fn bundled_is_valid() {
        let lex = Lexicon::bundled();
        assert!(lex.len() > 100);
        assert!(!lex.version().is_empty());
        assert!(lex.iter().all(|(t, v)| t == t.to_lowercase() && (-5..=5).contains(&v)));
    }
}
