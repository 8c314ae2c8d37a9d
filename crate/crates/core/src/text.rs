//! Line-oriented sectioned text shared by scenario, experiment and school files.
//!
//! ```text
//! [section]
//! key=value   # comment
//! ```

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("ragged grid at line {line}: expected {expected} columns, found {found}")]
    RaggedGrid {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown glyph {glyph:?} at line {line}, column {column}")]
    UnknownGlyph {
        glyph: char,
        line: usize,
        column: usize,
    },
    #[error("unknown key `{key}` in [{section}] at line {line}")]
    UnknownKey {
        key: String,
        section: String,
        line: usize,
    },
    #[error("duplicate key `{key}` at line {line}")]
    DuplicateKey { key: String, line: usize },
    #[error("invalid value {value:?} for `{key}` at line {line}: expected {expected}")]
    InvalidValue {
        key: String,
        value: String,
        line: usize,
        expected: &'static str,
    },
    #[error("parameter `{key}` out of range at line {line}: {reason}")]
    OutOfRange {
        key: String,
        line: usize,
        reason: &'static str,
    },
    #[error("duplicate section [{section}] at line {line}")]
    DuplicateSection { section: String, line: usize },
    #[error("unknown section [{section}] at line {line}")]
    UnknownSection { section: String, line: usize },
    #[error("section [{section}] at line {line} is out of order")]
    SectionOrder { section: String, line: usize },
    #[error("missing [{section}] section")]
    MissingSection { section: &'static str },
}

/// One physical line of a section body, 1-based line number.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Line<'a> {
    pub number: usize,
    pub text: &'a str,
}

#[derive(Debug, Clone)]
pub(crate) struct Section<'a> {
    pub name: &'a str,
    pub line: usize,
    pub body: Vec<Line<'a>>,
}

/// Splits `text` into sections. Content before the first header may only be
/// blank lines or comments.
pub(crate) fn sections(text: &str) -> Result<Vec<Section<'_>>, ParseError> {
    let mut out: Vec<Section<'_>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = raw.trim();
        if trimmed.starts_with('[') {
            let Some(name) = trimmed.strip_prefix('[').and_then(|t| t.strip_suffix(']')) else {
                return Err(ParseError::Syntax {
                    line: number,
                    column: raw.len() + 1,
                    message: "unterminated section header".into(),
                });
            };
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ParseError::Syntax {
                    line: number,
                    column: raw.find('[').unwrap_or(0) + 2,
                    message: format!("invalid section name {name:?}"),
                });
            }
            out.push(Section {
                name,
                line: number,
                body: Vec::new(),
            });
            continue;
        }
        match out.last_mut() {
            Some(section) => section.body.push(Line { number, text: raw }),
            None => {
                let content = strip_comment(raw).trim();
                if !content.is_empty() {
                    return Err(ParseError::Syntax {
                        line: number,
                        column: raw.len() - raw.trim_start().len() + 1,
                        message: "content before the first section header".into(),
                    });
                }
            }
        }
    }
    Ok(out)
}

fn strip_comment(s: &str) -> &str {
    s.split_once('#').map_or(s, |(head, _)| head)
}

/// A `key=value` entry.
#[derive(Debug, Clone)]
pub(crate) struct Entry<'a> {
    pub key: &'a str,
    pub value: &'a str,
    pub line: usize,
}

/// Reads the `key=value` body of a section, rejecting duplicate keys unless
/// listed in `repeatable`.
pub(crate) fn entries<'a>(
    section: &Section<'a>,
    repeatable: &[&str],
) -> Result<Vec<Entry<'a>>, ParseError> {
    let mut out: Vec<Entry<'a>> = Vec::new();
    for line in &section.body {
        let content = strip_comment(line.text);
        if content.trim().is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ParseError::Syntax {
                line: line.number,
                column: line.text.len() - line.text.trim_start().len() + 1,
                message: "expected `key=value`".into(),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(ParseError::Syntax {
                line: line.number,
                column: 1,
                message: "empty key".into(),
            });
        }
        if !repeatable.contains(&key) && out.iter().any(|e| e.key == key) {
            return Err(ParseError::DuplicateKey {
                key: key.to_string(),
                line: line.number,
            });
        }
        out.push(Entry {
            key,
            value: value.trim(),
            line: line.number,
        });
    }
    Ok(out)
}

impl Entry<'_> {
    fn invalid(&self, expected: &'static str) -> ParseError {
        ParseError::InvalidValue {
            key: self.key.to_string(),
            value: self.value.to_string(),
            line: self.line,
            expected,
        }
    }

    pub fn out_of_range(&self, reason: &'static str) -> ParseError {
        ParseError::OutOfRange {
            key: self.key.to_string(),
            line: self.line,
            reason,
        }
    }

    pub fn unknown(&self, section: &str) -> ParseError {
        ParseError::UnknownKey {
            key: self.key.to_string(),
            section: section.to_string(),
            line: self.line,
        }
    }

    pub fn real(&self) -> Result<f64, ParseError> {
        let v: f64 = self
            .value
            .parse()
            .map_err(|_| self.invalid("a real number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.invalid("a finite real number"))
        }
    }

    pub fn probability(&self) -> Result<f64, ParseError> {
        let v = self.real()?;
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(self.out_of_range("must lie in [0, 1]"))
        }
    }

    pub fn integer(&self) -> Result<u64, ParseError> {
        self.value
            .parse()
            .map_err(|_| self.invalid("a non-negative integer"))
    }

    pub fn positive_integer(&self) -> Result<usize, ParseError> {
        match self.integer()? {
            0 => Err(self.out_of_range("must be positive")),
            v => usize::try_from(v).map_err(|_| self.out_of_range("too large")),
        }
    }

    pub fn boolean(&self) -> Result<bool, ParseError> {
        match self.value {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(self.invalid("`true` or `false`")),
        }
    }
}
