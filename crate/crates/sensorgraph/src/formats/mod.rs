//! Line-based text formats.
//!
//! All formats share the same lexical rules: whitespace-separated fields,
//! `#` starts a comment, blank lines are ignored. Numbers are written with 17
//! significant digits so that a write/read cycle is lossless.

pub mod graph;
pub mod poses;
pub mod vectors;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::SplitWhitespace;

use sensorgraph_core::nalgebra::Vector3;
use sensorgraph_core::{Pose, Rotation};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// Failure to load a file in one of the formats.
#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{}: {}", path.display(), source.line, source.message)]
    Parse { path: PathBuf, source: ParseError },
}

pub(crate) fn read_with<T>(
    path: &Path,
    parse: impl FnOnce(&str) -> Result<T, ParseError>,
) -> Result<T, FileError> {
    let text = std::fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse(&text).map_err(|source| FileError::Parse {
        path: path.to_owned(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), FileError> {
    std::fs::write(path, text).map_err(|source| FileError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Content and comment of each non-blank line, numbered from 1.
pub(crate) fn records(text: &str) -> impl Iterator<Item = (usize, &str, Option<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let (content, comment) = match raw.find('#') {
            Some(k) => (&raw[..k], Some(&raw[k + 1..])),
            None => (raw, None),
        };
        if content.trim().is_empty() {
            None
        } else {
            Some((i + 1, content, comment))
        }
    })
}

/// Cursor over the fields of one record.
pub(crate) struct Fields<'a> {
    line: usize,
    tokens: SplitWhitespace<'a>,
}

impl<'a> Fields<'a> {
    pub(crate) fn new(line: usize, content: &'a str) -> Self {
        Fields {
            line,
            tokens: content.split_whitespace(),
        }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, message)
    }

    pub(crate) fn next_token(&mut self, what: &str) -> Result<&'a str, ParseError> {
        let line = self.line;
        self.tokens
            .next()
            .ok_or_else(|| ParseError::new(line, format!("missing {what}")))
    }

    pub(crate) fn number(&mut self, what: &str) -> Result<f64, ParseError> {
        let tok = self.next_token(what)?;
        let v: f64 = tok
            .parse()
            .map_err(|_| self.error(format!("{what}: {tok:?} is not a number")))?;
        if !v.is_finite() {
            return Err(self.error(format!("{what}: {tok:?} is not finite")));
        }
        Ok(v)
    }

    pub(crate) fn id(&mut self, what: &str) -> Result<u32, ParseError> {
        let tok = self.next_token(what)?;
        tok.parse()
            .map_err(|_| self.error(format!("{what}: {tok:?} is not a node id")))
    }

    pub(crate) fn vector3(&mut self, what: &str) -> Result<Vector3<f64>, ParseError> {
        Ok(Vector3::new(
            self.number(what)?,
            self.number(what)?,
            self.number(what)?,
        ))
    }

    /// `tx ty tz qx qy qz qw`; the quaternion is normalized.
    pub(crate) fn pose(&mut self) -> Result<Pose, ParseError> {
        let t = self.vector3("translation")?;
        let q = [
            self.number("quaternion")?,
            self.number("quaternion")?,
            self.number("quaternion")?,
            self.number("quaternion")?,
        ];
        let r = Rotation::from_quaternion(q[0], q[1], q[2], q[3])
            .map_err(|e| self.error(format!("quaternion: {e}")))?;
        Ok(Pose::new(r, t))
    }

    pub(crate) fn finish(mut self) -> Result<(), ParseError> {
        match self.tokens.next() {
            None => Ok(()),
            Some(extra) => Err(self.error(format!("unexpected field {extra:?}"))),
        }
    }
}

/// Writes `v` with 17 significant digits.
pub(crate) struct Exact(pub f64);

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}
