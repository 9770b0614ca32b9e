// SPDX-License-Identifier: Apache-2.0

//! Helpers shared by the line-oriented file formats and the wire protocol.

use std::fmt;

use thiserror::Error;

/// A malformed line in one of the text formats. `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
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

/// Non-empty, at most 64 bytes, drawn from `[A-Za-z0-9_-]` plus a few
/// unit-friendly symbols. Tokens never contain whitespace, `:` or `=`.
pub(crate) fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.len() <= crate::model::MAX_TOKEN_LEN
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'%' | b'/'))
}

/// Writes `s` as a double-quoted string, escaping `"` and `\`.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Reads one quoted string from the front of `input`, returning it and the
/// unconsumed remainder.
pub fn unquote(input: &str) -> Option<(String, &str)> {
    let rest = input.strip_prefix('"')?;
    let mut out = String::new();
    let mut chars = rest.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some((_, e @ ('"' | '\\'))) => out.push(e),
                _ => return None,
            },
            '"' => return Some((out, &rest[i + 1..])),
            c => out.push(c),
        }
    }
    None
}

/// Decimal with up to `places` digits, trailing zeros trimmed: `6`, `5.5`.
pub(crate) struct Trimmed(pub f64, pub usize);

impl fmt::Display for Trimmed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{:.*}", self.1, self.0);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.')
        } else {
            &s
        };
        // "-0" after rounding a tiny negative.
        f.write_str(if s == "-0" { "0" } else { s })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quote_escapes() {
        assert_eq!(quote(r#"a "b" \c"#), r#""a \"b\" \\c""#);
        assert_eq!(quote(""), r#""""#);
    }

    #[test]
    fn unquote_reads_prefix() {
        let (s, rest) = unquote(r#""a \"b\" \\c" tail"#).unwrap();
        assert_eq!(s, r#"a "b" \c"#);
        assert_eq!(rest, " tail");
        assert!(unquote("\"open").is_none());
        assert!(unquote(r#""bad \n""#).is_none());
        assert!(unquote("bare").is_none());
    }

    #[test]
    fn trimmed_formatting() {
        assert_eq!(Trimmed(0.0, 3).to_string(), "0");
        assert_eq!(Trimmed(6.0, 3).to_string(), "6");
        assert_eq!(Trimmed(5.5, 3).to_string(), "5.5");
        assert_eq!(Trimmed(1.23456, 3).to_string(), "1.235");
        assert_eq!(Trimmed(-0.0001, 3).to_string(), "0");
        assert_eq!(Trimmed(120.0, 0).to_string(), "120");
    }
}
