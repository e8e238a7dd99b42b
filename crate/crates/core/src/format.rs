//! Line-oriented text formats shared by the grammar, LZ78 and LZ77 files.
//!
//! Characters are single bytes. Printable ASCII other than space and `\`
//! is written verbatim; everything else uses `\t`, `\n`, `\\` or `\xHH`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::lz77::{Lz77Factor, Lz77Factorization};
use crate::lz78::{Lz78Factorization, Lz78Pair};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("header declares {declared} entries but {found} were found")]
    CountMismatch { declared: usize, found: usize },
    #[error("input is empty")]
    Empty,
}

pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// Appends the escaped form of `b` to `out`.
pub fn escape_byte_into(b: u8, out: &mut String) {
    match b {
        b'\t' => out.push_str("\\t"),
        b'\n' => out.push_str("\\n"),
        b'\\' => out.push_str("\\\\"),
        0x21..=0x7e => out.push(b as char),
        _ => {
            let _ = write!(out, "\\x{b:02x}");
        }
    }
}

pub fn escape_byte(b: u8) -> String {
    let mut s = String::new();
    escape_byte_into(b, &mut s);
    s
}

/// Parses exactly one escaped character.
pub fn unescape_byte(token: &str) -> Result<u8, String> {
    let bytes = token.as_bytes();
    match bytes {
        [b] if *b != b'\\' && (0x21..=0x7e).contains(b) => Ok(*b),
        [b'\\', b't'] => Ok(b'\t'),
        [b'\\', b'n'] => Ok(b'\n'),
        [b'\\', b'\\'] => Ok(b'\\'),
        [b'\\', b'x', h, l] => {
            let hex = std::str::from_utf8(&[*h, *l])
                .map_err(|_| format!("bad hex escape {token:?}"))?
                .to_owned();
            u8::from_str_radix(&hex, 16).map_err(|_| format!("bad hex escape {token:?}"))
        }
        _ => Err(format!("invalid character escape {token:?}")),
    }
}

/// Iterates over non-empty, non-comment lines with their 1-based line numbers.
pub(crate) fn content_lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

/// Parses a `<MAGIC> <count>` header line.
pub(crate) fn parse_header(line_no: usize, line: &str, magic: &str) -> Result<usize, FormatError> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(magic) {
        return Err(syntax(
            line_no,
            format!("expected header `{magic} <count>`"),
        ));
    }
    let count = parts
        .next()
        .ok_or_else(|| syntax(line_no, "missing entry count"))?
        .parse::<usize>()
        .map_err(|e| syntax(line_no, format!("bad entry count: {e}")))?;
    if parts.next().is_some() {
        return Err(syntax(line_no, "trailing tokens after header"));
    }
    Ok(count)
}

pub(crate) fn parse_number<T: std::str::FromStr>(
    line_no: usize,
    tok: Option<&str>,
    what: &str,
) -> Result<T, FormatError>
where
    T::Err: std::fmt::Display,
{
    let tok = tok.ok_or_else(|| syntax(line_no, format!("missing {what}")))?;
    tok.parse::<T>()
        .map_err(|e| syntax(line_no, format!("bad {what} {tok:?}: {e}")))
}

pub fn write_lz78(f: &Lz78Factorization) -> String {
    let mut out = format!("LZ78 {}\n", f.pairs.len());
    for p in &f.pairs {
        let _ = write!(out, "{} ", p.parent);
        escape_byte_into(p.ch, &mut out);
        out.push('\n');
    }
    out
}

pub fn parse_lz78(input: &str) -> Result<Lz78Factorization, FormatError> {
    let mut lines = content_lines(input);
    let (hl, header) = lines.next().ok_or(FormatError::Empty)?;
    let declared = parse_header(hl, header, "LZ78")?;
    let mut pairs = Vec::with_capacity(declared);
    for (no, line) in lines {
        let mut parts = line.split_whitespace();
        let parent: u32 = parse_number(no, parts.next(), "parent id")?;
        let tok = parts
            .next()
            .ok_or_else(|| syntax(no, "missing character"))?;
        let ch = unescape_byte(tok).map_err(|m| syntax(no, m))?;
        if parts.next().is_some() {
            return Err(syntax(no, "trailing tokens"));
        }
        if parent as usize > pairs.len() {
            return Err(syntax(
                no,
                format!("parent id {parent} refers to a later factor"),
            ));
        }
        pairs.push(Lz78Pair { parent, ch });
    }
    if pairs.len() != declared {
        return Err(FormatError::CountMismatch {
            declared,
            found: pairs.len(),
        });
    }
    Ok(Lz78Factorization { pairs })
}

pub fn write_lz77(z: &Lz77Factorization) -> String {
    let mut out = format!("LZ77 {}\n", z.factors.len());
    for f in &z.factors {
        match *f {
            Lz77Factor::Literal(b) => {
                out.push_str("L ");
                escape_byte_into(b, &mut out);
                out.push('\n');
            }
            Lz77Factor::Copy { src, len } => {
                let _ = writeln!(out, "C {src} {len}");
            }
        }
    }
    out
}

pub fn parse_lz77(input: &str) -> Result<Lz77Factorization, FormatError> {
    let mut lines = content_lines(input);
    let (hl, header) = lines.next().ok_or(FormatError::Empty)?;
    let declared = parse_header(hl, header, "LZ77")?;
    let mut factors = Vec::with_capacity(declared);
    for (no, line) in lines {
        let mut parts = line.split_whitespace();
        let f = match parts.next() {
            Some("L") => {
                let tok = parts
                    .next()
                    .ok_or_else(|| syntax(no, "missing character"))?;
                Lz77Factor::Literal(unescape_byte(tok).map_err(|m| syntax(no, m))?)
            }
            Some("C") => {
                let src: u64 = parse_number(no, parts.next(), "source position")?;
                let len: u64 = parse_number(no, parts.next(), "copy length")?;
                if src == 0 || len == 0 {
                    return Err(syntax(
                        no,
                        "copy positions and lengths are 1-based and non-zero",
                    ));
                }
                Lz77Factor::Copy { src, len }
            }
            _ => return Err(syntax(no, "expected `L <char>` or `C <src> <len>`")),
        };
        if parts.next().is_some() {
            return Err(syntax(no, "trailing tokens"));
        }
        factors.push(f);
    }
    if factors.len() != declared {
        return Err(FormatError::CountMismatch {
            declared,
            found: factors.len(),
        });
    }
    Ok(Lz77Factorization { factors })
}
