//! Text format for grammars:
//!
//! ```text
//! root: X3
//! X3 -> X1 X2
//! X1 -> 'a'
//! X2 -> 'b'   # comment
//! ```
//!
//! Symbols get ids in the order of their rule lines. Terminal characters are
//! single bytes between quotes; `'\n'`, `'\t'`, `'\\'`, `'\''` and `'\xHH'`
//! escapes are accepted.

use std::fmt::Write as _;

use rustc_hash::FxHashMap;

use super::{Rule, Slp, Symbol};
use crate::error::{Error, Result};

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidGrammar(format!("line {line}: {msg}"))
}

enum Rhs<'a> {
    Terminal(u8),
    Pair(&'a str, &'a str),
}

pub fn parse_listing(listing: &str) -> Result<(Vec<Rule>, Symbol)> {
    let mut root_name: Option<&str> = None;
    let mut heads: FxHashMap<&str, u32> = FxHashMap::default();
    let mut raw: Vec<(usize, Rhs)> = Vec::new();
    for (idx, full) in listing.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(full).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("root:") {
            let name = rest.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(bad(lineno, "malformed root line"));
            }
            if root_name.replace(name).is_some() {
                return Err(bad(lineno, "root declared twice"));
            }
            continue;
        }
        let (lhs, rhs) = line.split_once("->").ok_or_else(|| bad(lineno, "expected `SYMBOL -> ...`"))?;
        let lhs = lhs.trim();
        if lhs.is_empty() || lhs.contains(char::is_whitespace) {
            return Err(bad(lineno, "malformed rule head"));
        }
        let rhs = rhs.trim();
        let parsed = if rhs.starts_with('\'') {
            Rhs::Terminal(parse_char(rhs).ok_or_else(|| bad(lineno, format!("bad terminal {rhs}")))?)
        } else {
            let parts: Vec<&str> = rhs.split_whitespace().collect();
            match parts[..] {
                [l, r] => Rhs::Pair(l, r),
                _ => {
                    return Err(bad(
                        lineno,
                        format!("rule for {lhs} has {} symbols; exactly two are required", parts.len()),
                    ))
                }
            }
        };
        let id = raw.len() as u32;
        if heads.insert(lhs, id).is_some() {
            return Err(bad(lineno, format!("symbol {lhs} has more than one rule")));
        }
        raw.push((lineno, parsed));
    }
    let root_name = root_name.ok_or_else(|| Error::InvalidGrammar("missing `root:` line".into()))?;
    let lookup = |name: &str, line: usize| -> Result<Symbol> {
        heads
            .get(name)
            .map(|&i| Symbol(i))
            .ok_or_else(|| bad(line, format!("symbol {name} has no rule")))
    };
    let mut rules = Vec::with_capacity(raw.len());
    for (line, rhs) in &raw {
        rules.push(match *rhs {
            Rhs::Terminal(c) => Rule::Terminal(c),
            Rhs::Pair(l, r) => Rule::Pair(lookup(l, *line)?, lookup(r, *line)?),
        });
    }
    let root = heads
        .get(root_name)
        .map(|&i| Symbol(i))
        .ok_or_else(|| Error::InvalidGrammar(format!("root symbol {root_name} has no rule")))?;
    Ok((rules, root))
}

fn strip_comment(line: &str) -> &str {
    // a '#' inside a quoted terminal is a character, not a comment
    let bytes = line.as_bytes();
    let mut in_quote = false;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if in_quote => i += 1,
            b'\'' => in_quote = !in_quote,
            b'#' if !in_quote => return &line[..i],
            _ => {}
        }
        i += 1;
    }
    line
}

fn parse_char(s: &str) -> Option<u8> {
    let inner = s.strip_prefix('\'')?.strip_suffix('\'')?;
    let b = inner.as_bytes();
    match b {
        [c] if *c != b'\\' => Some(*c),
        [b'\\', e] => match e {
            b'n' => Some(b'\n'),
            b't' => Some(b'\t'),
            b'r' => Some(b'\r'),
            b'0' => Some(0),
            b'\\' => Some(b'\\'),
            b'\'' => Some(b'\''),
            _ => None,
        },
        [b'\\', b'x', h, l] => u8::from_str_radix(std::str::from_utf8(&[*h, *l]).ok()?, 16).ok(),
        _ => None,
    }
}

fn quote(c: u8) -> String {
    match c {
        b'\n' => "'\\n'".into(),
        b'\t' => "'\\t'".into(),
        b'\r' => "'\\r'".into(),
        b'\\' => "'\\\\'".into(),
        b'\'' => "'\\''".into(),
        0x21..=0x7e => format!("'{}'", c as char),
        _ => format!("'\\x{c:02x}'"),
    }
}

/// Renders a grammar in the listing format; `parse_listing` reads it back to
/// the same rule table.
pub fn write_listing(slp: &Slp) -> String {
    let mut out = format!("root: {}\n", slp.root());
    for (i, r) in slp.rules().iter().enumerate() {
        let _ = match r {
            Rule::Terminal(c) => writeln!(out, "X{i} -> {}", quote(*c)),
            Rule::Pair(l, r) => writeln!(out, "X{i} -> {l} {r}"),
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors() {
        let cases = [
            "X -> A B\nA -> 'a'\nB -> 'b'",
            "root: X\nX -> A\nA -> 'a'",
            "root: X\nX -> A B C\nA -> 'a'\nB -> 'a'\nC -> 'a'",
            "root: X\nX -> A B\nA -> 'a'",
            "root: X\nX -> 'a'\nX -> 'b'",
            "root: X\nX -> 'ab'",
        ];
        for c in cases {
            assert!(matches!(parse_listing(c), Err(Error::InvalidGrammar(_))), "{c}");
        }
    }

    #[test]
    fn round_trip_all_bytes() {
        let text: Vec<u8> = (0..=255u8).collect();
        let g = Slp::build_balanced(&text).unwrap();
        let back = Slp::import(&write_listing(&g)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn hash_inside_quotes() {
        let g = Slp::import("root: R\nR -> H S # pair\nH -> '#'\nS -> ' '").unwrap();
        assert_eq!(g.expand_all(), b"# ");
    }
}
