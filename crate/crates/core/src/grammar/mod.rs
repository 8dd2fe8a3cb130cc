//! Straight-line programs: context-free grammars in Chomsky normal form that
//! generate exactly one string.
//!
//! Symbols are dense `u32` handles into the rule table and double as
//! pointers into the (implicit) parse tree. Navigation only needs the
//! per-symbol expansion lengths, so no parent links or explicit tree are
//! ever stored.

mod build;
mod listing;

use std::fmt;

use crate::error::{Error, Result};

pub use listing::{parse_listing, write_listing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Terminal(u8),
    Pair(Symbol, Symbol),
}

/// A validated straight-line program with its length and height tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slp {
    rules: Vec<Rule>,
    root: Symbol,
    exp_len: Vec<u64>,
    height: Vec<u32>,
}

impl Slp {
    /// Validates `rules` (no dangling references, no cycles) and computes the
    /// expansion lengths and heights of every symbol.
    pub fn new(rules: Vec<Rule>, root: Symbol) -> Result<Slp> {
        let order = topological_order(&rules, root).map_err(|v| Error::InvalidGrammar(v.to_string()))?;
        let mut exp_len = vec![0u64; rules.len()];
        let mut height = vec![0u32; rules.len()];
        for s in order {
            match rules[s] {
                Rule::Terminal(_) => exp_len[s] = 1,
                Rule::Pair(l, r) => {
                    exp_len[s] = exp_len[l.index()]
                        .checked_add(exp_len[r.index()])
                        .ok_or_else(|| Error::InvalidGrammar("expansion length overflows u64".into()))?;
                    height[s] = 1 + height[l.index()].max(height[r.index()]);
                }
            }
        }
        Ok(Slp {
            rules,
            root,
            exp_len,
            height,
        })
    }

    /// Builds a balanced grammar by splitting at midpoints and sharing equal
    /// pairs; the root has height exactly `ceil(log2 n)`.
    pub fn build_balanced(text: &[u8]) -> Result<Slp> {
        build::balanced(text)
    }

    /// Builds a grammar by locally consistent block parsing, so that repeated
    /// substrings mostly receive the same symbols. The root height is at most
    /// `2 * ceil(log2 n)`.
    pub fn build_local(text: &[u8]) -> Result<Slp> {
        build::local(text)
    }

    /// Parses and validates a rule listing (see [`parse_listing`]).
    pub fn import(listing: &str) -> Result<Slp> {
        let (rules, root) = parse_listing(listing)?;
        Slp::new(rules, root)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, s: Symbol) -> Rule {
        self.rules[s.index()]
    }

    pub fn root(&self) -> Symbol {
        self.root
    }

    /// Number of rules, `r`.
    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    /// Length of the generated string, `n`.
    pub fn len(&self) -> usize {
        self.exp_len[self.root.index()] as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn exp_len(&self, s: Symbol) -> u64 {
        self.exp_len[s.index()]
    }

    pub fn height_of(&self, s: Symbol) -> u32 {
        self.height[s.index()]
    }

    /// Height of the parse tree, `h`.
    pub fn height(&self) -> u32 {
        self.height[self.root.index()]
    }

    /// Whether `height <= c * ceil(log2 n)`.
    pub fn is_balanced(&self, c: u32) -> bool {
        self.height() <= self.balance_bound(c)
    }

    pub fn balance_bound(&self, c: u32) -> u32 {
        c.saturating_mul(ceil_log2(self.len() as u64).max(1))
    }

    /// Terminal symbol for byte `c`, if the grammar has one.
    pub fn terminal_for(&self, c: u8) -> Option<Symbol> {
        self.rules
            .iter()
            .position(|r| *r == Rule::Terminal(c))
            .map(|i| Symbol(i as u32))
    }

    /// Full expansion of `s`.
    pub fn expand(&self, s: Symbol, out: &mut Vec<u8>) {
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            match self.rules[x.index()] {
                Rule::Terminal(c) => out.push(c),
                Rule::Pair(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
    }

    /// Expansion of the root.
    pub fn expand_all(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        self.expand(self.root, &mut out);
        out
    }

    /// `S[i..i + len - 1]` (1-based `i`) by descending from the root;
    /// `O(len + h)` time.
    pub fn extract(&self, i: usize, len: usize) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(len);
        self.extract_into(i, len, &mut out)?;
        Ok(out)
    }

    pub fn extract_into(&self, i: usize, len: usize, out: &mut Vec<u8>) -> Result<()> {
        self.check_range(i, len)?;
        if len == 0 {
            return Ok(());
        }
        let mut pieces = Vec::new();
        self.decompose_into(self.root, (i - 1) as u64, len as u64, &mut pieces);
        for p in pieces {
            self.expand(p, out);
        }
        Ok(())
    }

    pub(crate) fn check_range(&self, i: usize, len: usize) -> Result<()> {
        let n = self.len();
        if i == 0 || i.checked_add(len).is_none_or(|e| e - 1 > n) {
            return Err(Error::Range { pos: i, len, n });
        }
        Ok(())
    }

    /// Appends the canonical cover of `expansion(s)[off..off + len]`: maximal
    /// symbols whose expansions concatenate to the range, at most two per
    /// level below the split node.
    pub fn decompose_into(&self, s: Symbol, off: u64, len: u64, out: &mut Vec<Symbol>) {
        if len == 0 {
            return;
        }
        debug_assert!(off + len <= self.exp_len(s));
        let (mut s, mut off) = (s, off);
        loop {
            if off == 0 && len == self.exp_len(s) {
                out.push(s);
                return;
            }
            match self.rule(s) {
                Rule::Terminal(_) => unreachable!("partial range inside a terminal"),
                Rule::Pair(l, r) => {
                    let ll = self.exp_len(l);
                    if off + len <= ll {
                        s = l;
                    } else if off >= ll {
                        off -= ll;
                        s = r;
                    } else {
                        self.suffix_cover(l, off, out);
                        self.prefix_cover(r, off + len - ll, out);
                        return;
                    }
                }
            }
        }
    }

    /// Cover of the suffix of `s` starting at `off`.
    pub(crate) fn suffix_cover(&self, mut s: Symbol, mut off: u64, out: &mut Vec<Symbol>) {
        let mut pending = Vec::new();
        while off != 0 {
            match self.rule(s) {
                Rule::Terminal(_) => unreachable!(),
                Rule::Pair(l, r) => {
                    let ll = self.exp_len(l);
                    if off >= ll {
                        off -= ll;
                        s = r;
                    } else {
                        pending.push(r);
                        s = l;
                    }
                }
            }
        }
        out.push(s);
        out.extend(pending.into_iter().rev());
    }

    /// Cover of the first `len` characters of `s`.
    pub(crate) fn prefix_cover(&self, mut s: Symbol, mut len: u64, out: &mut Vec<Symbol>) {
        if len == 0 {
            return;
        }
        while len != self.exp_len(s) {
            match self.rule(s) {
                Rule::Terminal(_) => unreachable!(),
                Rule::Pair(l, r) => {
                    let ll = self.exp_len(l);
                    if len <= ll {
                        s = l;
                    } else {
                        out.push(l);
                        len -= ll;
                        s = r;
                    }
                }
            }
        }
        out.push(s);
    }

    /// Checks this grammar (and optionally its expansion) without failing.
    pub fn validate(&self, expected: Option<&[u8]>) -> ValidationReport {
        let mut report = validate(&self.rules, self.root, expected);
        for (i, &len) in self.exp_len.iter().enumerate() {
            let want = match self.rules[i] {
                Rule::Terminal(_) => 1,
                Rule::Pair(l, r) => self.exp_len[l.index()] + self.exp_len[r.index()],
            };
            if want != len {
                report.violations.push(Violation::LengthMismatch(Symbol(i as u32)));
            }
        }
        report
    }
}

pub(crate) fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Something wrong with a rule table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The symbol lies on a cycle of rules.
    Cycle(Symbol),
    /// A rule refers to a symbol outside the rule table.
    Dangling(Symbol),
    /// The stored expansion length disagrees with the rule.
    LengthMismatch(Symbol),
    /// The expansion differs from the expected text at this 1-based position.
    ExpansionMismatch(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle(s) => write!(f, "symbol {s} lies on a cycle"),
            Violation::Dangling(s) => write!(f, "symbol {s} has no rule"),
            Violation::LengthMismatch(s) => write!(f, "stored length of {s} is inconsistent"),
            Violation::ExpansionMismatch(p) => write!(f, "expansion differs from the text at position {p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rules: usize,
    pub height: Option<u32>,
    pub len: Option<u64>,
    /// `height / ceil(log2 n)`, when the grammar is acyclic.
    pub balance_ratio: Option<f64>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Validates a raw rule table. Problems are reported, never returned as errors.
pub fn validate(rules: &[Rule], root: Symbol, expected: Option<&[u8]>) -> ValidationReport {
    let mut report = ValidationReport {
        rules: rules.len(),
        height: None,
        len: None,
        balance_ratio: None,
        violations: Vec::new(),
    };
    if let Err(v) = topological_order(rules, root) {
        report.violations.push(v);
        return report;
    }
    let slp = match Slp::new(rules.to_vec(), root) {
        Ok(s) => s,
        Err(_) => {
            report.violations.push(Violation::LengthMismatch(root));
            return report;
        }
    };
    report.height = Some(slp.height());
    report.len = Some(slp.len() as u64);
    report.balance_ratio = Some(slp.height() as f64 / ceil_log2(slp.len() as u64).max(1) as f64);
    if let Some(text) = expected {
        let got = slp.expand_all();
        let first_diff = got.iter().zip(text).position(|(a, b)| a != b);
        let pos = match first_diff {
            Some(p) => Some(p + 1),
            None if got.len() != text.len() => Some(got.len().min(text.len()) + 1),
            None => None,
        };
        if let Some(p) = pos {
            report.violations.push(Violation::ExpansionMismatch(p));
        }
    }
    report
}

/// Post-order of the symbols reachable from `root`, or the first violation.
fn topological_order(rules: &[Rule], root: Symbol) -> std::result::Result<Vec<usize>, Violation> {
    const NEW: u8 = 0;
    const OPEN: u8 = 1;
    const DONE: u8 = 2;
    let n = rules.len();
    if root.index() >= n {
        return Err(Violation::Dangling(root));
    }
    for (i, r) in rules.iter().enumerate() {
        if let Rule::Pair(l, rr) = r {
            for c in [l, rr] {
                if c.index() >= n {
                    let _ = i;
                    return Err(Violation::Dangling(*c));
                }
            }
        }
    }
    let mut state = vec![NEW; n];
    let mut order = Vec::with_capacity(n);
    // every symbol is visited, not only those under the root, so that a
    // cycle anywhere in the table is reported
    let starts = std::iter::once(root.index()).chain(0..n);
    for start in starts {
        if state[start] != NEW {
            continue;
        }
        let mut stack = vec![(start, false)];
        while let Some((s, expanded)) = stack.pop() {
            if expanded {
                state[s] = DONE;
                order.push(s);
                continue;
            }
            match state[s] {
                DONE => continue,
                OPEN => return Err(Violation::Cycle(Symbol(s as u32))),
                _ => {}
            }
            state[s] = OPEN;
            stack.push((s, true));
            if let Rule::Pair(l, r) = rules[s] {
                for c in [r, l] {
                    match state[c.index()] {
                        OPEN => return Err(Violation::Cycle(c)),
                        NEW => stack.push((c.index(), false)),
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(order)
}
