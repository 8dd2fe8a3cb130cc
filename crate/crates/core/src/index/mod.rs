//! The assembled self-index.

mod build;
mod format;
mod query;

use std::sync::atomic::{AtomicU64, Ordering};

use crate::boundary::BoundaryAccess;
use crate::error::{Error, Result};
use crate::geometry::{Grid, SourceSet};
use crate::grammar::Slp;
use crate::lz77::Parse;
use crate::trie::PatriciaTree;

pub use format::{FORMAT_VERSION, MAGIC, SECTION_NAMES};
pub use query::LocateOptions;

static COLLISIONS: AtomicU64 = AtomicU64::new(0);

/// Number of reported occurrences that failed re-verification, process-wide.
pub fn collision_count() -> u64 {
    COLLISIONS.load(Ordering::Relaxed)
}

pub(crate) fn log_collision(pos: usize) {
    COLLISIONS.fetch_add(1, Ordering::Relaxed);
    log::warn!("fingerprint collision: occurrence reported at {pos} does not match");
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Trie searches verified by extraction.
    #[default]
    Verify,
    /// Trie searches guided by Karp-Rabin fingerprints.
    Fingerprint,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Verify => "verify",
            Mode::Fingerprint => "fp",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub mode: Mode,
    /// Fingerprint modulus exponent and grammar balance factor.
    pub c: u32,
    pub seed: u64,
    /// A grammar for the text to use instead of building one.
    pub slp: Option<Slp>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            mode: Mode::Verify,
            c: 4,
            seed: 0,
            slp: None,
        }
    }
}

impl BuildOptions {
    pub fn fingerprint() -> Self {
        BuildOptions {
            mode: Mode::Fingerprint,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OccKind {
    Primary,
    Secondary,
}

impl OccKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OccKind::Primary => "primary",
            OccKind::Secondary => "secondary",
        }
    }
}

/// One occurrence; `via` is the phrase whose end it contains (primary) or
/// the phrase whose source it was copied through (secondary). Positions and
/// phrase numbers are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occurrence {
    pub pos: usize,
    pub kind: OccKind,
    pub via: usize,
}

/// Byte alphabet of the text: present bytes get codes `1..=d` in byte
/// order, the sentinel gets code 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    pub(crate) sentinel: u8,
    pub(crate) bytes: Vec<u8>,
    code_of: Box<[u16; 256]>,
}

const ABSENT: u16 = u16::MAX;

impl Alphabet {
    pub(crate) fn from_text(text: &[u8]) -> Result<Alphabet> {
        let mut seen = [false; 256];
        for &b in text {
            seen[b as usize] = true;
        }
        let bytes: Vec<u8> = (0..=255u8).filter(|&b| seen[b as usize]).collect();
        let sentinel = (0..=255u8)
            .find(|&b| !seen[b as usize])
            .ok_or_else(|| Error::InvalidInput("text uses all 256 byte values; no sentinel is available".into()))?;
        Alphabet::new(sentinel, bytes)
    }

    pub(crate) fn new(sentinel: u8, bytes: Vec<u8>) -> Result<Alphabet> {
        let mut code_of = Box::new([ABSENT; 256]);
        for (i, &b) in bytes.iter().enumerate() {
            if code_of[b as usize] != ABSENT || b == sentinel {
                return Err(Error::InvalidInput("malformed alphabet".into()));
            }
            code_of[b as usize] = i as u16 + 1;
        }
        code_of[sentinel as usize] = 0;
        Ok(Alphabet {
            sentinel,
            bytes,
            code_of,
        })
    }

    pub fn sentinel(&self) -> u8 {
        self.sentinel
    }

    /// Bytes occurring in the text, ascending.
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Alphabet size including the sentinel.
    pub fn sigma(&self) -> u64 {
        self.bytes.len() as u64 + 1
    }

    pub(crate) fn code(&self, b: u8) -> Option<u8> {
        match self.code_of[b as usize] {
            ABSENT => None,
            c => Some(c as u8),
        }
    }

    pub(crate) fn byte(&self, code: u8) -> u8 {
        if code == 0 {
            self.sentinel
        } else {
            self.bytes[code as usize - 1]
        }
    }

    /// Fingerprint value of each code: the sentinel takes `sigma - 1`.
    pub(crate) fn fp_pairs(&self) -> Vec<(u8, u64)> {
        let d = self.bytes.len() as u64;
        let mut v = vec![(0u8, d)];
        v.extend((1..=d).map(|c| (c as u8, c - 1)));
        v
    }
}

/// Compressed self-index over a byte string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfIndex {
    pub(crate) mode: Mode,
    pub(crate) c: u32,
    pub(crate) seed: u64,
    pub(crate) alphabet: Alphabet,
    /// Length of the indexed text, without the sentinel.
    pub(crate) n: usize,
    /// Parse of the sentinel-terminated code text.
    pub(crate) parse: Parse,
    pub(crate) access: BoundaryAccess,
    pub(crate) trie_rev: PatriciaTree,
    pub(crate) trie_suf: PatriciaTree,
    pub(crate) grid: Grid,
    pub(crate) sources: SourceSet,
}

/// Sizes and shape of an index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stats {
    pub n: usize,
    pub z: usize,
    pub sigma: u64,
    pub mode: Mode,
    pub q: u64,
    pub rules_s: usize,
    pub rules_sprime: usize,
    pub n_prime: usize,
    pub height_s: u32,
    pub height_sprime: u32,
    pub radius: usize,
    pub levels: Vec<usize>,
    pub fp_levels: Vec<usize>,
    pub trie_nodes: (usize, usize),
    pub sources: usize,
    /// Serialized size of each section, in file order.
    pub sections: Vec<(&'static str, u64)>,
    pub total_bytes: u64,
}

impl SelfIndex {
    /// Length of the indexed text.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Parse of the sentinel-terminated text; trailing characters are
    /// alphabet codes (see [`Alphabet`]).
    pub fn parse(&self) -> &Parse {
        &self.parse
    }

    /// The parse with trailing characters as bytes of the text (the final
    /// one is the sentinel byte).
    pub fn byte_parse(&self) -> Parse {
        self.parse.map_trailing(|c| self.alphabet.byte(c))
    }

    /// Number of phrases, `z`.
    pub fn num_phrases(&self) -> usize {
        self.parse.len()
    }

    /// Phrase ends over the sentinel-terminated text.
    pub fn boundaries(&self) -> &[usize] {
        self.parse.ends()
    }

    pub fn access(&self) -> &BoundaryAccess {
        &self.access
    }

    pub fn trie_rev(&self) -> &PatriciaTree {
        &self.trie_rev
    }

    pub fn trie_suf(&self) -> &PatriciaTree {
        &self.trie_suf
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn sources(&self) -> &SourceSet {
        &self.sources
    }

    /// Phrase numbers (1-based) in lexicographic order of their reversed
    /// strings.
    pub fn reversed_phrase_order(&self) -> Vec<usize> {
        self.trie_rev.leaf_order().iter().map(|&k| k as usize + 1).collect()
    }

    /// Phrase numbers (1-based) in lexicographic order of the suffixes that
    /// follow them.
    pub fn suffix_order(&self) -> Vec<usize> {
        self.trie_suf.leaf_order().iter().map(|&k| k as usize + 1).collect()
    }

    /// `S[i..i + len)` of the original text (1-based `i`).
    pub fn extract(&self, i: usize, len: usize) -> Result<Vec<u8>> {
        if i == 0 || i.checked_add(len).is_none_or(|e| e - 1 > self.n) {
            return Err(Error::Range { pos: i, len, n: self.n });
        }
        let mut out = self.access.extract_any(i, len)?;
        for b in &mut out {
            *b = self.alphabet.byte(*b);
        }
        Ok(out)
    }

    pub fn stats(&self) -> Stats {
        let sections = self.section_sizes();
        let total_bytes = format::HEADER_LEN + sections.iter().map(|(_, s)| s + 8).sum::<u64>() + 4;
        let acc = &self.access;
        Stats {
            n: self.n,
            z: self.parse.len(),
            sigma: self.alphabet.sigma(),
            mode: self.mode,
            q: acc.fp.as_ref().map_or(0, |f| f.params.q()),
            rules_s: acc.slp_s.num_rules(),
            rules_sprime: acc.slp_sprime.num_rules(),
            n_prime: acc.sprime.len(),
            height_s: acc.slp_s.height(),
            height_sprime: acc.slp_sprime.height(),
            radius: acc.sprime.radius(),
            levels: acc.bookmarks.levels().to_vec(),
            fp_levels: acc.fp.as_ref().map_or(Vec::new(), |f| f.bookmarks.levels().to_vec()),
            trie_nodes: (self.trie_rev.num_nodes(), self.trie_suf.num_nodes()),
            sources: self.sources.len(),
            sections,
            total_bytes,
        }
    }
}
