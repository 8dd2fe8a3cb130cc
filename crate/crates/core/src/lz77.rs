//! Non-self-referential LZ77 parsing.
//!
//! The text is parsed greedily from left to right. At position `i` the parser
//! takes the longest prefix of the remaining text that occurs wholly inside
//! the already-parsed part `S[1..i-1]`, copies it from its leftmost
//! occurrence, and appends one fresh character. Only the final phrase may
//! lack that trailing character.
//!
//! Positions are 1-based throughout, matching how positions are reported by
//! the index.

use crate::error::{Error, Result};
use crate::suffix::SuffixStructures;

/// One LZ77 phrase: a copy of `copy_len` characters from `source_start`,
/// followed by an optional fresh character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phrase {
    pub start: usize,
    pub copy_len: usize,
    /// Leftmost occurrence of the copied part; 0 when `copy_len == 0`.
    pub source_start: usize,
    pub trailing: Option<u8>,
}

impl Phrase {
    pub fn len(&self) -> usize {
        self.copy_len + usize::from(self.trailing.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Last position covered by the phrase.
    pub fn end(&self) -> usize {
        self.start + self.len() - 1
    }

    /// Last position of the copied source, if the phrase copies anything.
    pub fn source_end(&self) -> Option<usize> {
        (self.copy_len > 0).then(|| self.source_start + self.copy_len - 1)
    }
}

/// An LZ77 parse: phrases tiling `[1..n]` and their end positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parse {
    phrases: Vec<Phrase>,
    n: usize,
    ends: Vec<usize>,
}

impl Parse {
    /// Assembles a parse from explicit phrases, checking that they tile the
    /// text and that every source lies strictly before its phrase.
    pub fn from_phrases(phrases: Vec<Phrase>) -> Result<Parse> {
        let mut next = 1;
        let mut ends = Vec::with_capacity(phrases.len());
        for (k, p) in phrases.iter().enumerate() {
            if p.start != next {
                return Err(Error::CorruptParse(format!(
                    "phrase {k} starts at {} but {next} was expected",
                    p.start
                )));
            }
            if p.is_empty() {
                return Err(Error::CorruptParse(format!("phrase {k} is empty")));
            }
            if p.trailing.is_none() && k + 1 != phrases.len() {
                return Err(Error::CorruptParse(format!(
                    "phrase {k} has no trailing character but is not the last phrase"
                )));
            }
            if let Some(se) = p.source_end() {
                if p.source_start == 0 || se >= p.start {
                    return Err(Error::CorruptParse(format!(
                        "phrase {k} copies [{}, {se}] which is not before position {}",
                        p.source_start, p.start
                    )));
                }
            }
            ends.push(p.end());
            next = p.end() + 1;
        }
        Ok(Parse {
            phrases,
            n: next - 1,
            ends,
        })
    }

    pub fn phrases(&self) -> &[Phrase] {
        &self.phrases
    }

    pub fn phrase(&self, k: usize) -> &Phrase {
        &self.phrases[k]
    }

    /// Number of phrases, `z`.
    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Length of the parsed text.
    pub fn text_len(&self) -> usize {
        self.n
    }

    /// Phrase end positions `e_1 < e_2 < ... < e_z = n`.
    pub fn ends(&self) -> &[usize] {
        &self.ends
    }

    pub(crate) fn map_trailing(&self, f: impl Fn(u8) -> u8) -> Parse {
        let phrases = self
            .phrases
            .iter()
            .map(|p| Phrase {
                trailing: p.trailing.map(&f),
                ..*p
            })
            .collect();
        Parse {
            phrases,
            n: self.n,
            ends: self.ends.clone(),
        }
    }
}

/// Parses `text` into non-self-referential LZ77 phrases with leftmost sources.
pub fn parse(text: &[u8]) -> Result<Parse> {
    if text.is_empty() {
        return Err(Error::InvalidInput("cannot parse an empty text".into()));
    }
    let sfx = SuffixStructures::new(text);
    Ok(parse_with(text, &sfx))
}

/// Phrase end positions of a parse.
pub fn boundaries(parse: &Parse) -> &[usize] {
    parse.ends()
}

/// Reconstructs the text a parse describes.
pub fn decode(parse: &Parse) -> Result<Vec<u8>> {
    let mut out: Vec<u8> = Vec::with_capacity(parse.text_len());
    for (k, p) in parse.phrases().iter().enumerate() {
        if p.start != out.len() + 1 {
            return Err(Error::CorruptParse(format!("phrase {k} does not start where the text ends")));
        }
        if p.copy_len > 0 {
            let src = p.source_start;
            if src == 0 || src + p.copy_len - 1 > out.len() {
                return Err(Error::CorruptParse(format!(
                    "phrase {k} references positions not yet produced"
                )));
            }
            out.extend_from_within(src - 1..src - 1 + p.copy_len);
        }
        if let Some(c) = p.trailing {
            out.push(c);
        }
    }
    Ok(out)
}

pub(crate) fn parse_with(text: &[u8], sfx: &SuffixStructures) -> Parse {
    let n = text.len();
    debug_assert_eq!(sfx.len(), n);
    let mut phrases = Vec::new();
    let mut i = 0usize;
    while i < n {
        let (copy_len, source) = longest_previous(sfx, i, n);
        let trailing = text.get(i + copy_len).copied();
        let p = Phrase {
            start: i + 1,
            copy_len,
            source_start: if copy_len > 0 { source + 1 } else { 0 },
            trailing,
        };
        i += p.len();
        phrases.push(p);
    }
    Parse::from_phrases(phrases).expect("parser produced an invalid tiling")
}

/// Longest `len` such that `text[i..i + len]` occurs wholly inside `text[..i]`,
/// with the leftmost starting position of that substring.
fn longest_previous(sfx: &SuffixStructures, i: usize, n: usize) -> (usize, usize) {
    let cap = sfx.max_neighbour_lcp(i).min(i).min(n - i);
    // feasibility is monotone in len: shorter prefixes occur at least as early
    let feasible = |len: usize| -> Option<usize> {
        let p = sfx.leftmost(i, len);
        (p + len <= i).then_some(p)
    };
    if cap == 0 {
        return (0, 0);
    }
    let Some(mut best_src) = feasible(1) else {
        return (0, 0);
    };
    let mut good = 1;
    let mut step = 1;
    let mut bad = cap + 1;
    while good + step <= cap {
        match feasible(good + step) {
            Some(p) => {
                good += step;
                best_src = p;
                step *= 2;
            }
            None => {
                bad = good + step;
                break;
            }
        }
    }
    while bad - good > 1 {
        let mid = good + (bad - good) / 2;
        match feasible(mid) {
            Some(p) => {
                good = mid;
                best_src = p;
            }
            None => bad = mid,
        }
    }
    (good, best_src)
}
