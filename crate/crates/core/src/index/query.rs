//! Pattern queries: locate, count, cyclic shifts and maximal substrings.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::fingerprint::PrefixHashes;
use crate::trie::{LexRange, Walk};

use super::build::{RevLabels, SufLabels};
use super::{log_collision, Mode, OccKind, Occurrence, SelfIndex};

/// Options for [`SelfIndex::locate_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LocateOptions {
    /// Re-extract every reported occurrence and fail on a mismatch.
    pub verify_occurrences: bool,
}

/// Trie searches for substrings of one query string `t`, in either mode.
struct Searcher<'a> {
    idx: &'a SelfIndex,
    fwd: Vec<u8>,
    bwd: Vec<u8>,
    hashes: Option<(PrefixHashes, PrefixHashes)>,
}

impl<'a> Searcher<'a> {
    fn new(idx: &'a SelfIndex, t: Vec<u8>) -> Searcher<'a> {
        let bwd: Vec<u8> = t.iter().rev().copied().collect();
        let hashes = idx.access.fp.as_ref().filter(|_| idx.mode == Mode::Fingerprint).map(|fp| {
            (
                PrefixHashes::new(&fp.params, &t).expect("pattern codes are mapped"),
                PrefixHashes::new(&fp.params, &bwd).expect("pattern codes are mapped"),
            )
        });
        Searcher { idx, fwd: t, bwd, hashes }
    }

    fn full(&self) -> LexRange {
        LexRange {
            lo: 0,
            hi: self.idx.grid.len() - 1,
        }
    }

    /// Walk of the suffix trie for `t[a..b]`.
    fn walk_suf(&self, a: usize, b: usize, need_lcp: bool) -> Walk {
        let q = &self.fwd[a..b];
        let labels = SufLabels(&self.idx.access);
        match &self.hashes {
            Some((h, _)) => self.idx.trie_suf.walk_fp(q, |t| h.range(a, a + t).hash, &labels, need_lcp),
            None => self.idx.trie_suf.walk_verify(q, &labels),
        }
    }

    /// Walk of the reversed-phrase trie for `reverse(t[a..b])`.
    fn walk_rev(&self, a: usize, b: usize, need_lcp: bool) -> Walk {
        let from = self.fwd.len() - b;
        let q = &self.bwd[from..from + (b - a)];
        let labels = RevLabels(&self.idx.access);
        match &self.hashes {
            Some((_, h)) => self.idx.trie_rev.walk_fp(q, |t| h.range(from, from + t).hash, &labels, need_lcp),
            None => self.idx.trie_rev.walk_verify(q, &labels),
        }
    }

    fn search_suf(&self, a: usize, b: usize) -> Option<LexRange> {
        if a == b {
            return Some(self.full());
        }
        self.walk_suf(a, b, false).range_at(b - a)
    }

    fn search_rev(&self, a: usize, b: usize) -> Option<LexRange> {
        if a == b {
            return Some(self.full());
        }
        self.walk_rev(a, b, false).range_at(b - a)
    }

    fn nonempty(&self, a: LexRange, b: LexRange) -> bool {
        !self.idx.grid.is_empty_in(a.lo, a.hi, b.lo, b.hi)
    }
}

impl SelfIndex {
    /// Pattern as alphabet codes; `None` when it uses a byte absent from the
    /// text (so it cannot occur).
    fn pattern_codes(&self, p: &[u8]) -> Result<Option<Vec<u8>>> {
        if p.is_empty() {
            return Err(Error::InvalidInput("pattern is empty".into()));
        }
        if p.contains(&self.alphabet.sentinel) {
            return Err(Error::InvalidInput(format!(
                "pattern contains the sentinel byte {:#04x}",
                self.alphabet.sentinel
            )));
        }
        Ok(p.iter().map(|&b| self.alphabet.code(b)).collect())
    }

    /// Every occurrence of `p`, sorted by position.
    pub fn locate(&self, p: &[u8]) -> Result<Vec<Occurrence>> {
        self.locate_with(p, &LocateOptions::default())
    }

    pub fn locate_with(&self, p: &[u8], opts: &LocateOptions) -> Result<Vec<Occurrence>> {
        let Some(codes) = self.pattern_codes(p)? else {
            return Ok(Vec::new());
        };
        let m = codes.len();
        if m > self.n {
            return Ok(Vec::new());
        }
        let s = Searcher::new(self, codes);
        let ends = self.parse.ends();
        let mut out: Vec<Occurrence> = Vec::new();
        for i in 1..=m {
            let Some(a) = s.search_rev(0, i) else {
                continue;
            };
            let Some(b) = s.search_suf(i, m) else {
                continue;
            };
            self.grid.for_each(a.lo, a.hi, b.lo, b.hi, |k| {
                out.push(Occurrence {
                    pos: ends[k as usize] + 1 - i,
                    kind: OccKind::Primary,
                    via: k as usize + 1,
                });
                true
            });
        }
        let mut queue: VecDeque<usize> = out.iter().map(|o| o.pos).collect();
        while let Some(pos) = queue.pop_front() {
            self.sources.covering(pos, pos + m - 1, |src| {
                let q = src.phrase_start + (pos - src.src_start);
                out.push(Occurrence {
                    pos: q,
                    kind: OccKind::Secondary,
                    via: src.phrase as usize + 1,
                });
                queue.push_back(q);
            });
        }
        out.sort_unstable();
        if opts.verify_occurrences {
            let mut buf = Vec::with_capacity(m);
            for o in &out {
                buf.clear();
                let ok = o.pos + m - 1 <= self.n
                    && self.access.extract_into(o.pos, m, &mut buf).is_ok()
                    && buf == s.fwd;
                if !ok {
                    log_collision(o.pos);
                    return Err(Error::Verification(o.pos));
                }
            }
        }
        Ok(out)
    }

    /// Number of occurrences of `p`.
    pub fn count(&self, p: &[u8]) -> Result<usize> {
        Ok(self.locate(p)?.len())
    }

    /// Locates several patterns, spreading them over `threads` workers.
    pub fn locate_batch(&self, patterns: &[Vec<u8>], threads: usize, opts: &LocateOptions) -> Vec<Result<Vec<Occurrence>>> {
        let threads = threads.clamp(1, patterns.len().max(1));
        if threads == 1 {
            return patterns.iter().map(|p| self.locate_with(p, opts)).collect();
        }
        let chunk = patterns.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = patterns
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(|p| self.locate_with(p, opts)).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("locate worker panicked"))
                .collect()
        })
    }

    /// Rotations `j` (0-based) such that `p[j..] p[..j]` occurs in the text.
    pub fn cyclic_matches(&self, p: &[u8]) -> Result<Vec<usize>> {
        let Some(codes) = self.pattern_codes(p)? else {
            return Ok(Vec::new());
        };
        let m = codes.len();
        if m > self.n {
            return Ok(Vec::new());
        }
        let mut pp = codes.clone();
        pp.extend_from_slice(&codes);
        let s = Searcher::new(self, pp);
        let mut found = vec![false; m];
        let mut left = m;
        // with r the rotation starting at c, the last t characters of r
        // followed by its first m - t spell rotation (c - t) mod m
        for c in 0..m {
            if left == 0 {
                break;
            }
            let wl = s.walk_rev(c, c + m, true);
            let wr = s.walk_suf(c, c + m, true);
            for t in 1..=m {
                let Some(a) = wl.range_at(t) else {
                    break;
                };
                let j = (c + m - t) % m;
                if found[j] {
                    continue;
                }
                let b = if t == m {
                    s.full()
                } else {
                    match wr.range_at(m - t) {
                        Some(b) => b,
                        None => continue,
                    }
                };
                if s.nonempty(a, b) {
                    found[j] = true;
                    left -= 1;
                }
            }
        }
        Ok((0..m).filter(|&j| found[j]).collect())
    }

    /// Maximal intervals `(h, j)` (1-based, inclusive) such that `p[h..=j]`
    /// occurs in the text and neither one-character extension does.
    pub fn maximal_substrings(&self, p: &[u8]) -> Result<Vec<(usize, usize)>> {
        if p.is_empty() {
            return Err(Error::InvalidInput("pattern is empty".into()));
        }
        if p.contains(&self.alphabet.sentinel) {
            return Err(Error::InvalidInput(format!(
                "pattern contains the sentinel byte {:#04x}",
                self.alphabet.sentinel
            )));
        }
        let mut out = Vec::new();
        let mut i = 0;
        while i < p.len() {
            if self.alphabet.code(p[i]).is_none() {
                i += 1;
                continue;
            }
            let start = i;
            while i < p.len() && self.alphabet.code(p[i]).is_some() {
                i += 1;
            }
            let seg: Vec<u8> = p[start..i].iter().map(|&b| self.alphabet.code(b).unwrap()).collect();
            self.maximal_in_segment(seg, start, &mut out);
        }
        Ok(out)
    }

    fn maximal_in_segment(&self, seg: Vec<u8>, offset: usize, out: &mut Vec<(usize, usize)>) {
        let len = seg.len();
        let s = Searcher::new(self, seg);
        // reach[h]: end (exclusive) of the longest occurring substring from h
        let mut reach = vec![0usize; len];
        for i in 1..=len {
            let wl = s.walk_rev(0, i, true);
            let wr = (i < len).then(|| s.walk_suf(i, len, true));
            let b_at = |u: usize| -> LexRange {
                if u == 0 {
                    s.full()
                } else {
                    wr.as_ref().and_then(|w| w.range_at(u)).expect("u within the matched length")
                }
            };
            let mut u = wr.as_ref().map_or(0, |w| w.matched());
            for t in 1..=wl.matched() {
                let a = wl.range_at(t).expect("t within the matched length");
                if !s.nonempty(a, b_at(u)) {
                    // doubling search downwards, then bisection
                    let mut bad = u;
                    let mut step = 1;
                    let mut good = loop {
                        let cand = bad.saturating_sub(step);
                        if cand == 0 || s.nonempty(a, b_at(cand)) {
                            break cand;
                        }
                        bad = cand;
                        step *= 2;
                    };
                    while bad - good > 1 {
                        let mid = good + (bad - good) / 2;
                        if s.nonempty(a, b_at(mid)) {
                            good = mid;
                        } else {
                            bad = mid;
                        }
                    }
                    u = good;
                }
                let h = i - t;
                reach[h] = reach[h].max(i + u);
            }
        }
        let mut best = 0;
        for (h, &r) in reach.iter().enumerate() {
            if r > best {
                out.push((offset + h + 1, offset + r));
                best = r;
            }
        }
    }
}
