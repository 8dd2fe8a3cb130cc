use rustc_hash::FxHashMap;

use super::{Rule, Slp, Symbol};
use crate::error::{Error, Result};

struct Builder {
    rules: Vec<Rule>,
    pairs: FxHashMap<(u32, u32), u32>,
    terminals: [u32; 256],
}

impl Builder {
    fn new() -> Self {
        Builder {
            rules: Vec::new(),
            pairs: FxHashMap::default(),
            terminals: [u32::MAX; 256],
        }
    }

    fn terminal(&mut self, c: u8) -> u32 {
        if self.terminals[c as usize] == u32::MAX {
            self.terminals[c as usize] = self.rules.len() as u32;
            self.rules.push(Rule::Terminal(c));
        }
        self.terminals[c as usize]
    }

    fn pair(&mut self, l: u32, r: u32) -> u32 {
        let next = self.rules.len() as u32;
        let id = *self.pairs.entry((l, r)).or_insert(next);
        if id == next {
            self.rules.push(Rule::Pair(Symbol(l), Symbol(r)));
        }
        id
    }

    /// Midpoint tree over `syms`, left half taking the extra element.
    fn midpoint(&mut self, syms: &[u32]) -> u32 {
        match syms.len() {
            1 => syms[0],
            len => {
                let mid = len.div_ceil(2);
                let l = self.midpoint(&syms[..mid]);
                let r = self.midpoint(&syms[mid..]);
                self.pair(l, r)
            }
        }
    }

    fn midpoint_text(&mut self, text: &[u8]) -> u32 {
        match text.len() {
            1 => self.terminal(text[0]),
            len => {
                let mid = len.div_ceil(2);
                let l = self.midpoint_text(&text[..mid]);
                let r = self.midpoint_text(&text[mid..]);
                self.pair(l, r)
            }
        }
    }

    fn finish(self, root: u32) -> Result<Slp> {
        Slp::new(self.rules, Symbol(root))
    }
}

fn non_empty(text: &[u8]) -> Result<()> {
    if text.is_empty() {
        return Err(Error::InvalidInput("cannot build a grammar for an empty text".into()));
    }
    Ok(())
}

pub(super) fn balanced(text: &[u8]) -> Result<Slp> {
    non_empty(text)?;
    let mut b = Builder::new();
    let root = b.midpoint_text(text);
    b.finish(root)
}

fn priority(id: u32) -> u64 {
    let mut x = (id as u64) ^ 0x5851_f42d_4c95_7f2d;
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub(super) fn local(text: &[u8]) -> Result<Slp> {
    non_empty(text)?;
    let mut b = Builder::new();
    let mut seq: Vec<u32> = text.iter().map(|&c| b.terminal(c)).collect();
    let mut next = Vec::new();
    let mut cuts = Vec::new();
    while seq.len() > 1 {
        block_cuts(&seq, &mut cuts);
        next.clear();
        for w in cuts.windows(2) {
            let block = &seq[w[0]..w[1]];
            next.push(b.midpoint(block));
        }
        std::mem::swap(&mut seq, &mut next);
    }
    b.finish(seq[0])
}

/// Block start positions of `seq` (plus a final `seq.len()`).
///
/// Maximal runs of one symbol of length at least two form blocks on their
/// own. The remaining stretches have no two equal neighbours and are cut in
/// front of every strict local minimum of the symbol priority; a block of
/// length one inside such a stretch is merged into its left neighbour.
fn block_cuts(seq: &[u32], cuts: &mut Vec<usize>) {
    cuts.clear();
    let n = seq.len();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && seq[j] == seq[i] {
            j += 1;
        }
        if j - i >= 2 {
            cuts.push(i);
            i = j;
            continue;
        }
        // stretch [i, end) without equal neighbours
        let mut end = i + 1;
        while end < n && seq[end] != seq[end - 1] && (end + 1 >= n || seq[end + 1] != seq[end]) {
            end += 1;
        }
        cut_stretch(seq, i, end, cuts);
        i = end;
    }
    cuts.push(n);
}

fn cut_stretch(seq: &[u32], lo: usize, hi: usize, cuts: &mut Vec<usize>) {
    let first = cuts.len();
    cuts.push(lo);
    for k in lo + 1..hi.saturating_sub(1) {
        let p = priority(seq[k]);
        if p < priority(seq[k - 1]) && p < priority(seq[k + 1]) {
            cuts.push(k);
        }
    }
    // merge length-one blocks into their left neighbour (or the right one for
    // the first block)
    let mut out = Vec::with_capacity(cuts.len() - first);
    let starts = &cuts[first..];
    for (idx, &s) in starts.iter().enumerate() {
        let e = starts.get(idx + 1).copied().unwrap_or(hi);
        if e - s == 1 && idx > 0 {
            continue;
        }
        out.push(s);
    }
    if out.len() >= 2 && out[1] - out[0] == 1 {
        out.remove(1);
    }
    cuts.truncate(first);
    cuts.extend(out);
}
