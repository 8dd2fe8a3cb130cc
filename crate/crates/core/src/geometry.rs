//! Range reporting for primary and secondary occurrences.
//!
//! [`Grid`] holds one point per phrase (reversed-phrase rank, suffix rank) in
//! a wavelet matrix and answers four-sided reporting and emptiness queries.
//! [`SourceSet`] holds the phrase sources and reports those covering an
//! interval.

use crate::rmq::SparseArgMax;

/// Plain bitvector with a rank directory of one counter per word.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
    ranks: Vec<u32>,
}

impl BitVec {
    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> BitVec {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                words[len / 64] |= 1 << (len % 64);
            }
            len += 1;
        }
        BitVec::from_words(words, len)
    }

    pub(crate) fn from_words(words: Vec<u64>, len: usize) -> BitVec {
        let mut ranks = Vec::with_capacity(words.len() + 1);
        let mut acc = 0u32;
        for w in &words {
            ranks.push(acc);
            acc += w.count_ones();
        }
        ranks.push(acc);
        BitVec { words, len, ranks }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Ones in `[0, i)`.
    pub fn rank1(&self, i: usize) -> usize {
        let w = i / 64;
        let b = i % 64;
        let mut r = self.ranks[w] as usize;
        if b > 0 {
            r += (self.words[w] & ((1u64 << b) - 1)).count_ones() as usize;
        }
        r
    }

    pub fn rank0(&self, i: usize) -> usize {
        i - self.rank1(i)
    }

    pub fn ones(&self) -> usize {
        *self.ranks.last().unwrap() as usize
    }
}

/// Wavelet matrix over a sequence of values below `2^bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveletMatrix {
    len: usize,
    bits: u32,
    levels: Vec<BitVec>,
    zeros: Vec<usize>,
}

impl WaveletMatrix {
    pub fn new(values: &[u32]) -> WaveletMatrix {
        let max = values.iter().copied().max().unwrap_or(0);
        let bits = (32 - max.leading_zeros()).max(1);
        let mut cur = values.to_vec();
        let mut levels = Vec::with_capacity(bits as usize);
        let mut zeros = Vec::with_capacity(bits as usize);
        for l in (0..bits).rev() {
            let bv = BitVec::from_bits(cur.iter().map(|&v| v >> l & 1 == 1));
            let (mut z, mut o): (Vec<u32>, Vec<u32>) = (Vec::new(), Vec::new());
            for &v in &cur {
                if v >> l & 1 == 1 {
                    o.push(v);
                } else {
                    z.push(v);
                }
            }
            zeros.push(z.len());
            z.extend(o);
            cur = z;
            levels.push(bv);
        }
        WaveletMatrix {
            len: values.len(),
            bits,
            levels,
            zeros,
        }
    }

    pub(crate) fn from_levels(len: usize, bits: u32, levels: Vec<BitVec>) -> WaveletMatrix {
        let zeros = levels.iter().map(|b| b.rank0(b.len())).collect();
        WaveletMatrix {
            len,
            bits,
            levels,
            zeros,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub(crate) fn levels(&self) -> &[BitVec] {
        &self.levels
    }

    /// Value at position `i`.
    pub fn access(&self, mut i: usize) -> u32 {
        let mut v = 0u32;
        for (l, bv) in self.levels.iter().enumerate() {
            if bv.get(i) {
                v = v << 1 | 1;
                i = self.zeros[l] + bv.rank1(i);
            } else {
                v <<= 1;
                i = bv.rank0(i);
            }
        }
        v
    }

    /// Calls `f(value)` for every position in `[x1, x2)` whose value lies in
    /// `[y1, y2]`; stops early when `f` returns false. Returns whether it
    /// finished.
    pub fn report(&self, x1: usize, x2: usize, y1: u32, y2: u32, f: &mut impl FnMut(u32) -> bool) -> bool {
        if x1 >= x2 || y1 > y2 {
            return true;
        }
        self.rec(0, x1, x2, 0, y1, y2, f)
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(&self, l: usize, b: usize, e: usize, prefix: u32, y1: u32, y2: u32, f: &mut impl FnMut(u32) -> bool) -> bool {
        if b >= e {
            return true;
        }
        let rest = self.bits as usize - l;
        let lo = (prefix as u64) << rest;
        let hi = lo + (1u64 << rest) - 1;
        if hi < y1 as u64 || lo > y2 as u64 {
            return true;
        }
        if l == self.bits as usize {
            for _ in b..e {
                if !f(prefix) {
                    return false;
                }
            }
            return true;
        }
        let bv = &self.levels[l];
        let (b0, e0) = (bv.rank0(b), bv.rank0(e));
        if !self.rec(l + 1, b0, e0, prefix << 1, y1, y2, f) {
            return false;
        }
        let z = self.zeros[l];
        self.rec(l + 1, z + (b - b0), z + (e - e0), prefix << 1 | 1, y1, y2, f)
    }
}

/// The `z` points (reversed-phrase rank, suffix rank) with their phrase
/// numbers. Coordinates are 0-based ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub(crate) ys: WaveletMatrix,
    /// Phrase number of the point with suffix rank `y`.
    pub(crate) payload_by_y: Vec<u32>,
}

impl Grid {
    /// `points[k] = (x, y)` for phrase `k`; both coordinates are permutations.
    pub fn new(points: &[(u32, u32)]) -> Grid {
        let z = points.len();
        let mut by_x = vec![0u32; z];
        let mut payload_by_y = vec![0u32; z];
        for (k, &(x, y)) in points.iter().enumerate() {
            by_x[x as usize] = y;
            payload_by_y[y as usize] = k as u32;
        }
        Grid {
            ys: WaveletMatrix::new(&by_x),
            payload_by_y,
        }
    }

    pub fn len(&self) -> usize {
        self.payload_by_y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload_by_y.is_empty()
    }

    /// Point of each phrase, `(x, y)`.
    pub fn points(&self) -> Vec<(u32, u32)> {
        let mut out = vec![(0, 0); self.len()];
        for x in 0..self.len() {
            let y = self.ys.access(x);
            out[self.payload_by_y[y as usize] as usize] = (x as u32, y);
        }
        out
    }

    /// Phrases whose point lies in `[x1, x2] x [y1, y2]` (inclusive).
    pub fn report(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> Vec<u32> {
        let mut out = Vec::new();
        self.for_each(x1, x2, y1, y2, |k| {
            out.push(k);
            true
        });
        out
    }

    pub fn for_each(&self, x1: usize, x2: usize, y1: usize, y2: usize, mut f: impl FnMut(u32) -> bool) {
        if x1 > x2 || y1 > y2 || x1 >= self.len() || y1 >= self.len() {
            return;
        }
        let x2 = x2.min(self.len() - 1);
        let y2 = y2.min(self.len() - 1);
        self.ys.report(x1, x2 + 1, y1 as u32, y2 as u32, &mut |y| f(self.payload_by_y[y as usize]));
    }

    pub fn is_empty_in(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> bool {
        let mut empty = true;
        self.for_each(x1, x2, y1, y2, |_| {
            empty = false;
            false
        });
        empty
    }
}

/// One phrase source: `S[src_start..=src_end]` is copied to `phrase_start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Source {
    pub src_start: usize,
    pub src_end: usize,
    pub phrase: u32,
    pub phrase_start: usize,
}

/// Sources sorted by start, with range-maximum over their ends.
#[derive(Debug, Clone)]
pub struct SourceSet {
    pub(crate) sources: Vec<Source>,
    max_end: SparseArgMax,
}

impl PartialEq for SourceSet {
    fn eq(&self, other: &Self) -> bool {
        self.sources == other.sources
    }
}

impl Eq for SourceSet {}

impl SourceSet {
    pub fn new(mut sources: Vec<Source>) -> SourceSet {
        sources.sort_by_key(|s| (s.src_start, s.phrase));
        let max_end = SparseArgMax::new(sources.iter().map(|s| s.src_end as u64).collect());
        SourceSet { sources, max_end }
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// Calls `f` for every source with `src_start <= s` and `src_end >= e`.
    pub fn covering(&self, s: usize, e: usize, mut f: impl FnMut(&Source)) {
        let prefix = self.sources.partition_point(|x| x.src_start <= s);
        let mut stack = vec![(0usize, prefix)];
        while let Some((lo, hi)) = stack.pop() {
            let Some(j) = self.max_end.argmax(lo, hi) else {
                continue;
            };
            let src = &self.sources[j];
            if src.src_end < e {
                continue;
            }
            f(src);
            stack.push((j + 1, hi));
            stack.push((lo, j));
        }
    }

    pub fn covering_vec(&self, s: usize, e: usize) -> Vec<Source> {
        let mut out = Vec::new();
        self.covering(s, e, |x| out.push(*x));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitvec_rank() {
        let bits: Vec<bool> = (0..300).map(|i| i % 3 == 0 || i % 7 == 0).collect();
        let bv = BitVec::from_bits(bits.iter().copied());
        let mut acc = 0;
        for (i, &b) in bits.iter().enumerate() {
            assert_eq!(bv.rank1(i), acc);
            assert_eq!(bv.get(i), b);
            acc += b as usize;
        }
        assert_eq!(bv.rank1(300), acc);
    }

    #[test]
    fn wavelet_access_reconstructs() {
        let vals: Vec<u32> = (0..200).map(|i| (i * 37 + 11) % 173).collect();
        let wm = WaveletMatrix::new(&vals);
        let back: Vec<u32> = (0..vals.len()).map(|i| wm.access(i)).collect();
        assert_eq!(back, vals);
    }

    #[test]
    fn running_example_grid() {
        // phrases 1..6 -> (x, y), 1-based in the text, 0-based here
        let pts = [(2, 5), (5, 3), (3, 6), (6, 2), (4, 4), (1, 1)].map(|(x, y)| (x - 1, y - 1));
        let g = Grid::new(&pts);
        assert_eq!(g.points(), pts);
        let mut r = g.report(1, 3, 3, 5);
        r.sort();
        assert_eq!(r, [0, 2, 4]);
        assert_eq!(g.report(5, 5, 0, 5), [3]);
        assert!(g.report(4, 3, 0, 5).is_empty());
        assert!(g.is_empty_in(0, 0, 1, 5));
        assert!(!g.is_empty_in(0, 0, 0, 0));
    }

    #[test]
    fn running_example_sources() {
        let set = SourceSet::new(vec![
            Source { src_start: 1, src_end: 1, phrase: 2, phrase_start: 3 },
            Source { src_start: 2, src_end: 3, phrase: 3, phrase_start: 5 },
            Source { src_start: 3, src_end: 6, phrase: 4, phrase_start: 8 },
            Source { src_start: 2, src_end: 2, phrase: 5, phrase_start: 13 },
        ]);
        let hits = set.covering_vec(4, 5);
        assert_eq!(hits.len(), 1);
        assert_eq!((hits[0].phrase, hits[0].src_start), (4, 3));
        assert!(set.covering_vec(1, 2).is_empty());
        assert_eq!(set.covering_vec(5, 5).len(), 1);
    }
}
