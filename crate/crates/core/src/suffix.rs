//! Suffix array, inverse suffix array and LCP array with range-minimum
//! support, shared by the LZ77 parser and the Patricia tree builder.

use crate::rmq::BlockMin;

pub(crate) struct SuffixStructures {
    n: usize,
    isa: Vec<u32>,
    // lcp[r] = lcp(sa[r - 1], sa[r]); lcp[0] = 0
    lcp: BlockMin,
    sa: BlockMin,
}

impl SuffixStructures {
    pub(crate) fn new(text: &[u8]) -> Self {
        let n = text.len();
        assert!(n < i32::MAX as usize, "text too long for 32-bit suffix arrays");
        let mut raw = vec![0i32; n];
        if n > 0 {
            divsufsort::sort_in_place(text, &mut raw);
        }
        let sa: Vec<u32> = raw.into_iter().map(|x| x as u32).collect();
        let mut isa = vec![0u32; n];
        for (r, &p) in sa.iter().enumerate() {
            isa[p as usize] = r as u32;
        }
        let lcp = kasai(text, &sa, &isa);
        SuffixStructures {
            n,
            isa,
            lcp: BlockMin::new(lcp),
            sa: BlockMin::new(sa),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    pub(crate) fn rank(&self, pos: usize) -> usize {
        self.isa[pos] as usize
    }

    pub(crate) fn suffix_at(&self, rank: usize) -> usize {
        self.sa.values()[rank] as usize
    }

    /// Longest common prefix of the suffixes at ranks `a` and `b`.
    pub(crate) fn lcp_ranks(&self, a: usize, b: usize) -> usize {
        if a == b {
            return self.n - self.suffix_at(a);
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.lcp.min(lo + 1, hi + 1) as usize
    }

    /// Longest common prefix of the suffixes starting at positions `i` and `j`.
    pub(crate) fn lcp(&self, i: usize, j: usize) -> usize {
        if i == self.n || j == self.n {
            return 0;
        }
        self.lcp_ranks(self.rank(i), self.rank(j))
    }

    /// Largest lcp between the suffix at `pos` and any other suffix.
    pub(crate) fn max_neighbour_lcp(&self, pos: usize) -> usize {
        let r = self.rank(pos);
        let lcp = self.lcp.values();
        let left = lcp[r];
        let right = if r + 1 < self.n { lcp[r + 1] } else { 0 };
        left.max(right) as usize
    }

    /// Rank interval `[lo, hi]` of suffixes sharing at least `len` characters
    /// with the suffix at `pos`.
    pub(crate) fn interval(&self, pos: usize, len: usize) -> (usize, usize) {
        let r = self.rank(pos);
        if len == 0 {
            return (0, self.n - 1);
        }
        let th = len.min(u32::MAX as usize) as u32;
        let lo = self.lcp.prev_less(r, th).unwrap_or(0);
        let hi = match self.lcp.next_less(r + 1, th) {
            Some(j) => j - 1,
            None => self.n - 1,
        };
        (lo, hi)
    }

    /// Leftmost starting position of an occurrence of `text[pos..pos + len]`.
    pub(crate) fn leftmost(&self, pos: usize, len: usize) -> usize {
        let (lo, hi) = self.interval(pos, len);
        self.sa.min(lo, hi + 1) as usize
    }
}

fn kasai(text: &[u8], sa: &[u32], isa: &[u32]) -> Vec<u32> {
    let n = text.len();
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = isa[i] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa[r - 1] as usize;
        while i + h < n && j + h < n && text[i + h] == text[j + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_lcp(t: &[u8], i: usize, j: usize) -> usize {
        t[i..].iter().zip(&t[j..]).take_while(|(a, b)| a == b).count()
    }

    #[test]
    fn lcp_and_leftmost_match_naive() {
        let t = b"abaababaabaab$";
        let s = SuffixStructures::new(t);
        for i in 0..t.len() {
            for j in 0..t.len() {
                assert_eq!(s.lcp(i, j), naive_lcp(t, i, j), "{i} {j}");
            }
            for len in 1..=(t.len() - i) {
                let pat = &t[i..i + len];
                let first = (0..t.len()).find(|&p| t[p..].starts_with(pat)).unwrap();
                assert_eq!(s.leftmost(i, len), first);
            }
        }
    }
}
