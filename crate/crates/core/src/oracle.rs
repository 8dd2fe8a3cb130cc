//! Brute-force reference implementations for tests. Nothing here shares code
//! with the index; everything is a direct scan.

/// All 1-based positions where `p` occurs in `s`.
pub fn naive_locate(s: &[u8], p: &[u8]) -> Vec<usize> {
    if p.is_empty() || p.len() > s.len() {
        return Vec::new();
    }
    s.windows(p.len())
        .enumerate()
        .filter(|(_, w)| *w == p)
        .map(|(i, _)| i + 1)
        .collect()
}

/// One phrase of [`naive_lz77`]: copied length, 1-based source (0 when
/// nothing is copied) and the fresh character, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaivePhrase {
    pub start: usize,
    pub copy_len: usize,
    pub source_start: usize,
    pub trailing: Option<u8>,
}

/// Greedy parse: at each position, the longest prefix of the rest that occurs
/// wholly inside the already-parsed text, copied from its leftmost
/// occurrence, plus one fresh character.
pub fn naive_lz77(s: &[u8]) -> Vec<NaivePhrase> {
    let n = s.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let (mut best_len, mut best_src) = (0, 0);
        for src in 0..i {
            let mut l = 0;
            while i + l < n && src + l < i && s[src + l] == s[i + l] {
                l += 1;
            }
            if l > best_len {
                best_len = l;
                best_src = src + 1;
            }
        }
        let trailing = s.get(i + best_len).copied();
        out.push(NaivePhrase {
            start: i + 1,
            copy_len: best_len,
            source_start: best_src,
            trailing,
        });
        i += best_len + 1;
    }
    out
}

/// 1-based end of every phrase.
pub fn naive_ends(phrases: &[NaivePhrase]) -> Vec<usize> {
    phrases
        .iter()
        .map(|p| p.start + p.copy_len + usize::from(p.trailing.is_some()) - 1)
        .collect()
}

/// Occurrences of `p` split into those whose interval contains a phrase end
/// (primary) and the rest (secondary).
pub fn naive_classify(s: &[u8], ends: &[usize], p: &[u8]) -> (Vec<usize>, Vec<usize>) {
    let (mut primary, mut secondary) = (Vec::new(), Vec::new());
    let mut sorted = ends.to_vec();
    sorted.sort_unstable();
    for pos in naive_locate(s, p) {
        let last = pos + p.len() - 1;
        // first end at or after pos
        let k = sorted.partition_point(|&e| e < pos);
        if k < sorted.len() && sorted[k] <= last {
            primary.push(pos);
        } else {
            secondary.push(pos);
        }
    }
    (primary, secondary)
}

/// Indices of the points inside `[x1, x2] x [y1, y2]`, ascending.
pub fn brute_report(points: &[(u32, u32)], x1: u32, x2: u32, y1: u32, y2: u32) -> Vec<u32> {
    points
        .iter()
        .enumerate()
        .filter(|(_, &(x, y))| x1 <= x && x <= x2 && y1 <= y && y <= y2)
        .map(|(k, _)| k as u32)
        .collect()
}

/// Indices of the intervals `[a, b]` with `a <= s` and `b >= e`, ascending.
pub fn brute_covering(intervals: &[(usize, usize)], s: usize, e: usize) -> Vec<usize> {
    intervals
        .iter()
        .enumerate()
        .filter(|(_, &(a, b))| a <= s && b >= e)
        .map(|(k, _)| k)
        .collect()
}

fn occurs(s: &[u8], p: &[u8]) -> bool {
    p.is_empty() || s.windows(p.len()).any(|w| w == p)
}

/// Rotations `j` (0-based) with `p[j..] p[..j]` occurring in `s`.
pub fn naive_cyclic(s: &[u8], p: &[u8]) -> Vec<usize> {
    (0..p.len())
        .filter(|&j| {
            let mut r = p[j..].to_vec();
            r.extend_from_slice(&p[..j]);
            occurs(s, &r)
        })
        .collect()
}

/// Maximal intervals `(h, j)` (1-based, inclusive) of `p` whose substring
/// occurs in `s` while neither one-character extension does.
pub fn naive_maximal(s: &[u8], p: &[u8]) -> Vec<(usize, usize)> {
    let m = p.len();
    let mut table = vec![vec![false; m + 1]; m + 1];
    for h in 0..m {
        for j in h + 1..=m {
            table[h][j] = occurs(s, &p[h..j]);
        }
    }
    let mut out = Vec::new();
    for h in 0..m {
        for j in h + 1..=m {
            if table[h][j] && !(h > 0 && table[h - 1][j]) && !(j < m && table[h][j + 1]) {
                out.push((h + 1, j));
            }
        }
    }
    out
}
