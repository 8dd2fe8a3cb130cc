//! Patricia trees over the reversed phrases and over the suffixes that start
//! right after phrase ends.
//!
//! Only the first character and the depth of each node are stored; labels
//! are read back from the text through a [`Labels`] source. Nodes live in
//! preorder arrays, so every subtree is a contiguous node range and covers a
//! contiguous range of leaf ranks.
//!
//! Characters are the rank codes of the index text; a stored key is the
//! code plus one, with 0 reserved for the end-of-string marker, which sorts
//! below every character.

/// Which strings a tree indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    /// `reverse(phrase_k)` followed by the end marker.
    ReversedPhrases,
    /// `S[e_k + 1..n]` followed by the end marker; the last one is empty.
    BoundarySuffixes,
}

/// Reads prefixes of indexed strings. `id` is the payload stored at a leaf
/// (the phrase number).
pub trait Labels {
    /// Appends the first `len` characters of string `id`.
    fn extract(&self, id: u32, len: usize, out: &mut Vec<u8>);

    /// Fingerprint hash of the first `len` characters of string `id`.
    fn fp(&self, id: u32, len: usize) -> u64;
}

/// Inclusive range of leaf ranks (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LexRange {
    pub lo: usize,
    pub hi: usize,
}

impl LexRange {
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatriciaTree {
    pub(crate) kind: TreeKind,
    pub(crate) key: Vec<u16>,
    /// Path length; a leaf counts its end marker.
    pub(crate) depth: Vec<u32>,
    pub(crate) lo: Vec<u32>,
    pub(crate) hi: Vec<u32>,
    /// One past the last node of the subtree.
    pub(crate) end: Vec<u32>,
    /// Hash of each node's path label (without the end marker); empty unless
    /// built for fingerprint search.
    pub(crate) path_fp: Vec<u64>,
    /// Payload of each leaf, by rank.
    pub(crate) leaf_id: Vec<u32>,
}

/// The nodes met while searching a string, with the length of the longest
/// prefix of the string that some indexed string starts with.
#[derive(Debug, Clone, Default)]
pub struct Walk {
    nodes: Vec<(u32, u32, u32)>,
    matched: usize,
}

impl Walk {
    /// Length of the longest matched prefix.
    pub fn matched(&self) -> usize {
        self.matched
    }

    /// Ranks of the strings that start with the first `t` characters of the
    /// searched string.
    pub fn range_at(&self, t: usize) -> Option<LexRange> {
        if t > self.matched {
            return None;
        }
        let idx = self.nodes.partition_point(|&(d, _, _)| (d as usize) < t);
        let &(_, lo, hi) = self.nodes.get(idx)?;
        Some(LexRange {
            lo: lo as usize,
            hi: hi as usize,
        })
    }
}

struct TempNode {
    depth: u32,
    children: Vec<u32>,
    leaf: Option<u32>,
}

impl PatriciaTree {
    /// Builds the tree for strings already sorted (end marker lowest).
    /// `lens[r]` is the length of the rank-`r` string, `lcps[r]` its longest
    /// common prefix with the rank `r - 1` string, and `char_at(r, d)` its
    /// `d`-th character (0-based, `d < lens[r]`).
    pub(crate) fn from_sorted(
        kind: TreeKind,
        ids: Vec<u32>,
        lens: &[usize],
        lcps: &[usize],
        char_at: impl Fn(usize, usize) -> u8,
    ) -> PatriciaTree {
        let z = ids.len();
        assert!(z > 0 && lens.len() == z && lcps.len() == z);
        let mut nodes = vec![TempNode {
            depth: 0,
            children: Vec::new(),
            leaf: None,
        }];
        let mut stack: Vec<u32> = vec![0];
        for r in 0..z {
            let l = if r == 0 { 0 } else { lcps[r] as u32 };
            let mut last = None;
            while nodes[*stack.last().unwrap() as usize].depth > l {
                last = stack.pop();
            }
            let top = *stack.last().unwrap();
            if nodes[top as usize].depth < l {
                let last = last.expect("sorted input with consistent lcps");
                let mid = nodes.len() as u32;
                nodes.push(TempNode {
                    depth: l,
                    children: vec![last],
                    leaf: None,
                });
                *nodes[top as usize].children.last_mut().unwrap() = mid;
                stack.push(mid);
            }
            let parent = *stack.last().unwrap();
            let leaf = nodes.len() as u32;
            nodes.push(TempNode {
                depth: lens[r] as u32 + 1,
                children: Vec::new(),
                leaf: Some(r as u32),
            });
            nodes[parent as usize].children.push(leaf);
            stack.push(leaf);
        }
        // preorder flattening
        let mut t = PatriciaTree {
            kind,
            key: Vec::with_capacity(nodes.len()),
            depth: Vec::with_capacity(nodes.len()),
            lo: Vec::with_capacity(nodes.len()),
            hi: Vec::with_capacity(nodes.len()),
            end: Vec::with_capacity(nodes.len()),
            path_fp: Vec::new(),
            leaf_id: ids,
        };
        // (temp node, parent depth, exit marker)
        let mut work: Vec<(u32, u32, bool)> = vec![(0, 0, false)];
        let mut pos_of: Vec<u32> = vec![0; nodes.len()];
        let mut next_leaf = 0u32;
        while let Some((v, parent_depth, exit)) = work.pop() {
            let node = &nodes[v as usize];
            if exit {
                let p = pos_of[v as usize] as usize;
                t.end[p] = t.key.len() as u32;
                t.hi[p] = next_leaf - 1;
                continue;
            }
            let p = t.key.len();
            pos_of[v as usize] = p as u32;
            let key = if v == 0 {
                0
            } else {
                // every string under v shares its first `depth(v)` characters
                let rank = first_leaf(&nodes, v) as usize;
                if parent_depth as usize >= lens[rank] {
                    0
                } else {
                    char_at(rank, parent_depth as usize) as u16 + 1
                }
            };
            t.key.push(key);
            t.depth.push(node.depth);
            t.lo.push(next_leaf);
            t.hi.push(0);
            t.end.push(0);
            if node.leaf.is_some() {
                next_leaf += 1;
            }
            work.push((v, parent_depth, true));
            for &c in node.children.iter().rev() {
                work.push((c, node.depth, false));
            }
        }
        t
    }

    /// Builds a tree over explicit strings (any order); ids are the input
    /// positions.
    pub fn from_strings(kind: TreeKind, strings: &[Vec<u8>]) -> PatriciaTree {
        let mut order: Vec<u32> = (0..strings.len() as u32).collect();
        order.sort_by(|&a, &b| strings[a as usize].cmp(&strings[b as usize]));
        let lens: Vec<usize> = order.iter().map(|&i| strings[i as usize].len()).collect();
        let lcps: Vec<usize> = (0..order.len())
            .map(|r| {
                if r == 0 {
                    0
                } else {
                    let (a, b) = (&strings[order[r - 1] as usize], &strings[order[r] as usize]);
                    a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count()
                }
            })
            .collect();
        let strs: Vec<&Vec<u8>> = order.iter().map(|&i| &strings[i as usize]).collect();
        PatriciaTree::from_sorted(kind, order.clone(), &lens, &lcps, |r, d| strs[r][d])
    }

    /// Attaches path-label hashes, `fp(id, len)` hashing a string prefix.
    pub(crate) fn attach_fps(&mut self, fp: impl Fn(u32, usize) -> u64) {
        self.path_fp = (0..self.key.len())
            .map(|v| {
                let len = self.label_len(v);
                fp(self.leaf_id[self.lo[v] as usize], len)
            })
            .collect();
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    pub fn num_nodes(&self) -> usize {
        self.key.len()
    }

    /// Number of indexed strings.
    pub fn num_leaves(&self) -> usize {
        self.leaf_id.len()
    }

    /// Payloads in lexicographic order of their strings.
    pub fn leaf_order(&self) -> &[u32] {
        &self.leaf_id
    }

    pub fn has_fingerprints(&self) -> bool {
        !self.path_fp.is_empty()
    }

    fn is_leaf(&self, v: usize) -> bool {
        v != 0 && self.end[v] as usize == v + 1
    }

    /// Path label length without the end marker.
    fn label_len(&self, v: usize) -> usize {
        let d = self.depth[v] as usize;
        if self.is_leaf(v) {
            d - 1
        } else {
            d
        }
    }

    fn range_of(&self, v: usize) -> (u32, u32, u32) {
        (self.label_len(v) as u32, self.lo[v], self.hi[v])
    }

    fn child(&self, v: usize, key: u16) -> Option<usize> {
        let mut c = v + 1;
        let end = self.end[v] as usize;
        while c < end {
            if self.key[c] == key {
                return Some(c);
            }
            c = self.end[c] as usize;
        }
        None
    }

    fn full(&self) -> LexRange {
        LexRange {
            lo: 0,
            hi: self.leaf_id.len() - 1,
        }
    }

    /// Blind descent followed by one comparison against a leaf below the
    /// last node reached.
    pub fn walk_verify(&self, query: &[u8], labels: &impl Labels) -> Walk {
        let m = query.len();
        let mut walk = Walk {
            nodes: vec![self.range_of(0)],
            matched: 0,
        };
        let mut v = 0;
        loop {
            let d = self.label_len(v);
            if d >= m || self.is_leaf(v) {
                break;
            }
            match self.child(v, query[d] as u16 + 1) {
                Some(c) => {
                    walk.nodes.push(self.range_of(c));
                    v = c;
                }
                None => break,
            }
        }
        let cap = m.min(self.label_len(v));
        if cap > 0 {
            let mut buf = Vec::with_capacity(cap);
            labels.extract(self.leaf_id[self.lo[v] as usize], cap, &mut buf);
            walk.matched = buf.iter().zip(query).take_while(|(a, b)| a == b).count();
        }
        walk
    }

    /// Descent comparing path-label hashes with `prefix_hash(t)`, the hash of
    /// the first `t` query characters. With `need_lcp` the matched length is
    /// exact (up to collisions); otherwise it is only exact when the whole
    /// query matches.
    pub fn walk_fp(
        &self,
        query: &[u8],
        prefix_hash: impl Fn(usize) -> u64,
        labels: &impl Labels,
        need_lcp: bool,
    ) -> Walk {
        assert!(self.has_fingerprints(), "tree built without fingerprints");
        let m = query.len();
        let mut walk = Walk {
            nodes: vec![self.range_of(0)],
            matched: 0,
        };
        let mut v = 0;
        let lcp_in = |c: usize, lo: usize, hi: usize| -> usize {
            // largest t in [lo, hi] whose prefixes agree; lo is known to agree
            if !need_lcp {
                return lo;
            }
            let id = self.leaf_id[self.lo[c] as usize];
            let (mut good, mut bad) = (lo, hi + 1);
            while bad - good > 1 {
                let mid = good + (bad - good) / 2;
                if labels.fp(id, mid) == prefix_hash(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        };
        loop {
            let d = self.label_len(v);
            if d >= m {
                walk.matched = m;
                break;
            }
            if self.is_leaf(v) {
                walk.matched = d;
                break;
            }
            let Some(c) = self.child(v, query[d] as u16 + 1) else {
                walk.matched = d;
                break;
            };
            walk.nodes.push(self.range_of(c));
            let lab = self.label_len(c);
            if lab <= m {
                if self.path_fp[c] == prefix_hash(lab) {
                    v = c;
                    continue;
                }
                walk.matched = lcp_in(c, d + 1, lab - 1);
            } else {
                let id = self.leaf_id[self.lo[c] as usize];
                walk.matched = if labels.fp(id, m) == prefix_hash(m) {
                    m
                } else {
                    lcp_in(c, d + 1, m - 1)
                };
            }
            break;
        }
        walk
    }

    /// Ranks of the strings having `query` as a prefix.
    pub fn search_verify(&self, query: &[u8], labels: &impl Labels) -> Option<LexRange> {
        if query.is_empty() {
            return Some(self.full());
        }
        self.walk_verify(query, labels).range_at(query.len())
    }

    pub fn search_fp(&self, query: &[u8], prefix_hash: impl Fn(usize) -> u64, labels: &impl Labels) -> Option<LexRange> {
        if query.is_empty() {
            return Some(self.full());
        }
        self.walk_fp(query, prefix_hash, labels, false).range_at(query.len())
    }
}

fn first_leaf(nodes: &[TempNode], mut v: u32) -> u32 {
    loop {
        let n = &nodes[v as usize];
        if let Some(r) = n.leaf {
            return r;
        }
        v = n.children[0];
    }
}

/// Hash function over label bytes.
pub type LabelHash<'a> = &'a dyn Fn(&[u8]) -> u64;

/// Strings held in memory, for tests and small examples.
pub struct VecLabels<'a> {
    pub strings: &'a [Vec<u8>],
    pub hash: Option<LabelHash<'a>>,
}

impl Labels for VecLabels<'_> {
    fn extract(&self, id: u32, len: usize, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.strings[id as usize][..len]);
    }

    fn fp(&self, id: u32, len: usize) -> u64 {
        (self.hash.expect("hash function"))(&self.strings[id as usize][..len])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingerprint::{fp_of, make_params};

    fn codes(s: &str) -> Vec<u8> {
        // '$' < 'a' < 'b'
        s.bytes()
            .map(|b| match b {
                b'$' => 0,
                b'a' => 1,
                b'b' => 2,
                _ => 3,
            })
            .collect()
    }

    fn suffixes() -> Vec<Vec<u8>> {
        // phrases 1..6 of the running example; suffix after each phrase end
        ["baababaabaab$", "aababaabaab$", "babaabaab$", "aabaab$", "b$", ""]
            .iter()
            .map(|s| codes(s))
            .collect()
    }

    fn reversed() -> Vec<Vec<u8>> {
        ["a", "b", "aa", "bab", "aabaa", "$b"].iter().map(|s| codes(s)).collect()
    }

    #[test]
    fn running_example_orders() {
        let t = PatriciaTree::from_strings(TreeKind::ReversedPhrases, &reversed());
        assert_eq!(t.leaf_order(), [5, 0, 2, 4, 1, 3]);
        let t = PatriciaTree::from_strings(TreeKind::BoundarySuffixes, &suffixes());
        assert_eq!(t.leaf_order(), [5, 3, 1, 4, 0, 2]);
    }

    #[test]
    fn structure_invariants() {
        for strings in [suffixes(), reversed()] {
            let t = PatriciaTree::from_strings(TreeKind::BoundarySuffixes, &strings);
            for v in 1..t.num_nodes() {
                if !t.is_leaf(v) {
                    let mut kids = Vec::new();
                    let mut c = v + 1;
                    while c < t.end[v] as usize {
                        kids.push(t.key[c]);
                        assert!(t.depth[c] > t.depth[v]);
                        c = t.end[c] as usize;
                    }
                    assert!(kids.len() >= 2);
                    assert!(kids.windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }

    #[test]
    fn searches() {
        let sfx = suffixes();
        let rev = reversed();
        let ts = PatriciaTree::from_strings(TreeKind::BoundarySuffixes, &sfx);
        let tr = PatriciaTree::from_strings(TreeKind::ReversedPhrases, &rev);
        let ls = VecLabels { strings: &sfx, hash: None };
        let lr = VecLabels { strings: &rev, hash: None };
        assert_eq!(ts.search_verify(&codes("b"), &ls), Some(LexRange { lo: 3, hi: 5 }));
        assert_eq!(tr.search_verify(&codes("a"), &lr), Some(LexRange { lo: 1, hi: 3 }));
        assert_eq!(ts.search_verify(&[3, 3], &ls), None);
        assert_eq!(ts.search_verify(&[], &ls), Some(LexRange { lo: 0, hi: 5 }));
    }

    #[test]
    fn walks_agree_with_brute_force() {
        let params = make_params(4, 1 << 20, 4, 11).unwrap();
        let hash = |s: &[u8]| fp_of(&params, s).unwrap().hash;
        let mut x = 99u64;
        let mut rnd = |k: u64| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 33) % k
        };
        for _ in 0..60 {
            let count = 1 + rnd(40) as usize;
            let mut strings: Vec<Vec<u8>> = Vec::new();
            while strings.len() < count {
                let len = rnd(9) as usize;
                let s: Vec<u8> = (0..len).map(|_| rnd(3) as u8).collect();
                if !strings.contains(&s) {
                    strings.push(s);
                }
            }
            let mut t = PatriciaTree::from_strings(TreeKind::BoundarySuffixes, &strings);
            let labels = VecLabels { strings: &strings, hash: Some(&hash) };
            t.attach_fps(|id, len| hash(&strings[id as usize][..len]));
            let mut sorted = strings.clone();
            sorted.sort();
            for _ in 0..80 {
                let len = rnd(10) as usize;
                let q: Vec<u8> = (0..len).map(|_| rnd(3) as u8).collect();
                let ph = |t: usize| hash(&q[..t]);
                let wv = t.walk_verify(&q, &labels);
                let wf = t.walk_fp(&q, ph, &labels, true);
                assert_eq!(wv.matched(), wf.matched());
                for k in 0..=len {
                    let ranks: Vec<usize> = (0..sorted.len()).filter(|&r| sorted[r].starts_with(&q[..k])).collect();
                    let want = ranks.first().map(|&lo| LexRange { lo, hi: *ranks.last().unwrap() });
                    assert_eq!(wv.range_at(k), want, "{strings:?} {q:?} {k}");
                    assert_eq!(wf.range_at(k), want);
                }
                let want = wv.range_at(len);
                assert_eq!(t.search_verify(&q, &labels), if len == 0 { Some(t.full()) } else { want });
                assert_eq!(t.search_fp(&q, ph, &labels), t.search_verify(&q, &labels));
            }
        }
    }

    #[test]
    fn single_string() {
        let strings = vec![codes("ab$")];
        let t = PatriciaTree::from_strings(TreeKind::BoundarySuffixes, &strings);
        assert_eq!(t.num_leaves(), 1);
        let l = VecLabels { strings: &strings, hash: None };
        assert_eq!(t.search_verify(&codes("ab"), &l), Some(LexRange { lo: 0, hi: 0 }));
        assert_eq!(t.search_verify(&codes("ab$a"), &l), None);
    }
}
