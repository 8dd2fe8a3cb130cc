//! Access to the text around phrase boundaries.
//!
//! `S'` keeps only the characters within `radius` of a phrase boundary. Its
//! own balanced grammar carries bookmarks: for every anchored position and
//! every level `L`, the pair of parse-tree nodes flanking the position at
//! scale `L`. A substring of length `l <= L` next to the position is then
//! decomposed below those two nodes instead of from the root.
//!
//! Positions are 1-based. `S` is the sentinel-terminated text the index
//! works on.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::fingerprint::{Direction, Fp, KrParams};
use crate::grammar::{ceil_log2, Rule, Slp, Symbol};
use crate::suffix::SuffixStructures;

static ANCHOR_ROUTES: AtomicU64 = AtomicU64::new(0);
static SPRIME_ROOT_ROUTES: AtomicU64 = AtomicU64::new(0);
static GRAMMAR_ROUTES: AtomicU64 = AtomicU64::new(0);

/// Process-wide counts of how extraction and fingerprint requests were
/// served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RouteCounters {
    /// Served below bookmark anchors.
    pub anchors: u64,
    /// Served from the root of the `S'` grammar (length above every level).
    pub sprime_root: u64,
    /// Served from the root of the grammar for `S`.
    pub grammar: u64,
}

pub fn route_counters() -> RouteCounters {
    RouteCounters {
        anchors: ANCHOR_ROUTES.load(Ordering::Relaxed),
        sprime_root: SPRIME_ROOT_ROUTES.load(Ordering::Relaxed),
        grammar: GRAMMAR_ROUTES.load(Ordering::Relaxed),
    }
}

/// Window radius for a text of length `n`.
pub fn default_radius(n: usize) -> usize {
    (ceil_log2(n as u64) as usize).max(4)
}

/// A maximal run of consecutive retained positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub sprime_start: usize,
    pub s_start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SPrime {
    pub(crate) n: usize,
    pub(crate) n_prime: usize,
    pub(crate) radius: usize,
    pub(crate) runs: Vec<Run>,
    /// `S'` position of each phrase end.
    pub(crate) boundary_pos: Vec<usize>,
}

/// Keeps the characters of `text` within `radius` of a phrase end `e_k`:
/// positions `e_k - radius + 1 ..= e_k + radius`. Returns the map and the
/// text of `S'`.
pub fn build_sprime(text: &[u8], ends: &[usize], radius: usize) -> Result<(SPrime, Vec<u8>)> {
    if radius == 0 {
        return Err(Error::InvalidInput("window radius must be positive".into()));
    }
    let n = text.len();
    let mut runs: Vec<Run> = Vec::new();
    let mut out = Vec::new();
    let mut covered = 0usize; // last S position already emitted
    for &e in ends {
        let lo = (e + 1).saturating_sub(radius).max(1).max(covered + 1);
        let hi = (e + radius).min(n);
        if lo > hi {
            continue;
        }
        match runs.last_mut() {
            Some(r) if r.s_start + r.len == lo => r.len += hi - lo + 1,
            _ => runs.push(Run {
                sprime_start: out.len() + 1,
                s_start: lo,
                len: hi - lo + 1,
            }),
        }
        out.extend_from_slice(&text[lo - 1..hi]);
        covered = hi;
    }
    let mut sp = SPrime {
        n,
        n_prime: out.len(),
        radius,
        runs,
        boundary_pos: Vec::with_capacity(ends.len()),
    };
    for &e in ends {
        let p = sp.to_sprime(e).expect("phrase ends are retained");
        sp.boundary_pos.push(p);
    }
    Ok((sp, out))
}

impl SPrime {
    pub fn len(&self) -> usize {
        self.n_prime
    }

    pub fn is_empty(&self) -> bool {
        self.n_prime == 0
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn boundary_pos(&self) -> &[usize] {
        &self.boundary_pos
    }

    /// `S` position of an `S'` position.
    pub fn to_s(&self, p: usize) -> usize {
        let idx = self.runs.partition_point(|r| r.sprime_start <= p) - 1;
        let r = self.runs[idx];
        r.s_start + (p - r.sprime_start)
    }

    /// `S'` position of an `S` position, if retained.
    pub fn to_sprime(&self, s: usize) -> Option<usize> {
        let idx = self.runs.partition_point(|r| r.s_start <= s).checked_sub(1)?;
        let r = self.runs[idx];
        (s < r.s_start + r.len).then(|| r.sprime_start + (s - r.s_start))
    }

    /// Window of boundary `k` (0-based) in `S` coordinates.
    pub fn window(&self, ends: &[usize], k: usize) -> (usize, usize) {
        let e = ends[k];
        ((e + 1).saturating_sub(self.radius).max(1), (e + self.radius).min(self.n))
    }
}

/// `ceil(log2 L)` iterated from `ceil(log2 n')` down to 2.
pub fn extraction_levels(n_prime: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut l = ceil_log2(n_prime as u64) as usize;
    while l > 2 {
        out.push(l);
        l = ceil_log2(l as u64) as usize;
    }
    out.push(2);
    out
}

/// `ceil(n'^(1/2^(k+1)))` for k = 0, 1, ... down to 2.
pub fn fingerprint_levels(n_prime: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut x = (n_prime as f64).sqrt();
    loop {
        let l = x.ceil() as usize;
        if l <= 2 {
            break;
        }
        if out.last() != Some(&l) {
            out.push(l);
        }
        x = x.sqrt();
    }
    out.push(2);
    out
}

/// Two parse-tree nodes flanking a position: `v` lies on the right spine of
/// the left child of the lowest common ancestor, `w` on the left spine of its
/// right child. `w` is absent when the anchor spans a single leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchor {
    pub v: Symbol,
    pub w: Option<Symbol>,
    pub v_start: usize,
}

impl Anchor {
    /// Anchor for leaves `a <= b` of `slp`.
    pub fn between(slp: &Slp, a: usize, b: usize) -> Anchor {
        debug_assert!(1 <= a && a <= b && b <= slp.len());
        let (a0, b0) = ((a - 1) as u64, (b - 1) as u64);
        let mut s = slp.root();
        let mut st = 0u64;
        loop {
            match slp.rule(s) {
                Rule::Terminal(_) => {
                    return Anchor {
                        v: s,
                        w: None,
                        v_start: st as usize + 1,
                    }
                }
                Rule::Pair(l, r) => {
                    let mid = st + slp.exp_len(l);
                    if b0 < mid {
                        s = l;
                    } else if a0 >= mid {
                        st = mid;
                        s = r;
                    } else {
                        let (mut v, mut vs) = (l, st);
                        while let Rule::Pair(l2, r2) = slp.rule(v) {
                            let m2 = vs + slp.exp_len(l2);
                            if a0 >= m2 {
                                vs = m2;
                                v = r2;
                            } else {
                                break;
                            }
                        }
                        let mut w = r;
                        while let Rule::Pair(l2, _) = slp.rule(w) {
                            if b0 < mid + slp.exp_len(l2) {
                                w = l2;
                            } else {
                                break;
                            }
                        }
                        return Anchor {
                            v,
                            w: Some(w),
                            v_start: vs as usize + 1,
                        };
                    }
                }
            }
        }
    }

    fn span_len(&self, slp: &Slp) -> usize {
        (slp.exp_len(self.v) + self.w.map_or(0, |w| slp.exp_len(w))) as usize
    }

    /// Appends the cover of `[from, from + len)` (S' positions), which must
    /// lie inside the anchor's span.
    pub fn decompose(&self, slp: &Slp, from: usize, len: usize, out: &mut Vec<Symbol>) {
        debug_assert!(from >= self.v_start && from + len <= self.v_start + self.span_len(slp));
        if len == 0 {
            return;
        }
        let off = (from - self.v_start) as u64;
        let lv = slp.exp_len(self.v);
        let len = len as u64;
        if off < lv {
            let first = len.min(lv - off);
            slp.decompose_into(self.v, off, first, out);
            if first < len {
                slp.prefix_cover(self.w.expect("range exceeds the anchor"), len - first, out);
            }
        } else {
            slp.decompose_into(self.w.expect("range exceeds the anchor"), off - lv, len, out);
        }
    }
}

/// Anchors for a list of `S'` points at a list of levels.
///
/// For point `p` and level `L`, the left anchor spans leaves
/// `max(p - L, 1) ..= p` and the right anchor spans `p + 1 ..= min(p + 1 + L, n')`
/// (absent when `p = n'`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BookmarkSet {
    pub(crate) levels: Vec<usize>,
    pub(crate) points: Vec<usize>,
    pub(crate) left: Vec<Anchor>,
    pub(crate) right: Vec<Option<Anchor>>,
}

/// Builds bookmarks for `points` on a grammar whose height is at most
/// `balance * ceil(log2 n')`.
pub fn build_bookmarks(slp: &Slp, points: &[usize], levels: &[usize], balance: u32) -> Result<BookmarkSet> {
    if !slp.is_balanced(balance) {
        return Err(Error::Balance {
            height: slp.height(),
            bound: slp.balance_bound(balance),
        });
    }
    let n = slp.len();
    let mut left = Vec::with_capacity(points.len() * levels.len());
    let mut right = Vec::with_capacity(points.len() * levels.len());
    for &p in points {
        assert!(1 <= p && p <= n, "bookmark point {p} outside 1..={n}");
        for &l in levels {
            left.push(Anchor::between(slp, p.saturating_sub(l).max(1), p));
            right.push((p < n).then(|| Anchor::between(slp, p + 1, (p + 1 + l).min(n))));
        }
    }
    Ok(BookmarkSet {
        levels: levels.to_vec(),
        points: points.to_vec(),
        left,
        right,
    })
}

impl BookmarkSet {
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn left_anchor(&self, point: usize, level: usize) -> Anchor {
        self.left[point * self.levels.len() + level]
    }

    pub fn right_anchor(&self, point: usize, level: usize) -> Option<Anchor> {
        self.right[point * self.levels.len() + level]
    }

    /// Index of the smallest level `>= len`.
    fn level_for(&self, len: usize) -> Option<usize> {
        // levels are strictly decreasing
        let idx = self.levels.partition_point(|&l| l >= len);
        idx.checked_sub(1)
    }

    /// Cover of `S'[from..from + len)` where the range lies within `L` of
    /// point `idx`, on either side. Falls back to the grammar root when `len`
    /// exceeds every level.
    pub(crate) fn decompose(&self, slp: &Slp, idx: usize, from: usize, len: usize, out: &mut Vec<Symbol>) {
        if len == 0 {
            return;
        }
        let p = self.points[idx];
        let to = from + len - 1;
        if from <= p && to > p {
            self.decompose(slp, idx, from, p - from + 1, out);
            self.decompose(slp, idx, p + 1, to - p, out);
            return;
        }
        let reach = if to <= p { p - from + 1 } else { to - p };
        match self.level_for(reach) {
            Some(lv) => {
                let anchor = if to <= p {
                    self.left_anchor(idx, lv)
                } else {
                    self.right_anchor(idx, lv).expect("right of the last position")
                };
                ANCHOR_ROUTES.fetch_add(1, Ordering::Relaxed);
                anchor.decompose(slp, from, len, out);
            }
            None => {
                SPRIME_ROOT_ROUTES.fetch_add(1, Ordering::Relaxed);
                slp.decompose_into(slp.root(), (from - 1) as u64, len as u64, out);
            }
        }
    }
}

/// Fingerprint tables for the fingerprint search mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpTables {
    pub params: KrParams,
    pub bookmarks: BookmarkSet,
    pub s_fwd: Vec<Fp>,
    pub s_bwd: Vec<Fp>,
    pub sprime_fwd: Vec<Fp>,
    pub sprime_bwd: Vec<Fp>,
}

/// Everything needed to read the text back: the grammar for `S`, `S'` with
/// its grammar, and bookmarks at every phrase end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryAccess {
    pub(crate) ends: Vec<usize>,
    pub(crate) slp_s: Slp,
    pub(crate) sprime: SPrime,
    pub(crate) slp_sprime: Slp,
    pub(crate) bookmarks: BookmarkSet,
    pub(crate) fp: Option<FpTables>,
}

impl BoundaryAccess {
    pub fn len(&self) -> usize {
        self.slp_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ends(&self) -> &[usize] {
        &self.ends
    }

    pub fn slp_s(&self) -> &Slp {
        &self.slp_s
    }

    pub fn slp_sprime(&self) -> &Slp {
        &self.slp_sprime
    }

    pub fn sprime(&self) -> &SPrime {
        &self.sprime
    }

    pub fn bookmarks(&self) -> &BookmarkSet {
        &self.bookmarks
    }

    pub fn fp_tables(&self) -> Option<&FpTables> {
        self.fp.as_ref()
    }

    fn check(&self, s: usize, len: usize) -> Result<()> {
        self.slp_s.check_range(s, len)
    }

    /// `S'` start of `[s, s + len)` when it lies inside boundary `k`'s window.
    fn in_window(&self, k: usize, s: usize, len: usize) -> Result<usize> {
        let (lo, hi) = self.sprime.window(&self.ends, k);
        let end = s + len - 1;
        if s < lo || end > hi {
            return Err(Error::Routing {
                boundary: k,
                start: s,
                end,
            });
        }
        let p = self.sprime.boundary_pos[k];
        Ok(p + s - self.ends[k])
    }

    /// Symbols of the `S'` grammar spelling `S[s..s + len)`, for a range
    /// inside boundary `k`'s window.
    pub fn decompose(&self, k: usize, s: usize, len: usize) -> Result<Vec<Symbol>> {
        let mut out = Vec::new();
        if len > 0 {
            self.check(s, len)?;
            let from = self.in_window(k, s, len)?;
            self.bookmarks.decompose(&self.slp_sprime, k, from, len, &mut out);
        }
        Ok(out)
    }

    /// `S[s..s + len)` for a range inside boundary `k`'s window.
    pub fn extract_crossing(&self, k: usize, s: usize, len: usize) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(len);
        for sym in self.decompose(k, s, len)? {
            self.slp_sprime.expand(sym, &mut out);
        }
        Ok(out)
    }

    /// Fingerprint of `S[s..s + len)` (or of its reverse) for a range inside
    /// boundary `k`'s window, folded over the bookmark decomposition.
    pub fn fp_crossing(&self, k: usize, s: usize, len: usize, dir: Direction) -> Result<Fp> {
        let fp = self.fp.as_ref().ok_or_else(|| {
            Error::InvalidInput("index was built without fingerprint tables".into())
        })?;
        if len == 0 {
            return Ok(fp.params.empty());
        }
        self.check(s, len)?;
        let from = self.in_window(k, s, len)?;
        let mut syms = Vec::new();
        fp.bookmarks.decompose(&self.slp_sprime, k, from, len, &mut syms);
        Ok(fold(&fp.params, &syms, &fp.sprime_fwd, &fp.sprime_bwd, dir))
    }

    /// Boundary whose window should serve `[s, s + len)`: the first phrase
    /// end inside the range, if the range stays within its window.
    fn crossing_boundary(&self, s: usize, len: usize) -> Option<usize> {
        let k = self.ends.partition_point(|&e| e < s);
        let e = *self.ends.get(k)?;
        let end = s + len - 1;
        (e <= end && e - s < self.sprime.radius && end - e <= self.sprime.radius).then_some(k)
    }

    /// `S[s..s + len)`, through bookmarks when the range crosses a phrase end
    /// within its window and through the grammar for `S` otherwise.
    pub fn extract_any(&self, s: usize, len: usize) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(len);
        self.extract_into(s, len, &mut out)?;
        Ok(out)
    }

    pub fn extract_into(&self, s: usize, len: usize, out: &mut Vec<u8>) -> Result<()> {
        self.check(s, len)?;
        if len == 0 {
            return Ok(());
        }
        match self.crossing_boundary(s, len) {
            Some(k) => self.extract_near_into(k, s, len, out),
            None => {
                GRAMMAR_ROUTES.fetch_add(1, Ordering::Relaxed);
                self.slp_s.extract_into(s, len, out)
            }
        }
    }

    /// Extraction that prefers boundary `k`'s window and falls back to the
    /// grammar for `S` when the range leaves it.
    pub(crate) fn extract_near_into(&self, k: usize, s: usize, len: usize, out: &mut Vec<u8>) -> Result<()> {
        match self.in_window(k, s, len) {
            Ok(from) => {
                let mut syms = Vec::new();
                self.bookmarks.decompose(&self.slp_sprime, k, from, len, &mut syms);
                for sym in syms {
                    self.slp_sprime.expand(sym, out);
                }
                Ok(())
            }
            Err(_) => {
                GRAMMAR_ROUTES.fetch_add(1, Ordering::Relaxed);
                self.slp_s.extract_into(s, len, out)
            }
        }
    }

    /// Fingerprint of `S[s..s + len)` or of its reverse, preferring boundary
    /// `k`'s window.
    pub(crate) fn fp_near(&self, k: usize, s: usize, len: usize, dir: Direction) -> Fp {
        let fp = self.fp.as_ref().expect("fingerprint tables");
        if len == 0 {
            return fp.params.empty();
        }
        let mut syms = Vec::new();
        match self.in_window(k, s, len) {
            Ok(from) => {
                fp.bookmarks.decompose(&self.slp_sprime, k, from, len, &mut syms);
                fold(&fp.params, &syms, &fp.sprime_fwd, &fp.sprime_bwd, dir)
            }
            Err(_) => {
                GRAMMAR_ROUTES.fetch_add(1, Ordering::Relaxed);
                self.slp_s.decompose_into(self.slp_s.root(), (s - 1) as u64, len as u64, &mut syms);
                fold(&fp.params, &syms, &fp.s_fwd, &fp.s_bwd, dir)
            }
        }
    }
}

fn fold(params: &KrParams, syms: &[Symbol], fwd: &[Fp], bwd: &[Fp], dir: Direction) -> Fp {
    let mut acc = params.empty();
    match dir {
        Direction::Forward => {
            for s in syms {
                acc = params.concat(acc, fwd[s.index()]);
            }
        }
        Direction::Backward => {
            for s in syms.iter().rev() {
                acc = params.concat(acc, bwd[s.index()]);
            }
        }
    }
    acc
}

/// Arbitrary positions of `S` served from `S'`.
///
/// For a position `i`, the window `S[i - h..i + h]` has a first occurrence
/// that touches a phrase end, so it survives intact in `S'` when
/// `2h + 1 <= radius`. The position keeps a pointer to the copy of `i` inside
/// that first occurrence, and bookmarks are placed at the pointer.
#[derive(Debug, Clone)]
pub struct SpecifiedPositions {
    half: usize,
    positions: Vec<usize>,
    pointers: Vec<usize>,
    bookmarks: BookmarkSet,
}

impl SpecifiedPositions {
    /// `text` is `S`; the pointers are found with a suffix array over it.
    pub fn build(access: &BoundaryAccess, text: &[u8], positions: &[usize]) -> Result<SpecifiedPositions> {
        let n = text.len();
        let half = (access.sprime.radius - 1) / 2;
        let sfx = SuffixStructures::new(text);
        let mut pointers = Vec::with_capacity(positions.len());
        for &i in positions {
            if i == 0 || i > n {
                return Err(Error::Range { pos: i, len: 1, n });
            }
            let lo = i.saturating_sub(half).max(1);
            let hi = (i + half).min(n);
            let first = sfx.leftmost(lo - 1, hi - lo + 1) + 1;
            let target = first + (i - lo);
            let p = access
                .sprime
                .to_sprime(target)
                .filter(|_| (first..=first + hi - lo).all(|x| access.sprime.to_sprime(x).is_some()))
                .ok_or_else(|| Error::InvalidInput(format!("first occurrence around {i} is not retained")))?;
            pointers.push(p);
        }
        let levels = extraction_levels(access.sprime.n_prime);
        let bookmarks = build_bookmarks(&access.slp_sprime, &pointers, &levels, u32::MAX)?;
        Ok(SpecifiedPositions {
            half,
            positions: positions.to_vec(),
            pointers,
            bookmarks,
        })
    }

    /// Longest supported substring length around a specified position.
    pub fn reach(&self) -> usize {
        self.half
    }

    pub fn pointer(&self, idx: usize) -> usize {
        self.pointers[idx]
    }

    /// `S[s..s + len)` for a range containing specified position `idx` and
    /// no longer than [`reach`](Self::reach).
    pub fn extract(&self, access: &BoundaryAccess, idx: usize, s: usize, len: usize) -> Result<Vec<u8>> {
        let i = self.positions[idx];
        if len == 0 {
            return Ok(Vec::new());
        }
        let end = s + len - 1;
        if s > i || end < i || s + self.half < i || end > i + self.half || end > access.len() {
            return Err(Error::Routing {
                boundary: idx,
                start: s,
                end,
            });
        }
        let from = self.pointers[idx] + s - i;
        let mut syms = Vec::new();
        self.bookmarks.decompose(&access.slp_sprime, idx, from, len, &mut syms);
        let mut out = Vec::with_capacity(len);
        for sym in syms {
            access.slp_sprime.expand(sym, &mut out);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingerprint::{fp_of, symbol_fps};
    use crate::lz77;

    pub(crate) fn access_for(text: &[u8], with_fp: bool) -> BoundaryAccess {
        let parse = lz77::parse(text).unwrap();
        let ends = parse.ends().to_vec();
        let radius = default_radius(text.len());
        let (sprime, sp_text) = build_sprime(text, &ends, radius).unwrap();
        let slp_sprime = Slp::build_balanced(&sp_text).unwrap();
        let points = sprime.boundary_pos.clone();
        let bookmarks = build_bookmarks(&slp_sprime, &points, &extraction_levels(sp_text.len()), 4).unwrap();
        let slp_s = Slp::build_local(text).unwrap();
        let fp = with_fp.then(|| {
            let mut present: Vec<u8> = text.to_vec();
            present.sort_unstable();
            present.dedup();
            let pairs: Vec<(u8, u64)> = present.iter().enumerate().map(|(i, &b)| (b, i as u64)).collect();
            let params = crate::fingerprint::make_params(present.len() as u64 + 1, 1 << 20, 4, 5)
                .unwrap()
                .with_char_map(&pairs)
                .unwrap();
            FpTables {
                bookmarks: build_bookmarks(&slp_sprime, &points, &fingerprint_levels(sp_text.len()), 4).unwrap(),
                s_fwd: symbol_fps(&slp_s, &params, Direction::Forward).unwrap(),
                s_bwd: symbol_fps(&slp_s, &params, Direction::Backward).unwrap(),
                sprime_fwd: symbol_fps(&slp_sprime, &params, Direction::Forward).unwrap(),
                sprime_bwd: symbol_fps(&slp_sprime, &params, Direction::Backward).unwrap(),
                params,
            }
        });
        BoundaryAccess {
            ends,
            slp_s,
            sprime,
            slp_sprime,
            bookmarks,
            fp,
        }
    }

    #[test]
    fn levels() {
        assert_eq!(extraction_levels(14), [4, 2]);
        assert_eq!(extraction_levels(3), [2]);
        assert_eq!(extraction_levels(1 << 20), [20, 5, 3, 2]);
        assert!(extraction_levels(usize::MAX).len() <= 6);
        assert_eq!(fingerprint_levels(1 << 16), [256, 16, 4, 2]);
        assert_eq!(fingerprint_levels(14), [4, 2]);
    }

    #[test]
    fn running_example_sprime_is_identity() {
        let t = b"abaababaabaab$";
        let a = access_for(t, false);
        assert_eq!(a.sprime.radius, 4);
        assert_eq!(a.sprime.len(), 14);
        for p in 1..=14 {
            assert_eq!(a.sprime.to_s(p), p);
        }
        assert_eq!(a.sprime.boundary_pos, [1, 2, 4, 7, 12, 14]);
    }

    #[test]
    fn long_gap_is_dropped() {
        let mut t = b"ab".to_vec();
        t.extend(std::iter::repeat_n(b'a', 100));
        let ends = [2, 102];
        let (sp, text) = build_sprime(&t, &ends, 4).unwrap();
        // [1, 6] around e = 2 and [99, 102] around e = 102
        assert_eq!(text.len(), 6 + 4);
        assert_eq!(sp.runs.len(), 2);
        assert_eq!(sp.to_sprime(50), None);
        assert_eq!(sp.to_s(7), 99);
        let (all, _) = build_sprime(&t, &ends, 200).unwrap();
        assert_eq!(all.len(), t.len());
    }

    #[test]
    fn running_example_crossing() {
        let t = b"abaababaabaab$";
        let a = access_for(t, true);
        // e_3 = 4 is boundary index 2
        assert_eq!(a.extract_crossing(2, 3, 4).unwrap(), b"aaba");
        assert_eq!(a.extract_crossing(2, 4, 1).unwrap(), b"a");
        let fp = a.fp.as_ref().unwrap();
        assert_eq!(a.fp_crossing(2, 3, 4, Direction::Forward).unwrap(), fp_of(&fp.params, b"aaba").unwrap());
        assert_eq!(a.fp_crossing(2, 3, 4, Direction::Backward).unwrap(), fp_of(&fp.params, b"abaa").unwrap());
        assert_eq!(a.fp_crossing(2, 3, 0, Direction::Forward).unwrap(), fp.params.empty());
        assert_eq!(a.extract_any(1, 13).unwrap(), b"abaababaabaab");
        assert_eq!(a.extract_any(9, 2).unwrap(), b"ab");
        assert_eq!(a.extract_any(14, 1).unwrap(), b"$");
        for k in 0..a.ends.len() {
            let (lo, hi) = a.sprime.window(&a.ends, k);
            for s in lo..=hi {
                for e in s..=hi {
                    let len = e - s + 1;
                    let want = &t[s - 1..e];
                    assert_eq!(a.extract_crossing(k, s, len).unwrap(), want);
                    let syms = a.decompose(k, s, len).unwrap();
                    let mut got = Vec::new();
                    for x in &syms {
                        a.slp_sprime.expand(*x, &mut got);
                    }
                    assert_eq!(got, want);
                    assert!(syms.len() <= 4 * ceil_log2(len as u64 + 1) as usize + 4);
                    assert_eq!(a.fp_crossing(k, s, len, Direction::Forward).unwrap(), fp_of(&fp.params, want).unwrap());
                    let rev: Vec<u8> = want.iter().rev().copied().collect();
                    assert_eq!(a.fp_crossing(k, s, len, Direction::Backward).unwrap(), fp_of(&fp.params, &rev).unwrap());
                }
            }
        }
        assert!(matches!(a.extract_crossing(0, 7, 2), Err(Error::Routing { .. })));
    }

    #[test]
    fn first_leaf_anchor_is_on_left_spine() {
        let t = b"abaababaabaab$";
        let g = Slp::build_balanced(t).unwrap();
        let mut s = g.root();
        let mut spine = vec![s];
        while let Rule::Pair(l, _) = g.rule(s) {
            s = l;
            spine.push(s);
        }
        for l in extraction_levels(14) {
            let anchor = Anchor::between(&g, 1, 1 + l);
            assert_eq!(anchor.v_start, 1);
            assert!(spine.contains(&anchor.v));
        }
    }

    #[test]
    fn anchor_heights_are_logarithmic() {
        let mut x = 12345u64;
        for n in [16usize, 50, 100, 256] {
            let t: Vec<u8> = (0..n)
                .map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    b"ab"[(x >> 60) as usize % 2]
                })
                .collect();
            let g = Slp::build_balanced(&t).unwrap();
            let points: Vec<usize> = (1..=n).collect();
            let levels = extraction_levels(n);
            let b = build_bookmarks(&g, &points, &levels, 4).unwrap();
            for (pi, _) in points.iter().enumerate() {
                for (li, &l) in levels.iter().enumerate() {
                    let bound = 2 * ceil_log2(l as u64) + 3;
                    let la = b.left_anchor(pi, li);
                    assert!(g.height_of(la.v) <= bound);
                    if let Some(w) = la.w {
                        assert!(g.height_of(w) <= bound);
                    }
                    if let Some(ra) = b.right_anchor(pi, li) {
                        assert!(g.height_of(ra.v) <= bound);
                        assert!(ra.w.is_none_or(|w| g.height_of(w) <= bound));
                    }
                }
            }
        }
    }

    #[test]
    fn specified_positions() {
        let mut t = Vec::new();
        let base = b"gattacacatgattaca";
        for i in 0..40 {
            t.extend_from_slice(base);
            t.push(b"acgt"[i % 4]);
        }
        t.push(b'$');
        let a = access_for(&t, false);
        let positions: Vec<usize> = (1..=t.len()).step_by(7).collect();
        let sp = SpecifiedPositions::build(&a, &t, &positions).unwrap();
        let h = sp.reach();
        assert!(h >= 1);
        for (idx, &i) in positions.iter().enumerate() {
            for s in i.saturating_sub(h).max(1)..=i {
                for len in (i - s + 1)..=(h + 1) {
                    if s + len - 1 > t.len() || s + len - 1 > i + h {
                        break;
                    }
                    assert_eq!(sp.extract(&a, idx, s, len).unwrap(), &t[s - 1..s + len - 1], "{i} {s} {len}");
                }
            }
        }
    }

    #[test]
    fn bookmarks_need_balance() {
        let g = Slp::import("root: A\nA -> B X\nB -> C X\nC -> D X\nD -> X X\nX -> 'a'").unwrap();
        assert!(matches!(build_bookmarks(&g, &[1], &[2], 1), Err(Error::Balance { .. })));
    }
}
