//! Binary index files.
//!
//! Little-endian throughout: the magic `GSI1`, a `u32` format version, then
//! the sections below in fixed order, each prefixed by its `u64` byte length,
//! and finally the CRC32 of every preceding byte.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::boundary::{Anchor, BookmarkSet, BoundaryAccess, FpTables, Run, SPrime};
use crate::error::{Error, Result};
use crate::fingerprint::{symbol_fps, Direction, Fp, KrParams};
use crate::geometry::{BitVec, Grid, Source, SourceSet, WaveletMatrix};
use crate::grammar::{Rule, Slp, Symbol};
use crate::lz77::{Parse, Phrase};
use crate::trie::{PatriciaTree, TreeKind};

use super::{Alphabet, Mode, SelfIndex};

pub const MAGIC: &[u8; 4] = b"GSI1";
pub const FORMAT_VERSION: u32 = 1;
pub(crate) const HEADER_LEN: u64 = 8;

pub const SECTION_NAMES: [&str; 12] = [
    "PARAMS",
    "PARSE",
    "SLP_S",
    "SLP_SPRIME",
    "SPRIME_MAPS",
    "BOOKMARKS",
    "FP_BOOKMARKS",
    "TRIE_REV",
    "TRIE_SUF",
    "GRID",
    "SOURCES",
    "SYMBOL_FPS",
];

const NONE_U32: u32 = u32::MAX;
const NO_TRAILING: u16 = 0xFFFF;

#[derive(Default)]
struct Out(Vec<u8>);

impl Out {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
}

struct In<'a> {
    buf: &'a [u8],
    pos: usize,
    /// File offset of `buf[0]`.
    base: u64,
}

impl<'a> In<'a> {
    fn offset(&self) -> u64 {
        self.base + self.pos as u64
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::format(self.offset(), msg)
    }

    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < k {
            return Err(self.err("unexpected end of data"));
        }
        let s = &self.buf[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        let at = self.offset();
        usize::try_from(self.u64()?).map_err(|_| Error::format(at, "value does not fit in usize"))
    }

    /// An element count, bounded by the bytes left at `min_size` bytes each.
    fn count(&mut self, min_size: usize) -> Result<usize> {
        let at = self.offset();
        let k = self.usize()?;
        if k.saturating_mul(min_size.max(1)) > self.buf.len() - self.pos {
            return Err(Error::format(at, format!("count {k} exceeds the remaining data")));
        }
        Ok(k)
    }

    fn finish(&self, name: &str) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(self.err(format!("{} trailing bytes in section {name}", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

fn check(cond: bool, at: u64, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::format(at, msg))
    }
}

fn put_slp(o: &mut Out, g: &Slp) {
    o.usize(g.num_rules());
    o.u32(g.root().0);
    for r in g.rules() {
        match *r {
            Rule::Terminal(c) => {
                o.u8(0);
                o.u8(c);
            }
            Rule::Pair(a, b) => {
                o.u8(1);
                o.u32(a.0);
                o.u32(b.0);
            }
        }
    }
}

fn get_slp(i: &mut In) -> Result<Slp> {
    let at = i.offset();
    let r = i.count(2)?;
    let root = Symbol(i.u32()?);
    let mut rules = Vec::with_capacity(r);
    for _ in 0..r {
        rules.push(match i.u8()? {
            0 => Rule::Terminal(i.u8()?),
            1 => Rule::Pair(Symbol(i.u32()?), Symbol(i.u32()?)),
            t => return Err(i.err(format!("unknown rule tag {t}"))),
        });
    }
    Slp::new(rules, root).map_err(|e| Error::format(at, e.to_string()))
}

fn put_anchor(o: &mut Out, a: &Anchor) {
    o.u32(a.v.0);
    o.u32(a.w.map_or(NONE_U32, |w| w.0));
    o.usize(a.v_start);
}

fn get_anchor(i: &mut In, rules: usize) -> Result<Anchor> {
    let at = i.offset();
    let v = i.u32()?;
    let w = i.u32()?;
    let v_start = i.usize()?;
    check((v as usize) < rules, at, "anchor symbol out of range")?;
    check(w == NONE_U32 || (w as usize) < rules, at, "anchor symbol out of range")?;
    Ok(Anchor {
        v: Symbol(v),
        w: (w != NONE_U32).then_some(Symbol(w)),
        v_start,
    })
}

fn put_bookmarks(o: &mut Out, b: &BookmarkSet) {
    o.usize(b.levels.len());
    for &l in &b.levels {
        o.usize(l);
    }
    o.usize(b.points.len());
    for &p in &b.points {
        o.usize(p);
    }
    for a in &b.left {
        put_anchor(o, a);
    }
    for a in &b.right {
        match a {
            Some(a) => {
                o.u8(1);
                put_anchor(o, a);
            }
            None => o.u8(0),
        }
    }
}

fn get_bookmarks(i: &mut In, slp: &Slp) -> Result<BookmarkSet> {
    let at = i.offset();
    let nl = i.count(8)?;
    let levels = (0..nl).map(|_| i.usize()).collect::<Result<Vec<_>>>()?;
    check(levels.windows(2).all(|w| w[0] > w[1]), at, "bookmark levels must decrease")?;
    let np = i.count(8)?;
    let points = (0..np).map(|_| i.usize()).collect::<Result<Vec<_>>>()?;
    check(points.iter().all(|&p| 1 <= p && p <= slp.len()), at, "bookmark point out of range")?;
    let total = nl.checked_mul(np).ok_or_else(|| i.err("bookmark table too large"))?;
    let at = i.offset();
    check(total.saturating_mul(16) <= i.buf.len() - i.pos, at, "bookmark table exceeds the section")?;
    let left = (0..total).map(|_| get_anchor(i, slp.num_rules())).collect::<Result<Vec<_>>>()?;
    let mut right = Vec::with_capacity(total);
    for _ in 0..total {
        right.push(match i.u8()? {
            0 => None,
            1 => Some(get_anchor(i, slp.num_rules())?),
            t => return Err(i.err(format!("unknown anchor tag {t}"))),
        });
    }
    Ok(BookmarkSet {
        levels,
        points,
        left,
        right,
    })
}

fn put_trie(o: &mut Out, t: &PatriciaTree) {
    o.u8(match t.kind {
        TreeKind::ReversedPhrases => 0,
        TreeKind::BoundarySuffixes => 1,
    });
    o.usize(t.key.len());
    for v in 0..t.key.len() {
        o.u16(t.key[v]);
        o.u32(t.depth[v]);
        o.u32(t.lo[v]);
        o.u32(t.hi[v]);
        o.u32(t.end[v]);
    }
    o.usize(t.path_fp.len());
    for &h in &t.path_fp {
        o.u64(h);
    }
    o.usize(t.leaf_id.len());
    for &id in &t.leaf_id {
        o.u32(id);
    }
}

fn get_trie(i: &mut In, z: usize) -> Result<PatriciaTree> {
    let at = i.offset();
    let kind = match i.u8()? {
        0 => TreeKind::ReversedPhrases,
        1 => TreeKind::BoundarySuffixes,
        t => return Err(i.err(format!("unknown tree kind {t}"))),
    };
    let nodes = i.count(18)?;
    let mut t = PatriciaTree {
        kind,
        key: Vec::with_capacity(nodes),
        depth: Vec::with_capacity(nodes),
        lo: Vec::with_capacity(nodes),
        hi: Vec::with_capacity(nodes),
        end: Vec::with_capacity(nodes),
        path_fp: Vec::new(),
        leaf_id: Vec::new(),
    };
    for _ in 0..nodes {
        t.key.push(i.u16()?);
        t.depth.push(i.u32()?);
        t.lo.push(i.u32()?);
        t.hi.push(i.u32()?);
        t.end.push(i.u32()?);
    }
    let nf = i.count(8)?;
    check(nf == 0 || nf == nodes, i.offset(), "path hash count does not match the node count")?;
    t.path_fp = (0..nf).map(|_| i.u64()).collect::<Result<Vec<_>>>()?;
    let nl = i.count(4)?;
    t.leaf_id = (0..nl).map(|_| i.u32()).collect::<Result<Vec<_>>>()?;
    let ok = nodes > 0
        && nl == z
        && t.end[0] as usize == nodes
        && t.leaf_id.iter().all(|&k| (k as usize) < z)
        && (0..nodes).all(|v| {
            let e = t.end[v] as usize;
            e > v && e <= nodes && t.lo[v] <= t.hi[v] && (t.hi[v] as usize) < z
        });
    check(ok, at, "inconsistent tree")?;
    Ok(t)
}

fn put_fps(o: &mut Out, fps: &[Fp]) {
    o.usize(fps.len());
    for f in fps {
        o.u64(f.hash);
    }
}

fn get_fps(i: &mut In, slp: &Slp, params: &KrParams, dir: Direction) -> Result<Vec<Fp>> {
    let at = i.offset();
    let k = i.count(8)?;
    let stored = (0..k).map(|_| i.u64()).collect::<Result<Vec<_>>>()?;
    let fps = symbol_fps(slp, params, dir).map_err(|e| Error::format(at, e.to_string()))?;
    check(
        fps.len() == stored.len() && fps.iter().zip(&stored).all(|(f, &h)| f.hash == h),
        at,
        "symbol fingerprints disagree with the grammar",
    )?;
    Ok(fps)
}

impl SelfIndex {
    fn sections(&self) -> Vec<Vec<u8>> {
        let acc = &self.access;
        let mut out = Vec::with_capacity(SECTION_NAMES.len());

        let mut o = Out::default();
        o.u64(self.alphabet.sigma());
        o.u32(self.c);
        o.u64(acc.fp.as_ref().map_or(0, |f| f.params.q()));
        o.u64(self.seed);
        o.u8(match self.mode {
            Mode::Verify => 0,
            Mode::Fingerprint => 1,
        });
        o.u8(self.alphabet.sentinel);
        o.usize(self.n);
        o.usize(self.parse.len());
        let mut bitmap = [0u8; 32];
        for &b in &self.alphabet.bytes {
            bitmap[b as usize / 8] |= 1 << (b % 8);
        }
        o.0.extend_from_slice(&bitmap);
        out.push(o.0);

        let mut o = Out::default();
        for p in self.parse.phrases() {
            o.usize(p.start);
            o.usize(p.copy_len);
            o.usize(p.source_start);
            o.u16(p.trailing.map_or(NO_TRAILING, u16::from));
        }
        out.push(o.0);

        let mut o = Out::default();
        put_slp(&mut o, &acc.slp_s);
        out.push(o.0);

        let mut o = Out::default();
        put_slp(&mut o, &acc.slp_sprime);
        out.push(o.0);

        let mut o = Out::default();
        let sp = &acc.sprime;
        o.usize(sp.n);
        o.usize(sp.n_prime);
        o.usize(sp.radius);
        o.usize(sp.runs.len());
        for r in &sp.runs {
            o.usize(r.sprime_start);
            o.usize(r.s_start);
            o.usize(r.len);
        }
        o.usize(sp.boundary_pos.len());
        for &p in &sp.boundary_pos {
            o.usize(p);
        }
        out.push(o.0);

        let mut o = Out::default();
        put_bookmarks(&mut o, &acc.bookmarks);
        out.push(o.0);

        let mut o = Out::default();
        if let Some(fp) = &acc.fp {
            o.u8(1);
            put_bookmarks(&mut o, &fp.bookmarks);
        } else {
            o.u8(0);
        }
        out.push(o.0);

        let mut o = Out::default();
        put_trie(&mut o, &self.trie_rev);
        out.push(o.0);

        let mut o = Out::default();
        put_trie(&mut o, &self.trie_suf);
        out.push(o.0);

        let mut o = Out::default();
        let wm = &self.grid.ys;
        o.usize(wm.len());
        o.u32(wm.bits());
        for level in wm.levels() {
            for &w in level.words() {
                o.u64(w);
            }
        }
        for &k in &self.grid.payload_by_y {
            o.u32(k);
        }
        out.push(o.0);

        let mut o = Out::default();
        o.usize(self.sources.len());
        for s in self.sources.sources() {
            o.usize(s.src_start);
            o.usize(s.src_end);
            o.u32(s.phrase);
            o.usize(s.phrase_start);
        }
        out.push(o.0);

        let mut o = Out::default();
        if let Some(fp) = &acc.fp {
            o.u8(1);
            put_fps(&mut o, &fp.s_fwd);
            put_fps(&mut o, &fp.s_bwd);
            put_fps(&mut o, &fp.sprime_fwd);
            put_fps(&mut o, &fp.sprime_bwd);
        } else {
            o.u8(0);
        }
        out.push(o.0);
        out
    }

    pub(crate) fn section_sizes(&self) -> Vec<(&'static str, u64)> {
        SECTION_NAMES
            .iter()
            .zip(self.sections())
            .map(|(&name, s)| (name, s.len() as u64))
            .collect()
    }

    /// The serialized index.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        for s in self.sections() {
            buf.extend_from_slice(&(s.len() as u64).to_le_bytes());
            buf.extend_from_slice(&s);
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn save(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn save_file(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(r: &mut impl Read) -> Result<SelfIndex> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        SelfIndex::from_bytes(&buf)
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<SelfIndex> {
        SelfIndex::from_bytes(&fs::read(path)?)
    }

    pub fn from_bytes(buf: &[u8]) -> Result<SelfIndex> {
        if buf.len() < 4 || &buf[..4] != MAGIC {
            return Err(Error::format(0, "bad magic"));
        }
        if buf.len() < HEADER_LEN as usize + 4 {
            return Err(Error::format(buf.len() as u64, "file is truncated"));
        }
        let version = u32::from_le_bytes(buf[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::format(4, format!("unsupported format version {version}")));
        }
        let body_end = buf.len() - 4;
        let stored = u32::from_le_bytes(buf[body_end..].try_into().unwrap());
        if crc32fast::hash(&buf[..body_end]) != stored {
            return Err(Error::format(body_end as u64, "checksum mismatch"));
        }
        let mut outer = In {
            buf: &buf[..body_end],
            pos: HEADER_LEN as usize,
            base: 0,
        };
        let mut sections = Vec::with_capacity(SECTION_NAMES.len());
        for name in SECTION_NAMES {
            let at = outer.offset();
            let len = outer.usize()?;
            let base = outer.offset();
            let data = outer
                .take(len)
                .map_err(|_| Error::format(at, format!("section {name} runs past the end of the file")))?;
            sections.push(In { buf: data, pos: 0, base });
        }
        outer.finish("trailer")?;
        let mut it = sections.into_iter();
        let mut next = || it.next().unwrap();

        let mut i = next();
        let at = i.offset();
        let sigma = i.u64()?;
        let c = i.u32()?;
        let q = i.u64()?;
        let seed = i.u64()?;
        let mode = match i.u8()? {
            0 => Mode::Verify,
            1 => Mode::Fingerprint,
            t => return Err(i.err(format!("unknown mode {t}"))),
        };
        let sentinel = i.u8()?;
        let n = i.usize()?;
        let z = i.usize()?;
        let bitmap = i.take(32)?;
        let bytes: Vec<u8> = (0..=255u8).filter(|&b| bitmap[b as usize / 8] >> (b % 8) & 1 == 1).collect();
        i.finish("PARAMS")?;
        let alphabet = Alphabet::new(sentinel, bytes).map_err(|e| Error::format(at, e.to_string()))?;
        check(alphabet.sigma() == sigma, at, "alphabet size disagrees with the bitmap")?;
        check(c > 0 && z > 0, at, "bad parameters")?;

        let mut i = next();
        let at = i.offset();
        check(i.buf.len() == z.saturating_mul(26), at, "parse section size disagrees with z")?;
        let mut phrases = Vec::with_capacity(z);
        for _ in 0..z {
            let start = i.usize()?;
            let copy_len = i.usize()?;
            let source_start = i.usize()?;
            let t = i.u16()?;
            let trailing = match t {
                NO_TRAILING => None,
                t if t < 256 && alphabet.sigma() > t as u64 => Some(t as u8),
                _ => return Err(i.err("trailing character out of range")),
            };
            phrases.push(Phrase {
                start,
                copy_len,
                source_start,
                trailing,
            });
        }
        i.finish("PARSE")?;
        let parse = Parse::from_phrases(phrases).map_err(|e| Error::format(at, e.to_string()))?;
        check(parse.text_len() == n + 1, at, "parse length disagrees with n")?;
        let ends = parse.ends().to_vec();

        let mut i = next();
        let slp_s = get_slp(&mut i)?;
        i.finish("SLP_S")?;
        check(slp_s.len() == n + 1, i.base, "grammar length disagrees with n")?;

        let mut i = next();
        let slp_sprime = get_slp(&mut i)?;
        i.finish("SLP_SPRIME")?;

        let mut i = next();
        let at = i.offset();
        let sp_n = i.usize()?;
        let n_prime = i.usize()?;
        let radius = i.usize()?;
        let nr = i.count(24)?;
        let mut runs = Vec::with_capacity(nr);
        for _ in 0..nr {
            runs.push(Run {
                sprime_start: i.usize()?,
                s_start: i.usize()?,
                len: i.usize()?,
            });
        }
        let nb = i.count(8)?;
        let boundary_pos = (0..nb).map(|_| i.usize()).collect::<Result<Vec<_>>>()?;
        i.finish("SPRIME_MAPS")?;
        check(
            sp_n == n + 1 && n_prime == slp_sprime.len() && nb == z && radius > 0,
            at,
            "S' maps disagree with the other sections",
        )?;
        let sprime = SPrime {
            n: sp_n,
            n_prime,
            radius,
            runs,
            boundary_pos,
        };
        check(
            (0..z).all(|k| sprime.to_sprime(ends[k]) == Some(sprime.boundary_pos[k])),
            at,
            "S' boundary positions disagree with the parse",
        )?;

        let mut i = next();
        let bookmarks = get_bookmarks(&mut i, &slp_sprime)?;
        i.finish("BOOKMARKS")?;
        check(bookmarks.points == sprime.boundary_pos, i.base, "bookmark points disagree with S'")?;

        let mut i = next();
        let fp_bookmarks = match i.u8()? {
            0 => None,
            1 => Some(get_bookmarks(&mut i, &slp_sprime)?),
            t => return Err(i.err(format!("unknown tag {t}"))),
        };
        i.finish("FP_BOOKMARKS")?;
        check(
            fp_bookmarks.is_some() == (mode == Mode::Fingerprint),
            i.base,
            "fingerprint bookmarks do not match the mode",
        )?;

        let mut i = next();
        let trie_rev = get_trie(&mut i, z)?;
        i.finish("TRIE_REV")?;
        let mut i = next();
        let trie_suf = get_trie(&mut i, z)?;
        i.finish("TRIE_SUF")?;
        check(
            trie_rev.has_fingerprints() == (mode == Mode::Fingerprint)
                && trie_suf.has_fingerprints() == (mode == Mode::Fingerprint),
            i.base,
            "tree hashes do not match the mode",
        )?;

        let mut i = next();
        let at = i.offset();
        let len = i.usize()?;
        let bits = i.u32()?;
        check(len == z && (1..=32).contains(&bits), at, "bad grid shape")?;
        let words = len.div_ceil(64);
        check(
            i.buf.len() - i.pos == (bits as usize * words * 8) + z * 4,
            at,
            "grid section size disagrees with its shape",
        )?;
        let mut levels = Vec::with_capacity(bits as usize);
        for _ in 0..bits {
            let w = (0..words).map(|_| i.u64()).collect::<Result<Vec<_>>>()?;
            levels.push(BitVec::from_words(w, len));
        }
        let payload_by_y = (0..z).map(|_| i.u32()).collect::<Result<Vec<_>>>()?;
        i.finish("GRID")?;
        let grid = Grid {
            ys: WaveletMatrix::from_levels(len, bits, levels),
            payload_by_y,
        };
        let mut seen = vec![false; z];
        for k in &grid.payload_by_y {
            check((*k as usize) < z && !seen[*k as usize], at, "grid payload is not a permutation")?;
            seen[*k as usize] = true;
        }
        check(
            (0..z).all(|x| (grid.ys.access(x) as usize) < z),
            at,
            "grid coordinates out of range",
        )?;

        let mut i = next();
        let at = i.offset();
        let ns = i.count(28)?;
        let mut sources = Vec::with_capacity(ns);
        for _ in 0..ns {
            sources.push(Source {
                src_start: i.usize()?,
                src_end: i.usize()?,
                phrase: i.u32()?,
                phrase_start: i.usize()?,
            });
        }
        i.finish("SOURCES")?;
        let sources = SourceSet::new(sources);
        check(sources == super::build::sources_of(&parse), at, "sources disagree with the parse")?;

        let mut i = next();
        let at = i.offset();
        let fp = match (i.u8()?, fp_bookmarks) {
            (0, None) => None,
            (1, Some(bookmarks)) => {
                let params = KrParams::from_parts(sigma, q, c, &alphabet.fp_pairs())
                    .map_err(|e| Error::format(at, e.to_string()))?;
                Some(FpTables {
                    s_fwd: get_fps(&mut i, &slp_s, &params, Direction::Forward)?,
                    s_bwd: get_fps(&mut i, &slp_s, &params, Direction::Backward)?,
                    sprime_fwd: get_fps(&mut i, &slp_sprime, &params, Direction::Forward)?,
                    sprime_bwd: get_fps(&mut i, &slp_sprime, &params, Direction::Backward)?,
                    bookmarks,
                    params,
                })
            }
            _ => return Err(Error::format(at, "fingerprint tables do not match the mode")),
        };
        i.finish("SYMBOL_FPS")?;

        Ok(SelfIndex {
            mode,
            c,
            seed,
            alphabet,
            n,
            parse,
            access: BoundaryAccess {
                ends,
                slp_s,
                sprime,
                slp_sprime,
                bookmarks,
                fp,
            },
            trie_rev,
            trie_suf,
            grid,
            sources,
        })
    }
}
