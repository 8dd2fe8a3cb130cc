//! Index construction.

use crate::boundary::{
    build_bookmarks, build_sprime, default_radius, extraction_levels, fingerprint_levels, BoundaryAccess, FpTables,
};
use crate::error::{Error, Result};
use crate::fingerprint::{make_params, symbol_fps, Direction};
use crate::geometry::{Grid, Source, SourceSet};
use crate::grammar::{Rule, Slp, Symbol};
use crate::lz77::{self, Parse};
use crate::suffix::SuffixStructures;
use crate::trie::{Labels, PatriciaTree, TreeKind};

use super::{Alphabet, BuildOptions, Mode, SelfIndex};

/// Smallest text length used to size the fingerprint modulus, so that short
/// texts still get a modulus far above the number of compared strings.
pub(crate) const MODULUS_FLOOR: u64 = 1 << 16;

/// Suffixes `S[e_k + 1..n]` read through boundary `k`'s window.
pub(crate) struct SufLabels<'a>(pub(crate) &'a BoundaryAccess);

/// `reverse(phrase_k)` read backwards from `e_k`.
pub(crate) struct RevLabels<'a>(pub(crate) &'a BoundaryAccess);

impl Labels for SufLabels<'_> {
    fn extract(&self, id: u32, len: usize, out: &mut Vec<u8>) {
        let k = id as usize;
        self.0
            .extract_near_into(k, self.0.ends[k] + 1, len, out)
            .expect("suffix label within the text");
    }

    fn fp(&self, id: u32, len: usize) -> u64 {
        let k = id as usize;
        self.0.fp_near(k, self.0.ends[k] + 1, len, Direction::Forward).hash
    }
}

impl Labels for RevLabels<'_> {
    fn extract(&self, id: u32, len: usize, out: &mut Vec<u8>) {
        let k = id as usize;
        let from = out.len();
        self.0
            .extract_near_into(k, self.0.ends[k] + 1 - len, len, out)
            .expect("phrase label within the text");
        out[from..].reverse();
    }

    fn fp(&self, id: u32, len: usize) -> u64 {
        let k = id as usize;
        self.0.fp_near(k, self.0.ends[k] + 1 - len, len, Direction::Backward).hash
    }
}

/// Maps an imported grammar for the text onto alphabet codes and appends the
/// sentinel.
fn import_grammar(slp: &Slp, text: &[u8], alphabet: &Alphabet) -> Result<Slp> {
    let report = slp.validate(Some(text));
    if !report.is_valid() {
        let first = report.violations.first().map(|v| v.to_string()).unwrap_or_default();
        return Err(Error::InvalidGrammar(format!("grammar does not generate the text: {first}")));
    }
    let mut rules = Vec::with_capacity(slp.num_rules() + 2);
    for r in slp.rules() {
        rules.push(match *r {
            Rule::Terminal(b) => Rule::Terminal(
                alphabet
                    .code(b)
                    .ok_or_else(|| Error::InvalidGrammar(format!("terminal {b:#04x} does not occur in the text")))?,
            ),
            pair => pair,
        });
    }
    let sentinel = Symbol(rules.len() as u32);
    rules.push(Rule::Terminal(0));
    let root = Symbol(rules.len() as u32);
    rules.push(Rule::Pair(slp.root(), sentinel));
    Slp::new(rules, root)
}

fn grammar_for(codes: &[u8], c: u32) -> Result<Slp> {
    let g = Slp::build_local(codes)?;
    if g.is_balanced(c) {
        return Ok(g);
    }
    log::debug!("local grammar height {} over bound; rebuilding by halving", g.height());
    Slp::build_balanced(codes)
}

fn suffix_trie(codes: &[u8], sfx: &SuffixStructures, ends: &[usize]) -> (PatriciaTree, Vec<u32>) {
    let n = codes.len();
    // suffix of phrase k starts at 0-based e_k; the last one is empty
    let mut ids: Vec<u32> = (0..ends.len() as u32).collect();
    ids.sort_by_key(|&k| {
        let p = ends[k as usize];
        if p == n {
            0
        } else {
            sfx.rank(p) + 1
        }
    });
    let starts: Vec<usize> = ids.iter().map(|&k| ends[k as usize]).collect();
    let lens: Vec<usize> = starts.iter().map(|&p| n - p).collect();
    let lcps: Vec<usize> = (0..starts.len())
        .map(|r| if r == 0 { 0 } else { sfx.lcp(starts[r - 1], starts[r]) })
        .collect();
    let ranks = ranks_of(&ids);
    let tree = PatriciaTree::from_sorted(TreeKind::BoundarySuffixes, ids, &lens, &lcps, |r, d| codes[starts[r] + d]);
    (tree, ranks)
}

fn reversed_trie(codes: &[u8], parse: &Parse) -> (PatriciaTree, Vec<u32>) {
    let n = codes.len();
    let rev: Vec<u8> = codes.iter().rev().copied().collect();
    let sfx = SuffixStructures::new(&rev);
    let ends = parse.ends();
    // reverse(phrase_k) = rev[n - e_k .. n - e_k + len_k]
    let start = |k: usize| n - ends[k];
    let len = |k: usize| parse.phrase(k).len();
    let lcp_of = |a: usize, b: usize| sfx.lcp(start(a), start(b)).min(len(a)).min(len(b));
    let mut ids: Vec<u32> = (0..ends.len() as u32).collect();
    ids.sort_by(|&a, &b| {
        let (a, b) = (a as usize, b as usize);
        let l = lcp_of(a, b);
        if l == len(a) || l == len(b) {
            len(a).cmp(&len(b))
        } else {
            rev[start(a) + l].cmp(&rev[start(b) + l])
        }
    });
    let lens: Vec<usize> = ids.iter().map(|&k| len(k as usize)).collect();
    let lcps: Vec<usize> = (0..ids.len())
        .map(|r| {
            if r == 0 {
                0
            } else {
                lcp_of(ids[r - 1] as usize, ids[r] as usize)
            }
        })
        .collect();
    let ranks = ranks_of(&ids);
    let starts: Vec<usize> = ids.iter().map(|&k| start(k as usize)).collect();
    let tree = PatriciaTree::from_sorted(TreeKind::ReversedPhrases, ids, &lens, &lcps, |r, d| rev[starts[r] + d]);
    (tree, ranks)
}

fn ranks_of(ids: &[u32]) -> Vec<u32> {
    let mut ranks = vec![0u32; ids.len()];
    for (r, &k) in ids.iter().enumerate() {
        ranks[k as usize] = r as u32;
    }
    ranks
}

pub(crate) fn sources_of(parse: &Parse) -> SourceSet {
    SourceSet::new(
        parse
            .phrases()
            .iter()
            .enumerate()
            .filter(|(_, p)| p.copy_len > 0)
            .map(|(k, p)| Source {
                src_start: p.source_start,
                src_end: p.source_start + p.copy_len - 1,
                phrase: k as u32,
                phrase_start: p.start,
            })
            .collect(),
    )
}

impl SelfIndex {
    /// Builds the index over `text` (any bytes but one must stay unused, to
    /// serve as the sentinel).
    pub fn build(text: &[u8], opts: &BuildOptions) -> Result<SelfIndex> {
        if text.is_empty() {
            return Err(Error::InvalidInput("text is empty".into()));
        }
        if opts.c == 0 {
            return Err(Error::InvalidInput("c must be positive".into()));
        }
        let alphabet = Alphabet::from_text(text)?;
        let mut codes: Vec<u8> = text.iter().map(|&b| alphabet.code(b).expect("present byte")).collect();
        codes.push(0);
        let n = codes.len();

        let sfx = SuffixStructures::new(&codes);
        let parse = lz77::parse_with(&codes, &sfx);
        let ends = parse.ends().to_vec();
        log::debug!("parsed n = {n} into z = {} phrases", ends.len());

        let slp_s = match &opts.slp {
            Some(g) => {
                let g = import_grammar(g, text, &alphabet)?;
                if opts.mode == Mode::Fingerprint && !g.is_balanced(opts.c) {
                    return Err(Error::Balance {
                        height: g.height(),
                        bound: g.balance_bound(opts.c),
                    });
                }
                g
            }
            None => grammar_for(&codes, opts.c)?,
        };

        let radius = default_radius(n);
        let (sprime, sp_text) = build_sprime(&codes, &ends, radius)?;
        let slp_sprime = Slp::build_balanced(&sp_text)?;
        let points = sprime.boundary_pos.clone();
        let bookmarks = build_bookmarks(&slp_sprime, &points, &extraction_levels(sp_text.len()), opts.c)?;

        let fp = match opts.mode {
            Mode::Verify => None,
            Mode::Fingerprint => {
                let params = make_params(alphabet.sigma(), (n as u64).max(MODULUS_FLOOR), opts.c, opts.seed)?
                    .with_char_map(&alphabet.fp_pairs())?;
                Some(FpTables {
                    bookmarks: build_bookmarks(&slp_sprime, &points, &fingerprint_levels(sp_text.len()), opts.c)?,
                    s_fwd: symbol_fps(&slp_s, &params, Direction::Forward)?,
                    s_bwd: symbol_fps(&slp_s, &params, Direction::Backward)?,
                    sprime_fwd: symbol_fps(&slp_sprime, &params, Direction::Forward)?,
                    sprime_bwd: symbol_fps(&slp_sprime, &params, Direction::Backward)?,
                    params,
                })
            }
        };
        let access = BoundaryAccess {
            ends: ends.clone(),
            slp_s,
            sprime,
            slp_sprime,
            bookmarks,
            fp,
        };

        let (mut trie_suf, y) = suffix_trie(&codes, &sfx, &ends);
        drop(sfx);
        let (mut trie_rev, x) = reversed_trie(&codes, &parse);
        if opts.mode == Mode::Fingerprint {
            let suf = SufLabels(&access);
            trie_suf.attach_fps(|k, len| suf.fp(k, len));
            let rev = RevLabels(&access);
            trie_rev.attach_fps(|k, len| rev.fp(k, len));
        }
        let points: Vec<(u32, u32)> = x.into_iter().zip(y).collect();
        let grid = Grid::new(&points);
        let sources = sources_of(&parse);

        Ok(SelfIndex {
            mode: opts.mode,
            c: opts.c,
            seed: opts.seed,
            alphabet,
            n: n - 1,
            parse,
            access,
            trie_rev,
            trie_suf,
            grid,
            sources,
        })
    }
}
