//! Property tests of the public API against the brute-force oracles.

use gsindex::fingerprint::{fp_of, make_params, PrefixHashes};
use gsindex::geometry::{Grid, Source, SourceSet};
use gsindex::grammar::Slp;
use gsindex::lz77;
use gsindex::oracle::{brute_covering, brute_report, naive_classify, naive_ends, naive_locate, naive_lz77};
use gsindex::{BuildOptions, OccKind, SelfIndex};
use proptest::prelude::*;

fn text_over(alphabet: &'static [u8], max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(prop::sample::select(alphabet), 1..=max)
}

/// A text made of a random seed string and noisy copies of it.
fn repetitive() -> impl Strategy<Value = Vec<u8>> {
    (text_over(b"acgt", 40), 1..6usize, prop::collection::vec((0..200usize, prop::sample::select(b"acgt".as_slice())), 0..6))
        .prop_map(|(seed, copies, edits)| {
            let mut t = seed.clone();
            for _ in 0..copies {
                t.extend_from_slice(&seed);
            }
            for (at, c) in edits {
                let i = at % t.len();
                t[i] = c;
            }
            t
        })
}

fn modes() -> [BuildOptions; 2] {
    [BuildOptions::default(), BuildOptions::fingerprint()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn parse_is_greedy_and_decodes(text in text_over(b"ab", 60)) {
        let mut t = text.clone();
        t.push(b'$');
        let parse = lz77::parse(&t).unwrap();
        let want = naive_ends(&naive_lz77(&t));
        prop_assert_eq!(parse.ends(), want.as_slice());
        prop_assert_eq!(lz77::decode(&parse).unwrap(), t);
    }

    #[test]
    fn locate_matches_scan(text in repetitive(), p in text_over(b"acgt", 6)) {
        for opts in modes() {
            let idx = SelfIndex::build(&text, &opts).unwrap();
            let occ = idx.locate(&p).unwrap();
            let pos: Vec<usize> = occ.iter().map(|o| o.pos).collect();
            prop_assert!(pos.windows(2).all(|w| w[0] < w[1]), "not strictly ascending: {:?}", pos);
            prop_assert_eq!(&pos, &naive_locate(&text, &p));
            let (pri, _) = naive_classify(&text, idx.boundaries(), &p);
            let got: Vec<usize> = occ.iter().filter(|o| o.kind == OccKind::Primary).map(|o| o.pos).collect();
            prop_assert_eq!(got, pri);
            prop_assert_eq!(idx.count(&p).unwrap(), pos.len());
        }
    }

    #[test]
    fn substrings_are_found(text in repetitive(), a in 0..1000usize, len in 1..12usize) {
        let i = a % text.len();
        let p = &text[i..(i + len).min(text.len())];
        let idx = SelfIndex::build(&text, &BuildOptions::fingerprint()).unwrap();
        let pos: Vec<usize> = idx.locate(p).unwrap().iter().map(|o| o.pos).collect();
        prop_assert!(pos.contains(&(i + 1)));
    }

    #[test]
    fn extract_matches_slice(text in repetitive(), a in 0..1000usize, b in 0..1000usize) {
        let n = text.len();
        let i = a % n + 1;
        let len = b % (n + 2 - i);
        for opts in modes() {
            let idx = SelfIndex::build(&text, &opts).unwrap();
            prop_assert_eq!(idx.extract(i, len).unwrap(), &text[i - 1..i - 1 + len]);
        }
    }

    #[test]
    fn round_trip_preserves_everything(text in repetitive(), fp in any::<bool>()) {
        let opts = if fp { BuildOptions::fingerprint() } else { BuildOptions::default() };
        let idx = SelfIndex::build(&text, &opts).unwrap();
        let bytes = idx.to_bytes();
        let back = SelfIndex::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
        prop_assert!(back == idx);
    }

    #[test]
    fn balanced_grammar_expands_to_text(text in text_over(b"abc", 300)) {
        let g = Slp::build_balanced(&text).unwrap();
        prop_assert_eq!(g.expand_all(), text);
        prop_assert!(g.is_balanced(2));
    }

    #[test]
    fn fingerprints_compose(x in text_over(b"acgt", 30), y in text_over(b"acgt", 30), seed in any::<u64>()) {
        let params = make_params(5, 1 << 20, 3, seed)
            .and_then(|p| p.with_char_map(&[(b'a', 0), (b'c', 1), (b'g', 2), (b't', 3)]))
            .unwrap();
        let mut xy = x.clone();
        xy.extend_from_slice(&y);
        let whole = fp_of(&params, &xy).unwrap();
        prop_assert_eq!(params.concat(fp_of(&params, &x).unwrap(), fp_of(&params, &y).unwrap()), whole);
        let h = PrefixHashes::new(&params, &xy).unwrap();
        let (i, j) = (x.len() / 2 + 1, x.len() + y.len() / 2);
        prop_assert_eq!(h.substring_fp(i, j).unwrap(), fp_of(&params, &xy[i - 1..j]).unwrap());
    }

    #[test]
    fn grid_reports_exactly(perm in Just((0..40u32).collect::<Vec<_>>()).prop_shuffle(),
                            q in (0..40usize, 0..40usize, 0..40usize, 0..40usize)) {
        let pts: Vec<(u32, u32)> = perm.iter().enumerate().map(|(x, &y)| (x as u32, y)).collect();
        let grid = Grid::new(&pts);
        let (x1, x2, y1, y2) = (q.0.min(q.1), q.0.max(q.1), q.2.min(q.3), q.2.max(q.3));
        let mut got = grid.report(x1, x2, y1, y2);
        got.sort_unstable();
        prop_assert_eq!(got, brute_report(&pts, x1 as u32, x2 as u32, y1 as u32, y2 as u32));
    }

    #[test]
    fn covering_matches_brute(iv in prop::collection::vec((1..60usize, 0..20usize), 1..40), s in 1..60usize, w in 0..6usize) {
        let srcs: Vec<Source> = iv
            .iter()
            .enumerate()
            .map(|(k, &(a, l))| Source { src_start: a, src_end: a + l, phrase: k as u32, phrase_start: 100 + k })
            .collect();
        let plain: Vec<(usize, usize)> = iv.iter().map(|&(a, l)| (a, a + l)).collect();
        let set = SourceSet::new(srcs);
        let mut got: Vec<usize> = set.covering_vec(s, s + w).iter().map(|x| x.phrase as usize).collect();
        got.sort_unstable();
        prop_assert_eq!(got, brute_covering(&plain, s, s + w));
    }
}
