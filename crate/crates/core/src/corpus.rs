//! Repetitive test corpora: a random base string followed by mutated copies.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DNA: &[u8] = b"ACGT";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub base_len: usize,
    pub copies: usize,
    /// Per-character substitution probability in each copy.
    pub mut_rate: f64,
    pub seed: u64,
}

/// The base over `ACGT`, then `copies` copies of it in which each character
/// is replaced, with probability `mut_rate`, by a different one.
pub fn generate(spec: &CorpusSpec) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let base: Vec<u8> = (0..spec.base_len).map(|_| DNA[rng.random_range(0..4)]).collect();
    let mut out = Vec::with_capacity(base.len() * (spec.copies + 1));
    out.extend_from_slice(&base);
    for _ in 0..spec.copies {
        for &b in &base {
            if spec.mut_rate > 0.0 && rng.random_bool(spec.mut_rate.min(1.0)) {
                let k = DNA.iter().position(|&x| x == b).unwrap();
                out.push(DNA[(k + rng.random_range(1..4)) % 4]);
            } else {
                out.push(b);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lz77;

    #[test]
    fn shape_and_determinism() {
        let spec = CorpusSpec {
            base_len: 100,
            copies: 3,
            mut_rate: 0.05,
            seed: 1,
        };
        let a = generate(&spec);
        assert_eq!(a.len(), 400);
        assert_eq!(a, generate(&spec));
        assert!(a.iter().all(|b| DNA.contains(b)));
        let diff = (0..100).filter(|&i| a[i] != a[100 + i]).count();
        assert!(diff < 20);
    }

    #[test]
    fn exact_copies_add_few_phrases() {
        let z = |k| {
            let mut t = generate(&CorpusSpec {
                base_len: 2000,
                copies: k,
                mut_rate: 0.0,
                seed: 9,
            });
            t.push(b'$');
            lz77::parse(&t).unwrap().len()
        };
        let z1 = z(1);
        for k in [2, 4, 8, 16] {
            assert!(z(k) <= z1 + 2 * k, "z({k}) = {} vs z(1) = {z1}", z(k));
        }
    }
}
