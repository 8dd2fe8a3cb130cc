//! Karp-Rabin fingerprints `f(T) = (sum_j sigma^(l - j) T[j]) mod q`, with
//! `q` a random prime, composable under concatenation.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grammar::{Rule, Slp};

/// Largest modulus ever chosen; keeps every fingerprint in one word.
pub const MAX_MODULUS: u64 = (1 << 61) - 1;

const UNMAPPED: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KrParams {
    sigma: u64,
    q: u64,
    c: u32,
    map: Box<[u64; 256]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fp {
    pub hash: u64,
    pub pow: u64,
    pub len: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[inline]
fn mulmod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, q: u64) -> u64 {
    let mut r = 1 % q;
    b %= q;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, q);
        }
        b = mulmod(b, b, q);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin; the first twelve primes as witnesses are
/// exact for every 64-bit integer.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in WITNESSES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `min(n^c, MAX_MODULUS)`.
pub fn modulus_bound(n: u64, c: u32) -> u64 {
    n.checked_pow(c).map_or(MAX_MODULUS, |v| v.min(MAX_MODULUS))
}

/// Draws a prime uniformly from `(sigma, min(n^c, 2^61 - 1)]`, reproducibly
/// for a fixed seed. Bytes below `sigma` map to themselves.
pub fn make_params(sigma: u64, n: u64, c: u32, seed: u64) -> Result<KrParams> {
    if c < 2 {
        return Err(Error::Params(format!("exponent c must be at least 2, got {c}")));
    }
    if n < 2 {
        return Err(Error::Params(format!("text length must be at least 2, got {n}")));
    }
    if sigma < 2 {
        return Err(Error::Params(format!("alphabet size must be at least 2, got {sigma}")));
    }
    let hi = modulus_bound(n, c);
    if hi <= sigma {
        return Err(Error::Params(format!("no prime in ({sigma}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = hi - sigma;
    let q = if width <= 1 << 16 {
        let primes: Vec<u64> = (sigma + 1..=hi).filter(|&x| is_prime(x)).collect();
        if primes.is_empty() {
            return Err(Error::Params(format!("no prime in ({sigma}, {hi}]")));
        }
        primes[rng.random_range(0..primes.len())]
    } else {
        // a range this wide always contains primes (Bertrand)
        loop {
            let x = rng.random_range(sigma + 1..=hi);
            if is_prime(x) {
                break x;
            }
        }
    };
    let mut map = Box::new([UNMAPPED; 256]);
    for (b, v) in map.iter_mut().enumerate().take(sigma.min(256) as usize) {
        *v = b as u64;
    }
    Ok(KrParams { sigma, q, c, map })
}

impl KrParams {
    /// Parameters with an explicit modulus and character map.
    pub fn from_parts(sigma: u64, q: u64, c: u32, pairs: &[(u8, u64)]) -> Result<KrParams> {
        if !is_prime(q) || q <= sigma {
            return Err(Error::Params(format!("modulus {q} must be a prime above sigma = {sigma}")));
        }
        let mut map = Box::new([UNMAPPED; 256]);
        for &(b, v) in pairs {
            if v >= sigma {
                return Err(Error::Params(format!("value {v} for byte {b} is not below sigma = {sigma}")));
            }
            map[b as usize] = v;
        }
        Ok(KrParams { sigma, q, c, map })
    }

    /// Same modulus, different character map.
    pub fn with_char_map(&self, pairs: &[(u8, u64)]) -> Result<KrParams> {
        KrParams::from_parts(self.sigma, self.q, self.c, pairs)
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn value(&self, b: u8) -> Result<u64> {
        match self.map[b as usize] {
            UNMAPPED => Err(Error::Alphabet(b)),
            v => Ok(v),
        }
    }

    pub fn empty(&self) -> Fp {
        Fp {
            hash: 0,
            pow: 1 % self.q,
            len: 0,
        }
    }

    pub fn char_fp(&self, b: u8) -> Result<Fp> {
        Ok(Fp {
            hash: self.value(b)? % self.q,
            pow: self.sigma % self.q,
            len: 1,
        })
    }

    #[inline]
    pub fn concat(&self, x: Fp, y: Fp) -> Fp {
        Fp {
            hash: (mulmod(x.hash, y.pow, self.q) + y.hash) % self.q,
            pow: mulmod(x.pow, y.pow, self.q),
            len: x.len + y.len,
        }
    }

    /// Appends one character to `x`.
    #[inline]
    pub fn push(&self, x: Fp, b: u8) -> Result<Fp> {
        let v = self.value(b)?;
        Ok(Fp {
            hash: (mulmod(x.hash, self.sigma, self.q) + v) % self.q,
            pow: mulmod(x.pow, self.sigma, self.q),
            len: x.len + 1,
        })
    }

    /// Fingerprint of `y` given those of `x` and `xy`.
    pub fn strip_prefix(&self, xy: Fp, x: Fp, y_pow: u64) -> u64 {
        let sub = mulmod(x.hash, y_pow, self.q);
        (xy.hash + self.q - sub) % self.q
    }

    pub fn pow(&self, len: u64) -> u64 {
        powmod(self.sigma, len, self.q)
    }
}

/// Direct Horner evaluation.
pub fn fp_of(params: &KrParams, s: &[u8]) -> Result<Fp> {
    let mut f = params.empty();
    for &b in s {
        f = params.push(f, b)?;
    }
    Ok(f)
}

pub fn concat(params: &KrParams, x: Fp, y: Fp) -> Fp {
    params.concat(x, y)
}

/// Fingerprints of every prefix of a string.
#[derive(Debug, Clone)]
pub struct PrefixHashes {
    hash: Vec<u64>,
    pow: Vec<u64>,
    q: u64,
}

impl PrefixHashes {
    pub fn new(params: &KrParams, s: &[u8]) -> Result<PrefixHashes> {
        let mut hash = Vec::with_capacity(s.len() + 1);
        let mut pow = Vec::with_capacity(s.len() + 1);
        let mut f = params.empty();
        hash.push(f.hash);
        pow.push(f.pow);
        for &b in s {
            f = params.push(f, b)?;
            hash.push(f.hash);
            pow.push(f.pow);
        }
        Ok(PrefixHashes { hash, pow, q: params.q })
    }

    /// `m`, the length of the hashed string.
    pub fn len(&self) -> usize {
        self.hash.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn prefix(&self, j: usize) -> Fp {
        Fp {
            hash: self.hash[j],
            pow: self.pow[j],
            len: j as u64,
        }
    }

    /// Fingerprint of `s[i..j]` (1-based, inclusive); `j = i - 1` is empty.
    pub fn substring_fp(&self, i: usize, j: usize) -> Result<Fp> {
        if i == 0 || i > j + 1 || j > self.len() {
            return Err(Error::Range {
                pos: i,
                len: (j + 1).saturating_sub(i),
                n: self.len(),
            });
        }
        Ok(self.range(i - 1, j))
    }

    /// Fingerprint of `s[lo..hi]` (0-based, half-open).
    #[inline]
    pub(crate) fn range(&self, lo: usize, hi: usize) -> Fp {
        let len = hi - lo;
        let pow = self.pow[len];
        let sub = mulmod(self.hash[lo], pow, self.q);
        Fp {
            hash: (self.hash[hi] + self.q - sub) % self.q,
            pow,
            len: len as u64,
        }
    }
}

/// Fingerprint of the expansion of every symbol (forward), or of its reverse
/// (backward).
pub fn symbol_fps(slp: &Slp, params: &KrParams, direction: Direction) -> Result<Vec<Fp>> {
    let rules = slp.rules();
    let mut out: Vec<Option<Fp>> = vec![None; rules.len()];
    for start in 0..rules.len() {
        if out[start].is_some() {
            continue;
        }
        let mut stack = vec![start];
        while let Some(&s) = stack.last() {
            match rules[s] {
                Rule::Terminal(c) => {
                    out[s] = Some(params.char_fp(c)?);
                    stack.pop();
                }
                Rule::Pair(l, r) => match (out[l.index()], out[r.index()]) {
                    (Some(fl), Some(fr)) => {
                        out[s] = Some(match direction {
                            Direction::Forward => params.concat(fl, fr),
                            Direction::Backward => params.concat(fr, fl),
                        });
                        stack.pop();
                    }
                    (a, b) => {
                        if a.is_none() {
                            stack.push(l.index());
                        }
                        if b.is_none() {
                            stack.push(r.index());
                        }
                    }
                },
            }
        }
    }
    Ok(out.into_iter().map(|f| f.expect("every symbol visited")).collect())
}
