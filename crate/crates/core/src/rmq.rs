//! Range-minimum and range-maximum helpers.
//!
//! [`BlockMin`] answers range-minimum and "nearest smaller than a threshold"
//! queries over large `u32` arrays in linear space: the array is cut into
//! fixed blocks and a sparse table is kept only over the block minima.
//! [`SparseArgMax`] is the classic `O(n log n)` sparse table returning the
//! position of a maximum, used where the input is small.

const BLOCK: usize = 32;

#[derive(Debug, Clone)]
pub(crate) struct BlockMin {
    values: Vec<u32>,
    // table[k][b] = min of block minima over blocks b .. b + 2^k
    table: Vec<Vec<u32>>,
}

impl BlockMin {
    pub(crate) fn new(values: Vec<u32>) -> Self {
        let minima: Vec<u32> = values
            .chunks(BLOCK)
            .map(|c| c.iter().copied().min().unwrap_or(u32::MAX))
            .collect();
        let mut table = vec![minima];
        let mut width = 1;
        while 2 * width <= table[0].len() {
            let prev = table.last().unwrap();
            let next: Vec<u32> = (0..prev.len() - width)
                .map(|b| prev[b].min(prev[b + width]))
                .collect();
            table.push(next);
            width *= 2;
        }
        BlockMin { values, table }
    }

    pub(crate) fn values(&self) -> &[u32] {
        &self.values
    }

    fn blocks_min(&self, lo: usize, hi: usize) -> u32 {
        // blocks lo..hi, non-empty
        let k = usize::BITS as usize - 1 - (hi - lo).leading_zeros() as usize;
        self.table[k][lo].min(self.table[k][hi - (1 << k)])
    }

    /// Minimum over `values[lo..hi]`; `u32::MAX` for an empty range.
    pub(crate) fn min(&self, lo: usize, hi: usize) -> u32 {
        if lo >= hi {
            return u32::MAX;
        }
        let (bl, bh) = (lo / BLOCK, (hi - 1) / BLOCK);
        if bl == bh {
            return self.values[lo..hi].iter().copied().min().unwrap();
        }
        let head = self.values[lo..(bl + 1) * BLOCK].iter().copied().min().unwrap();
        let tail = self.values[bh * BLOCK..hi].iter().copied().min().unwrap();
        let mut m = head.min(tail);
        if bl + 1 < bh {
            m = m.min(self.blocks_min(bl + 1, bh));
        }
        m
    }

    /// Largest `j <= pos` with `values[j] < threshold`.
    pub(crate) fn prev_less(&self, pos: usize, threshold: u32) -> Option<usize> {
        let b = pos / BLOCK;
        for j in (b * BLOCK..=pos).rev() {
            if self.values[j] < threshold {
                return Some(j);
            }
        }
        if b == 0 {
            return None;
        }
        // find the largest block < b whose minimum is below the threshold
        let minima = &self.table[0];
        let mut right = b; // exclusive
        if minima[..right].is_empty() || self.blocks_min(0, right) >= threshold {
            return None;
        }
        for k in (0..self.table.len()).rev() {
            let w = 1 << k;
            if right >= w && self.table[k][right - w] >= threshold {
                right -= w;
            }
        }
        let blk = right - 1;
        let start = blk * BLOCK;
        let end = (start + BLOCK).min(self.values.len());
        (start..end).rev().find(|&j| self.values[j] < threshold)
    }

    /// Smallest `j >= pos` with `values[j] < threshold`.
    pub(crate) fn next_less(&self, pos: usize, threshold: u32) -> Option<usize> {
        let n = self.values.len();
        if pos >= n {
            return None;
        }
        let b = pos / BLOCK;
        let end = ((b + 1) * BLOCK).min(n);
        if let Some(j) = (pos..end).find(|&j| self.values[j] < threshold) {
            return Some(j);
        }
        let nb = self.table[0].len();
        let mut left = b + 1;
        if left >= nb || self.blocks_min(left, nb) >= threshold {
            return None;
        }
        for k in (0..self.table.len()).rev() {
            let w = 1 << k;
            if left + w <= nb && self.table[k][left] >= threshold {
                left += w;
            }
        }
        let start = left * BLOCK;
        let end = (start + BLOCK).min(n);
        (start..end).find(|&j| self.values[j] < threshold)
    }
}

/// Sparse table answering "position of a maximum in `values[lo..hi]`".
#[derive(Debug, Clone, Default)]
pub(crate) struct SparseArgMax {
    values: Vec<u64>,
    table: Vec<Vec<u32>>,
}

impl SparseArgMax {
    pub(crate) fn new(values: Vec<u64>) -> Self {
        let mut table: Vec<Vec<u32>> = vec![(0..values.len() as u32).collect()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = table.last().unwrap();
            let next = (0..prev.len() - width)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + width]);
                    if values[b as usize] > values[a as usize] {
                        b
                    } else {
                        a
                    }
                })
                .collect();
            table.push(next);
            width *= 2;
        }
        SparseArgMax { values, table }
    }

    pub(crate) fn argmax(&self, lo: usize, hi: usize) -> Option<usize> {
        if lo >= hi {
            return None;
        }
        let k = usize::BITS as usize - 1 - (hi - lo).leading_zeros() as usize;
        let a = self.table[k][lo] as usize;
        let b = self.table[k][hi - (1 << k)] as usize;
        Some(if self.values[b] > self.values[a] { b } else { a })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn block_min_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 31, 32, 33, 100, 257, 1000] {
            let v: Vec<u32> = (0..n).map(|_| rng.random_range(0..50)).collect();
            let bm = BlockMin::new(v.clone());
            for _ in 0..400 {
                let lo = rng.random_range(0..n);
                let hi = rng.random_range(lo..=n);
                assert_eq!(bm.min(lo, hi), v[lo..hi].iter().copied().min().unwrap_or(u32::MAX));
                let t = rng.random_range(0..55);
                let pos = rng.random_range(0..n);
                assert_eq!(bm.prev_less(pos, t), (0..=pos).rev().find(|&j| v[j] < t));
                assert_eq!(bm.next_less(pos, t), (pos..n).find(|&j| v[j] < t));
            }
        }
    }

    #[test]
    fn argmax_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v: Vec<u64> = (0..300).map(|_| rng.random_range(0..1000)).collect();
        let t = SparseArgMax::new(v.clone());
        for lo in 0..v.len() {
            for hi in lo + 1..=v.len().min(lo + 70) {
                let j = t.argmax(lo, hi).unwrap();
                assert_eq!(v[j], *v[lo..hi].iter().max().unwrap());
            }
        }
        assert_eq!(t.argmax(5, 5), None);
    }
}
