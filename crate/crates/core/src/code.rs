//! Polar code construction and GF(2) encoding.
//!
//! Indices are 0-based throughout; index `i` here is position `i + 1` in the
//! usual 1-based notation. The generator is `G = F^{⊗m}` with
//! `F = [[1, 0], [1, 1]]` in natural order (no bit-reversal permutation).

use std::fmt;

use crate::error::{Error, Result};

/// Design erasure probability used when none is given.
pub const DEFAULT_ERASURE: f64 = 0.3;

/// An `(n, k)` polar code: length, information count and the frozen set.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    n: usize,
    m: usize,
    k: usize,
    frozen: Vec<bool>,
    design_erasure: Option<f64>,
}

impl PolarCode {
    /// Builds a code by BEC Bhattacharyya-parameter polarization.
    ///
    /// For every index the parameter starts at `design_erasure` and the bits
    /// of the index are consumed MSB first: a 0 bit applies `z -> 2z - z^2`,
    /// a 1 bit applies `z -> z^2`. The `n - k` least reliable indices (largest
    /// `z`) are frozen; ties freeze the lower index.
    pub fn construct(n: usize, k: usize, design_erasure: f64) -> Result<Self> {
        let m = check_length(n)?;
        check_info(n, k)?;
        if !(design_erasure > 0.0 && design_erasure < 1.0) {
            return Err(Error::InvalidErasure(design_erasure));
        }
        let z = bhattacharyya(m, design_erasure);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
        let mut frozen = vec![false; n];
        for &i in &order[..n - k] {
            frozen[i] = true;
        }
        Ok(Self {
            n,
            m,
            k,
            frozen,
            design_erasure: Some(design_erasure),
        })
    }

    /// Wraps an explicit frozen mask (`true` = frozen).
    pub fn from_frozen(frozen: Vec<bool>) -> Result<Self> {
        let n = frozen.len();
        let m = check_length(n)?;
        let k = frozen.iter().filter(|&&f| !f).count();
        check_info(n, k)?;
        Ok(Self {
            n,
            m,
            k,
            frozen,
            design_erasure: None,
        })
    }

    /// Parses the one-line mask format: `n` characters, `'1'` frozen and
    /// `'0'` information, first index first. Surrounding whitespace is ignored.
    pub fn parse_mask(text: &str) -> Result<Self> {
        let line = text.trim();
        let frozen = line
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(Error::MalformedMask(format!(
                    "unexpected character {other:?} at column {}",
                    i + 1
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_frozen(frozen)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of polarization stages, `log2(n)`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn design_erasure(&self) -> Option<f64> {
        self.design_erasure
    }

    pub fn info_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.frozen
            .iter()
            .enumerate()
            .filter(|(_, &f)| !f)
            .map(|(i, _)| i)
    }

    /// Places `k` information bits into an `n`-bit message with zero frozen bits.
    pub fn embed(&self, info: &[u8]) -> Result<Vec<u8>> {
        expect_len(self.k, info.len())?;
        check_bits(info)?;
        let mut u = vec![0u8; self.n];
        for (pos, &b) in self.info_positions().zip(info) {
            u[pos] = b;
        }
        Ok(u)
    }

    /// `x = u · G`. Frozen positions of `u` must be zero.
    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        expect_len(self.n, u.len())?;
        check_bits(u)?;
        if let Some(i) = (0..self.n).find(|&i| self.frozen[i] && u[i] != 0) {
            return Err(Error::NonzeroFrozen(i));
        }
        let mut x = u.to_vec();
        transform_in_place(&mut x);
        Ok(x)
    }

    /// Recovers the `k` information bits of a codeword by re-encoding, since
    /// `G` is its own inverse over GF(2).
    pub fn recover_message(&self, x: &[u8]) -> Result<Vec<u8>> {
        expect_len(self.n, x.len())?;
        check_bits(x)?;
        let mut u = x.to_vec();
        transform_in_place(&mut u);
        Ok(self.info_positions().map(|i| u[i]).collect())
    }

    /// Parity-check matrix: the columns of `G` at the frozen indices.
    pub fn parity_check(&self) -> ParityCheck {
        let words = self.n.div_ceil(64);
        let columns = (0..self.n)
            .filter(|&c| self.frozen[c])
            .map(|c| {
                let mut col = vec![0u64; words];
                // G[r][c] = 1 iff the set bits of c are a subset of those of r
                for r in (0..self.n).filter(|&r| r & c == c) {
                    col[r / 64] |= 1 << (r % 64);
                }
                col
            })
            .collect();
        ParityCheck { n: self.n, columns }
    }
}

impl fmt::Display for PolarCode {
    /// Writes the mask line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &fr in &self.frozen {
            f.write_str(if fr { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parity-check matrix `H` stored column-wise as packed bit vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheck {
    n: usize,
    columns: Vec<Vec<u64>>,
}

impl ParityCheck {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of checks, `n - k`.
    pub fn num_checks(&self) -> usize {
        self.columns.len()
    }

    /// Column `c` unpacked into `n` bits.
    pub fn column(&self, c: usize) -> Vec<u8> {
        let col = &self.columns[c];
        (0..self.n)
            .map(|r| ((col[r / 64] >> (r % 64)) & 1) as u8)
            .collect()
    }

    /// The syndrome `x · H`.
    pub fn syndrome(&self, x: &[u8]) -> Result<Vec<u8>> {
        expect_len(self.n, x.len())?;
        let packed = pack(x);
        Ok(self
            .columns
            .iter()
            .map(|col| parity(col, &packed))
            .collect())
    }

    /// True iff every syndrome bit is zero.
    pub fn check(&self, x: &[u8]) -> Result<bool> {
        expect_len(self.n, x.len())?;
        let packed = pack(x);
        Ok(self.columns.iter().all(|col| parity(col, &packed) == 0))
    }
}

fn pack(x: &[u8]) -> Vec<u64> {
    let mut packed = vec![0u64; x.len().div_ceil(64)];
    for (i, &b) in x.iter().enumerate() {
        packed[i / 64] |= u64::from(b & 1) << (i % 64);
    }
    packed
}

fn parity(a: &[u64], b: &[u64]) -> u8 {
    let ones: u32 = a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum();
    (ones & 1) as u8
}

/// Multiplies `bits` by `F^{⊗m}` in place with `m` butterfly stages.
///
/// Panics if the length is not a power of two.
pub fn transform_in_place(bits: &mut [u8]) {
    let n = bits.len();
    assert!(n.is_power_of_two(), "length {n} is not a power of two");
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (top, bottom) = block.split_at_mut(half);
            for (t, b) in top.iter_mut().zip(bottom.iter()) {
                *t ^= *b;
            }
        }
        half *= 2;
    }
}

/// BEC Bhattacharyya parameters for all `2^m` synthesized channels.
pub fn bhattacharyya(m: usize, erasure: f64) -> Vec<f64> {
    (0..1usize << m)
        .map(|i| {
            (0..m).rev().fold(erasure, |z, bit| {
                if (i >> bit) & 1 == 1 {
                    z * z
                } else {
                    2.0 * z - z * z
                }
            })
        })
        .collect()
}

fn check_length(n: usize) -> Result<usize> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidLength(n));
    }
    Ok(n.trailing_zeros() as usize)
}

fn check_info(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidInfoCount { n, k });
    }
    Ok(())
}

pub(crate) fn expect_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

fn check_bits(bits: &[u8]) -> Result<()> {
    match bits.iter().position(|&b| b > 1) {
        Some(index) => Err(Error::NotABit {
            index,
            value: bits[index],
        }),
        None => Ok(()),
    }
}
