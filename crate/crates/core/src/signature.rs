//! Signatures of reduced PL1Ps in three views and the balanced-signature
//! enumerator.
//!
//! A signature counts how often each observed local feature occurs. The
//! coordinate order is fixed for the whole crate:
//!
//! ```text
//! c7 c6 c5 c4 c3 | c20 c21a c21b c21c | c10 c11a c11b c11c
//! c12a c12b c12c c12d c12e c12f | c13a c13b c13c | c00 c01a c01b c01c | f
//! ```
//!
//! Which view assignment each variant letter stands for is defined once in
//! [`crate::model::CatalogKind::of_coord`].

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Number of coordinates in a signature.
pub const LEN: usize = 27;

/// Coordinate names, in signature order.
pub const COORD_NAMES: [&str; LEN] = [
    "c7", "c6", "c5", "c4", "c3", "c20", "c21a", "c21b", "c21c", "c10", "c11a", "c11b", "c11c",
    "c12a", "c12b", "c12c", "c12d", "c12e", "c12f", "c13a", "c13b", "c13c", "c00", "c01a", "c01b",
    "c01c", "f",
];

/// Degrees of freedom of each feature in space.
pub const WEIGHTS_3D: [i64; LEN] = [
    17, 15, 13, 11, 9, 7, 7, 7, 7, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 3, 3, 3, 3, 4,
];

/// Degrees of freedom of each observed feature in the three images.
pub const WEIGHTS_2D: [i64; LEN] = [
    27, 24, 21, 18, 15, 12, 8, 8, 8, 9, 8, 8, 8, 7, 7, 7, 7, 7, 7, 6, 6, 6, 6, 4, 4, 4, 6,
];

/// Coefficients of the balance equation `sum(w_i c_i) = 11`.
pub const WEIGHTS_BALANCE: [i64; LEN] = [
    10, 9, 8, 7, 6, 5, 1, 1, 1, 4, 3, 3, 3, 2, 2, 2, 2, 2, 2, 1, 1, 1, 3, 1, 1, 1, 2,
];

/// Dimension of the calibrated camera configuration space of three views.
pub const CAMERA_DIM: i64 = 11;

/// Named coordinate indices.
pub mod coord {
    pub const C7: usize = 0;
    pub const C6: usize = 1;
    pub const C5: usize = 2;
    pub const C4: usize = 3;
    pub const C3: usize = 4;
    pub const C20: usize = 5;
    pub const C21: usize = 6;
    pub const C10: usize = 9;
    pub const C11: usize = 10;
    pub const C12: usize = 13;
    pub const C13: usize = 19;
    pub const C00: usize = 22;
    pub const C01: usize = 23;
    pub const F: usize = 26;
}

/// Count vector of observed local features.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Signature(pub [u64; LEN]);

impl Signature {
    pub const fn zero() -> Self {
        Signature([0; LEN])
    }

    /// Builds a signature from `(coordinate name, count)` pairs.
    pub fn from_named(entries: &[(&str, u64)]) -> Result<Self, Error> {
        let mut sig = Signature::zero();
        for &(name, count) in entries {
            let idx = COORD_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::Parse(format!("unknown coordinate `{name}`")))?;
            sig.0[idx] += count;
        }
        Ok(sig)
    }

    pub fn counts(&self) -> &[u64; LEN] {
        &self.0
    }

    pub fn get(&self, idx: usize) -> u64 {
        self.0[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    fn weighted(&self, weights: &[i64; LEN]) -> i64 {
        self.0
            .iter()
            .zip(weights)
            .map(|(&c, &w)| c as i64 * w)
            .sum()
    }

    /// Degrees of freedom of the space arrangement.
    pub fn dim3d(&self) -> i64 {
        self.weighted(&WEIGHTS_3D)
    }

    /// Degrees of freedom of the joint image.
    pub fn dim2d(&self) -> i64 {
        self.weighted(&WEIGHTS_2D)
    }

    /// Left-hand side of the balance equation minus 11.
    pub fn balance_deficit(&self) -> i64 {
        self.weighted(&WEIGHTS_BALANCE) - CAMERA_DIM
    }

    pub fn is_balanced(&self) -> bool {
        self.balance_deficit() == 0
    }

    pub fn dimensions(&self) -> DimensionReport {
        let dim3d = self.dim3d();
        let dim2d = self.dim2d();
        DimensionReport {
            dim3d,
            dim2d,
            camera_dim: CAMERA_DIM,
            deficit: dim2d - dim3d - CAMERA_DIM,
        }
    }

    /// True if no point carries a pin (only `c00`, `c01*` and `f` are set).
    pub fn is_pl0p(&self) -> bool {
        self.0[..coord::C00].iter().all(|&c| c == 0)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nonzero: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, c)| format!("{}={}", COORD_NAMES[i], c))
            .collect();
        write!(f, "Signature[{}]", nonzero.join(" "))
    }
}

impl FromStr for Signature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(',').collect();
        if parts.len() != LEN {
            return Err(Error::Parse(format!(
                "signature needs {LEN} comma-separated counts, got {}",
                parts.len()
            )));
        }
        let mut sig = Signature::zero();
        for (slot, part) in sig.0.iter_mut().zip(parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::Parse(format!("bad signature entry `{part}`")))?;
        }
        Ok(sig)
    }
}

/// Dimension bookkeeping of a signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimensionReport {
    pub dim3d: i64,
    pub dim2d: i64,
    pub camera_dim: i64,
    pub deficit: i64,
}

/// `TARGET` of the balance equation.
const TARGET: u64 = CAMERA_DIM as u64;

/// `FEASIBLE[j][r]`: can residual `r` be written with coordinates `j..LEN`?
fn feasibility() -> [[bool; TARGET as usize + 1]; LEN + 1] {
    let mut table = [[false; TARGET as usize + 1]; LEN + 1];
    table[LEN][0] = true;
    for j in (0..LEN).rev() {
        let w = WEIGHTS_BALANCE[j] as usize;
        for r in 0..=TARGET as usize {
            table[j][r] = (0..=r / w).any(|k| table[j + 1][r - k * w]);
        }
    }
    table
}

/// Streams every balanced signature exactly once, in strictly decreasing
/// lexicographic order.
///
/// The iterator can be restricted to signatures with a fixed leading prefix,
/// which is how the stream is sharded across workers.
#[derive(Clone)]
pub struct BalancedSignatures {
    feasible: [[bool; TARGET as usize + 1]; LEN + 1],
    current: Option<[u64; LEN]>,
    prefix_len: usize,
}

impl BalancedSignatures {
    pub fn new() -> Self {
        Self::with_prefix(&[]).expect("empty prefix is always feasible")
    }

    /// Signatures whose first `prefix.len()` coordinates equal `prefix`.
    /// Returns `None` when no balanced signature has that prefix.
    pub fn with_prefix(prefix: &[u64]) -> Option<Self> {
        assert!(prefix.len() <= LEN);
        let feasible = feasibility();
        let used: u64 = prefix
            .iter()
            .zip(WEIGHTS_BALANCE)
            .map(|(&c, w)| c * w as u64)
            .sum();
        if used > TARGET || !feasible[prefix.len()][(TARGET - used) as usize] {
            return None;
        }
        let mut counts = [0u64; LEN];
        counts[..prefix.len()].copy_from_slice(prefix);
        let mut it = BalancedSignatures {
            feasible,
            current: None,
            prefix_len: prefix.len(),
        };
        it.fill_greedy(&mut counts, prefix.len(), TARGET - used);
        it.current = Some(counts);
        Some(it)
    }

    /// Lex-greatest completion of `counts[from..]` with residual `rest`.
    fn fill_greedy(&self, counts: &mut [u64; LEN], from: usize, mut rest: u64) {
        for j in from..LEN {
            let w = WEIGHTS_BALANCE[j] as u64;
            let mut k = rest / w;
            while !self.feasible[j + 1][(rest - k * w) as usize] {
                k -= 1;
            }
            counts[j] = k;
            rest -= k * w;
        }
        debug_assert_eq!(rest, 0);
    }

    /// Lex-predecessor among balanced signatures, or `None` at the end.
    fn advance(&self, counts: &[u64; LEN]) -> Option<[u64; LEN]> {
        let mut next = *counts;
        // residual carried by the suffix starting at i + 1
        let mut suffix: u64 = 0;
        for i in (self.prefix_len..LEN).rev() {
            let w = WEIGHTS_BALANCE[i] as u64;
            if i + 1 < LEN {
                // smallest decrement the suffix can absorb
                for d in 1..=next[i] {
                    let rest = suffix + d * w;
                    if self.feasible[i + 1][rest as usize] {
                        next[i] -= d;
                        self.fill_greedy(&mut next, i + 1, rest);
                        return Some(next);
                    }
                }
            }
            suffix += next[i] * w;
        }
        None
    }
}

impl Default for BalancedSignatures {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for BalancedSignatures {
    type Item = Signature;

    fn next(&mut self) -> Option<Signature> {
        let cur = self.current?;
        self.current = self.advance(&cur);
        Some(Signature(cur))
    }
}

/// All balanced signatures, lex-decreasing.
pub fn enumerate_balanced() -> BalancedSignatures {
    BalancedSignatures::new()
}

/// Leading `c7` values that admit a balanced completion, lex-decreasing.
/// Each one seeds an independent shard of the enumeration.
pub fn top_level_shards() -> Vec<u64> {
    (0..=TARGET / WEIGHTS_BALANCE[0] as u64)
        .rev()
        .filter(|&c| BalancedSignatures::with_prefix(&[c]).is_some())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_examples() {
        assert_eq!(Signature::zero().dim3d(), 0);
        assert_eq!(Signature::zero().dim2d(), 0);
        let s = Signature::from_named(&[("c00", 3), ("f", 1)]).unwrap();
        assert_eq!(s.dim3d(), 13);
        assert_eq!(s.balance_deficit(), 0);
        let c7 = Signature::from_named(&[("c7", 1)]).unwrap();
        assert_eq!(c7.dim3d(), 17);
        assert_eq!(Signature::from_named(&[("c20", 1)]).unwrap().dim2d(), 12);
        assert_eq!(Signature::from_named(&[("c12a", 1)]).unwrap().dim2d(), 7);
        assert_eq!(Signature::from_named(&[("c00", 4)]).unwrap().balance_deficit(), 1);
        let s = Signature::from_named(&[("c7", 1), ("c01a", 1)]).unwrap();
        assert_eq!(s.balance_deficit(), 0);
    }

    #[test]
    fn balance_weights_are_2d_minus_3d() {
        for i in 0..LEN {
            assert_eq!(WEIGHTS_BALANCE[i], WEIGHTS_2D[i] - WEIGHTS_3D[i], "{}", COORD_NAMES[i]);
        }
    }

    #[test]
    fn text_encoding_round_trips() {
        let s = Signature::from_named(&[("c00", 3), ("f", 1)]).unwrap();
        let text = s.to_string();
        assert_eq!(text, "0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,3,0,0,0,1");
        assert_eq!(text.parse::<Signature>().unwrap(), s);
        assert!("1,2,3".parse::<Signature>().is_err());
        assert!("0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,x,0,0,0,1"
            .parse::<Signature>()
            .is_err());
        assert!(" 0, 0".parse::<Signature>().is_err());
    }

    #[test]
    fn unknown_coordinate_name_is_rejected() {
        assert!(Signature::from_named(&[("c99", 1)]).is_err());
    }

    #[test]
    fn prefix_shards_cover_their_prefix() {
        let shard: Vec<_> = BalancedSignatures::with_prefix(&[1]).unwrap().collect();
        assert_eq!(shard.len(), 9);
        assert!(shard.iter().all(|s| s.get(coord::C7) == 1 && s.is_balanced()));
        assert!(BalancedSignatures::with_prefix(&[2]).is_none());
        assert_eq!(top_level_shards(), vec![1, 0]);
    }
}
