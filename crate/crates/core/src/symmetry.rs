//! View relabeling, swaps, and canonical class representatives.
//!
//! `S3` acts on signatures by permuting the view assignment of every variant
//! coordinate. The coordinate permutation for each group element is derived
//! from [`CatalogKind`], so the letter convention lives in one place.
//!
//! A swap moves one unit between the two `c12` coordinates that share their
//! pin-only view. Swap&label classes are therefore the `S3` orbits of
//! signatures in which every swap pair has been collapsed onto its sink
//! coordinate.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::model::CatalogKind;
use crate::signature::{enumerate_balanced, Signature, COORD_NAMES, LEN};

/// A relabeling of the three views: view `v` becomes view `self.0[v]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ViewPermutation(pub [u8; 3]);

impl ViewPermutation {
    pub const IDENTITY: ViewPermutation = ViewPermutation([0, 1, 2]);

    /// The six elements of `S3`, identity first.
    pub const ALL: [ViewPermutation; 6] = [
        ViewPermutation([0, 1, 2]),
        ViewPermutation([0, 2, 1]),
        ViewPermutation([1, 0, 2]),
        ViewPermutation([1, 2, 0]),
        ViewPermutation([2, 0, 1]),
        ViewPermutation([2, 1, 0]),
    ];

    pub fn image(&self, view: u8) -> u8 {
        self.0[view as usize]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &ViewPermutation) -> ViewPermutation {
        let mut out = [0u8; 3];
        for (v, slot) in out.iter_mut().enumerate() {
            *slot = self.image(other.image(v as u8));
        }
        ViewPermutation(out)
    }

    pub fn inverse(&self) -> ViewPermutation {
        let mut out = [0u8; 3];
        for v in 0..3u8 {
            out[self.image(v) as usize] = v;
        }
        ViewPermutation(out)
    }

    /// Relabels a per-view visibility triple.
    pub fn apply_views(&self, seen: [bool; 3]) -> [bool; 3] {
        let mut out = [false; 3];
        for v in 0..3 {
            out[self.0[v] as usize] = seen[v];
        }
        out
    }

    fn index(&self) -> usize {
        Self::ALL.iter().position(|g| g == self).expect("valid permutation")
    }
}

impl fmt::Debug for ViewPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.0[0] + 1, self.0[1] + 1, self.0[2] + 1)
    }
}

/// Coordinate permutation induced by every element of `S3`:
/// `table[g][i]` is the coordinate that coordinate `i` moves to.
pub struct BlockAction {
    table: [[usize; LEN]; 6],
}

impl BlockAction {
    fn build() -> Self {
        let mut table = [[0usize; LEN]; 6];
        for (gi, g) in ViewPermutation::ALL.iter().enumerate() {
            for (i, slot) in table[gi].iter_mut().enumerate() {
                let kind = CatalogKind::of_coord(i).permute(g);
                *slot = kind
                    .coord()
                    .expect("relabeling a catalog coordinate stays in the catalog");
            }
        }
        BlockAction { table }
    }

    pub fn get() -> &'static BlockAction {
        static ACTION: OnceLock<BlockAction> = OnceLock::new();
        ACTION.get_or_init(BlockAction::build)
    }

    pub fn target(&self, g: &ViewPermutation, coord: usize) -> usize {
        self.table[g.index()][coord]
    }
}

pub fn apply_permutation(sig: &Signature, g: &ViewPermutation) -> Signature {
    let action = BlockAction::get();
    let mut out = Signature::zero();
    for i in 0..LEN {
        out.0[action.target(g, i)] += sig.0[i];
    }
    out
}

/// One of the three `c12` swap pairs, identified by the shared pin-only view.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwapPair {
    /// Coordinate preferred by canonicalization.
    pub sink: usize,
    pub partner: usize,
}

/// Swap pairs `(c12a, c12b)`, `(c12c, c12d)`, `(c12e, c12f)`.
pub fn swap_pairs() -> [SwapPair; 3] {
    let c12 = crate::signature::coord::C12;
    [
        SwapPair { sink: c12, partner: c12 + 1 },
        SwapPair { sink: c12 + 2, partner: c12 + 3 },
        SwapPair { sink: c12 + 4, partner: c12 + 5 },
    ]
}

/// Which way a swap moves its unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwapDirection {
    /// From the partner coordinate into the sink.
    ToSink,
    /// From the sink into the partner coordinate.
    FromSink,
}

pub fn apply_swap(sig: &Signature, pair: usize, direction: SwapDirection) -> Result<Signature> {
    let p = swap_pairs()[pair];
    let (from, to) = match direction {
        SwapDirection::ToSink => (p.partner, p.sink),
        SwapDirection::FromSink => (p.sink, p.partner),
    };
    if sig.0[from] == 0 {
        return Err(Error::EmptySwapSource(COORD_NAMES[from]));
    }
    let mut out = *sig;
    out.0[from] -= 1;
    out.0[to] += 1;
    Ok(out)
}

/// Moves every swappable unit onto the sink of its pair.
pub fn collapse_swaps(sig: &Signature) -> Signature {
    let mut out = *sig;
    for p in swap_pairs() {
        out.0[p.sink] += out.0[p.partner];
        out.0[p.partner] = 0;
    }
    out
}

/// Equivalence used for class enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassMode {
    /// Relabeling of views only.
    Label,
    /// Relabeling of views plus swaps.
    SwapLabel,
}

impl ClassMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassMode::Label => "label",
            ClassMode::SwapLabel => "swap-label",
        }
    }
}

impl std::str::FromStr for ClassMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label" => Ok(ClassMode::Label),
            "swap-label" | "swap&label" | "swaplabel" => Ok(ClassMode::SwapLabel),
            other => Err(Error::Parse(format!("unknown class mode `{other}`"))),
        }
    }
}

impl fmt::Display for ClassMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lex-greatest member of the class of `sig`. For swap&label classes the
/// representative has all swap pairs collapsed onto their sinks.
pub fn canonical_form(sig: &Signature, mode: ClassMode) -> Signature {
    ViewPermutation::ALL
        .iter()
        .map(|g| {
            let moved = apply_permutation(sig, g);
            match mode {
                ClassMode::Label => moved,
                ClassMode::SwapLabel => collapse_swaps(&moved),
            }
        })
        .max()
        .expect("S3 is non-empty")
}

pub fn is_canonical(sig: &Signature, mode: ClassMode) -> bool {
    canonical_form(sig, mode) == *sig
}

/// Number of distinct signatures in the `S3` orbit of `sig`.
pub fn orbit_size(sig: &Signature) -> usize {
    let mut orbit: Vec<Signature> = ViewPermutation::ALL
        .iter()
        .map(|g| apply_permutation(sig, g))
        .collect();
    orbit.sort();
    orbit.dedup();
    orbit.len()
}

/// One representative per class of balanced signatures, lex-decreasing.
///
/// The balanced stream is lex-decreasing and each representative is the
/// lex-maximum of its class, so a signature is emitted exactly when it is
/// its own canonical form.
pub fn enumerate_classes(mode: ClassMode) -> impl Iterator<Item = Signature> {
    enumerate_balanced().filter(move |s| is_canonical(s, mode))
}
