//! Class representatives under view relabeling, with and without swaps.
//!
//!     cargo run --release --example classes

use pl1p::symmetry::{apply_permutation, canonical_form, enumerate_classes};
use pl1p::{ClassMode, Signature, ViewPermutation};

fn main() {
    let s = Signature::from_named(&[("c01c", 2), ("c00", 1), ("c12b", 1), ("c3", 1)]).unwrap();
    for g in ViewPermutation::ALL {
        println!("{:?} -> {}", g.0, apply_permutation(&s, &g));
    }
    println!("label representative:      {}", canonical_form(&s, ClassMode::Label));
    println!("swap-label representative: {}", canonical_form(&s, ClassMode::SwapLabel));

    for mode in [ClassMode::Label, ClassMode::SwapLabel] {
        println!("{mode} classes={}", enumerate_classes(mode).count());
    }
}
