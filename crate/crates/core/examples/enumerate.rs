//! Counts the balanced signatures and shows the first few.
//!
//!     cargo run --release --example enumerate

use pl1p::signature::{enumerate_balanced, COORD_NAMES};

fn main() {
    for sig in enumerate_balanced().take(3) {
        let nonzero: Vec<String> = sig
            .counts()
            .iter()
            .zip(COORD_NAMES)
            .filter(|(c, _)| **c > 0)
            .map(|(c, n)| format!("{n}={c}"))
            .collect();
        println!("{sig}  ({})", nonzero.join(" "));
    }
    println!("balanced={}", enumerate_balanced().count());
}
