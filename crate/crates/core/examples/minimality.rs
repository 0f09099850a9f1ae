//! Rank test over prime fields for a few signatures.
//!
//!     cargo run --release --example minimality

use pl1p::minimality::{test_signature, RankTestConfig};
use pl1p::Signature;

fn main() {
    let config = RankTestConfig::default();
    let cases: [&[(&str, u64)]; 3] = [
        &[("c00", 3), ("f", 1)],
        &[("c00", 2), ("c01a", 3), ("f", 1)],
        // no point seen in view 3
        &[("c01c", 11)],
    ];
    for entries in cases {
        let sig = Signature::from_named(entries).unwrap();
        let v = test_signature(&sig, &config).unwrap();
        println!(
            "{sig}: minimal={} primes={:?} trials={} deficits={:?}",
            v.minimal,
            v.primes_tested,
            v.trial_seeds.len(),
            v.deficits()
        );
    }
}
