//! Subfamily tags of a few minimal problems.
//!
//!     cargo run --release --example subfamilies

use pl1p::subfamilies::{common_points, tags, CommonPoints, VIEW_PAIRS};
use pl1p::{Problem, Signature};

fn main() {
    let cases: [&[(&str, u64)]; 3] = [
        &[("c00", 3), ("f", 1)],
        &[("c00", 3), ("c01a", 2)],
        &[("c10", 1), ("c00", 1), ("c01a", 2), ("c13a", 2)],
    ];
    for entries in cases {
        let sig = Signature::from_named(entries).unwrap();
        let prob = Problem::expand(&sig);
        let common: Vec<usize> = VIEW_PAIRS.iter().map(|&p| common_points(&prob, p)).collect();
        let t: Vec<String> = tags(&sig, &CommonPoints).iter().map(|t| t.to_string()).collect();
        println!("{sig}: common points per pair {common:?}, tags [{}]", t.join(", "));
    }
}
