//! Counts the solutions of the five-point problem by monodromy, or of the
//! problem named on the command line.
//!
//!     cargo run --release --example degree
//!     cargo run --release --example degree -- c00=2 c01a=3 f=1

use pl1p::monodromy::{monodromy_degree, MonodromyConfig, ParametricSystem};
use pl1p::{Problem, Signature};

fn main() {
    let args: Vec<(String, u64)> = std::env::args()
        .skip(1)
        .map(|a| {
            let (n, c) = a.split_once('=').expect("arguments look like c00=3");
            (n.to_string(), c.parse().expect("count"))
        })
        .collect();
    let sys = if args.is_empty() {
        ParametricSystem::five_point()
    } else {
        let entries: Vec<(&str, u64)> = args.iter().map(|(n, c)| (n.as_str(), *c)).collect();
        let prob = Problem::expand(&Signature::from_named(&entries).unwrap());
        ParametricSystem::from_problem(&prob.lift_to_minimal().unwrap()).unwrap()
    };
    println!("unknowns={}", sys.dim());
    let start = std::time::Instant::now();
    let r = monodromy_degree(&sys, &MonodromyConfig::default()).unwrap();
    println!(
        "count={} status={} loops={} paths={} failures={} max_residual={:e} time={:.1?}",
        r.count,
        r.status,
        r.loops,
        r.paths_tracked,
        r.path_failures,
        r.max_residual,
        start.elapsed()
    );
}
