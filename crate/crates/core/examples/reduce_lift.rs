//! Reduction, terminal forms and lifting on explicit problems.
//!
//!     cargo run --release --example reduce_lift

use pl1p::{Problem, ReduceMode, Signature};

fn main() {
    // c00=3, f=1 plus a pin on the first point seen in views 1 and 2
    let mut text = Problem::expand(&Signature::from_named(&[("c00", 3), ("f", 1)]).unwrap()).to_string();
    text = text
        .replace("lines 1", "lines 2")
        .replace("incidences ", "incidences 0:1")
        .replacen("lines=0", "lines=0,1", 2);
    let prob: Problem = text.parse().unwrap();
    print!("{prob}");
    println!("balance deficit {}", prob.balance_deficit());

    let (reduced, steps) = prob.reduce_traced(ReduceMode::Minimal);
    for step in &steps {
        let kept = if step.rule.preserves_minimality() { "minimal" } else { "camera-minimal" };
        println!("applied {:?} ({kept})", step.rule);
    }
    println!("reduced: {}", reduced.signature().unwrap());

    let sig = Signature::from_named(&[("c21a", 1), ("c12a", 1), ("c00", 2)]).unwrap();
    let p = Problem::expand(&sig);
    let terminal = p.terminalize();
    println!("terminal form of {sig}:\n{terminal}");
    println!("lifted back: {}", terminal.lift_to_minimal().unwrap().signature().unwrap());
}
