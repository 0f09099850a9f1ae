//! Samplers and checks shared by the property suites and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use rand::Rng;

use pl1p::ffalg::{Circuit, Fp};
use pl1p::minimality::{test_signature, RankTestConfig};
use pl1p::model::{LocalFeature, Views};
use pl1p::signature::{LEN, WEIGHTS_BALANCE};
use pl1p::symmetry::{apply_permutation, apply_swap, canonical_form, swap_pairs, SwapDirection};
use pl1p::{ClassMode, Problem, ReduceMode, Signature, ViewPermutation};

/// `counts[i][r]`: number of ways the coordinates `i..` reach weight `r`.
pub struct BalancedSampler {
    counts: Vec<Vec<u64>>,
}

impl BalancedSampler {
    pub fn new() -> Self {
        let mut counts = vec![vec![0u64; 12]; LEN + 1];
        counts[LEN][0] = 1;
        for i in (0..LEN).rev() {
            let w = WEIGHTS_BALANCE[i] as usize;
            for r in 0..12 {
                let mut k = 0;
                while k * w <= r {
                    counts[i][r] += counts[i + 1][r - k * w];
                    k += 1;
                }
            }
        }
        BalancedSampler { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts[0][11]
    }

    /// Uniform over all balanced signatures.
    pub fn sample(&self, rng: &mut impl Rng) -> Signature {
        let mut pick = rng.random_range(0..self.total());
        let mut sig = [0u64; LEN];
        let mut r = 11usize;
        for i in 0..LEN {
            let w = WEIGHTS_BALANCE[i] as usize;
            let mut k = 0;
            loop {
                let n = self.counts[i + 1][r - k * w];
                if pick < n {
                    break;
                }
                pick -= n;
                k += 1;
            }
            sig[i] = k as u64;
            r -= k * w;
        }
        Signature(sig)
    }
}

fn random_views(rng: &mut impl Rng) -> Views {
    [rng.random_bool(0.6), rng.random_bool(0.6), rng.random_bool(0.6)]
}

/// A random PL1P feature: a free line or a point with up to three pins,
/// resampled until it satisfies observation completeness.
pub fn random_feature(rng: &mut impl Rng) -> LocalFeature {
    if rng.random_bool(0.25) {
        return LocalFeature::FreeLine(random_views(rng));
    }
    loop {
        let point = random_views(rng);
        let pins = (0..rng.random_range(0..=3)).map(|_| random_views(rng)).collect();
        if let Ok(f) = LocalFeature::point(point, pins) {
            return f;
        }
    }
}

pub fn random_problem(rng: &mut impl Rng, max_features: usize) -> Problem {
    let n = rng.random_range(0..=max_features);
    let features: Vec<LocalFeature> = (0..n).map(|_| random_feature(rng)).collect();
    Problem::from_features(&features)
}

/// Features as a sorted multiset, so problems compare up to relabeling of
/// points and lines.
pub fn feature_multiset(p: &Problem) -> Vec<String> {
    let mut v: Vec<String> = p.features().iter().map(|f| format!("{f:?}")).collect();
    v.sort();
    v
}

/// Checks reduction on one problem: idempotence, reducedness of the output,
/// camera-minimal mode reducing at least as far, and per-step dimension
/// accounting. Returns a description of the first violation.
pub fn check_reduction(p: &Problem) -> Result<(), String> {
    for mode in [ReduceMode::Minimal, ReduceMode::CameraMinimal] {
        let (r, steps) = p.reduce_traced(mode);
        if feature_multiset(&r.reduce(mode)) != feature_multiset(&r) {
            return Err(format!("{mode:?}: reduce is not idempotent on\n{p}"));
        }
        if !r.is_reduced(mode) {
            return Err(format!("{mode:?}: output not reduced"));
        }
        for s in &steps {
            let d3 = s.before.dim3d() - s.after.iter().map(LocalFeature::dim3d).sum::<i64>();
            let d2 = s.before.dim2d() - s.after.iter().map(LocalFeature::dim2d).sum::<i64>();
            let ok = if s.rule.preserves_minimality() { d3 == d2 } else { d3 > d2 };
            if !ok {
                return Err(format!("{:?} drops 3D {d3}, 2D {d2}", s.rule));
            }
        }
    }
    let m = p.reduce(ReduceMode::Minimal);
    let c = p.reduce(ReduceMode::CameraMinimal);
    if c.reduce(ReduceMode::Minimal).features().len() != c.features().len() {
        return Err("camera-minimal output still minimal-reducible".into());
    }
    if c.features().len() > m.features().len() {
        return Err("camera-minimal mode kept more features".into());
    }
    Ok(())
}

/// Minimality flags agree across the S3 orbit and the swap moves of `sig`.
pub fn check_flag_invariance(sig: &Signature, config: &RankTestConfig) -> Result<(), String> {
    let base = test_signature(sig, config).map_err(|e| e.to_string())?.minimal;
    let mut images = BTreeSet::new();
    for g in ViewPermutation::ALL {
        images.insert(apply_permutation(sig, &g));
    }
    for pair in 0..swap_pairs().len() {
        for dir in [SwapDirection::ToSink, SwapDirection::FromSink] {
            if let Ok(s) = apply_swap(sig, pair, dir) {
                images.insert(s);
            }
        }
    }
    for s in images {
        let m = test_signature(&s, config).map_err(|e| e.to_string())?.minimal;
        if m != base {
            return Err(format!("{sig} minimal={base} but {s} minimal={m}"));
        }
    }
    Ok(())
}

/// terminalize then liftToMinimal stays in the swap&label class.
pub fn check_round_trip(sig: &Signature) -> Result<(), String> {
    let p = Problem::expand(sig);
    let t = p.terminalize();
    if !t.is_terminal() {
        return Err(format!("terminalize({sig}) is not terminal"));
    }
    let lifted = t.lift_to_minimal().map_err(|e| e.to_string())?;
    let back = lifted.signature().map_err(|e| e.to_string())?;
    let (a, b) = (canonical_form(sig, ClassMode::SwapLabel), canonical_form(&back, ClassMode::SwapLabel));
    if a != b {
        return Err(format!("{sig} came back as {back}"));
    }
    Ok(())
}

/// Random rational circuit in `nvars` variables.
pub fn random_circuit(rng: &mut impl Rng, nvars: usize, depth: usize) -> Circuit {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.7) {
            Circuit::Var(rng.random_range(0..nvars))
        } else {
            Circuit::Const(rng.random_range(-5..=5))
        };
    }
    let a = Box::new(random_circuit(rng, nvars, depth - 1));
    let b = Box::new(random_circuit(rng, nvars, depth - 1));
    match rng.random_range(0..4) {
        0 => Circuit::Add(a, b),
        1 => Circuit::Sub(a, b),
        2 => Circuit::Mul(a, b),
        _ => Circuit::Div(a, b),
    }
}

/// Formal partial derivative by the sum, product and quotient rules.
pub fn formal_derivative(c: &Circuit, var: usize) -> Circuit {
    use Circuit::*;
    let b = |c: Circuit| Box::new(c);
    match c {
        Var(i) => Const((*i == var) as i64),
        Const(_) => Const(0),
        Add(x, y) => Add(b(formal_derivative(x, var)), b(formal_derivative(y, var))),
        Sub(x, y) => Sub(b(formal_derivative(x, var)), b(formal_derivative(y, var))),
        Mul(x, y) => Add(
            b(Mul(b(formal_derivative(x, var)), y.clone())),
            b(Mul(x.clone(), b(formal_derivative(y, var)))),
        ),
        Div(x, y) => Div(
            b(Sub(
                b(Mul(b(formal_derivative(x, var)), y.clone())),
                b(Mul(x.clone(), b(formal_derivative(y, var)))),
            )),
            b(Mul(y.clone(), y.clone())),
        ),
    }
}

/// Compares `dual_eval` with the formal derivative at a random point over
/// `F_q`. Points where the circuit divides by zero are skipped (`Ok(false)`).
pub fn check_dual_against_formal(c: &Circuit, nvars: usize, q: u64, rng: &mut impl Rng) -> Result<bool, String> {
    let point: Vec<Fp> = (0..nvars).map(|_| Fp::from_residue(rng.random_range(0..q), q)).collect();
    let Ok(value) = c.eval(&point) else { return Ok(false) };
    for var in 0..nvars {
        let dual = c.dual_eval(&point, var).map_err(|e| e.to_string())?;
        let Ok(formal) = formal_derivative(c, var).eval(&point) else { return Ok(false) };
        if dual.re != value || dual.eps != formal {
            return Err(format!("d/dx{var} of {c:?}: dual {:?}, formal {formal:?}", dual.eps));
        }
    }
    Ok(true)
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Signatures listed one per line (first `;`-separated field).
pub fn read_signatures(name: &str) -> Vec<Signature> {
    fs::read_to_string(data_path(name))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split(';').next().unwrap().parse().unwrap())
        .collect()
}
