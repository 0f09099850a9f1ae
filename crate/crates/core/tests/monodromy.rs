//! Solution-set invariants of monodromy on the five-point problem.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use pl1p::monodromy::{monodromy_degree, track_all, DegreeStatus, MonodromyConfig, ParameterPath, ParametricSystem, SolutionSet};

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect()
}

#[test]
fn five_point_count_does_not_depend_on_the_seed() {
    let sys = ParametricSystem::five_point();
    for seed in [1, 2] {
        let r = monodromy_degree(&sys, &MonodromyConfig { seed, ..Default::default() }).unwrap();
        assert_eq!((r.count, r.status), (20, DegreeStatus::Stabilized), "seed {seed}");
        assert!(r.max_residual < 1e-10);
        for (i, x) in r.solutions.iter().enumerate() {
            for y in &r.solutions[..i] {
                let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                assert!(d > 1e-6);
            }
        }
    }
}

#[test]
fn a_loop_permutes_the_solution_set() {
    let sys = ParametricSystem::five_point();
    let cfg = MonodromyConfig::default();
    let r = monodromy_degree(&sys, &cfg).unwrap();
    let mut set = SolutionSet::new(cfg.cluster_tol);
    for x in &r.solutions {
        set.insert(x.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let waypoint = gaussian(sys.dim(), &mut rng);
    let out = ParameterPath::random_leg(r.base.clone(), waypoint.clone(), &mut rng);
    let back = ParameterPath::random_leg(waypoint, r.base.clone(), &mut rng);
    let mid: Vec<_> = track_all(&sys, &r.solutions, &out, &cfg.tracker).into_iter().map(Result::unwrap).collect();
    let ends: Vec<_> = track_all(&sys, &mid, &back, &cfg.tracker).into_iter().map(Result::unwrap).collect();
    let mut image = SolutionSet::new(cfg.cluster_tol);
    for x in ends {
        assert!(set.contains(&x), "a loop left the solution set");
        assert!(image.insert(x), "two solutions met");
    }
    assert_eq!(image.len(), 20);
}
