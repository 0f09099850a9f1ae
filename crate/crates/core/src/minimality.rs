//! Minimality by Jacobian rank of the joint camera map over prime fields.
//!
//! A balanced problem is minimal iff its Jacobian has full rank at a generic
//! point. Full rank at a random point over `F_q` proves full rank generically,
//! so a positive answer is final. Negative answers are only provisional and
//! are retried with further random points and further primes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chart::ChartLayout;
use crate::error::{Error, Result};
use crate::ffalg::DEFAULT_PRIMES;
use crate::model::Problem;
use crate::signature::Signature;
use crate::symmetry::{enumerate_classes, ClassMode};

/// Primes and number of random instances per prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankTestConfig {
    pub primes: Vec<u64>,
    pub trials: usize,
}

impl Default for RankTestConfig {
    fn default() -> Self {
        RankTestConfig {
            primes: DEFAULT_PRIMES.to_vec(),
            trials: 5,
        }
    }
}

/// Outcome of the rank test on one problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub minimal: bool,
    /// Primes actually used, in order.
    pub primes_tested: Vec<u64>,
    /// Seeds of all instances drawn, in order.
    pub trial_seeds: Vec<u64>,
    /// Largest rank seen per tested prime.
    pub ranks: Vec<usize>,
    /// Number of Jacobian rows.
    pub full_rank: usize,
}

impl Verdict {
    /// Rank deficit under each tested prime.
    pub fn deficits(&self) -> Vec<usize> {
        self.ranks.iter().map(|r| self.full_rank - r).collect()
    }

    /// True if the primes disagree on the deficit; such classes deserve a
    /// manual look.
    pub fn is_inconsistent(&self) -> bool {
        !self.minimal && self.deficits().windows(2).any(|w| w[0] != w[1])
    }
}

/// FNV-1a over the counts; stable across platforms and toolchains.
pub fn signature_seed(sig: &Signature) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &c in sig.counts() {
        for b in c.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

fn trial_seed(base: u64, prime_index: usize, trial: usize) -> u64 {
    base ^ ((prime_index as u64) << 32 | trial as u64).wrapping_mul(0x9e3779b97f4a7c15)
}

/// Best rank of the Jacobian over `trials` random instances over `F_q`.
/// Stops early at full rank.
pub fn best_rank(layout: &ChartLayout, q: u64, trials: usize, seeds: impl Fn(usize) -> u64, used: &mut Vec<u64>) -> Result<usize> {
    let mut best = 0;
    for t in 0..trials {
        let seed = seeds(t);
        used.push(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = layout.sample_fp(q, &mut rng)?;
        best = best.max(layout.jacobian_rank_fp(&x)?);
        if best == layout.num_images() {
            break;
        }
    }
    Ok(best)
}

/// Does the Jacobian reach full rank at one of `trials` instances over `F_q`?
pub fn jacobian_full_rank(prob: &Problem, q: u64, trials: usize, seed: u64) -> Result<bool> {
    let layout = ChartLayout::new(prob);
    if !layout.is_square() {
        return Err(Error::Unbalanced(prob.balance_deficit()));
    }
    let rank = best_rank(&layout, q, trials, |t| trial_seed(seed, 0, t), &mut Vec::new())?;
    Ok(rank == layout.num_images())
}

/// Runs the full retry policy on a balanced problem.
pub fn test_problem(prob: &Problem, seed: u64, config: &RankTestConfig) -> Result<Verdict> {
    let layout = ChartLayout::new(prob);
    if !layout.is_square() {
        return Err(Error::Unbalanced(prob.balance_deficit()));
    }
    let mut verdict = Verdict {
        minimal: false,
        primes_tested: Vec::new(),
        trial_seeds: Vec::new(),
        ranks: Vec::new(),
        full_rank: layout.num_images(),
    };
    let mut last_err = None;
    for (pi, &q) in config.primes.iter().enumerate() {
        verdict.primes_tested.push(q);
        match best_rank(&layout, q, config.trials, |t| trial_seed(seed, pi, t), &mut verdict.trial_seeds) {
            Ok(rank) => {
                verdict.ranks.push(rank);
                if rank == verdict.full_rank {
                    verdict.minimal = true;
                    return Ok(verdict);
                }
            }
            // a chart failure under one prime moves on to the next
            Err(e @ Error::ChartFailure { .. }) => {
                verdict.primes_tested.pop();
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    match (verdict.primes_tested.is_empty(), last_err) {
        (true, Some(e)) => Err(e),
        _ => Ok(verdict),
    }
}

/// Minimality of the problem a balanced signature describes.
pub fn test_signature(sig: &Signature, config: &RankTestConfig) -> Result<Verdict> {
    test_problem(&Problem::expand(sig), signature_seed(sig), config)
}

/// Tests one representative per class, in lex-decreasing signature order.
pub fn classify_catalog(mode: ClassMode, config: &RankTestConfig) -> Result<Vec<(Signature, Verdict)>> {
    let reps: Vec<Signature> = enumerate_classes(mode).collect();
    classify_signatures(&reps, config)
}

/// Tests a batch of signatures in parallel; output order follows the input.
pub fn classify_signatures(sigs: &[Signature], config: &RankTestConfig) -> Result<Vec<(Signature, Verdict)>> {
    sigs.par_iter()
        .map(|sig| Ok((*sig, test_signature(sig, config)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(entries: &[(&str, u64)]) -> Signature {
        Signature::from_named(entries).unwrap()
    }

    #[test]
    fn table_entries_are_minimal() {
        for s in [sig(&[("c00", 3), ("f", 1)]), sig(&[("c00", 2), ("c01a", 3), ("f", 1)])] {
            assert!(jacobian_full_rank(&Problem::expand(&s), 32003, 5, 1).unwrap(), "{s:?}");
        }
    }

    #[test]
    fn unbalanced_problems_are_rejected() {
        let p = Problem::expand(&sig(&[("c00", 4)]));
        assert_eq!(jacobian_full_rank(&p, 32003, 1, 0), Err(Error::Unbalanced(1)));
    }

    #[test]
    fn camera_seeing_nothing_is_not_determined() {
        // eleven points, none of them seen by view 3
        let s = sig(&[("c01c", 11)]);
        let v = test_signature(&s, &RankTestConfig::default()).unwrap();
        assert!(!v.minimal);
        assert_eq!(v.primes_tested, DEFAULT_PRIMES.to_vec());
        assert_eq!(v.trial_seeds.len(), 15);
        assert!(!v.is_inconsistent());
    }

    #[test]
    fn seeds_are_deterministic() {
        let s = sig(&[("c10", 1), ("c01b", 2), ("f", 1), ("c13a", 2)]);
        assert_eq!(signature_seed(&s), signature_seed(&s));
        assert_ne!(signature_seed(&s), signature_seed(&Signature::zero()));
    }
}
