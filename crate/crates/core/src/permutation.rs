//! Seeded permutation engine shared by the noun-class and zone tests.
//!
//! Permutation `i` draws from a ChaCha8 generator keyed by `seed` on stream
//! `i`, so the permutations can be evaluated in any order, on any number of
//! threads, and always yield the same count.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Generator for permutation `index` under `seed`.
pub fn permutation_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn tie_tolerance(observed: f64) -> f64 {
    1e-12 * observed.abs().max(1.0)
}

/// Add-one p-value: `(1 + #{permuted >= observed}) / (n_perm + 1)`.
///
/// `statistic` is called once per permutation with that permutation's
/// generator. Permuted statistics equal to the observed one (within a
/// relative 1e-12) are counted as exceeding it.
pub fn permutation_p_value<F>(observed: f64, n_perm: usize, seed: u64, statistic: F) -> Result<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if n_perm < 1 {
        return Err(Error::InvalidInput("n_perm must be at least 1".into()));
    }
    let threshold = observed - tie_tolerance(observed);
    let exceed = (0..n_perm as u64)
        .into_par_iter()
        .filter(|&i| statistic(&mut permutation_rng(seed, i)) >= threshold)
        .count();
    Ok((1 + exceed) as f64 / (n_perm + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairLabel {
    Within,
    Between,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationOutcome {
    pub observed: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub seed: u64,
}

/// `mean(within) - mean(between)`; `None` when either group is empty.
pub fn mean_difference(values: &[f64], labels: &[PairLabel]) -> Option<f64> {
    let (mut sw, mut nw, mut sb, mut nb) = (0.0, 0usize, 0.0, 0usize);
    for (v, l) in values.iter().zip(labels) {
        match l {
            PairLabel::Within => {
                sw += v;
                nw += 1;
            }
            PairLabel::Between => {
                sb += v;
                nb += 1;
            }
        }
    }
    (nw > 0 && nb > 0).then(|| sw / nw as f64 - sb / nb as f64)
}

/// One-sided label-permutation test of within > between.
pub fn permutation_test(values: &[f64], labels: &[PairLabel], n_perm: usize, seed: u64) -> Result<PermutationOutcome> {
    if values.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} values but {} labels",
            values.len(),
            labels.len()
        )));
    }
    let observed = mean_difference(values, labels)
        .ok_or_else(|| Error::InvalidInput("permutation test needs both within and between values".into()))?;
    let p_value = permutation_p_value(observed, n_perm, seed, |rng| {
        let mut shuffled = labels.to_vec();
        shuffled.shuffle(rng);
        mean_difference(values, &shuffled).unwrap_or(f64::NEG_INFINITY)
    })?;
    Ok(PermutationOutcome {
        observed,
        p_value,
        n_permutations: n_perm,
        seed,
    })
}
