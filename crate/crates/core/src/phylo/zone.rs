use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::geometry::SimilarityMatrix;
use crate::permutation::permutation_p_value;

#[derive(Debug, Clone, PartialEq)]
pub struct ZoneTestResult {
    pub same_zone_mean: f64,
    pub cross_zone_mean: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub seed: u64,
}

fn zone_means<Z: PartialEq>(sim: &SimilarityMatrix, zones: &[Z]) -> (f64, usize, f64, usize) {
    let (mut ss, mut ns, mut sc, mut nc) = (0.0, 0, 0.0, 0);
    for i in 0..zones.len() {
        for j in i + 1..zones.len() {
            if zones[i] == zones[j] {
                ss += sim.get(i, j);
                ns += 1;
            } else {
                sc += sim.get(i, j);
                nc += 1;
            }
        }
    }
    (ss, ns, sc, nc)
}

/// Same-zone minus cross-zone mean similarity, tested by permuting zone
/// labels across languages.
pub fn zone_permutation_test<Z>(
    similarity: &SimilarityMatrix,
    zones: &BTreeMap<String, Z>,
    n_perm: usize,
    seed: u64,
) -> Result<ZoneTestResult>
where
    Z: Ord + Clone + Sync,
{
    let labels: Vec<Z> = similarity
        .labels
        .iter()
        .map(|l| {
            zones.get(l).cloned().ok_or_else(|| Error::UnknownLanguage {
                code: l.clone(),
                known: zones.keys().cloned().collect::<Vec<_>>().join(", "),
            })
        })
        .collect::<Result<_>>()?;
    let distinct: BTreeSet<&Z> = labels.iter().collect();
    if distinct.len() < 2 {
        return Err(Error::InvalidInput(
            "zone test needs languages from at least 2 zones".into(),
        ));
    }
    let (ss, ns, sc, nc) = zone_means(similarity, &labels);
    if ns == 0 {
        return Err(Error::InvalidInput(
            "no two languages share a zone; same-zone similarity undefined".into(),
        ));
    }
    let (same, cross) = (ss / ns as f64, sc / nc as f64);
    let p_value = permutation_p_value(same - cross, n_perm, seed, |rng| {
        let mut shuffled = labels.clone();
        shuffled.shuffle(rng);
        let (ss, ns, sc, nc) = zone_means(similarity, &shuffled);
        ss / ns as f64 - sc / nc as f64
    })?;
    Ok(ZoneTestResult {
        same_zone_mean: same,
        cross_zone_mean: cross,
        p_value,
        n_permutations: n_perm,
        seed,
    })
}

pub fn zone_summary_tsv(result: &ZoneTestResult) -> String {
    format!(
        "same_zone_mean\tcross_zone_mean\tp_value\tn_perm\tseed\n{:.6}\t{:.6}\t{:.6}\t{}\t{}\n",
        result.same_zone_mean, result.cross_zone_mean, result.p_value, result.n_permutations, result.seed
    )
}
