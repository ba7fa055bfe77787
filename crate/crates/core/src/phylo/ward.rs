use crate::error::{Error, Result};
use crate::geometry::SimilarityMatrix;

use super::{LanguageTree, Merge};

fn check_distances(labels: &[String], d: &[Vec<f64>]) -> Result<()> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "clustering needs at least 2 items, found {n}"
        )));
    }
    if d.len() != n || d.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInput(format!("distance matrix is not {n}x{n}")));
    }
    for i in 0..n {
        if d[i][i].abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("nonzero diagonal at `{}`", labels[i])));
        }
        for j in 0..n {
            let (a, b) = (d[i][j], d[j][i]);
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "distance {a} between `{}` and `{}` is negative or not finite",
                    labels[i], labels[j]
                )));
            }
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "asymmetric distances between `{}` and `{}`: {a} vs {b}",
                    labels[i], labels[j]
                )));
            }
        }
    }
    Ok(())
}

/// Ward agglomeration with the Lance-Williams update applied to the distances
/// as given. Ties go to the smallest (a, b) pair of cluster ids.
pub fn ward_linkage(labels: &[String], distances: &[Vec<f64>]) -> Result<LanguageTree> {
    check_distances(labels, distances)?;
    let n = labels.len();
    let total = 2 * n - 1;
    let mut d = vec![vec![0.0; total]; total];
    for i in 0..n {
        for j in 0..n {
            // symmetrize so the update sees one value per pair
            d[i][j] = 0.5 * (distances[i][j] + distances[j][i]);
        }
    }
    let mut size = vec![0usize; total];
    size[..n].fill(1);
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for k in 0..n - 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for (x, &a) in active.iter().enumerate() {
            for &b in &active[x + 1..] {
                if best.is_none_or(|(_, _, bd)| d[a][b] < bd) {
                    best = Some((a, b, d[a][b]));
                }
            }
        }
        let (a, b, h) = best.expect("at least two active clusters");
        let new = n + k;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for &c in &active {
            if c == a || c == b {
                continue;
            }
            let nc = size[c] as f64;
            let v = ((na + nc) * d[a][c] + (nb + nc) * d[b][c] - nc * d[a][b]) / (na + nb + nc);
            d[new][c] = v;
            d[c][new] = v;
        }
        size[new] = size[a] + size[b];
        active.retain(|&c| c != a && c != b);
        active.push(new);
        merges.push(Merge {
            cluster_a: a,
            cluster_b: b,
            height: h,
            size: size[new],
        });
    }
    LanguageTree::new(labels.to_vec(), merges)
}

/// Ward over `1 - s` distances.
pub fn ward_from_similarity(similarity: &SimilarityMatrix) -> Result<LanguageTree> {
    ward_linkage(&similarity.labels, &similarity.to_distances())
}
