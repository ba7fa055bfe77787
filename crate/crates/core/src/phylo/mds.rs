use std::collections::BTreeMap;
use std::fmt::Write;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MdsProjection {
    pub coordinates: BTreeMap<String, Vec<f64>>,
    /// Kruskal stress-1 of the reconstructed distances.
    pub stress: f64,
    /// Every eigenvalue of the double-centered matrix, descending.
    pub eigenvalues: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Classical (Torgerson) scaling. Axes whose eigenvalue is not positive
/// collapse to zero and are reported; each axis is flipped so the first
/// label with a nonzero coordinate sits on the positive side.
pub fn classical_mds(labels: &[String], distances: &[Vec<f64>], dims: usize) -> Result<MdsProjection> {
    let n = labels.len();
    if dims == 0 {
        return Err(Error::InvalidInput("dims must be at least 1".into()));
    }
    if n <= dims {
        return Err(Error::InvalidInput(format!(
            "MDS into {dims} dimensions needs more than {dims} points, found {n}"
        )));
    }
    if distances.len() != n || distances.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("distance matrix is not {n}x{n}")));
    }
    for i in 0..n {
        if distances[i][i].abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("nonzero diagonal at `{}`", labels[i])));
        }
        for j in 0..i {
            let (a, b) = (distances[i][j], distances[j][i]);
            if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "distances between `{}` and `{}` are asymmetric or not finite",
                    labels[i], labels[j]
                )));
            }
        }
    }
    let mut warnings = Vec::new();
    let d2 = DMatrix::from_fn(n, n, |i, j| {
        let d = 0.5 * (distances[i][j] + distances[j][i]);
        d * d
    });
    let row_means: Vec<f64> = (0..n).map(|i| d2.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (d2[(i, j)] - row_means[i] - row_means[j] + grand));

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let scale = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);

    if scale == 0.0 {
        warnings.push("all distances are zero; every point placed at the origin".to_string());
    }
    let negative = eigenvalues.iter().filter(|&&v| v < -tol).count();
    if negative > 0 {
        warnings.push(format!(
            "{negative} negative eigenvalue(s) truncated; distances are not Euclidean"
        ));
    }

    // canonical label order decides axis signs
    let mut by_label: Vec<usize> = (0..n).collect();
    by_label.sort_by(|&x, &y| labels[x].cmp(&labels[y]));

    let mut coords = vec![vec![0.0; dims]; n];
    for (axis, &k) in order.iter().take(dims).enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda <= tol {
            if scale > 0.0 {
                warnings.push(format!(
                    "axis {} has non-positive eigenvalue {lambda:.3e}; set to zero",
                    axis + 1
                ));
            }
            continue;
        }
        let s = lambda.sqrt();
        let v = eig.eigenvectors.column(k);
        let flip = by_label
            .iter()
            .map(|&i| v[i])
            .find(|x| x.abs() > 1e-12)
            .is_some_and(|x| x < 0.0);
        let sign = if flip { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[i][axis] = sign * s * v[i];
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..i {
            let d = distances[i][j];
            let e = euclid(&coords[i], &coords[j]);
            num += (d - e) * (d - e);
            den += d * d;
        }
    }
    let stress = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
    Ok(MdsProjection {
        coordinates: labels.iter().cloned().zip(coords).collect(),
        stress,
        eigenvalues,
        warnings,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl MdsProjection {
    /// Pairwise output distance between two labels.
    pub fn distance(&self, a: &str, b: &str) -> Option<f64> {
        Some(euclid(self.coordinates.get(a)?, self.coordinates.get(b)?))
    }
}

/// `language<TAB>x<TAB>y...` rows in label order.
pub fn mds_tsv(projection: &MdsProjection) -> String {
    let dims = projection.coordinates.values().next().map_or(0, Vec::len);
    let mut out = String::from("language");
    for k in 0..dims {
        match k {
            0 => out.push_str("\tx"),
            1 => out.push_str("\ty"),
            _ => {
                let _ = write!(out, "\tdim{}", k + 1);
            }
        }
    }
    out.push('\n');
    for (label, p) in &projection.coordinates {
        out.push_str(label);
        for x in p {
            let _ = write!(out, "\t{x:.6}");
        }
        out.push('\n');
    }
    out
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties; `None` when
/// either side is constant or the lengths differ.
pub fn spearman_correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}
