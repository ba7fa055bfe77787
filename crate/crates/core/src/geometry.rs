//! Cosine similarity, per-language centering and language-level similarity matrices.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::corpus::EmbeddingRecord;
use crate::error::{Error, Result};

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Cosine similarity, clamped to [-1, 1]. Zero vectors are rejected.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Degenerate("cosine of a zero vector".into()));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Unit-normalized copy, or `None` for the zero vector.
pub fn unit(u: &[f64]) -> Option<Vec<f64>> {
    let n = norm(u);
    (n > 0.0).then(|| u.iter().map(|x| x / n).collect())
}

/// Records with every vector shifted by its language's mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredSpace {
    pub records: Vec<EmbeddingRecord>,
    pub per_language_mean: BTreeMap<String, Vec<f64>>,
    pub dim: usize,
}

pub fn center_by_language(records: &[EmbeddingRecord]) -> Result<CenteredSpace> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot center an empty record collection".into()))?;
    let dim = first.vector.len();

    let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        if r.vector.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.vector.len(),
            });
        }
        let entry = sums.entry(r.language.as_str()).or_insert_with(|| (vec![0.0; dim], 0));
        for (s, x) in entry.0.iter_mut().zip(&r.vector) {
            *s += x;
        }
        entry.1 += 1;
    }
    let per_language_mean: BTreeMap<String, Vec<f64>> = sums
        .into_iter()
        .map(|(lang, (sum, n))| (lang.to_string(), sum.into_iter().map(|s| s / n as f64).collect()))
        .collect();

    let centered = records
        .iter()
        .map(|r| {
            let mean = &per_language_mean[&r.language];
            EmbeddingRecord {
                vector: r.vector.iter().zip(mean).map(|(x, m)| x - m).collect(),
                ..r.clone()
            }
        })
        .collect();

    Ok(CenteredSpace {
        records: centered,
        per_language_mean,
        dim,
    })
}

/// Symmetric matrix over labeled entities.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// `1 - s` distances with an exact zero diagonal.
    pub fn to_distances(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            0.0
                        } else {
                            (1.0 - self.values[i][j]).max(0.0)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("language");
        for l in &self.labels {
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                let _ = write!(out, "\t{v:.6}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimilarityMode {
    /// Mean raw-vector cosine over lemma strings attested in both languages.
    #[default]
    SharedLemma,
    /// Mean raw-vector cosine over every cross-language record pair.
    AllPairs,
}

impl SimilarityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityMode::SharedLemma => "shared-lemma",
            SimilarityMode::AllPairs => "all-pairs",
        }
    }
}

impl std::str::FromStr for SimilarityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared-lemma" => Ok(SimilarityMode::SharedLemma),
            "all-pairs" => Ok(SimilarityMode::AllPairs),
            other => Err(Error::InvalidInput(format!(
                "unknown similarity mode `{other}` (expected shared-lemma or all-pairs)"
            ))),
        }
    }
}

type PosVector = (crate::corpus::PartOfSpeech, Vec<f64>);

/// Similarity between languages, labels in sorted code order.
pub fn language_similarity_matrix(records: &[EmbeddingRecord], mode: SimilarityMode) -> Result<SimilarityMatrix> {
    // language -> lemma -> unit vectors, all in a canonical order
    let mut by_lang: BTreeMap<&str, BTreeMap<String, Vec<PosVector>>> = BTreeMap::new();
    for r in records {
        let u = unit(&r.vector)
            .ok_or_else(|| Error::Degenerate(format!("zero vector for ({}, {})", r.language, r.lemma)))?;
        by_lang
            .entry(r.language.as_str())
            .or_default()
            .entry(r.lemma.to_lowercase())
            .or_default()
            .push((r.pos, u));
    }
    for lemmas in by_lang.values_mut() {
        for entries in lemmas.values_mut() {
            entries.sort_by_key(|e| e.0);
        }
    }
    if by_lang.len() < 2 {
        return Err(Error::InvalidInput(
            "language similarity needs at least 2 languages".into(),
        ));
    }

    let labels: Vec<String> = by_lang.keys().map(|s| s.to_string()).collect();
    let langs: Vec<_> = by_lang.values().collect();
    let n = labels.len();

    let mean_units: Vec<Vec<f64>> = match mode {
        SimilarityMode::AllPairs => langs
            .iter()
            .map(|lemmas| {
                let dim = lemmas.values().next().map_or(0, |e| e[0].1.len());
                let mut sum = vec![0.0; dim];
                let mut count = 0usize;
                for (_, u) in lemmas.values().flatten() {
                    for (s, x) in sum.iter_mut().zip(u) {
                        *s += x;
                    }
                    count += 1;
                }
                sum.into_iter().map(|s| s / count as f64).collect()
            })
            .collect(),
        SimilarityMode::SharedLemma => Vec::new(),
    };

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let computed: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| match mode {
            SimilarityMode::AllPairs => Ok(dot(&mean_units[i], &mean_units[j]).clamp(-1.0, 1.0)),
            SimilarityMode::SharedLemma => {
                let (a, b) = (langs[i], langs[j]);
                let mut total = 0.0;
                let mut shared = 0usize;
                for (lemma, ea) in a {
                    let Some(eb) = b.get(lemma) else { continue };
                    let mut s = 0.0;
                    for (_, ua) in ea {
                        for (_, ub) in eb {
                            s += dot(ua, ub).clamp(-1.0, 1.0);
                        }
                    }
                    total += s / (ea.len() * eb.len()) as f64;
                    shared += 1;
                }
                if shared == 0 {
                    Err(Error::Degenerate(format!(
                        "languages {} and {} share no lemma",
                        labels[i], labels[j]
                    )))
                } else {
                    Ok(total / shared as f64)
                }
            }
        })
        .collect();

    let mut values = vec![vec![0.0; n]; n];
    for (i, row) in values.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for (&(i, j), v) in pairs.iter().zip(computed) {
        let v = v?;
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(SimilarityMatrix { labels, values })
}
