//! Cross-lingual noun-class statistics: per-language class centroids in the
//! centered space, within- versus between-class similarity with a
//! permutation test, and prefix extraction.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{EmbeddingRecord, PartOfSpeech};
use crate::error::{Error, Result};
use crate::geometry::{cosine, CenteredSpace};
use rand::seq::SliceRandom;

use crate::permutation::{permutation_p_value, permutation_test, PairLabel, PermutationOutcome};

pub const DEFAULT_MIN_MEMBERS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassCentroidSet {
    /// (language, class) -> mean centered vector; only for groups reaching `min_members`.
    pub centroids: BTreeMap<(String, u8), Vec<f64>>,
    /// (language, class) -> member count for every group seen.
    pub counts: BTreeMap<(String, u8), usize>,
    pub min_members: usize,
}

impl ClassCentroidSet {
    /// Classes with a centroid in at least two languages.
    pub fn productive_classes(&self) -> BTreeSet<u8> {
        let mut langs: BTreeMap<u8, usize> = BTreeMap::new();
        for (_, class) in self.centroids.keys() {
            *langs.entry(*class).or_default() += 1;
        }
        langs.into_iter().filter(|(_, n)| *n >= 2).map(|(c, _)| c).collect()
    }
}

pub fn class_centroids(space: &CenteredSpace, min_members: usize) -> Result<ClassCentroidSet> {
    let mut sums: BTreeMap<(String, u8), (Vec<f64>, usize)> = BTreeMap::new();
    for r in &space.records {
        let (PartOfSpeech::Noun, Some(class)) = (r.pos, r.noun_class) else {
            continue;
        };
        let e = sums
            .entry((r.language.clone(), class))
            .or_insert_with(|| (vec![0.0; space.dim], 0));
        for (s, x) in e.0.iter_mut().zip(&r.vector) {
            *s += x;
        }
        e.1 += 1;
    }
    if sums.is_empty() {
        return Err(Error::InvalidInput("no noun records with a noun class".into()));
    }
    let counts = sums.iter().map(|(k, (_, n))| (k.clone(), *n)).collect();
    let centroids = sums
        .into_iter()
        .filter(|(_, (_, n))| *n >= min_members.max(1))
        .map(|(k, (sum, n))| (k, sum.into_iter().map(|s| s / n as f64).collect()))
        .collect();
    Ok(ClassCentroidSet {
        centroids,
        counts,
        min_members,
    })
}

/// Cross-lingual pair values over classed units (centroids or records).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPairs {
    pub values: Vec<f64>,
    pub labels: Vec<PairLabel>,
    /// Unit indices of each pair.
    pub ends: Vec<(usize, usize)>,
    /// Language index and class of every unit.
    pub unit_language: Vec<usize>,
    pub unit_class: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSimilarity {
    pub within_mean: f64,
    pub between_mean: f64,
    pub per_class_min_within: BTreeMap<u8, f64>,
    pub per_class_mean_within: BTreeMap<u8, f64>,
    /// Distinct languages contributing to each class's within pairs.
    pub per_class_languages: BTreeMap<u8, usize>,
    pub pairs: ClassPairs,
}

/// Cosine over every cross-language pair of units.
fn class_pairs(units: &[(&str, u8, &[f64])]) -> ClassPairs {
    let langs: BTreeSet<&str> = units.iter().map(|u| u.0).collect();
    let lang_index: BTreeMap<&str, usize> = langs.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut pairs = ClassPairs {
        values: Vec::new(),
        labels: Vec::new(),
        ends: Vec::new(),
        unit_language: units.iter().map(|u| lang_index[u.0]).collect(),
        unit_class: units.iter().map(|u| u.1).collect(),
    };
    for (i, (la, ca, va)) in units.iter().enumerate() {
        for (j, (lb, cb, vb)) in units.iter().enumerate().skip(i + 1) {
            if la == lb {
                continue;
            }
            let Ok(s) = cosine(va, vb) else { continue };
            pairs.values.push(s);
            pairs.ends.push((i, j));
            pairs.labels.push(if ca == cb {
                PairLabel::Within
            } else {
                PairLabel::Between
            });
        }
    }
    pairs
}

fn summarize(pairs: ClassPairs, unit_names: &[&str]) -> Result<ClassSimilarity> {
    let (mut sw, mut nw, mut sb, mut nb) = (0.0, 0usize, 0.0, 0usize);
    let mut per_min: BTreeMap<u8, f64> = BTreeMap::new();
    let mut per_sum: BTreeMap<u8, (f64, usize)> = BTreeMap::new();
    let mut languages: BTreeMap<u8, BTreeSet<&str>> = BTreeMap::new();
    for ((v, l), &(a, b)) in pairs.values.iter().zip(&pairs.labels).zip(&pairs.ends) {
        match l {
            PairLabel::Within => {
                sw += v;
                nw += 1;
                let class = pairs.unit_class[a];
                let m = per_min.entry(class).or_insert(f64::INFINITY);
                *m = m.min(*v);
                let s = per_sum.entry(class).or_default();
                s.0 += v;
                s.1 += 1;
                let set = languages.entry(class).or_default();
                set.insert(unit_names[a]);
                set.insert(unit_names[b]);
            }
            PairLabel::Between => {
                sb += v;
                nb += 1;
            }
        }
    }
    if nw == 0 {
        return Err(Error::InvalidInput("no cross-lingual pair shares a noun class".into()));
    }
    if nb == 0 {
        return Err(Error::InvalidInput(
            "no cross-lingual pair of different classes; between-class similarity undefined".into(),
        ));
    }
    Ok(ClassSimilarity {
        within_mean: sw / nw as f64,
        between_mean: sb / nb as f64,
        per_class_min_within: per_min,
        per_class_mean_within: per_sum.into_iter().map(|(c, (s, n))| (c, s / n as f64)).collect(),
        per_class_languages: languages.into_iter().map(|(c, l)| (c, l.len())).collect(),
        pairs,
    })
}

/// Cosine over every pair of centroids from different languages.
pub fn within_between_similarity(centroids: &ClassCentroidSet) -> Result<ClassSimilarity> {
    let units: Vec<(&str, u8, &[f64])> = centroids
        .centroids
        .iter()
        .map(|((l, c), v)| (l.as_str(), *c, v.as_slice()))
        .collect();
    let names: Vec<&str> = units.iter().map(|u| u.0).collect();
    summarize(class_pairs(&units), &names)
}

/// The same statistics over raw member pairs instead of centroids.
pub fn pairwise_class_similarity(space: &CenteredSpace) -> Result<ClassSimilarity> {
    let units: Vec<(&str, u8, &[f64])> = space
        .records
        .iter()
        .filter_map(|r| match (r.pos, r.noun_class) {
            (PartOfSpeech::Noun, Some(c)) => Some((r.language.as_str(), c, r.vector.as_slice())),
            _ => None,
        })
        .collect();
    if units.is_empty() {
        return Err(Error::InvalidInput("no noun records with a noun class".into()));
    }
    let names: Vec<&str> = units.iter().map(|u| u.0).collect();
    summarize(class_pairs(&units), &names)
}

/// What the class test permutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PermutationScheme {
    /// Class labels shuffled among the units of each language; pair labels
    /// follow. Pairs sharing a unit stay dependent, as in the data.
    #[default]
    WithinLanguage,
    /// Pair labels shuffled directly, treating pairs as exchangeable.
    PairLabels,
}

impl std::str::FromStr for PermutationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "within-language" => Ok(PermutationScheme::WithinLanguage),
            "pair-labels" => Ok(PermutationScheme::PairLabels),
            other => Err(Error::InvalidInput(format!(
                "unknown permutation scheme `{other}` (expected within-language or pair-labels)"
            ))),
        }
    }
}

impl PermutationScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            PermutationScheme::WithinLanguage => "within-language",
            PermutationScheme::PairLabels => "pair-labels",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassTestResult {
    pub within_mean: f64,
    pub between_mean: f64,
    pub per_class_min_within: BTreeMap<u8, f64>,
    pub p_value: f64,
    pub n_permutations: usize,
    pub seed: u64,
    pub scheme: PermutationScheme,
}

fn relabeled_difference(pairs: &ClassPairs, classes: &[u8]) -> f64 {
    let (mut sw, mut nw, mut sb, mut nb) = (0.0, 0usize, 0.0, 0usize);
    for (v, &(a, b)) in pairs.values.iter().zip(&pairs.ends) {
        if classes[a] == classes[b] {
            sw += v;
            nw += 1;
        } else {
            sb += v;
            nb += 1;
        }
    }
    if nw == 0 || nb == 0 {
        return f64::NEG_INFINITY;
    }
    sw / nw as f64 - sb / nb as f64
}

/// One-sided permutation test of within-class over between-class similarity.
pub fn class_test(
    similarity: &ClassSimilarity,
    n_perm: usize,
    seed: u64,
    scheme: PermutationScheme,
) -> Result<ClassTestResult> {
    let pairs = &similarity.pairs;
    let p_value = match scheme {
        PermutationScheme::PairLabels => {
            let PermutationOutcome { p_value, .. } = permutation_test(&pairs.values, &pairs.labels, n_perm, seed)?;
            p_value
        }
        PermutationScheme::WithinLanguage => {
            let observed = similarity.within_mean - similarity.between_mean;
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (u, &l) in pairs.unit_language.iter().enumerate() {
                groups.entry(l).or_default().push(u);
            }
            permutation_p_value(observed, n_perm, seed, |rng| {
                let mut classes = pairs.unit_class.clone();
                for members in groups.values() {
                    let mut labels: Vec<u8> = members.iter().map(|&u| classes[u]).collect();
                    labels.shuffle(rng);
                    for (&u, c) in members.iter().zip(labels) {
                        classes[u] = c;
                    }
                }
                relabeled_difference(pairs, &classes)
            })?
        }
    };
    Ok(ClassTestResult {
        within_mean: similarity.within_mean,
        between_mean: similarity.between_mean,
        per_class_min_within: similarity.per_class_min_within.clone(),
        p_value,
        n_permutations: n_perm,
        seed,
        scheme,
    })
}

pub const MAX_PREFIX_CHARS: usize = 4;

/// Longest common leading substring of each (language, class) group's
/// lemmas, at most four characters, `-` when empty.
pub fn extract_class_prefixes(records: &[EmbeddingRecord], min_members: usize) -> BTreeMap<(String, u8), String> {
    let mut groups: BTreeMap<(String, u8), Vec<Vec<char>>> = BTreeMap::new();
    for r in records {
        if let (PartOfSpeech::Noun, Some(c)) = (r.pos, r.noun_class) {
            groups
                .entry((r.language.clone(), c))
                .or_default()
                .push(r.lemma.to_lowercase().chars().collect());
        }
    }
    groups
        .into_iter()
        .filter(|(_, lemmas)| lemmas.len() >= min_members.max(1))
        .map(|(k, lemmas)| {
            let first = &lemmas[0];
            let mut n = first.len();
            for l in &lemmas[1..] {
                n = n.min(first.iter().zip(l).take_while(|(a, b)| a == b).count());
            }
            let prefix: String = first[..n.min(MAX_PREFIX_CHARS)].iter().collect();
            (k, if prefix.is_empty() { "-".to_string() } else { prefix })
        })
        .collect()
}

pub fn class_report_tsv(similarity: &ClassSimilarity) -> String {
    let mut out = String::from("class\tn_languages\twithin_min\twithin_mean\n");
    for (class, min) in &similarity.per_class_min_within {
        out.push_str(&format!(
            "{class}\t{}\t{min:.6}\t{:.6}\n",
            similarity.per_class_languages.get(class).copied().unwrap_or(0),
            similarity.per_class_mean_within[class]
        ));
    }
    out
}

pub fn test_summary_tsv(result: &ClassTestResult) -> String {
    format!(
        "within_mean\tbetween_mean\tp_value\tn_perm\tseed\tscheme\n{:.6}\t{:.6}\t{:.6e}\t{}\t{}\t{}\n",
        result.within_mean,
        result.between_mean,
        result.p_value,
        result.n_permutations,
        result.seed,
        result.scheme.as_str()
    )
}

/// Classes as rows, languages as columns.
pub fn prefix_table_tsv(prefixes: &BTreeMap<(String, u8), String>) -> String {
    let langs: BTreeSet<&str> = prefixes.keys().map(|(l, _)| l.as_str()).collect();
    let classes: BTreeSet<u8> = prefixes.keys().map(|(_, c)| *c).collect();
    let mut out = String::from("class");
    for l in &langs {
        out.push('\t');
        out.push_str(l);
    }
    out.push('\n');
    for c in classes {
        out.push_str(&c.to_string());
        for l in &langs {
            out.push('\t');
            out.push_str(prefixes.get(&(l.to_string(), c)).map_or("", String::as_str));
        }
        out.push('\n');
    }
    out
}
