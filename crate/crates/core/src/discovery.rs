//! Cross-lingual cognate candidate discovery.
//!
//! Two pathways feed the candidate list: identical (case-folded) lemma
//! strings attested in enough languages, and connected components of a
//! record graph built in the language-centered space. Overlapping results
//! of the two are unioned, tagged `both`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;

use crate::corpus::{EmbeddingRecord, PartOfSpeech};
use crate::error::{Error, Result};
use crate::geometry::{dot, unit, CenteredSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    SurfaceShared,
    NeighborCluster,
    Both,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::SurfaceShared => "surface-shared",
            Provenance::NeighborCluster => "neighbor-cluster",
            Provenance::Both => "both",
        }
    }

    fn union(self, other: Provenance) -> Provenance {
        if self == other {
            self
        } else {
            Provenance::Both
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "surface-shared" => Ok(Provenance::SurfaceShared),
            "neighbor-cluster" => Ok(Provenance::NeighborCluster),
            "both" => Ok(Provenance::Both),
            other => Err(Error::InvalidInput(format!("unknown provenance `{other}`"))),
        }
    }
}

/// A record taking part in a candidate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Member {
    pub language: String,
    pub lemma: String,
    pub pos: PartOfSpeech,
    pub gloss: Option<String>,
}

impl Member {
    fn of(r: &EmbeddingRecord) -> Self {
        Member {
            language: r.language.clone(),
            lemma: r.lemma.clone(),
            pos: r.pos,
            gloss: r.gloss.clone(),
        }
    }

    fn key(&self) -> (&str, &str, PartOfSpeech) {
        (&self.language, &self.lemma, self.pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceStats {
    pub mean_sim: f64,
    pub min_sim: f64,
    pub stdev_sim: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CognateCandidate {
    pub root: String,
    /// Sorted by (language, lemma, pos).
    pub members: Vec<Member>,
    pub language_count: usize,
    pub pos: PartOfSpeech,
    pub coherence: Option<CoherenceStats>,
    pub provenance: Provenance,
}

impl CognateCandidate {
    fn from_members(mut members: Vec<Member>, provenance: Provenance) -> Self {
        members.sort();
        members.dedup_by(|a, b| a.key() == b.key());
        let language_count = members
            .iter()
            .map(|m| m.language.as_str())
            .collect::<BTreeSet<_>>()
            .len();
        CognateCandidate {
            root: representative_root(&members),
            pos: majority_pos(&members),
            language_count,
            members,
            coherence: None,
            provenance,
        }
    }

    pub fn languages(&self) -> Vec<&str> {
        self.members
            .iter()
            .map(|m| m.language.as_str())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Most common gloss among members, ties broken lexicographically.
    pub fn majority_gloss(&self) -> Option<&str> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for g in self.members.iter().filter_map(|m| m.gloss.as_deref()) {
            *counts.entry(g).or_default() += 1;
        }
        pick_max(counts)
    }
}

fn pick_max<K: Ord + Copy>(counts: BTreeMap<K, usize>) -> Option<K> {
    // BTreeMap iterates keys ascending; keep the first maximum
    let mut best: Option<(K, usize)> = None;
    for (k, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k)
}

fn representative_root(members: &[Member]) -> String {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for m in members {
        *counts.entry(m.lemma.to_lowercase()).or_default() += 1;
    }
    let mut best: Option<(String, usize)> = None;
    for (k, c) in counts {
        if best.as_ref().is_none_or(|(_, bc)| c > *bc) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k).unwrap_or_default()
}

fn majority_pos(members: &[Member]) -> PartOfSpeech {
    let mut counts: BTreeMap<PartOfSpeech, usize> = BTreeMap::new();
    for m in members {
        *counts.entry(m.pos).or_default() += 1;
    }
    pick_max(counts).unwrap_or(PartOfSpeech::Other)
}

/// Lookup from member keys to unit vectors of a centered space.
pub struct SpaceIndex<'a> {
    space: &'a CenteredSpace,
    units: Vec<Option<Vec<f64>>>,
    by_key: HashMap<(&'a str, &'a str, PartOfSpeech), usize>,
}

impl<'a> SpaceIndex<'a> {
    pub fn new(space: &'a CenteredSpace) -> Self {
        let units = space.records.par_iter().map(|r| unit(&r.vector)).collect();
        let by_key = space
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| ((r.language.as_str(), r.lemma.as_str(), r.pos), i))
            .collect();
        SpaceIndex { space, units, by_key }
    }

    fn lookup(&self, m: &Member) -> Option<(&'a str, &[f64])> {
        let &i = self.by_key.get(&m.key())?;
        let u = self.units[i].as_deref()?;
        Some((self.space.records[i].language.as_str(), u))
    }

    /// Statistics over all cross-lingual member pairs that have non-zero vectors.
    pub fn coherence(&self, members: &[Member]) -> Option<CoherenceStats> {
        let found: Vec<(&str, &[f64])> = members.iter().filter_map(|m| self.lookup(m)).collect();
        let mut sims = Vec::new();
        for (i, (la, ua)) in found.iter().enumerate() {
            for (lb, ub) in &found[i + 1..] {
                if la != lb {
                    sims.push(dot(ua, ub).clamp(-1.0, 1.0));
                }
            }
        }
        coherence_of(&sims)
    }

    /// Number of members present (with a non-zero vector) in this space.
    pub fn coverage(&self, members: &[Member]) -> usize {
        members.iter().filter(|m| self.lookup(m).is_some()).count()
    }
}

pub fn coherence_of(sims: &[f64]) -> Option<CoherenceStats> {
    if sims.is_empty() {
        return None;
    }
    let n = sims.len() as f64;
    let mean = sims.iter().sum::<f64>() / n;
    let var = sims.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let min = sims.iter().copied().fold(f64::INFINITY, f64::min);
    Some(CoherenceStats {
        mean_sim: mean,
        min_sim: min.min(mean),
        stdev_sim: var.sqrt(),
    })
}

/// Fill in coherence statistics from `space` for every candidate.
pub fn annotate_coherence(candidates: &mut [CognateCandidate], space: &CenteredSpace) {
    let index = SpaceIndex::new(space);
    candidates
        .par_iter_mut()
        .for_each(|c| c.coherence = index.coherence(&c.members));
}

/// One candidate per case-folded lemma attested in at least `min_languages` languages.
pub fn surface_shared_candidates(records: &[EmbeddingRecord], min_languages: usize) -> Vec<CognateCandidate> {
    let mut by_lemma: BTreeMap<String, Vec<Member>> = BTreeMap::new();
    for r in records {
        by_lemma.entry(r.lemma.to_lowercase()).or_default().push(Member::of(r));
    }
    by_lemma
        .into_values()
        .map(|members| CognateCandidate::from_members(members, Provenance::SurfaceShared))
        .filter(|c| c.language_count >= min_languages.max(1))
        .collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root index wins, keeps component ids order-stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Edges of the record graph: pairs `(i, j)`, `i < j`, from different
/// languages that are mutual nearest cross-lingual neighbors or have
/// cosine at least `sim_threshold`. A neighbor at cosine <= 0 does not count.
pub fn neighbor_edges(space: &CenteredSpace, sim_threshold: f64) -> Result<Vec<(usize, usize)>> {
    if !(sim_threshold > 0.0 && sim_threshold < 1.0) {
        return Err(Error::InvalidInput(format!(
            "similarity threshold {sim_threshold} outside (0, 1)"
        )));
    }
    let records = &space.records;
    let langs: BTreeSet<&str> = records.iter().map(|r| r.language.as_str()).collect();
    let lang_ids: HashMap<&str, usize> = langs.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let lang_of: Vec<usize> = records.iter().map(|r| lang_ids[r.language.as_str()]).collect();
    let units: Vec<Option<Vec<f64>>> = records.par_iter().map(|r| unit(&r.vector)).collect();
    let n_langs = langs.len();

    // per record: best neighbor in each language, and threshold neighbors j > i
    let rows: Vec<(Vec<Option<usize>>, Vec<usize>)> = (0..records.len())
        .into_par_iter()
        .map(|i| {
            let mut best: Vec<Option<(f64, usize)>> = vec![None; n_langs];
            let mut above = Vec::new();
            let Some(ui) = units[i].as_deref() else {
                return (vec![None; n_langs], above);
            };
            for (j, uj) in units.iter().enumerate() {
                if lang_of[j] == lang_of[i] {
                    continue;
                }
                let Some(uj) = uj.as_deref() else { continue };
                let s = dot(ui, uj);
                let slot = &mut best[lang_of[j]];
                if s > 0.0 && slot.is_none_or(|(bs, _)| s > bs) {
                    *slot = Some((s, j));
                }
                if j > i && s >= sim_threshold {
                    above.push(j);
                }
            }
            (best.into_iter().map(|b| b.map(|(_, j)| j)).collect(), above)
        })
        .collect();

    let mut edges = Vec::new();
    for (i, (best, above)) in rows.iter().enumerate() {
        let mut linked: BTreeSet<usize> = above.iter().copied().collect();
        for j in best.iter().flatten().copied() {
            if j > i && rows[j].0[lang_of[i]] == Some(i) {
                linked.insert(j);
            }
        }
        edges.extend(linked.into_iter().map(|j| (i, j)));
    }
    Ok(edges)
}

/// Connected components of the neighbor graph spanning at least
/// `min_languages` languages.
pub fn neighbor_cluster_candidates(
    space: &CenteredSpace,
    sim_threshold: f64,
    min_languages: usize,
) -> Result<Vec<CognateCandidate>> {
    let edges = neighbor_edges(space, sim_threshold)?;
    let n = space.records.len();
    let mut uf = UnionFind::new(n);
    for &(i, j) in &edges {
        uf.union(i, j);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut out: Vec<CognateCandidate> = groups
        .into_values()
        .filter(|g| g.len() > 1)
        .map(|g| {
            let members = g.iter().map(|&i| Member::of(&space.records[i])).collect();
            CognateCandidate::from_members(members, Provenance::NeighborCluster)
        })
        .filter(|c| c.language_count >= min_languages.max(1))
        .collect();
    annotate_coherence(&mut out, space);
    Ok(out)
}

/// Union candidates that share at least one member; mixed groups become `both`.
pub fn merge_candidates(neighbor: Vec<CognateCandidate>, surface: Vec<CognateCandidate>) -> Vec<CognateCandidate> {
    let all: Vec<CognateCandidate> = neighbor.into_iter().chain(surface).collect();
    let mut uf = UnionFind::new(all.len());
    let mut owner: HashMap<(String, String, PartOfSpeech), usize> = HashMap::new();
    for (ci, c) in all.iter().enumerate() {
        for m in &c.members {
            let key = (m.language.clone(), m.lemma.clone(), m.pos);
            match owner.get(&key) {
                Some(&other) => uf.union(ci, other),
                None => {
                    owner.insert(key, ci);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for ci in 0..all.len() {
        groups.entry(uf.find(ci)).or_default().push(ci);
    }
    groups
        .into_values()
        .map(|g| {
            if g.len() == 1 {
                return all[g[0]].clone();
            }
            let provenance = g
                .iter()
                .map(|&ci| all[ci].provenance)
                .reduce(Provenance::union)
                .unwrap_or(Provenance::Both);
            let members = g.iter().flat_map(|&ci| all[ci].members.iter().cloned()).collect();
            CognateCandidate::from_members(members, provenance)
        })
        .collect()
}

fn rank_order(a: &CognateCandidate, b: &CognateCandidate) -> Ordering {
    let mean = |c: &CognateCandidate| c.coherence.map_or(f64::NEG_INFINITY, |s| s.mean_sim);
    b.language_count
        .cmp(&a.language_count)
        .then_with(|| mean(b).total_cmp(&mean(a)))
        .then_with(|| a.root.cmp(&b.root))
        .then_with(|| a.members.cmp(&b.members))
}

/// Descending by (language count, mean similarity), then root ascending.
pub fn score_and_rank(mut candidates: Vec<CognateCandidate>) -> Vec<CognateCandidate> {
    candidates.sort_by(rank_order);
    candidates
}

/// Parameters of the full discovery stage.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryConfig {
    pub min_languages: usize,
    pub sim_threshold: f64,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            min_languages: 5,
            sim_threshold: 0.80,
        }
    }
}

/// Surface and neighbor pathways, merged, scored in `space` and ranked.
pub fn discover(
    records: &[EmbeddingRecord],
    space: &CenteredSpace,
    config: &DiscoveryConfig,
) -> Result<Vec<CognateCandidate>> {
    let surface = surface_shared_candidates(records, config.min_languages);
    let neighbor = neighbor_cluster_candidates(space, config.sim_threshold, config.min_languages)?;
    let mut merged = merge_candidates(neighbor, surface);
    annotate_coherence(&mut merged, space);
    Ok(score_and_rank(merged))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    Strong,
    Weak,
    NotEvaluable,
}

impl Agreement {
    pub fn as_str(self) -> &'static str {
        match self {
            Agreement::Strong => "strong",
            Agreement::Weak => "weak",
            Agreement::NotEvaluable => "not-evaluable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementResult {
    pub root: String,
    pub agreement: Agreement,
    pub coverage: usize,
    pub coherence: Option<CoherenceStats>,
}

/// Re-score every candidate in an independently built centered space.
///
/// A candidate is strong when its mean cross-lingual similarity there
/// reaches `strong_threshold`; fewer than two covered members (or no
/// cross-lingual pair) makes it not evaluable.
pub fn cross_source_agreement(
    candidates: &[CognateCandidate],
    second: &CenteredSpace,
    strong_threshold: f64,
) -> Result<Vec<AgreementResult>> {
    if second.records.is_empty() {
        return Err(Error::InvalidInput("second embedding source is empty".into()));
    }
    let index = SpaceIndex::new(second);
    Ok(candidates
        .par_iter()
        .map(|c| {
            let coverage = index.coverage(&c.members);
            let coherence = if coverage >= 2 {
                index.coherence(&c.members)
            } else {
                None
            };
            let agreement = match coherence {
                Some(s) if s.mean_sim >= strong_threshold => Agreement::Strong,
                Some(_) => Agreement::Weak,
                None => Agreement::NotEvaluable,
            };
            AgreementResult {
                root: c.root.clone(),
                agreement,
                coverage,
                coherence,
            }
        })
        .collect())
}

pub const CANDIDATE_HEADER: &str =
    "root\tpos\tlanguage_count\tlanguages\tmean_sim\tmin_sim\tstdev_sim\tprovenance\tgloss";

pub fn candidates_tsv(candidates: &[CognateCandidate]) -> String {
    let mut out = String::from(CANDIDATE_HEADER);
    out.push('\n');
    for c in candidates {
        let (mean, min, sd) = match c.coherence {
            Some(s) => (
                format!("{:.6}", s.mean_sim),
                format!("{:.6}", s.min_sim),
                format!("{:.6}", s.stdev_sim),
            ),
            None => ("-".into(), "-".into(), "-".into()),
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            c.root,
            c.pos,
            c.language_count,
            c.languages().join(","),
            mean,
            min,
            sd,
            c.provenance,
            c.majority_gloss().unwrap_or("-")
        ));
    }
    out
}

/// A row of a candidate table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRow {
    pub root: String,
    pub pos: PartOfSpeech,
    pub language_count: usize,
    pub languages: Vec<String>,
    pub coherence: Option<CoherenceStats>,
    pub provenance: Provenance,
    pub gloss: Option<String>,
}

/// Parses a candidate table; the trailing `gloss` column is optional.
pub fn parse_candidates_tsv(text: &str, origin: &std::path::Path) -> Result<Vec<CandidateRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') || (lineno == 1 && line.starts_with("root\t")) {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 8 && f.len() != 9 {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected 8 or 9 fields, found {}", f.len()),
            ));
        }
        let bad = |what: &str| Error::parse(origin, lineno, format!("bad {what}"));
        let num = |s: &str| -> Result<Option<f64>> {
            match s {
                "-" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad("similarity")),
            }
        };
        let (mean, min, sd) = (num(f[4])?, num(f[5])?, num(f[6])?);
        rows.push(CandidateRow {
            root: f[0].to_string(),
            pos: f[1].parse().map_err(|_| bad("pos"))?,
            language_count: f[2].parse().map_err(|_| bad("language_count"))?,
            languages: f[3].split(',').filter(|s| !s.is_empty()).map(str::to_string).collect(),
            coherence: match (mean, min, sd) {
                (Some(mean_sim), Some(min_sim), Some(stdev_sim)) => Some(CoherenceStats {
                    mean_sim,
                    min_sim,
                    stdev_sim,
                }),
                _ => None,
            },
            provenance: f[7].parse().map_err(|_| bad("provenance"))?,
            gloss: f.get(8).filter(|g| **g != "-" && !g.is_empty()).map(|g| g.to_string()),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(lang: &str, lemma: &str, v: &[f64]) -> EmbeddingRecord {
        EmbeddingRecord {
            language: lang.into(),
            lemma: lemma.into(),
            pos: PartOfSpeech::Verb,
            noun_class: None,
            gloss: None,
            vector: v.to_vec(),
        }
    }

    fn raw_space(records: Vec<EmbeddingRecord>) -> CenteredSpace {
        CenteredSpace {
            dim: records[0].vector.len(),
            per_language_mean: BTreeMap::new(),
            records,
        }
    }

    const LANGS: [&str; 14] = [
        "kam", "kik", "mer", "kin", "run", "lug", "zul", "xho", "sna", "nso", "lin", "kon", "swh", "nya",
    ];

    #[test]
    fn shared_lemma_across_fourteen() {
        let records: Vec<_> = LANGS.iter().map(|l| rec(l, "ona", &[1.0])).collect();
        let c = surface_shared_candidates(&records, 5);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].language_count, 14);
        assert_eq!(c[0].root, "ona");
        assert_eq!(c[0].provenance, Provenance::SurfaceShared);
    }

    #[test]
    fn surface_threshold() {
        let records: Vec<_> = LANGS[..4].iter().map(|l| rec(l, "mali", &[1.0])).collect();
        assert!(surface_shared_candidates(&records, 5).is_empty());
        let mut records = records;
        records.push(rec("swh", "yesu", &[1.0]));
        // min_languages 1: every distinct lemma
        assert_eq!(surface_shared_candidates(&records, 1).len(), 2);
    }

    #[test]
    fn surface_match_is_case_folded() {
        let records = vec![rec("swh", "Yesu", &[1.0]), rec("zul", "yesu", &[1.0])];
        assert_eq!(surface_shared_candidates(&records, 2)[0].language_count, 2);
    }

    #[test]
    fn two_close_records_form_one_candidate() {
        let a = [1.0, 0.0];
        let b = [0.95, (1.0f64 - 0.95 * 0.95).sqrt()];
        let space = raw_space(vec![rec("swh", "x", &a), rec("zul", "y", &b)]);
        let c = neighbor_cluster_candidates(&space, 0.80, 2).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].members.len(), 2);
        assert!((c[0].coherence.unwrap().mean_sim - 0.95).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_vectors_give_nothing() {
        let mut records = Vec::new();
        for (li, l) in ["swh", "zul", "kik"].iter().enumerate() {
            for k in 0..3 {
                let mut v = vec![0.0; 9];
                v[li * 3 + k] = 1.0;
                records.push(rec(l, &format!("{l}{k}"), &v));
            }
        }
        let space = raw_space(records);
        assert!(neighbor_edges(&space, 0.5).unwrap().is_empty());
        assert!(neighbor_cluster_candidates(&space, 0.5, 2).unwrap().is_empty());
    }

    #[test]
    fn threshold_validated() {
        let space = raw_space(vec![rec("swh", "x", &[1.0])]);
        assert!(neighbor_cluster_candidates(&space, 0.0, 2).is_err());
        assert!(neighbor_cluster_candidates(&space, 1.0, 2).is_err());
    }

    #[test]
    fn ranking_rule() {
        let mk = |root: &str, n: usize, mean: f64| CognateCandidate {
            root: root.into(),
            members: vec![],
            language_count: n,
            pos: PartOfSpeech::Noun,
            coherence: Some(CoherenceStats {
                mean_sim: mean,
                min_sim: mean,
                stdev_sim: 0.0,
            }),
            provenance: Provenance::Both,
        };
        let ranked = score_and_rank(vec![
            mk("umuntu", 8, 0.9),
            mk("ngombe", 9, 0.5),
            mk("b", 7, 0.8),
            mk("a", 7, 0.9),
            mk("d", 6, 0.7),
            mk("c", 6, 0.7),
        ]);
        let roots: Vec<_> = ranked.iter().map(|c| c.root.as_str()).collect();
        assert_eq!(roots, ["ngombe", "umuntu", "a", "b", "c", "d"]);
    }

    #[test]
    fn merged_provenance_is_both() {
        let records: Vec<_> = LANGS[..5]
            .iter()
            .enumerate()
            .map(|(i, l)| rec(l, if i < 3 { "ona" } else { "bona" }, &[1.0, 0.01 * i as f64]))
            .collect();
        let space = raw_space(records.clone());
        let neighbor = neighbor_cluster_candidates(&space, 0.8, 5).unwrap();
        assert_eq!(neighbor.len(), 1);
        let surface = surface_shared_candidates(&records, 3);
        let merged = merge_candidates(neighbor, surface);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].provenance, Provenance::Both);
        assert_eq!(merged[0].root, "ona");
    }

    #[test]
    fn agreement_rules() {
        let records = vec![rec("swh", "ona", &[1.0, 0.0]), rec("zul", "ona", &[0.9, 0.1])];
        let cands = surface_shared_candidates(&records, 2);
        let second = raw_space(records.clone());
        let out = cross_source_agreement(&cands, &second, 0.7).unwrap();
        assert_eq!(out[0].agreement, Agreement::Strong);

        let partial = raw_space(vec![records[0].clone()]);
        let out = cross_source_agreement(&cands, &partial, 0.7).unwrap();
        assert_eq!(out[0].agreement, Agreement::NotEvaluable);
        assert_eq!(out[0].coverage, 1);

        let empty = CenteredSpace {
            records: vec![],
            per_language_mean: BTreeMap::new(),
            dim: 2,
        };
        assert!(cross_source_agreement(&cands, &empty, 0.7).is_err());
    }

    #[test]
    fn candidate_table_round_trip() {
        let records: Vec<_> = LANGS[..5].iter().map(|l| rec(l, "ona", &[1.0, 0.5])).collect();
        let mut cands = surface_shared_candidates(&records, 5);
        annotate_coherence(&mut cands, &raw_space(records));
        let text = candidates_tsv(&cands);
        let rows = parse_candidates_tsv(&text, std::path::Path::new("c.tsv")).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].root, "ona");
        assert_eq!(rows[0].language_count, 5);
        assert_eq!(rows[0].languages.len(), 5);
        assert!((rows[0].coherence.unwrap().mean_sim - 1.0).abs() < 1e-6);
    }
}
