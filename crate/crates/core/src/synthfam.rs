//! Synthetic language families with known history.
//!
//! A proto-lexicon evolves down a Newick tree under random segment changes;
//! loanwords and proper nouns are planted afterwards with identical forms.
//! Embeddings are built, not learned:
//!
//! * a unit anchor per meaning, plus semantic drift that accumulates along
//!   the tree for inherited words only;
//! * hashed character bi- and trigram features scaled to `form_weight`;
//! * a per-language offset built from orthogonal per-branch directions, so
//!   languages sharing more history share more of their offset;
//! * isotropic noise of norm about `embedding_noise`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corpus::{EmbeddingRecord, LanguageMeta, LanguageSet, PartOfSpeech, Zone};
use crate::error::{Error, Result};
use crate::phylo::{parse_newick, PhyloTree};

/// Ultrametric tree over the fourteen built-in languages, depth 6.
pub const DEFAULT_TREE: &str = "((((kam:1,kik:1):1,mer:2):2,((kin:1,run:1):1,lug:2):2):2,\
((((zul:1,xho:1):1,nso:2):1,sna:3):1,((kon:1,lin:1):2,(swh:1.5,nya:1.5):1.5):1):2);";

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_roots: usize,
    pub n_languages: usize,
    pub tree_shape: String,
    pub sound_change_rate: f64,
    pub loanword_count: usize,
    pub proper_noun_count: usize,
    pub embedding_dim: usize,
    pub embedding_noise: f64,
    pub language_offset_scale: f64,
    /// Norm of inherited semantic drift per unit branch length.
    pub semantic_drift: f64,
    pub form_weight: f64,
    /// Share of proto roots that are nouns; the rest are verbs.
    pub noun_fraction: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 42,
            n_roots: 200,
            n_languages: 14,
            tree_shape: DEFAULT_TREE.to_string(),
            sound_change_rate: 0.05,
            loanword_count: 5,
            proper_noun_count: 3,
            embedding_dim: 64,
            embedding_noise: 0.05,
            language_offset_scale: 1.0,
            semantic_drift: 0.12,
            form_weight: 0.6,
            noun_fraction: 0.6,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} {v} outside [0, 1]")))
            }
        };
        unit("sound_change_rate", self.sound_change_rate)?;
        unit("noun_fraction", self.noun_fraction)?;
        for (name, v) in [
            ("embedding_noise", self.embedding_noise),
            ("language_offset_scale", self.language_offset_scale),
            ("semantic_drift", self.semantic_drift),
            ("form_weight", self.form_weight),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.embedding_dim < 8 {
            return Err(Error::InvalidInput(format!(
                "embedding_dim must be at least 8, got {}",
                self.embedding_dim
            )));
        }
        if self.n_roots > 5000 {
            return Err(Error::InvalidInput(
                "n_roots above 5000 exhausts the root inventory".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Inherited,
    Loanword,
    ProperNoun,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Inherited => "inherited",
            Origin::Loanword => "loanword",
            Origin::ProperNoun => "proper-noun",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtoEntry {
    /// Full proto word; for nouns the class prefix is included.
    pub root: String,
    pub meaning_id: usize,
    pub pos: PartOfSpeech,
    pub noun_class: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaughterForm {
    pub surface_form: String,
    pub meaning_id: usize,
    pub pos: PartOfSpeech,
    pub noun_class: Option<u8>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFamily {
    pub config: GeneratorConfig,
    pub proto_lexicon: Vec<ProtoEntry>,
    pub tree: PhyloTree,
    /// Leaf names in tree order.
    pub languages: Vec<String>,
    pub daughter_lexicons: BTreeMap<String, Vec<DaughterForm>>,
    /// Inherited (language, surface form) pairs per meaning.
    pub truth: BTreeMap<usize, BTreeSet<(String, String)>>,
    /// Gloss per meaning id (`propn:Name` for proper nouns).
    pub glosses: BTreeMap<usize, String>,
}

const CONSONANTS: [char; 12] = ['p', 't', 'k', 'b', 'd', 'g', 'm', 'n', 'l', 's', 'w', 'y'];
const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];

/// Noun classes with their proto prefix followed by attested reflexes.
const CLASS_PREFIXES: [(u8, &[&str]); 8] = [
    (1, &["mu", "m", "u", "mo"]),
    (5, &["li", "i", "di", "ri"]),
    (7, &["ki", "chi", "ci", "e"]),
    (9, &["n", "in", "i", "em"]),
    (11, &["lu", "ru", "u", "lo"]),
    (12, &["ka", "ga", "a", "ake"]),
    (14, &["bu", "wu", "u", "bo"]),
    (15, &["ku", "gu", "o", "ko"]),
];

fn lenite(c: char) -> char {
    match c {
        'p' => 'b',
        'b' => 'v',
        't' => 'd',
        'd' => 'l',
        'k' => 'g',
        'g' => 'h',
        's' => 'h',
        'm' => 'n',
        'n' => 'm',
        'l' => 'r',
        'r' => 'l',
        'w' => 'v',
        'y' => 'j',
        other => other,
    }
}

fn is_vowel(c: char) -> bool {
    VOWELS.contains(&c)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const STREAM_LEXICON: u64 = 1;
const STREAM_EVOLVE: u64 = 2;
const STREAM_PLANT: u64 = 3;

fn random_stem(rng: &mut ChaCha8Rng) -> String {
    let c1 = *CONSONANTS.choose(rng).unwrap();
    let v1 = *VOWELS.choose(rng).unwrap();
    let c2 = *CONSONANTS.choose(rng).unwrap();
    let v2 = *VOWELS.choose(rng).unwrap();
    let mut s = String::from_iter([c1, v1]);
    if rng.random_bool(0.25) && !matches!(c2, 'm' | 'n' | 'w' | 'y') {
        s.push(if matches!(c2, 'p' | 'b') { 'm' } else { 'n' });
    }
    s.push(c2);
    s.push(v2);
    s
}

fn random_word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    (0..syllables)
        .flat_map(|_| [*CONSONANTS.choose(rng).unwrap(), *VOWELS.choose(rng).unwrap()])
        .collect()
}

fn mutate_segments(form: &mut [char], p: f64, rng: &mut ChaCha8Rng) {
    for c in form.iter_mut() {
        if !rng.random_bool(p) {
            continue;
        }
        *c = if is_vowel(*c) {
            let others: Vec<char> = VOWELS.iter().copied().filter(|v| v != c).collect();
            *others.choose(rng).unwrap()
        } else {
            lenite(*c)
        };
    }
}

/// Per-node state while evolving.
#[derive(Clone)]
struct Lexicon {
    stems: Vec<Vec<char>>,
    prefixes: BTreeMap<u8, String>,
}

fn preorder(tree: &PhyloTree) -> Vec<(usize, Option<usize>)> {
    let mut out = Vec::new();
    let mut stack = vec![(tree.root, None)];
    while let Some((i, parent)) = stack.pop() {
        out.push((i, parent));
        for &c in tree.nodes[i].children.iter().rev() {
            stack.push((c, Some(i)));
        }
    }
    out
}

fn branch_length(tree: &PhyloTree, node: usize) -> f64 {
    tree.nodes[node].length.unwrap_or(1.0).max(0.0)
}

fn unique_form(taken: &mut HashSet<(String, PartOfSpeech)>, form: String, pos: PartOfSpeech) -> String {
    let mut f = form;
    while taken.contains(&(f.clone(), pos)) {
        f.push_str("la");
    }
    taken.insert((f.clone(), pos));
    f
}

pub fn generate(config: &GeneratorConfig) -> Result<SyntheticFamily> {
    config.validate()?;
    let tree = parse_newick(&config.tree_shape)?;
    let languages = tree.leaf_names();
    if languages.len() != config.n_languages {
        return Err(Error::InvalidInput(format!(
            "tree has {} leaves but n_languages is {}",
            languages.len(),
            config.n_languages
        )));
    }

    // proto lexicon
    let mut rng = rng_for(config.seed, STREAM_LEXICON);
    let mut seen = HashSet::new();
    let mut proto = Vec::with_capacity(config.n_roots);
    let mut stems = Vec::with_capacity(config.n_roots);
    let mut n_nouns = 0usize;
    while proto.len() < config.n_roots {
        let stem = random_stem(&mut rng);
        if !seen.insert(stem.clone()) {
            continue;
        }
        let id = proto.len();
        let (pos, class, root) = if rng.random_bool(config.noun_fraction) {
            // round-robin keeps class sizes balanced
            let (class, prefixes) = CLASS_PREFIXES[n_nouns % CLASS_PREFIXES.len()];
            n_nouns += 1;
            (PartOfSpeech::Noun, Some(class), format!("{}{stem}", prefixes[0]))
        } else {
            (PartOfSpeech::Verb, None, stem.clone())
        };
        proto.push(ProtoEntry {
            root,
            meaning_id: id,
            pos,
            noun_class: class,
        });
        stems.push(stem.chars().collect::<Vec<char>>());
    }

    // evolution down the tree
    let mut rng = rng_for(config.seed, STREAM_EVOLVE);
    let root_state = Lexicon {
        stems,
        prefixes: CLASS_PREFIXES.iter().map(|(c, p)| (*c, p[0].to_string())).collect(),
    };
    let mut states: Vec<Option<Lexicon>> = vec![None; tree.nodes.len()];
    for (node, parent) in preorder(&tree) {
        let mut state = match parent {
            None => root_state.clone(),
            Some(p) => states[p].clone().expect("parent evolved first"),
        };
        if parent.is_some() {
            let p = 1.0 - (1.0 - config.sound_change_rate).powf(branch_length(&tree, node));
            for stem in &mut state.stems {
                mutate_segments(stem, p, &mut rng);
            }
            for (class, alternatives) in CLASS_PREFIXES.iter() {
                if rng.random_bool(p) {
                    let current = state.prefixes[class].clone();
                    let pool: Vec<&&str> = alternatives.iter().filter(|a| **a != current).collect();
                    state
                        .prefixes
                        .insert(*class, pool.choose(&mut rng).unwrap().to_string());
                }
            }
        }
        states[node] = Some(state);
    }

    let mut daughter_lexicons: BTreeMap<String, Vec<DaughterForm>> = BTreeMap::new();
    let mut taken: BTreeMap<String, HashSet<(String, PartOfSpeech)>> = BTreeMap::new();
    let mut truth: BTreeMap<usize, BTreeSet<(String, String)>> = BTreeMap::new();
    let leaf_nodes: BTreeMap<String, usize> = tree
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.children.is_empty())
        .map(|(i, n)| (n.name.clone().unwrap_or_default(), i))
        .collect();
    for lang in &languages {
        let state = states[leaf_nodes[lang]].as_ref().expect("leaf evolved");
        let used = taken.entry(lang.clone()).or_default();
        let forms = daughter_lexicons.entry(lang.clone()).or_default();
        for entry in &proto {
            let stem: String = state.stems[entry.meaning_id].iter().collect();
            let raw = match entry.noun_class {
                Some(c) => format!("{}{stem}", state.prefixes[&c]),
                None => stem,
            };
            let surface = unique_form(used, raw, entry.pos);
            truth
                .entry(entry.meaning_id)
                .or_default()
                .insert((lang.clone(), surface.clone()));
            forms.push(DaughterForm {
                surface_form: surface,
                meaning_id: entry.meaning_id,
                pos: entry.pos,
                noun_class: entry.noun_class,
                origin: Origin::Inherited,
            });
        }
    }

    let mut glosses: BTreeMap<usize, String> = proto
        .iter()
        .map(|e| (e.meaning_id, format!("s{:03}", e.meaning_id)))
        .collect();

    // planted artifacts
    let mut rng = rng_for(config.seed, STREAM_PLANT);
    let mut next_id = config.n_roots;
    let min_recipients = 5.min(languages.len());
    let max_recipients = 10.min(languages.len()).max(min_recipients);
    let mut plant = |origin: Origin, rng: &mut ChaCha8Rng, next_id: &mut usize| {
        let id = *next_id;
        *next_id += 1;
        let form = match origin {
            Origin::ProperNoun => {
                let w = random_word(rng, 3);
                let mut c = w.chars();
                let first = c.next().unwrap().to_ascii_uppercase();
                std::iter::once(first).chain(c).collect::<String>()
            }
            _ => random_word(rng, 3),
        };
        glosses.insert(
            id,
            if origin == Origin::ProperNoun {
                format!("propn:{form}")
            } else {
                format!("s{id:03}")
            },
        );
        let k = rng.random_range(min_recipients..=max_recipients);
        let recipients: Vec<&String> = languages.choose_multiple(rng, k).collect();
        for lang in recipients {
            let used = taken.get_mut(lang).expect("language known");
            if used.contains(&(form.clone(), PartOfSpeech::Noun)) {
                continue;
            }
            used.insert((form.clone(), PartOfSpeech::Noun));
            daughter_lexicons
                .get_mut(lang)
                .expect("language known")
                .push(DaughterForm {
                    surface_form: form.clone(),
                    meaning_id: id,
                    pos: PartOfSpeech::Noun,
                    noun_class: None,
                    origin,
                });
        }
    };
    for _ in 0..config.loanword_count {
        plant(Origin::Loanword, &mut rng, &mut next_id);
    }
    for _ in 0..config.proper_noun_count {
        plant(Origin::ProperNoun, &mut rng, &mut next_id);
    }

    Ok(SyntheticFamily {
        config: config.clone(),
        proto_lexicon: proto,
        tree,
        languages,
        daughter_lexicons,
        truth,
        glosses,
    })
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn scale_to(v: &mut [f64], target: f64) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x *= target / n;
        }
    }
}

fn ngrams(form: &str) -> Vec<String> {
    let chars: Vec<char> = std::iter::once('^')
        .chain(form.to_lowercase().chars())
        .chain(std::iter::once('$'))
        .collect();
    let mut out = Vec::new();
    for n in 2..=3 {
        for w in chars.windows(n) {
            out.push(w.iter().collect());
        }
    }
    out
}

struct FormFeatures {
    dim: usize,
    cache: HashMap<String, Vec<f64>>,
}

impl FormFeatures {
    fn vector(&mut self, form: &str, weight: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for g in ngrams(form) {
            let dim = self.dim;
            let feat = self
                .cache
                .entry(g)
                .or_insert_with_key(|g| gaussian(&mut ChaCha8Rng::seed_from_u64(fnv1a(g.as_bytes())), dim, 1.0));
            for (a, b) in v.iter_mut().zip(feat.iter()) {
                *a += b;
            }
        }
        scale_to(&mut v, weight);
        v
    }
}

fn orthonormalize(vectors: &mut [Vec<f64>]) {
    for i in 0..vectors.len() {
        for j in 0..i {
            let d: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
            let (head, tail) = vectors.split_at_mut(i);
            for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                *a -= d * b;
            }
        }
        scale_to(&mut vectors[i], 1.0);
    }
}

/// Per-language offsets of norm `scale`. Each branch gets one direction
/// (mutually orthogonal when the dimension allows), weighted by the square
/// root of its length, and a language sums the directions on its root path.
fn language_offsets(
    family: &SyntheticFamily,
    dim: usize,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<String, Vec<f64>> {
    let tree = &family.tree;
    let mut directions: Vec<Vec<f64>> = (0..tree.nodes.len()).map(|_| gaussian(rng, dim, 1.0)).collect();
    if directions.len() <= dim {
        orthonormalize(&mut directions);
    } else {
        for d in &mut directions {
            scale_to(d, 1.0);
        }
    }
    let mut path: Vec<Vec<f64>> = vec![vec![0.0; dim]; tree.nodes.len()];
    let mut out = BTreeMap::new();
    for (node, parent) in preorder(tree) {
        if let Some(p) = parent {
            let w = branch_length(tree, node).sqrt();
            path[node] = path[p].iter().zip(&directions[node]).map(|(a, b)| a + w * b).collect();
        }
        let n = &tree.nodes[node];
        if n.children.is_empty() {
            let mut v = path[node].clone();
            scale_to(&mut v, scale);
            if scale == 0.0 {
                v.iter_mut().for_each(|x| *x = 0.0);
            }
            out.insert(n.name.clone().unwrap_or_default(), v);
        }
    }
    out
}

/// Accumulated drift per (meaning, language) for inherited words.
fn semantic_drift(
    family: &SyntheticFamily,
    dim: usize,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> HashMap<(usize, String), Vec<f64>> {
    let tree = &family.tree;
    let order = preorder(tree);
    let mut out = HashMap::new();
    for entry in &family.proto_lexicon {
        let mut at: Vec<Vec<f64>> = vec![vec![0.0; dim]; tree.nodes.len()];
        for &(node, parent) in &order {
            if let Some(p) = parent {
                let sd = rate * (branch_length(tree, node) / dim as f64).sqrt();
                let step = gaussian(rng, dim, sd);
                at[node] = at[p].iter().zip(&step).map(|(a, b)| a + b).collect();
            }
            if let Some(name) = &tree.nodes[node].name {
                if tree.nodes[node].children.is_empty() {
                    out.insert((entry.meaning_id, name.clone()), at[node].clone());
                }
            }
        }
    }
    out
}

fn embed_with(family: &SyntheticFamily, config: &GeneratorConfig, source_seed: u64) -> Vec<EmbeddingRecord> {
    let dim = config.embedding_dim;
    let meanings: BTreeSet<usize> = family.glosses.keys().copied().collect();
    let mut anchor_rng = rng_for(source_seed, 10);
    let anchors: BTreeMap<usize, Vec<f64>> = meanings
        .iter()
        .map(|&m| {
            let mut v = gaussian(&mut anchor_rng, dim, 1.0);
            scale_to(&mut v, 1.0);
            (m, v)
        })
        .collect();
    let offsets = language_offsets(family, dim, config.language_offset_scale, &mut rng_for(source_seed, 11));
    let drift = semantic_drift(family, dim, config.semantic_drift, &mut rng_for(source_seed, 12));
    let mut noise_rng = rng_for(source_seed, 13);
    let noise_sd = config.embedding_noise / (dim as f64).sqrt();
    let mut features = FormFeatures {
        dim,
        cache: HashMap::new(),
    };

    let mut records = Vec::new();
    for (lang, forms) in &family.daughter_lexicons {
        let offset = &offsets[lang];
        for f in forms {
            let form_vec = features.vector(&f.surface_form, config.form_weight);
            let noise = gaussian(&mut noise_rng, dim, noise_sd);
            let anchor = &anchors[&f.meaning_id];
            let d = (f.origin == Origin::Inherited).then(|| &drift[&(f.meaning_id, lang.clone())]);
            let vector = (0..dim)
                .map(|k| anchor[k] + form_vec[k] + offset[k] + noise[k] + d.map_or(0.0, |d| d[k]))
                .collect();
            records.push(EmbeddingRecord {
                language: lang.clone(),
                lemma: f.surface_form.clone(),
                pos: f.pos,
                noun_class: f.noun_class,
                gloss: family.glosses.get(&f.meaning_id).cloned(),
                vector,
            });
        }
    }
    records
}

/// Primary and secondary embedding collections; the secondary draws its
/// anchors, offsets, drift and noise from an unrelated seed.
pub fn embed(family: &SyntheticFamily, config: &GeneratorConfig) -> (Vec<EmbeddingRecord>, Vec<EmbeddingRecord>) {
    let primary = embed_with(family, config, config.seed);
    let secondary = embed_with(family, config, config.seed ^ 0x9e37_79b9_7f4a_7c15);
    (primary, secondary)
}

/// `meaning_id<TAB>language<TAB>surface_form<TAB>origin`, one row per daughter form.
pub fn truth_tsv(family: &SyntheticFamily) -> String {
    let mut out = String::from("meaning_id\tlanguage\tsurface_form\torigin\n");
    for (lang, forms) in &family.daughter_lexicons {
        for f in forms {
            let _ = writeln!(out, "{}\t{lang}\t{}\t{}", f.meaning_id, f.surface_form, f.origin);
        }
    }
    out
}

/// Zones for the family's languages: built-in zones when every leaf is a
/// built-in language, otherwise one zone per top-level clade below half
/// the tree depth, cycling through the zone letters.
pub fn zone_assignment(family: &SyntheticFamily) -> BTreeMap<String, Zone> {
    let builtin = LanguageSet::builtin();
    if family.languages.iter().all(|l| builtin.contains(l)) {
        return family
            .languages
            .iter()
            .map(|l| (l.clone(), builtin.zone_of(l).expect("built-in")))
            .collect();
    }
    let tree = &family.tree;
    let order = preorder(tree);
    let mut depth = vec![0.0; tree.nodes.len()];
    for &(node, parent) in &order {
        if let Some(p) = parent {
            depth[node] = depth[p] + branch_length(tree, node);
        }
    }
    let max_depth = depth.iter().copied().fold(0.0, f64::max);
    let leaves = tree.subtree_leaves();
    let mut out = BTreeMap::new();
    let mut next = 0;
    for &(node, parent) in &order {
        let parent_shallow = parent.is_none_or(|p| depth[p] < max_depth / 2.0);
        let deep_enough = depth[node] >= max_depth / 2.0 || tree.nodes[node].children.is_empty();
        if parent_shallow && deep_enough {
            let zone = Zone::ALL[next % Zone::ALL.len()];
            next += 1;
            for l in &leaves[node] {
                out.entry(l.clone()).or_insert(zone);
            }
        }
    }
    out
}

pub fn language_set(family: &SyntheticFamily) -> LanguageSet {
    let builtin = LanguageSet::builtin();
    let zones = zone_assignment(family);
    let metas = family
        .languages
        .iter()
        .map(|l| LanguageMeta {
            code: l.clone(),
            name: builtin.get(l).map_or_else(|| l.clone(), |m| m.name.clone()),
            zone: zones[l],
        })
        .collect();
    LanguageSet::new(metas).expect("tree leaves are unique")
}

/// Copy of `records` with noun classes shuffled among the noun records of
/// each language.
pub fn shuffle_noun_classes(records: &[EmbeddingRecord], seed: u64) -> Vec<EmbeddingRecord> {
    let mut out = records.to_vec();
    let mut rng = rng_for(seed, 20);
    let mut by_lang: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in out.iter().enumerate() {
        if r.noun_class.is_some() {
            by_lang.entry(r.language.clone()).or_default().push(i);
        }
    }
    for idx in by_lang.values() {
        let mut classes: Vec<Option<u8>> = idx.iter().map(|&i| out[i].noun_class).collect();
        classes.shuffle(&mut rng);
        for (&i, c) in idx.iter().zip(classes) {
            out[i].noun_class = c;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cosine;

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            n_roots: 40,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn zero_rate_keeps_proto_forms() {
        let cfg = GeneratorConfig {
            sound_change_rate: 0.0,
            loanword_count: 0,
            proper_noun_count: 0,
            ..small()
        };
        let fam = generate(&cfg).unwrap();
        for forms in fam.daughter_lexicons.values() {
            for f in forms {
                assert_eq!(f.surface_form, fam.proto_lexicon[f.meaning_id].root);
            }
        }
    }

    #[test]
    fn truth_covers_inherited_forms_only() {
        let fam = generate(&small()).unwrap();
        let mut inherited = BTreeSet::new();
        let mut planted = 0;
        for (lang, forms) in &fam.daughter_lexicons {
            for f in forms {
                if f.origin == Origin::Inherited {
                    inherited.insert((f.meaning_id, lang.clone(), f.surface_form.clone()));
                } else {
                    planted += 1;
                }
            }
        }
        let truth: BTreeSet<_> = fam
            .truth
            .iter()
            .flat_map(|(m, s)| s.iter().map(move |(l, f)| (*m, l.clone(), f.clone())))
            .collect();
        assert_eq!(truth, inherited);
        assert!(planted >= 5 * 8);

        let none = generate(&GeneratorConfig {
            loanword_count: 0,
            proper_noun_count: 0,
            ..small()
        })
        .unwrap();
        let total: usize = none.daughter_lexicons.values().map(Vec::len).sum();
        assert_eq!(total, none.truth.values().map(BTreeSet::len).sum::<usize>());
    }

    #[test]
    fn loanwords_identical_across_recipients() {
        let fam = generate(&small()).unwrap();
        let mut forms: BTreeMap<usize, BTreeSet<&str>> = BTreeMap::new();
        let mut langs: BTreeMap<usize, usize> = BTreeMap::new();
        for fs in fam.daughter_lexicons.values() {
            for f in fs.iter().filter(|f| f.origin == Origin::Loanword) {
                forms.entry(f.meaning_id).or_default().insert(&f.surface_form);
                *langs.entry(f.meaning_id).or_default() += 1;
            }
        }
        assert_eq!(forms.len(), 5);
        assert!(forms.values().all(|s| s.len() == 1));
        assert!(langs.values().all(|&n| n >= 5));
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(embed(&a, &a.config), embed(&b, &b.config));
        assert_eq!(truth_tsv(&a), truth_tsv(&b));
    }

    #[test]
    fn per_language_unique_lemmas() {
        let fam = generate(&GeneratorConfig {
            sound_change_rate: 0.3,
            ..small()
        })
        .unwrap();
        for forms in fam.daughter_lexicons.values() {
            let keys: HashSet<(&str, PartOfSpeech)> = forms.iter().map(|f| (f.surface_form.as_str(), f.pos)).collect();
            assert_eq!(keys.len(), forms.len());
        }
    }

    #[test]
    fn leaf_count_mismatch_is_fatal() {
        assert!(generate(&GeneratorConfig {
            n_languages: 13,
            ..small()
        })
        .is_err());
        assert!(generate(&GeneratorConfig {
            embedding_dim: 4,
            ..small()
        })
        .is_err());
    }

    #[test]
    fn noiseless_cognates_beat_cross_meaning_pairs() {
        let cfg = GeneratorConfig {
            embedding_noise: 0.0,
            language_offset_scale: 0.0,
            loanword_count: 0,
            proper_noun_count: 0,
            ..small()
        };
        let fam = generate(&cfg).unwrap();
        let (recs, _) = embed(&fam, &cfg);
        let meaning: HashMap<(&str, &str), usize> = fam
            .daughter_lexicons
            .iter()
            .flat_map(|(l, fs)| {
                fs.iter()
                    .map(move |f| ((l.as_str(), f.surface_form.as_str()), f.meaning_id))
            })
            .collect();
        let (mut min_same, mut max_cross) = (f64::INFINITY, f64::NEG_INFINITY);
        for (i, a) in recs.iter().enumerate() {
            for b in &recs[i + 1..] {
                let s = cosine(&a.vector, &b.vector).unwrap();
                if meaning[&(a.language.as_str(), a.lemma.as_str())]
                    == meaning[&(b.language.as_str(), b.lemma.as_str())]
                {
                    min_same = min_same.min(s);
                } else {
                    max_cross = max_cross.max(s);
                }
            }
        }
        assert!(min_same >= max_cross, "{min_same} < {max_cross}");
    }

    #[test]
    fn offsets_have_configured_norm() {
        let fam = generate(&small()).unwrap();
        let offs = language_offsets(&fam, 64, 2.5, &mut rng_for(1, 11));
        for v in offs.values() {
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 2.5).abs() < 1e-9);
        }
        // sister languages share more offset than languages across the root
        let c = |a: &str, b: &str| cosine(&offs[a], &offs[b]).unwrap();
        assert!(c("kam", "kik") > c("kam", "mer"));
        assert!(c("kam", "mer") > c("kam", "zul"));
    }

    #[test]
    fn zones_builtin_and_derived() {
        let fam = generate(&small()).unwrap();
        let z = zone_assignment(&fam);
        assert_eq!(z["kik"], Zone::E);
        assert_eq!(z["zul"], Zone::S);
        let fam = generate(&GeneratorConfig {
            n_languages: 4,
            tree_shape: "((a:1,b:1):1,(c:1,d:1):1);".into(),
            ..small()
        })
        .unwrap();
        let z = zone_assignment(&fam);
        assert_eq!(z["a"], z["b"]);
        assert_ne!(z["a"], z["c"]);
        assert_eq!(language_set(&fam).len(), 4);
    }
}
