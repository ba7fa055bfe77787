//! Flat `key=value` run configuration.
//!
//! Values come from an optional config file, then from command-line
//! overrides; the output directory may also come from `PROTOLEX_OUT`.
//! Resolution order for `out_dir`: flag, environment, file, default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use protolex::geometry::SimilarityMode;
use protolex::nounclass::PermutationScheme;
use protolex::synthfam::GeneratorConfig;

pub const OUT_ENV: &str = "PROTOLEX_OUT";

/// Manifest namespaces the config reader skips, so a manifest can be fed
/// back as a config file.
const MANIFEST_NAMESPACES: [&str; 4] = ["input.", "output.", "count.", "run."];

const PATH_KEYS: [&str; 10] = [
    "embeddings",
    "second_embeddings",
    "blr3",
    "asjp",
    "concepts",
    "languages",
    "stoplist",
    "proper_nouns",
    "reference_tree",
    "candidates",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub embeddings: Option<PathBuf>,
    pub second_embeddings: Option<PathBuf>,
    pub blr3: Option<PathBuf>,
    pub asjp: Option<PathBuf>,
    pub concepts: Option<PathBuf>,
    pub languages: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub proper_nouns: Option<PathBuf>,
    pub reference_tree: Option<PathBuf>,
    pub candidates: Option<PathBuf>,
    pub dim: Option<usize>,
    pub min_languages: usize,
    pub sim_threshold: f64,
    pub mean_floor: f64,
    pub stdev_ceiling: f64,
    pub strong_threshold: f64,
    pub min_len: usize,
    pub min_members: usize,
    pub n_permutations: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub similarity_mode: SimilarityMode,
    pub permutation: PermutationScheme,
    pub pairwise: bool,
    pub mds_dims: usize,
    /// Generator settings for `simulate`; its seed mirrors `seed`.
    pub generator: GeneratorConfig,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| anyhow!("config key `{key}`: cannot parse `{value}`: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => bail!("config key `{key}`: expected true or false, found `{other}`"),
    }
}

/// Reads `key=value` lines; `#` starts a comment line, blank lines are
/// ignored, and a leading `config.` on a key is dropped.
pub fn parse_pairs(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", origin.display(), i + 1))?;
        let k = k.trim();
        if MANIFEST_NAMESPACES.iter().any(|ns| k.starts_with(ns)) || k == "command" {
            continue;
        }
        let k = k.strip_prefix("config.").unwrap_or(k);
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{s}` is not key=value"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl RunConfig {
    /// Merges file values with overrides (later wins) and the output-dir
    /// environment variable, then validates.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)], env_out: Option<String>) -> Result<RunConfig> {
        let mut pairs = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                parse_pairs(&text, p)?
            }
            None => BTreeMap::new(),
        };
        if let Some(out) = env_out.filter(|s| !s.is_empty()) {
            pairs.insert("out_dir".into(), out);
        }
        for (k, v) in overrides {
            pairs.insert(k.clone(), v.clone());
        }
        RunConfig::from_pairs(&pairs)
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<RunConfig> {
        let mut c = RunConfig {
            embeddings: None,
            second_embeddings: None,
            blr3: None,
            asjp: None,
            concepts: None,
            languages: None,
            stoplist: None,
            proper_nouns: None,
            reference_tree: None,
            candidates: None,
            dim: None,
            min_languages: 5,
            sim_threshold: 0.80,
            mean_floor: protolex::filtering::DEFAULT_MEAN_FLOOR,
            stdev_ceiling: protolex::filtering::DEFAULT_STDEV_CEILING,
            strong_threshold: 0.5,
            min_len: 3,
            min_members: protolex::nounclass::DEFAULT_MIN_MEMBERS,
            n_permutations: 10_000,
            seed: 0,
            out_dir: PathBuf::from("out"),
            similarity_mode: SimilarityMode::default(),
            permutation: PermutationScheme::default(),
            pairwise: false,
            mds_dims: 2,
            generator: GeneratorConfig::default(),
        };
        let mut seed = None;
        for (k, v) in pairs {
            let g = &mut c.generator;
            let path = || -> Option<PathBuf> { (!v.is_empty() && v != "-").then(|| PathBuf::from(v)) };
            match k.as_str() {
                "embeddings" => c.embeddings = path(),
                "second_embeddings" => c.second_embeddings = path(),
                "blr3" => c.blr3 = path(),
                "asjp" => c.asjp = path(),
                "concepts" => c.concepts = path(),
                "languages" => c.languages = path(),
                "stoplist" => c.stoplist = path(),
                "proper_nouns" => c.proper_nouns = path(),
                "reference_tree" => c.reference_tree = path(),
                "candidates" => c.candidates = path(),
                "dim" => {
                    c.dim = if v == "-" || v.is_empty() {
                        None
                    } else {
                        Some(parse(k, v)?)
                    }
                }
                "min_languages" => c.min_languages = parse(k, v)?,
                "sim_threshold" => c.sim_threshold = parse(k, v)?,
                "mean_floor" => c.mean_floor = parse(k, v)?,
                "stdev_ceiling" => c.stdev_ceiling = parse(k, v)?,
                "strong_threshold" => c.strong_threshold = parse(k, v)?,
                "min_len" => c.min_len = parse(k, v)?,
                "min_members" => c.min_members = parse(k, v)?,
                "n_permutations" => c.n_permutations = parse(k, v)?,
                "seed" => seed = Some(parse(k, v)?),
                "out_dir" => c.out_dir = PathBuf::from(v),
                "similarity_mode" => c.similarity_mode = parse(k, v)?,
                "permutation" => c.permutation = parse(k, v)?,
                "pairwise" => c.pairwise = parse_bool(k, v)?,
                "mds_dims" => c.mds_dims = parse(k, v)?,
                "n_roots" => g.n_roots = parse(k, v)?,
                "n_languages" => g.n_languages = parse(k, v)?,
                "tree_shape" => g.tree_shape = v.clone(),
                "sound_change_rate" => g.sound_change_rate = parse(k, v)?,
                "loanword_count" => g.loanword_count = parse(k, v)?,
                "proper_noun_count" => g.proper_noun_count = parse(k, v)?,
                "embedding_dim" => g.embedding_dim = parse(k, v)?,
                "embedding_noise" => g.embedding_noise = parse(k, v)?,
                "language_offset_scale" => g.language_offset_scale = parse(k, v)?,
                "semantic_drift" => g.semantic_drift = parse(k, v)?,
                "form_weight" => g.form_weight = parse(k, v)?,
                "noun_fraction" => g.noun_fraction = parse(k, v)?,
                other => bail!("unknown config key `{other}`"),
            }
        }
        c.seed = seed.ok_or_else(|| anyhow!("`seed` is required (set it in the config file or with --seed)"))?;
        c.generator.seed = c.seed;
        if c.min_languages == 0 {
            bail!("min_languages must be at least 1");
        }
        if c.n_permutations == 0 {
            bail!("n_permutations must be at least 1");
        }
        Ok(c)
    }

    /// Every key with its resolved value, in key order.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        let g = &self.generator;
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("embeddings", path(&self.embeddings));
        put("second_embeddings", path(&self.second_embeddings));
        put("blr3", path(&self.blr3));
        put("asjp", path(&self.asjp));
        put("concepts", path(&self.concepts));
        put("languages", path(&self.languages));
        put("stoplist", path(&self.stoplist));
        put("proper_nouns", path(&self.proper_nouns));
        put("reference_tree", path(&self.reference_tree));
        put("candidates", path(&self.candidates));
        put("dim", self.dim.map_or("-".into(), |d| d.to_string()));
        put("min_languages", self.min_languages.to_string());
        put("sim_threshold", self.sim_threshold.to_string());
        put("mean_floor", self.mean_floor.to_string());
        put("stdev_ceiling", self.stdev_ceiling.to_string());
        put("strong_threshold", self.strong_threshold.to_string());
        put("min_len", self.min_len.to_string());
        put("min_members", self.min_members.to_string());
        put("n_permutations", self.n_permutations.to_string());
        put("seed", self.seed.to_string());
        put("out_dir", self.out_dir.display().to_string());
        put("similarity_mode", self.similarity_mode.as_str().into());
        put("permutation", self.permutation.as_str().into());
        put("pairwise", self.pairwise.to_string());
        put("mds_dims", self.mds_dims.to_string());
        put("n_roots", g.n_roots.to_string());
        put("n_languages", g.n_languages.to_string());
        put("tree_shape", g.tree_shape.clone());
        put("sound_change_rate", g.sound_change_rate.to_string());
        put("loanword_count", g.loanword_count.to_string());
        put("proper_noun_count", g.proper_noun_count.to_string());
        put("embedding_dim", g.embedding_dim.to_string());
        put("embedding_noise", g.embedding_noise.to_string());
        put("language_offset_scale", g.language_offset_scale.to_string());
        put("semantic_drift", g.semantic_drift.to_string());
        put("form_weight", g.form_weight.to_string());
        put("noun_fraction", g.noun_fraction.to_string());
        m
    }

    /// Every configured input path, keyed by config name.
    pub fn input_paths(&self) -> Vec<(&'static str, &Path)> {
        let all = [
            &self.embeddings,
            &self.second_embeddings,
            &self.blr3,
            &self.asjp,
            &self.concepts,
            &self.languages,
            &self.stoplist,
            &self.proper_nouns,
            &self.reference_tree,
            &self.candidates,
        ];
        PATH_KEYS
            .iter()
            .zip(all)
            .filter_map(|(k, p)| p.as_deref().map(|p| (*k, p)))
            .collect()
    }

    /// Fails naming every configured input that does not exist.
    pub fn check_inputs(&self) -> Result<()> {
        let missing: Vec<String> = self
            .input_paths()
            .into_iter()
            .filter(|(_, p)| !p.is_file())
            .map(|(k, p)| format!("{k}={}", p.display()))
            .collect();
        if !missing.is_empty() {
            bail!("input file(s) not found: {}", missing.join(", "));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn seed_is_required() {
        assert!(RunConfig::from_pairs(&pairs(&[])).is_err());
        let c = RunConfig::from_pairs(&pairs(&[("seed", "7")])).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.generator.seed, 7);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(RunConfig::from_pairs(&pairs(&[("seed", "1"), ("sim_treshold", "0.7")])).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let c = RunConfig::from_pairs(&pairs(&[("seed", "3"), ("min_languages", "2"), ("pairwise", "true")])).unwrap();
        assert_eq!(RunConfig::from_pairs(&c.to_pairs()).unwrap(), c);
    }

    #[test]
    fn overrides_and_env() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.conf");
        std::fs::write(&file, "# comment\nseed=1\nout_dir=from_file\nmin_languages=4\n").unwrap();
        let c = RunConfig::resolve(Some(&file), &[], None).unwrap();
        assert_eq!(c.out_dir, PathBuf::from("from_file"));
        let c = RunConfig::resolve(Some(&file), &[], Some("from_env".into())).unwrap();
        assert_eq!(c.out_dir, PathBuf::from("from_env"));
        let o = vec![
            parse_override("out_dir=from_flag").unwrap(),
            parse_override("min_languages=9").unwrap(),
        ];
        let c = RunConfig::resolve(Some(&file), &o, Some("from_env".into())).unwrap();
        assert_eq!(c.out_dir, PathBuf::from("from_flag"));
        assert_eq!(c.min_languages, 9);
    }

    #[test]
    fn manifest_keys_are_skipped() {
        let p = parse_pairs(
            "command=discover\nconfig.seed=5\ninput.embeddings.sha256=ab\ncount.records=3\n",
            Path::new("m"),
        )
        .unwrap();
        assert_eq!(p, pairs(&[("seed", "5")]));
    }
}
