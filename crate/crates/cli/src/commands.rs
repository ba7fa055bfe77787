use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};

use protolex::corpus::{
    format_embeddings, format_languages, load_asjp, load_embeddings, load_languages, load_reconstructions,
    load_word_list, ConceptList, EmbeddingSet, LanguageSet, PartOfSpeech,
};
use protolex::discovery::{
    candidates_tsv, cross_source_agreement, discover, parse_candidates_tsv, Agreement, CandidateRow, CognateCandidate,
    DiscoveryConfig,
};
use protolex::filtering::{filter_candidates, verdicts_tsv, FilterConfig, Verdict, WordSet};
use protolex::geometry::{center_by_language, language_similarity_matrix};
use protolex::nounclass::{
    class_centroids, class_report_tsv, class_test, extract_class_prefixes, pairwise_class_similarity, prefix_table_tsv,
    test_summary_tsv, within_between_similarity, ClassTestResult,
};
use protolex::phylo::{
    classical_mds, mds_tsv, newick_export, parse_newick, robinson_foulds, ward_from_similarity, zone_permutation_test,
    zone_summary_tsv, ZoneTestResult,
};
use protolex::synthfam::{embed, generate, language_set, truth_tsv, Origin};
use protolex::validation::{report_tsv, summary_line, validate, AsjpIndex, Blr3Index, MatchConfig, ValidationRow};

use crate::config::RunConfig;
use crate::manifest::Manifest;

/// Files a command wrote, manifest last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

impl Written {
    fn new(files: Vec<PathBuf>, manifest: Manifest) -> Result<Written> {
        Ok(Written {
            files,
            manifest: manifest.finish()?,
        })
    }

    pub fn all(&self) -> Vec<PathBuf> {
        let mut v = self.files.clone();
        v.push(self.manifest.clone());
        v
    }
}

fn require<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    path.as_deref().ok_or_else(|| {
        anyhow!(
            "`{key}` is required for this command (config key {key} or --{})",
            key.replace('_', "-")
        )
    })
}

fn languages(config: &RunConfig) -> Result<LanguageSet> {
    match &config.languages {
        Some(p) => load_languages(p).with_context(|| format!("loading languages {}", p.display())),
        None => Ok(LanguageSet::builtin()),
    }
}

fn embeddings(path: &Path, langs: &LanguageSet, expected: Option<usize>) -> Result<EmbeddingSet> {
    let set =
        load_embeddings(path, expected, langs).with_context(|| format!("loading embeddings {}", path.display()))?;
    info!("{}: {} records, dim {}", path.display(), set.records.len(), set.dim);
    Ok(set)
}

fn primary(config: &RunConfig) -> Result<(LanguageSet, EmbeddingSet)> {
    config.check_inputs()?;
    let langs = languages(config)?;
    let path = require(&config.embeddings, "embeddings")?;
    let set = embeddings(path, &langs, config.dim)?;
    Ok((langs, set))
}

fn pos_count(cands: &[CognateCandidate], pos: PartOfSpeech) -> usize {
    cands.iter().filter(|c| c.pos == pos).count()
}

fn run_discovery(config: &RunConfig, set: &EmbeddingSet) -> Result<Vec<CognateCandidate>> {
    if set.records.is_empty() {
        return Ok(Vec::new());
    }
    let space = center_by_language(&set.records)?;
    let dc = DiscoveryConfig {
        min_languages: config.min_languages,
        sim_threshold: config.sim_threshold,
    };
    Ok(discover(&set.records, &space, &dc)?)
}

/// Loads and re-serializes embeddings, with a per-language summary.
pub fn cmd_ingest(config: &RunConfig) -> Result<Written> {
    let (langs, set) = primary(config)?;
    let mut m = Manifest::start("ingest", config)?;
    let mut per: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for r in &set.records {
        let e = per.entry(r.language.as_str()).or_default();
        e[match r.pos {
            PartOfSpeech::Noun => 0,
            PartOfSpeech::Verb => 1,
            PartOfSpeech::Other => 2,
        }] += 1;
    }
    let mut summary = String::from("language\tname\tzone\trecords\tnouns\tverbs\tother\n");
    for (code, [n, v, o]) in &per {
        let (name, zone) = langs.get(code).map_or(("-".to_string(), "-".to_string()), |l| {
            (l.name.clone(), l.zone.to_string())
        });
        let _ = writeln!(summary, "{code}\t{name}\t{zone}\t{}\t{n}\t{v}\t{o}", n + v + o);
    }
    m.count("records", set.records.len());
    m.count("languages", per.len());
    m.count("dim", set.dim);
    m.count("warnings", set.warnings.len());
    let files = vec![
        m.write("embeddings.tsv", &format_embeddings(set.dim, &set.records))?,
        m.write("ingest_summary.tsv", &summary)?,
    ];
    Written::new(files, m)
}

/// Candidate discovery, plus second-source agreement when configured.
pub fn cmd_discover(config: &RunConfig) -> Result<Written> {
    let (langs, set) = primary(config)?;
    let mut m = Manifest::start("discover", config)?;
    let cands = run_discovery(config, &set)?;
    info!("{} candidates", cands.len());
    m.count("records", set.records.len());
    m.count("candidates", cands.len());
    m.count("candidates.noun", pos_count(&cands, PartOfSpeech::Noun));
    m.count("candidates.verb", pos_count(&cands, PartOfSpeech::Verb));
    let mut files = vec![m.write("candidates.tsv", &candidates_tsv(&cands))?];
    if let Some(p) = &config.second_embeddings {
        let second = embeddings(p, &langs, None)?;
        if second.records.is_empty() {
            bail!("second embedding source {} has no records", p.display());
        }
        let space = center_by_language(&second.records)?;
        let results = cross_source_agreement(&cands, &space, config.strong_threshold)?;
        let mut out = String::from("root\tagreement\tcoverage\tmean_sim\n");
        for r in &results {
            let mean = r.coherence.map_or("-".into(), |c| format!("{:.6}", c.mean_sim));
            let _ = writeln!(out, "{}\t{}\t{}\t{mean}", r.root, r.agreement.as_str(), r.coverage);
        }
        let strong = results.iter().filter(|r| r.agreement == Agreement::Strong).count();
        info!("{strong} of {} candidates strong in the second source", results.len());
        m.count("agreement.strong", strong);
        m.count(
            "agreement.not_evaluable",
            results
                .iter()
                .filter(|r| r.agreement == Agreement::NotEvaluable)
                .count(),
        );
        files.push(m.write("agreement.tsv", &out)?);
    }
    Written::new(files, m)
}

fn word_set(path: &Option<PathBuf>) -> Result<WordSet> {
    match path {
        Some(p) => Ok(WordSet::new(load_word_list(p)?)),
        None => Ok(WordSet::default()),
    }
}

/// Discovery followed by proper-noun, stoplist and uniform-coherence filters.
pub fn cmd_filter(config: &RunConfig) -> Result<Written> {
    let (_, set) = primary(config)?;
    let mut m = Manifest::start("filter", config)?;
    let cands = run_discovery(config, &set)?;
    let fc = FilterConfig {
        proper_nouns: word_set(&config.proper_nouns)?,
        stoplist: word_set(&config.stoplist)?,
        mean_floor: config.mean_floor,
        stdev_ceiling: config.stdev_ceiling,
    };
    let verdicts = filter_candidates(&cands, &fc);
    let kept: Vec<CognateCandidate> = cands
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.verdict == Verdict::Pass)
        .map(|(c, _)| c.clone())
        .collect();
    m.count("candidates", cands.len());
    for v in [
        Verdict::Pass,
        Verdict::ProperNoun,
        Verdict::Stoplist,
        Verdict::LoanwordUniform,
    ] {
        m.count(
            &format!("verdict.{v}"),
            verdicts.iter().filter(|x| x.verdict == v).count(),
        );
    }
    info!("{} of {} candidates pass the filters", kept.len(), cands.len());
    let files = vec![
        m.write("verdicts.tsv", &verdicts_tsv(&verdicts))?,
        m.write("filtered_candidates.tsv", &candidates_tsv(&kept))?,
    ];
    Written::new(files, m)
}

/// Validation rows and summary for one configuration.
#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    pub rows: Vec<ValidationRow>,
    pub summary: String,
    pub written: Written,
}

fn candidate_rows(config: &RunConfig) -> Result<Vec<CandidateRow>> {
    if let Some(p) = &config.candidates {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading candidates {}", p.display()))?;
        return Ok(parse_candidates_tsv(&text, p)?);
    }
    let (_, set) = primary(config)?;
    let cands = run_discovery(config, &set)?;
    let text = candidates_tsv(&cands);
    Ok(parse_candidates_tsv(&text, Path::new("<discovery>"))?)
}

/// Matches candidates against the reconstruction and wordlist references.
pub fn cmd_validate(config: &RunConfig) -> Result<ValidationOutcome> {
    config.check_inputs()?;
    let blr3_path = require(&config.blr3, "blr3")?;
    let asjp_path = require(&config.asjp, "asjp")?;
    let concepts = match &config.concepts {
        Some(p) => ConceptList::load(p)?,
        None => ConceptList::default(),
    };
    let recon = load_reconstructions(blr3_path)?;
    let words = load_asjp(asjp_path, &concepts)?;
    let rows_in = candidate_rows(config)?;
    let mut m = Manifest::start("validate", config)?;
    let mc = MatchConfig::with_min_len(config.min_len);
    let blr3 = Blr3Index::new(recon.items, mc.clone());
    let asjp = AsjpIndex::new(words.items, mc);
    let rows: Vec<ValidationRow> = rows_in
        .iter()
        .map(|c| {
            let row = validate(&c.root, c.language_count, c.gloss.as_deref(), &blr3, &asjp);
            let blr3_note = row
                .blr3
                .matched_entry
                .as_ref()
                .map_or("no reconstruction".to_string(), |e| {
                    format!("{} via {}", e.form, row.blr3.tier)
                });
            let asjp_note = row.asjp.path.map_or("no wordlist match".to_string(), |p| {
                format!(
                    "{} via {}",
                    row.asjp
                        .matched_entry
                        .as_ref()
                        .and_then(|e| e.concept.as_deref())
                        .unwrap_or("-"),
                    p.as_str()
                )
            });
            info!("{}: {blr3_note}; {asjp_note}; {}", row.root, row.status);
            row
        })
        .collect();
    let summary = summary_line(&rows);
    info!("{summary}");
    m.count("candidates", rows.len());
    m.count("validated", rows.iter().filter(|r| r.status.is_validated()).count());
    let files = vec![
        m.write("validation.tsv", &report_tsv(&rows))?,
        m.write("validation_summary.txt", &format!("{summary}\n"))?,
    ];
    Ok(ValidationOutcome {
        rows,
        summary,
        written: Written::new(files, m)?,
    })
}

#[derive(Debug, Clone)]
pub struct NounClassOutcome {
    pub test: ClassTestResult,
    pub written: Written,
}

/// Within- versus between-class similarity with its permutation test.
pub fn cmd_nounclass(config: &RunConfig) -> Result<NounClassOutcome> {
    let (_, set) = primary(config)?;
    if !set
        .records
        .iter()
        .any(|r| r.pos == PartOfSpeech::Noun && r.noun_class.is_some())
    {
        bail!("no noun records carry a noun class; nothing to test");
    }
    let mut m = Manifest::start("nounclass", config)?;
    let space = center_by_language(&set.records)?;
    let sim = if config.pairwise {
        pairwise_class_similarity(&space)?
    } else {
        let cents = class_centroids(&space, config.min_members)?;
        m.count("centroids", cents.centroids.len());
        within_between_similarity(&cents)?
    };
    let test = class_test(&sim, config.n_permutations, config.seed, config.permutation)?;
    info!(
        "within {:.4} vs between {:.4}, p = {:.3e} ({} scheme)",
        test.within_mean,
        test.between_mean,
        test.p_value,
        test.scheme.as_str()
    );
    let prefixes = extract_class_prefixes(&set.records, config.min_members);
    m.count("pairs", sim.pairs.values.len());
    m.count("classes", sim.per_class_mean_within.len());
    let files = vec![
        m.write("nounclass_classes.tsv", &class_report_tsv(&sim))?,
        m.write("nounclass_test.tsv", &test_summary_tsv(&test))?,
        m.write("nounclass_prefixes.tsv", &prefix_table_tsv(&prefixes))?,
    ];
    Ok(NounClassOutcome {
        test,
        written: Written::new(files, m)?,
    })
}

#[derive(Debug, Clone)]
pub struct PhyloOutcome {
    pub newick: String,
    pub zone: Option<ZoneTestResult>,
    pub rf: Option<usize>,
    pub written: Written,
}

/// Language similarity, Ward tree, MDS, zone test and optional RF distance.
pub fn cmd_phylo(config: &RunConfig) -> Result<PhyloOutcome> {
    let (langs, set) = primary(config)?;
    let mut m = Manifest::start("phylo", config)?;
    let sim = language_similarity_matrix(&set.records, config.similarity_mode)?;
    let tree = ward_from_similarity(&sim)?;
    let newick = newick_export(&tree);
    let mut files = vec![
        m.write("similarity.tsv", &sim.to_tsv())?,
        m.write("tree.nwk", &format!("{newick}\n"))?,
    ];
    m.count("languages", sim.len());

    let dims = if sim.len() <= config.mds_dims {
        warn!(
            "{} languages cannot fill {} MDS dimensions; using {}",
            sim.len(),
            config.mds_dims,
            sim.len() - 1
        );
        sim.len() - 1
    } else {
        config.mds_dims
    };
    let mds = classical_mds(&sim.labels, &sim.to_distances(), dims)?;
    m.count("mds.stress", format!("{:.6}", mds.stress));
    files.push(m.write("mds.tsv", &mds_tsv(&mds))?);

    let mut zones = BTreeMap::new();
    for l in &sim.labels {
        let z = langs.zone_of(l).ok_or_else(|| anyhow!("language `{l}` has no zone"))?;
        zones.insert(l.clone(), z);
    }
    let zone = match zone_permutation_test(&sim, &zones, config.n_permutations, config.seed) {
        Ok(z) => {
            info!(
                "same-zone {:.4} vs cross-zone {:.4}, p = {:.3e}",
                z.same_zone_mean, z.cross_zone_mean, z.p_value
            );
            files.push(m.write("zone_test.tsv", &zone_summary_tsv(&z))?);
            Some(z)
        }
        Err(protolex::Error::InvalidInput(msg)) => {
            warn!("zone test skipped: {msg}");
            m.count("zone_test", "skipped");
            None
        }
        Err(e) => return Err(e.into()),
    };

    let rf = match &config.reference_tree {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let reference = parse_newick(&text).with_context(|| format!("parsing {}", p.display()))?;
            let d = robinson_foulds(&tree.to_phylo(), &reference)?;
            info!("Robinson-Foulds distance to {}: {d}", p.display());
            files.push(m.write(
                "rf.tsv",
                &format!("reference\tleaves\trf\n{}\t{}\t{d}\n", p.display(), sim.len()),
            )?);
            m.count("rf", d);
            Some(d)
        }
        None => None,
    };
    Ok(PhyloOutcome {
        newick,
        zone,
        rf,
        written: Written::new(files, m)?,
    })
}

/// Synthetic family: two embedding sources, truth table, tree and languages.
pub fn cmd_simulate(config: &RunConfig) -> Result<Written> {
    config.check_inputs()?;
    let g = &config.generator;
    g.validate()?;
    let family = generate(g)?;
    let (first, second) = embed(&family, g);
    let mut m = Manifest::start("simulate", config)?;
    let loan_groups = family
        .daughter_lexicons
        .values()
        .flatten()
        .filter(|f| f.origin == Origin::Loanword)
        .map(|f| f.meaning_id)
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    m.count("languages", family.languages.len());
    m.count("meanings", family.glosses.len());
    m.count("records", first.len());
    m.count("loanword_groups", loan_groups);
    let files = vec![
        m.write("embeddings.tsv", &format_embeddings(g.embedding_dim, &first))?,
        m.write("embeddings_second.tsv", &format_embeddings(g.embedding_dim, &second))?,
        m.write("truth.tsv", &truth_tsv(&family))?,
        m.write("tree.nwk", &format!("{}\n", family.tree.to_newick()))?,
        m.write("languages.tsv", &format_languages(&language_set(&family)))?,
    ];
    Written::new(files, m)
}

/// Concatenates whichever stage outputs exist in the output directory.
pub fn cmd_report(config: &RunConfig) -> Result<Written> {
    config.check_inputs()?;
    let mut m = Manifest::start("report", config)?;
    let dir = config.out_dir.clone();
    // a configured candidate table takes the place of the discovery output
    let listed = match &config.candidates {
        Some(p) => Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let mut read = |name: &str| -> Result<Option<String>> {
        let p = dir.join(name);
        if !p.is_file() {
            return Ok(None);
        }
        m.input(&format!("stage.{name}"), &p)?;
        Ok(Some(
            std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?,
        ))
    };
    let candidates = match listed {
        Some(text) => Some(text),
        None => read("candidates.tsv")?,
    };
    let sources = crate::report::Sources {
        candidates,
        validation: read("validation.tsv")?,
        validation_summary: read("validation_summary.txt")?,
        verdicts: read("verdicts.tsv")?,
        agreement: read("agreement.tsv")?,
        nounclass_test: read("nounclass_test.tsv")?,
        nounclass_classes: read("nounclass_classes.tsv")?,
        zone_test: read("zone_test.tsv")?,
        tree: read("tree.nwk")?,
        rf: read("rf.tsv")?,
    };
    let text = crate::report::render(&sources);
    let files = vec![m.write("report.txt", &text)?];
    Written::new(files, m)
}
