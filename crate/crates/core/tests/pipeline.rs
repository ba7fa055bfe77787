use std::collections::BTreeSet;

use proptest::prelude::*;
use protolex::corpus::{load_embeddings, write_embeddings, EmbeddingRecord, LanguageSet, PartOfSpeech};
use protolex::discovery::{discover, DiscoveryConfig};
use protolex::filtering::{filter_candidates, FilterConfig, Verdict};
use protolex::geometry::{center_by_language, language_similarity_matrix, norm, SimilarityMode};
use protolex::phylo::{robinson_foulds, ward_from_similarity};
use protolex::synthfam::{embed, generate, language_set, GeneratorConfig};

#[test]
fn synthetic_family_survives_disk_and_recovers_its_tree() {
    let cfg = GeneratorConfig {
        seed: 3,
        n_roots: 60,
        ..GeneratorConfig::default()
    };
    let family = generate(&cfg).unwrap();
    let (records, _) = embed(&family, &cfg);
    let langs = language_set(&family);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.tsv");
    write_embeddings(&path, cfg.embedding_dim, &records).unwrap();
    let loaded = load_embeddings(&path, Some(cfg.embedding_dim), &langs).unwrap();
    assert!(loaded.warnings.is_empty(), "{:?}", loaded.warnings);
    assert_eq!(loaded.records.len(), records.len());

    let space = center_by_language(&loaded.records).unwrap();
    let candidates = discover(&loaded.records, &space, &DiscoveryConfig::default()).unwrap();
    assert!(!candidates.is_empty());
    assert!(candidates.iter().all(|c| c.language_count >= 5));

    let verdicts = filter_candidates(&candidates, &FilterConfig::default());
    assert_eq!(verdicts.len(), candidates.len());
    let roots: BTreeSet<&str> = candidates.iter().map(|c| c.root.as_str()).collect();
    assert!(verdicts.iter().all(|v| roots.contains(v.root.as_str())));
    assert!(verdicts.iter().any(|v| v.verdict == Verdict::Pass));

    let sim = language_similarity_matrix(&loaded.records, SimilarityMode::default()).unwrap();
    let tree = ward_from_similarity(&sim).unwrap();
    assert_eq!(robinson_foulds(&tree.to_phylo(), &family.tree).unwrap(), 0);
}

fn corpus() -> impl Strategy<Value = Vec<EmbeddingRecord>> {
    let langs: Vec<String> = LanguageSet::builtin().iter().map(|m| m.code.clone()).collect();
    (1usize..6, 2usize..40).prop_flat_map(move |(dim, n)| {
        let langs = langs.clone();
        prop::collection::vec((0..langs.len(), prop::collection::vec(-100.0f64..100.0, dim)), n).prop_map(move |rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (l, vector))| EmbeddingRecord {
                    language: langs[l].clone(),
                    lemma: format!("w{i}"),
                    pos: PartOfSpeech::Noun,
                    noun_class: None,
                    gloss: None,
                    vector,
                })
                .collect()
        })
    })
}

proptest! {
    #[test]
    fn centered_language_means_vanish(records in corpus()) {
        let space = center_by_language(&records).unwrap();
        let dim = space.dim;
        let mut sums: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
        for r in &space.records {
            let s = sums.entry(r.language.as_str()).or_insert_with(|| vec![0.0; dim]);
            for (a, b) in s.iter_mut().zip(&r.vector) {
                *a += b;
            }
        }
        for s in sums.values() {
            prop_assert!(norm(s) < 1e-9 * (records.len() as f64) * 100.0);
        }
    }
}
