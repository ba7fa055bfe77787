//! Separating plausible cognates from modern artifacts: foreign proper
//! nouns, uniformly coherent (borrowed) forms and domain-frequent words.
//!
//! Filters only annotate; candidates are never modified. When several
//! filters fire the verdict with the highest precedence wins:
//! proper-noun, then stoplist, then loanword-uniform.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::discovery::CognateCandidate;

/// Gloss prefix marking a record as a proper noun, e.g. `propn:Madagascar`.
pub const PROPER_NOUN_MARKER: &str = "propn";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    ProperNoun,
    LoanwordUniform,
    Stoplist,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::ProperNoun => "proper-noun",
            Verdict::LoanwordUniform => "loanword-uniform",
            Verdict::Stoplist => "stoplist",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            Verdict::ProperNoun => 3,
            Verdict::Stoplist => 2,
            Verdict::LoanwordUniform => 1,
            Verdict::Pass => 0,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterVerdict {
    pub root: String,
    pub verdict: Verdict,
    pub evidence: String,
}

impl FilterVerdict {
    fn pass(root: &str, evidence: impl Into<String>) -> Self {
        FilterVerdict {
            root: root.to_string(),
            verdict: Verdict::Pass,
            evidence: evidence.into(),
        }
    }
}

/// A case-folded word set (proper-noun lexicon or stoplist).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordSet(BTreeSet<String>);

impl WordSet {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        WordSet(words.into_iter().map(|w| w.as_ref().trim().to_lowercase()).collect())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(&word.trim().to_lowercase())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn is_proper_noun_gloss(gloss: &str) -> bool {
    let g = gloss.trim().to_lowercase();
    g == PROPER_NOUN_MARKER || g.starts_with(&format!("{PROPER_NOUN_MARKER}:"))
}

pub fn proper_noun_verdict(candidate: &CognateCandidate, lexicon: &WordSet) -> FilterVerdict {
    if lexicon.contains(&candidate.root) {
        return FilterVerdict {
            root: candidate.root.clone(),
            verdict: Verdict::ProperNoun,
            evidence: format!("root `{}` is in the proper-noun lexicon", candidate.root),
        };
    }
    let marked = candidate
        .members
        .iter()
        .filter(|m| m.gloss.as_deref().is_some_and(is_proper_noun_gloss))
        .count();
    if 2 * marked > candidate.members.len() {
        return FilterVerdict {
            root: candidate.root.clone(),
            verdict: Verdict::ProperNoun,
            evidence: format!(
                "{marked} of {} members carry a proper-noun gloss marker",
                candidate.members.len()
            ),
        };
    }
    FilterVerdict::pass(&candidate.root, "not a proper noun")
}

pub fn filter_proper_nouns(candidates: &[CognateCandidate], lexicon: &WordSet) -> Vec<FilterVerdict> {
    candidates.iter().map(|c| proper_noun_verdict(c, lexicon)).collect()
}

/// Defaults for the uniform-coherence loanword signature.
pub const DEFAULT_MEAN_FLOOR: f64 = 0.95;
pub const DEFAULT_STDEV_CEILING: f64 = 0.02;

/// Loanword-uniform when similarity is both very high and nearly constant.
pub fn flag_uniform_coherence(candidate: &CognateCandidate, mean_floor: f64, stdev_ceiling: f64) -> FilterVerdict {
    let Some(stats) = candidate.coherence else {
        log::warn!(
            "`{}` has no coherence statistics; passing it unfiltered",
            candidate.root
        );
        return FilterVerdict::pass(&candidate.root, "coherence not evaluable");
    };
    if stats.mean_sim >= mean_floor && stats.stdev_sim <= stdev_ceiling {
        FilterVerdict {
            root: candidate.root.clone(),
            verdict: Verdict::LoanwordUniform,
            evidence: format!(
                "mean_sim {:.4} >= {mean_floor:.4} and stdev_sim {:.4} <= {stdev_ceiling:.4}",
                stats.mean_sim, stats.stdev_sim
            ),
        }
    } else {
        FilterVerdict::pass(
            &candidate.root,
            format!(
                "graded coherence (mean {:.4}, stdev {:.4})",
                stats.mean_sim, stats.stdev_sim
            ),
        )
    }
}

pub fn apply_stoplist(candidates: &[CognateCandidate], stoplist: &WordSet) -> Vec<FilterVerdict> {
    candidates
        .iter()
        .map(|c| {
            if stoplist.contains(&c.root) {
                FilterVerdict {
                    root: c.root.clone(),
                    verdict: Verdict::Stoplist,
                    evidence: format!("root `{}` is in the stoplist", c.root),
                }
            } else {
                FilterVerdict::pass(&c.root, "not in stoplist")
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub proper_nouns: WordSet,
    pub stoplist: WordSet,
    pub mean_floor: f64,
    pub stdev_ceiling: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            proper_nouns: WordSet::default(),
            stoplist: WordSet::default(),
            mean_floor: DEFAULT_MEAN_FLOOR,
            stdev_ceiling: DEFAULT_STDEV_CEILING,
        }
    }
}

/// Highest-precedence verdict of the three filters, one per candidate.
pub fn filter_candidates(candidates: &[CognateCandidate], config: &FilterConfig) -> Vec<FilterVerdict> {
    candidates
        .par_iter()
        .map(|c| {
            let verdicts = [
                proper_noun_verdict(c, &config.proper_nouns),
                apply_stoplist(std::slice::from_ref(c), &config.stoplist).remove(0),
                flag_uniform_coherence(c, config.mean_floor, config.stdev_ceiling),
            ];
            verdicts
                .into_iter()
                .filter(|v| v.verdict != Verdict::Pass)
                .max_by_key(|v| v.verdict.precedence())
                .unwrap_or_else(|| FilterVerdict::pass(&c.root, "no filter fired"))
        })
        .collect()
}

pub fn verdicts_tsv(verdicts: &[FilterVerdict]) -> String {
    let mut out = String::from("root\tverdict\tevidence\n");
    for v in verdicts {
        out.push_str(&format!("{}\t{}\t{}\n", v.root, v.verdict, v.evidence));
    }
    out
}
