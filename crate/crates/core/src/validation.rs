//! Matching candidate lemmas against proto-form reconstructions and
//! basic-vocabulary wordlists.
//!
//! The matcher runs a fixed cascade of tiers over the normalized lemma and
//! reference root, and over their surface variants:
//!
//! 1. `exact`: normalized strings equal;
//! 2. `substring`: one normalized string contains the other, the shorter
//!    being at least `min_len` characters;
//! 3. `variant-substring`: the same tests over variant pairs. A root variant
//!    produced by initial-consonant elision is vowel-initial and only
//!    matches a lemma that equals it or equals it plus a final vowel
//!    (`bon` -> `on` matches `ona`);
//! 4. `edit-1`: Levenshtein distance at most one between (non-elided)
//!    variants, both at least `min_len` long.
//!
//! The first tier with any hit wins; among hits in that tier the longest
//! normalized root is kept, then the lexicographically smallest, then the
//! earliest entry.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::corpus::{AsjpEntry, ReconstructionEntry};
use crate::normalize::{is_vowel, normalize_form, variants, Variant, VariantRules};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Exact,
    Substring,
    VariantSubstring,
    Edit1,
    None,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Exact => "exact",
            Tier::Substring => "substring",
            Tier::VariantSubstring => "variant-substring",
            Tier::Edit1 => "edit-1",
            Tier::None => "none",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which cascade tiers may fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TierSet {
    pub exact: bool,
    pub substring: bool,
    pub variant_substring: bool,
    pub edit1: bool,
}

impl Default for TierSet {
    fn default() -> Self {
        TierSet {
            exact: true,
            substring: true,
            variant_substring: true,
            edit1: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchConfig {
    pub min_len: usize,
    pub rules: VariantRules,
    pub tiers: TierSet,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            min_len: 3,
            rules: VariantRules::default(),
            tiers: TierSet::default(),
        }
    }
}

impl MatchConfig {
    pub fn with_min_len(min_len: usize) -> Self {
        MatchConfig {
            min_len,
            ..Self::default()
        }
    }
}

/// How a basic-vocabulary match was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchPath {
    Gloss,
    Form,
}

impl MatchPath {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchPath::Gloss => "gloss",
            MatchPath::Form => "form",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchedEntry {
    /// Position of the entry in the reference collection.
    pub index: usize,
    /// The reference form as published.
    pub form: String,
    pub concept: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub lemma: String,
    pub normalized_lemma: Option<String>,
    pub matched_entry: Option<MatchedEntry>,
    pub tier: Tier,
    pub normalized_root: Option<String>,
    pub path: Option<MatchPath>,
    pub lemma_variant: Option<Variant>,
    pub root_variant: Option<Variant>,
}

impl MatchResult {
    fn none(lemma: &str, normalized: Option<String>) -> Self {
        MatchResult {
            lemma: lemma.to_string(),
            normalized_lemma: normalized,
            matched_entry: None,
            tier: Tier::None,
            normalized_root: None,
            path: None,
            lemma_variant: None,
            root_variant: None,
        }
    }

    pub fn is_match(&self) -> bool {
        self.matched_entry.is_some()
    }

    /// Variant rules that contributed to the match, lemma side then root side.
    pub fn rules_used(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (side, v) in [("lemma", &self.lemma_variant), ("root", &self.root_variant)] {
            if let Some(v) = v {
                for r in &v.rules {
                    out.push(format!("{side}:{r}"));
                }
            }
        }
        out
    }
}

struct IndexedForm {
    index: usize,
    normalized: String,
    variants: Vec<Variant>,
}

struct Hit {
    tier: Tier,
    lemma_variant: Option<Variant>,
    root_variant: Option<Variant>,
}

/// Pre-normalized reference forms.
pub struct FormIndex {
    forms: Vec<IndexedForm>,
    config: MatchConfig,
    pub warnings: Vec<String>,
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

impl FormIndex {
    pub fn new<'a, I>(forms: I, config: MatchConfig) -> Self
    where
        I: IntoIterator<Item = (usize, &'a str)>,
    {
        let mut indexed = Vec::new();
        let mut warnings = Vec::new();
        for (index, raw) in forms {
            match normalize_form(raw) {
                Ok(normalized) => {
                    let variants = variants(&normalized, &config.rules, true).into_values().collect();
                    indexed.push(IndexedForm {
                        index,
                        normalized,
                        variants,
                    });
                }
                Err(_) => {
                    let msg = format!("reference form `{raw}` is empty after normalization; ignored");
                    log::warn!("{msg}");
                    warnings.push(msg);
                }
            }
        }
        FormIndex {
            forms: indexed,
            config,
            warnings,
        }
    }

    fn substring(&self, a: &str, b: &str) -> bool {
        let (short, long) = if char_len(a) <= char_len(b) { (a, b) } else { (b, a) };
        char_len(short) >= self.config.min_len && long.contains(short)
    }

    fn variant_hit(&self, lv: &Variant, rv: &Variant) -> bool {
        if lv.form == rv.form {
            return true;
        }
        if rv.is_elided() {
            // vowel-initial stem plus a single final vowel
            let Some(rest) = lv.form.strip_prefix(rv.form.as_str()) else {
                return false;
            };
            let mut rest = rest.chars();
            matches!((rest.next(), rest.next()), (Some(c), None) if is_vowel(c))
        } else {
            self.substring(&lv.form, &rv.form)
        }
    }

    fn best_tier(&self, lemma: &str, lemma_variants: &[Variant], form: &IndexedForm) -> Option<Hit> {
        let tiers = self.config.tiers;
        let root = form.normalized.as_str();
        let plain = |tier| {
            Some(Hit {
                tier,
                lemma_variant: None,
                root_variant: None,
            })
        };
        if tiers.exact && lemma == root {
            return plain(Tier::Exact);
        }
        if tiers.substring && self.substring(lemma, root) {
            return plain(Tier::Substring);
        }
        if tiers.variant_substring {
            for lv in lemma_variants {
                for rv in &form.variants {
                    if lv.rules.is_empty() && rv.rules.is_empty() {
                        continue;
                    }
                    if self.variant_hit(lv, rv) {
                        return Some(Hit {
                            tier: Tier::VariantSubstring,
                            lemma_variant: Some(lv.clone()),
                            root_variant: Some(rv.clone()),
                        });
                    }
                }
            }
        }
        if tiers.edit1 {
            let min = self.config.min_len;
            for lv in lemma_variants {
                if char_len(&lv.form) < min {
                    continue;
                }
                for rv in form.variants.iter().filter(|v| !v.is_elided()) {
                    if char_len(&rv.form) >= min && strsim::levenshtein(&lv.form, &rv.form) <= 1 {
                        return Some(Hit {
                            tier: Tier::Edit1,
                            lemma_variant: Some(lv.clone()),
                            root_variant: Some(rv.clone()),
                        });
                    }
                }
            }
        }
        None
    }

    /// Best reference form for `lemma`: `(form position, normalized lemma, hit)`.
    fn search(&self, lemma: &str) -> (Option<String>, Option<(usize, Hit)>) {
        let Ok(normalized) = normalize_form(lemma) else {
            return (None, None);
        };
        let lemma_variants: Vec<Variant> = variants(&normalized, &self.config.rules, false).into_values().collect();
        let mut best: Option<(usize, Hit)> = None;
        for (pos, form) in self.forms.iter().enumerate() {
            let Some(hit) = self.best_tier(&normalized, &lemma_variants, form) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((bpos, bhit)) => {
                    let current = &self.forms[*bpos];
                    (
                        hit.tier,
                        std::cmp::Reverse(char_len(&form.normalized)),
                        &form.normalized,
                        form.index,
                    ) < (
                        bhit.tier,
                        std::cmp::Reverse(char_len(&current.normalized)),
                        &current.normalized,
                        current.index,
                    )
                }
            };
            if better {
                best = Some((pos, hit));
            }
        }
        (Some(normalized), best)
    }
}

/// Reconstruction database with its normalized roots.
pub struct Blr3Index {
    entries: Vec<ReconstructionEntry>,
    forms: FormIndex,
}

impl Blr3Index {
    pub fn new(entries: Vec<ReconstructionEntry>, config: MatchConfig) -> Self {
        let forms = FormIndex::new(
            entries.iter().enumerate().map(|(i, e)| (i, e.proto_form.as_str())),
            config,
        );
        Blr3Index { entries, forms }
    }

    pub fn entries(&self) -> &[ReconstructionEntry] {
        &self.entries
    }

    pub fn warnings(&self) -> &[String] {
        &self.forms.warnings
    }

    pub fn match_lemma(&self, lemma: &str) -> MatchResult {
        let (normalized, best) = self.forms.search(lemma);
        let Some((pos, hit)) = best else {
            return MatchResult::none(lemma, normalized);
        };
        let form = &self.forms.forms[pos];
        let entry = &self.entries[form.index];
        MatchResult {
            lemma: lemma.to_string(),
            normalized_lemma: normalized,
            matched_entry: Some(MatchedEntry {
                index: form.index,
                form: entry.proto_form.clone(),
                concept: entry.gloss.clone(),
            }),
            tier: hit.tier,
            normalized_root: Some(form.normalized.clone()),
            path: Some(MatchPath::Form),
            lemma_variant: hit.lemma_variant,
            root_variant: hit.root_variant,
        }
    }
}

/// Match one lemma against a reconstruction list.
pub fn match_blr3(lemma: &str, entries: &[ReconstructionEntry], min_len: usize) -> MatchResult {
    Blr3Index::new(entries.to_vec(), MatchConfig::with_min_len(min_len)).match_lemma(lemma)
}

/// Basic-vocabulary wordlists with normalized forms and attested concepts.
pub struct AsjpIndex {
    entries: Vec<AsjpEntry>,
    forms: FormIndex,
    concepts: BTreeMap<String, usize>,
}

impl AsjpIndex {
    pub fn new(entries: Vec<AsjpEntry>, config: MatchConfig) -> Self {
        let forms = FormIndex::new(entries.iter().enumerate().map(|(i, e)| (i, e.form.as_str())), config);
        let mut concepts = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            concepts.entry(e.concept.to_lowercase()).or_insert(i);
        }
        AsjpIndex {
            entries,
            forms,
            concepts,
        }
    }

    pub fn entries(&self) -> &[AsjpEntry] {
        &self.entries
    }

    pub fn attested_concepts(&self) -> BTreeSet<&str> {
        self.concepts.keys().map(String::as_str).collect()
    }

    /// Matches on the gloss naming an attested concept, else on form.
    pub fn match_lemma(&self, lemma: &str, gloss: Option<&str>) -> MatchResult {
        if let Some(gloss) = gloss {
            for piece in gloss.split([',', ';', '/']) {
                let key = piece.trim().to_lowercase();
                if let Some(&i) = self.concepts.get(&key) {
                    let entry = &self.entries[i];
                    return MatchResult {
                        lemma: lemma.to_string(),
                        normalized_lemma: normalize_form(lemma).ok(),
                        matched_entry: Some(MatchedEntry {
                            index: i,
                            form: entry.form.clone(),
                            concept: Some(entry.concept.clone()),
                        }),
                        tier: Tier::Exact,
                        normalized_root: normalize_form(&entry.form).ok(),
                        path: Some(MatchPath::Gloss),
                        lemma_variant: None,
                        root_variant: None,
                    };
                }
            }
        }
        let (normalized, best) = self.forms.search(lemma);
        let Some((pos, hit)) = best else {
            return MatchResult::none(lemma, normalized);
        };
        let form = &self.forms.forms[pos];
        let entry = &self.entries[form.index];
        MatchResult {
            lemma: lemma.to_string(),
            normalized_lemma: normalized,
            matched_entry: Some(MatchedEntry {
                index: form.index,
                form: entry.form.clone(),
                concept: Some(entry.concept.clone()),
            }),
            tier: hit.tier,
            normalized_root: Some(form.normalized.clone()),
            path: Some(MatchPath::Form),
            lemma_variant: hit.lemma_variant,
            root_variant: hit.root_variant,
        }
    }
}

pub fn match_asjp(lemma: &str, gloss: Option<&str>, entries: &[AsjpEntry]) -> MatchResult {
    AsjpIndex::new(entries.to_vec(), MatchConfig::default()).match_lemma(lemma, gloss)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Both,
    Blr3,
    Asjp,
    Unvalidated,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Both => "Both",
            Status::Blr3 => "BLR3",
            Status::Asjp => "ASJP",
            Status::Unvalidated => "Unvalidated",
        }
    }

    pub fn is_validated(self) -> bool {
        self != Status::Unvalidated
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationStatus {
    pub root: String,
    pub status: Status,
}

pub fn validation_status(root: &str, blr3: &MatchResult, asjp: &MatchResult) -> ValidationStatus {
    let status = match (blr3.is_match(), asjp.is_match()) {
        (true, true) => Status::Both,
        (true, false) => Status::Blr3,
        (false, true) => Status::Asjp,
        (false, false) => Status::Unvalidated,
    };
    ValidationStatus {
        root: root.to_string(),
        status,
    }
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationRow {
    pub root: String,
    pub language_count: usize,
    pub blr3: MatchResult,
    pub asjp: MatchResult,
    pub status: Status,
}

pub fn validate(
    root: &str,
    language_count: usize,
    gloss: Option<&str>,
    blr3: &Blr3Index,
    asjp: &AsjpIndex,
) -> ValidationRow {
    let b = blr3.match_lemma(root);
    let a = asjp.match_lemma(root, gloss);
    let status = validation_status(root, &b, &a).status;
    ValidationRow {
        root: root.to_string(),
        language_count,
        blr3: b,
        asjp: a,
        status,
    }
}

pub const REPORT_HEADER: &str = "root\tlanguage_count\tblr3_form\tblr3_tier\tasjp_concept\tasjp_path\tstatus";

pub fn report_tsv(rows: &[ValidationRow]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let blr3_form = r.blr3.matched_entry.as_ref().map_or("-", |m| m.form.as_str());
        let concept = r
            .asjp
            .matched_entry
            .as_ref()
            .and_then(|m| m.concept.as_deref())
            .unwrap_or("-");
        let path = r.asjp.path.map_or("-", MatchPath::as_str);
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.root, r.language_count, blr3_form, r.blr3.tier, concept, path, r.status
        ));
    }
    out
}

pub fn summary_line(rows: &[ValidationRow]) -> String {
    let validated = rows.iter().filter(|r| r.status.is_validated()).count();
    let pct = if rows.is_empty() {
        0.0
    } else {
        100.0 * validated as f64 / rows.len() as f64
    };
    format!("{validated}/{} validated ({pct:.1}%)", rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recon(forms: &[&str]) -> Vec<ReconstructionEntry> {
        forms
            .iter()
            .map(|f| ReconstructionEntry {
                proto_form: f.to_string(),
                gloss: None,
            })
            .collect()
    }

    fn asjp(rows: &[(&str, &str, &str)]) -> Vec<AsjpEntry> {
        rows.iter()
            .map(|(l, c, f)| AsjpEntry {
                language: l.to_string(),
                concept: c.to_string(),
                form: f.to_string(),
            })
            .collect()
    }

    const TABLE1_ROOTS: [&str; 8] = ["*gombe", "*mUn", "*mok", "*-ntU", "*moi", "*gano", "*-daka-", "*oko"];

    #[test]
    fn blr3_single_entry_examples() {
        let r = match_blr3("umuntu", &recon(&["*-ntU"]), 3);
        assert_eq!(r.tier, Tier::Substring);
        assert_eq!(r.normalized_root.as_deref(), Some("ntu"));

        let r = match_blr3("mpaka", &recon(&["*-daka-"]), 3);
        assert_eq!(r.tier, Tier::Edit1);
        assert_eq!(r.lemma_variant.unwrap().form, "paka");
        assert_eq!(r.root_variant.unwrap().form, "daka");

        let r = match_blr3("ona", &recon(&["*-bon-"]), 3);
        assert_eq!(r.tier, Tier::VariantSubstring);
        assert_eq!(r.root_variant.unwrap().form, "on");
    }

    #[test]
    fn mali_is_unmatched_against_table_one() {
        let r = match_blr3("mali", &recon(&TABLE1_ROOTS), 3);
        assert_eq!(r.tier, Tier::None);
        assert!(r.matched_entry.is_none());
    }

    #[test]
    fn short_strings_need_exact_equality() {
        assert_eq!(match_blr3("ba", &recon(&["*-b\u{e0}-"]), 3).tier, Tier::Exact);
        assert!(!match_blr3("wa", &recon(&["*-gu-"]), 3).is_match());
        assert!(!match_blr3("aba", &recon(&["*ab"]), 3).is_match());
        assert!(!match_blr3("ka", &recon(&["*kala"]), 3).is_match());
    }

    #[test]
    fn equal_tier_prefers_longest_root() {
        let r = match_blr3("tatuma", &recon(&["*tat", "*tatu"]), 3);
        assert_eq!(r.matched_entry.unwrap().form, "*tatu");
        let r = match_blr3("xabcx", &recon(&["*bcx", "*abc"]), 3);
        assert_eq!(r.matched_entry.unwrap().form, "*abc");
    }

    #[test]
    fn substring_tier_is_direction_symmetric() {
        let a = match_blr3("ntu", &recon(&["*umuntu"]), 3);
        let b = match_blr3("umuntu", &recon(&["*ntu"]), 3);
        assert_eq!(a.tier, Tier::Substring);
        assert_eq!(a.tier, b.tier);
    }

    #[test]
    fn disabled_tiers_never_add_matches() {
        let entries = recon(&TABLE1_ROOTS);
        let lemmas = ["ngombe", "muno", "mutwe", "mpaka", "mali", "masoko", "umwe", "ngano"];
        let full = Blr3Index::new(entries.clone(), MatchConfig::default());
        for mask in 0u8..16 {
            let tiers = TierSet {
                exact: mask & 1 != 0,
                substring: mask & 2 != 0,
                variant_substring: mask & 4 != 0,
                edit1: mask & 8 != 0,
            };
            let partial = Blr3Index::new(
                entries.clone(),
                MatchConfig {
                    tiers,
                    ..MatchConfig::default()
                },
            );
            for l in lemmas {
                let p = partial.match_lemma(l);
                if p.is_match() {
                    let f = full.match_lemma(l);
                    assert!(f.is_match() && f.tier <= p.tier, "{l} at {mask:04b}");
                }
            }
        }
    }

    #[test]
    fn asjp_gloss_and_form_paths() {
        let entries = asjp(&[
            ("kik", "head", "m\u{169}twe"),
            ("zul", "person", "umuntu"),
            ("kik", "one", "\u{129}mwe"),
        ]);
        let r = match_asjp("mutwe", Some("head"), &entries);
        assert_eq!(r.path, Some(MatchPath::Gloss));
        assert_eq!(r.matched_entry.unwrap().concept.as_deref(), Some("head"));

        let r = match_asjp("umwe", Some("one"), &entries);
        assert_eq!(r.matched_entry.unwrap().concept.as_deref(), Some("one"));

        let r = match_asjp("umuntu", None, &entries);
        assert_eq!(r.path, Some(MatchPath::Form));
        assert_eq!(r.tier, Tier::Exact);

        assert!(!match_asjp("mali", None, &entries).is_match());
        assert!(!match_asjp("mali", Some("wealth"), &entries).is_match());
    }

    #[test]
    fn status_table() {
        let hit = match_blr3("ngombe", &recon(&["*gombe"]), 3);
        let miss = match_blr3("mali", &recon(&["*gombe"]), 3);
        assert_eq!(validation_status("x", &hit, &hit).status, Status::Both);
        assert_eq!(validation_status("x", &hit, &miss).status, Status::Blr3);
        assert_eq!(validation_status("x", &miss, &hit).status, Status::Asjp);
        assert_eq!(validation_status("x", &miss, &miss).status, Status::Unvalidated);
    }

    #[test]
    fn summary_formatting() {
        assert_eq!(summary_line(&[]), "0/0 validated (0.0%)");
    }
}
