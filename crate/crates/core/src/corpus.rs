//! Loading and persisting the pipeline's external data.
//!
//! Every format is line-oriented UTF-8 TSV with LF line endings:
//!
//! * embeddings: a `#dim=<d>` header followed by
//!   `language  lemma  pos  noun_class|-  gloss|-  v1 v2 ... vd`
//! * reconstructions: `proto_form  gloss`
//! * basic-vocabulary wordlists: `language  concept  form`
//! * language metadata: `code  name  zone`
//!
//! Lines starting with `#` (other than the embedding header) are comments.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};

/// Guthrie zone letter for the languages handled here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Zone {
    C,
    E,
    G,
    H,
    J,
    N,
    S,
}

impl Zone {
    pub const ALL: [Zone; 7] = [Zone::C, Zone::E, Zone::G, Zone::H, Zone::J, Zone::N, Zone::S];

    pub fn as_str(self) -> &'static str {
        match self {
            Zone::C => "C",
            Zone::E => "E",
            Zone::G => "G",
            Zone::H => "H",
            Zone::J => "J",
            Zone::N => "N",
            Zone::S => "S",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Zone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Zone::ALL
            .iter()
            .copied()
            .find(|z| z.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown zone `{s}` (expected one of C,E,G,H,J,N,S)")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageMeta {
    pub code: String,
    pub name: String,
    pub zone: Zone,
}

/// The set of languages a dataset may mention, keyed by code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageSet {
    languages: Vec<LanguageMeta>,
}

const BUILTIN_LANGUAGES: [(&str, &str, Zone); 14] = [
    ("kam", "Kamba", Zone::E),
    ("kik", "Kikuyu", Zone::E),
    ("mer", "Kimeru", Zone::E),
    ("kin", "Kinyarwanda", Zone::J),
    ("run", "Kirundi", Zone::J),
    ("lug", "Luganda", Zone::J),
    ("zul", "Zulu", Zone::S),
    ("xho", "Xhosa", Zone::S),
    ("sna", "Shona", Zone::S),
    ("nso", "Northern Sotho", Zone::S),
    ("lin", "Lingala", Zone::C),
    ("kon", "Kongo", Zone::H),
    ("swh", "Swahili", Zone::G),
    ("nya", "Chichewa", Zone::N),
];

impl LanguageSet {
    pub fn new(languages: Vec<LanguageMeta>) -> Result<Self> {
        let mut seen = HashSet::new();
        for lang in &languages {
            if !seen.insert(lang.code.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate language code `{}`", lang.code)));
            }
        }
        Ok(LanguageSet { languages })
    }

    /// The fourteen Eastern and Southern Bantu languages with their zones.
    pub fn builtin() -> Self {
        LanguageSet {
            languages: BUILTIN_LANGUAGES
                .iter()
                .map(|&(code, name, zone)| LanguageMeta {
                    code: code.to_string(),
                    name: name.to_string(),
                    zone,
                })
                .collect(),
        }
    }

    pub fn get(&self, code: &str) -> Option<&LanguageMeta> {
        self.languages.iter().find(|l| l.code == code)
    }

    pub fn contains(&self, code: &str) -> bool {
        self.get(code).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LanguageMeta> {
        self.languages.iter()
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    pub fn zone_of(&self, code: &str) -> Option<Zone> {
        self.get(code).map(|l| l.zone)
    }

    pub fn known_codes(&self) -> String {
        let codes: BTreeSet<&str> = self.languages.iter().map(|l| l.code.as_str()).collect();
        codes.into_iter().collect::<Vec<_>>().join(",")
    }

    fn check(&self, code: &str) -> Result<()> {
        if self.contains(code) {
            Ok(())
        } else {
            Err(Error::UnknownLanguage {
                code: code.to_string(),
                known: self.known_codes(),
            })
        }
    }
}

pub fn load_languages(path: impl AsRef<Path>) -> Result<LanguageSet> {
    let path = path.as_ref();
    let mut languages = Vec::new();
    for (lineno, line) in read_lines(path)? {
        if skip_line(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, lineno, "expected `code<TAB>name<TAB>zone`"));
        }
        let zone = fields[2]
            .parse::<Zone>()
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        languages.push(LanguageMeta {
            code: fields[0].trim().to_string(),
            name: fields[1].trim().to_string(),
            zone,
        });
    }
    LanguageSet::new(languages)
}

/// `code<TAB>name<TAB>zone` lines, as `load_languages` reads them.
pub fn format_languages(languages: &LanguageSet) -> String {
    let mut out = String::new();
    for l in languages.iter() {
        out.push_str(&format!("{}\t{}\t{}\n", l.code, l.name, l.zone));
    }
    out
}

pub fn write_languages(path: impl AsRef<Path>, languages: &LanguageSet) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_languages(languages)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartOfSpeech {
    Noun,
    Verb,
    Other,
}

impl PartOfSpeech {
    pub fn as_str(self) -> &'static str {
        match self {
            PartOfSpeech::Noun => "noun",
            PartOfSpeech::Verb => "verb",
            PartOfSpeech::Other => "other",
        }
    }
}

impl fmt::Display for PartOfSpeech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PartOfSpeech {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noun" => Ok(PartOfSpeech::Noun),
            "verb" => Ok(PartOfSpeech::Verb),
            "other" => Ok(PartOfSpeech::Other),
            other => Err(Error::InvalidInput(format!("unknown part of speech `{other}`"))),
        }
    }
}

/// One (language, lemma) observation with its embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub language: String,
    pub lemma: String,
    pub pos: PartOfSpeech,
    pub noun_class: Option<u8>,
    pub gloss: Option<String>,
    pub vector: Vec<f64>,
}

/// A loaded embedding file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub dim: usize,
    pub records: Vec<EmbeddingRecord>,
    pub warnings: Vec<String>,
}

pub fn load_embeddings(
    path: impl AsRef<Path>,
    expected_dim: Option<usize>,
    languages: &LanguageSet,
) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings(BufReader::new(file), path, expected_dim, languages)
}

/// Parses embeddings from any reader; `origin` is only used in messages.
pub fn read_embeddings<R: BufRead>(
    reader: R,
    origin: &Path,
    expected_dim: Option<usize>,
    languages: &LanguageSet,
) -> Result<EmbeddingSet> {
    let mut dim: Option<usize> = None;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut seen: HashMap<(String, String, PartOfSpeech), usize> = HashMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);

        if dim.is_none() {
            if line.trim().is_empty() {
                continue;
            }
            let header = line.trim().trim_start_matches('#').trim();
            let value = header
                .strip_prefix("dim=")
                .ok_or_else(|| Error::parse(origin, lineno, "missing `#dim=<d>` header"))?;
            let d: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(origin, lineno, format!("bad dimension `{value}`")))?;
            if d == 0 {
                return Err(Error::parse(origin, lineno, "dimension must be positive"));
            }
            if let Some(expected) = expected_dim {
                if expected != d {
                    return Err(Error::parse(
                        origin,
                        lineno,
                        format!("declared dimension {d} differs from expected {expected}"),
                    ));
                }
            }
            dim = Some(d);
            continue;
        }
        if skip_line(line) {
            continue;
        }
        let d = dim.unwrap_or_default();
        let record = parse_record(line, d, languages).map_err(|msg| Error::parse(origin, lineno, msg))?;
        let key = (record.language.clone(), record.lemma.clone(), record.pos);
        if let Some(first) = seen.get(&key) {
            let msg = format!(
                "{}:{lineno}: duplicate ({}, {}, {}) first seen on line {first}; keeping the first",
                origin.display(),
                key.0,
                key.1,
                key.2
            );
            warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        seen.insert(key, lineno);
        records.push(record);
    }

    let dim = dim.ok_or_else(|| Error::parse(origin, 1, "missing `#dim=<d>` header"))?;
    Ok(EmbeddingSet { dim, records, warnings })
}

fn parse_record(line: &str, dim: usize, languages: &LanguageSet) -> std::result::Result<EmbeddingRecord, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 6 {
        return Err(format!("expected 6 tab-separated fields, found {}", fields.len()));
    }
    let language = fields[0].trim();
    languages.check(language).map_err(|e| e.to_string())?;

    let lemma = fields[1].trim();
    if lemma.is_empty() {
        return Err("empty lemma".into());
    }
    let pos: PartOfSpeech = fields[2].parse().map_err(|e: Error| e.to_string())?;
    let noun_class = match fields[3].trim() {
        "-" | "" => None,
        s => {
            let c: u8 = s.parse().map_err(|_| format!("bad noun class `{s}`"))?;
            if !(1..=19).contains(&c) {
                return Err(format!("noun class {c} outside 1-19"));
            }
            if pos != PartOfSpeech::Noun {
                return Err(format!("noun class given for a {pos}"));
            }
            Some(c)
        }
    };
    let gloss = match fields[4].trim() {
        "-" | "" => None,
        s => Some(s.to_string()),
    };
    let vector = fields[5]
        .split_ascii_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|_| format!("malformed float `{tok}`")))
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    if vector.len() != dim {
        return Err(format!(
            "vector has {} values, declared dimension is {dim}",
            vector.len()
        ));
    }
    if vector.iter().any(|v| !v.is_finite()) {
        return Err("non-finite vector component".into());
    }
    Ok(EmbeddingRecord {
        language: language.to_string(),
        lemma: lemma.to_string(),
        pos,
        noun_class,
        gloss,
        vector,
    })
}

pub fn format_embeddings(dim: usize, records: &[EmbeddingRecord]) -> String {
    let mut out = format!("#dim={dim}\n");
    for r in records {
        let class = r.noun_class.map_or_else(|| "-".to_string(), |c| c.to_string());
        let gloss = r.gloss.as_deref().unwrap_or("-");
        let vector = r.vector.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.language, r.lemma, r.pos, class, gloss, vector
        ));
    }
    out
}

pub fn write_embeddings(path: impl AsRef<Path>, dim: usize, records: &[EmbeddingRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(format_embeddings(dim, records).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// A published proto-form, kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructionEntry {
    pub proto_form: String,
    pub gloss: Option<String>,
}

/// Loader output for the reference databases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loaded<T> {
    pub items: Vec<T>,
    pub warnings: Vec<String>,
}

pub fn load_reconstructions(path: impl AsRef<Path>) -> Result<Loaded<ReconstructionEntry>> {
    let path = path.as_ref();
    let mut items = Vec::new();
    let mut warnings = Vec::new();
    for (lineno, line) in read_lines(path)? {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (form, gloss) = match line.split_once('\t') {
            Some((f, g)) => (f, Some(g)),
            None => (line.as_str(), None),
        };
        if form.trim().is_empty() {
            let msg = format!("{}:{lineno}: empty proto_form, skipped", path.display());
            warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        items.push(ReconstructionEntry {
            proto_form: form.to_string(),
            gloss: gloss.filter(|g| !g.trim().is_empty()).map(str::to_string),
        });
    }
    Ok(Loaded { items, warnings })
}

/// The closed basic-vocabulary concept list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptList {
    concepts: Vec<String>,
}

/// The forty ASJP concepts, plus `head`, which the noun validation table
/// reports as a basic-vocabulary match.
const DEFAULT_CONCEPTS: [&str; 41] = [
    "i", "you", "we", "one", "two", "person", "fish", "dog", "louse", "tree", "leaf", "skin", "blood", "bone", "horn",
    "ear", "eye", "nose", "tooth", "tongue", "knee", "hand", "breast", "liver", "drink", "see", "hear", "die", "come",
    "sun", "star", "water", "stone", "fire", "path", "mountain", "night", "full", "new", "name", "head",
];

impl Default for ConceptList {
    fn default() -> Self {
        ConceptList {
            concepts: DEFAULT_CONCEPTS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ConceptList {
    pub fn new<I, S>(concepts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        ConceptList {
            concepts: concepts.into_iter().map(|c| c.as_ref().trim().to_lowercase()).collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(ConceptList::new(load_word_list(path)?))
    }

    pub fn contains(&self, concept: &str) -> bool {
        let c = concept.trim().to_lowercase();
        self.concepts.contains(&c)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.concepts
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsjpEntry {
    pub language: String,
    pub concept: String,
    pub form: String,
}

pub fn load_asjp(path: impl AsRef<Path>, concepts: &ConceptList) -> Result<Loaded<AsjpEntry>> {
    let path = path.as_ref();
    let mut items = Vec::new();
    let mut warnings = Vec::new();
    for (lineno, line) in read_lines(path)? {
        if skip_line(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, lineno, "expected `language<TAB>concept<TAB>form`"));
        }
        let concept = fields[1].trim().to_lowercase();
        if !concepts.contains(&concept) {
            return Err(Error::UnknownConcept {
                concept,
                known: concepts.as_slice().join(","),
            });
        }
        items.push(AsjpEntry {
            language: fields[0].trim().to_string(),
            concept,
            form: fields[2].trim().to_string(),
        });
    }
    if items.is_empty() {
        let msg = format!("{}: no wordlist entries", path.display());
        warn!("{msg}");
        warnings.push(msg);
    }
    Ok(Loaded { items, warnings })
}

/// One entry per line, `#` comments, entries case-folded.
pub fn load_word_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    Ok(read_lines(path)?
        .into_iter()
        .filter(|(_, l)| !skip_line(l))
        .map(|(_, l)| l.trim().to_lowercase())
        .collect())
}

fn skip_line(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l).to_string()))
        .collect())
}
