//! Orthographic normalization and Bantu surface-variant generation.

use std::collections::BTreeMap;
use std::fmt;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Case-fold, decompose, drop combining marks (tones) and keep letters only.
///
/// Asterisks, hyphens, apostrophes and whitespace all disappear:
/// `*tàtù` becomes `tatu`, `ng'ombe` becomes `ngombe`.
pub fn normalize_form(s: &str) -> Result<String> {
    let out: String = s
        .to_lowercase()
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .filter(|c| c.is_alphabetic())
        .collect();
    if out.is_empty() {
        Err(Error::Degenerate(format!("`{s}` normalizes to the empty string")))
    } else {
        Ok(out)
    }
}

pub(crate) fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// A single rewrite used to derive surface variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VariantRule {
    /// `laal` -> `lal`
    VowelRunCollapse,
    /// `nne` -> `ne`
    GeminateCollapse,
    /// `mbili` -> `bili`, `camba` -> `caba`
    PrenasalSimplify,
    /// `nanai` -> `nane`, `au` -> `o`
    Monophthongize,
    /// `bon` -> `on`; reference roots only
    InitialElision,
}

impl VariantRule {
    pub const ALL: [VariantRule; 5] = [
        VariantRule::VowelRunCollapse,
        VariantRule::GeminateCollapse,
        VariantRule::PrenasalSimplify,
        VariantRule::Monophthongize,
        VariantRule::InitialElision,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantRule::VowelRunCollapse => "vowel-run",
            VariantRule::GeminateCollapse => "geminate",
            VariantRule::PrenasalSimplify => "prenasal",
            VariantRule::Monophthongize => "monophthong",
            VariantRule::InitialElision => "elision",
        }
    }

    fn apply(self, s: &str) -> Option<String> {
        let chars: Vec<char> = s.chars().collect();
        let out: String = match self {
            VariantRule::VowelRunCollapse => collapse_runs(&chars, is_vowel),
            VariantRule::GeminateCollapse => collapse_runs(&chars, |c| !is_vowel(c)),
            VariantRule::PrenasalSimplify => {
                let mut out = String::new();
                let mut i = 0;
                while i < chars.len() {
                    if i + 1 < chars.len() && is_prenasal_cluster(chars[i], chars[i + 1]) {
                        out.push(chars[i + 1]);
                        i += 2;
                    } else {
                        out.push(chars[i]);
                        i += 1;
                    }
                }
                out
            }
            VariantRule::Monophthongize => s.replace("ai", "e").replace("au", "o"),
            VariantRule::InitialElision => match chars.split_first() {
                Some((first, rest)) if !is_vowel(*first) && !rest.is_empty() => rest.iter().collect(),
                _ => return None,
            },
        };
        (out != s && !out.is_empty()).then_some(out)
    }
}

impl fmt::Display for VariantRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn collapse_runs(chars: &[char], applies: impl Fn(char) -> bool) -> String {
    let mut out = String::new();
    let mut prev: Option<char> = None;
    for &c in chars {
        if prev == Some(c) && applies(c) {
            continue;
        }
        out.push(c);
        prev = Some(c);
    }
    out
}

fn is_prenasal_cluster(a: char, b: char) -> bool {
    matches!(
        (a, b),
        ('m', 'b') | ('n', 'd') | ('n', 'g') | ('n', 't') | ('m', 'p') | ('n', 'k')
    )
}

/// Which variant rules are switched on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantRules {
    enabled: [bool; 5],
}

impl Default for VariantRules {
    fn default() -> Self {
        VariantRules { enabled: [true; 5] }
    }
}

impl VariantRules {
    pub fn none() -> Self {
        VariantRules { enabled: [false; 5] }
    }

    pub fn with(mut self, rule: VariantRule, on: bool) -> Self {
        self.enabled[rule as usize] = on;
        self
    }

    pub fn is_enabled(&self, rule: VariantRule) -> bool {
        self.enabled[rule as usize]
    }
}

/// A derived form together with the rules that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub form: String,
    pub rules: Vec<VariantRule>,
}

impl Variant {
    /// Produced by dropping the initial consonant at some step.
    pub fn is_elided(&self) -> bool {
        self.rules.contains(&VariantRule::InitialElision)
    }
}

/// Maximum number of rule applications chained to reach a variant.
pub const VARIANT_DEPTH: usize = 2;

/// Closure of `s` under the enabled rules, up to two chained rewrites.
///
/// `s` itself is included with an empty rule list. Initial-consonant
/// elision is only applied when `reference` is set. Each form keeps the
/// first (shortest, then rule-ordered) derivation found.
pub fn variants(s: &str, rules: &VariantRules, reference: bool) -> BTreeMap<String, Variant> {
    let mut out = BTreeMap::new();
    out.insert(
        s.to_string(),
        Variant {
            form: s.to_string(),
            rules: Vec::new(),
        },
    );
    let mut frontier = vec![out[s].clone()];
    for _ in 0..VARIANT_DEPTH {
        let mut next = Vec::new();
        for v in &frontier {
            for rule in VariantRule::ALL {
                if !rules.is_enabled(rule) || (rule == VariantRule::InitialElision && !reference) {
                    continue;
                }
                if let Some(form) = rule.apply(&v.form) {
                    if out.contains_key(&form) {
                        continue;
                    }
                    let mut path = v.rules.clone();
                    path.push(rule);
                    let derived = Variant {
                        form: form.clone(),
                        rules: path,
                    };
                    out.insert(form, derived.clone());
                    next.push(derived);
                }
            }
        }
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_form("*t\u{e0}t\u{f9}").unwrap(), "tatu");
        assert_eq!(normalize_form("ng'ombe").unwrap(), "ngombe");
        assert_eq!(normalize_form("*-ntU").unwrap(), "ntu");
        assert_eq!(normalize_form("*-j\u{ed}m-").unwrap(), "jim");
        assert_eq!(normalize_form("m\u{169}twe").unwrap(), "mutwe");
        assert!(normalize_form("*--").is_err());
        assert!(normalize_form("").is_err());
    }

    #[test]
    fn variant_examples() {
        let rules = VariantRules::default();
        assert!(variants("camba", &rules, false).contains_key("caba"));
        assert!(variants("nanai", &rules, false).contains_key("nane"));
        assert!(variants("bon", &rules, true).contains_key("on"));
        assert!(!variants("bon", &rules, false).contains_key("on"));
        assert!(variants("laal", &rules, true).contains_key("lal"));
        assert!(variants("nne", &rules, false).contains_key("ne"));
        assert!(variants("mbili", &rules, false).contains_key("bili"));
        assert!(variants("nai", &rules, true).contains_key("ne"));
    }

    #[test]
    fn depth_is_bounded() {
        // camba -> amba -> aba needs two steps; a third (ba) must not appear
        let v = variants("camba", &VariantRules::default(), true);
        assert_eq!(v["aba"].rules.len(), 2);
        assert!(v.values().all(|x| x.rules.len() <= VARIANT_DEPTH));
    }

    #[test]
    fn switched_off_rules_are_not_used() {
        let rules = VariantRules::default().with(VariantRule::PrenasalSimplify, false);
        assert!(!variants("camba", &rules, false).contains_key("caba"));
        let none = variants("nanai", &VariantRules::none(), true);
        assert_eq!(none.len(), 1);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,12}") {
            if let Ok(once) = normalize_form(&s) {
                prop_assert_eq!(normalize_form(&once).unwrap(), once);
            }
        }
    }
}
