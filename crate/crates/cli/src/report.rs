//! Plain-text review summary assembled from stage outputs.

use std::collections::BTreeMap;
use std::fmt::Write;

/// Raw stage files; any may be missing.
#[derive(Debug, Clone, Default)]
pub struct Sources {
    pub candidates: Option<String>,
    pub validation: Option<String>,
    pub validation_summary: Option<String>,
    pub verdicts: Option<String>,
    pub agreement: Option<String>,
    pub nounclass_test: Option<String>,
    pub nounclass_classes: Option<String>,
    pub zone_test: Option<String>,
    pub tree: Option<String>,
    pub rf: Option<String>,
}

/// Data rows of a TSV with a header line.
fn rows(text: &str) -> Vec<Vec<&str>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split('\t').collect())
        .collect()
}

/// Header-keyed single data row.
fn single_row(text: &str) -> BTreeMap<&str, &str> {
    let mut lines = text.lines();
    let (Some(h), Some(v)) = (lines.next(), lines.next()) else {
        return BTreeMap::new();
    };
    h.split('\t').zip(v.split('\t')).collect()
}

fn table(out: &mut String, header: &[&str], body: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in body {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |out: &mut String, cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&width).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            s.push_str(c);
            s.extend(std::iter::repeat_n(' ', w - c.chars().count()));
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(out, header.to_vec());
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    line(out, rule.iter().map(String::as_str).collect());
    for r in body {
        line(out, r.iter().map(String::as_str).collect());
    }
}

fn heading(out: &mut String, title: &str) {
    let _ = writeln!(out, "\n{title}\n{}", "=".repeat(title.chars().count()));
}

fn dash(s: &str) -> String {
    if s == "-" {
        String::new()
    } else {
        s.to_string()
    }
}

pub fn render(src: &Sources) -> String {
    let mut out = String::from("protolex run report\n");

    let pos_of: BTreeMap<&str, &str> = src
        .candidates
        .as_deref()
        .map(|t| {
            rows(t)
                .into_iter()
                .filter(|r| r.len() >= 2)
                .map(|r| (r[0], r[1]))
                .collect()
        })
        .unwrap_or_default();

    heading(&mut out, "Validation against reference data");
    match &src.validation {
        None => out.push_str("not run\n"),
        Some(text) => {
            let mut groups: BTreeMap<&str, Vec<Vec<String>>> = BTreeMap::new();
            for r in rows(text).into_iter().filter(|r| r.len() >= 7) {
                let status = if r[6] == "Unvalidated" {
                    "---".to_string()
                } else {
                    r[6].to_string()
                };
                let pos = pos_of.get(r[0]).copied().unwrap_or("unlisted");
                groups
                    .entry(pos)
                    .or_default()
                    .push(vec![r[0].into(), r[1].into(), dash(r[2]), dash(r[4]), status]);
            }
            for (pos, body) in &groups {
                let _ = writeln!(out, "\n{pos} candidates");
                table(&mut out, &["Lemma", "Langs", "BLR3", "ASJP", "Status"], body);
            }
            if let Some(s) = &src.validation_summary {
                let _ = writeln!(out, "\n{}", s.trim());
            }
        }
    }

    heading(&mut out, "Filters");
    match &src.verdicts {
        None => out.push_str("not run\n"),
        Some(text) => {
            let all = rows(text);
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for r in &all {
                *counts.entry(r.get(1).copied().unwrap_or("?")).or_default() += 1;
            }
            for (v, n) in &counts {
                let _ = writeln!(out, "{v}: {n}");
            }
            let flagged: Vec<Vec<String>> = all
                .iter()
                .filter(|r| r.len() >= 3 && r[1] != "pass")
                .map(|r| vec![r[0].into(), r[1].into(), r[2].into()])
                .collect();
            if !flagged.is_empty() {
                out.push('\n');
                table(&mut out, &["Root", "Verdict", "Evidence"], &flagged);
            }
        }
    }

    heading(&mut out, "Second-source agreement");
    match &src.agreement {
        None => out.push_str("not run\n"),
        Some(text) => {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for r in rows(text) {
                *counts.entry(r.get(1).copied().unwrap_or("?")).or_default() += 1;
            }
            for (v, n) in &counts {
                let _ = writeln!(out, "{v}: {n}");
            }
        }
    }

    heading(&mut out, "Noun classes");
    match &src.nounclass_test {
        None => out.push_str("not run\n"),
        Some(text) => {
            let r = single_row(text);
            let get = |k: &str| r.get(k).copied().unwrap_or("?");
            let _ = writeln!(
                out,
                "within-class mean {}, between-class mean {}, p = {} ({} permutations, seed {}, {} scheme)",
                get("within_mean"),
                get("between_mean"),
                get("p_value"),
                get("n_perm"),
                get("seed"),
                get("scheme")
            );
            if let Some(classes) = &src.nounclass_classes {
                let body: Vec<Vec<String>> = rows(classes)
                    .into_iter()
                    .map(|r| r.into_iter().map(str::to_string).collect())
                    .collect();
                out.push('\n');
                table(&mut out, &["Class", "Languages", "Within min", "Within mean"], &body);
            }
        }
    }

    heading(&mut out, "Language structure");
    match &src.tree {
        None => out.push_str("not run\n"),
        Some(t) => {
            let _ = writeln!(out, "Ward tree: {}", t.trim());
        }
    }
    if let Some(z) = &src.zone_test {
        let r = single_row(z);
        let get = |k: &str| r.get(k).copied().unwrap_or("?");
        let _ = writeln!(
            out,
            "zone test: same-zone {}, cross-zone {}, p = {} ({} permutations)",
            get("same_zone_mean"),
            get("cross_zone_mean"),
            get("p_value"),
            get("n_perm")
        );
    }
    if let Some(rf) = &src.rf {
        let r = single_row(rf);
        let _ = writeln!(
            out,
            "Robinson-Foulds distance to {}: {}",
            r.get("reference").copied().unwrap_or("?"),
            r.get("rf").copied().unwrap_or("?")
        );
    }
    out
}
