use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::error::{Error, Result};

use super::LanguageTree;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: Option<String>,
    /// Length of the branch above this node.
    pub length: Option<f64>,
    pub children: Vec<usize>,
}

/// Arena tree as read from or written to Newick; not necessarily binary.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree {
    pub nodes: Vec<Node>,
    pub root: usize,
}

impl PhyloTree {
    /// Leaf names in traversal order.
    pub fn leaf_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if node.children.is_empty() {
                out.push(node.name.clone().unwrap_or_default());
            }
            stack.extend(node.children.iter().rev());
        }
        out
    }

    /// Leaf names below each node.
    pub(crate) fn subtree_leaves(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for i in self.postorder() {
            let node = &self.nodes[i];
            if node.children.is_empty() {
                out[i] = vec![node.name.clone().unwrap_or_default()];
            } else {
                let mut all: Vec<String> = node.children.iter().flat_map(|&c| out[c].clone()).collect();
                all.sort();
                out[i] = all;
            }
        }
        out
    }

    fn postorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((i, expanded)) = stack.pop() {
            if expanded {
                order.push(i);
            } else {
                stack.push((i, true));
                for &c in self.nodes[i].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// Internal clades with heights read back under the half-height
    /// convention (twice the longest path to a leaf). Missing lengths count as 0.
    pub fn clade_heights(&self) -> BTreeMap<BTreeSet<String>, f64> {
        let leaves = self.subtree_leaves();
        let mut depth = vec![0.0f64; self.nodes.len()];
        let mut out = BTreeMap::new();
        for i in self.postorder() {
            let node = &self.nodes[i];
            if node.children.is_empty() {
                continue;
            }
            depth[i] = node
                .children
                .iter()
                .map(|&c| depth[c] + self.nodes[c].length.unwrap_or(0.0))
                .fold(0.0, f64::max);
            out.insert(leaves[i].iter().cloned().collect(), 2.0 * depth[i]);
        }
        out
    }

    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_node(self.root, &mut out);
        out.push(';');
        out
    }

    fn write_node(&self, i: usize, out: &mut String) {
        let node = &self.nodes[i];
        if !node.children.is_empty() {
            out.push('(');
            for (k, &c) in node.children.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                self.write_node(c, out);
            }
            out.push(')');
        }
        if let Some(name) = &node.name {
            out.push_str(&quote_label(name));
        }
        if let Some(len) = node.length {
            let _ = write!(out, ":{len}");
        }
    }
}

fn quote_label(name: &str) -> String {
    if name.chars().any(|c| "(),:;'[] \t\n".contains(c)) {
        format!("'{}'", name.replace('\'', "''"))
    } else {
        name.to_string()
    }
}

/// Newick text of a dendrogram, half-height branch lengths.
pub fn newick_export(tree: &LanguageTree) -> String {
    tree.to_phylo().to_newick()
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    nodes: Vec<Node>,
}

impl Parser {
    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::Newick(format!("{msg} at character {}", self.pos + 1))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn subtree(&mut self) -> Result<usize> {
        let mut children = Vec::new();
        if self.peek() == Some('(') {
            self.pos += 1;
            loop {
                children.push(self.subtree()?);
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected `,` or `)`")),
                }
            }
        }
        let name = self.label()?;
        let length = if self.peek() == Some(':') {
            self.pos += 1;
            Some(self.number()?)
        } else {
            None
        };
        if children.is_empty() && name.is_none() {
            return Err(self.err("unnamed leaf"));
        }
        self.nodes.push(Node { name, length, children });
        Ok(self.nodes.len() - 1)
    }

    fn label(&mut self) -> Result<Option<String>> {
        if self.peek() == Some('\'') {
            self.pos += 1;
            let mut s = String::new();
            loop {
                match self.chars.get(self.pos) {
                    None => return Err(self.err("unterminated quoted label")),
                    Some('\'') if self.chars.get(self.pos + 1) == Some(&'\'') => {
                        s.push('\'');
                        self.pos += 2;
                    }
                    Some('\'') => {
                        self.pos += 1;
                        return Ok(Some(s));
                    }
                    Some(&c) => {
                        s.push(c);
                        self.pos += 1;
                    }
                }
            }
        }
        let start = self.pos;
        while let Some(&c) = self.chars.get(self.pos) {
            if "(),:;".contains(c) || c.is_whitespace() {
                break;
            }
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok((!s.is_empty()).then_some(s))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while let Some(&c) = self.chars.get(self.pos) {
            if c.is_ascii_digit() || "+-.eE".contains(c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(format!("invalid branch length `{s}`")))
    }
}

/// Reads one Newick tree: optional branch lengths, internal labels and
/// single-quoted labels; `[...]` comments are not supported.
pub fn parse_newick(text: &str) -> Result<PhyloTree> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        nodes: Vec::new(),
    };
    if p.peek().is_none() {
        return Err(Error::Newick("empty input".into()));
    }
    let root = p.subtree()?;
    if p.peek() != Some(';') {
        return Err(p.err("expected `;`"));
    }
    p.pos += 1;
    if p.peek().is_some() {
        return Err(p.err("trailing content after `;`"));
    }
    let tree = PhyloTree { nodes: p.nodes, root };
    let names = tree.leaf_names();
    let unique: BTreeSet<&String> = names.iter().collect();
    if unique.len() != names.len() {
        return Err(Error::Newick("duplicate leaf names".into()));
    }
    Ok(tree)
}
