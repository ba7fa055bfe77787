//! Family-structure recovery over a language similarity matrix.

mod mds;
mod newick;
mod rf;
mod ward;
mod zone;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub use mds::{classical_mds, mds_tsv, spearman_correlation, MdsProjection};
pub use newick::{newick_export, parse_newick, Node, PhyloTree};
pub use rf::{bipartitions, robinson_foulds};
pub use ward::{ward_from_similarity, ward_linkage};
pub use zone::{zone_permutation_test, zone_summary_tsv, ZoneTestResult};

/// One agglomeration step. Cluster ids `0..n` are leaves; merge `k`
/// creates cluster `n + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageTree {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
}

impl LanguageTree {
    /// Checks the merge sequence forms a single rooted binary tree.
    pub fn new(leaves: Vec<String>, merges: Vec<Merge>) -> Result<Self> {
        let n = leaves.len();
        if n == 0 {
            return Err(Error::InvalidInput("tree has no leaves".into()));
        }
        if merges.len() != n - 1 {
            return Err(Error::InvalidInput(format!(
                "{n} leaves need {} merges, found {}",
                n - 1,
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut sizes: Vec<usize> = vec![1; n];
        let mut last = f64::NEG_INFINITY;
        for (k, m) in merges.iter().enumerate() {
            let id = n + k;
            for c in [m.cluster_a, m.cluster_b] {
                if c >= id || used[c] {
                    return Err(Error::InvalidInput(format!("merge {k} uses cluster {c} invalidly")));
                }
                used[c] = true;
            }
            if m.cluster_a == m.cluster_b {
                return Err(Error::InvalidInput(format!("merge {k} joins a cluster with itself")));
            }
            let size = sizes[m.cluster_a] + sizes[m.cluster_b];
            if size != m.size {
                return Err(Error::InvalidInput(format!(
                    "merge {k} declares size {} but joins {size}",
                    m.size
                )));
            }
            if !(m.height.is_finite() && m.height >= last - 1e-12 * last.abs().max(1.0)) {
                return Err(Error::InvalidInput(format!("merge {k} height {} decreases", m.height)));
            }
            last = m.height;
            sizes.push(size);
        }
        Ok(LanguageTree { leaves, merges })
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    /// Leaf indices under every cluster id, leaves first.
    pub fn cluster_members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.leaves.len()).map(|i| vec![i]).collect();
        for m in &self.merges {
            let mut joined = out[m.cluster_a].clone();
            joined.extend_from_slice(&out[m.cluster_b]);
            joined.sort_unstable();
            out.push(joined);
        }
        out
    }

    /// Whether the labels form exactly one cluster of the dendrogram.
    pub fn has_clade(&self, labels: &[&str]) -> bool {
        let want: BTreeSet<&str> = labels.iter().copied().collect();
        self.cluster_members().iter().any(|members| {
            members.len() == want.len() && members.iter().all(|&i| want.contains(self.leaves[i].as_str()))
        })
    }

    /// Internal clades keyed by leaf labels, valued by merge height.
    pub fn clade_heights(&self) -> BTreeMap<BTreeSet<String>, f64> {
        let members = self.cluster_members();
        let n = self.leaves.len();
        self.merges
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let labels = members[n + k].iter().map(|&i| self.leaves[i].clone()).collect();
                (labels, m.height)
            })
            .collect()
    }

    /// Branch lengths follow the half-height convention: a node sits at half
    /// its merge height, and each branch spans the difference to its child.
    pub fn to_phylo(&self) -> PhyloTree {
        let n = self.leaves.len();
        let members = self.cluster_members();
        let node_height = |c: usize| if c < n { 0.0 } else { self.merges[c - n].height / 2.0 };
        let mut nodes: Vec<Node> = Vec::with_capacity(2 * n - 1);
        for leaf in &self.leaves {
            nodes.push(Node {
                name: Some(leaf.clone()),
                length: None,
                children: Vec::new(),
            });
        }
        for (k, m) in self.merges.iter().enumerate() {
            let id = n + k;
            let mut kids = [m.cluster_a, m.cluster_b];
            kids.sort_by_key(|&c| members[c][0]);
            for &c in &kids {
                nodes[c].length = Some(node_height(id) - node_height(c));
            }
            nodes.push(Node {
                name: None,
                length: None,
                children: kids.to_vec(),
            });
        }
        PhyloTree {
            root: nodes.len() - 1,
            nodes,
        }
    }
}
