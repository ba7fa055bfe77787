use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::PhyloTree;

/// Nontrivial splits of the unrooted tree, each given by the side that
/// excludes the alphabetically first leaf.
pub fn bipartitions(tree: &PhyloTree) -> BTreeSet<BTreeSet<String>> {
    let all: BTreeSet<String> = tree.leaf_names().into_iter().collect();
    let n = all.len();
    let Some(anchor) = all.first().cloned() else {
        return BTreeSet::new();
    };
    let mut out = BTreeSet::new();
    for (i, side) in tree.subtree_leaves().into_iter().enumerate() {
        if i == tree.root {
            continue;
        }
        let side: BTreeSet<String> = side.into_iter().collect();
        let side = if side.contains(&anchor) {
            all.difference(&side).cloned().collect()
        } else {
            side
        };
        if side.len() >= 2 && side.len() <= n.saturating_sub(2) {
            out.insert(side);
        }
    }
    out
}

/// Unrooted Robinson-Foulds distance: splits present in exactly one tree.
pub fn robinson_foulds(a: &PhyloTree, b: &PhyloTree) -> Result<usize> {
    let la: BTreeSet<String> = a.leaf_names().into_iter().collect();
    let lb: BTreeSet<String> = b.leaf_names().into_iter().collect();
    if la != lb {
        let diff: Vec<&String> = la.symmetric_difference(&lb).collect();
        return Err(Error::InvalidInput(format!(
            "trees have different leaf sets; differing leaves: {}",
            diff.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(bipartitions(a).symmetric_difference(&bipartitions(b)).count())
}
