//! Listing of canonical graphs of a fixed biarity with their tree counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphJson};
use crate::shape::{enumerate_shapes, CatalogSpec};
use crate::trees::{enumerate_trees, TreeMode};

pub const MAX_VERTICES: usize = 5;
pub const MAX_LEGS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub key: String,
    pub vertices: usize,
    pub graph: GraphJson,
    /// `|T_G|`, binary trees.
    pub trees: usize,
    /// `|T̂_G|`, trees with nodes of any arity ≥ 2.
    pub sh_trees: usize,
}

/// Canonical graphs with `1..=max_vertices` vertices, `m` outputs and `n` inputs, every
/// vertex having at least one input and one output, and at most two parallel edges.
pub fn dump_catalog(max_vertices: usize, m: usize, n: usize) -> Result<Vec<CatalogEntry>> {
    if max_vertices > MAX_VERTICES || m > MAX_LEGS || n > MAX_LEGS {
        return Err(Error::OutOfRange(format!(
            "catalog bounds too large: at most {MAX_VERTICES} vertices and {MAX_LEGS} legs per side"
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::OutOfRange("graphs need at least one output and one input".into()));
    }
    let shapes = enumerate_shapes(&CatalogSpec::new(max_vertices, m, n), &|a, b| a >= 1 && b >= 1, &|a, b| (a, b) == (m, n));
    Ok(shapes
        .iter()
        .map(|s| {
            let dag = s.dag();
            CatalogEntry {
                key: s.describe(),
                vertices: s.len(),
                graph: Graph::from_shape(s).to_json(),
                trees: enumerate_trees(&dag, TreeMode::Binary).len(),
                sh_trees: enumerate_trees(&dag, TreeMode::General).len(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladders_for_one_one() {
        let c = dump_catalog(2, 1, 1).unwrap();
        // the corolla, and two vertices joined by one or two edges
        assert_eq!(c.iter().map(|e| e.vertices).collect::<Vec<_>>(), vec![1, 2, 2]);
        assert!(c.iter().all(|e| e.sh_trees == e.trees));
    }

    #[test]
    fn vee_entry() {
        let c = dump_catalog(3, 1, 2).unwrap();
        let vee = c.iter().filter(|e| e.vertices == 3).find(|e| e.trees == 2 && e.sh_trees == 3);
        assert!(vee.is_some());
    }

    #[test]
    fn guard_rejects_large_bounds() {
        assert!(dump_catalog(6, 1, 1).is_err());
        assert!(dump_catalog(2, 5, 1).is_err());
    }
}
