//! Contraction sequences and their classes as leaf-labelled rooted trees.
//!
//! Leaves are vertex ids. A tree is stored in normal form: the children of every
//! internal node are sorted by their smallest leaf, so equality of normal forms is
//! equality of leaf-labelled trees. An internal edge is named by the leaf set of the
//! node below it.

use std::collections::{BTreeSet, HashMap};

use serde_json::Value;

use crate::digraph::{members, Dag, Mask};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    Leaf(u32),
    Node(Vec<Tree>),
}

/// An internal edge of a tree, named by the leaf set below it.
pub type TreeEdge = BTreeSet<u32>;

impl Tree {
    pub fn node(children: Vec<Tree>) -> Tree {
        Tree::Node(children).normalized()
    }

    pub fn normalized(self) -> Tree {
        match self {
            Tree::Leaf(x) => Tree::Leaf(x),
            Tree::Node(cs) => {
                let mut cs: Vec<Tree> = cs.into_iter().map(Tree::normalized).collect();
                cs.sort_by_key(|c| c.min_leaf());
                Tree::Node(cs)
            }
        }
    }

    pub fn min_leaf(&self) -> u32 {
        match self {
            Tree::Leaf(x) => *x,
            Tree::Node(cs) => cs.iter().map(Tree::min_leaf).min().unwrap_or(u32::MAX),
        }
    }

    pub fn leaves(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut BTreeSet<u32>) {
        match self {
            Tree::Leaf(x) => {
                out.insert(*x);
            }
            Tree::Node(cs) => cs.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf(_))
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Leaf(_) => &[],
            Tree::Node(cs) => cs,
        }
    }

    pub fn is_binary(&self) -> bool {
        match self {
            Tree::Leaf(_) => true,
            Tree::Node(cs) => cs.len() == 2 && cs.iter().all(Tree::is_binary),
        }
    }

    pub fn internal_node_count(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node(cs) => 1 + cs.iter().map(Tree::internal_node_count).sum::<usize>(),
        }
    }

    /// Internal edges (edges between two internal nodes), in pre-order.
    pub fn internal_edges(&self) -> Vec<TreeEdge> {
        let mut out = Vec::new();
        if let Tree::Node(cs) = self {
            for c in cs {
                c.collect_internal(&mut out);
            }
        }
        out
    }

    fn collect_internal(&self, out: &mut Vec<TreeEdge>) {
        if let Tree::Node(cs) = self {
            out.push(self.leaves());
            for c in cs {
                c.collect_internal(out);
            }
        }
    }

    /// The subtree hanging below an internal edge.
    pub fn subtree(&self, e: &TreeEdge) -> Option<&Tree> {
        match self {
            Tree::Leaf(_) => None,
            Tree::Node(cs) => {
                for c in cs {
                    if !c.is_leaf() && &c.leaves() == e {
                        return Some(c);
                    }
                    if let Some(t) = c.subtree(e) {
                        return Some(t);
                    }
                }
                None
            }
        }
    }

    fn has_internal_edge(&self, e: &TreeEdge) -> bool {
        self.subtree(e).is_some()
    }

    /// Contracts an internal edge: the lower node's children join the upper node.
    pub fn contract_edge(&self, e: &TreeEdge) -> Result<Tree> {
        if !self.has_internal_edge(e) {
            return Err(Error::Tree(format!("{e:?} is not an internal edge")));
        }
        fn go(t: &Tree, e: &TreeEdge) -> Tree {
            match t {
                Tree::Leaf(x) => Tree::Leaf(*x),
                Tree::Node(cs) => {
                    let mut out = Vec::new();
                    for c in cs {
                        if !c.is_leaf() && &c.leaves() == e {
                            out.extend(c.children().iter().cloned());
                        } else {
                            out.push(go(c, e));
                        }
                    }
                    Tree::node(out)
                }
            }
        }
        Ok(go(self, e))
    }

    /// Splits at an internal edge into the subtree below it (`t_r`) and the tree with
    /// that subtree replaced by a leaf carrying its smallest id (`t_l`).
    pub fn split_at_edge(&self, e: &TreeEdge) -> Result<(Tree, Tree)> {
        let tr = self.subtree(e).ok_or_else(|| Error::Tree(format!("{e:?} is not an internal edge")))?.clone();
        fn go(t: &Tree, e: &TreeEdge) -> Tree {
            match t {
                Tree::Leaf(x) => Tree::Leaf(*x),
                Tree::Node(cs) => Tree::node(
                    cs.iter()
                        .map(|c| if !c.is_leaf() && &c.leaves() == e { Tree::Leaf(c.min_leaf()) } else { go(c, e) })
                        .collect(),
                ),
            }
        }
        Ok((tr, go(self, e)))
    }

    /// Nested-list JSON with leaves rendered by `name`.
    pub fn to_json(&self, name: &dyn Fn(u32) -> String) -> Value {
        match self {
            Tree::Leaf(x) => Value::String(name(*x)),
            Tree::Node(cs) => Value::Array(cs.iter().map(|c| c.to_json(name)).collect()),
        }
    }

    pub fn from_json(v: &Value, id_of: &dyn Fn(&str) -> Option<u32>) -> Result<Tree> {
        match v {
            Value::String(s) => id_of(s).map(Tree::Leaf).ok_or_else(|| Error::Tree(format!("unknown leaf {s}"))),
            Value::Array(xs) if xs.len() >= 2 => {
                Ok(Tree::node(xs.iter().map(|x| Tree::from_json(x, id_of)).collect::<Result<_>>()?))
            }
            _ => Err(Error::Tree(format!("malformed tree {v}"))),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Tree::Leaf(x) => format!("v{x}"),
            Tree::Node(cs) => format!("({})", cs.iter().map(Tree::render).collect::<Vec<_>>().join(" ")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeMode {
    Binary,
    General,
}

/// Trees of a graph generated top-down: the root splits the vertices into connected
/// blocks with an acyclic quotient (two blocks in binary mode, any number ≥ 2
/// otherwise), and each block is treated recursively. Sorted.
pub fn enumerate_trees(g: &Dag, mode: TreeMode) -> Vec<Tree> {
    let mut memo = HashMap::new();
    let mut out = top_down(g, mode, &mut memo);
    out.sort();
    out
}

fn top_down(g: &Dag, mode: TreeMode, memo: &mut HashMap<Dag, Vec<Tree>>) -> Vec<Tree> {
    if g.len() == 1 {
        return vec![Tree::Leaf(g.ids[0])];
    }
    if let Some(t) = memo.get(g) {
        return t.clone();
    }
    let ks: Vec<usize> = match mode {
        TreeMode::Binary => vec![2],
        TreeMode::General => (2..=g.len()).collect(),
    };
    let mut out = Vec::new();
    for k in ks {
        for blocks in g.splittings(k) {
            let sub: Vec<Vec<Tree>> = blocks.iter().map(|&b| top_down(&g.induced(b), mode, memo)).collect();
            for combo in cartesian(&sub) {
                out.push(Tree::node(combo));
            }
        }
    }
    out.sort();
    out.dedup();
    memo.insert(g.clone(), out.clone());
    out
}

fn cartesian(lists: &[Vec<Tree>]) -> Vec<Vec<Tree>> {
    let mut acc: Vec<Vec<Tree>> = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::with_capacity(acc.len() * l.len());
        for p in &acc {
            for t in l {
                let mut q = p.clone();
                q.push(t.clone());
                next.push(q);
            }
        }
        acc = next;
    }
    acc
}

/// Whether `t` is a member of `T_G` (binary) or `T̂_G` (general).
pub fn is_valid_tree(g: &Dag, t: &Tree, mode: TreeMode) -> bool {
    let ids: BTreeSet<u32> = g.ids.iter().copied().collect();
    if t.leaves() != ids {
        return false;
    }
    match t {
        Tree::Leaf(_) => g.len() == 1,
        Tree::Node(cs) => {
            if mode == TreeMode::Binary && cs.len() != 2 {
                return false;
            }
            let blocks: Vec<Mask> = cs.iter().map(|c| g.mask_of_ids(&c.leaves().into_iter().collect::<Vec<_>>())).collect();
            if !blocks.iter().all(|&b| g.is_connected_subset(b)) || !g.quotient(&blocks).is_acyclic() {
                return false;
            }
            cs.iter().zip(&blocks).all(|(c, &b)| is_valid_tree(&g.induced(b), c, mode))
        }
    }
}

/// One contraction step: the ids of the vertices merged (two in binary sequences).
/// The merged vertex takes the smallest id.
pub type Step = Vec<u32>;

/// All maximal contraction sequences. In binary mode each step contracts one
/// admissible thick edge; in general mode each step contracts an admissible connected
/// subgraph with at least two vertices.
pub fn enumerate_sequences(g: &Dag, mode: TreeMode) -> Vec<Vec<Step>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    seq_rec(g, mode, &mut cur, &mut out);
    out
}

fn seq_rec(g: &Dag, mode: TreeMode, cur: &mut Vec<Step>, out: &mut Vec<Vec<Step>>) {
    if g.len() == 1 {
        out.push(cur.clone());
        return;
    }
    let choices: Vec<Mask> = match mode {
        TreeMode::Binary => g.admissible_thick_edges().into_iter().map(|(a, b)| (1 << a) | (1 << b)).collect(),
        TreeMode::General => g.admissible_subsets().into_iter().filter(|m| m.count_ones() >= 2).collect(),
    };
    for m in choices {
        let ids: Vec<u32> = members(m).iter().map(|&v| g.ids[v]).collect();
        let q = g.quotient(&g.blocks_for(m));
        cur.push(ids);
        seq_rec(&q, mode, cur, out);
        cur.pop();
    }
}

/// The tree of a sequence: each step creates an internal node over the current trees
/// of the merged vertices; forgetting levels identifies equivalent sequences.
pub fn sequence_to_tree(g: &Dag, seq: &[Step]) -> Result<Tree> {
    let mut current: HashMap<u32, Tree> = g.ids.iter().map(|&i| (i, Tree::Leaf(i))).collect();
    for step in seq {
        if step.len() < 2 {
            return Err(Error::Tree("a step must merge at least two vertices".into()));
        }
        let mut cs = Vec::new();
        for id in step {
            cs.push(current.remove(id).ok_or_else(|| Error::Tree(format!("v{id} is not a current vertex")))?);
        }
        current.insert(*step.iter().min().unwrap(), Tree::node(cs));
    }
    if current.len() != 1 {
        return Err(Error::Tree("sequence does not reduce the graph to one vertex".into()));
    }
    Ok(current.into_values().next().unwrap())
}

/// Trees obtained by quotienting sequences, deduplicated and sorted.
pub fn trees_from_sequences(g: &Dag, mode: TreeMode) -> Vec<Tree> {
    let set: BTreeSet<Tree> =
        enumerate_sequences(g, mode).iter().map(|s| sequence_to_tree(g, s).expect("generated sequence")).collect();
    set.into_iter().collect()
}

/// The unique other binary tree sharing the contraction of `e`: contracting the
/// internal edge gives a ternary node with children `c1, c2` (from below) and `c3`;
/// of the two other binary resolutions exactly one lies in `T_G`.
pub fn partner(g: &Dag, t: &Tree, e: &TreeEdge) -> Result<(Tree, TreeEdge)> {
    if !t.is_binary() || !is_valid_tree(g, t, TreeMode::Binary) {
        return Err(Error::Tree(format!("{} is not in T_G", t.render())));
    }
    let lower = t.subtree(e).ok_or_else(|| Error::Tree(format!("{e:?} is not an internal edge")))?;
    let (c1, c2) = (&lower.children()[0], &lower.children()[1]);
    let c3 = sibling_of(t, e).ok_or_else(|| Error::Tree("internal edge has no parent node".into()))?;
    let contracted = t.contract_edge(e)?;
    let mut found = Vec::new();
    for (single, other) in [(c1, c2), (c2, c1)] {
        let pair = Tree::node(vec![other.clone(), c3.clone()]);
        let cand = replace_ternary(&contracted, &[c1, c2, &c3], &pair, single);
        if is_valid_tree(g, &cand, TreeMode::Binary) {
            found.push((cand, pair.leaves()));
        }
    }
    match found.len() {
        1 => Ok(found.pop().unwrap()),
        n => Err(Error::Tree(format!("expected exactly one partner, found {n}"))),
    }
}

/// The other child of the node directly above the internal edge `e` (binary trees).
fn sibling_of(t: &Tree, e: &TreeEdge) -> Option<Tree> {
    match t {
        Tree::Leaf(_) => None,
        Tree::Node(cs) => {
            if let Some(i) = cs.iter().position(|c| !c.is_leaf() && &c.leaves() == e) {
                return cs.iter().enumerate().find(|(j, _)| *j != i).map(|(_, c)| c.clone());
            }
            cs.iter().find_map(|c| sibling_of(c, e))
        }
    }
}

/// Replaces the node whose children are exactly `three` by `Node[pair, single]`.
fn replace_ternary(t: &Tree, three: &[&Tree], pair: &Tree, single: &Tree) -> Tree {
    match t {
        Tree::Leaf(x) => Tree::Leaf(*x),
        Tree::Node(cs) => {
            if cs.len() == 3 && three.iter().all(|x| cs.contains(x)) {
                Tree::node(vec![pair.clone(), single.clone()])
            } else {
                Tree::node(cs.iter().map(|c| replace_ternary(c, three, pair, single)).collect())
            }
        }
    }
}

/// All `(tree, internal edge)` pairs of `T_G`.
pub fn tree_edge_pairs(trees: &[Tree]) -> Vec<(Tree, TreeEdge)> {
    trees.iter().flat_map(|t| t.internal_edges().into_iter().map(move |e| (t.clone(), e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vee() -> Dag {
        Dag::new(vec![1, 2, 3], &[(1, 0), (2, 0)])
    }

    fn diamond() -> Dag {
        Dag::new(vec![1, 2, 3, 4], &[(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)])
    }

    #[test]
    fn vee_counts() {
        assert_eq!(enumerate_trees(&vee(), TreeMode::Binary).len(), 2);
        assert_eq!(enumerate_trees(&vee(), TreeMode::General).len(), 3);
        assert_eq!(enumerate_sequences(&vee(), TreeMode::Binary).len(), 2);
    }

    #[test]
    fn two_vertex_graph_has_one_tree() {
        let g = Dag::new(vec![0, 1], &[(0, 1)]);
        assert_eq!(enumerate_trees(&g, TreeMode::Binary), vec![Tree::node(vec![Tree::Leaf(0), Tree::Leaf(1)])]);
        assert_eq!(enumerate_sequences(&g, TreeMode::Binary).len(), 1);
    }

    #[test]
    fn generators_agree_on_diamond() {
        for mode in [TreeMode::Binary, TreeMode::General] {
            assert_eq!(enumerate_trees(&diamond(), mode), trees_from_sequences(&diamond(), mode));
        }
    }

    #[test]
    fn partner_on_vee() {
        let g = vee();
        let ts = enumerate_trees(&g, TreeMode::Binary);
        let e = ts[0].internal_edges()[0].clone();
        let (p, pe) = partner(&g, &ts[0], &e).unwrap();
        assert_eq!(p, ts[1]);
        assert_eq!(partner(&g, &p, &pe).unwrap(), (ts[0].clone(), e));
    }

    #[test]
    fn split_at_edge_pieces() {
        let t = Tree::node(vec![Tree::node(vec![Tree::Leaf(3), Tree::Leaf(2)]), Tree::Leaf(1)]);
        let e: TreeEdge = [2, 3].into_iter().collect();
        let (tr, tl) = t.split_at_edge(&e).unwrap();
        assert_eq!(tr.leaves(), e);
        assert_eq!(tl, Tree::node(vec![Tree::Leaf(1), Tree::Leaf(2)]));
        assert!(t.split_at_edge(&[1, 2].into_iter().collect()).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let t = Tree::node(vec![Tree::node(vec![Tree::Leaf(1), Tree::Leaf(2)]), Tree::Leaf(3)]);
        let j = t.to_json(&|x| format!("v{x}"));
        assert_eq!(j.to_string(), r#"[["v1","v2"],"v3"]"#);
        let back = Tree::from_json(&j, &|s| s.strip_prefix('v')?.parse().ok()).unwrap();
        assert_eq!(back, t);
    }
}
