//! The thick-edge digraph of a graph: vertices carry stable ids, edges are the
//! (deduplicated) directed thick edges. Vertex subsets are bit masks.

use std::collections::BTreeSet;

pub type Mask = u32;

pub fn mask_of(vs: impl IntoIterator<Item = usize>) -> Mask {
    vs.into_iter().fold(0, |m, v| m | (1 << v))
}

pub fn members(mask: Mask) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dag {
    pub ids: Vec<u32>,
    /// `succ[v]` has bit `w` set when there is a thick edge `v → w`.
    pub succ: Vec<Mask>,
}

impl Dag {
    pub fn new(ids: Vec<u32>, edges: &[(usize, usize)]) -> Self {
        let mut succ = vec![0; ids.len()];
        for &(a, b) in edges {
            if a != b {
                succ[a] |= 1 << b;
            }
        }
        Self { ids, succ }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn all(&self) -> Mask {
        if self.len() == 32 {
            Mask::MAX
        } else {
            (1 << self.len()) - 1
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, &s) in self.succ.iter().enumerate() {
            for b in members(s) {
                out.push((a, b));
            }
        }
        out
    }

    fn pred(&self, v: usize) -> Mask {
        mask_of((0..self.len()).filter(|&u| self.succ[u] & (1 << v) != 0))
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// A directed cycle as a list of vertex positions, if one exists.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        fn visit(g: &Dag, v: usize, state: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
            state[v] = 1;
            stack.push(v);
            for w in members(g.succ[v]) {
                if state[w] == 1 {
                    let pos = stack.iter().position(|&x| x == w).unwrap();
                    return Some(stack[pos..].to_vec());
                }
                if state[w] == 0 {
                    if let Some(c) = visit(g, w, state, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            state[v] = 2;
            None
        }
        let mut state = vec![0u8; self.len()];
        for v in 0..self.len() {
            if state[v] == 0 {
                if let Some(c) = visit(self, v, &mut state, &mut Vec::new()) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Whether the subgraph induced on `mask` is connected (ignoring direction).
    pub fn is_connected_subset(&self, mask: Mask) -> bool {
        if mask == 0 {
            return false;
        }
        let start = mask.trailing_zeros() as usize;
        let mut seen: Mask = 1 << start;
        let mut frontier = vec![start];
        while let Some(v) = frontier.pop() {
            let nb = (self.succ[v] | self.pred(v)) & mask & !seen;
            for w in members(nb) {
                seen |= 1 << w;
                frontier.push(w);
            }
        }
        seen == mask
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.is_connected_subset(self.all())
    }

    /// Quotient by disjoint blocks covering all vertices: vertex `i` of the result is
    /// block `i`, with id the minimum id in the block.
    pub fn quotient(&self, blocks: &[Mask]) -> Dag {
        let mut block_of = vec![usize::MAX; self.len()];
        for (b, &m) in blocks.iter().enumerate() {
            for v in members(m) {
                block_of[v] = b;
            }
        }
        let ids = blocks.iter().map(|&m| members(m).iter().map(|&v| self.ids[v]).min().unwrap()).collect();
        let mut edges = Vec::new();
        for (a, b) in self.edges() {
            if block_of[a] != block_of[b] {
                edges.push((block_of[a], block_of[b]));
            }
        }
        Dag::new(ids, &edges)
    }

    /// The subgraph induced on `mask`, vertices in increasing position.
    pub fn induced(&self, mask: Mask) -> Dag {
        let vs = members(mask);
        let pos: Vec<Option<usize>> = (0..self.len()).map(|v| vs.iter().position(|&x| x == v)).collect();
        let mut edges = Vec::new();
        for (a, b) in self.edges() {
            if let (Some(x), Some(y)) = (pos[a], pos[b]) {
                edges.push((x, y));
            }
        }
        Dag::new(vs.iter().map(|&v| self.ids[v]).collect(), &edges)
    }

    pub fn position_of(&self, id: u32) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    pub fn mask_of_ids(&self, ids: &[u32]) -> Mask {
        mask_of(ids.iter().filter_map(|&i| self.position_of(i)))
    }

    /// Blocks for contracting one subset: the subset first, then the remaining
    /// vertices in order.
    pub fn blocks_for(&self, mask: Mask) -> Vec<Mask> {
        let mut blocks = vec![mask];
        for v in 0..self.len() {
            if mask & (1 << v) == 0 {
                blocks.push(1 << v);
            }
        }
        blocks
    }

    /// `G/H` acyclic (the subset is not required to be connected here).
    pub fn contraction_acyclic(&self, mask: Mask) -> bool {
        // a cycle appears iff some path leaves the subset and re-enters it
        let out_of = |m: Mask| -> Mask { members(m).iter().fold(0, |acc, &v| acc | self.succ[v]) };
        let mut reach = out_of(mask) & !mask;
        let mut frontier = reach;
        while frontier != 0 {
            let next = out_of(frontier) & !reach;
            if next & mask != 0 {
                return false;
            }
            reach |= next;
            frontier = next & !mask;
        }
        true
    }

    /// All admissible subgraphs: connected vertex subsets whose contraction leaves the
    /// graph acyclic, in increasing mask order (corollas and the whole graph included).
    pub fn admissible_subsets(&self) -> Vec<Mask> {
        (1..=self.all())
            .filter(|&m| self.is_connected_subset(m) && self.contraction_acyclic(m))
            .collect()
    }

    /// Pairs `(a, b)` with a thick edge `a → b` whose contraction keeps the graph acyclic.
    pub fn admissible_thick_edges(&self) -> Vec<(usize, usize)> {
        self.edges()
            .into_iter()
            .filter(|&(a, b)| self.contraction_acyclic((1 << a) | (1 << b)))
            .collect()
    }

    /// Unordered partitions of the vertex set into `k` connected blocks whose quotient is
    /// acyclic. Blocks are listed in a topological order of the quotient (targets of
    /// edges first), ties broken by lowest vertex.
    pub fn splittings(&self, k: usize) -> Vec<Vec<Mask>> {
        let n = self.len();
        let mut out = Vec::new();
        if k == 0 || k > n {
            return out;
        }
        // assign vertices to blocks in restricted-growth order
        fn rec(g: &Dag, v: usize, k: usize, assign: &mut Vec<usize>, used: usize, out: &mut Vec<Vec<Mask>>) {
            let n = g.len();
            if n - v < k - used {
                return;
            }
            if v == n {
                let mut blocks = vec![0 as Mask; k];
                for (u, &b) in assign.iter().enumerate() {
                    blocks[b] |= 1 << u;
                }
                if blocks.iter().all(|&m| g.is_connected_subset(m)) {
                    let q = g.quotient(&blocks);
                    if q.is_acyclic() {
                        out.push(topo_sorted(&q, blocks));
                    }
                }
                return;
            }
            for b in 0..=used.min(k - 1) {
                assign.push(b);
                rec(g, v + 1, k, assign, used.max(b + 1), out);
                assign.pop();
            }
        }
        rec(self, 0, k, &mut Vec::new(), 0, &mut out);
        out.sort();
        out
    }
}

/// Orders quotient blocks so that every edge goes from a later block to an earlier one
/// (the block receiving edges comes first); ties by lowest member.
fn topo_sorted(q: &Dag, blocks: Vec<Mask>) -> Vec<Mask> {
    let k = blocks.len();
    let mut placed = vec![false; k];
    let mut order = Vec::with_capacity(k);
    while order.len() < k {
        // next block: all of its edge targets are already placed
        let next = (0..k)
            .filter(|&b| !placed[b])
            .filter(|&b| (0..k).all(|a| placed[a] || a == b || q.succ[b] & (1 << a) == 0))
            .min_by_key(|&b| blocks[b].trailing_zeros())
            .expect("quotient is acyclic");
        placed[next] = true;
        order.push(next);
    }
    order.into_iter().map(|b| blocks[b]).collect()
}

/// Canonical-independent listing of all subsets of `mask`.
pub fn subsets(mask: Mask) -> impl Iterator<Item = Mask> {
    let mut cur: Option<Mask> = Some(mask);
    std::iter::from_fn(move || {
        let c = cur?;
        cur = if c == 0 { None } else { Some((c - 1) & mask) };
        Some(c)
    })
}

pub fn edge_set(g: &Dag) -> BTreeSet<(u32, u32)> {
    g.edges().into_iter().map(|(a, b)| (g.ids[a], g.ids[b])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    // v2 → v1 ← v3 with positions 0,1,2 = v1,v2,v3
    fn vee() -> Dag {
        Dag::new(vec![1, 2, 3], &[(1, 0), (2, 0)])
    }

    // v1→v2, v1→v3, v2→v4, v3→v4, v1→v4
    fn diamond() -> Dag {
        Dag::new(vec![1, 2, 3, 4], &[(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)])
    }

    #[test]
    fn admissible_subsets_of_vee() {
        let subs = vee().admissible_subsets();
        // seven non-empty subsets, only {v2, v3} is disconnected
        assert_eq!(subs.len(), 6);
        assert!(!subs.contains(&0b110));
    }

    #[test]
    fn diamond_admissibility() {
        let g = diamond();
        assert!(g.contraction_acyclic(0b1100)); // v3,v4
        assert!(!g.contraction_acyclic(0b1001)); // v1,v4
        let subs = g.admissible_subsets();
        assert!(!subs.contains(&0b1001));
        assert!(!subs.contains(&0b1011));
        assert!(!subs.contains(&0b1101));
    }

    #[test]
    fn splittings_of_vee() {
        let s = vee().splittings(2);
        assert_eq!(s, vec![vec![0b011, 0b100], vec![0b101, 0b010]]);
        assert_eq!(vee().splittings(1).len(), 1);
        assert_eq!(vee().splittings(3).len(), 1);
    }

    #[test]
    fn cycle_detection() {
        let g = Dag::new(vec![0, 1, 2], &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(g.find_cycle().map(|c| c.len()), Some(3));
        assert!(diamond().is_acyclic());
    }

    #[test]
    fn subsets_enumerates_all() {
        assert_eq!(subsets(0b101).count(), 4);
    }
}
