//! Flag-level graphs: a set of flags, an involution whose 2-cycles are edges and
//! fixed points legs, and a partition of the flags into vertices.
//!
//! [`RawGraph`] carries only that data; [`Graph`] adds directions, leg labels and
//! stable vertex ids, and is validated as a directed, connected, labelled graph
//! without directed cycles. Algebraic code works with the vertex-level [`Shape`]
//! obtained from [`Graph::to_shape`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::digraph::{members, Dag};
use crate::error::{Error, GraphViolation, Result};
use crate::shape::{End, Shape};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawGraph {
    pub flags: Vec<String>,
    /// Involution on flag indices.
    pub sigma: Vec<usize>,
    /// Vertices as lists of flag indices.
    pub blocks: Vec<Vec<usize>>,
    pub names: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    Out,
    In,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub raw: RawGraph,
    pub dir: Vec<Dir>,
    /// Output leg flag → label in `1..=m`.
    pub out_labels: BTreeMap<usize, u32>,
    pub in_labels: BTreeMap<usize, u32>,
    /// Stable vertex ids, kept through contractions (merged vertex: smallest id).
    pub ids: Vec<u32>,
    /// The graph consisting of a single directed edge and no vertex.
    pub trivial: bool,
}

/// A vertex subset of a graph with its computed properties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgraph {
    pub vertices: Vec<usize>,
    pub connected: bool,
    pub admissible: bool,
}

#[derive(Clone, Debug)]
pub struct Splitting {
    /// Vertex blocks; for two blocks the first receives the edges between them.
    pub blocks: Vec<Vec<usize>>,
    pub quotient: Graph,
}

impl RawGraph {
    /// Builds a raw graph from named flags, involution pairs and vertex blocks,
    /// reporting every violated invariant.
    pub fn new(flags: Vec<String>, involution: &[(String, String)], blocks: &[Vec<String>], names: Option<Vec<String>>) -> Result<RawGraph> {
        let mut errs = Vec::new();
        let index: HashMap<&str, usize> = flags.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();
        if index.len() != flags.len() {
            errs.push(GraphViolation::PartitionOverlap("duplicate flag name".into()));
        }
        let mut sigma: Vec<usize> = (0..flags.len()).collect();
        let mut paired = vec![false; flags.len()];
        for (a, b) in involution {
            match (index.get(a.as_str()), index.get(b.as_str())) {
                (Some(&x), Some(&y)) if x != y && !paired[x] && !paired[y] => {
                    sigma[x] = y;
                    sigma[y] = x;
                    paired[x] = true;
                    paired[y] = true;
                }
                (Some(_), Some(_)) => errs.push(GraphViolation::InvolutionNotInvolutive(format!("({a} {b})"))),
                _ => errs.push(GraphViolation::InvolutionNotInvolutive(format!("({a} {b}) names an unknown flag"))),
            }
        }
        let mut owner = vec![None; flags.len()];
        let mut bl = Vec::new();
        for (v, block) in blocks.iter().enumerate() {
            let mut b = Vec::new();
            if block.is_empty() {
                errs.push(GraphViolation::PartitionIncomplete(format!("block {} is empty", v + 1)));
            }
            for f in block {
                match index.get(f.as_str()) {
                    Some(&x) => {
                        if owner[x].is_some() {
                            errs.push(GraphViolation::PartitionOverlap(f.clone()));
                        }
                        owner[x] = Some(v);
                        b.push(x);
                    }
                    None => errs.push(GraphViolation::PartitionIncomplete(format!("unknown flag {f}"))),
                }
            }
            bl.push(b);
        }
        let missing: Vec<&str> = flags.iter().enumerate().filter(|(i, _)| owner[*i].is_none()).map(|(_, f)| f.as_str()).collect();
        if !missing.is_empty() {
            errs.push(GraphViolation::PartitionIncomplete(format!("flags without a vertex: {}", missing.join(","))));
        }
        if !errs.is_empty() {
            return Err(Error::InvalidGraph(errs));
        }
        let names = names.unwrap_or_else(|| (1..=blocks.len()).map(|i| format!("v{i}")).collect());
        Ok(RawGraph { flags, sigma, blocks: bl, names })
    }

    pub fn vertex_of(&self, flag: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&flag)).expect("flag belongs to a block")
    }

    pub fn flag_index(&self, name: &str) -> Option<usize> {
        self.flags.iter().position(|f| f == name)
    }

    pub fn is_leg(&self, flag: usize) -> bool {
        self.sigma[flag] == flag
    }

    /// Edges as flag pairs `(i, σi)` with `i < σi`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.flags.len()).filter(|&i| self.sigma[i] > i).map(|i| (i, self.sigma[i])).collect()
    }

    /// Contraction of the single edge `(i j)`: both flags are removed and the two
    /// incident vertices are replaced by the union of their remaining flags.
    pub fn contract_single_edge(&self, i: &str, j: &str) -> Result<RawGraph> {
        let (Some(a), Some(b)) = (self.flag_index(i), self.flag_index(j)) else {
            return Err(Error::NotAnEdge(format!("({i} {j})")));
        };
        if a == b || self.sigma[a] != b {
            return Err(Error::NotAnEdge(format!("({i} {j})")));
        }
        let (va, vb) = (self.vertex_of(a), self.vertex_of(b));
        let merged: Vec<usize> = self.blocks[va]
            .iter()
            .chain(if va == vb { &[][..] } else { &self.blocks[vb][..] })
            .copied()
            .filter(|&f| f != a && f != b)
            .collect();
        let keep: Vec<usize> = (0..self.flags.len()).filter(|&f| f != a && f != b).collect();
        let new_index: HashMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let flags = keep.iter().map(|&f| self.flags[f].clone()).collect();
        let sigma = keep.iter().map(|&f| new_index[&self.sigma[f]]).collect();
        let lo = va.min(vb);
        let mut blocks = Vec::new();
        let mut names = Vec::new();
        for v in 0..self.blocks.len() {
            if v == lo {
                blocks.push(merged.iter().map(|f| new_index[f]).collect());
                names.push(if va == vb { self.names[va].clone() } else { format!("{}+{}", self.names[va.min(vb)], self.names[va.max(vb)]) });
            } else if v != va && v != vb {
                blocks.push(self.blocks[v].iter().map(|f| new_index[f]).collect());
                names.push(self.names[v].clone());
            }
        }
        Ok(RawGraph { flags, sigma, blocks, names })
    }

    /// Whether the graph is connected via chains of edges.
    pub fn is_connected(&self) -> bool {
        let k = self.blocks.len();
        if k <= 1 {
            return true;
        }
        let owner: Vec<usize> = (0..self.flags.len()).map(|f| self.vertex_of(f)).collect();
        let mut seen = vec![false; k];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &f in &self.blocks[v] {
                let w = owner[self.sigma[f]];
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|x| x)
    }
}

impl Graph {
    /// Validates directions and labels; `dir_out` lists flags oriented as outputs
    /// (all other flags are inputs). Labels are 1-based.
    pub fn validate(raw: RawGraph, out_flags: &BTreeSet<usize>, out_labels: BTreeMap<usize, u32>, in_labels: BTreeMap<usize, u32>) -> Result<Graph> {
        let dir: Vec<Dir> = (0..raw.flags.len()).map(|f| if out_flags.contains(&f) { Dir::Out } else { Dir::In }).collect();
        let ids = (0..raw.blocks.len() as u32).collect();
        let g = Graph { raw, dir, out_labels, in_labels, ids, trivial: false };
        let errs = g.violations();
        if errs.is_empty() {
            Ok(g)
        } else {
            Err(Error::InvalidGraph(errs))
        }
    }

    /// All violated invariants of a directed labelled graph.
    pub fn violations(&self) -> Vec<GraphViolation> {
        let raw = &self.raw;
        let mut errs = Vec::new();
        if self.trivial {
            return errs;
        }
        for (a, b) in raw.edges() {
            if self.dir[a] == self.dir[b] {
                errs.push(GraphViolation::DirectionInconsistentOnEdge(raw.flags[a].clone(), raw.flags[b].clone()));
            }
        }
        if !raw.is_connected() {
            errs.push(GraphViolation::Disconnected);
        }
        if errs.iter().all(|e| matches!(e, GraphViolation::Disconnected)) {
            // loops are cycles of length one
            for (a, b) in raw.edges() {
                if raw.vertex_of(a) == raw.vertex_of(b) {
                    errs.push(GraphViolation::DirectedCycle(vec![raw.names[raw.vertex_of(a)].clone()]));
                }
            }
            if let Some(c) = self.dag().find_cycle() {
                errs.push(GraphViolation::DirectedCycle(c.iter().map(|&v| raw.names[v].clone()).collect()));
            }
        }
        for (labels, d, what) in [(&self.out_labels, Dir::Out, "output"), (&self.in_labels, Dir::In, "input")] {
            let legs: BTreeSet<usize> = (0..raw.flags.len()).filter(|&f| raw.is_leg(f) && self.dir[f] == d).collect();
            let keys: BTreeSet<usize> = labels.keys().copied().collect();
            let values: BTreeSet<u32> = labels.values().copied().collect();
            if keys != legs {
                errs.push(GraphViolation::BadLabeling(format!("{what} labels do not cover exactly the {what} legs")));
            } else if values.len() != legs.len() || values.iter().copied().ne(1..=legs.len() as u32) {
                errs.push(GraphViolation::BadLabeling(format!("{what} labels are not a bijection onto 1..{}", legs.len())));
            }
        }
        errs
    }

    pub fn trivial_graph() -> Graph {
        let raw = RawGraph { flags: vec!["o".into(), "i".into()], sigma: vec![0, 1], blocks: vec![], names: vec![] };
        Graph {
            raw,
            dir: vec![Dir::Out, Dir::In],
            out_labels: [(0, 1)].into_iter().collect(),
            in_labels: [(1, 1)].into_iter().collect(),
            ids: vec![],
            trivial: true,
        }
    }

    pub fn corolla(m: usize, n: usize) -> Graph {
        let flags: Vec<String> = (1..=m).map(|i| format!("o{i}")).chain((1..=n).map(|i| format!("i{i}"))).collect();
        let raw = RawGraph::new(flags.clone(), &[], &[flags], None).expect("corolla is well formed");
        let out: BTreeSet<usize> = (0..m).collect();
        let ol = (0..m).map(|i| (i, i as u32 + 1)).collect();
        let il = (0..n).map(|i| (m + i, i as u32 + 1)).collect();
        Graph::validate(raw, &out, ol, il).expect("corolla is valid")
    }

    pub fn m(&self) -> usize {
        self.out_labels.len()
    }

    pub fn n(&self) -> usize {
        self.in_labels.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.raw.blocks.len()
    }

    /// Thick-edge digraph on vertex positions, ids attached.
    pub fn dag(&self) -> Dag {
        let mut edges = Vec::new();
        for (a, b) in self.raw.edges() {
            let (o, i) = if self.dir[a] == Dir::Out { (a, b) } else { (b, a) };
            edges.push((self.raw.vertex_of(o), self.raw.vertex_of(i)));
        }
        Dag::new(self.ids.clone(), &edges)
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.raw.names.iter().position(|n| n == name)
    }

    /// Edges from vertex `a` to vertex `b`, as (out flag, in flag).
    pub fn thick_edge(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        self.raw
            .edges()
            .into_iter()
            .map(|(x, y)| if self.dir[x] == Dir::Out { (x, y) } else { (y, x) })
            .filter(|&(o, i)| self.raw.vertex_of(o) == a && self.raw.vertex_of(i) == b)
            .collect()
    }

    /// Merges each vertex set into one vertex, removing every edge with both ends in
    /// the same set. Merged vertices sit at the position of their first member.
    pub fn contract_sets(&self, sets: &[Vec<usize>]) -> Graph {
        let raw = &self.raw;
        let k = raw.blocks.len();
        let mut group: Vec<usize> = (0..k).collect();
        for s in sets {
            let lead = *s.iter().min().unwrap();
            for &v in s {
                group[v] = lead;
            }
        }
        let owner: Vec<usize> = (0..raw.flags.len()).map(|f| raw.vertex_of(f)).collect();
        let removed: Vec<bool> =
            (0..raw.flags.len()).map(|f| !raw.is_leg(f) && group[owner[f]] == group[owner[raw.sigma[f]]]).collect();
        let keep: Vec<usize> = (0..raw.flags.len()).filter(|&f| !removed[f]).collect();
        let new_index: HashMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let mut blocks = Vec::new();
        let mut names = Vec::new();
        let mut ids = Vec::new();
        for v in 0..k {
            if group[v] != v {
                continue;
            }
            let mem: Vec<usize> = (0..k).filter(|&w| group[w] == v).collect();
            blocks.push(mem.iter().flat_map(|&w| raw.blocks[w].iter()).filter(|f| !removed[**f]).map(|f| new_index[f]).collect());
            names.push(mem.iter().map(|&w| raw.names[w].as_str()).collect::<Vec<_>>().join("+"));
            ids.push(mem.iter().map(|&w| self.ids[w]).min().unwrap());
        }
        let new_raw = RawGraph {
            flags: keep.iter().map(|&f| raw.flags[f].clone()).collect(),
            sigma: keep.iter().map(|&f| new_index[&raw.sigma[f]]).collect(),
            blocks,
            names,
        };
        Graph {
            raw: new_raw,
            dir: keep.iter().map(|&f| self.dir[f]).collect(),
            out_labels: self.out_labels.iter().map(|(f, l)| (new_index[f], *l)).collect(),
            in_labels: self.in_labels.iter().map(|(f, l)| (new_index[f], *l)).collect(),
            ids,
            trivial: false,
        }
    }

    /// Contracts the thick edge from vertex `a` to vertex `b`: all edges between the
    /// two vertices are removed at once. The result may contain directed cycles.
    pub fn contract_thick_edge(&self, a: usize, b: usize) -> Result<Graph> {
        if a >= self.vertex_count() || b >= self.vertex_count() || self.thick_edge(a, b).is_empty() {
            return Err(Error::NotAThickEdge(format!("{} → {}", self.name(a), self.name(b))));
        }
        Ok(self.contract_sets(&[vec![a, b]]))
    }

    fn name(&self, v: usize) -> String {
        self.raw.names.get(v).cloned().unwrap_or_else(|| format!("#{v}"))
    }

    pub fn is_admissible(&self, a: usize, b: usize) -> Result<bool> {
        Ok(self.contract_thick_edge(a, b)?.dag().is_acyclic())
    }

    pub fn enumerate_admissible_subgraphs(&self) -> Vec<Subgraph> {
        self.dag()
            .admissible_subsets()
            .into_iter()
            .map(|m| Subgraph { vertices: members(m), connected: true, admissible: true })
            .collect()
    }

    /// Properties of an arbitrary vertex subset.
    pub fn subgraph(&self, vertices: &[usize]) -> Subgraph {
        let dag = self.dag();
        let m = crate::digraph::mask_of(vertices.iter().copied());
        let connected = dag.is_connected_subset(m);
        Subgraph { vertices: vertices.to_vec(), connected, admissible: connected && dag.contraction_acyclic(m) }
    }

    pub fn enumerate_splittings(&self, k: usize) -> Vec<Splitting> {
        self.dag()
            .splittings(k)
            .into_iter()
            .map(|bl| {
                let blocks: Vec<Vec<usize>> = bl.iter().map(|&m| members(m)).collect();
                let quotient = self.contract_sets(&blocks);
                Splitting { blocks, quotient }
            })
            .collect()
    }

    /// The subgraph induced on a vertex set: edges leaving the set become legs, which
    /// are labelled after the original legs (in flag order).
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let raw = &self.raw;
        let inside: BTreeSet<usize> = vertices.iter().copied().collect();
        let keep: Vec<usize> = (0..raw.flags.len()).filter(|&f| inside.contains(&raw.vertex_of(f))).collect();
        let new_index: HashMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let sigma: Vec<usize> =
            keep.iter().map(|&f| new_index.get(&raw.sigma[f]).copied().unwrap_or(new_index[&f])).collect();
        let mut out_labels = BTreeMap::new();
        let mut in_labels = BTreeMap::new();
        let mut legs: Vec<(usize, Option<u32>)> = Vec::new();
        for &f in &keep {
            if sigma[new_index[&f]] == new_index[&f] {
                let lab = if raw.is_leg(f) {
                    if self.dir[f] == Dir::Out { self.out_labels.get(&f) } else { self.in_labels.get(&f) }.copied()
                } else {
                    None
                };
                legs.push((f, lab));
            }
        }
        for d in [Dir::Out, Dir::In] {
            let mut ls: Vec<&(usize, Option<u32>)> = legs.iter().filter(|(f, _)| self.dir[*f] == d).collect();
            ls.sort_by_key(|(f, l)| (l.is_none(), *l, *f));
            let target = if d == Dir::Out { &mut out_labels } else { &mut in_labels };
            for (i, (f, _)) in ls.into_iter().enumerate() {
                target.insert(new_index[f], i as u32 + 1);
            }
        }
        let order: Vec<usize> = vertices.to_vec();
        Graph {
            raw: RawGraph {
                flags: keep.iter().map(|&f| raw.flags[f].clone()).collect(),
                sigma,
                blocks: order.iter().map(|&v| raw.blocks[v].iter().map(|f| new_index[f]).collect()).collect(),
                names: order.iter().map(|&v| raw.names[v].clone()).collect(),
            },
            dir: keep.iter().map(|&f| self.dir[f]).collect(),
            out_labels,
            in_labels,
            ids: order.iter().map(|&v| self.ids[v]).collect(),
            trivial: false,
        }
    }

    /// Grafts output legs of `g2` onto input legs of `g1`. Flag names must be
    /// disjoint. Leg labels of the result: the supplied relabelling (flag name →
    /// label) if given, otherwise the remaining legs of `g1` then those of `g2`, each
    /// in label order.
    pub fn graft(
        g1: &Graph,
        g2: &Graph,
        pairs: &[(String, String)],
        relabel: Option<(&BTreeMap<String, u32>, &BTreeMap<String, u32>)>,
    ) -> Result<Graph> {
        if g2.trivial || g1.trivial {
            // the trivial graph is a unit: the other graph with one leg renamed
            let g = if g2.trivial { g1 } else { g2 };
            if pairs.len() != 1 {
                return Err(Error::Graft("the trivial graph grafts along exactly one leg".into()));
            }
            let mut out = g.clone();
            if let Some((ol, il)) = relabel {
                out = apply_relabel(out, ol, il)?;
            }
            return Ok(out);
        }
        if pairs.is_empty() {
            return Err(Error::Graft("disconnected-result: no legs grafted".into()));
        }
        let names1: BTreeSet<&String> = g1.raw.flags.iter().collect();
        if g2.raw.flags.iter().any(|f| names1.contains(f)) {
            return Err(Error::Graft("flag names of the two graphs overlap".into()));
        }
        let off = g1.raw.flags.len();
        let mut flags = g1.raw.flags.clone();
        flags.extend(g2.raw.flags.iter().cloned());
        let mut sigma: Vec<usize> = g1.raw.sigma.clone();
        sigma.extend(g2.raw.sigma.iter().map(|&s| s + off));
        let mut used = BTreeSet::new();
        for (i, o) in pairs {
            let fi = g1.raw.flag_index(i).filter(|&f| g1.raw.is_leg(f) && g1.dir[f] == Dir::In);
            let fo = g2.raw.flag_index(o).filter(|&f| g2.raw.is_leg(f) && g2.dir[f] == Dir::Out);
            let (Some(fi), Some(fo)) = (fi, fo) else {
                return Err(Error::Graft(format!("leg-reuse or not a leg: ({i}, {o})")));
            };
            if !used.insert(fi) || !used.insert(fo + off) {
                return Err(Error::Graft(format!("leg-reuse: ({i}, {o})")));
            }
            sigma[fi] = fo + off;
            sigma[fo + off] = fi;
        }
        let mut blocks = g1.raw.blocks.clone();
        blocks.extend(g2.raw.blocks.iter().map(|b| b.iter().map(|&f| f + off).collect()));
        let mut names = g1.raw.names.clone();
        names.extend(g2.raw.names.iter().cloned());
        let mut dir = g1.dir.clone();
        dir.extend(g2.dir.iter().copied());
        let shift = g1.ids.iter().max().map_or(0, |&x| x + 1);
        let mut ids = g1.ids.clone();
        ids.extend(g2.ids.iter().map(|&x| x + shift));
        let raw = RawGraph { flags, sigma, blocks, names };
        let mut out_labels = BTreeMap::new();
        let mut in_labels = BTreeMap::new();
        let mut next_o = 1;
        let mut next_i = 1;
        for (g, o) in [(g1, 0), (g2, off)] {
            let mut ol: Vec<(u32, usize)> = g.out_labels.iter().map(|(f, l)| (*l, f + o)).collect();
            ol.sort();
            for (_, f) in ol {
                if raw.is_leg(f) {
                    out_labels.insert(f, next_o);
                    next_o += 1;
                }
            }
            let mut il: Vec<(u32, usize)> = g.in_labels.iter().map(|(f, l)| (*l, f + o)).collect();
            il.sort();
            for (_, f) in il {
                if raw.is_leg(f) {
                    in_labels.insert(f, next_i);
                    next_i += 1;
                }
            }
        }
        let g = Graph { raw, dir, out_labels, in_labels, ids, trivial: false };
        let g = match relabel {
            Some((ol, il)) => apply_relabel(g, ol, il)?,
            None => g,
        };
        let errs = g.violations();
        if errs.is_empty() {
            Ok(g)
        } else if errs.contains(&GraphViolation::Disconnected) {
            Err(Error::Graft("disconnected-result".into()))
        } else if errs.iter().any(|e| matches!(e, GraphViolation::DirectedCycle(_))) {
            Err(Error::Graft("cycle-created".into()))
        } else {
            Err(Error::InvalidGraph(errs))
        }
    }

    /// Vertex-level presentation: vertex order = block order, slots in the order the
    /// flags are listed in each block, legs labelled `label − 1`.
    pub fn to_shape(&self) -> Shape {
        let raw = &self.raw;
        let mut slot_of = vec![0u32; raw.flags.len()];
        for b in &raw.blocks {
            let (mut o, mut i) = (0, 0);
            for &f in b {
                if self.dir[f] == Dir::Out {
                    slot_of[f] = o;
                    o += 1;
                } else {
                    slot_of[f] = i;
                    i += 1;
                }
            }
        }
        let owner: Vec<usize> = (0..raw.flags.len()).map(|f| raw.vertex_of(f)).collect();
        let end = |f: usize| -> End {
            if raw.is_leg(f) {
                let l = if self.dir[f] == Dir::Out { self.out_labels[&f] } else { self.in_labels[&f] };
                End::Leg(l - 1)
            } else {
                let p = raw.sigma[f];
                End::Edge { vertex: owner[p] as u32, slot: slot_of[p] }
            }
        };
        let verts = raw
            .blocks
            .iter()
            .map(|b| crate::shape::VSlots {
                outs: b.iter().filter(|&&f| self.dir[f] == Dir::Out).map(|&f| end(f)).collect(),
                ins: b.iter().filter(|&&f| self.dir[f] == Dir::In).map(|&f| end(f)).collect(),
            })
            .collect();
        Shape { verts, ids: self.ids.clone(), colors: None }
    }

    /// Builds a graph from a shape with canonical flag names `o{v}.{k}` / `i{v}.{k}`
    /// and vertex names `v{id}`.
    pub fn from_shape(s: &Shape) -> Graph {
        let mut flags = Vec::new();
        let mut dir = Vec::new();
        let mut index = HashMap::new();
        let mut blocks = Vec::new();
        for (v, vs) in s.verts.iter().enumerate() {
            let mut b = Vec::new();
            for k in 0..vs.outs.len() {
                index.insert((v, Dir::Out, k), flags.len());
                b.push(flags.len());
                flags.push(format!("o{}.{}", v + 1, k + 1));
                dir.push(Dir::Out);
            }
            for k in 0..vs.ins.len() {
                index.insert((v, Dir::In, k), flags.len());
                b.push(flags.len());
                flags.push(format!("i{}.{}", v + 1, k + 1));
                dir.push(Dir::In);
            }
            blocks.push(b);
        }
        let mut sigma: Vec<usize> = (0..flags.len()).collect();
        let mut out_labels = BTreeMap::new();
        let mut in_labels = BTreeMap::new();
        for (v, vs) in s.verts.iter().enumerate() {
            for (k, e) in vs.outs.iter().enumerate() {
                let f = index[&(v, Dir::Out, k)];
                match *e {
                    End::Leg(l) => {
                        out_labels.insert(f, l + 1);
                    }
                    End::Edge { vertex, slot } => sigma[f] = index[&(vertex as usize, Dir::In, slot as usize)],
                }
            }
            for (k, e) in vs.ins.iter().enumerate() {
                let f = index[&(v, Dir::In, k)];
                match *e {
                    End::Leg(l) => {
                        in_labels.insert(f, l + 1);
                    }
                    End::Edge { vertex, slot } => sigma[f] = index[&(vertex as usize, Dir::Out, slot as usize)],
                }
            }
        }
        let names = s.ids.iter().map(|i| format!("v{}", i + 1)).collect();
        Graph { raw: RawGraph { flags, sigma, blocks, names }, dir, out_labels, in_labels, ids: s.ids.clone(), trivial: false }
    }

    /// Canonical form together with the witnessing flag bijection (original flag name
    /// → canonical flag name). Isomorphic graphs have identical canonical forms.
    pub fn canonical_form(&self) -> (Graph, BTreeMap<String, String>) {
        if self.trivial {
            let t = Graph::trivial_graph();
            let w = self.raw.flags.iter().zip(&t.raw.flags).map(|(a, b)| (a.clone(), b.clone())).collect();
            return (t, w);
        }
        let shape = self.to_shape();
        let canon = shape.canonical();
        let mut cs = canon.shape.clone();
        cs.ids = (0..cs.len() as u32).collect();
        let cg = Graph::from_shape(&cs);
        // witness: follow each flag's slot through the relabelling
        let r = &canon.relabel;
        let pos = crate::perm::inverse(&r.order);
        let mut witness = BTreeMap::new();
        for (v, b) in self.raw.blocks.iter().enumerate() {
            let (mut o, mut i) = (0, 0);
            for &f in b {
                let name = if self.dir[f] == Dir::Out {
                    o += 1;
                    format!("o{}.{}", pos[v] + 1, r.out_perm[v][o - 1] + 1)
                } else {
                    i += 1;
                    format!("i{}.{}", pos[v] + 1, r.in_perm[v][i - 1] + 1)
                };
                witness.insert(self.raw.flags[f].clone(), name);
            }
        }
        (cg, witness)
    }

    pub fn to_json(&self) -> GraphJson {
        let raw = &self.raw;
        let mut out = BTreeMap::new();
        let mut inn = BTreeMap::new();
        for (v, b) in raw.blocks.iter().enumerate() {
            out.insert(raw.names[v].clone(), b.iter().filter(|&&f| self.dir[f] == Dir::Out).map(|&f| raw.flags[f].clone()).collect());
            inn.insert(raw.names[v].clone(), b.iter().filter(|&&f| self.dir[f] == Dir::In).map(|&f| raw.flags[f].clone()).collect());
        }
        GraphJson {
            flags: raw.flags.clone(),
            involution: raw.edges().into_iter().map(|(a, b)| (raw.flags[a].clone(), raw.flags[b].clone())).collect(),
            vertices: raw.blocks.iter().map(|b| b.iter().map(|&f| raw.flags[f].clone()).collect()).collect(),
            names: Some(raw.names.clone()),
            out: Some(out),
            r#in: Some(inn),
            out_labels: Some(self.out_labels.iter().map(|(f, l)| (raw.flags[*f].clone(), *l)).collect()),
            in_labels: Some(self.in_labels.iter().map(|(f, l)| (raw.flags[*f].clone(), *l)).collect()),
            trivial: if self.trivial { Some(true) } else { None },
        }
    }
}

fn apply_relabel(mut g: Graph, ol: &BTreeMap<String, u32>, il: &BTreeMap<String, u32>) -> Result<Graph> {
    let mut out_labels = BTreeMap::new();
    for (name, l) in ol {
        let f = g.raw.flag_index(name).ok_or_else(|| Error::Graft(format!("unknown flag {name} in relabelling")))?;
        out_labels.insert(f, *l);
    }
    let mut in_labels = BTreeMap::new();
    for (name, l) in il {
        let f = g.raw.flag_index(name).ok_or_else(|| Error::Graft(format!("unknown flag {name} in relabelling")))?;
        in_labels.insert(f, *l);
    }
    g.out_labels = out_labels;
    g.in_labels = in_labels;
    Ok(g)
}

/// JSON form of a graph. Raw graphs omit directions and labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub flags: Vec<String>,
    pub involution: Vec<(String, String)>,
    pub vertices: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    /// Vertex name → its output flags.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<BTreeMap<String, Vec<String>>>,
    /// Vertex name → its input flags.
    #[serde(default, rename = "in", skip_serializing_if = "Option::is_none")]
    pub r#in: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_labels: Option<BTreeMap<String, u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_labels: Option<BTreeMap<String, u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trivial: Option<bool>,
}

impl GraphJson {
    pub fn raw(&self) -> Result<RawGraph> {
        RawGraph::new(self.flags.clone(), &self.involution, &self.vertices, self.names.clone())
    }

    pub fn graph(&self) -> Result<Graph> {
        if self.trivial == Some(true) {
            return Ok(Graph::trivial_graph());
        }
        let raw = self.raw()?;
        let lookup = |name: &str| raw.flag_index(name).ok_or_else(|| Error::Parse(format!("unknown flag {name}")));
        let mut out_flags = BTreeSet::new();
        for flags in self.out.iter().flat_map(|m| m.values()) {
            for f in flags {
                out_flags.insert(lookup(f)?);
            }
        }
        let mut in_flags = BTreeSet::new();
        for flags in self.r#in.iter().flat_map(|m| m.values()) {
            for f in flags {
                in_flags.insert(lookup(f)?);
            }
        }
        let mut errs = Vec::new();
        for f in 0..raw.flags.len() {
            if out_flags.contains(&f) == in_flags.contains(&f) {
                errs.push(GraphViolation::DirectionInconsistentOnEdge(raw.flags[f].clone(), "needs exactly one of in/out".into()));
            }
        }
        if !errs.is_empty() {
            return Err(Error::InvalidGraph(errs));
        }
        let mut ol = BTreeMap::new();
        for (f, l) in self.out_labels.iter().flatten() {
            ol.insert(lookup(f)?, *l);
        }
        let mut il = BTreeMap::new();
        for (f, l) in self.in_labels.iter().flatten() {
            il.insert(lookup(f)?, *l);
        }
        Graph::validate(raw, &out_flags, ol, il)
    }

    pub fn parse(text: &str) -> Result<GraphJson> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    fn example_raw() -> RawGraph {
        let inv: Vec<(String, String)> =
            [("b", "e"), ("c", "f"), ("d", "i"), ("g", "h"), ("k", "l")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        RawGraph::new(
            s(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"]),
            &inv,
            &[s(&["a", "b", "c", "d"]), s(&["e", "f", "g"]), s(&["h", "i", "j", "k", "l"])],
            None,
        )
        .unwrap()
    }

    #[test]
    fn single_edge_contraction_merges_blocks() {
        let g = example_raw().contract_single_edge("g", "h").unwrap();
        assert_eq!(g.flags.len(), 10);
        let blocks: Vec<BTreeSet<&str>> =
            g.blocks.iter().map(|b| b.iter().map(|&f| g.flags[f].as_str()).collect()).collect();
        assert!(blocks.contains(&["e", "f", "i", "j", "k", "l"].into_iter().collect()));
        assert!(blocks.contains(&["a", "b", "c", "d"].into_iter().collect()));
        assert!(example_raw().contract_single_edge("a", "b").is_err());
    }

    #[test]
    fn loop_is_rejected_as_cycle() {
        let raw = example_raw();
        let out: BTreeSet<usize> = ["a", "b", "c", "d", "g", "j", "k"].iter().map(|f| raw.flag_index(f).unwrap()).collect();
        let legs_o = [(raw.flag_index("a").unwrap(), 1), (raw.flag_index("j").unwrap(), 2)].into_iter().collect();
        let err = Graph::validate(raw, &out, legs_o, BTreeMap::new()).unwrap_err();
        let Error::InvalidGraph(v) = err else { panic!() };
        assert!(v.iter().any(|x| matches!(x, GraphViolation::DirectedCycle(_))));
    }

    #[test]
    fn corolla_roundtrips_through_shape() {
        let c = Graph::corolla(2, 3);
        let sh = c.to_shape();
        assert_eq!((sh.m(), sh.n()), (2, 3));
        let back = Graph::from_shape(&sh);
        assert_eq!(back.canonical_form().0, c.canonical_form().0);
    }

    #[test]
    fn trivial_graph_is_unit_for_grafting() {
        let c = Graph::corolla(1, 1);
        let t = Graph::trivial_graph();
        let g = Graph::graft(&c, &t, &[("i1".into(), "o".into())], None).unwrap();
        assert_eq!(g.canonical_form().0, c.canonical_form().0);
        assert!(t.violations().is_empty());
        assert_eq!((t.m(), t.n()), (1, 1));
    }
}
