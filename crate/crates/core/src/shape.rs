//! Vertex-level presentation of graphs, used by all algebraic code.
//!
//! A [`Shape`] lists vertices in tensor order. Each vertex lists its output slots and
//! input slots in the order of its decoration's outputs and inputs. A slot is either a
//! leg of the whole graph (with its 0-based label) or one end of an internal edge.
//! Flags are implicit: an output slot `(v, k)` holding `Edge { vertex: w, slot: j }`
//! is paired with input slot `(w, j)`.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::digraph::Dag;
use crate::error::{Error, Result};
use crate::perm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum End {
    Leg(u32),
    Edge { vertex: u32, slot: u32 },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VSlots {
    pub outs: Vec<End>,
    pub ins: Vec<End>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shape {
    pub verts: Vec<VSlots>,
    /// Stable vertex ids, used to track vertices through contractions.
    pub ids: Vec<u32>,
    /// Optional block colouring. When present, colours are contiguous along the vertex
    /// order and numbered `0, 1, …` in order of appearance.
    pub colors: Option<Vec<u32>>,
}

/// A re-presentation of a shape: new vertex `i` is old vertex `order[i]`, and old slot
/// `k` of old vertex `v` becomes slot `out_perm[v][k]` (resp. `in_perm`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relabel {
    pub order: Vec<usize>,
    pub out_perm: Vec<Vec<usize>>,
    pub in_perm: Vec<Vec<usize>>,
}

/// Result of contracting a shape along a partition of its vertices.
#[derive(Clone, Debug)]
pub struct Quotient {
    /// Vertex `i` is block `i`; its slots are the block's external slots.
    pub shape: Shape,
    /// The sub-shape induced on each block, legs numbered by external slot.
    pub pieces: Vec<Shape>,
}

#[derive(Clone, Debug)]
pub struct Canon {
    pub shape: Shape,
    pub relabel: Relabel,
}

impl Relabel {
    pub fn identity(s: &Shape) -> Self {
        Relabel {
            order: perm::identity(s.len()),
            out_perm: s.verts.iter().map(|v| perm::identity(v.outs.len())).collect(),
            in_perm: s.verts.iter().map(|v| perm::identity(v.ins.len())).collect(),
        }
    }

    /// `a ∘ b`: first `b`, then `a` (on the shape produced by `b`).
    pub fn then(b: &Relabel, a: &Relabel) -> Relabel {
        let order = a.order.iter().map(|&i| b.order[i]).collect();
        let bpos = perm::inverse(&b.order);
        let n = b.order.len();
        let out_perm = (0..n)
            .map(|v| b.out_perm[v].iter().map(|&t| a.out_perm[bpos[v]][t]).collect())
            .collect();
        let in_perm = (0..n)
            .map(|v| b.in_perm[v].iter().map(|&t| a.in_perm[bpos[v]][t]).collect())
            .collect();
        Relabel { order, out_perm, in_perm }
    }
}

impl Shape {
    pub fn corolla(m: usize, n: usize) -> Shape {
        Shape {
            verts: vec![VSlots {
                outs: (0..m as u32).map(End::Leg).collect(),
                ins: (0..n as u32).map(End::Leg).collect(),
            }],
            ids: vec![0],
            colors: None,
        }
    }

    /// Builds a shape from edge and leg lists. Slots are ordered legs first (in the
    /// given order), then edges (in the given order). Labels are 0-based.
    pub fn from_edges(k: usize, edges: &[(usize, usize)], out_legs: &[(usize, u32)], in_legs: &[(usize, u32)]) -> Shape {
        let mut verts = vec![VSlots::default(); k];
        for &(v, l) in out_legs {
            verts[v].outs.push(End::Leg(l));
        }
        for &(v, l) in in_legs {
            verts[v].ins.push(End::Leg(l));
        }
        for &(a, b) in edges {
            let ka = verts[a].outs.len() as u32;
            let kb = verts[b].ins.len() as u32;
            verts[a].outs.push(End::Edge { vertex: b as u32, slot: kb });
            verts[b].ins.push(End::Edge { vertex: a as u32, slot: ka });
        }
        Shape { verts, ids: (0..k as u32).collect(), colors: None }
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn arity(&self, v: usize) -> (usize, usize) {
        (self.verts[v].outs.len(), self.verts[v].ins.len())
    }

    pub fn m(&self) -> usize {
        self.verts.iter().flat_map(|v| &v.outs).filter(|e| matches!(e, End::Leg(_))).count()
    }

    pub fn n(&self) -> usize {
        self.verts.iter().flat_map(|v| &v.ins).filter(|e| matches!(e, End::Leg(_))).count()
    }

    pub fn edge_count(&self) -> usize {
        self.verts.iter().flat_map(|v| &v.outs).filter(|e| matches!(e, End::Edge { .. })).count()
    }

    pub fn with_ids(mut self, ids: Vec<u32>) -> Shape {
        self.ids = ids;
        self
    }

    pub fn with_colors(mut self, colors: Option<Vec<u32>>) -> Shape {
        self.colors = colors;
        self
    }

    /// Thick-edge multiplicities `(from, to) → count` in vertex positions.
    pub fn thick_edges(&self) -> Vec<((usize, usize), usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for (v, vs) in self.verts.iter().enumerate() {
            for e in &vs.outs {
                if let End::Edge { vertex, .. } = e {
                    *counts.entry((v, *vertex as usize)).or_insert(0) += 1;
                }
            }
        }
        counts.into_iter().collect()
    }

    pub fn dag(&self) -> Dag {
        let edges: Vec<_> = self.thick_edges().into_iter().map(|(e, _)| e).collect();
        Dag::new(self.ids.clone(), &edges)
    }

    /// Checks slot pairing, leg labels and (if `require_graph`) connectivity and
    /// acyclicity.
    pub fn validate(&self, require_graph: bool) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidGraph(vec![crate::error::GraphViolation::BadLabeling(s)]));
        let k = self.len();
        if self.ids.len() != k {
            return bad("id list length differs from vertex count".into());
        }
        let mut outs = BTreeSet::new();
        let mut ins = BTreeSet::new();
        for (v, vs) in self.verts.iter().enumerate() {
            for (kk, e) in vs.outs.iter().enumerate() {
                match *e {
                    End::Leg(l) => {
                        if !outs.insert(l) {
                            return bad(format!("output label {} repeated", l + 1));
                        }
                    }
                    End::Edge { vertex, slot } => {
                        let back = self.verts.get(vertex as usize).and_then(|w| w.ins.get(slot as usize));
                        if back != Some(&End::Edge { vertex: v as u32, slot: kk as u32 }) {
                            return bad(format!("edge end at vertex {v} output {kk} is unpaired"));
                        }
                    }
                }
            }
            for (kk, e) in vs.ins.iter().enumerate() {
                match *e {
                    End::Leg(l) => {
                        if !ins.insert(l) {
                            return bad(format!("input label {} repeated", l + 1));
                        }
                    }
                    End::Edge { vertex, slot } => {
                        let back = self.verts.get(vertex as usize).and_then(|w| w.outs.get(slot as usize));
                        if back != Some(&End::Edge { vertex: v as u32, slot: kk as u32 }) {
                            return bad(format!("edge end at vertex {v} input {kk} is unpaired"));
                        }
                    }
                }
            }
        }
        if outs.iter().copied().ne(0..outs.len() as u32) || ins.iter().copied().ne(0..ins.len() as u32) {
            return bad("leg labels are not 1..m and 1..n".into());
        }
        if let Some(c) = &self.colors {
            if c.len() != k || c.windows(2).any(|w| w[1] != w[0] && w[1] != w[0] + 1) || c.first().is_some_and(|&x| x != 0) {
                return bad("colours are not contiguous".into());
            }
        }
        if require_graph {
            let dag = self.dag();
            if !dag.is_connected() {
                return Err(Error::InvalidGraph(vec![crate::error::GraphViolation::Disconnected]));
            }
            if let Some(c) = dag.find_cycle() {
                return Err(Error::InvalidGraph(vec![crate::error::GraphViolation::DirectedCycle(
                    c.iter().map(|v| format!("v{}", self.ids[*v])).collect(),
                )]));
            }
        }
        Ok(())
    }

    /// Contracts each block (list of vertex positions, in the order its decorations
    /// are taken) to a single vertex. Block `i` becomes vertex `i` with id the minimum
    /// id in the block; its external slots are listed in (block order, slot order).
    pub fn quotient(&self, blocks: &[Vec<usize>]) -> Quotient {
        let k = self.len();
        let mut block_of = vec![(usize::MAX, usize::MAX); k];
        for (b, bl) in blocks.iter().enumerate() {
            for (i, &v) in bl.iter().enumerate() {
                block_of[v] = (b, i);
            }
        }
        // external slot index of each (vertex, slot)
        let mut ext_out: HashMap<(usize, usize), usize> = HashMap::new();
        let mut ext_in: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pieces = Vec::with_capacity(blocks.len());
        let mut ext_lists = Vec::with_capacity(blocks.len());
        for (b, bl) in blocks.iter().enumerate() {
            let mut pverts = Vec::with_capacity(bl.len());
            let (mut no, mut ni) = (0u32, 0u32);
            let mut eo = Vec::new();
            let mut ei = Vec::new();
            for &v in bl {
                let vs = &self.verts[v];
                let mut outs = Vec::with_capacity(vs.outs.len());
                for (kk, e) in vs.outs.iter().enumerate() {
                    match *e {
                        End::Edge { vertex, slot } if block_of[vertex as usize].0 == b => {
                            outs.push(End::Edge { vertex: block_of[vertex as usize].1 as u32, slot })
                        }
                        _ => {
                            ext_out.insert((v, kk), no as usize);
                            eo.push((v, kk));
                            outs.push(End::Leg(no));
                            no += 1;
                        }
                    }
                }
                let mut ins = Vec::with_capacity(vs.ins.len());
                for (kk, e) in vs.ins.iter().enumerate() {
                    match *e {
                        End::Edge { vertex, slot } if block_of[vertex as usize].0 == b => {
                            ins.push(End::Edge { vertex: block_of[vertex as usize].1 as u32, slot })
                        }
                        _ => {
                            ext_in.insert((v, kk), ni as usize);
                            ei.push((v, kk));
                            ins.push(End::Leg(ni));
                            ni += 1;
                        }
                    }
                }
                pverts.push(VSlots { outs, ins });
            }
            pieces.push(Shape { verts: pverts, ids: bl.iter().map(|&v| self.ids[v]).collect(), colors: None });
            ext_lists.push((eo, ei));
        }
        let mut verts = Vec::with_capacity(blocks.len());
        for (eo, ei) in &ext_lists {
            let outs = eo
                .iter()
                .map(|&(v, kk)| match self.verts[v].outs[kk] {
                    End::Leg(l) => End::Leg(l),
                    End::Edge { vertex, slot } => End::Edge {
                        vertex: block_of[vertex as usize].0 as u32,
                        slot: ext_in[&(vertex as usize, slot as usize)] as u32,
                    },
                })
                .collect();
            let ins = ei
                .iter()
                .map(|&(v, kk)| match self.verts[v].ins[kk] {
                    End::Leg(l) => End::Leg(l),
                    End::Edge { vertex, slot } => End::Edge {
                        vertex: block_of[vertex as usize].0 as u32,
                        slot: ext_out[&(vertex as usize, slot as usize)] as u32,
                    },
                })
                .collect();
            verts.push(VSlots { outs, ins });
        }
        let ids = blocks.iter().map(|bl| bl.iter().map(|&v| self.ids[v]).min().unwrap()).collect();
        let colors = self.colors.as_ref().map(|c| renumber(blocks.iter().map(|bl| c[bl[0]]).collect()));
        Quotient { shape: Shape { verts, ids, colors }, pieces }
    }

    /// Blocks contracting the vertex set `sub` (in the given order) to a vertex placed
    /// first, other vertices keeping their relative order.
    pub fn blocks_front(&self, sub: &[usize]) -> Vec<Vec<usize>> {
        let mut blocks = vec![sub.to_vec()];
        blocks.extend((0..self.len()).filter(|v| !sub.contains(v)).map(|v| vec![v]));
        blocks
    }

    /// Applies a relabelling verbatim (no sorting).
    pub fn relabeled(&self, r: &Relabel) -> Shape {
        let pos = perm::inverse(&r.order);
        let mut verts = Vec::with_capacity(self.len());
        for &old in &r.order {
            let vs = &self.verts[old];
            let mut outs = vec![End::Leg(0); vs.outs.len()];
            for (kk, e) in vs.outs.iter().enumerate() {
                outs[r.out_perm[old][kk]] = match *e {
                    End::Leg(l) => End::Leg(l),
                    End::Edge { vertex, slot } => End::Edge {
                        vertex: pos[vertex as usize] as u32,
                        slot: r.in_perm[vertex as usize][slot as usize] as u32,
                    },
                };
            }
            let mut ins = vec![End::Leg(0); vs.ins.len()];
            for (kk, e) in vs.ins.iter().enumerate() {
                ins[r.in_perm[old][kk]] = match *e {
                    End::Leg(l) => End::Leg(l),
                    End::Edge { vertex, slot } => End::Edge {
                        vertex: pos[vertex as usize] as u32,
                        slot: r.out_perm[vertex as usize][slot as usize] as u32,
                    },
                };
            }
            verts.push(VSlots { outs, ins });
        }
        let ids = r.order.iter().map(|&v| self.ids[v]).collect();
        let colors = self.colors.as_ref().map(|c| renumber(r.order.iter().map(|&v| c[v]).collect()));
        Shape { verts, ids, colors }
    }

    /// The slot-sorting relabelling for a given vertex order: legs by label, then edges
    /// grouped by the neighbour's new position; parallel edges keep their relative
    /// output order, and inputs follow the outputs they are paired with.
    pub fn sorting_relabel(&self, order: &[usize]) -> Relabel {
        let pos = perm::inverse(order);
        let n = self.len();
        let mut out_perm = vec![Vec::new(); n];
        for v in 0..n {
            let vs = &self.verts[v];
            let mut keys: Vec<((u32, u32, u32), usize)> = vs
                .outs
                .iter()
                .enumerate()
                .map(|(kk, e)| match *e {
                    End::Leg(l) => ((0, l, 0), kk),
                    End::Edge { vertex, .. } => ((1, pos[vertex as usize] as u32, kk as u32), kk),
                })
                .collect();
            keys.sort();
            let mut p = vec![0; keys.len()];
            for (t, (_, kk)) in keys.iter().enumerate() {
                p[*kk] = t;
            }
            out_perm[v] = p;
        }
        let mut in_perm = vec![Vec::new(); n];
        for v in 0..n {
            let vs = &self.verts[v];
            let mut keys: Vec<((u32, u32, u32), usize)> = vs
                .ins
                .iter()
                .enumerate()
                .map(|(kk, e)| match *e {
                    End::Leg(l) => ((0, l, 0), kk),
                    End::Edge { vertex, slot } => {
                        ((1, pos[vertex as usize] as u32, out_perm[vertex as usize][slot as usize] as u32), kk)
                    }
                })
                .collect();
            keys.sort();
            let mut p = vec![0; keys.len()];
            for (t, (_, kk)) in keys.iter().enumerate() {
                p[*kk] = t;
            }
            in_perm[v] = p;
        }
        Relabel { order: order.to_vec(), out_perm, in_perm }
    }

    /// Isomorphism-invariant key of a vertex used to prune candidate orders.
    fn vertex_key(&self, v: usize) -> (Vec<u32>, Vec<u32>, usize, usize) {
        let vs = &self.verts[v];
        let mut ol: Vec<u32> = vs.outs.iter().filter_map(|e| if let End::Leg(l) = e { Some(*l) } else { None }).collect();
        let mut il: Vec<u32> = vs.ins.iter().filter_map(|e| if let End::Leg(l) = e { Some(*l) } else { None }).collect();
        ol.sort();
        il.sort();
        let oe = vs.outs.len() - ol.len();
        let ie = vs.ins.len() - il.len();
        (ol, il, oe, ie)
    }

    /// All vertex orders compatible with the invariant keys (and, for coloured shapes,
    /// keeping blocks contiguous).
    fn candidate_orders(&self) -> Vec<Vec<usize>> {
        let keys: Vec<_> = (0..self.len()).map(|v| self.vertex_key(v)).collect();
        // groups of vertices: per block (coloured) or a single block
        let blocks: Vec<Vec<usize>> = match &self.colors {
            None => vec![(0..self.len()).collect()],
            Some(c) => {
                let nb = c.iter().max().map_or(0, |&x| x as usize + 1);
                (0..nb).map(|b| (0..self.len()).filter(|&v| c[v] as usize == b).collect()).collect()
            }
        };
        // orders within a block: sort by key, permute equal-key runs
        let within: Vec<Vec<Vec<usize>>> = blocks
            .iter()
            .map(|bl| {
                let mut vs = bl.clone();
                vs.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
                let runs = runs_by(&vs, |&a, &b| keys[a] == keys[b]);
                product_of_run_perms(&runs)
            })
            .collect();
        // blocks sorted by signature, equal-signature runs permuted
        let sig = |b: usize| {
            let mut s: Vec<_> = blocks[b].iter().map(|&v| keys[v].clone()).collect();
            s.sort();
            s
        };
        let mut border: Vec<usize> = (0..blocks.len()).collect();
        border.sort_by_key(|&b| sig(b));
        let bruns = runs_by(&border, |&a, &b| sig(a) == sig(b));
        let mut out = Vec::new();
        for bo in product_of_run_perms(&bruns) {
            let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
            for &b in &bo {
                let mut next = Vec::with_capacity(acc.len() * within[b].len());
                for prefix in &acc {
                    for w in &within[b] {
                        let mut p = prefix.clone();
                        p.extend(w);
                        next.push(p);
                    }
                }
                acc = next;
            }
            out.extend(acc);
        }
        out
    }

    /// Structural part used for comparing presentations (ids ignored).
    fn code(&self) -> (&Option<Vec<u32>>, &Vec<VSlots>) {
        (&self.colors, &self.verts)
    }

    /// Canonical presentation. Two shapes are isomorphic (respecting leg labels and
    /// colours) iff their canonical shapes are equal. Ids of the result are `0..k`.
    pub fn canonical(&self) -> Canon {
        let mut best: Option<(Shape, Relabel)> = None;
        for order in self.candidate_orders() {
            let r = self.sorting_relabel(&order);
            let s = self.relabeled(&r);
            if best.as_ref().is_none_or(|(b, _)| s.code() < b.code()) {
                best = Some((s, r));
            }
        }
        let (mut shape, relabel) = best.expect("at least one candidate order");
        shape.ids = (0..shape.len() as u32).collect();
        Canon { shape, relabel }
    }

    /// Canonical form with process-wide caching.
    pub fn canonical_cached(&self) -> Arc<Canon> {
        static CACHE: OnceLock<RwLock<HashMap<Shape, Arc<Canon>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = Shape { verts: self.verts.clone(), ids: Vec::new(), colors: self.colors.clone() };
        if let Some(c) = cache.read().unwrap().get(&key) {
            return c.clone();
        }
        let c = Arc::new(key.with_ids(vec![0; self.len()]).canonical());
        cache.write().unwrap().insert(Shape { verts: self.verts.clone(), ids: Vec::new(), colors: self.colors.clone() }, c.clone());
        c
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical().shape.code() == self.code()
    }

    /// Automorphisms of a canonical shape as relabellings mapping it to itself,
    /// including permutations of parallel edges. The identity comes first.
    pub fn automorphisms(&self) -> Vec<Relabel> {
        let mut vertex_autos = Vec::new();
        for order in self.candidate_orders() {
            let r = self.sorting_relabel(&order);
            if self.relabeled(&r).code() == self.code() {
                vertex_autos.push(r);
            }
        }
        // parallel groups: (v, out positions, w, in positions)
        let mut groups: Vec<(usize, Vec<usize>, usize, Vec<usize>)> = Vec::new();
        for ((a, b), mult) in self.thick_edges() {
            if mult < 2 {
                continue;
            }
            let outs: Vec<usize> = self.verts[a]
                .outs
                .iter()
                .enumerate()
                .filter(|(_, e)| matches!(e, End::Edge { vertex, .. } if *vertex as usize == b))
                .map(|(k, _)| k)
                .collect();
            let ins: Vec<usize> = outs
                .iter()
                .map(|&k| match self.verts[a].outs[k] {
                    End::Edge { slot, .. } => slot as usize,
                    End::Leg(_) => unreachable!(),
                })
                .collect();
            groups.push((a, outs, b, ins));
        }
        let mut edge_autos = vec![Relabel::identity(self)];
        for (a, outs, b, ins) in &groups {
            let mut next = Vec::new();
            for base in &edge_autos {
                for p in perm::all_permutations(outs.len()) {
                    let mut r = base.clone();
                    for (i, &pi) in p.iter().enumerate() {
                        r.out_perm[*a][outs[i]] = outs[pi];
                        r.in_perm[*b][ins[i]] = ins[pi];
                    }
                    next.push(r);
                }
            }
            edge_autos = next;
        }
        let mut out = Vec::with_capacity(vertex_autos.len() * edge_autos.len());
        // identity first: vertex autos include the identity order
        vertex_autos.sort_by_key(|r| !perm::is_identity(&r.order));
        for va in &vertex_autos {
            for ea in &edge_autos {
                out.push(Relabel::then(va, ea));
            }
        }
        out
    }

    /// Cached automorphism group of a canonical shape.
    pub fn automorphisms_cached(&self) -> Arc<Vec<Relabel>> {
        static CACHE: OnceLock<RwLock<HashMap<Shape, Arc<Vec<Relabel>>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = Shape { verts: self.verts.clone(), ids: Vec::new(), colors: self.colors.clone() };
        if let Some(c) = cache.read().unwrap().get(&key) {
            return c.clone();
        }
        let a = Arc::new(self.automorphisms());
        cache.write().unwrap().insert(key, a.clone());
        a
    }

    /// Reconstructs the shape of `G` from a splitting into blocks by grafting the
    /// quotient and the pieces back together; equals `self` up to isomorphism.
    pub fn regraft(q: &Quotient) -> Shape {
        let qs = &q.shape;
        // global vertex index of (block, local vertex)
        let mut offset = Vec::with_capacity(q.pieces.len());
        let mut total = 0;
        for p in &q.pieces {
            offset.push(total);
            total += p.len();
        }
        // where does external output t of block b live
        let mut ext_out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); q.pieces.len()];
        let mut ext_in: Vec<Vec<(usize, usize)>> = vec![Vec::new(); q.pieces.len()];
        for (b, p) in q.pieces.iter().enumerate() {
            ext_out[b] = vec![(0, 0); qs.verts[b].outs.len()];
            ext_in[b] = vec![(0, 0); qs.verts[b].ins.len()];
            for (v, vs) in p.verts.iter().enumerate() {
                for (k, e) in vs.outs.iter().enumerate() {
                    if let End::Leg(l) = e {
                        ext_out[b][*l as usize] = (offset[b] + v, k);
                    }
                }
                for (k, e) in vs.ins.iter().enumerate() {
                    if let End::Leg(l) = e {
                        ext_in[b][*l as usize] = (offset[b] + v, k);
                    }
                }
            }
        }
        let mut verts = Vec::with_capacity(total);
        let mut ids = Vec::with_capacity(total);
        for (b, p) in q.pieces.iter().enumerate() {
            for (v, vs) in p.verts.iter().enumerate() {
                let outs = vs
                    .outs
                    .iter()
                    .map(|e| match *e {
                        End::Edge { vertex, slot } => End::Edge { vertex: (offset[b] + vertex as usize) as u32, slot },
                        End::Leg(l) => match qs.verts[b].outs[l as usize] {
                            End::Leg(gl) => End::Leg(gl),
                            End::Edge { vertex, slot } => {
                                let (gv, gk) = ext_in[vertex as usize][slot as usize];
                                End::Edge { vertex: gv as u32, slot: gk as u32 }
                            }
                        },
                    })
                    .collect();
                let ins = vs
                    .ins
                    .iter()
                    .map(|e| match *e {
                        End::Edge { vertex, slot } => End::Edge { vertex: (offset[b] + vertex as usize) as u32, slot },
                        End::Leg(l) => match qs.verts[b].ins[l as usize] {
                            End::Leg(gl) => End::Leg(gl),
                            End::Edge { vertex, slot } => {
                                let (gv, gk) = ext_out[vertex as usize][slot as usize];
                                End::Edge { vertex: gv as u32, slot: gk as u32 }
                            }
                        },
                    })
                    .collect();
                verts.push(VSlots { outs, ins });
                ids.push(p.ids[v]);
            }
        }
        Shape { verts, ids, colors: None }
    }

    /// Short human-readable rendering, e.g. `v0[o1,i1]→v1`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (v, vs) in self.verts.iter().enumerate() {
            let legs_o: Vec<String> =
                vs.outs.iter().filter_map(|e| if let End::Leg(l) = e { Some(format!("o{}", l + 1)) } else { None }).collect();
            let legs_i: Vec<String> =
                vs.ins.iter().filter_map(|e| if let End::Leg(l) = e { Some(format!("i{}", l + 1)) } else { None }).collect();
            let mut s = format!("v{}({},{})", self.ids[v], legs_o.join(" "), legs_i.join(" "));
            if let Some(c) = &self.colors {
                s.push_str(&format!("#{}", c[v]));
            }
            parts.push(s);
        }
        let edges: Vec<String> = self
            .thick_edges()
            .into_iter()
            .map(|((a, b), m)| {
                let x = if m > 1 { format!("×{m}") } else { String::new() };
                format!("v{}→v{}{}", self.ids[a], self.ids[b], x)
            })
            .collect();
        format!("{} | {}", parts.join(" "), edges.join(" "))
    }
}

fn renumber(c: Vec<u32>) -> Vec<u32> {
    let mut map = HashMap::new();
    c.into_iter()
        .map(|x| {
            let next = map.len() as u32;
            *map.entry(x).or_insert(next)
        })
        .collect()
}

fn runs_by<T: Copy>(xs: &[T], eq: impl Fn(&T, &T) -> bool) -> Vec<Vec<T>> {
    let mut runs: Vec<Vec<T>> = Vec::new();
    for x in xs {
        match runs.last_mut() {
            Some(r) if eq(&r[0], x) => r.push(*x),
            _ => runs.push(vec![*x]),
        }
    }
    runs
}

fn product_of_run_perms(runs: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for run in runs {
        let perms = perm::all_permutations(run.len());
        let mut next = Vec::with_capacity(acc.len() * perms.len());
        for prefix in &acc {
            for p in &perms {
                let mut x = prefix.clone();
                x.extend(p.iter().map(|&i| run[i]));
                next.push(x);
            }
        }
        acc = next;
    }
    acc
}

/// Bounds for enumerating canonical shapes.
#[derive(Clone, Debug)]
pub struct CatalogSpec {
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub max_out: usize,
    pub max_in: usize,
    /// Largest number of parallel edges between two vertices.
    pub max_multiplicity: usize,
    /// Require at least one output and one input leg on the whole graph.
    pub require_legs: bool,
}

impl CatalogSpec {
    pub fn new(max_vertices: usize, max_out: usize, max_in: usize) -> Self {
        CatalogSpec { min_vertices: 1, max_vertices, max_out, max_in, max_multiplicity: 2, require_legs: true }
    }
}

/// Canonical connected acyclic skeletons (no legs) on `k` vertices with edge
/// multiplicities up to `max_mult`, in canonical order.
pub fn skeletons(k: usize, max_mult: usize) -> Vec<Shape> {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let mut seen = BTreeSet::new();
    let mut mult = vec![0usize; pairs.len()];
    loop {
        let edges: Vec<(usize, usize)> =
            pairs.iter().zip(&mult).flat_map(|(&p, &c)| std::iter::repeat_n(p, c)).collect();
        let s = Shape::from_edges(k, &edges, &[], &[]);
        if s.dag().is_connected() {
            seen.insert(s.canonical().shape);
        }
        // odometer
        let mut i = 0;
        while i < mult.len() && mult[i] == max_mult {
            mult[i] = 0;
            i += 1;
        }
        if i == mult.len() {
            break;
        }
        mult[i] += 1;
    }
    seen.into_iter().collect()
}

/// All canonical shapes within the bounds whose vertex arities pass `vertex_ok` and
/// whose total arity passes `graph_ok`, sorted by vertex count then canonical order.
pub fn enumerate_shapes(
    spec: &CatalogSpec,
    vertex_ok: &(dyn Fn(usize, usize) -> bool + Sync),
    graph_ok: &(dyn Fn(usize, usize) -> bool + Sync),
) -> Vec<Shape> {
    use rayon::prelude::*;
    let mut out = Vec::new();
    for k in spec.min_vertices.max(1)..=spec.max_vertices {
        let skel = skeletons(k, spec.max_multiplicity);
        // stage 1: leg counts, with all legs sharing one label
        let mut unlabeled = BTreeSet::new();
        for s in &skel {
            let degs: Vec<(usize, usize)> = (0..k).map(|v| s.arity(v)).collect();
            let mut counts = vec![(0usize, 0usize); k];
            leg_counts(&degs, 0, spec, &mut counts, &mut |counts| {
                let m: usize = counts.iter().map(|c| c.0).sum();
                let n: usize = counts.iter().map(|c| c.1).sum();
                if spec.require_legs && (m == 0 || n == 0) {
                    return;
                }
                if !graph_ok(m, n) {
                    return;
                }
                if !(0..k).all(|v| vertex_ok(degs[v].0 + counts[v].0, degs[v].1 + counts[v].1)) {
                    return;
                }
                let mut t = s.clone();
                for (v, &(a, b)) in counts.iter().enumerate() {
                    for _ in 0..a {
                        t.verts[v].outs.insert(0, End::Leg(0));
                    }
                    for _ in 0..b {
                        t.verts[v].ins.insert(0, End::Leg(0));
                    }
                }
                fix_slots_after_insert(&mut t, counts);
                unlabeled.insert(t.canonical().shape);
            });
        }
        // stage 2: all labellings
        let labeled: BTreeSet<Shape> = unlabeled
            .into_par_iter()
            .flat_map_iter(|u| {
                let m = u.m();
                let n = u.n();
                let mut found = BTreeSet::new();
                for po in perm::all_permutations(m) {
                    for pi in perm::all_permutations(n) {
                        let mut t = u.clone();
                        let (mut a, mut b) = (0, 0);
                        for vs in t.verts.iter_mut() {
                            for e in vs.outs.iter_mut() {
                                if let End::Leg(l) = e {
                                    *l = po[a] as u32;
                                    a += 1;
                                }
                            }
                            for e in vs.ins.iter_mut() {
                                if let End::Leg(l) = e {
                                    *l = pi[b] as u32;
                                    b += 1;
                                }
                            }
                        }
                        found.insert(t.canonical().shape);
                    }
                }
                found.into_iter()
            })
            .collect();
        out.extend(labeled);
    }
    out
}

fn leg_counts(
    degs: &[(usize, usize)],
    v: usize,
    spec: &CatalogSpec,
    counts: &mut Vec<(usize, usize)>,
    emit: &mut dyn FnMut(&[(usize, usize)]),
) {
    if v == degs.len() {
        emit(counts);
        return;
    }
    let used_o: usize = counts[..v].iter().map(|c| c.0).sum();
    let used_i: usize = counts[..v].iter().map(|c| c.1).sum();
    for a in 0..=spec.max_out - used_o {
        for b in 0..=spec.max_in - used_i {
            counts[v] = (a, b);
            leg_counts(degs, v + 1, spec, counts, emit);
        }
    }
    counts[v] = (0, 0);
}

/// After inserting `a` output and `b` input legs at the front of each vertex, the
/// edge ends pointing at shifted slots must be renumbered.
fn fix_slots_after_insert(t: &mut Shape, counts: &[(usize, usize)]) {
    for vs in t.verts.iter_mut() {
        for e in vs.outs.iter_mut() {
            if let End::Edge { vertex, slot } = e {
                *slot += counts[*vertex as usize].1 as u32;
            }
        }
        for e in vs.ins.iter_mut() {
            if let End::Edge { vertex, slot } = e {
                *slot += counts[*vertex as usize].0 as u32;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Shape {
        // v0→v1, v0→v2, v1→v3, v2→v3, v0→v3, legs: one output at v3, one input at v0
        Shape::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)], &[(3, 0)], &[(0, 0)])
    }

    #[test]
    fn from_edges_is_valid() {
        diamond().validate(true).unwrap();
        assert_eq!((diamond().m(), diamond().n()), (1, 1));
    }

    #[test]
    fn canonical_is_relabel_invariant() {
        let d = diamond();
        let c = d.canonical().shape;
        for p in perm::all_permutations(4) {
            let r = d.sorting_relabel(&p);
            let e = d.relabeled(&r);
            e.validate(true).unwrap();
            assert_eq!(e.canonical().shape, c);
        }
        assert!(c.is_canonical());
    }

    #[test]
    fn canonical_separates_labels() {
        let a = Shape::from_edges(2, &[(0, 1)], &[(1, 0), (1, 1)], &[(0, 0)]);
        let b = Shape::from_edges(2, &[(0, 1)], &[(1, 1), (1, 0)], &[(0, 0)]);
        // same vertex but slots listed differently: isomorphic
        assert_eq!(a.canonical().shape, b.canonical().shape);
        let c = Shape::from_edges(2, &[(0, 1)], &[(1, 0), (0, 1)], &[(0, 0)]);
        let d = Shape::from_edges(2, &[(0, 1)], &[(1, 1), (0, 0)], &[(0, 0)]);
        assert_ne!(c.canonical().shape, d.canonical().shape);
    }

    #[test]
    fn quotient_and_regraft_roundtrip() {
        let d = diamond();
        let blocks = vec![vec![2, 3], vec![0, 1]];
        let q = d.quotient(&blocks);
        q.shape.validate(true).unwrap();
        assert_eq!(q.shape.ids, vec![2, 0]);
        for p in &q.pieces {
            p.validate(true).unwrap();
        }
        let back = Shape::regraft(&q);
        back.validate(true).unwrap();
        assert_eq!(back.canonical().shape, d.canonical().shape);
    }

    #[test]
    fn parallel_edges_give_automorphisms() {
        let s = Shape::from_edges(2, &[(0, 1), (0, 1)], &[(1, 0)], &[(0, 0)]).canonical().shape;
        assert_eq!(s.automorphisms().len(), 2);
        let t = Shape::from_edges(3, &[(0, 1), (0, 2)], &[(1, 0), (2, 1)], &[(0, 0)]).canonical().shape;
        assert_eq!(t.automorphisms().len(), 1);
        let u = Shape::from_edges(3, &[(0, 1), (0, 2)], &[], &[]).canonical().shape;
        assert_eq!(u.automorphisms().len(), 2);
    }

    #[test]
    fn relabel_composition() {
        let d = diamond();
        let r1 = d.sorting_relabel(&[1, 0, 3, 2]);
        let s1 = d.relabeled(&r1);
        let r2 = s1.sorting_relabel(&[2, 3, 0, 1]);
        let s2 = s1.relabeled(&r2);
        assert_eq!(d.relabeled(&Relabel::then(&r1, &r2)), s2);
    }

    #[test]
    fn skeleton_counts() {
        // connected DAGs up to isomorphism: 1, 1, 4 (simple) on 1, 2, 3 vertices
        assert_eq!(skeletons(1, 1).len(), 1);
        assert_eq!(skeletons(2, 1).len(), 1);
        assert_eq!(skeletons(3, 1).len(), 4);
        assert_eq!(skeletons(2, 2).len(), 2);
    }

    #[test]
    fn ladder_catalog() {
        let spec = CatalogSpec::new(3, 1, 1);
        let shapes = enumerate_shapes(&spec, &|m, n| m == 1 && n == 1, &|_, _| true);
        assert_eq!(shapes.iter().map(|s| s.len()).collect::<Vec<_>>(), vec![1, 2, 3]);
    }
}
