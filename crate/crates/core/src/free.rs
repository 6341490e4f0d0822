//! Decorated graphs and elements of the free properad on a Σ-bimodule.
//!
//! A decorated graph is a [`Shape`] with one basis index per vertex, in vertex order.
//! Stored terms are in normal form: the shape is canonical, decorations have been
//! transported along the canonical relabelling (action matrices for slot changes,
//! Koszul signs for vertex reorderings), and the result is averaged over the
//! automorphism group so that each coinvariant class has one representative.
//!
//! Block-coloured shapes represent elements of `F(F̄E)`: each colour is one outer
//! vertex decorated by the sub-graph it spans. For Koszul signs a marker of degree
//! [`FreeCtx::marker`] is inserted before the decorations of each block.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bimodule::{Arity, SigmaBimodule};
use crate::digraph::members;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphJson};
use crate::linalg::{format_scalar, parse_scalar, sign, LinComb, Scalar};
use crate::perm;
use crate::shape::{End, Relabel, Shape};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Decorated {
    pub shape: Shape,
    pub decs: Vec<usize>,
}

pub type FreeElement = LinComb<Decorated>;

/// A decorated graph in an arbitrary presentation, with stable vertex ids.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTerm {
    pub shape: Shape,
    pub decs: Vec<usize>,
    pub coeff: Scalar,
}

impl RawTerm {
    pub fn new(shape: Shape, decs: Vec<usize>) -> RawTerm {
        RawTerm { shape, decs, coeff: Scalar::one() }
    }

    pub fn scaled(mut self, c: &Scalar) -> RawTerm {
        self.coeff *= c;
        self
    }

    /// Vertex positions of the given ids.
    pub fn positions(&self, ids: &[u32]) -> Result<Vec<usize>> {
        ids.iter()
            .map(|i| self.shape.ids.iter().position(|x| x == i).ok_or_else(|| Error::OutOfRange(format!("no vertex with id {i}"))))
            .collect()
    }
}

/// A per-vertex operator: receives the sub-shape (legs numbered by its external
/// slots) and its decorations, and returns an element of the new vertex's component.
pub type VertexOp<'a> = dyn FnMut(&Shape, &[usize]) -> Result<LinComb<usize>> + 'a;

/// Grading data for decorated graphs over one bimodule.
#[derive(Clone, Copy)]
pub struct FreeCtx<'a> {
    pub bm: &'a SigmaBimodule,
    /// Decorations live in `E[shift]`: degree `|e| - shift`.
    pub shift: i32,
    /// Degree of the block marker in coloured shapes.
    pub marker: i32,
}

struct Flat {
    degrees: Vec<i32>,
    /// Flat index of each vertex's decoration.
    dec_at: Vec<usize>,
    /// Flat index of each colour's marker.
    marker_at: Vec<usize>,
}

impl<'a> FreeCtx<'a> {
    pub fn new(bm: &'a SigmaBimodule, shift: i32) -> Self {
        FreeCtx { bm, shift, marker: 0 }
    }

    pub fn with_marker(mut self, marker: i32) -> Self {
        self.marker = marker;
        self
    }

    pub fn degree(&self, a: Arity, i: usize) -> i32 {
        self.bm.degree(a, i) - self.shift
    }

    pub fn dec_degree(&self, shape: &Shape, v: usize, i: usize) -> i32 {
        self.degree(shape.arity(v), i)
    }

    /// Total degree of a decorated graph (markers included).
    pub fn total_degree(&self, shape: &Shape, decs: &[usize]) -> i32 {
        self.flat(shape, decs).degrees.iter().sum()
    }

    fn flat(&self, shape: &Shape, decs: &[usize]) -> Flat {
        let mut degrees = Vec::with_capacity(decs.len() + 2);
        let mut dec_at = Vec::with_capacity(decs.len());
        let mut marker_at = Vec::new();
        for v in 0..shape.len() {
            if let Some(c) = &shape.colors {
                if v == 0 || c[v] != c[v - 1] {
                    marker_at.push(degrees.len());
                    degrees.push(self.marker);
                }
            }
            dec_at.push(degrees.len());
            degrees.push(self.dec_degree(shape, v, decs[v]));
        }
        Flat { degrees, dec_at, marker_at }
    }

    /// Transports decorations along a relabelling: returns whether the Koszul sign is
    /// negative and the new per-vertex decorations (as vectors, since actions need not
    /// be monomial). `new_colors` are the colours of the relabelled shape.
    pub fn transport(&self, shape: &Shape, decs: &[usize], r: &Relabel, new_colors: Option<&Vec<u32>>) -> (bool, Vec<LinComb<usize>>) {
        let flat = self.flat(shape, decs);
        let mut order = Vec::with_capacity(flat.degrees.len());
        let mut new_decs = Vec::with_capacity(decs.len());
        for (i, &old) in r.order.iter().enumerate() {
            if let (Some(nc), Some(oc)) = (new_colors, &shape.colors) {
                if i == 0 || nc[i] != nc[i - 1] {
                    order.push(flat.marker_at[oc[old] as usize]);
                }
            }
            order.push(flat.dec_at[old]);
            new_decs.push(self.bm.act(shape.arity(old), decs[old], &r.out_perm[old], &r.in_perm[old]));
        }
        (perm::koszul_negative(&flat.degrees, &order), new_decs)
    }

    /// Adds the normal form of a raw term to `out`.
    pub fn normalize_into(&self, t: &RawTerm, out: &mut FreeElement) {
        if t.coeff.is_zero() {
            return;
        }
        let canon = t.shape.canonical_cached();
        let shape = &canon.shape;
        let (neg, vecs) = self.transport(&t.shape, &t.decs, &canon.relabel, shape.colors.as_ref());
        let c0 = if neg { -t.coeff.clone() } else { t.coeff.clone() };
        let autos = shape.automorphisms_cached();
        let inv = Scalar::new(1.into(), (autos.len() as i64).into());
        for (decs, c) in expand(&vecs) {
            let c = &c0 * c;
            if autos.len() == 1 {
                out.add_term(Decorated { shape: shape.clone(), decs }, c);
                continue;
            }
            let c = &c * &inv;
            for a in autos.iter() {
                let (neg, vs) = self.transport(shape, &decs, a, shape.colors.as_ref());
                let ca = if neg { -c.clone() } else { c.clone() };
                for (d2, c2) in expand(&vs) {
                    out.add_term(Decorated { shape: shape.clone(), decs: d2 }, &ca * c2);
                }
            }
        }
    }

    pub fn normalize<'t>(&self, terms: impl IntoIterator<Item = &'t RawTerm>) -> FreeElement {
        let mut out = FreeElement::zero();
        for t in terms {
            self.normalize_into(t, &mut out);
        }
        out
    }

    pub fn normalize_one(&self, t: &RawTerm) -> FreeElement {
        let mut out = FreeElement::zero();
        self.normalize_into(t, &mut out);
        out
    }

    /// Raw terms of an element (canonical presentations, ids `0..k`).
    pub fn raw_terms(x: &FreeElement) -> Vec<RawTerm> {
        x.iter().map(|(d, c)| RawTerm { shape: d.shape.clone(), decs: d.decs.clone(), coeff: c.clone() }).collect()
    }

    /// Checks that every decoration lies in the component of its vertex.
    pub fn check_arities(&self, t: &RawTerm) -> Result<()> {
        if t.decs.len() != t.shape.len() {
            return Err(Error::SizeMismatch(format!("{} decorations for {} vertices", t.decs.len(), t.shape.len())));
        }
        for v in 0..t.shape.len() {
            let a = t.shape.arity(v);
            if t.decs[v] >= self.bm.dim(a) {
                return Err(Error::ArityMismatch {
                    vertex: format!("v{}", t.shape.ids[v] + 1),
                    detail: format!("no basis element {} in component ({},{})", t.decs[v], a.0, a.1),
                });
            }
        }
        Ok(())
    }

    /// Decorates a graph; `assignment` lists basis ids in vertex order.
    pub fn decorate(&self, g: &Graph, assignment: &[&str]) -> Result<FreeElement> {
        let shape = g.to_shape();
        if assignment.len() != shape.len() {
            return Err(Error::SizeMismatch(format!("{} decorations for {} vertices", assignment.len(), shape.len())));
        }
        let mut decs = Vec::with_capacity(shape.len());
        for (v, id) in assignment.iter().enumerate() {
            let a = shape.arity(v);
            let idx = self.bm.index_of(a, id).ok_or_else(|| Error::ArityMismatch {
                vertex: g.raw.names[v].clone(),
                detail: format!("{id:?} is not a basis element of component ({},{})", a.0, a.1),
            })?;
            decs.push(idx);
        }
        Ok(self.normalize_one(&RawTerm::new(shape, decs)))
    }

    /// Relabels the legs of every term: output leg `l` becomes `sigma_out[l]`.
    pub fn relabel(&self, x: &FreeElement, sigma_out: &[usize], sigma_in: &[usize]) -> Result<FreeElement> {
        let mut out = FreeElement::zero();
        for (d, c) in x.iter() {
            if d.shape.m() != sigma_out.len() || d.shape.n() != sigma_in.len() {
                return Err(Error::SizeMismatch(format!(
                    "permutations of sizes ({},{}) for a term of arity ({},{})",
                    sigma_out.len(),
                    sigma_in.len(),
                    d.shape.m(),
                    d.shape.n()
                )));
            }
            let mut s = d.shape.clone();
            for vs in s.verts.iter_mut() {
                for e in vs.outs.iter_mut() {
                    if let End::Leg(l) = e {
                        *l = sigma_out[*l as usize] as u32;
                    }
                }
                for e in vs.ins.iter_mut() {
                    if let End::Leg(l) = e {
                        *l = sigma_in[*l as usize] as u32;
                    }
                }
            }
            self.normalize_into(&RawTerm { shape: s, decs: d.decs.clone(), coeff: c.clone() }, &mut out);
        }
        Ok(out)
    }

    /// Replaces the vertices `sub` (taken in the given order) by one vertex decorated
    /// with `op` of their decorations. The decorations of `sub` are first moved to
    /// the front (of their colour block, for coloured shapes) with the Koszul sign,
    /// and `op`, of degree `op_deg`, passes everything before them. The new vertex is
    /// placed there; all other vertices keep their ids and relative order.
    pub fn apply_at(&self, t: &RawTerm, sub: &[usize], op_deg: i32, op: &mut VertexOp) -> Result<Vec<RawTerm>> {
        let k = t.shape.len();
        if sub.is_empty() || sub.iter().any(|&v| v >= k) {
            return Err(Error::OutOfRange("vertex subset out of range".into()));
        }
        let flat = self.flat(&t.shape, &t.decs);
        let colour = t.shape.colors.as_ref().map(|c| c[sub[0]]);
        if let (Some(c), Some(cs)) = (colour, &t.shape.colors) {
            if sub.iter().any(|&v| cs[v] != c) {
                return Err(Error::OutOfRange("subset spans several colour blocks".into()));
            }
        }
        // flat items up to the insertion point stay in place
        let start = match colour {
            Some(c) => flat.marker_at[c as usize] + 1,
            None => 0,
        };
        let in_sub: Vec<bool> = (0..k).map(|v| sub.contains(&v)).collect();
        let mut order: Vec<usize> = (0..start).collect();
        order.extend(sub.iter().map(|&v| flat.dec_at[v]));
        let sub_flat: Vec<usize> = sub.iter().map(|&v| flat.dec_at[v]).collect();
        order.extend((start..flat.degrees.len()).filter(|i| !sub_flat.contains(i)));
        let prefix: i32 = flat.degrees[..start].iter().sum();
        let negative = perm::koszul_negative(&flat.degrees, &order) ^ ((op_deg * prefix).rem_euclid(2) == 1);

        // vertex blocks: sub inserted where its colour block starts (or first)
        let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(k - sub.len() + 1);
        let mut placed = false;
        for v in 0..k {
            let at_start = match (colour, &t.shape.colors) {
                (Some(c), Some(cs)) => cs[v] == c,
                _ => true,
            };
            if !placed && at_start {
                blocks.push(sub.to_vec());
                placed = true;
            }
            if !in_sub[v] {
                blocks.push(vec![v]);
            }
        }
        let bpos = blocks.iter().position(|b| b.len() == sub.len() && b[0] == sub[0]).unwrap();
        let q = t.shape.quotient(&blocks);
        let sub_decs: Vec<usize> = sub.iter().map(|&v| t.decs[v]).collect();
        let value = op(&q.pieces[bpos], &sub_decs)?;
        let base = if negative { -t.coeff.clone() } else { t.coeff.clone() };
        let mut out = Vec::with_capacity(value.len());
        for (&e, c) in value.iter() {
            let decs = blocks.iter().enumerate().map(|(b, bl)| if b == bpos { e } else { t.decs[bl[0]] }).collect();
            out.push(RawTerm { shape: q.shape.clone(), decs, coeff: &base * c });
        }
        Ok(out)
    }

    /// Contracts each block of a partition (uncoloured shapes) with its own operator.
    /// Blocks are given in the vertex order of the result; `ops` receives the block
    /// index. Sign: Koszul sign of concatenating the blocks, times
    /// `(−1)^{Σ_b deg_b · Σ_{b'<b} |x_{b'}|}`.
    pub fn contract_partition(
        &self,
        t: &RawTerm,
        blocks: &[Vec<usize>],
        op_degs: &[i32],
        op: &mut dyn FnMut(usize, &Shape, &[usize]) -> Result<LinComb<usize>>,
    ) -> Result<Vec<RawTerm>> {
        let flat = self.flat(&t.shape, &t.decs);
        let order: Vec<usize> = blocks.iter().flatten().map(|&v| flat.dec_at[v]).collect();
        if order.len() != t.shape.len() {
            return Err(Error::SizeMismatch("blocks do not partition the vertices".into()));
        }
        let mut negative = perm::koszul_negative(&flat.degrees, &order);
        let mut before = 0i32;
        for (b, bl) in blocks.iter().enumerate() {
            if (op_degs[b] * before).rem_euclid(2) == 1 {
                negative = !negative;
            }
            before += bl.iter().map(|&v| flat.degrees[flat.dec_at[v]]).sum::<i32>();
        }
        let q = t.shape.quotient(blocks);
        let mut values = Vec::with_capacity(blocks.len());
        for (b, bl) in blocks.iter().enumerate() {
            let ds: Vec<usize> = bl.iter().map(|&v| t.decs[v]).collect();
            let v = op(b, &q.pieces[b], &ds)?;
            if v.is_zero() {
                return Ok(Vec::new());
            }
            values.push(v);
        }
        let base = if negative { -t.coeff.clone() } else { t.coeff.clone() };
        Ok(expand(&values)
            .into_iter()
            .map(|(decs, c)| RawTerm { shape: q.shape.clone(), decs, coeff: &base * c })
            .collect())
    }

    /// Applies a degree-`op_deg` vertex operator at every vertex and sums.
    pub fn vertexwise(&self, x: &FreeElement, op_deg: i32, op: &mut VertexOp) -> Result<FreeElement> {
        let mut out = FreeElement::zero();
        for t in Self::raw_terms(x) {
            for v in 0..t.shape.len() {
                for r in self.apply_at(&t, &[v], op_deg, op)? {
                    self.normalize_into(&r, &mut out);
                }
            }
        }
        Ok(out)
    }

    /// The differential induced by `d_E`: at vertex `i` the sign is
    /// `(−1)^{|e_1|+⋯+|e_{i−1}|}`. With `shift = 1` the decorations are read in `E[1]`
    /// and the shifted differential `−d` is used.
    pub fn free_differential(&self, x: &FreeElement) -> FreeElement {
        let s = sign(self.shift as i64);
        let bm = self.bm;
        let mut op = |p: &Shape, d: &[usize]| Ok(bm.differential(p.arity(0), d[0]).scaled(&s));
        self.vertexwise(x, 1, &mut op).expect("vertex operator does not fail")
    }

    /// Splits colour block `colour` into its two-block splittings (top block first).
    /// With `shifted`, decorations are read unshifted inside a shifted block and the
    /// sign includes `Σ_{v ∈ top} |e_v|` plus the Koszul sign of passing the earlier
    /// flat items.
    pub fn split_block(&self, t: &RawTerm, colour: u32, shifted: bool) -> Vec<RawTerm> {
        let k = t.shape.len();
        let colours = t.shape.colors.clone().unwrap_or_else(|| vec![0; k]);
        let shape = t.shape.clone().with_colors(Some(colours.clone()));
        let flat = self.flat(&shape, &t.decs);
        let block: Vec<usize> = (0..k).filter(|&v| colours[v] == colour).collect();
        let sub = shape.dag().induced(crate::digraph::mask_of(block.iter().copied()));
        let mut out = Vec::new();
        for split in sub.splittings(2) {
            let top: Vec<usize> = members(split[0]).into_iter().map(|i| block[i]).collect();
            let bottom: Vec<usize> = members(split[1]).into_iter().map(|i| block[i]).collect();
            // new vertex order: block replaced by top then bottom
            let mut order = Vec::with_capacity(k);
            let mut new_colours = Vec::with_capacity(k);
            let mut done = false;
            for v in 0..k {
                if colours[v] == colour {
                    if !done {
                        order.extend(&top);
                        new_colours.extend(std::iter::repeat_n(2 * colours[v], top.len()));
                        order.extend(&bottom);
                        new_colours.extend(std::iter::repeat_n(2 * colours[v] + 1, bottom.len()));
                        done = true;
                    }
                } else {
                    order.push(v);
                    new_colours.push(2 * colours[v]);
                }
            }
            // Koszul sign of the reordering inside the block
            let forder: Vec<usize> = order.iter().map(|&v| flat.dec_at[v]).collect();
            let degs: Vec<i32> = (0..flat.degrees.len()).map(|i| flat.degrees[i]).collect();
            let mut negative = perm::koszul_negative(&degs, &forder);
            if shifted {
                let before: i32 = flat.degrees[..flat.marker_at[colour as usize]].iter().sum();
                let top_deg: i32 = top.iter().map(|&v| flat.degrees[flat.dec_at[v]]).sum();
                negative ^= (before + top_deg).rem_euclid(2) == 1;
            }
            let r = Relabel {
                order: order.clone(),
                out_perm: t.shape.verts.iter().map(|v| perm::identity(v.outs.len())).collect(),
                in_perm: t.shape.verts.iter().map(|v| perm::identity(v.ins.len())).collect(),
            };
            let mut s = t.shape.relabeled(&r);
            s.colors = Some(renumber(&new_colours));
            let decs = order.iter().map(|&v| t.decs[v]).collect();
            let c = if negative { -t.coeff.clone() } else { t.coeff.clone() };
            out.push(RawTerm { shape: s, decs, coeff: c });
        }
        out
    }

    /// Cocomposition of an uncoloured element into 2-coloured terms (top block first).
    pub fn cocomposition(&self, x: &FreeElement, shifted: bool) -> FreeElement {
        let mut out = FreeElement::zero();
        for t in Self::raw_terms(x) {
            for r in self.split_block(&t, 0, shifted) {
                self.normalize_into(&r, &mut out);
            }
        }
        out
    }

    /// Applies the cocomposition to the top (`top = true`) or bottom block of each
    /// 2-coloured term.
    pub fn cocompose_side(&self, x: &FreeElement, top: bool, shifted: bool) -> FreeElement {
        let mut out = FreeElement::zero();
        for t in Self::raw_terms(x) {
            let Some(target) = outer_block(&t.shape, top) else { continue };
            for r in self.split_block(&t, target, shifted) {
                self.normalize_into(&r, &mut out);
            }
        }
        out
    }

    pub fn describe(&self, d: &Decorated) -> String {
        let decs: Vec<String> = (0..d.shape.len()).map(|v| self.bm.basis_id(d.shape.arity(v), d.decs[v]).to_string()).collect();
        format!("{} [{}]", d.shape.describe(), decs.join(" ⊗ "))
    }
}

/// The colour of the top (receiving) or bottom block of a 2-coloured shape.
pub fn outer_block(s: &Shape, top: bool) -> Option<u32> {
    let c = s.colors.as_ref()?;
    for (v, vs) in s.verts.iter().enumerate() {
        for e in &vs.outs {
            if let End::Edge { vertex, .. } = e {
                if c[*vertex as usize] != c[v] {
                    return Some(if top { c[*vertex as usize] } else { c[v] });
                }
            }
        }
    }
    None
}

fn renumber(c: &[u32]) -> Vec<u32> {
    let mut map = BTreeMap::new();
    c.iter()
        .map(|&x| {
            let next = map.len() as u32;
            *map.entry(x).or_insert(next)
        })
        .collect()
}

/// Multilinear expansion of a tensor product of vectors.
pub fn expand(vecs: &[LinComb<usize>]) -> Vec<(Vec<usize>, Scalar)> {
    let mut acc: Vec<(Vec<usize>, Scalar)> = vec![(Vec::with_capacity(vecs.len()), Scalar::one())];
    for v in vecs {
        let mut next = Vec::with_capacity(acc.len() * v.len());
        for (prefix, c) in &acc {
            for (&i, ci) in v.iter() {
                let mut p = prefix.clone();
                p.push(i);
                next.push((p, c * ci));
            }
        }
        acc = next;
    }
    acc
}

/// JSON form of a decorated graph: a graph plus per-vertex decorations, optionally
/// with the order in which each vertex's flags are matched to its decoration's
/// outputs and inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoratedJson {
    pub graph: GraphJson,
    pub decorations: Vec<VertexDecoration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDecoration {
    pub vertex: String,
    pub basis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ins: Option<Vec<String>>,
}

impl DecoratedJson {
    pub fn to_raw(&self, ctx: &FreeCtx) -> Result<RawTerm> {
        let g = self.graph.graph()?;
        let mut shape = g.to_shape();
        let mut decs = vec![usize::MAX; shape.len()];
        let mut r = Relabel::identity(&shape);
        for vd in &self.decorations {
            let v = g.vertex_index(&vd.vertex).ok_or_else(|| Error::Parse(format!("unknown vertex {:?}", vd.vertex)))?;
            let a = shape.arity(v);
            decs[v] = ctx.bm.index_of(a, &vd.basis).ok_or_else(|| Error::ArityMismatch {
                vertex: vd.vertex.clone(),
                detail: format!("{:?} is not a basis element of component ({},{})", vd.basis, a.0, a.1),
            })?;
            // block order of flags gives the default slot order
            let block = &g.raw.blocks[v];
            let outs: Vec<&str> =
                block.iter().filter(|&&f| g.dir[f] == crate::graph::Dir::Out).map(|&f| g.raw.flags[f].as_str()).collect();
            let ins: Vec<&str> =
                block.iter().filter(|&&f| g.dir[f] == crate::graph::Dir::In).map(|&f| g.raw.flags[f].as_str()).collect();
            if let Some(o) = &vd.outs {
                r.out_perm[v] = slot_order(&outs, o, &vd.vertex)?;
            }
            if let Some(i) = &vd.ins {
                r.in_perm[v] = slot_order(&ins, i, &vd.vertex)?;
            }
        }
        if let Some(v) = decs.iter().position(|&d| d == usize::MAX) {
            return Err(Error::ArityMismatch { vertex: g.raw.names[v].clone(), detail: "missing decoration".into() });
        }
        shape = shape.relabeled(&r);
        let coeff = match &self.coeff {
            Some(c) => parse_scalar(c)?,
            None => Scalar::one(),
        };
        Ok(RawTerm { shape, decs, coeff })
    }
}

fn slot_order(flags: &[&str], wanted: &[String], vertex: &str) -> Result<Vec<usize>> {
    if wanted.len() != flags.len() {
        return Err(Error::ArityMismatch { vertex: vertex.into(), detail: "flag bijection has the wrong size".into() });
    }
    let mut p = Vec::with_capacity(flags.len());
    for f in flags {
        let pos = wanted
            .iter()
            .position(|w| w == f)
            .ok_or_else(|| Error::ArityMismatch { vertex: vertex.into(), detail: format!("flag {f} missing from bijection") })?;
        p.push(pos);
    }
    Ok(p)
}

/// Serializable view of a free element.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub graph: String,
    pub decorations: Vec<String>,
    pub coeff: String,
}

pub fn element_json(ctx: &FreeCtx, x: &FreeElement) -> Vec<TermJson> {
    x.iter()
        .map(|(d, c)| TermJson {
            graph: d.shape.describe(),
            decorations: (0..d.shape.len()).map(|v| ctx.bm.basis_id(d.shape.arity(v), d.decs[v]).to_string()).collect(),
            coeff: format_scalar(c),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bimodule::{signed_permutation_map, Component};
    use crate::linalg::{int, GradedMap, GradedSpace};

    /// Components (m,n) with m,n ≤ 2 spanned by `x` (degree `dx`) and `y = d x`.
    fn bimodule(dx: i32) -> SigmaBimodule {
        let mut comps = BTreeMap::new();
        for m in 1..=2 {
            for n in 1..=2 {
                let v = GradedSpace::new(vec![("x".into(), dx), ("y".into(), dx + 1), ("z".into(), 1)]).unwrap();
                let d = GradedMap::from_entries(v.clone(), v.clone(), 1, &[(0, 1, int(1))]).unwrap();
                comps.insert((m, n), Component::trivial(m, n, v, d).unwrap());
            }
        }
        SigmaBimodule::new(comps)
    }

    fn chain3() -> Shape {
        Shape::from_edges(3, &[(1, 0), (2, 1)], &[(0, 0)], &[(2, 0)])
    }

    #[test]
    fn reordering_gives_koszul_sign() {
        let bm = bimodule(1);
        let ctx = FreeCtx::new(&bm, 0);
        let s = chain3();
        // vee with three odd decorations: swap two of them
        let vee = Shape::from_edges(3, &[(1, 0), (2, 0)], &[(0, 0)], &[(1, 0), (2, 1)]);
        let a = ctx.normalize_one(&RawTerm::new(vee.clone(), vec![0, 2, 0]));
        let r = vee.sorting_relabel(&[0, 2, 1]);
        let w = vee.relabeled(&r);
        let b = ctx.normalize_one(&RawTerm::new(w, vec![0, 0, 2]));
        assert_eq!(a, b.negated());
        let _ = s;
    }

    #[test]
    fn free_differential_squares_to_zero() {
        for dx in [0, 1] {
            let bm = bimodule(dx);
            for shift in [0, 1] {
                let ctx = FreeCtx::new(&bm, shift);
                let x = ctx.normalize_one(&RawTerm::new(chain3(), vec![0, 0, 0]));
                let dx1 = ctx.free_differential(&x);
                assert!(!dx1.is_zero());
                assert!(ctx.free_differential(&dx1).is_zero());
            }
        }
    }

    #[test]
    fn differential_sign_after_odd_decoration() {
        let bm = bimodule(0);
        let ctx = FreeCtx::new(&bm, 0);
        let s = Shape::from_edges(2, &[(1, 0)], &[(0, 0)], &[(1, 0)]);
        // e1 = z (odd, closed), e2 = x with d x = y
        let x = ctx.normalize_one(&RawTerm::new(s.clone(), vec![2, 0]));
        let expected = ctx.normalize_one(&RawTerm::new(s, vec![2, 1]).scaled(&int(-1)));
        assert_eq!(ctx.free_differential(&x), expected);
    }

    #[test]
    fn relabel_matches_action_on_corolla() {
        let v = GradedSpace::new(vec![("a".into(), 0), ("b".into(), 0)]).unwrap();
        let d = GradedMap::zero(v.clone(), v.clone(), 1);
        let swap = signed_permutation_map(&v, &[(1, int(1)), (0, int(1))]).unwrap();
        let mut comps = BTreeMap::new();
        comps.insert((2, 1), Component::new((2, 1), v, d, vec![swap], vec![]).unwrap());
        let bm = SigmaBimodule::new(comps);
        let ctx = FreeCtx::new(&bm, 0);
        let x = ctx.normalize_one(&RawTerm::new(Shape::corolla(2, 1), vec![0]));
        let y = ctx.relabel(&x, &[1, 0], &[0]).unwrap();
        let expected = ctx.normalize_one(&RawTerm::new(Shape::corolla(2, 1), vec![1]));
        assert_eq!(y, expected);
        assert_eq!(ctx.relabel(&y, &[1, 0], &[0]).unwrap(), x);
    }

    #[test]
    fn parallel_odd_symmetry_kills_term() {
        // two vertices joined by two parallel edges, decorated in a sign representation:
        // swapping the edges acts by −1, so the term vanishes in the coinvariants
        let v = GradedSpace::new(vec![("e".into(), 0)]).unwrap();
        let d = GradedMap::zero(v.clone(), v.clone(), 1);
        let neg = signed_permutation_map(&v, &[(0, int(-1))]).unwrap();
        let mut comps = BTreeMap::new();
        comps.insert((1, 2), Component::new((1, 2), v.clone(), d.clone(), vec![], vec![neg.clone()]).unwrap());
        comps.insert((2, 1), Component::trivial(2, 1, v, d).unwrap());
        let bm = SigmaBimodule::new(comps);
        let ctx = FreeCtx::new(&bm, 0);
        let s = Shape::from_edges(2, &[(1, 0), (1, 0)], &[(0, 0)], &[(1, 0)]);
        assert!(ctx.normalize_one(&RawTerm::new(s, vec![0, 0])).is_zero());
    }
}
