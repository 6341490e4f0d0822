//! Compositions, contraction maps, properads, the bar construction and sh structures.
//!
//! Conventions: in a two-vertex graph the *top* vertex receives the edges, and
//! `μ(e_top, e_bottom)` is the composition. On shifted decorations
//! `μ̃(s⁻¹p₁, s⁻¹p₂) = (−1)^{|p₁|} s⁻¹μ(p₁, p₂)` with `p₁` on top.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bimodule::{BimoduleJson, SigmaBimodule};
use crate::digraph::members;
use crate::error::{Error, Result};
use crate::free::{expand, FreeCtx, FreeElement, RawTerm, VertexDecoration};
use crate::graph::{Graph, GraphJson};
use crate::linalg::{format_scalar, parse_scalar, sign, LinComb, Scalar};
use crate::shape::{End, Relabel, Shape, VSlots};
use crate::trees::{enumerate_trees, Tree, TreeMode};

/// A degree-0 composition on a Σ-bimodule.
pub trait Composition: Send + Sync {
    fn bimodule(&self) -> &SigmaBimodule;

    /// `μ(top, bottom)` on a two-vertex shape whose vertex 0 receives every edge from
    /// vertex 1. The value lies in the component of the shape's total arity, with
    /// outputs and inputs indexed by leg label.
    fn compose(&self, shape: &Shape, top: usize, bottom: usize) -> Result<LinComb<usize>>;

    /// Basis index of a unit in component (1,1), if any.
    fn unit(&self) -> Option<usize> {
        None
    }
}

/// Whether vertex 0 of a two-vertex shape is the top (receiving) vertex.
pub fn top_is_first(piece: &Shape) -> bool {
    piece.verts[1].outs.iter().any(|e| matches!(e, End::Edge { vertex: 0, .. }))
}

fn swapped(piece: &Shape) -> Shape {
    let r = Relabel {
        order: vec![1, 0],
        out_perm: piece.verts.iter().map(|v| (0..v.outs.len()).collect()).collect(),
        in_perm: piece.verts.iter().map(|v| (0..v.ins.len()).collect()).collect(),
    };
    piece.relabeled(&r)
}

/// Composition of a decorated two-vertex graph in any presentation. With `shift = 1`
/// decorations are read in `P[1]` and the shifted composition `μ̃` is applied.
pub fn mu_piece(p: &dyn Composition, piece: &Shape, decs: &[usize], shift: i32) -> Result<LinComb<usize>> {
    if piece.len() != 2 {
        return Err(Error::OutOfRange(format!("composition needs 2 vertices, got {}", piece.len())));
    }
    let bm = p.bimodule();
    if bm.dim((piece.m(), piece.n())) == 0 {
        return Ok(LinComb::zero());
    }
    let (shape, top, bottom, mut negative) = if top_is_first(piece) {
        (piece.clone(), decs[0], decs[1], false)
    } else {
        let d0 = bm.degree(piece.arity(0), decs[0]) - shift;
        let d1 = bm.degree(piece.arity(1), decs[1]) - shift;
        (swapped(piece), decs[1], decs[0], (d0 * d1).rem_euclid(2) == 1)
    };
    if shift == 1 {
        negative ^= bm.degree(shape.arity(0), top).rem_euclid(2) == 1;
    }
    let v = p.compose(&shape, top, bottom)?;
    Ok(if negative { v.negated() } else { v })
}

/// Contracts the thick edge `from → to` (vertex positions): `μ_ε`.
pub fn mu_contract(ctx: &FreeCtx, p: &dyn Composition, t: &RawTerm, from: usize, to: usize) -> Result<Vec<RawTerm>> {
    let dag = t.shape.dag();
    if dag.succ[from] & (1 << to) == 0 {
        return Err(Error::NotAThickEdge(format!("v{} → v{}", t.shape.ids[from] + 1, t.shape.ids[to] + 1)));
    }
    if !dag.contraction_acyclic((1 << from) | (1 << to)) {
        return Err(Error::Inadmissible(format!("v{} → v{}", t.shape.ids[from] + 1, t.shape.ids[to] + 1)));
    }
    let shift = ctx.shift;
    ctx.apply_at(t, &[to, from], shift, &mut |piece, d| mu_piece(p, piece, d, shift))
}

/// Evaluates a contraction tree: every non-leaf child is contracted (recursively) to
/// one vertex by an operator of degree `child_deg` (`child` post-processes the value
/// of the child's subtree), then `node` is applied to the resulting graph.
pub fn eval_tree(
    ctx: &FreeCtx,
    term: &RawTerm,
    tree: &Tree,
    child_deg: i32,
    node: &mut dyn FnMut(&Shape, &[usize]) -> Result<LinComb<usize>>,
    child: &mut dyn FnMut(&Tree, &Shape, &[usize]) -> Result<LinComb<usize>>,
) -> Result<LinComb<usize>> {
    if tree.is_leaf() {
        return Ok(LinComb::single(term.decs[0], term.coeff.clone()));
    }
    let mut cur = vec![term.clone()];
    for c in tree.children() {
        if c.is_leaf() {
            continue;
        }
        let ids: Vec<u32> = c.leaves().into_iter().collect();
        let mut next = Vec::new();
        for r in &cur {
            let pos = r.positions(&ids)?;
            next.extend(ctx.apply_at(r, &pos, child_deg, &mut |p, d| child(c, p, d))?);
        }
        cur = next;
    }
    let mut acc = LinComb::zero();
    for r in cur {
        acc.add_scaled(&node(&r.shape, &r.decs)?, &r.coeff);
    }
    Ok(acc)
}

/// `μ_t`: contraction along a binary tree with the unshifted composition.
pub fn mu_tree(p: &dyn Composition, term: &RawTerm, tree: &Tree) -> Result<LinComb<usize>> {
    let ctx = FreeCtx::new(p.bimodule(), 0);
    if !tree.is_binary() {
        return Err(Error::Tree("μ_t needs a binary tree".into()));
    }
    fn go(ctx: &FreeCtx, p: &dyn Composition, term: &RawTerm, tree: &Tree) -> Result<LinComb<usize>> {
        eval_tree(ctx, term, tree, 0, &mut |s, d| mu_piece(p, s, d, 0), &mut |c, s, d| go(ctx, p, &RawTerm::new(s.clone(), d.to_vec()), c))
    }
    go(&ctx, p, term, tree)
}

/// A rule table on canonical two-vertex shapes.
#[derive(Clone, Debug)]
pub struct TableProperad {
    pub bm: SigmaBimodule,
    /// canonical shape → (vertex-0 decoration, vertex-1 decoration) → value
    pub rules: HashMap<Shape, HashMap<(usize, usize), LinComb<usize>>>,
    pub unit: Option<usize>,
}

impl TableProperad {
    /// Tabulates a composition on the given canonical two-vertex shapes.
    pub fn tabulate(p: &dyn Composition, shapes: &[Shape]) -> Result<TableProperad> {
        let bm = p.bimodule().clone();
        let mut rules = HashMap::new();
        for s in shapes {
            let mut table = HashMap::new();
            for a in 0..bm.dim(s.arity(0)) {
                for b in 0..bm.dim(s.arity(1)) {
                    let v = mu_piece(p, s, &[a, b], 0)?;
                    if !v.is_zero() {
                        table.insert((a, b), v);
                    }
                }
            }
            rules.insert(s.canonical().shape, table);
        }
        Ok(TableProperad { bm, rules, unit: p.unit() })
    }

    /// Value on a decorated two-vertex shape in canonical presentation order.
    fn lookup(&self, shape: &Shape, decs: &[usize]) -> Result<LinComb<usize>> {
        if self.bm.dim((shape.m(), shape.n())) == 0 {
            // nothing to land in
            return Ok(LinComb::zero());
        }
        let canon = shape.canonical_cached();
        let table = self.rules.get(&canon.shape).ok_or_else(|| Error::MissingRule(canon.shape.describe()))?;
        let ctx = FreeCtx::new(&self.bm, 0);
        let (neg, vecs) = ctx.transport(shape, decs, &canon.relabel, None);
        let mut out = LinComb::zero();
        for (d, c) in expand(&vecs) {
            if let Some(v) = table.get(&(d[0], d[1])) {
                out.add_scaled(v, &if neg { -c } else { c });
            }
        }
        Ok(out)
    }

    pub fn from_json(j: &TableJson) -> Result<TableProperad> {
        let bm = SigmaBimodule::from_json(&j.bimodule)?;
        let ctx = FreeCtx::new(&bm, 0);
        let mut rules: HashMap<Shape, HashMap<(usize, usize), LinComb<usize>>> = HashMap::new();
        for rs in &j.mu {
            let g = rs.shape.graph()?;
            let shape = g.to_shape();
            if shape.len() != 2 {
                return Err(Error::Parse("composition rules need two-vertex shapes".into()));
            }
            let canon = shape.canonical();
            let out_arity = (shape.m(), shape.n());
            let table = rules.entry(canon.shape.clone()).or_default();
            for (a, b, vals) in &rs.rules {
                let ia = bm.index_of(shape.arity(0), a).ok_or_else(|| Error::Parse(format!("unknown basis id {a:?}")))?;
                let ib = bm.index_of(shape.arity(1), b).ok_or_else(|| Error::Parse(format!("unknown basis id {b:?}")))?;
                let mut value = LinComb::zero();
                for (id, c) in vals {
                    let i = bm.index_of(out_arity, id).ok_or_else(|| Error::Parse(format!("unknown basis id {id:?}")))?;
                    value.add_term(i, parse_scalar(c)?);
                }
                let (neg, vecs) = ctx.transport(&shape, &[ia, ib], &canon.relabel, None);
                let ex = expand(&vecs);
                if ex.len() != 1 {
                    return Err(Error::Parse("rule shapes must be given in a monomial presentation".into()));
                }
                let (d, c) = &ex[0];
                let c = if neg { -c.clone() } else { c.clone() };
                table.insert((d[0], d[1]), value.scaled(&(Scalar::from_integer(1.into()) / c)));
            }
        }
        let unit = match &j.unit {
            Some(u) => Some(bm.index_of((1, 1), u).ok_or_else(|| Error::Parse(format!("unknown unit {u:?}")))?),
            None => None,
        };
        Ok(TableProperad { bm, rules, unit })
    }

    pub fn to_json(&self) -> TableJson {
        let mut shapes: Vec<&Shape> = self.rules.keys().collect();
        shapes.sort();
        let mu = shapes
            .into_iter()
            .map(|s| {
                let table = &self.rules[s];
                let mut keys: Vec<&(usize, usize)> = table.keys().collect();
                keys.sort();
                let out_arity = (s.m(), s.n());
                RuleSetJson {
                    shape: Graph::from_shape(s).to_json(),
                    rules: keys
                        .into_iter()
                        .map(|&(a, b)| {
                            (
                                self.bm.basis_id(s.arity(0), a).to_string(),
                                self.bm.basis_id(s.arity(1), b).to_string(),
                                table[&(a, b)]
                                    .iter()
                                    .map(|(&i, c)| (self.bm.basis_id(out_arity, i).to_string(), format_scalar(c)))
                                    .collect(),
                            )
                        })
                        .collect(),
                }
            })
            .collect();
        TableJson {
            bimodule: self.bm.to_json(),
            unit: self.unit.map(|u| self.bm.basis_id((1, 1), u).to_string()),
            mu,
        }
    }
}

impl Composition for TableProperad {
    fn bimodule(&self) -> &SigmaBimodule {
        &self.bm
    }

    fn compose(&self, shape: &Shape, top: usize, bottom: usize) -> Result<LinComb<usize>> {
        self.lookup(shape, &[top, bottom])
    }

    fn unit(&self) -> Option<usize> {
        self.unit
    }
}

/// `[e_top, e_bottom, [[out id, coeff], …]]` in the vertex order of `shape`.
pub type RuleJson = (String, String, Vec<(String, String)>);

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RuleSetJson {
    pub shape: GraphJson,
    pub rules: Vec<RuleJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TableJson {
    pub bimodule: BimoduleJson,
    #[serde(default)]
    pub unit: Option<String>,
    pub mu: Vec<RuleSetJson>,
}

/// A codifferential on the cofree coproperad of `E[1]`, given by its corolla
/// projections `μ_G` (degree 1 on `E[1]`-decorated graphs; corollas give the shifted
/// differential).
pub trait ShStructure: Send + Sync {
    fn bimodule(&self) -> &SigmaBimodule;
    fn mu(&self, piece: &Shape, decs: &[usize]) -> Result<LinComb<usize>>;
    /// Strict structures vanish on graphs with three or more vertices, and their
    /// transfer uses binary trees.
    fn is_strict(&self) -> bool {
        false
    }
}

/// A properad viewed as an sh properad: `μ_G` is `−d` on corollas and `μ̃` on
/// two-vertex graphs.
#[derive(Clone)]
pub struct StrictSh {
    pub p: Arc<dyn Composition>,
}

impl StrictSh {
    pub fn new(p: Arc<dyn Composition>) -> Self {
        StrictSh { p }
    }
}

impl ShStructure for StrictSh {
    fn bimodule(&self) -> &SigmaBimodule {
        self.p.bimodule()
    }

    fn mu(&self, piece: &Shape, decs: &[usize]) -> Result<LinComb<usize>> {
        match piece.len() {
            1 => Ok(self.p.bimodule().differential(piece.arity(0), decs[0]).negated()),
            2 => mu_piece(self.p.as_ref(), piece, decs, 1),
            _ => Ok(LinComb::zero()),
        }
    }

    fn is_strict(&self) -> bool {
        true
    }
}

/// Checks that every basis index in `v` has degree `expected` in component `arity`.
pub fn check_degree(bm: &SigmaBimodule, arity: (usize, usize), v: &LinComb<usize>, expected: i32, what: &str) -> Result<()> {
    for (&i, _) in v.iter() {
        let d = bm.degree(arity, i);
        if d != expected {
            return Err(Error::Context(format!("{what} produced degree {d}, expected {expected}")));
        }
    }
    Ok(())
}

/// Vertex positions of every admissible subgraph.
pub fn admissible_positions(s: &Shape) -> Vec<Vec<usize>> {
    s.dag().admissible_subsets().into_iter().map(members).collect()
}

/// The coderivation `Σ_H` (contract `H` to a vertex decorated by `μ_H`) on one term.
pub fn coderivation_terms(sh: &dyn ShStructure, t: &RawTerm) -> Result<Vec<RawTerm>> {
    let ctx = FreeCtx::new(sh.bimodule(), 1);
    let mut out = Vec::new();
    for h in admissible_positions(&t.shape) {
        if sh.is_strict() && h.len() > 2 {
            continue;
        }
        out.extend(ctx.apply_at(t, &h, 1, &mut |p, d| sh.mu(p, d))?);
    }
    Ok(out)
}

pub fn coderivation_apply(sh: &dyn ShStructure, x: &FreeElement) -> Result<FreeElement> {
    let ctx = FreeCtx::new(sh.bimodule(), 1);
    let mut out = FreeElement::zero();
    for t in FreeCtx::raw_terms(x) {
        for r in coderivation_terms(sh, &t)? {
            ctx.normalize_into(&r, &mut out);
        }
    }
    Ok(out)
}

/// The bar differential `d + ∂_μ` on `F̄^c(P[1])`.
pub fn bar_differential(p: Arc<dyn Composition>, x: &FreeElement) -> Result<FreeElement> {
    coderivation_apply(&StrictSh::new(p), x)
}

/// The corolla projection `Σ_{H⊆G} μ_{G/H} μ_H` on one decorated graph.
pub fn sh_defect(sh: &dyn ShStructure, t: &RawTerm) -> Result<LinComb<usize>> {
    let mut acc = LinComb::zero();
    for r in coderivation_terms(sh, t)? {
        if sh.is_strict() && r.shape.len() > 2 {
            continue;
        }
        acc.add_scaled(&sh.mu(&r.shape, &r.decs)?, &r.coeff);
    }
    Ok(acc)
}

/// The coderivation restricted to one colour block of a coloured element.
pub fn coderivation_on_block(sh: &dyn ShStructure, x: &FreeElement, top: bool) -> Result<FreeElement> {
    let ctx = FreeCtx::new(sh.bimodule(), 1);
    let mut out = FreeElement::zero();
    for t in FreeCtx::raw_terms(x) {
        let Some(colour) = crate::free::outer_block(&t.shape, top) else { continue };
        let cs = t.shape.colors.clone().unwrap();
        let block: Vec<usize> = (0..t.shape.len()).filter(|&v| cs[v] == colour).collect();
        let dag = t.shape.dag().induced(crate::digraph::mask_of(block.iter().copied()));
        for h in dag.admissible_subsets() {
            let sub: Vec<usize> = members(h).into_iter().map(|i| block[i]).collect();
            if sh.is_strict() && sub.len() > 2 {
                continue;
            }
            for r in ctx.apply_at(&t, &sub, 1, &mut |p, d| sh.mu(p, d))? {
                ctx.normalize_into(&r, &mut out);
            }
        }
    }
    Ok(out)
}

/// `Δ∂ − (∂,Id)Δ − (Id,∂)Δ` on an element of `F̄^c(E[1])`.
pub fn coderivation_law_defect(sh: &dyn ShStructure, x: &FreeElement) -> Result<FreeElement> {
    let ctx = FreeCtx::new(sh.bimodule(), 1);
    let lhs = ctx.cocomposition(&coderivation_apply(sh, x)?, false);
    let dx = ctx.cocomposition(x, false);
    let mut rhs = coderivation_on_block(sh, &dx, true)?;
    rhs.add_assign(&coderivation_on_block(sh, &dx, false)?);
    let mut diff = lhs;
    diff.add_scaled(&rhs, &sign(1));
    Ok(diff)
}

/// JSON witness for a decorated graph, loadable as a [`crate::free::DecoratedJson`].
pub fn witness(bm: &SigmaBimodule, shape: &Shape, decs: &[usize]) -> String {
    let g = Graph::from_shape(shape);
    let decorations: Vec<VertexDecoration> = (0..shape.len())
        .map(|v| VertexDecoration {
            vertex: g.raw.names[v].clone(),
            basis: bm.basis_id(shape.arity(v), decs[v]).to_string(),
            outs: None,
            ins: None,
        })
        .collect();
    serde_json::to_string(&crate::free::DecoratedJson { graph: g.to_json(), decorations, coeff: None }).unwrap_or_default()
}

/// The outcome of checking one identity on one graph shape.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ShapeCheck {
    pub graph: String,
    pub decorations: usize,
    pub exhaustive: bool,
    pub witness: Option<String>,
}

impl ShapeCheck {
    pub fn pass(&self) -> bool {
        self.witness.is_none()
    }
}

/// Runs `defect` on the given decorations of a shape; the first decoration with a
/// nonzero defect becomes the witness.
pub fn check_shape(
    bm: &SigmaBimodule,
    shape: &Shape,
    decs: &[Vec<usize>],
    exhaustive: bool,
    defect: &(dyn Fn(&RawTerm) -> Result<bool> + Sync),
) -> Result<ShapeCheck> {
    use rayon::prelude::*;
    let bad = decs
        .par_iter()
        .map(|d| defect(&RawTerm::new(shape.clone(), d.clone())).map(|ok| (!ok).then(|| d.clone())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(ShapeCheck {
        graph: shape.describe(),
        decorations: decs.len(),
        exhaustive,
        witness: bad.map(|d| witness(bm, shape, &d)),
    })
}

/// Associativity on one three-vertex shape: all binary trees give the same `μ_t`.
pub fn associativity_holds(p: &dyn Composition, t: &RawTerm) -> Result<bool> {
    let trees = enumerate_trees(&t.shape.dag(), TreeMode::Binary);
    let mut first: Option<LinComb<usize>> = None;
    for tree in &trees {
        let v = mu_tree(p, t, tree)?;
        match &first {
            None => first = Some(v),
            Some(f) if *f != v => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

/// `d μ = μ d_F` on one decorated two-vertex graph.
pub fn derivation_holds(p: &dyn Composition, t: &RawTerm) -> Result<bool> {
    let bm = p.bimodule();
    let arity = (t.shape.m(), t.shape.n());
    if bm.dim(arity) == 0 {
        return Ok(true);
    }
    let mu = mu_piece(p, &t.shape, &t.decs, 0)?;
    let lhs = bm.components[&arity].d.apply(&mu);
    let ctx = FreeCtx::new(bm, 0);
    let mut rhs = LinComb::zero();
    for v in 0..2 {
        let mut op = |s: &Shape, d: &[usize]| Ok(bm.differential(s.arity(0), d[0]));
        for r in ctx.apply_at(t, &[v], 1, &mut op)? {
            rhs.add_scaled(&mu_piece(p, &r.shape, &r.decs, 0)?, &r.coeff);
        }
    }
    Ok(lhs == rhs)
}

/// Unit laws: grafting the unit on any output or input of any basis element returns it.
pub fn unit_holds(p: &dyn Composition) -> Result<bool> {
    let Some(u) = p.unit() else { return Ok(true) };
    let bm = p.bimodule();
    for (&(m, n), c) in &bm.components {
        for e in 0..c.dim() {
            let expected = LinComb::basis(e);
            for k in 0..m {
                // unit on top of output k
                let mut outs: Vec<End> = (0..m as u32).map(End::Leg).collect();
                outs[k] = End::Edge { vertex: 0, slot: 0 };
                let s = Shape {
                    verts: vec![
                        VSlots { outs: vec![End::Leg(k as u32)], ins: vec![End::Edge { vertex: 1, slot: k as u32 }] },
                        VSlots { outs, ins: (0..n as u32).map(End::Leg).collect() },
                    ],
                    ids: vec![0, 1],
                    colors: None,
                };
                if p.compose(&s, u, e)? != expected {
                    return Ok(false);
                }
            }
            for k in 0..n {
                // unit below input k
                let mut ins: Vec<End> = (0..n as u32).map(End::Leg).collect();
                ins[k] = End::Edge { vertex: 1, slot: 0 };
                let s = Shape {
                    verts: vec![
                        VSlots { outs: (0..m as u32).map(End::Leg).collect(), ins },
                        VSlots { outs: vec![End::Edge { vertex: 0, slot: k as u32 }], ins: vec![End::Leg(k as u32)] },
                    ],
                    ids: vec![0, 1],
                    colors: None,
                };
                if p.compose(&s, e, u)? != expected {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Applies the unshifted composition to every term of a two-vertex element.
pub fn mu_element(p: &dyn Composition, x: &FreeElement) -> Result<LinComb<usize>> {
    let mut acc = LinComb::zero();
    for (d, c) in x.iter() {
        acc.add_scaled(&mu_piece(p, &d.shape, &d.decs, 0)?, c);
    }
    Ok(acc)
}
