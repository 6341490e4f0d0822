//! Homotopy transfer of (sh) properad structures along a deformation retraction.
//!
//! All maps act on shifted decorations: `d̃ = −d`, `h̃ = −h`, while `f` and `g` are
//! unchanged. `θ_t` has degree 1, `h̃θ_t` degree 0.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::One;

use crate::bimodule::{Arity, Component, SigmaBimodule};
use crate::digraph::members;
use crate::error::{Error, Result};
use crate::free::{Decorated, FreeCtx, RawTerm};
use crate::linalg::{equivariant_retraction, GradedMap, GradedSpace, LinComb};
use crate::perm;
use crate::properad::{admissible_positions, check_degree, eval_tree, ShStructure};
use crate::shape::Shape;
use crate::trees::{enumerate_trees, Tree, TreeEdge, TreeMode};

/// A source structure on `P`, a target bimodule `E` and maps `f: E → P`, `g: P → E`,
/// `h: P → P` with `fg − Id = dh + hd`, all equivariant, `f` and `g` chain maps.
pub struct TransferContext {
    pub source: Arc<dyn ShStructure>,
    pub target: SigmaBimodule,
    pub f: BTreeMap<Arity, GradedMap>,
    pub g: BTreeMap<Arity, GradedMap>,
    pub h: BTreeMap<Arity, GradedMap>,
}

fn generator_pairs(c: &Component) -> Vec<(&GradedMap, bool, usize)> {
    let mut out: Vec<_> = c.left.iter().enumerate().map(|(k, s)| (s, true, k)).collect();
    out.extend(c.right.iter().enumerate().map(|(k, s)| (s, false, k)));
    out
}

impl TransferContext {
    pub fn new(
        source: Arc<dyn ShStructure>,
        target: SigmaBimodule,
        f: BTreeMap<Arity, GradedMap>,
        g: BTreeMap<Arity, GradedMap>,
        h: BTreeMap<Arity, GradedMap>,
    ) -> Result<TransferContext> {
        let ctx = TransferContext { source, target, f, g, h };
        ctx.validate()?;
        Ok(ctx)
    }

    /// Checks degrees, spaces, the homotopy identity, the chain-map conditions and
    /// equivariance, per component.
    pub fn validate(&self) -> Result<()> {
        let p = self.source.bimodule();
        for a in self.target.components.keys() {
            if p.component(*a).is_none() {
                return Err(Error::Context(format!("target has component ({},{}) missing from the source", a.0, a.1)));
            }
        }
        for (&a, pc) in &p.components {
            let fail = |m: &str| Error::Context(format!("component ({},{}): {m}", a.0, a.1));
            let (f, g, h) = match (self.f.get(&a), self.g.get(&a), self.h.get(&a)) {
                (Some(f), Some(g), Some(h)) => (f, g, h),
                _ => return Err(fail("f, g or h missing")),
            };
            let ec = self.target.component(a);
            let espace = ec.map_or_else(GradedSpace::zero, |c| c.space.clone());
            let ed = ec.map_or_else(|| GradedMap::zero(espace.clone(), espace.clone(), 1), |c| c.d.clone());
            if f.source() != &espace || f.target() != &pc.space || f.degree() != 0 {
                return Err(fail("f must be a degree 0 map E → P"));
            }
            if g.source() != &pc.space || g.target() != &espace || g.degree() != 0 {
                return Err(fail("g must be a degree 0 map P → E"));
            }
            if h.source() != &pc.space || h.target() != &pc.space || h.degree() != -1 {
                return Err(fail("h must be a degree −1 endomorphism of P"));
            }
            crate::linalg::check_homotopy(&pc.d, f, g, h).map_err(|_| fail("fg − Id ≠ dh + hd"))?;
            if GradedMap::compose(&pc.d, f)? != GradedMap::compose(f, &ed)? {
                return Err(fail("f is not a chain map"));
            }
            if GradedMap::compose(&ed, g)? != GradedMap::compose(g, &pc.d)? {
                return Err(fail("g is not a chain map"));
            }
            if let Some(ec) = ec {
                for ((sp, left, k), (se, _, _)) in generator_pairs(pc).into_iter().zip(generator_pairs(ec)) {
                    let side = if left { "output" } else { "input" };
                    if GradedMap::compose(f, se)? != GradedMap::compose(sp, f)? {
                        return Err(fail(&format!("f is not equivariant for the {side} transposition s{k}")));
                    }
                    if GradedMap::compose(g, sp)? != GradedMap::compose(se, g)? {
                        return Err(fail(&format!("g is not equivariant for the {side} transposition s{k}")));
                    }
                }
            }
            for (sp, left, k) in generator_pairs(pc) {
                if GradedMap::compose(h, sp)? != GradedMap::compose(sp, h)? {
                    let side = if left { "output" } else { "input" };
                    return Err(fail(&format!("h is not equivariant for the {side} transposition s{k}")));
                }
            }
        }
        Ok(())
    }

    /// Builds an equivariant retraction of every component of the source. Acyclic
    /// pairs hitting degree `i` are contracted when `contract(i)` holds; contracting
    /// all of them retracts onto cohomology.
    pub fn retract(source: Arc<dyn ShStructure>, contract: &dyn Fn(i32) -> bool) -> Result<TransferContext> {
        let p = source.bimodule();
        let mut f = BTreeMap::new();
        let mut g = BTreeMap::new();
        let mut h = BTreeMap::new();
        let mut components = BTreeMap::new();
        for (&a, pc) in &p.components {
            let group = if pc.has_trivial_actions() { Vec::new() } else { action_group(pc, a)? };
            let r = equivariant_retraction(&pc.space, &pc.d, &group, contract)?;
            if !r.side.gf_identity {
                return Err(Error::Context(format!("component ({},{}): gf ≠ Id", a.0, a.1)));
            }
            // name reduced basis vectors after the source element they include as
            let names: Vec<(String, i32)> = (0..r.reduced.dim())
                .map(|k| {
                    let col = r.f.column(k);
                    let name = match col.iter().next() {
                        Some((&i, c)) if col.len() == 1 && c.is_one() => pc.space.id(i).to_string(),
                        _ => format!("w{k}"),
                    };
                    (name, r.reduced.degree(k))
                })
                .collect();
            let unique = names.iter().map(|n| &n.0).collect::<std::collections::BTreeSet<_>>().len() == names.len();
            let space = if unique { GradedSpace::new(names)? } else { r.reduced.clone() };
            let fm = r.f.with_spaces(space.clone(), pc.space.clone())?;
            let gm = r.g.with_spaces(pc.space.clone(), space.clone())?;
            let dm = r.reduced_d.with_spaces(space.clone(), space.clone())?;
            if space.dim() > 0 {
                let transport = |s: &GradedMap| GradedMap::compose(&gm, &GradedMap::compose(s, &fm)?);
                let left = pc.left.iter().map(transport).collect::<Result<Vec<_>>>()?;
                let right = pc.right.iter().map(transport).collect::<Result<Vec<_>>>()?;
                components.insert(a, Component::new(a, space.clone(), dm, left, right)?);
            }
            f.insert(a, fm);
            g.insert(a, gm);
            h.insert(a, r.h);
        }
        TransferContext::new(source, SigmaBimodule::new(components), f, g, h)
    }

    pub fn mode(&self) -> TreeMode {
        if self.source.is_strict() {
            TreeMode::Binary
        } else {
            TreeMode::General
        }
    }

    fn f_basis(&self, a: Arity, i: usize) -> LinComb<usize> {
        self.f[&a].column(i).clone()
    }

    fn g_apply(&self, a: Arity, v: &LinComb<usize>) -> LinComb<usize> {
        match self.g.get(&a) {
            Some(g) => g.apply(v),
            None => LinComb::zero(),
        }
    }

    fn h_tilde(&self, a: Arity, v: &LinComb<usize>) -> LinComb<usize> {
        match self.h.get(&a) {
            Some(h) => h.apply(v).negated(),
            None => LinComb::zero(),
        }
    }

    fn fg(&self, a: Arity, v: &LinComb<usize>) -> LinComb<usize> {
        match (self.f.get(&a), self.g.get(&a)) {
            (Some(f), Some(g)) => f.apply(&g.apply(v)),
            _ => LinComb::zero(),
        }
    }
}

/// Every permutation action of a component, as matrices.
fn action_group(c: &Component, a: Arity) -> Result<Vec<GradedMap>> {
    let mut out = Vec::new();
    for so in perm::all_permutations(a.0) {
        for si in perm::all_permutations(a.1) {
            let cols = (0..c.dim()).map(|i| c.act_vec(&LinComb::basis(i), &so, &si)).collect();
            out.push(GradedMap::new(c.space.clone(), c.space.clone(), 0, cols)?);
        }
    }
    Ok(out)
}

type Memo = RwLock<HashMap<Decorated, LinComb<usize>>>;

/// The transfer engine: `θ`, its variants, `∂_G`, `F_G` and the checks built on them.
/// Values of `θ_G` and `∂_G` are memoized on canonical decorated graphs.
pub struct Transfer {
    pub ctx: Arc<TransferContext>,
    theta_memo: Memo,
    partial_memo: Memo,
}

fn total_shifted(bm: &SigmaBimodule, shape: &Shape, decs: &[usize]) -> i32 {
    (0..shape.len()).map(|v| bm.degree(shape.arity(v), decs[v]) - 1).sum()
}

fn memo_get(m: &Memo, k: &Decorated) -> Option<LinComb<usize>> {
    m.read().unwrap().get(k).cloned()
}

impl Transfer {
    pub fn new(ctx: Arc<TransferContext>) -> Transfer {
        Transfer { ctx, theta_memo: RwLock::new(HashMap::new()), partial_memo: RwLock::new(HashMap::new()) }
    }

    fn pctx(&self) -> FreeCtx<'_> {
        FreeCtx::new(self.ctx.source.bimodule(), 1)
    }

    fn ectx(&self) -> FreeCtx<'_> {
        FreeCtx::new(&self.ctx.target, 1)
    }

    /// Blocks of every root split of a tree in `T_G` (binary) or `T̂_G` (general).
    fn root_splits(&self, shape: &Shape) -> Vec<Vec<Vec<usize>>> {
        let dag = shape.dag();
        let max_k = if self.ctx.source.is_strict() { 2 } else { shape.len() };
        (2..=max_k).flat_map(|k| dag.splittings(k)).map(|b| b.into_iter().map(members).collect()).collect()
    }

    /// `θ_G = Σ_t θ_t` on a `P[1]`-decorated graph with at least two vertices.
    pub fn theta_graph(&self, t: &RawTerm) -> Result<LinComb<usize>> {
        if t.shape.len() < 2 {
            return Err(Error::OutOfRange("θ needs at least two vertices".into()));
        }
        let nf = self.pctx().normalize_one(t);
        let mut acc = LinComb::zero();
        for (k, c) in nf.iter() {
            acc.add_scaled(&self.theta_canonical(k)?, c);
        }
        Ok(acc)
    }

    fn theta_canonical(&self, key: &Decorated) -> Result<LinComb<usize>> {
        if let Some(v) = memo_get(&self.theta_memo, key) {
            return Ok(v);
        }
        let ctx = self.pctx();
        let t = RawTerm::new(key.shape.clone(), key.decs.clone());
        let mut acc = LinComb::zero();
        for blocks in self.root_splits(&t.shape) {
            let zeros = vec![0; blocks.len()];
            let mut child = |_: usize, piece: &Shape, decs: &[usize]| -> Result<LinComb<usize>> {
                if piece.len() == 1 {
                    return Ok(LinComb::basis(decs[0]));
                }
                let v = self.theta_graph(&RawTerm::new(piece.clone(), decs.to_vec()))?;
                Ok(self.ctx.h_tilde((piece.m(), piece.n()), &v))
            };
            for r in ctx.contract_partition(&t, &blocks, &zeros, &mut child)? {
                acc.add_scaled(&self.ctx.source.mu(&r.shape, &r.decs)?, &r.coeff);
            }
        }
        let arity = (t.shape.m(), t.shape.n());
        check_degree(self.ctx.source.bimodule(), arity, &acc, total_shifted(self.ctx.source.bimodule(), &t.shape, &t.decs) + 2, "θ_G")?;
        self.theta_memo.write().unwrap().insert(key.clone(), acc.clone());
        Ok(acc)
    }

    /// `θ_t` for a single tree, with the identity at trivial subtrees and `h̃` on the
    /// nontrivial ones.
    pub fn theta_tree(&self, t: &RawTerm, tree: &Tree) -> Result<LinComb<usize>> {
        let ctx = self.pctx();
        let src = &self.ctx.source;
        eval_tree(&ctx, t, tree, 0, &mut |s, d| src.mu(s, d), &mut |c, p, d| {
            let v = self.theta_tree(&RawTerm::new(p.clone(), d.to_vec()), c)?;
            Ok(self.ctx.h_tilde((p.m(), p.n()), &v))
        })
    }

    /// `θ_{t,ε}` with `h̃` at the internal edge `ε` replaced by the identity
    /// (`circ = false`) or by `fg` (`circ = true`).
    pub fn theta_variant(&self, t: &RawTerm, tree: &Tree, e: &TreeEdge, circ: bool) -> Result<LinComb<usize>> {
        let (tr, tl) = tree.split_at_edge(e)?;
        let ids: Vec<u32> = e.iter().copied().collect();
        let pos = t.positions(&ids)?;
        let ctx = self.pctx();
        let mut acc = LinComb::zero();
        let mut op = |p: &Shape, d: &[usize]| -> Result<LinComb<usize>> {
            let v = self.theta_tree(&RawTerm::new(p.clone(), d.to_vec()), &tr)?;
            Ok(if circ { self.ctx.fg((p.m(), p.n()), &v) } else { v })
        };
        for r in ctx.apply_at(t, &pos, 1, &mut op)? {
            acc.add_assign(&self.theta_tree(&r, &tl)?);
        }
        Ok(acc)
    }

    fn trees(&self, s: &Shape) -> Vec<Tree> {
        enumerate_trees(&s.dag(), self.ctx.mode())
    }

    /// `Σ_{t ∈ T_G} Σ_{ε ∈ e(t)} θ^{Id}_{t,ε}`, which vanishes for strict sources.
    pub fn tree_edge_sum(&self, t: &RawTerm) -> Result<LinComb<usize>> {
        let mut acc = LinComb::zero();
        for tree in self.trees(&t.shape) {
            for e in tree.internal_edges() {
                acc.add_assign(&self.theta_variant(t, &tree, &e, false)?);
            }
        }
        Ok(acc)
    }

    /// `d̃θ_G + θ_G d̃_F + Σ_{t,ε} θ^∘_{t,ε}`, which vanishes for strict sources.
    pub fn theta_differential_defect(&self, t: &RawTerm) -> Result<LinComb<usize>> {
        let bm = self.ctx.source.bimodule();
        let arity = (t.shape.m(), t.shape.n());
        let theta = self.theta_graph(t)?;
        let mut acc = match bm.component(arity) {
            Some(c) => c.d.apply(&theta).negated(),
            None => LinComb::zero(),
        };
        let ctx = self.pctx();
        for v in 0..t.shape.len() {
            let mut dt = |p: &Shape, d: &[usize]| Ok(bm.differential(p.arity(0), d[0]).negated());
            for r in ctx.apply_at(t, &[v], 1, &mut dt)? {
                acc.add_assign(&self.theta_graph(&r)?);
            }
        }
        for tree in self.trees(&t.shape) {
            for e in tree.internal_edges() {
                acc.add_assign(&self.theta_variant(t, &tree, &e, true)?);
            }
        }
        Ok(acc)
    }

    /// `f^{⊗k}`: an `E[1]`-decorated graph as a combination of `P[1]`-decorated ones.
    pub fn f_decorate(&self, y: &RawTerm) -> Result<Vec<RawTerm>> {
        let singletons: Vec<Vec<usize>> = (0..y.shape.len()).map(|v| vec![v]).collect();
        let zeros = vec![0; singletons.len()];
        self.ectx().contract_partition(y, &singletons, &zeros, &mut |_, p, d| Ok(self.ctx.f_basis(p.arity(0), d[0])))
    }

    /// `∂_G = gθ_G f^{⊗k}`, and the shifted differential `−d_E` on corollas.
    pub fn partial(&self, y: &RawTerm) -> Result<LinComb<usize>> {
        if y.shape.len() == 1 {
            return Ok(self.ctx.target.differential(y.shape.arity(0), y.decs[0]).negated());
        }
        let nf = self.ectx().normalize_one(y);
        let mut acc = LinComb::zero();
        for (k, c) in nf.iter() {
            acc.add_scaled(&self.partial_canonical(k)?, c);
        }
        Ok(acc)
    }

    fn partial_canonical(&self, key: &Decorated) -> Result<LinComb<usize>> {
        if let Some(v) = memo_get(&self.partial_memo, key) {
            return Ok(v);
        }
        let y = RawTerm::new(key.shape.clone(), key.decs.clone());
        let arity = (y.shape.m(), y.shape.n());
        let mut theta = LinComb::zero();
        for x in self.f_decorate(&y)? {
            theta.add_assign(&self.theta_graph(&x)?);
        }
        let out = self.ctx.g_apply(arity, &theta);
        if self.ctx.target.dim(arity) > 0 {
            check_degree(&self.ctx.target, arity, &out, total_shifted(&self.ctx.target, &y.shape, &y.decs) + 2, "∂_G")?;
        }
        self.partial_memo.write().unwrap().insert(key.clone(), out.clone());
        Ok(out)
    }

    /// `F_G = h̃θ_G f^{⊗k}` (level one), and `f` on corollas.
    pub fn f_level1(&self, y: &RawTerm) -> Result<LinComb<usize>> {
        let arity = (y.shape.m(), y.shape.n());
        // f_decorate carries the coefficient of y; the corolla branch must add it
        let out = if y.shape.len() == 1 {
            self.ctx.f_basis(arity, y.decs[0]).scaled(&y.coeff)
        } else {
            let mut theta = LinComb::zero();
            for x in self.f_decorate(&y.clone())? {
                theta.add_assign(&self.theta_graph(&x)?);
            }
            self.ctx.h_tilde(arity, &theta)
        };
        if self.ctx.source.bimodule().dim(arity) > 0 {
            let expected = total_shifted(&self.ctx.target, &y.shape, &y.decs) + 1;
            check_degree(self.ctx.source.bimodule(), arity, &out, expected, "F_G")?;
        }
        Ok(out)
    }

    /// `F_k` on an `E[1]`-decorated graph: the sum over splittings into `k` blocks of
    /// the level-one maps on every block.
    pub fn f_level(&self, y: &RawTerm, k: usize) -> Result<Vec<RawTerm>> {
        if k == 0 || k > y.shape.len() {
            return Err(Error::OutOfRange(format!("level {k} for a graph with {} vertices", y.shape.len())));
        }
        let ctx = self.ectx();
        let mut out = Vec::new();
        for blocks in y.shape.dag().splittings(k) {
            let blocks: Vec<Vec<usize>> = blocks.into_iter().map(members).collect();
            let zeros = vec![0; blocks.len()];
            let mut op = |_: usize, p: &Shape, d: &[usize]| self.f_level1(&RawTerm::new(p.clone(), d.to_vec()));
            out.extend(ctx.contract_partition(y, &blocks, &zeros, &mut op)?);
        }
        Ok(out)
    }

    /// `(F∂_E)_1 − (∂_P F)_1` on an `E[1]`-decorated graph.
    pub fn morphism_defect(&self, y: &RawTerm) -> Result<LinComb<usize>> {
        let ctx = self.ectx();
        let mut acc = LinComb::zero();
        for h in admissible_positions(&y.shape) {
            for r in ctx.apply_at(y, &h, 1, &mut |p, d| self.partial(&RawTerm::new(p.clone(), d.to_vec())))? {
                acc.add_assign(&self.f_level1(&r)?);
            }
        }
        let max_k = if self.ctx.source.is_strict() { 2.min(y.shape.len()) } else { y.shape.len() };
        for k in 1..=max_k {
            for r in self.f_level(y, k)? {
                acc.add_scaled(&self.ctx.source.mu(&r.shape, &r.decs)?, &-r.coeff.clone());
            }
        }
        Ok(acc)
    }
}

/// The transferred sh structure `{∂_G}` on `E`.
pub struct TransferredSh {
    pub engine: Arc<Transfer>,
}

impl TransferredSh {
    pub fn new(ctx: Arc<TransferContext>) -> TransferredSh {
        TransferredSh { engine: Arc::new(Transfer::new(ctx)) }
    }
}

impl ShStructure for TransferredSh {
    fn bimodule(&self) -> &SigmaBimodule {
        &self.engine.ctx.target
    }

    fn mu(&self, piece: &Shape, decs: &[usize]) -> Result<LinComb<usize>> {
        self.engine.partial(&RawTerm::new(piece.clone(), decs.to_vec()))
    }
}

/// The linear chain `v_1 ← v_2 ← … ← v_n` of biarity-(1,1) vertices, `v_1` on top.
pub fn chain(n: usize) -> Shape {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i, i - 1)).collect();
    Shape::from_edges(n, &edges, &[(0, 0)], &[(n - 1, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::DgAlgebra;
    use crate::merkulov::Merkulov;
    use crate::properad::{sh_defect, StrictSh};
    use crate::sample::decorations;

    fn massey_ctx() -> (Arc<DgAlgebra>, Arc<TransferContext>) {
        let alg = Arc::new(DgAlgebra::massey());
        let ctx = TransferContext::retract(Arc::new(StrictSh::new(alg.clone())), &|_| true).unwrap();
        (alg, Arc::new(ctx))
    }

    #[test]
    fn massey_retraction_has_nonzero_homotopy() {
        let (_, ctx) = massey_ctx();
        assert_eq!(ctx.target.dim((1, 1)), 2);
        assert!(!ctx.h[&(1, 1)].is_zero());
    }

    #[test]
    fn tree_sum_and_theta_differential_on_chains() {
        let (alg, ctx) = massey_ctx();
        let tr = Transfer::new(ctx);
        for n in 2..=4 {
            let s = chain(n);
            let (decs, _) = decorations(&alg.bm, &s, 300, 1);
            for d in decs {
                let t = RawTerm::new(s.clone(), d);
                assert!(tr.tree_edge_sum(&t).unwrap().is_zero());
                assert!(tr.theta_differential_defect(&t).unwrap().is_zero(), "theta differential {:?}", t.decs);
            }
        }
    }

    #[test]
    fn transferred_structure_squares_to_zero_and_morphism_holds() {
        let (_, ctx) = massey_ctx();
        let sh = TransferredSh::new(ctx.clone());
        for n in 1..=5 {
            let s = chain(n);
            let (decs, _) = decorations(&ctx.target, &s, 1000, 1);
            for d in decs {
                let y = RawTerm::new(s.clone(), d);
                assert!(sh_defect(&sh, &y).unwrap().is_zero(), "square {:?}", y.decs);
                assert!(sh.engine.morphism_defect(&y).unwrap().is_zero(), "morphism {:?}", y.decs);
            }
        }
    }

    #[test]
    fn merkulov_agrees() {
        let (alg, ctx) = massey_ctx();
        let sh = TransferredSh::new(ctx.clone());
        let m = Merkulov::new(&alg, &ctx.f[&(1, 1)], &ctx.g[&(1, 1)], &ctx.h[&(1, 1)]).unwrap();
        let mut nonzero = 0;
        for n in 2..=5 {
            let s = chain(n);
            let (decs, _) = decorations(&ctx.target, &s, 1000, 1);
            for d in decs {
                let a = sh.mu(&s, &d).unwrap();
                let b = m.product(&d);
                if !b.is_zero() && n >= 3 {
                    nonzero += 1;
                }
                assert_eq!(a, b, "n = {n}, {:?}", d);
            }
        }
        assert!(nonzero > 0);
    }

    #[test]
    fn genus_instance_two_stage() {
        use crate::instance::GenusCommutative;
        use crate::sample::catalog;
        let gc = Arc::new(GenusCommutative::new(GenusCommutative::polynomial_algebra(), 2).unwrap());
        let ok = |s: &Shape| gc.graph_ok(s);
        let full = Arc::new(TransferContext::retract(Arc::new(StrictSh::new(gc.clone())), &|_| true).unwrap());
        let t0 = std::time::Instant::now();
        let sh = TransferredSh::new(full.clone());
        let mut checked = 0;
        for s in catalog(&full.target, 1, 3, &ok) {
            let (decs, _) = decorations(&full.target, &s, 20, 3);
            for d in decs {
                let y = RawTerm::new(s.clone(), d);
                assert!(sh_defect(&sh, &y).unwrap().is_zero(), "square {}", s.describe());
                assert!(sh.engine.morphism_defect(&y).unwrap().is_zero(), "morphism {}", s.describe());
                checked += 1;
            }
        }
        eprintln!("first stage {checked} in {:?}", t0.elapsed());
        let partial = Arc::new(TransferContext::retract(Arc::new(StrictSh::new(gc.clone())), &|i| i == 6).unwrap());
        let e1 = Arc::new(TransferredSh::new(partial.clone()));
        let second = Arc::new(TransferContext::retract(e1.clone(), &|_| true).unwrap());
        let sh2 = TransferredSh::new(second.clone());
        let t0 = std::time::Instant::now();
        let mut checked = 0;
        for s in catalog(&partial.target, 1, 3, &ok) {
            let (decs, _) = decorations(&partial.target, &s, 10, 3);
            for d in decs {
                let y = RawTerm::new(s.clone(), d);
                assert!(sh_defect(e1.as_ref(), &y).unwrap().is_zero(), "e1 square {}", s.describe());
            }
        }
        for s in catalog(&second.target, 1, 3, &ok) {
            let (decs, _) = decorations(&second.target, &s, 10, 3);
            for d in decs {
                let y = RawTerm::new(s.clone(), d);
                assert!(sh_defect(&sh2, &y).unwrap().is_zero(), "second square {}", s.describe());
                assert!(sh2.engine.morphism_defect(&y).unwrap().is_zero(), "second morphism {}", s.describe());
                checked += 1;
            }
        }
        eprintln!("second stage {checked} in {:?}", t0.elapsed());
    }

    #[test]
    fn morphism_holds_when_target_differential_is_nonzero() {
        let (v, dv) = DgAlgebra::random_complex(&[0, 1, 0, 1], 2).unwrap();
        let alg = Arc::new(DgAlgebra::endomorphisms(&v, &dv).unwrap());
        let ctx = Arc::new(TransferContext::retract(Arc::new(StrictSh::new(alg)), &|i| i == 1).unwrap());
        assert!(!ctx.target.components[&(1, 1)].d.is_zero());
        let sh = TransferredSh::new(ctx.clone());
        for n in 1..=3 {
            let s = chain(n);
            let (decs, _) = decorations(&ctx.target, &s, 200, 5);
            for d in decs {
                let y = RawTerm::new(s.clone(), d);
                assert!(sh.engine.morphism_defect(&y).unwrap().is_zero(), "morphism {:?}", y.decs);
            }
        }
    }
}
