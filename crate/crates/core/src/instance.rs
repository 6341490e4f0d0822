//! Concrete properads: dg algebras (concentrated in biarity (1,1)), a genus-graded
//! commutative properad, and truncated free properads.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rand::Rng;

use crate::bimodule::{Arity, Component, SigmaBimodule};
use crate::error::{Error, Result};
use crate::free::{Decorated, FreeCtx, FreeElement, RawTerm};
use crate::linalg::{int, GradedMap, GradedSpace, LinComb, Scalar};
use crate::perm;
use crate::properad::Composition;
use crate::sample::rng;
use crate::shape::{enumerate_shapes, CatalogSpec, Quotient, Shape};

/// A dg algebra viewed as a properad concentrated in biarity (1,1).
#[derive(Clone, Debug)]
pub struct DgAlgebra {
    pub bm: SigmaBimodule,
    /// `mult[a][b] = a·b`
    pub mult: Vec<Vec<LinComb<usize>>>,
    pub unit: Option<usize>,
}

impl DgAlgebra {
    pub fn new(space: GradedSpace, d: GradedMap, mult: Vec<Vec<LinComb<usize>>>, unit: Option<usize>) -> Result<DgAlgebra> {
        let n = space.dim();
        if mult.len() != n || mult.iter().any(|r| r.len() != n) {
            return Err(Error::SizeMismatch(format!("multiplication table must be {n}×{n}")));
        }
        for (a, row) in mult.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                for (&c, _) in v.iter() {
                    if c >= n || space.degree(c) != space.degree(a) + space.degree(b) {
                        return Err(Error::Instance(format!("product {}·{} is not homogeneous", space.id(a), space.id(b))));
                    }
                }
            }
        }
        let mut components = BTreeMap::new();
        components.insert((1, 1), Component::trivial(1, 1, space, d)?);
        Ok(DgAlgebra { bm: SigmaBimodule::new(components), mult, unit })
    }

    pub fn space(&self) -> &GradedSpace {
        &self.bm.components[&(1, 1)].space
    }

    pub fn differential(&self) -> &GradedMap {
        &self.bm.components[&(1, 1)].d
    }

    pub fn product(&self, a: &LinComb<usize>, b: &LinComb<usize>) -> LinComb<usize> {
        let mut out = LinComb::zero();
        for (&i, x) in a.iter() {
            for (&j, y) in b.iter() {
                out.add_scaled(&self.mult[i][j], &(x * y));
            }
        }
        out
    }

    /// `End(V)` with basis `E_ij: v_j ↦ v_i`, product the composition of maps and
    /// differential `[d_V, −]`.
    pub fn endomorphisms(v: &GradedSpace, dv: &GradedMap) -> Result<DgAlgebra> {
        if dv.source() != v || dv.target() != v || dv.degree() != 1 {
            return Err(Error::SpaceMismatch("d_V must be a degree 1 endomorphism".into()));
        }
        let n = v.dim();
        let idx = |i: usize, j: usize| i * n + j;
        let basis: Vec<(String, i32)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (format!("E{}{}", i, j), v.degree(i) - v.degree(j)))
            .collect();
        let space = GradedSpace::new(basis)?;
        let mut cols = vec![LinComb::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let deg = v.degree(i) - v.degree(j);
                let col = &mut cols[idx(i, j)];
                // d_V ∘ E_ij = Σ_k d_ki E_kj
                for (&k, c) in dv.column(i).iter() {
                    col.add_term(idx(k, j), c.clone());
                }
                // −(−1)^{|E_ij|} E_ij ∘ d_V = ∓ Σ_l d_jl E_il
                let s = if deg.rem_euclid(2) == 0 { -Scalar::one() } else { Scalar::one() };
                for l in 0..n {
                    let c = dv.entry(j, l);
                    if !c.is_zero() {
                        col.add_term(idx(i, l), &s * c);
                    }
                }
            }
        }
        let d = GradedMap::new(space.clone(), space.clone(), 1, cols)?;
        let mut mult = vec![vec![LinComb::zero(); n * n]; n * n];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    mult[idx(i, j)][idx(j, l)] = LinComb::basis(idx(i, l));
                }
            }
        }
        DgAlgebra::new(space, d, mult, None)
    }

    /// A four-dimensional dga with a nonvanishing triple Massey product: `a, u` in
    /// degree 1, `b, w` in degree 2, `a·a = b`, `u·a = w`, `du = b`.
    pub fn massey() -> DgAlgebra {
        let space = GradedSpace::new(vec![("a".into(), 1), ("u".into(), 1), ("b".into(), 2), ("w".into(), 2)]).unwrap();
        let d = GradedMap::from_entries(space.clone(), space.clone(), 1, &[(1, 2, Scalar::one())]).unwrap();
        let mut mult = vec![vec![LinComb::zero(); 4]; 4];
        mult[0][0] = LinComb::basis(2);
        mult[1][0] = LinComb::basis(3);
        DgAlgebra::new(space, d, mult, None).unwrap()
    }

    /// A complex of the given degrees with a seeded differential, square-zero by
    /// construction: random acyclic pairs in a standard basis, conjugated by a random
    /// unipotent change of basis inside each degree.
    pub fn random_complex(degrees: &[i32], seed: u64) -> Result<(GradedSpace, GradedMap)> {
        let mut r = rng(seed);
        let n = degrees.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (degrees[i], i));
        let space = GradedSpace::new(order.iter().enumerate().map(|(k, &i)| (format!("v{k}"), degrees[i])).collect())?;
        // pairs x → y with |y| = |x| + 1, each basis vector used at most once
        let mut used = vec![false; n];
        let mut pairs = Vec::new();
        for x in 0..n {
            if used[x] || !r.gen_bool(0.7) {
                continue;
            }
            let cands: Vec<usize> = (0..n).filter(|&y| !used[y] && y != x && space.degree(y) == space.degree(x) + 1).collect();
            if cands.is_empty() {
                continue;
            }
            let y = cands[r.gen_range(0..cands.len())];
            used[x] = true;
            used[y] = true;
            pairs.push((x, y));
        }
        let d0 = GradedMap::from_entries(space.clone(), space.clone(), 1, &pairs.iter().map(|&(x, y)| (x, y, Scalar::one())).collect::<Vec<_>>())?;
        let mut p_entries = Vec::new();
        let mut q_entries = Vec::new();
        for deg in space.degrees() {
            let idx = space.indices_in_degree(deg);
            let k = idx.len();
            let mut m = vec![vec![Scalar::zero(); k]; k];
            for a in 0..k {
                m[a][a] = Scalar::one();
                for b in a + 1..k {
                    m[a][b] = int(r.gen_range(-2..=2));
                }
            }
            let inv = crate::linalg::dense::inverse(&m).expect("unipotent");
            for a in 0..k {
                for b in 0..k {
                    p_entries.push((idx[b], idx[a], m[a][b].clone()));
                    q_entries.push((idx[b], idx[a], inv[a][b].clone()));
                }
            }
        }
        let p = GradedMap::from_entries(space.clone(), space.clone(), 0, &p_entries)?;
        let q = GradedMap::from_entries(space.clone(), space.clone(), 0, &q_entries)?;
        let d = GradedMap::compose(&p, &GradedMap::compose(&d0, &q)?)?;
        Ok((space, d))
    }
}

impl Composition for DgAlgebra {
    fn bimodule(&self) -> &SigmaBimodule {
        &self.bm
    }

    fn compose(&self, _shape: &Shape, top: usize, bottom: usize) -> Result<LinComb<usize>> {
        Ok(self.mult[top][bottom].clone())
    }

    fn unit(&self) -> Option<usize> {
        self.unit
    }
}

/// `P(m,n) = ⊕_g A·t^g` for a graded-commutative dga `A`, over `m, n ≥ 1` with
/// `m + n + 2g − 2 ≤ max_chi`. Actions are trivial; composing along `k` edges
/// multiplies in `A` and adds `k − 1` to the genus. The bound is additive under
/// composition, so the truncation is a quotient properad.
#[derive(Clone, Debug)]
pub struct GenusCommutative {
    pub bm: SigmaBimodule,
    pub alg: DgAlgebra,
    pub max_chi: usize,
}

impl GenusCommutative {
    pub fn new(alg: DgAlgebra, max_chi: usize) -> Result<GenusCommutative> {
        let a = alg.space().clone();
        let dim = a.dim();
        let mut components = BTreeMap::new();
        for m in 1..=max_chi + 1 {
            for n in 1..=max_chi + 1 {
                if m + n - 2 > max_chi {
                    continue;
                }
                let genera = (max_chi - (m + n - 2)) / 2;
                let mut basis = Vec::new();
                let mut cols = Vec::new();
                for g in 0..=genera {
                    for i in 0..dim {
                        let id = if g == 0 { a.id(i).to_string() } else { format!("{}.t{}", a.id(i), g) };
                        basis.push((id, a.degree(i)));
                        cols.push(alg.differential().column(i).iter().map(|(&j, c)| (g * dim + j, c.clone())).collect());
                    }
                }
                let space = GradedSpace::new(basis)?;
                let d = GradedMap::new(space.clone(), space.clone(), 1, cols)?;
                components.insert((m, n), Component::trivial(m, n, space, d)?);
            }
        }
        Ok(GenusCommutative { bm: SigmaBimodule::new(components), alg, max_chi })
    }

    /// `A = Q[x, u]/(x⁴)` with `|x| = 2`, `|u| = 3`, `du = x²` (augmentation ideal).
    pub fn polynomial_algebra() -> DgAlgebra {
        let names = [("x", 2), ("x2", 4), ("x3", 6), ("u", 3), ("ux", 5), ("ux2", 7), ("ux3", 9)];
        let space = GradedSpace::new(names.iter().map(|(s, d)| (s.to_string(), *d)).collect()).unwrap();
        // monomial u^e x^p ↦ index
        let index = |e: usize, p: usize| -> Option<usize> {
            match (e, p) {
                (0, 1..=3) => Some(p - 1),
                (1, 0..=3) => Some(3 + p),
                _ => None,
            }
        };
        let mono = [(0, 1), (0, 2), (0, 3), (1, 0), (1, 1), (1, 2), (1, 3)];
        let mut mult = vec![vec![LinComb::zero(); 7]; 7];
        for (i, &(e1, p1)) in mono.iter().enumerate() {
            for (j, &(e2, p2)) in mono.iter().enumerate() {
                // u² = 0; x is even so no signs arise
                if e1 + e2 <= 1 && p1 + p2 <= 3 {
                    if let Some(k) = index(e1 + e2, p1 + p2) {
                        mult[i][j] = LinComb::basis(k);
                    }
                }
            }
        }
        // d(u xᵖ) = x^{p+2}
        let entries: Vec<_> = (0..=1).filter_map(|p| Some((index(1, p)?, index(0, p + 2)?, Scalar::one()))).collect();
        let d = GradedMap::from_entries(space.clone(), space.clone(), 1, &entries).unwrap();
        DgAlgebra::new(space, d, mult, None).unwrap()
    }

    fn split(&self, i: usize) -> (usize, usize) {
        let dim = self.alg.space().dim();
        (i / dim, i % dim)
    }

    /// Keeps graphs whose total `m + n − 2 + 2·b₁` is within the bound.
    pub fn graph_ok(&self, s: &Shape) -> bool {
        let b1 = s.edge_count() + 1 - s.len();
        s.m() + s.n() + 2 * b1 <= self.max_chi + 2
    }
}

impl Composition for GenusCommutative {
    fn bimodule(&self) -> &SigmaBimodule {
        &self.bm
    }

    fn compose(&self, shape: &Shape, top: usize, bottom: usize) -> Result<LinComb<usize>> {
        let arity = (shape.m(), shape.n());
        let Some(c) = self.bm.component(arity) else { return Ok(LinComb::zero()) };
        let k = shape.edge_count();
        let (g1, a) = self.split(top);
        let (g2, b) = self.split(bottom);
        let g = g1 + g2 + k - 1;
        let dim = self.alg.space().dim();
        if (g + 1) * dim > c.dim() {
            return Ok(LinComb::zero());
        }
        Ok(self.alg.mult[a][b].iter().map(|(&j, x)| (g * dim + j, x.clone())).collect())
    }
}

/// The free properad on a bimodule of generators, truncated to graphs with at most
/// `max_vertices` vertices (an ideal, so the truncation is a properad). Basis elements
/// are orbit representatives of decorated canonical graphs, scaled so that the
/// representative has coefficient 1 in the normal form.
#[derive(Clone, Debug)]
pub struct TruncatedFree {
    pub gens: SigmaBimodule,
    pub bm: SigmaBimodule,
    pub max_vertices: usize,
    reps: BTreeMap<Arity, Vec<(Decorated, Scalar)>>,
    index: HashMap<Decorated, usize>,
}

impl TruncatedFree {
    pub fn new(gens: SigmaBimodule, max_vertices: usize) -> Result<TruncatedFree> {
        let ctx = FreeCtx::new(&gens, 0);
        let max_m = gens.components.keys().map(|a| a.0).max().unwrap_or(1);
        let max_n = gens.components.keys().map(|a| a.1).max().unwrap_or(1);
        let spec = CatalogSpec::new(max_vertices, max_vertices * (max_m.max(1) - 1) + 1, max_vertices * (max_n.max(1) - 1) + 1);
        let shapes = enumerate_shapes(&spec, &|m, n| gens.dim((m, n)) > 0, &|_, _| true);
        let mut found: BTreeMap<Arity, Vec<(Decorated, Scalar, i32)>> = BTreeMap::new();
        let mut seen: std::collections::HashSet<Decorated> = std::collections::HashSet::new();
        for s in &shapes {
            let (all, _) = crate::sample::decorations(&gens, s, usize::MAX, 0);
            for decs in all {
                let key = Decorated { shape: s.clone(), decs: decs.clone() };
                if seen.contains(&key) {
                    continue;
                }
                let nf = ctx.normalize_one(&RawTerm::new(s.clone(), decs.clone()));
                for (k, _) in nf.iter() {
                    seen.insert(k.clone());
                }
                seen.insert(key);
                let Some((rep, c)) = nf.iter().next().map(|(k, c)| (k.clone(), c.clone())) else { continue };
                let deg = ctx.total_degree(&rep.shape, &rep.decs);
                found.entry((s.m(), s.n())).or_default().push((rep, c, deg));
            }
        }
        let mut reps = BTreeMap::new();
        let mut index = HashMap::new();
        let mut components = BTreeMap::new();
        for (arity, mut list) in found {
            list.sort_by(|a, b| (a.2, &a.0).cmp(&(b.2, &b.0)));
            let basis: Vec<(String, i32)> = list
                .iter()
                .map(|(k, _, deg)| {
                    let labels: Vec<&str> = k.decs.iter().enumerate().map(|(v, &i)| gens.basis_id(k.shape.arity(v), i)).collect();
                    (format!("[{}]{{{}}}", k.shape.describe(), labels.join(",")), *deg)
                })
                .collect();
            for (i, (k, _, _)) in list.iter().enumerate() {
                index.insert(k.clone(), i);
            }
            reps.insert(arity, list.iter().map(|(k, c, _)| (k.clone(), c.clone())).collect::<Vec<_>>());
            components.insert(arity, GradedSpace::new(basis)?);
        }
        let mut tf = TruncatedFree { gens, bm: SigmaBimodule::default(), max_vertices, reps, index };
        let mut bm_components = BTreeMap::new();
        for (arity, space) in components {
            let dim = space.dim();
            let mut dcols = Vec::with_capacity(dim);
            for i in 0..dim {
                let x = tf.element(arity, i);
                dcols.push(tf.coordinates(&FreeCtx::new(&tf.gens, 0).free_differential(&x)));
            }
            let d = GradedMap::new(space.clone(), space.clone(), 1, dcols)?;
            let gen_maps = |count: usize, outs: bool| -> Result<Vec<GradedMap>> {
                let ctx = FreeCtx::new(&tf.gens, 0);
                let mut out = Vec::new();
                for k in 0..count {
                    let sk = perm::transposition(count + 1, k);
                    let id = perm::identity(if outs { arity.1 } else { arity.0 });
                    let mut cols = Vec::with_capacity(dim);
                    for i in 0..dim {
                        let x = tf.element(arity, i);
                        let y = if outs { ctx.relabel(&x, &sk, &id)? } else { ctx.relabel(&x, &id, &sk)? };
                        cols.push(tf.coordinates(&y));
                    }
                    out.push(GradedMap::new(space.clone(), space.clone(), 0, cols)?);
                }
                Ok(out)
            };
            let left = gen_maps(arity.0.saturating_sub(1), true)?;
            let right = gen_maps(arity.1.saturating_sub(1), false)?;
            bm_components.insert(arity, Component::new(arity, space, d, left, right)?);
        }
        tf.bm = SigmaBimodule::new(bm_components);
        Ok(tf)
    }

    /// The generators used in the tests: `a ∈ (2,1)` and `b ∈ (1,2)` of degree 1,
    /// `u, w ∈ (1,1)` of degrees 0 and 1 with `du = w`.
    pub fn standard_generators() -> SigmaBimodule {
        let one = |id: &str, deg: i32| {
            let s = GradedSpace::new(vec![(id.to_string(), deg)]).unwrap();
            (s.clone(), GradedMap::zero(s.clone(), s, 1))
        };
        let mut components = BTreeMap::new();
        let (sa, da) = one("a", 1);
        components.insert((2, 1), Component::trivial(2, 1, sa, da).unwrap());
        let (sb, db) = one("b", 1);
        components.insert((1, 2), Component::trivial(1, 2, sb, db).unwrap());
        let su = GradedSpace::new(vec![("u".into(), 0), ("w".into(), 1)]).unwrap();
        let du = GradedMap::from_entries(su.clone(), su.clone(), 1, &[(0, 1, Scalar::one())]).unwrap();
        components.insert((1, 1), Component::trivial(1, 1, su, du).unwrap());
        SigmaBimodule::new(components)
    }

    /// The basis element `i` of component `arity` as a normalized free element.
    pub fn element(&self, arity: Arity, i: usize) -> FreeElement {
        let (k, c) = &self.reps[&arity][i];
        let ctx = FreeCtx::new(&self.gens, 0);
        let nf = ctx.normalize_one(&RawTerm::new(k.shape.clone(), k.decs.clone()));
        nf.scaled(&(Scalar::one() / c))
    }

    /// Basis coordinates of a normalized free element.
    pub fn coordinates(&self, x: &FreeElement) -> LinComb<usize> {
        x.iter().filter_map(|(k, c)| self.index.get(k).map(|&i| (i, c.clone()))).collect()
    }

    /// Basis index of the normal form of a single decorated graph, with its coefficient.
    pub fn basis_of(&self, t: &RawTerm) -> LinComb<usize> {
        self.coordinates(&FreeCtx::new(&self.gens, 0).normalize_one(t))
    }
}

impl Composition for TruncatedFree {
    fn bimodule(&self) -> &SigmaBimodule {
        &self.bm
    }

    fn compose(&self, shape: &Shape, top: usize, bottom: usize) -> Result<LinComb<usize>> {
        let (kt, ct) = &self.reps[&shape.arity(0)][top];
        let (kb, cb) = &self.reps[&shape.arity(1)][bottom];
        if kt.shape.len() + kb.shape.len() > self.max_vertices {
            return Ok(LinComb::zero());
        }
        let nt = kt.shape.len() as u32;
        let q = Quotient {
            shape: shape.clone(),
            pieces: vec![
                kt.shape.clone().with_ids((0..nt).collect()),
                kb.shape.clone().with_ids((nt..nt + kb.shape.len() as u32).collect()),
            ],
        };
        let g = Shape::regraft(&q);
        let mut decs = kt.decs.clone();
        decs.extend(kb.decs.iter().copied());
        let arity = (shape.m(), shape.n());
        if self.bm.dim(arity) == 0 {
            return Err(Error::Instance(format!("no component ({},{}) for a composite", arity.0, arity.1)));
        }
        let t = RawTerm { shape: g, decs, coeff: Scalar::one() / (ct * cb) };
        Ok(self.basis_of(&t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::properad::{associativity_holds, derivation_holds};
    use crate::sample::{catalog, decorations};

    fn laws(p: &dyn Composition, cap: usize, graph_ok: &(dyn Fn(&Shape) -> bool + Sync)) {
        let bm = p.bimodule();
        for s in catalog(bm, 2, 3, graph_ok) {
            let (decs, _) = decorations(bm, &s, cap, 7);
            for d in decs {
                let t = RawTerm::new(s.clone(), d.clone());
                if s.len() == 2 {
                    assert!(derivation_holds(p, &t).unwrap(), "derivation fails on {} {:?}", s.describe(), d);
                } else {
                    assert!(associativity_holds(p, &t).unwrap(), "associativity fails on {} {:?}", s.describe(), d);
                }
            }
        }
    }

    #[test]
    fn endomorphism_algebra_is_a_properad() {
        let (v, dv) = DgAlgebra::random_complex(&[0, 1, 0, 1, 2], 3).unwrap();
        let e = DgAlgebra::endomorphisms(&v, &dv).unwrap();
        laws(&e, 400, &|_| true);
    }

    #[test]
    fn endomorphism_product_is_matrix_product() {
        let (v, dv) = DgAlgebra::random_complex(&[0, 1, 1], 1).unwrap();
        let e = DgAlgebra::endomorphisms(&v, &dv).unwrap();
        // E_01 ∘ E_12 = E_02, E_12 ∘ E_01 = 0
        assert_eq!(e.mult[1][5], LinComb::basis(2));
        assert!(e.mult[5][1].is_zero());
    }

    #[test]
    fn massey_dga_laws() {
        laws(&DgAlgebra::massey(), 1000, &|_| true);
    }

    #[test]
    fn genus_commutative_laws() {
        let g = GenusCommutative::new(GenusCommutative::polynomial_algebra(), 2).unwrap();
        let ok = |s: &Shape| g.graph_ok(s);
        laws(&g, 300, &ok);
    }

    #[test]
    fn truncated_free_laws() {
        let f = TruncatedFree::new(TruncatedFree::standard_generators(), 3).unwrap();
        assert!(f.bm.dim((2, 1)) > 0);
        laws(&f, 10, &|s| s.m() <= 2 && s.n() <= 2);
    }
}
