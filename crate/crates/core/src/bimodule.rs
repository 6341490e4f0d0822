//! Σ-bimodules: per-arity chain complexes with symmetric-group actions on outputs
//! and inputs.
//!
//! Actions are written covariantly: `act(σ_out, σ_in)` relabels output `k` as output
//! `σ_out[k]` and input `k` as input `σ_in[k]`. Generator matrices are the actions of
//! the adjacent transpositions `s_k = (k k+1)`.

use std::collections::{BTreeMap, HashMap};

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_square_zero, format_scalar, parse_scalar, GradedMap, GradedSpace, LinComb, Scalar};
use crate::perm;

pub type Arity = (usize, usize);

/// Largest arity for which all permutation matrices are precomputed.
const PRECOMPUTE_UP_TO: usize = 4;

#[derive(Clone, Debug)]
pub struct Component {
    pub space: GradedSpace,
    pub d: GradedMap,
    /// Generators `s_0 … s_{m-2}` acting on outputs.
    pub left: Vec<GradedMap>,
    /// Generators `s_0 … s_{n-2}` acting on inputs.
    pub right: Vec<GradedMap>,
    left_trivial: bool,
    right_trivial: bool,
    left_table: HashMap<Vec<usize>, GradedMap>,
    right_table: HashMap<Vec<usize>, GradedMap>,
}

impl Component {
    /// A component with trivial actions.
    pub fn trivial(m: usize, n: usize, space: GradedSpace, d: GradedMap) -> Result<Component> {
        let left = (0..m.saturating_sub(1)).map(|_| GradedMap::identity(space.clone())).collect();
        let right = (0..n.saturating_sub(1)).map(|_| GradedMap::identity(space.clone())).collect();
        Component::new((m, n), space, d, left, right)
    }

    pub fn new(arity: Arity, space: GradedSpace, d: GradedMap, left: Vec<GradedMap>, right: Vec<GradedMap>) -> Result<Component> {
        let (m, n) = arity;
        let fail = |msg: String| Error::Bimodule(format!("component ({m},{n}): {msg}"));
        if d.source() != &space || d.target() != &space || d.degree() != 1 {
            return Err(fail("differential must be a degree 1 endomorphism".into()));
        }
        check_square_zero(&d).map_err(|e| match e {
            Error::NotSquareZero(b) => Error::NotSquareZero(format!("component ({m},{n}), basis element {b}")),
            other => other,
        })?;
        if left.len() != m.saturating_sub(1) || right.len() != n.saturating_sub(1) {
            return Err(fail(format!(
                "expected {} left and {} right generators, got {} and {}",
                m.saturating_sub(1),
                n.saturating_sub(1),
                left.len(),
                right.len()
            )));
        }
        let id = GradedMap::identity(space.clone());
        for (side, gens) in [("left", &left), ("right", &right)] {
            for (k, g) in gens.iter().enumerate() {
                if g.source() != &space || g.target() != &space || g.degree() != 0 {
                    return Err(fail(format!("{side} generator {k} must be a degree 0 endomorphism")));
                }
                if GradedMap::compose(g, g)? != id {
                    return Err(fail(format!("{side} generator {k} is not an involution")));
                }
                if GradedMap::compose(g, &d)? != GradedMap::compose(&d, g)? {
                    return Err(fail(format!("d is not equivariant for {side} generator {k}")));
                }
            }
            for k in 0..gens.len() {
                for j in k + 1..gens.len() {
                    let (a, b) = (&gens[k], &gens[j]);
                    if j == k + 1 {
                        let aba = GradedMap::compose(a, &GradedMap::compose(b, a)?)?;
                        let bab = GradedMap::compose(b, &GradedMap::compose(a, b)?)?;
                        if aba != bab {
                            return Err(fail(format!("{side} generators {k},{j} violate the braid relation")));
                        }
                    } else if GradedMap::compose(a, b)? != GradedMap::compose(b, a)? {
                        return Err(fail(format!("{side} generators {k},{j} do not commute")));
                    }
                }
            }
        }
        for (k, a) in left.iter().enumerate() {
            for (j, b) in right.iter().enumerate() {
                if GradedMap::compose(a, b)? != GradedMap::compose(b, a)? {
                    return Err(fail(format!("left generator {k} and right generator {j} do not commute")));
                }
            }
        }
        let left_trivial = left.iter().all(|g| *g == id);
        let right_trivial = right.iter().all(|g| *g == id);
        let mut c = Component {
            space,
            d,
            left,
            right,
            left_trivial,
            right_trivial,
            left_table: HashMap::new(),
            right_table: HashMap::new(),
        };
        if !left_trivial && m <= PRECOMPUTE_UP_TO {
            for p in perm::all_permutations(m) {
                let mat = c.perm_matrix(&c.left, &p)?;
                c.left_table.insert(p, mat);
            }
        }
        if !right_trivial && n <= PRECOMPUTE_UP_TO {
            for p in perm::all_permutations(n) {
                let mat = c.perm_matrix(&c.right, &p)?;
                c.right_table.insert(p, mat);
            }
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn has_trivial_actions(&self) -> bool {
        self.left_trivial && self.right_trivial
    }

    fn perm_matrix(&self, gens: &[GradedMap], p: &[usize]) -> Result<GradedMap> {
        // p = s_{k_1} ∘ … ∘ s_{k_r} acts as the product of generator matrices
        let mut acc = GradedMap::identity(self.space.clone());
        for k in perm::adjacent_decomposition(p) {
            acc = GradedMap::compose(&acc, &gens[k])?;
        }
        Ok(acc)
    }

    fn apply_perm(&self, gens: &[GradedMap], table: &HashMap<Vec<usize>, GradedMap>, p: &[usize], v: &LinComb<usize>) -> LinComb<usize> {
        if let Some(mat) = table.get(p) {
            return mat.apply(v);
        }
        let mut cur = v.clone();
        for k in perm::adjacent_decomposition(p).into_iter().rev() {
            cur = gens[k].apply(&cur);
        }
        cur
    }

    /// Relabels a vector: output `k` becomes `sigma_out[k]`, input `k` becomes `sigma_in[k]`.
    pub fn act_vec(&self, v: &LinComb<usize>, sigma_out: &[usize], sigma_in: &[usize]) -> LinComb<usize> {
        let mut cur = v.clone();
        if !self.left_trivial && !perm::is_identity(sigma_out) {
            cur = self.apply_perm(&self.left, &self.left_table, sigma_out, &cur);
        }
        if !self.right_trivial && !perm::is_identity(sigma_in) {
            cur = self.apply_perm(&self.right, &self.right_table, sigma_in, &cur);
        }
        cur
    }
}

/// A finite family of components `E(m,n)`; absent arities are zero.
#[derive(Clone, Debug, Default)]
pub struct SigmaBimodule {
    pub components: BTreeMap<Arity, Component>,
}

impl SigmaBimodule {
    pub fn new(components: BTreeMap<Arity, Component>) -> Self {
        SigmaBimodule { components }
    }

    pub fn component(&self, a: Arity) -> Option<&Component> {
        self.components.get(&a)
    }

    pub fn expect(&self, a: Arity) -> Result<&Component> {
        self.components.get(&a).ok_or_else(|| Error::OutOfRange(format!("no component of arity ({},{})", a.0, a.1)))
    }

    pub fn dim(&self, a: Arity) -> usize {
        self.components.get(&a).map_or(0, |c| c.dim())
    }

    pub fn degree(&self, a: Arity, i: usize) -> i32 {
        self.components[&a].space.degree(i)
    }

    pub fn basis_id(&self, a: Arity, i: usize) -> &str {
        self.components[&a].space.id(i)
    }

    pub fn index_of(&self, a: Arity, id: &str) -> Option<usize> {
        self.components.get(&a)?.space.index_of(id)
    }

    pub fn has_trivial_actions(&self) -> bool {
        self.components.values().all(|c| c.has_trivial_actions())
    }

    /// Action on a basis element.
    pub fn act(&self, a: Arity, i: usize, sigma_out: &[usize], sigma_in: &[usize]) -> LinComb<usize> {
        let v = LinComb::basis(i);
        match self.components.get(&a) {
            Some(c) => c.act_vec(&v, sigma_out, sigma_in),
            None => v,
        }
    }

    pub fn differential(&self, a: Arity, i: usize) -> LinComb<usize> {
        self.components.get(&a).map_or_else(LinComb::zero, |c| c.d.column(i).clone())
    }

    pub fn from_json(j: &BimoduleJson) -> Result<SigmaBimodule> {
        let mut components = BTreeMap::new();
        for (key, cj) in &j.components {
            let arity = parse_arity(key)?;
            let space = GradedSpace::new(cj.basis.clone())?;
            let d = map_from_entries(&space, 1, &cj.d)?;
            let gens = |list: &Option<Vec<Vec<Entry>>>, count: usize| -> Result<Vec<GradedMap>> {
                match list {
                    None => Ok((0..count).map(|_| GradedMap::identity(space.clone())).collect()),
                    Some(l) => l.iter().map(|e| map_from_entries(&space, 0, e)).collect(),
                }
            };
            let left = gens(&cj.left, arity.0.saturating_sub(1))?;
            let right = gens(&cj.right, arity.1.saturating_sub(1))?;
            components.insert(arity, Component::new(arity, space, d, left, right)?);
        }
        Ok(SigmaBimodule { components })
    }

    pub fn to_json(&self) -> BimoduleJson {
        let mut components = BTreeMap::new();
        for (&(m, n), c) in &self.components {
            components.insert(
                format!("{m},{n}"),
                ComponentJson {
                    basis: c.space.basis().to_vec(),
                    d: map_entries(&c.d),
                    left: if c.left_trivial { None } else { Some(c.left.iter().map(map_entries).collect()) },
                    right: if c.right_trivial { None } else { Some(c.right.iter().map(map_entries).collect()) },
                },
            );
        }
        BimoduleJson { components }
    }

    /// Degree in the shifted bimodule `E[shift]`.
    pub fn shifted_degree(&self, a: Arity, i: usize, shift: i32) -> i32 {
        self.degree(a, i) - shift
    }
}

/// `[source id, target id, coefficient]`.
pub type Entry = (String, String, String);

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComponentJson {
    pub basis: Vec<(String, i32)>,
    #[serde(default)]
    pub d: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<Vec<Vec<Entry>>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct BimoduleJson {
    pub components: BTreeMap<String, ComponentJson>,
}

pub fn parse_arity(key: &str) -> Result<Arity> {
    let bad = || Error::Parse(format!("arity key {key:?} is not of the form \"m,n\""));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn map_from_entries(space: &GradedSpace, degree: i32, entries: &[Entry]) -> Result<GradedMap> {
    map_between(space, space, degree, entries)
}

pub fn map_between(source: &GradedSpace, target: &GradedSpace, degree: i32, entries: &[Entry]) -> Result<GradedMap> {
    let mut es = Vec::with_capacity(entries.len());
    for (s, t, v) in entries {
        let si = source.index_of(s).ok_or_else(|| Error::Parse(format!("unknown basis id {s:?}")))?;
        let ti = target.index_of(t).ok_or_else(|| Error::Parse(format!("unknown basis id {t:?}")))?;
        es.push((si, ti, parse_scalar(v)?));
    }
    GradedMap::from_entries(source.clone(), target.clone(), degree, &es)
}

pub fn map_entries(m: &GradedMap) -> Vec<Entry> {
    let mut out = Vec::new();
    for (j, col) in m.columns().iter().enumerate() {
        for (&i, v) in col.iter() {
            out.push((m.source().id(j).to_string(), m.target().id(i).to_string(), format_scalar(v)));
        }
    }
    out
}

/// The swap matrix of a basis: `x_i ↔ x_{pairing[i]}` with the given signs.
pub fn signed_permutation_map(space: &GradedSpace, image: &[(usize, Scalar)]) -> Result<GradedMap> {
    let entries: Vec<_> = image.iter().enumerate().map(|(s, (t, c))| (s, *t, c.clone())).collect();
    GradedMap::from_entries(space.clone(), space.clone(), 0, &entries)
}

pub fn identity_entries(space: &GradedSpace) -> Vec<(usize, Scalar)> {
    (0..space.dim()).map(|i| (i, Scalar::one())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;

    fn space(ids: &[(&str, i32)]) -> GradedSpace {
        GradedSpace::new(ids.iter().map(|(s, d)| (s.to_string(), *d)).collect()).unwrap()
    }

    #[test]
    fn single_trivial_component() {
        let v = space(&[("e", 0)]);
        let c = Component::trivial(1, 1, v.clone(), GradedMap::zero(v.clone(), v, 1)).unwrap();
        assert!(c.has_trivial_actions());
    }

    #[test]
    fn swap_must_be_involution() {
        let v = space(&[("a", 0), ("b", 0)]);
        let d = GradedMap::zero(v.clone(), v.clone(), 1);
        let swap = signed_permutation_map(&v, &[(1, int(1)), (0, int(1))]).unwrap();
        assert!(Component::new((1, 2), v.clone(), d.clone(), vec![], vec![swap]).is_ok());
        let not_inv = signed_permutation_map(&v, &[(1, int(2)), (0, int(1))]).unwrap();
        let err = Component::new((1, 2), v, d, vec![], vec![not_inv]).unwrap_err();
        assert!(err.to_string().contains("involution"));
    }

    #[test]
    fn rejects_bad_differential() {
        let v = space(&[("x", 0), ("y", 1), ("z", 2)]);
        let d = GradedMap::from_entries(v.clone(), v.clone(), 1, &[(0, 1, int(1)), (1, 2, int(1))]).unwrap();
        let err = Component::trivial(1, 1, v, d).unwrap_err();
        assert!(matches!(&err, Error::NotSquareZero(s) if s.contains('x')), "{err}");
    }

    #[test]
    fn braid_relation_checked() {
        // sign representation on Σ_3 is fine; mixing a sign with a trivial generator breaks braid
        let v = space(&[("e", 0)]);
        let d = GradedMap::zero(v.clone(), v.clone(), 1);
        let neg = signed_permutation_map(&v, &[(0, int(-1))]).unwrap();
        let id = GradedMap::identity(v.clone());
        assert!(Component::new((3, 1), v.clone(), d.clone(), vec![neg.clone(), neg.clone()], vec![]).is_ok());
        assert!(Component::new((3, 1), v, d, vec![neg, id], vec![]).is_err());
    }

    #[test]
    fn permutation_action_is_a_group_action() {
        // Σ_3 permuting three basis vectors
        let v = space(&[("a", 0), ("b", 0), ("c", 0)]);
        let d = GradedMap::zero(v.clone(), v.clone(), 1);
        let s0 = signed_permutation_map(&v, &[(1, int(1)), (0, int(1)), (2, int(1))]).unwrap();
        let s1 = signed_permutation_map(&v, &[(0, int(1)), (2, int(1)), (1, int(1))]).unwrap();
        let c = Component::new((3, 1), v, d, vec![s0, s1], vec![]).unwrap();
        for p in perm::all_permutations(3) {
            for q in perm::all_permutations(3) {
                let pq = perm::compose(&p, &q);
                let x = LinComb::basis(0);
                let lhs = c.act_vec(&x, &pq, &[0]);
                let rhs = c.act_vec(&c.act_vec(&x, &q, &[0]), &p, &[0]);
                assert_eq!(lhs, rhs);
            }
        }
        // relabelling a ↦ position of output 0 follows the permutation
        assert_eq!(c.act_vec(&LinComb::basis(0), &[2, 0, 1], &[0]), LinComb::basis(2));
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{"components": {"1,2": {"basis": [["a",0],["b",0]], "d": [], "right": [[["a","b","1"],["b","a","1"]]]}}}"#;
        let j: BimoduleJson = serde_json::from_str(text).unwrap();
        let bm = SigmaBimodule::from_json(&j).unwrap();
        assert_eq!(bm.act((1, 2), 0, &[0], &[1, 0]), LinComb::basis(1));
        let back = SigmaBimodule::from_json(&bm.to_json()).unwrap();
        assert_eq!(back.to_json(), bm.to_json());
    }
}
