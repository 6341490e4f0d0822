//! Exact graded linear algebra over the rationals: graded spaces with named bases,
//! homogeneous linear maps, shifts, and deformation retractions onto cohomology.

pub mod dense;
mod scalar;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use scalar::{format_scalar, int, parse_scalar, ratio, sign, LinComb, Scalar};

use crate::error::{Error, Result};
use dense::{Mat, Vector};

/// A finite-dimensional graded vector space with an ordered, named basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GradedSpace {
    basis: Vec<(String, i32)>,
}

impl GradedSpace {
    pub fn new(basis: Vec<(String, i32)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (id, _) in &basis {
            if !seen.insert(id.clone()) {
                return Err(Error::SpaceMismatch(format!("duplicate basis id {id:?}")));
            }
        }
        Ok(Self { basis })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.basis[i].1
    }

    pub fn id(&self, i: usize) -> &str {
        &self.basis[i].0
    }

    pub fn basis(&self) -> &[(String, i32)] {
        &self.basis
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.basis.iter().position(|(b, _)| b == id)
    }

    pub fn degrees(&self) -> BTreeSet<i32> {
        self.basis.iter().map(|(_, d)| *d).collect()
    }

    pub fn indices_in_degree(&self, d: i32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degree(i) == d).collect()
    }
}

/// Shifts a graded space by `j`: an element of degree `i` in `v` has degree `i - j`
/// in `v[j]`.
pub fn shift_space(v: &GradedSpace, j: i32) -> GradedSpace {
    GradedSpace { basis: v.basis.iter().map(|(id, d)| (id.clone(), d - j)).collect() }
}

/// A homogeneous linear map, stored as sparse columns (one per source basis element).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    source: GradedSpace,
    target: GradedSpace,
    degree: i32,
    columns: Vec<LinComb<usize>>,
}

impl GradedMap {
    pub fn new(
        source: GradedSpace,
        target: GradedSpace,
        degree: i32,
        columns: Vec<LinComb<usize>>,
    ) -> Result<Self> {
        if columns.len() != source.dim() {
            return Err(Error::SpaceMismatch(format!(
                "{} columns for a source of dimension {}",
                columns.len(),
                source.dim()
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            for (&i, _) in col.iter() {
                if i >= target.dim() {
                    return Err(Error::SpaceMismatch(format!("row {i} out of range")));
                }
                if target.degree(i) != source.degree(j) + degree {
                    return Err(Error::SpaceMismatch(format!(
                        "entry {} -> {} does not have degree {degree}",
                        source.id(j),
                        target.id(i)
                    )));
                }
            }
        }
        Ok(Self { source, target, degree, columns })
    }

    /// Builds from `(source index, target index, value)` triples.
    pub fn from_entries(
        source: GradedSpace,
        target: GradedSpace,
        degree: i32,
        entries: &[(usize, usize, Scalar)],
    ) -> Result<Self> {
        let mut columns = vec![LinComb::zero(); source.dim()];
        for (s, t, v) in entries {
            if *s >= source.dim() {
                return Err(Error::SpaceMismatch(format!("column {s} out of range")));
            }
            columns[*s].add_term(*t, v.clone());
        }
        Self::new(source, target, degree, columns)
    }

    pub fn zero(source: GradedSpace, target: GradedSpace, degree: i32) -> Self {
        let columns = vec![LinComb::zero(); source.dim()];
        Self { source, target, degree, columns }
    }

    pub fn identity(space: GradedSpace) -> Self {
        let columns = (0..space.dim()).map(LinComb::basis).collect();
        Self { source: space.clone(), target: space, degree: 0, columns }
    }

    pub fn source(&self) -> &GradedSpace {
        &self.source
    }

    pub fn target(&self) -> &GradedSpace {
        &self.target
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn column(&self, j: usize) -> &LinComb<usize> {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[LinComb<usize>] {
        &self.columns
    }

    pub fn entry(&self, target: usize, source: usize) -> Scalar {
        self.columns[source].coeff(&target)
    }

    pub fn apply(&self, v: &LinComb<usize>) -> LinComb<usize> {
        v.map_linear(|&j| self.columns[j].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(LinComb::is_zero)
    }

    pub fn is_endomorphism(&self) -> bool {
        self.source == self.target
    }

    /// `a ∘ b`.
    pub fn compose(a: &GradedMap, b: &GradedMap) -> Result<GradedMap> {
        if b.target != a.source {
            return Err(Error::SpaceMismatch("compose: b.target != a.source".into()));
        }
        let columns = b.columns.iter().map(|c| a.apply(c)).collect();
        Ok(GradedMap {
            source: b.source.clone(),
            target: a.target.clone(),
            degree: a.degree + b.degree,
            columns,
        })
    }

    fn check_parallel(&self, other: &GradedMap) -> Result<()> {
        if self.source != other.source || self.target != other.target || self.degree != other.degree
        {
            return Err(Error::SpaceMismatch("maps are not parallel".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap> {
        self.check_parallel(other)?;
        let mut out = self.clone();
        for (c, o) in out.columns.iter_mut().zip(&other.columns) {
            c.add_assign(o);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &GradedMap) -> Result<GradedMap> {
        self.add(&other.scaled(&-Scalar::one()))
    }

    pub fn scaled(&self, c: &Scalar) -> GradedMap {
        let mut out = self.clone();
        for col in out.columns.iter_mut() {
            *col = col.scaled(c);
        }
        out
    }

    /// Reinterprets the same matrix between other spaces of the same dimension.
    pub fn with_spaces(&self, source: GradedSpace, target: GradedSpace) -> Result<GradedMap> {
        GradedMap::new(source, target, self.degree, self.columns.clone())
    }

    /// Dense block `target degree (d + degree) × source degree d`.
    fn block(&self, d: i32) -> (Vec<usize>, Vec<usize>, Mat) {
        let src = self.source.indices_in_degree(d);
        let tgt = self.target.indices_in_degree(d + self.degree);
        let pos: HashMap<usize, usize> = tgt.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut m = dense::zeros(tgt.len(), src.len());
        for (c, &j) in src.iter().enumerate() {
            for (i, v) in self.columns[j].iter() {
                m[pos[i]][c] = v.clone();
            }
        }
        (src, tgt, m)
    }
}

/// The map induced on shifted spaces: `φ(s⁻¹x) = (-1)^{|φ|} s⁻¹φ(x)`.
pub fn shift_map(phi: &GradedMap, j: i32) -> GradedMap {
    let s = if j.rem_euclid(2) == 1 { sign(phi.degree as i64) } else { Scalar::one() };
    let mut out = phi.scaled(&s);
    out.source = shift_space(&phi.source, j);
    out.target = shift_space(&phi.target, j);
    out
}

/// The differential of `V[1]`: same entries, negated.
pub fn shift_differential(d: &GradedMap) -> Result<GradedMap> {
    if d.degree != 1 || !d.is_endomorphism() {
        return Err(Error::SpaceMismatch(
            "shift_differential needs a degree 1 endomorphism".into(),
        ));
    }
    Ok(shift_map(d, 1))
}

/// Checks `d ∘ d = 0`, naming the first offending basis element.
pub fn check_square_zero(d: &GradedMap) -> Result<()> {
    if !d.is_endomorphism() {
        return Err(Error::SpaceMismatch("differential must be an endomorphism".into()));
    }
    for j in 0..d.source.dim() {
        if !d.apply(d.column(j)).is_zero() {
            return Err(Error::NotSquareZero(d.source.id(j).to_string()));
        }
    }
    Ok(())
}

/// Which of the optional side conditions hold for a retraction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideConditions {
    pub gf_identity: bool,
    pub hf_zero: bool,
    pub gh_zero: bool,
    pub hh_zero: bool,
}

/// Deformation retraction data `f: W → V`, `g: V → W`, `h: V → V` with
/// `fg − Id = dh + hd`.
#[derive(Clone, Debug)]
pub struct Retraction {
    pub reduced: GradedSpace,
    pub reduced_d: GradedMap,
    pub f: GradedMap,
    pub g: GradedMap,
    pub h: GradedMap,
    pub side: SideConditions,
}

/// Verifies `fg − Id = dh + hd` exactly.
pub fn check_homotopy(d: &GradedMap, f: &GradedMap, g: &GradedMap, h: &GradedMap) -> Result<()> {
    let fg = GradedMap::compose(f, g)?;
    let lhs = fg.sub(&GradedMap::identity(d.source.clone()))?;
    let rhs = GradedMap::compose(d, h)?.add(&GradedMap::compose(h, d)?)?;
    if lhs != rhs {
        return Err(Error::Context("fg - Id != dh + hd".into()));
    }
    Ok(())
}

/// Retraction of `(v, d)` onto its cohomology, using the first-nonzero pivot rule.
pub fn cohomology_sdr(v: &GradedSpace, d: &GradedMap) -> Result<Retraction> {
    equivariant_retraction(v, d, &[], |_| true)
}

/// Retraction of `(v, d)` whose maps commute with every map in `group` (a finite group
/// of degree-0 automorphisms commuting with `d`). The acyclic pair hitting degree `i`
/// (image of `d` in degree `i` together with a complement of the cycles in degree
/// `i − 1`) is contracted when `contract(i)` holds and kept otherwise; contracting every
/// pair gives the cohomology.
pub fn equivariant_retraction(
    v: &GradedSpace,
    d: &GradedMap,
    group: &[GradedMap],
    contract: impl Fn(i32) -> bool,
) -> Result<Retraction> {
    check_square_zero(d)?;
    if d.source != *v || d.degree != 1 {
        return Err(Error::SpaceMismatch("d must be a degree 1 endomorphism of v".into()));
    }
    let degrees: Vec<i32> = v.degrees().into_iter().collect();

    struct Pieces {
        idx: Vec<usize>,
        cyc_proj: Mat,
        bnd_proj: Mat,
        h_basis: Vec<Vector>,
        b_basis: Vec<Vector>,
        c_basis: Vec<Vector>,
    }

    let average = |p: &Mat, deg: i32, dim: usize| -> Mat {
        if group.is_empty() {
            return p.clone();
        }
        let mut acc = dense::zeros(dim, dim);
        for sigma in group {
            let (_, _, r) = sigma.block(deg);
            let rinv = dense::inverse(&r).expect("group element invertible");
            let t = dense::mul(&dense::mul(&r, p, dim, dim), &rinv, dim, dim);
            dense::add_into(&mut acc, &t);
        }
        dense::scale(&mut acc, &(Scalar::one() / int(group.len() as i64)));
        acc
    };

    let mut pieces: BTreeMap<i32, Pieces> = BTreeMap::new();
    for &deg in &degrees {
        let (idx, _, dmat) = d.block(deg);
        let dim = idx.len();
        let cycles = dense::kernel(&dmat, dim);
        let (_, _, dprev) = d.block(deg - 1);
        let prev_dim = v.indices_in_degree(deg - 1).len();
        let bcols: Vec<Vector> =
            (0..prev_dim).map(|c| dprev.iter().map(|row| row[c].clone()).collect()).collect();
        let boundaries = dense::independent_subset(&bcols, dim);
        let cyc_proj = average(&dense::projection_onto(&cycles, dim), deg, dim);
        let bnd_proj = average(&dense::projection_onto(&boundaries, dim), deg, dim);
        // complement of boundaries inside the cycles
        let one_minus_b = dense::sub(&dense::identity(dim), &bnd_proj);
        let h_candidates: Vec<Vector> = cycles.iter().map(|z| dense::mul_vec(&one_minus_b, z)).collect();
        let h_basis = dense::independent_subset(&h_candidates, dim);
        // complement of cycles: image of (1 - cyc_proj)
        let one_minus_z = dense::sub(&dense::identity(dim), &cyc_proj);
        let c_candidates: Vec<Vector> = (0..dim)
            .map(|c| one_minus_z.iter().map(|row| row[c].clone()).collect())
            .collect();
        let c_basis = dense::independent_subset(&c_candidates, dim);
        pieces.insert(deg, Pieces { idx, cyc_proj, bnd_proj, h_basis, b_basis: boundaries, c_basis });
    }

    // reduced basis: per degree [H | kept B | kept C]
    let mut reduced_basis = Vec::new();
    let mut reduced_vectors: Vec<(i32, Vector)> = Vec::new();
    let mut layout: BTreeMap<i32, (usize, Vec<Vector>)> = BTreeMap::new();
    for (&deg, p) in &pieces {
        let mut cols: Vec<Vector> = p.h_basis.clone();
        if !contract(deg) {
            cols.extend(p.b_basis.iter().cloned());
        }
        if !contract(deg + 1) {
            cols.extend(p.c_basis.iter().cloned());
        }
        layout.insert(deg, (reduced_basis.len(), cols.clone()));
        for c in cols {
            let k = reduced_basis.len();
            reduced_basis.push((format!("w{k}"), deg));
            reduced_vectors.push((deg, c));
        }
    }
    let reduced = GradedSpace::new(reduced_basis)?;

    let mut f_cols = Vec::new();
    for (deg, vec) in &reduced_vectors {
        let p = &pieces[deg];
        f_cols.push(p.idx.iter().zip(vec).map(|(&i, x)| (i, x.clone())).collect::<LinComb<usize>>());
    }
    let f = GradedMap::new(reduced.clone(), v.clone(), 0, f_cols)?;

    let mut g_cols = vec![LinComb::zero(); v.dim()];
    let mut h_cols = vec![LinComb::zero(); v.dim()];
    for (&deg, p) in &pieces {
        let dim = p.idx.len();
        let (offset, cols) = &layout[&deg];
        let basis_mat = dense::from_columns(cols, dim);
        let prev = pieces.get(&(deg - 1));
        for (local, &global) in p.idx.iter().enumerate() {
            let mut e = vec![Scalar::zero(); dim];
            e[local] = Scalar::one();
            let z = dense::mul_vec(&p.cyc_proj, &e);
            let b = dense::mul_vec(&p.bnd_proj, &z);
            let hh: Vector = z.iter().zip(&b).map(|(x, y)| x - y).collect();
            let c: Vector = e.iter().zip(&z).map(|(x, y)| x - y).collect();
            let mut kept = hh.clone();
            if !contract(deg) {
                kept.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            }
            if !contract(deg + 1) {
                kept.iter_mut().zip(&c).for_each(|(x, y)| *x += y);
            }
            let coords = dense::solve(&basis_mat, &kept, cols.len()).expect("kept part lies in span");
            for (k, x) in coords.into_iter().enumerate() {
                g_cols[global].add_term(offset + k, x);
            }
            if contract(deg) && b.iter().any(|x| !x.is_zero()) {
                let prev = prev.expect("nonzero boundary needs a lower degree");
                let (_, _, dprev) = d.block(deg - 1);
                let pdim = prev.idx.len();
                let cmat = dense::from_columns(&prev.c_basis, pdim);
                let dc = dense::mul(&dprev, &cmat, pdim, prev.c_basis.len());
                let y = dense::solve(&dc, &b, prev.c_basis.len()).expect("d restricted to C is onto B");
                let x = dense::mul_vec(&cmat, &y);
                for (k, val) in x.into_iter().enumerate() {
                    h_cols[global].add_term(prev.idx[k], -val);
                }
            }
        }
    }
    let g = GradedMap::new(v.clone(), reduced.clone(), 0, g_cols)?;
    let h = GradedMap::new(v.clone(), v.clone(), -1, h_cols)?;
    check_homotopy(d, &f, &g, &h)?;
    let reduced_d = GradedMap::compose(&g, &GradedMap::compose(d, &f)?)?;
    let gf = GradedMap::compose(&g, &f)?;
    let side = SideConditions {
        gf_identity: gf == GradedMap::identity(reduced.clone()),
        hf_zero: GradedMap::compose(&h, &f)?.is_zero(),
        gh_zero: GradedMap::compose(&g, &h)?.is_zero(),
        hh_zero: GradedMap::compose(&h, &h)?.is_zero(),
    };
    Ok(Retraction { reduced, reduced_d, f, g, h, side })
}

/// JSON form `{ "basis": [["x",0],["y",1]], "maps": { "d": [["x","y","1"]] } }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpaceJson {
    pub basis: Vec<(String, i32)>,
    #[serde(default)]
    pub maps: BTreeMap<String, Vec<(String, String, String)>>,
}

impl SpaceJson {
    pub fn from_space(v: &GradedSpace, maps: &[(&str, &GradedMap)]) -> Self {
        let mut out = SpaceJson { basis: v.basis.clone(), maps: BTreeMap::new() };
        for (name, m) in maps {
            let mut entries = Vec::new();
            for (j, col) in m.columns.iter().enumerate() {
                for (&i, val) in col.iter() {
                    entries.push((m.source.id(j).to_string(), m.target.id(i).to_string(), format_scalar(val)));
                }
            }
            out.maps.insert((*name).to_string(), entries);
        }
        out
    }

    pub fn space(&self) -> Result<GradedSpace> {
        GradedSpace::new(self.basis.clone())
    }

    /// Reads the named endomorphism with the given degree.
    pub fn endomorphism(&self, name: &str, degree: i32) -> Result<GradedMap> {
        let v = self.space()?;
        let mut entries = Vec::new();
        for (s, t, val) in self.maps.get(name).map(Vec::as_slice).unwrap_or(&[]) {
            let si = v.index_of(s).ok_or_else(|| Error::Parse(format!("unknown basis id {s:?}")))?;
            let ti = v.index_of(t).ok_or_else(|| Error::Parse(format!("unknown basis id {t:?}")))?;
            entries.push((si, ti, parse_scalar(val)?));
        }
        GradedMap::from_entries(v.clone(), v, degree, &entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_dim() -> (GradedSpace, GradedMap) {
        let v = GradedSpace::new(vec![("x".into(), 0), ("y".into(), 1)]).unwrap();
        let d = GradedMap::from_entries(v.clone(), v.clone(), 1, &[(0, 1, int(1))]).unwrap();
        (v, d)
    }

    #[test]
    fn compose_with_identity() {
        let (v, d) = two_dim();
        let id = GradedMap::identity(v);
        assert_eq!(GradedMap::compose(&id, &d).unwrap(), d);
        assert!(GradedMap::compose(&d, &d).unwrap().is_zero());
    }

    #[test]
    fn compose_rejects_mismatch() {
        let (v, d) = two_dim();
        let w = GradedSpace::new(vec![("z".into(), 0)]).unwrap();
        let m = GradedMap::zero(w, v, 0);
        assert!(GradedMap::compose(&m, &d).is_err());
    }

    #[test]
    fn rejects_inhomogeneous_entries() {
        let (v, _) = two_dim();
        assert!(GradedMap::from_entries(v.clone(), v, 1, &[(1, 0, int(1))]).is_err());
    }

    #[test]
    fn shift_space_degrees() {
        let (v, _) = two_dim();
        let s = shift_space(&v, 1);
        assert_eq!(s.degree(0), -1);
        assert_eq!(shift_space(&v, 0), v);
        assert_eq!(shift_space(&s, -1), v);
    }

    #[test]
    fn shift_differential_signs() {
        let (_, d) = two_dim();
        let sd = shift_differential(&d).unwrap();
        assert_eq!(sd.entry(1, 0), int(-1));
        assert_eq!(shift_differential(&sd).unwrap().entry(1, 0), int(1));
        let z = GradedMap::zero(d.source().clone(), d.source().clone(), 1);
        assert!(shift_differential(&z).unwrap().is_zero());
        let id = GradedMap::identity(d.source().clone());
        assert!(shift_differential(&id).is_err());
    }

    #[test]
    fn sdr_of_zero_space() {
        let v = GradedSpace::zero();
        let d = GradedMap::zero(v.clone(), v.clone(), 1);
        let r = cohomology_sdr(&v, &d).unwrap();
        assert_eq!(r.reduced.dim(), 0);
        assert!(r.h.is_zero());
    }

    #[test]
    fn sdr_of_acyclic_pair() {
        let (v, d) = two_dim();
        let r = cohomology_sdr(&v, &d).unwrap();
        assert_eq!(r.reduced.dim(), 0);
        // fg − Id = dh + hd forces h(y) = −x
        assert_eq!(r.h.entry(0, 1), int(-1));
        assert!(GradedMap::compose(&r.f, &r.g).unwrap().is_zero());
        check_homotopy(&d, &r.f, &r.g, &r.h).unwrap();
    }

    #[test]
    fn sdr_of_minimal_complex() {
        let v = GradedSpace::new(vec![("a".into(), 0), ("b".into(), 3)]).unwrap();
        let d = GradedMap::zero(v.clone(), v.clone(), 1);
        let r = cohomology_sdr(&v, &d).unwrap();
        assert_eq!(r.reduced.dim(), 2);
        assert!(r.h.is_zero());
        assert_eq!(GradedMap::compose(&r.f, &r.g).unwrap(), GradedMap::identity(v));
        assert!(r.side.gf_identity && r.side.hf_zero && r.side.gh_zero && r.side.hh_zero);
    }

    #[test]
    fn sdr_rejects_non_differential() {
        let v = GradedSpace::new(vec![("a".into(), 0), ("b".into(), 1), ("c".into(), 2)]).unwrap();
        let d = GradedMap::from_entries(v.clone(), v.clone(), 1, &[(0, 1, int(1)), (1, 2, int(1))]).unwrap();
        assert!(matches!(cohomology_sdr(&v, &d), Err(Error::NotSquareZero(_))));
    }

    #[test]
    fn homotopy_identity_on_demo_instance() {
        // a → b + 2c, b → 2f, c → −f, e → 3f
        let v = GradedSpace::new(vec![
            ("a".into(), 0),
            ("b".into(), 1),
            ("c".into(), 1),
            ("e".into(), 1),
            ("f".into(), 2),
        ])
        .unwrap();
        let d = GradedMap::from_entries(
            v.clone(),
            v.clone(),
            1,
            &[(0, 1, int(1)), (0, 2, int(2)), (3, 4, int(3)), (1, 4, int(2)), (2, 4, int(-1))],
        )
        .unwrap();
        check_square_zero(&d).unwrap();
        let r = cohomology_sdr(&v, &d).unwrap();
        let lhs = GradedMap::compose(&r.h, &d).unwrap().add(&GradedMap::compose(&d, &r.h).unwrap()).unwrap();
        let rhs = GradedMap::compose(&r.f, &r.g).unwrap().sub(&GradedMap::identity(v.clone())).unwrap();
        assert_eq!(lhs, rhs);
        assert!(r.side.gf_identity);
    }

    #[test]
    fn partial_retraction_keeps_pairs() {
        let v = GradedSpace::new(vec![("a".into(), 0), ("b".into(), 1), ("c".into(), 1), ("e".into(), 2)]).unwrap();
        let d = GradedMap::from_entries(v.clone(), v.clone(), 1, &[(0, 1, int(1)), (2, 3, int(1))]).unwrap();
        let r = equivariant_retraction(&v, &d, &[], |deg| deg == 1).unwrap();
        assert_eq!(r.reduced.dim(), 2);
        assert!(!r.reduced_d.is_zero());
        check_homotopy(&d, &r.f, &r.g, &r.h).unwrap();
    }

    #[test]
    fn json_roundtrip() {
        let (v, d) = two_dim();
        let j = SpaceJson::from_space(&v, &[("d", &d)]);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(text, r#"{"basis":[["x",0],["y",1]],"maps":{"d":[["x","y","1"]]}}"#);
        let back: SpaceJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.endomorphism("d", 1).unwrap(), d);
    }
}
