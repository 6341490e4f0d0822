//! Graph catalogs and decoration choices for exhaustive or seeded checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bimodule::SigmaBimodule;
use crate::shape::{enumerate_shapes, CatalogSpec, Shape};

/// Canonical shapes with `min_v..=max_v` vertices whose vertex arities all have a
/// nonzero component in `bm`, and whose total arity passes `total_ok`.
pub fn catalog(bm: &SigmaBimodule, min_v: usize, max_v: usize, total_ok: &(dyn Fn(&Shape) -> bool + Sync)) -> Vec<Shape> {
    let max_out = bm.components.keys().map(|a| a.0).max().unwrap_or(1);
    let max_in = bm.components.keys().map(|a| a.1).max().unwrap_or(1);
    let mut spec = CatalogSpec::new(max_v, max_out, max_in);
    spec.min_vertices = min_v;
    let vertex_ok = |m: usize, n: usize| bm.dim((m, n)) > 0;
    let shapes = enumerate_shapes(&spec, &vertex_ok, &|_, _| true);
    shapes.into_iter().filter(|s| total_ok(s)).collect()
}

/// Number of basis decorations of a shape.
pub fn decoration_count(bm: &SigmaBimodule, shape: &Shape) -> u128 {
    (0..shape.len()).map(|v| bm.dim(shape.arity(v)) as u128).product()
}

/// All basis decorations of `shape` when there are at most `cap`, otherwise `cap`
/// distinct decorations drawn with a seeded generator. The flag reports exhaustiveness.
pub fn decorations(bm: &SigmaBimodule, shape: &Shape, cap: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    let dims: Vec<usize> = (0..shape.len()).map(|v| bm.dim(shape.arity(v))).collect();
    let total = decoration_count(bm, shape);
    if total == 0 {
        return (Vec::new(), true);
    }
    if total <= cap as u128 {
        let mut out = vec![Vec::new()];
        for &d in &dims {
            out = out
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    (0..d).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        return (out, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    while seen.len() < cap {
        seen.insert(dims.iter().map(|&d| rng.gen_range(0..d)).collect::<Vec<usize>>());
    }
    (seen.into_iter().collect(), false)
}

/// One random decoration.
pub fn random_decoration(bm: &SigmaBimodule, shape: &Shape, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(shape.len());
    for v in 0..shape.len() {
        let d = bm.dim(shape.arity(v));
        if d == 0 {
            return None;
        }
        out.push(rng.gen_range(0..d));
    }
    Some(out)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
