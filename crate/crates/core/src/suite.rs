//! Named verification suites and the reports they produce.
//!
//! Each suite runs one family of identities over a bounded catalog of graphs and
//! returns one record per graph shape (or per worked example). Failing records carry a
//! witness that can be fed back to the command line as input.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bimodule::{Component, SigmaBimodule};
use crate::config::{InstanceSpec, TransferSpec};
use crate::digraph::{mask_of, members, Dag};
use crate::error::{Error, Result};
use crate::free::{DecoratedJson, FreeCtx, FreeElement, RawTerm};
use crate::graph::{Graph, RawGraph};
use crate::linalg::{int, GradedMap, GradedSpace, LinComb};
use crate::merkulov::Merkulov;
use crate::properad::{associativity_holds, check_shape, derivation_holds, unit_holds, coderivation_apply, mu_contract, mu_piece, mu_tree, sh_defect, Composition, ShapeCheck, StrictSh};
use crate::sample::{catalog, decorations, random_decoration, rng};
use crate::shape::{enumerate_shapes, CatalogSpec, Relabel, Shape};
use crate::transfer::{chain, TransferredSh};
use crate::trees::{enumerate_trees, partner, tree_edge_pairs, trees_from_sequences, TreeMode};

pub const SUITES: [&str; 15] = [
    "graph-laws",
    "tree-laws",
    "partner-involution",
    "contractions-commute",
    "tree-sum-cancels",
    "coassoc-example",
    "associativity",
    "bar-square",
    "sh-square",
    "theta-differential",
    "transferred-sh",
    "transfer-morphism",
    "second-transferred-sh",
    "second-transfer-morphism",
    "merkulov",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub graph: String,
    pub identity: String,
    pub pass: bool,
    #[serde(default)]
    pub decorations: usize,
    #[serde(default)]
    pub exhaustive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl CheckRecord {
    fn example(graph: &str, identity: &str, pass: bool, detail: String) -> CheckRecord {
        CheckRecord {
            graph: graph.into(),
            identity: identity.into(),
            pass,
            decorations: 0,
            exhaustive: true,
            detail: Some(detail),
            witness: None,
        }
    }

    fn from_shape_check(identity: &str, c: ShapeCheck) -> CheckRecord {
        CheckRecord {
            pass: c.pass(),
            graph: c.graph,
            identity: identity.into(),
            decorations: c.decorations,
            exhaustive: c.exhaustive,
            detail: None,
            witness: c.witness.and_then(|w| serde_json::from_str(&w).ok()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub decorations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    pub records: Vec<CheckRecord>,
    pub totals: Totals,
    /// Elapsed time, the only field that varies between identical runs.
    pub wall_ms: u64,
}

impl Report {
    fn new(suite: &str, instance: Option<String>, records: Vec<CheckRecord>, start: Instant) -> Report {
        let passed = records.iter().filter(|r| r.pass).count();
        let totals = Totals {
            checks: records.len(),
            passed,
            failed: records.len() - passed,
            decorations: records.iter().map(|r| r.decorations).sum(),
        };
        Report { suite: suite.into(), instance, records, totals, wall_ms: start.elapsed().as_millis() as u64 }
    }

    pub fn pass(&self) -> bool {
        self.totals.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// Every record followed by the totals line.
    pub fn to_text(&self) -> String {
        self.render(true)
    }

    /// Failing records followed by the totals line.
    pub fn summary_text(&self) -> String {
        self.render(false)
    }

    fn render(&self, all: bool) -> String {
        let mut out = String::new();
        for r in self.records.iter().filter(|r| all || !r.pass) {
            let mut line = format!("{} {} :: {}", if r.pass { "PASS" } else { "FAIL" }, r.graph, r.identity);
            if r.decorations > 0 {
                line.push_str(&format!(" ({} decorations{})", r.decorations, if r.exhaustive { "" } else { ", sampled" }));
            }
            if let Some(d) = &r.detail {
                line.push_str(&format!(" [{d}]"));
            }
            out.push_str(&line);
            out.push('\n');
            if let Some(w) = &r.witness {
                out.push_str(&format!("  witness: {w}\n"));
            }
        }
        out.push_str(&format!(
            "{}: {} checks, {} passed, {} failed, {} decorations{}, {} ms\n",
            self.suite,
            self.totals.checks,
            self.totals.passed,
            self.totals.failed,
            self.totals.decorations,
            self.instance.as_ref().map(|i| format!(" on {i}")).unwrap_or_default(),
            self.wall_ms
        ));
        out
    }
}

/// Bounds and instances for a suite run. `None` fields fall back to per-suite defaults.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub max_vertices: Option<usize>,
    pub seed: u64,
    /// Decorations per graph shape; shapes with more are sampled.
    pub cap: usize,
    /// Independent decoration draws per shape (tree-sum-cancels).
    pub seeds: usize,
    /// Random decorated graphs (contractions-commute).
    pub samples: usize,
    /// Legs per side in structural catalogs.
    pub max_legs: usize,
    /// Largest arity for the dga comparison.
    pub n: usize,
    pub instance: Option<InstanceSpec>,
    pub transfer: Option<TransferSpec>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { max_vertices: None, seed: 0, cap: 200, seeds: 10, samples: 50, max_legs: 3, n: 5, instance: None, transfer: None }
    }
}

impl SuiteConfig {
    fn vertices(&self, default: usize) -> usize {
        self.max_vertices.unwrap_or(default)
    }
}

pub fn default_properad() -> InstanceSpec {
    InstanceSpec::GenusCommutative { max_chi: 2 }
}

pub fn default_endomorphisms() -> InstanceSpec {
    InstanceSpec::EndomorphismDga { degrees: vec![0, 1, 0, 1], seed: 2 }
}

/// Genus-commutative source, contracting only the acyclic pairs that reach degree 6;
/// the transferred structure has nonvanishing operations on three vertices.
pub fn default_transfer() -> TransferSpec {
    TransferSpec { source: default_properad(), contract_degrees: Some(vec![6]) }
}

/// The second transfer: the output of [`default_transfer`] retracted onto cohomology.
pub fn default_second_transfer() -> TransferSpec {
    TransferSpec { source: InstanceSpec::TransferredSh { transfer: Box::new(default_transfer()) }, contract_degrees: None }
}

pub fn default_dga_transfer() -> TransferSpec {
    TransferSpec { source: InstanceSpec::MasseyDga, contract_degrees: None }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<Report> {
    let start = Instant::now();
    let (instance, records) = match name {
        "graph-laws" => (None, graph_laws(cfg)),
        "tree-laws" => (None, tree_laws(cfg)),
        "partner-involution" => (None, partner_involution(cfg)),
        "contractions-commute" => {
            let spec = cfg.instance.clone().unwrap_or_else(default_properad);
            let mut records = vec![tree_composition_example()?];
            records.extend(disjoint_contractions_commute(&spec, cfg)?);
            (Some(spec.label()), records)
        }
        "coassoc-example" => (None, cocomposition_example()),
        "associativity" => {
            let spec = cfg.instance.clone().unwrap_or_else(default_properad);
            (Some(spec.label()), properad_laws(&spec, cfg)?)
        }
        name if PROBES.contains(&name) => {
            let p = probe(name, cfg)?;
            (Some(p.instance.clone()), p.run(cfg)?)
        }
        "merkulov" => {
            let spec = cfg.transfer.clone().unwrap_or_else(default_dga_transfer);
            (Some(spec.label()), merkulov(&spec, cfg)?)
        }
        other => return Err(Error::OutOfRange(format!("unknown suite {other:?}; known: {}", SUITES.join(", ")))),
    };
    Ok(Report::new(name, instance, records, start))
}

/// Canonical shapes up to the bounds, every vertex with at least one input and output.
pub fn graph_catalog(max_vertices: usize, max_legs: usize) -> Vec<Shape> {
    enumerate_shapes(&CatalogSpec::new(max_vertices, max_legs, max_legs), &|m, n| m >= 1 && n >= 1, &|_, _| true)
}

fn graph_witness(s: &Shape) -> Option<Value> {
    serde_json::to_value(Graph::from_shape(s).to_json()).ok()
}

fn shape_record(s: &Shape, identity: &str, failures: Vec<String>, detail: Option<String>) -> CheckRecord {
    let pass = failures.is_empty();
    CheckRecord {
        graph: s.describe(),
        identity: identity.into(),
        pass,
        decorations: 0,
        exhaustive: true,
        detail: if pass { detail } else { Some(failures.join("; ")) },
        witness: if pass { None } else { graph_witness(s) },
    }
}

// ---------------------------------------------------------------- structural suites

fn flags(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

/// The twelve-flag graph with blocks `{a,b,c,d}`, `{e,f,g}`, `{h,i,j,k,l}` and edges
/// `(be)(cf)(di)(gh)(kl)`.
pub fn twelve_flag_graph() -> Result<RawGraph> {
    let inv: Vec<(String, String)> =
        [("b", "e"), ("c", "f"), ("d", "i"), ("g", "h"), ("k", "l")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    RawGraph::new(
        flags(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"]),
        &inv,
        &[flags(&["a", "b", "c", "d"]), flags(&["e", "f", "g"]), flags(&["h", "i", "j", "k", "l"])],
        None,
    )
}

/// Contracting the edge `(gh)` of [`twelve_flag_graph`].
pub fn edge_contraction_example() -> CheckRecord {
    let identity = "contracting edge (gh) removes g,h and merges {e,f,g},{h,i,j,k,l} into {e,f,i,j,k,l}";
    let outcome = twelve_flag_graph().and_then(|g| g.contract_single_edge("g", "h"));
    let (pass, detail) = match outcome {
        Ok(c) => {
            let blocks: BTreeSet<BTreeSet<&str>> =
                c.blocks.iter().map(|b| b.iter().map(|&f| c.flags[f].as_str()).collect()).collect();
            let expected: BTreeSet<BTreeSet<&str>> =
                [vec!["a", "b", "c", "d"], vec!["e", "f", "i", "j", "k", "l"]].into_iter().map(|b| b.into_iter().collect()).collect();
            let edges: BTreeSet<(String, String)> = c.edges().into_iter().map(|(a, b)| (c.flags[a].clone(), c.flags[b].clone())).collect();
            let expected_edges: BTreeSet<(String, String)> =
                [("b", "e"), ("c", "f"), ("d", "i"), ("k", "l")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
            let ok = blocks == expected && edges == expected_edges && c.flags.len() == 10;
            (ok, format!("blocks {blocks:?}, edges {edges:?}"))
        }
        Err(e) => (false, e.to_string()),
    };
    CheckRecord::example("twelve-flag graph", identity, pass, detail)
}

/// `v1→v2, v1→v3, v2→v4, v3→v4, v1→v4` with an input leg on `v1` and an output on `v4`.
pub fn diamond_shape() -> Shape {
    Shape::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)], &[(3, 0)], &[(0, 0)])
}

/// `v2 → v1 ← v3`.
pub fn vee_shape() -> Shape {
    Shape::from_edges(3, &[(1, 0), (2, 0)], &[(0, 0)], &[(1, 0), (2, 1)])
}

pub fn admissibility_example() -> CheckRecord {
    let g = Graph::from_shape(&diamond_shape());
    let e1 = g.is_admissible(2, 3);
    let e2 = g.is_admissible(0, 3);
    let pass = e1 == Ok(true) && e2 == Ok(false);
    CheckRecord::example(
        "diamond",
        "thick edge v3→v4 is admissible, thick edge v1→v4 is not",
        pass,
        format!("v3→v4: {e1:?}, v1→v4: {e2:?}"),
    )
}

fn random_relabel(s: &Shape, r: &mut impl Rng) -> Relabel {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.shuffle(r);
    let shuffled = |n: usize, r: &mut dyn rand::RngCore| {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(r);
        p
    };
    Relabel {
        order,
        out_perm: s.verts.iter().map(|v| shuffled(v.outs.len(), r)).collect(),
        in_perm: s.verts.iter().map(|v| shuffled(v.ins.len(), r)).collect(),
    }
}

fn shape_laws(s: &Shape, seed: u64) -> Vec<String> {
    let mut bad = Vec::new();
    let mut r = rng(seed);
    for _ in 0..3 {
        let rl = random_relabel(s, &mut r);
        if s.relabeled(&rl).canonical().shape != *s {
            bad.push("canonical form changes under relabelling".into());
            break;
        }
    }
    let dag = s.dag();
    let admissible: BTreeSet<u32> = dag.admissible_subsets().into_iter().collect();
    for m in 1..=dag.all() {
        if !dag.is_connected_subset(m) {
            continue;
        }
        let q = s.quotient(&s.blocks_front(&members(m)));
        let acyclic = q.shape.validate(true).is_ok();
        if acyclic != admissible.contains(&m) {
            bad.push(format!("subset {:?}: admissibility disagrees with the contracted graph", members(m)));
        }
    }
    for k in 2..=s.len() {
        for split in dag.splittings(k) {
            let blocks: Vec<Vec<usize>> = split.iter().map(|&m| members(m)).collect();
            if Shape::regraft(&s.quotient(&blocks)).canonical().shape != *s {
                bad.push(format!("splitting {blocks:?} does not regraft to the graph"));
            }
        }
    }
    bad
}

fn graph_laws(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let shapes = graph_catalog(cfg.vertices(4), cfg.max_legs.min(2));
    let mut records = vec![edge_contraction_example(), admissibility_example()];
    records.par_extend(shapes.par_iter().enumerate().map(|(i, s)| {
        shape_record(
            s,
            "canonical form is relabelling-invariant; admissible subsets are exactly those with acyclic contraction; splittings regraft",
            shape_laws(s, cfg.seed.wrapping_add(i as u64)),
            None,
        )
    }));
    records
}

fn tree_count_example(name: &str, dag: &Dag, binary: usize, general: Option<usize>) -> CheckRecord {
    let b = enumerate_trees(dag, TreeMode::Binary).len();
    let g = enumerate_trees(dag, TreeMode::General).len();
    let pass = b == binary && general.is_none_or(|x| x == g);
    let identity = match general {
        Some(x) => format!("|T_G| = {binary} and |T̂_G| = {x}"),
        None => format!("|T_G| = {binary}"),
    };
    CheckRecord::example(name, &identity, pass, format!("|T_G| = {b}, |T̂_G| = {g}"))
}

fn tree_laws(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let mut records = vec![
        tree_count_example("two-vertex graph", &chain(2).dag(), 1, None),
        tree_count_example("v2 → v1 ← v3", &vee_shape().dag(), 2, Some(3)),
    ];
    let diamond = diamond_shape().dag();
    let mut failures = Vec::new();
    let mut detail = Vec::new();
    for mode in [TreeMode::Binary, TreeMode::General] {
        let a = enumerate_trees(&diamond, mode);
        let b = trees_from_sequences(&diamond, mode);
        detail.push(format!("{mode:?}: {} top-down, {} from sequences", a.len(), b.len()));
        if a != b {
            failures.push(format!("{mode:?} trees differ"));
        }
    }
    records.push(CheckRecord::example(
        "diamond",
        "trees generated top-down equal classes of contraction sequences",
        failures.is_empty(),
        detail.join(", "),
    ));
    let shapes = graph_catalog(cfg.vertices(4), 1);
    let mut seen = HashMap::new();
    for s in &shapes {
        let dag = s.dag();
        if seen.contains_key(&dag) {
            continue;
        }
        let mut bad = Vec::new();
        let mut counts = Vec::new();
        for mode in [TreeMode::Binary, TreeMode::General] {
            let a = enumerate_trees(&dag, mode);
            if a != trees_from_sequences(&dag, mode) {
                bad.push(format!("{mode:?} trees differ from sequence classes"));
            }
            if a.iter().any(|t| !crate::trees::is_valid_tree(&dag, t, mode)) {
                bad.push(format!("invalid {mode:?} tree generated"));
            }
            counts.push(a.len());
        }
        seen.insert(dag, ());
        records.push(shape_record(
            s,
            "trees generated top-down equal classes of contraction sequences",
            bad,
            Some(format!("|T_G| = {}, |T̂_G| = {}", counts[0], counts[1])),
        ));
    }
    records
}

fn partner_involution(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let shapes = graph_catalog(cfg.vertices(4), cfg.max_legs);
    // the partner map depends only on the thick-edge digraph
    let dags: BTreeSet<Dag> = shapes.iter().map(|s| s.dag()).collect();
    let results: HashMap<Dag, (Vec<String>, usize)> = dags
        .into_par_iter()
        .map(|dag| {
            let pairs = tree_edge_pairs(&enumerate_trees(&dag, TreeMode::Binary));
            let mut bad = Vec::new();
            for (t, e) in &pairs {
                match partner(&dag, t, e) {
                    Ok((p, pe)) => {
                        if (&p, &pe) == (t, e) {
                            bad.push(format!("fixed point at {} / {e:?}", t.render()));
                        }
                        match partner(&dag, &p, &pe) {
                            Ok(back) if back == (t.clone(), e.clone()) => {}
                            _ => bad.push(format!("not an involution at {} / {e:?}", t.render())),
                        }
                    }
                    Err(err) => bad.push(format!("{} / {e:?}: {err}", t.render())),
                }
            }
            (dag, (bad, pairs.len()))
        })
        .collect();
    shapes
        .iter()
        .map(|s| {
            let (bad, n) = &results[&s.dag()];
            shape_record(s, "partner map on (tree, internal edge) pairs is a fixed-point-free involution", bad.clone(), Some(format!("{n} pairs")))
        })
        .collect()
}

// ----------------------------------------------------------------- algebraic suites

/// Disjoint thick edges `(a→b, c→d)` that can be contracted in either order.
fn commuting_pairs(s: &Shape) -> Vec<((usize, usize), (usize, usize))> {
    let dag = s.dag();
    let edges = dag.admissible_thick_edges();
    let mut out = Vec::new();
    for (i, &(a, b)) in edges.iter().enumerate() {
        for &(c, d) in &edges[i + 1..] {
            if [a, b].contains(&c) || [a, b].contains(&d) {
                continue;
            }
            let mut blocks = vec![mask_of([a, b]), mask_of([c, d])];
            blocks.extend((0..s.len()).filter(|v| ![a, b, c, d].contains(v)).map(|v| 1 << v));
            if dag.quotient(&blocks).is_acyclic() {
                out.push(((a, b), (c, d)));
            }
        }
    }
    out
}

fn contract_in_order(p: &dyn Composition, t: &RawTerm, first: (usize, usize), second: (usize, usize)) -> Result<FreeElement> {
    let ctx = FreeCtx::new(p.bimodule(), 0);
    let ids = [t.shape.ids[second.0], t.shape.ids[second.1]];
    let mut out = FreeElement::zero();
    for r in mu_contract(&ctx, p, t, first.0, first.1)? {
        let pos = r.positions(&ids)?;
        for r2 in mu_contract(&ctx, p, &r, pos[0], pos[1])? {
            ctx.normalize_into(&r2, &mut out);
        }
    }
    Ok(out)
}

fn disjoint_contractions_commute(spec: &InstanceSpec, cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let inst = spec.build()?;
    let p = inst.strict.clone().ok_or_else(|| Error::Instance("commuting contractions need a properad".into()))?;
    let bm = p.bimodule();
    let max_v = cfg.vertices(4);
    let shapes: Vec<Shape> =
        catalog(bm, 4.min(max_v), max_v, &|s| (inst.graph_ok)(s)).into_iter().filter(|s| !commuting_pairs(s).is_empty()).collect();
    if shapes.is_empty() {
        return Err(Error::Instance("no graph within the bounds has two disjoint contractible thick edges".into()));
    }
    let identity = "contractions along disjoint admissible thick edges commute";
    (0..cfg.samples as u64)
        .into_par_iter()
        .map(|k| {
            let seed = cfg.seed.wrapping_add(k);
            let mut r = rng(seed);
            let s = &shapes[r.gen_range(0..shapes.len())];
            let pairs = commuting_pairs(s);
            let (e1, e2) = pairs[r.gen_range(0..pairs.len())];
            // prefer a decoration on which the contraction does not vanish
            let mut last = None;
            for _ in 0..20 {
                let Some(decs) = random_decoration(bm, s, &mut r) else { break };
                let t = RawTerm::new(s.clone(), decs);
                let a = contract_in_order(p.as_ref(), &t, e1, e2)?;
                let b = contract_in_order(p.as_ref(), &t, e2, e1)?;
                let nonzero = !a.is_zero();
                last = Some((t, a == b, nonzero));
                if nonzero {
                    break;
                }
            }
            let (t, pass, nonzero) = last.ok_or_else(|| Error::Instance("graph without decorations".into()))?;
            Ok(CheckRecord {
                graph: s.describe(),
                identity: identity.into(),
                pass,
                decorations: 1,
                exhaustive: false,
                detail: Some(format!(
                    "seed {seed}, edges v{}→v{} and v{}→v{}, {} result",
                    s.ids[e1.0],
                    s.ids[e1.1],
                    s.ids[e2.0],
                    s.ids[e2.1],
                    if nonzero { "nonzero" } else { "zero" }
                )),
                witness: if pass { None } else { serde_json::from_str(&crate::properad::witness(bm, s, &t.decs)).ok() },
            })
        })
        .collect()
}

/// The two-generator bimodule used for the cocomposition example: `e1` in biarity
/// (1,2), `e2, e3` in (1,1), of the given degrees, zero differential.
fn example_bimodule(d1: i32, d2: i32, d3: i32) -> Result<SigmaBimodule> {
    let mut comps = std::collections::BTreeMap::new();
    let v = GradedSpace::new(vec![("e1".into(), d1)])?;
    comps.insert((1, 2), Component::trivial(1, 2, v.clone(), GradedMap::zero(v.clone(), v, 1))?);
    let w = GradedSpace::new(vec![("e2".into(), d2), ("e3".into(), d3)])?;
    comps.insert((1, 1), Component::trivial(1, 1, w.clone(), GradedMap::zero(w.clone(), w, 1))?);
    Ok(SigmaBimodule::new(comps))
}

/// Cocomposition on `v2 → v1 ← v3` decorated by `e1 ⊗ e2 ⊗ e3`, for every parity of
/// the three degrees: `(Δ,Id)Δ = 2·G` split into singletons, `(Id,Δ)Δ = 0`, the
/// shifted `Δ̃` has the displayed signs and `(Δ̃,Id)Δ̃ = 0`.
pub fn cocomposition_example() -> Vec<CheckRecord> {
    let s = vee_shape();
    let mut records = Vec::new();
    let sg = |k: i32| int(if k.rem_euclid(2) == 0 { 1 } else { -1 });
    for bits in 0..8 {
        let (d1, d2, d3) = (bits & 1, (bits >> 1) & 1, (bits >> 2) & 1);
        let label = format!("v2 → v1 ← v3, |e1|,|e2|,|e3| = {d1},{d2},{d3}");
        let Ok(bm) = example_bimodule(d1, d2, d3) else { continue };
        let decs = vec![0, 0, 1];
        let singletons = RawTerm::new(s.clone().with_colors(Some(vec![0, 1, 2])), decs.clone());

        let ctx = FreeCtx::new(&bm, 0);
        let x = ctx.normalize_one(&RawTerm::new(s.clone(), decs.clone()));
        let dx = ctx.cocomposition(&x, false);
        let twice = ctx.normalize_one(&singletons.clone().scaled(&int(2)));
        let left = ctx.cocompose_side(&dx, true, false);
        let right = ctx.cocompose_side(&dx, false, false);
        records.push(CheckRecord::example(&label, "(Δ,Id)Δ = 2·(G, singleton pieces)", left == twice, format!("{} terms", left.len())));
        records.push(CheckRecord::example(&label, "(Id,Δ)Δ = 0", right.is_zero(), format!("{} terms", right.len())));
        records.push(CheckRecord::example(&label, "(Δ,Id)Δ ≠ (Id,Δ)Δ", left != right, String::new()));

        // shifted pieces: every block carries a degree-1 suspension
        let sctx = FreeCtx::new(&bm, 0).with_marker(1);
        let sx = sctx.normalize_one(&RawTerm::new(s.clone(), decs.clone()));
        let sdx = sctx.cocomposition(&sx, true);
        let first = RawTerm::new(s.clone().with_colors(Some(vec![0, 0, 1])), decs.clone()).scaled(&sg(d1 + d2));
        let swapped = s.relabeled(&s.sorting_relabel(&[0, 2, 1])).with_colors(Some(vec![0, 0, 1]));
        let second = RawTerm::new(swapped, vec![0, 1, 0]).scaled(&sg(d2 * d3 + d1 + d3));
        let mut expected = sctx.normalize_one(&first);
        expected.add_assign(&sctx.normalize_one(&second));
        records.push(CheckRecord::example(
            &label,
            "Δ̃ = ±(v1←v2)⊗v3 ± (v1←v3)⊗v2 with signs (−1)^{|e1|+|e2|}, (−1)^{|e2||e3|+|e1|+|e3|}",
            sdx == expected,
            format!("{} terms", sdx.len()),
        ));
        let sleft = sctx.cocompose_side(&sdx, true, true);
        records.push(CheckRecord::example(&label, "(Δ̃,Id)Δ̃ = 0", sleft.is_zero(), format!("{} terms", sleft.len())));
    }
    records
}

/// `μ_t` along `t = (v1, (v2, v3))` on the triangle `v3→v2, v3→v1, v2→v1`, computed
/// by the tree evaluator on a composition table, against `μ(e1, μ(e2, e3))` composed
/// by hand and against grafting in the free properad.
pub fn tree_composition_example() -> Result<CheckRecord> {
    use crate::instance::TruncatedFree;
    use crate::properad::TableProperad;
    use crate::trees::Tree;
    let free = TruncatedFree::new(TruncatedFree::standard_generators(), 3)?;
    let gens = &free.gens;
    // positions 0,1,2 = v1,v2,v3; v1 has two inputs, v3 two outputs
    let tri = Shape::from_edges(3, &[(2, 1), (2, 0), (1, 0)], &[(0, 0)], &[(2, 0)]);
    let inner = tri.quotient(&[vec![0], vec![1, 2]]);
    let piece = inner.pieces[1].clone();
    let outer = inner.shape.clone();
    let table = TableProperad::tabulate(&free, &[piece.canonical().shape, outer.canonical().shape])?;
    let tree = Tree::node(vec![Tree::Leaf(0), Tree::node(vec![Tree::Leaf(1), Tree::Leaf(2)])]);
    let mut pass = true;
    let mut details = Vec::new();
    for e2 in ["u", "w"] {
        let decs_g = vec![
            gens.index_of((1, 2), "b").unwrap(),
            gens.index_of((1, 1), e2).unwrap(),
            gens.index_of((2, 1), "a").unwrap(),
        ];
        // decorations as elements of the truncated free properad
        let elem = |arity: (usize, usize), gen: usize| -> Result<usize> {
            let c = free.basis_of(&RawTerm::new(Shape::corolla(arity.0, arity.1), vec![gen]));
            let first = c.iter().next().map(|(&i, _)| i);
            first.ok_or_else(|| Error::Instance("generator missing from basis".into()))
        };
        let decs = vec![elem((1, 2), decs_g[0])?, elem((1, 1), decs_g[1])?, elem((2, 1), decs_g[2])?];
        let t = RawTerm::new(tri.clone(), decs.clone());
        let via_tree = mu_tree(&table, &t, &tree)?;
        let mut nested = LinComb::zero();
        for (&k, c) in mu_piece(&table, &piece, &[decs[1], decs[2]], 0)?.iter() {
            nested.add_scaled(&mu_piece(&table, &outer, &[decs[0], k], 0)?, c);
        }
        let grafted = free.basis_of(&RawTerm::new(tri.clone(), decs_g));
        let ok = via_tree == nested && nested == grafted && !grafted.is_zero();
        pass &= ok;
        details.push(format!("e2 = {e2}: {}", if ok { "agree" } else { "differ" }));
    }
    Ok(CheckRecord::example(
        "triangle v3→v2, v3→v1, v2→v1",
        "μ_t(G, e1⊗e2⊗e3) = μ(e1, μ(e2, e3)) for t contracting v2←v3 first",
        pass,
        details.join(", "),
    ))
}

/// Runs `defect` (true = identity holds) on every shape, with capped decorations.
fn decorated_checks(
    bm: &SigmaBimodule,
    shapes: &[Shape],
    cfg: &SuiteConfig,
    draws: usize,
    identity: &str,
    defect: &(dyn Fn(&RawTerm) -> Result<bool> + Sync),
) -> Result<Vec<CheckRecord>> {
    shapes
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut all = BTreeSet::new();
            let mut exhaustive = false;
            for k in 0..draws.max(1) {
                let (decs, ex) = decorations(bm, s, cfg.cap, cfg.seed.wrapping_add((i * 1000 + k) as u64));
                all.extend(decs);
                if ex {
                    exhaustive = true;
                    break;
                }
            }
            let decs: Vec<Vec<usize>> = all.into_iter().collect();
            Ok(CheckRecord::from_shape_check(identity, check_shape(bm, s, &decs, exhaustive, defect)?))
        })
        .collect()
}

type TermCheck = Box<dyn Fn(&RawTerm) -> Result<bool> + Send + Sync>;

/// One decorated-graph identity bound to an instance: the graphs to run it on and
/// the check itself (true when the identity holds).
pub struct Probe {
    pub instance: String,
    pub identity: String,
    pub bm: SigmaBimodule,
    pub shapes: Vec<Shape>,
    /// Independent decoration draws per shape.
    pub draws: usize,
    check: TermCheck,
}

impl Probe {
    pub fn check(&self, t: &RawTerm) -> Result<bool> {
        (self.check)(t)
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
        decorated_checks(&self.bm, &self.shapes, cfg, self.draws, &self.identity, self.check.as_ref())
    }
}

/// Suites made of a single decorated identity.
pub const PROBES: [&str; 8] = [
    "bar-square",
    "sh-square",
    "tree-sum-cancels",
    "theta-differential",
    "transferred-sh",
    "transfer-morphism",
    "second-transferred-sh",
    "second-transfer-morphism",
];

/// Builds the identity behind a decorated suite.
pub fn probe(name: &str, cfg: &SuiteConfig) -> Result<Probe> {
    match name {
        "bar-square" | "sh-square" => {
            let spec = cfg.instance.clone().unwrap_or_else(default_endomorphisms);
            let inst = spec.build()?;
            let bm = inst.bimodule().clone();
            let ok = inst.graph_ok.clone();
            let shapes = catalog(&bm, 1, cfg.vertices(4), &|s| ok(s));
            let (identity, check): (&str, TermCheck) = if name == "bar-square" {
                let p = inst.strict.clone().ok_or_else(|| Error::Instance("the bar differential needs a properad".into()))?;
                let sh = StrictSh::new(p);
                let ctx_bm = bm.clone();
                (
                    "bar differential squares to zero",
                    Box::new(move |t: &RawTerm| {
                        let x = FreeCtx::new(&ctx_bm, 1).normalize_one(t);
                        let dx = coderivation_apply(&sh, &x)?;
                        Ok(coderivation_apply(&sh, &dx)?.is_zero())
                    }),
                )
            } else {
                let sh = inst.sh.clone();
                ("Σ_H ∂_{G/H} ∂_H = 0", Box::new(move |t: &RawTerm| Ok(sh_defect(sh.as_ref(), t)?.is_zero())))
            };
            Ok(Probe { instance: spec.label(), identity: identity.into(), bm, shapes, draws: 1, check })
        }
        "tree-sum-cancels" | "theta-differential" | "transferred-sh" | "transfer-morphism" | "second-transferred-sh"
        | "second-transfer-morphism" => {
            let second = name.starts_with("second");
            let spec = cfg.transfer.clone().unwrap_or_else(if second { default_second_transfer } else { default_transfer });
            let max_v = cfg.vertices(if second { 3 } else { 4 });
            let (source, ctx) = spec.build()?;
            let sh = Arc::new(TransferredSh::new(ctx.clone()));
            let ok = source.graph_ok.clone();
            let on_source = matches!(name, "tree-sum-cancels" | "theta-differential");
            let bm = if on_source { ctx.source.bimodule().clone() } else { ctx.target.clone() };
            let shapes = catalog(&bm, if on_source { 2 } else { 1 }, max_v, &|s| ok(s));
            let (identity, draws, check): (&str, usize, TermCheck) = match name {
                "tree-sum-cancels" => {
                    if !ctx.source.is_strict() {
                        return Err(Error::Instance("the tree sum concerns strict sources".into()));
                    }
                    (
                        "Σ over trees and internal edges of ±θ_{t,ε} vanishes",
                        cfg.seeds,
                        Box::new(move |t: &RawTerm| Ok(sh.engine.tree_edge_sum(t)?.is_zero())),
                    )
                }
                "theta-differential" => (
                    "d θ_G + θ_G d_F = −Σ_{t,ε} θ°_{t,ε}",
                    1,
                    Box::new(move |t: &RawTerm| Ok(sh.engine.theta_differential_defect(t)?.is_zero())),
                ),
                "transferred-sh" | "second-transferred-sh" => (
                    "Σ_H ∂_{G/H} ∂_H = 0 for the transferred structure",
                    1,
                    Box::new(move |t: &RawTerm| Ok(sh_defect(sh.as_ref(), t)?.is_zero())),
                ),
                _ => (
                    "(F ∂_E)_1 = (∂_P F)_1 for the transfer morphism",
                    1,
                    Box::new(move |t: &RawTerm| Ok(sh.engine.morphism_defect(t)?.is_zero())),
                ),
            };
            Ok(Probe { instance: spec.label(), identity: identity.into(), bm, shapes, draws, check })
        }
        other => Err(Error::OutOfRange(format!("{other:?} is not a decorated suite; known: {}", PROBES.join(", ")))),
    }
}

/// Re-runs a decorated suite's identity on one decorated graph, such as a witness
/// from an earlier report.
pub fn recheck(name: &str, cfg: &SuiteConfig, term: &DecoratedJson) -> Result<Report> {
    let start = Instant::now();
    let p = probe(name, cfg)?;
    let t = term.to_raw(&FreeCtx::new(&p.bm, 0))?;
    let pass = p.check(&t)?;
    let record = CheckRecord {
        graph: t.shape.canonical().shape.describe(),
        identity: p.identity.clone(),
        pass,
        decorations: 1,
        exhaustive: true,
        detail: None,
        witness: if pass { None } else { serde_json::to_value(term).ok() },
    };
    Ok(Report::new(name, Some(p.instance), vec![record], start))
}

/// Unit, derivation and associativity laws of a strict instance.
fn properad_laws(spec: &InstanceSpec, cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let inst = spec.build()?;
    let p = inst.strict.clone().ok_or_else(|| Error::Instance("associativity needs a properad".into()))?;
    let bm = p.bimodule();
    let ok = |s: &Shape| (inst.graph_ok)(s);
    let mut records = vec![CheckRecord::example(
        "unit graphs",
        "the unit is a two-sided unit on every basis element",
        unit_holds(p.as_ref())?,
        String::new(),
    )];
    let two = catalog(bm, 2, 2, &ok);
    records.extend(decorated_checks(bm, &two, cfg, 1, "d μ = μ d on two-vertex graphs", &|t| derivation_holds(p.as_ref(), t))?);
    let three = catalog(bm, 3, cfg.vertices(3).max(3), &ok);
    records.extend(decorated_checks(bm, &three, cfg, 1, "μ_t is the same for every binary tree t", &|t| {
        associativity_holds(p.as_ref(), t)
    })?);
    Ok(records)
}

fn merkulov(spec: &TransferSpec, cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let (source, ctx) = spec.build()?;
    let alg = source.dga.clone().ok_or_else(|| Error::Instance("the dga recursion needs a dga source".into()))?;
    let a = (1, 1);
    let m = Merkulov::new(&alg, &ctx.f[&a], &ctx.g[&a], &ctx.h[&a])?;
    let sh = TransferredSh::new(ctx.clone());
    let mut records = Vec::new();
    for n in 2..=cfg.n.max(2) {
        let s = chain(n);
        let (decs, exhaustive) = decorations(&ctx.target, &s, cfg.cap.max(1), cfg.seed);
        let mut bad = None;
        let mut nonzero = 0;
        for d in &decs {
            let ours = sh.engine.partial(&RawTerm::new(s.clone(), d.clone()))?;
            let theirs = m.product(d);
            if !theirs.is_zero() {
                nonzero += 1;
            }
            if ours != theirs && bad.is_none() {
                bad = Some(d.clone());
            }
        }
        records.push(CheckRecord {
            graph: format!("chain of {n} vertices"),
            identity: format!("transferred m_{n} equals the classical tree recursion"),
            pass: bad.is_none(),
            decorations: decs.len(),
            exhaustive,
            detail: Some(format!("{nonzero} nonzero products")),
            witness: bad.and_then(|d| serde_json::from_str(&crate::properad::witness(&ctx.target, &s, &d)).ok()),
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_pass() {
        assert!(edge_contraction_example().pass);
        assert!(admissibility_example().pass);
        assert!(cocomposition_example().iter().all(|r| r.pass));
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", &SuiteConfig::default()).is_err());
    }

    #[test]
    fn small_structural_suites() {
        let cfg = SuiteConfig { max_vertices: Some(3), max_legs: 2, ..Default::default() };
        for name in ["graph-laws", "tree-laws", "partner-involution"] {
            let r = run_suite(name, &cfg).unwrap();
            assert!(r.pass(), "{}", r.to_text());
            assert!(r.totals.checks > 2);
        }
    }

    #[test]
    fn report_roundtrips_through_json() {
        let cfg = SuiteConfig { max_vertices: Some(2), ..Default::default() };
        let r = run_suite("tree-laws", &cfg).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn witness_format_rechecks() {
        let cfg = SuiteConfig { max_vertices: Some(2), ..Default::default() };
        let p = probe("transfer-morphism", &SuiteConfig { transfer: Some(default_dga_transfer()), ..cfg.clone() }).unwrap();
        let s = chain(2);
        let (decs, _) = decorations(&p.bm, &s, 1, 0);
        let w = crate::properad::witness(&p.bm, &s, &decs[0]);
        let term: DecoratedJson = serde_json::from_str(&w).unwrap();
        let cfg = SuiteConfig { transfer: Some(default_dga_transfer()), ..cfg };
        let r = recheck("transfer-morphism", &cfg, &term).unwrap();
        assert!(r.pass() && r.totals.checks == 1);
    }

    #[test]
    fn endomorphism_laws() {
        let cfg = SuiteConfig { instance: Some(default_endomorphisms()), cap: 30, ..Default::default() };
        let r = run_suite("associativity", &cfg).unwrap();
        assert!(r.pass(), "{}", r.summary_text());
        assert!(r.totals.checks >= 3);
    }
}
