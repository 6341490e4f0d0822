//! End-to-end acceptance run: one line per criterion, each checked at its stated
//! bound and time limit. Everything runs in a single test so the timings are not
//! distorted by other tests sharing the thread pool.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use properad_core::config::{InstanceSpec, TransferSpec};
use properad_core::suite::{
    admissibility_example, cocomposition_example, default_dga_transfer, default_endomorphisms, default_properad,
    default_transfer, diamond_shape, edge_contraction_example, run_suite, tree_composition_example, vee_shape, Report,
    SuiteConfig,
};
use properad_core::transfer::chain;
use properad_core::trees::{enumerate_trees, TreeMode};

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(text: &str) {
    // written straight to stdout so the lines survive output capture
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

fn criterion(n: usize, title: &str, limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = body();
    let took = start.elapsed();
    let in_time = limit.is_none_or(|l| took <= l);
    let pass = o.pass && in_time;
    let limit_text = limit.map(|l| format!(" (limit {}s)", l.as_secs())).unwrap_or_default();
    line(&format!(
        "criterion {n:>2} {}: {title} [{:.1}s{limit_text}] {}{}",
        if pass { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        o.detail,
        if in_time { "" } else { " (over time)" }
    ));
    pass
}

fn suite(name: &str, cfg: &SuiteConfig) -> Report {
    run_suite(name, cfg).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn summary(r: &Report) -> String {
    let mut s = format!(
        "{}: {}/{} shapes, {} decorations{}",
        r.suite,
        r.totals.passed,
        r.totals.checks,
        r.totals.decorations,
        r.instance.as_ref().map(|i| format!(" on {i}")).unwrap_or_default()
    );
    if let Some(f) = r.failures().next() {
        s.push_str(&format!("; first failure {} ({})", f.graph, f.identity));
    }
    s
}

fn reports(rs: &[Report]) -> Outcome {
    Outcome { pass: rs.iter().all(|r| r.pass() && r.totals.checks > 0), detail: rs.iter().map(summary).collect::<Vec<_>>().join("; ") }
}

/// Tree classes of a digraph by brute force over every contraction sequence. Vertices
/// are merged either along one edge (binary) or as any weakly connected set of at least
/// two vertices (general); a step is allowed when the merged graph stays acyclic.
mod brute {
    use std::collections::BTreeSet;

    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
    pub enum T {
        Leaf(usize),
        Node(Vec<T>),
    }

    fn acyclic(n: usize, edges: &BTreeSet<(usize, usize)>) -> bool {
        // Kahn's algorithm
        let mut indeg = vec![0; n];
        for &(_, b) in edges {
            indeg[b] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &(a, b) in edges {
                if a == v {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        stack.push(b);
                    }
                }
            }
        }
        seen == n
    }

    fn connected(set: &[usize], edges: &BTreeSet<(usize, usize)>) -> bool {
        let mut reached = vec![set[0]];
        let mut grew = true;
        while grew {
            grew = false;
            for &(a, b) in edges {
                for (x, y) in [(a, b), (b, a)] {
                    if reached.contains(&x) && set.contains(&y) && !reached.contains(&y) {
                        reached.push(y);
                        grew = true;
                    }
                }
            }
        }
        reached.len() == set.len()
    }

    fn merge(trees: &[T], edges: &BTreeSet<(usize, usize)>, set: &[usize]) -> Option<(Vec<T>, BTreeSet<(usize, usize)>)> {
        let n = trees.len();
        // new index: merged vertex first, the others after in order
        let rest: Vec<usize> = (0..n).filter(|v| !set.contains(v)).collect();
        let idx = |v: usize| if set.contains(&v) { 0 } else { 1 + rest.iter().position(|&r| r == v).unwrap() };
        let new_edges: BTreeSet<(usize, usize)> =
            edges.iter().filter(|(a, b)| !(set.contains(a) && set.contains(b))).map(|&(a, b)| (idx(a), idx(b))).collect();
        if !acyclic(rest.len() + 1, &new_edges) {
            return None;
        }
        let mut children: Vec<T> = set.iter().map(|&v| trees[v].clone()).collect();
        children.sort();
        let mut next = vec![T::Node(children)];
        next.extend(rest.iter().map(|&v| trees[v].clone()));
        Some((next, new_edges))
    }

    fn go(trees: Vec<T>, edges: BTreeSet<(usize, usize)>, general: bool, out: &mut BTreeSet<T>) {
        let n = trees.len();
        if n == 1 {
            out.insert(trees[0].clone());
            return;
        }
        for mask in 1u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
            if set.len() < 2 || (!general && set.len() != 2) || !connected(&set, &edges) {
                continue;
            }
            if let Some((t, e)) = merge(&trees, &edges, &set) {
                go(t, e, general, out);
            }
        }
    }

    pub fn trees(n: usize, edges: &[(usize, usize)], general: bool) -> BTreeSet<T> {
        let mut out = BTreeSet::new();
        go((0..n).map(T::Leaf).collect(), edges.iter().copied().collect(), general, &mut out);
        out
    }
}

#[test]
fn acceptance() {
    let mut results = Vec::new();

    results.push(criterion(1, "contracting (gh) in the twelve-flag graph", None, || {
        let r = edge_contraction_example();
        Outcome { pass: r.pass, detail: r.detail.unwrap_or_default() }
    }));

    results.push(criterion(2, "admissibility of v3→v4 and v1→v4 on the diamond", None, || {
        let r = admissibility_example();
        Outcome { pass: r.pass, detail: r.detail.unwrap_or_default() }
    }));

    results.push(criterion(3, "partner map is a fixed-point-free involution", Some(Duration::from_secs(60)), || {
        let cfg = SuiteConfig { max_vertices: Some(4), max_legs: 3, ..Default::default() };
        reports(&[suite("partner-involution", &cfg)])
    }));

    results.push(criterion(4, "disjoint contractions commute, seeds 0-49", Some(Duration::from_secs(30)), || {
        let cfg = SuiteConfig { instance: Some(default_properad()), samples: 50, seed: 0, ..Default::default() };
        let r = suite("contractions-commute", &cfg);
        let samples: Vec<_> = r.records.iter().filter(|x| x.identity.contains("disjoint")).collect();
        let nonzero = samples.iter().filter(|x| x.detail.as_deref().is_some_and(|d| d.ends_with("nonzero result"))).count();
        Outcome {
            pass: samples.len() == 50 && samples.iter().all(|x| x.pass),
            detail: format!("{}/50 samples agree, {nonzero} with nonzero result", samples.iter().filter(|x| x.pass).count()),
        }
    }));

    results.push(criterion(5, "μ_t on the triangle equals μ(e1, μ(e2, e3))", None, || {
        let r = tree_composition_example().expect("tree composition example");
        Outcome { pass: r.pass, detail: r.detail.unwrap_or_default() }
    }));

    results.push(criterion(6, "cocomposition identities on v2 → v1 ← v3", None, || {
        let rs = cocomposition_example();
        Outcome {
            pass: rs.len() == 40 && rs.iter().all(|r| r.pass),
            detail: format!("{}/{} identities over all degree parities", rs.iter().filter(|r| r.pass).count(), rs.len()),
        }
    }));

    results.push(criterion(7, "bar differential squares to zero", Some(Duration::from_secs(120)), || {
        // 16^4 decorations on the longest chain: exhaustive
        let end = SuiteConfig { instance: Some(default_endomorphisms()), max_vertices: Some(4), cap: 70_000, ..Default::default() };
        let table = SuiteConfig {
            instance: Some(InstanceSpec::TableProperad { from: Some(Box::new(default_properad())), table: None }),
            max_vertices: Some(4),
            cap: 200,
            ..Default::default()
        };
        reports(&[suite("bar-square", &end), suite("bar-square", &table)])
    }));

    results.push(criterion(8, "signed tree sum vanishes, 10 decoration seeds", None, || {
        let cfg = SuiteConfig { max_vertices: Some(4), seeds: 10, cap: 100, ..Default::default() };
        reports(&[suite("tree-sum-cancels", &cfg)])
    }));

    let end_partial = TransferSpec { source: default_endomorphisms(), contract_degrees: Some(vec![1]) };
    // (transfer, decorations per shape): exhaustive for the endomorphism instance
    let first_transfers = [(end_partial, 70_000), (default_transfer(), 300)];

    results.push(criterion(9, "transferred structure squares to zero", Some(Duration::from_secs(300)), || {
        let rs: Vec<Report> = first_transfers
            .iter()
            .map(|(t, cap)| suite("transferred-sh", &SuiteConfig { transfer: Some(t.clone()), max_vertices: Some(4), cap: *cap, ..Default::default() }))
            .collect();
        reports(&rs)
    }));

    results.push(criterion(10, "transfer morphism identity in the lowest component", None, || {
        let rs: Vec<Report> = first_transfers
            .iter()
            .map(|(t, cap)| suite("transfer-morphism", &SuiteConfig { transfer: Some(t.clone()), max_vertices: Some(4), cap: *cap, ..Default::default() }))
            .collect();
        reports(&rs)
    }));

    results.push(criterion(11, "agreement with the classical recursion for dgas, n = 2..5", Some(Duration::from_secs(60)), || {
        let cfg = SuiteConfig { transfer: Some(default_dga_transfer()), n: 5, cap: 10_000, ..Default::default() };
        let r = suite("merkulov", &cfg);
        let (_, ctx) = default_dga_transfer().build().unwrap();
        let small = ctx.source.bimodule().dim((1, 1)) <= 4 && !ctx.h[&(1, 1)].is_zero();
        let mut o = reports(&[r]);
        o.pass &= small;
        o
    }));

    results.push(criterion(12, "second transfer: square zero and morphism identity", Some(Duration::from_secs(300)), || {
        let cfg = SuiteConfig { max_vertices: Some(3), cap: 300, ..Default::default() };
        reports(&[suite("second-transferred-sh", &cfg), suite("second-transfer-morphism", &cfg)])
    }));

    results.push(criterion(13, "tree counts", None, || {
        let count = |s: &properad_core::shape::Shape, mode| enumerate_trees(&s.dag(), mode).len();
        let two = count(&chain(2), TreeMode::Binary);
        let vee_b = count(&vee_shape(), TreeMode::Binary);
        let vee_g = count(&vee_shape(), TreeMode::General);
        let diamond = diamond_shape();
        let edges: BTreeSet<(usize, usize)> = diamond.dag().edges().into_iter().collect();
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        let brute_b = brute::trees(diamond.len(), &edges, false).len();
        let brute_g = brute::trees(diamond.len(), &edges, true).len();
        let d_b = count(&diamond, TreeMode::Binary);
        let d_g = count(&diamond, TreeMode::General);
        Outcome {
            pass: two == 1 && vee_b == 2 && vee_g == 3 && d_b == brute_b && d_g == brute_g,
            detail: format!(
                "two vertices {two}, vee {vee_b} binary / {vee_g} general, diamond {d_b}/{d_g} against brute force {brute_b}/{brute_g}"
            ),
        }
    }));

    let passed = results.iter().filter(|&&p| p).count();
    line(&format!("acceptance: {passed}/{} criteria pass", results.len()));
    assert_eq!(passed, results.len(), "some acceptance criteria failed");
}
