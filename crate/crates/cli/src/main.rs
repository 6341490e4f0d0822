use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use properad_core::catalog::dump_catalog;
use properad_core::config::{transfer_run, ContextJson, InstanceSpec, TransferSpec};
use properad_core::free::DecoratedJson;
use properad_core::graph::{Graph, GraphJson};
use properad_core::suite::{self, recheck, run_suite, Report, SuiteConfig};
use properad_core::trees::{enumerate_trees, partner, tree_edge_pairs, Tree, TreeEdge, TreeMode};
use properad_core::Error;

#[derive(Parser)]
#[command(name = "properad-htt", version, about = "Properads, strong homotopy properads and homotopy transfer")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for decoration sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest number of vertices in generated graph catalogs.
    #[arg(long, global = true)]
    max_vertices: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Decorations per graph shape before sampling kicks in.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// List passing checks too in text reports.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Graph validation, canonical forms and contractions.
    Graphs {
        #[command(subcommand)]
        cmd: GraphsCmd,
    },
    /// Trees of contraction orders.
    Trees {
        #[command(subcommand)]
        cmd: TreesCmd,
    },
    /// Laws of a properad or strong homotopy properad.
    Properad {
        #[command(subcommand)]
        cmd: ProperadCmd,
    },
    /// Homotopy transfer along a retraction.
    Transfer {
        #[command(subcommand)]
        cmd: TransferCmd,
    },
    /// Instance construction.
    Instance {
        #[command(subcommand)]
        cmd: InstanceCmd,
    },
    /// Graph catalogs.
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
    /// Runs a named verification suite.
    Suite {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(suite::SUITES))]
        name: String,
        #[command(flatten)]
        inputs: SuiteInputs,
    },
}

#[derive(Subcommand)]
enum GraphsCmd {
    /// Checks a raw graph, or a directed labelled graph when directions are given.
    Validate {
        #[arg(long = "graph")]
        input: PathBuf,
    },
    /// Canonical form with the flag bijection realising it.
    Canon {
        #[arg(long = "graph")]
        input: PathBuf,
    },
    /// Contracts an edge given by its two flags, or a thick edge given by two vertex names.
    Contract {
        #[arg(long = "graph")]
        input: PathBuf,
        /// Two flags forming an edge, as `g,h`.
        #[arg(long, conflicts_with = "thick")]
        edge: Option<String>,
        /// Source and target vertex of a thick edge, as `v1,v2`.
        #[arg(long)]
        thick: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Binary,
    General,
}

#[derive(Subcommand)]
enum TreesCmd {
    /// Lists the trees of a graph.
    Enumerate {
        #[arg(long = "graph")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Binary)]
        mode: Mode,
    },
    /// Lists partners of all (tree, internal edge) pairs of a graph, or checks the
    /// partner map over the graph catalog when no graph is given.
    Partner {
        #[arg(long = "graph")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        max_legs: usize,
    },
}

#[derive(Subcommand)]
enum ProperadCmd {
    /// Unit, derivation and associativity laws of a strict instance.
    CheckAssoc {
        #[command(flatten)]
        inputs: SuiteInputs,
    },
    /// `Σ_H ∂_{G/H} ∂_H = 0` for an instance, over the catalog or on one decorated graph.
    CheckSh {
        #[command(flatten)]
        inputs: SuiteInputs,
        /// A decorated graph, such as a witness from an earlier report.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Identity {
    /// The transferred structure squares to zero.
    Codifferential,
    /// The transfer morphism is an sh morphism in the lowest component.
    Morphism,
    /// The signed sum over trees and internal edges vanishes.
    #[value(name = "tree-sum", alias = "lemma3")]
    TreeSum,
    /// The differential of θ is the sum of its split forms.
    #[value(name = "theta-differential", alias = "eq1")]
    ThetaDifferential,
    /// Agreement with the classical tree recursion for dgas.
    Merkulov,
}

#[derive(Subcommand)]
enum TransferCmd {
    /// Evaluates the transferred structure and writes its nonzero operations.
    Run {
        #[arg(long)]
        context: PathBuf,
    },
    /// Verifies an identity of the transfer.
    Verify {
        #[arg(long, value_enum)]
        what: Identity,
        #[arg(long)]
        context: Option<PathBuf>,
        /// Verify on the retraction of the output of the context (a second transfer).
        #[arg(long)]
        second: bool,
        /// A decorated graph, such as a witness from an earlier report.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Largest chain length for the dga comparison.
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum InstanceCmd {
    /// Builds an instance (or a transfer context) and prints its data.
    Build {
        /// An instance description, or a transfer description with a `source` field.
        #[arg(long = "spec")]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Canonical graphs of a biarity with their tree counts.
    Dump {
        #[arg(long, default_value_t = 1)]
        outputs: usize,
        #[arg(long, default_value_t = 1)]
        inputs: usize,
    },
}

#[derive(Args, Clone, Default)]
struct SuiteInputs {
    /// Instance description (JSON).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Transfer description (JSON).
    #[arg(long)]
    context: Option<PathBuf>,
    /// Independent decoration draws per shape.
    #[arg(long)]
    seeds: Option<usize>,
    /// Random decorated graphs for the commuting contractions.
    #[arg(long)]
    samples: Option<usize>,
    /// Legs per side in structural catalogs.
    #[arg(long)]
    max_legs: Option<usize>,
    /// Largest chain length for the dga comparison.
    #[arg(long)]
    n: Option<usize>,
}

enum Outcome {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("PROPERAD_HTT_THREADS") {
        let n: usize = v.parse().with_context(|| format!("PROPERAD_HTT_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn emit(c: &Common, json: &Value, text: &str) -> Result<()> {
    let body = match c.format {
        Format::Json => serde_json::to_string_pretty(json)? + "\n",
        Format::Text => text.to_string(),
    };
    match &c.out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn emit_report(c: &Common, r: &Report) -> Result<Outcome> {
    let text = if c.verbose { r.to_text() } else { r.summary_text() };
    emit(c, &serde_json::to_value(r)?, &text)?;
    Ok(if r.pass() { Outcome::Ok } else { Outcome::Failed })
}

fn suite_config(c: &Common, i: &SuiteInputs) -> Result<SuiteConfig> {
    let mut cfg = SuiteConfig { max_vertices: c.max_vertices, seed: c.seed, ..SuiteConfig::default() };
    if let Some(x) = c.cap {
        cfg.cap = x;
    }
    if let Some(x) = i.seeds {
        cfg.seeds = x;
    }
    if let Some(x) = i.samples {
        cfg.samples = x;
    }
    if let Some(x) = i.max_legs {
        cfg.max_legs = x;
    }
    if let Some(x) = i.n {
        cfg.n = x;
    }
    if let Some(p) = &i.instance {
        cfg.instance = Some(read_json::<InstanceSpec>(p)?);
    }
    if let Some(p) = &i.context {
        cfg.transfer = Some(read_json::<TransferSpec>(p)?);
    }
    Ok(cfg)
}

fn pair(s: &str) -> Result<(String, String)> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("expected two comma-separated names, got {s:?}"))?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    match &cli.cmd {
        Cmd::Graphs { cmd } => graphs(c, cmd),
        Cmd::Trees { cmd } => trees(c, cmd),
        Cmd::Properad { cmd } => match cmd {
            ProperadCmd::CheckAssoc { inputs } => emit_report(c, &run_suite("associativity", &suite_config(c, inputs)?)?),
            ProperadCmd::CheckSh { inputs, witness } => {
                let cfg = suite_config(c, inputs)?;
                let r = match witness {
                    Some(w) => recheck("sh-square", &cfg, &read_json::<DecoratedJson>(w)?)?,
                    None => run_suite("sh-square", &cfg)?,
                };
                emit_report(c, &r)
            }
        },
        Cmd::Transfer { cmd } => transfer(c, cmd),
        Cmd::Instance { cmd: InstanceCmd::Build { input } } => instance_build(c, input),
        Cmd::Catalog { cmd: CatalogCmd::Dump { outputs, inputs } } => {
            let max_v = c.max_vertices.unwrap_or(3);
            let entries = dump_catalog(max_v, *outputs, *inputs)?;
            let mut text = String::new();
            for e in &entries {
                text.push_str(&format!("{}  |T_G| = {}  |T̂_G| = {}\n", e.key, e.trees, e.sh_trees));
            }
            text.push_str(&format!("{} graphs of biarity ({outputs},{inputs}) with at most {max_v} vertices\n", entries.len()));
            emit(c, &json!({ "max_vertices": max_v, "outputs": outputs, "inputs": inputs, "graphs": entries }), &text)?;
            Ok(Outcome::Ok)
        }
        Cmd::Suite { name, inputs } => emit_report(c, &run_suite(name, &suite_config(c, inputs)?)?),
    }
}

fn graphs(c: &Common, cmd: &GraphsCmd) -> Result<Outcome> {
    match cmd {
        GraphsCmd::Validate { input } => {
            let g: GraphJson = read_json(input)?;
            let directed = g.out.is_some() || g.r#in.is_some();
            let outcome = if directed { g.graph().map(|_| ()) } else { g.raw().map(|_| ()) };
            let violations: Vec<String> = match &outcome {
                Ok(()) => Vec::new(),
                Err(Error::InvalidGraph(vs)) => vs.iter().map(|v| v.to_string()).collect(),
                Err(e) => vec![e.to_string()],
            };
            let kind = if directed { "directed" } else { "raw" };
            let valid = violations.is_empty();
            let mut text = format!("{} {kind} graph\n", if valid { "valid" } else { "invalid" });
            for v in &violations {
                text.push_str(&format!("  {v}\n"));
            }
            emit(c, &json!({ "valid": valid, "kind": kind, "violations": violations }), &text)?;
            Ok(if valid { Outcome::Ok } else { Outcome::Failed })
        }
        GraphsCmd::Canon { input } => {
            let g = read_json::<GraphJson>(input)?.graph()?;
            let (canon, witness) = g.canonical_form();
            let key = canon.to_shape().describe();
            let mut text = format!("{key}\n");
            for (a, b) in &witness {
                text.push_str(&format!("  {a} -> {b}\n"));
            }
            emit(c, &json!({ "key": key, "graph": canon.to_json(), "bijection": witness }), &text)?;
            Ok(Outcome::Ok)
        }
        GraphsCmd::Contract { input, edge, thick } => {
            let gj: GraphJson = read_json(input)?;
            match (edge, thick) {
                (Some(e), _) => {
                    let (a, b) = pair(e)?;
                    let raw = gj.raw()?.contract_single_edge(&a, &b)?;
                    let blocks: Vec<Vec<&str>> = raw.blocks.iter().map(|bl| bl.iter().map(|&f| raw.flags[f].as_str()).collect()).collect();
                    let text = blocks.iter().map(|b| format!("{{{}}}", b.join(","))).collect::<Vec<_>>().join(" ") + "\n";
                    let edges: Vec<(&str, &str)> = raw.edges().into_iter().map(|(x, y)| (raw.flags[x].as_str(), raw.flags[y].as_str())).collect();
                    emit(c, &json!({ "flags": raw.flags, "involution": edges, "vertices": blocks, "names": raw.names }), &text)?;
                    Ok(Outcome::Ok)
                }
                (None, Some(t)) => {
                    let g = gj.graph()?;
                    let (a, b) = pair(t)?;
                    let va = g.vertex_index(&a).ok_or_else(|| anyhow!("unknown vertex {a}"))?;
                    let vb = g.vertex_index(&b).ok_or_else(|| anyhow!("unknown vertex {b}"))?;
                    let admissible = g.is_admissible(va, vb)?;
                    let contracted: Graph = g.contract_thick_edge(va, vb)?;
                    let text = format!("{a} → {b} is {}admissible\n", if admissible { "" } else { "not " });
                    emit(c, &json!({ "admissible": admissible, "graph": contracted.to_json() }), &text)?;
                    Ok(if admissible { Outcome::Ok } else { Outcome::Failed })
                }
                (None, None) => bail!("give --edge or --thick"),
            }
        }
    }
}

struct Names(Vec<(u32, String)>);

impl Names {
    fn of(g: &Graph) -> Names {
        Names(g.ids.iter().copied().zip(g.raw.names.iter().cloned()).collect())
    }

    fn name(&self, id: u32) -> String {
        self.0.iter().find(|(i, _)| *i == id).map(|(_, n)| n.clone()).unwrap_or_else(|| format!("#{id}"))
    }

    fn tree(&self, t: &Tree) -> String {
        match t {
            Tree::Leaf(x) => self.name(*x),
            Tree::Node(cs) => format!("({})", cs.iter().map(|c| self.tree(c)).collect::<Vec<_>>().join(" ")),
        }
    }

    fn edge(&self, e: &TreeEdge) -> Vec<String> {
        e.iter().map(|&x| self.name(x)).collect()
    }
}

fn trees(c: &Common, cmd: &TreesCmd) -> Result<Outcome> {
    match cmd {
        TreesCmd::Enumerate { input, mode } => {
            let g = read_json::<GraphJson>(input)?.graph()?;
            let names = Names::of(&g);
            let mode = match mode {
                Mode::Binary => TreeMode::Binary,
                Mode::General => TreeMode::General,
            };
            let ts = enumerate_trees(&g.dag(), mode);
            let mut text: String = ts.iter().map(|t| names.tree(t) + "\n").collect();
            text.push_str(&format!("{} trees\n", ts.len()));
            let list: Vec<Value> = ts.iter().map(|t| t.to_json(&|x| names.name(x))).collect();
            emit(c, &json!({ "count": ts.len(), "trees": list }), &text)?;
            Ok(Outcome::Ok)
        }
        TreesCmd::Partner { input: Some(input), .. } => {
            let g = read_json::<GraphJson>(input)?.graph()?;
            let names = Names::of(&g);
            let dag = g.dag();
            let mut rows = Vec::new();
            let mut text = String::new();
            let mut ok = true;
            for (t, e) in tree_edge_pairs(&enumerate_trees(&dag, TreeMode::Binary)) {
                let (p, pe) = partner(&dag, &t, &e)?;
                let back = partner(&dag, &p, &pe)?;
                let good = (p.clone(), pe.clone()) != (t.clone(), e.clone()) && back == (t.clone(), e.clone());
                ok &= good;
                text.push_str(&format!(
                    "{} / {{{}}} ↔ {} / {{{}}}{}\n",
                    names.tree(&t),
                    names.edge(&e).join(","),
                    names.tree(&p),
                    names.edge(&pe).join(","),
                    if good { "" } else { "  FAIL" }
                ));
                rows.push(json!({
                    "tree": t.to_json(&|x| names.name(x)),
                    "edge": names.edge(&e),
                    "partner": p.to_json(&|x| names.name(x)),
                    "partner_edge": names.edge(&pe),
                    "involution": good,
                }));
            }
            emit(c, &json!({ "pairs": rows, "pass": ok }), &text)?;
            Ok(if ok { Outcome::Ok } else { Outcome::Failed })
        }
        TreesCmd::Partner { input: None, max_legs } => {
            let cfg = suite_config(c, &SuiteInputs { max_legs: Some(*max_legs), ..Default::default() })?;
            emit_report(c, &run_suite("partner-involution", &cfg)?)
        }
    }
}

fn transfer(c: &Common, cmd: &TransferCmd) -> Result<Outcome> {
    match cmd {
        TransferCmd::Run { context } => {
            let spec: TransferSpec = read_json(context)?;
            let max_v = c.max_vertices.unwrap_or(3);
            let run = transfer_run(&spec, max_v, c.cap.unwrap_or(200), c.seed)?;
            let text = format!(
                "{} nonzero operations over {} graphs ({} decorated graphs{}) up to {max_v} vertices\n",
                run.operations.len(),
                run.graphs,
                run.evaluated,
                if run.exhaustive { "" } else { ", sampled" }
            );
            emit(c, &serde_json::to_value(&run)?, &text)?;
            Ok(Outcome::Ok)
        }
        TransferCmd::Verify { what, context, second, witness, n } => {
            let mut cfg = suite_config(c, &SuiteInputs { context: context.clone(), n: Some(*n), ..Default::default() })?;
            if *second {
                let first = cfg.transfer.take().unwrap_or_else(suite::default_transfer);
                cfg.transfer = Some(TransferSpec { source: InstanceSpec::TransferredSh { transfer: Box::new(first) }, contract_degrees: None });
            }
            let name = match what {
                Identity::Codifferential => "transferred-sh",
                Identity::Morphism => "transfer-morphism",
                Identity::TreeSum => "tree-sum-cancels",
                Identity::ThetaDifferential => "theta-differential",
                Identity::Merkulov => "merkulov",
            };
            let r = match witness {
                Some(w) if name != "merkulov" => recheck(name, &cfg, &read_json::<DecoratedJson>(w)?)?,
                Some(_) => bail!("--witness is not supported for the dga comparison"),
                None => run_suite(name, &cfg)?,
            };
            emit_report(c, &r)
        }
    }
}

fn instance_build(c: &Common, input: &Path) -> Result<Outcome> {
    let value: Value = serde_json::from_str(&read_text(input)?)?;
    if value.get("source").is_some() {
        let spec: TransferSpec = serde_json::from_value(value)?;
        let (_, ctx) = spec.build()?;
        let dump = ContextJson::new(&spec, &ctx);
        let dims: Vec<String> = ctx.target.components.iter().map(|(a, comp)| format!("({},{}): {}", a.0, a.1, comp.dim())).collect();
        emit(c, &serde_json::to_value(&dump)?, &format!("{}\ntarget dimensions {}\n", spec.label(), dims.join(", ")))?;
    } else {
        let spec: InstanceSpec = serde_json::from_value(value)?;
        let inst = spec.build()?;
        let bm = inst.bimodule();
        let dims: Vec<String> = bm.components.iter().map(|(a, comp)| format!("({},{}): {}", a.0, a.1, comp.dim())).collect();
        emit(
            c,
            &json!({ "label": spec.label(), "strict": inst.strict.is_some(), "bimodule": bm.to_json() }),
            &format!("{}\ndimensions {}\n", spec.label(), dims.join(", ")),
        )?;
    }
    Ok(Outcome::Ok)
}
