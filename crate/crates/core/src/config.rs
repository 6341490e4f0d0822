//! Serializable descriptions of instances and transfer contexts, and their builders.
//!
//! Every builder is deterministic: the same description yields the same instance.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bimodule::{map_entries, Arity, BimoduleJson, Entry, SigmaBimodule};
use crate::free::DecoratedJson;
use crate::linalg::format_scalar;
use crate::error::{Error, Result};
use crate::instance::{DgAlgebra, GenusCommutative, TruncatedFree};
use crate::properad::{witness, Composition, ShStructure, StrictSh, TableJson, TableProperad};
use crate::sample::{catalog, decorations};
use crate::shape::{enumerate_shapes, CatalogSpec, Shape};
use crate::transfer::{TransferContext, TransferredSh};

/// A source structure for checks and transfers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceSpec {
    /// `End(V)` for a seeded complex `V` with the given basis degrees.
    EndomorphismDga { degrees: Vec<i32>, seed: u64 },
    /// The four-dimensional dga with a nonvanishing triple Massey product.
    MasseyDga,
    /// The genus-graded commutative properad over `Q[x,u]/(x⁴)`, `du = x²`.
    GenusCommutative { max_chi: usize },
    /// Compositions of `from` tabulated on its two-vertex graphs, or an explicit table.
    TableProperad {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        from: Option<Box<InstanceSpec>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<TableJson>,
    },
    /// The free properad on two degree-1 generators of biarities (2,1) and (1,2) and
    /// a contractible pair in (1,1), truncated above `max_vertices` vertices.
    TruncatedFreeProperad { max_vertices: usize },
    /// The structure transferred along a retraction.
    TransferredSh { transfer: Box<TransferSpec> },
}

/// A source and the retraction to transfer along: acyclic pairs reaching the listed
/// degrees are contracted, or all of them (retraction onto cohomology) when absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferSpec {
    pub source: InstanceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract_degrees: Option<Vec<i32>>,
}

pub type GraphFilter = Arc<dyn Fn(&Shape) -> bool + Send + Sync>;

/// A built instance.
#[derive(Clone)]
pub struct Instance {
    pub sh: Arc<dyn ShStructure>,
    /// The strict composition, when the instance is a properad.
    pub strict: Option<Arc<dyn Composition>>,
    /// The underlying dga, for instances concentrated in biarity (1,1).
    pub dga: Option<Arc<DgAlgebra>>,
    /// Graphs worth checking (a bound past which every evaluation vanishes).
    pub graph_ok: GraphFilter,
}

impl Instance {
    fn strict(p: Arc<dyn Composition>, dga: Option<Arc<DgAlgebra>>, graph_ok: GraphFilter) -> Instance {
        Instance { sh: Arc::new(StrictSh::new(p.clone())), strict: Some(p), dga, graph_ok }
    }

    pub fn bimodule(&self) -> &SigmaBimodule {
        self.sh.bimodule()
    }
}

fn any_graph() -> GraphFilter {
    Arc::new(|_| true)
}

impl InstanceSpec {
    pub fn parse(text: &str) -> Result<InstanceSpec> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn label(&self) -> String {
        match self {
            InstanceSpec::EndomorphismDga { degrees, seed } => format!("endomorphism-dga {degrees:?} seed {seed}"),
            InstanceSpec::MasseyDga => "massey-dga".into(),
            InstanceSpec::GenusCommutative { max_chi } => format!("genus-commutative chi ≤ {max_chi}"),
            InstanceSpec::TableProperad { from: Some(f), .. } => format!("table-properad from {}", f.label()),
            InstanceSpec::TableProperad { .. } => "table-properad".into(),
            InstanceSpec::TruncatedFreeProperad { max_vertices } => format!("truncated-free-properad ≤ {max_vertices} vertices"),
            InstanceSpec::TransferredSh { transfer } => format!("transferred-sh from {}", transfer.label()),
        }
    }

    pub fn build(&self) -> Result<Instance> {
        match self {
            InstanceSpec::EndomorphismDga { degrees, seed } => {
                if degrees.is_empty() || degrees.len() > 6 {
                    return Err(Error::Instance("endomorphism-dga needs 1 to 6 basis degrees".into()));
                }
                let (v, d) = DgAlgebra::random_complex(degrees, *seed)?;
                let a = Arc::new(DgAlgebra::endomorphisms(&v, &d)?);
                Ok(Instance::strict(a.clone(), Some(a), any_graph()))
            }
            InstanceSpec::MasseyDga => {
                let a = Arc::new(DgAlgebra::massey());
                Ok(Instance::strict(a.clone(), Some(a), any_graph()))
            }
            InstanceSpec::GenusCommutative { max_chi } => {
                if *max_chi > 4 {
                    return Err(Error::Instance("genus-commutative supports max_chi ≤ 4".into()));
                }
                let gc = Arc::new(GenusCommutative::new(GenusCommutative::polynomial_algebra(), *max_chi)?);
                let filter = gc.clone();
                Ok(Instance::strict(gc, None, Arc::new(move |s| filter.graph_ok(s))))
            }
            InstanceSpec::TableProperad { from, table } => match (from, table) {
                (_, Some(j)) => Ok(Instance::strict(Arc::new(TableProperad::from_json(j)?), None, any_graph())),
                (Some(f), None) => {
                    // the table reproduces the source, so the source's vanishing bound applies
                    let inst = f.build()?;
                    let p = inst.strict.ok_or_else(|| Error::Instance("table-properad needs a strict source".into()))?;
                    let t = TableProperad::tabulate(p.as_ref(), &two_vertex_shapes(p.bimodule()))?;
                    Ok(Instance::strict(Arc::new(t), None, inst.graph_ok))
                }
                (None, None) => Err(Error::Instance("table-properad needs `from` or `table`".into())),
            },
            InstanceSpec::TruncatedFreeProperad { max_vertices } => {
                if !(1..=3).contains(max_vertices) {
                    return Err(Error::Instance("truncated-free-properad supports 1 to 3 vertices".into()));
                }
                let f = Arc::new(TruncatedFree::new(TruncatedFree::standard_generators(), *max_vertices)?);
                Ok(Instance::strict(f, None, any_graph()))
            }
            InstanceSpec::TransferredSh { transfer } => {
                let (source, ctx) = transfer.build()?;
                Ok(Instance { sh: Arc::new(TransferredSh::new(ctx)), strict: None, dga: None, graph_ok: source.graph_ok })
            }
        }
    }
}

/// Every canonical two-vertex shape whose vertices and total arity have nonzero
/// components, with any number of parallel edges.
fn two_vertex_shapes(bm: &SigmaBimodule) -> Vec<Shape> {
    let max_out = bm.components.keys().map(|a| a.0).max().unwrap_or(1);
    let max_in = bm.components.keys().map(|a| a.1).max().unwrap_or(1);
    let mut spec = CatalogSpec::new(2, max_out, max_in);
    spec.min_vertices = 2;
    spec.max_multiplicity = max_out.min(max_in);
    enumerate_shapes(&spec, &|m, n| bm.dim((m, n)) > 0, &|m, n| bm.dim((m, n)) > 0)
}

impl TransferSpec {
    pub fn parse(text: &str) -> Result<TransferSpec> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn label(&self) -> String {
        match &self.contract_degrees {
            None => format!("{} onto cohomology", self.source.label()),
            Some(d) => format!("{} contracting degrees {d:?}", self.source.label()),
        }
    }

    /// The built source and the validated transfer context.
    pub fn build(&self) -> Result<(Instance, Arc<TransferContext>)> {
        let source = self.source.build()?;
        let ctx = match &self.contract_degrees {
            None => TransferContext::retract(source.sh.clone(), &|_| true)?,
            Some(ds) => TransferContext::retract(source.sh.clone(), &|i| ds.contains(&i))?,
        };
        Ok((source, Arc::new(ctx)))
    }
}

/// JSON dump of a transfer context: both bimodules and the maps per biarity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContextJson {
    pub spec: TransferSpec,
    pub source: BimoduleJson,
    pub target: BimoduleJson,
    pub f: BTreeMap<String, Vec<Entry>>,
    pub g: BTreeMap<String, Vec<Entry>>,
    pub h: BTreeMap<String, Vec<Entry>>,
}

fn key(a: &Arity) -> String {
    format!("{},{}", a.0, a.1)
}

impl ContextJson {
    pub fn new(spec: &TransferSpec, ctx: &TransferContext) -> ContextJson {
        let maps = |m: &BTreeMap<Arity, crate::linalg::GradedMap>| m.iter().map(|(a, x)| (key(a), map_entries(x))).collect();
        ContextJson {
            spec: spec.clone(),
            source: ctx.source.bimodule().to_json(),
            target: ctx.target.to_json(),
            f: maps(&ctx.f),
            g: maps(&ctx.g),
            h: maps(&ctx.h),
        }
    }
}

/// One nonzero transferred operation on a decorated graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperationJson {
    pub input: DecoratedJson,
    /// `(basis id, coefficient)` pairs of the result.
    pub value: Vec<(String, String)>,
}

/// Output of a transfer run: the context and the nonzero operations found.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransferRun {
    pub context: ContextJson,
    pub max_vertices: usize,
    pub graphs: usize,
    pub evaluated: usize,
    pub exhaustive: bool,
    pub operations: Vec<OperationJson>,
}

/// Evaluates the transferred structure on every catalog graph up to `max_vertices`
/// vertices, at most `cap` decorations per graph shape.
pub fn transfer_run(spec: &TransferSpec, max_vertices: usize, cap: usize, seed: u64) -> Result<TransferRun> {
    use rayon::prelude::*;
    let (source, ctx) = spec.build()?;
    let sh = TransferredSh::new(ctx.clone());
    let bm = &ctx.target;
    let shapes = catalog(bm, 1, max_vertices, &|s| (source.graph_ok)(s));
    let per_shape = shapes
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let (decs, exhaustive) = decorations(bm, s, cap, seed.wrapping_add(i as u64));
            let mut ops = Vec::new();
            for d in &decs {
                let v = sh.mu(s, d)?;
                if v.is_zero() {
                    continue;
                }
                let input: DecoratedJson = serde_json::from_str(&witness(bm, s, d))?;
                let a = (s.m(), s.n());
                let value = v.iter().map(|(&k, c)| (bm.basis_id(a, k).to_string(), format_scalar(c))).collect();
                ops.push(OperationJson { input, value });
            }
            Ok((ops, decs.len(), exhaustive))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut run = TransferRun {
        context: ContextJson::new(spec, &ctx),
        max_vertices,
        graphs: shapes.len(),
        evaluated: 0,
        exhaustive: true,
        operations: Vec::new(),
    };
    for (ops, n, ex) in per_shape {
        run.operations.extend(ops);
        run.evaluated += n;
        run.exhaustive &= ex;
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_roundtrip() {
        let s = InstanceSpec::TransferredSh {
            transfer: Box::new(TransferSpec {
                source: InstanceSpec::EndomorphismDga { degrees: vec![0, 1], seed: 3 },
                contract_degrees: Some(vec![1]),
            }),
        };
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"kind\":\"transferred-sh\""));
        assert_eq!(InstanceSpec::parse(&text).unwrap(), s);
    }

    #[test]
    fn small_endomorphism_context_is_valid() {
        let t = TransferSpec { source: InstanceSpec::EndomorphismDga { degrees: vec![0, 1, 1], seed: 0 }, contract_degrees: None };
        let (src, ctx) = t.build().unwrap();
        assert_eq!(src.bimodule().dim((1, 1)), 9);
        ctx.validate().unwrap();
    }

    #[test]
    fn builds_are_deterministic() {
        let s = InstanceSpec::EndomorphismDga { degrees: vec![0, 1, 0, 1], seed: 7 };
        let a = s.build().unwrap().bimodule().to_json();
        let b = s.build().unwrap().bimodule().to_json();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn malformed_spec_reports_position() {
        let err = InstanceSpec::parse("{\"kind\": \"massey-dga\",,}").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn massey_run_finds_the_triple_product() {
        let spec = TransferSpec { source: InstanceSpec::MasseyDga, contract_degrees: None };
        let run = transfer_run(&spec, 3, 100, 0).unwrap();
        assert!(run.exhaustive);
        assert!(run.operations.iter().any(|o| o.input.decorations.len() == 3));
    }
}
