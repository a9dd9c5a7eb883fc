//! JSON documents accepted by the command line tool.
//!
//! Every document is an object with a `"kind"` field:
//!
//! * `implicit_set`: `{dim, equalities, inequalities, box, equality_tolerance}`
//! * `point_cloud`: `{dim, resolution, window_radius, points}`
//! * `multifunction_graph`: `{m, n, graph, slab, grid_step?, seed?}` where
//!   `graph` is an `implicit_set` or `point_cloud` document
//! * `piecewise_function`: `{arity, lipschitz_bound, pieces}`
//! * `expression`: `{arity, expr}`

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::expr::{Expr, ExprFn};
use crate::multifunctions::MultifunctionGraph;
use crate::sets::{sample, ImplicitSetSpec, PointCloud};
use crate::subgradients::PiecewiseFn;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetDocument {
    ImplicitSet(ImplicitSetSpec),
    PointCloud(PointCloud),
}

impl SetDocument {
    /// The set as a cloud; implicit sets are sampled with `grid_step`.
    pub fn to_cloud(&self, grid_step: Option<f64>, seed: u64) -> Result<PointCloud> {
        match self {
            SetDocument::PointCloud(c) => Ok(c.clone()),
            SetDocument::ImplicitSet(spec) => {
                let step = grid_step
                    .ok_or_else(|| invalid("sampling an implicit set needs a grid step"))?;
                sample(spec, step, seed)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub m: usize,
    pub n: usize,
    pub graph: SetDocument,
    pub slab: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl GraphDocument {
    pub fn build(&self, grid_step: Option<f64>, seed: Option<u64>) -> Result<MultifunctionGraph> {
        let cloud = self
            .graph
            .to_cloud(grid_step.or(self.grid_step), seed.unwrap_or(self.seed))?;
        MultifunctionGraph::new(self.m, self.n, cloud, self.slab)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionDocument {
    pub arity: usize,
    pub expr: Expr,
}

impl ExpressionDocument {
    pub fn to_fn(&self) -> Result<ExprFn> {
        ExprFn::new(self.arity, self.expr.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    ImplicitSet(ImplicitSetSpec),
    PointCloud(PointCloud),
    MultifunctionGraph(GraphDocument),
    PiecewiseFunction(PiecewiseFn),
    Expression(ExpressionDocument),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::ImplicitSet(_) => "implicit_set",
            Document::PointCloud(_) => "point_cloud",
            Document::MultifunctionGraph(_) => "multifunction_graph",
            Document::PiecewiseFunction(_) => "piecewise_function",
            Document::Expression(_) => "expression",
        }
    }

    /// The document as a set, if it is one.
    pub fn as_set(&self) -> Option<SetDocument> {
        match self {
            Document::ImplicitSet(s) => Some(SetDocument::ImplicitSet(s.clone())),
            Document::PointCloud(c) => Some(SetDocument::PointCloud(c.clone())),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let docs = [
            r#"{"kind":"point_cloud","dim":1,"resolution":0.1,"window_radius":2,"points":[[1],[2]]}"#,
            r#"{"kind":"implicit_set","dim":2,"equalities":[["-",["var",1],["pow",["var",0],2]]],"box":[[-1,1],[-1,1]]}"#,
            r#"{"kind":"multifunction_graph","m":1,"n":1,"slab":0.1,
                "graph":{"kind":"point_cloud","dim":2,"resolution":0.1,"window_radius":2,"points":[[0,1]]}}"#,
            r#"{"kind":"piecewise_function","arity":1,"lipschitz_bound":1,
                "pieces":[{"region":[["var",0]],"value":["var",0]},{"region":[["-",["var",0]]],"value":["-",["var",0]]}]}"#,
            r#"{"kind":"expression","arity":1,"expr":["sqrt",["abs",["var",0]]]}"#,
        ];
        let kinds: Vec<&str> = docs
            .iter()
            .map(|d| serde_json::from_str::<Document>(d).unwrap().kind())
            .collect();
        assert_eq!(
            kinds,
            [
                "point_cloud",
                "implicit_set",
                "multifunction_graph",
                "piecewise_function",
                "expression"
            ]
        );
    }

    #[test]
    fn graph_document_builds() {
        let d: Document = serde_json::from_str(
            r#"{"kind":"multifunction_graph","m":1,"n":1,"slab":0.02,"grid_step":0.01,
                "graph":{"kind":"implicit_set","dim":2,"equalities":[["-",["var",1],["var",0]]],
                         "box":[[-1,1],[-1,1]],"equality_tolerance":0.02}}"#,
        )
        .unwrap();
        let Document::MultifunctionGraph(g) = d else {
            panic!()
        };
        let f = g.build(None, None).unwrap();
        assert!(f.graph().len() > 100);
        let no_step = GraphDocument {
            grid_step: None,
            ..g
        };
        assert!(no_step.build(None, None).is_err());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(serde_json::from_str::<Document>(r#"{"kind":"teapot"}"#).is_err());
        assert!(serde_json::from_str::<Document>(
            r#"{"kind":"expression","arity":1,"expr":["var",3]}"#
        )
        .map(|d| match d {
            Document::Expression(e) => e.to_fn().is_err(),
            _ => false,
        })
        .unwrap());
        assert!(serde_json::from_str::<Document>(
            r#"{"kind":"point_cloud","dim":1,"resolution":-1,"window_radius":2,"points":[]}"#
        )
        .is_err());
    }

    #[test]
    fn round_trips() {
        let d: Document = serde_json::from_str(
            r#"{"kind":"point_cloud","dim":2,"resolution":0.5,"window_radius":3,"points":[[1,2],[0,0]]}"#,
        )
        .unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<Document>(&s).unwrap(), d);
    }
}
