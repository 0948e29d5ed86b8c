//! Persistence and graph output.
//!
//! Trees are stored as versioned JSON. Probabilities are written with 17
//! significant digits so every `f64` survives the decimal round trip exactly.
//!
//! Graph output names each vertex by the path that reaches it, for example
//! `P1.1, v=1 | P1.2, v=2 | P1.3, v=3 | Leaf`, and labels each edge with the
//! conditional probability of its target. No synthetic root vertex is emitted
//! by default, so the graph falls apart into one weakly-connected component
//! per distinct value of the first column.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::table::{CategoricalTable, CategoricalValue};
use crate::tree::{DataNode, Node, ProbabilityTree, TreeError};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("failed to parse tree document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported tree format version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: Value },
    #[error("{0}")]
    InvariantViolation(String),
}

impl From<TreeError> for ExportError {
    fn from(e: TreeError) -> Self {
        ExportError::InvariantViolation(e.to_string())
    }
}

#[derive(Serialize)]
struct DocumentOut<'a> {
    format_version: u64,
    columns: &'a [String],
    root: NodeOut<'a>,
    metadata: &'a Map<String, Value>,
}

#[derive(Serialize)]
struct NodeOut<'a> {
    column_name: &'a str,
    data: Vec<DataOut<'a>>,
}

#[derive(Serialize)]
struct DataOut<'a> {
    value: &'a CategoricalValue,
    probability: Box<RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    child: Option<NodeOut<'a>>,
}

#[derive(Deserialize)]
struct DocumentIn {
    columns: Vec<String>,
    root: NodeIn,
    #[serde(default)]
    metadata: Map<String, Value>,
}

#[derive(Deserialize)]
struct NodeIn {
    column_name: String,
    data: Vec<DataIn>,
}

#[derive(Deserialize)]
struct DataIn {
    value: CategoricalValue,
    probability: f64,
    child: Option<NodeIn>,
}

/// Formats a probability with 17 significant digits.
fn probability_literal(p: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{p:.16e}")).expect("exponent literal is valid JSON")
}

fn node_out(node: &Node) -> NodeOut<'_> {
    NodeOut {
        column_name: &node.column_name,
        data: node
            .data
            .iter()
            .map(|d| DataOut {
                value: &d.value,
                probability: probability_literal(d.probability),
                child: d.next.as_deref().map(node_out),
            })
            .collect(),
    }
}

fn node_in(node: NodeIn) -> Node {
    Node {
        column_name: node.column_name,
        data: node
            .data
            .into_iter()
            .map(|d| DataNode {
                value: d.value,
                probability: d.probability,
                next: d.child.map(|c| Box::new(node_in(c))),
            })
            .collect(),
    }
}

/// Serializes a tree. `source_rows` is always recorded in the metadata.
pub fn to_json(tree: &ProbabilityTree) -> String {
    to_json_with_metadata(tree, Map::new())
}

/// Serializes a tree with extra metadata entries (build time, RNG name, ...).
pub fn to_json_with_metadata(tree: &ProbabilityTree, mut metadata: Map<String, Value>) -> String {
    metadata.insert("source_rows".into(), Value::from(tree.source_rows()));
    let doc = DocumentOut {
        format_version: FORMAT_VERSION,
        columns: tree.columns(),
        root: node_out(tree.root()),
        metadata: &metadata,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("tree documents always serialize");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<ProbabilityTree, ExportError> {
    from_json_with_metadata(text).map(|(tree, _)| tree)
}

/// Parses a tree document, checking its version and every tree invariant.
pub fn from_json_with_metadata(text: &str) -> Result<(ProbabilityTree, Map<String, Value>), ExportError> {
    let raw: Value = serde_json::from_str(text)?;
    let version = raw.get("format_version").cloned().unwrap_or(Value::Null);
    if version.as_u64() != Some(FORMAT_VERSION) {
        return Err(ExportError::VersionMismatch { found: version });
    }
    let doc: DocumentIn = serde_json::from_value(raw)?;
    let source_rows = doc
        .metadata
        .get("source_rows")
        .and_then(Value::as_u64)
        .unwrap_or(0) as usize;
    let tree = ProbabilityTree::from_parts(doc.columns, node_in(doc.root), source_rows)?;
    Ok((tree, doc.metadata))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub from_label: String,
    pub to_label: String,
    pub probability: f64,
}

/// One vertex per data node, in pre-order, with its parent vertex index.
struct Vertex<'a> {
    label: String,
    parent: Option<usize>,
    data: &'a DataNode,
}

fn vertices(tree: &ProbabilityTree) -> Vec<Vertex<'_>> {
    fn visit<'a>(node: &'a Node, prefix: &str, parent: Option<usize>, out: &mut Vec<Vertex<'a>>) {
        for d in &node.data {
            let mut path = String::from(prefix);
            if !path.is_empty() {
                path.push_str(" | ");
            }
            let _ = write!(path, "{}, v={}", node.column_name, d.value);
            let label = if d.is_leaf() { format!("{path} | Leaf") } else { path.clone() };
            let index = out.len();
            out.push(Vertex { label, parent, data: d });
            if let Some(child) = d.next.as_deref() {
                visit(child, &path, Some(index), out);
            }
        }
    }
    let mut out = Vec::new();
    visit(tree.root(), "", None, &mut out);
    out
}

/// All parent-to-child edges in pre-order.
pub fn graph_edges(tree: &ProbabilityTree) -> Vec<GraphEdge> {
    let vs = vertices(tree);
    vs.iter()
        .filter_map(|v| {
            v.parent.map(|p| GraphEdge {
                from_label: vs[p].label.clone(),
                to_label: v.label.clone(),
                probability: v.data.probability,
            })
        })
        .collect()
}

/// Edges grouped by the first-column value they descend from, one entry per
/// root alternative.
pub fn connected_components(tree: &ProbabilityTree) -> Vec<(CategoricalValue, Vec<GraphEdge>)> {
    let vs = vertices(tree);
    let mut out: Vec<(CategoricalValue, Vec<GraphEdge>)> = Vec::new();
    for v in &vs {
        match v.parent {
            None => out.push((v.data.value.clone(), Vec::new())),
            Some(p) => out
                .last_mut()
                .expect("pre-order visits a root vertex first")
                .1
                .push(GraphEdge {
                    from_label: vs[p].label.clone(),
                    to_label: v.label.clone(),
                    probability: v.data.probability,
                }),
        }
    }
    out
}

fn dot_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out
}

/// Renders the tree as a DOT digraph. With `single_root`, a synthetic `root`
/// vertex joins all components into one.
pub fn to_dot(tree: &ProbabilityTree, single_root: bool) -> String {
    let vs = vertices(tree);
    let mut out = String::from("digraph probability_tree {\n");
    if single_root {
        out.push_str("  root [label=\"root\"];\n");
    }
    for (i, v) in vs.iter().enumerate() {
        let _ = writeln!(out, "  n{i} [label=\"{}\"];", dot_escape(&v.label));
    }
    for (i, v) in vs.iter().enumerate() {
        let from = match v.parent {
            Some(p) => format!("n{p}"),
            None if single_root => "root".to_string(),
            None => continue,
        };
        let _ = writeln!(out, "  {from} -> n{i} [label=\"{:.6}\"];", v.data.probability);
    }
    out.push_str("}\n");
    out
}

/// Writes a table as CSV with a header row.
pub fn write_csv<W: Write>(table: &CategoricalTable, writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(table.columns())?;
    for row in table.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(table: &CategoricalTable) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}
