//! Calibration graph files.
//!
//! ```text
//! VERTEX_SE3:QUAT id tx ty tz qx qy qz qw          # label=front_camera
//! FIX id
//! EDGE_SE3:QUAT from to tx ty tz qx qy qz qw i11 i12 .. i16 i22 .. i66   # kind=handeye
//! ```
//!
//! The 21 information entries are the upper triangle in row-major order, in
//! the translation-first twist ordering. Node labels and edge kinds travel in
//! trailing comments so that other readers of the format ignore them.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use sensorgraph_core::nalgebra::Matrix6;
use sensorgraph_core::{CalibEdge, CalibGraph, NodeId, Pose, SensorNode};

use super::{read_with, records, write_file, Exact, Fields, FileError, ParseError};

pub const VERTEX: &str = "VERTEX_SE3:QUAT";
pub const EDGE: &str = "EDGE_SE3:QUAT";
pub const FIX: &str = "FIX";

#[derive(Clone, Debug, PartialEq)]
pub struct GraphFile {
    pub graph: CalibGraph,
    /// Nodes referenced by edges without a vertex record, in order of first
    /// use. They start at the identity pose.
    pub missing_vertices: Vec<NodeId>,
    /// Whether the file had at least one `FIX` record.
    pub has_fix: bool,
}

pub fn parse_graph(text: &str) -> Result<GraphFile, ParseError> {
    let mut graph = CalibGraph::new();
    let mut fixes: Vec<(usize, NodeId)> = Vec::new();
    let mut edges: Vec<(usize, CalibEdge)> = Vec::new();

    for (line, content, comment) in records(text) {
        let mut f = Fields::new(line, content);
        match f.next_token("record type")? {
            VERTEX => {
                let id = f.id("vertex id")?;
                let pose = f.pose()?;
                f.finish()?;
                let mut node = SensorNode::new(id, pose);
                if let Some(label) = comment.and_then(|c| tag_rest(c, "label=")) {
                    node.label = label.to_owned();
                }
                graph
                    .add_node(node)
                    .map_err(|e| ParseError::new(line, e.to_string()))?;
            }
            FIX => {
                fixes.push((line, f.id("node id")?));
                while let Ok(tok) = f.next_token("") {
                    let id = tok
                        .parse()
                        .map_err(|_| ParseError::new(line, format!("{tok:?} is not a node id")))?;
                    fixes.push((line, id));
                }
            }
            EDGE => {
                let from = f.id("edge source")?;
                let to = f.id("edge target")?;
                let measurement = f.pose()?;
                let mut info = Matrix6::zeros();
                for r in 0..6 {
                    for c in r..6 {
                        let v = f.number("information entry")?;
                        info[(r, c)] = v;
                        info[(c, r)] = v;
                    }
                }
                f.finish()?;
                let mut edge = CalibEdge::new(from, to, measurement, info);
                if let Some(kind) = comment.and_then(|c| tag_word(c, "kind=")) {
                    edge.kind = Some(kind.parse().map_err(|e| {
                        ParseError::new(line, format!("{e}"))
                    })?);
                }
                edges.push((line, edge));
            }
            other => return Err(f.error(format!("unknown record type {other:?}"))),
        }
    }

    let mut missing_vertices = Vec::new();
    for (_, e) in &edges {
        for id in [e.from, e.to] {
            if graph.node(id).is_none() {
                graph
                    .add_node(SensorNode::new(id, Pose::identity()))
                    .expect("id checked absent");
                missing_vertices.push(id);
            }
        }
    }
    for (line, edge) in edges {
        graph
            .add_edge(edge)
            .map_err(|e| ParseError::new(line, e.to_string()))?;
    }
    let has_fix = !fixes.is_empty();
    for (line, id) in fixes {
        graph
            .set_fixed(id, true)
            .map_err(|_| ParseError::new(line, format!("FIX names unknown node {id}")))?;
    }
    Ok(GraphFile {
        graph,
        missing_vertices,
        has_fix,
    })
}

/// First whitespace-delimited word after `key` in a comment.
fn tag_word<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    comment
        .split_whitespace()
        .find_map(|w| w.strip_prefix(key))
}

/// Everything after `key` in a comment.
fn tag_rest<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    let start = comment.find(key)? + key.len();
    Some(comment[start..].trim())
}

pub fn write_graph(graph: &CalibGraph) -> String {
    let mut out = String::new();
    for node in graph.nodes() {
        let _ = write!(out, "{VERTEX} {} {}", node.id, node.pose);
        if !node.label.is_empty() {
            let _ = write!(out, " # label={}", node.label);
        }
        out.push('\n');
    }
    let fixed: BTreeSet<NodeId> = graph.fixed_ids().into_iter().collect();
    for id in fixed {
        let _ = writeln!(out, "{FIX} {id}");
    }
    for edge in graph.edges() {
        out.push_str(&edge_record(edge));
        out.push('\n');
    }
    out
}

/// One `EDGE_SE3:QUAT` line without the newline.
pub fn edge_record(edge: &CalibEdge) -> String {
    let mut out = format!("{EDGE} {} {} {}", edge.from, edge.to, edge.measurement);
    for r in 0..6 {
        for c in r..6 {
            let _ = write!(out, " {}", Exact(edge.information[(r, c)]));
        }
    }
    if let Some(kind) = edge.kind {
        let _ = write!(out, " # kind={kind}");
    }
    out
}

pub fn read_graph(path: &Path) -> Result<GraphFile, FileError> {
    read_with(path, parse_graph)
}

pub fn save_graph(path: &Path, graph: &CalibGraph) -> Result<(), FileError> {
    write_file(path, &write_graph(graph))
}
