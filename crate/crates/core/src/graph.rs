//! Game arena: a directed weighted graph with optional parity labels.

use crate::num::{fmt_q, parse_q, Q};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DanglingEdge { from: String, to: String },
    SinkVertex(String),
    MissingParity(String),
    BadParity(String),
    DuplicateVertex(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEdge { from, to } => write!(f, "DanglingEdge: {from} -> {to}"),
            Violation::SinkVertex(v) => write!(f, "SinkVertex: {v} has no successor"),
            Violation::MissingParity(v) => write!(f, "MissingParity: {v}"),
            Violation::BadParity(v) => write!(f, "BadParity: {v} has a non-positive parity index"),
            Violation::DuplicateVertex(v) => write!(f, "DuplicateVertex: {v}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("invalid game graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One vertex as supplied by a caller.
#[derive(Debug, Clone)]
pub struct VertexSpec {
    pub id: String,
    pub weight: Q,
    pub parity: Option<u32>,
}

impl VertexSpec {
    pub fn new(id: impl Into<String>, weight: Q) -> Self {
        VertexSpec { id: id.into(), weight, parity: None }
    }

    pub fn with_parity(mut self, p: u32) -> Self {
        self.parity = Some(p);
        self
    }
}

/// Vertices are stored in canonical (lexicographic id) order and referred to
/// by index, so "smallest id" and "smallest index" coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    succ: Vec<Vec<usize>>,
    weight: Vec<Q>,
    parity: Option<Vec<u32>>,
}

impl GameGraph {
    /// Builds and validates a graph, reporting every violation at once.
    pub fn new(vertices: Vec<VertexSpec>, edges: Vec<(String, String)>) -> Result<Self, GraphError> {
        let mut violations = Vec::new();
        let mut by_id: BTreeMap<String, VertexSpec> = BTreeMap::new();
        for v in vertices {
            if by_id.contains_key(&v.id) {
                violations.push(Violation::DuplicateVertex(v.id.clone()));
            } else {
                by_id.insert(v.id.clone(), v);
            }
        }
        let ids: Vec<String> = by_id.keys().cloned().collect();
        let index: HashMap<String, usize> = ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut succ_sets = vec![BTreeSet::new(); ids.len()];
        for (from, to) in edges {
            match (index.get(&from), index.get(&to)) {
                (Some(&a), Some(&b)) => {
                    succ_sets[a].insert(b);
                }
                _ => violations.push(Violation::DanglingEdge { from, to }),
            }
        }
        for (i, s) in succ_sets.iter().enumerate() {
            if s.is_empty() {
                violations.push(Violation::SinkVertex(ids[i].clone()));
            }
        }
        let labelled = by_id.values().filter(|v| v.parity.is_some()).count();
        let parity = if labelled == 0 {
            None
        } else {
            for v in by_id.values() {
                match v.parity {
                    None => violations.push(Violation::MissingParity(v.id.clone())),
                    Some(0) => violations.push(Violation::BadParity(v.id.clone())),
                    _ => {}
                }
            }
            Some(by_id.values().map(|v| v.parity.unwrap_or(0)).collect())
        };
        if !violations.is_empty() {
            return Err(GraphError::Invalid(violations));
        }
        Ok(GameGraph {
            weight: by_id.values().map(|v| v.weight.clone()).collect(),
            succ: succ_sets.into_iter().map(|s| s.into_iter().collect()).collect(),
            ids,
            index,
            parity,
        })
    }

    /// Convenience constructor from string slices; panics on invalid input.
    pub fn from_parts(vertices: &[(&str, Q)], edges: &[(&str, &str)]) -> Self {
        Self::new(
            vertices.iter().map(|(id, w)| VertexSpec::new(*id, w.clone())).collect(),
            edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        )
        .expect("valid graph")
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vertex(&self, id: &str) -> Result<usize, GraphError> {
        self.index.get(id).copied().ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub fn succ(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn weight(&self, v: usize) -> &Q {
        &self.weight[v]
    }

    pub fn weights(&self) -> &[Q] {
        &self.weight
    }

    pub fn parity(&self, v: usize) -> Option<u32> {
        self.parity.as_ref().map(|p| p[v])
    }

    pub fn has_parity(&self) -> bool {
        self.parity.is_some()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(|s| s.len()).sum()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.succ[a].binary_search(&b).is_ok()
    }

    pub fn specs(&self) -> Vec<VertexSpec> {
        (0..self.len())
            .map(|v| VertexSpec { id: self.ids[v].clone(), weight: self.weight[v].clone(), parity: self.parity(v) })
            .collect()
    }

    pub fn edge_list(&self) -> Vec<(String, String)> {
        (0..self.len())
            .flat_map(|v| self.succ[v].iter().map(move |&u| (v, u)))
            .map(|(a, b)| (self.ids[a].clone(), self.ids[b].clone()))
            .collect()
    }

    /// Same arena with every weight replaced by `f(v, w)`.
    pub fn map_weights(&self, f: impl Fn(usize, &Q) -> Q) -> GameGraph {
        let mut g = self.clone();
        g.weight = (0..self.len()).map(|v| f(v, &self.weight[v])).collect();
        g
    }

    pub fn negated(&self) -> GameGraph {
        self.map_weights(|_, w| -w)
    }

    /// Every weight decreased by `by`.
    pub fn shifted(&self, by: &Q) -> GameGraph {
        self.map_weights(|_, w| w - by)
    }

    /// Induced subgraph on `keep` (edges leaving the set are dropped).
    /// Fails with `SinkVertex` if some kept vertex loses all its successors.
    pub fn induced(&self, keep: &[usize]) -> Result<GameGraph, GraphError> {
        let set: BTreeSet<usize> = keep.iter().copied().collect();
        let vertices = set
            .iter()
            .map(|&v| VertexSpec { id: self.ids[v].clone(), weight: self.weight[v].clone(), parity: self.parity(v) })
            .collect();
        let edges = set
            .iter()
            .flat_map(|&v| self.succ[v].iter().filter(|u| set.contains(u)).map(move |&u| (v, u)))
            .map(|(a, b)| (self.ids[a].clone(), self.ids[b].clone()))
            .collect();
        GameGraph::new(vertices, edges)
    }

    /// Breadth-first distances (in edges) to the set `targets`, following edges forward.
    pub fn distances_to(&self, targets: &[usize]) -> Vec<Option<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for v in 0..self.len() {
            for &u in &self.succ[v] {
                pred[u].push(v);
            }
        }
        let mut dist = vec![None; self.len()];
        let mut queue = std::collections::VecDeque::new();
        for &t in targets {
            dist[t] = Some(0);
            queue.push_back(t);
        }
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &p in &pred[u] {
                if dist[p].is_none() {
                    dist[p] = Some(d + 1);
                    queue.push_back(p);
                }
            }
        }
        dist
    }

    pub fn to_file(&self) -> GameFile {
        GameFile {
            vertices: self
                .specs()
                .into_iter()
                .map(|v| VertexEntry { id: v.id, weight: fmt_q(&v.weight), parity: v.parity })
                .collect(),
            edges: self.edge_list().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_file(file: GameFile) -> Result<GameGraph, GraphError> {
        let mut vertices = Vec::with_capacity(file.vertices.len());
        for (i, v) in file.vertices.into_iter().enumerate() {
            let weight = parse_q(&v.weight)
                .map_err(|e| GraphError::Parse(format!("vertices[{i}].weight (id {}): {e}", v.id)))?;
            vertices.push(VertexSpec { id: v.id, weight, parity: v.parity });
        }
        let edges = file.edges.into_iter().map(|[a, b]| (a, b)).collect();
        GameGraph::new(vertices, edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable") + "\n"
    }

    pub fn from_json(text: &str) -> Result<GameGraph, GraphError> {
        let file: GameFile = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<GameGraph, GraphError> {
        let p = path.as_ref();
        let text = std::fs::read_to_string(p).map_err(|source| GraphError::Io { path: p.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        let p = path.as_ref();
        std::fs::write(p, self.to_json()).map_err(|source| GraphError::Io { path: p.display().to_string(), source })
    }

    pub fn all_weights_zero(&self) -> bool {
        self.weight.iter().all(|w| w.is_zero())
    }
}

/// Re-validates a graph; kept for callers that receive graphs from elsewhere.
pub fn validate(graph: &GameGraph) -> Result<(), GraphError> {
    GameGraph::new(graph.specs(), graph.edge_list()).map(|_| ())
}

/// Checks that a parity objective can be requested.
pub fn require_parity(graph: &GameGraph) -> Result<(), GraphError> {
    if graph.has_parity() {
        Ok(())
    } else {
        Err(GraphError::Invalid(graph.ids().iter().map(|v| Violation::MissingParity(v.clone())).collect()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<[String; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub weight: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parity: Option<u32>,
}

/// Objectives a graph can be played under.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Reachability(usize),
    DoubleReachability(usize, usize),
    Parity,
    MeanPayoff,
    Energy(Q),
}
