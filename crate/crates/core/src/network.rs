//! Network graph, per-line parameters and input validation.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-length constants of one transmission line plus its length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineParams<T> {
    /// Resistance per length.
    pub r: T,
    /// Inductance per length.
    pub l: T,
    /// Conductance per length.
    pub g: T,
    /// Capacitance per length.
    pub c: T,
    pub length: T,
}

/// Constants of the characteristic form `ξ_t + Λ ξ_x + B ξ = 0`, `B = [[a, b], [b, a]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedLineConstants<T> {
    /// Wave speed `1/√(LC)`.
    pub lambda: T,
    /// Characteristic ratio `√(L/C)`.
    pub c: T,
    pub a: T,
    pub b: T,
}

impl<T: Scalar> LineParams<T> {
    pub fn new(r: T, l: T, g: T, c: T, length: T) -> Self {
        Self { r, l, g, c, length }
    }

    pub fn derived(&self) -> DerivedLineConstants<T> {
        DerivedLineConstants {
            lambda: (self.l * self.c).sqrt().recip(),
            c: (self.l / self.c).sqrt(),
            a: self.r / self.l + self.g / self.c,
            b: self.r / self.l - self.g / self.c,
        }
    }

    /// `√(C/L)`, the factor between voltage and characteristic differences.
    pub fn voltage_scale(&self) -> T {
        (self.c / self.l).sqrt()
    }

    /// `min(R/L, G/C)`, the decay rate this line contributes to the energy bound.
    pub fn damping_rate(&self) -> T {
        (self.r / self.l).min(self.g / self.c)
    }

    fn named(&self) -> [(&'static str, T); 5] {
        [
            ("R", self.r),
            ("L", self.l),
            ("G", self.g),
            ("C", self.c),
            ("length", self.length),
        ]
    }
}

pub fn derived_constants<T: Scalar>(params: &LineParams<T>) -> DerivedLineConstants<T> {
    params.derived()
}

/// Boundary data a node prescribes, as a phasor `X` with time signal `Re(X e^{jωt})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind<T> {
    /// Prescribed voltage.
    Generator(Complex<T>),
    /// Prescribed net current leaving the node into its lines.
    Load(Complex<T>),
}

impl<T: Scalar> NodeKind<T> {
    pub fn is_generator(&self) -> bool {
        matches!(self, NodeKind::Generator(_))
    }

    pub fn phasor(&self) -> Complex<T> {
        match *self {
            NodeKind::Generator(v) | NodeKind::Load(v) => v,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Generator(_) => "generator",
            NodeKind::Load(_) => "load",
        }
    }

    /// Same kind with the phasor replaced.
    pub fn with_phasor(&self, p: Complex<T>) -> Self {
        match self {
            NodeKind::Generator(_) => NodeKind::Generator(p),
            NodeKind::Load(_) => NodeKind::Load(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node<T> {
    pub id: String,
    pub kind: NodeKind<T>,
}

impl<T> Node<T> {
    pub fn new(id: impl Into<String>, kind: NodeKind<T>) -> Self {
        Self {
            id: id.into(),
            kind,
        }
    }
}

/// A line from `from` (at `x = 0`) to `to` (at `x = length`).
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    pub from: String,
    pub to: String,
    pub params: LineParams<T>,
}

impl<T> Edge<T> {
    pub fn new(from: impl Into<String>, to: impl Into<String>, params: LineParams<T>) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            params,
        }
    }
}

/// `+1` if `node_id` is the end of `edge`, `-1` if it is the start.
pub fn orientation_sign<T>(edge: &Edge<T>, node_id: &str) -> Result<i32> {
    if edge.to == node_id {
        Ok(1)
    } else if edge.from == node_id {
        Ok(-1)
    } else {
        Err(Error::NotIncident {
            edge: format!("{}->{}", edge.from, edge.to),
            node: node_id.to_owned(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyNetwork,
    NonPositiveOmega(f64),
    NonPositiveParameter {
        edge: usize,
        name: &'static str,
        value: f64,
    },
    NonFinitePhasor(String),
    DuplicateNodeId(String),
    DanglingEdge {
        edge: usize,
        node: String,
    },
    SelfLoop {
        edge: usize,
        node: String,
    },
    IsolatedNode(String),
    Disconnected {
        components: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyNetwork => write!(f, "network has no nodes"),
            Violation::NonPositiveOmega(w) => {
                write!(f, "non-positive angular frequency omega = {w}")
            }
            Violation::NonPositiveParameter { edge, name, value } => {
                write!(f, "non-positive parameter {name} = {value} on edge {edge}")
            }
            Violation::NonFinitePhasor(id) => write!(f, "non-finite phasor at node `{id}`"),
            Violation::DuplicateNodeId(id) => write!(f, "duplicate node id `{id}`"),
            Violation::DanglingEdge { edge, node } => {
                write!(f, "dangling edge {edge}: node `{node}` does not exist")
            }
            Violation::SelfLoop { edge, node } => {
                write!(f, "edge {edge} starts and ends at `{node}`")
            }
            Violation::IsolatedNode(id) => write!(f, "node `{id}` has no incident edge"),
            Violation::Disconnected { components } => {
                write!(f, "graph is disconnected ({components} components)")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Directed graph of generator/load nodes joined by lines, driven at one angular frequency.
///
/// Nodes are indexed densely in insertion order; that order fixes the rows of
/// every admittance matrix and the layout of exported files.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    nodes: Vec<Node<T>>,
    edges: Vec<Edge<T>>,
    omega: T,
    index: HashMap<String, usize>,
}

impl<T: Scalar> Network<T> {
    /// Builds and validates a network.
    pub fn new(nodes: Vec<Node<T>>, edges: Vec<Edge<T>>, omega: T) -> Result<Self> {
        let net = Self::unchecked(nodes, edges, omega);
        let report = validate(&net);
        if report.is_valid() {
            Ok(net)
        } else {
            Err(Error::InvalidNetwork(report))
        }
    }

    /// Builds without validation; run [`validate`] before simulating.
    pub fn unchecked(nodes: Vec<Node<T>>, edges: Vec<Edge<T>>, omega: T) -> Self {
        let mut index = HashMap::with_capacity(nodes.len());
        for (k, n) in nodes.iter().enumerate() {
            index.entry(n.id.clone()).or_insert(k);
        }
        Self {
            nodes,
            edges,
            omega,
            index,
        }
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// `(start, end)` node indices of an edge.
    ///
    /// Panics on dangling edges, which validation rules out.
    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        let e = &self.edges[edge];
        let s = self.node_index(&e.from).expect("edge start exists");
        let t = self.node_index(&e.to).expect("edge end exists");
        (s, t)
    }

    /// Edge indices touching `node`, in edge order.
    pub fn incident_edges(&self, node: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| {
                let (s, t) = self.endpoints(e);
                s == node || t == node
            })
            .collect()
    }

    /// Orientation sign with node and edge given by index.
    pub fn orientation_sign(&self, edge: usize, node: usize) -> Result<i32> {
        let (s, t) = self.endpoints(edge);
        if t == node {
            Ok(1)
        } else if s == node {
            Ok(-1)
        } else {
            Err(Error::NotIncident {
                edge: format!("{edge}"),
                node: self.nodes[node].id.clone(),
            })
        }
    }

    /// `min_e min(R_e/L_e, G_e/C_e)`.
    pub fn damping_rate(&self) -> T {
        self.edges
            .iter()
            .map(|e| e.params.damping_rate())
            .fold(T::infinity(), T::min)
    }

    /// Copy with all boundary phasors set to zero.
    pub fn homogeneous(&self) -> Self {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.kind = n.kind.with_phasor(Complex::new(T::zero(), T::zero()));
        }
        out
    }

    /// Copy with one edge's direction reversed.
    pub fn with_flipped_edge(&self, edge: usize) -> Self {
        let mut out = self.clone();
        let e = &mut out.edges[edge];
        std::mem::swap(&mut e.from, &mut e.to);
        out
    }
}

/// Checks every structural and parametric invariant, collecting all violations.
pub fn validate<T: Scalar>(network: &Network<T>) -> ValidationReport {
    let mut violations = Vec::new();
    if network.nodes.is_empty() {
        violations.push(Violation::EmptyNetwork);
    }
    if !(network.omega > T::zero()) || !network.omega.is_finite() {
        violations.push(Violation::NonPositiveOmega(network.omega.to_f64_lossy()));
    }

    let mut seen = HashSet::new();
    for n in &network.nodes {
        if !seen.insert(n.id.as_str()) {
            violations.push(Violation::DuplicateNodeId(n.id.clone()));
        }
        let p = n.kind.phasor();
        if !p.re.is_finite() || !p.im.is_finite() {
            violations.push(Violation::NonFinitePhasor(n.id.clone()));
        }
    }

    let mut adjacency = vec![Vec::new(); network.nodes.len()];
    for (k, e) in network.edges.iter().enumerate() {
        for (name, value) in e.params.named() {
            if !(value > T::zero()) || !value.is_finite() {
                violations.push(Violation::NonPositiveParameter {
                    edge: k,
                    name,
                    value: value.to_f64_lossy(),
                });
            }
        }
        let s = network.node_index(&e.from);
        let t = network.node_index(&e.to);
        for (id, idx) in [(&e.from, s), (&e.to, t)] {
            if idx.is_none() {
                violations.push(Violation::DanglingEdge {
                    edge: k,
                    node: id.clone(),
                });
            }
        }
        if e.from == e.to {
            violations.push(Violation::SelfLoop {
                edge: k,
                node: e.from.clone(),
            });
        }
        if let (Some(s), Some(t)) = (s, t) {
            adjacency[s].push(t);
            adjacency[t].push(s);
        }
    }

    for (k, n) in network.nodes.iter().enumerate() {
        if adjacency[k].is_empty() && network.nodes.len() > 1 {
            violations.push(Violation::IsolatedNode(n.id.clone()));
        }
    }
    if network.nodes.len() == 1 {
        violations.push(Violation::IsolatedNode(network.nodes[0].id.clone()));
    }

    let components = count_components(&adjacency);
    if components > 1 {
        violations.push(Violation::Disconnected { components });
    }

    ValidationReport { violations }
}

fn count_components(adjacency: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adjacency.len()];
    let mut count = 0;
    for root in 0..adjacency.len() {
        if seen[root] {
            continue;
        }
        count += 1;
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in &adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    count
}
