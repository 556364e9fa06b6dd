use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VmpError};
use crate::exec::Exec;
use crate::expfam::{FamilyTag, NaturalParameterVector};
use crate::fragments::{FragmentCtx, FragmentSpec, FragmentState};
use crate::linalg::Vector;

/// Response link recorded on a model for curve extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    Logit,
    Probit,
    Log,
}

impl Link {
    /// Maps a linear-predictor value to the response scale.
    pub fn inverse(&self, eta: f64) -> f64 {
        match self {
            Link::Identity => eta,
            Link::Logit => crate::expfam::sigmoid(eta),
            Link::Probit => crate::special::norm_cdf(eta),
            Link::Log => eta.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    pub family: FamilyTag,
}

#[derive(Debug, Clone)]
pub struct FactorSpec {
    pub name: String,
    pub fragment: FragmentSpec,
    /// Node names bound to the fragment's ports, in port order.
    pub ports: Vec<String>,
}

/// Declarative description of a factor graph.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub nodes: Vec<NodeSpec>,
    pub factors: Vec<FactorSpec>,
    pub link: Link,
}

impl ModelSpec {
    pub fn new(link: Link) -> Self {
        ModelSpec { nodes: Vec::new(), factors: Vec::new(), link }
    }

    pub fn node(mut self, name: &str, family: FamilyTag) -> Self {
        self.nodes.push(NodeSpec { name: name.to_string(), family });
        self
    }

    pub fn factor(mut self, name: &str, fragment: FragmentSpec, ports: &[&str]) -> Self {
        self.factors.push(FactorSpec {
            name: name.to_string(),
            fragment,
            ports: ports.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    pub fn node_family(&self, name: &str) -> Option<FamilyTag> {
        self.nodes.iter().find(|n| n.name == name).map(|n| n.family)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FactorToNode,
    NodeToFactor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub factor: String,
    pub node: String,
    pub direction: Direction,
    pub payload: NaturalParameterVector,
}

/// Vague proper starting message for a node family.
pub fn initial_message(family: FamilyTag) -> Result<NaturalParameterVector> {
    let eta = match family {
        FamilyTag::MultivariateNormal(d) => {
            let mut eta = Vector::zeros(d + d * d);
            for i in 0..d {
                eta[d + i * (d + 1)] = -0.5 * 1e-2;
            }
            eta
        }
        FamilyTag::InverseChiSquared => Vector::from_column_slice(&[-1.5, -0.5]),
        FamilyTag::InverseWishart(d) | FamilyTag::InverseGWishartDiag(d) => {
            let mut eta = Vector::zeros(1 + d * d);
            eta[0] = -0.5 * (d as f64 + 2.0);
            for i in 0..d {
                eta[1 + i * (d + 1)] = -0.5;
            }
            eta
        }
        other => {
            return Err(VmpError::Graph(format!("no message initialization defined for {other} nodes")));
        }
    };
    NaturalParameterVector::new(family, eta)
}

/// Stochastic nodes, factors and the two-way message store.
#[derive(Debug, Clone)]
pub struct FactorGraph {
    pub(crate) nodes: Vec<NodeSpec>,
    pub(crate) factors: Vec<FactorSpec>,
    pub(crate) link: Link,
    node_index: HashMap<String, usize>,
    /// Node index bound to each factor port.
    pub(crate) ports: Vec<Vec<usize>>,
    /// `(factor, port)` pairs adjacent to each node.
    pub(crate) edges: Vec<Vec<(usize, usize)>>,
    pub(crate) to_node: Vec<Vec<NaturalParameterVector>>,
    pub(crate) to_factor: Vec<Vec<NaturalParameterVector>>,
    pub(crate) states: Vec<FragmentState>,
    pub(crate) iteration: usize,
    pub(crate) exec: Exec,
    pub(crate) damping: f64,
}

/// Validates `model` and initializes every message.
pub fn build_factor_graph(model: &ModelSpec) -> Result<FactorGraph> {
    if model.factors.is_empty() {
        return Err(VmpError::Graph("model has no factors".into()));
    }
    let mut node_index = HashMap::new();
    for (i, n) in model.nodes.iter().enumerate() {
        if node_index.insert(n.name.clone(), i).is_some() {
            return Err(VmpError::Graph(format!("duplicate node name '{}'", n.name)));
        }
    }
    let mut factor_names = HashMap::new();
    let mut ports = Vec::with_capacity(model.factors.len());
    let mut edges = vec![Vec::new(); model.nodes.len()];
    for (f, spec) in model.factors.iter().enumerate() {
        if factor_names.insert(spec.name.clone(), f).is_some() {
            return Err(VmpError::Graph(format!("duplicate factor name '{}'", spec.name)));
        }
        if spec.ports.len() != spec.fragment.arity() {
            return Err(VmpError::Graph(format!(
                "factor '{}' ({}) needs {} ports, got {}",
                spec.name,
                spec.fragment.kind(),
                spec.fragment.arity(),
                spec.ports.len()
            )));
        }
        let mut bound = Vec::with_capacity(spec.ports.len());
        for (p, node) in spec.ports.iter().enumerate() {
            let &i = node_index
                .get(node)
                .ok_or_else(|| VmpError::Graph(format!("factor '{}' references undeclared node '{node}'", spec.name)))?;
            if bound.contains(&i) {
                return Err(VmpError::Graph(format!("factor '{}' binds node '{node}' twice", spec.name)));
            }
            spec.fragment.check_port(p, model.nodes[i].family).map_err(|e| e.in_factor(&spec.name))?;
            bound.push(i);
            edges[i].push((f, p));
        }
        ports.push(bound);
    }
    if let Some(i) = edges.iter().position(|e| e.is_empty()) {
        return Err(VmpError::Graph(format!("node '{}' is not attached to any factor", model.nodes[i].name)));
    }
    let ctx = FragmentCtx { exec: Exec::default() };
    let mut to_node = Vec::with_capacity(ports.len());
    for (spec, bound) in model.factors.iter().zip(&ports) {
        let mut msgs = Vec::with_capacity(bound.len());
        for (p, &i) in bound.iter().enumerate() {
            let family = model.nodes[i].family;
            msgs.push(match spec.fragment.initial_message(p, ctx) {
                Some(eta) => NaturalParameterVector::new(family, eta).map_err(|e| e.in_factor(&spec.name))?,
                None => initial_message(family)?,
            });
        }
        to_node.push(msgs);
    }
    let to_factor = to_node.clone();
    let states = model.factors.iter().map(|f| f.fragment.initial_state()).collect();
    let mut graph = FactorGraph {
        nodes: model.nodes.clone(),
        factors: model.factors.clone(),
        link: model.link,
        node_index,
        ports,
        edges,
        to_node,
        to_factor,
        states,
        iteration: 0,
        exec: Exec::default(),
        damping: 1.0,
    };
    for i in 0..graph.nodes.len() {
        graph.refresh_node(i);
    }
    Ok(graph)
}

impl FactorGraph {
    pub fn node_names(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.name.as_str()).collect()
    }

    pub fn factor_names(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn link(&self) -> Link {
        self.link
    }

    /// Number of stored messages, counting both directions on every edge.
    pub fn message_count(&self) -> usize {
        2 * self.ports.iter().map(Vec::len).sum::<usize>()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn set_exec(&mut self, exec: Exec) {
        self.exec = exec;
    }

    pub fn node_id(&self, name: &str) -> Result<usize> {
        self.node_index.get(name).copied().ok_or_else(|| VmpError::Graph(format!("unknown node '{name}'")))
    }

    pub fn factor_id(&self, name: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| VmpError::Graph(format!("unknown factor '{name}'")))
    }

    /// Current factor→node payload on `(factor, port)`.
    pub fn message_to_node(&self, factor: usize, port: usize) -> &NaturalParameterVector {
        &self.to_node[factor][port]
    }

    /// Current node→factor payload on `(factor, port)`.
    pub fn message_to_factor(&self, factor: usize, port: usize) -> &NaturalParameterVector {
        &self.to_factor[factor][port]
    }

    pub fn state(&self, factor: usize) -> &FragmentState {
        &self.states[factor]
    }

    /// Sum of the factor→node payloads on the given edges of node `i`, skipping `skip`.
    pub(crate) fn incoming_sum(&self, i: usize, skip: Option<(usize, usize)>) -> NaturalParameterVector {
        let mut eta = Vector::zeros(self.nodes[i].family.eta_len());
        for &(f, p) in &self.edges[i] {
            if Some((f, p)) != skip {
                eta += &self.to_node[f][p].eta;
            }
        }
        NaturalParameterVector { family: self.nodes[i].family, eta }
    }

    /// Recomputes every node→factor message leaving node `i`.
    pub(crate) fn refresh_node(&mut self, i: usize) {
        for k in 0..self.edges[i].len() {
            let (f, p) = self.edges[i][k];
            self.to_factor[f][p] = self.incoming_sum(i, Some((f, p)));
        }
    }
}
