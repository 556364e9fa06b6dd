use serde::{Deserialize, Serialize};

use crate::engine::graph::{Direction, FactorGraph, Message};
use crate::error::{Result, VmpError};
use crate::expfam::{entropy, natural_to_common, CommonParameters, FamilyTag, NaturalParameterVector};
use crate::fragments::{conform_to_family, FragmentCtx};
use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmpOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// `η ← ρ·η_proposed + (1 − ρ)·η_old`, `ρ ∈ (0, 1]`.
    pub damping: f64,
    pub track_elbo: bool,
}

impl Default for VmpOptions {
    fn default() -> Self {
        VmpOptions { max_iter: 500, tol: 1e-8, damping: 1.0, track_elbo: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub converged: bool,
    pub max_relative_delta: f64,
    pub elbo_trace: Vec<f64>,
    /// False when a non-conjugate fragment is present and the trace may dip.
    pub monotone_expected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QDensity {
    pub node: String,
    pub family: FamilyTag,
    pub eta_q: NaturalParameterVector,
    pub common: CommonParameters,
}

impl FactorGraph {
    /// Refreshes the node→factor message on the edge between `node` and `factor`.
    pub fn update_node_to_factor(&mut self, node: usize, factor: usize) -> Result<Message> {
        let port = self.ports[factor]
            .iter()
            .position(|&i| i == node)
            .ok_or_else(|| {
                VmpError::Graph(format!(
                    "node '{}' is not a neighbor of factor '{}'",
                    self.nodes.get(node).map_or("?", |n| n.name.as_str()),
                    self.factors[factor].name
                ))
            })?;
        let payload = self.incoming_sum(node, Some((factor, port)));
        self.to_factor[factor][port] = payload.clone();
        Ok(Message {
            factor: self.factors[factor].name.clone(),
            node: self.nodes[node].name.clone(),
            direction: Direction::NodeToFactor,
            payload,
        })
    }

    /// Recomputes every outbound message of `factor`, port by port, so that
    /// later ports see the q-densities produced by earlier ones.
    pub fn update_factor(&mut self, factor: usize) -> Result<Vec<Message>> {
        if factor >= self.factors.len() {
            return Err(VmpError::Graph(format!("factor index {factor} out of range")));
        }
        let name = self.factors[factor].name.clone();
        let ctx = FragmentCtx { exec: self.exec };
        let arity = self.ports[factor].len();
        let mut out = Vec::with_capacity(arity);
        for port in 0..arity {
            for p in 0..arity {
                let node = self.ports[factor][p];
                self.update_node_to_factor(node, factor)?;
            }
            let combined: Vec<NaturalParameterVector> = (0..arity)
                .map(|p| self.to_factor[factor][p].add(&self.to_node[factor][p]))
                .collect::<Result<_>>()?;
            let refs: Vec<&NaturalParameterVector> = combined.iter().collect();
            let (mut eta, state) =
                self.factors[factor].fragment.message(port, &refs, ctx).map_err(|e| e.in_factor(&name))?;
            let node = self.ports[factor][port];
            let family = self.nodes[node].family;
            conform_to_family(family, &mut eta);
            if self.damping != 1.0 {
                eta = eta * self.damping + &self.to_node[factor][port].eta * (1.0 - self.damping);
            }
            let payload = NaturalParameterVector::new(family, eta).map_err(|e| e.in_factor(&name))?;
            self.to_node[factor][port] = payload.clone();
            if let Some(s) = state {
                self.states[factor] = s;
            }
            out.push(Message {
                factor: name.clone(),
                node: self.nodes[node].name.clone(),
                direction: Direction::FactorToNode,
                payload,
            });
        }
        for p in 0..arity {
            let node = self.ports[factor][p];
            self.refresh_node(node);
        }
        Ok(out)
    }

    /// Factor indices in declaration order.
    pub fn default_schedule(&self) -> Vec<usize> {
        (0..self.factors.len()).collect()
    }

    fn q_concat(&self) -> Vec<f64> {
        (0..self.nodes.len()).flat_map(|i| self.incoming_sum(i, None).eta.iter().copied().collect::<Vec<_>>()).collect()
    }

    /// Sweeps `schedule` until the relative change of every q-density natural
    /// parameter drops below `opts.tol` or `opts.max_iter` sweeps have run.
    pub fn run_vmp(&mut self, schedule: &[usize], opts: &VmpOptions) -> Result<ConvergenceReport> {
        if opts.max_iter == 0 {
            return Err(VmpError::domain("max_iter", "must be at least 1"));
        }
        if !(opts.tol > 0.0) {
            return Err(VmpError::domain("tol", format!("{} must be positive", opts.tol)));
        }
        if !(opts.damping > 0.0 && opts.damping <= 1.0) {
            return Err(VmpError::domain("damping", format!("{} is not in (0, 1]", opts.damping)));
        }
        if let Some(&f) = schedule.iter().find(|&&f| f >= self.factors.len()) {
            return Err(VmpError::Graph(format!("schedule references factor index {f}")));
        }
        if let Some(f) = (0..self.factors.len()).find(|f| !schedule.contains(f)) {
            return Err(VmpError::Graph(format!("schedule never visits factor '{}'", self.factors[f].name)));
        }
        self.damping = opts.damping;
        let monotone_expected = !self.factors.iter().any(|f| f.fragment.is_non_conjugate());
        let mut report = ConvergenceReport {
            iterations: 0,
            converged: false,
            max_relative_delta: f64::INFINITY,
            elbo_trace: Vec::new(),
            monotone_expected,
        };
        let mut prev = self.q_concat();
        for _ in 0..opts.max_iter {
            for &f in schedule {
                self.update_factor(f)?;
            }
            self.iteration += 1;
            report.iterations += 1;
            let cur = self.q_concat();
            report.max_relative_delta =
                cur.iter().zip(&prev).map(|(c, p)| (c - p).abs() / c.abs().max(1.0)).fold(0.0, f64::max);
            prev = cur;
            if opts.track_elbo {
                report.elbo_trace.push(self.elbo()?);
            }
            if report.max_relative_delta < opts.tol {
                report.converged = true;
                break;
            }
        }
        Ok(report)
    }

    /// Sum of all factor→node messages arriving at `node`, without a properness check.
    pub fn q_natural(&self, node: usize) -> NaturalParameterVector {
        self.incoming_sum(node, None)
    }

    pub fn q_density(&self, node: usize) -> Result<QDensity> {
        let spec = self.nodes.get(node).ok_or_else(|| VmpError::Graph(format!("node index {node} out of range")))?;
        let eta_q = self.q_natural(node);
        eta_q.check_proper().map_err(|e| e.in_node(&spec.name))?;
        let common = natural_to_common(&eta_q).map_err(|e| e.in_node(&spec.name))?;
        Ok(QDensity { node: spec.name.clone(), family: spec.family, eta_q, common })
    }

    pub fn q_density_by_name(&self, name: &str) -> Result<QDensity> {
        self.q_density(self.node_id(name)?)
    }

    pub fn q_densities(&self) -> Result<Vec<QDensity>> {
        (0..self.nodes.len()).map(|i| self.q_density(i)).collect()
    }

    /// Evidence lower bound `Σ Entropy{q(θᵢ)} + Σⱼ E_q{log fⱼ}`.
    pub fn elbo(&self) -> Result<f64> {
        let qs: Vec<NaturalParameterVector> = (0..self.nodes.len()).map(|i| self.q_natural(i)).collect();
        self.elbo_of(&qs)
    }

    /// ELBO with the q-density of `node` replaced by `q`.
    pub fn elbo_with(&self, node: usize, q: &NaturalParameterVector) -> Result<f64> {
        if node >= self.nodes.len() {
            return Err(VmpError::Graph(format!("node index {node} out of range")));
        }
        if q.family != self.nodes[node].family {
            return Err(VmpError::Graph(format!("node '{}' is {}, got {}", self.nodes[node].name, self.nodes[node].family, q.family)));
        }
        let mut qs: Vec<NaturalParameterVector> = (0..self.nodes.len()).map(|i| self.q_natural(i)).collect();
        qs[node] = q.clone();
        self.elbo_of(&qs)
    }

    fn elbo_of(&self, qs: &[NaturalParameterVector]) -> Result<f64> {
        let mut total = 0.0;
        for (i, q) in qs.iter().enumerate() {
            total += entropy(q).map_err(|e| e.in_node(&self.nodes[i].name))?;
        }
        let ctx = FragmentCtx { exec: self.exec };
        for (f, spec) in self.factors.iter().enumerate() {
            let refs: Vec<&NaturalParameterVector> = self.ports[f].iter().map(|&i| &qs[i]).collect();
            total += spec.fragment.expected_log_factor(&refs, ctx).map_err(|e| e.in_factor(&spec.name))?;
        }
        Ok(total)
    }

    /// Concatenated q-density natural parameters in node order.
    pub fn q_vector(&self) -> Vector {
        Vector::from_vec(self.q_concat())
    }
}
