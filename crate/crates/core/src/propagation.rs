//! Two-phase message passing on Markov trees built from hypertree
//! construction sequences.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evidence::EvidencePotential;
use crate::hypergraph::ConstructionSequence;
use crate::model::{same_model, Model, Scope};
use crate::valuation::BeliefValuation;

/// Default cap on the joint frame size for [`brute_force_joint`]: ten binary
/// variables.
pub const DEFAULT_JOINT_LIMIT: usize = 1 << 10;

/// Hyperedge nodes carrying factors, linked along the construction sequence.
#[derive(Debug, Clone)]
pub struct MarkovTree {
    model: Arc<Model>,
    sequence: ConstructionSequence,
    nodes: Vec<Scope>,
    factors: Vec<BeliefValuation>,
    neighbors: Vec<Vec<usize>>,
}

pub fn build_markov_tree(sequence: ConstructionSequence, factors: Vec<BeliefValuation>) -> Result<MarkovTree> {
    MarkovTree::new(sequence, factors)
}

impl MarkovTree {
    pub fn new(sequence: ConstructionSequence, factors: Vec<BeliefValuation>) -> Result<Self> {
        if factors.len() != sequence.len() {
            return Err(Error::InvalidHypergraph(format!(
                "{} factors for {} hyperedges",
                factors.len(),
                sequence.len()
            )));
        }
        let model = factors[0].scope().model().clone();
        let mut nodes = Vec::with_capacity(factors.len());
        for (k, f) in factors.iter().enumerate() {
            let node = Scope::new(&model, sequence.edge(k).iter().copied())?;
            if !same_model(f.scope().model(), &model) || !f.scope().is_subset(&node) {
                return Err(Error::ScopeMismatch(format!(
                    "factor on {} does not fit hyperedge {}",
                    f.scope(),
                    node
                )));
            }
            nodes.push(node);
        }
        let mut neighbors = vec![Vec::new(); sequence.len()];
        for k in 1..sequence.len() {
            let b = sequence.branch(k).expect("validated sequence");
            neighbors[k].push(b);
            neighbors[b].push(k);
        }
        Ok(MarkovTree {
            model,
            sequence,
            nodes,
            factors,
            neighbors,
        })
    }

    /// Markov tree for an arbitrary factor list: the reduced hypergraph of
    /// the factor scopes if it is a hypertree, else a heuristic hypertree
    /// cover. Each factor joins the lowest-index node containing its scope.
    pub fn from_factors(factors: &[BeliefValuation]) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::InvalidValuation("no factors given".into()))?;
        let model = first.scope().model().clone();
        let edges: Vec<_> = factors
            .iter()
            .filter(|f| !f.scope().is_empty())
            .map(|f| f.scope().vars().iter().copied().collect::<crate::hypergraph::VarSet>())
            .collect();
        let h = crate::hypergraph::Hypergraph::from_edges(edges)?.reduce();
        let sequence = h.construction_sequence().unwrap_or_else(|| h.hypertree_cover());
        let nodes = (0..sequence.len())
            .map(|k| Scope::new(&model, sequence.edge(k).iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        let mut node_factors: Vec<BeliefValuation> = nodes.iter().map(BeliefValuation::vacuous).collect();
        for f in factors {
            let k = nodes
                .iter()
                .position(|n| f.scope().is_subset(n))
                .ok_or_else(|| Error::InvalidHypergraph(format!("no node contains factor scope {}", f.scope())))?;
            node_factors[k] = node_factors[k].combine(f)?;
        }
        MarkovTree::new(sequence, node_factors)
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn sequence(&self) -> &ConstructionSequence {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_scope(&self, k: usize) -> &Scope {
        &self.nodes[k]
    }

    pub fn factors(&self) -> &[BeliefValuation] {
        &self.factors
    }

    pub fn separator(&self, a: usize, b: usize) -> Scope {
        self.nodes[a].intersection(&self.nodes[b])
    }

    /// Combination of all factors on the union scope.
    pub fn joint(&self, limit: usize) -> Result<BeliefValuation> {
        brute_force_joint(&self.factors, limit)
    }

    /// Lowest-index node whose hyperedge contains `scope`.
    pub fn host_of(&self, scope: &Scope) -> Option<usize> {
        self.nodes.iter().position(|n| scope.is_subset(n))
    }

    /// Node marginals of the factorized joint combined with the evidence,
    /// rooted at the first hyperedge of the construction sequence.
    pub fn propagate(&self, evidence: &[EvidencePotential]) -> Result<Vec<BeliefValuation>> {
        self.propagate_from(0, evidence)
    }

    /// Same as [`MarkovTree::propagate`] with messages collected towards
    /// `root`. Results do not depend on the root.
    pub fn propagate_from(&self, root: usize, evidence: &[EvidencePotential]) -> Result<Vec<BeliefValuation>> {
        if root >= self.len() {
            return Err(Error::InvalidHypergraph(format!("no node {root}")));
        }
        let mut factors = self.factors.clone();
        for e in evidence {
            let k = self.host_of(e.scope()).ok_or_else(|| {
                Error::ScopeMismatch(format!("no hyperedge contains the evidence scope {}", e.scope()))
            })?;
            factors[k] = factors[k].combine(e.valuation())?;
        }

        // breadth-first order from the root; parents precede children
        let mut order = vec![root];
        let mut parent = vec![usize::MAX; self.len()];
        parent[root] = root;
        let mut i = 0;
        while i < order.len() {
            let k = order[i];
            for &n in &self.neighbors[k] {
                if parent[n] == usize::MAX {
                    parent[n] = k;
                    order.push(n);
                }
            }
            i += 1;
        }

        let mut messages: HashMap<(usize, usize), BeliefValuation> = HashMap::new();
        // collect: leaves first
        for &k in order.iter().skip(1).rev() {
            let msg = self.message(&factors, &messages, k, parent[k])?;
            messages.insert((k, parent[k]), msg);
        }
        // distribute: root first
        for &k in order.iter().skip(1) {
            let msg = self.message(&factors, &messages, parent[k], k)?;
            messages.insert((parent[k], k), msg);
        }

        (0..self.len())
            .map(|k| {
                let mut acc = factors[k].clone();
                for &n in &self.neighbors[k] {
                    acc = acc.combine(&messages[&(n, k)])?;
                }
                acc.vacuous_extend(&self.nodes[k])
            })
            .collect()
    }

    fn message(
        &self,
        factors: &[BeliefValuation],
        messages: &HashMap<(usize, usize), BeliefValuation>,
        from: usize,
        to: usize,
    ) -> Result<BeliefValuation> {
        let mut acc = factors[from].clone();
        for &n in &self.neighbors[from] {
            if n != to {
                acc = acc.combine(&messages[&(n, from)])?;
            }
        }
        let sep = self.separator(from, to).intersection(acc.scope());
        acc.marginalize(&sep)
    }

    /// Normalized marginal of a single variable after propagation.
    pub fn query(&self, var: usize, evidence: &[EvidencePotential]) -> Result<BeliefValuation> {
        let target = Scope::new(&self.model, [var])?;
        let k = self
            .host_of(&target)
            .ok_or_else(|| Error::UnknownVariable(self.model.name(var).to_string()))?;
        let marginals = self.propagate(evidence)?;
        marginals[k].marginalize(&target)?.normalized()
    }
}

/// Combination of every factor on their union scope; the testing oracle that
/// local computation avoids.
pub fn brute_force_joint(factors: &[BeliefValuation], limit: usize) -> Result<BeliefValuation> {
    let first = factors
        .first()
        .ok_or_else(|| Error::InvalidValuation("no factors to combine".into()))?;
    let union = factors
        .iter()
        .skip(1)
        .fold(first.scope().clone(), |acc, f| acc.union(f.scope()));
    let size = union.config_count();
    if size > limit {
        return Err(Error::SizeLimit(format!(
            "joint frame of {union} has {size} configurations, limit is {limit}"
        )));
    }
    BeliefValuation::combine_all(factors)
}
