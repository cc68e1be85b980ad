//! Belief networks: dags whose nodes store mk-conditional valuations, their
//! induced hypergraphs, compatibility with hypergraphs, d-separation,
//! conditional independence, and conversion of valuated hypertrees into
//! networks.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, VarSet};
use crate::lattice::{conditional, decombine, mk_condition};
use crate::model::{same_model, Model, Scope};
use crate::propagation::MarkovTree;
use crate::valuation::BeliefValuation;

/// Tolerance for the mass-wise identities checked by [`ci_holds`].
pub const CI_TOL: f64 = 1e-9;

/// Directed acyclic graph over variables `0..n`, stored as parent lists.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(parents: Vec<Vec<usize>>) -> Result<Dag> {
        let n = parents.len();
        let mut parents = parents;
        for (v, ps) in parents.iter_mut().enumerate() {
            ps.sort_unstable();
            ps.dedup();
            if ps.iter().any(|&p| p >= n || p == v) {
                return Err(Error::InvalidNetwork(format!("bad parent list for node {v}")));
            }
        }
        let dag = Dag { parents };
        if dag.topological_order().is_none() {
            return Err(Error::InvalidNetwork("graph has a directed cycle".into()));
        }
        Ok(dag)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Dag> {
        let mut parents = vec![Vec::new(); n];
        for &(from, to) in edges {
            if to >= n {
                return Err(Error::InvalidNetwork(format!("edge into unknown node {to}")));
            }
            parents[to].push(from);
        }
        Dag::new(parents)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parents[c].contains(&v)).collect()
    }

    /// `{v} ∪ parents(v)`.
    pub fn family(&self, v: usize) -> VarSet {
        let mut f: VarSet = self.parents[v].iter().copied().collect();
        f.insert(v);
        f
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|c| self.parents[c].iter().map(move |&p| (p, c)))
            .collect()
    }

    /// Kahn's algorithm, smallest ready node first.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for c in 0..n {
                if self.parents[c].contains(&v) {
                    indegree[c] -= 1;
                    if indegree[c] == 0 {
                        ready.insert(c);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Nodes with a directed path into `seeds`, seeds included.
    pub fn ancestors(&self, seeds: &VarSet) -> VarSet {
        let mut out = seeds.clone();
        let mut stack: Vec<usize> = seeds.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if out.insert(p) {
                    stack.push(p);
                }
            }
        }
        out
    }
}

/// Reduced hypergraph of the family sets of a dag.
pub fn induced_hypergraph(dag: &Dag) -> Hypergraph {
    Hypergraph::new(0..dag.len(), (0..dag.len()).map(|v| dag.family(v)))
        .expect("families are nonempty")
        .reduce()
}

/// The reduced induced hypergraph coincides with the reduced hypergraph.
pub fn is_compatible(dag: &Dag, h: &Hypergraph) -> bool {
    induced_hypergraph(dag).edges() == h.reduce().edges()
}

/// Every dag on the vertices `0..n` of `h` compatible with it.
///
/// Each family must lie inside some hyperedge, so parent sets are drawn from
/// subsets of the hyperedges containing the node.
pub fn enumerate_compatible(h: &Hypergraph, max_vars: usize) -> Result<Vec<Dag>> {
    let n = h.vertices().len();
    if n > max_vars {
        return Err(Error::SizeLimit(format!("{n} variables exceed the enumeration limit of {max_vars}")));
    }
    if h.vertices().iter().copied().ne(0..n) {
        return Err(Error::InvalidHypergraph("vertices must be numbered 0..n".into()));
    }
    let reduced = h.reduce();
    let candidates: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|v| {
            let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
            sets.insert(Vec::new());
            for e in reduced.edges().iter().filter(|e| e.contains(&v)) {
                let others: Vec<usize> = e.iter().copied().filter(|&x| x != v).collect();
                for mask in 0..(1usize << others.len()) {
                    let subset = others
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &x)| x)
                        .collect();
                    sets.insert(subset);
                }
            }
            sets.into_iter().collect()
        })
        .collect();

    let mut found = Vec::new();
    let mut choice = vec![Vec::new(); n];
    fn search(
        v: usize,
        candidates: &[Vec<Vec<usize>>],
        choice: &mut Vec<Vec<usize>>,
        reduced: &Hypergraph,
        found: &mut Vec<Dag>,
    ) {
        if v == candidates.len() {
            if let Ok(dag) = Dag::new(choice.clone()) {
                if induced_hypergraph(&dag).edges() == reduced.edges() {
                    found.push(dag);
                }
            }
            return;
        }
        for parents in &candidates[v] {
            choice[v] = parents.clone();
            search(v + 1, candidates, choice, reduced, found);
        }
    }
    search(0, &candidates, &mut choice, &reduced, &mut found);
    Ok(found)
}

/// d-separation of `j` and `k` given `l`, decided on the moralized ancestral
/// graph of `j ∪ k ∪ l` with `l` removed.
pub fn d_separated(dag: &Dag, j: &VarSet, k: &VarSet, l: &VarSet) -> bool {
    let mut seeds = j.clone();
    seeds.extend(k);
    seeds.extend(l);
    let keep = dag.ancestors(&seeds);
    let n = dag.len();
    let mut adj = vec![Vec::new(); n];
    for &v in &keep {
        let ps = dag.parents(v);
        for &p in ps {
            adj[v].push(p);
            adj[p].push(v);
        }
        for (i, &a) in ps.iter().enumerate() {
            for &b in &ps[i + 1..] {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = j.iter().copied().filter(|v| !l.contains(v)).collect();
    for &v in &queue {
        seen[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        if k.contains(&v) {
            return false;
        }
        for &w in &adj[v] {
            if !seen[w] && keep.contains(&w) && !l.contains(&w) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    true
}

fn scope_of(model: &Arc<Model>, vars: &VarSet) -> Result<Scope> {
    Scope::new(model, vars.iter().copied())
}

/// Largest mass deviation between the two sides of the conditional
/// independence identity for `j`, `k` given `l`.
pub fn ci_gap(bel: &BeliefValuation, j: &VarSet, k: &VarSet, l: &VarSet) -> Result<f64> {
    if !j.is_disjoint(k) || !j.is_disjoint(l) || !k.is_disjoint(l) {
        return Err(Error::ScopeMismatch("conditional independence needs disjoint sets".into()));
    }
    let model = bel.scope().model();
    let all: VarSet = j.iter().chain(k).chain(l).copied().collect();
    let jl: VarSet = j.iter().chain(l).copied().collect();
    let kl: VarSet = k.iter().chain(l).copied().collect();
    let (all, jl, kl, ls) = (
        scope_of(model, &all)?,
        scope_of(model, &jl)?,
        scope_of(model, &kl)?,
        scope_of(model, l)?,
    );
    let marginal_l = bel.marginalize(&ls)?;
    let lhs = conditional(bel, &all, &ls)?.combine(&marginal_l)?;
    let rhs = conditional(bel, &jl, &ls)?
        .combine(&conditional(bel, &kl, &ls)?)?
        .combine(&marginal_l)?
        .vacuous_extend(&all)?;
    lhs.vacuous_extend(&all)?.max_abs_diff(&rhs)
}

/// Whether `j` and `k` are conditionally independent given `l` under `bel`.
pub fn ci_holds(bel: &BeliefValuation, j: &VarSet, k: &VarSet, l: &VarSet) -> Result<bool> {
    Ok(ci_gap(bel, j, k, l)? <= CI_TOL)
}

/// A dag plus one valuation per node on its family.
#[derive(Debug, Clone)]
pub struct BeliefNetwork {
    model: Arc<Model>,
    dag: Dag,
    valuations: Vec<BeliefValuation>,
}

impl BeliefNetwork {
    pub fn new(model: &Arc<Model>, dag: Dag, valuations: Vec<BeliefValuation>) -> Result<Self> {
        if dag.len() != model.len() || valuations.len() != model.len() {
            return Err(Error::InvalidNetwork(format!(
                "{} nodes and {} valuations for {} variables",
                dag.len(),
                valuations.len(),
                model.len()
            )));
        }
        for (v, val) in valuations.iter().enumerate() {
            let family = scope_of(model, &dag.family(v))?;
            if !same_model(val.scope().model(), model) || val.scope() != &family {
                return Err(Error::InvalidNetwork(format!(
                    "node `{}` stores a valuation on {} instead of its family {}",
                    model.name(v),
                    val.scope(),
                    family
                )));
            }
        }
        Ok(BeliefNetwork {
            model: model.clone(),
            dag,
            valuations,
        })
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn valuation(&self, v: usize) -> &BeliefValuation {
        &self.valuations[v]
    }

    pub fn valuations(&self) -> &[BeliefValuation] {
        &self.valuations
    }

    pub fn induced_hypergraph(&self) -> Hypergraph {
        induced_hypergraph(&self.dag)
    }

    /// Combination of all node valuations in topological order.
    pub fn underlying(&self) -> Result<BeliefValuation> {
        let order = self.dag.topological_order().expect("acyclic by construction");
        BeliefValuation::combine_all(order.iter().map(|&v| &self.valuations[v]))
    }
}

/// Result of converting a valuated hypertree into a belief network.
#[derive(Debug, Clone)]
pub struct Conversion {
    pub network: BeliefNetwork,
    /// Per hyperedge, the mk-conditional given its separator that the peeling
    /// left for it (the root keeps its full valuation).
    pub peeled: Vec<BeliefValuation>,
}

/// Converts a valuated hypertree into a belief network representing the same
/// joint and inducing the same reduced hypertree.
///
/// Hyperedges are peeled from the last to the first. The last hyperedge
/// collects the separator marginals of every other factor, is split into its
/// mk-conditional given the separator and the separator marginal, and the
/// marginal is handed to the branch while every other factor is decombined
/// by what it gave away. Each peeled valuation is then split along a
/// complete dag over its new variables (model order): the first new variable
/// takes the marginal on separator plus itself, every later one the
/// conditional given separator and the preceding new variables.
pub fn hypertree_to_network(tree: &MarkovTree) -> Result<Conversion> {
    let model = tree.model().clone();
    let seq = tree.sequence();
    let n = seq.len();
    let nodes: Vec<Scope> = (0..n).map(|k| tree.node_scope(k).clone()).collect();
    let mut current = tree
        .factors()
        .iter()
        .zip(&nodes)
        .map(|(f, h)| f.vacuous_extend(h))
        .collect::<Result<Vec<_>>>()?;
    let mut peeled: Vec<Option<BeliefValuation>> = vec![None; n];

    let step_err = |step: usize, what: &str, e: Error| match e {
        Error::NotDecombinable(msg) => Error::NotDecombinable(format!("peeling hyperedge {step} ({what}): {msg}")),
        other => other,
    };

    for last in (1..n).rev() {
        let h_last = &nodes[last];
        let branch = seq.branch(last).expect("non-root hyperedge");
        let sep = h_last.intersection(&nodes[branch]);

        let mut gathered = current[last].clone();
        for bel in &current[..last] {
            let inter = bel.scope().intersection(h_last);
            if !inter.is_empty() {
                gathered = gathered.combine(&bel.marginalize(&inter)?)?;
            }
        }
        let gathered = gathered.vacuous_extend(h_last)?;
        let sep_marginal = gathered.marginalize(&sep)?;
        let cond = decombine(&gathered, &sep_marginal).map_err(|e| step_err(last, "separator conditional", e))?;

        for (k, bel) in current.iter_mut().enumerate().take(last) {
            let inter = bel.scope().intersection(h_last);
            let mut star = if inter.is_empty() {
                bel.clone()
            } else {
                let gave = bel.marginalize(&inter)?;
                decombine(bel, &gave).map_err(|e| step_err(last, "factor remainder", e))?
            };
            if k == branch {
                star = star.combine(&sep_marginal)?;
            }
            *bel = star.vacuous_extend(&nodes[k])?;
        }
        peeled[last] = Some(cond);
    }
    peeled[0] = Some(current.swap_remove(0));
    let peeled: Vec<BeliefValuation> = peeled.into_iter().map(|p| p.expect("every hyperedge peeled")).collect();

    let mut parents: Vec<Option<Vec<usize>>> = vec![None; model.len()];
    let mut valuations: Vec<Option<BeliefValuation>> = vec![None; model.len()];
    for k in 0..n {
        let sep: Vec<usize> = seq.separator(k).into_iter().collect();
        let fresh: Vec<usize> = seq.residual(k).into_iter().collect();
        let mut previous = Scope::new(&model, sep.iter().copied())?;
        for (j, &x) in fresh.iter().enumerate() {
            let family = previous.with_var(x);
            let val = if j == 0 {
                peeled[k].marginalize(&family)?
            } else {
                conditional(&peeled[k], &family, &previous).map_err(|e| step_err(k, "split", e))?
            };
            if parents[x].is_some() {
                return Err(Error::InvalidHypergraph(format!(
                    "variable `{}` introduced by two hyperedges",
                    model.name(x)
                )));
            }
            parents[x] = Some(previous.vars().to_vec());
            valuations[x] = Some(val);
            previous = family;
        }
    }
    let mut dag_parents = Vec::with_capacity(model.len());
    let mut node_vals = Vec::with_capacity(model.len());
    for v in 0..model.len() {
        match (parents[v].take(), valuations[v].take()) {
            (Some(p), Some(val)) => {
                dag_parents.push(p);
                node_vals.push(val);
            }
            _ => {
                // variables outside every hyperedge carry the vacuous valuation
                dag_parents.push(Vec::new());
                node_vals.push(BeliefValuation::vacuous(&Scope::new(&model, [v])?));
            }
        }
    }
    let network = BeliefNetwork::new(&model, Dag::new(dag_parents)?, node_vals)?;
    Ok(Conversion { network, peeled })
}

/// mk-conditional of each node's family under `bel`, the valuation Def-style
/// networks store.
pub fn network_from_distribution(bel: &BeliefValuation, dag: &Dag) -> Result<BeliefNetwork> {
    let model = bel.scope().model().clone();
    let valuations = (0..dag.len())
        .map(|v| {
            let family = scope_of(&model, &dag.family(v))?;
            let parents = Scope::new(&model, dag.parents(v).iter().copied())?;
            if parents.is_empty() {
                bel.marginalize(&family)
            } else {
                mk_condition(&bel.marginalize(&family)?, &parents)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    BeliefNetwork::new(&model, dag.clone(), valuations)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(items: &[usize]) -> VarSet {
        items.iter().copied().collect()
    }

    // A=0 B=1 C=2 D=3 E=4 F=5
    fn example_1() -> Hypergraph {
        Hypergraph::from_edges([vs(&[0, 1, 2]), vs(&[2, 3]), vs(&[3, 4]), vs(&[0, 4])]).unwrap()
    }

    #[test]
    fn rejects_cycles() {
        assert!(Dag::from_edges(2, &[(0, 1), (1, 0)]).is_err());
        assert!(Dag::from_edges(2, &[(0, 0)]).is_err());
        assert_eq!(Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap().topological_order(), Some(vec![0, 1, 2]));
    }

    #[test]
    fn induced_hypergraphs() {
        let empty = Dag::from_edges(2, &[]).unwrap();
        assert_eq!(induced_hypergraph(&empty).edges(), &[vs(&[0]), vs(&[1])]);
        // C→B, C→D, D→E, E→A
        let d = Dag::from_edges(5, &[(2, 1), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(
            induced_hypergraph(&d).edges(),
            &[vs(&[0, 4]), vs(&[1, 2]), vs(&[2, 3]), vs(&[3, 4])]
        );
        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(induced_hypergraph(&chain).edges(), &[vs(&[0, 1]), vs(&[1, 2])]);
        assert!(is_compatible(&chain, &induced_hypergraph(&chain)));
    }

    #[test]
    fn example_one_structures_are_compatible() {
        let h = example_1();
        // {A,C}→B plus the four orientations of the C–D–E–A path
        let listed = [
            vec![(0, 1), (2, 1), (2, 3), (3, 4), (4, 0)],
            vec![(0, 1), (2, 1), (3, 2), (3, 4), (4, 0)],
            vec![(0, 1), (2, 1), (3, 2), (4, 3), (4, 0)],
            vec![(0, 1), (2, 1), (3, 2), (4, 3), (0, 4)],
        ];
        for edges in &listed {
            assert!(is_compatible(&Dag::from_edges(5, edges).unwrap(), &h));
        }
        let found = enumerate_compatible(&h, 6).unwrap();
        assert_eq!(found.len(), 4);
        for edges in &listed {
            assert!(found.contains(&Dag::from_edges(5, edges).unwrap()));
        }
    }

    #[test]
    fn two_variable_enumeration() {
        let h = Hypergraph::from_edges([vs(&[0, 1])]).unwrap();
        let found = enumerate_compatible(&h, 6).unwrap();
        assert_eq!(found.len(), 2);
        assert!(enumerate_compatible(&example_1(), 4).is_err());
    }

    #[test]
    fn d_separation_basics() {
        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(d_separated(&chain, &vs(&[0]), &vs(&[2]), &vs(&[1])));
        assert!(!d_separated(&chain, &vs(&[0]), &vs(&[2]), &vs(&[])));
        let collider = Dag::from_edges(3, &[(0, 1), (2, 1)]).unwrap();
        assert!(d_separated(&collider, &vs(&[0]), &vs(&[2]), &vs(&[])));
        assert!(!d_separated(&collider, &vs(&[0]), &vs(&[2]), &vs(&[1])));
        // C→B, C→D, D→E, E→A: D and E separate A from C
        let fig = Dag::from_edges(5, &[(0, 1), (2, 1), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert!(d_separated(&fig, &vs(&[0]), &vs(&[2]), &vs(&[3, 4])));
        assert!(!d_separated(&fig, &vs(&[0]), &vs(&[2]), &vs(&[3, 4, 1])));
    }

    #[test]
    fn ci_on_bayesian_chain() {
        let m = Model::binary(&["A", "B", "C"]).unwrap();
        // P(a0)=.3, P(b0|a)=(.8,.1), P(c0|b)=(.6,.25)
        let mut probs = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let pa = [0.3, 0.7][a];
                    let pb = if b == 0 { [0.8, 0.1][a] } else { 1.0 - [0.8, 0.1][a] };
                    let pc = if c == 0 { [0.6, 0.25][b] } else { 1.0 - [0.6, 0.25][b] };
                    probs.push(pa * pb * pc);
                }
            }
        }
        let bel = BeliefValuation::bayesian(&Scope::full(&m), &probs).unwrap();
        assert!(ci_holds(&bel, &vs(&[0]), &vs(&[2]), &vs(&[1])).unwrap());
        assert!(!ci_holds(&bel, &vs(&[0]), &vs(&[2]), &vs(&[])).unwrap());

        let ab = Scope::from_names(&m, &["A", "B"]).unwrap();
        let prod = BeliefValuation::bayesian(&Scope::from_names(&m, &["A"]).unwrap(), &[0.2, 0.8])
            .unwrap()
            .combine(&BeliefValuation::bayesian(&Scope::from_names(&m, &["B"]).unwrap(), &[0.6, 0.4]).unwrap())
            .unwrap();
        assert_eq!(prod.scope(), &ab);
        assert!(ci_holds(&prod, &vs(&[0]), &vs(&[1]), &vs(&[])).unwrap());
        assert!(ci_holds(&prod, &vs(&[0]), &vs(&[0]), &vs(&[])).is_err());
    }

    #[test]
    fn single_hyperedge_conversion_is_a_chain() {
        use crate::hypergraph::ConstructionSequence;
        let m = Model::binary(&["A", "B"]).unwrap();
        let joint = BeliefValuation::bayesian(&Scope::full(&m), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let seq = ConstructionSequence::new(vec![vs(&[0, 1])], vec![None]).unwrap();
        let tree = MarkovTree::new(seq, vec![joint.clone()]).unwrap();
        let conv = hypertree_to_network(&tree).unwrap();
        assert_eq!(conv.network.dag().parents(1), &[0]);
        assert!(conv.network.dag().parents(0).is_empty());
        assert!(conv.network.underlying().unwrap().approx_eq(&joint, 1e-12));
        let expect = network_from_distribution(&joint, conv.network.dag()).unwrap();
        for v in 0..2 {
            assert!(conv.network.valuation(v).approx_eq(expect.valuation(v), 1e-12));
        }
    }
}
