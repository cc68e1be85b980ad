//! Seeded generators for tree-structured belief distributions, Bayesian
//! trees and valuated hypertrees.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::configset::Bits;
use crate::error::{Error, Result};
use crate::hypergraph::{ConstructionSequence, VarSet};
use crate::lattice::commonality_table;
use crate::model::{Model, Scope, Variable};
use crate::network::{BeliefNetwork, Dag};
use crate::propagation::MarkovTree;
use crate::valuation::BeliefValuation;

/// Largest variable count the generators materialize a joint for.
pub const MAX_GENERATED_VARS: usize = 10;

/// Largest joint frame the generators materialize (`4^10`).
pub const MAX_GENERATED_CONFIGS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub vars: usize,
    /// One entry per variable; empty means all binary.
    pub domain_sizes: Vec<usize>,
    /// Focal elements per node valuation, the full frame included.
    pub focal: usize,
    /// Floor on the commonality of every focal element of every single and
    /// pairwise marginal.
    pub q_min: f64,
    pub seed: u64,
    pub max_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            vars: 5,
            domain_sizes: Vec::new(),
            focal: 3,
            q_min: 0.05,
            seed: 0,
            max_attempts: 200,
        }
    }
}

impl GeneratorConfig {
    pub fn binary(vars: usize, seed: u64) -> Self {
        GeneratorConfig {
            vars,
            seed,
            ..GeneratorConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.vars < 1 || self.vars > MAX_GENERATED_VARS {
            return Err(Error::InvalidModel(format!(
                "variable count {} outside 1..={MAX_GENERATED_VARS}",
                self.vars
            )));
        }
        if !self.domain_sizes.is_empty() && self.domain_sizes.len() != self.vars {
            return Err(Error::InvalidModel(format!(
                "{} domain sizes for {} variables",
                self.domain_sizes.len(),
                self.vars
            )));
        }
        if self.domain_sizes.iter().any(|&d| !(1..=4).contains(&d)) {
            return Err(Error::InvalidModel("domain sizes must lie in 1..=4".into()));
        }
        if self.focal == 0 {
            return Err(Error::InvalidModel("at least one focal element per node".into()));
        }
        if !(self.q_min > 0.0 && self.q_min < 1.0) {
            return Err(Error::InvalidModel(format!("q_min {} outside (0, 1)", self.q_min)));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidModel("max_attempts must be positive".into()));
        }
        Ok(())
    }

    fn model(&self) -> Result<Arc<Model>> {
        let vars = (0..self.vars)
            .map(|i| {
                let name = variable_name(i);
                let size = self.domain_sizes.get(i).copied().unwrap_or(2);
                let lower = name.to_lowercase();
                Variable::new(name, (0..size).map(|k| format!("{lower}{k}")).collect())
            })
            .collect();
        Model::new(vars)
    }
}

/// `A`, `B`, …, `Z`, then `V26`, `V27`, ….
pub fn variable_name(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("V{i}")
    }
}

/// Uniform random labelled tree on `n` nodes (Prüfer decoding); edges are
/// returned as `(min, max)` pairs in sorted order.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let prufer: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &p in &prufer {
        degree[p] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &p in &prufer {
        let leaf = leaves.pop_first().expect("a leaf always exists");
        edges.push((leaf.min(p), leaf.max(p)));
        degree[p] -= 1;
        if degree[p] == 1 {
            leaves.insert(p);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    edges.sort_unstable();
    edges
}

/// Parent lists of a tree oriented away from `root`.
pub fn orient_tree(n: usize, edges: &[(usize, usize)], root: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parents = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parents[w].push(v);
                stack.push(w);
            }
        }
    }
    parents
}

/// A generated tree-structured distribution.
#[derive(Debug, Clone)]
pub struct GeneratedTree {
    pub model: Arc<Model>,
    /// Undirected tree edges as sorted `(min, max)` pairs.
    pub edges: Vec<(usize, usize)>,
    pub network: BeliefNetwork,
    pub joint: BeliefValuation,
    /// Attempts consumed before the commonality floor was met.
    pub attempts: usize,
}

fn random_masses(count: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..count).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Random proper valuation on a single variable: the full frame plus
/// distinct proper nonempty subsets.
fn random_root(scope: &Scope, focal: usize, rng: &mut impl Rng) -> Result<BeliefValuation> {
    let n = scope.config_count();
    let mut candidates: Vec<u64> = (1..(1u64 << n) - 1).collect();
    candidates.shuffle(rng);
    let mut sets = vec![Bits::full(n)];
    sets.extend(candidates.into_iter().take(focal - 1).map(|w| Bits::from_word(n, w)));
    let masses = random_masses(sets.len(), rng);
    BeliefValuation::from_bits(scope, sets.into_iter().zip(masses))
}

/// Random relation between `parent` and `child` that allows at least one
/// child value for every parent value, so every focal element projects onto
/// the full parent frame.
fn total_relation(scope: &Scope, parent: usize, child: usize, rng: &mut impl Rng) -> Bits {
    let model = scope.model();
    let (dp, dc) = (model.domain_size(parent), model.domain_size(child));
    let allowed: Vec<u64> = (0..dp).map(|_| rng.random_range(1..1u64 << dc)).collect();
    let mut bits = Bits::empty(scope.config_count());
    let parent_first = parent < child;
    for (p, mask) in allowed.iter().enumerate() {
        for c in (0..dc).filter(|c| mask >> c & 1 == 1) {
            let values = if parent_first { [p, c] } else { [c, p] };
            bits.insert(scope.encode(&values));
        }
    }
    bits
}

fn is_cylinder(bits: &Bits, scope: &Scope, parent: usize) -> bool {
    let n = scope.config_count();
    let (dp, dc) = (scope.model().domain_size(parent), n / scope.model().domain_size(parent));
    let parent_first = scope.vars()[0] == parent;
    let row = |p: usize| -> Vec<bool> {
        (0..dc)
            .map(|c| bits.contains(scope.encode(&if parent_first { [p, c] } else { [c, p] })))
            .collect()
    };
    let first = row(0);
    (1..dp).all(|p| row(p) == first)
}

/// Node valuation on `{parent, child}`: the full frame plus distinct total,
/// parent-dependent relations. Its parent marginal is vacuous, so it is its
/// own mk-conditional given the parent.
fn random_link(scope: &Scope, parent: usize, child: usize, focal: usize, rng: &mut impl Rng) -> Result<BeliefValuation> {
    let n = scope.config_count();
    let mut sets = vec![Bits::full(n)];
    let mut guard = 0;
    while sets.len() < focal {
        guard += 1;
        if guard > 10_000 {
            return Err(Error::InvalidModel(format!(
                "cannot find {} distinct dependent relations on {scope}",
                focal - 1
            )));
        }
        let r = total_relation(scope, parent, child, rng);
        if !is_cylinder(&r, scope, parent) && !sets.contains(&r) {
            sets.push(r);
        }
    }
    let masses = random_masses(sets.len(), rng);
    BeliefValuation::from_bits(scope, sets.into_iter().zip(masses))
}

/// Smallest commonality of any focal element of any single or pairwise
/// marginal of `joint`.
pub fn min_marginal_commonality(joint: &BeliefValuation) -> Result<f64> {
    let model = joint.scope().model().clone();
    let mut floor = f64::INFINITY;
    let mut check = |scope: Scope| -> Result<()> {
        let marginal = joint.marginalize(&scope)?;
        let q = commonality_table(&marginal)?;
        for (bits, _) in marginal.focal_bits() {
            floor = floor.min(q[bits.word() as usize]);
        }
        Ok(())
    };
    for i in joint.scope().vars().to_vec() {
        check(Scope::new(&model, [i])?)?;
    }
    let vars = joint.scope().vars().to_vec();
    for (a, &i) in vars.iter().enumerate() {
        for &j in &vars[a + 1..] {
            check(Scope::new(&model, [i, j])?)?;
        }
    }
    Ok(floor)
}

/// Random tree-structured DS distribution rooted at the first variable.
///
/// Links are total relations, so the joint is conflict-free and every stored
/// link is exactly the mk-conditional of the joint's pairwise marginal.
/// Parameters are redrawn until all single and pairwise marginals meet the
/// commonality floor.
pub fn generate_tree_distribution(cfg: &GeneratorConfig) -> Result<GeneratedTree> {
    cfg.validate()?;
    let model = cfg.model()?;
    check_joint_size(&model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.vars;
    for attempt in 1..=cfg.max_attempts {
        let edges = random_tree(n, &mut rng);
        let parents = orient_tree(n, &edges, 0);
        let mut valuations = Vec::with_capacity(n);
        for (v, ps) in parents.iter().enumerate() {
            let val = match ps.first() {
                None => {
                    let s = Scope::new(&model, [v])?;
                    if cfg.focal == 1 {
                        BeliefValuation::vacuous(&s)
                    } else {
                        random_root(&s, cfg.focal, &mut rng)?
                    }
                }
                Some(&p) => {
                    let s = Scope::new(&model, [p, v])?;
                    if cfg.focal == 1 {
                        BeliefValuation::vacuous(&s)
                    } else {
                        random_link(&s, p, v, cfg.focal, &mut rng)?
                    }
                }
            };
            valuations.push(val);
        }
        let network = BeliefNetwork::new(&model, Dag::new(parents)?, valuations)?;
        let joint = network.underlying()?.vacuous_extend(&Scope::full(&model))?;
        if min_marginal_commonality(&joint)? >= cfg.q_min {
            return Ok(GeneratedTree {
                model,
                edges,
                network,
                joint,
                attempts: attempt,
            });
        }
    }
    Err(Error::RetryExhausted {
        seed: cfg.seed,
        attempts: cfg.max_attempts,
    })
}

fn check_joint_size(model: &Arc<Model>) -> Result<()> {
    let size = Scope::full(model).config_count();
    if size > MAX_GENERATED_CONFIGS {
        return Err(Error::SizeLimit(format!(
            "joint frame has {size} configurations, generation is capped at {MAX_GENERATED_CONFIGS}"
        )));
    }
    Ok(())
}

/// Random Bayesian tree: root prior and conditional tables with entries
/// bounded away from zero; the joint is the product table.
pub fn generate_bayesian_tree(cfg: &GeneratorConfig) -> Result<GeneratedTree> {
    cfg.validate()?;
    let model = cfg.model()?;
    check_joint_size(&model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.vars;
    let edges = random_tree(n, &mut rng);
    let parents = orient_tree(n, &edges, 0);
    let dist = |size: usize, rng: &mut ChaCha8Rng| random_masses(size, rng);
    // tables[v][parent value][value]
    let tables: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|v| {
            let rows = parents[v].first().map_or(1, |&p| model.domain_size(p));
            (0..rows).map(|_| dist(model.domain_size(v), &mut rng)).collect()
        })
        .collect();
    let full = Scope::full(&model);
    let probs: Vec<f64> = (0..full.config_count())
        .map(|idx| {
            let values = full.decode(idx);
            (0..n)
                .map(|v| {
                    let row = parents[v].first().map_or(0, |&p| values[p]);
                    tables[v][row][values[v]]
                })
                .product()
        })
        .collect();
    let joint = BeliefValuation::bayesian(&full, &probs)?;
    let dag = Dag::new(parents)?;
    let network = crate::network::network_from_distribution(&joint, &dag)?;
    Ok(GeneratedTree {
        model,
        edges,
        network,
        joint,
        attempts: 1,
    })
}

/// Random hypertree over binary variables with hyperedges of size 2 or 3,
/// each carrying a proper valuation whose full-frame mass keeps every
/// commonality positive.
pub fn generate_hypertree(max_vars: usize, edges: usize, focal: usize, seed: u64) -> Result<MarkovTree> {
    if max_vars < 2 || max_vars > MAX_GENERATED_VARS || edges == 0 {
        return Err(Error::InvalidModel(format!(
            "cannot build {edges} hyperedges over at most {max_vars} variables"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hyperedges: Vec<VarSet> = Vec::new();
    let mut branches: Vec<Option<usize>> = Vec::new();
    let mut next = 0usize;
    let root_size = if max_vars >= 3 { rng.random_range(2..=3) } else { 2 };
    hyperedges.push((0..root_size).collect());
    branches.push(None);
    next += root_size;
    while hyperedges.len() < edges && next < max_vars {
        let b = rng.random_range(0..hyperedges.len());
        let size = rng.random_range(2..=3usize);
        let fresh_max = (size - 1).min(max_vars - next);
        let fresh = rng.random_range(1..=fresh_max);
        let shared_count = (size - fresh).min(hyperedges[b].len());
        let mut pool: Vec<usize> = hyperedges[b].iter().copied().collect();
        pool.shuffle(&mut rng);
        let mut e: VarSet = pool.into_iter().take(shared_count).collect();
        e.extend(next..next + fresh);
        next += fresh;
        hyperedges.push(e);
        branches.push(Some(b));
    }
    let names: Vec<String> = (0..next).map(variable_name).collect();
    let model = Model::binary(&names)?;
    let seq = ConstructionSequence::new(hyperedges, branches)?;
    let factors = (0..seq.len())
        .map(|k| {
            let scope = Scope::new(&model, seq.edge(k).iter().copied())?;
            let n = scope.config_count();
            let mut sets = vec![Bits::full(n)];
            let mut guard = 0;
            while sets.len() < focal.max(1) && guard < 10_000 {
                guard += 1;
                let w = rng.random_range(1..(1u64 << n) - 1);
                let b = Bits::from_word(n, w);
                if !sets.contains(&b) {
                    sets.push(b);
                }
            }
            let masses = random_masses(sets.len(), &mut rng);
            BeliefValuation::from_bits(&scope, sets.into_iter().zip(masses))
        })
        .collect::<Result<Vec<_>>>()?;
    MarkovTree::new(seq, factors)
}
