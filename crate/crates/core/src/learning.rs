//! Tree recovery: pairwise dependence measures, maximum-weight spanning
//! trees, orientation, and node valuation from pairwise marginals.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{estimate_marginal, smooth, smoothing_for, SampleDataset};
use crate::delta::delta_divergence;
use crate::error::{Error, Result};
use crate::generate::orient_tree;
use crate::lattice::{conditional, mk_condition};
use crate::model::{Model, Scope};
use crate::network::{BeliefNetwork, Dag};
use crate::valuation::BeliefValuation;

/// Anything that can supply marginals of one distribution.
pub trait MarginalSource: Sync {
    fn scope(&self) -> &Scope;
    fn marginal(&self, h: &Scope) -> Result<BeliefValuation>;
    /// Full-frame mass added to marginals before they enter δ.
    fn smoothing(&self) -> f64 {
        0.0
    }
}

impl MarginalSource for BeliefValuation {
    fn scope(&self) -> &Scope {
        BeliefValuation::scope(self)
    }

    fn marginal(&self, h: &Scope) -> Result<BeliefValuation> {
        self.marginalize(h)
    }
}

impl MarginalSource for SampleDataset {
    fn scope(&self) -> &Scope {
        SampleDataset::scope(self)
    }

    fn marginal(&self, h: &Scope) -> Result<BeliefValuation> {
        estimate_marginal(self, h)
    }

    fn smoothing(&self) -> f64 {
        smoothing_for(self.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    DepBn,
    DepKl,
}

/// Which side of the minimum in DEP_BN attained the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "arm", content = "var")]
pub enum Arm {
    /// Product of the two single marginals.
    Direct,
    /// Ternary background joint through the given variable.
    Background(usize),
    /// Mutual information; no minimum involved.
    Information,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepEntry {
    pub value: f64,
    pub arm: Arm,
}

/// Mutual information (natural log) of a Bayesian valuation on two
/// variables.
pub fn dep_kl(bel: &BeliefValuation) -> Result<f64> {
    let scope = bel.scope();
    if scope.len() != 2 || !bel.is_bayesian() {
        return Err(Error::InvalidValuation(format!(
            "mutual information needs a Bayesian valuation on two variables, got {} focal elements on {scope}",
            bel.focal_count()
        )));
    }
    let radices = scope.radices();
    let mut joint = vec![0.0; scope.config_count()];
    for (bits, m) in bel.focal_bits() {
        let idx = bits.iter_ones().next().expect("singleton");
        joint[idx] += m;
    }
    let mut px = vec![0.0; radices[0]];
    let mut py = vec![0.0; radices[1]];
    for (idx, &p) in joint.iter().enumerate() {
        let v = scope.decode(idx);
        px[v[0]] += p;
        py[v[1]] += p;
    }
    Ok(joint
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(idx, &p)| {
            let v = scope.decode(idx);
            p * (p / (px[v[0]] * py[v[1]])).ln()
        })
        .sum())
}

/// `(m13|x3 ⊙ m23|x3 ⊙ m3)` marginalized to `{x1, x2}`.
pub fn background_joint(
    m13: &BeliefValuation,
    m23: &BeliefValuation,
    m3: &BeliefValuation,
) -> Result<BeliefValuation> {
    let s3 = m3.scope();
    let target = m13.scope().union(m23.scope()).difference(s3);
    let k13 = mk_condition(m13, s3)
        .map_err(|e| Error::NotDecombinable(format!("conditional of {} given {s3}: {e}", m13.scope())))?;
    let k23 = mk_condition(m23, s3)
        .map_err(|e| Error::NotDecombinable(format!("conditional of {} given {s3}: {e}", m23.scope())))?;
    k13.combine(&k23)?.combine(m3)?.marginalize(&target)
}

/// The joint of `x1, x2` reconstructed as if they were independent given
/// `x3`.
pub fn ternary_background_joint(bel: &BeliefValuation, x1: usize, x2: usize, x3: usize) -> Result<BeliefValuation> {
    if x1 == x2 || x1 == x3 || x2 == x3 {
        return Err(Error::ScopeMismatch("background joint needs three distinct variables".into()));
    }
    let model = bel.scope().model();
    let m13 = bel.marginalize(&Scope::new(model, [x1, x3])?)?;
    let m23 = bel.marginalize(&Scope::new(model, [x2, x3])?)?;
    let m3 = bel.marginalize(&Scope::new(model, [x3])?)?;
    background_joint(&m13, &m23, &m3)
}

/// All single and pairwise marginals of a source, raw and smoothed.
#[derive(Debug, Clone)]
pub struct MarginalTable {
    model: Arc<Model>,
    vars: Vec<usize>,
    singles: HashMap<usize, BeliefValuation>,
    pairs: HashMap<(usize, usize), BeliefValuation>,
    smooth_singles: HashMap<usize, BeliefValuation>,
    smooth_pairs: HashMap<(usize, usize), BeliefValuation>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl MarginalTable {
    pub fn from_source(source: &dyn MarginalSource) -> Result<Self> {
        let scope = source.scope();
        let model = scope.model().clone();
        let vars = scope.vars().to_vec();
        let eps = source.smoothing();
        let prep = |b: BeliefValuation| -> Result<(BeliefValuation, BeliefValuation)> {
            let s = if eps > 0.0 { smooth(&b, eps)? } else { b.clone() };
            Ok((b, s))
        };
        let singles: Vec<(usize, (BeliefValuation, BeliefValuation))> = vars
            .par_iter()
            .map(|&v| Ok((v, prep(source.marginal(&Scope::new(&model, [v])?)?)?)))
            .collect::<Result<_>>()?;
        let pair_keys: Vec<(usize, usize)> = vars
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| vars[i + 1..].iter().map(move |&b| (a, b)))
            .collect();
        let pairs: Vec<((usize, usize), (BeliefValuation, BeliefValuation))> = pair_keys
            .par_iter()
            .map(|&(a, b)| Ok(((a, b), prep(source.marginal(&Scope::new(&model, [a, b])?)?)?)))
            .collect::<Result<_>>()?;
        let mut table = MarginalTable {
            model,
            vars,
            singles: HashMap::new(),
            pairs: HashMap::new(),
            smooth_singles: HashMap::new(),
            smooth_pairs: HashMap::new(),
        };
        for (v, (raw, sm)) in singles {
            table.singles.insert(v, raw);
            table.smooth_singles.insert(v, sm);
        }
        for (k, (raw, sm)) in pairs {
            table.pairs.insert(k, raw);
            table.smooth_pairs.insert(k, sm);
        }
        Ok(table)
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn single(&self, v: usize) -> &BeliefValuation {
        &self.singles[&v]
    }

    pub fn pair(&self, a: usize, b: usize) -> &BeliefValuation {
        &self.pairs[&key(a, b)]
    }

    /// DEP_BN from the smoothed marginals; ties prefer the direct arm, then
    /// the lowest background variable.
    pub fn dep_bn(&self, x1: usize, x2: usize) -> Result<DepEntry> {
        let reference = &self.smooth_pairs[&key(x1, x2)];
        let product = self.smooth_singles[&x1].combine(&self.smooth_singles[&x2])?;
        let mut best = DepEntry {
            value: delta_divergence(&product, reference)?,
            arm: Arm::Direct,
        };
        for &x3 in self.vars.iter().filter(|&&v| v != x1 && v != x2) {
            let approx = background_joint(
                &self.smooth_pairs[&key(x1, x3)],
                &self.smooth_pairs[&key(x2, x3)],
                &self.smooth_singles[&x3],
            )?;
            let value = delta_divergence(&approx, reference)?;
            if value < best.value {
                best = DepEntry {
                    value,
                    arm: Arm::Background(x3),
                };
            }
        }
        Ok(best)
    }

    pub fn dep_kl(&self, x1: usize, x2: usize) -> Result<DepEntry> {
        Ok(DepEntry {
            value: dep_kl(self.pair(x1, x2))?,
            arm: Arm::Information,
        })
    }

    pub fn dep(&self, measure: Measure, x1: usize, x2: usize) -> Result<DepEntry> {
        match measure {
            Measure::DepBn => self.dep_bn(x1, x2),
            Measure::DepKl => self.dep_kl(x1, x2),
        }
    }
}

/// DEP_BN of two variables of an exact distribution.
pub fn dep_bn(bel: &BeliefValuation, x1: usize, x2: usize) -> Result<DepEntry> {
    if x1 == x2 {
        return Err(Error::ScopeMismatch("DEP needs two distinct variables".into()));
    }
    MarginalTable::from_source(bel)?.dep_bn(x1, x2)
}

/// Symmetric matrix of pairwise dependence values over `vars`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepMatrix {
    vars: Vec<usize>,
    entries: HashMap<(usize, usize), DepEntry>,
}

impl DepMatrix {
    pub fn compute(table: &MarginalTable, measure: Measure) -> Result<Self> {
        let vars = table.vars().to_vec();
        let keys: Vec<(usize, usize)> = vars
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| vars[i + 1..].iter().map(move |&b| (a, b)))
            .collect();
        let entries = keys
            .par_iter()
            .map(|&(a, b)| Ok(((a, b), table.dep(measure, a, b)?)))
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(DepMatrix { vars, entries })
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn get(&self, a: usize, b: usize) -> DepEntry {
        self.entries[&key(a, b)]
    }

    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.get(a, b).value
    }

    /// Pairs `(a, b)` with `a < b` in index order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut keys: Vec<_> = self.entries.keys().copied().collect();
        keys.sort_unstable();
        keys
    }

    /// Whether `tree` is the only maximum-weight spanning tree: every
    /// non-tree pair must be strictly lighter than every tree edge on the
    /// path joining its ends.
    pub fn is_unique_maximum(&self, tree: &[(usize, usize)]) -> bool {
        let in_tree: BTreeSet<(usize, usize)> = tree.iter().map(|&(a, b)| key(a, b)).collect();
        self.pairs().into_iter().filter(|p| !in_tree.contains(p)).all(|(a, b)| {
            let w = self.value(a, b);
            tree_path(tree, a, b).windows(2).all(|s| w < self.value(s[0], s[1]))
        })
    }
}

/// Vertex path between `from` and `to` in an undirected tree.
pub fn tree_path(tree: &[(usize, usize)], from: usize, to: usize) -> Vec<usize> {
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut stack = vec![from];
    prev.insert(from, from);
    while let Some(v) = stack.pop() {
        if v == to {
            break;
        }
        for &(a, b) in tree {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(w) {
                e.insert(v);
                stack.push(w);
            }
        }
    }
    if !prev.contains_key(&to) {
        return Vec::new();
    }
    let mut path = vec![to];
    while *path.last().unwrap() != from {
        path.push(prev[path.last().unwrap()]);
    }
    path.reverse();
    path
}

/// Kruskal on descending weight; equal weights are ordered by the edge's
/// variable names. Returns the tree and a log of the ties that had to be
/// broken.
pub fn maximum_spanning_tree(matrix: &DepMatrix, model: &Model) -> Result<(Vec<(usize, usize)>, Vec<String>)> {
    let mut candidates = matrix.pairs();
    for &(a, b) in &candidates {
        if matrix.value(a, b).is_nan() {
            return Err(Error::Numeric(format!(
                "dependence of {} and {} is NaN",
                model.name(a),
                model.name(b)
            )));
        }
    }
    let name = |(a, b): (usize, usize)| {
        let (x, y) = (model.name(a), model.name(b));
        if x <= y {
            (x.to_string(), y.to_string())
        } else {
            (y.to_string(), x.to_string())
        }
    };
    candidates.sort_by(|&p, &q| {
        matrix
            .value(q.0, q.1)
            .partial_cmp(&matrix.value(p.0, p.1))
            .unwrap_or(Ordering::Equal)
            .then_with(|| name(p).cmp(&name(q)))
    });
    let index: HashMap<usize, usize> = matrix.vars().iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut uf = UnionFind::<usize>::new(matrix.vars().len());
    let mut tree = Vec::new();
    let mut ties = Vec::new();
    for (i, &(a, b)) in candidates.iter().enumerate() {
        if !uf.union(index[&a], index[&b]) {
            continue;
        }
        tree.push((a, b));
        let w = matrix.value(a, b);
        let tied: Vec<String> = candidates[i + 1..]
            .iter()
            .take_while(|&&(c, d)| matrix.value(c, d) == w)
            .map(|&p| format!("{}-{}", name(p).0, name(p).1))
            .collect();
        if !tied.is_empty() {
            let (x, y) = name((a, b));
            ties.push(format!("chose {x}-{y} over {} at weight {w}", tied.join(", ")));
        }
    }
    tree.sort_unstable();
    Ok((tree, ties))
}

/// A recovered tree with its network and the evidence behind it.
#[derive(Debug, Clone)]
pub struct LearnedTree {
    /// Undirected edges as sorted `(min, max)` pairs.
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
    pub network: BeliefNetwork,
    pub matrix: DepMatrix,
    pub ties: Vec<String>,
}

impl LearnedTree {
    /// Edges in exactly one of the two edge sets.
    pub fn distance_to(&self, edges: &[(usize, usize)]) -> usize {
        edge_distance(&self.edges, edges)
    }

    pub fn is_unique_maximum(&self) -> bool {
        self.matrix.is_unique_maximum(&self.edges)
    }
}

/// Size of the symmetric difference of two undirected edge sets.
pub fn edge_distance(a: &[(usize, usize)], b: &[(usize, usize)]) -> usize {
    let a: BTreeSet<_> = a.iter().map(|&(x, y)| key(x, y)).collect();
    let b: BTreeSet<_> = b.iter().map(|&(x, y)| key(x, y)).collect();
    a.symmetric_difference(&b).count()
}

/// Maximum-weight spanning tree of the chosen dependence measure, rooted at
/// the lowest-index variable, with each node valuated by the mk-conditional
/// of its pairwise marginal given its parent.
pub fn learn_tree(source: &dyn MarginalSource, measure: Measure) -> Result<LearnedTree> {
    let table = MarginalTable::from_source(source)?;
    learn_from_table(&table, measure)
}

pub fn learn_from_table(table: &MarginalTable, measure: Measure) -> Result<LearnedTree> {
    let model = table.model().clone();
    if table.vars().len() < 2 || table.vars().len() != model.len() {
        return Err(Error::InvalidModel("tree learning needs at least two variables and the full scope".into()));
    }
    let matrix = DepMatrix::compute(table, measure)?;
    let (edges, ties) = maximum_spanning_tree(&matrix, &model)?;
    let root = 0;
    let parents = orient_tree(model.len(), &edges, root);
    let valuations = (0..model.len())
        .map(|v| match parents[v].first() {
            None => Ok(table.single(v).clone()),
            Some(&p) => conditional(
                table.pair(v, p),
                &Scope::new(&model, [v, p])?,
                &Scope::new(&model, [p])?,
            ),
        })
        .collect::<Result<Vec<_>>>()?;
    let network = BeliefNetwork::new(&model, Dag::new(parents)?, valuations)?;
    Ok(LearnedTree {
        edges,
        root,
        network,
        matrix,
        ties,
    })
}
