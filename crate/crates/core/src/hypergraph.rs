//! Hypergraphs over model variables: reduction, covering, twigs and branches,
//! hypertree construction sequences and heuristic hypertree covers.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub type VarSet = BTreeSet<usize>;

/// A set of nonempty hyperedges over a vertex set. Duplicate hyperedges are
/// collapsed and hyperedges are kept in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    vertices: VarSet,
    edges: Vec<VarSet>,
}

/// A twig together with every hyperedge that can serve as its branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Twig {
    pub twig: usize,
    pub branches: Vec<usize>,
}

impl Hypergraph {
    pub fn new(vertices: impl IntoIterator<Item = usize>, edges: impl IntoIterator<Item = VarSet>) -> Result<Self> {
        let vertices: VarSet = vertices.into_iter().collect();
        let edges: BTreeSet<VarSet> = edges.into_iter().collect();
        if edges.is_empty() {
            return Err(Error::InvalidHypergraph("a hypergraph needs at least one hyperedge".into()));
        }
        for e in &edges {
            if e.is_empty() {
                return Err(Error::InvalidHypergraph("empty hyperedge".into()));
            }
            if !e.is_subset(&vertices) {
                return Err(Error::InvalidHypergraph(format!("hyperedge {e:?} leaves the vertex set")));
            }
        }
        Ok(Hypergraph {
            vertices,
            edges: edges.into_iter().collect(),
        })
    }

    /// Vertex set taken as the union of the hyperedges.
    pub fn from_edges(edges: impl IntoIterator<Item = VarSet>) -> Result<Self> {
        let edges: Vec<VarSet> = edges.into_iter().collect();
        let vertices: VarSet = edges.iter().flatten().copied().collect();
        Self::new(vertices, edges)
    }

    pub fn vertices(&self) -> &VarSet {
        &self.vertices
    }

    pub fn edges(&self) -> &[VarSet] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Keeps only the ⊆-maximal hyperedges.
    pub fn reduce(&self) -> Hypergraph {
        let edges = self
            .edges
            .iter()
            .filter(|e| !self.edges.iter().any(|f| f != *e && e.is_subset(f)))
            .cloned()
            .collect();
        Hypergraph {
            vertices: self.vertices.clone(),
            edges,
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.reduce().edges.len() == self.edges.len()
    }

    /// Every hyperedge of `other` lies inside some hyperedge of `self`.
    pub fn covers(&self, other: &Hypergraph) -> bool {
        other
            .edges
            .iter()
            .all(|e| self.edges.iter().any(|f| e.is_subset(f)))
    }

    pub fn find_twigs(&self) -> Vec<Twig> {
        twigs_of(&self.edges.iter().collect::<Vec<_>>())
    }

    /// Construction sequence obtained by repeatedly deleting the
    /// lexicographically smallest twig; `None` if the hypergraph is not a
    /// hypertree.
    pub fn construction_sequence(&self) -> Option<ConstructionSequence> {
        let mut alive: Vec<usize> = (0..self.edges.len()).collect();
        // (deleted edge, its branch) in deletion order
        let mut deleted: Vec<(usize, usize)> = Vec::new();
        while alive.len() > 1 {
            let view: Vec<&VarSet> = alive.iter().map(|&i| &self.edges[i]).collect();
            let twigs = twigs_of(&view);
            let pick = twigs
                .iter()
                .min_by(|a, b| view[a.twig].cmp(view[b.twig]))?;
            let branch = *pick
                .branches
                .iter()
                .min_by(|&&a, &&b| view[a].cmp(view[b]))
                .expect("a twig always has a branch");
            deleted.push((alive[pick.twig], alive[branch]));
            alive.remove(pick.twig);
        }
        let root = alive[0];
        let mut order = vec![root];
        order.extend(deleted.iter().rev().map(|&(t, _)| t));
        let position: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        let mut branches = vec![None];
        branches.extend(deleted.iter().rev().map(|&(_, b)| Some(position[&b])));
        Some(ConstructionSequence {
            edges: order.iter().map(|&i| self.edges[i].clone()).collect(),
            branches,
        })
    }

    pub fn is_hypertree(&self) -> bool {
        self.construction_sequence().is_some()
    }

    /// A hypertree covering this hypergraph. Returns the hypergraph itself
    /// (reduced) when it already is one; otherwise builds one from min-fill
    /// vertex elimination with ties broken by lowest vertex index.
    pub fn hypertree_cover(&self) -> ConstructionSequence {
        let reduced = self.reduce();
        if let Some(seq) = reduced.construction_sequence() {
            return seq;
        }
        let cliques = elimination_cliques(&reduced.edges);
        let mut cover = Hypergraph {
            vertices: self.vertices.clone(),
            edges: dedup_sorted(cliques),
        }
        .reduce();
        connect_components(&mut cover.edges);
        let cover = Hypergraph {
            vertices: cover.vertices,
            edges: dedup_sorted(cover.edges),
        }
        .reduce();
        cover
            .construction_sequence()
            .expect("elimination cliques of a chordal completion form a hypertree")
    }
}

fn dedup_sorted(edges: Vec<VarSet>) -> Vec<VarSet> {
    edges.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Twigs of the hypergraph made of `edges` (indices refer to that slice).
fn twigs_of(edges: &[&VarSet]) -> Vec<Twig> {
    let mut out = Vec::new();
    for (t, twig) in edges.iter().enumerate() {
        // vertices of t that also occur in some other hyperedge
        let shared: VarSet = twig
            .iter()
            .copied()
            .filter(|x| edges.iter().enumerate().any(|(h, e)| h != t && e.contains(x)))
            .collect();
        let branches: Vec<usize> = edges
            .iter()
            .enumerate()
            .filter(|&(b, e)| b != t && !twig.is_disjoint(e) && shared.is_subset(e))
            .map(|(b, _)| b)
            .collect();
        if !branches.is_empty() {
            out.push(Twig { twig: t, branches });
        }
    }
    out
}

fn elimination_cliques(edges: &[VarSet]) -> Vec<VarSet> {
    let mut adj: BTreeMap<usize, VarSet> = BTreeMap::new();
    for e in edges {
        for &x in e {
            let entry = adj.entry(x).or_default();
            entry.extend(e.iter().copied().filter(|&y| y != x));
        }
    }
    let mut cliques = Vec::new();
    while !adj.is_empty() {
        let fill = |v: usize, adj: &BTreeMap<usize, VarSet>| -> usize {
            let nb: Vec<usize> = adj[&v].iter().copied().collect();
            let mut missing = 0;
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    if !adj[&nb[i]].contains(&nb[j]) {
                        missing += 1;
                    }
                }
            }
            missing
        };
        let v = *adj
            .keys()
            .min_by_key(|&&v| (fill(v, &adj), v))
            .expect("nonempty");
        let nb = adj.remove(&v).unwrap_or_default();
        for &a in &nb {
            let row = adj.get_mut(&a).expect("symmetric adjacency");
            row.remove(&v);
            row.extend(nb.iter().copied().filter(|&b| b != a));
        }
        let mut clique = nb;
        clique.insert(v);
        cliques.push(clique);
    }
    cliques
}

/// Joins disconnected groups of hyperedges by adding one vertex of the first
/// group to a hyperedge of every other group.
fn connect_components(edges: &mut [VarSet]) {
    let n = edges.len();
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(c: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while c[r] != r {
            r = c[r];
        }
        c[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edges[i].is_disjoint(&edges[j]) {
                let (a, b) = (find(&mut comp, i), find(&mut comp, j));
                comp[a.max(b)] = a.min(b);
            }
        }
    }
    let anchor = *edges[0].iter().next().expect("nonempty hyperedge");
    let mut seen = BTreeSet::new();
    for i in 0..n {
        let root = find(&mut comp, i);
        if seen.insert(root) && root != find(&mut comp, 0) {
            edges[i].insert(anchor);
        }
    }
}

/// Hyperedges `h_1..h_n` in construction order with the branch index of every
/// hyperedge after the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionSequence {
    edges: Vec<VarSet>,
    branches: Vec<Option<usize>>,
}

impl ConstructionSequence {
    /// Checks the twig property of every prefix before accepting.
    pub fn new(edges: Vec<VarSet>, branches: Vec<Option<usize>>) -> Result<Self> {
        let seq = ConstructionSequence { edges, branches };
        seq.validate()?;
        Ok(seq)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[VarSet] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> &VarSet {
        &self.edges[k]
    }

    pub fn branch(&self, k: usize) -> Option<usize> {
        self.branches[k]
    }

    pub fn root(&self) -> &VarSet {
        &self.edges[0]
    }

    /// `h_k ∩ h_{i_k}`; empty for the root.
    pub fn separator(&self, k: usize) -> VarSet {
        match self.branches[k] {
            Some(b) => self.edges[k].intersection(&self.edges[b]).copied().collect(),
            None => VarSet::new(),
        }
    }

    /// `h_k − h_{i_k}`; the whole root hyperedge for `k = 0`.
    pub fn residual(&self, k: usize) -> VarSet {
        match self.branches[k] {
            Some(b) => self.edges[k].difference(&self.edges[b]).copied().collect(),
            None => self.edges[k].clone(),
        }
    }

    pub fn hypergraph(&self) -> Hypergraph {
        Hypergraph::from_edges(self.edges.iter().cloned()).expect("sequence edges are nonempty")
    }

    /// Re-checks, for every `k ≥ 2`, that `h_k` is a twig of `{h_1..h_k}` with
    /// branch `h_{i_k}`, straight from the definition.
    pub fn validate(&self) -> Result<()> {
        if self.edges.is_empty() || self.edges.len() != self.branches.len() {
            return Err(Error::InvalidHypergraph("malformed construction sequence".into()));
        }
        if self.branches[0].is_some() {
            return Err(Error::InvalidHypergraph("the root has no branch".into()));
        }
        for k in 1..self.edges.len() {
            let b = self.branches[k]
                .filter(|&b| b < k)
                .ok_or_else(|| Error::InvalidHypergraph(format!("hyperedge {k} lacks an earlier branch")))?;
            let (t, br) = (&self.edges[k], &self.edges[b]);
            if t.is_disjoint(br) {
                return Err(Error::InvalidHypergraph(format!("hyperedge {k} does not meet its branch")));
            }
            for x in t {
                let elsewhere = self.edges[..k].iter().any(|h| h.contains(x));
                if elsewhere && !br.contains(x) {
                    return Err(Error::InvalidHypergraph(format!(
                        "hyperedge {k} shares vertex #{x} outside its branch"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(items: &[usize]) -> VarSet {
        items.iter().copied().collect()
    }

    fn hg(edges: &[&[usize]]) -> Hypergraph {
        Hypergraph::from_edges(edges.iter().map(|e| vs(e))).unwrap()
    }

    // A=0 B=1 C=2 D=3 E=4 F=5
    fn example_1() -> Hypergraph {
        hg(&[&[0, 1, 2], &[2, 3], &[3, 4], &[0, 4]])
    }

    fn example_2() -> Hypergraph {
        hg(&[&[0, 1, 2], &[2, 3], &[3, 4], &[0, 4], &[1, 5], &[5, 3]])
    }

    #[test]
    fn reduction() {
        assert_eq!(hg(&[&[0, 1]]).reduce(), hg(&[&[0, 1]]));
        assert_eq!(hg(&[&[0], &[0, 1]]).reduce().edges(), &[vs(&[0, 1])]);
        assert_eq!(hg(&[&[0, 1], &[1, 2], &[1]]).reduce().edges(), &[vs(&[0, 1]), vs(&[1, 2])]);
        let h = hg(&[&[0], &[0, 1], &[0, 1]]);
        assert_eq!(h.len(), 2);
    }

    #[test]
    fn covering() {
        let h = example_1();
        assert!(h.covers(&h));
        assert!(hg(&[&[0, 1, 2]]).covers(&hg(&[&[0, 1], &[1, 2]])));
        assert!(!hg(&[&[0, 1], &[1, 2]]).covers(&hg(&[&[0, 2]])));
    }

    #[test]
    fn twigs() {
        let two = hg(&[&[0, 1], &[1, 2]]);
        let t = two.find_twigs();
        assert_eq!(t, vec![Twig { twig: 0, branches: vec![1] }, Twig { twig: 1, branches: vec![0] }]);

        assert!(example_1().find_twigs().is_empty());

        let chain = hg(&[&[0, 1], &[1, 2], &[2, 3]]);
        let t = chain.find_twigs();
        assert_eq!(t, vec![Twig { twig: 0, branches: vec![1] }, Twig { twig: 2, branches: vec![1] }]);
    }

    #[test]
    fn sequences() {
        let single = hg(&[&[0, 1]]);
        assert_eq!(single.construction_sequence().unwrap().len(), 1);

        let chain = hg(&[&[0, 1], &[1, 2], &[2, 3]]);
        let seq = chain.construction_sequence().unwrap();
        assert_eq!(seq.len(), 3);
        seq.validate().unwrap();
        assert_eq!(seq.hypergraph(), chain);

        assert!(example_1().construction_sequence().is_none());
        assert!(example_2().construction_sequence().is_none());
        // disconnected hyperedges never form a hypertree
        assert!(hg(&[&[0], &[1]]).construction_sequence().is_none());
    }

    #[test]
    fn validator_rejects_bad_branch() {
        let bad = ConstructionSequence::new(
            vec![vs(&[0, 1]), vs(&[1, 2]), vs(&[0, 2])],
            vec![None, Some(0), Some(1)],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn covers_of_cyclic_examples() {
        for h in [example_1(), example_2(), hg(&[&[0], &[1]])] {
            let seq = h.hypertree_cover();
            seq.validate().unwrap();
            assert!(seq.hypergraph().covers(&h));
            assert!(seq.hypergraph().is_hypertree());
        }
        let seq = example_1().hypertree_cover();
        assert!(seq.edges().iter().all(|e| e.len() <= 3));

        let chain = hg(&[&[0, 1], &[1, 2], &[2, 3]]);
        assert_eq!(chain.hypertree_cover().hypergraph(), chain);
    }
}
