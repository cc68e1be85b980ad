//! Helpers shared by the integration tests: random valuations and
//! elementary oracles that do not go through the library's algebra.

#![allow(dead_code)]

use std::sync::Arc;

use beltree::{BeliefValuation, Bits, Model, Scope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random proper valuation with `focal` distinct nonempty focal elements;
/// with `with_frame` the full frame is one of them, keeping every
/// commonality positive.
pub fn random_valuation(scope: &Scope, focal: usize, with_frame: bool, rng: &mut impl Rng) -> BeliefValuation {
    let n = scope.config_count();
    assert!(n <= 16);
    let top = (1u64 << n) - 1;
    let mut sets: Vec<u64> = Vec::new();
    if with_frame {
        sets.push(top);
    }
    let want = focal.min(top as usize);
    while sets.len() < want {
        let w = rng.random_range(1..=top);
        if !sets.contains(&w) {
            sets.push(w);
        }
    }
    let weights: Vec<f64> = sets.iter().map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    BeliefValuation::from_bits(scope, sets.iter().zip(&weights).map(|(&w, &m)| (Bits::from_word(n, w), m / total)))
        .unwrap()
}

/// Random nonempty subset of the model's variables with at most `max` members.
pub fn random_scope(model: &Arc<Model>, max: usize, rng: &mut impl Rng) -> Scope {
    loop {
        let vars: Vec<usize> = (0..model.len()).filter(|_| rng.random_bool(0.5)).collect();
        if !vars.is_empty() && vars.len() <= max {
            return Scope::new(model, vars).unwrap();
        }
    }
}

/// Commonality by direct summation over focal elements of `b` extended to
/// `target`, with `a` given as configuration indices of `target`.
pub fn commonality_direct(b: &BeliefValuation, target: &Scope, a: &[usize]) -> f64 {
    let table = target.projection_table(b.scope());
    b.focal_bits()
        .filter(|(set, _)| a.iter().all(|&c| set.contains(table[c])))
        .map(|(_, m)| m)
        .sum()
}

/// Dense probability table of a Bayesian valuation on its own scope; mass on
/// the empty set is dropped.
pub fn prob_table(b: &BeliefValuation) -> Vec<f64> {
    let mut p = vec![0.0; b.scope().config_count()];
    for (set, m) in b.focal_bits() {
        let mut ones = set.iter_ones();
        let Some(i) = ones.next() else { continue };
        assert!(ones.next().is_none(), "not a singleton");
        p[i] += m;
    }
    p
}

/// Sum of a dense table over `full` onto the variables `keep`, returned
/// over `keep`'s own enumeration.
pub fn table_marginal(full: &Scope, p: &[f64], keep: &Scope) -> Vec<f64> {
    let proj = full.projection_table(keep);
    let mut out = vec![0.0; keep.config_count()];
    for (i, &x) in p.iter().enumerate() {
        out[proj[i]] += x;
    }
    out
}

/// Mutual information of `a` and `b` from a dense table over `full`.
pub fn mutual_information(full: &Scope, p: &[f64], a: usize, b: usize) -> f64 {
    let model = full.model();
    let ab = Scope::new(model, [a, b]).unwrap();
    let pab = table_marginal(full, p, &ab);
    let pa = table_marginal(full, p, &Scope::new(model, [a]).unwrap());
    let pb = table_marginal(full, p, &Scope::new(model, [b]).unwrap());
    let mut mi = 0.0;
    for (i, &x) in pab.iter().enumerate() {
        if x > 0.0 {
            let v = ab.decode(i);
            let (va, vb) = if a < b { (v[0], v[1]) } else { (v[1], v[0]) };
            mi += x * (x / (pa[va] * pb[vb])).ln();
        }
    }
    mi
}

/// Prim's algorithm for a maximum-weight spanning tree on a dense weight
/// matrix; edges returned as sorted `(min, max)` pairs.
pub fn prim_max_tree(w: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = w.len();
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut edges = Vec::new();
    for _ in 1..n {
        let mut best: Option<(f64, usize, usize)> = None;
        for u in (0..n).filter(|&u| in_tree[u]) {
            for v in (0..n).filter(|&v| !in_tree[v]) {
                if best.is_none_or(|(bw, _, _)| w[u][v] > bw) {
                    best = Some((w[u][v], u, v));
                }
            }
        }
        let (_, u, v) = best.unwrap();
        in_tree[v] = true;
        edges.push((u.min(v), u.max(v)));
    }
    edges.sort_unstable();
    edges
}
