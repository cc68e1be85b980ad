//! Property suites run by `beltree check`, each producing a machine-readable
//! verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::configset::Bits;
use crate::error::Result;
use crate::generate::{generate_hypertree, generate_tree_distribution, GeneratorConfig};
use crate::hypergraph::{Hypergraph, VarSet};
use crate::lattice::{decombine, extended_commonality_table};
use crate::learning::MarginalTable;
use crate::model::{Model, Scope};
use crate::network::{enumerate_compatible, hypertree_to_network, induced_hypergraph};
use crate::propagation::brute_force_joint;
use crate::valuation::BeliefValuation;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: Vec<String>,
    pub details: serde_json::Value,
}

impl CheckReport {
    fn new(suite: &str, cases: usize, failures: Vec<String>, details: serde_json::Value) -> Self {
        CheckReport {
            suite: suite.to_string(),
            passed: failures.is_empty(),
            cases,
            failures,
            details,
        }
    }
}

fn random_valuation(scope: &Scope, rng: &mut impl Rng, with_frame: bool) -> Result<BeliefValuation> {
    let n = scope.config_count();
    let top = (1u64 << n) - 1;
    let mut sets: Vec<u64> = if with_frame { vec![top] } else { Vec::new() };
    let want = rng.random_range(1..=4usize).min(top as usize);
    while sets.len() < want {
        let w = rng.random_range(1..=top);
        if !sets.contains(&w) {
            sets.push(w);
        }
    }
    let weights: Vec<f64> = sets.iter().map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    BeliefValuation::from_bits(
        scope,
        sets.iter().zip(&weights).map(|(&w, &m)| (Bits::from_word(n, w), m / total)),
    )
}

fn random_scope(model: &std::sync::Arc<Model>, rng: &mut impl Rng) -> Result<Scope> {
    loop {
        let vars: Vec<usize> = (0..model.len()).filter(|_| rng.random_bool(0.5)).collect();
        if (1..=3).contains(&vars.len()) {
            return Scope::new(model, vars);
        }
    }
}

/// Commutativity, associativity, consonance, local computation, the
/// commonality product law and the decombination contract on random
/// instances over four binary variables.
pub fn check_axioms(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = Model::binary(&["A", "B", "C", "D"])?;
    let mut worst = [0.0f64; 6];
    let mut failures = Vec::new();
    let mut decombined = 0;
    for case in 0..cases {
        let (sa, sb, sc) = (
            random_scope(&model, &mut rng)?,
            random_scope(&model, &mut rng)?,
            random_scope(&model, &mut rng)?,
        );
        let a = random_valuation(&sa, &mut rng, false)?;
        let b = random_valuation(&sb, &mut rng, false)?;
        let c = random_valuation(&sc, &mut rng, false)?;
        let ab = a.combine(&b)?;
        let errs = {
            let commute = ab.max_abs_diff(&b.combine(&a)?)?;
            let assoc = a.combine(&b.combine(&c)?)?.max_abs_diff(&ab.combine(&c)?)?;
            let h = Scope::new(&model, [sa.vars()[0]])?;
            let consonance = a.marginalize(&h)?.max_abs_diff(&a.marginalize(&sa)?.marginalize(&h)?)?;
            let g = sa.union(&Scope::new(&model, [sb.vars()[0]])?);
            let local = ab
                .marginalize(&g)?
                .max_abs_diff(&a.combine(&b.marginalize(&g.intersection(&sb))?)?.vacuous_extend(&g)?)?;
            let union = ab.scope().clone();
            let qab = extended_commonality_table(&ab, &union)?;
            let qa = extended_commonality_table(&a, &union)?;
            let qb = extended_commonality_table(&b, &union)?;
            let product = qab
                .iter()
                .zip(qa.iter().zip(&qb))
                .map(|(x, (y, z))| (x - y * z).abs())
                .fold(0.0, f64::max);
            let with_frame = rng.random_bool(0.7);
            let b2 = random_valuation(&sb, &mut rng, with_frame)?;
            let b12 = a.combine(&b2)?;
            let round = match decombine(&b12, &b2) {
                Ok(d) => {
                    decombined += 1;
                    let back = b2.combine(&d)?;
                    back.max_abs_diff(&b12.vacuous_extend(back.scope())?)?
                }
                Err(_) => 0.0,
            };
            [commute, assoc, consonance, local, product, round]
        };
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
        if errs.iter().any(|&e| e > TOL) {
            failures.push(format!("case {case}: errors {errs:?}"));
        }
    }
    Ok(CheckReport::new(
        "axioms",
        cases,
        failures,
        json!({
            "max_error": {
                "commutativity": worst[0], "associativity": worst[1], "consonance": worst[2],
                "local_computation": worst[3], "commonality_product": worst[4], "decombination": worst[5],
            },
            "decombinable": decombined,
        }),
    ))
}

/// Strict dependence ordering along every length-two path of generated
/// trees.
pub fn check_theorem4(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut failures = Vec::new();
    let mut paths = 0;
    let mut margin = f64::INFINITY;
    for t in 0..trials as u64 {
        let cfg = GeneratorConfig::binary(5 + (t as usize % 4), seed + t);
        let g = generate_tree_distribution(&cfg)?;
        let table = MarginalTable::from_source(&g.joint)?;
        let n = g.model.len();
        let adjacent = |a: usize, b: usize| g.edges.contains(&(a.min(b), a.max(b)));
        for y in 0..n {
            let nbrs: Vec<usize> = (0..n).filter(|&v| v != y && adjacent(v, y)).collect();
            for (i, &x) in nbrs.iter().enumerate() {
                for &z in &nbrs[i + 1..] {
                    paths += 1;
                    let gap = table.dep_bn(x, y)?.value.min(table.dep_bn(y, z)?.value) - table.dep_bn(x, z)?.value;
                    margin = margin.min(gap);
                    if gap.is_nan() || gap <= 0.0 {
                        failures.push(format!(
                            "seed {}: path {}-{}-{} has margin {gap}",
                            cfg.seed,
                            g.model.name(x),
                            g.model.name(y),
                            g.model.name(z)
                        ));
                    }
                }
            }
        }
    }
    Ok(CheckReport::new(
        "theorem4",
        trials,
        failures,
        json!({ "paths": paths, "min_margin": margin }),
    ))
}

fn vs(items: &[usize]) -> VarSet {
    items.iter().copied().collect()
}

/// Compatible-dag counts and hypertree covers for the two cyclic example
/// hypergraphs over `A..F`.
pub fn check_examples() -> Result<CheckReport> {
    let one = Hypergraph::from_edges([vs(&[0, 1, 2]), vs(&[2, 3]), vs(&[3, 4]), vs(&[0, 4])])?;
    let two = Hypergraph::from_edges([
        vs(&[0, 1, 2]),
        vs(&[2, 3]),
        vs(&[3, 4]),
        vs(&[0, 4]),
        vs(&[1, 5]),
        vs(&[5, 3]),
    ])?;
    let mut failures = Vec::new();
    let n1 = enumerate_compatible(&one, 6)?.len();
    let n2 = enumerate_compatible(&two, 6)?.len();
    if n1 != 4 {
        failures.push(format!("five-variable cyclic hypergraph has {n1} compatible dags, expected 4"));
    }
    if n2 != 0 {
        failures.push(format!("six-variable cyclic hypergraph has {n2} compatible dags, expected 0"));
    }
    let mut widths = Vec::new();
    for (name, h) in [("five-variable hypergraph", &one), ("six-variable hypergraph", &two)] {
        if h.is_hypertree() {
            failures.push(format!("{name} is unexpectedly a hypertree"));
        }
        let cover = h.hypertree_cover();
        if !cover.hypergraph().covers(h) || cover.validate().is_err() {
            failures.push(format!("{name}: invalid hypertree cover"));
        }
        widths.push(cover.edges().iter().map(|e| e.len()).max().unwrap_or(0));
    }
    Ok(CheckReport::new(
        "examples",
        2,
        failures,
        json!({ "five_variable_dags": n1, "six_variable_dags": n2, "cover_widths": widths }),
    ))
}

/// Hypertree-to-network conversion: the network's product equals the
/// factorized joint and its induced hypergraph equals the hypertree.
pub fn check_roundtrip(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for t in 0..trials as u64 {
        let edges = rng.random_range(3..=5);
        let tree = generate_hypertree(6, edges, 3, seed + t)?;
        let full = Scope::full(tree.model());
        let joint = brute_force_joint(tree.factors(), 1 << 10)?.vacuous_extend(&full)?;
        match hypertree_to_network(&tree) {
            Ok(conv) => {
                let err = conv.network.underlying()?.vacuous_extend(&full)?.max_abs_diff(&joint)?;
                worst = worst.max(err);
                let same = induced_hypergraph(conv.network.dag()).edges() == tree.sequence().hypergraph().reduce().edges();
                if err > TOL || !same {
                    failures.push(format!("seed {}: product error {err:.3e}, structure preserved {same}", seed + t));
                }
            }
            Err(e) => failures.push(format!("seed {}: {e}", seed + t)),
        }
    }
    Ok(CheckReport::new(
        "roundtrip",
        trials,
        failures,
        json!({ "max_product_error": worst }),
    ))
}
