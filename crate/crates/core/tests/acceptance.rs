//! Acceptance suite: one PASS/FAIL line per criterion, exit status nonzero
//! if any criterion fails.

mod common;

use std::time::Instant;

use beltree::hypergraph::VarSet;
use beltree::learning::MarginalTable;
use beltree::network::induced_hypergraph;
use beltree::{
    brute_force_joint, ci_holds, d_separated, decombine, delta_divergence, enumerate_compatible,
    generate_bayesian_tree, generate_hypertree, generate_tree_distribution, hypertree_to_network, is_compatible,
    learn_tree, mk_condition, sample, EvidencePotential, GeneratorConfig, Hypergraph, Measure,
    Model, Scope,
};
use common::*;
use rand::Rng;

const TOL: f64 = 1e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn vs(items: &[usize]) -> VarSet {
    items.iter().copied().collect()
}

fn exact_recovery() -> Outcome {
    let start = Instant::now();
    let mut recovered = 0;
    let mut misses = Vec::new();
    for trial in 0..20u64 {
        let cfg = GeneratorConfig {
            vars: 5 + (trial as usize % 4),
            q_min: 0.05,
            seed: trial,
            ..GeneratorConfig::default()
        };
        let g = generate_tree_distribution(&cfg).expect("generator");
        let learned = learn_tree(&g.joint, Measure::DepBn).expect("learning");
        if learned.edges == g.edges {
            recovered += 1;
        } else {
            misses.push(format!("seed {trial}: distance {}", learned.distance_to(&g.edges)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        recovered == 20 && secs < 60.0,
        format!("{recovered}/20 trees recovered in {secs:.2}s {misses:?}"),
    )
}

fn sampled_recovery() -> Outcome {
    let mut hits = 0;
    let mut distances = Vec::new();
    for trial in 0..20u64 {
        let g = generate_tree_distribution(&GeneratorConfig::binary(8, 1000 + trial)).expect("generator");
        let data = sample(&g.joint, 200, trial).expect("sampling");
        let learned = learn_tree(&data, Measure::DepBn).expect("learning");
        let d = learned.distance_to(&g.edges);
        distances.push(d);
        if d == 0 {
            hits += 1;
        }
    }
    let rate = hits as f64 / 20.0;
    outcome(
        rate >= 0.7,
        format!("{hits}/20 trees recovered from 200 samples; edge-set distances {distances:?}"),
    )
}

fn propagation_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut rng = rng(33);
    for seed in 0..50u64 {
        let edges = rng.random_range(2..=5);
        let tree = generate_hypertree(6, edges, 3, seed).expect("hypertree");
        let model = tree.model().clone();
        let joint = brute_force_joint(tree.factors(), 1 << 10).expect("joint");
        let var = rng.random_range(0..model.len());
        let value = rng.random_range(0..model.domain_size(var));
        let label = model.variable(var).domain[value].clone();
        let evidence = EvidencePotential::hard(&model, model.name(var), &[label]).expect("evidence");
        let conditioned = joint.combine(evidence.valuation()).expect("combine");
        for (ev, reference) in [(vec![], &joint), (vec![evidence], &conditioned)] {
            let marginals = tree.propagate(&ev).expect("propagation");
            for (k, m) in marginals.iter().enumerate() {
                let expect = reference.marginalize(tree.node_scope(k)).expect("marginal");
                worst = worst.max(m.max_abs_diff(&expect).expect("same scope"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= TOL && secs < 30.0,
        format!("50 trees, max mass error {worst:.2e}, {secs:.2}s"),
    )
}

fn hypertree_round_trip() -> Outcome {
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut rng = rng(44);
    for seed in 0..25u64 {
        let edges = rng.random_range(3..=5);
        let tree = generate_hypertree(6, edges, 3, 500 + seed).expect("hypertree");
        let joint = brute_force_joint(tree.factors(), 1 << 10).expect("joint");
        let conv = match hypertree_to_network(&tree) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("seed {}: {e}", 500 + seed));
                continue;
            }
        };
        let product = conv.network.underlying().expect("product");
        let full = Scope::full(tree.model());
        let err = product
            .vacuous_extend(&full)
            .and_then(|p| p.max_abs_diff(&joint.vacuous_extend(&full)?))
            .expect("comparable");
        worst = worst.max(err);
        let same_structure = induced_hypergraph(conv.network.dag()).edges() == tree.sequence().hypergraph().reduce().edges();
        if err <= TOL && same_structure {
            ok += 1;
        } else {
            failures.push(format!("seed {}: error {err:.2e}, structure {same_structure}", 500 + seed));
        }
    }
    outcome(
        ok == 25,
        format!("{ok}/25 round trips, max product error {worst:.2e} {failures:?}"),
    )
}

fn examples_fidelity() -> Outcome {
    // A=0 B=1 C=2 D=3 E=4 F=5
    let ex1 = Hypergraph::from_edges([vs(&[0, 1, 2]), vs(&[2, 3]), vs(&[3, 4]), vs(&[0, 4])]).unwrap();
    let ex2 = Hypergraph::from_edges([
        vs(&[0, 1, 2]),
        vs(&[2, 3]),
        vs(&[3, 4]),
        vs(&[0, 4]),
        vs(&[1, 5]),
        vs(&[5, 3]),
    ])
    .unwrap();
    let one = enumerate_compatible(&ex1, 6).expect("enumeration");
    let two = enumerate_compatible(&ex2, 6).expect("enumeration");
    let all_compatible = one.iter().all(|d| is_compatible(d, &ex1));
    outcome(
        one.len() == 4 && two.is_empty() && all_compatible,
        format!("five-variable cycle: {} dags, six-variable cycle: {} dags", one.len(), two.len()),
    )
}

fn theorem4() -> Outcome {
    let mut paths = 0;
    let mut margin = f64::INFINITY;
    let mut violations = Vec::new();
    for seed in 0..20u64 {
        let g = generate_tree_distribution(&GeneratorConfig::binary(5 + (seed as usize % 4), 2000 + seed))
            .expect("generator");
        let table = MarginalTable::from_source(&g.joint).expect("marginals");
        let dep = |a: usize, b: usize| table.dep_bn(a, b).expect("dep").value;
        let n = g.model.len();
        let adjacent = |a: usize, b: usize| g.edges.contains(&(a.min(b), a.max(b)));
        for y in 0..n {
            let nbrs: Vec<usize> = (0..n).filter(|&v| v != y && adjacent(v, y)).collect();
            for (i, &x) in nbrs.iter().enumerate() {
                for &z in &nbrs[i + 1..] {
                    paths += 1;
                    let gap = dep(x, y).min(dep(y, z)) - dep(x, z);
                    margin = margin.min(gap);
                    if gap <= 0.0 {
                        violations.push(format!(
                            "seed {}: {}-{}-{}",
                            2000 + seed,
                            g.model.name(x),
                            g.model.name(y),
                            g.model.name(z)
                        ));
                    }
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!("{paths} paths, smallest strictness margin {margin:.3e} {violations:?}"),
    )
}

fn axioms() -> Outcome {
    let mut rng = rng(77);
    let model = Model::binary(&["A", "B", "C", "D"]).unwrap();
    let mut worst = [0.0f64; 5];
    let mut decombined = 0;
    for _ in 0..200 {
        let sa = random_scope(&model, 3, &mut rng);
        let sb = random_scope(&model, 3, &mut rng);
        let sc = random_scope(&model, 3, &mut rng);
        let f = |s: &Scope, rng: &mut _| {
            let k = rng_focal(rng);
            random_valuation(s, k, false, rng)
        };
        let (a, b, c) = (f(&sa, &mut rng), f(&sb, &mut rng), f(&sc, &mut rng));

        let ab = a.combine(&b).unwrap();
        worst[0] = worst[0].max(ab.max_abs_diff(&b.combine(&a).unwrap()).unwrap());
        let left = a.combine(&b.combine(&c).unwrap()).unwrap();
        let right = ab.combine(&c).unwrap();
        worst[1] = worst[1].max(left.max_abs_diff(&right).unwrap());

        // consonance: h ⊆ g ⊆ scope
        let g_vars: Vec<usize> = sa.vars().iter().copied().filter(|_| rng.random_bool(0.7)).collect();
        if !g_vars.is_empty() {
            let g = Scope::new(&model, g_vars.clone()).unwrap();
            let h = Scope::new(&model, [g_vars[rng.random_range(0..g_vars.len())]]).unwrap();
            let two = a.marginalize(&g).unwrap().marginalize(&h).unwrap();
            worst[2] = worst[2].max(two.max_abs_diff(&a.marginalize(&h).unwrap()).unwrap());
        }

        // local computation: scope(G) ⊆ g ⊆ scope(G) ∪ scope(H), g ∩ scope(H) ≠ ∅
        let extra: Vec<usize> = sb.vars().iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        let mut g = sa.union(&Scope::new(&model, extra).unwrap());
        if g.intersection(&sb).is_empty() {
            g = g.with_var(sb.vars()[0]);
        }
        let lhs = ab.marginalize(&g).unwrap();
        let rhs = a.combine(&b.marginalize(&g.intersection(&sb)).unwrap()).unwrap();
        worst[3] = worst[3].max(lhs.vacuous_extend(&g).unwrap().max_abs_diff(&rhs.vacuous_extend(&g).unwrap()).unwrap());

        // decombination contract where its precondition holds
        let b2 = random_valuation(&sb, rng_focal(&mut rng), rng.random_bool(0.7), &mut rng);
        let b12 = a.combine(&b2).unwrap();
        if let Ok(d) = decombine(&b12, &b2) {
            decombined += 1;
            let back = b2.combine(&d).unwrap();
            worst[4] = worst[4].max(back.max_abs_diff(&b12.vacuous_extend(back.scope()).unwrap()).unwrap());
        }
    }
    let passed = worst.iter().all(|&w| w <= TOL) && decombined > 0;
    outcome(
        passed,
        format!(
            "max errors: commutativity {:.1e}, associativity {:.1e}, consonance {:.1e}, local computation {:.1e}, decombination {:.1e} ({decombined}/200 decombinable)",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn rng_focal(rng: &mut impl Rng) -> usize {
    rng.random_range(1..=4)
}

fn delta_properties() -> Outcome {
    let mut rng = rng(88);
    let model = Model::binary(&["A", "B"]).unwrap();
    let full = Scope::full(&model);
    let mut self_worst: f64 = 0.0;
    let mut negatives = 0;
    let mut rule_mismatch = 0;
    let mut infinite = 0;
    for _ in 0..200 {
        let b = random_valuation(&full, rng.random_range(1..=5), rng.random_bool(0.5), &mut rng);
        self_worst = self_worst.max(delta_divergence(&b, &b).unwrap().abs());
        let approx = random_valuation(&full, rng.random_range(1..=5), rng.random_bool(0.5), &mut rng);
        let d = delta_divergence(&approx, &b).unwrap();
        if d < 0.0 {
            negatives += 1;
        }
        let zero_q = b.focal_bits().any(|(set, _)| {
            let cfgs: Vec<usize> = set.iter_ones().collect();
            commonality_direct(&approx, &full, &cfgs) <= 0.0
        });
        if zero_q {
            infinite += 1;
        }
        if zero_q != d.is_infinite() {
            rule_mismatch += 1;
        }
    }
    outcome(
        self_worst <= TOL && negatives == 0 && rule_mismatch == 0 && infinite > 0,
        format!(
            "max δ(b,b) {self_worst:.1e}, {negatives} negative values, {infinite} infinite cases, {rule_mismatch} rule mismatches"
        ),
    )
}

fn bayesian_reduction() -> Outcome {
    let mut compared = 0;
    let mut disagreements = Vec::new();
    let mut cpt_worst: f64 = 0.0;
    for seed in 0..20u64 {
        let g = generate_bayesian_tree(&GeneratorConfig::binary(5 + (seed as usize % 4), 3000 + seed))
            .expect("generator");
        let full = Scope::full(&g.model);
        let p = prob_table(&g.joint);
        let bn = learn_tree(&g.joint, Measure::DepBn).expect("dep-bn");
        let kl = learn_tree(&g.joint, Measure::DepKl).expect("dep-kl");
        let n = g.model.len();
        let mut w = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let mi = mutual_information(&full, &p, a, b);
                w[a][b] = mi;
                w[b][a] = mi;
            }
        }
        let chow_liu = prim_max_tree(&w);
        if bn.is_unique_maximum() && kl.is_unique_maximum() {
            compared += 1;
            if bn.edges != kl.edges || kl.edges != chow_liu {
                disagreements.push(format!("seed {}", 3000 + seed));
            }
        }
        for &(a, b) in &g.edges {
            let (parent, child) = if g.network.dag().parents(b).contains(&a) { (a, b) } else { (b, a) };
            let fam = Scope::new(&g.model, [parent, child]).unwrap();
            let par = Scope::new(&g.model, [parent]).unwrap();
            let pf = table_marginal(&full, &p, &fam);
            let pp = table_marginal(&full, &p, &par);
            let k = mk_condition(&g.joint.marginalize(&fam).unwrap(), &par).unwrap();
            let proj = fam.projection_table(&par);
            for (i, &x) in pf.iter().enumerate() {
                let set = beltree::ConfigSet::from_indices(&fam, [i]).unwrap();
                cpt_worst = cpt_worst.max((k.mass(&set) - x / pp[proj[i]]).abs());
            }
        }
    }
    outcome(
        disagreements.is_empty() && compared > 0 && cpt_worst <= 1e-12,
        format!(
            "{compared}/20 tie-free comparisons, disagreements {disagreements:?}, max CPT error {cpt_worst:.1e}"
        ),
    )
}

fn d_separation_soundness() -> Outcome {
    let mut separated = 0;
    let mut violations = Vec::new();
    for seed in 0..10u64 {
        let g = generate_tree_distribution(&GeneratorConfig::binary(4 + (seed as usize % 2), 4000 + seed))
            .expect("generator");
        let dag = g.network.dag();
        let n = g.model.len();
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if j == k || j == l || k == l {
                        continue;
                    }
                    let (js, ks, ls) = (vs(&[j]), vs(&[k]), vs(&[l]));
                    if d_separated(dag, &js, &ks, &ls) {
                        separated += 1;
                        if !ci_holds(&g.joint, &js, &ks, &ls).expect("ci") {
                            violations.push(format!("seed {}: ({j},{k}|{l})", 4000 + seed));
                        }
                    }
                }
            }
        }
    }
    outcome(
        violations.is_empty() && separated > 0,
        format!("{separated} d-separated triples checked {violations:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exact-distribution recovery", exact_recovery),
        ("sampled recovery", sampled_recovery),
        ("propagation oracle equivalence", propagation_oracle),
        ("hypertree-to-network round trip", hypertree_round_trip),
        ("compatible dag enumeration", examples_fidelity),
        ("dependence strictness along tree paths", theorem4),
        ("algebra axioms", axioms),
        ("divergence properties", delta_properties),
        ("Bayesian reduction", bayesian_reduction),
        ("d-separation implies independence", d_separation_soundness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<40} {}  {}",
            i + 1,
            name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
