//! Randomized invariants of the valuation algebra and of propagation.

use std::sync::Arc;

use beltree::lattice::{commonality_table, extended_commonality_table};
use beltree::propagation::brute_force_joint;
use beltree::{
    apply_evidence, decombine, delta_divergence, generate_hypertree, mk_condition, mobius_q_to_m, BeliefValuation,
    Bits, EvidencePotential, Model, Scope,
};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn model() -> Arc<Model> {
    Model::binary(&["A", "B", "C", "D"]).unwrap()
}

prop_compose! {
    fn scope()(vars in proptest::sample::subsequence(vec![0usize, 1, 2, 3], 1..=3)) -> Scope {
        Scope::new(&model(), vars).unwrap()
    }
}

// proper valuation with up to four focal sets, optionally forced to hold the
// full frame
fn valuation_on(s: Scope, with_frame: bool) -> impl Strategy<Value = BeliefValuation> {
    let n = s.config_count();
    let top = (1u64 << n) - 1;
    proptest::collection::vec((1..=top, 0.1f64..1.0), 1..=4).prop_map(move |sets| {
        let mut items: Vec<(u64, f64)> = sets;
        if with_frame {
            items.push((top, 0.5));
        }
        items.sort_by_key(|x| x.0);
        items.dedup_by_key(|x| x.0);
        let total: f64 = items.iter().map(|x| x.1).sum();
        BeliefValuation::from_bits(&s, items.iter().map(|&(w, m)| (Bits::from_word(n, w), m / total))).unwrap()
    })
}

fn valuation() -> impl Strategy<Value = BeliefValuation> {
    scope().prop_flat_map(|s| valuation_on(s, false))
}

fn framed() -> impl Strategy<Value = BeliefValuation> {
    scope().prop_flat_map(|s| valuation_on(s, true))
}

fn close(a: &BeliefValuation, b: &BeliefValuation) -> bool {
    let u = a.scope().union(b.scope());
    a.vacuous_extend(&u).unwrap().approx_eq(&b.vacuous_extend(&u).unwrap(), TOL)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn combination_commutes(a in valuation(), b in valuation()) {
        prop_assert!(close(&a.combine(&b).unwrap(), &b.combine(&a).unwrap()));
    }

    #[test]
    fn combination_associates(a in valuation(), b in valuation(), c in valuation()) {
        let left = a.combine(&b).unwrap().combine(&c).unwrap();
        let right = a.combine(&b.combine(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right));
    }

    #[test]
    fn vacuous_is_neutral(a in valuation(), s in scope()) {
        prop_assert!(close(&a.combine(&BeliefValuation::vacuous(&s)).unwrap(), &a));
    }

    #[test]
    fn marginalization_is_consonant(a in valuation(), pick in 0usize..8) {
        let vars = a.scope().vars();
        let g = Scope::new(&model(), vars.iter().copied().take(1 + pick % vars.len())).unwrap();
        let h = Scope::new(&model(), [vars[0]]).unwrap();
        let two = a.marginalize(&g).unwrap().marginalize(&h).unwrap();
        prop_assert!(a.marginalize(&h).unwrap().approx_eq(&two, TOL));
        prop_assert!((a.marginalize(&g).unwrap().total_mass() - 1.0).abs() < TOL);
    }

    #[test]
    fn local_computation(a in valuation(), b in valuation()) {
        // (a ⊙ b)↓G = a ⊙ b↓(G∩scope b) for scope a ⊆ G
        let g = a.scope().clone();
        let lhs = a.combine(&b).unwrap().marginalize(&g).unwrap();
        let rhs = a.combine(&b.marginalize(&g.intersection(b.scope())).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn commonalities_multiply(a in valuation(), b in valuation()) {
        let ab = a.combine(&b).unwrap();
        let u = ab.scope().clone();
        let (q, qa, qb) = (
            extended_commonality_table(&ab, &u).unwrap(),
            extended_commonality_table(&a, &u).unwrap(),
            extended_commonality_table(&b, &u).unwrap(),
        );
        for i in 0..q.len() {
            prop_assert!((q[i] - qa[i] * qb[i]).abs() < TOL);
        }
    }

    #[test]
    fn zeta_and_mobius_invert(a in valuation()) {
        let q = commonality_table(&a).unwrap();
        let back = mobius_q_to_m(a.scope(), &q).unwrap();
        prop_assert!(back.approx_eq(&a, TOL));
    }

    #[test]
    fn decombination_round_trip(a in valuation(), b in framed()) {
        let ab = a.combine(&b).unwrap();
        let d = decombine(&ab, &b).unwrap();
        prop_assert!(close(&b.combine(&d).unwrap(), &ab));
    }

    #[test]
    fn mk_condition_recombines(a in framed(), pick in 0usize..8) {
        let vars = a.scope().vars();
        let l = Scope::new(&model(), vars.iter().copied().take(pick % vars.len())).unwrap();
        let k = mk_condition(&a, &l).unwrap();
        prop_assert!(close(&k.combine(&a.marginalize(&l).unwrap()).unwrap(), &a));
    }

    #[test]
    fn delta_is_zero_on_identity_and_nonnegative(a in framed(), b in framed()) {
        prop_assert_eq!(delta_divergence(&a, &a).unwrap(), 0.0);
        if a.scope() == b.scope() {
            prop_assert!(delta_divergence(&a, &b).unwrap() >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_root_independence(seed in 0u64..10_000, edges in 2usize..=5) {
        let tree = generate_hypertree(6, edges, 3, seed).unwrap();
        let base = tree.propagate(&[]).unwrap();
        for root in 1..tree.len() {
            let other = tree.propagate_from(root, &[]).unwrap();
            for (x, y) in base.iter().zip(&other) {
                prop_assert!(x.approx_eq(y, TOL));
            }
        }
    }

    #[test]
    fn evidence_matches_brute_force(seed in 0u64..10_000, var in 0usize..6, value in 0usize..2) {
        let tree = generate_hypertree(6, 4, 3, seed).unwrap();
        let model = tree.model().clone();
        prop_assume!(tree.sequence().hypergraph().vertices().contains(&var));
        let label = model.variable(var).domain[value].clone();
        let ev = EvidencePotential::hard(&model, model.name(var), &[label]).unwrap();
        let joint = brute_force_joint(tree.factors(), 1 << 10).unwrap();
        let with = apply_evidence(&joint, &ev, false).unwrap();
        let marginals = tree.propagate(std::slice::from_ref(&ev)).unwrap();
        for (k, mk) in marginals.iter().enumerate() {
            prop_assert!(mk.approx_eq(&with.marginalize(tree.node_scope(k)).unwrap(), TOL));
        }
        // hard evidence never adds non-conflicting mass
        let before = 1.0 - joint.conflict();
        let after = 1.0 - with.conflict();
        prop_assert!(after <= before + TOL);
    }
}
