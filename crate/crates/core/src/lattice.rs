//! Dense subset-lattice operations: commonality tables, Möbius inversion,
//! decombination and mk-conditioning.
//!
//! A dense table over a scope with `n` configurations has `2^n` entries,
//! indexed by the membership word of each subset. These operations are only
//! permitted for scopes whose frame fits within [`dense_limit`].

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::configset::Bits;
use crate::error::{Error, Result};
use crate::model::Scope;
use crate::valuation::BeliefValuation;

/// Default cap on the number of configurations of a dense scope.
pub const DEFAULT_DENSE_LIMIT: usize = 16;

/// Hard ceiling regardless of the environment override.
const MAX_DENSE_LIMIT: usize = 26;

/// Commonalities with magnitude below this are treated as zero in quotients.
pub const ZERO_Q: f64 = 1e-12;

/// Maximum frame size for dense operations; `BELTREE_DENSE_LIMIT` overrides
/// the default.
pub fn dense_limit() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| {
        std::env::var("BELTREE_DENSE_LIMIT")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .map(|v| v.clamp(1, MAX_DENSE_LIMIT))
            .unwrap_or(DEFAULT_DENSE_LIMIT)
    })
}

fn check_dense(scope: &Scope) -> Result<usize> {
    let n = scope.config_count();
    let limit = dense_limit();
    if n > limit {
        return Err(Error::DenseLimit { configs: n, limit });
    }
    Ok(n)
}

/// In place: `t[A] <- sum over B ⊇ A of t[B]`.
pub fn superset_zeta(table: &mut [f64]) {
    let len = table.len();
    let mut bit = 1;
    while bit < len {
        for mask in 0..len {
            if mask & bit == 0 {
                table[mask] += table[mask | bit];
            }
        }
        bit <<= 1;
    }
}

/// Inverse of [`superset_zeta`].
pub fn superset_mobius(table: &mut [f64]) {
    let len = table.len();
    let mut bit = 1;
    while bit < len {
        for mask in 0..len {
            if mask & bit == 0 {
                table[mask] -= table[mask | bit];
            }
        }
        bit <<= 1;
    }
}

/// Dense mass table of `v` cylindrically extended onto `target`.
fn dense_masses(v: &BeliefValuation, target: &Scope) -> Result<Vec<f64>> {
    let n = check_dense(target)?;
    let mut table = vec![0.0; 1usize << n];
    for (bits, m) in v.extended_focals(target) {
        table[bits.word() as usize] += m;
    }
    Ok(table)
}

/// Q over every subset of the valuation's own frame.
pub fn commonality_table(v: &BeliefValuation) -> Result<Vec<f64>> {
    let mut t = dense_masses(v, v.scope())?;
    superset_zeta(&mut t);
    Ok(t)
}

/// Q of `v` extended onto `target`, over every subset of the target frame.
pub fn extended_commonality_table(v: &BeliefValuation, target: &Scope) -> Result<Vec<f64>> {
    let mut t = dense_masses(v, target)?;
    superset_zeta(&mut t);
    Ok(t)
}

fn sparse_from_dense(scope: &Scope, masses: &[f64]) -> BeliefValuation {
    let n = scope.config_count();
    let acc: HashMap<Bits, f64> = masses
        .iter()
        .enumerate()
        .filter(|(_, m)| **m != 0.0)
        .map(|(mask, &m)| (Bits::from_word(n, mask as u64), m))
        .collect();
    BeliefValuation::from_raw(scope.clone(), acc)
}

/// Recovers masses from a dense commonality table and rescales them to sum
/// to one. The result may be a pseudo-belief function.
pub fn mobius_q_to_m(scope: &Scope, q: &[f64]) -> Result<BeliefValuation> {
    let n = check_dense(scope)?;
    if q.len() != 1usize << n {
        return Err(Error::InvalidValuation(format!(
            "commonality table has {} entries, expected {}",
            q.len(),
            1usize << n
        )));
    }
    let mut m = q.to_vec();
    superset_mobius(&mut m);
    let total: f64 = m.iter().sum();
    if total.abs() < ZERO_Q || !total.is_finite() {
        return Err(Error::Numeric(format!("Möbius image on {scope} has total mass {total}")));
    }
    for x in &mut m {
        *x /= total;
    }
    Ok(sparse_from_dense(scope, &m))
}

/// Decombination: returns `b` with `combine(b2, b) = b12`.
///
/// Computed on the union scope as the commonality quotient `Q12 / Q2`, with
/// `0/0 = 0`, scaled so that the masses sum to one.
pub fn decombine(b12: &BeliefValuation, b2: &BeliefValuation) -> Result<BeliefValuation> {
    let union = b12.scope().union(b2.scope());
    let q12 = extended_commonality_table(b12, &union)?;
    let q2 = extended_commonality_table(b2, &union)?;
    let mut quot = vec![0.0; q12.len()];
    for (mask, (a, b)) in q12.iter().zip(&q2).enumerate() {
        if a.abs() < ZERO_Q {
            continue;
        }
        if b.abs() < ZERO_Q {
            let set = Bits::from_word(union.config_count(), mask as u64);
            return Err(Error::NotDecombinable(format!(
                "divisor commonality vanishes on {:?} of {} where the dividend is {a}",
                set, union
            )));
        }
        quot[mask] = a / b;
    }
    let c = quot[0];
    if c.abs() < ZERO_Q {
        return Err(Error::Numeric(format!("decombination on {union} has zero total")));
    }
    for x in &mut quot {
        *x /= c;
    }
    superset_mobius(&mut quot);
    Ok(sparse_from_dense(&union, &quot))
}

/// mk-conditioning: the valuation decombined by its own marginal on `h`.
pub fn mk_condition(b: &BeliefValuation, h: &Scope) -> Result<BeliefValuation> {
    let marginal = b.marginalize(h)?;
    decombine(b, &marginal)
}

/// Node valuation of a family: the marginal on `h` mk-conditioned on `g`.
/// Only the marginal on `h` is consulted.
pub fn conditional(bel: &BeliefValuation, h: &Scope, g: &Scope) -> Result<BeliefValuation> {
    if !g.is_subset(h) {
        return Err(Error::ScopeMismatch(format!("conditioning set {g} is not inside {h}")));
    }
    let marginal = bel.marginalize(h)?;
    if g.is_empty() {
        return Ok(marginal);
    }
    mk_condition(&marginal, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configset::ConfigSet;
    use crate::model::Model;

    fn binary_a() -> Scope {
        Scope::full(&Model::binary(&["A"]).unwrap())
    }

    #[test]
    fn zeta_and_mobius_are_inverse() {
        let mut t: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let orig = t.clone();
        superset_zeta(&mut t);
        superset_mobius(&mut t);
        for (a, b) in t.iter().zip(&orig) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuous_commonality_inverts_to_vacuous() {
        let a = binary_a();
        let v = mobius_q_to_m(&a, &[1.0; 4]).unwrap();
        assert!(v.is_vacuous());
    }

    #[test]
    fn bayesian_round_trip_through_q() {
        let a = binary_a();
        let b = BeliefValuation::bayesian(&a, &[0.3, 0.7]).unwrap();
        let q = commonality_table(&b).unwrap();
        // direct summation: Q(∅)=1, Q({a0})=.3, Q({a1})=.7, Q(Ω)=0
        assert_eq!(q.len(), 4);
        assert!((q[0] - 1.0).abs() < 1e-12);
        assert!((q[1] - 0.3).abs() < 1e-12);
        assert!((q[2] - 0.7).abs() < 1e-12);
        assert!(q[3].abs() < 1e-12);
        let back = mobius_q_to_m(&a, &q).unwrap();
        assert!(back.approx_eq(&b, 1e-12));
    }

    #[test]
    fn decombine_by_vacuous_is_identity() {
        let m = Model::binary(&["A", "B"]).unwrap();
        let ab = Scope::full(&m);
        let b = BeliefValuation::bayesian(&ab, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let d = decombine(&b, &BeliefValuation::vacuous(&ab)).unwrap();
        assert!(d.approx_eq(&b, 1e-12));
    }

    #[test]
    fn decombine_rejects_zero_divisor() {
        let a = binary_a();
        let b12 = BeliefValuation::vacuous(&a);
        let b2 = BeliefValuation::bayesian(&a, &[0.5, 0.5]).unwrap();
        assert!(matches!(decombine(&b12, &b2), Err(Error::NotDecombinable(_))));
    }

    #[test]
    fn dense_limit_enforced() {
        let m = Model::binary(&["A", "B", "C", "D", "E"]).unwrap();
        let s = Scope::full(&m);
        let v = BeliefValuation::vacuous(&s);
        assert!(matches!(commonality_table(&v), Err(Error::DenseLimit { configs: 32, .. })));
    }

    #[test]
    fn bayesian_mk_condition_is_cpt() {
        let m = Model::binary(&["A", "B"]).unwrap();
        let ab = Scope::full(&m);
        let a = Scope::from_names(&m, &["A"]).unwrap();
        // P(a0)=0.4: P(b|a0) = (.1,.3)/.4, P(b|a1) = (.2,.4)/.6
        let joint = BeliefValuation::bayesian(&ab, &[0.1, 0.3, 0.2, 0.4]).unwrap();
        let k = mk_condition(&joint, &a).unwrap();
        let expect = [0.25, 0.75, 1.0 / 3.0, 2.0 / 3.0];
        for (i, p) in expect.iter().enumerate() {
            let s = ConfigSet::from_indices(&ab, [i]).unwrap();
            assert!((k.mass(&s) - p).abs() < 1e-12);
        }
        assert!((k.total_mass() - 1.0).abs() < 1e-12);
        let back = k.combine(&joint.marginalize(&a).unwrap()).unwrap();
        assert!(back.approx_eq(&joint, 1e-12));
    }

    #[test]
    fn conditional_with_empty_parent_set_is_marginal() {
        let m = Model::binary(&["A", "B"]).unwrap();
        let ab = Scope::full(&m);
        let a = Scope::from_names(&m, &["A"]).unwrap();
        let joint = BeliefValuation::bayesian(&ab, &[0.1, 0.3, 0.2, 0.4]).unwrap();
        let c = conditional(&joint, &a, &Scope::empty(&m)).unwrap();
        assert!(c.approx_eq(&joint.marginalize(&a).unwrap(), 0.0));
    }

    #[test]
    fn self_decombination_of_positive_q_is_vacuous() {
        let m = Model::binary(&["A", "B"]).unwrap();
        let ab = Scope::full(&m);
        let n = ab.config_count();
        let b = BeliefValuation::from_bits(
            &ab,
            [
                (Bits::from_indices(n, [0]), 0.2),
                (Bits::from_indices(n, [0, 3]), 0.3),
                (Bits::full(n), 0.5),
            ],
        )
        .unwrap();
        assert!(mk_condition(&b, &ab).unwrap().is_vacuous());
        // with zero commonalities the 0/0 convention keeps only the support
        let bayes = BeliefValuation::bayesian(&ab, &[0.1, 0.3, 0.2, 0.4]).unwrap();
        let k = mk_condition(&bayes, &ab).unwrap();
        assert!(!k.is_vacuous());
        assert!(k.combine(&bayes).unwrap().approx_eq(&bayes, 1e-12));
    }
}
