//! Commonality-based divergence between a reference belief function and an
//! approximation of it.

use crate::error::{Error, Result};
use crate::valuation::BeliefValuation;

/// `δ(approx, reference) = Σ_{A: m_ref(A) > 0} m_ref(A) · |ln(Q_ref(A) / Q_approx(A))|`.
///
/// The logarithm of a non-positive ratio counts as `+∞`, so the result is
/// infinite as soon as the approximation's commonality vanishes (or turns
/// negative) on a focal element of the reference.
pub fn delta_divergence(approx: &BeliefValuation, reference: &BeliefValuation) -> Result<f64> {
    if approx.scope() != reference.scope() {
        return Err(Error::ScopeMismatch(format!(
            "divergence between valuations on {} and {}",
            approx.scope(),
            reference.scope()
        )));
    }
    if reference.focal_bits().any(|(_, m)| m < 0.0) {
        return Err(Error::InvalidValuation(
            "the reference of a divergence must be a proper belief function".into(),
        ));
    }
    let mut total = 0.0;
    for (set, m) in reference.focal_bits() {
        if m <= 0.0 {
            continue;
        }
        let q_ref = reference.commonality_bits(set);
        let q_approx = approx.commonality_bits(set);
        let ratio = q_ref / q_approx;
        if q_approx <= 0.0 || ratio <= 0.0 || !ratio.is_finite() {
            return Ok(f64::INFINITY);
        }
        total += m * ratio.ln().abs();
    }
    Ok(total)
}
