//! Evidence potentials: hard observations and simple support functions.

use std::sync::Arc;

use crate::configset::ConfigSet;
use crate::error::{Error, Result};
use crate::model::{Model, Scope};
use crate::valuation::BeliefValuation;

/// A proper valuation with at most two focal elements, the full frame being
/// one of them whenever there are two.
#[derive(Debug, Clone)]
pub struct EvidencePotential {
    valuation: BeliefValuation,
}

impl EvidencePotential {
    pub fn from_valuation(valuation: BeliefValuation) -> Result<Self> {
        if !valuation.is_proper() {
            return Err(Error::InvalidValuation("evidence must be a proper belief function".into()));
        }
        let full = ConfigSet::full(valuation.scope());
        let ok = match valuation.focal_count() {
            1 => true,
            2 => valuation.mass(&full) > 0.0,
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidValuation(
                "evidence is a single focal set, optionally paired with the full frame".into(),
            ));
        }
        Ok(EvidencePotential { valuation })
    }

    /// All mass on `var ∈ values`.
    pub fn hard<S: AsRef<str>>(model: &Arc<Model>, var: &str, values: &[S]) -> Result<Self> {
        Self::support(model, var, values, 1.0)
    }

    /// Mass `strength` on `var ∈ values`, the rest on the full frame.
    pub fn support<S: AsRef<str>>(model: &Arc<Model>, var: &str, values: &[S], strength: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&strength) {
            return Err(Error::InvalidValuation(format!("support mass {strength} outside [0, 1]")));
        }
        let v = model.index_of(var)?;
        let scope = Scope::new(model, [v])?;
        let idx = values
            .iter()
            .map(|l| model.variable(v).value_index(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        if idx.is_empty() {
            return Err(Error::InvalidValuation(format!("no values given for evidence on `{var}`")));
        }
        let set = ConfigSet::from_indices(&scope, idx)?;
        let full = ConfigSet::full(&scope);
        let valuation = BeliefValuation::from_sets(&scope, [(set, strength), (full, 1.0 - strength)])?;
        Self::from_valuation(valuation)
    }

    /// Parses `VAR=value` (hard) or `VAR=v1|v2@0.8` (simple support).
    pub fn parse(model: &Arc<Model>, text: &str) -> Result<Self> {
        let (var, rest) = text
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("evidence `{text}` is not of the form VAR=value")))?;
        let (values, strength) = match rest.split_once('@') {
            Some((vals, s)) => {
                let s: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("bad support mass in `{text}`")))?;
                (vals, s)
            }
            None => (rest, 1.0),
        };
        let values: Vec<&str> = values.split('|').map(str::trim).collect();
        Self::support(model, var.trim(), &values, strength)
    }

    pub fn scope(&self) -> &Scope {
        self.valuation.scope()
    }

    pub fn valuation(&self) -> &BeliefValuation {
        &self.valuation
    }
}

/// Conditioning by combination; `normalize` drops the conflict afterwards.
pub fn apply_evidence(b: &BeliefValuation, e: &EvidencePotential, normalize: bool) -> Result<BeliefValuation> {
    let combined = b.combine(e.valuation())?;
    if normalize {
        combined.normalized()
    } else {
        Ok(combined)
    }
}
