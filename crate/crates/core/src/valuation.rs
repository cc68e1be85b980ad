//! Sparse Dempster-Shafer mass assignments and the non-dense half of the
//! valuation algebra: combination, marginalization and vacuous extension.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::configset::{Bits, ConfigSet};
use crate::error::{Error, Result};
use crate::model::{same_model, Scope};

/// Focal elements whose absolute mass falls below this are dropped.
pub const PRUNE_EPS: f64 = 1e-12;

/// Allowed deviation of the total mass from one.
pub const SUM_TOL: f64 = 1e-9;

/// A mass assignment over subsets of a scope's frame.
///
/// Masses sum to one. Proper belief functions have nonnegative masses and no
/// mass on the empty set; pseudo-belief functions (produced by decombination)
/// may carry negative masses. Combination is conjunctive, so conflict ends up
/// on the empty set until [`BeliefValuation::normalized`] is called.
#[derive(Clone)]
pub struct BeliefValuation {
    scope: Scope,
    masses: BTreeMap<Bits, f64>,
}

impl fmt::Debug for BeliefValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (set, mass) in self.focal_elements() {
            m.entry(&set, &mass);
        }
        m.finish()
    }
}

fn accumulate(into: &mut HashMap<Bits, f64>, key: Bits, mass: f64) {
    *into.entry(key).or_insert(0.0) += mass;
}

fn pruned(masses: HashMap<Bits, f64>) -> BTreeMap<Bits, f64> {
    masses.into_iter().filter(|(_, m)| m.abs() >= PRUNE_EPS).collect()
}

impl BeliefValuation {
    /// All mass on the full frame.
    pub fn vacuous(scope: &Scope) -> BeliefValuation {
        let mut masses = BTreeMap::new();
        masses.insert(Bits::full(scope.config_count()), 1.0);
        BeliefValuation {
            scope: scope.clone(),
            masses,
        }
    }

    pub fn from_bits(scope: &Scope, masses: impl IntoIterator<Item = (Bits, f64)>) -> Result<Self> {
        Self::from_bits_with_tolerance(scope, masses, SUM_TOL)
    }

    pub fn from_bits_with_tolerance(
        scope: &Scope,
        masses: impl IntoIterator<Item = (Bits, f64)>,
        tol: f64,
    ) -> Result<Self> {
        let n = scope.config_count();
        let full = Bits::full(n);
        let mut acc = HashMap::new();
        for (bits, mass) in masses {
            if !mass.is_finite() {
                return Err(Error::InvalidValuation(format!("non-finite mass {mass}")));
            }
            if bits.word_len() != full.word_len() || !bits.is_subset(&full) {
                return Err(Error::InvalidValuation(format!(
                    "focal element outside the frame of {scope}"
                )));
            }
            accumulate(&mut acc, bits, mass);
        }
        let v = BeliefValuation {
            scope: scope.clone(),
            masses: pruned(acc),
        };
        let total = v.total_mass();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidValuation(format!(
                "masses on {scope} sum to {total}, expected 1"
            )));
        }
        Ok(v)
    }

    pub fn from_sets(scope: &Scope, masses: impl IntoIterator<Item = (ConfigSet, f64)>) -> Result<Self> {
        let mut items = Vec::new();
        for (set, mass) in masses {
            if set.scope() != scope {
                return Err(Error::ScopeMismatch(format!(
                    "focal set on {} given for a valuation on {}",
                    set.scope(),
                    scope
                )));
            }
            items.push((set.into_bits(), mass));
        }
        Self::from_bits(scope, items)
    }

    /// Bayesian valuation with one probability per configuration.
    pub fn bayesian(scope: &Scope, probs: &[f64]) -> Result<Self> {
        let n = scope.config_count();
        if probs.len() != n {
            return Err(Error::InvalidValuation(format!(
                "{} probabilities for a frame of {n} configurations",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidValuation("negative probability".into()));
        }
        Self::from_bits(
            scope,
            probs
                .iter()
                .enumerate()
                .map(|(i, &p)| (Bits::from_indices(n, [i]), p)),
        )
    }

    /// Builds a valuation from already-accumulated masses without checking the
    /// total.
    pub(crate) fn from_raw(scope: Scope, masses: HashMap<Bits, f64>) -> Self {
        BeliefValuation {
            scope,
            masses: pruned(masses),
        }
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn focal_count(&self) -> usize {
        self.masses.len()
    }

    pub fn focal_bits(&self) -> impl Iterator<Item = (&Bits, f64)> + '_ {
        self.masses.iter().map(|(b, &m)| (b, m))
    }

    pub fn focal_elements(&self) -> impl Iterator<Item = (ConfigSet, f64)> + '_ {
        self.masses
            .iter()
            .map(|(b, &m)| (ConfigSet::from_bits(self.scope.clone(), b.clone()), m))
    }

    pub fn mass(&self, set: &ConfigSet) -> f64 {
        self.masses.get(set.bits()).copied().unwrap_or(0.0)
    }

    pub fn mass_of_bits(&self, bits: &Bits) -> f64 {
        self.masses.get(bits).copied().unwrap_or(0.0)
    }

    /// Mass on the empty set.
    pub fn conflict(&self) -> f64 {
        self.mass_of_bits(&Bits::empty(self.scope.config_count()))
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum()
    }

    pub fn is_proper(&self) -> bool {
        self.masses.values().all(|&m| m >= 0.0) && self.conflict() == 0.0
    }

    pub fn is_bayesian(&self) -> bool {
        self.is_proper() && self.masses.keys().all(|b| b.count() == 1)
    }

    pub fn is_vacuous(&self) -> bool {
        self.masses.len() == 1 && (self.mass_of_bits(&Bits::full(self.scope.config_count())) - 1.0).abs() < SUM_TOL
    }

    fn check_model(&self, other: &Scope) -> Result<()> {
        if same_model(self.scope.model(), other.model()) {
            Ok(())
        } else {
            Err(Error::ScopeMismatch("valuations belong to different models".into()))
        }
    }

    /// Q(A): total mass of the focal elements containing `a`.
    pub fn commonality_at(&self, a: &ConfigSet) -> Result<f64> {
        if a.scope() != &self.scope {
            return Err(Error::ScopeMismatch(format!(
                "set on {} queried against a valuation on {}",
                a.scope(),
                self.scope
            )));
        }
        Ok(self.commonality_bits(a.bits()))
    }

    pub fn commonality_bits(&self, a: &Bits) -> f64 {
        self.masses
            .iter()
            .filter(|(b, _)| a.is_subset(b))
            .map(|(_, &m)| m)
            .sum()
    }

    /// Focal elements as cylinders over `target`, which must contain our scope.
    pub(crate) fn extended_focals(&self, target: &Scope) -> Vec<(Bits, f64)> {
        if target == &self.scope {
            return self.masses.iter().map(|(b, &m)| (b.clone(), m)).collect();
        }
        let table = target.projection_table(&self.scope);
        let n = target.config_count();
        self.masses
            .iter()
            .map(|(b, &m)| {
                let ext = Bits::from_indices(n, (0..n).filter(|&c| b.contains(table[c])));
                (ext, m)
            })
            .collect()
    }

    /// Conjunctive combination on the union of both scopes. Conflict stays on
    /// the empty set.
    pub fn combine(&self, other: &BeliefValuation) -> Result<BeliefValuation> {
        self.check_model(&other.scope)?;
        let union = self.scope.union(&other.scope);
        if other.is_vacuous() {
            return self.vacuous_extend(&union);
        }
        if self.is_vacuous() {
            return other.vacuous_extend(&union);
        }
        let left = self.extended_focals(&union);
        let right = other.extended_focals(&union);
        let mut acc = HashMap::with_capacity(left.len() * right.len());
        for (a, ma) in &left {
            for (b, mb) in &right {
                accumulate(&mut acc, a.and(b), ma * mb);
            }
        }
        Ok(BeliefValuation::from_raw(union, acc))
    }

    /// Combination of many valuations, folded left to right.
    pub fn combine_all<'a>(items: impl IntoIterator<Item = &'a BeliefValuation>) -> Result<BeliefValuation> {
        let mut it = items.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::InvalidValuation("nothing to combine".into()))?
            .clone();
        it.try_fold(first, |acc, v| acc.combine(v))
    }

    /// Projection marginal: each focal set is replaced by the set of
    /// restrictions of its configurations to `target`.
    pub fn marginalize(&self, target: &Scope) -> Result<BeliefValuation> {
        self.check_model(target)?;
        if !target.is_subset(&self.scope) {
            return Err(Error::ScopeMismatch(format!(
                "cannot marginalize {} onto {}",
                self.scope, target
            )));
        }
        if target == &self.scope {
            return Ok(self.clone());
        }
        let table = self.scope.projection_table(target);
        let n = target.config_count();
        let mut acc = HashMap::new();
        for (b, &m) in &self.masses {
            let proj = Bits::from_indices(n, b.iter_ones().map(|c| table[c]));
            accumulate(&mut acc, proj, m);
        }
        Ok(BeliefValuation::from_raw(target.clone(), acc))
    }

    /// Cylindrical extension onto a larger scope; masses are unchanged.
    pub fn vacuous_extend(&self, target: &Scope) -> Result<BeliefValuation> {
        self.check_model(target)?;
        if !self.scope.is_subset(target) {
            return Err(Error::ScopeMismatch(format!(
                "cannot extend {} onto {}",
                self.scope, target
            )));
        }
        let acc = self.extended_focals(target).into_iter().collect();
        Ok(BeliefValuation::from_raw(target.clone(), acc))
    }

    /// Drops the conflict mass and rescales the rest to sum to one.
    pub fn normalized(&self) -> Result<BeliefValuation> {
        let empty = Bits::empty(self.scope.config_count());
        let conflict = self.conflict();
        let rest = 1.0 - conflict;
        if rest.abs() < PRUNE_EPS {
            return Err(Error::TotalConflict);
        }
        let acc = self
            .masses
            .iter()
            .filter(|(b, _)| **b != empty)
            .map(|(b, &m)| (b.clone(), m / rest))
            .collect();
        Ok(BeliefValuation::from_raw(self.scope.clone(), acc))
    }

    /// Largest absolute mass difference over the union of focal elements.
    pub fn max_abs_diff(&self, other: &BeliefValuation) -> Result<f64> {
        if self.scope != other.scope {
            return Err(Error::ScopeMismatch(format!(
                "comparing valuations on {} and {}",
                self.scope, other.scope
            )));
        }
        let mut worst: f64 = 0.0;
        for (b, &m) in &self.masses {
            worst = worst.max((m - other.mass_of_bits(b)).abs());
        }
        for (b, &m) in &other.masses {
            if !self.masses.contains_key(b) {
                worst = worst.max(m.abs());
            }
        }
        Ok(worst)
    }

    pub fn approx_eq(&self, other: &BeliefValuation, tol: f64) -> bool {
        self.max_abs_diff(other).is_ok_and(|d| d <= tol)
    }
}
