//! Set-valued samples drawn from a belief distribution, and empirical
//! marginals estimated from them.

use std::collections::HashMap;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::configset::Bits;
use crate::error::{Error, Result};
use crate::model::{same_model, Model, Scope};
use crate::valuation::BeliefValuation;

/// Records are focal sets of a joint distribution on `scope`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDataset {
    scope: Scope,
    records: Vec<Bits>,
}

impl SampleDataset {
    pub fn new(scope: Scope, records: Vec<Bits>) -> Result<Self> {
        let n = scope.config_count();
        let full = Bits::full(n);
        for (i, r) in records.iter().enumerate() {
            if r.word_len() != full.word_len() || !r.is_subset(&full) {
                return Err(Error::Format(format!("record {i} does not fit the frame of {scope}")));
            }
            if r.is_empty() {
                return Err(Error::Format(format!("record {i} is the empty set")));
            }
        }
        Ok(SampleDataset { scope, records })
    }

    pub fn model(&self) -> &Arc<Model> {
        self.scope.model()
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn records(&self) -> &[Bits] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Draws `n` focal sets i.i.d. with probability equal to their mass.
pub fn sample(joint: &BeliefValuation, n: usize, seed: u64) -> Result<SampleDataset> {
    if !joint.is_proper() {
        return Err(Error::InvalidValuation(
            "sampling needs a proper belief function (no negative or empty-set mass)".into(),
        ));
    }
    let (sets, weights): (Vec<&Bits>, Vec<f64>) = joint.focal_bits().unzip();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidValuation(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n).map(|_| sets[dist.sample(&mut rng)].clone()).collect();
    SampleDataset::new(joint.scope().clone(), records)
}

/// Relative frequencies of the records projected onto `h`.
pub fn estimate_marginal(data: &SampleDataset, h: &Scope) -> Result<BeliefValuation> {
    if data.is_empty() {
        return Err(Error::InvalidValuation("cannot estimate from an empty dataset".into()));
    }
    if !same_model(h.model(), data.model()) || !h.is_subset(data.scope()) {
        return Err(Error::ScopeMismatch(format!("{h} is not inside the data scope {}", data.scope())));
    }
    let table = data.scope().projection_table(h);
    let m = h.config_count();
    let mut counts: HashMap<Bits, usize> = HashMap::new();
    for r in data.records() {
        let mut p = Bits::empty(m);
        for c in r.iter_ones() {
            p.insert(table[c]);
        }
        *counts.entry(p).or_default() += 1;
    }
    let total = data.len() as f64;
    BeliefValuation::from_bits(h, counts.into_iter().map(|(b, c)| (b, c as f64 / total)))
}

/// Moves mass `eps / (1 + eps)` onto the full frame and rescales the rest,
/// so every commonality is at least that much.
pub fn smooth(b: &BeliefValuation, eps: f64) -> Result<BeliefValuation> {
    let n = b.scope().config_count();
    let scale = 1.0 / (1.0 + eps);
    let masses = b
        .focal_bits()
        .map(|(bits, m)| (bits.clone(), m * scale))
        .chain(std::iter::once((Bits::full(n), eps * scale)));
    let mut acc: HashMap<Bits, f64> = HashMap::new();
    for (bits, m) in masses {
        *acc.entry(bits).or_default() += m;
    }
    BeliefValuation::from_bits(b.scope(), acc)
}

/// Smoothing constant for marginals estimated from `count` records.
pub fn smoothing_for(count: usize) -> f64 {
    1.0 / (2.0 * count as f64)
}

/// Total variation between two mass functions on the same scope.
pub fn total_variation(a: &BeliefValuation, b: &BeliefValuation) -> Result<f64> {
    if a.scope() != b.scope() {
        return Err(Error::ScopeMismatch(format!("{} vs {}", a.scope(), b.scope())));
    }
    let mut sets: Vec<&Bits> = a.focal_bits().map(|(s, _)| s).collect();
    sets.extend(b.focal_bits().map(|(s, _)| s));
    sets.sort();
    sets.dedup();
    Ok(0.5 * sets.iter().map(|s| (a.mass_of_bits(s) - b.mass_of_bits(s)).abs()).sum::<f64>())
}
