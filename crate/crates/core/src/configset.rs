//! Sets of configurations encoded as membership bit vectors over a scope's frame.

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::model::Scope;

/// Fixed-length membership vector. The length is implied by the scope the
/// bits belong to; bits beyond it are always zero.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bits(SmallVec<[u64; 4]>);

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter_ones()).finish()
    }
}

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl Bits {
    pub fn empty(n: usize) -> Bits {
        Bits(SmallVec::from_elem(0, words_for(n)))
    }

    pub fn full(n: usize) -> Bits {
        let mut b = Bits::empty(n);
        for (w, word) in b.0.iter_mut().enumerate() {
            let lo = w * 64;
            let hi = (lo + 64).min(n);
            if hi > lo {
                *word = if hi - lo == 64 { u64::MAX } else { (1u64 << (hi - lo)) - 1 };
            }
        }
        b
    }

    pub fn from_indices(n: usize, idx: impl IntoIterator<Item = usize>) -> Bits {
        let mut b = Bits::empty(n);
        for i in idx {
            b.insert(i);
        }
        b
    }

    /// Bits of a frame with at most 64 configurations, as one word.
    pub fn from_word(n: usize, word: u64) -> Bits {
        let mut b = Bits::empty(n);
        b.0[0] = word;
        b
    }

    pub fn word_len(&self) -> usize {
        self.0.len()
    }

    pub fn word(&self) -> u64 {
        self.0[0]
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1u64 << (i % 64);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0.get(i / 64).is_some_and(|w| w & (1u64 << (i % 64)) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(other.0.iter()).map(|(a, b)| a & b).collect())
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let t = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + t)
            })
        })
    }
}

/// A set of configurations of a scope.
#[derive(Clone, PartialEq, Eq)]
pub struct ConfigSet {
    scope: Scope,
    bits: Bits,
}

impl fmt::Debug for ConfigSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let configs: Vec<String> = self
            .bits
            .iter_ones()
            .map(|i| format!("({})", self.scope.labels(i).join(",")))
            .collect();
        write!(f, "{}{{{}}}", self.scope, configs.join(" "))
    }
}

impl ConfigSet {
    pub fn from_bits(scope: Scope, bits: Bits) -> ConfigSet {
        ConfigSet { scope, bits }
    }

    pub fn empty(scope: &Scope) -> ConfigSet {
        ConfigSet {
            bits: Bits::empty(scope.config_count()),
            scope: scope.clone(),
        }
    }

    pub fn full(scope: &Scope) -> ConfigSet {
        ConfigSet {
            bits: Bits::full(scope.config_count()),
            scope: scope.clone(),
        }
    }

    pub fn from_indices(scope: &Scope, idx: impl IntoIterator<Item = usize>) -> Result<ConfigSet> {
        let n = scope.config_count();
        let mut bits = Bits::empty(n);
        for i in idx {
            if i >= n {
                return Err(Error::Format(format!("configuration index {i} outside frame of {scope}")));
            }
            bits.insert(i);
        }
        Ok(ConfigSet {
            scope: scope.clone(),
            bits,
        })
    }

    /// Builds a set from configurations given as value labels in scope order.
    pub fn from_labels<S: AsRef<str>>(scope: &Scope, configs: &[Vec<S>]) -> Result<ConfigSet> {
        let idx = configs
            .iter()
            .map(|c| scope.encode_labels(c))
            .collect::<Result<Vec<_>>>()?;
        ConfigSet::from_indices(scope, idx)
    }

    /// All configurations whose value of `var` lies in `values`.
    pub fn cylinder(scope: &Scope, var: usize, values: &[usize]) -> Result<ConfigSet> {
        let pos = scope
            .vars()
            .iter()
            .position(|&v| v == var)
            .ok_or_else(|| Error::ScopeMismatch(format!("variable #{var} not in {scope}")))?;
        let n = scope.config_count();
        let idx = (0..n).filter(|&i| values.contains(&scope.decode(i)[pos]));
        ConfigSet::from_indices(scope, idx)
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn into_bits(self) -> Bits {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, config: usize) -> bool {
        self.bits.contains(config)
    }

    pub fn is_full(&self) -> bool {
        self.bits == Bits::full(self.scope.config_count())
    }

    pub fn configurations(&self) -> Vec<Vec<String>> {
        self.bits.iter_ones().map(|i| self.scope.labels(i)).collect()
    }
}
