//! Variables, models and scopes.
//!
//! A [`Model`] fixes an ordered list of discrete variables. Every [`Scope`] is
//! a subset of the model's variables kept in model order, and the frame of a
//! scope (its configuration space) is enumerated in mixed radix with the first
//! scope variable most significant.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, domain: Vec<String>) -> Self {
        Variable {
            name: name.into(),
            domain,
        }
    }

    pub fn value_index(&self, label: &str) -> Result<usize> {
        self.domain
            .iter()
            .position(|v| v == label)
            .ok_or_else(|| Error::UnknownValue {
                var: self.name.clone(),
                value: label.to_string(),
            })
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables
    }
}

impl Eq for Model {}

impl Model {
    pub fn new(variables: Vec<Variable>) -> Result<Arc<Model>> {
        if variables.is_empty() {
            return Err(Error::InvalidModel("a model needs at least one variable".into()));
        }
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if v.domain.is_empty() {
                return Err(Error::InvalidModel(format!("variable `{}` has an empty domain", v.name)));
            }
            for (j, label) in v.domain.iter().enumerate() {
                if v.domain[..j].contains(label) {
                    return Err(Error::InvalidModel(format!(
                        "variable `{}` lists value `{}` twice",
                        v.name, label
                    )));
                }
            }
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::InvalidModel(format!("duplicate variable `{}`", v.name)));
            }
        }
        Ok(Arc::new(Model { variables, index }))
    }

    /// Binary variables named as given, with values `<lowercase name>0` and
    /// `<lowercase name>1`.
    pub fn binary<S: AsRef<str>>(names: &[S]) -> Result<Arc<Model>> {
        Self::uniform(names, 2)
    }

    /// Variables sharing one domain size; labels are `<lowercase name><k>`.
    pub fn uniform<S: AsRef<str>>(names: &[S], size: usize) -> Result<Arc<Model>> {
        let vars = names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                let stem = n.to_lowercase();
                Variable::new(n, (0..size).map(|k| format!("{stem}{k}")).collect())
            })
            .collect();
        Model::new(vars)
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, i: usize) -> &Variable {
        &self.variables[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.variables[i].name
    }

    pub fn domain_size(&self, i: usize) -> usize {
        self.variables[i].domain.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

/// A subset of a model's variables in model order.
#[derive(Clone)]
pub struct Scope {
    model: Arc<Model>,
    vars: Vec<usize>,
}

impl PartialEq for Scope {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && same_model(&self.model, &other.model)
    }
}

impl Eq for Scope {}

impl fmt::Debug for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names().join(","))
    }
}

pub(crate) fn same_model(a: &Arc<Model>, b: &Arc<Model>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Scope {
    pub fn new(model: &Arc<Model>, vars: impl IntoIterator<Item = usize>) -> Result<Scope> {
        let mut vars: Vec<usize> = vars.into_iter().collect();
        vars.sort_unstable();
        vars.dedup();
        if let Some(&v) = vars.iter().find(|&&v| v >= model.len()) {
            return Err(Error::UnknownVariable(format!("#{v}")));
        }
        Ok(Scope {
            model: model.clone(),
            vars,
        })
    }

    pub fn from_names<S: AsRef<str>>(model: &Arc<Model>, names: &[S]) -> Result<Scope> {
        let vars = names
            .iter()
            .map(|n| model.index_of(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Scope::new(model, vars)
    }

    pub fn empty(model: &Arc<Model>) -> Scope {
        Scope {
            model: model.clone(),
            vars: Vec::new(),
        }
    }

    pub fn full(model: &Arc<Model>) -> Scope {
        Scope {
            model: model.clone(),
            vars: (0..model.len()).collect(),
        }
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|&v| self.model.name(v)).collect()
    }

    pub fn contains_var(&self, v: usize) -> bool {
        self.vars.binary_search(&v).is_ok()
    }

    pub fn is_subset(&self, other: &Scope) -> bool {
        self.vars.iter().all(|&v| other.contains_var(v))
    }

    pub fn union(&self, other: &Scope) -> Scope {
        let mut vars = self.vars.clone();
        vars.extend_from_slice(&other.vars);
        vars.sort_unstable();
        vars.dedup();
        Scope {
            model: self.model.clone(),
            vars,
        }
    }

    pub fn intersection(&self, other: &Scope) -> Scope {
        Scope {
            model: self.model.clone(),
            vars: self.vars.iter().copied().filter(|&v| other.contains_var(v)).collect(),
        }
    }

    pub fn difference(&self, other: &Scope) -> Scope {
        Scope {
            model: self.model.clone(),
            vars: self.vars.iter().copied().filter(|&v| !other.contains_var(v)).collect(),
        }
    }

    pub fn with_var(&self, v: usize) -> Scope {
        let mut s = self.clone();
        if let Err(pos) = s.vars.binary_search(&v) {
            s.vars.insert(pos, v);
        }
        s
    }

    /// Number of configurations; saturates at `usize::MAX`.
    pub fn config_count(&self) -> usize {
        self.vars
            .iter()
            .try_fold(1usize, |acc, &v| acc.checked_mul(self.model.domain_size(v)))
            .unwrap_or(usize::MAX)
    }

    pub fn radices(&self) -> Vec<usize> {
        self.vars.iter().map(|&v| self.model.domain_size(v)).collect()
    }

    /// Value indices of configuration `idx`, one per scope variable.
    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let radices = self.radices();
        let mut out = vec![0; radices.len()];
        for (slot, r) in out.iter_mut().zip(radices.iter()).rev() {
            *slot = idx % r;
            idx /= r;
        }
        out
    }

    pub fn encode(&self, values: &[usize]) -> usize {
        debug_assert_eq!(values.len(), self.vars.len());
        self.radices()
            .iter()
            .zip(values)
            .fold(0, |acc, (r, v)| acc * r + v)
    }

    pub fn encode_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        if labels.len() != self.vars.len() {
            return Err(Error::Format(format!(
                "configuration has {} values but scope {} has {} variables",
                labels.len(),
                self,
                self.vars.len()
            )));
        }
        let values = self
            .vars
            .iter()
            .zip(labels)
            .map(|(&v, l)| self.model.variable(v).value_index(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.encode(&values))
    }

    pub fn labels(&self, idx: usize) -> Vec<String> {
        self.decode(idx)
            .into_iter()
            .zip(&self.vars)
            .map(|(val, &v)| self.model.variable(v).domain[val].clone())
            .collect()
    }

    /// For every configuration of `self`, the index of its restriction to `sub`.
    pub fn projection_table(&self, sub: &Scope) -> Vec<usize> {
        let radices = self.radices();
        // stride of each of our variables inside `sub` (0 when absent)
        let sub_radices = sub.radices();
        let mut sub_strides = vec![0usize; sub.len()];
        let mut acc = 1;
        for k in (0..sub.len()).rev() {
            sub_strides[k] = acc;
            acc *= sub_radices[k];
        }
        let strides: Vec<usize> = self
            .vars
            .iter()
            .map(|v| match sub.vars.binary_search(v) {
                Ok(k) => sub_strides[k],
                Err(_) => 0,
            })
            .collect();

        let total = self.config_count();
        let mut out = Vec::with_capacity(total);
        let mut digits = vec![0usize; radices.len()];
        let mut current = 0usize;
        for _ in 0..total {
            out.push(current);
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                current += strides[k];
                if digits[k] < radices[k] {
                    break;
                }
                current -= strides[k] * digits[k];
                digits[k] = 0;
            }
        }
        out
    }
}
