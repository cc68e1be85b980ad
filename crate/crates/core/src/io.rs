//! JSON documents for models, valuations, hypergraphs and networks, and the
//! JSON-lines dataset format.
//!
//! A model document always carries the variable list; every other section is
//! optional:
//!
//! ```json
//! {"variables":[{"name":"A","domain":["a0","a1"]}],
//!  "hypergraph":{"vertices":["A"],"hyperedges":[["A"]]},
//!  "factors":[{"scope":["A"],"masses":[{"set":[["a0"]],"mass":1.0}]}],
//!  "network":{"nodes":[{"var":"A","parents":[],"valuation":{...}}]},
//!  "tree":[["A","B"]],
//!  "joint":{...}}
//! ```
//!
//! A dataset is a header line `{"variables":[...],"scope":[...],"records":n}`
//! followed by one focal set per line, each a list of configurations.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::configset::Bits;
use crate::data::SampleDataset;
use crate::error::{Error, Result};
use crate::generate::GeneratorConfig;
use crate::hypergraph::{Hypergraph, VarSet};
use crate::model::{Model, Scope, Variable};
use crate::network::{BeliefNetwork, Dag};
use crate::valuation::BeliefValuation;

/// Tolerance on the mass total of loaded valuations.
pub const LOAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassJson {
    pub set: Vec<Vec<String>>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationJson {
    pub scope: Vec<String>,
    pub masses: Vec<MassJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergraphJson {
    pub vertices: Vec<String>,
    pub hyperedges: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub var: String,
    pub parents: Vec<String>,
    pub valuation: ValuationJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub nodes: Vec<NodeJson>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelDocument {
    pub variables: Vec<Variable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypergraph: Option<HypergraphJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<ValuationJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<ValuationJson>,
}

pub fn valuation_to_json(b: &BeliefValuation) -> ValuationJson {
    ValuationJson {
        scope: b.scope().names().into_iter().map(String::from).collect(),
        masses: b
            .focal_elements()
            .map(|(set, mass)| MassJson {
                set: set.configurations(),
                mass,
            })
            .collect(),
    }
}

/// Parses a valuation whose scope and configurations may list variables in
/// any order; masses must total one within [`LOAD_TOL`].
pub fn valuation_from_json(model: &Arc<Model>, v: &ValuationJson) -> Result<BeliefValuation> {
    let file_vars = v
        .scope
        .iter()
        .map(|n| model.index_of(n))
        .collect::<Result<Vec<_>>>()?;
    let scope = Scope::new(model, file_vars.iter().copied())?;
    if scope.len() != file_vars.len() {
        return Err(Error::Format(format!("scope {:?} repeats a variable", v.scope)));
    }
    // position in the file tuple of each scope variable
    let order: Vec<usize> = scope
        .vars()
        .iter()
        .map(|sv| file_vars.iter().position(|fv| fv == sv).expect("same set"))
        .collect();
    let n = scope.config_count();
    let mut masses = Vec::with_capacity(v.masses.len());
    for m in &v.masses {
        let mut bits = Bits::empty(n);
        for config in &m.set {
            if config.len() != order.len() {
                return Err(Error::Format(format!(
                    "configuration {config:?} does not match scope {:?}",
                    v.scope
                )));
            }
            let labels: Vec<&str> = order.iter().map(|&i| config[i].as_str()).collect();
            bits.insert(scope.encode_labels(&labels)?);
        }
        masses.push((bits, m.mass));
    }
    BeliefValuation::from_bits_with_tolerance(&scope, masses, LOAD_TOL)
}

fn names(model: &Model, vars: impl IntoIterator<Item = usize>) -> Vec<String> {
    vars.into_iter().map(|v| model.name(v).to_string()).collect()
}

fn var_set(model: &Model, names: &[String]) -> Result<VarSet> {
    names.iter().map(|n| model.index_of(n)).collect()
}

pub fn hypergraph_to_json(model: &Model, h: &Hypergraph) -> HypergraphJson {
    HypergraphJson {
        vertices: names(model, h.vertices().iter().copied()),
        hyperedges: h.edges().iter().map(|e| names(model, e.iter().copied())).collect(),
    }
}

pub fn hypergraph_from_json(model: &Model, h: &HypergraphJson) -> Result<Hypergraph> {
    let vertices = var_set(model, &h.vertices)?;
    let edges = h
        .hyperedges
        .iter()
        .map(|e| var_set(model, e))
        .collect::<Result<Vec<_>>>()?;
    Hypergraph::new(vertices, edges)
}

pub fn network_to_json(n: &BeliefNetwork) -> NetworkJson {
    let model = n.model();
    NetworkJson {
        nodes: (0..model.len())
            .map(|v| NodeJson {
                var: model.name(v).to_string(),
                parents: names(model, n.dag().parents(v).iter().copied()),
                valuation: valuation_to_json(n.valuation(v)),
            })
            .collect(),
    }
}

pub fn network_from_json(model: &Arc<Model>, n: &NetworkJson) -> Result<BeliefNetwork> {
    let mut parents: Vec<Option<Vec<usize>>> = vec![None; model.len()];
    let mut valuations: Vec<Option<BeliefValuation>> = vec![None; model.len()];
    for node in &n.nodes {
        let v = model.index_of(&node.var)?;
        if parents[v].is_some() {
            return Err(Error::Format(format!("node `{}` listed twice", node.var)));
        }
        parents[v] = Some(var_set(model, &node.parents)?.into_iter().collect());
        valuations[v] = Some(valuation_from_json(model, &node.valuation)?);
    }
    let missing = |v: usize| Error::Format(format!("network has no node for `{}`", model.name(v)));
    let parents = parents
        .into_iter()
        .enumerate()
        .map(|(v, p)| p.ok_or_else(|| missing(v)))
        .collect::<Result<Vec<_>>>()?;
    let valuations = valuations
        .into_iter()
        .enumerate()
        .map(|(v, p)| p.ok_or_else(|| missing(v)))
        .collect::<Result<Vec<_>>>()?;
    BeliefNetwork::new(model, Dag::new(parents)?, valuations)
}

impl ModelDocument {
    pub fn new(model: &Model) -> Self {
        ModelDocument {
            variables: model.variables().to_vec(),
            ..ModelDocument::default()
        }
    }

    pub fn model(&self) -> Result<Arc<Model>> {
        Model::new(self.variables.clone())
    }

    pub fn with_joint(mut self, joint: &BeliefValuation) -> Self {
        self.joint = Some(valuation_to_json(joint));
        self
    }

    pub fn with_network(mut self, network: &BeliefNetwork) -> Self {
        self.network = Some(network_to_json(network));
        self
    }

    pub fn with_tree(mut self, model: &Model, edges: &[(usize, usize)]) -> Self {
        self.tree = Some(
            edges
                .iter()
                .map(|&(a, b)| [model.name(a).to_string(), model.name(b).to_string()])
                .collect(),
        );
        self
    }

    pub fn tree_edges(&self, model: &Model) -> Result<Option<Vec<(usize, usize)>>> {
        let Some(tree) = &self.tree else { return Ok(None) };
        let mut edges = tree
            .iter()
            .map(|[a, b]| {
                let (a, b) = (model.index_of(a)?, model.index_of(b)?);
                Ok((a.min(b), a.max(b)))
            })
            .collect::<Result<Vec<_>>>()?;
        edges.sort_unstable();
        Ok(Some(edges))
    }

    /// Factor valuations: the explicit factor list, else the network's node
    /// valuations, else the joint alone.
    pub fn factor_valuations(&self, model: &Arc<Model>) -> Result<Vec<BeliefValuation>> {
        if let Some(fs) = &self.factors {
            return fs.iter().map(|f| valuation_from_json(model, f)).collect();
        }
        if let Some(n) = &self.network {
            return Ok(network_from_json(model, n)?.valuations().to_vec());
        }
        if let Some(j) = &self.joint {
            return Ok(vec![valuation_from_json(model, j)?]);
        }
        Err(Error::Format("document has no factors, network or joint".into()))
    }

    /// The stored joint, or the combination of the factors on the full scope.
    pub fn joint_valuation(&self, model: &Arc<Model>, limit: usize) -> Result<BeliefValuation> {
        if let Some(j) = &self.joint {
            return valuation_from_json(model, j);
        }
        let factors = self.factor_valuations(model)?;
        crate::propagation::brute_force_joint(&factors, limit)?.vacuous_extend(&Scope::full(model))
    }
}

pub fn read_document(path: &Path) -> Result<ModelDocument> {
    let text = std::fs::read_to_string(path)?;
    parse_document(&text)
}

pub fn parse_document(text: &str) -> Result<ModelDocument> {
    Ok(serde_json::from_str(text)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetHeader {
    variables: Vec<Variable>,
    scope: Vec<String>,
    records: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tree: Option<Vec<[String; 2]>>,
}

/// Writes the header line and one record per line. `tree` is carried along
/// so a learner can score itself against the generating structure.
pub fn write_dataset(out: &mut impl Write, data: &SampleDataset, tree: Option<&[(usize, usize)]>) -> Result<()> {
    let model = data.model();
    let header = DatasetHeader {
        variables: model.variables().to_vec(),
        scope: data.scope().names().into_iter().map(String::from).collect(),
        records: data.len(),
        tree: tree.map(|edges| {
            edges
                .iter()
                .map(|&(a, b)| [model.name(a).to_string(), model.name(b).to_string()])
                .collect()
        }),
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    let scope = data.scope();
    for r in data.records() {
        let configs: Vec<Vec<String>> = r.iter_ones().map(|c| scope.labels(c)).collect();
        writeln!(out, "{}", serde_json::to_string(&configs)?)?;
    }
    Ok(())
}

/// Reads a dataset and the generating tree edges if the header has them.
pub fn read_dataset(input: impl BufRead) -> Result<(SampleDataset, Option<Vec<(usize, usize)>>)> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty dataset".into()))??;
    let header: DatasetHeader = serde_json::from_str(&first)?;
    let model = Model::new(header.variables)?;
    let scope = Scope::from_names(&model, &header.scope)?;
    let file_vars = header
        .scope
        .iter()
        .map(|n| model.index_of(n))
        .collect::<Result<Vec<_>>>()?;
    let order: Vec<usize> = scope
        .vars()
        .iter()
        .map(|sv| file_vars.iter().position(|fv| fv == sv).expect("same set"))
        .collect();
    let n = scope.config_count();
    let mut records = Vec::with_capacity(header.records);
    let mut cache: HashMap<Vec<String>, usize> = HashMap::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let configs: Vec<Vec<String>> = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("record {}: {e}", i + 1)))?;
        let mut bits = Bits::empty(n);
        for config in configs {
            if config.len() != order.len() {
                return Err(Error::Format(format!("record {}: configuration {config:?} has the wrong length", i + 1)));
            }
            let idx = match cache.get(&config) {
                Some(&idx) => idx,
                None => {
                    let labels: Vec<&str> = order.iter().map(|&k| config[k].as_str()).collect();
                    let idx = scope.encode_labels(&labels)?;
                    cache.insert(config, idx);
                    idx
                }
            };
            bits.insert(idx);
        }
        records.push(bits);
    }
    if records.len() != header.records {
        return Err(Error::Format(format!(
            "header announces {} records, found {}",
            header.records,
            records.len()
        )));
    }
    let tree = header
        .tree
        .map(|t| {
            t.iter()
                .map(|[a, b]| {
                    let (a, b) = (model.index_of(a)?, model.index_of(b)?);
                    Ok((a.min(b), a.max(b)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Ok((SampleDataset::new(scope, records)?, tree))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_round_trip_is_exact() {
        let m = Model::binary(&["A", "B"]).unwrap();
        let s = Scope::full(&m);
        let b = BeliefValuation::from_bits(
            &s,
            [
                (Bits::from_indices(4, [0, 3]), 0.1 + 0.2),
                (Bits::full(4), 1.0 - (0.1 + 0.2)),
            ],
        )
        .unwrap();
        let text = serde_json::to_string(&valuation_to_json(&b)).unwrap();
        let back = valuation_from_json(&m, &serde_json::from_str(&text).unwrap()).unwrap();
        assert!(back.approx_eq(&b, 0.0));
    }

    #[test]
    fn scope_order_in_file_is_free() {
        let m = Model::binary(&["A", "B"]).unwrap();
        let v: ValuationJson = serde_json::from_str(
            r#"{"scope":["B","A"],"masses":[{"set":[["b1","a0"]],"mass":0.5},{"set":[["b0","a0"],["b1","a1"]],"mass":0.5}]}"#,
        )
        .unwrap();
        let b = valuation_from_json(&m, &v).unwrap();
        assert_eq!(b.mass_of_bits(&Bits::from_indices(4, [1])), 0.5);
        assert_eq!(b.mass_of_bits(&Bits::from_indices(4, [0, 3])), 0.5);
    }

    #[test]
    fn bad_totals_and_labels_rejected() {
        let m = Model::binary(&["A"]).unwrap();
        let short: ValuationJson =
            serde_json::from_str(r#"{"scope":["A"],"masses":[{"set":[["a0"]],"mass":0.9}]}"#).unwrap();
        assert!(valuation_from_json(&m, &short).is_err());
        let label: ValuationJson =
            serde_json::from_str(r#"{"scope":["A"],"masses":[{"set":[["zz"]],"mass":1.0}]}"#).unwrap();
        assert!(valuation_from_json(&m, &label).is_err());
    }

    #[test]
    fn dataset_round_trip() {
        let m = Model::binary(&["A", "B"]).unwrap();
        let s = Scope::full(&m);
        let data = SampleDataset::new(s, vec![Bits::from_indices(4, [0, 3]), Bits::full(4)]).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &data, Some(&[(0, 1)])).unwrap();
        let (back, tree) = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, data);
        assert_eq!(tree, Some(vec![(0, 1)]));
    }
}
