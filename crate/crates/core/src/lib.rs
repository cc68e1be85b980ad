//! Dempster-Shafer belief functions on discrete variables: a valuation
//! algebra with combination, decombination and mk-conditioning, Markov-tree
//! propagation, conversion of valuated hypertrees into belief networks, and
//! recovery of tree-shaped belief networks from distributions or samples.

pub mod checks;
pub mod configset;
pub mod data;
pub mod delta;
pub mod error;
pub mod evidence;
pub mod generate;
pub mod hypergraph;
pub mod io;
pub mod learning;
pub mod lattice;
pub mod model;
pub mod network;
pub mod propagation;
pub mod valuation;

pub use configset::{Bits, ConfigSet};
pub use delta::delta_divergence;
pub use error::{Error, Result};
pub use evidence::{apply_evidence, EvidencePotential};
pub use lattice::{conditional, decombine, dense_limit, mk_condition, mobius_q_to_m};
pub use model::{Model, Scope, Variable};
pub use valuation::BeliefValuation;
pub use hypergraph::{ConstructionSequence, Hypergraph, Twig, VarSet};
pub use propagation::{brute_force_joint, build_markov_tree, MarkovTree};
pub use network::{ci_holds, d_separated, enumerate_compatible, hypertree_to_network, induced_hypergraph, is_compatible, BeliefNetwork, Dag};
pub use data::{estimate_marginal, sample, SampleDataset};
pub use generate::{generate_bayesian_tree, generate_hypertree, generate_tree_distribution, GeneratedTree, GeneratorConfig};
pub use learning::{dep_bn, dep_kl, learn_tree, ternary_background_joint, DepMatrix, LearnedTree, MarginalSource, Measure};
