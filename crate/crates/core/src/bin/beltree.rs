//! Command-line driver: generate, sample, learn, propagate, convert, delta
//! and check.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use beltree::checks::{check_axioms, check_examples, check_roundtrip, check_theorem4, CheckReport};
use beltree::data::total_variation;
use beltree::generate::{generate_bayesian_tree, generate_hypertree, generate_tree_distribution, GeneratorConfig};
use beltree::io::{
    hypergraph_from_json, hypergraph_to_json, network_to_json, read_dataset, to_json_string, valuation_from_json,
    valuation_to_json, write_dataset, ModelDocument,
};
use beltree::learning::{learn_tree, LearnedTree, Measure};
use beltree::propagation::DEFAULT_JOINT_LIMIT;
use beltree::{
    delta_divergence, hypertree_to_network, sample, BeliefValuation, Error, EvidencePotential, MarkovTree, Model,
    Scope,
};

#[derive(Parser)]
#[command(name = "beltree", version, about = "Belief-function trees: propagation, conversion and structure learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random tree distribution, Bayesian tree or valuated hypertree.
    Generate(GenerateArgs),
    /// Draw focal-set samples from a joint distribution.
    Sample(SampleArgs),
    /// Recover a tree-shaped network from a distribution or a dataset.
    Learn(LearnArgs),
    /// Marginal of a variable after propagating evidence.
    Propagate(PropagateArgs),
    /// Convert a valuated hypertree into a belief network.
    Convert(ConvertArgs),
    /// Divergence of an approximation from a reference distribution.
    Delta(DeltaArgs),
    /// Run property suites and print a verdict.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tree,
    Bayesian,
    Hypertree,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 5)]
    vars: usize,
    #[arg(long, default_value_t = 2)]
    domain_size: usize,
    /// Focal elements per node valuation, the full frame included.
    #[arg(long, default_value_t = 3)]
    focal: usize,
    #[arg(long, default_value_t = 0.05)]
    q_min: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    max_attempts: usize,
    #[arg(long, value_enum, default_value_t = Kind::Tree)]
    kind: Kind,
    /// Hyperedge count for `--kind hypertree`.
    #[arg(long, default_value_t = 4)]
    edges: usize,
    /// Model document (structure and node valuations).
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Joint distribution document.
    #[arg(long)]
    joint_out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// Document holding the joint (`-` for stdin).
    #[arg(short, long, default_value = "-")]
    model: PathBuf,
    #[arg(short = 'n', long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    DepBn,
    DepKl,
}

#[derive(Args)]
struct LearnArgs {
    /// Document holding the exact distribution.
    #[arg(long, conflicts_with = "from_data")]
    from_model: Option<PathBuf>,
    /// JSON-lines dataset (`-` for stdin, the default).
    #[arg(long)]
    from_data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MeasureArg::DepBn)]
    measure: MeasureArg,
    /// Learned network document.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dependence matrix, chosen arms and tie-breaks.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PropagateArgs {
    #[arg(short, long, default_value = "-")]
    model: PathBuf,
    /// `VAR=value` or `VAR=v1|v2@0.8`; repeatable.
    #[arg(long)]
    evidence: Vec<String>,
    /// Variable to report; repeatable.
    #[arg(long, required = true)]
    query: Vec<String>,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(short, long, default_value = "-")]
    model: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DeltaArgs {
    /// Approximating distribution.
    #[arg(short)]
    a: PathBuf,
    /// Reference distribution.
    #[arg(short)]
    b: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    axioms: bool,
    #[arg(long)]
    theorem4: bool,
    #[arg(long)]
    examples: bool,
    #[arg(long)]
    roundtrip: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random instances for the axiom suite.
    #[arg(long, default_value_t = 200)]
    cases: usize,
    /// Generated structures for the theorem4 and roundtrip suites.
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

fn read_text(path: &Path) -> beltree::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn write_text(path: Option<&Path>, text: &str) -> beltree::Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, text)?,
        _ => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_document(path: &Path) -> beltree::Result<(ModelDocument, Arc<Model>)> {
    let doc: ModelDocument = serde_json::from_str(&read_text(path)?)?;
    let model = doc.model()?;
    Ok((doc, model))
}

fn generate(args: &GenerateArgs) -> beltree::Result<()> {
    let cfg = GeneratorConfig {
        vars: args.vars,
        domain_sizes: vec![args.domain_size; args.vars],
        focal: args.focal,
        q_min: args.q_min,
        seed: args.seed,
        max_attempts: args.max_attempts,
    };
    let (structure, joint) = match args.kind {
        Kind::Tree | Kind::Bayesian => {
            let g = match args.kind {
                Kind::Tree => generate_tree_distribution(&cfg)?,
                _ => generate_bayesian_tree(&cfg)?,
            };
            let mut doc = ModelDocument::new(&g.model)
                .with_network(&g.network)
                .with_tree(&g.model, &g.edges);
            doc.generator = Some(cfg);
            (doc, g.joint)
        }
        Kind::Hypertree => {
            let tree = generate_hypertree(args.vars, args.edges, args.focal, args.seed)?;
            let model = tree.model().clone();
            let mut doc = ModelDocument::new(&model);
            doc.hypergraph = Some(hypergraph_to_json(&model, &tree.sequence().hypergraph()));
            doc.factors = Some(tree.factors().iter().map(valuation_to_json).collect());
            let joint = tree.joint(DEFAULT_JOINT_LIMIT)?.vacuous_extend(&Scope::full(&model))?;
            (doc, joint)
        }
    };
    let model = structure.model()?;
    if args.model_out.is_none() && args.joint_out.is_none() {
        return write_text(None, &to_json_string(&structure.with_joint(&joint))?);
    }
    if let Some(p) = &args.model_out {
        write_text(Some(p), &to_json_string(&structure)?)?;
    }
    if let Some(p) = &args.joint_out {
        let mut doc = ModelDocument::new(&model).with_joint(&joint);
        doc.tree = structure.tree.clone();
        write_text(Some(p), &to_json_string(&doc)?)?;
    }
    Ok(())
}

fn sample_cmd(args: &SampleArgs) -> beltree::Result<()> {
    let (doc, model) = load_document(&args.model)?;
    let joint = doc.joint_valuation(&model, DEFAULT_JOINT_LIMIT)?;
    let data = sample(&joint, args.count, args.seed)?;
    let tree = doc.tree_edges(&model)?;
    match &args.out {
        Some(p) if p.as_os_str() != "-" => {
            let mut w = BufWriter::new(File::create(p)?);
            write_dataset(&mut w, &data, tree.as_deref())?;
            w.flush()?;
        }
        _ => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_dataset(&mut w, &data, tree.as_deref())?;
            w.flush()?;
        }
    }
    Ok(())
}

fn edge_names(model: &Model, edges: &[(usize, usize)]) -> Vec<[String; 2]> {
    edges
        .iter()
        .map(|&(a, b)| [model.name(a).to_string(), model.name(b).to_string()])
        .collect()
}

fn learn(args: &LearnArgs) -> beltree::Result<()> {
    let measure = match args.measure {
        MeasureArg::DepBn => Measure::DepBn,
        MeasureArg::DepKl => Measure::DepKl,
    };
    let (learned, truth, joint): (LearnedTree, Option<Vec<(usize, usize)>>, Option<BeliefValuation>) =
        if let Some(path) = &args.from_model {
            let (doc, model) = load_document(path)?;
            let joint = doc.joint_valuation(&model, DEFAULT_JOINT_LIMIT)?;
            (learn_tree(&joint, measure)?, doc.tree_edges(&model)?, Some(joint))
        } else {
            let path = args.from_data.clone().unwrap_or_else(|| PathBuf::from("-"));
            let (data, truth) = if path.as_os_str() == "-" {
                read_dataset(io::stdin().lock())?
            } else {
                read_dataset(BufReader::new(File::open(&path)?))?
            };
            (learn_tree(&data, measure)?, truth, None)
        };
    let model = learned.network.model().clone();
    let mut summary = json!({
        "measure": match measure { Measure::DepBn => "dep-bn", Measure::DepKl => "dep-kl" },
        "root": model.name(learned.root),
        "edges": edge_names(&model, &learned.edges),
        "unique_maximum": learned.is_unique_maximum(),
    });
    if let Some(truth) = &truth {
        let distance = learned.distance_to(truth);
        summary["true_edges"] = json!(edge_names(&model, truth));
        summary["edge_distance"] = json!(distance);
        summary["recovered"] = json!(distance == 0);
    }
    if let Some(joint) = &joint {
        let learned_joint = learned.network.underlying()?.vacuous_extend(joint.scope())?;
        let delta = delta_divergence(&learned_joint, joint)?;
        summary["joint_delta"] = if delta.is_finite() { json!(delta) } else { json!("inf") };
        summary["joint_total_variation"] = json!(total_variation(&learned_joint, joint)?);
    }
    if let Some(p) = &args.out {
        let doc = ModelDocument::new(&model)
            .with_network(&learned.network)
            .with_tree(&model, &learned.edges);
        write_text(Some(p), &to_json_string(&doc)?)?;
    }
    if let Some(p) = &args.report {
        let entries: Vec<_> = learned
            .matrix
            .pairs()
            .into_iter()
            .map(|(a, b)| {
                let e = learned.matrix.get(a, b);
                let arm = match e.arm {
                    beltree::learning::Arm::Direct => json!("direct"),
                    beltree::learning::Arm::Background(v) => json!({ "background": model.name(v) }),
                    beltree::learning::Arm::Information => json!("mutual-information"),
                };
                let value = if e.value.is_finite() { json!(e.value) } else { json!("inf") };
                json!({ "pair": [model.name(a), model.name(b)], "value": value, "arm": arm })
            })
            .collect();
        let report = json!({ "summary": summary, "dependence": entries, "ties": learned.ties });
        write_text(Some(p), &to_json_string(&report)?)?;
    }
    write_text(None, &to_json_string(&summary)?)
}

fn markov_tree(doc: &ModelDocument, model: &Arc<Model>) -> beltree::Result<MarkovTree> {
    let factors = doc.factor_valuations(model)?;
    if let (Some(h), Some(_)) = (&doc.hypergraph, &doc.factors) {
        let h = hypergraph_from_json(model, h)?;
        if let Some(seq) = h.construction_sequence() {
            if seq.len() == factors.len() {
                let aligned = (0..seq.len())
                    .map(|k| {
                        let node = Scope::new(model, seq.edge(k).iter().copied())?;
                        factors
                            .iter()
                            .position(|f| f.scope() == &node)
                            .map(|i| factors[i].clone())
                            .ok_or_else(|| Error::Format(format!("no factor on hyperedge {node}")))
                    })
                    .collect::<beltree::Result<Vec<_>>>();
                if let Ok(aligned) = aligned {
                    return MarkovTree::new(seq, aligned);
                }
            }
        }
    }
    MarkovTree::from_factors(&factors)
}

fn propagate(args: &PropagateArgs) -> beltree::Result<()> {
    let (doc, model) = load_document(&args.model)?;
    let tree = markov_tree(&doc, &model)?;
    let evidence = args
        .evidence
        .iter()
        .map(|e| EvidencePotential::parse(&model, e))
        .collect::<beltree::Result<Vec<_>>>()?;
    let marginals = tree.propagate(&evidence)?;
    let mut out = Vec::new();
    for name in &args.query {
        let target = Scope::from_names(&model, &[name])?;
        let k = tree
            .host_of(&target)
            .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
        let marginal = marginals[k].marginalize(&target)?;
        let conflict = marginal.conflict();
        let normalized = marginal.normalized()?;
        out.push(json!({ "query": name, "conflict": conflict, "marginal": valuation_to_json(&normalized) }));
    }
    write_text(None, &to_json_string(&out)?)
}

fn convert(args: &ConvertArgs) -> beltree::Result<()> {
    let (doc, model) = load_document(&args.model)?;
    let tree = markov_tree(&doc, &model)?;
    let conv = hypertree_to_network(&tree)?;
    let mut out = ModelDocument::new(&model);
    out.hypergraph = Some(hypergraph_to_json(&model, &tree.sequence().hypergraph()));
    out.network = Some(network_to_json(&conv.network));
    write_text(args.out.as_deref(), &to_json_string(&out)?)
}

fn delta(args: &DeltaArgs) -> beltree::Result<()> {
    let (da, ma) = load_document(&args.a)?;
    let (db, mb) = load_document(&args.b)?;
    if *ma != *mb {
        return Err(Error::ScopeMismatch("the two documents declare different variables".into()));
    }
    let a = da.joint_valuation(&ma, DEFAULT_JOINT_LIMIT)?;
    let b = match &db.joint {
        Some(j) => valuation_from_json(&ma, j)?,
        None => db.joint_valuation(&ma, DEFAULT_JOINT_LIMIT)?,
    };
    let full = Scope::full(&ma);
    let d = delta_divergence(&a.vacuous_extend(&full)?, &b.vacuous_extend(&full)?)?;
    println!("{d:?}");
    Ok(())
}

fn check(args: &CheckArgs) -> beltree::Result<bool> {
    let all = !(args.axioms || args.theorem4 || args.examples || args.roundtrip);
    let mut reports: Vec<CheckReport> = Vec::new();
    if all || args.axioms {
        reports.push(check_axioms(args.cases, args.seed)?);
    }
    if all || args.theorem4 {
        reports.push(check_theorem4(args.trials, args.seed)?);
    }
    if all || args.examples {
        reports.push(check_examples()?);
    }
    if all || args.roundtrip {
        reports.push(check_roundtrip(args.trials, args.seed)?);
    }
    let passed = reports.iter().all(|r| r.passed);
    write_text(None, &to_json_string(&json!({ "passed": passed, "suites": reports }))?)?;
    Ok(passed)
}

fn run(cli: Cli) -> beltree::Result<ExitCode> {
    match &cli.command {
        Command::Generate(a) => generate(a)?,
        Command::Sample(a) => sample_cmd(a)?,
        Command::Learn(a) => learn(a)?,
        Command::Propagate(a) => propagate(a)?,
        Command::Convert(a) => convert(a)?,
        Command::Delta(a) => delta(a)?,
        Command::Check(a) => {
            if !check(a)? {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
