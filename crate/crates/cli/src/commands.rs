use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use apne::cooccur::{build_cooccurrence, inject_label_context, sample_walks};
use apne::emf::{read_word2vec, train_alm, write_trajectory_csv, write_word2vec};
use apne::eval::{
    auc, heuristic_score, make_classify_split, make_link_split, mean_average_precision, score_pairs, train_classifier,
    write_pair_scores, ClassifyConfig, EvalReport, Heuristic, LinkSplitConfig, LogisticConfig, Task,
};
use apne::graph::{load_dense_features, load_edge_list, load_features, load_labels, transition_matrix};
use apne::proximity::{empirical_deviation, verify_rpr_bound};
use apne::{ContentMatrix, CooccurrenceMatrix, Error, Graph, TrainConfig, WalkConfig};
use ndarray::Array2;

use crate::config::RunConfig;
use crate::{ClassifyArgs, EmbedArgs, LinkpredArgs, SampleArgs, SplitArgs, VerifyArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
}

impl Failure {
    pub fn data(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(Error::Config(_) | Error::UnknownMethod(_)) => EXIT_USAGE,
            Failure::Core(Error::Diverged { .. }) => EXIT_NUMERIC,
            Failure::Core(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Core(e @ Error::Diverged { .. }) => write!(f, "{e} (try a smaller --step)"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::data(e)
    }
}

type Outcome = Result<(), Failure>;

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::data(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::data(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

fn load_graph(path: &Path, weighted: bool) -> Result<Graph, Failure> {
    Ok(load_edge_list(open(path)?, weighted)?)
}

pub fn sample(a: SampleArgs) -> Outcome {
    if a.label_context > 0 && a.labels.is_none() {
        return Err(Failure::Usage("--label-context needs --labels".into()));
    }
    let graph = load_graph(&a.edges, a.weighted)?;
    let p = transition_matrix(&graph);
    let cfg =
        WalkConfig { walk_length: a.walk_length, walks_per_node: a.walks_per_node, window: a.window, seed: a.seed };
    let walks = sample_walks(&p, &cfg)?;
    let mut dmat = build_cooccurrence(&walks, a.window);
    let structural_total = dmat.total();
    if let Some(labels) = &a.labels {
        let labels = load_labels(open(labels)?, graph.nodes())?;
        if a.label_context > 0 {
            dmat = inject_label_context(&dmat, &labels, a.label_context, a.seed)?;
        }
    }

    let mut out = create(&a.out)?;
    dmat.write_triplets(graph.nodes(), &mut out)?;
    out.flush()?;
    if let Some(path) = &a.walks_out {
        let mut w = create(path)?;
        walks.write(graph.nodes(), &mut w)?;
        w.flush()?;
    }

    let isolated = p.isolated_nodes();
    let mut stats = create(&with_suffix(&a.out, ".stats"))?;
    writeln!(stats, "nodes = {}", dmat.num_nodes())?;
    writeln!(stats, "edges = {}", graph.num_edges())?;
    writeln!(stats, "walks = {}", walks.len())?;
    writeln!(stats, "walk_length = {}", a.walk_length)?;
    writeln!(stats, "window = {}", a.window)?;
    writeln!(stats, "total = {}", dmat.total())?;
    writeln!(stats, "structure_total = {structural_total}")?;
    writeln!(stats, "label_total = {}", dmat.total() - structural_total)?;
    writeln!(stats, "nonzeros = {}", dmat.nnz())?;
    writeln!(stats, "isolated_nodes = {}", isolated.len())?;
    let ids: Vec<&str> = isolated.iter().map(|&i| graph.nodes().id(i)).collect();
    writeln!(stats, "isolated = {}", ids.join(" "))?;
    stats.flush()?;

    RunConfig::new(&["sample"])
        .input(&a.edges)
        .maybe("labels", a.labels.as_ref().map(|p| p.display()))
        .option("weighted", a.weighted)
        .option("walk-length", a.walk_length)
        .option("window", a.window)
        .option("walks-per-node", a.walks_per_node)
        .option("label-context", a.label_context)
        .option("seed", a.seed)
        .option("out", a.out.display())
        .maybe("walks-out", a.walks_out.as_ref().map(|p| p.display()))
        .write_next_to(&a.out)?;
    Ok(())
}

pub fn embed(a: EmbedArgs) -> Outcome {
    let (nodes, dmat): (_, CooccurrenceMatrix) = CooccurrenceMatrix::read_triplets(open(&a.cooccur)?)?;
    let content = match &a.features {
        Some(path) if a.dense => load_dense_features(open(path)?, &nodes)?,
        Some(path) => load_features(open(path)?, &nodes, a.num_features)?,
        None => {
            log::info!("no features given; using the identity content matrix");
            ContentMatrix::identity(nodes.len())
        }
    };
    let cfg = TrainConfig {
        dim: a.dim,
        step_size: a.step,
        outer_iters: a.iters,
        inner_max: a.inner_max,
        inner_tol: a.inner_tol,
        negative_ratio: a.neg,
        seed: a.seed,
        init_scale: a.init_scale,
        block_rows: a.block_rows,
    };
    let outcome = train_alm(&dmat, &content, &cfg)?;

    let mut out = create(&a.out)?;
    write_word2vec(&mut out, nodes.ids().iter().map(String::as_str), outcome.model.node_vectors().view())?;
    out.flush()?;
    let trajectory = a.trajectory.clone().unwrap_or_else(|| with_suffix(&a.out, ".loss.csv"));
    let mut t = create(&trajectory)?;
    write_trajectory_csv(&mut t, &outcome.trajectory)?;
    t.flush()?;
    if let Some(path) = &a.dump_s {
        let names: Vec<String> = (0..content.num_features()).map(|f| f.to_string()).collect();
        let mut s = create(path)?;
        write_word2vec(&mut s, names.iter().map(String::as_str), outcome.model.s.view())?;
        s.flush()?;
    }

    RunConfig::new(&["embed"])
        .input(&a.cooccur)
        .maybe("features", a.features.as_ref().map(|p| p.display()))
        .option("dense", a.dense)
        .maybe("num-features", a.num_features)
        .option("dim", a.dim)
        .option("iters", a.iters)
        .option("step", a.step)
        .option("neg", a.neg)
        .option("seed", a.seed)
        .option("inner-max", a.inner_max)
        .option("inner-tol", a.inner_tol)
        .option("init-scale", a.init_scale)
        .option("block-rows", a.block_rows)
        .option("out", a.out.display())
        .option("trajectory", trajectory.display())
        .maybe("dump-s", a.dump_s.as_ref().map(|p| p.display()))
        .write_next_to(&a.out)?;
    Ok(())
}

/// Embedding rows reordered to `graph`'s node order; nodes without a vector
/// get zeros.
fn aligned_vectors(path: &Path, graph: &Graph) -> Result<Array2<f64>, Failure> {
    let emb = read_word2vec(open(path)?)?;
    let mut vectors = Array2::zeros((graph.num_nodes(), emb.vectors.ncols()));
    let mut missing = 0;
    for (i, id) in graph.nodes().ids().iter().enumerate() {
        match emb.index.get(id) {
            Some(row) => vectors.row_mut(i).assign(&emb.vectors.row(row)),
            None => missing += 1,
        }
    }
    if missing > 0 {
        log::warn!("{missing} nodes have no embedding and score as zero vectors");
    }
    Ok(vectors)
}

fn emit(report: &EvalReport, json: Option<&Path>, config: RunConfig) -> Outcome {
    print!("{}", report.to_table());
    if let Some(path) = json {
        std::fs::write(path, report.to_json() + "\n")?;
        config.write_next_to(path)?;
    }
    Ok(())
}

pub fn classify(a: ClassifyArgs) -> Outcome {
    let emb = read_word2vec(open(&a.embeddings)?)?;
    let labels = load_labels(open(&a.labels)?, &emb.index)?;
    let split =
        make_classify_split(&labels, &ClassifyConfig { per_class: a.per_class, test_size: a.test_size, seed: a.seed })?;
    let cfg = LogisticConfig { l2: a.l2, learning_rate: a.lr, steps: a.steps };
    let clf = train_classifier(emb.vectors.view(), &split, labels.num_classes(), &cfg)?;
    let report = EvalReport::new(Task::Classify, "logistic", a.seed)
        .with_metric("accuracy", clf.accuracy(emb.vectors.view(), &split.test));
    let config = RunConfig::new(&["eval", "classify"])
        .input(&a.embeddings)
        .input(&a.labels)
        .option("per-class", a.per_class)
        .option("test-size", a.test_size)
        .option("seed", a.seed)
        .option("l2", a.l2)
        .option("lr", a.lr)
        .option("steps", a.steps)
        .maybe("json", a.json.as_ref().map(|p| p.display()));
    emit(&report, a.json.as_deref(), config)
}

pub fn linkpred(a: LinkpredArgs) -> Outcome {
    let heuristic = match a.method.as_str() {
        "cosine" => None,
        other => Some(other.parse::<Heuristic>()?),
    };
    let (embeddings, edges) = match (heuristic, a.paths.as_slice()) {
        (None, [emb, edges]) => (Some(emb), edges),
        (None, _) => return Err(Failure::Usage("cosine scoring needs EMBEDDINGS and EDGES".into())),
        (Some(_), [edges]) => (None, edges),
        (Some(_), _) => return Err(Failure::Usage(format!("method `{}` takes only EDGES", a.method))),
    };
    let graph = load_graph(edges, a.weighted)?;
    let split = make_link_split(&graph, &LinkSplitConfig { fraction: a.fraction, seed: a.split_seed })?;
    let pairs = split.labeled_pairs();
    let labels: Vec<bool> = pairs.iter().map(|&(_, _, l)| l).collect();
    let scores = match (heuristic, embeddings) {
        (Some(h), _) => pairs.iter().map(|&(u, v, _)| heuristic_score(&split.residual, u, v, h)).collect(),
        (None, Some(path)) => {
            let vectors = aligned_vectors(path, &graph)?;
            let uv: Vec<(usize, usize)> = pairs.iter().map(|&(u, v, _)| (u, v)).collect();
            score_pairs(vectors.view(), &uv)
        }
        (None, None) => unreachable!("cosine scoring always has embeddings"),
    };
    if let Some(path) = &a.scores {
        write_pair_scores(create(path)?, graph.nodes(), pairs, &scores)?;
    }
    let report = EvalReport::new(Task::Linkpred, a.method.clone(), a.split_seed)
        .with_metric("auc", auc(&scores, &labels)?)
        .with_metric("map", mean_average_precision(&scores, &labels)?)
        .with_metric("removed_fraction", split.achieved);
    let mut config = RunConfig::new(&["eval", "linkpred"]);
    for p in &a.paths {
        config = config.input(p);
    }
    let config = config
        .option("method", &a.method)
        .option("split-seed", a.split_seed)
        .option("fraction", a.fraction)
        .option("weighted", a.weighted)
        .maybe("json", a.json.as_ref().map(|p| p.display()))
        .maybe("scores", a.scores.as_ref().map(|p| p.display()));
    emit(&report, a.json.as_deref(), config)
}

pub fn verify(a: VerifyArgs) -> Outcome {
    let graph = load_graph(&a.edges, a.weighted)?;
    let p = transition_matrix(&graph);
    let report = verify_rpr_bound(&p, a.order, a.beta)?;
    let mut text = report.to_key_value();
    let mut json = serde_json::to_value(report).expect("report serializes");
    if let Some(walks_per_node) = a.empirical {
        let cfg = WalkConfig { walk_length: a.walk_length, walks_per_node, window: a.order, seed: a.seed };
        let walks = sample_walks(&p, &cfg)?;
        let deviation = empirical_deviation(&build_cooccurrence(&walks, a.order), &p, a.order)?;
        text.push_str(&format!("empirical_deviation = {deviation:.6}\n"));
        json["empirical_deviation"] = deviation.into();
    }
    print!("{text}");
    if let Some(path) = &a.json {
        std::fs::write(path, serde_json::to_string_pretty(&json).expect("json renders") + "\n")?;
        RunConfig::new(&["verify"])
            .input(&a.edges)
            .option("order", a.order)
            .option("beta", a.beta)
            .maybe("empirical", a.empirical)
            .option("walk-length", a.walk_length)
            .option("seed", a.seed)
            .option("weighted", a.weighted)
            .option("json", path.display())
            .write_next_to(path)?;
    }
    Ok(())
}

pub fn split(a: SplitArgs) -> Outcome {
    let graph = load_graph(&a.edges, a.weighted)?;
    let split = make_link_split(&graph, &LinkSplitConfig { fraction: a.fraction, seed: a.split_seed })?;
    let mut out = create(&a.out)?;
    split.residual.write_edge_list(&mut out)?;
    out.flush()?;
    let pairs = with_suffix(&a.out, ".pairs.csv");
    let mut w = create(&pairs)?;
    writeln!(w, "u,v,label")?;
    for &(u, v, l) in split.labeled_pairs() {
        writeln!(w, "{},{},{}", graph.nodes().id(u), graph.nodes().id(v), u8::from(l))?;
    }
    w.flush()?;
    println!(
        "removed {} of {} edges (fraction {:.4}); {} negatives",
        split.positives.len(),
        graph.num_edges(),
        split.achieved,
        split.negatives.len()
    );
    RunConfig::new(&["split"])
        .input(&a.edges)
        .option("fraction", a.fraction)
        .option("split-seed", a.split_seed)
        .option("weighted", a.weighted)
        .option("out", a.out.display())
        .write_next_to(&a.out)?;
    Ok(())
}
