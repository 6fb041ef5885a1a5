//! Reading inputs from disk or from generator specs.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use patternq_core::lattice::builtin_example;
use patternq_core::{HillMap, Lattice, Partition, WeightedGraph};

use crate::error::{AtStage, CliError, Stage};
use crate::json::{GraphFile, ModelFile, PartitionFile, PermsFile};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(Stage::Load, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new(Stage::Load, format!("{}: {e}", path.display())))
}

/// A graph together with a description of where it came from.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: WeightedGraph,
    /// `gen:<spec>` or `file:<path>`.
    pub source: String,
    /// Set when the graph came from a generator.
    pub lattice: Option<Lattice>,
}

pub fn generated(spec: &str) -> Result<LoadedGraph, CliError> {
    let lattice = Lattice::parse(spec).at(Stage::Load)?;
    let graph = lattice.generate().at(Stage::Load)?;
    Ok(LoadedGraph {
        graph,
        source: format!("gen:{lattice}"),
        lattice: Some(lattice),
    })
}

pub fn graph_file(path: &Path) -> Result<LoadedGraph, CliError> {
    let f: GraphFile = read_json(path)?;
    let graph = f
        .to_graph()
        .map_err(|e| CliError::new(Stage::Load, format!("{}: {e}", path.display())))?;
    Ok(LoadedGraph {
        graph,
        source: format!("file:{}", path.display()),
        lattice: None,
    })
}

/// Exactly one of `file` and `spec` must be given.
pub fn graph(file: Option<&Path>, spec: Option<&str>) -> Result<LoadedGraph, CliError> {
    match (file, spec) {
        (Some(p), None) => graph_file(p),
        (None, Some(s)) => generated(s),
        _ => Err(CliError::new(
            Stage::Load,
            "give exactly one of --graph and --gen",
        )),
    }
}

/// A built-in example graph and partition.
pub fn example(name: &str) -> Result<(LoadedGraph, Partition), CliError> {
    let ex = builtin_example(name)
        .ok_or_else(|| CliError::new(Stage::Load, format!("unknown example `{name}`")))?;
    let (graph, pi) = ex.build();
    Ok((
        LoadedGraph {
            graph,
            source: format!("example:{name}"),
            lattice: Some(ex.lattice),
        },
        pi,
    ))
}

pub fn partition(path: &Path, n: usize) -> Result<Partition, CliError> {
    let f: PartitionFile = read_json(path)?;
    Partition::new(n, f.classes)
        .map_err(|e| CliError::new(Stage::Load, format!("{}: {e}", path.display())))
}

pub fn perms(path: &Path) -> Result<Vec<Vec<usize>>, CliError> {
    let f: PermsFile = read_json(path)?;
    Ok(f.perms)
}

pub fn model(path: &Path) -> Result<HillMap, CliError> {
    let f: ModelFile = read_json(path)?;
    f.to_model()
        .map_err(|e| CliError::new(Stage::Load, format!("{}: {e}", path.display())))
}

/// An initial state: a JSON array of numbers.
pub fn state(path: &Path, n: usize) -> Result<Vec<f64>, CliError> {
    let x: Vec<f64> = read_json(path)?;
    if x.len() != n {
        return Err(CliError::new(
            Stage::Load,
            format!("{}: {} entries, graph has {n} cells", path.display(), x.len()),
        ));
    }
    Ok(x)
}
