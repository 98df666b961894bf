//! Relational datasets: loading, validation, and adjacency access.
//!
//! A dataset is an immutable undirected graph over labeled objects. Relations
//! are unweighted; weighted input columns are ignored with a warning counter.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mix_seed;

/// Immutable adjacency structure over one dataset's objects and relations.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationalDataset {
    dataset_id: u32,
    labels: Vec<String>,
    label_index: HashMap<String, u32>,
    kinds: Option<Vec<String>>,
    adjacency: Vec<Vec<u32>>,
    edge_count: u64,
}

/// Counters for input anomalies tolerated during ingest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub self_loops_dropped: u64,
    pub duplicates_collapsed: u64,
    pub weight_columns_ignored: u64,
}

/// Options for [`load_edge_list`].
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub dataset_id: u32,
    /// Optional sidecar of `label<TAB>kind` lines. Every object in the edge
    /// list must be covered.
    pub kinds_path: Option<std::path::PathBuf>,
}

impl RelationalDataset {
    /// Builds a dataset from labeled undirected edges, interning labels in
    /// first-seen order. Self-loops are dropped and duplicates collapsed.
    ///
    /// `declared` lists labels that must exist even without edges (isolated
    /// objects survive serialization through this).
    pub fn from_edges<I, S>(dataset_id: u32, declared: &[S], edges: I) -> (Self, IngestReport)
    where
        I: IntoIterator<Item = (String, String)>,
        S: AsRef<str>,
    {
        let mut labels: Vec<String> = Vec::new();
        let mut label_index: HashMap<String, u32> = HashMap::new();
        let mut adjacency: Vec<Vec<u32>> = Vec::new();
        let mut report = IngestReport::default();

        let mut intern = |label: &str,
                          labels: &mut Vec<String>,
                          index: &mut HashMap<String, u32>,
                          adj: &mut Vec<Vec<u32>>| {
            if let Some(&i) = index.get(label) {
                i
            } else {
                let i = labels.len() as u32;
                labels.push(label.to_string());
                index.insert(label.to_string(), i);
                adj.push(Vec::new());
                i
            }
        };

        for d in declared {
            intern(d.as_ref(), &mut labels, &mut label_index, &mut adjacency);
        }
        for (a, b) in edges {
            let ia = intern(&a, &mut labels, &mut label_index, &mut adjacency);
            let ib = intern(&b, &mut labels, &mut label_index, &mut adjacency);
            if ia == ib {
                report.self_loops_dropped += 1;
                continue;
            }
            adjacency[ia as usize].push(ib);
            adjacency[ib as usize].push(ia);
        }

        let mut removed = 0u64;
        for list in &mut adjacency {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            removed += (before - list.len()) as u64;
        }
        report.duplicates_collapsed = removed / 2;
        let edge_count = adjacency.iter().map(|l| l.len() as u64).sum::<u64>() / 2;

        (
            RelationalDataset {
                dataset_id,
                labels,
                label_index,
                kinds: None,
                adjacency,
                edge_count,
            },
            report,
        )
    }

    pub fn dataset_id(&self) -> u32 {
        self.dataset_id
    }

    pub fn with_dataset_id(mut self, id: u32) -> Self {
        self.dataset_id = id;
        self
    }

    /// Number of objects N.
    pub fn num_objects(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Count of undirected relations |E|.
    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn label(&self, n: usize) -> &str {
        &self.labels[n]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).map(|&i| i as usize)
    }

    /// Sorted neighbor indices of object `n`.
    pub fn neighbors(&self, n: usize) -> &[u32] {
        &self.adjacency[n]
    }

    /// Number of relations incident to object `n`.
    pub fn degree(&self, n: usize) -> Result<usize> {
        self.adjacency
            .get(n)
            .map(|l| l.len())
            .ok_or(Error::IndexOutOfRange {
                index: n,
                len: self.num_objects(),
            })
    }

    pub fn is_isolated(&self, n: usize) -> bool {
        self.adjacency[n].is_empty()
    }

    pub fn isolated_count(&self) -> usize {
        self.adjacency.iter().filter(|l| l.is_empty()).count()
    }

    pub fn kinds(&self) -> Option<&[String]> {
        self.kinds.as_deref()
    }

    pub fn kind_of(&self, n: usize) -> Option<&str> {
        self.kinds.as_ref().map(|k| k[n].as_str())
    }

    /// Attaches per-object kind tags. `map` must cover every object label.
    pub fn with_kinds(mut self, map: &HashMap<String, String>) -> Result<Self> {
        let mut kinds = Vec::with_capacity(self.labels.len());
        for label in &self.labels {
            match map.get(label) {
                Some(k) => kinds.push(k.clone()),
                None => {
                    return Err(Error::Invalid(format!(
                        "kinds sidecar missing label {label:?}"
                    )))
                }
            }
        }
        self.kinds = Some(kinds);
        Ok(self)
    }

    /// Histogram of kind tag -> object count, sorted by tag.
    pub fn kind_histogram(&self) -> Vec<(String, usize)> {
        let mut hist: HashMap<&str, usize> = HashMap::new();
        if let Some(kinds) = &self.kinds {
            for k in kinds {
                *hist.entry(k).or_insert(0) += 1;
            }
        }
        let mut out: Vec<(String, usize)> =
            hist.into_iter().map(|(k, c)| (k.to_string(), c)).collect();
        out.sort();
        out
    }

    /// Checks every structural invariant; used by loaders and tests.
    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.adjacency.len() {
            return Err(Error::Invalid("labels/adjacency length mismatch".into()));
        }
        if self.label_index.len() != self.labels.len() {
            return Err(Error::Invalid("duplicate object labels".into()));
        }
        if let Some(kinds) = &self.kinds {
            if kinds.len() != self.labels.len() {
                return Err(Error::Invalid("kinds length mismatch".into()));
            }
        }
        let mut total = 0u64;
        for (n, list) in self.adjacency.iter().enumerate() {
            total += list.len() as u64;
            let mut prev: Option<u32> = None;
            for &m in list {
                if m as usize == n {
                    return Err(Error::Invalid(format!("self-loop at object {n}")));
                }
                if m as usize >= self.labels.len() {
                    return Err(Error::Invalid(format!("neighbor {m} out of range")));
                }
                if prev == Some(m) {
                    return Err(Error::Invalid(format!("duplicate neighbor {m} of {n}")));
                }
                if let Some(p) = prev {
                    if p > m {
                        return Err(Error::Invalid(format!("adjacency of {n} not sorted")));
                    }
                }
                if self.adjacency[m as usize].binary_search(&(n as u32)).is_err() {
                    return Err(Error::Invalid(format!("asymmetric edge {n}-{m}")));
                }
                prev = Some(m);
            }
        }
        if total != 2 * self.edge_count {
            return Err(Error::Invalid("edge_count mismatch".into()));
        }
        Ok(())
    }

    /// Writes the dataset as an edge-list file (plus optional kinds sidecar).
    ///
    /// Every object is declared with a single-label line first so isolated
    /// objects and the index order survive a round-trip through
    /// [`load_edge_list`].
    pub fn save(&self, edges_path: &Path, kinds_path: Option<&Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(edges_path)?);
        writeln!(w, "# relalign dataset {} objects {} edges", self.labels.len(), self.edge_count)?;
        for label in &self.labels {
            writeln!(w, "{label}")?;
        }
        for (n, list) in self.adjacency.iter().enumerate() {
            for &m in list {
                if (m as usize) > n {
                    writeln!(w, "{} {}", self.labels[n], self.labels[m as usize])?;
                }
            }
        }
        w.flush()?;
        if let Some(path) = kinds_path {
            let kinds = self.kinds.as_ref().ok_or(Error::MissingKinds)?;
            let mut w = BufWriter::new(File::create(path)?);
            for (label, kind) in self.labels.iter().zip(kinds) {
                writeln!(w, "{label}\t{kind}")?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

/// Parses an edge list from a reader. Lines: `a b` is an edge, a single label
/// declares an object, `#` starts a comment. A third column (e.g. a weight) is
/// ignored and counted in the report.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    source: &str,
    dataset_id: u32,
) -> Result<(RelationalDataset, IngestReport)> {
    let mut declared: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut weight_columns = 0u64;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let a = fields.next().expect("non-empty line has a field");
        match fields.next() {
            None => declared.push(a.to_string()),
            Some(b) => {
                if fields.next().is_some() {
                    weight_columns += 1;
                }
                edges.push((a.to_string(), b.to_string()));
            }
        }
        if line.split_whitespace().count() > 3 {
            return Err(Error::Parse {
                path: source.to_string(),
                line: lineno + 1,
                message: "too many columns (expected 'label label [weight]')".into(),
            });
        }
    }

    if edges.is_empty() && declared.is_empty() {
        return Err(Error::EmptyEdgeSet(source.to_string()));
    }
    let (ds, mut report) = RelationalDataset::from_edges(dataset_id, &declared, edges);
    report.weight_columns_ignored = weight_columns;
    if report.weight_columns_ignored > 0 {
        log::warn!(
            "{source}: ignored weight column on {} lines (relations are unweighted)",
            report.weight_columns_ignored
        );
    }
    if report.self_loops_dropped > 0 {
        log::warn!("{source}: dropped {} self-loops", report.self_loops_dropped);
    }
    Ok((ds, report))
}

/// Loads an edge-list file, applying the kinds sidecar when configured.
pub fn load_edge_list(path: &Path, options: &IngestOptions) -> Result<(RelationalDataset, IngestReport)> {
    let file = File::open(path).map_err(|e| Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let (mut ds, report) = parse_edge_list(
        BufReader::new(file),
        &path.display().to_string(),
        options.dataset_id,
    )?;
    if ds.edge_count == 0 {
        return Err(Error::EmptyEdgeSet(path.display().to_string()));
    }
    if let Some(kinds_path) = &options.kinds_path {
        let map = load_kinds_sidecar(kinds_path)?;
        ds = ds.with_kinds(&map)?;
    }
    Ok((ds, report))
}

/// Reads a `label<TAB>kind` sidecar file.
pub fn load_kinds_sidecar(path: &Path) -> Result<HashMap<String, String>> {
    let file = File::open(path)?;
    let mut map = HashMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, kind) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            message: "expected 'label<TAB>kind'".into(),
        })?;
        map.insert(label.trim().to_string(), kind.trim().to_string());
    }
    Ok(map)
}

/// Loads the Movielens `u.data` rating format (user, item, rating, timestamp;
/// tab-separated). Any rating yields one user-item edge. Labels get `u:` / `i:`
/// prefixes and objects are tagged with kinds "user" / "item".
pub fn load_movielens_ratings(path: &Path, dataset_id: u32) -> Result<(RelationalDataset, IngestReport)> {
    let file = File::open(path)?;
    let mut edges: Vec<(String, String)> = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (user, item) = match (fields.next(), fields.next()) {
            (Some(u), Some(i)) => (u, i),
            _ => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    message: "expected 'user item rating timestamp'".into(),
                })
            }
        };
        edges.push((format!("u:{user}"), format!("i:{item}")));
    }
    if edges.is_empty() {
        return Err(Error::EmptyEdgeSet(path.display().to_string()));
    }
    let (ds, report) = RelationalDataset::from_edges(dataset_id, &[] as &[&str], edges);
    let map: HashMap<String, String> = ds
        .labels
        .iter()
        .map(|l| {
            let kind = if l.starts_with("u:") { "user" } else { "item" };
            (l.clone(), kind.to_string())
        })
        .collect();
    let ds = ds.with_kinds(&map)?;
    Ok((ds, report))
}

/// Partitions the objects of `kind` uniformly at random into two halves of
/// sizes ceil(x/2) and floor(x/2). Objects of other kinds appear in both
/// outputs; each output keeps only edges between its retained objects.
pub fn split_dataset(
    ds: &RelationalDataset,
    kind: &str,
    seed: u64,
) -> Result<(RelationalDataset, RelationalDataset)> {
    let kinds = ds.kinds.as_ref().ok_or(Error::MissingKinds)?;
    let targets: Vec<usize> = (0..ds.num_objects()).filter(|&n| kinds[n] == kind).collect();
    if targets.is_empty() {
        return Err(Error::KindNotFound(kind.to_string()));
    }
    if targets.len() < 2 {
        return Err(Error::Invalid(format!(
            "need at least 2 objects of kind {kind:?} to split, found {}",
            targets.len()
        )));
    }

    let mut shuffled = targets.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[crate::stream::SPLIT, seed]));
    shuffled.shuffle(&mut rng);
    let first_size = targets.len().div_ceil(2);
    let mut in_first = vec![false; ds.num_objects()];
    for &n in &shuffled[..first_size] {
        in_first[n] = true;
    }

    let build = |keep: &dyn Fn(usize) -> bool, id: u32| -> RelationalDataset {
        let retained: Vec<usize> = (0..ds.num_objects()).filter(|&n| keep(n)).collect();
        let declared: Vec<&str> = retained.iter().map(|&n| ds.labels[n].as_str()).collect();
        let mut edges = Vec::new();
        for &n in &retained {
            for &m in &ds.adjacency[n] {
                let m = m as usize;
                if m > n && keep(m) {
                    edges.push((ds.labels[n].clone(), ds.labels[m].clone()));
                }
            }
        }
        let (built, _) = RelationalDataset::from_edges(id, &declared, edges);
        let map: HashMap<String, String> = retained
            .iter()
            .map(|&n| (ds.labels[n].clone(), kinds[n].clone()))
            .collect();
        built.with_kinds(&map).expect("retained labels covered")
    };

    let a = build(&|n| kinds[n] != kind || in_first[n], 1);
    let b = build(&|n| kinds[n] != kind || !in_first[n], 2);
    Ok((a, b))
}
