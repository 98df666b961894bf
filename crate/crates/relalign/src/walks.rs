//! Random-walk corpus generation and (center, context) pair extraction.
//!
//! Walks start at every non-isolated object and step to a uniformly random
//! neighbor until the maximum length. With symmetric adjacency a walk can
//! always step back the way it came, so walks never stop early; isolated
//! objects are skipped and counted.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::RelationalDataset;
use crate::{mix_seed, stream};

const CORPUS_MAGIC: &[u8; 4] = b"RAWC";
const CORPUS_VERSION: u32 = 1;

/// Walk generation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct WalkConfig {
    /// Walks started from each object.
    pub walks_per_object: usize,
    /// Maximum objects per walk.
    pub walk_length: usize,
    /// Context radius in walk positions.
    pub window: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_object: 10,
            walk_length: 80,
            window: 10,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_object < 1 {
            return Err(Error::Config("walks_per_object must be >= 1".into()));
        }
        if self.walk_length < 2 {
            return Err(Error::Config("walk_length must be >= 2".into()));
        }
        if self.window < 1 || self.window >= self.walk_length {
            return Err(Error::Config("window must satisfy 1 <= window < walk_length".into()));
        }
        Ok(())
    }
}

/// Sequences of object indices produced by random walks over one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCorpus {
    pub dataset_id: u32,
    pub config: WalkConfig,
    pub walks: Vec<Vec<u32>>,
}

impl WalkCorpus {
    pub fn total_tokens(&self) -> usize {
        self.walks.iter().map(|w| w.len()).sum()
    }

    /// Occurrence count of each object index across all walks.
    pub fn occurrence_counts(&self, num_objects: usize) -> Vec<u64> {
        let mut counts = vec![0u64; num_objects];
        for walk in &self.walks {
            for &v in walk {
                counts[v as usize] += 1;
            }
        }
        counts
    }
}

/// Generates the walk corpus in canonical order (start object index, then
/// repetition). Each start object owns an RNG stream derived from
/// (seed, object), so parallel and serial runs agree.
pub fn generate_walks(ds: &RelationalDataset, cfg: &WalkConfig) -> Result<WalkCorpus> {
    generate_walks_keyed(ds, cfg, None)
}

/// As [`generate_walks`], but per-object RNG streams and neighbor choice order
/// follow the given stable keys instead of raw indices. With `keys[n] = n`
/// this is exactly `generate_walks`; relabeling tests pass permuted keys so
/// corpora map onto each other object-for-object.
pub fn generate_walks_keyed(
    ds: &RelationalDataset,
    cfg: &WalkConfig,
    keys: Option<&[u64]>,
) -> Result<WalkCorpus> {
    cfg.validate()?;
    if let Some(keys) = keys {
        if keys.len() != ds.num_objects() {
            return Err(Error::ShapeMismatch(format!(
                "{} stream keys for {} objects",
                keys.len(),
                ds.num_objects()
            )));
        }
    }
    let key_of = |n: usize| keys.map_or(n as u64, |k| k[n]);

    // Neighbor choice must be stable under the keys: pick by rank in
    // key-sorted order. Default keys leave adjacency untouched.
    let reordered: Option<Vec<Vec<u32>>> = keys.map(|k| {
        (0..ds.num_objects())
            .map(|n| {
                let mut order: Vec<u32> = ds.neighbors(n).to_vec();
                order.sort_by_key(|&m| k[m as usize]);
                order
            })
            .collect()
    });
    let neighbors = |n: usize| -> &[u32] {
        match &reordered {
            Some(lists) => &lists[n],
            None => ds.neighbors(n),
        }
    };

    let starts: Vec<usize> = (0..ds.num_objects()).filter(|&n| !ds.is_isolated(n)).collect();
    if starts.len() < ds.num_objects() {
        log::info!(
            "dataset {}: skipping {} isolated objects in walk generation",
            ds.dataset_id(),
            ds.num_objects() - starts.len()
        );
    }

    let walks: Vec<Vec<u32>> = starts
        .par_iter()
        .flat_map_iter(|&start| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[stream::WALK, cfg.seed, key_of(start)]));
            (0..cfg.walks_per_object)
                .map(|_| {
                    let mut walk = Vec::with_capacity(cfg.walk_length);
                    walk.push(start as u32);
                    let mut current = start;
                    for _ in 1..cfg.walk_length {
                        let list = neighbors(current);
                        let next = list[rng.random_range(0..list.len())];
                        walk.push(next);
                        current = next as usize;
                    }
                    walk
                })
                .collect::<Vec<_>>()
        })
        .collect();

    Ok(WalkCorpus {
        dataset_id: ds.dataset_id(),
        config: *cfg,
        walks,
    })
}

/// Emits every (center, context) pair within `window` positions, in corpus
/// order. Prefer [`for_each_pair`] when the pair stream is large.
pub fn extract_pairs(corpus: &WalkCorpus, window: usize) -> Vec<(u32, u32)> {
    let mut pairs = Vec::new();
    for_each_pair(corpus, window, |c, x| pairs.push((c, x)));
    pairs
}

/// Streams (center, context) pairs without materializing them.
pub fn for_each_pair<F: FnMut(u32, u32)>(corpus: &WalkCorpus, window: usize, mut f: F) {
    for walk in &corpus.walks {
        for_each_pair_in_walk(walk, window, &mut f);
    }
}

pub(crate) fn for_each_pair_in_walk<F: FnMut(u32, u32)>(walk: &[u32], window: usize, f: &mut F) {
    let len = walk.len();
    for t in 0..len {
        let lo = t.saturating_sub(window);
        let hi = (t + window).min(len.saturating_sub(1));
        for j in lo..=hi {
            if j != t {
                f(walk[t], walk[j]);
            }
        }
    }
}

/// Writes the binary corpus cache: header (magic, version, dataset_id,
/// config), then length-prefixed index sequences.
pub fn save_corpus(corpus: &WalkCorpus, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CORPUS_MAGIC)?;
    w.write_u32::<LittleEndian>(CORPUS_VERSION)?;
    w.write_u32::<LittleEndian>(corpus.dataset_id)?;
    w.write_u64::<LittleEndian>(corpus.config.walks_per_object as u64)?;
    w.write_u64::<LittleEndian>(corpus.config.walk_length as u64)?;
    w.write_u64::<LittleEndian>(corpus.config.window as u64)?;
    w.write_u64::<LittleEndian>(corpus.config.seed)?;
    w.write_u64::<LittleEndian>(corpus.walks.len() as u64)?;
    for walk in &corpus.walks {
        w.write_u32::<LittleEndian>(walk.len() as u32)?;
        for &v in walk {
            w.write_u32::<LittleEndian>(v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_corpus(path: &Path) -> Result<WalkCorpus> {
    let bad = |message: &str| Error::Format {
        path: path.display().to_string(),
        message: message.to_string(),
    };
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CORPUS_MAGIC {
        return Err(bad("not a walk corpus file"));
    }
    if r.read_u32::<LittleEndian>()? != CORPUS_VERSION {
        return Err(bad("unsupported corpus version"));
    }
    let dataset_id = r.read_u32::<LittleEndian>()?;
    let config = WalkConfig {
        walks_per_object: r.read_u64::<LittleEndian>()? as usize,
        walk_length: r.read_u64::<LittleEndian>()? as usize,
        window: r.read_u64::<LittleEndian>()? as usize,
        seed: r.read_u64::<LittleEndian>()?,
    };
    let n_walks = r.read_u64::<LittleEndian>()? as usize;
    let mut walks = Vec::with_capacity(n_walks);
    for _ in 0..n_walks {
        let len = r.read_u32::<LittleEndian>()? as usize;
        let mut walk = Vec::with_capacity(len);
        for _ in 0..len {
            walk.push(r.read_u32::<LittleEndian>()?);
        }
        walks.push(walk);
    }
    Ok(WalkCorpus {
        dataset_id,
        config,
        walks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;
    use std::collections::VecDeque;
    use std::io::Cursor;

    fn graph(text: &str) -> RelationalDataset {
        parse_edge_list(Cursor::new(text), "<test>", 1).unwrap().0
    }

    #[test]
    fn degenerate_path_forces_walk() {
        let ds = graph("a b\n");
        let cfg = WalkConfig {
            walks_per_object: 1,
            walk_length: 4,
            window: 1,
            seed: 0,
        };
        let corpus = generate_walks(&ds, &cfg).unwrap();
        let a = ds.index_of("a").unwrap() as u32;
        let b = ds.index_of("b").unwrap() as u32;
        assert_eq!(corpus.walks, vec![vec![a, b, a, b], vec![b, a, b, a]]);
    }

    #[test]
    fn triangle_steps_are_uniform() {
        // next-step frequency check against the uniform law on K_3
        let ds = graph("a b\nb c\nc a\n");
        let cfg = WalkConfig {
            walks_per_object: 1,
            walk_length: 30_000,
            window: 1,
            seed: 11,
        };
        let corpus = generate_walks(&ds, &cfg).unwrap();
        let mut transitions = vec![[0u64; 3]; 3];
        for walk in &corpus.walks {
            for pair in walk.windows(2) {
                transitions[pair[0] as usize][pair[1] as usize] += 1;
            }
        }
        for (from, row) in transitions.iter().enumerate() {
            let total: u64 = row.iter().sum();
            for (to, &count) in row.iter().enumerate() {
                if to == from {
                    assert_eq!(count, 0);
                } else {
                    let freq = count as f64 / total as f64;
                    assert!(
                        (freq - 0.5).abs() < 0.02,
                        "transition {from}->{to} frequency {freq}"
                    );
                }
            }
        }
    }

    #[test]
    fn walk_counts_and_validity() {
        let ds = graph("x\na b\nb c\nc a\nc d\n");
        let cfg = WalkConfig {
            walks_per_object: 3,
            walk_length: 10,
            window: 2,
            seed: 5,
        };
        let corpus = generate_walks(&ds, &cfg).unwrap();
        let non_isolated = ds.num_objects() - ds.isolated_count();
        assert_eq!(corpus.walks.len(), cfg.walks_per_object * non_isolated);
        for walk in &corpus.walks {
            assert_eq!(walk.len(), cfg.walk_length);
            for pair in walk.windows(2) {
                assert!(ds.neighbors(pair[0] as usize).contains(&pair[1]));
            }
        }
    }

    #[test]
    fn same_seed_identical_corpus() {
        let ds = graph("a b\nb c\nc a\nc d\nd e\n");
        let cfg = WalkConfig {
            walks_per_object: 4,
            walk_length: 12,
            window: 3,
            seed: 99,
        };
        assert_eq!(generate_walks(&ds, &cfg).unwrap(), generate_walks(&ds, &cfg).unwrap());
        let other = WalkConfig { seed: 100, ..cfg };
        assert_ne!(generate_walks(&ds, &cfg).unwrap(), generate_walks(&ds, &other).unwrap());
    }

    #[test]
    fn pair_enumeration_small_windows() {
        let corpus = WalkCorpus {
            dataset_id: 1,
            config: WalkConfig::default(),
            walks: vec![vec![0, 1, 2]],
        };
        assert_eq!(
            extract_pairs(&corpus, 1),
            vec![(0, 1), (1, 0), (1, 2), (2, 1)]
        );
        assert_eq!(
            extract_pairs(&corpus, 2),
            vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]
        );
    }

    #[test]
    fn pair_count_closed_form() {
        // interior centers emit 2w pairs; clipped ends fewer. Check the exact
        // count sum_t [min(L-1, t+w) - max(0, t-w)] on synthetic walks.
        for (len, window) in [(10usize, 3usize), (5, 4), (80, 10), (2, 1)] {
            let walk: Vec<u32> = (0..len as u32).collect();
            let corpus = WalkCorpus {
                dataset_id: 1,
                config: WalkConfig::default(),
                walks: vec![walk],
            };
            let expected: usize = (0..len)
                .map(|t| (t + window).min(len - 1) - t.saturating_sub(window))
                .sum();
            assert_eq!(extract_pairs(&corpus, window).len(), expected);
            if len > 2 * window {
                // interior position emits exactly 2w
                let t = window;
                let count = (t + window).min(len - 1) - t.saturating_sub(window);
                assert_eq!(count, 2 * window);
            }
        }
    }

    #[test]
    fn pairs_are_within_window_hops() {
        let ds = graph("a b\nb c\nc d\nd e\ne a\nb d\n");
        let cfg = WalkConfig {
            walks_per_object: 2,
            walk_length: 20,
            window: 3,
            seed: 3,
        };
        let corpus = generate_walks(&ds, &cfg).unwrap();
        let dist = |from: u32, to: u32| -> usize {
            let mut seen = vec![usize::MAX; ds.num_objects()];
            let mut queue = VecDeque::new();
            seen[from as usize] = 0;
            queue.push_back(from as usize);
            while let Some(v) = queue.pop_front() {
                if v == to as usize {
                    return seen[v];
                }
                for &m in ds.neighbors(v) {
                    if seen[m as usize] == usize::MAX {
                        seen[m as usize] = seen[v] + 1;
                        queue.push_back(m as usize);
                    }
                }
            }
            usize::MAX
        };
        for (c, x) in extract_pairs(&corpus, cfg.window) {
            assert!(dist(c, x) <= cfg.window);
        }
    }

    #[test]
    fn config_validation() {
        let ds = graph("a b\n");
        for bad in [
            WalkConfig { walks_per_object: 0, ..WalkConfig::default() },
            WalkConfig { walk_length: 1, ..WalkConfig::default() },
            WalkConfig { window: 0, ..WalkConfig::default() },
            WalkConfig { walk_length: 5, window: 5, ..WalkConfig::default() },
        ] {
            assert!(generate_walks(&ds, &bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn corpus_cache_round_trip() {
        let ds = graph("a b\nb c\nc a\n");
        let cfg = WalkConfig {
            walks_per_object: 2,
            walk_length: 6,
            window: 2,
            seed: 8,
        };
        let corpus = generate_walks(&ds, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.walks");
        save_corpus(&corpus, &path).unwrap();
        assert_eq!(load_corpus(&path).unwrap(), corpus);
    }

    #[test]
    fn keyed_streams_follow_relabeling() {
        // same structure, inserted in different order; keys map each object in
        // the permuted dataset back to its original stream
        let original = graph("a b\nb c\nc d\nd a\na c\n");
        let permuted = graph("d a\nc d\na c\nb c\na b\n");
        let cfg = WalkConfig {
            walks_per_object: 2,
            walk_length: 15,
            window: 2,
            seed: 21,
        };
        let keys: Vec<u64> = (0..permuted.num_objects())
            .map(|n| original.index_of(permuted.label(n)).unwrap() as u64)
            .collect();
        let base = generate_walks(&original, &cfg).unwrap();
        let moved = generate_walks_keyed(&permuted, &cfg, Some(&keys)).unwrap();

        // canonical order differs (start index order), so compare per start label
        let by_start = |corpus: &WalkCorpus, ds: &RelationalDataset| {
            let mut m: std::collections::HashMap<String, Vec<Vec<String>>> = Default::default();
            for walk in &corpus.walks {
                let labels: Vec<String> =
                    walk.iter().map(|&v| ds.label(v as usize).to_string()).collect();
                m.entry(labels[0].clone()).or_default().push(labels);
            }
            m
        };
        assert_eq!(by_start(&base, &original), by_start(&moved, &permuted));
    }
}
