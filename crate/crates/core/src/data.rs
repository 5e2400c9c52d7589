//! Datasets on disk, random splits, and stochastic block model generators.
//!
//! A dataset directory holds three UTF-8 text files; lines starting with `#`
//! and blank lines are ignored everywhere:
//!
//! * `edges.txt`: one undirected edge per line, `u v` or `u v weight`, 0-based.
//! * `features.csv`: `n` rows of comma-separated reals. Alternatively
//!   `features.coo`: a header line `n d` followed by `row col value` triples.
//! * `labels.txt`: one class id per line; line order defines node ids.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::EdgeList;

pub const EDGES_FILE: &str = "edges.txt";
pub const FEATURES_FILE: &str = "features.csv";
pub const FEATURES_COO_FILE: &str = "features.coo";
pub const LABELS_FILE: &str = "labels.txt";

/// Node attributes, labels and graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: DenseMatrix,
    pub labels: Vec<usize>,
    /// Canonical edges (see [`EdgeList::canonicalize`]).
    pub edges: EdgeList,
    pub classes: usize,
}

impl Dataset {
    /// Validates and canonicalizes; the class count is `max(label) + 1`.
    pub fn new(name: impl Into<String>, features: DenseMatrix, labels: Vec<usize>, edges: EdgeList) -> Result<Self> {
        let n = labels.len();
        if features.rows() != n {
            return Err(Error::input(format!("{} feature rows for {n} labels", features.rows())));
        }
        if edges.n() != n {
            return Err(Error::input(format!(
                "edge list declares {} nodes, labels {n}",
                edges.n()
            )));
        }
        let classes = labels.iter().max().map_or(0, |&c| c + 1);
        let mut present = vec![false; classes];
        labels.iter().for_each(|&c| present[c] = true);
        if let Some(c) = present.iter().position(|p| !p) {
            return Err(Error::input(format!("class {c} has no nodes")));
        }
        Ok(Dataset {
            name: name.into(),
            features,
            labels,
            edges: edges.canonicalize(),
            classes,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// `(1-based line number, trimmed content)` of every non-comment, non-blank line.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_labels(path: &Path) -> Result<Vec<usize>> {
    let text = read_file(path)?;
    let mut labels = Vec::new();
    let mut lines = Vec::new();
    for (line, l) in content_lines(&text) {
        let c: usize = l
            .parse()
            .map_err(|_| parse_err(path, line, format!("`{l}` is not a class id")))?;
        labels.push(c);
        lines.push(line);
    }
    // Classes must be exactly 0..c; the first gap bounds the valid range.
    let max = labels.iter().max().map_or(0, |&c| c + 1);
    let mut present = vec![false; max];
    labels.iter().for_each(|&c| present[c] = true);
    let classes = present.iter().position(|p| !p).unwrap_or(max);
    if let Some(k) = labels.iter().position(|&c| c >= classes) {
        return Err(parse_err(
            path,
            lines[k],
            format!("label {} out of range: classes present form 0..{classes}", labels[k]),
        ));
    }
    Ok(labels)
}

fn parse_edges(path: &Path, n: usize) -> Result<EdgeList> {
    let text = read_file(path)?;
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    for (line, l) in content_lines(&text) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(path, line, "expected `u v` or `u v weight`"));
        }
        let node = |s: &str| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| parse_err(path, line, format!("`{s}` is not a node id")))?;
            if v >= n {
                return Err(parse_err(path, line, format!("node {v} outside 0..{n}")));
            }
            Ok(v)
        };
        let (u, v) = (node(fields[0])?, node(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => match s.parse::<f64>() {
                Ok(w) if w.is_finite() && w >= 0.0 => w,
                _ => return Err(parse_err(path, line, format!("bad edge weight `{s}`"))),
            },
            None => 1.0,
        };
        pairs.push((u, v));
        weights.push(w);
    }
    Ok(EdgeList::weighted(n, pairs, weights)?.canonicalize())
}

fn parse_value(path: &Path, line: usize, s: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(path, line, format!("`{}` is not a finite number", s.trim()))),
    }
}

fn parse_features_csv(path: &Path, n: usize) -> Result<DenseMatrix> {
    let text = read_file(path)?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, l) in content_lines(&text) {
        let row = l
            .split(',')
            .map(|s| parse_value(path, line, s))
            .collect::<Result<Vec<f64>>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(parse_err(
                    path,
                    line,
                    format!("ragged row: {} values, expected {c}", row.len()),
                ))
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    if rows != n {
        return Err(parse_err(
            path,
            0,
            format!("{rows} feature rows for {n} labelled nodes"),
        ));
    }
    DenseMatrix::new(n, cols.unwrap_or(0), data)
}

fn parse_features_coo(path: &Path, n: usize) -> Result<DenseMatrix> {
    let text = read_file(path)?;
    let mut lines = content_lines(&text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(path, 0, "missing `n d` header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| parse_err(path, hline, "header must be `n d`")))
        .collect::<Result<_>>()?;
    let [rows, d] = dims[..] else {
        return Err(parse_err(path, hline, "header must be `n d`"));
    };
    if rows != n {
        return Err(parse_err(
            path,
            hline,
            format!("header declares {rows} rows for {n} labelled nodes"),
        ));
    }
    let mut m = DenseMatrix::zeros(n, d);
    for (line, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(path, line, "expected `row col value`"));
        }
        let idx = |s: &str, bound: usize| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v < bound => Ok(v),
                _ => Err(parse_err(path, line, format!("index `{s}` outside 0..{bound}"))),
            }
        };
        let (i, j) = (idx(f[0], n)?, idx(f[1], d)?);
        m.set(i, j, parse_value(path, line, f[2])?);
    }
    Ok(m)
}

/// Reads a dataset directory; the directory name becomes the dataset name.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let labels = parse_labels(&dir.join(LABELS_FILE))?;
    let n = labels.len();
    let csv = dir.join(FEATURES_FILE);
    let coo = dir.join(FEATURES_COO_FILE);
    let features = if csv.exists() {
        parse_features_csv(&csv, n)?
    } else if coo.exists() {
        parse_features_coo(&coo, n)?
    } else {
        return Err(Error::io(
            csv,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no features.csv or features.coo"),
        ));
    };
    let edges = parse_edges(&dir.join(EDGES_FILE), n)?;
    let name = dir
        .file_name()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    Dataset::new(name, features, labels, edges)
}

/// Writes the three canonical files, creating `dir` if needed.
pub fn save_dataset(ds: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    use std::fmt::Write as _;
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, body: String| -> Result<()> {
        let p: PathBuf = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(p, e))
    };

    let mut edges = String::new();
    for (&(u, v), &w) in ds.edges.pairs().iter().zip(ds.edges.weights()) {
        if w == 1.0 {
            let _ = writeln!(edges, "{u} {v}");
        } else {
            let _ = writeln!(edges, "{u} {v} {w}");
        }
    }
    write(EDGES_FILE, edges)?;

    // `{}` on f64 prints the shortest string that parses back to the same bits.
    let mut feats = String::new();
    for i in 0..ds.features.rows() {
        let row: Vec<String> = ds.features.row(i).iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(feats, "{}", row.join(","));
    }
    write(FEATURES_FILE, feats)?;

    let labels: String = ds.labels.iter().map(|c| format!("{c}\n")).collect();
    write(LABELS_FILE, labels)
}

/// Disjoint train/validation/test node masks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMasks {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

impl SplitMasks {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.train.len() != n || self.val.len() != n || self.test.len() != n {
            return Err(Error::contract(format!("split masks must have length {n}")));
        }
        for i in 0..n {
            let hits = [self.train[i], self.val[i], self.test[i]]
                .iter()
                .filter(|&&b| b)
                .count();
            if hits > 1 {
                return Err(Error::input(format!("node {i} is in more than one split")));
            }
        }
        if !self.train.iter().any(|&b| b) {
            return Err(Error::input("training split is empty"));
        }
        Ok(())
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        let count = |m: &[bool]| m.iter().filter(|&&b| b).count();
        (count(&self.train), count(&self.val), count(&self.test))
    }
}

/// Seeded random split: `⌊f_train·n⌋` train, `⌊f_val·n⌋` validation, the rest test.
pub fn random_split(n: usize, fractions: (f64, f64, f64), seed: u64) -> Result<SplitMasks> {
    if n < 3 {
        return Err(Error::input(format!("cannot split {n} nodes three ways")));
    }
    let (ft, fv, fe) = fractions;
    if [ft, fv, fe].iter().any(|f| !(0.0..=1.0).contains(f)) || (ft + fv + fe - 1.0).abs() > 1e-9 {
        return Err(Error::input(format!(
            "split fractions {fractions:?} must be in [0,1] and sum to 1"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    // The epsilon absorbs products like 0.6·5 landing a hair under an integer.
    let n_train = ((ft * n as f64) + 1e-9).floor() as usize;
    let n_val = ((fv * n as f64) + 1e-9).floor() as usize;
    let mut masks = SplitMasks {
        train: vec![false; n],
        val: vec![false; n],
        test: vec![false; n],
    };
    for (rank, &node) in order.iter().enumerate() {
        if rank < n_train {
            masks.train[node] = true;
        } else if rank < n_train + n_val {
            masks.val[node] = true;
        } else {
            masks.test[node] = true;
        }
    }
    Ok(masks)
}

/// Node attributes drawn by [`gen_sbm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Standard Gaussian noise plus a class mean of norm `signal` in a random direction.
    Informative { dim: usize, signal: f64 },
    /// Standard Gaussian noise, independent of the class.
    Noise { dim: usize },
}

impl FeatureMode {
    pub fn dim(&self) -> usize {
        match *self {
            FeatureMode::Informative { dim, .. } | FeatureMode::Noise { dim } => dim,
        }
    }
}

/// Stochastic block model with one class per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub features: FeatureMode,
    pub seed: u64,
}

impl SbmSpec {
    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(Error::input("SBM needs at least one nonempty block"));
        }
        for p in [self.p_in, self.p_out] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::input(format!("SBM probability {p} outside [0, 1]")));
            }
        }
        if let FeatureMode::Informative { signal, .. } = self.features {
            if !signal.is_finite() || signal < 0.0 {
                return Err(Error::input("SBM signal strength must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

/// `blocks=4x100;p_in=0.01;p_out=0.08;noise=8;seed=0`, or `informative=8:2.5`
/// in place of `noise=8`. Blocks may also be listed as `100+120+80`.
impl FromStr for SbmSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::input(format!("SBM spec `{s}`: {msg}"));
        let num = |k: &str, v: &str| -> Result<f64> {
            v.parse().map_err(|_| bad(format!("`{k}` needs a number, got `{v}`")))
        };
        let int = |k: &str, v: &str| -> Result<usize> {
            v.parse().map_err(|_| bad(format!("`{k}` needs an integer, got `{v}`")))
        };
        let mut blocks = None;
        let (mut p_in, mut p_out, mut features, mut seed) = (None, None, None, 0u64);
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("`{part}` is not key=value")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "blocks" => {
                    blocks = Some(if let Some((count, size)) = v.split_once('x') {
                        vec![int(k, size)?; int(k, count)?]
                    } else {
                        v.split('+').map(|b| int(k, b)).collect::<Result<_>>()?
                    })
                }
                "p_in" => p_in = Some(num(k, v)?),
                "p_out" => p_out = Some(num(k, v)?),
                "noise" => features = Some(FeatureMode::Noise { dim: int(k, v)? }),
                "informative" => {
                    let (dim, signal) = v
                        .split_once(':')
                        .ok_or_else(|| bad("`informative` takes dim:signal".into()))?;
                    features = Some(FeatureMode::Informative {
                        dim: int(k, dim)?,
                        signal: num(k, signal)?,
                    });
                }
                "seed" => seed = int(k, v)? as u64,
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let spec = SbmSpec {
            block_sizes: blocks.ok_or_else(|| bad("missing `blocks`".into()))?,
            p_in: p_in.ok_or_else(|| bad("missing `p_in`".into()))?,
            p_out: p_out.ok_or_else(|| bad("missing `p_out`".into()))?,
            features: features.ok_or_else(|| bad("missing `noise` or `informative`".into()))?,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SbmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self.block_sizes.iter().map(usize::to_string).collect();
        write!(
            f,
            "blocks={};p_in={};p_out={};",
            blocks.join("+"),
            self.p_in,
            self.p_out
        )?;
        match self.features {
            FeatureMode::Noise { dim } => write!(f, "noise={dim}")?,
            FeatureMode::Informative { dim, signal } => write!(f, "informative={dim}:{signal}")?,
        }
        write!(f, ";seed={}", self.seed)
    }
}

/// Samples an SBM dataset: edges over all unordered pairs in lexicographic
/// order, then class means (informative mode), then node features row by row.
pub fn gen_sbm(spec: &SbmSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n();
    let labels: Vec<usize> = spec
        .block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { spec.p_in } else { spec.p_out };
            if rng.random::<f64>() < p {
                pairs.push((i, j));
            }
        }
    }

    let dim = spec.features.dim();
    let means: Vec<Vec<f64>> = match spec.features {
        FeatureMode::Noise { .. } => vec![vec![0.0; dim]; spec.block_sizes.len()],
        FeatureMode::Informative { signal, .. } => (0..spec.block_sizes.len())
            .map(|_| {
                let dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                dir.into_iter().map(|v| v / norm * signal).collect()
            })
            .collect(),
    };
    let features = DenseMatrix::from_fn(n, dim, |i, j| {
        let noise: f64 = StandardNormal.sample(&mut rng);
        means[labels[i]][j] + noise
    });
    Dataset::new("sbm", features, labels, EdgeList::new(n, pairs)?)
}
