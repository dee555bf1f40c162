//! Label matrices, CSV ingestion, ground-truth voting and synthetic data.
//!
//! Label CSVs follow the CheXpert convention: a header row, one column per
//! label named exactly as the hierarchy id, and cells `1.0` (positive),
//! `0.0` (negative), `-1.0` (uncertain) or empty (not annotated). Any other
//! column is kept verbatim as row metadata.
//!
//! Feature CSVs carry an `id` column followed by `f0 .. f{F-1}`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hierarchy::LabelTree;
use crate::policy::LossMask;
use crate::rng::{self, stream};

/// One annotation cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Pos,
    Neg,
    Unc,
    Missing,
}

impl Label {
    /// Parses a CSV cell. Integer spellings (`1`, `0`, `-1`) are accepted
    /// alongside the canonical `1.0`, `0.0`, `-1.0`.
    pub fn parse(cell: &str) -> Result<Label> {
        let cell = cell.trim();
        if cell.is_empty() {
            return Ok(Label::Missing);
        }
        match cell.parse::<f64>() {
            Ok(1.0) => Ok(Label::Pos),
            Ok(0.0) => Ok(Label::Neg),
            Ok(-1.0) => Ok(Label::Unc),
            _ => Err(Error::Data(format!("unparsable label `{cell}`"))),
        }
    }

    pub fn as_cell(self) -> &'static str {
        match self {
            Label::Pos => "1.0",
            Label::Neg => "0.0",
            Label::Unc => "-1.0",
            Label::Missing => "",
        }
    }

    pub fn from_bool(positive: bool) -> Label {
        if positive {
            Label::Pos
        } else {
            Label::Neg
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::Pos => "POS",
            Label::Neg => "NEG",
            Label::Unc => "UNC",
            Label::Missing => "MISSING",
        };
        f.write_str(s)
    }
}

/// `N x K` annotations, columns in hierarchy index order.
pub type LabelMatrix = Grid<Label>;

/// Non-label CSV columns, kept so that files can be written back unchanged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Metadata {
    pub fn get(&self, row: usize, column: &str) -> Option<&str> {
        let c = self.columns.iter().position(|h| h == column)?;
        self.rows.get(row)?.get(c).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub features: Grid<f64>,
    pub labels: LabelMatrix,
    pub metadata: Metadata,
}

impl Dataset {
    pub fn new(ids: Vec<String>, features: Grid<f64>, labels: LabelMatrix) -> Result<Self> {
        let ds = Dataset {
            ids,
            features,
            labels,
            metadata: Metadata::default(),
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let n = self.ids.len();
        if self.features.rows() != n || self.labels.rows() != n {
            return Err(Error::Shape(format!(
                "{n} ids, {} feature rows, {} label rows",
                self.features.rows(),
                self.labels.rows()
            )));
        }
        if !self.metadata.rows.is_empty() && self.metadata.rows.len() != n {
            return Err(Error::Shape("metadata row count".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.cols()
    }

    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            ids: rows.iter().map(|&r| self.ids[r].clone()).collect(),
            features: self.features.select_rows(rows),
            labels: self.labels.select_rows(rows),
            metadata: Metadata {
                columns: self.metadata.columns.clone(),
                rows: if self.metadata.rows.is_empty() {
                    Vec::new()
                } else {
                    rows.iter().map(|&r| self.metadata.rows[r].clone()).collect()
                },
            },
        }
    }

    /// First `n` rows and the remainder.
    pub fn split_at(&self, n: usize) -> (Dataset, Dataset) {
        let n = n.min(self.len());
        let head: Vec<usize> = (0..n).collect();
        let tail: Vec<usize> = (n..self.len()).collect();
        (self.select(&head), self.select(&tail))
    }

    /// Replaces the features with rows from `features`, matched by id.
    pub fn with_features(mut self, ids: &[String], features: Grid<f64>) -> Result<Dataset> {
        let lookup: HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let rows = self
            .ids
            .iter()
            .map(|id| {
                lookup
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::Data(format!("no features for row `{id}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.features = features.select_rows(&rows);
        Ok(self)
    }

    /// Writes the labels (and metadata, when present) as a label CSV.
    pub fn write_labels_csv(&self, tree: &LabelTree, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.labels_csv_bytes(tree)?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn labels_csv_bytes(&self, tree: &LabelTree) -> Result<Vec<u8>> {
        if tree.len() != self.num_labels() {
            return Err(Error::Shape("tree and label matrix disagree on K".into()));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let use_meta = !self.metadata.columns.is_empty();
        let mut header: Vec<&str> = if use_meta {
            self.metadata.columns.iter().map(String::as_str).collect()
        } else {
            vec!["id"]
        };
        header.extend(tree.ids());
        w.write_record(&header).map_err(|e| Error::csv("<memory>", e))?;
        for i in 0..self.len() {
            let mut record: Vec<&str> = if use_meta {
                self.metadata.rows[i].iter().map(String::as_str).collect()
            } else {
                vec![self.ids[i].as_str()]
            };
            record.extend(self.labels.row(i).iter().map(|l| l.as_cell()));
            w.write_record(&record).map_err(|e| Error::csv("<memory>", e))?;
        }
        w.into_inner()
            .map_err(|e| Error::Data(format!("flushing csv: {e}")))
    }

    pub fn write_features_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["id".to_string()];
        header.extend((0..self.feature_dim()).map(|j| format!("f{j}")));
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for (id, row) in self.ids.iter().zip(self.features.iter_rows()) {
            let mut record = vec![id.clone()];
            // `{}` prints the shortest string that parses back to the same f64
            record.extend(row.iter().map(|v| format!("{v}")));
            w.write_record(&record).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::Data(format!("{}: empty file", path.display())));
    }
    let records = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::csv(path, e))?;
    Ok((headers, records))
}

/// Number of columns produced by [`featurize_metadata`].
pub const METADATA_FEATURES: usize = 7;

/// Feature stub for label files that carry no features: one-hot `Sex`
/// (Male, Female), `Frontal/Lateral` (Frontal, Lateral), `AP/PA` (AP, PA)
/// and `Age / 100`. Absent columns or unrecognized values contribute zeros.
pub fn featurize_metadata(meta: &Metadata, row: usize) -> [f64; METADATA_FEATURES] {
    let is = |col: &str, value: &str| {
        f64::from(u8::from(meta.get(row, col).is_some_and(|v| v.trim() == value)))
    };
    let age = meta
        .get(row, "Age")
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|a| a.is_finite())
        .map_or(0.0, |a| a / 100.0);
    [
        is("Sex", "Male"),
        is("Sex", "Female"),
        is("Frontal/Lateral", "Frontal"),
        is("Frontal/Lateral", "Lateral"),
        is("AP/PA", "AP"),
        is("AP/PA", "PA"),
        age,
    ]
}

/// Reads a label CSV. Row ids come from a `Path` or `id` column when one
/// exists, otherwise from the 0-based row number. Features are filled by
/// [`featurize_metadata`]; use [`Dataset::with_features`] to attach real ones.
pub fn load_csv(path: impl AsRef<Path>, tree: &LabelTree) -> Result<Dataset> {
    let path = path.as_ref();
    let (headers, records) = read_csv(path)?;

    let label_cols = tree
        .ids()
        .map(|id| {
            headers
                .iter()
                .position(|h| h == id)
                .ok_or_else(|| Error::Data(format!("{}: missing label column `{id}`", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    let meta_cols: Vec<usize> = (0..headers.len())
        .filter(|c| !label_cols.contains(c))
        .collect();
    let id_col = ["Path", "id"]
        .iter()
        .find_map(|name| headers.iter().position(|h| h == name));

    let k = tree.len();
    let mut labels = Vec::with_capacity(records.len() * k);
    let mut ids = Vec::with_capacity(records.len());
    let mut meta_rows = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        for (&c, id) in label_cols.iter().zip(tree.ids()) {
            let cell = rec.get(c).unwrap_or("");
            labels.push(Label::parse(cell).map_err(|e| {
                Error::Data(format!("{} row {} column `{id}`: {e}", path.display(), r + 1))
            })?);
        }
        ids.push(match id_col {
            Some(c) => rec.get(c).unwrap_or("").to_string(),
            None => r.to_string(),
        });
        meta_rows.push(
            meta_cols
                .iter()
                .map(|&c| rec.get(c).unwrap_or("").to_string())
                .collect(),
        );
    }

    let metadata = Metadata {
        columns: meta_cols.iter().map(|&c| headers[c].clone()).collect(),
        rows: meta_rows,
    };
    let n = ids.len();
    let mut features = Grid::filled(n, METADATA_FEATURES, 0.0);
    for i in 0..n {
        features.row_mut(i).copy_from_slice(&featurize_metadata(&metadata, i));
    }
    let ds = Dataset {
        ids,
        features,
        labels: Grid::from_vec(n, k, labels)?,
        metadata,
    };
    ds.validate()?;
    Ok(ds)
}

/// Reads a feature CSV (`id, f0, f1, ...`).
pub fn load_features(path: impl AsRef<Path>) -> Result<(Vec<String>, Grid<f64>)> {
    let path = path.as_ref();
    let (headers, records) = read_csv(path)?;
    if headers.first().map(String::as_str) != Some("id") {
        return Err(Error::Data(format!(
            "{}: first column must be `id`",
            path.display()
        )));
    }
    let f = headers.len() - 1;
    let mut ids = Vec::with_capacity(records.len());
    let mut values = Vec::with_capacity(records.len() * f);
    for (r, rec) in records.iter().enumerate() {
        ids.push(rec.get(0).unwrap_or("").to_string());
        for c in 1..=f {
            let cell = rec.get(c).unwrap_or("");
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Data(format!("{} row {}: bad feature `{cell}`", path.display(), r + 1))
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{} row {}", path.display(), r + 1)));
            }
            values.push(v);
        }
    }
    let n = ids.len();
    Ok((ids, Grid::from_vec(n, f, values)?))
}

/// Label CSV plus feature CSV joined on row id.
pub fn load_dataset(
    labels: impl AsRef<Path>,
    features: impl AsRef<Path>,
    tree: &LabelTree,
) -> Result<Dataset> {
    let ds = load_csv(labels, tree)?;
    let (ids, feats) = load_features(features)?;
    ds.with_features(&ids, feats)
}

/// Mask of cells whose every ancestor is annotated positive. Roots are
/// always in. Uncertain or missing ancestors exclude the cell.
pub fn conditional_mask(labels: &LabelMatrix, tree: &LabelTree) -> Result<LossMask> {
    if labels.cols() != tree.len() {
        return Err(Error::Shape(format!(
            "label matrix has {} columns, hierarchy has {} labels",
            labels.cols(),
            tree.len()
        )));
    }
    let mut mask = Grid::filled(labels.rows(), labels.cols(), true);
    for (i, row) in labels.iter_rows().enumerate() {
        for k in 0..tree.len() {
            let ok = tree
                .ancestor_indices(k)
                .iter()
                .all(|&a| row[a] == Label::Pos);
            mask.set(i, k, ok);
        }
    }
    Ok(mask)
}

/// Per-label majority over an odd panel; `annotations` has one row per
/// annotator.
pub fn majority_vote(annotations: &LabelMatrix) -> Result<Vec<Label>> {
    let r = annotations.rows();
    if r.is_multiple_of(2) {
        return Err(Error::Data(format!(
            "majority vote needs an odd panel, got {r} annotators"
        )));
    }
    (0..annotations.cols())
        .map(|k| {
            let mut pos = 0;
            for l in annotations.column(k) {
                match l {
                    Label::Pos => pos += 1,
                    Label::Neg => {}
                    other => {
                        return Err(Error::Data(format!(
                            "majority vote accepts only POS/NEG, found {other} in column {k}"
                        )))
                    }
                }
            }
            Ok(Label::from_bool(2 * pos > r))
        })
        .collect()
}

/// Majority vote cell by cell across `R` readers' `N x K` matrices.
pub fn panel_majority(readers: &[LabelMatrix]) -> Result<LabelMatrix> {
    let first = readers
        .first()
        .ok_or_else(|| Error::Data("empty reader panel".into()))?;
    for m in readers {
        m.check_same_shape(first, "reader panel")?;
    }
    let (n, k) = first.shape();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let stack: Vec<Vec<Label>> = readers.iter().map(|m| m.row(i).to_vec()).collect();
        rows.push(majority_vote(&Grid::from_rows(k, stack)?)?);
    }
    Grid::from_rows(k, rows)
}

/// Maps every MISSING cell to NEG.
pub fn missing_as_negative(labels: &LabelMatrix) -> LabelMatrix {
    labels.map(|&l| if l == Label::Missing { Label::Neg } else { l })
}

/// Ground truth for synthetic data: a hierarchy with per-node conditional
/// firing rates and a linear-Gaussian feature model.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub tree: LabelTree,
    /// `P(node positive | parent positive)`; the marginal for roots.
    pub theta: Vec<f64>,
    pub feature_noise: f64,
    pub features: usize,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.theta.len() != self.tree.len() {
            return Err(Error::Shape(format!(
                "{} theta values for {} labels",
                self.theta.len(),
                self.tree.len()
            )));
        }
        for (k, &t) in self.theta.iter().enumerate() {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Range(format!(
                    "theta for `{}` is {t}, outside [0, 1]",
                    self.tree.id(k)
                )));
            }
        }
        if !(self.feature_noise.is_finite() && self.feature_noise >= 0.0) {
            return Err(Error::Range(format!(
                "feature noise {} must be finite and >= 0",
                self.feature_noise
            )));
        }
        if self.features == 0 {
            return Err(Error::Range("feature dimension must be >= 1".into()));
        }
        Ok(())
    }

    /// Exact marginals `P(label positive)`.
    pub fn marginals(&self) -> Result<Vec<f64>> {
        self.validate()?;
        self.tree.propagate(&self.theta)
    }

    /// The `F x K` class-to-feature map used by [`generate_synthetic`].
    pub fn weights(&self, seed: u64) -> Grid<f64> {
        let mut rng = rng::chacha(seed, &[stream::SYNTH_WEIGHTS]);
        let (f, k) = (self.features, self.tree.len());
        let data = (0..f * k).map(|_| rng.sample(StandardNormal)).collect();
        Grid::from_vec(f, k, data).expect("sized")
    }
}

/// Samples `n` rows top-down through the hierarchy. Features are
/// `W y + sigma * z` with `W` from [`SyntheticSpec::weights`], `y` the 0/1
/// label vector and `z` standard normal. Generate train and held-out rows in
/// one call and [`Dataset::split_at`] them so both share `W`.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    n: usize,
    seed: u64,
) -> Result<(Dataset, Vec<f64>)> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Range("synthetic row count must be >= 1".into()));
    }
    let tree = &spec.tree;
    let k = tree.len();
    let f = spec.features;
    let weights = spec.weights(seed);

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (tree.ancestor_indices(i).len(), i));

    let mut rng = rng::chacha(seed, &[stream::SYNTH_ROWS]);
    let mut labels = Vec::with_capacity(n * k);
    let mut features = Vec::with_capacity(n * f);
    let mut y = vec![false; k];
    for _ in 0..n {
        for &node in &order {
            let u: f64 = rng.random();
            let parent_on = tree.parent(node).is_none_or(|p| y[p]);
            y[node] = parent_on && u < spec.theta[node];
        }
        for j in 0..f {
            let signal: f64 = (0..k)
                .filter(|&c| y[c])
                .map(|c| *weights.get(j, c))
                .sum();
            let z: f64 = rng.sample(StandardNormal);
            features.push(signal + spec.feature_noise * z);
        }
        labels.extend(y.iter().map(|&b| Label::from_bool(b)));
    }

    let width = n.to_string().len();
    let ids = (0..n).map(|i| format!("s{i:0width$}")).collect();
    let ds = Dataset::new(
        ids,
        Grid::from_vec(n, f, features)?,
        Grid::from_vec(n, k, labels)?,
    )?;
    Ok((ds, tree.propagate(&spec.theta)?))
}

/// Replaces each annotated cell by UNC with probability `rate`, keyed by
/// `(seed, row, column)`.
pub fn inject_uncertainty(dataset: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Range(format!("uncertainty rate {rate} outside [0, 1]")));
    }
    let mut out = dataset.clone();
    let (n, k) = out.labels.shape();
    for i in 0..n {
        for c in 0..k {
            if *out.labels.get(i, c) != Label::Missing
                && rng::cell_uniform(seed, stream::UNCERTAINTY, i, c) < rate
            {
                out.labels.set(i, c, Label::Unc);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::NodeSpec;

    fn chain2() -> LabelTree {
        LabelTree::build(&[NodeSpec::root("A"), NodeSpec::child("B", "A")]).unwrap()
    }

    fn chain3() -> LabelTree {
        LabelTree::build(&[
            NodeSpec::root("A"),
            NodeSpec::child("B", "A"),
            NodeSpec::child("C", "B"),
        ])
        .unwrap()
    }

    fn row(labels: &[Label]) -> LabelMatrix {
        Grid::from_rows(labels.len(), vec![labels.to_vec()]).unwrap()
    }

    #[test]
    fn parse_cells() {
        assert_eq!(Label::parse("-1.0").unwrap(), Label::Unc);
        assert_eq!(Label::parse("").unwrap(), Label::Missing);
        assert_eq!(Label::parse("1.0").unwrap(), Label::Pos);
        assert_eq!(Label::parse("0").unwrap(), Label::Neg);
        assert!(Label::parse("2").unwrap_err().to_string().contains("unparsable"));
        assert!(Label::parse("yes").is_err());
    }

    #[test]
    fn conditional_mask_follows_parent() {
        use Label::*;
        let t = chain2();
        let m = conditional_mask(&row(&[Pos, Neg]), &t).unwrap();
        assert!(*m.get(0, 1));
        let m = conditional_mask(&row(&[Neg, Pos]), &t).unwrap();
        assert!(!*m.get(0, 1));
        let m = conditional_mask(&row(&[Unc, Pos]), &t).unwrap();
        assert!(!*m.get(0, 1));
        assert!(*m.get(0, 0));
        assert!(conditional_mask(&row(&[Pos]), &t).is_err());
    }

    #[test]
    fn conditional_mask_needs_every_ancestor() {
        use Label::*;
        let m = conditional_mask(&row(&[Neg, Pos, Pos]), &chain3()).unwrap();
        assert_eq!(m.row(0), &[true, false, false]);
        let m = conditional_mask(&row(&[Pos, Pos, Neg]), &chain3()).unwrap();
        assert_eq!(m.row(0), &[true, true, true]);
    }

    #[test]
    fn majority_examples() {
        use Label::*;
        let stack = |v: Vec<Label>| Grid::from_rows(1, v.into_iter().map(|l| vec![l]).collect()).unwrap();
        assert_eq!(majority_vote(&stack(vec![Pos, Pos, Neg])).unwrap(), vec![Pos]);
        assert_eq!(majority_vote(&stack(vec![Neg, Neg, Neg])).unwrap(), vec![Neg]);
        assert!(majority_vote(&stack(vec![Pos, Neg])).is_err());
        assert!(majority_vote(&stack(vec![Pos, Unc, Neg])).is_err());
        assert!(majority_vote(&stack(vec![Pos, Missing, Neg])).is_err());
    }

    #[test]
    fn panel_majority_cellwise() {
        use Label::*;
        let a = Grid::from_rows(2, vec![vec![Pos, Neg]]).unwrap();
        let b = Grid::from_rows(2, vec![vec![Pos, Pos]]).unwrap();
        let c = Grid::from_rows(2, vec![vec![Neg, Neg]]).unwrap();
        let m = panel_majority(&[a, b, c]).unwrap();
        assert_eq!(m.row(0), &[Pos, Neg]);
    }

    fn spec(tree: LabelTree, theta: Vec<f64>) -> SyntheticSpec {
        SyntheticSpec {
            tree,
            theta,
            feature_noise: 0.5,
            features: 4,
        }
    }

    #[test]
    fn synthetic_certain_and_impossible() {
        let (ds, m) = generate_synthetic(&spec(chain3(), vec![1.0; 3]), 50, 1).unwrap();
        assert!(ds.labels.as_slice().iter().all(|&l| l == Label::Pos));
        assert_eq!(m, vec![1.0; 3]);

        let (ds, _) = generate_synthetic(&spec(chain2(), vec![0.0, 0.9]), 200, 1).unwrap();
        assert!(ds.labels.as_slice().iter().all(|&l| l == Label::Neg));
    }

    #[test]
    fn synthetic_rejects_bad_theta() {
        let err = generate_synthetic(&spec(chain2(), vec![0.5, 1.5]), 10, 1).unwrap_err();
        assert!(err.to_string().contains("`B`"), "{err}");
        assert!(generate_synthetic(&spec(chain2(), vec![0.5, 0.5]), 0, 1).is_err());
    }

    #[test]
    fn synthetic_is_seed_deterministic() {
        let s = spec(chain3(), vec![0.6, 0.7, 0.5]);
        let (a, _) = generate_synthetic(&s, 100, 9).unwrap();
        let (b, _) = generate_synthetic(&s, 100, 9).unwrap();
        let (c, _) = generate_synthetic(&s, 100, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uncertainty_saturation_and_identity() {
        let (ds, _) = generate_synthetic(&spec(chain3(), vec![0.6, 0.7, 0.5]), 100, 2).unwrap();
        assert_eq!(inject_uncertainty(&ds, 0.0, 5).unwrap(), ds);
        let all = inject_uncertainty(&ds, 1.0, 5).unwrap();
        assert!(all.labels.as_slice().iter().all(|&l| l == Label::Unc));
        assert!(inject_uncertainty(&ds, 1.2, 5).is_err());
        assert!(inject_uncertainty(&ds, -0.1, 5).is_err());
    }

    #[test]
    fn uncertainty_leaves_missing_alone() {
        use Label::*;
        let ds = Dataset::new(
            vec!["r".into()],
            Grid::filled(1, 1, 0.0),
            row(&[Missing, Pos]),
        )
        .unwrap();
        let out = inject_uncertainty(&ds, 1.0, 0).unwrap();
        assert_eq!(out.labels.row(0), &[Missing, Unc]);
    }

    #[test]
    fn metadata_featurizer() {
        let meta = Metadata {
            columns: vec!["Sex".into(), "Age".into(), "AP/PA".into()],
            rows: vec![vec!["Female".into(), "68".into(), "PA".into()]],
        };
        assert_eq!(
            featurize_metadata(&meta, 0),
            [0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.68]
        );
    }
}
