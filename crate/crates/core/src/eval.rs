//! ROC analysis, AUC, and comparison against human readers.
//!
//! A reader's operating point counts as *below* the model's ROC when its TPR
//! is strictly less than the curve's TPR at the same FPR, where the curve is
//! linearly interpolated between vertices and, on vertical segments, takes
//! its highest TPR. A point lying exactly on the curve is not below it.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Label, LabelMatrix};
use crate::error::{Error, Result};
use crate::rng::{self, stream};

/// The five pathologies averaged for the headline metric.
pub const DEFAULT_SUBSET: [&str; 5] = [
    "Atelectasis",
    "Cardiomegaly",
    "Consolidation",
    "Edema",
    "Pleural Effusion",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// Vertices from a descending threshold sweep, `(0,0)` first and `(1,1)` last.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    positives: u64,
    negatives: u64,
    // twice the area, in units of one positive-negative pair
    area2: u128,
}

impl RocCurve {
    pub fn auc(&self) -> f64 {
        self.area2 as f64 / (2.0 * self.positives as f64 * self.negatives as f64)
    }

    /// Highest TPR the curve reaches at `fpr`.
    pub fn tpr_at(&self, fpr: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if fpr < a.fpr || fpr > b.fpr {
                continue;
            }
            let y = if b.fpr == a.fpr {
                a.tpr.max(b.tpr)
            } else if fpr == b.fpr {
                b.tpr
            } else {
                a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr)
            };
            best = best.max(y);
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.fpr, p.tpr);
        }
        out
    }
}

fn check_inputs(scores: &[f64], labels: &[bool]) -> Result<(u64, u64)> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("score is NaN".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Data(format!(
            "ROC needs both classes, got {pos} positives and {neg} negatives"
        )));
    }
    Ok((pos, neg))
}

/// Sweeps every distinct score as a threshold, highest first; tied scores
/// move the curve together (a diagonal step).
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    let (pos, neg) = check_inputs(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut area2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area2 += u128::from(fp - fp0) * u128::from(tp0 + tp);
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(RocCurve {
        points,
        positives: pos,
        negatives: neg,
        area2,
    })
}

/// Trapezoidal area under [`roc_curve`]; equals
/// `P(score_pos > score_neg) + P(tie) / 2`.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    Ok(roc_curve(scores, labels)?.auc())
}

/// Unweighted mean of `aucs` over the labels named in `subset`.
pub fn mean_auc<S: AsRef<str>, T: AsRef<str>>(labels: &[S], aucs: &[f64], subset: &[T]) -> Result<f64> {
    if labels.len() != aucs.len() {
        return Err(Error::Shape(format!("{} labels, {} AUCs", labels.len(), aucs.len())));
    }
    if subset.is_empty() {
        return Err(Error::Config("evaluation subset is empty".into()));
    }
    let mut sum = 0.0;
    for want in subset {
        let want = want.as_ref();
        let i = labels
            .iter()
            .position(|l| l.as_ref() == want)
            .ok_or_else(|| Error::UnknownLabel(want.to_string()))?;
        sum += aucs[i];
    }
    Ok(sum / subset.len() as f64)
}

/// One reader's sensitivity/false-positive rate on one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub label: String,
    pub reader: String,
    pub fpr: f64,
    pub tpr: f64,
}

impl OperatingPoint {
    pub fn new(label: &str, reader: &str, fpr: f64, tpr: f64) -> Result<Self> {
        let p = OperatingPoint {
            label: label.into(),
            reader: reader.into(),
            fpr,
            tpr,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fpr) || !(0.0..=1.0).contains(&self.tpr) {
            return Err(Error::Range(format!(
                "operating point ({}, {}) of reader `{}` on `{}` is outside the unit square",
                self.fpr, self.tpr, self.reader, self.label
            )));
        }
        Ok(())
    }
}

/// Number of operating points strictly below the curve.
pub fn readers_below<'a>(curve: &RocCurve, points: impl IntoIterator<Item = &'a OperatingPoint>) -> usize {
    points
        .into_iter()
        .filter(|p| p.tpr < curve.tpr_at(p.fpr))
        .count()
}

/// Model scores and ground truth for one label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelScores {
    pub label: String,
    pub scores: Vec<f64>,
    pub truth: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub auc: Vec<f64>,
    pub curves: Vec<RocCurve>,
    pub subset: Vec<String>,
    pub mean_auc_selected: f64,
    /// Distinct readers with a point on each label.
    pub readers: Vec<usize>,
    pub readers_below: Vec<usize>,
    /// Mean of `readers_below` over the subset.
    pub mean_readers_below: f64,
}

/// AUC and reader comparison for every label; summaries over `subset`.
pub fn reader_study<S: AsRef<str>>(
    labels: &[LabelScores],
    points: &[OperatingPoint],
    subset: &[S],
) -> Result<EvalReport> {
    let names: Vec<String> = labels.iter().map(|l| l.label.clone()).collect();
    for p in points {
        p.validate()?;
        if !names.contains(&p.label) {
            return Err(Error::UnknownLabel(p.label.clone()));
        }
    }
    let mut curves = Vec::with_capacity(labels.len());
    for l in labels {
        curves.push(roc_curve(&l.scores, &l.truth).map_err(|e| {
            Error::Data(format!("label `{}`: {e}", l.label))
        })?);
    }
    let auc: Vec<f64> = curves.iter().map(RocCurve::auc).collect();

    let mut readers = Vec::with_capacity(labels.len());
    let mut below = Vec::with_capacity(labels.len());
    for (name, curve) in names.iter().zip(&curves) {
        let mine: Vec<&OperatingPoint> = points.iter().filter(|p| &p.label == name).collect();
        readers.push(mine.iter().map(|p| p.reader.as_str()).collect::<BTreeSet<_>>().len());
        below.push(readers_below(curve, mine));
    }

    let mean_auc_selected = mean_auc(&names, &auc, subset)?;
    let below_f: Vec<f64> = below.iter().map(|&b| b as f64).collect();
    let mean_readers_below = mean_auc(&names, &below_f, subset)?;
    Ok(EvalReport {
        subset: subset.iter().map(|s| s.as_ref().to_string()).collect(),
        labels: names,
        auc,
        curves,
        mean_auc_selected,
        readers,
        readers_below: below,
        mean_readers_below,
    })
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self.labels.iter().map(String::len).max().unwrap_or(5).max(5);
        let _ = writeln!(out, "{:<width$}  {:>8}  {:>7}  {:>6}", "label", "auc", "readers", "below");
        for i in 0..self.labels.len() {
            let mark = if self.subset.contains(&self.labels[i]) { "*" } else { " " };
            let _ = writeln!(
                out,
                "{:<width$}  {:>8.4}  {:>7}  {:>6} {mark}",
                self.labels[i], self.auc[i], self.readers[i], self.readers_below[i]
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "selected: {}", self.subset.join(", "));
        let _ = writeln!(out, "mean_auc_selected: {:.6}", self.mean_auc_selected);
        let _ = writeln!(out, "mean_readers_below: {:.6}", self.mean_readers_below);
        out
    }

    /// Per-label table: `label,auc,selected,readers,readers_below`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let map = |e: csv::Error| Error::Data(e.to_string());
        w.write_record(["label", "auc", "selected", "readers", "readers_below"]).map_err(map)?;
        for i in 0..self.labels.len() {
            w.write_record([
                self.labels[i].clone(),
                self.auc[i].to_string(),
                self.subset.contains(&self.labels[i]).to_string(),
                self.readers[i].to_string(),
                self.readers_below[i].to_string(),
            ])
            .map_err(map)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf-8"))
    }

    /// `metric,value` rows for the subset summaries.
    pub fn summary_csv(&self) -> String {
        format!(
            "metric,value\nmean_auc_selected,{}\nmean_readers_below,{}\n",
            self.mean_auc_selected, self.mean_readers_below
        )
    }
}

/// Reads `label,reader,fpr,tpr` rows.
pub fn load_reader_points(path: impl AsRef<Path>) -> Result<Vec<OperatingPoint>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for rec in reader.deserialize() {
        let p: OperatingPoint = rec.map_err(|e| Error::csv(path, e))?;
        p.validate()?;
        out.push(p);
    }
    Ok(out)
}

pub fn write_reader_points(path: impl AsRef<Path>, points: &[OperatingPoint]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    if points.is_empty() {
        w.write_record(["label", "reader", "fpr", "tpr"]).map_err(|e| Error::csv(path, e))?;
    }
    for p in points {
        w.serialize(p).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Simulated reader with fixed per-case sensitivity and specificity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReaderSkill {
    pub sensitivity: f64,
    pub specificity: f64,
}

/// Operating points of simulated readers on `truth` (POS/NEG cells only;
/// others are skipped). Each reader calls a positive case positive with
/// probability `sensitivity` and a negative case negative with probability
/// `specificity`, drawn per `(seed, reader, row, label)`. Labels without
/// both classes get no points.
pub fn simulate_readers<S: AsRef<str>>(
    truth: &LabelMatrix,
    label_ids: &[S],
    skills: &[ReaderSkill],
    seed: u64,
) -> Result<Vec<OperatingPoint>> {
    if label_ids.len() != truth.cols() {
        return Err(Error::Shape("label ids vs truth columns".into()));
    }
    let mut out = Vec::new();
    for (k, id) in label_ids.iter().enumerate() {
        for (r, skill) in skills.iter().enumerate() {
            let reader_seed = rng::derive(seed, &[stream::READERS, r as u64]);
            let (mut tp, mut fp, mut p, mut n) = (0u64, 0u64, 0u64, 0u64);
            for i in 0..truth.rows() {
                let u = rng::cell_uniform(reader_seed, k as u64, i, 0);
                match truth.get(i, k) {
                    Label::Pos => {
                        p += 1;
                        tp += u64::from(u < skill.sensitivity);
                    }
                    Label::Neg => {
                        n += 1;
                        fp += u64::from(u >= skill.specificity);
                    }
                    _ => {}
                }
            }
            if p == 0 || n == 0 {
                continue;
            }
            out.push(OperatingPoint::new(
                id.as_ref(),
                &format!("reader{}", r + 1),
                fp as f64 / n as f64,
                tp as f64 / p as f64,
            )?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(c: &RocCurve) -> Vec<(f64, f64)> {
        c.points.iter().map(|p| (p.fpr, p.tpr)).collect()
    }

    #[test]
    fn perfect_and_reversed_separators() {
        let c = roc_curve(&[0.9, 0.1], &[true, false]).unwrap();
        assert_eq!(pts(&c), vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(c.auc(), 1.0);
        let c = roc_curve(&[0.1, 0.9], &[true, false]).unwrap();
        assert!(pts(&c).contains(&(1.0, 0.0)));
        assert_eq!(c.auc(), 0.0);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5, 0.5], &[true, false]).unwrap(), 0.5);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(auc(&[0.1, 0.2], &[true, true]).is_err());
        assert!(roc_curve(&[0.1, 0.2], &[false, false]).is_err());
        assert!(auc(&[f64::NAN, 0.2], &[true, false]).is_err());
        assert!(auc(&[0.1], &[true, false]).is_err());
    }

    #[test]
    fn mean_auc_examples() {
        assert_eq!(mean_auc(&["a", "b"], &[0.9, 0.95], &["a"]).unwrap(), 0.9);
        assert!((mean_auc(&["a", "b"], &[0.9, 0.95], &["a", "b"]).unwrap() - 0.925).abs() < 1e-15);
        assert!(matches!(
            mean_auc(&["a"], &[0.9], &["z"]),
            Err(Error::UnknownLabel(_))
        ));
        assert!(mean_auc::<&str, &str>(&["a"], &[0.9], &[]).is_err());
    }

    #[test]
    fn below_perfect_and_on_diagonal() {
        let perfect = roc_curve(&[0.9, 0.1], &[true, false]).unwrap();
        let p = OperatingPoint::new("x", "r", 0.5, 0.9).unwrap();
        assert_eq!(readers_below(&perfect, [&p]), 1);

        let diagonal = roc_curve(&[0.5, 0.5], &[true, false]).unwrap();
        let p = OperatingPoint::new("x", "r", 0.5, 0.5).unwrap();
        assert_eq!(readers_below(&diagonal, [&p]), 0);
    }

    #[test]
    fn vertical_segment_uses_its_top() {
        let perfect = roc_curve(&[0.9, 0.1], &[true, false]).unwrap();
        assert_eq!(perfect.tpr_at(0.0), 1.0);
        let p = OperatingPoint::new("x", "r", 0.0, 1.0).unwrap();
        assert_eq!(readers_below(&perfect, [&p]), 0);
    }

    #[test]
    fn operating_point_range_checked() {
        assert!(OperatingPoint::new("x", "r", 1.2, 0.5).is_err());
        assert!(OperatingPoint::new("x", "r", 0.2, -0.5).is_err());
    }

    #[test]
    fn reader_study_empty_points() {
        let l = LabelScores {
            label: "a".into(),
            scores: vec![0.9, 0.1],
            truth: vec![true, false],
        };
        let r = reader_study(&[l], &[], &["a"]).unwrap();
        assert_eq!(r.readers_below, vec![0]);
        assert_eq!(r.mean_readers_below, 0.0);
    }

    #[test]
    fn reader_study_rejects_unknown_label() {
        let l = LabelScores {
            label: "a".into(),
            scores: vec![0.9, 0.1],
            truth: vec![true, false],
        };
        let p = OperatingPoint::new("b", "r", 0.1, 0.1).unwrap();
        assert!(reader_study(&[l], &[p], &["a"]).is_err());
    }

    #[test]
    fn simulated_readers_hit_their_rates() {
        use crate::grid::Grid;
        let n = 4000;
        let truth = Grid::from_vec(n, 1, (0..n).map(|i| Label::from_bool(i % 2 == 0)).collect()).unwrap();
        let skills = [ReaderSkill {
            sensitivity: 0.8,
            specificity: 0.9,
        }];
        let p = simulate_readers(&truth, &["a"], &skills, 1).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[0].tpr - 0.8).abs() < 0.03, "{p:?}");
        assert!((p[0].fpr - 0.1).abs() < 0.03, "{p:?}");
    }
}
