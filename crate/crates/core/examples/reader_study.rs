//! ROC curves, AUC, and counting reader operating points below the curve.
//!
//!     cargo run --example reader_study

use hierlabel::eval::{reader_study, readers_below, roc_curve, LabelScores, OperatingPoint};
use hierlabel::Result;

fn main() -> Result<()> {
    let scores = [0.95, 0.9, 0.8, 0.8, 0.7, 0.55, 0.5, 0.3, 0.2, 0.1];
    let truth = [true, true, false, true, true, false, true, false, false, false];
    let curve = roc_curve(&scores, &truth)?;
    println!("ROC vertices (tied 0.8 scores move diagonally):");
    for p in &curve.points {
        println!("  fpr {:.2}  tpr {:.2}", p.fpr, p.tpr);
    }
    println!("AUC {:.4}", curve.auc());

    let readers = [
        OperatingPoint::new("Edema", "r1", 0.2, 0.6)?,
        OperatingPoint::new("Edema", "r2", 0.2, 0.8)?, // on the curve: not below
        OperatingPoint::new("Edema", "r3", 0.1, 0.9)?,
    ];
    for r in &readers {
        println!(
            "{} at ({}, {}): curve tpr {:.3}, below = {}",
            r.reader,
            r.fpr,
            r.tpr,
            curve.tpr_at(r.fpr),
            readers_below(&curve, [r]) == 1
        );
    }

    let labels = vec![
        LabelScores { label: "Edema".into(), scores: scores.to_vec(), truth: truth.to_vec() },
        LabelScores {
            label: "Reversed".into(),
            scores: scores.iter().map(|s| 1.0 - s).collect(),
            truth: truth.to_vec(),
        },
    ];
    let report = reader_study(&labels, &readers, &["Edema", "Reversed"])?;
    print!("{}", report.to_text());
    Ok(())
}
