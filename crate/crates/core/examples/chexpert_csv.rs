//! Reading a CheXpert-style label file, masking for conditional training,
//! and building ground truth from a reader panel.
//!
//!     cargo run --example chexpert_csv -- [labels.csv]

use hierlabel::data::{conditional_mask, load_csv, majority_vote, Label};
use hierlabel::{Grid, LabelTree, Result};

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/sample_chexpert.csv").into());
    let tree = LabelTree::chexpert();
    let ds = load_csv(&path, &tree)?;
    println!("{} rows, metadata columns {:?}", ds.len(), ds.metadata.columns);

    for (k, id) in tree.ids().enumerate() {
        let mut counts = [0; 4];
        for l in ds.labels.column(k) {
            counts[*l as usize] += 1;
        }
        println!("{id:<28} pos {:>2} neg {:>2} unc {:>2} blank {:>2}", counts[0], counts[1], counts[2], counts[3]);
    }

    // Cells that count during conditional pre-training.
    let mask = conditional_mask(&ds.labels, &tree)?;
    let pneumonia = tree.index_of("Pneumonia")?;
    let eligible: Vec<&str> = (0..ds.len())
        .filter(|&i| *mask.get(i, pneumonia))
        .map(|i| ds.ids[i].as_str())
        .collect();
    println!("rows eligible for Pneumonia in stage 1: {eligible:?}");
    println!("featurized metadata of row 0: {:?}", ds.features.row(0));

    // Three readers, two labels: the majority decides.
    use Label::{Neg, Pos};
    let panel = Grid::from_rows(2, vec![vec![Pos, Neg], vec![Pos, Pos], vec![Neg, Neg]])?;
    println!("majority of {:?}: {:?}", panel.as_slice(), majority_vote(&panel)?);
    Ok(())
}
