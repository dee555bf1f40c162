//! Synthetic hierarchical data with known marginals, written as CSVs.
//!
//!     cargo run --example synthetic_benchmark -- [out_dir]

use std::path::PathBuf;

use hierlabel::cli::RunConfig;
use hierlabel::data::{generate_synthetic, inject_uncertainty, Label};
use hierlabel::Result;

fn main() -> Result<()> {
    let cfg = RunConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/benchmark.toml"))?;
    let tree = cfg.tree()?;
    let (spec, syn) = cfg.synthetic_spec(&tree)?;
    let seed = cfg.seed()?;

    let (all, marginals) = generate_synthetic(&spec, syn.train_rows + syn.test_rows, seed)?;
    println!("{:<28} {:>6} {:>9} {:>9}", "label", "theta", "marginal", "observed");
    for (k, id) in tree.ids().enumerate() {
        let pos = all.labels.column(k).filter(|&&l| l == Label::Pos).count();
        println!(
            "{id:<28} {:>6.2} {:>9.4} {:>9.4}",
            spec.theta[k],
            marginals[k],
            pos as f64 / all.len() as f64
        );
    }

    let (train, test) = all.split_at(syn.train_rows);
    let train = inject_uncertainty(&train, syn.uncertainty_rate, seed)?;
    let unc = train.labels.as_slice().iter().filter(|&&l| l == Label::Unc).count();
    println!(
        "{} train / {} test rows, {} features, {unc} uncertain training cells",
        train.len(),
        test.len(),
        train.feature_dim()
    );

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir).map_err(|e| hierlabel::Error::Data(e.to_string()))?;
        train.write_labels_csv(&tree, dir.join("train_labels.csv"))?;
        train.write_features_csv(dir.join("train_features.csv"))?;
        test.write_labels_csv(&tree, dir.join("test_labels.csv"))?;
        test.write_features_csv(dir.join("test_features.csv"))?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
