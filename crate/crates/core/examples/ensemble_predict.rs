//! Independently seeded members trained in parallel, averaged after
//! propagation.
//!
//!     cargo run --release --example ensemble_predict

use std::num::NonZeroUsize;

use hierlabel::cli::RunConfig;
use hierlabel::data::{generate_synthetic, inject_uncertainty, Label};
use hierlabel::eval::auc;
use hierlabel::pipeline::train_ensemble;
use hierlabel::{EnsembleModel, Result};

fn main() -> Result<()> {
    let cfg = RunConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/benchmark.toml"))?;
    let tree = cfg.tree()?;
    let (spec, syn) = cfg.synthetic_spec(&tree)?;
    let seed = cfg.seed()?;
    let (all, _) = generate_synthetic(&spec, syn.train_rows + syn.test_rows, seed)?;
    let (train, test) = all.split_at(syn.train_rows);
    let train = inject_uncertainty(&train, syn.uncertainty_rate, seed)?;

    let plan = cfg.plan()?;
    let dims = [syn.features, 32, tree.len()];
    let threads = std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN);
    let runs = train_ensemble(&train, &tree, &plan, &dims, cfg.ensemble_size, seed, threads)?;
    let members: Vec<_> = runs.into_iter().map(|r| r.last.model).collect();

    let score = |ens: &EnsembleModel| -> Result<Vec<f64>> {
        let preds = ens.predict_all(&tree, &test.features)?;
        (0..tree.len())
            .map(|k| {
                let s: Vec<f64> = preds.column(k).copied().collect();
                let y: Vec<bool> = test.labels.column(k).map(|&l| l == Label::Pos).collect();
                auc(&s, &y)
            })
            .collect()
    };
    let single = score(&EnsembleModel::new(members[..1].to_vec(), true)?)?;
    let full = score(&EnsembleModel::new(members.clone(), true)?)?;
    println!("{:<28} {:>8} {:>8}", "label", "member 0", format!("{} avg", members.len()));
    for (k, id) in tree.ids().enumerate() {
        println!("{id:<28} {:>8.4} {:>8.4}", single[k], full[k]);
    }

    // Propagated outputs respect the hierarchy for every row.
    let preds = EnsembleModel::new(members, true)?.predict_all(&tree, &test.features)?;
    let consistent = preds
        .iter_rows()
        .all(|p| (0..tree.len()).all(|k| tree.parent(k).is_none_or(|q| p[k] <= p[q])));
    println!("child <= parent on every row: {consistent}");
    Ok(())
}
