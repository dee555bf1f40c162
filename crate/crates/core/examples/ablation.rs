//! Two-stage conditional training with smoothed uncertain labels versus a
//! flat model with uncertain labels mapped to positive, on the benchmark
//! hierarchy.
//!
//!     cargo run --release --example ablation -- [seeds]

use std::num::NonZeroUsize;

use hierlabel::cli::RunConfig;
use hierlabel::data::{generate_synthetic, inject_uncertainty, Label};
use hierlabel::eval::auc;
use hierlabel::pipeline::train_ensemble;
use hierlabel::{EnsembleModel, Mode, Result, TrainPlan, UncertaintyPolicy};

fn main() -> Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let cfg = RunConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/benchmark.toml"))?;
    let tree = cfg.tree()?;
    let (spec, syn) = cfg.synthetic_spec(&tree)?;
    let leaves: Vec<usize> = tree.leaves().collect();
    let dims = [syn.features, 32, tree.len()];
    let threads = std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN);

    let mut total = 0.0;
    for i in 0..seeds {
        let seed = cfg.seed()? + i;
        let (all, _) = generate_synthetic(&spec, syn.train_rows + syn.test_rows, seed)?;
        let (train, test) = all.split_at(syn.train_rows);
        let train = inject_uncertainty(&train, 0.3, seed)?;

        let mut cond = TrainPlan::new(UncertaintyPolicy::ones_lsr(0.55, 0.85)?, cfg.optimizer.clone(), Mode::Conditional);
        cond.policy_seed = seed;
        let flat = TrainPlan::new(UncertaintyPolicy::ONES, cfg.optimizer.clone(), Mode::Flat);

        let leaf_auc = |plan: &TrainPlan| -> Result<f64> {
            let runs = train_ensemble(&train, &tree, plan, &dims, cfg.ensemble_size, seed, threads)?;
            let ens = EnsembleModel::new(runs.into_iter().map(|r| r.last.model).collect(), plan.conditional)?;
            let preds = ens.predict_all(&tree, &test.features)?;
            let mut sum = 0.0;
            for &k in &leaves {
                let s: Vec<f64> = preds.column(k).copied().collect();
                let y: Vec<bool> = test.labels.column(k).map(|&l| l == Label::Pos).collect();
                sum += auc(&s, &y)?;
            }
            Ok(sum / leaves.len() as f64)
        };
        let (c, f) = (leaf_auc(&cond)?, leaf_auc(&flat)?);
        total += c - f;
        println!("seed {seed}: conditional {c:.4}  flat {f:.4}  delta {:+.4}", c - f);
    }
    println!("mean delta over {seeds} seeds: {:+.4}", total / seeds as f64);
    Ok(())
}
