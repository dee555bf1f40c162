//! Conditional pre-training on rows with positive parents, then fine-tuning
//! only the output layer on everything.
//!
//!     cargo run --release --example two_stage_training

use hierlabel::data::{generate_synthetic, Label};
use hierlabel::eval::auc;
use hierlabel::hierarchy::NodeSpec;
use hierlabel::model::{decode_checkpoint, encode_checkpoint};
use hierlabel::pipeline::{train_stage1, train_stage2, EnsembleModel};
use hierlabel::{LabelTree, Mlp, Mode, OptimizerConfig, Result, SyntheticSpec, TrainPlan, UncertaintyPolicy};

fn main() -> Result<()> {
    let tree = LabelTree::build(&[
        NodeSpec::root("opacity"),
        NodeSpec::child("consolidation", "opacity"),
        NodeSpec::child("pneumonia", "consolidation"),
    ])?;
    let spec = SyntheticSpec {
        tree: tree.clone(),
        theta: vec![0.6, 0.7, 0.5],
        feature_noise: 0.5,
        features: 8,
    };
    let (all, marginals) = generate_synthetic(&spec, 15_000, 1)?;
    let (train, test) = all.split_at(10_000);

    let opt = OptimizerConfig {
        lr0: 0.01,
        decay_factor: 0.5,
        iterations: 5 * train.len().div_ceil(32),
        seed: 3,
        ..OptimizerConfig::default()
    };
    let plan = TrainPlan::new(UncertaintyPolicy::ONES, opt, Mode::Conditional);

    let stage1 = train_stage1(Mlp::new(&[8, 32, 3], 2)?, &train, &tree, &plan)?;
    for e in &stage1.log {
        println!("{} epoch {} lr {:.5} loss {:.4}", e.stage, e.epoch, e.lr, e.mean_loss);
    }
    let stage2 = train_stage2(stage1.model.clone(), &train, &plan)?;
    for e in &stage2.log {
        println!("{} epoch {} lr {:.5} loss {:.4}", e.stage, e.epoch, e.lr, e.mean_loss);
    }
    println!("frozen after stage 2: {:?}", stage2.model.frozen());

    for (name, model) in [("stage 1", &stage1.model), ("stage 2", &stage2.model)] {
        let ens = EnsembleModel::new(vec![model.clone()], true)?;
        let preds = ens.predict_all(&tree, &test.features)?;
        print!("{name}:");
        for (k, id) in tree.ids().enumerate() {
            let s: Vec<f64> = preds.column(k).copied().collect();
            let y: Vec<bool> = test.labels.column(k).map(|&l| l == Label::Pos).collect();
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            print!("  {id} mean {mean:.3} (true {:.3}) auc {:.4}", marginals[k], auc(&s, &y)?);
        }
        println!();
    }

    // Checkpoints carry the optimizer state and round-trip exactly.
    let bytes = encode_checkpoint(&stage2.model, Some(&stage2.state))?;
    let (restored, state) = decode_checkpoint(&bytes)?;
    assert_eq!(restored, stage2.model);
    println!("checkpoint: {} bytes, {} Adam steps", bytes.len(), state.map_or(0, |s| s.t));
    Ok(())
}
