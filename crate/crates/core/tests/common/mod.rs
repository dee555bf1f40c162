#![allow(dead_code)]

use std::path::PathBuf;

use hierlabel::hierarchy::{LabelTree, NodeSpec};
use hierlabel::model::{masked_bce, Gradients, Mlp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

pub fn chain(ids: &[&str]) -> LabelTree {
    let mut specs = vec![NodeSpec::root(ids[0])];
    for w in ids.windows(2) {
        specs.push(NodeSpec::child(w[1], w[0]));
    }
    LabelTree::build(&specs).unwrap()
}

/// Random forest on `k` nodes: node i's parent is a uniformly chosen earlier
/// node or none.
pub fn random_tree(rng: &mut impl Rng, k: usize) -> LabelTree {
    let specs: Vec<NodeSpec> = (0..k)
        .map(|i| {
            let id = format!("n{i}");
            if i == 0 || rng.random_bool(0.25) {
                NodeSpec::root(&id)
            } else {
                NodeSpec::child(&id, &format!("n{}", rng.random_range(0..i)))
            }
        })
        .collect();
    LabelTree::build(&specs).unwrap()
}

/// Exact `P(node = 1)` of the Bayes net in which a node is Bernoulli(cond)
/// when its parent is on (or it is a root) and 0 otherwise, by summing over
/// all 2^K joint outcomes.
pub fn enumerate_marginals(tree: &LabelTree, cond: &[f64]) -> Vec<f64> {
    let k = tree.len();
    let mut marg = vec![0.0; k];
    for outcome in 0u32..(1 << k) {
        let on = |i: usize| outcome & (1 << i) != 0;
        let mut prob = 1.0;
        for i in 0..k {
            let parent_on = tree.parent(i).is_none_or(on);
            prob *= match (parent_on, on(i)) {
                (true, true) => cond[i],
                (true, false) => 1.0 - cond[i],
                (false, true) => 0.0,
                (false, false) => 1.0,
            };
        }
        for (i, m) in marg.iter_mut().enumerate() {
            if on(i) {
                *m += prob;
            }
        }
    }
    marg
}

/// Scores with deliberate ties (half the instances draw from a coarse grid)
/// and labels guaranteed to contain both classes.
pub fn random_scored_labels(rng: &mut impl Rng, max_n: usize) -> (Vec<f64>, Vec<bool>) {
    let n = rng.random_range(2..=max_n);
    let coarse = rng.random_bool(0.5);
    let mut scores: Vec<f64> = (0..n)
        .map(|_| {
            if coarse {
                f64::from(rng.random_range(0..8u8)) / 8.0
            } else {
                rng.random()
            }
        })
        .collect();
    let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
    labels[0] = true;
    labels[1] = false;
    // keep shapes exchangeable after forcing both classes
    scores.swap(0, rng.random_range(0..n));
    (scores, labels)
}

/// `P(s_pos > s_neg) + P(tie) / 2` by counting every pair.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0u64;
    let mut ties = 0u64;
    let mut pairs = 0u64;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                wins += 1;
            } else if scores[i] == scores[j] {
                ties += 1;
            }
        }
    }
    (wins as f64 + ties as f64 / 2.0) / pairs as f64
}

/// ROC vertices from a confusion matrix at every distinct threshold
/// (predict positive when `score >= t`), plus the empty prediction.
pub fn brute_force_roc(scores: &[f64], labels: &[bool]) -> Vec<(f64, f64)> {
    let p = labels.iter().filter(|&&l| l).count() as f64;
    let n = labels.len() as f64 - p;
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut out = vec![(0.0, 0.0)];
    for t in thresholds {
        let tp = scores.iter().zip(labels).filter(|(&s, &l)| l && s >= t).count() as f64;
        let fp = scores.iter().zip(labels).filter(|(&s, &l)| !l && s >= t).count() as f64;
        out.push((fp / n, tp / p));
    }
    out
}

pub struct Instance {
    pub model: Mlp,
    pub x: Vec<f64>,
    pub targets: Vec<f64>,
    pub mask: Vec<bool>,
}

/// Random small model and sample. Returns `None` when a hidden
/// pre-activation sits within 1e-3 of the ReLU kink, where a central
/// difference with h = 1e-5 straddles a non-differentiable point.
pub fn random_instance(rng: &mut impl Rng) -> Option<Instance> {
    let f = rng.random_range(1..=5);
    let k = rng.random_range(1..=4);
    let mut dims = vec![f];
    for _ in 0..rng.random_range(0..=2) {
        dims.push(rng.random_range(1..=6));
    }
    dims.push(k);
    let model = Mlp::new(&dims, rng.random()).unwrap();
    let x: Vec<f64> = (0..f).map(|_| rng.random_range(-2.0..2.0)).collect();
    let targets: Vec<f64> = (0..k).map(|_| rng.random()).collect();
    let mask: Vec<bool> = (0..k).map(|_| rng.random_bool(0.7)).collect();

    let mut act = x.clone();
    let layers = model.layers();
    for layer in &layers[..layers.len() - 1] {
        let z: Vec<f64> = (0..layer.outputs)
            .map(|o| {
                let w = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                w.iter().zip(&act).map(|(w, a)| w * a).sum::<f64>() + layer.biases[o]
            })
            .collect();
        if z.iter().any(|v| v.abs() < 1e-3) {
            return None;
        }
        act = z.iter().map(|v| v.max(0.0)).collect();
    }
    Some(Instance {
        model,
        x,
        targets,
        mask,
    })
}

pub fn loss_of(model: &Mlp, inst: &Instance) -> f64 {
    masked_bce(&model.forward(&inst.x).unwrap(), &inst.targets, &inst.mask).unwrap()
}

/// Central differences of `masked_bce ∘ forward` for every parameter.
pub fn finite_difference_gradient(inst: &Instance, h: f64) -> Gradients {
    let mut grads = Gradients::zeros_like(&inst.model);
    let mut probe = inst.model.clone();
    for li in 0..probe.layers().len() {
        for wi in 0..probe.layers()[li].weights.len() {
            let orig = probe.layers()[li].weights[wi];
            probe.layers_mut()[li].weights[wi] = orig + h;
            let up = loss_of(&probe, inst);
            probe.layers_mut()[li].weights[wi] = orig - h;
            let down = loss_of(&probe, inst);
            probe.layers_mut()[li].weights[wi] = orig;
            grads.layers[li].weights[wi] = (up - down) / (2.0 * h);
        }
        for bi in 0..probe.layers()[li].biases.len() {
            let orig = probe.layers()[li].biases[bi];
            probe.layers_mut()[li].biases[bi] = orig + h;
            let up = loss_of(&probe, inst);
            probe.layers_mut()[li].biases[bi] = orig - h;
            let down = loss_of(&probe, inst);
            probe.layers_mut()[li].biases[bi] = orig;
            grads.layers[li].biases[bi] = (up - down) / (2.0 * h);
        }
    }
    grads
}

/// Largest `|a - n| / max(|a|, |n|)` over all parameters; entries that are
/// zero in both count as exact.
pub fn worst_relative_error(analytic: &Gradients, numeric: &Gradients) -> f64 {
    analytic
        .iter()
        .zip(numeric.iter())
        .map(|(&a, &n)| {
            let scale = a.abs().max(n.abs());
            if scale == 0.0 {
                0.0
            } else {
                (a - n).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Train/held-out split of one synthetic draw, so both halves share `W`.
pub fn synthetic_split(
    tree: &LabelTree,
    theta: &[f64],
    noise: f64,
    features: usize,
    train_rows: usize,
    test_rows: usize,
    seed: u64,
) -> (hierlabel::Dataset, hierlabel::Dataset) {
    let spec = hierlabel::SyntheticSpec {
        tree: tree.clone(),
        theta: theta.to_vec(),
        feature_noise: noise,
        features,
    };
    let (all, _) = hierlabel::data::generate_synthetic(&spec, train_rows + test_rows, seed).unwrap();
    all.split_at(train_rows)
}

pub fn column_auc(scores: &hierlabel::Grid<f64>, truth: &hierlabel::Dataset, k: usize) -> f64 {
    let s: Vec<f64> = scores.column(k).copied().collect();
    let y: Vec<bool> = truth.labels.column(k).map(|&l| l == hierlabel::Label::Pos).collect();
    hierlabel::eval::auc(&s, &y).unwrap()
}

pub fn forward_all(model: &Mlp, features: &hierlabel::Grid<f64>) -> hierlabel::Grid<f64> {
    let rows = features.iter_rows().map(|x| model.forward(x).unwrap()).collect();
    hierlabel::Grid::from_rows(model.output_dim(), rows).unwrap()
}
