//! Two-stage conditional training, the flat baseline, and ensembles.
//!
//! Stage 1 trains on the conditional subset: a label contributes to the loss
//! only on rows where every one of its ancestors is annotated positive.
//! Stage 2 freezes every layer but the last and retrains on the full data.
//! At inference the conditional outputs are propagated down the hierarchy
//! and, for ensembles, averaged afterwards.
//!
//! Mini-batches are contiguous slices of a per-epoch shuffle (no
//! replacement). An epoch is `ceil(N / batch_size)` steps; the learning rate
//! follows [`lr_schedule`] by epoch. Each batch minimizes the mean
//! cross-entropy over all of its masked-in cells.

use std::num::NonZeroUsize;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{conditional_mask, missing_as_negative, Dataset};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hierarchy::LabelTree;
use crate::model::{adam_step, freeze_all_but_last, lr_schedule, AdamState, Gradients, Mlp, OptimizerConfig};
use crate::policy::{apply_policy, LossMask, SoftTargets, UncertaintyPolicy};
use crate::rng::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Conditional,
    Flat,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conditional" => Ok(Mode::Conditional),
            "flat" => Ok(Mode::Flat),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected conditional or flat)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainPlan {
    pub policy: UncertaintyPolicy,
    pub optimizer: OptimizerConfig,
    pub stage1_iterations: usize,
    pub stage2_iterations: usize,
    pub conditional: bool,
    /// Seed for the smoothing draws of [`apply_policy`].
    pub policy_seed: u64,
    /// Treat blank annotations as negative instead of masking them out.
    pub missing_as_negative: bool,
}

impl TrainPlan {
    /// Both stages get `optimizer.iterations` steps.
    pub fn new(policy: UncertaintyPolicy, optimizer: OptimizerConfig, mode: Mode) -> Self {
        TrainPlan {
            policy,
            stage1_iterations: optimizer.iterations,
            stage2_iterations: optimizer.iterations,
            optimizer,
            conditional: mode == Mode::Conditional,
            policy_seed: 0,
            missing_as_negative: false,
        }
    }

    pub fn mode(&self) -> Mode {
        if self.conditional {
            Mode::Conditional
        } else {
            Mode::Flat
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        self.optimizer.validate()
    }

    /// Soft targets and the policy mask for `data`.
    pub fn targets(&self, data: &Dataset) -> Result<(SoftTargets, LossMask)> {
        if self.missing_as_negative {
            apply_policy(&missing_as_negative(&data.labels), &self.policy, self.policy_seed)
        } else {
            apply_policy(&data.labels, &self.policy, self.policy_seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub stage: String,
    pub epoch: usize,
    pub steps: usize,
    pub lr: f64,
    pub mean_loss: f64,
}

/// A trained model with its final optimizer state and loss history.
#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: Mlp,
    pub state: AdamState,
    pub log: Vec<EpochLoss>,
}

const STAGE_FIRST: u64 = 1;
const STAGE_FINETUNE: u64 = 2;

struct Stage<'a> {
    name: &'a str,
    tag: u64,
    iterations: usize,
}

fn check_compat(model: &Mlp, data: &Dataset) -> Result<()> {
    if model.input_dim() != data.feature_dim() || model.output_dim() != data.num_labels() {
        return Err(Error::Shape(format!(
            "model maps {} -> {}, data has {} features and {} labels",
            model.input_dim(),
            model.output_dim(),
            data.feature_dim(),
            data.num_labels()
        )));
    }
    Ok(())
}

fn run_stage(
    mut model: Mlp,
    data: &Dataset,
    targets: &SoftTargets,
    mask: &LossMask,
    opt: &OptimizerConfig,
    stage: Stage<'_>,
) -> Result<Trained> {
    check_compat(&model, data)?;
    opt.validate()?;
    if mask.count_true() == 0 {
        return Err(Error::EmptySignal);
    }
    let n = data.len();
    let batch = opt.batch_size.min(n);
    let steps_per_epoch = n.div_ceil(batch);

    let mut state = AdamState::new(&model);
    let mut rng = rng::chacha(opt.seed, &[stream::SHUFFLE, stage.tag]);
    let mut order: Vec<usize> = (0..n).collect();
    let mut log = Vec::new();
    let (mut epoch_loss, mut epoch_steps) = (0.0, 0usize);

    for step in 0..stage.iterations {
        let epoch = step / steps_per_epoch;
        let pos = step % steps_per_epoch;
        if pos == 0 {
            order.shuffle(&mut rng);
        }
        let lr = lr_schedule(opt, epoch);
        let rows = &order[pos * batch..((pos + 1) * batch).min(n)];

        let cells: usize = rows
            .iter()
            .map(|&r| mask.row(r).iter().filter(|&&m| m).count())
            .sum();
        if cells > 0 {
            let weight = 1.0 / cells as f64;
            let mut grads = Gradients::zeros_like(&model);
            let mut loss = 0.0;
            for &r in rows {
                loss += model.accumulate(
                    data.features.row(r),
                    targets.row(r),
                    mask.row(r),
                    weight,
                    &mut grads,
                )?;
            }
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "{} loss at step {step}",
                    stage.name
                )));
            }
            adam_step(&mut model, &mut state, &grads, opt, lr)?;
            epoch_loss += loss;
            epoch_steps += 1;
        }

        if pos + 1 == steps_per_epoch || step + 1 == stage.iterations {
            log.push(EpochLoss {
                stage: stage.name.to_string(),
                epoch,
                steps: epoch_steps,
                lr,
                mean_loss: if epoch_steps == 0 {
                    0.0
                } else {
                    epoch_loss / epoch_steps as f64
                },
            });
            epoch_loss = 0.0;
            epoch_steps = 0;
        }
    }
    Ok(Trained { model, state, log })
}

/// Conditional pre-training: policy mask AND the ancestors-positive mask.
pub fn train_stage1(model: Mlp, data: &Dataset, tree: &LabelTree, plan: &TrainPlan) -> Result<Trained> {
    plan.validate()?;
    let (targets, policy_mask) = plan.targets(data)?;
    let labels = if plan.missing_as_negative {
        missing_as_negative(&data.labels)
    } else {
        data.labels.clone()
    };
    let mask = policy_mask.and(&conditional_mask(&labels, tree)?)?;
    run_stage(
        model,
        data,
        &targets,
        &mask,
        &plan.optimizer,
        Stage {
            name: "stage1",
            tag: STAGE_FIRST,
            iterations: plan.stage1_iterations,
        },
    )
}

/// Fine-tuning of the output layer on the full data, hidden layers frozen.
pub fn train_stage2(model: Mlp, data: &Dataset, plan: &TrainPlan) -> Result<Trained> {
    plan.validate()?;
    let (targets, mask) = plan.targets(data)?;
    let model = freeze_all_but_last(model);
    let hidden: Vec<_> = model.layers()[..model.layers().len() - 1].to_vec();
    let trained = run_stage(
        model,
        data,
        &targets,
        &mask,
        &plan.optimizer,
        Stage {
            name: "stage2",
            tag: STAGE_FINETUNE,
            iterations: plan.stage2_iterations,
        },
    )?;
    let layers = trained.model.layers();
    assert_eq!(
        &layers[..layers.len() - 1],
        hidden.as_slice(),
        "frozen layers changed during fine-tuning"
    );
    Ok(trained)
}

/// Single-stage training on the policy mask only. Uses the stage-1 budget
/// and shuffle stream, so on a hierarchy of independent roots it reproduces
/// [`train_stage1`] bit for bit.
pub fn train_flat(model: Mlp, data: &Dataset, plan: &TrainPlan) -> Result<Trained> {
    plan.validate()?;
    let (targets, mask) = plan.targets(data)?;
    run_stage(
        model,
        data,
        &targets,
        &mask,
        &plan.optimizer,
        Stage {
            name: "flat",
            tag: STAGE_FIRST,
            iterations: plan.stage1_iterations,
        },
    )
}

/// Output of one member's training run.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberRun {
    /// Stage-1 result (conditional mode only).
    pub stage1: Option<Trained>,
    /// The final model: stage 2 in conditional mode, the flat model otherwise.
    pub last: Trained,
}

impl MemberRun {
    pub fn log(&self) -> Vec<EpochLoss> {
        let mut log = self.stage1.as_ref().map(|s| s.log.clone()).unwrap_or_default();
        log.extend(self.last.log.iter().cloned());
        log
    }
}

/// Runs the plan's mode on a fresh model.
///
/// On a hierarchy of independent roots the conditional mask is all true, so
/// stage 1 has already seen the full dataset; stage 2 then only freezes and
/// the result predicts exactly like flat training.
pub fn train_member(model: Mlp, data: &Dataset, tree: &LabelTree, plan: &TrainPlan) -> Result<MemberRun> {
    if plan.conditional {
        let stage1 = train_stage1(model, data, tree, plan)?;
        let last = if tree.is_flat() {
            let plan = TrainPlan {
                stage2_iterations: 0,
                ..plan.clone()
            };
            train_stage2(stage1.model.clone(), data, &plan)?
        } else {
            train_stage2(stage1.model.clone(), data, plan)?
        };
        Ok(MemberRun {
            stage1: Some(stage1),
            last,
        })
    } else {
        Ok(MemberRun {
            stage1: None,
            last: train_flat(model, data, plan)?,
        })
    }
}

/// Seeds for ensemble member `index`: (model init, optimizer/shuffle).
pub fn member_seeds(run_seed: u64, index: usize) -> (u64, u64) {
    (
        rng::derive(run_seed, &[stream::MEMBER, index as u64, 0]),
        rng::derive(run_seed, &[stream::MEMBER, index as u64, 1]),
    )
}

/// Trains `members` independently seeded models, fanning out over at most
/// `threads` workers. Results are in member order and do not depend on the
/// thread count.
pub fn train_ensemble(
    data: &Dataset,
    tree: &LabelTree,
    plan: &TrainPlan,
    dims: &[usize],
    members: usize,
    run_seed: u64,
    threads: NonZeroUsize,
) -> Result<Vec<MemberRun>> {
    if members == 0 {
        return Err(Error::Config("ensemble size must be >= 1".into()));
    }
    plan.validate()?;
    let train_one = |i: usize| -> Result<MemberRun> {
        let (init_seed, opt_seed) = member_seeds(run_seed, i);
        let mut member_plan = plan.clone();
        member_plan.optimizer.seed = opt_seed;
        train_member(Mlp::new(dims, init_seed)?, data, tree, &member_plan)
    };

    let workers = threads.get().min(members);
    let mut slots: Vec<Option<Result<MemberRun>>> = (0..members).map(|_| None).collect();
    if workers == 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(train_one(i));
        }
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let train_one = &train_one;
                    scope.spawn(move || {
                        (w..members)
                            .step_by(workers)
                            .map(|i| (i, train_one(i)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("training worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
    }
    slots.into_iter().map(|s| s.expect("every member ran")).collect()
}

/// Trained members sharing one hierarchy and policy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    members: Vec<Mlp>,
    /// Whether members emit conditionals that need propagating.
    pub conditional: bool,
}

impl EnsembleModel {
    pub fn new(members: Vec<Mlp>, conditional: bool) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Config("ensemble has no members".into()))?;
        let (f, k) = (first.input_dim(), first.output_dim());
        if members.iter().any(|m| m.input_dim() != f || m.output_dim() != k) {
            return Err(Error::Shape("ensemble members disagree on dimensions".into()));
        }
        Ok(EnsembleModel {
            members,
            conditional,
        })
    }

    pub fn members(&self) -> &[Mlp] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Unconditional probabilities: propagated when the members were trained
    /// conditionally, raw outputs for flat members.
    pub fn predict(&self, tree: &LabelTree, x: &[f64]) -> Result<Vec<f64>> {
        if self.conditional {
            predict_unconditional(&self.members, tree, x)
        } else {
            let outputs = self
                .members
                .iter()
                .map(|m| m.forward(x))
                .collect::<Result<Vec<_>>>()?;
            Ok(average(&outputs))
        }
    }

    pub fn predict_all(&self, tree: &LabelTree, features: &Grid<f64>) -> Result<Grid<f64>> {
        let rows = features
            .iter_rows()
            .map(|x| self.predict(tree, x))
            .collect::<Result<Vec<_>>>()?;
        Grid::from_rows(self.members[0].output_dim(), rows)
    }
}

/// Running mean, clamped to the per-label member range. Identical members
/// reproduce their output exactly.
fn average(outputs: &[Vec<f64>]) -> Vec<f64> {
    let k = outputs[0].len();
    (0..k)
        .map(|j| {
            let mut mean = outputs[0][j];
            let (mut lo, mut hi) = (mean, mean);
            for (i, out) in outputs.iter().enumerate().skip(1) {
                let v = out[j];
                mean += (v - mean) / (i + 1) as f64;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            mean.clamp(lo, hi)
        })
        .collect()
}

/// Mean over members of the propagated member outputs.
pub fn predict_unconditional(members: &[Mlp], tree: &LabelTree, x: &[f64]) -> Result<Vec<f64>> {
    if members.is_empty() {
        return Err(Error::Config("ensemble has no members".into()));
    }
    let outputs = members
        .iter()
        .map(|m| tree.propagate(&m.forward(x)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(average(&outputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticSpec};
    use crate::hierarchy::NodeSpec;

    fn chain() -> LabelTree {
        LabelTree::build(&[NodeSpec::root("A"), NodeSpec::child("B", "A")]).unwrap()
    }

    fn small_plan(iterations: usize) -> TrainPlan {
        let opt = OptimizerConfig {
            lr0: 0.01,
            decay_factor: 0.9,
            iterations,
            ..Default::default()
        };
        TrainPlan::new(UncertaintyPolicy::ONES, opt, Mode::Conditional)
    }

    fn data(tree: &LabelTree, n: usize) -> Dataset {
        let spec = SyntheticSpec {
            tree: tree.clone(),
            theta: vec![0.5; tree.len()],
            feature_noise: 0.5,
            features: 4,
        };
        generate_synthetic(&spec, n, 3).unwrap().0
    }

    #[test]
    fn empty_signal_is_an_error() {
        let t = chain();
        let mut d = data(&t, 20);
        d.labels = d.labels.map(|_| crate::data::Label::Missing);
        let m = Mlp::new(&[4, 3, 2], 0).unwrap();
        assert!(matches!(
            train_stage1(m, &d, &t, &small_plan(5)),
            Err(Error::EmptySignal)
        ));
    }

    #[test]
    fn zero_stage2_iterations_only_freezes() {
        let t = chain();
        let d = data(&t, 40);
        let m = Mlp::new(&[4, 3, 2], 1).unwrap();
        let mut plan = small_plan(10);
        plan.stage2_iterations = 0;
        let out = train_stage2(m.clone(), &d, &plan).unwrap();
        assert_eq!(out.model, freeze_all_but_last(m));
    }

    #[test]
    fn incompatible_model_rejected() {
        let t = chain();
        let d = data(&t, 10);
        let m = Mlp::new(&[5, 3, 2], 1).unwrap();
        assert!(matches!(train_flat(m, &d, &small_plan(3)), Err(Error::Shape(_))));
    }

    #[test]
    fn ensemble_needs_members() {
        let t = chain();
        assert!(predict_unconditional(&[], &t, &[0.0; 4]).is_err());
        assert!(EnsembleModel::new(vec![], true).is_err());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let t = chain();
        let d = data(&t, 64);
        let plan = small_plan(8);
        let one = train_ensemble(&d, &t, &plan, &[4, 3, 2], 3, 5, NonZeroUsize::new(1).unwrap()).unwrap();
        let three = train_ensemble(&d, &t, &plan, &[4, 3, 2], 3, 5, NonZeroUsize::new(3).unwrap()).unwrap();
        assert_eq!(one, three);
        assert_ne!(one[0].last.model, one[1].last.model);
    }

    #[test]
    fn log_covers_every_epoch() {
        let t = chain();
        let d = data(&t, 40); // 2 steps per epoch at batch 32
        let out = train_flat(Mlp::new(&[4, 3, 2], 2).unwrap(), &d, &small_plan(5)).unwrap();
        let epochs: Vec<_> = out.log.iter().map(|e| e.epoch).collect();
        assert_eq!(epochs, vec![0, 1, 2]);
        assert_eq!(out.state.t, 5);
    }
}
