//! Leave-one-subject-out cross-validation.
//!
//! Fold `f` tests on the `f`-th subject (ascending id order), validates on
//! the next subject cyclically and trains on the rest. Every (fold, run) pair
//! is an independent [`Job`] with its own derived seed, so callers may run
//! jobs in any order or in parallel and still get the same [`LosoReport`].

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, LabeledWindow};
use crate::gesture::GestureLabel;
use crate::math::argmax;
use crate::metrics::{
    add_confusion, confusion_matrix, mean_std, project_false_positives, Confusion, Metrics, WINDOWS_PER_HOUR,
};
use crate::nn::{GlobalPoolKind, Model, ModelSpec, Variant};
use crate::norm::{compute_norm_stats, NormStats};
use crate::optim::AdamConfig;
use crate::seed::derive;
use crate::train::{tensorize, train, History, TrainConfig};
use crate::window::{N_CHANNELS, WINDOW_LEN};
use crate::{Error, Result};

pub const MIN_SUBJECTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    /// 0-based fold index.
    pub index: usize,
    pub test_subject: u32,
    pub val_subject: u32,
    pub train_subjects: Vec<u32>,
}

pub fn plan_folds(subjects: &[u32]) -> Result<Vec<Fold>> {
    let mut ids = subjects.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let n = ids.len();
    if n < MIN_SUBJECTS {
        return Err(Error::InsufficientSubjects { needed: MIN_SUBJECTS, found: n });
    }
    Ok((0..n)
        .map(|f| {
            let test_subject = ids[f];
            let val_subject = ids[(f + 1) % n];
            let train_subjects = ids.iter().copied().filter(|&s| s != test_subject && s != val_subject).collect();
            Fold { index: f, test_subject, val_subject, train_subjects }
        })
        .collect())
}

/// The data one learner sees in one fold. `norm` is fitted on `train` only.
pub struct Split<'a> {
    pub train: Vec<&'a LabeledWindow>,
    pub val: Vec<&'a LabeledWindow>,
    pub test: Vec<&'a LabeledWindow>,
    pub norm: NormStats,
}

impl<'a> Split<'a> {
    pub fn new(dataset: &'a Dataset, fold: &Fold) -> Result<Self> {
        let pick = |ids: &[u32]| -> Vec<&'a LabeledWindow> {
            dataset.samples.iter().filter(|s| ids.contains(&s.subject_id)).collect()
        };
        let train = pick(&fold.train_subjects);
        let val = pick(&[fold.val_subject]);
        let test = pick(&[fold.test_subject]);
        if train.is_empty() || val.is_empty() || test.is_empty() {
            return Err(Error::Empty("a fold split has no samples"));
        }
        let norm = compute_norm_stats(train.iter().map(|s| &s.window))?;
        Ok(Split { train, val, test, norm })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub predictions: Vec<GestureLabel>,
    pub best_epoch: Option<usize>,
    pub epochs_run: Option<usize>,
}

/// Something that can be fitted on a split and predict its test subject.
pub trait Learner: Sync {
    fn name(&self) -> String;
    fn fit_predict(&self, split: &Split<'_>, seed: u64) -> Result<FitOutcome>;
}

impl<L: Learner + ?Sized + Send> Learner for Box<L> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn fit_predict(&self, split: &Split<'_>, seed: u64) -> Result<FitOutcome> {
        (**self).fit_predict(split, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub fold: usize,
    pub run: usize,
}

pub fn jobs(n_folds: usize, runs_per_fold: usize) -> Vec<Job> {
    (0..n_folds).flat_map(|fold| (0..runs_per_fold).map(move |run| Job { fold, run })).collect()
}

pub fn job_seed(master_seed: u64, job: Job) -> u64 {
    derive(master_seed, &[job.fold as u64, job.run as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub fold: usize,
    pub run: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub confusion: Confusion,
    pub best_epoch: Option<usize>,
    pub epochs_run: Option<usize>,
}

pub fn run_job<L: Learner + ?Sized>(
    dataset: &Dataset,
    folds: &[Fold],
    job: Job,
    master_seed: u64,
    learner: &L,
) -> Result<RunResult> {
    let fold =
        folds.get(job.fold).ok_or_else(|| Error::InvalidConfig(alloc::format!("fold {} out of range", job.fold)))?;
    let split = Split::new(dataset, fold)?;
    let seed = job_seed(master_seed, job);
    let out = learner.fit_predict(&split, seed)?;
    let truth: Vec<GestureLabel> = split.test.iter().map(|s| s.label).collect();
    let confusion = confusion_matrix(&truth, &out.predictions)?;
    let accuracy = Metrics::from_confusion(confusion)?.accuracy;
    Ok(RunResult {
        fold: job.fold,
        run: job.run,
        seed,
        accuracy,
        confusion,
        best_epoch: out.best_epoch,
        epochs_run: out.epochs_run,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    /// 1-based fold number.
    pub fold: usize,
    pub test_subject: u32,
    pub val_subject: u32,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub runs: Vec<RunResult>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosoReport {
    pub model: String,
    pub master_seed: u64,
    pub runs_per_fold: usize,
    pub per_fold: Vec<FoldReport>,
    /// Mean over folds of the per-fold mean accuracy.
    pub mean_accuracy: f64,
    /// Population spread of the per-fold mean accuracies.
    pub std_accuracy: f64,
    pub min_fold_accuracy: f64,
    pub max_fold_accuracy: f64,
    /// Summed over folds and runs.
    pub confusion: Confusion,
    pub per_class_precision: [f64; 6],
    pub per_class_recall: [f64; 6],
    pub per_class_f1: [f64; 6],
    pub macro_f1: f64,
    pub pooled_accuracy: f64,
    pub fp_per_hour: f64,
}

/// Collects run results (in any order) into a report.
pub fn assemble(
    model: String,
    dataset: &Dataset,
    folds: &[Fold],
    master_seed: u64,
    runs_per_fold: usize,
    mut results: Vec<RunResult>,
) -> Result<LosoReport> {
    results.sort_by_key(|r| (r.fold, r.run));
    let mut per_fold = Vec::with_capacity(folds.len());
    let mut pooled = [[0u64; 6]; 6];
    for fold in folds {
        let runs: Vec<RunResult> = results.iter().filter(|r| r.fold == fold.index).cloned().collect();
        if runs.len() != runs_per_fold {
            return Err(Error::InvalidConfig(alloc::format!(
                "fold {} has {} of {} runs",
                fold.index + 1,
                runs.len(),
                runs_per_fold
            )));
        }
        let accs: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
        let (mean_accuracy, std_accuracy) = mean_std(&accs);
        let mut fold_conf = [[0u64; 6]; 6];
        for r in &runs {
            add_confusion(&mut fold_conf, &r.confusion);
        }
        add_confusion(&mut pooled, &fold_conf);
        let count = |ids: &[u32]| dataset.samples.iter().filter(|s| ids.contains(&s.subject_id)).count();
        per_fold.push(FoldReport {
            fold: fold.index + 1,
            test_subject: fold.test_subject,
            val_subject: fold.val_subject,
            n_train: count(&fold.train_subjects),
            n_val: count(&[fold.val_subject]),
            n_test: count(&[fold.test_subject]),
            runs,
            mean_accuracy,
            std_accuracy,
            macro_f1: Metrics::from_confusion(fold_conf)?.macro_f1,
        });
    }
    let fold_means: Vec<f64> = per_fold.iter().map(|f| f.mean_accuracy).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&fold_means);
    let m = Metrics::from_confusion(pooled)?;
    Ok(LosoReport {
        model,
        master_seed,
        runs_per_fold,
        per_fold,
        mean_accuracy,
        std_accuracy,
        min_fold_accuracy: fold_means.iter().copied().fold(f64::INFINITY, f64::min),
        max_fold_accuracy: fold_means.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        confusion: pooled,
        per_class_precision: m.precision,
        per_class_recall: m.recall,
        per_class_f1: m.f1,
        macro_f1: m.macro_f1,
        pooled_accuracy: m.accuracy,
        fp_per_hour: project_false_positives(&m, WINDOWS_PER_HOUR),
    })
}

/// Sequential cross-validation.
pub fn loso_cv<L: Learner + ?Sized>(
    dataset: &Dataset,
    learner: &L,
    runs_per_fold: usize,
    master_seed: u64,
) -> Result<LosoReport> {
    if runs_per_fold == 0 {
        return Err(Error::InvalidConfig("runs per fold must be at least 1".into()));
    }
    let folds = plan_folds(&dataset.subjects())?;
    let results = jobs(folds.len(), runs_per_fold)
        .into_iter()
        .map(|j| run_job(dataset, &folds, j, master_seed, learner))
        .collect::<Result<Vec<_>>>()?;
    assemble(learner.name(), dataset, &folds, master_seed, runs_per_fold, results)
}

/// The CNN pipeline as a [`Learner`]: fresh initialization and data order for
/// every seed, early stopping on the validation subject.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnnLearner {
    pub variant: Variant,
    pub global_pool: GlobalPoolKind,
    pub train: TrainConfig,
    pub adam: AdamConfig,
}

impl CnnLearner {
    pub fn new(variant: Variant) -> Self {
        CnnLearner {
            variant,
            global_pool: GlobalPoolKind::Avg,
            train: TrainConfig::default(),
            adam: AdamConfig::default(),
        }
    }

    /// Builds and trains a model; `seed` drives initialization, shuffling and dropout.
    pub fn fit(
        &self,
        train_set: &[&LabeledWindow],
        val_set: &[&LabeledWindow],
        norm: NormStats,
        seed: u64,
    ) -> Result<(Model, History)> {
        let spec = ModelSpec::standard(self.variant, self.global_pool, norm, derive(seed, &[0]));
        let model = Model::new(spec)?;
        let a = tensorize(&model, train_set.iter().copied())?;
        let b = tensorize(&model, val_set.iter().copied())?;
        let cfg = TrainConfig { seed: derive(seed, &[1]), ..self.train };
        train(model, &a, &b, &cfg, &self.adam)
    }
}

/// Arg-max labels for a batch of windows.
pub fn predict_labels(model: &Model, samples: &[&LabeledWindow]) -> Result<Vec<GestureLabel>> {
    const CHUNK: usize = 64;
    let labels = &model.spec().labels;
    let mut out = Vec::with_capacity(samples.len());
    let mut x = Vec::with_capacity(CHUNK * N_CHANNELS * WINDOW_LEN);
    for chunk in samples.chunks(CHUNK) {
        x.clear();
        for s in chunk {
            x.extend_from_slice(crate::norm::normalize(&s.window, &model.spec().norm).as_slice());
        }
        let probs = model.forward_batch_normalized(&x)?;
        out.extend(probs.chunks_exact(labels.len()).map(|p| labels[argmax(p)]));
    }
    Ok(out)
}

impl Learner for CnnLearner {
    fn name(&self) -> String {
        String::from(self.variant.tag())
    }

    fn fit_predict(&self, split: &Split<'_>, seed: u64) -> Result<FitOutcome> {
        let (model, history) = self.fit(&split.train, &split.val, split.norm, seed)?;
        Ok(FitOutcome {
            predictions: predict_labels(&model, &split.test)?,
            best_epoch: Some(history.best_epoch),
            epochs_run: Some(history.epochs.len()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{DatasetMeta, Hand};
    use crate::window::ImuWindow;
    use proptest::prelude::*;

    #[test]
    fn seven_subjects_seven_folds() {
        let folds = plan_folds(&[1, 2, 3, 4, 5, 6, 7]).unwrap();
        assert_eq!(folds.len(), 7);
        for f in &folds {
            assert_eq!(f.train_subjects.len(), 5);
        }
        assert_eq!((folds[0].test_subject, folds[0].val_subject), (1, 2));
        assert_eq!((folds[6].test_subject, folds[6].val_subject), (7, 1));
    }

    #[test]
    fn too_few_subjects() {
        assert_eq!(plan_folds(&[4, 9, 4]), Err(Error::InsufficientSubjects { needed: 3, found: 2 }));
    }

    proptest! {
        #[test]
        fn folds_partition_subjects(ids in prop::collection::btree_set(0u32..1000, 3..12)) {
            let ids: Vec<u32> = ids.into_iter().collect();
            let folds = plan_folds(&ids).unwrap();
            let mut tested: Vec<u32> = folds.iter().map(|f| f.test_subject).collect();
            let mut validated: Vec<u32> = folds.iter().map(|f| f.val_subject).collect();
            tested.sort_unstable();
            validated.sort_unstable();
            prop_assert_eq!(&tested, &ids);
            prop_assert_eq!(&validated, &ids);
            for f in &folds {
                prop_assert!(f.test_subject != f.val_subject);
                prop_assert!(!f.train_subjects.contains(&f.test_subject));
                prop_assert!(!f.train_subjects.contains(&f.val_subject));
                prop_assert_eq!(f.train_subjects.len() + 2, ids.len());
            }
        }
    }

    /// Predicts the majority training label; enough to exercise the harness.
    struct Majority;

    impl Learner for Majority {
        fn name(&self) -> String {
            "majority".into()
        }
        fn fit_predict(&self, split: &Split<'_>, seed: u64) -> Result<FitOutcome> {
            let mut counts = [0usize; 6];
            for s in &split.train {
                counts[s.label.code()] += 1;
            }
            let best = (0..6).max_by_key(|&k| (counts[k], usize::MAX - k)).unwrap();
            let _ = seed;
            Ok(FitOutcome {
                predictions: alloc::vec![GestureLabel::ALL[best]; split.test.len()],
                best_epoch: None,
                epochs_run: None,
            })
        }
    }

    fn toy() -> Dataset {
        let mut samples = Vec::new();
        for subject in 1..=4u32 {
            for i in 0..(6 + subject as usize) {
                let v: Vec<f64> = (0..1500).map(|j| ((i * 7 + j) % 11) as f64 + subject as f64).collect();
                samples.push(LabeledWindow {
                    window: ImuWindow::from_vec(v).unwrap(),
                    label: GestureLabel::ALL[i % 6],
                    subject_id: subject,
                    hand: Hand::Right,
                });
            }
        }
        Dataset::new(samples, DatasetMeta::default()).unwrap()
    }

    #[test]
    fn report_shape_and_order_independence() {
        let ds = toy();
        let r = loso_cv(&ds, &Majority, 2, 5).unwrap();
        assert_eq!(r.per_fold.len(), 4);
        assert_eq!(r.per_fold[0].n_test, 7);
        assert_eq!(r.per_fold[0].n_val, 8);
        assert_eq!(r.per_fold[0].n_train, 9 + 10);
        let total: u64 = r.confusion.iter().flatten().sum();
        assert_eq!(total as usize, 2 * ds.len());

        let folds = plan_folds(&ds.subjects()).unwrap();
        let mut results: Vec<RunResult> =
            jobs(4, 2).into_iter().map(|j| run_job(&ds, &folds, j, 5, &Majority).unwrap()).collect();
        results.reverse();
        let r2 = assemble("majority".into(), &ds, &folds, 5, 2, results).unwrap();
        assert_eq!(r, r2);
    }

    #[test]
    fn missing_runs_are_detected() {
        let ds = toy();
        let folds = plan_folds(&ds.subjects()).unwrap();
        let results = alloc::vec![run_job(&ds, &folds, Job { fold: 0, run: 0 }, 1, &Majority).unwrap()];
        assert!(assemble("m".into(), &ds, &folds, 1, 1, results).is_err());
    }
}
