//! Cross-validation runs on a thread pool, and their reports.

use std::fmt::Write as _;

use morse_core::loso::{assemble, jobs, plan_folds, run_job, Learner, LosoReport};
use morse_core::{Dataset, GestureLabel};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::CliConfig;
use crate::{Error, Result};

/// Models the paper evaluates that this implementation leaves out.
pub const NOT_IMPLEMENTED: [&str; 1] = ["conv-lstm"];

/// LOSO with folds and runs spread over `pool`. Each job has its own seed
/// and results are sorted before assembly, so the report does not depend on
/// the thread count.
pub fn loso_parallel<L: Learner + ?Sized>(
    pool: &rayon::ThreadPool,
    dataset: &Dataset,
    learner: &L,
    runs_per_fold: usize,
    master_seed: u64,
) -> Result<LosoReport> {
    if runs_per_fold == 0 {
        return Err(Error::Usage("runs per fold must be at least 1".into()));
    }
    let folds = plan_folds(&dataset.subjects())?;
    let all = jobs(folds.len(), runs_per_fold);
    let results = pool.install(|| {
        all.par_iter()
            .map(|&j| run_job(dataset, &folds, j, master_seed, learner))
            .collect::<morse_core::Result<Vec<_>>>()
    })?;
    Ok(assemble(learner.name(), dataset, &folds, master_seed, runs_per_fold, results)?)
}

/// The JSON written by `loso --report`.
#[derive(Debug, Clone, Serialize)]
pub struct LosoFile<'a, C: Serialize> {
    #[serde(flatten)]
    pub report: &'a LosoReport,
    pub config: &'a CliConfig,
    pub learner: &'a C,
    pub not_implemented: [&'static str; 1],
}

pub fn loso_json<C: Serialize>(report: &LosoReport, config: &CliConfig, learner: &C) -> Result<String> {
    let file = LosoFile { report, config, learner, not_implemented: NOT_IMPLEMENTED };
    serde_json::to_string_pretty(&file).map_err(|e| Error::BadModel(e.to_string()))
}

fn class_header(s: &mut String, first: &str) {
    let _ = write!(s, "{first:<10}");
    for l in GestureLabel::ALL {
        let _ = write!(s, "{:>8}", l.short());
    }
    s.push('\n');
}

fn row(s: &mut String, name: &str, xs: &[f64]) {
    let _ = write!(s, "{name:<10}");
    for x in xs {
        let _ = write!(s, "{x:>8.4}");
    }
    s.push('\n');
}

/// Plain-text rendering of a cross-validation report.
pub fn loso_table(r: &LosoReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model {}  seed {}  runs/fold {}", r.model, r.master_seed, r.runs_per_fold);
    let _ = writeln!(
        s,
        "{:<5}{:>5}{:>5}{:>8}{:>7}{:>7}{:>9}{:>9}{:>9}",
        "fold", "test", "val", "train", "vali", "test", "acc", "std", "macroF1"
    );
    for f in &r.per_fold {
        let _ = writeln!(
            s,
            "{:<5}{:>5}{:>5}{:>8}{:>7}{:>7}{:>9.4}{:>9.4}{:>9.4}",
            f.fold,
            f.test_subject,
            f.val_subject,
            f.n_train,
            f.n_val,
            f.n_test,
            f.mean_accuracy,
            f.std_accuracy,
            f.macro_f1
        );
    }
    let _ = writeln!(
        s,
        "mean accuracy {:.4} +/- {:.4} (min {:.4}, max {:.4})",
        r.mean_accuracy, r.std_accuracy, r.min_fold_accuracy, r.max_fold_accuracy
    );
    let _ = writeln!(
        s,
        "pooled accuracy {:.4}  macro F1 {:.4}  false positives/hour {:.1}",
        r.pooled_accuracy, r.macro_f1, r.fp_per_hour
    );
    class_header(&mut s, "class");
    row(&mut s, "precision", &r.per_class_precision);
    row(&mut s, "recall", &r.per_class_recall);
    row(&mut s, "f1", &r.per_class_f1);
    class_header(&mut s, "truth\\pred");
    for (i, counts) in r.confusion.iter().enumerate() {
        let _ = write!(s, "{:<10}", GestureLabel::ALL[i].short());
        for c in counts {
            let _ = write!(s, "{c:>8}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "not implemented: {}", NOT_IMPLEMENTED.join(", "));
    s
}
