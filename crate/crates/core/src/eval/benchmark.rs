//! Cross-validated ΔΔG benchmark: score every record once, then per fold fit
//! a calibration on the training folds and evaluate the held-out fold.

use rayon::prelude::*;
use serde::Serialize;

use crate::calibrate::{fit_calibration, Calibration, CalibrationFile, Loss, Provenance};
use crate::cycle::{ddg, CycleInput, EnergyEstimate, Estimator};
use crate::error::{Error, Result};
use crate::scorer::{OrderPolicy, ScorerHandle};

use super::dataset::{DatasetRecord, StructureStore};
use super::folds::{make_folds, FoldAssignment};
use super::metrics::{per_structure_metrics, GroupCorrelation, MetricsReport};

/// Raw (kT = 1, bias = 0) estimate for one record.
pub fn score_record(
    record: &DatasetRecord,
    store: &StructureStore,
    scorer: &ScorerHandle,
    estimator: Estimator,
    orders: &OrderPolicy,
) -> Result<EnergyEstimate> {
    let model = store.get(&record.pdb_path)?;
    let input = CycleInput::new(model, &record.partition, &record.mutations, scorer).with_orders(*orders);
    ddg(&input, &Calibration::default(), estimator)
}

/// Scores records in parallel; results keep input order.
pub fn score_records(
    records: &[DatasetRecord],
    store: &StructureStore,
    scorer: &ScorerHandle,
    estimator: Estimator,
    orders: &OrderPolicy,
) -> Vec<Result<EnergyEstimate>> {
    records
        .par_iter()
        .map(|r| score_record(r, store, scorer, estimator, orders))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkConfig {
    pub estimator: Estimator,
    pub n_folds: usize,
    pub seed: u64,
    /// Fit a calibration per fold; otherwise kT = 1, bias = 0.
    pub supervised: bool,
    pub loss: Loss,
    pub orders: OrderPolicy,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            estimator: Estimator::Cycle,
            n_folds: 3,
            seed: 0,
            supervised: true,
            loss: Loss::L1,
            orders: OrderPolicy::Canonical,
        }
    }
}

/// A scored, labeled record.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub index: usize,
    pub complex_id: String,
    pub r: f64,
    pub label: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecordFailure {
    pub index: usize,
    pub line: usize,
    pub complex_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub index: usize,
    pub complex_id: String,
    pub fold: usize,
    pub label: f64,
    pub r: f64,
    pub ddg_pred: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub calibration: CalibrationFile,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub assignment: FoldAssignment,
    pub folds: Vec<FoldReport>,
    /// Mean of per-fold metrics.
    pub mean: MetricsReport,
    /// Metrics over all held-out predictions together.
    pub pooled: MetricsReport,
    pub excluded: Vec<RecordFailure>,
    #[serde(skip)]
    pub predictions: Vec<Prediction>,
    #[serde(skip)]
    pub groups: Vec<GroupCorrelation>,
}

pub fn run_benchmark(
    records: &[DatasetRecord],
    store: &StructureStore,
    scorer: &ScorerHandle,
    config: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    let scored = score_records(records, store, scorer, config.estimator, &config.orders);
    let mut observations = Vec::with_capacity(records.len());
    let mut excluded = Vec::new();
    for (record, result) in records.iter().zip(scored) {
        let failure = |reason: String| RecordFailure {
            index: record.index,
            line: record.line,
            complex_id: record.complex_id.clone(),
            reason,
        };
        match (result, record.ddg_label) {
            (Ok(est), Some(label)) => observations.push(Observation {
                index: record.index,
                complex_id: record.complex_id.clone(),
                r: est.r,
                label,
            }),
            (Ok(_), None) => excluded.push(failure("record has no ddg_label".into())),
            (Err(e), _) => {
                log::warn!("record {} ({}): {e}", record.index, record.complex_id);
                excluded.push(failure(e.to_string()));
            }
        }
    }
    let assignment = make_folds(
        records.iter().map(|r| r.complex_id.as_str()),
        config.n_folds,
        config.seed,
    )?;
    let mut report = evaluate_folds(&observations, &assignment, config)?;
    report.excluded = excluded;
    Ok(report)
}

/// Fold-level evaluation of pre-scored observations.
pub fn evaluate_folds(
    observations: &[Observation],
    assignment: &FoldAssignment,
    config: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    let fold_of = |o: &Observation| {
        assignment
            .fold(&o.complex_id)
            .ok_or_else(|| Error::Dataset(format!("complex {} has no fold", o.complex_id)))
    };
    let folds_idx: Vec<usize> = observations.iter().map(fold_of).collect::<Result<_>>()?;

    let mut folds = Vec::with_capacity(assignment.n_folds);
    let mut predictions = Vec::with_capacity(observations.len());
    for fold in 0..assignment.n_folds {
        let train: Vec<(f64, f64)> = observations
            .iter()
            .zip(&folds_idx)
            .filter(|(_, f)| **f != fold)
            .map(|(o, _)| (o.r, o.label))
            .collect();
        let (calibration, objective) = if config.supervised {
            let fit = fit_calibration(&train, config.loss)?;
            let mut c = fit.calibration;
            c.provenance = Provenance::Fitted { fold: Some(fold) };
            (c, Some(fit.objective))
        } else {
            (Calibration::default(), None)
        };

        let test: Vec<&Observation> = observations
            .iter()
            .zip(&folds_idx)
            .filter(|(_, f)| **f == fold)
            .map(|(o, _)| o)
            .collect();
        let preds: Vec<f64> = test.iter().map(|o| calibration.apply(o.r)).collect();
        let labels: Vec<f64> = test.iter().map(|o| o.label).collect();
        let ids: Vec<&str> = test.iter().map(|o| o.complex_id.as_str()).collect();
        let metrics = MetricsReport::compute(&ids, &preds, &labels);
        for (o, p) in test.iter().zip(&preds) {
            predictions.push(Prediction {
                index: o.index,
                complex_id: o.complex_id.clone(),
                fold,
                label: o.label,
                r: o.r,
                ddg_pred: *p,
            });
        }
        folds.push(FoldReport {
            fold,
            n_train: train.len(),
            n_test: test.len(),
            calibration: CalibrationFile {
                kt: calibration.kt(),
                bias: calibration.bias(),
                fold: Some(fold),
                objective,
            },
            metrics,
        });
    }
    predictions.sort_by_key(|p| p.index);

    let ids: Vec<&str> = predictions.iter().map(|p| p.complex_id.as_str()).collect();
    let preds: Vec<f64> = predictions.iter().map(|p| p.ddg_pred).collect();
    let labels: Vec<f64> = predictions.iter().map(|p| p.label).collect();
    let pooled = MetricsReport::compute(&ids, &preds, &labels);
    let groups = per_structure_metrics(&ids, &preds, &labels)
        .map(|p| p.details)
        .unwrap_or_default();
    let mean = MetricsReport::mean_of(&folds.iter().map(|f| f.metrics.clone()).collect::<Vec<_>>());
    Ok(BenchmarkReport {
        config: *config,
        assignment: assignment.clone(),
        folds,
        mean,
        pooled,
        excluded: Vec::new(),
        predictions,
        groups,
    })
}
