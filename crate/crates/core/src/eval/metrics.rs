//! Correlation, error and classification metrics for ΔΔG predictions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::calibrate::{fit_l1_line, l1_profile};
use crate::error::{Error, Result};

fn check_lengths(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Undefined("metric on fewer than 2 points"));
    }
    Ok(())
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|x| *x == xs[0])
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_lengths(xs, ys)?;
    if is_constant(xs) || is_constant(ys) {
        return Err(Error::Undefined("correlation of a constant vector"));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && xs[idx[end]] == xs[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_lengths(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// RMSE after the least-squares affine map of predictions onto labels, and
/// MAE after the L1-optimal affine map.
pub fn minimized_rmse_mae(preds: &[f64], labels: &[f64]) -> Result<(f64, f64)> {
    check_lengths(preds, labels)?;
    if is_constant(preds) {
        return Err(Error::Undefined("minimized error with constant predictions"));
    }
    let n = preds.len() as f64;
    let (mp, ml) = (mean(preds), mean(labels));
    let spl: f64 = preds.iter().zip(labels).map(|(p, l)| (p - mp) * (l - ml)).sum();
    let spp: f64 = preds.iter().map(|p| (p - mp) * (p - mp)).sum();
    let a = spl / spp;
    let b = ml - a * mp;
    let sse: f64 = preds
        .iter()
        .zip(labels)
        .map(|(p, l)| {
            let e = l - (a * p + b);
            e * e
        })
        .sum();
    let rmse = (sse / n).sqrt();

    // any L1 optimum passes through two points, bounding |slope|
    let mut sorted = preds.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|g| *g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let lmin = labels.iter().copied().fold(f64::INFINITY, f64::min);
    let lmax = labels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bound = ((lmax - lmin) / min_gap * 1.01).max(1e-12);
    let (_, _, objective) = fit_l1_line(preds, labels, (-bound, bound), |s| s, (-bound, bound));
    // a slope-0 line is always feasible
    let mae = objective.min(l1_profile(preds, labels, 0.0).0) / n;
    Ok((rmse, mae))
}

/// Rank-based AUROC of `preds` as a score for `label > 0`.
pub fn auroc(preds: &[f64], labels: &[f64]) -> Result<f64> {
    check_lengths(preds, labels)?;
    let positive: Vec<bool> = labels.iter().map(|l| *l > 0.0).collect();
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Undefined("AUROC with a single class"));
    }
    let ranks = average_ranks(preds);
    let rank_sum: f64 = ranks.iter().zip(&positive).filter(|(_, p)| **p).map(|(r, _)| r).sum();
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupCorrelation {
    pub complex_id: String,
    pub n: usize,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerStructure {
    pub pearson: f64,
    pub spearman: f64,
    pub groups: usize,
    pub excluded: usize,
    pub details: Vec<GroupCorrelation>,
}

/// Unweighted mean of within-complex correlations. Groups need at least two
/// records with non-constant labels and predictions.
pub fn per_structure_metrics(complex_ids: &[&str], preds: &[f64], labels: &[f64]) -> Result<PerStructure> {
    if complex_ids.len() != preds.len() || preds.len() != labels.len() {
        return Err(Error::InvalidArgument("per-structure inputs differ in length".into()));
    }
    let mut groups: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for ((id, p), l) in complex_ids.iter().zip(preds).zip(labels) {
        let g = groups.entry(id).or_default();
        g.0.push(*p);
        g.1.push(*l);
    }
    let mut details = Vec::with_capacity(groups.len());
    let (mut sum_p, mut sum_s, mut eligible) = (0.0, 0.0, 0usize);
    for (id, (p, l)) in &groups {
        let ok = p.len() >= 2 && !is_constant(p) && !is_constant(l);
        let (pe, sp) = if ok {
            let pe = pearson(p, l)?;
            let sp = spearman(p, l)?;
            sum_p += pe;
            sum_s += sp;
            eligible += 1;
            (Some(pe), Some(sp))
        } else {
            (None, None)
        };
        details.push(GroupCorrelation {
            complex_id: id.to_string(),
            n: p.len(),
            pearson: pe,
            spearman: sp,
        });
    }
    if eligible == 0 {
        return Err(Error::Undefined("per-structure correlation with no eligible groups"));
    }
    Ok(PerStructure {
        pearson: sum_p / eligible as f64,
        spearman: sum_s / eligible as f64,
        groups: eligible,
        excluded: groups.len() - eligible,
        details,
    })
}

/// The seven benchmark metrics; entries are `None` when undefined on the set.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n: usize,
    pub per_structure_pearson: Option<f64>,
    pub per_structure_spearman: Option<f64>,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub minimized_rmse: Option<f64>,
    pub minimized_mae: Option<f64>,
    pub auroc: Option<f64>,
    pub groups: usize,
    pub excluded_groups: usize,
}

impl MetricsReport {
    pub fn compute(complex_ids: &[&str], preds: &[f64], labels: &[f64]) -> Self {
        let per = per_structure_metrics(complex_ids, preds, labels).ok();
        let errors = minimized_rmse_mae(preds, labels).ok();
        let groups: std::collections::BTreeSet<_> = complex_ids.iter().collect();
        Self {
            n: preds.len(),
            per_structure_pearson: per.as_ref().map(|p| p.pearson),
            per_structure_spearman: per.as_ref().map(|p| p.spearman),
            pearson: pearson(preds, labels).ok(),
            spearman: spearman(preds, labels).ok(),
            minimized_rmse: errors.map(|e| e.0),
            minimized_mae: errors.map(|e| e.1),
            auroc: auroc(preds, labels).ok(),
            groups: per.as_ref().map_or(0, |p| p.groups),
            excluded_groups: per.as_ref().map_or(groups.len(), |p| p.excluded),
        }
    }

    pub const COLUMNS: [&'static str; 7] = [
        "per_structure_pearson",
        "per_structure_spearman",
        "pearson",
        "spearman",
        "minimized_rmse",
        "minimized_mae",
        "auroc",
    ];

    pub fn values(&self) -> [Option<f64>; 7] {
        [
            self.per_structure_pearson,
            self.per_structure_spearman,
            self.pearson,
            self.spearman,
            self.minimized_rmse,
            self.minimized_mae,
            self.auroc,
        ]
    }

    /// Metric-wise mean over reports where the metric is defined.
    pub fn mean_of(reports: &[MetricsReport]) -> Self {
        let avg = |k: usize| {
            let vals: Vec<f64> = reports.iter().filter_map(|r| r.values()[k]).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        Self {
            n: reports.iter().map(|r| r.n).sum(),
            per_structure_pearson: avg(0),
            per_structure_spearman: avg(1),
            pearson: avg(2),
            spearman: avg(3),
            minimized_rmse: avg(4),
            minimized_mae: avg(5),
            auroc: avg(6),
            groups: reports.iter().map(|r| r.groups).sum(),
            excluded_groups: reports.iter().map(|r| r.excluded_groups).sum(),
        }
    }
}
