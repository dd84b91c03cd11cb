//! Temperature/offset calibration: `ddg = -kT · r + bias`, fitted by
//! minimizing absolute (default) or squared error against labels.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KT_MIN: f64 = 1e-4;
pub const KT_MAX: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Default,
    Manual,
    Fitted { fold: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    kt: f64,
    bias: f64,
    pub provenance: Provenance,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            kt: 1.0,
            bias: 0.0,
            provenance: Provenance::Default,
        }
    }
}

impl Calibration {
    pub fn new(kt: f64, bias: f64) -> Result<Self> {
        if !(kt > 0.0 && kt.is_finite()) || !bias.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "calibration needs finite kT > 0 and finite bias (got {kt}, {bias})"
            )));
        }
        Ok(Self {
            kt,
            bias,
            provenance: Provenance::Manual,
        })
    }

    pub fn kt(&self) -> f64 {
        self.kt
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn apply(&self, r: f64) -> f64 {
        apply_calibration(self, r)
    }

    pub fn fold(&self) -> Option<usize> {
        match self.provenance {
            Provenance::Fitted { fold } => fold,
            _ => None,
        }
    }
}

pub fn apply_calibration(calib: &Calibration, r: f64) -> f64 {
    -calib.kt * r + calib.bias
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    #[default]
    L1,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationFit {
    pub calibration: Calibration,
    /// Sum of absolute (L1) or squared (L2) residuals at the fit.
    pub objective: f64,
}

/// On-disk form: `{"kT": .., "bias": .., "fold": .., "objective": ..}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationFile {
    #[serde(rename = "kT")]
    pub kt: f64,
    pub bias: f64,
    pub fold: Option<usize>,
    pub objective: Option<f64>,
}

impl CalibrationFile {
    pub fn from_fit(fit: &CalibrationFit) -> Self {
        Self {
            kt: fit.calibration.kt,
            bias: fit.calibration.bias,
            fold: fit.calibration.fold(),
            objective: Some(fit.objective),
        }
    }

    pub fn calibration(&self) -> Result<Calibration> {
        let mut c = Calibration::new(self.kt, self.bias)?;
        c.provenance = Provenance::Fitted { fold: self.fold };
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// For a fixed slope, the L1-optimal intercept (median residual) and the
/// resulting sum of absolute residuals of `y ≈ slope·x + intercept`.
pub(crate) fn l1_profile(xs: &[f64], ys: &[f64], slope: f64) -> (f64, f64) {
    let mut residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - slope * x).collect();
    let intercept = median(&mut residuals);
    let objective = residuals.iter().map(|e| (e - intercept).abs()).sum();
    (objective, intercept)
}

/// Minimizer of a unimodal `f` on `[lo, hi]`.
pub(crate) fn golden_section(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (hi - lo).abs() <= tol {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// L1 line fit with the slope restricted to `[slope_lo, slope_hi]`.
///
/// `search` maps the golden-section variable on `[u_lo, u_hi]` to a slope.
/// The golden-section result is polished by trying lines through pairs of
/// the points it fits most closely, since an L1 optimum passes through two
/// data points.
pub(crate) fn fit_l1_line(
    xs: &[f64],
    ys: &[f64],
    (u_lo, u_hi): (f64, f64),
    search: impl Fn(f64) -> f64,
    (slope_lo, slope_hi): (f64, f64),
) -> (f64, f64, f64) {
    let profile = |u: f64| l1_profile(xs, ys, search(u)).0;
    let tol = 1e-13 * (u_hi - u_lo).abs().max(1.0);
    let u = golden_section(u_lo, u_hi, profile, tol);

    let start = search(u);
    let (obj, b) = l1_profile(xs, ys, start);
    // (slope, intercept, objective)
    let mut best = (start, b, obj);
    let consider = |best: &mut (f64, f64, f64), slope: f64| {
        if !(slope >= slope_lo && slope <= slope_hi) {
            return;
        }
        let (obj, b) = l1_profile(xs, ys, slope);
        if obj < best.2 {
            *best = (slope, b, obj);
        }
    };
    consider(&mut best, slope_lo);
    consider(&mut best, slope_hi);

    let (s0, b0) = (best.0, best.1);
    let residual = |i: usize| (ys[i] - s0 * xs[i] - b0).abs();
    let mut closest: Vec<usize> = (0..xs.len()).collect();
    closest.sort_by(|&a, &b| residual(a).total_cmp(&residual(b)));
    closest.truncate(6);
    for (k, &i) in closest.iter().enumerate() {
        for &j in &closest[k + 1..] {
            if xs[i] != xs[j] {
                consider(&mut best, (ys[i] - ys[j]) / (xs[i] - xs[j]));
            }
        }
    }
    best
}

fn check_pairs(pairs: &[(f64, f64)]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("calibration pairs"));
    }
    if pairs.len() < 2 {
        return Err(Error::DegenerateFit("need at least 2 pairs".into()));
    }
    if pairs.iter().any(|(r, y)| !r.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidArgument("non-finite calibration pair".into()));
    }
    let r0 = pairs[0].0;
    if pairs.iter().all(|(r, _)| *r == r0) {
        return Err(Error::DegenerateFit("raw log-ratio is constant".into()));
    }
    Ok(())
}

/// Fits `(kT, bias)` to `(r, label)` pairs with `kT ∈ [1e-4, 1e4]`.
///
/// L1: golden-section search on `ln kT` with the exact median bias at each
/// trial kT. L2: closed-form least squares with kT clamped to the range.
pub fn fit_calibration(pairs: &[(f64, f64)], loss: Loss) -> Result<CalibrationFit> {
    check_pairs(pairs)?;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (kt, bias, objective) = match loss {
        Loss::L1 => {
            let (slope, bias, objective) =
                fit_l1_line(&xs, &ys, (KT_MIN.ln(), KT_MAX.ln()), |u| -u.exp(), (-KT_MAX, -KT_MIN));
            (-slope, bias, objective)
        }
        Loss::L2 => {
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let kt = (-sxy / sxx).clamp(KT_MIN, KT_MAX);
            let bias = my + kt * mx;
            let objective = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| {
                    let e = y - (-kt * x + bias);
                    e * e
                })
                .sum();
            (kt, bias, objective)
        }
    };
    let mut calibration = Calibration::new(kt, bias)?;
    calibration.provenance = Provenance::Fitted { fold: None };
    Ok(CalibrationFit { calibration, objective })
}

/// Objective of an arbitrary calibration on `pairs` under `loss`.
pub fn calibration_objective(calib: &Calibration, pairs: &[(f64, f64)], loss: Loss) -> f64 {
    pairs
        .iter()
        .map(|&(r, y)| {
            let e = y - calib.apply(r);
            match loss {
                Loss::L1 => e.abs(),
                Loss::L2 => e * e,
            }
        })
        .sum()
}
