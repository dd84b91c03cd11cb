use serde::{Deserialize, Serialize};

use crate::amino::{AminoAcid, NUM_AMINO_ACIDS};
use crate::structure::SiteRef;

pub type LogProbVector = [f64; NUM_AMINO_ACIDS];

/// Per-step conditional log-probabilities along one decoding order.
///
/// `steps[t]` is the distribution for `order[t]` given the fixed context and
/// the realized amino acids `realized[..t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogProbTable {
    pub fingerprint: String,
    pub order: Vec<SiteRef>,
    pub steps: Vec<LogProbVector>,
    pub realized: Vec<AminoAcid>,
}

impl LogProbTable {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Log-likelihood of the realized sequence: sum of the realized entries.
    pub fn log_likelihood(&self) -> f64 {
        self.steps
            .iter()
            .zip(&self.realized)
            .map(|(step, aa)| step[aa.index()])
            .sum()
    }

    pub fn order_key(&self) -> String {
        order_key(&self.order)
    }

    pub fn realized_key(&self) -> String {
        crate::amino::to_string(&self.realized)
    }
}

pub(crate) fn order_key(order: &[SiteRef]) -> String {
    order.iter().map(SiteRef::to_string).collect::<Vec<_>>().join(",")
}

/// Numerically stable log-softmax.
pub fn log_softmax(logits: &LogProbVector) -> LogProbVector {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    let mut out = [0.0; NUM_AMINO_ACIDS];
    for (o, v) in out.iter_mut().zip(logits) {
        *o = v - lse;
    }
    out
}

pub fn probability_mass(v: &LogProbVector) -> f64 {
    v.iter().map(|x| x.exp()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_softmax_normalizes() {
        let mut logits = [0.0; NUM_AMINO_ACIDS];
        for (i, l) in logits.iter_mut().enumerate() {
            *l = (i as f64 * 0.7).sin() * 40.0;
        }
        let lp = log_softmax(&logits);
        assert!((probability_mass(&lp) - 1.0).abs() < 1e-12);
        assert!(lp.iter().all(|v| *v <= 0.0));
    }

    #[test]
    fn zero_logits_are_uniform() {
        let lp = log_softmax(&[0.0; NUM_AMINO_ACIDS]);
        for v in lp {
            assert!((v - (1.0f64 / 20.0).ln()).abs() < 1e-15);
        }
    }
}
