//! Sequence-likelihood scorers: `log p(S | X)` as a sum of autoregressive
//! conditionals over design sites, with the rest of the sequence fixed.

mod archive;
mod builtin;
mod table;
mod task;

pub use archive::{write_tables, LogProbArchive, FORMAT_NAME, FORMAT_VERSION, LOAD_SUM_TOLERANCE};
pub use builtin::{BuiltinScorer, ContactMatrix, DEFAULT_K, DEFAULT_MU, DEFAULT_SIGMA};
pub use table::{log_softmax, probability_mass, LogProbTable, LogProbVector};
pub use task::{DecodingOrder, DesignTask, OrderPolicy};

use std::path::Path;
use std::sync::{Arc, Mutex};

use crate::amino::{self, AminoAcid};
use crate::error::{Error, Result};

/// A read-only scorer; cloning shares the underlying parameters or tables.
#[derive(Debug, Clone)]
pub enum ScorerHandle {
    Builtin(Arc<BuiltinScorer>),
    External(Arc<LogProbArchive>),
    /// Delegates to `inner` and keeps a copy of every table it returns.
    Recording {
        inner: Box<ScorerHandle>,
        sink: Arc<Mutex<Vec<LogProbTable>>>,
    },
}

impl Default for ScorerHandle {
    fn default() -> Self {
        Self::builtin()
    }
}

impl ScorerHandle {
    pub fn builtin() -> Self {
        Self::Builtin(Arc::new(BuiltinScorer::default()))
    }

    pub fn external(archive: LogProbArchive) -> Self {
        Self::External(Arc::new(archive))
    }

    pub fn load_archive(path: &Path) -> Result<Self> {
        Ok(Self::external(LogProbArchive::load(path)?))
    }

    pub fn recording(inner: ScorerHandle) -> Self {
        Self::Recording {
            inner: Box::new(inner),
            sink: Arc::default(),
        }
    }

    /// Archive of the tables recorded so far; repeated lookups collapse.
    pub fn recorded_archive(&self) -> Option<LogProbArchive> {
        let Self::Recording { sink, .. } = self else {
            return None;
        };
        let tables = sink.lock().expect("recording sink poisoned");
        let mut archive = LogProbArchive::new();
        for t in tables.iter() {
            if archive.get(&t.fingerprint, &t.order_key(), &t.realized_key()).is_none() {
                archive.insert(t.clone()).expect("key checked above");
            }
        }
        Some(archive)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Builtin(_) => "builtin",
            Self::External(_) => "external",
            Self::Recording { inner, .. } => inner.kind(),
        }
    }

    /// Conditionals along `order`; `realized` is indexed like `task.sites()`.
    pub fn conditional_logprobs(
        &self,
        task: &DesignTask<'_>,
        order: &DecodingOrder,
        realized: &[AminoAcid],
    ) -> Result<LogProbTable> {
        if realized.len() != task.len() || order.len() != task.len() {
            return Err(Error::InvalidArgument(format!(
                "task has {} design sites, realized {}, order {}",
                task.len(),
                realized.len(),
                order.len()
            )));
        }
        for (site, &flat) in task.sites().iter().zip(task.flat_indices()) {
            if !task.model().residue_at(flat).1.has_ca() {
                return Err(Error::Unscorable(site.to_string()));
            }
        }
        match self {
            Self::Builtin(scorer) => scorer.conditional_logprobs(task, order, realized),
            Self::External(archive) => {
                let fingerprint = task.fingerprint();
                let sites: Vec<_> = order.as_slice().iter().map(|&p| task.sites()[p]).collect();
                let order_key = table::order_key(&sites);
                let decoded: Vec<AminoAcid> = order.as_slice().iter().map(|&p| realized[p]).collect();
                let realized_key = amino::to_string(&decoded);
                archive
                    .get(&fingerprint, &order_key, &realized_key)
                    .cloned()
                    .ok_or(Error::MissingTable {
                        fingerprint,
                        order: order_key,
                        realized: realized_key,
                    })
            }
            Self::Recording { inner, sink } => {
                let table = inner.conditional_logprobs(task, order, realized)?;
                sink.lock().expect("recording sink poisoned").push(table.clone());
                Ok(table)
            }
        }
    }

    /// Orders a policy yields for `task`. `Archived` reads them from the
    /// external archive, falling back to the canonical order when nothing is
    /// archived (and always for the builtin scorer).
    pub fn resolve_orders(
        &self,
        task: &DesignTask<'_>,
        realized: &[AminoAcid],
        policy: &OrderPolicy,
    ) -> Result<Vec<DecodingOrder>> {
        if let Some(orders) = policy.generate(task) {
            return Ok(orders);
        }
        if let Self::Recording { inner, .. } = self {
            return inner.resolve_orders(task, realized, policy);
        }
        let Self::External(archive) = self else {
            return Ok(vec![DecodingOrder::identity(task.len())]);
        };
        let mut out = Vec::new();
        for (order_key, realized_key) in archive.entries_for(&task.fingerprint()) {
            let order = order_from_key(task, order_key)?;
            let decoded: Vec<AminoAcid> = order.as_slice().iter().map(|&p| realized[p]).collect();
            if amino::to_string(&decoded) == *realized_key {
                out.push(order);
            }
        }
        if out.is_empty() {
            out.push(DecodingOrder::identity(task.len()));
        }
        Ok(out)
    }
}

fn order_from_key(task: &DesignTask<'_>, key: &str) -> Result<DecodingOrder> {
    let mut perm = Vec::with_capacity(task.len());
    for token in key.split(',').filter(|t| !t.is_empty()) {
        let site: crate::structure::SiteRef = token.parse().map_err(Error::InvalidArgument)?;
        let pos = task
            .sites()
            .iter()
            .position(|s| *s == site)
            .ok_or_else(|| Error::UnknownSite(site.to_string()))?;
        perm.push(pos);
    }
    DecodingOrder::new(perm)
}

/// Mean over `orders` of the realized sequence's summed conditionals.
pub fn sequence_loglik(
    scorer: &ScorerHandle,
    task: &DesignTask<'_>,
    realized: &[AminoAcid],
    orders: &[DecodingOrder],
) -> Result<f64> {
    if orders.is_empty() {
        return Err(Error::EmptyInput("decoding orders"));
    }
    let mut total = 0.0;
    for order in orders {
        total += scorer.conditional_logprobs(task, order, realized)?.log_likelihood();
    }
    Ok(total / orders.len() as f64)
}

/// [`sequence_loglik`] with orders chosen by `policy`.
pub fn sequence_loglik_with(
    scorer: &ScorerHandle,
    task: &DesignTask<'_>,
    realized: &[AminoAcid],
    policy: &OrderPolicy,
) -> Result<f64> {
    if task.is_empty() {
        return Ok(0.0);
    }
    let orders = scorer.resolve_orders(task, realized, policy)?;
    sequence_loglik(scorer, task, realized, &orders)
}
