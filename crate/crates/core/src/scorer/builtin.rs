//! Reference scorer: a Gaussian-weighted pairwise contact potential over the
//! k nearest CA neighbors.
//!
//! For a site `i` and candidate `a`, the energy is
//! `Σ_j W[a, a_j] · exp(-(d_ij - μ)² / (2σ²))` over the visible neighbors `j`
//! (fixed context plus already-decoded design sites). Conditionals are the
//! log-softmax of `-energy` across the 20 candidates.

use std::sync::OnceLock;

use crate::amino::{AminoAcid, NUM_AMINO_ACIDS};
use crate::error::{Error, Result};
use crate::structure::{nearest_neighbors, Neighbor, StructureModel};

use super::table::{log_softmax, LogProbTable, LogProbVector};
use super::task::{DecodingOrder, DesignTask};

pub const DEFAULT_K: usize = 16;
pub const DEFAULT_MU: f64 = 6.0;
pub const DEFAULT_SIGMA: f64 = 2.0;

const MATRIX_TSV: &str = include_str!("../../data/contact_matrix.tsv");

#[derive(Debug, Clone, PartialEq)]
pub struct ContactMatrix(pub [[f64; NUM_AMINO_ACIDS]; NUM_AMINO_ACIDS]);

impl ContactMatrix {
    pub fn zeros() -> Self {
        Self([[0.0; NUM_AMINO_ACIDS]; NUM_AMINO_ACIDS])
    }

    /// Parses the tab-separated layout of `data/contact_matrix.tsv`: `#`
    /// comments, a header row of one-letter codes, then one row per letter.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidArgument(format!("contact matrix: {m}"));
        let mut rows = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header: Vec<AminoAcid> = rows
            .next()
            .ok_or_else(|| bad("missing header".into()))?
            .split('\t')
            .skip(1)
            .map(|t| t.parse::<AminoAcid>().map_err(bad))
            .collect::<Result<_>>()?;
        if header.len() != NUM_AMINO_ACIDS {
            return Err(bad(format!("{} columns", header.len())));
        }
        let mut m = Self::zeros();
        let mut filled = [false; NUM_AMINO_ACIDS];
        for row in rows {
            let mut fields = row.split('\t');
            let aa: AminoAcid = fields.next().unwrap_or_default().parse().map_err(bad)?;
            let values: Vec<f64> = fields
                .map(|v| v.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
                .collect::<Result<_>>()?;
            if values.len() != NUM_AMINO_ACIDS {
                return Err(bad(format!("row {aa} has {} values", values.len())));
            }
            for (col, v) in header.iter().zip(values) {
                m.0[aa.index()][col.index()] = v;
            }
            filled[aa.index()] = true;
        }
        if filled.iter().any(|f| !f) {
            return Err(bad("missing rows".into()));
        }
        Ok(m)
    }

    /// The matrix shipped with the crate.
    pub fn shipped() -> &'static Self {
        static MATRIX: OnceLock<ContactMatrix> = OnceLock::new();
        MATRIX.get_or_init(|| Self::from_tsv(MATRIX_TSV).expect("shipped contact matrix parses"))
    }

    pub fn get(&self, a: AminoAcid, b: AminoAcid) -> f64 {
        self.0[a.index()][b.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinScorer {
    pub k: usize,
    pub mu: f64,
    pub sigma: f64,
    pub matrix: ContactMatrix,
}

impl Default for BuiltinScorer {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            mu: DEFAULT_MU,
            sigma: DEFAULT_SIGMA,
            matrix: ContactMatrix::shipped().clone(),
        }
    }
}

impl BuiltinScorer {
    pub fn with_matrix(matrix: ContactMatrix) -> Self {
        Self {
            matrix,
            ..Self::default()
        }
    }

    pub fn contact_weight(&self, d: f64) -> f64 {
        let z = d - self.mu;
        (-(z * z) / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// Energies of all 20 candidates at a site given its neighbor list and the
    /// visible labels (`None` = not yet decoded).
    pub fn site_energies(&self, neighbors: &[Neighbor], visible: &[Option<AminoAcid>]) -> LogProbVector {
        let mut energy = [0.0; NUM_AMINO_ACIDS];
        for nb in neighbors {
            let Some(b) = visible[nb.index] else { continue };
            let w = self.contact_weight(nb.distance);
            for (a, e) in energy.iter_mut().enumerate() {
                *e += self.matrix.0[a][b.index()] * w;
            }
        }
        energy
    }

    /// Energy of one candidate at flat residue `site` of `model`.
    pub fn site_energy(
        &self,
        model: &StructureModel,
        site: usize,
        candidate: AminoAcid,
        visible: &[Option<AminoAcid>],
    ) -> f64 {
        let neighbors = nearest_neighbors(&model.ca_positions(), site, self.k);
        self.site_energies(&neighbors, visible)[candidate.index()]
    }

    pub fn conditional_logprobs(
        &self,
        task: &DesignTask<'_>,
        order: &DecodingOrder,
        realized: &[AminoAcid],
    ) -> Result<LogProbTable> {
        let model = task.model();
        let positions = model.ca_positions();
        let mut visible: Vec<Option<AminoAcid>> = model.sequence().into_iter().map(Some).collect();
        for &flat in task.flat_indices() {
            visible[flat] = None;
        }
        let mut steps = Vec::with_capacity(order.len());
        let mut sites = Vec::with_capacity(order.len());
        let mut decoded = Vec::with_capacity(order.len());
        for &pos in order.as_slice() {
            let flat = task.flat_indices()[pos];
            let neighbors = nearest_neighbors(&positions, flat, self.k);
            let energy = self.site_energies(&neighbors, &visible);
            let mut logits = [0.0; NUM_AMINO_ACIDS];
            for (l, e) in logits.iter_mut().zip(energy) {
                *l = -e;
            }
            steps.push(log_softmax(&logits));
            sites.push(task.sites()[pos]);
            decoded.push(realized[pos]);
            visible[flat] = Some(realized[pos]);
        }
        Ok(LogProbTable {
            fingerprint: task.fingerprint(),
            order: sites,
            steps,
            realized: decoded,
        })
    }
}
