//! Thermodynamic-cycle estimators.
//!
//! With `L(S | X)` the scorer log-likelihood and the unbound state taken as
//! the two partners scored independently on their bound-state backbones:
//!
//! * cycle: `r = [L(S_mut|X_AB) - L(S_mut,A|X_A) - L(S_mut,B|X_B)] - [same for wt]`
//! * prev:  `r = L(S_mut|X_AB) - L(S_wt|X_AB)`
//! * dg:    `r = L(S|X_AB) - L(S_A|X_A) - L(S_B|X_B)` over every scorable site
//!
//! and the energy is `-kT · r + bias`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::amino::AminoAcid;
use crate::calibrate::Calibration;
use crate::error::{Error, Result};
use crate::scorer::{sequence_loglik_with, DesignTask, OrderPolicy, ScorerHandle};
use crate::structure::{distance, split_partition, MutationSet, PartitionSpec, SiteRef, StructureModel};

/// CA distance defining interface residues for the restricted ΔG estimate.
pub const INTERFACE_CUTOFF: f64 = 10.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Bound and unbound states (full cycle).
    #[default]
    Cycle,
    /// Bound state only.
    Prev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermStatus {
    Computed,
    /// Term has no design sites in this sub-structure; it is identical for
    /// wild type and mutant and cancels, so it is recorded as 0.
    Cancelled,
    NotEvaluated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodTerm {
    pub value: f64,
    pub status: TermStatus,
}

impl LikelihoodTerm {
    fn computed(value: f64) -> Self {
        Self {
            value,
            status: TermStatus::Computed,
        }
    }

    fn cancelled() -> Self {
        Self {
            value: 0.0,
            status: TermStatus::Cancelled,
        }
    }

    fn not_evaluated() -> Self {
        Self {
            value: 0.0,
            status: TermStatus::NotEvaluated,
        }
    }

    /// `None` unless the term was actually scored.
    pub fn reported(&self) -> Option<f64> {
        (self.status != TermStatus::NotEvaluated).then_some(self.value)
    }
}

/// The six log-likelihood terms. For ΔG estimates only the `*_mut` slots are
/// used and hold the native-sequence terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleTerms {
    pub bound_mut: LikelihoodTerm,
    pub part_a_mut: LikelihoodTerm,
    pub part_b_mut: LikelihoodTerm,
    pub bound_wt: LikelihoodTerm,
    pub part_a_wt: LikelihoodTerm,
    pub part_b_wt: LikelihoodTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    /// Dimensionless log-likelihood ratio.
    pub r: f64,
    /// Calibrated energy in kcal/mol (ΔΔG, or approximate ΔG).
    pub energy: f64,
    pub terms: CycleTerms,
    /// Set for ΔG estimates, whose prior-cancellation step is heuristic.
    pub approximate: bool,
}

#[derive(Debug, Clone)]
pub struct CycleInput<'a> {
    pub wild: &'a StructureModel,
    pub partition: &'a PartitionSpec,
    pub mutations: &'a MutationSet,
    pub scorer: &'a ScorerHandle,
    pub orders: OrderPolicy,
    /// Non-mutated sites decoded anyway, with their wild-type labels on both
    /// legs. Empty for ordinary use; it lets staged multi-point evaluations
    /// share design sites.
    pub extra_design_sites: Vec<SiteRef>,
}

impl<'a> CycleInput<'a> {
    pub fn new(
        wild: &'a StructureModel,
        partition: &'a PartitionSpec,
        mutations: &'a MutationSet,
        scorer: &'a ScorerHandle,
    ) -> Self {
        Self {
            wild,
            partition,
            mutations,
            scorer,
            orders: OrderPolicy::Canonical,
            extra_design_sites: Vec::new(),
        }
    }

    pub fn with_orders(mut self, orders: OrderPolicy) -> Self {
        self.orders = orders;
        self
    }

    pub fn with_extra_sites(mut self, sites: Vec<SiteRef>) -> Self {
        self.extra_design_sites = sites;
        self
    }

    fn design_sites(&self) -> BTreeSet<SiteRef> {
        self.mutations
            .sites()
            .chain(self.extra_design_sites.iter().copied())
            .collect()
    }
}

struct Leg {
    wt: f64,
    mt: f64,
}

/// Scores wild-type and mutant labels on the design sites that fall in `model`.
fn score_leg(input: &CycleInput<'_>, model: &StructureModel, sites: &BTreeSet<SiteRef>) -> Result<Option<Leg>> {
    let local: Vec<SiteRef> = sites
        .iter()
        .filter(|s| model.chain(s.chain).is_some())
        .copied()
        .collect();
    if local.is_empty() {
        return Ok(None);
    }
    let task = DesignTask::new(model, local)?;
    let wt = task.native();
    let mt: Vec<AminoAcid> = task
        .sites()
        .iter()
        .zip(&wt)
        .map(|(site, &aa)| input.mutations.get(site).map_or(aa, |m| m.mutant))
        .collect();
    Ok(Some(Leg {
        wt: sequence_loglik_with(input.scorer, &task, &wt, &input.orders)?,
        mt: sequence_loglik_with(input.scorer, &task, &mt, &input.orders)?,
    }))
}

fn leg_terms(leg: Option<Leg>) -> (LikelihoodTerm, LikelihoodTerm) {
    match leg {
        Some(l) => (LikelihoodTerm::computed(l.wt), LikelihoodTerm::computed(l.mt)),
        None => (LikelihoodTerm::cancelled(), LikelihoodTerm::cancelled()),
    }
}

fn check_input(input: &CycleInput<'_>) -> Result<BTreeSet<SiteRef>> {
    input.partition.validate(input.wild)?;
    input.mutations.validate(input.wild)?;
    let sites = input.design_sites();
    for site in &sites {
        if input.wild.flat_index(site).is_none() {
            return Err(Error::UnknownSite(site.to_string()));
        }
        assert!(
            input.partition.group_of(site.chain).is_some(),
            "validated partition covers every chain"
        );
    }
    Ok(sites)
}

pub fn ddg_cycle(input: &CycleInput<'_>, calib: &Calibration) -> Result<EnergyEstimate> {
    let sites = check_input(input)?;
    let split = split_partition(input.wild, input.partition)?;
    let (bound_wt, bound_mut) = leg_terms(score_leg(input, &split.bound, &sites)?);
    let (part_a_wt, part_a_mut) = leg_terms(score_leg(input, &split.part_a, &sites)?);
    let (part_b_wt, part_b_mut) = leg_terms(score_leg(input, &split.part_b, &sites)?);

    // Grouped per state so that a partner whose labels do not change
    // contributes an exact zero, and swapping wt and mut negates r exactly.
    let r = (bound_mut.value - bound_wt.value)
        - (part_a_mut.value - part_a_wt.value)
        - (part_b_mut.value - part_b_wt.value);
    Ok(EnergyEstimate {
        r,
        energy: calib.apply(r),
        terms: CycleTerms {
            bound_mut,
            part_a_mut,
            part_b_mut,
            bound_wt,
            part_a_wt,
            part_b_wt,
        },
        approximate: false,
    })
}

pub fn ddg_prev(input: &CycleInput<'_>, calib: &Calibration) -> Result<EnergyEstimate> {
    let sites = check_input(input)?;
    let (bound_wt, bound_mut) = leg_terms(score_leg(input, input.wild, &sites)?);
    let r = bound_mut.value - bound_wt.value;
    let none = LikelihoodTerm::not_evaluated();
    Ok(EnergyEstimate {
        r,
        energy: calib.apply(r),
        terms: CycleTerms {
            bound_mut,
            part_a_mut: none,
            part_b_mut: none,
            bound_wt,
            part_a_wt: none,
            part_b_wt: none,
        },
        approximate: false,
    })
}

pub fn ddg(input: &CycleInput<'_>, calib: &Calibration, estimator: Estimator) -> Result<EnergyEstimate> {
    match estimator {
        Estimator::Cycle => ddg_cycle(input, calib),
        Estimator::Prev => ddg_prev(input, calib),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DesignScope {
    /// Every residue with a CA atom.
    #[default]
    All,
    /// Residues whose CA lies within 10 Å of a CA in the other group.
    Interface,
}

/// Residues whose CA lies within [`INTERFACE_CUTOFF`] of a CA in the other group.
pub fn interface_sites(model: &StructureModel, partition: &PartitionSpec) -> Vec<SiteRef> {
    let positions = model.ca_positions();
    let groups: Vec<_> = model
        .residues()
        .map(|(site, _)| partition.group_of(site.chain))
        .collect();
    (0..positions.len())
        .filter(|&i| {
            let Some(p) = positions[i] else { return false };
            positions
                .iter()
                .enumerate()
                .any(|(j, q)| groups[j] != groups[i] && q.is_some_and(|q| distance(&p, &q) < INTERFACE_CUTOFF))
        })
        .map(|i| model.site_at(i))
        .collect()
}

/// Approximate binding free energy of the native complex.
pub fn dg_estimate(
    model: &StructureModel,
    partition: &PartitionSpec,
    scorer: &ScorerHandle,
    calib: &Calibration,
    orders: &OrderPolicy,
    scope: DesignScope,
) -> Result<EnergyEstimate> {
    let split = split_partition(model, partition)?;
    let sites: Vec<SiteRef> = match scope {
        DesignScope::All => model.residues().filter(|(_, r)| r.has_ca()).map(|(s, _)| s).collect(),
        DesignScope::Interface => interface_sites(model, partition),
    };
    let score = |m: &StructureModel| -> Result<f64> {
        let local = sites.iter().filter(|s| m.chain(s.chain).is_some()).copied();
        let task = DesignTask::new(m, local)?;
        sequence_loglik_with(scorer, &task, &task.native(), orders)
    };
    let bound = score(&split.bound)?;
    let part_a = score(&split.part_a)?;
    let part_b = score(&split.part_b)?;
    let r = bound - (part_a + part_b);
    let none = LikelihoodTerm::not_evaluated();
    Ok(EnergyEstimate {
        r,
        energy: calib.apply(r),
        terms: CycleTerms {
            bound_mut: LikelihoodTerm::computed(bound),
            part_a_mut: LikelihoodTerm::computed(part_a),
            part_b_mut: LikelihoodTerm::computed(part_b),
            bound_wt: none,
            part_a_wt: none,
            part_b_wt: none,
        },
        approximate: true,
    })
}
