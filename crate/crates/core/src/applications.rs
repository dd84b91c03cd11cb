//! Downstream uses of the estimators: docking-pose selection by estimated ΔG,
//! Bradley–Terry mutation preference and normalized per-residue perplexity.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::amino::AminoAcid;
use crate::calibrate::Calibration;
use crate::cycle::{ddg_cycle, dg_estimate, CycleInput, DesignScope};
use crate::error::{Error, Result};
use crate::scorer::{sequence_loglik_with, DesignTask, OrderPolicy, ScorerHandle};
use crate::structure::{kabsch_rmsd, Mutation, MutationSet, PartitionSpec, SiteRef, StructureModel};

/// C-RMSD below which a selected pose counts as a successful dock.
pub const DOCKING_SUCCESS_RMSD: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct PoseCandidate {
    pub pose_id: String,
    pub model: Arc<StructureModel>,
    pub reference: Option<Arc<StructureModel>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoredPose {
    pub pose_id: String,
    /// Position in the candidate list (generation order).
    pub sample_index: usize,
    pub r: f64,
    pub dg: f64,
    pub rmsd: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoseRanking {
    /// Ascending estimated ΔG, ties by pose id.
    pub poses: Vec<ScoredPose>,
    pub excluded: Vec<(String, String)>,
}

impl PoseRanking {
    pub fn selected(&self) -> Option<&ScoredPose> {
        self.poses.first()
    }

    /// Best-ranked pose among the first `n` generated samples.
    pub fn selected_among_first(&self, n: usize) -> Option<&ScoredPose> {
        self.poses.iter().find(|p| p.sample_index < n)
    }
}

fn rank_order(a: &ScoredPose, b: &ScoredPose) -> std::cmp::Ordering {
    a.dg.total_cmp(&b.dg).then_with(|| a.pose_id.cmp(&b.pose_id))
}

pub fn rank_poses(
    candidates: &[PoseCandidate],
    partition: &PartitionSpec,
    scorer: &ScorerHandle,
    calib: &Calibration,
    orders: &OrderPolicy,
    scope: DesignScope,
) -> Result<PoseRanking> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("pose candidates"));
    }
    let mut poses = Vec::with_capacity(candidates.len());
    let mut excluded = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let scored = dg_estimate(&c.model, partition, scorer, calib, orders, scope).and_then(|est| {
            let rmsd = c
                .reference
                .as_ref()
                .map(|reference| kabsch_rmsd(&c.model, reference))
                .transpose()?;
            Ok(ScoredPose {
                pose_id: c.pose_id.clone(),
                sample_index: i,
                r: est.r,
                dg: est.energy,
                rmsd,
            })
        });
        match scored {
            Ok(p) => poses.push(p),
            Err(e) => {
                log::warn!("pose {}: {e}", c.pose_id);
                excluded.push((c.pose_id.clone(), e.to_string()));
            }
        }
    }
    poses.sort_by(rank_order);
    Ok(PoseRanking { poses, excluded })
}

/// Fraction of docking tasks whose selected pose (among the first `samples`
/// candidates, or all when `None`) has C-RMSD below `cutoff`.
pub fn success_rate(rankings: &[PoseRanking], samples: Option<usize>, cutoff: f64) -> Option<f64> {
    if rankings.is_empty() {
        return None;
    }
    let hits = rankings
        .iter()
        .filter(|r| {
            let pick = match samples {
                Some(n) => r.selected_among_first(n),
                None => r.selected(),
            };
            pick.and_then(|p| p.rmsd).is_some_and(|d| d < cutoff)
        })
        .count();
    Some(hits as f64 / rankings.len() as f64)
}

/// Bradley–Terry probability that the mutant is preferred:
/// `exp(Δ) / (1 + exp(Δ))` with `Δ = loglik_mut - loglik_wt`.
pub fn preference_probability(loglik_wt: f64, loglik_mut: f64) -> f64 {
    sigmoid(loglik_mut - loglik_wt)
}

fn sigmoid(delta: f64) -> f64 {
    if delta >= 0.0 {
        1.0 / (1.0 + (-delta).exp())
    } else {
        let e = delta.exp();
        e / (1.0 + e)
    }
}

/// exp(-loglik / n).
pub fn per_residue_perplexity(loglik: f64, n_sites: usize) -> f64 {
    (-loglik / n_sites as f64).exp()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PreferenceMode {
    /// Strengths are bound-complex sequence likelihoods.
    #[default]
    Bound,
    /// Strength difference is the cycle log-ratio `r`.
    Cycle,
}

#[derive(Debug, Clone, Serialize)]
pub struct MutationScore {
    /// `None` for the wild-type pool member.
    pub mutation: Option<Mutation>,
    pub loglik: f64,
    pub perplexity: f64,
    pub normalized_perplexity: f64,
    pub preference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MutationPool {
    pub design_sites: Vec<SiteRef>,
    pub wild_type_loglik: f64,
    pub includes_wild_type: bool,
    pub mean_perplexity: f64,
    pub members: Vec<MutationScore>,
}

impl MutationPool {
    pub fn get(&self, mutation: &Mutation) -> Option<&MutationScore> {
        self.members.iter().find(|m| m.mutation.as_ref() == Some(mutation))
    }
}

/// All 19 substitutions at each site.
pub fn single_point_mutants(model: &StructureModel, sites: &[SiteRef]) -> Result<Vec<Mutation>> {
    let mut out = Vec::with_capacity(sites.len() * 19);
    for site in sites {
        let wt = model
            .residue(site)
            .ok_or_else(|| Error::UnknownSite(site.to_string()))?
            .amino_acid;
        for &aa in AminoAcid::all() {
            if aa != wt {
                out.push(Mutation::new(*site, wt, aa));
            }
        }
    }
    Ok(out)
}

/// Scores each single-point `member` with `design_sites` decoded on the bound
/// complex and everything else fixed. The wild type joins the perplexity
/// mean when `include_wild_type` is set.
#[allow(clippy::too_many_arguments)]
pub fn score_mutation_pool(
    model: &StructureModel,
    partition: &PartitionSpec,
    design_sites: &[SiteRef],
    members: &[Mutation],
    scorer: &ScorerHandle,
    orders: &OrderPolicy,
    mode: PreferenceMode,
    include_wild_type: bool,
) -> Result<MutationPool> {
    if members.is_empty() && !include_wild_type {
        return Err(Error::EmptyInput("mutation pool"));
    }
    let task = DesignTask::new(model, design_sites.iter().copied())?;
    if task.is_empty() {
        return Err(Error::EmptyInput("design sites"));
    }
    let n = task.len();
    let native = task.native();
    let wt_ll = sequence_loglik_with(scorer, &task, &native, orders)?;

    let mut scored = Vec::with_capacity(members.len() + 1);
    for m in members {
        let pos = task
            .sites()
            .iter()
            .position(|s| *s == m.site)
            .ok_or_else(|| Error::InvalidArgument(format!("{m} is outside the design sites")))?;
        if native[pos] != m.wild_type {
            return Err(Error::MutationConsistency {
                site: m.to_string(),
                expected: m.wild_type.one_letter(),
                found: native[pos].one_letter(),
            });
        }
        let mut realized = native.clone();
        realized[pos] = m.mutant;
        let ll = sequence_loglik_with(scorer, &task, &realized, orders)?;
        let preference = match mode {
            PreferenceMode::Bound => preference_probability(wt_ll, ll),
            PreferenceMode::Cycle => {
                let set = MutationSet::new(vec![*m])?;
                let extra: Vec<SiteRef> = task.sites().iter().copied().filter(|s| *s != m.site).collect();
                let input = CycleInput::new(model, partition, &set, scorer)
                    .with_orders(*orders)
                    .with_extra_sites(extra);
                sigmoid(ddg_cycle(&input, &Calibration::default())?.r)
            }
        };
        scored.push((Some(*m), ll, preference));
    }
    if include_wild_type {
        scored.push((None, wt_ll, 0.5));
    }
    let perplexities: Vec<f64> = scored.iter().map(|s| per_residue_perplexity(s.1, n)).collect();
    let mean = perplexities.iter().sum::<f64>() / perplexities.len() as f64;
    let members = scored
        .into_iter()
        .zip(perplexities)
        .map(|((mutation, loglik, preference), perplexity)| MutationScore {
            mutation,
            loglik,
            perplexity,
            normalized_perplexity: perplexity - mean,
            preference,
        })
        .collect();
    Ok(MutationPool {
        design_sites: task.sites().to_vec(),
        wild_type_loglik: wt_ll,
        includes_wild_type: include_wild_type,
        mean_perplexity: mean,
        members,
    })
}

/// Perplexity of `target` minus the mean over the full single-point pool at
/// `sites` (wild type included).
pub fn normalized_perplexity(
    model: &StructureModel,
    partition: &PartitionSpec,
    sites: &[SiteRef],
    target: &Mutation,
    scorer: &ScorerHandle,
    orders: &OrderPolicy,
) -> Result<f64> {
    let members = single_point_mutants(model, sites)?;
    let pool = score_mutation_pool(
        model,
        partition,
        sites,
        &members,
        scorer,
        orders,
        PreferenceMode::Bound,
        true,
    )?;
    pool.get(target)
        .map(|m| m.normalized_perplexity)
        .ok_or_else(|| Error::InvalidArgument(format!("{target} is not in the mutation pool")))
}
