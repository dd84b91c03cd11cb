//! CA-based neighbor graphs and rigid superposition.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};

use super::model::{distance, StructureModel, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    /// Flat residue index in the model.
    pub index: usize,
    pub distance: f64,
}

/// The `k` nearest CA atoms to `positions[query]`, nearest first. Equal
/// distances resolve to the lower flat index (chain order, then residue
/// order). Residues without CA never appear.
pub fn nearest_neighbors(positions: &[Option<Vec3>], query: usize, k: usize) -> Vec<Neighbor> {
    let Some(origin) = positions.get(query).copied().flatten() else {
        return Vec::new();
    };
    let mut all: Vec<Neighbor> = positions
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != query)
        .filter_map(|(j, p)| {
            p.map(|p| Neighbor {
                index: j,
                distance: distance(&origin, &p),
            })
        })
        .collect();
    let by_rank = |a: &Neighbor, b: &Neighbor| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index));
    if all.len() > k {
        all.select_nth_unstable_by(k, by_rank);
        all.truncate(k);
    }
    all.sort_by(by_rank);
    all
}

#[derive(Debug, Clone, Serialize)]
pub struct KnnGraph {
    pub k: usize,
    /// One entry per residue in flat order; `None` for residues lacking CA.
    pub neighbors: Vec<Option<Vec<Neighbor>>>,
}

impl KnnGraph {
    pub fn excluded(&self) -> impl Iterator<Item = usize> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_none())
            .map(|(i, _)| i)
    }
}

pub fn knn_graph(model: &StructureModel, k: usize) -> KnnGraph {
    let positions = model.ca_positions();
    let neighbors = (0..positions.len())
        .map(|i| positions[i].map(|_| nearest_neighbors(&positions, i, k)))
        .collect();
    KnnGraph { k, neighbors }
}

#[derive(Debug, Clone, Copy)]
pub struct Superposition {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub rmsd: f64,
}

/// Least-squares proper rotation and translation taking `mobile` onto
/// `target` (Kabsch, via SVD of the covariance matrix).
pub fn superpose(mobile: &[Vec3], target: &[Vec3]) -> Result<Superposition> {
    if mobile.len() != target.len() {
        return Err(Error::CompositionMismatch(format!(
            "{} vs {} points",
            mobile.len(),
            target.len()
        )));
    }
    if mobile.is_empty() {
        return Err(Error::EmptyInput("superposition point set"));
    }
    let n = mobile.len() as f64;
    let to_vec = |p: &Vec3| Vector3::new(p[0], p[1], p[2]);
    let centroid = |pts: &[Vec3]| pts.iter().map(to_vec).sum::<Vector3<f64>>() / n;
    let cm = centroid(mobile);
    let ct = centroid(target);

    let mut cov = Matrix3::zeros();
    for (p, q) in mobile.iter().zip(target) {
        cov += (to_vec(p) - cm) * (to_vec(q) - ct).transpose();
    }
    let svd = cov.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let correction = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, if d == 0.0 { 1.0 } else { d }));
    let rotation = v * correction * u.transpose();
    let translation = ct - rotation * cm;

    let sq: f64 = mobile
        .iter()
        .zip(target)
        .map(|(p, q)| (rotation * to_vec(p) + translation - to_vec(q)).norm_squared())
        .sum();
    Ok(Superposition {
        rotation,
        translation,
        rmsd: (sq / n).sqrt(),
    })
}

/// CA RMSD after optimal superposition. Both models must list the same
/// chains and residue numbers, with CA present at every site.
pub fn kabsch_rmsd(pred: &StructureModel, reference: &StructureModel) -> Result<f64> {
    let (p, q) = paired_ca(pred, reference)?;
    Ok(superpose(&p, &q)?.rmsd)
}

fn paired_ca(pred: &StructureModel, reference: &StructureModel) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    if pred.len() != reference.len() || pred.chain_ids() != reference.chain_ids() {
        return Err(Error::CompositionMismatch(format!(
            "{} ({} residues, chains {}) vs {} ({} residues, chains {})",
            pred.id(),
            pred.len(),
            pred.chain_ids(),
            reference.id(),
            reference.len(),
            reference.chain_ids()
        )));
    }
    let mut p = Vec::with_capacity(pred.len());
    let mut q = Vec::with_capacity(pred.len());
    for ((sa, ra), (sb, rb)) in pred.residues().zip(reference.residues()) {
        if sa != sb {
            return Err(Error::CompositionMismatch(format!("{sa} vs {sb}")));
        }
        match (ra.backbone.ca, rb.backbone.ca) {
            (Some(a), Some(b)) => {
                p.push(a);
                q.push(b);
            }
            _ => return Err(Error::CompositionMismatch(format!("missing CA at {sa}"))),
        }
    }
    Ok((p, q))
}
