use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amino::AminoAcid;
use crate::error::{Error, Result};
use crate::structure::{SiteRef, StructureModel};

/// Sites to decode on a fixed backbone; every other residue of the model is
/// fixed context carrying the model's own amino-acid label.
#[derive(Debug, Clone)]
pub struct DesignTask<'a> {
    model: &'a StructureModel,
    sites: Vec<SiteRef>,
    flat: Vec<usize>,
}

impl<'a> DesignTask<'a> {
    /// Sites are stored in model order (chain order, then residue order).
    pub fn new(model: &'a StructureModel, sites: impl IntoIterator<Item = SiteRef>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut pairs = Vec::new();
        for site in sites {
            let flat = model
                .flat_index(&site)
                .ok_or_else(|| Error::UnknownSite(site.to_string()))?;
            if !seen.insert(flat) {
                return Err(Error::InvalidArgument(format!("design site {site} listed twice")));
            }
            pairs.push((flat, site));
        }
        pairs.sort_unstable_by_key(|&(flat, _)| flat);
        Ok(Self {
            model,
            flat: pairs.iter().map(|p| p.0).collect(),
            sites: pairs.into_iter().map(|p| p.1).collect(),
        })
    }

    pub fn model(&self) -> &'a StructureModel {
        self.model
    }

    pub fn sites(&self) -> &[SiteRef] {
        &self.sites
    }

    pub fn flat_indices(&self) -> &[usize] {
        &self.flat
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// The model's own labels at the design sites.
    pub fn native(&self) -> Vec<AminoAcid> {
        self.flat
            .iter()
            .map(|&i| self.model.residue_at(i).1.amino_acid)
            .collect()
    }

    /// Identifies the task in external log-probability archives:
    /// `<model id>:<chain ids>|<site>,<site>,...` with sites in model order.
    pub fn fingerprint(&self) -> String {
        let sites: Vec<String> = self.sites.iter().map(SiteRef::to_string).collect();
        format!("{}:{}|{}", self.model.id(), self.model.chain_ids(), sites.join(","))
    }
}

/// Permutation of design-site positions: step `t` decodes `task.sites()[order[t]]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecodingOrder(Vec<usize>);

impl DecodingOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Self(perm))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn random(n: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        Self(perm)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// How decoding orders are chosen for each task.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderPolicy {
    /// One order: sites in model order.
    #[default]
    Canonical,
    /// `count` seeded random permutations, log-likelihoods averaged. The
    /// stream for a task depends only on the seed and the task fingerprint.
    Random { count: usize, seed: u64 },
    /// Every order an external archive holds for the task.
    Archived,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

impl OrderPolicy {
    pub fn random(count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument("decoding-order count must be ≥ 1".into()));
        }
        Ok(if count == 1 && seed == 0 {
            Self::Canonical
        } else {
            Self::Random { count, seed }
        })
    }

    /// Orders for a task; `None` for [`OrderPolicy::Archived`], which only
    /// the external scorer can resolve.
    pub fn generate(&self, task: &DesignTask<'_>) -> Option<Vec<DecodingOrder>> {
        match *self {
            Self::Canonical => Some(vec![DecodingOrder::identity(task.len())]),
            Self::Random { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(task.fingerprint().as_bytes()));
                Some(
                    (0..count)
                        .map(|_| DecodingOrder::random(task.len(), &mut rng))
                        .collect(),
                )
            }
            Self::Archived => None,
        }
    }
}
