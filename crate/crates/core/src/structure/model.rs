use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amino::AminoAcid;
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Upper bound on any intra-residue backbone atom distance, in Å.
pub const BACKBONE_SANITY_BOUND: f64 = 5.0;

pub fn distance(a: &Vec3, b: &Vec3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Author residue number plus optional insertion code. Ordered numerically,
/// then with a blank insertion code before any lettered one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueNumber {
    pub seq_num: i32,
    pub insertion_code: Option<char>,
}

impl ResidueNumber {
    pub fn new(seq_num: i32, insertion_code: Option<char>) -> Self {
        Self {
            seq_num,
            insertion_code,
        }
    }
}

impl Ord for ResidueNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        self.seq_num
            .cmp(&other.seq_num)
            .then_with(|| self.insertion_code.cmp(&other.insertion_code))
    }
}

impl PartialOrd for ResidueNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ResidueNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.seq_num)?;
        if let Some(c) = self.insertion_code {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for ResidueNumber {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let (digits, icode) = match s.chars().last() {
            Some(c) if c.is_ascii_alphabetic() => (&s[..s.len() - 1], Some(c)),
            _ => (s, None),
        };
        let seq_num = digits.parse::<i32>().map_err(|_| format!("bad residue number `{s}`"))?;
        Ok(Self::new(seq_num, icode))
    }
}

/// A residue position within a model: `chain:seqnum[icode]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteRef {
    pub chain: char,
    pub number: ResidueNumber,
}

impl SiteRef {
    pub fn new(chain: char, seq_num: i32, insertion_code: Option<char>) -> Self {
        Self {
            chain,
            number: ResidueNumber::new(seq_num, insertion_code),
        }
    }
}

impl fmt::Display for SiteRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chain, self.number)
    }
}

impl FromStr for SiteRef {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (chain, number) = s
            .split_once(':')
            .ok_or_else(|| format!("site `{s}` is not of the form chain:seqnum"))?;
        let mut chars = chain.chars();
        let chain = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            _ => return Err(format!("site `{s}` needs a single-character chain id")),
        };
        Ok(Self {
            chain,
            number: number.parse()?,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BackboneCoords {
    pub n: Option<Vec3>,
    pub ca: Option<Vec3>,
    pub c: Option<Vec3>,
    pub o: Option<Vec3>,
}

impl BackboneCoords {
    pub fn atoms(&self) -> [(&'static str, Option<Vec3>); 4] {
        [("N", self.n), ("CA", self.ca), ("C", self.c), ("O", self.o)]
    }

    pub fn is_complete(&self) -> bool {
        self.n.is_some() && self.ca.is_some() && self.c.is_some() && self.o.is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms().iter().all(|(_, a)| a.is_none())
    }

    pub(crate) fn check(&self) -> std::result::Result<(), String> {
        for (name, atom) in self.atoms() {
            if let Some(p) = atom {
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(format!("non-finite {name} coordinate"));
                }
            }
        }
        if let (Some(n), Some(ca), Some(c), Some(o)) = (self.n, self.ca, self.c, self.o) {
            let atoms = [n, ca, c, o];
            for i in 0..4 {
                for j in i + 1..4 {
                    if distance(&atoms[i], &atoms[j]) >= BACKBONE_SANITY_BOUND {
                        return Err("backbone atoms more than 5 Å apart".to_string());
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residue {
    pub number: ResidueNumber,
    pub amino_acid: AminoAcid,
    pub backbone: BackboneCoords,
}

impl Residue {
    pub fn has_ca(&self) -> bool {
        self.backbone.ca.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub id: char,
    pub residues: Vec<Residue>,
}

/// Counters the PDB reader fills in; not part of model equality.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseMetadata {
    pub dropped_noncanonical: usize,
    pub skipped_altloc_atoms: usize,
    pub ignored_hetatm: usize,
}

/// A (multi-chain) protein backbone with its sequence.
///
/// Residues are addressed either by [`SiteRef`] or by a flat index that runs
/// over chains in model order and residues in chain order.
#[derive(Debug, Clone)]
pub struct StructureModel {
    id: String,
    chains: Vec<Chain>,
    metadata: ParseMetadata,
    offsets: Vec<usize>,
    index: HashMap<SiteRef, usize>,
}

impl PartialEq for StructureModel {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.chains == other.chains
    }
}

impl StructureModel {
    pub fn new(id: impl Into<String>, chains: Vec<Chain>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(chains.len());
        let mut index = HashMap::new();
        let mut total = 0;
        for (ci, chain) in chains.iter().enumerate() {
            if chains[..ci].iter().any(|c| c.id == chain.id) {
                return Err(Error::InvalidArgument(format!("duplicate chain id `{}`", chain.id)));
            }
            offsets.push(total);
            for (ri, residue) in chain.residues.iter().enumerate() {
                let site = SiteRef {
                    chain: chain.id,
                    number: residue.number,
                };
                if ri > 0 && chain.residues[ri - 1].number >= residue.number {
                    return Err(Error::InvalidArgument(format!("residue {site} out of order")));
                }
                residue
                    .backbone
                    .check()
                    .map_err(|m| Error::InvalidArgument(format!("residue {site}: {m}")))?;
                index.insert(site, total + ri);
            }
            total += chain.residues.len();
        }
        if total == 0 {
            return Err(Error::EmptyStructure);
        }
        Ok(Self {
            id: id.into(),
            chains,
            metadata: ParseMetadata::default(),
            offsets,
            index,
        })
    }

    pub(crate) fn with_metadata(mut self, metadata: ParseMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn metadata(&self) -> &ParseMetadata {
        &self.metadata
    }

    pub fn chain(&self, id: char) -> Option<&Chain> {
        self.chains.iter().find(|c| c.id == id)
    }

    pub fn chain_ids(&self) -> String {
        self.chains.iter().map(|c| c.id).collect()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn flat_index(&self, site: &SiteRef) -> Option<usize> {
        self.index.get(site).copied()
    }

    pub fn residue(&self, site: &SiteRef) -> Option<&Residue> {
        self.flat_index(site).map(|i| self.residue_at(i).1)
    }

    /// Residue at a flat index, with its chain id.
    pub fn residue_at(&self, flat: usize) -> (char, &Residue) {
        let ci = self.offsets.partition_point(|&o| o <= flat) - 1;
        let chain = &self.chains[ci];
        (chain.id, &chain.residues[flat - self.offsets[ci]])
    }

    pub fn site_at(&self, flat: usize) -> SiteRef {
        let (chain, residue) = self.residue_at(flat);
        SiteRef {
            chain,
            number: residue.number,
        }
    }

    /// All residues in flat-index order.
    pub fn residues(&self) -> impl Iterator<Item = (SiteRef, &Residue)> {
        self.chains.iter().flat_map(|c| {
            c.residues.iter().map(move |r| {
                (
                    SiteRef {
                        chain: c.id,
                        number: r.number,
                    },
                    r,
                )
            })
        })
    }

    pub fn sequence(&self) -> Vec<AminoAcid> {
        self.residues().map(|(_, r)| r.amino_acid).collect()
    }

    pub fn ca_positions(&self) -> Vec<Option<Vec3>> {
        self.residues().map(|(_, r)| r.backbone.ca).collect()
    }

    /// Sub-model holding the listed chains, kept in this model's chain order.
    pub fn subset(&self, chain_ids: &[char]) -> Result<Self> {
        for id in chain_ids {
            if self.chain(*id).is_none() {
                return Err(Error::Partition(format!("chain `{id}` not present in {}", self.id)));
            }
        }
        let chains = self
            .chains
            .iter()
            .filter(|c| chain_ids.contains(&c.id))
            .cloned()
            .collect();
        Ok(Self::new(self.id.clone(), chains)?.with_metadata(self.metadata))
    }

    /// Copy with every atom of the chains in `chain_ids` (all chains when
    /// empty) moved by `f`.
    pub fn transformed(&self, chain_ids: &[char], f: impl Fn(Vec3) -> Vec3) -> Self {
        let mut out = self.clone();
        for chain in out.chains.iter_mut() {
            if !chain_ids.is_empty() && !chain_ids.contains(&chain.id) {
                continue;
            }
            for r in chain.residues.iter_mut() {
                let b = &mut r.backbone;
                for atom in [&mut b.n, &mut b.ca, &mut b.c, &mut b.o] {
                    *atom = atom.map(&f);
                }
            }
        }
        out
    }

    /// Copy with new amino-acid labels at the given flat indices; coordinates
    /// are untouched.
    pub(crate) fn relabeled(&self, labels: &[(usize, AminoAcid)]) -> Self {
        let mut out = self.clone();
        for &(flat, aa) in labels {
            let ci = self.offsets.partition_point(|&o| o <= flat) - 1;
            out.chains[ci].residues[flat - self.offsets[ci]].amino_acid = aa;
        }
        out
    }
}
