use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amino::AminoAcid;
use crate::error::{Error, Result};

use super::model::{ResidueNumber, SiteRef, StructureModel};

/// A point mutation in `<wt><chain><seqnum[icode]><mut>` notation, e.g. `TI38I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mutation {
    pub site: SiteRef,
    pub wild_type: AminoAcid,
    pub mutant: AminoAcid,
}

impl Mutation {
    pub fn new(site: SiteRef, wild_type: AminoAcid, mutant: AminoAcid) -> Self {
        Self {
            site,
            wild_type,
            mutant,
        }
    }

    pub fn reverted(&self) -> Self {
        Self {
            site: self.site,
            wild_type: self.mutant,
            mutant: self.wild_type,
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}{}{}",
            self.wild_type, self.site.chain, self.site.number, self.mutant
        )
    }
}

impl FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let token = s.trim();
        let bad = || Error::MutationSyntax(token.to_string());
        let chars: Vec<char> = token.chars().collect();
        if chars.len() < 4 {
            return Err(bad());
        }
        let wild_type = AminoAcid::from_one_letter(chars[0]).ok_or_else(bad)?;
        let mutant = AminoAcid::from_one_letter(chars[chars.len() - 1]).ok_or_else(bad)?;
        let chain = chars[1];
        if !chain.is_ascii_alphanumeric() {
            return Err(bad());
        }
        let middle: String = chars[2..chars.len() - 1].iter().collect();
        if !middle.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-') {
            return Err(bad());
        }
        let number: ResidueNumber = middle.parse().map_err(|_| bad())?;
        Ok(Self::new(SiteRef { chain, number }, wild_type, mutant))
    }
}

/// Point mutations at distinct sites.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationSet {
    mutations: Vec<Mutation>,
}

impl MutationSet {
    pub fn new(mutations: Vec<Mutation>) -> Result<Self> {
        let mut seen = HashSet::new();
        for m in &mutations {
            if !seen.insert(m.site) {
                return Err(Error::InvalidArgument(format!("site {} mutated twice", m.site)));
            }
        }
        Ok(Self { mutations })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn mutations(&self) -> &[Mutation] {
        &self.mutations
    }

    pub fn len(&self) -> usize {
        self.mutations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mutations.is_empty()
    }

    pub fn sites(&self) -> impl Iterator<Item = SiteRef> + '_ {
        self.mutations.iter().map(|m| m.site)
    }

    pub fn reverted(&self) -> Self {
        Self {
            mutations: self.mutations.iter().map(Mutation::reverted).collect(),
        }
    }

    pub fn get(&self, site: &SiteRef) -> Option<&Mutation> {
        self.mutations.iter().find(|m| &m.site == site)
    }

    /// Checks every site exists in `model` with the expected wild-type letter.
    pub fn validate(&self, model: &StructureModel) -> Result<()> {
        for m in &self.mutations {
            let residue = model
                .residue(&m.site)
                .ok_or_else(|| Error::UnknownSite(m.site.to_string()))?;
            if residue.amino_acid != m.wild_type {
                return Err(Error::MutationConsistency {
                    site: m.to_string(),
                    expected: m.wild_type.one_letter(),
                    found: residue.amino_acid.one_letter(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for MutationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.mutations.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl FromStr for MutationSet {
    type Err = Error;

    /// Comma-separated mutations; an empty string is the empty set.
    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.split([',', ';']).map(str::trim).filter(|t| !t.is_empty()).collect();
        let mutations = tokens.into_iter().map(Mutation::from_str).collect::<Result<Vec<_>>>()?;
        Self::new(mutations)
    }
}

/// Relabels the mutated sites; backbone coordinates are copied unchanged.
pub fn apply_mutations(model: &StructureModel, mutations: &MutationSet) -> Result<StructureModel> {
    mutations.validate(model)?;
    let labels: Vec<_> = mutations
        .mutations()
        .iter()
        .map(|m| (model.flat_index(&m.site).expect("validated"), m.mutant))
        .collect();
    Ok(model.relabeled(&labels))
}
