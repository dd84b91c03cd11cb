use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::model::StructureModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
}

/// Assignment of a complex's chains to the two binding partners.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    group_a: Vec<char>,
    group_b: Vec<char>,
}

fn parse_group(s: &str) -> Vec<char> {
    s.chars()
        .filter(|c| !matches!(c, ',' | ';' | '_' | ' ' | '+' | '/'))
        .collect()
}

impl PartitionSpec {
    pub fn new(group_a: impl IntoIterator<Item = char>, group_b: impl IntoIterator<Item = char>) -> Result<Self> {
        let mut group_a: Vec<char> = group_a.into_iter().collect();
        let mut group_b: Vec<char> = group_b.into_iter().collect();
        group_a.sort_unstable();
        group_a.dedup();
        group_b.sort_unstable();
        group_b.dedup();
        if group_a.is_empty() || group_b.is_empty() {
            return Err(Error::Partition("both groups must be nonempty".into()));
        }
        if let Some(c) = group_a.iter().find(|c| group_b.contains(c)) {
            return Err(Error::Partition(format!("chain `{c}` is in both groups")));
        }
        Ok(Self { group_a, group_b })
    }

    /// Parses chain-letter strings such as `"HL"` / `"G"` (separators allowed).
    pub fn parse(group_a: &str, group_b: &str) -> Result<Self> {
        Self::new(parse_group(group_a), parse_group(group_b))
    }

    pub fn group_a(&self) -> &[char] {
        &self.group_a
    }

    pub fn group_b(&self) -> &[char] {
        &self.group_b
    }

    pub fn group_of(&self, chain: char) -> Option<Group> {
        if self.group_a.contains(&chain) {
            Some(Group::A)
        } else if self.group_b.contains(&chain) {
            Some(Group::B)
        } else {
            None
        }
    }

    pub fn chains(&self, group: Group) -> &[char] {
        match group {
            Group::A => &self.group_a,
            Group::B => &self.group_b,
        }
    }

    /// The two groups must cover exactly the model's chains.
    pub fn validate(&self, model: &StructureModel) -> Result<()> {
        for c in self.group_a.iter().chain(&self.group_b) {
            if model.chain(*c).is_none() {
                return Err(Error::Partition(format!("chain `{c}` not present in {}", model.id())));
            }
        }
        for chain in model.chains() {
            if self.group_of(chain.id).is_none() {
                return Err(Error::Partition(format!(
                    "chain `{}` of {} assigned to neither group",
                    chain.id,
                    model.id()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: String = self.group_a.iter().collect();
        let b: String = self.group_b.iter().collect();
        write!(f, "{a}_{b}")
    }
}

/// Bound complex plus the two partner sub-structures with unchanged coordinates.
#[derive(Debug, Clone)]
pub struct SplitComplex {
    pub bound: StructureModel,
    pub part_a: StructureModel,
    pub part_b: StructureModel,
}

pub fn split_partition(model: &StructureModel, partition: &PartitionSpec) -> Result<SplitComplex> {
    partition.validate(model)?;
    Ok(SplitComplex {
        bound: model.clone(),
        part_a: model.subset(partition.group_a())?,
        part_b: model.subset(partition.group_b())?,
    })
}
