//! The 20 canonical amino acids, in the alphabetical one-letter order used
//! by every 20-vector in this crate (`ACDEFGHIKLMNPQRSTVWY`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const ALPHABET: &str = "ACDEFGHIKLMNPQRSTVWY";
pub const NUM_AMINO_ACIDS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "char", try_from = "char")]
pub enum AminoAcid {
    Ala,
    Cys,
    Asp,
    Glu,
    Phe,
    Gly,
    His,
    Ile,
    Lys,
    Leu,
    Met,
    Asn,
    Pro,
    Gln,
    Arg,
    Ser,
    Thr,
    Val,
    Trp,
    Tyr,
}

use AminoAcid::*;

const ALL: [AminoAcid; NUM_AMINO_ACIDS] = [
    Ala, Cys, Asp, Glu, Phe, Gly, His, Ile, Lys, Leu, Met, Asn, Pro, Gln, Arg, Ser, Thr, Val, Trp, Tyr,
];

const THREE_LETTER: [&str; NUM_AMINO_ACIDS] = [
    "ALA", "CYS", "ASP", "GLU", "PHE", "GLY", "HIS", "ILE", "LYS", "LEU", "MET", "ASN", "PRO", "GLN", "ARG", "SER",
    "THR", "VAL", "TRP", "TYR",
];

impl AminoAcid {
    pub fn all() -> &'static [AminoAcid; NUM_AMINO_ACIDS] {
        &ALL
    }

    /// Position in the alphabetical one-letter ordering.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        ALL.get(index).copied()
    }

    pub fn one_letter(self) -> char {
        ALPHABET.as_bytes()[self.index()] as char
    }

    pub fn three_letter(self) -> &'static str {
        THREE_LETTER[self.index()]
    }

    pub fn from_one_letter(c: char) -> Option<Self> {
        let upper = c.to_ascii_uppercase();
        ALPHABET.find(upper).map(|i| ALL[i])
    }

    /// Only the 20 standard residue names are accepted; modified residues
    /// such as MSE are treated as non-canonical.
    pub fn from_three_letter(name: &str) -> Option<Self> {
        THREE_LETTER
            .iter()
            .position(|&t| t.eq_ignore_ascii_case(name.trim()))
            .map(|i| ALL[i])
    }
}

impl fmt::Display for AminoAcid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.one_letter())
    }
}

impl From<AminoAcid> for char {
    fn from(aa: AminoAcid) -> char {
        aa.one_letter()
    }
}

impl TryFrom<char> for AminoAcid {
    type Error = String;

    fn try_from(c: char) -> Result<Self, Self::Error> {
        AminoAcid::from_one_letter(c).ok_or_else(|| format!("`{c}` is not a canonical amino acid"))
    }
}

impl FromStr for AminoAcid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => AminoAcid::try_from(c),
            _ => AminoAcid::from_three_letter(s).ok_or_else(|| format!("`{s}` is not a canonical amino acid")),
        }
    }
}

/// Renders a slice of amino acids as a one-letter string.
pub fn to_string(seq: &[AminoAcid]) -> String {
    seq.iter().map(|aa| aa.one_letter()).collect()
}

/// Parses a one-letter string into amino acids.
pub fn parse_sequence(s: &str) -> Option<Vec<AminoAcid>> {
    s.chars().map(AminoAcid::from_one_letter).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_order_matches_indices() {
        for (i, c) in ALPHABET.chars().enumerate() {
            let aa = AminoAcid::from_one_letter(c).unwrap();
            assert_eq!(aa.index(), i);
            assert_eq!(AminoAcid::from_three_letter(aa.three_letter()), Some(aa));
        }
    }

    #[test]
    fn rejects_non_canonical() {
        assert_eq!(AminoAcid::from_one_letter('X'), None);
        assert_eq!(AminoAcid::from_three_letter("MSE"), None);
        assert!("B".parse::<AminoAcid>().is_err());
    }
}
