//! Fixed-column PDB reader and writer for backbone atoms.
//!
//! Reading keeps the first model only, altloc blank or `A`, and the N/CA/C/O
//! atoms of the 20 canonical residues. HETATM records are skipped.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::amino::AminoAcid;
use crate::error::{Error, Result};

use super::model::{BackboneCoords, Chain, ParseMetadata, Residue, ResidueNumber, StructureModel, Vec3};

fn column(line: &str, start: usize, end: usize) -> &str {
    // 1-based inclusive PDB columns.
    let end = end.min(line.len());
    if start > end {
        return "";
    }
    line.get(start - 1..end).unwrap_or("")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct PendingResidue {
    number: ResidueNumber,
    amino_acid: AminoAcid,
    backbone: BackboneCoords,
    first_line: usize,
}

pub fn parse_pdb(text: &str, id: &str) -> Result<StructureModel> {
    let mut chain_order: Vec<char> = Vec::new();
    let mut residues: HashMap<char, Vec<PendingResidue>> = HashMap::new();
    let mut lookup: HashMap<(char, ResidueNumber), usize> = HashMap::new();
    let mut dropped: HashSet<(char, ResidueNumber)> = HashSet::new();
    let mut metadata = ParseMetadata::default();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let record = column(line, 1, 6);
        if record.starts_with("ENDMDL") {
            break;
        }
        if record.starts_with("HETATM") {
            metadata.ignored_hetatm += 1;
            continue;
        }
        if record != "ATOM  " && record.trim_end() != "ATOM" {
            continue;
        }
        if !line.is_ascii() {
            return Err(parse_err(lineno, "non-ASCII ATOM record"));
        }
        if line.len() < 54 {
            return Err(parse_err(
                lineno,
                format!("ATOM record too short ({} columns)", line.len()),
            ));
        }
        let atom_name = column(line, 13, 16).trim();
        let altloc = column(line, 17, 17).chars().next().unwrap_or(' ');
        let res_name = column(line, 18, 20).trim();
        let chain_id = column(line, 22, 22).chars().next().unwrap_or(' ');
        let seq_num = column(line, 23, 26)
            .trim()
            .parse::<i32>()
            .map_err(|_| parse_err(lineno, format!("bad residue number `{}`", column(line, 23, 26))))?;
        let icode = match column(line, 27, 27).chars().next() {
            Some(' ') | None => None,
            Some(c) => Some(c),
        };
        let mut xyz: Vec3 = [0.0; 3];
        for (k, (s, e)) in [(31, 38), (39, 46), (47, 54)].into_iter().enumerate() {
            let field = column(line, s, e).trim();
            let v = field
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, format!("bad coordinate `{field}`")))?;
            if !v.is_finite() {
                return Err(parse_err(lineno, format!("non-finite coordinate `{field}`")));
            }
            xyz[k] = v;
        }

        if altloc != ' ' && altloc != 'A' {
            metadata.skipped_altloc_atoms += 1;
            continue;
        }
        let number = ResidueNumber::new(seq_num, icode);
        let Some(amino_acid) = AminoAcid::from_three_letter(res_name) else {
            dropped.insert((chain_id, number));
            continue;
        };
        let slot = match atom_name {
            "N" => 0,
            "CA" => 1,
            "C" => 2,
            "O" => 3,
            _ => continue,
        };

        let key = (chain_id, number);
        let list = residues.entry(chain_id).or_insert_with(|| {
            chain_order.push(chain_id);
            Vec::new()
        });
        let pos = *lookup.entry(key).or_insert_with(|| {
            list.push(PendingResidue {
                number,
                amino_acid,
                backbone: BackboneCoords::default(),
                first_line: lineno,
            });
            list.len() - 1
        });
        let residue = &mut list[pos];
        if residue.amino_acid != amino_acid {
            // microheterogeneity: first residue name wins
            continue;
        }
        let atom = match slot {
            0 => &mut residue.backbone.n,
            1 => &mut residue.backbone.ca,
            2 => &mut residue.backbone.c,
            _ => &mut residue.backbone.o,
        };
        if atom.is_none() {
            *atom = Some(xyz);
        }
    }

    metadata.dropped_noncanonical = dropped.len();
    if !dropped.is_empty() {
        log::warn!("{id}: dropped {} non-canonical residue(s)", dropped.len());
    }

    let mut chains = Vec::with_capacity(chain_order.len());
    for chain_id in chain_order {
        let mut list = residues.remove(&chain_id).unwrap_or_default();
        list.sort_by_key(|r| r.number);
        let mut out = Vec::with_capacity(list.len());
        for r in list {
            let residue = Residue {
                number: r.number,
                amino_acid: r.amino_acid,
                backbone: r.backbone,
            };
            residue
                .backbone
                .check()
                .map_err(|m| parse_err(r.first_line, format!("residue {chain_id}:{}: {m}", r.number)))?;
            out.push(residue);
        }
        chains.push(Chain {
            id: chain_id,
            residues: out,
        });
    }
    let total: usize = chains.iter().map(|c| c.residues.len()).sum();
    if total == 0 {
        return Err(Error::EmptyStructure);
    }
    Ok(StructureModel::new(id, chains)?.with_metadata(metadata))
}

fn atom_field(name: &str) -> String {
    // element symbol right-justified in columns 13-14
    if name.len() >= 4 {
        name.to_string()
    } else {
        format!(" {name:<3}")
    }
}

/// Emits ATOM records (plus TER/END) for every present backbone atom.
pub fn write_pdb(model: &StructureModel) -> String {
    let mut out = String::new();
    let mut serial = 1usize;
    for chain in model.chains() {
        let mut last = None;
        for residue in &chain.residues {
            for (name, atom) in residue.backbone.atoms() {
                let Some([x, y, z]) = atom else { continue };
                let element = &name[..1];
                let _ = writeln!(
                    out,
                    "ATOM  {serial:>5} {atom} {res:>3} {chain}{seq:>4}{icode}   {x:>8.3}{y:>8.3}{z:>8.3}{occ:>6.2}{b:>6.2}          {element:>2}",
                    serial = serial % 100_000,
                    atom = atom_field(name),
                    res = residue.amino_acid.three_letter(),
                    chain = chain.id,
                    seq = residue.number.seq_num,
                    icode = residue.number.insertion_code.unwrap_or(' '),
                    occ = 1.0,
                    b = 0.0,
                );
                serial += 1;
            }
            last = Some(residue);
        }
        if let Some(residue) = last {
            let _ = writeln!(
                out,
                "TER   {serial:>5}      {res:>3} {chain}{seq:>4}{icode}",
                serial = serial % 100_000,
                res = residue.amino_acid.three_letter(),
                chain = chain.id,
                seq = residue.number.seq_num,
                icode = residue.number.insertion_code.unwrap_or(' '),
            );
            serial += 1;
        }
    }
    out.push_str("END\n");
    out
}
