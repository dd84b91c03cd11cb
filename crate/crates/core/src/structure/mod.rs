//! Structures: chains, residues and backbone atoms of a complex, PDB I/O,
//! binding-group partitions, mutations and geometry.

mod geometry;
mod model;
mod mutation;
mod partition;
mod pdb;

pub use geometry::{kabsch_rmsd, knn_graph, nearest_neighbors, superpose, KnnGraph, Neighbor, Superposition};
pub use model::{
    distance, BackboneCoords, Chain, ParseMetadata, Residue, ResidueNumber, SiteRef, StructureModel, Vec3,
    BACKBONE_SANITY_BOUND,
};
pub use mutation::{apply_mutations, Mutation, MutationSet};
pub use partition::{split_partition, Group, PartitionSpec, SplitComplex};
pub use pdb::{parse_pdb, write_pdb};

use std::path::Path;

use crate::error::Result;

/// Reads a PDB file; the model id is the file stem.
pub fn read_pdb_file(path: &Path) -> Result<StructureModel> {
    let text = std::fs::read_to_string(path)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "structure".to_string());
    parse_pdb(&text, &id)
}
