//! Synthetic helical complexes and datasets derived from them. Everything is
//! a pure function of the seed; models are round-tripped through PDB text so
//! that in-memory models equal what a reader of the written files sees.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::amino::AminoAcid;
use crate::calibrate::Calibration;
use crate::cycle::{ddg_cycle, interface_sites, CycleInput};
use crate::error::{Error, Result};
use crate::scorer::ScorerHandle;
use crate::structure::{
    parse_pdb, write_pdb, BackboneCoords, Chain, Mutation, MutationSet, PartitionSpec, Residue, ResidueNumber, SiteRef,
    StructureModel, Vec3,
};

pub const HELIX_RADIUS: f64 = 2.3;
pub const HELIX_RISE: f64 = 1.5;
pub const HELIX_TWIST_DEG: f64 = 100.0;
pub const CHAIN_SPACING: f64 = 10.0;

const CHAIN_IDS: [char; 4] = ['A', 'B', 'C', 'D'];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ideal-ish helix along z through `axis`; residues are numbered from 1.
pub fn helix_chain(id: char, sequence: &[AminoAcid], axis: [f64; 2], z0: f64, phase: f64) -> Chain {
    let twist = HELIX_TWIST_DEG.to_radians();
    let residues = sequence
        .iter()
        .enumerate()
        .map(|(i, &aa)| {
            let theta = phase + twist * i as f64;
            let (s, c) = theta.sin_cos();
            let ca = [
                axis[0] + HELIX_RADIUS * c,
                axis[1] + HELIX_RADIUS * s,
                z0 + HELIX_RISE * i as f64,
            ];
            let at = |radial: f64, tangential: f64, dz: f64| -> Vec3 {
                [
                    ca[0] + radial * c - tangential * s,
                    ca[1] + radial * s + tangential * c,
                    ca[2] + dz,
                ]
            };
            Residue {
                number: ResidueNumber::new(i as i32 + 1, None),
                amino_acid: aa,
                backbone: BackboneCoords {
                    n: Some(at(-0.4, -1.0, -0.5)),
                    ca: Some(ca),
                    c: Some(at(-0.4, 1.0, 0.5)),
                    o: Some(at(0.6, 1.4, 1.1)),
                },
            }
        })
        .collect();
    Chain { id, residues }
}

pub fn random_sequence(rng: &mut ChaCha8Rng, len: usize) -> Vec<AminoAcid> {
    (0..len)
        .map(|_| AminoAcid::all()[rng.random_range(0..AminoAcid::all().len())])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexShape {
    /// One entry per chain, at most four chains.
    pub chain_lengths: Vec<usize>,
    /// The first `group_a_chains` chains form partner A.
    pub group_a_chains: usize,
}

impl Default for ComplexShape {
    fn default() -> Self {
        Self {
            chain_lengths: vec![12, 12],
            group_a_chains: 1,
        }
    }
}

/// Parallel helices whose axes sit about [`CHAIN_SPACING`] apart, with random
/// sequences, phases and small offsets.
pub fn random_complex(id: &str, shape: &ComplexShape, rng: &mut ChaCha8Rng) -> Result<(StructureModel, PartitionSpec)> {
    let n = shape.chain_lengths.len();
    if n < 2 || n > CHAIN_IDS.len() || shape.group_a_chains == 0 || shape.group_a_chains >= n {
        return Err(Error::InvalidArgument(format!(
            "complex shape needs 2..=4 chains split into two nonempty groups, got {shape:?}"
        )));
    }
    let h = CHAIN_SPACING * 3f64.sqrt() / 2.0;
    let axes = [
        [0.0, 0.0],
        [CHAIN_SPACING, 0.0],
        [CHAIN_SPACING / 2.0, h],
        [-CHAIN_SPACING / 2.0, h],
    ];
    let chains = shape
        .chain_lengths
        .iter()
        .enumerate()
        .map(|(i, &len)| {
            let seq = random_sequence(rng, len);
            let axis = [
                axes[i][0] + rng.random_range(-0.5..0.5),
                axes[i][1] + rng.random_range(-0.5..0.5),
            ];
            let z0 = rng.random_range(-1.0..1.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            helix_chain(CHAIN_IDS[i], &seq, axis, z0, phase)
        })
        .collect();
    let model = round_trip(&StructureModel::new(id, chains)?)?;
    let partition = PartitionSpec::new(
        CHAIN_IDS[..shape.group_a_chains].iter().copied(),
        CHAIN_IDS[shape.group_a_chains..n].iter().copied(),
    )?;
    Ok((model, partition))
}

/// The model as seen after writing and re-reading PDB text.
pub fn round_trip(model: &StructureModel) -> Result<StructureModel> {
    parse_pdb(&write_pdb(model), model.id())
}

/// 1..=`max_points` point mutations at distinct sites drawn from `sites`.
pub fn random_mutations(
    model: &StructureModel,
    sites: &[SiteRef],
    max_points: usize,
    rng: &mut ChaCha8Rng,
) -> Result<MutationSet> {
    if sites.is_empty() || max_points == 0 {
        return Err(Error::EmptyInput("mutation sites"));
    }
    let k = rng.random_range(1..=max_points.min(sites.len()));
    let picked = rand::seq::index::sample(rng, sites.len(), k);
    let mut mutations = Vec::with_capacity(k);
    for i in picked.iter() {
        let site = sites[i];
        let wt = model
            .residue(&site)
            .ok_or_else(|| Error::UnknownSite(site.to_string()))?
            .amino_acid;
        let mut mt = wt;
        while mt == wt {
            mt = AminoAcid::all()[rng.random_range(0..AminoAcid::all().len())];
        }
        mutations.push(Mutation::new(site, wt, mt));
    }
    MutationSet::new(mutations)
}

/// Uniformly distributed proper rotation.
pub fn random_rotation(rng: &mut ChaCha8Rng) -> UnitQuaternion<f64> {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    UnitQuaternion::from_quaternion(Quaternion::new(
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
        b * (tau * u3).cos(),
    ))
}

/// `x -> rotation * x + translation` applied to `chains` (all when empty).
pub fn rigid_motion(
    model: &StructureModel,
    chains: &[char],
    rotation: &UnitQuaternion<f64>,
    translation: &Vector3<f64>,
) -> StructureModel {
    model.transformed(chains, |p| {
        let q = rotation * Vector3::new(p[0], p[1], p[2]) + translation;
        [q[0], q[1], q[2]]
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    pub complex_id: String,
    pub partition: PartitionSpec,
    pub mutations: MutationSet,
    pub label: f64,
}

#[derive(Debug, Clone)]
pub struct FixtureDataset {
    pub models: Vec<StructureModel>,
    pub records: Vec<LabeledRecord>,
}

impl FixtureDataset {
    /// Writes `structures/<id>.pdb` under `dir` and the CSV at `dir/csv_name`;
    /// labels are omitted when `with_labels` is false.
    pub fn write(&self, dir: &Path, csv_name: &str, with_labels: bool) -> Result<PathBuf> {
        write_models(dir, "structures", &self.models)?;
        let path = dir.join(csv_name);
        let mut w = csv::Writer::from_path(&path)?;
        let mut header = vec!["complex_id", "pdb_path", "group_a", "group_b", "mutations"];
        if with_labels {
            header.push("ddg_label");
        }
        w.write_record(&header)?;
        for r in &self.records {
            let a: String = r.partition.group_a().iter().collect();
            let b: String = r.partition.group_b().iter().collect();
            let mut row = vec![
                r.complex_id.clone(),
                format!("structures/{}.pdb", r.complex_id),
                a,
                b,
                r.mutations.to_string(),
            ];
            if with_labels {
                row.push(format!("{:?}", r.label));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(path)
    }
}

fn write_models(dir: &Path, sub: &str, models: &[StructureModel]) -> Result<()> {
    let sdir = dir.join(sub);
    fs::create_dir_all(&sdir)?;
    for m in models {
        fs::write(sdir.join(format!("{}.pdb", m.id())), write_pdb(m))?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct DatasetShape {
    pub prefix: String,
    pub n_complexes: usize,
    pub n_records: usize,
    pub max_points: usize,
    /// Mutations restricted to interface residues.
    pub interface_only: bool,
}

/// Random complexes and mutations with labels `calib.apply(r)`, `r` the
/// builtin scorer's cycle log-ratio under canonical decoding.
pub fn labeled_dataset(shape: &DatasetShape, calib: &Calibration, seed: u64) -> Result<FixtureDataset> {
    if shape.n_complexes == 0 || shape.n_records < shape.n_complexes {
        return Err(Error::InvalidArgument(
            "dataset needs at least one record per complex".into(),
        ));
    }
    let mut rng = rng(seed);
    let scorer = ScorerHandle::builtin();
    let mut models = Vec::with_capacity(shape.n_complexes);
    let mut records = Vec::with_capacity(shape.n_records);
    for c in 0..shape.n_complexes {
        let n_chains = 2 + c % 2;
        let lengths: Vec<usize> = (0..n_chains).map(|_| rng.random_range(8..=14)).collect();
        let complex_shape = ComplexShape {
            chain_lengths: lengths,
            group_a_chains: 1,
        };
        let id = format!("{}{:02}", shape.prefix, c);
        let (model, partition) = random_complex(&id, &complex_shape, &mut rng)?;
        let sites: Vec<SiteRef> = if shape.interface_only {
            interface_sites(&model, &partition)
        } else {
            model.residues().map(|(s, _)| s).collect()
        };
        let count = shape.n_records / shape.n_complexes + usize::from(c < shape.n_records % shape.n_complexes);
        for _ in 0..count {
            let mutations = random_mutations(&model, &sites, shape.max_points, &mut rng)?;
            let r = ddg_cycle(
                &CycleInput::new(&model, &partition, &mutations, &scorer),
                &Calibration::default(),
            )?
            .r;
            records.push(LabeledRecord {
                complex_id: id.clone(),
                partition: partition.clone(),
                mutations,
                label: calib.apply(r),
            });
        }
        models.push(model);
    }
    Ok(FixtureDataset { models, records })
}

/// 200 records over 12 complexes labelled with kT = 1.7, bias = 0.3.
pub fn self_consistent_dataset(seed: u64) -> Result<FixtureDataset> {
    let shape = DatasetShape {
        prefix: "syn".into(),
        n_complexes: 12,
        n_records: 200,
        max_points: 2,
        interface_only: false,
    };
    labeled_dataset(&shape, &Calibration::new(1.7, 0.3)?, seed)
}

/// Interface mutations labelled by the cycle estimate (kT = 1, bias = 0), so
/// the unbound terms carry part of the signal.
pub fn interface_family(seed: u64) -> Result<FixtureDataset> {
    let shape = DatasetShape {
        prefix: "ifc".into(),
        n_complexes: 8,
        n_records: 120,
        max_points: 1,
        interface_only: true,
    };
    labeled_dataset(&shape, &Calibration::default(), seed)
}

#[derive(Debug, Clone)]
pub struct PoseSet {
    pub reference: StructureModel,
    pub partition: PartitionSpec,
    pub poses: Vec<StructureModel>,
}

/// A native complex plus `n_poses` decoys made by moving partner B rigidly;
/// pose 0 is the native itself. Every pose then gets its own global rigid
/// motion, which leaves C-RMSD to the native unchanged.
pub fn pose_set(id: &str, n_poses: usize, seed: u64) -> Result<PoseSet> {
    if n_poses == 0 {
        return Err(Error::EmptyInput("poses"));
    }
    let mut rng = rng(seed);
    let (reference, partition) = random_complex(id, &ComplexShape::default(), &mut rng)?;
    let part_b = partition.group_b().to_vec();
    let mut poses = Vec::with_capacity(n_poses);
    for i in 0..n_poses {
        let mut pose = reference.clone();
        if i > 0 {
            let angle = rng.random_range(0.0..0.6);
            let axis = random_rotation(&mut rng) * Vector3::z_axis();
            let local = UnitQuaternion::from_axis_angle(&axis, angle);
            let shift = Vector3::new(
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
            );
            let centroid = chain_centroid(&pose, &part_b);
            let t = centroid - local * centroid + shift;
            pose = rigid_motion(&pose, &part_b, &local, &t);
        }
        let global = random_rotation(&mut rng);
        let t = Vector3::new(
            rng.random_range(-20.0..20.0),
            rng.random_range(-20.0..20.0),
            rng.random_range(-20.0..20.0),
        );
        let pose = rigid_motion(&pose, &[], &global, &t).with_id(format!("{id}_pose{i:02}"));
        poses.push(round_trip(&pose)?);
    }
    Ok(PoseSet {
        reference,
        partition,
        poses,
    })
}

fn chain_centroid(model: &StructureModel, chains: &[char]) -> Vector3<f64> {
    let pts: Vec<Vector3<f64>> = model
        .residues()
        .filter(|(s, _)| chains.contains(&s.chain))
        .filter_map(|(_, r)| r.backbone.ca)
        .map(|p| Vector3::new(p[0], p[1], p[2]))
        .collect();
    pts.iter().sum::<Vector3<f64>>() / pts.len().max(1) as f64
}

/// Paths written by [`write_fixture_set`], relative to its directory.
#[derive(Debug, Clone, Serialize)]
pub struct FixtureManifest {
    pub seed: u64,
    pub dataset: PathBuf,
    pub batch: PathBuf,
    pub interface: PathBuf,
    pub poses: PathBuf,
    pub archive: PathBuf,
    pub structures: usize,
}

/// Writes the standard fixture set: `dataset.csv` (self-consistent labels),
/// `batch.csv` (first three records, unlabeled), `interface.csv`,
/// `poses.csv` with `poses/*.pdb`, and `archive.jsonl` holding the builtin
/// scorer's tables for every dataset record.
pub fn write_fixture_set(dir: &Path, seed: u64) -> Result<FixtureManifest> {
    fs::create_dir_all(dir)?;
    let data = self_consistent_dataset(seed)?;
    data.write(dir, "dataset.csv", true)?;
    FixtureDataset {
        models: data.models.clone(),
        records: data.records[..3].to_vec(),
    }
    .write(dir, "batch.csv", false)?;
    let family = interface_family(seed.wrapping_add(1))?;
    family.write(dir, "interface.csv", true)?;

    let poses = pose_set("dock", 8, seed.wrapping_add(2))?;
    write_models(dir, "poses", &poses.poses)?;
    write_models(dir, "poses", std::slice::from_ref(&poses.reference))?;
    let mut w = csv::Writer::from_path(dir.join("poses.csv"))?;
    w.write_record(["pose_id", "pdb_path", "ref_path"])?;
    for p in &poses.poses {
        w.write_record([
            p.id().to_string(),
            format!("poses/{}.pdb", p.id()),
            format!("poses/{}.pdb", poses.reference.id()),
        ])?;
    }
    w.flush()?;

    let recorder = ScorerHandle::recording(ScorerHandle::builtin());
    for r in &data.records {
        let model = data
            .models
            .iter()
            .find(|m| m.id() == r.complex_id)
            .expect("record refers to a generated model");
        ddg_cycle(
            &CycleInput::new(model, &r.partition, &r.mutations, &recorder),
            &Calibration::default(),
        )?;
    }
    let archive = recorder.recorded_archive().expect("recording scorer");
    let mut out = std::io::BufWriter::new(fs::File::create(dir.join("archive.jsonl"))?);
    archive.write(&mut out)?;
    std::io::Write::flush(&mut out)?;

    Ok(FixtureManifest {
        seed,
        dataset: "dataset.csv".into(),
        batch: "batch.csv".into(),
        interface: "interface.csv".into(),
        poses: "poses.csv".into(),
        archive: "archive.jsonl".into(),
        structures: data.models.len() + family.models.len(),
    })
}
