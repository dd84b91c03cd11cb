#![allow(dead_code)]

pub mod oracles;

use bacycle::amino::AminoAcid;
use bacycle::fixtures::{self, ComplexShape};
use bacycle::structure::{PartitionSpec, StructureModel};
use rand_chacha::ChaCha8Rng;

pub const MATRIX_TSV: &str = include_str!("../../data/contact_matrix.tsv");

/// Contact matrix read straight from the shipped TSV.
pub fn matrix() -> [[f64; 20]; 20] {
    let letters = "ACDEFGHIKLMNPQRSTVWY";
    let mut lines = MATRIX_TSV
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<char> = lines
        .next()
        .unwrap()
        .split('\t')
        .skip(1)
        .map(|s| s.chars().next().unwrap())
        .collect();
    let mut m = [[f64::NAN; 20]; 20];
    for line in lines {
        let mut cells = line.split('\t');
        let row = letters.find(cells.next().unwrap()).unwrap();
        for (h, v) in header.iter().zip(cells) {
            m[row][letters.find(*h).unwrap()] = v.parse().unwrap();
        }
    }
    m
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Up to 16 nearest CA neighbours by full sort, ties to the lower index.
pub fn knn(model: &StructureModel, query: usize) -> Vec<(usize, f64)> {
    let cas = model.ca_positions();
    let q = cas[query].unwrap();
    let mut all: Vec<(usize, f64)> = cas
        .iter()
        .enumerate()
        .filter(|(j, p)| *j != query && p.is_some())
        .map(|(j, p)| (j, dist(q, p.unwrap())))
        .collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(16);
    all
}

/// `log p(a | visible context)` at flat site `query` by direct evaluation.
pub fn conditional(model: &StructureModel, query: usize, labels: &[Option<AminoAcid>]) -> [f64; 20] {
    let w = matrix();
    let neighbors = knn(model, query);
    let mut logits = [0.0; 20];
    for (a, l) in logits.iter_mut().enumerate() {
        let mut e = 0.0;
        for &(j, d) in &neighbors {
            if let Some(b) = labels[j] {
                e += w[a][b.index()] * (-(d - 6.0).powi(2) / 8.0).exp();
            }
        }
        *l = -e;
    }
    let z: f64 = logits.iter().map(|x| x.exp()).sum::<f64>().ln();
    logits.map(|x| x - z)
}

/// Sequence log-likelihood of `realized` at flat `sites` decoded in listed order.
pub fn loglik(model: &StructureModel, sites: &[usize], realized: &[AminoAcid]) -> f64 {
    let mut labels: Vec<Option<AminoAcid>> = model.sequence().into_iter().map(Some).collect();
    for &s in sites {
        labels[s] = None;
    }
    let mut total = 0.0;
    for (&s, &aa) in sites.iter().zip(realized) {
        total += conditional(model, s, &labels)[aa.index()];
        labels[s] = Some(aa);
    }
    total
}

pub fn complex(seed: u64, lengths: &[usize], group_a: usize) -> (StructureModel, PartitionSpec) {
    let mut rng = fixtures::rng(seed);
    complex_with(&mut rng, "fx", lengths, group_a)
}

pub fn complex_with(
    rng: &mut ChaCha8Rng,
    id: &str,
    lengths: &[usize],
    group_a: usize,
) -> (StructureModel, PartitionSpec) {
    let shape = ComplexShape {
        chain_lengths: lengths.to_vec(),
        group_a_chains: group_a,
    };
    fixtures::random_complex(id, &shape, rng).unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
