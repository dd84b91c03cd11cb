//! Binding free-energy estimates from inverse-folding sequence likelihoods.
//!
//! A scorer gives `log p(S | X)` for a sequence on a fixed backbone. Scoring
//! the bound complex and both unbound partners, for wild type and mutant,
//! closes the thermodynamic cycle:
//!
//! ```text
//! r = [L(mut | AB) - L(mut | A) - L(mut | B)] - [L(wt | AB) - L(wt | A) - L(wt | B)]
//! ΔΔG ≈ -kT · r + bias
//! ```
//!
//! ```
//! use bacycle::prelude::*;
//!
//! let mut rng = bacycle::fixtures::rng(7);
//! let (model, partition) = bacycle::fixtures::random_complex("demo", &Default::default(), &mut rng).unwrap();
//! let wt = model.residue(&"A:3".parse().unwrap()).unwrap().amino_acid;
//! let to = if wt == AminoAcid::Ala { AminoAcid::Gly } else { AminoAcid::Ala };
//! let mutations = MutationSet::new(vec![Mutation::new("A:3".parse().unwrap(), wt, to)]).unwrap();
//! let scorer = ScorerHandle::builtin();
//! let est = ddg_cycle(&CycleInput::new(&model, &partition, &mutations, &scorer), &Calibration::default()).unwrap();
//! assert!(est.energy.is_finite());
//! ```

pub mod amino;
pub mod applications;
pub mod calibrate;
pub mod cli;
pub mod cycle;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod scorer;
pub mod structure;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::amino::AminoAcid;
    pub use crate::calibrate::{fit_calibration, Calibration, Loss};
    pub use crate::cycle::{ddg, ddg_cycle, ddg_prev, dg_estimate, CycleInput, DesignScope, EnergyEstimate, Estimator};
    pub use crate::error::{Error, Result};
    pub use crate::scorer::{sequence_loglik, DesignTask, OrderPolicy, ScorerHandle};
    pub use crate::structure::{
        parse_pdb, read_pdb_file, Mutation, MutationSet, PartitionSpec, SiteRef, StructureModel,
    };
}
