//! Rank stability of elliptic curves in `B ⋉ Z/p^nZ` extensions: prime
//! sieves, point counting, mod-`p` image certification, density checks and
//! the discriminant census of the extensions.

pub mod arith;
pub mod conditions;
pub mod count;
pub mod curve;
pub mod error;
pub mod fields;
pub mod galois;
mod serial;
pub mod sieve;

pub use conditions::{HypothesisCertification, IntersectionStatus};
pub use count::{CensusReport, CountingParams, ExponentFit, HypothesisReport, Verdict};
pub use curve::{CountStrategy, FrobeniusData, WeierstrassCurve};
pub use error::{Error, Result};
pub use fields::{AbelianField, SemidirectDescriptor};
pub use galois::{ImageStatus, SurjectivityCertificate, WitnessLedger};
pub use sieve::{DensityReport, SieveConfig, TePrimeRecord};
