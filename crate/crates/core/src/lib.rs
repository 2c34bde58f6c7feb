//! SNV cycles of every time step from a single Vietoris-Rips barcode.
//!
//! A finite distance space `(S, h)` with natural-valued `h` carries a time
//! filtration `S_0 ⊆ … ⊆ S_m`, given by each point's first time step
//! `D(x)`. The classical analysis computes the degree-1 barcode of every
//! step separately and keeps the bars born at scale 1. This crate also
//! offers the deformed analysis: with `N` the smallest power of ten above
//! `m`, distances become `h(x, y) + max(D(x), D(y)) / N`, and one barcode of
//! the resulting Rips filtration yields the SNV cycles of every step
//! together with the step at which each stops being a cycle.
//!
//! Modules, bottom up:
//!
//! * [`distance`]: spaces, labels, the deformation and its scale schedule;
//! * [`rips`]: Rips complexes up to dimension 2 and their boundary matrices;
//! * [`persistence`]: F_p column reduction with representatives;
//! * [`pipeline`]: the classical and deformed analyses and their comparison;
//! * [`oracle`]: brute-force Betti numbers and random instances;
//! * [`io`]: input formats and report serialization.

pub mod distance;
pub mod error;
pub mod field;
pub mod io;
pub mod oracle;
pub mod persistence;
pub mod pipeline;
pub mod rips;

pub use distance::{DistanceMatrix, DistanceSpace, ScaleSchedule, ScaledDistanceMatrix, TimeLabels};
pub use error::{Error, Result};
pub use field::PrimeField;
pub use pipeline::{
    benchmark, classical_snv, deformed_snv, stability_report, verify_correspondence, ClassicalCap,
    ClassicalOptions, DeformedCap, DeformedOptions, SnvReport,
};
