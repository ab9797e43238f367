//! Fourier-analytic tools for sets in `Z/NZ`: transforms and progression
//! counts, spectra and energies, dissociated covers, Bohr sets, the density
//! increment pipelines and the progression-free constructions that feed
//! them.
//!
//! Sets are dense indicators over a [`CyclicGroup`]. Every pipeline returns
//! exact integer counts next to the floating quantities derived from them.

pub mod bohr;
pub mod constructions;
pub mod error;
pub mod fourier;
pub mod group;
pub mod increment;
pub mod report;
pub mod selftest;
pub mod setfile;
pub mod spectrum;
pub mod span;

pub use bohr::{BohrMaterialized, BohrSpec, RegularityCertificate};
pub use constructions::{ConstructionReport, Method};
pub use error::{Error, Result};
pub use fourier::{CountMode, FourierTable};
pub use group::{CyclicGroup, GroupSet, RealFunction, ThreeAp};
pub use increment::{IncrementResult, LedgerEntry, PipelineConfig, Provenance};
pub use report::{AnalysisReport, ReportFormat, RunConfig};
pub use setfile::SetFile;
pub use spectrum::{CaseSplit, CaseVerdict, SmoothingReport, SpectrumLevel};
pub use span::SpanCover;
