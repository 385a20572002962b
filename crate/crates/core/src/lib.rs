//! Spontaneous radiation emitted by atoms under collapse models.
//!
//! The crate evaluates the differential emission rate dΓ/dE predicted by the
//! Continuous Spontaneous Localization (CSL) model and by the Diósi–Penrose
//! (DP) model, both in the Markovian and in the colored-noise (exponential
//! correlation) form. Rates are parametrized by the shell structure of the
//! emitting atom: protons sit at the origin, electrons are grouped in shells
//! with occupancies `N_o` and mean radii `ρ_o`, and inter-electron distances
//! are scaled by the [`PairGeometry`] coefficients α (same shell) and β
//! (different shells).
//!
//! Module map:
//!
//! * [`units`]: CODATA 2018 constants, [`Energy`], `sinc` and the photon phase.
//! * [`atom`]: shells, atoms, JSON ingestion and charged-pair enumeration.
//! * [`csl`] and [`dp`]: the rate formulas and their `f_ij` kernels.
//! * [`spectra`]: energy grids, spectra, shape normalization and diagnostics.
//! * [`inference`]: synthetic Poisson spectra and the iterative
//!   correlation-length fit.
//! * [`io`]: CSV/JSON file formats.
//!
//! All formulas are evaluated in SI units internally. Energies are passed in
//! keV and rates are returned per atom in 1/(s·keV).

pub mod atom;
pub mod csl;
pub mod dp;
mod error;
pub mod inference;
pub mod io;
pub mod quadrature;
pub mod spectra;
pub mod units;

pub use atom::{builtin_atom, enumerate_pairs, parse_atom, Atom, PairGeometry, PairKind, PairTerm, Shell};
pub use csl::CslParams;
pub use dp::DpParams;
pub use error::{AtomError, Error, Result};
pub use spectra::{EnergyGrid, ModelParams, RateModel, Spectrum};
pub use units::{Energy, PhysicalConstants, CODATA_2018};

/// Crate version, echoed into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
