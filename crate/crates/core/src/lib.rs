//! Dimensions of decoherence-free subsystems for `N` uses of a two-mode bosonic
//! channel under collective U(2) depolarization.
//!
//! The multiplicity `K^j_{NL}` of the SU(2) irrep `j` inside the `L`-excitation
//! sector of `N` uses is computed exactly by [`multiplicity`], and cross-checked
//! by the brute-force oracles in [`cg_oracle`] and the numerical ones in
//! [`channel`].

pub mod cg_oracle;
pub mod channel;
pub mod cli;
pub mod error;
pub mod multiplicity;
pub mod types;
pub mod wigner;

pub use error::{DfsError, Result};
pub use multiplicity::{best_multiplicity, build_table, k_initial, k_value, recursion_support, MultiplicityTable};
pub use types::{
    sector_dimension, valid_spins, IrrepMultiset, Multiplicity, SectorIndex, SpecialUnitarySU2, SpinLabel, UnitaryU2,
};
