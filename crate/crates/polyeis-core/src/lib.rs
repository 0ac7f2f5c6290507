//! Exact and numeric machinery for partial zeta functions of totally real
//! fields and for the polylogarithm-current computation of Eisenstein
//! residues at the cusps of Hilbert modular varieties.
//!
//! The crate is organized bottom-up:
//!
//! * [`field`]: exact arithmetic in degree 1 and 2 totally real fields,
//!   fractional ideals, units, sign characters, and unit-orbit enumeration;
//! * [`zeta`]: the Hecke series `L`, the partial zeta `F`, special values
//!   through the functional equation, and an independent exact-rational
//!   evaluator built on Shintani cone decompositions;
//! * [`forms`]: truncated jet algebra (the fiber of the logarithm sheaf)
//!   and exterior calculus with analytic coefficient oracles;
//! * [`nori`]: the explicit current solving the transport equation, the
//!   Eisenstein class built from it, and its pushforward to the cusp torus
//!   by two independent routes;
//! * [`cusp`]: level-group combinatorics, the cusp set, torsion projections,
//!   and the coinvariant-dimension computation;
//! * [`verify`]: the seeded verification batteries shared by the CLI and
//!   the integration tests.
//!
//! Everything here is `no_std + alloc`; IO and the command-line interface
//! live in the companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cusp;
pub mod field;
pub mod forms;
pub mod nori;
pub mod reduce;
pub mod verify;
pub mod zeta;

pub use field::{FieldElement, FractionalIdeal, RayUnitGroup, SignCharacter, TotallyRealField};
pub use forms::JetSeries;
