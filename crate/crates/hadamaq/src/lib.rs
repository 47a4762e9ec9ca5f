//! Invariants of complex Hadamard matrices under the quantum-permutation
//! correspondence: magic bases, projection grids, commutativity decisions,
//! magic-square and group extraction, tensor-of-Fourier decompositions, and
//! the explicit classification of the 4×4 family `M_q`.
//!
//! The entry point for whole-matrix analysis is [`report::analyze`]; the
//! individual stages are exposed by the modules below. See the guide in
//! `book/` for worked examples.

// Index loops over (i, j) pairs read better than iterator chains in the
// dense matrix code throughout this crate.
#![allow(clippy::needless_range_loop)]

pub mod catalogue;
pub mod decomp;
pub mod equivalence;
pub mod group;
pub mod hadamard;
pub mod magic;
pub mod mq;
pub mod perm;
pub mod phase;
pub mod report;
pub mod square;

pub use decomp::{
    decompose, quotient_table, verify_decomposition, DecomposeError, FourierDecomposition,
};
pub use equivalence::EquivalenceWitness;
pub use group::{
    fingerprint, generate, invariant_factors, match_named, GroupElement, GroupError,
    GroupFingerprint, NamedGroup,
};
pub use hadamard::{dephase, tensor, ButsonLevel, HadamardError, HadamardMatrix, Mode};
pub use magic::{
    commutation_profile, magic_basis, projection_grid, validate_magic_unitary, Commutativity,
    MagicBasis, MagicError, ProjectionGrid,
};
pub use perm::Permutation;
pub use phase::{vec_equal_mod_scalar, Phase, PhaseError, Root, UnitVector};
pub use report::{analyze, AnalysisReport, AnalyzeOptions};
pub use square::{extract_square, normalize, MagicSquare, SquareError};

/// Default tolerance for unit-modulus, orthogonality and proportionality checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default bound on root-of-unity orders for snapping and Butson scans.
pub const DEFAULT_MAX_ORDER: u64 = 48;

// Every code block in the guide compiles and runs with `cargo test --doc`,
// keeping the book in sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/phases.md")]
    mod phases {}
    #[doc = include_str!("../../../book/src/hadamard-matrices.md")]
    mod hadamard_matrices {}
    #[doc = include_str!("../../../book/src/magic-unitaries.md")]
    mod magic_unitaries {}
    #[doc = include_str!("../../../book/src/magic-squares.md")]
    mod magic_squares {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/fourier-decomposition.md")]
    mod fourier_decomposition {}
    #[doc = include_str!("../../../book/src/mq-family.md")]
    mod mq_family {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
