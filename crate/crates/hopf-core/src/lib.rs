//! Exact symbolic engine for finitely presented deformed Hopf algebras.
//!
//! The crate builds up in layers: truncated parameter polynomials over the
//! Gaussian rationals ([`scalar`]), noncommutative polynomials and PBW normal
//! ordering over a finite generator list ([`ncpoly`]), a small text format
//! for presentation bundles ([`presentation`]), Hopf-structure maps and
//! axiom/bicrossproduct checking ([`hopfops`]), factorial-delta dual pairings
//! ([`pairing`]), and induced representations from characters of a
//! commutative sector ([`induce`]).  Check results are collected in
//! [`report`] records shared by the library tests and the CLI.

pub mod scalar;

pub mod ncpoly;
pub mod presentation;
pub mod hopfops;
pub mod pairing;
pub mod induce;
pub mod report;

/// Built-in presentation bundles for the two deformed Galilei symmetries.
pub mod bundles {
    /// Standard deformation: the boost twist lives on the time translation.
    pub const GALILEI_STANDARD: &str =
        include_str!("../../../bundles/galilei_standard.hopf");
    /// Nonstandard deformation: the boost twist lives on the space translation.
    pub const GALILEI_NONSTANDARD: &str =
        include_str!("../../../bundles/galilei_nonstandard.hopf");
}
