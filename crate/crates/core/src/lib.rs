//! Exact, finite, desk-scale computations around one question: when does a
//! surjection admit the symmetry structure of a quotient by a group action,
//! and what correspondence does that structure induce?
//!
//! Everything here is enumerative and deterministic. Sets are `0..n`, maps
//! are lookup tables, groups are Cayley tables, groupoids are arrow lists.
//! The modules build on each other:
//!
//! - [`kernel`] — finite sets and maps: pullbacks, kernel pairs,
//!   coequalizers, fiberwise automorphisms, and the epimorphism taxonomy
//!   (epi / regular / effective / strict / normal).
//! - [`algebra`] — finite groups by multiplication table, group actions,
//!   group bundles over a base set, and their section groups.
//! - [`groupoid`] — finite groupoids, action groupoids, congruences as
//!   groupoids, wide subgroupoids.
//! - [`galois`] — splitting actions of a kernel pair, the induced
//!   automorphisms, Galois structures, and the verdict report.
//! - [`correspondence`] — the order-reversing correspondence between
//!   subgroups of a splitting group and intermediate quotients.
//! - [`covers`] — graph covering spaces: monodromy, deck groups, pullback
//!   trivialization, intermediate covers.
//! - [`fieldext`] — extensions of prime fields: Frobenius automorphisms,
//!   tensor trivialization, fixed fields, the divisor-lattice
//!   correspondence.
//!
//! Enumeration is bounded by [`Caps`]; exceeding a bound is an error, never
//! silent truncation. With the `parallel` feature (default) the heavier
//! sweeps run on rayon; outputs are canonically ordered either way, so the
//! feature never changes results.

#![forbid(unsafe_code)]

mod bits;
mod error;
mod par;

pub mod algebra;
pub mod caps;
pub mod correspondence;
pub mod covers;
pub mod dot;
pub mod fieldext;
pub mod galois;
pub mod groupoid;
pub mod kernel;

pub use caps::Caps;
pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
