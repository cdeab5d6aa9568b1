//! Numerical machinery for discretized path spaces and the continuous
//! tensor product structures they generate.
//!
//! The crate builds, at desk scale, the chain
//!
//! 1. step paths on a uniform grid with exact concatenation and
//!    factorization ([`path`]),
//! 2. additive forms (kernels) on path pairs with conditional-positivity
//!    and defect diagnostics ([`forms`]),
//! 3. the centered-difference Hilbert space calculus those forms induce
//!    ([`hilbert`]),
//! 4. additive 1- and 2-cocycles, their trivializations, and the resulting
//!    logarithm and gauge maps ([`cocycles`]),
//! 5. symmetric Fock space with exact exponential Grams and strong-spanning
//!    witnesses ([`fock`]),
//! 6. the product structure `F_t` with defect-corrected multiplication and
//!    the isomorphism onto the exponential model ([`product`]),
//! 7. decomposable vectors, coherent sections, partition logarithms and
//!    branch-tracked logarithms of normalized inner products ([`declog`]),
//! 8. offset and obstacle-potential concatenation demos ([`planar`]).
//!
//! Every identity is verified against an independent route (closed forms,
//! partition limits, or direct Gram arithmetic); the `acceptance`
//! integration test runs the full battery.

pub mod cocycles;
pub mod declog;
pub mod error;
pub mod fock;
pub mod forms;
pub mod grid;
pub mod hilbert;
pub mod numeric;
pub mod path;
pub mod planar;
pub mod product;
pub mod sampling;

pub use error::{Error, Result};
pub use grid::{Partition, TimeGrid};
pub use numeric::C;
pub use path::{concat_box, prefix, propagator, PathSection, StepPath};
