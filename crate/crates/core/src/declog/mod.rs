//! Part II calculus on the exponential model of a decomposable product
//! system: sections and their normalizations, modulus and norm curves,
//! partition sums, and the branch-tracked logarithm of normalized inner
//! products.
//!
//! Model scope: decomposables are exactly `lambda exp(f)`, which makes every
//! claim checkable against the closed-form oracle
//! `L = <f - eps 1, h - eps 1>` while the operations themselves only consume
//! inner-product values.

mod curves;
mod elog;
mod vectors;

pub use curves::{ineq_76_check, modulus_curve, norm_monotone_check, ModulusCurve, NormMonotoneReport};
pub use elog::{
    b_limit, b_partition, le_branch, le_branch_curve, le_pd_gram, lemma911, psi_s_check, rebase_check,
    BLimitRow, BLimitTable, Lemma911Report, Lemma911Row, LePdReport, BRANCH_EXTRA_LEVELS,
};
pub use vectors::{dv_inner, left_divide, random_section, CoherentSection, DecompVector, ExpReference};
