//! Exact and asymptotic analysis of the two-row unfriendly seating process.
//!
//! Diners arrive one at a time and take a uniformly random seat that has no
//! occupied neighbor (left, right, or across). This crate computes the law of
//! the number of seated diners once no seat is left, by several independent
//! routes that cross-check one another.

pub mod asymptotics;
pub mod dominance;
pub mod error;
pub mod hardcore;
pub mod pgf;
pub mod poly;
pub mod precision;
pub mod seat;
pub mod series;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use poly::{fmt_rational, parse_rational, Rational, RationalPoly};
pub use seat::{
    build_config, exact_distribution, simulate, ExactDistribution, ExactOracle, Family, FamilyTag,
    Seat, SeatGrid, SeatState, SelectionMode, Simulation,
};
pub use pgf::{one_row_mean, page_variance, MomentReport, PgfEngine};
pub use series::{CoeffTail, DecayBound, RationalSeq, TailMode, ZSeries};
pub use asymptotics::{constants, ConstantSet};
pub use dominance::{counterexample_report, sd_ge, verify_ladder, DominanceVerdict};
pub use hardcore::{hardcore_constants, pgf_hardcore, TransferMatrix};
pub use spectral::{xnt_spectral, ynt_spectral, BranchData, CutPolicy, SpectralValue};
