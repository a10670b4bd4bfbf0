//! Distributed SU(3) lattice gauge theory: link algebra, domain-decomposed
//! gauge fields with halo exchange, Wilson and rectangle-improved actions,
//! heatbath and overrelaxation updates, and machine benchmarks.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod clock;
pub mod comm;
pub mod field;
pub mod gaugeaction;
pub mod io;
pub mod lattice;
pub mod linpack;
pub mod montecarlo;
pub mod par;
pub mod rng;
pub mod su3;
