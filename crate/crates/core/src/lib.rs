//! Numerics for KWC-type total variation energies on an interval.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It covers
//!
//! * [`kernel`]: jump-cost kernels `K(ρ)`, their structural conditions and
//!   derived constants,
//! * [`pwc`]: piecewise-constant functions with exact `TV`, `TV_K` and fidelity
//!   evaluation,
//! * [`exact`]: closed-form theory for monotone data (jump placement, uniform
//!   step minimizers, jump-count bounds, critical fidelity weights),
//! * [`oracle`]: a brute-force dynamic-programming global minimizer over a
//!   discretized piecewise-constant class,
//! * [`flow`]: L² gradient-flow solvers for the ROF, Ambrosio–Tortorelli and
//!   phase-field KWC models.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;
pub mod exact;
pub mod flow;
pub mod grid;
pub mod kernel;
pub mod oracle;
pub mod pwc;
pub mod quad;

pub use error::{Error, Result};
pub use grid::GridSignal;
pub use kernel::{JumpKernel, KernelConstants};
pub use pwc::{DataFunction, EnergyBreakdown, PiecewiseConstant};
