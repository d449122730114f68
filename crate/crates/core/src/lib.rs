//! A desk-scale laboratory for algorithmic information theory.
//!
//! The crate fixes one concrete universal machine (a prefix-free bit-opcode
//! interpreter, see [`vm`]) and computes, exactly and under explicit resource
//! budgets, the classical machine-dependent quantities built on top of it:
//!
//! * plain and prefix Kolmogorov complexity, conditional variants, and
//!   shortest-program witnesses ([`enumerator`]);
//! * halting-probability lower approximations ([`enumerator::omega_lower`]);
//! * finite dyadic probability ensembles with exact interval entropy,
//!   typicality, and total information ([`ensembles`]);
//! * effective complexity over enumerated candidate ensembles ([`effective`]);
//! * logical depth, the structure function, and minimal sufficient
//!   statistics ([`depth_stats`]);
//! * a block ensemble whose entropy encodes the halting probability
//!   ([`omega_appendix`]).
//!
//! Every quantity is the budgeted variant: minima are exact within a stated
//! program-length and step budget, and real-valued quantities are returned as
//! exact dyadic intervals that provably contain the true value.  Nothing in
//! the crate samples or estimates; reruns are bit-for-bit reproducible.

pub mod bits;
pub mod cache;
pub mod codec;
pub mod depth_stats;
pub mod dyadic;
pub mod effective;
pub mod ensembles;
pub mod enumerator;
pub mod interval;
pub mod naive;
pub mod omega_appendix;
pub mod reports;
pub mod vm;

pub use bits::BitString;
pub use dyadic::Dyadic;
pub use interval::RealInterval;
pub use vm::{Budget, MachineKind, MachineResult, RunStatus, MACHINE_VERSION};
