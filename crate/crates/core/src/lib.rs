//! Spin-chain state transfer interrupted by a local quantum dynamical process (QDP).
//!
//! Sites are labelled `1..=N`. One-magnon amplitudes are vectors indexed by
//! `site - 1`; two-magnon amplitudes are keyed by ordered pairs `(x1, x2)`, `x1 < x2`.

pub mod bessel;
pub mod bethe;
pub mod chain;
pub mod error;
pub mod golden;
pub mod green1;
pub mod harper;
pub mod oracle;
pub mod protocols;
pub mod quadrature;

pub use chain::{
    convention_hash, dispersion_one_magnon, momentum_grid, two_magnon_energy, BlochMoments,
    Boundary, ChainSpec, Gate, InitialState, QdpEvent, QdpKind, BLOCH_MOMENTS, CONVENTION_LEDGER,
};
pub use error::{Error, Result};
pub use green1::{green1, Green1Value, GreenMethod, OneMagnonPropagator};
