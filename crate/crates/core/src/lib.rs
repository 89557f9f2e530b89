//! Multi-channel inverse optomechanically induced transparency in a
//! double-sided cavity with one charged resonator Coulomb-coupled to a second.
//!
//! The linearized probe response lives in [`response`], absorption channels in
//! [`channels`], the relative-phase (unilateral) analysis in [`phase`] and an
//! independent time-domain check of the sideband solution in [`oracle`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod cli;
pub mod error;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod phase;
pub mod response;

pub use error::{OmitError, Result};
pub use model::{Convention, PhysicalParams, SteadyState, SystemParams};
