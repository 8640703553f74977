//! Radio network dimensioning for 5G NR deployments.
//!
//! The crate follows the dimensioning chain from crowdsourced tower data to a
//! costed site plan:
//!
//! 1. [`opencellid`] reads and filters tower observations; [`identifiers`]
//!    handles the PLMN/TAC/ECI codes they carry.
//! 2. [`density`] rasterizes towers into a km² traffic grid and selects the
//!    highest-traffic deployment area.
//! 3. [`nr`] turns numerology and bandwidth parts into PRB counts.
//! 4. [`coverage`] runs the link budget and inverts a path-loss model into a
//!    coverage radius; [`capacity`] derives the capacity radius from cell
//!    throughput and subscriber density.
//! 5. [`balance`] reconciles the two through the cell load and classifies
//!    the design; [`economics`] prices the result per delivered bit.
//!
//! [`pipeline`] strings the stages together and [`cli`] exposes them as the
//! `gnbdim` binary.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balance;
pub mod capacity;
pub mod cli;
pub mod config;
pub mod coverage;
pub mod density;
pub mod economics;
pub mod identifiers;
pub mod nr;
pub mod opencellid;
pub mod pipeline;
