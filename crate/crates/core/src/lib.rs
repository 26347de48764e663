//! Co-design of tethered underwater energy-harvesting kites.
//!
//! Geometric sizing ([`hydro`]), structural sizing ([`wing_struct`],
//! [`fuse_struct`]) and a closed-loop flight-efficiency proxy ([`effmap`],
//! built from [`dynsim`] and [`ilc`]) are combined by [`codesign`] into
//! Pareto and dual-objective design searches.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airfoil;
pub mod bounds;
pub mod codesign;
pub mod config;
pub mod dynsim;
pub mod effmap;
pub mod error;
pub mod fuse_struct;
mod geometry;
pub mod hydro;
pub mod ilc;
pub mod proxy;
pub mod wing_struct;

pub use error::{Error, Result};
pub use hydro::{FlowEnv, FoilCoeffs, GlideOptimum, PowerForm, WingPlanform};
