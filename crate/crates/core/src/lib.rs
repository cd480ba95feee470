//! Stochastic box-ball systems with capacity-limited carriers, the
//! PushTASEP, their gap processes, and the overdetermined Skorokhod
//! decomposition `W = X + R Y + alpha` of those gap processes.
//!
//! The crate is organised bottom-up: [`bbs`] and [`pushtasep`] hold the
//! dynamics, [`gap`] and [`partition`] the gap chain and its boundary cells,
//! [`reflection`] the exact reflection algebra, [`srbm`] the reflected
//! Brownian reference, and [`experiments`] the Monte Carlo harness.

pub mod bbs;
pub mod error;
pub mod experiments;
pub mod gap;
pub mod io;
pub mod matrix;
pub mod params;
pub mod partition;
pub mod pushtasep;
pub mod reflection;
pub mod rng;
pub mod simplex;
pub mod srbm;
pub mod stats;


pub use bbs::{BallConfig, CoinVector};
pub use error::{Error, Result};
pub use params::{Capacity, DynamicsParams, Epsilon};
pub use rng::RngStream;
