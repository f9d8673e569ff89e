//! Traveling-wave solutions of a mean-field model of knowledge diffusion:
//! a nonlocal KPP-type front for the productivity distribution coupled to an
//! HJB equation for the value of search.

#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod coupling;
pub mod error;
pub mod front;
pub mod grid;
pub mod hjb;
pub mod io;
pub mod kpp;
pub mod params;
pub mod rescaling;
pub mod sweep;
pub mod tridiag;
pub mod wave;

pub use error::{Error, Result};
pub use grid::Grid;
pub use params::{ModelParams, SolverConfig};
