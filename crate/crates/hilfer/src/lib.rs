//! Mild solutions of Hilfer fractional integro-differential equations
//! on finite-dimensional sectorial operator models, plus numerical checks
//! of the a-priori estimates behind them.

pub mod cli;
pub mod config;
pub mod error;
pub mod frac_ops;
pub mod gronwall;
pub mod mlf;
pub mod nonlinearity;
pub mod operator;
pub mod solver;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
