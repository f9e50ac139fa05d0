//! Dyadic-parabolic frequency decompositions, FIO-Hardy norms and rough
//! pseudodifferential operators on periodic grids.

pub mod config;
pub mod decomp;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod io;
pub mod lab;
pub mod pseudo;
pub mod spaces;
pub mod symbols;
pub mod sum;

pub use error::{Error, Result};
pub use grid::{
    apply_multiplier, forward_dft, inverse_dft, sobolev_weight, Grid, GridFunction, Lattice,
    Multiplier, Spectrum,
};
