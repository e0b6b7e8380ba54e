//! Weighted densities of integer sets, constructive weight synthesis, and an
//! exact simulator for block-structured C-type operators on `l1`.
//!
//! Everything is exact: rationals are GMP-backed, operator coefficients are
//! dyadic, and astronomically small schedule quantities live in exponent space.

pub mod cli;
pub mod ctype;
pub mod densities;
pub mod dynlab;
pub mod exactnum;
pub mod sampling;
pub mod weightforge;
