//! Finite elements for the Naghdi shell model: a partially projected mixed
//! method for bending-dominated shells, a consistent discontinuous Galerkin
//! method for membrane/shear-dominated and intermediate shells, and a
//! thickness-extrapolation procedure that tells the two regimes apart.

pub mod assembly;
pub mod config;
pub mod error;
pub mod exact;
pub mod expr;
pub mod fe_space;
pub mod geometry;
pub mod mesh;
pub mod norms;
pub mod output;
pub mod poly;
pub mod problem;
pub mod quadrature;
pub mod regime;
pub mod runner;
pub mod solve;
pub mod sparse;
pub mod strain;
pub mod study;

pub use error::{Error, ErrorClass, Result};
