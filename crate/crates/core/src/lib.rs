//! Finite element kernels for the relaxed micromorphic continuum model
//! in 2D: nodal Lagrange and tangential-conforming Nedelec
//! discretizations of the coupled displacement / micro-distortion
//! problem, sparse SPD assembly and solve, field post-processing, and
//! the benchmark study drivers.

pub mod assembly;
pub mod constraints;
pub mod dofmap;
pub mod elements;
pub mod error;
pub mod export;
pub mod fields;
pub mod la;
pub mod mapping;
pub mod materials;
pub mod mesh;
pub mod quadrature;
pub mod sample;
pub mod solver;
pub mod sparse;
pub mod studies;
pub mod verify;

pub use error::{Error, Result};
