//! Exact topological degree of maps from the 2-sphere to itself, plus the
//! tooling around it: spherical-harmonic datasets, Lipschitz bounds for MLP
//! encoders and the LSBD identity score.

pub mod chains;
pub mod cli;
pub mod degree;
pub mod error;
pub mod harmonics;
pub mod metrics;
pub mod nn;
pub mod rotation;
pub mod sphere;
pub mod triangulation;

pub use degree::{compute_degree, compute_degree_with, DegreeOptions, DegreeReport, SphereMap};
pub use error::{Error, Result};
