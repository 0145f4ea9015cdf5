//! Radial discretization of a ball, weights, fields and the coupled energy.

pub mod energy;
pub mod field;
pub mod grid;
pub mod weight;

pub use energy::{
    critical_exponent, energy, inner, lq_norm, sobolev_quotient, weighted_gradient_energy,
    EnergyReport, Functional, Stiffness,
};
pub use field::FieldPair;
pub use grid::{Grading, RadialGrid, MIN_CELLS};
pub use weight::{MonotonicityReport, Perturbation, WeightProfile};
