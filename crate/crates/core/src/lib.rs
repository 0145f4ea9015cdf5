//! Numerical laboratory for the weighted critical-exponent coupled system
//! `-div(a∇u) - λv = Λ₁ u^{q-1}`, `-div(b∇v) - λu = Λ₂ v^{q-1}` on a ball.

pub mod asymptotics;
pub mod constants;
pub mod error;
pub mod harness;
pub mod minimizer;
pub mod nonexistence;
pub mod quadrature;
pub mod radial;
pub mod special;
pub mod spectral;
pub mod tolerances;
pub mod tridiag;

pub use error::{Error, Result};
