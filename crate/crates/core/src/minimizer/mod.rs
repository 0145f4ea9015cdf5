//! Normalized gradient flow for the coupled energy, Euler–Lagrange
//! diagnostics and the existence classification.

pub mod diagnostics;
pub mod flow;
pub mod sweep;
pub mod verdict;

pub use diagnostics::{
    concentration_diagnostic, el_residual, lagrange_multipliers, richardson, sign_normalize,
    sobolev_grid_constant, Multipliers, RichardsonEstimate, SobolevGrid,
};
pub use flow::{descend, initial_pair, minimize, FlowParams, Init, MinimizeResult, Status};
pub use sweep::{harmonize, sweep, SweepRow};
pub use verdict::{verdict, CaseId, ExistenceVerdict, ThresholdsUsed, Verdict, VerdictInput};
