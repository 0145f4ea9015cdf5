//! Star-shaped integral identity, the ω(a, b) quotient and its estimates,
//! and the Hardy-type inequality behind the lower estimates.

pub mod hardy;
pub mod omega;
pub mod pohozaev;

pub use hardy::{hardy_check, HardyCheck};
pub use omega::{
    omega_bounds, omega_estimate, omega_lower_bound, phi_quotient, phi_scaling, profile_bounds, tilde_weight,
    FamilyPoint, OmegaBounds, OmegaEstimate, OmegaSearch, OmegaValue, PhiScaling,
};
pub use pohozaev::{pohozaev_report, pohozaev_report_forced, PohozaevReport};
