//! Central tolerance record.
//!
//! Algebraic identities are checked at a relative level of `1e-12`; claims
//! about quadrature accuracy are checked against the rule's order instead.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance for exact algebraic identities.
    pub algebraic: f64,
    /// Relative agreement between the Beta route and the quadrature route.
    pub oracle: f64,
    /// Relative tolerance for the K1/K2 = S identity.
    pub sobolev_identity: f64,
    /// Relative tolerance for the C2/K3 ratio identity.
    pub ratio_identity: f64,
    /// Slack for pointwise inequality checks (monotonicity, Hardy).
    pub inequality: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        algebraic: 1e-12,
        oracle: 1e-9,
        sobolev_identity: 1e-10,
        ratio_identity: 1e-8,
        inequality: 1e-10,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// `|a - b| / max(|a|, |b|, tiny)`.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    (a - b).abs() / scale
}
