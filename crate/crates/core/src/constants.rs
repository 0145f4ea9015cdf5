//! Bubble constants and coupling thresholds.
//!
//! Every constant reduces to the radial moment
//! `I(s, p) = ∫₀^∞ r^s (1 + r²)^{-p} dr`, evaluated either through the Beta
//! function or by double-exponential quadrature after `r = tan ϑ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{tanh_sinh, TanhSinh};
use crate::special::{beta, gamma, unit_sphere_area};
use crate::tolerances::rel_diff;

/// How radial moments are evaluated.
#[derive(Debug, Clone, Copy)]
pub enum MomentRoute {
    Beta,
    Quadrature(TanhSinh),
}

impl MomentRoute {
    pub fn quadrature() -> Self {
        MomentRoute::Quadrature(TanhSinh::default())
    }

    pub fn moment(self, s: f64, p: f64) -> Result<f64> {
        match self {
            MomentRoute::Beta => radial_moment(s, p),
            MomentRoute::Quadrature(rule) => radial_moment_quadrature(s, p, rule),
        }
    }
}

fn check_convergence(s: f64, p: f64) -> Result<()> {
    if !(s > -1.0) || !(p > 0.5 * (s + 1.0)) {
        return Err(Error::DivergentIntegral { s, p });
    }
    Ok(())
}

/// `I(s, p) = ½ B((s+1)/2, p - (s+1)/2)`.
pub fn radial_moment(s: f64, p: f64) -> Result<f64> {
    check_convergence(s, p)?;
    let a = 0.5 * (s + 1.0);
    Ok(0.5 * beta(a, p - a))
}

/// `I(s, p) = ∫₀^{π/2} sin^s ϑ cos^{2p-2-s} ϑ dϑ` by tanh-sinh quadrature.
pub fn radial_moment_quadrature(s: f64, p: f64, rule: TanhSinh) -> Result<f64> {
    check_convergence(s, p)?;
    let c = 2.0 * p - 2.0 - s;
    // cos ϑ = sin(π/2 - ϑ) keeps the right endpoint accurate
    let est = tanh_sinh(0.5 * PI, rule, |left, right| left.sin().powf(s) * right.sin().powf(c));
    Ok(est.value)
}

/// Both routes side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub beta: f64,
    pub quadrature: f64,
    pub rel_diff: f64,
}

pub fn radial_moment_checked(s: f64, p: f64) -> Result<MomentCheck> {
    let beta = radial_moment(s, p)?;
    let quadrature = radial_moment_quadrature(s, p, TanhSinh::default())?;
    Ok(MomentCheck {
        beta,
        quadrature,
        rel_diff: rel_diff(beta, quadrature),
    })
}

/// Best Sobolev constant `πN(N-2)(Γ(N/2)/Γ(N))^{2/N}`.
pub fn best_sobolev_constant(dim: usize) -> f64 {
    let n = dim as f64;
    PI * n * (n - 2.0) * (gamma(0.5 * n) / gamma(n)).powf(2.0 / n)
}

/// Constants of the standard bubble `(1 + |y|²)^{-(N-2)/2}` in dimension N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleConstants {
    pub dim: usize,
    /// `∫|∇U|²`
    pub k1: f64,
    /// `(∫|U|^q)^{2/q}`
    pub k2: f64,
    /// `∫|U|²`, finite only for N ≥ 5.
    k3: Option<f64>,
    pub s: f64,
    /// Area of the unit (N-1)-sphere.
    pub sigma: f64,
}

impl BubbleConstants {
    pub fn valid_k3(&self) -> bool {
        self.k3.is_some()
    }

    /// In dimension 4 the L² mass grows like ε|ln ε| and has no such constant.
    pub fn k3(&self) -> Result<f64> {
        self.k3.ok_or(Error::LogScaledRegime)
    }
}

pub fn bubble_constants(dim: usize) -> Result<BubbleConstants> {
    bubble_constants_with(dim, MomentRoute::Beta)
}

pub fn bubble_constants_with(dim: usize, route: MomentRoute) -> Result<BubbleConstants> {
    if dim < 4 {
        return Err(Error::BadDomain(format!(
            "bubble constants need N ≥ 4, got {dim}"
        )));
    }
    let n = dim as f64;
    let sigma = unit_sphere_area(dim);
    let k1 = (n - 2.0).powi(2) * sigma * route.moment(n + 1.0, n)?;
    let k2 = (sigma * route.moment(n - 1.0, n)?).powf((n - 2.0) / n);
    let k3 = if dim >= 5 {
        Some(sigma * route.moment(n - 1.0, n - 2.0)?)
    } else {
        None
    };
    Ok(BubbleConstants {
        dim,
        k1,
        k2,
        k3,
        s: k1 / k2,
        sigma,
    })
}

/// `C_k = (N-2)² A_k ∫ |y|^{k+2}/(1+|y|²)^N dy` (and `D_l` alike).
pub fn correction_constant(dim: usize, coeff: f64, exponent: f64) -> Result<f64> {
    correction_constant_with(dim, coeff, exponent, MomentRoute::Beta)
}

pub fn correction_constant_with(
    dim: usize,
    coeff: f64,
    exponent: f64,
    route: MomentRoute,
) -> Result<f64> {
    let n = dim as f64;
    if !(exponent > 0.0) {
        return Err(Error::BadDomain(format!("exponent {exponent} must be positive")));
    }
    let s = n + exponent + 1.0;
    if exponent >= n - 2.0 {
        return Err(Error::DivergentIntegral { s, p: n });
    }
    if coeff == 0.0 {
        return Ok(0.0);
    }
    Ok((n - 2.0).powi(2) * coeff * unit_sphere_area(dim) * route.moment(s, n)?)
}

/// `m_N = N(N-2)(N+2) / (8(N-1))`, a single rounding of an exact ratio.
pub fn m_n(dim: usize) -> f64 {
    let n = dim as u64;
    (n * (n - 2) * (n + 2)) as f64 / (8 * (n - 1)) as f64
}

/// Coupling thresholds above which the bubble energy drops below γ₀S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub dim: usize,
    pub m_n: f64,
    /// Both exponents equal to 2.
    pub gamma_n: f64,
    /// Only `a` quadratic.
    pub gamma_tilde_a: f64,
    /// Only `b` quadratic.
    pub gamma_tilde_b: f64,
}

pub fn thresholds(dim: usize, a2: f64, b2: f64) -> Result<Thresholds> {
    if dim < 4 {
        return Err(Error::BadDomain(format!("thresholds need N ≥ 4, got {dim}")));
    }
    if a2 < 0.0 || b2 < 0.0 {
        return Err(Error::BadDomain("quadratic coefficients must be nonnegative".into()));
    }
    let m = m_n(dim);
    let (gamma_n, gamma_tilde_a, gamma_tilde_b) = if dim == 4 {
        (a2 + b2, a2, b2)
    } else {
        (m * (a2 + b2), m * a2, m * b2)
    };
    Ok(Thresholds {
        dim,
        m_n: m,
        gamma_n,
        gamma_tilde_a,
        gamma_tilde_b,
    })
}
