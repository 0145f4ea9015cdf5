use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss, gauss_legendre};
use crate::radial::{FieldPair, RadialGrid, Stiffness, WeightProfile};
use crate::spectral::first_eigenpair;

/// Nodal samples of `r w'(r)`.
pub fn tilde_weight(w: &WeightProfile, grid: &RadialGrid) -> Vec<f64> {
    grid.nodes().iter().map(|&r| w.tilde(r)).collect()
}

/// Conductances `σ ∫_cell ã r^{N-1} dr / h²`, so that the energy is
/// exact for the piecewise-linear interpolant. Midpoint sampling would
/// underweight the first cells, where `r^{N+1}` varies by orders of magnitude.
pub(crate) fn tilde_stiffness(w: &WeightProfile, grid: &RadialGrid) -> Stiffness {
    let (xs, ws) = gauss_legendre(CELL_ORDER);
    let x = grid.nodes();
    let dim = grid.dim() as i32;
    let face: Vec<f64> = (0..grid.cells())
        .map(|c| {
            let (lo, h) = (x[c], x[c + 1] - x[c]);
            let mut total = 0.0;
            for (xi, wi) in xs.iter().zip(&ws) {
                let r = lo + 0.5 * h * (1.0 + xi);
                total += 0.5 * wi * w.tilde(r) * r.powi(dim - 1);
            }
            // cell average over the face area the stiffness multiplies back in
            total / grid.midpoints()[c].powi(dim - 1)
        })
        .collect();
    Stiffness::from_face_weights(grid, &face)
}

const CELL_ORDER: usize = 8;

/// `∫ u_h v_h` for the piecewise-linear interpolants.
pub(crate) fn p1_inner(u: &[f64], v: &[f64], grid: &RadialGrid) -> f64 {
    let (xs, ws) = gauss_legendre(CELL_ORDER);
    let x = grid.nodes();
    let dim = grid.dim() as i32;
    let mut total = 0.0;
    for c in 0..grid.cells() {
        let (lo, h) = (x[c], x[c + 1] - x[c]);
        for (xi, wi) in xs.iter().zip(&ws) {
            let t = 0.5 * (1.0 + xi);
            let r = lo + t * h;
            let uu = u[c] + t * (u[c + 1] - u[c]);
            let vv = v[c] + t * (v[c + 1] - v[c]);
            total += 0.5 * h * wi * r.powi(dim - 1) * uu * vv;
        }
    }
    grid.sigma() * total
}

/// Consistent mass matrix of the piecewise-linear basis on the free nodes.
fn p1_mass_apply(u: &[f64], grid: &RadialGrid) -> Vec<f64> {
    let (xs, ws) = gauss_legendre(CELL_ORDER);
    let x = grid.nodes();
    let dim = grid.dim() as i32;
    let n = grid.cells();
    let mut out = vec![0.0; n + 1];
    for c in 0..n {
        let (lo, h) = (x[c], x[c + 1] - x[c]);
        let (mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0);
        for (xi, wi) in xs.iter().zip(&ws) {
            let t = 0.5 * (1.0 + xi);
            let j = 0.5 * h * wi * (lo + t * h).powi(dim - 1);
            m00 += j * (1.0 - t) * (1.0 - t);
            m01 += j * (1.0 - t) * t;
            m11 += j * t * t;
        }
        out[c] += m00 * u[c] + m01 * u[c + 1];
        out[c + 1] += m01 * u[c] + m11 * u[c + 1];
    }
    out.truncate(n);
    out.iter().map(|x| grid.sigma() * x).collect()
}

/// `¼ (∫ã|u'|² + ∫b̃|v'|²) / ∫uv`, integrated exactly for the
/// piecewise-linear interpolants.
pub fn phi_quotient(pair: &FieldPair, a: &WeightProfile, b: &WeightProfile, grid: &RadialGrid) -> Result<f64> {
    let s = phi_scaling(pair, a, b, grid)?;
    Ok(0.25 * (s.alpha + s.beta) / s.gamma)
}

/// The three integrals of the quotient and its infimum along `t ↦ (tu, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiScaling {
    /// `∫ã|u'|²`.
    pub alpha: f64,
    /// `∫b̃|v'|²`.
    pub beta: f64,
    /// `∫uv`.
    pub gamma: f64,
    /// Minimizing `t`; absent when the infimum is only approached.
    pub t_opt: Option<f64>,
    /// `inf_t φ(tu, v)`: `√(αβ)/(2γ)` for `α, β > 0`, `0` when one of them
    /// vanishes, `-∞` when one is negative. Only meaningful for `γ > 0`.
    pub min_value: f64,
}

pub fn phi_scaling(pair: &FieldPair, a: &WeightProfile, b: &WeightProfile, grid: &RadialGrid) -> Result<PhiScaling> {
    grid.check_len(&pair.u)?;
    grid.check_len(&pair.v)?;
    let gamma = p1_inner(&pair.u, &pair.v, grid);
    let scale = (p1_inner(&pair.u, &pair.u, grid) * p1_inner(&pair.v, &pair.v, grid)).sqrt();
    if gamma == 0.0 || gamma.abs() <= 1e-14 * scale {
        return Err(Error::DegenerateDenominator);
    }
    let alpha = tilde_stiffness(a, grid).energy(&pair.u);
    let beta = tilde_stiffness(b, grid).energy(&pair.v);
    Ok(scaled_minimum(alpha, beta, gamma))
}

fn scaled_minimum(alpha: f64, beta: f64, gamma: f64) -> PhiScaling {
    let (t_opt, min_value) = if alpha < 0.0 || beta < 0.0 {
        (None, f64::NEG_INFINITY)
    } else if alpha == 0.0 || beta == 0.0 {
        (None, 0.0)
    } else {
        (Some((beta / alpha).sqrt()), (alpha * beta).sqrt() / (2.0 * gamma))
    };
    PhiScaling {
        alpha,
        beta,
        gamma,
        t_opt,
        min_value,
    }
}

/// Printed endpoints of the ω estimates; `upper` is absent when no upper
/// estimate is stated for the regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaBounds {
    pub lower: f64,
    pub upper: Option<f64>,
}

/// Evaluates the estimate matching `(k, l)`: `(0, 0)` for `k, l > 2`; the
/// mixed-quadratic pair of inequalities when exactly one exponent is 2 and
/// the other exceeds it; the lower estimate alone for `0 < k, l ≤ 2`.
pub fn omega_bounds(
    dim: usize,
    k: f64,
    l: f64,
    a_k: f64,
    b_l: f64,
    diam: f64,
    lambda1: f64,
) -> Result<OmegaBounds> {
    let pref = (dim * dim) as f64 / 16.0;
    if k > 2.0 && l > 2.0 {
        Ok(OmegaBounds {
            lower: 0.0,
            upper: Some(0.0),
        })
    } else if k == 2.0 && l > 2.0 {
        Ok(OmegaBounds {
            lower: pref * a_k.min(l * b_l * diam.powf(l - 2.0)),
            upper: Some(0.5 * a_k * lambda1 * diam * diam),
        })
    } else if k > 2.0 && l == 2.0 {
        Ok(OmegaBounds {
            lower: pref * (k * a_k * diam.powf(k - 2.0)).min(b_l),
            upper: Some(0.5 * b_l * lambda1 * diam * diam),
        })
    } else if k > 0.0 && k <= 2.0 && l > 0.0 && l <= 2.0 {
        Ok(OmegaBounds {
            lower: pref * (k * a_k * diam.powf(k - 2.0)).min(l * b_l * diam.powf(l - 2.0)),
            upper: None,
        })
    } else {
        Err(Error::OutsideTable(format!("no omega estimate for k = {k}, l = {l}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaSearch {
    /// Iterations of the shape search.
    pub max_iters: usize,
    /// Relative change of the shape value that ends the search.
    pub tol: f64,
    /// Number of halvings in each test family.
    pub family_levels: usize,
    /// A confirming family must reach below this value.
    pub confirm_below: f64,
}

impl Default for OmegaSearch {
    fn default() -> Self {
        OmegaSearch {
            max_iters: 400,
            tol: 1e-10,
            family_levels: 48,
            confirm_below: -1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaValue {
    /// `ã + b̃ < 0` at `witness`; `confirmation` is the lowest quotient the
    /// shrinking family reached there.
    NegInfinity { witness: f64, confirmation: f64 },
    Finite(f64),
}

impl OmegaValue {
    pub fn as_f64(self) -> f64 {
        match self {
            OmegaValue::NegInfinity { .. } => f64::NEG_INFINITY,
            OmegaValue::Finite(v) => v,
        }
    }
}

/// One member of a shrinking test family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyPoint {
    /// Support radius of the bump.
    pub scale: f64,
    pub value: f64,
}

/// Upper estimate of ω over radial pairs with `∫uv > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaEstimate {
    pub value: OmegaValue,
    pub bounds: Option<OmegaBounds>,
    /// Best shape found on the grid, rescaled by its optimal `t`.
    pub pair: Option<FieldPair>,
    pub shape_value: Option<f64>,
    pub family: Vec<FamilyPoint>,
    pub iterations: usize,
}

impl OmegaEstimate {
    /// `lower ≤ value ≤ upper + tol` for whichever bounds exist.
    pub fn respects_bounds(&self, tol: f64) -> bool {
        let v = self.value.as_f64();
        match self.bounds {
            None => true,
            Some(b) => v >= b.lower - tol && b.upper.map_or(true, |u| v <= u + tol),
        }
    }
}

fn bump(s: f64) -> (f64, f64) {
    if s >= 1.0 {
        (0.0, 0.0)
    } else {
        let t = 1.0 - s * s;
        (t * t, -4.0 * s * t)
    }
}

/// Quotient of `u = v = ψ((r - center)/δ)` with the optimal scaling, by
/// quadrature on the bump support.
fn family_value(a: &WeightProfile, b: &WeightProfile, dim: usize, center: f64, delta: f64) -> f64 {
    let lo = (center - delta).max(0.0);
    let hi = center + delta;
    let jac = |r: f64| r.powi(dim as i32 - 1);
    let grad2 = |r: f64| {
        let (_, d) = bump((r - center).abs() / delta);
        d * d / (delta * delta)
    };
    let alpha = composite_gauss(lo, hi, 32, 10, |r| a.tilde(r) * grad2(r) * jac(r));
    let beta = composite_gauss(lo, hi, 32, 10, |r| b.tilde(r) * grad2(r) * jac(r));
    let gamma = composite_gauss(lo, hi, 32, 10, |r| {
        let (p, _) = bump((r - center).abs() / delta);
        p * p * jac(r)
    });
    if alpha + beta < 0.0 {
        // u = v already drives the quotient down; report that value
        0.25 * (alpha + beta) / gamma
    } else {
        scaled_minimum(alpha, beta, gamma).min_value
    }
}

/// Shape search: power iteration on `Ã⁻¹ M B̃⁻¹ M`, whose top eigenvector
/// minimizes `¼(uᵀÃu + vᵀB̃v)/(uᵀMv)`; every iterate is scored with the
/// closed-form optimal scaling.
fn shape_search(
    a: &WeightProfile,
    b: &WeightProfile,
    grid: &RadialGrid,
    search: &OmegaSearch,
) -> Option<(f64, FieldPair, usize)> {
    let (sa, sb) = (tilde_stiffness(a, grid), tilde_stiffness(b, grid));
    if sa.conductance().iter().chain(sb.conductance()).any(|&k| k <= 0.0 || !k.is_finite()) {
        return None;
    }
    let (ma, mb) = (sa.dirichlet_matrix(), sb.dirichlet_matrix());
    let radius = grid.radius();
    let mut u: Vec<f64> = grid.nodes().iter().map(|r| 1.0 - (r / radius).powi(2)).collect();
    let mut best: Option<(f64, FieldPair)> = None;
    let mut last = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..search.max_iters {
        iterations = it + 1;
        let mut v = mb.solve(&p1_mass_apply(&u, grid)).ok()?;
        v.push(0.0);
        let mut next = ma.solve(&p1_mass_apply(&v, grid)).ok()?;
        next.push(0.0);
        let norm = p1_inner(&next, &next, grid).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return None;
        }
        u = next.iter().map(|x| x / norm).collect();
        let pair = FieldPair {
            u: u.clone(),
            v,
            lambda: 0.0,
            generation: iterations as u64,
        };
        let s = phi_scaling(&pair, a, b, grid).ok()?;
        if s.gamma <= 0.0 {
            return None;
        }
        let value = s.min_value;
        if best.as_ref().map_or(true, |(b, _)| value < *b) {
            let t = s.t_opt.unwrap_or(1.0);
            let scaled = FieldPair {
                u: pair.u.iter().map(|x| t * x).collect(),
                ..pair
            };
            best = Some((value, scaled));
        }
        if (last - value).abs() <= search.tol * value.abs() {
            break;
        }
        last = value;
    }
    best.map(|(v, p)| (v, p, iterations))
}

/// Bounds for a pure-power pair with nonnegative `ã`, `b̃`; `None` outside
/// the estimate table or for profiles that are not pure powers about the
/// center.
pub fn profile_bounds(a: &WeightProfile, b: &WeightProfile, grid: &RadialGrid) -> Result<Option<OmegaBounds>> {
    let pure = |w: &WeightProfile| w.anchor == 0.0 && w.coefficient > 0.0 && w.perturbation.is_none();
    if !(pure(a) && pure(b)) {
        return Ok(None);
    }
    let diam = 2.0 * grid.radius();
    let lambda1 = first_eigenpair(&WeightProfile::constant(1.0), grid, 1e-10)?.lambda1;
    match omega_bounds(grid.dim(), a.exponent, b.exponent, a.coefficient, b.coefficient, diam, lambda1) {
        Ok(b) => Ok(Some(b)),
        Err(Error::OutsideTable(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// A value not exceeding ω(a, b), for unperturbed profiles centered at the
/// origin: the printed lower estimate when `0 < k, l ≤ 2`, and `0` for every
/// other combination of nonnegative `ã`, `b̃` (including constant weights).
pub fn omega_lower_bound(a: &WeightProfile, b: &WeightProfile, grid: &RadialGrid) -> Result<Option<f64>> {
    let plain = |w: &WeightProfile| w.anchor == 0.0 && w.perturbation.is_none() && w.coefficient >= 0.0;
    if !(plain(a) && plain(b)) {
        return Ok(None);
    }
    let sub = |w: &WeightProfile| w.coefficient > 0.0 && w.exponent > 0.0 && w.exponent <= 2.0;
    if sub(a) && sub(b) {
        if let Some(bounds) = profile_bounds(a, b, grid)? {
            return Ok(Some(bounds.lower));
        }
    }
    Ok(Some(0.0))
}

/// Estimate of ω(a, b). A node with `ã + b̃ < 0` gives the `-∞` flag once a
/// bump family shrinking onto it is confirmed below `confirm_below`;
/// otherwise the value is the least of the shape search and a bump family
/// concentrating at the center.
pub fn omega_estimate(
    a: &WeightProfile,
    b: &WeightProfile,
    grid: &RadialGrid,
    search: &OmegaSearch,
) -> Result<OmegaEstimate> {
    let (ta, tb) = (tilde_weight(a, grid), tilde_weight(b, grid));
    let nodes = grid.nodes();
    let n = grid.cells();
    let bounds = profile_bounds(a, b, grid)?;
    let witness = (1..n)
        .filter(|&i| ta[i] + tb[i] < 0.0)
        .min_by(|&i, &j| (ta[i] + tb[i]).total_cmp(&(ta[j] + tb[j])));
    let dim = grid.dim();
    let mut family = Vec::new();
    if let Some(i) = witness {
        let center = nodes[i];
        let mut delta = 0.5 * center.min(grid.radius() - center);
        let mut confirmation = f64::INFINITY;
        for _ in 0..search.family_levels {
            let value = family_value(a, b, dim, center, delta);
            family.push(FamilyPoint { scale: delta, value });
            confirmation = confirmation.min(value);
            if confirmation < search.confirm_below {
                return Ok(OmegaEstimate {
                    value: OmegaValue::NegInfinity {
                        witness: center,
                        confirmation,
                    },
                    bounds,
                    pair: None,
                    shape_value: None,
                    family,
                    iterations: 0,
                });
            }
            delta *= 0.5;
        }
        return Err(Error::NumericFault(format!(
            "negative tilde sum at r = {center} but the shrinking family stopped at {confirmation}"
        )));
    }

    let mut delta = 0.5 * grid.radius();
    for _ in 0..search.family_levels {
        family.push(FamilyPoint {
            scale: delta,
            value: family_value(a, b, dim, 0.0, delta),
        });
        delta *= 0.5;
    }
    let shape = shape_search(a, b, grid, search);
    let family_min = family
        .iter()
        .map(|p| p.value)
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let (shape_value, pair, iterations) = match shape {
        Some((v, p, it)) => (Some(v), Some(p), it),
        None => (None, None, 0),
    };
    let value = shape_value.map_or(family_min, |s| s.min(family_min));
    Ok(OmegaEstimate {
        value: OmegaValue::Finite(value),
        bounds,
        pair,
        shape_value,
        family,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::Grading;

    #[test]
    fn printed_bound_examples() {
        let b = omega_bounds(5, 2.0, 4.0, 1.0, 1.0, 2.0, 20.0).unwrap();
        assert!((b.lower - 25.0 / 16.0).abs() < 1e-15);
        assert_eq!(b.upper, Some(0.5 * 20.0 * 4.0));
        let b = omega_bounds(4, 2.0, 2.0, 1.0, 1.0, 2.0, 20.0).unwrap();
        assert_eq!(b.lower, 2.0);
        assert_eq!(b.upper, None);
        let b = omega_bounds(6, 3.0, 3.0, 1.0, 1.0, 2.0, 20.0).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, Some(0.0)));
        assert!(matches!(
            omega_bounds(5, 1.0, 3.0, 1.0, 1.0, 2.0, 20.0),
            Err(Error::OutsideTable(_))
        ));
    }

    #[test]
    fn tilde_of_shifted_square_is_negative_inside() {
        let g = RadialGrid::build(5, 1.0, 100, Grading::Uniform).unwrap();
        let w = WeightProfile::power(1.0, 1.0, 2.0).with_anchor(1.0);
        let t = tilde_weight(&w, &g);
        for (r, t) in g.nodes().iter().zip(&t).skip(1).take(98) {
            let expected = -2.0 * r * (1.0 - r);
            assert!((t - expected).abs() < 1e-14 && *t < 0.0);
        }
        let c = tilde_weight(&WeightProfile::constant(2.0), &g);
        assert!(c.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constant_weights_give_zero_quotient() {
        let g = RadialGrid::build(5, 1.0, 100, Grading::Uniform).unwrap();
        let w = WeightProfile::constant(1.0);
        let p = FieldPair::symmetric(&g, FieldPair::sample(&g, |r| 1.0 - r * r), 0.0).unwrap();
        assert_eq!(phi_quotient(&p, &w, &w, &g).unwrap(), 0.0);
        let orth = FieldPair::new(
            &g,
            FieldPair::sample(&g, |r| 1.0 - r * r),
            vec![0.0; g.len()],
            0.0,
        )
        .unwrap();
        assert!(matches!(phi_quotient(&orth, &w, &w, &g), Err(Error::DegenerateDenominator)));
    }
}
