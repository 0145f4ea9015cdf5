use crate::asymptotics::{bubble_field, default_ladder, BubbleParams};
use crate::error::{Error, Result};
use crate::radial::energy::{sobolev_quotient, EnergyReport, Functional};
use crate::radial::{FieldPair, RadialGrid};

/// Multipliers of the two unit-norm constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub u: f64,
    pub v: f64,
}

impl Multipliers {
    /// Read off an energy report; for a normalized pair this is
    /// `∫a|∇u|² - λ∫uv` and `∫b|∇v|² - λ∫uv`.
    pub fn from_report(report: &EnergyReport) -> Self {
        Multipliers {
            u: 2.0 * report.grad_a - report.coupling,
            v: 2.0 * report.grad_b - report.coupling,
        }
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.u + self.v)
    }
}

pub fn lagrange_multipliers(pair: &FieldPair, f: &Functional, lambda: f64) -> Result<Multipliers> {
    Ok(Multipliers::from_report(&f.evaluate(&pair.u, &pair.v, lambda)?))
}

/// Strong residual of the Euler–Lagrange system in `L²(Ω)`, summed over the
/// two equations. Expects a normalized pair.
pub fn el_residual(
    pair: &FieldPair,
    multipliers: Multipliers,
    f: &Functional,
    lambda: f64,
) -> Result<f64> {
    let grid = f.grid();
    grid.check_len(&pair.u)?;
    grid.check_len(&pair.v)?;
    let q = f.q();
    let (ka, kb) = f.stiffness();
    let au = ka.apply(&pair.u);
    let bv = kb.apply(&pair.v);
    let mu = grid.measure();
    let n = grid.cells();
    let (mut ru, mut rv) = (0.0, 0.0);
    for i in 0..n {
        let (u, v) = (pair.u[i], pair.v[i]);
        let eu = au[i] / mu[i] - lambda * v - multipliers.u * u.abs().powf(q - 2.0) * u;
        let ev = bv[i] / mu[i] - lambda * u - multipliers.v * v.abs().powf(q - 2.0) * v;
        ru += mu[i] * eu * eu;
        rv += mu[i] * ev * ev;
    }
    Ok(ru.sqrt() + rv.sqrt())
}

/// `(|u|, |v|)`.
pub fn sign_normalize(pair: &FieldPair) -> FieldPair {
    FieldPair {
        u: pair.u.iter().map(|x| x.abs()).collect(),
        v: pair.v.iter().map(|x| x.abs()).collect(),
        lambda: pair.lambda,
        generation: pair.generation,
    }
}

/// Fraction of `∫|u|^q` carried by B(0, δ).
pub fn concentration_diagnostic(u: &[f64], delta: f64, q: f64, grid: &RadialGrid) -> Result<f64> {
    grid.check_len(u)?;
    if !(delta > 0.0 && delta < grid.radius()) {
        return Err(Error::BadDomain(format!(
            "concentration radius {delta} must lie in (0, {})",
            grid.radius()
        )));
    }
    let inside = grid.measure_within(delta);
    let (mut num, mut den) = (0.0, 0.0);
    for ((m_in, m), x) in inside.iter().zip(grid.measure()).zip(u) {
        let p = x.abs().powf(q);
        num += m_in * p;
        den += m * p;
    }
    Ok(if den == 0.0 { 0.0 } else { (num / den).clamp(0.0, 1.0) })
}

/// Two-grid extrapolation for a quantity converging at `order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonEstimate {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    /// Estimated error of the coarse value, `|coarse - extrapolated|`.
    pub coarse_bias: f64,
}

pub fn richardson(coarse: f64, fine: f64, order: f64) -> RichardsonEstimate {
    let factor = 2f64.powf(order);
    let extrapolated = fine + (fine - coarse) / (factor - 1.0);
    RichardsonEstimate {
        coarse,
        fine,
        extrapolated,
        coarse_bias: (coarse - extrapolated).abs(),
    }
}

/// Smallest discrete Sobolev quotient over resolved cutoff bubbles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevGrid {
    pub value: f64,
    pub epsilon: f64,
}

pub fn sobolev_grid_constant(grid: &RadialGrid, cutoff_radius: f64) -> Result<SobolevGrid> {
    let ladder = default_ladder(grid, cutoff_radius);
    let mut best: Option<SobolevGrid> = None;
    for epsilon in ladder {
        let u = match bubble_field(&BubbleParams::new(epsilon, cutoff_radius)?, grid) {
            Ok(u) => u,
            Err(Error::UnderResolvedBubble { .. }) => break,
            Err(e) => return Err(e),
        };
        let value = sobolev_quotient(&u, grid)?;
        if best.map_or(true, |b| value < b.value) {
            best = Some(SobolevGrid { value, epsilon });
        }
    }
    best.ok_or_else(|| Error::UnderResolvedBubble {
        epsilon: (cutoff_radius / 8.0).powi(2),
        nodes: grid.nodes_below(cutoff_radius / 8.0),
        min: crate::asymptotics::MIN_BUBBLE_NODES,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::best_sobolev_constant;
    use crate::radial::{Grading, WeightProfile};

    fn setup() -> (RadialGrid, Functional) {
        let g = RadialGrid::build(5, 1.0, 400, Grading::Uniform).unwrap();
        let w = WeightProfile::power(1.0, 1.0, 2.0);
        let f = Functional::new(&g, &w, &w).unwrap();
        (g, f)
    }

    #[test]
    fn decoupled_multipliers() {
        let (g, f) = setup();
        let u = FieldPair::sample(&g, |r| 1.0 - r * r);
        let nu = f.lq_norm(&u);
        let u: Vec<f64> = u.iter().map(|x| x / nu).collect();
        let p = FieldPair::symmetric(&g, u.clone(), 0.0).unwrap();
        let m = lagrange_multipliers(&p, &f, 0.0).unwrap();
        let d = f.stiffness().0.energy(&u);
        assert!((m.u - d).abs() < 1e-12 * d);
        assert_eq!(m.u, m.v);
    }

    #[test]
    fn zero_pair_has_zero_residual() {
        let (g, f) = setup();
        let p = FieldPair::zeros(&g, 1.0);
        let r = el_residual(&p, Multipliers { u: 3.0, v: 2.0 }, &f, 1.0).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn sign_normalization() {
        let (g, f) = setup();
        let u = FieldPair::sample(&g, |r| 1.0 - r * r);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let p = FieldPair::new(&g, u.clone(), neg, 2.0).unwrap();
        let n = sign_normalize(&p);
        assert!(f.evaluate(&n.u, &n.v, 2.0).unwrap().value < f.evaluate(&p.u, &p.v, 2.0).unwrap().value);
        let same = sign_normalize(&FieldPair::symmetric(&g, u, 2.0).unwrap());
        assert!(same.u.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn concentration_of_simple_fields() {
        let (g, _) = setup();
        let q = 10.0 / 3.0;
        let ones = vec![1.0; g.len()];
        let c = concentration_diagnostic(&ones, 0.3, q, &g).unwrap();
        assert!((c - 0.3f64.powi(5)).abs() < 1e-12);
        let outer = FieldPair::sample(&g, |r| if r >= 0.5 { (1.0 - r) * (r - 0.5) } else { 0.0 });
        assert_eq!(concentration_diagnostic(&outer, 0.3, q, &g).unwrap(), 0.0);
        assert!(concentration_diagnostic(&ones, 1.5, q, &g).is_err());
    }

    #[test]
    fn richardson_removes_quadratic_error() {
        let exact = 2.0;
        let est = richardson(exact + 0.4, exact + 0.1, 2.0);
        assert!((est.extrapolated - exact).abs() < 1e-14);
        assert!((est.coarse_bias - 0.4).abs() < 1e-14);
    }

    #[test]
    fn grid_sobolev_constant_is_close_to_continuum() {
        let g = RadialGrid::build(5, 1.0, 2000, Grading::Uniform).unwrap();
        let s = sobolev_grid_constant(&g, 0.9).unwrap();
        let exact = best_sobolev_constant(5);
        assert!((s.value / exact - 1.0).abs() < 0.02, "{} vs {exact}", s.value);
    }
}
