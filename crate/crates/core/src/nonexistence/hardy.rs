use crate::error::Result;
use crate::quadrature::gauss_legendre;
use crate::radial::RadialGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyCheck {
    /// `∫ r² |u'|²`.
    pub lhs: f64,
    /// `(N/2)² ∫ u²`.
    pub rhs: f64,
    pub holds: bool,
}

/// Both sides integrated exactly for the piecewise-linear interpolant of
/// `u`, so the check is a statement about an actual `H¹₀` function.
pub fn hardy_check(u: &[f64], grid: &RadialGrid) -> Result<HardyCheck> {
    grid.check_len(u)?;
    let dim = grid.dim();
    let (xs, ws) = gauss_legendre(dim / 2 + 3);
    let x = grid.nodes();
    let jac = |r: f64| r.powi(dim as i32 - 1);
    let (mut lhs, mut mass) = (0.0, 0.0);
    for c in 0..grid.cells() {
        let (lo, hi) = (x[c], x[c + 1]);
        let h = hi - lo;
        let slope = (u[c + 1] - u[c]) / h;
        for (xi, wi) in xs.iter().zip(&ws) {
            let t = 0.5 * (1.0 + xi);
            let r = lo + t * h;
            let val = u[c] + t * (u[c + 1] - u[c]);
            let w = 0.5 * h * wi * jac(r);
            lhs += w * r * r * slope * slope;
            mass += w * val * val;
        }
    }
    let sigma = grid.sigma();
    let lhs = sigma * lhs;
    let half = 0.5 * dim as f64;
    let rhs = half * half * sigma * mass;
    Ok(HardyCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-12 * rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{FieldPair, Grading};

    #[test]
    fn zero_field() {
        let g = RadialGrid::build(4, 1.0, 50, Grading::Uniform).unwrap();
        let c = hardy_check(&vec![0.0; g.len()], &g).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));
    }

    #[test]
    fn parabola_ratio() {
        let g = RadialGrid::build(5, 1.0, 2000, Grading::Uniform).unwrap();
        let u = FieldPair::sample(&g, |r| 1.0 - r * r);
        let c = hardy_check(&u, &g).unwrap();
        let s = g.sigma();
        assert!((c.lhs / (4.0 * s / 9.0) - 1.0).abs() < 1e-6);
        assert!((c.rhs / (6.25 * s * 8.0 / 315.0) - 1.0).abs() < 1e-6);
        assert!((c.lhs / c.rhs - 2.8).abs() < 1e-5 && c.holds);
    }
}
