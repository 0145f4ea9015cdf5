use crate::error::Result;
use crate::radial::{energy::inner, FieldPair, RadialGrid, WeightProfile};

use super::omega::tilde_stiffness;

/// Terms of the star-shaped integral identity on the ball `B(0, R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PohozaevReport {
    /// `2λ∫uv`.
    pub coupling_term: f64,
    /// `½∫ã|u'|²`.
    pub interior_a: f64,
    /// `½∫b̃|v'|²`.
    pub interior_b: f64,
    /// `½ a(R) u'(R)² R |∂B_R|`.
    pub boundary_a: f64,
    pub boundary_b: f64,
    /// `Σ ∫F (r w' + (N-2)/2 w)` for a forced system; zero otherwise.
    pub forcing: f64,
    /// `coupling - interior - boundary - forcing`.
    pub residual: f64,
    /// `|residual|` over the largest term.
    pub relative_residual: f64,
}

/// Identity check for a solution of the unforced system.
pub fn pohozaev_report(
    pair: &FieldPair,
    lambda: f64,
    a: &WeightProfile,
    b: &WeightProfile,
    grid: &RadialGrid,
) -> Result<PohozaevReport> {
    assemble(pair, lambda, a, b, grid, 0.0)
}

/// Identity check for `-div(a∇u) - λv - Λ₁|u|^{q-2}u = F_u` (and the `v`
/// analog); the source terms enter through `∫F (r w' + (N-2)/2 w)`.
pub fn pohozaev_report_forced(
    pair: &FieldPair,
    forcing: (&[f64], &[f64]),
    lambda: f64,
    a: &WeightProfile,
    b: &WeightProfile,
    grid: &RadialGrid,
) -> Result<PohozaevReport> {
    grid.check_len(forcing.0)?;
    grid.check_len(forcing.1)?;
    let extra = forcing_term(&pair.u, forcing.0, grid) + forcing_term(&pair.v, forcing.1, grid);
    assemble(pair, lambda, a, b, grid, extra)
}

fn assemble(
    pair: &FieldPair,
    lambda: f64,
    a: &WeightProfile,
    b: &WeightProfile,
    grid: &RadialGrid,
    forcing: f64,
) -> Result<PohozaevReport> {
    grid.check_len(&pair.u)?;
    grid.check_len(&pair.v)?;
    let coupling_term = 2.0 * lambda * inner(&pair.u, &pair.v, grid);
    let interior_a = 0.5 * tilde_stiffness(a, grid).energy(&pair.u);
    let interior_b = 0.5 * tilde_stiffness(b, grid).energy(&pair.v);
    let boundary_a = boundary_term(&pair.u, a, grid)?;
    let boundary_b = boundary_term(&pair.v, b, grid)?;
    let residual = coupling_term - interior_a - interior_b - boundary_a - boundary_b - forcing;
    let scale = [coupling_term, interior_a, interior_b, boundary_a, boundary_b, forcing]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(PohozaevReport {
        coupling_term,
        interior_a,
        interior_b,
        boundary_a,
        boundary_b,
        forcing,
        residual,
        relative_residual: if scale > 0.0 { residual.abs() / scale } else { 0.0 },
    })
}

fn boundary_term(u: &[f64], w: &WeightProfile, grid: &RadialGrid) -> Result<f64> {
    let du = *grid.derivative(u)?.last().expect("grid has nodes");
    let r = grid.radius();
    let area = grid.sigma() * r.powi(grid.dim() as i32 - 1);
    Ok(0.5 * w.value(r) * du * du * r * area)
}

/// Cell-midpoint rule with exact shell volumes.
fn forcing_term(w: &[f64], f: &[f64], grid: &RadialGrid) -> f64 {
    let x = grid.nodes();
    let d = grid.dim() as i32;
    let half = 0.5 * (grid.dim() as f64 - 2.0);
    let mut total = 0.0;
    for c in 0..grid.cells() {
        let (lo, hi) = (x[c], x[c + 1]);
        let mid = 0.5 * (lo + hi);
        let vol = grid.sigma() * (hi.powi(d) - lo.powi(d)) / grid.dim() as f64;
        let slope = (w[c + 1] - w[c]) / (hi - lo);
        let wm = 0.5 * (w[c] + w[c + 1]);
        let fm = 0.5 * (f[c] + f[c + 1]);
        total += vol * fm * (mid * slope + half * wm);
    }
    total
}
