use crate::error::{Error, Result};
use crate::tridiag::SymTridiagonal;

use super::field::FieldPair;
use super::grid::RadialGrid;
use super::weight::WeightProfile;

/// q = 2N/(N-2).
pub fn critical_exponent(dim: usize) -> Result<f64> {
    if dim <= 2 {
        return Err(Error::BadDomain(format!(
            "no critical exponent in dimension {dim}"
        )));
    }
    Ok(2.0 * dim as f64 / (dim as f64 - 2.0))
}

/// Flux-form stiffness of `-div(w∇·)`: one conductance per cell,
/// `σ r_{c+1/2}^{N-1} w(r_{c+1/2}) / h_c`, so that `uᵀKu = ∫ w |u'|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stiffness {
    conductance: Vec<f64>,
}

impl Stiffness {
    pub fn new(grid: &RadialGrid, weight: &WeightProfile) -> Self {
        Self::from_face_weights(grid, &weight.midpoint_samples(grid))
    }

    pub fn unweighted(grid: &RadialGrid) -> Self {
        Self::from_face_weights(grid, &vec![1.0; grid.cells()])
    }

    pub fn from_face_weights(grid: &RadialGrid, face_weights: &[f64]) -> Self {
        let conductance = grid
            .face_areas()
            .iter()
            .zip(grid.widths())
            .zip(face_weights)
            .map(|((a, h), w)| a * w / h)
            .collect();
        Stiffness { conductance }
    }

    pub fn conductance(&self) -> &[f64] {
        &self.conductance
    }

    /// `∫ w |u'|²`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.conductance
            .iter()
            .enumerate()
            .map(|(c, k)| {
                let d = u[c + 1] - u[c];
                k * d * d
            })
            .sum()
    }

    /// `K u` on all nodes (the boundary row included).
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (c, k) in self.conductance.iter().enumerate() {
            let flux = k * (u[c] - u[c + 1]);
            out[c] += flux;
            out[c + 1] -= flux;
        }
        out
    }

    /// Matrix on the free nodes 0..n-1 (node n carries the Dirichlet value).
    pub fn dirichlet_matrix(&self) -> SymTridiagonal {
        let n = self.conductance.len();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for (c, &k) in self.conductance.iter().enumerate() {
            diag[c] += k;
            if c + 1 < n {
                diag[c + 1] += k;
                off[c] = -k;
            }
        }
        SymTridiagonal::new(diag, off)
    }
}

fn check_finite(f: &[f64], what: &str) -> Result<()> {
    match f.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NumericFault(format!("{what}: non-finite sample at node {i}"))),
        None => Ok(()),
    }
}

/// `∫ w |u'|² dx`.
pub fn weighted_gradient_energy(u: &[f64], weight: &WeightProfile, grid: &RadialGrid) -> Result<f64> {
    grid.check_len(u)?;
    check_finite(u, "field")?;
    let e = Stiffness::new(grid, weight).energy(u);
    if !e.is_finite() {
        return Err(Error::NumericFault("gradient energy overflow".into()));
    }
    Ok(e)
}

/// `(∫|u|^q)^{1/q}` with the critical exponent of the grid dimension.
pub fn lq_norm(u: &[f64], grid: &RadialGrid) -> Result<f64> {
    let q = critical_exponent(grid.dim())?;
    lp_norm(u, q, grid)
}

pub fn lp_norm(u: &[f64], p: f64, grid: &RadialGrid) -> Result<f64> {
    grid.check_len(u)?;
    let s: f64 = grid
        .measure()
        .iter()
        .zip(u)
        .map(|(m, x)| m * x.abs().powf(p))
        .sum();
    Ok(s.powf(1.0 / p))
}

/// `∫ f g dx`.
pub fn inner(f: &[f64], g: &[f64], grid: &RadialGrid) -> f64 {
    grid.measure()
        .iter()
        .zip(f.iter().zip(g))
        .map(|(m, (a, b))| m * a * b)
        .sum()
}

/// `∫|∇u|² / ‖u‖_q²`.
pub fn sobolev_quotient(u: &[f64], grid: &RadialGrid) -> Result<f64> {
    let norm = lq_norm(u, grid)?;
    if norm == 0.0 {
        return Err(Error::DegeneratePair("zero field in Sobolev quotient".into()));
    }
    Ok(Stiffness::unweighted(grid).energy(u) / (norm * norm))
}

/// The three normalized terms of the coupled energy, with the raw integrals
/// they were built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub grad_a: f64,
    pub grad_b: f64,
    pub coupling: f64,
    pub value: f64,
    pub norm_u: f64,
    pub norm_v: f64,
    pub q: f64,
    /// `∫ a|∇u|²`
    pub dirichlet_a: f64,
    /// `∫ b|∇v|²`
    pub dirichlet_b: f64,
    /// `∫ uv`
    pub cross: f64,
}

/// Coupled energy with the stiffness matrices of both weights cached.
#[derive(Debug, Clone)]
pub struct Functional {
    grid: RadialGrid,
    a: WeightProfile,
    b: WeightProfile,
    stiff_a: Stiffness,
    stiff_b: Stiffness,
    q: f64,
}

impl Functional {
    pub fn new(grid: &RadialGrid, a: &WeightProfile, b: &WeightProfile) -> Result<Self> {
        let q = critical_exponent(grid.dim())?;
        Ok(Functional {
            grid: grid.clone(),
            a: a.clone(),
            b: b.clone(),
            stiff_a: Stiffness::new(grid, a),
            stiff_b: Stiffness::new(grid, b),
            q,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn weights(&self) -> (&WeightProfile, &WeightProfile) {
        (&self.a, &self.b)
    }

    pub fn stiffness(&self) -> (&Stiffness, &Stiffness) {
        (&self.stiff_a, &self.stiff_b)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lq_norm(&self, u: &[f64]) -> f64 {
        let s: f64 = self
            .grid
            .measure()
            .iter()
            .zip(u)
            .map(|(m, x)| m * x.abs().powf(self.q))
            .sum();
        s.powf(1.0 / self.q)
    }

    pub fn evaluate(&self, u: &[f64], v: &[f64], lambda: f64) -> Result<EnergyReport> {
        self.grid.check_len(u)?;
        self.grid.check_len(v)?;
        check_finite(u, "u")?;
        check_finite(v, "v")?;
        let norm_u = self.lq_norm(u);
        let norm_v = self.lq_norm(v);
        if norm_u == 0.0 || norm_v == 0.0 {
            return Err(Error::DegeneratePair(format!(
                "‖u‖_q = {norm_u}, ‖v‖_q = {norm_v}"
            )));
        }
        let dirichlet_a = self.stiff_a.energy(u);
        let dirichlet_b = self.stiff_b.energy(v);
        let cross = inner(u, v, &self.grid);
        let grad_a = 0.5 * dirichlet_a / (norm_u * norm_u);
        let grad_b = 0.5 * dirichlet_b / (norm_v * norm_v);
        let coupling = lambda * cross / (norm_u * norm_v);
        let value = grad_a + grad_b - coupling;
        if !value.is_finite() {
            return Err(Error::NumericFault(format!("energy evaluated to {value}")));
        }
        Ok(EnergyReport {
            grad_a,
            grad_b,
            coupling,
            value,
            norm_u,
            norm_v,
            q: self.q,
            dirichlet_a,
            dirichlet_b,
            cross,
        })
    }
}

/// E_λ(u, v) for one pair.
pub fn energy(
    pair: &FieldPair,
    a: &WeightProfile,
    b: &WeightProfile,
    lambda: f64,
    grid: &RadialGrid,
) -> Result<EnergyReport> {
    Functional::new(grid, a, b)?.evaluate(&pair.u, &pair.v, lambda)
}
