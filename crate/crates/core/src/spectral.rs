//! First Dirichlet eigenpair of `-div(w∇·)` on the ball.

use crate::error::{Error, Result};
use crate::radial::energy::{critical_exponent, inner, Functional, Stiffness};
use crate::radial::field::enforce_dirichlet;
use crate::radial::{RadialGrid, WeightProfile};
use crate::tridiag::SymTridiagonal;

/// `A = M⁻¹K` on the free nodes 0..n-1, kept in the symmetric form
/// `M^{-1/2} K M^{-1/2}`.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    stiffness: SymTridiagonal,
    mass: Vec<f64>,
    symmetric: SymTridiagonal,
}

impl RadialOperator {
    pub fn stiffness(&self) -> &SymTridiagonal {
        &self.stiffness
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn symmetric(&self) -> &SymTridiagonal {
        &self.symmetric
    }

    /// `A u` on all nodes; `u` must vanish at r = R and the boundary row is 0.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.mass.len();
        let mut out = self.stiffness.mul(&u[..n]);
        for (o, m) in out.iter_mut().zip(&self.mass) {
            *o /= m;
        }
        out.push(0.0);
        out
    }
}

pub fn assemble_operator(weight: &WeightProfile, grid: &RadialGrid) -> Result<RadialOperator> {
    weight.check_positive(grid)?;
    Ok(operator_from_stiffness(&Stiffness::new(grid, weight), grid))
}

pub(crate) fn operator_from_stiffness(k: &Stiffness, grid: &RadialGrid) -> RadialOperator {
    let stiffness = k.dirichlet_matrix();
    let n = stiffness.dim();
    let mass = grid.measure()[..n].to_vec();
    let root: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
    let diag = (0..n).map(|i| stiffness.diag[i] / mass[i]).collect();
    let off = (0..n - 1)
        .map(|i| stiffness.off[i] / (root[i] * root[i + 1]))
        .collect();
    RadialOperator {
        stiffness,
        mass,
        symmetric: SymTridiagonal::new(diag, off),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub lambda1: f64,
    /// Positive at interior nodes, zero at r = R, `∫φ² = 1`.
    pub eigenfunction: Vec<f64>,
    pub iterations: usize,
    /// `‖Aφ - λ₁φ‖₂`.
    pub residual: f64,
}

pub const MAX_INVERSE_ITERATIONS: usize = 1000;

pub fn first_eigenpair(weight: &WeightProfile, grid: &RadialGrid, tol: f64) -> Result<SpectralResult> {
    let op = assemble_operator(weight, grid)?;
    eigenpair_of(&op, grid, tol)
}

/// Inverse iteration on the symmetric form; stops once the residual is
/// below `tol·λ₁` or at the rounding floor of the matrix.
pub fn eigenpair_of(op: &RadialOperator, grid: &RadialGrid, tol: f64) -> Result<SpectralResult> {
    let s = op.symmetric();
    let n = s.dim();
    let radius = grid.radius();
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let r = grid.nodes()[i] / radius;
            (1.0 - r * r) * op.mass[i].sqrt()
        })
        .collect();
    normalize(&mut x);
    let mut rayleigh = dot(&x, &s.mul(&x));
    // residuals below this are rounding noise of the matrix-vector product
    let floor = 64.0 * f64::EPSILON * inf_norm(s) * (n as f64).sqrt();
    for it in 1..=MAX_INVERSE_ITERATIONS {
        let mut y = s.solve(&x)?;
        normalize(&mut y);
        let sy = s.mul(&y);
        rayleigh = dot(&y, &sy);
        let residual = sy
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - rayleigh * b).powi(2))
            .sum::<f64>()
            .sqrt();
        x = y;
        if residual <= (tol * rayleigh).max(floor) {
            let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            let mut phi: Vec<f64> = x
                .iter()
                .zip(&op.mass)
                .map(|(xi, m)| sign * xi / m.sqrt())
                .collect();
            phi.push(0.0);
            if phi[..n].iter().any(|&p| p <= 0.0) {
                return Err(Error::NumericFault(
                    "first eigenfunction changes sign".into(),
                ));
            }
            return Ok(SpectralResult {
                lambda1: rayleigh,
                eigenfunction: phi,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::SpectralStall {
        iterations: MAX_INVERSE_ITERATIONS,
        rayleigh,
    })
}

fn inf_norm(s: &SymTridiagonal) -> f64 {
    let n = s.dim();
    (0..n)
        .map(|i| {
            let left = if i > 0 { s.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { s.off[i].abs() } else { 0.0 };
            s.diag[i].abs() + left + right
        })
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    for v in x {
        *v /= n;
    }
}

/// Rayleigh quotient `∫w|φ'|² / ∫φ²`.
pub fn rayleigh_quotient(phi: &[f64], weight: &WeightProfile, grid: &RadialGrid) -> f64 {
    let mut f = phi.to_vec();
    enforce_dirichlet(&mut f);
    Stiffness::new(grid, weight).energy(&f) / inner(&f, &f, grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTilde {
    pub value: f64,
    pub a: SpectralResult,
    pub b: SpectralResult,
}

pub fn lambda_tilde(
    a: &WeightProfile,
    b: &WeightProfile,
    grid: &RadialGrid,
    tol: f64,
) -> Result<LambdaTilde> {
    let ea = first_eigenpair(a, grid, tol)?;
    let eb = if a == b {
        ea.clone()
    } else {
        first_eigenpair(b, grid, tol)?
    };
    Ok(LambdaTilde {
        value: ea.lambda1.min(eb.lambda1),
        a: ea,
        b: eb,
    })
}

/// Threshold of the eigenfunction test pair and its energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPairTest {
    pub threshold: f64,
    pub value: f64,
}

/// Energy of the pair of L^q-normalized first eigenfunctions and the
/// coupling above which it is guaranteed nonpositive.
pub fn eigenfunction_pair_test(
    a: &WeightProfile,
    b: &WeightProfile,
    lambda: f64,
    grid: &RadialGrid,
    tol: f64,
) -> Result<EigenPairTest> {
    let lt = lambda_tilde(a, b, grid, tol)?;
    let f = Functional::new(grid, a, b)?;
    let q = critical_exponent(grid.dim())?;
    let (pa, pb) = (&lt.a.eigenfunction, &lt.b.eigenfunction);
    let (na, nb) = (f.lq_norm(pa), f.lq_norm(pb));
    let overlap = inner(pa, pb, grid);
    let threshold = na * nb / overlap
        * grid.volume().powf(1.0 - 2.0 / q)
        * lt.a.lambda1.max(lt.b.lambda1);
    let ua: Vec<f64> = pa.iter().map(|x| x / na).collect();
    let ub: Vec<f64> = pb.iter().map(|x| x / nb).collect();
    let value = f.evaluate(&ua, &ub, lambda)?.value;
    Ok(EigenPairTest { threshold, value })
}

/// Eigenfunction-pair energy; `ThresholdNotReached` (carrying the energy)
/// when `lambda` is below the coupling that guarantees a nonpositive value.
pub fn nonpositive_energy_test(
    a: &WeightProfile,
    b: &WeightProfile,
    lambda: f64,
    grid: &RadialGrid,
    tol: f64,
) -> Result<f64> {
    let t = eigenfunction_pair_test(a, b, lambda, grid, tol)?;
    if lambda < t.threshold {
        return Err(Error::ThresholdNotReached {
            lambda,
            threshold: t.threshold,
            value: t.value,
        });
    }
    Ok(t.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{FieldPair, Grading};
    use crate::tolerances::rel_diff;

    fn grid(n: usize) -> RadialGrid {
        RadialGrid::build(5, 1.0, n, Grading::Uniform).unwrap()
    }

    #[test]
    fn operator_is_self_adjoint_in_measure() {
        let g = grid(200);
        let op = assemble_operator(&WeightProfile::power(1.0, 2.0, 1.5), &g).unwrap();
        let u = FieldPair::sample(&g, |r| (1.0 - r) * (2.0 + r.cos()));
        let v = FieldPair::sample(&g, |r| (1.0 - r * r) * r.exp());
        let lhs = inner(&op.apply(&u), &v, &g);
        let rhs = inner(&u, &op.apply(&v), &g);
        assert!(rel_diff(lhs, rhs) < 1e-13);
        let s = op.symmetric();
        assert_eq!(s.off.len() + 1, s.diag.len());
    }

    #[test]
    fn constant_weight_interior_rows_match_laplacian_stencil() {
        // N-independent check on the stencil: with w = 1 the flux form is
        // -(r^{N-1} u')' / r^{N-1}, which for u = r² gives -2N.
        let g = grid(400);
        let op = assemble_operator(&WeightProfile::constant(1.0), &g).unwrap();
        let mut u = FieldPair::sample(&g, |r| r * r - 1.0);
        u[400] = 0.0;
        let au = op.apply(&u);
        for i in 1..399 {
            assert!((au[i] + 10.0).abs() < 1e-6, "row {i}: {}", au[i]);
        }
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let g = grid(64);
        assert!(matches!(
            assemble_operator(&WeightProfile::power(-1.0, 0.5, 2.0), &g),
            Err(Error::IndefiniteWeight { .. })
        ));
    }

    #[test]
    fn eigenfunction_properties() {
        let g = grid(400);
        let w = WeightProfile::power(1.0, 1.0, 2.0);
        let res = first_eigenpair(&w, &g, 1e-12).unwrap();
        assert!(res.eigenfunction[..400].iter().all(|&p| p > 0.0));
        assert_eq!(res.eigenfunction[400], 0.0);
        assert!((inner(&res.eigenfunction, &res.eigenfunction, &g) - 1.0).abs() < 1e-12);
        let rq = rayleigh_quotient(&res.eigenfunction, &w, &g);
        assert!(rel_diff(rq, res.lambda1) < 1e-10);
    }

    #[test]
    fn linear_in_constant_weight() {
        let g = grid(300);
        let l1 = first_eigenpair(&WeightProfile::constant(1.0), &g, 1e-12).unwrap().lambda1;
        let l3 = first_eigenpair(&WeightProfile::constant(3.0), &g, 1e-12).unwrap().lambda1;
        assert!(rel_diff(l3, 3.0 * l1) < 1e-10);
    }

    #[test]
    fn lambda_tilde_is_min() {
        let g = grid(300);
        let a = WeightProfile::constant(1.0);
        let b = WeightProfile::constant(2.0);
        let lt = lambda_tilde(&a, &b, &g, 1e-12).unwrap();
        assert_eq!(lt.value, lt.a.lambda1);
        let same = lambda_tilde(&a, &a, &g, 1e-12).unwrap();
        assert_eq!(same.value, same.a.lambda1);
    }

    #[test]
    fn eigenfunction_test_pair() {
        let g = grid(400);
        let w = WeightProfile::power(1.0, 1.0, 2.0);
        let t = eigenfunction_pair_test(&w, &w, 0.0, &g, 1e-12).unwrap();
        let at = nonpositive_energy_test(&w, &w, t.threshold, &g, 1e-12).unwrap();
        assert!(at <= 1e-10, "{at}");
        let twice = nonpositive_energy_test(&w, &w, 2.0 * t.threshold, &g, 1e-12).unwrap();
        assert!(twice < 0.0);
        match nonpositive_energy_test(&w, &w, 0.0, &g, 1e-12) {
            Err(Error::ThresholdNotReached { value, .. }) => assert!(value > 0.0),
            other => panic!("{other:?}"),
        }
    }
}
