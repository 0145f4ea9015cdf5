//! One-dimensional quadrature rules.
//!
//! [`tanh_sinh`] integrates over a finite interval with algebraic endpoint
//! singularities; the integrand receives the distances to both endpoints so
//! that values near either end are evaluated without cancellation.
//! [`gauss_legendre`] is used on compact supports of smooth trial functions.

use std::f64::consts::FRAC_PI_2;

/// Step and stopping rule for the double-exponential rule.
#[derive(Debug, Clone, Copy)]
pub struct TanhSinh {
    /// Initial step in the transformed variable.
    pub initial_step: f64,
    /// Stop once two successive halvings agree to this relative level.
    pub rel_tol: f64,
    pub max_levels: usize,
}

impl Default for TanhSinh {
    fn default() -> Self {
        TanhSinh {
            initial_step: 0.5,
            rel_tol: 1e-14,
            max_levels: 10,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// Difference between the last two levels.
    pub error: f64,
    pub levels: usize,
}

/// Sum of the rule at a fixed step `h` over the full abscissa range.
fn tanh_sinh_sum<F>(length: f64, h: f64, f: &F, offset_half: bool) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let mut sum = 0.0;
    let start = if offset_half { 1 } else { 0 };
    let stride = if offset_half { 2 } else { 1 };
    let mut k = start;
    loop {
        let t = k as f64 * h;
        let mut contributed = false;
        for &sign in if k == 0 { &[1.0][..] } else { &[1.0, -1.0][..] } {
            let t = sign * t;
            let z = FRAC_PI_2 * t.sinh();
            // distances to the left and right endpoints
            let left = length / (1.0 + (-2.0 * z).exp());
            let right = length / (1.0 + (2.0 * z).exp());
            let cosh_z = z.cosh();
            let w = length * FRAC_PI_2 * t.cosh() / (2.0 * cosh_z * cosh_z);
            if w < 1e-300 || left <= 0.0 || right <= 0.0 {
                continue;
            }
            let term = w * f(left, right);
            if term.is_finite() {
                sum += term;
            }
            // strong endpoint singularities keep w·f relevant long after w is tiny
            contributed = true;
        }
        if !contributed && k > 0 {
            break;
        }
        k += stride;
        if k > 100_000 {
            break;
        }
    }
    sum
}

/// Integrates `f` over an interval of the given length. `f(left, right)`
/// receives the distances from the abscissa to the two endpoints.
pub fn tanh_sinh<F>(length: f64, rule: TanhSinh, f: F) -> QuadratureEstimate
where
    F: Fn(f64, f64) -> f64,
{
    let mut h = rule.initial_step;
    let mut sum = tanh_sinh_sum(length, h, &f, false);
    let mut value = h * sum;
    let mut error = f64::INFINITY;
    let mut levels = 1;
    while levels < rule.max_levels {
        h *= 0.5;
        sum += tanh_sinh_sum(length, h, &f, true);
        let next = h * sum;
        error = (next - value).abs();
        value = next;
        levels += 1;
        if error <= rule.rel_tol * value.abs() {
            break;
        }
    }
    QuadratureEstimate {
        value,
        error,
        levels,
    }
}

/// Single-level tanh-sinh sum at a fixed step (no refinement).
pub fn tanh_sinh_fixed<F>(length: f64, step: f64, f: F) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    step * tanh_sinh_sum(length, step, &f, false)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let j = j as f64;
                let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre over `[a, b]` split into `panels` equal pieces.
pub fn composite_gauss<F>(a: f64, b: f64, panels: usize, order: usize, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        for (xi, wi) in x.iter().zip(&w) {
            total += wi * f(mid + 0.5 * width * xi);
        }
    }
    0.5 * width * total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tanh_sinh_smooth_and_singular() {
        let est = tanh_sinh(1.0, TanhSinh::default(), |l, _| l * l);
        assert!((est.value - 1.0 / 3.0).abs() < 1e-14);
        // ∫_0^1 x^{-1/2} dx = 2
        let est = tanh_sinh(1.0, TanhSinh::default(), |l, _| l.powf(-0.5));
        assert!((est.value - 2.0).abs() < 1e-12, "{}", est.value);
        // ∫_0^1 (1 - x)^{-0.9} dx = 10
        let est = tanh_sinh(1.0, TanhSinh::default(), |_, r| r.powf(-0.9));
        assert!((est.value - 10.0).abs() < 1e-9, "{}", est.value);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for order in [2usize, 5, 8, 16] {
            let (x, w) = gauss_legendre(order);
            let wsum: f64 = w.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-14);
            let deg = 2 * order - 1;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let expected = 2.0 / deg as f64;
            assert!((got - expected).abs() < 1e-13, "order {order}");
        }
        let v = composite_gauss(0.0, PI, 4, 8, f64::sin);
        assert!((v - 2.0).abs() < 1e-13);
    }
}
