use critvar::radial::{Grading, RadialGrid, WeightProfile};
use critvar::spectral::{first_eigenpair, lambda_tilde, rayleigh_quotient};
use critvar::tolerances::rel_diff;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// First positive root of tan x = x.
fn first_tan_root() -> f64 {
    let mut x = 4.5_f64;
    for _ in 0..50 {
        let f = x.tan() - x;
        let df = 1.0 / x.cos().powi(2) - 1.0;
        x -= f / df;
    }
    x
}

/// J₁ by its power series.
fn bessel_j1(x: f64) -> f64 {
    let mut term = x / 2.0;
    let mut sum = term;
    for m in 1..60 {
        term *= -(x * x / 4.0) / (m as f64 * (m as f64 + 1.0));
        sum += term;
    }
    sum
}

fn first_j1_zero() -> f64 {
    let (mut lo, mut hi) = (3.0, 4.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bessel_j1(lo) * bessel_j1(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn lambda1(dim: usize, radius: f64, n: usize) -> f64 {
    let g = RadialGrid::build(dim, radius, n, Grading::Uniform).unwrap();
    first_eigenpair(&WeightProfile::constant(1.0), &g, 1e-12).unwrap().lambda1
}

#[test]
fn bessel_oracles() {
    let j = first_tan_root();
    assert!((j - 4.493409).abs() < 1e-6);
    let l5 = lambda1(5, 1.0, 2000);
    assert!(rel_diff(l5, j * j) < 5e-3, "{l5} vs {}", j * j);
    let j1 = first_j1_zero();
    assert!((j1 - 3.831706).abs() < 1e-6);
    let l4 = lambda1(4, 1.0, 2000);
    assert!(rel_diff(l4, j1 * j1) < 5e-3, "{l4} vs {}", j1 * j1);
}

#[test]
fn second_order_convergence() {
    let exact = first_tan_root().powi(2);
    let e1 = (lambda1(5, 1.0, 250) - exact).abs();
    let e2 = (lambda1(5, 1.0, 500) - exact).abs();
    let e3 = (lambda1(5, 1.0, 1000) - exact).abs();
    for rate in [(e1 / e2).log2(), (e2 / e3).log2()] {
        assert!((1.8..=2.2).contains(&rate), "rate {rate}");
    }
}

#[test]
fn radius_scaling() {
    let small = lambda1(5, 1.0, 400);
    let large = lambda1(5, 2.0, 400);
    assert!(rel_diff(large, small / 4.0) < 1e-8);
}

#[test]
fn ordered_weights_give_ordered_eigenvalues() {
    let g = RadialGrid::build(5, 1.0, 300, Grading::Uniform).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let g0 = rng.gen_range(0.5..2.0);
        let k = rng.gen_range(0.5..4.0);
        let c = rng.gen_range(0.1..3.0);
        let lo = WeightProfile::power(g0, c, k);
        let hi = WeightProfile::power(g0, c + rng.gen_range(0.0..2.0), k);
        let l_lo = first_eigenpair(&lo, &g, 1e-12).unwrap().lambda1;
        let l_hi = first_eigenpair(&hi, &g, 1e-12).unwrap().lambda1;
        assert!(l_lo <= l_hi * (1.0 + 1e-12));
    }
}

#[test]
fn swapped_eigenfunctions_give_larger_quotients() {
    let g = RadialGrid::build(5, 1.0, 500, Grading::Uniform).unwrap();
    let a = WeightProfile::power(1.0, 1.0, 2.0);
    let b = WeightProfile::power(1.0, 1.0, 4.0);
    let lt = lambda_tilde(&a, &b, &g, 1e-12).unwrap();
    assert_eq!(lt.value, lt.a.lambda1.min(lt.b.lambda1));
    assert!(rayleigh_quotient(&lt.b.eigenfunction, &a, &g) >= lt.a.lambda1);
    assert!(rayleigh_quotient(&lt.a.eigenfunction, &b, &g) >= lt.b.lambda1);
}
