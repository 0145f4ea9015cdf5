use critvar::constants::{radial_moment, radial_moment_quadrature};
use critvar::minimizer::{lagrange_multipliers, sign_normalize};
use critvar::quadrature::TanhSinh;
use critvar::radial::energy::{inner, Stiffness};
use critvar::radial::{FieldPair, Functional, Grading, RadialGrid, WeightProfile};
use critvar::tolerances::rel_diff;
use proptest::prelude::*;

fn grid() -> RadialGrid {
    RadialGrid::build(5, 1.0, 200, Grading::Uniform).unwrap()
}

/// Sum of a few radial modes, so fields are smooth but of either sign.
fn field(coeffs: &[f64], g: &RadialGrid) -> Vec<f64> {
    FieldPair::sample(g, |r| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * ((k as f64 + 0.5) * std::f64::consts::PI * r).cos())
            .sum()
    })
}

fn lq_normalized(u: Vec<f64>, q: f64, g: &RadialGrid) -> Vec<f64> {
    let n: f64 = g.measure().iter().zip(&u).map(|(m, x)| m * x.abs().powf(q)).sum::<f64>().powf(1.0 / q);
    u.into_iter().map(|x| x / n).collect()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 4).prop_filter("nonzero", |c| c.iter().any(|x| x.abs() > 0.1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn multipliers_average_to_the_energy(cu in coeffs(), cv in coeffs(), lambda in -20.0f64..40.0, k in 1.0f64..4.0) {
        let g = grid();
        let a = WeightProfile::power(1.0, 1.0, k);
        let b = WeightProfile::power(1.0, 0.5, 2.0);
        let f = Functional::new(&g, &a, &b).unwrap();
        let u = lq_normalized(field(&cu, &g), f.q(), &g);
        let v = lq_normalized(field(&cv, &g), f.q(), &g);
        // Euler-Lagrange multipliers of unit-norm fields
        let cross = inner(&u, &v, &g);
        let mu = Stiffness::new(&g, &a).energy(&u) - lambda * cross;
        let mv = Stiffness::new(&g, &b).energy(&v) - lambda * cross;
        let e = f.evaluate(&u, &v, lambda).unwrap().value;
        let scale = e.abs().max(mu.abs()).max(mv.abs());
        prop_assert!((0.5 * (mu + mv) - e).abs() <= 1e-12 * scale);
        let pair = FieldPair::new(&g, u, v, lambda).unwrap();
        let m = lagrange_multipliers(&pair, &f, lambda).unwrap();
        prop_assert!((m.u - mu).abs() <= 1e-12 * scale && (m.v - mv).abs() <= 1e-12 * scale);
    }

    #[test]
    fn sign_normalization_lowers_energy(cu in coeffs(), cv in coeffs(), lambda in 0.0f64..40.0) {
        let g = grid();
        let w = WeightProfile::power(1.0, 1.0, 2.0);
        let f = Functional::new(&g, &w, &w).unwrap();
        let pair = FieldPair::new(&g, field(&cu, &g), field(&cv, &g), lambda).unwrap();
        let abs = sign_normalize(&pair);
        prop_assert!(abs.u.iter().zip(&abs.v).all(|(x, y)| x * y >= 0.0));
        prop_assert_eq!(&sign_normalize(&abs), &abs);
        let before = f.evaluate(&pair.u, &pair.v, lambda).unwrap().value;
        let after = f.evaluate(&abs.u, &abs.v, lambda).unwrap().value;
        prop_assert!(after <= before + 1e-12 * before.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn moments_agree_between_routes(s in 0.0f64..9.0, gap in 0.6f64..6.0) {
        let p = 0.5 * (s + 1.0) + gap;
        let beta = radial_moment(s, p).unwrap();
        let quad = radial_moment_quadrature(s, p, TanhSinh::default()).unwrap();
        prop_assert!(rel_diff(beta, quad) < 1e-10, "s = {}, p = {}: {} vs {}", s, p, beta, quad);
    }
}
