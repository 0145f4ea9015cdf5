//! Cutoff bubble families and the leading-order behavior of their energy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{bubble_constants, correction_constant};
use crate::error::{Error, Result};
use crate::radial::energy::{EnergyReport, Functional};
use crate::radial::field::enforce_dirichlet;
use crate::radial::{RadialGrid, WeightProfile};
use crate::special::unit_sphere_area;

/// Nodes required inside r < √ε for a bubble to count as resolved.
pub const MIN_BUBBLE_NODES: usize = 8;

/// Quintic smoothstep cutoff: 1 on [0, ρ/2], 0 on [ρ, ∞).
pub fn cutoff(r: f64, cutoff_radius: f64) -> f64 {
    let half = 0.5 * cutoff_radius;
    if r <= half {
        1.0
    } else if r >= cutoff_radius {
        0.0
    } else {
        let s = (r - half) / half;
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

/// `U_ε(r) = ε^{(N-2)/4} / (ε + r²)^{(N-2)/2}`.
pub fn bubble_profile(dim: usize, epsilon: f64, r: f64) -> f64 {
    let m = dim as f64 - 2.0;
    epsilon.powf(0.25 * m) / (epsilon + r * r).powf(0.5 * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub epsilon: f64,
    pub cutoff_radius: f64,
}

impl BubbleParams {
    pub fn new(epsilon: f64, cutoff_radius: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::BadDomain(format!("bubble epsilon {epsilon} must be positive")));
        }
        if !(cutoff_radius > 0.0) {
            return Err(Error::BadDomain(format!(
                "cutoff radius {cutoff_radius} must be positive"
            )));
        }
        Ok(BubbleParams {
            epsilon,
            cutoff_radius,
        })
    }

    pub fn value(&self, dim: usize, r: f64) -> f64 {
        cutoff(r, self.cutoff_radius) * bubble_profile(dim, self.epsilon, r)
    }
}

/// Nodal samples of `ζ U_ε`, zero at r = R.
pub fn bubble_field(params: &BubbleParams, grid: &RadialGrid) -> Result<Vec<f64>> {
    if params.cutoff_radius >= grid.radius() {
        return Err(Error::BadDomain(format!(
            "cutoff radius {} must be below R = {}",
            params.cutoff_radius,
            grid.radius()
        )));
    }
    let nodes = grid.nodes_below(params.epsilon.sqrt());
    if nodes < MIN_BUBBLE_NODES {
        return Err(Error::UnderResolvedBubble {
            epsilon: params.epsilon,
            nodes,
            min: MIN_BUBBLE_NODES,
        });
    }
    let mut f: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| params.value(grid.dim(), r))
        .collect();
    enforce_dirichlet(&mut f);
    Ok(f)
}

/// Blow-up `w(y) = s^{(N-2)/2} u(s y)` onto the grid dilated by `1/s`.
pub fn blowup_rescale(u: &[f64], scale: f64, grid: &RadialGrid) -> Result<(RadialGrid, Vec<f64>)> {
    grid.check_len(u)?;
    if !(scale > 0.0) {
        return Err(Error::BadDomain(format!("rescaling factor {scale} must be positive")));
    }
    let amp = scale.powf(0.5 * (grid.dim() as f64 - 2.0));
    let w = u.iter().map(|x| amp * x).collect();
    Ok((grid.dilated(1.0 / scale), w))
}

/// Inverse of [`blowup_rescale`].
pub fn inverse_rescale(w: &[f64], scale: f64, dilated: &RadialGrid) -> Result<(RadialGrid, Vec<f64>)> {
    dilated.check_len(w)?;
    if !(scale > 0.0) {
        return Err(Error::BadDomain(format!("rescaling factor {scale} must be positive")));
    }
    let amp = scale.powf(-0.5 * (dilated.dim() as f64 - 2.0));
    let u = w.iter().map(|x| amp * x).collect();
    Ok((dilated.dilated(scale), u))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub epsilon: f64,
    pub report: EnergyReport,
}

/// `E_λ(ζU_ε, ζU_ε)` along a decreasing list of ε.
pub fn energy_curve(
    lambda: f64,
    a: &WeightProfile,
    b: &WeightProfile,
    eps_list: &[f64],
    cutoff_radius: f64,
    grid: &RadialGrid,
) -> Result<Vec<CurvePoint>> {
    if eps_list.is_empty() {
        return Err(Error::BadDomain("empty epsilon list".into()));
    }
    if eps_list.iter().any(|&e| !(e > 0.0)) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadDomain(
            "epsilon list must be positive and strictly decreasing".into(),
        ));
    }
    let f = Functional::new(grid, a, b)?;
    eps_list
        .par_iter()
        .map(|&epsilon| {
            let u = bubble_field(&BubbleParams::new(epsilon, cutoff_radius)?, grid)?;
            let report = f.evaluate(&u, &u, lambda)?;
            Ok(CurvePoint { epsilon, report })
        })
        .collect()
}

/// Geometric ε ladder with ratio 2 from `eps_max` down to at least `eps_min`.
pub fn epsilon_ladder(eps_max: f64, eps_min: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut e = eps_max;
    while e >= eps_min * (1.0 - 1e-12) {
        out.push(e);
        e *= 0.5;
    }
    out
}

/// Default ladder: √ε between 8 local spacings and `cutoff_radius / 8`.
pub fn default_ladder(grid: &RadialGrid, cutoff_radius: f64) -> Vec<f64> {
    let eps_max = (cutoff_radius / 8.0).powi(2);
    let nodes = grid.nodes();
    let r_min = nodes[MIN_BUBBLE_NODES.min(nodes.len() - 1)];
    let eps_min = (r_min * (1.0 + 1e-9)).powi(2).max((8.0 * grid.min_spacing()).powi(2));
    epsilon_ladder(eps_max, eps_min)
}

/// Ladder for coefficient fits: √ε between `cutoff_radius / 16` and
/// `cutoff_radius / 1000`, clipped to resolved bubbles. Smaller ε puts the
/// correction under rounding; larger ε lets the cutoff terms dominate.
pub fn fit_ladder(grid: &RadialGrid, cutoff_radius: f64) -> Vec<f64> {
    let eps_max = (cutoff_radius / 16.0).powi(2);
    let floor = (cutoff_radius / 1000.0).powi(2);
    let resolved = default_ladder(grid, cutoff_radius).last().copied().unwrap_or(eps_max);
    epsilon_ladder(eps_max, floor.max(resolved))
}

/// Variable multiplying the leading correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "power", rename_all = "snake_case")]
pub enum Scale {
    Eps,
    EpsLogEps,
    EpsPow(f64),
}

impl Scale {
    pub fn eval(self, epsilon: f64) -> f64 {
        match self {
            Scale::Eps => epsilon,
            Scale::EpsLogEps => epsilon * epsilon.ln().abs(),
            Scale::EpsPow(p) => epsilon.powf(p),
        }
    }

    pub fn label(self) -> String {
        match self {
            Scale::Eps => "eps".into(),
            Scale::EpsLogEps => "eps_log_eps".into(),
            Scale::EpsPow(p) => format!("eps_pow({p})"),
        }
    }
}

/// Rows of the bubble-energy expansion table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    HighBothSuperquadratic,
    HighBothQuadratic,
    FourBothSuperquadratic,
    FourBothQuadratic,
    HighQuadraticA,
    HighQuadraticB,
    FourQuadraticB,
    FourQuadraticA,
    FourSubquadraticA,
    FourSubquadraticB,
}

impl Regime {
    pub fn id(self) -> &'static str {
        match self {
            Regime::HighBothSuperquadratic => "n_ge_5_k_gt_2_l_gt_2",
            Regime::HighBothQuadratic => "n_ge_5_k_eq_2_l_eq_2",
            Regime::FourBothSuperquadratic => "n_eq_4_k_gt_2_l_gt_2",
            Regime::FourBothQuadratic => "n_eq_4_k_eq_2_l_eq_2",
            Regime::HighQuadraticA => "n_ge_5_k_eq_2_l_gt_2",
            Regime::HighQuadraticB => "n_ge_5_k_gt_2_l_eq_2",
            Regime::FourQuadraticB => "n_eq_4_k_gt_2_l_eq_2",
            Regime::FourQuadraticA => "n_eq_4_k_eq_2_l_gt_2",
            Regime::FourSubquadraticA => "n_eq_4_k_lt_2_l_eq_2",
            Regime::FourSubquadraticB => "n_eq_4_k_eq_2_l_lt_2",
        }
    }
}

const EXPONENT_TOL: f64 = 1e-12;

/// Classification of an exponent against 2; a constant weight counts as
/// arbitrarily flat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Below,
    Quadratic,
    Above,
}

pub fn order_of(exponent: f64) -> Order {
    if (exponent - 2.0).abs() <= EXPONENT_TOL {
        Order::Quadratic
    } else if exponent < 2.0 {
        Order::Below
    } else {
        Order::Above
    }
}

/// Effective exponent of a profile (infinite for a constant weight).
pub fn effective_exponent(w: &WeightProfile) -> f64 {
    if w.is_constant() {
        f64::INFINITY
    } else {
        w.exponent
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub regime: Regime,
    pub scale: Scale,
    pub coefficient: f64,
}

pub fn classify_regime(dim: usize, k: f64, l: f64) -> Result<Regime> {
    use Order::*;
    let regime = match (dim, order_of(k), order_of(l)) {
        (d, Above, Above) if d >= 5 => Regime::HighBothSuperquadratic,
        (d, Quadratic, Quadratic) if d >= 5 => Regime::HighBothQuadratic,
        (d, Quadratic, Above) if d >= 5 => Regime::HighQuadraticA,
        (d, Above, Quadratic) if d >= 5 => Regime::HighQuadraticB,
        (4, Above, Above) => Regime::FourBothSuperquadratic,
        (4, Quadratic, Quadratic) => Regime::FourBothQuadratic,
        (4, Above, Quadratic) => Regime::FourQuadraticB,
        (4, Quadratic, Above) => Regime::FourQuadraticA,
        (4, Below, Quadratic) => Regime::FourSubquadraticA,
        (4, Quadratic, Below) => Regime::FourSubquadraticB,
        _ => {
            return Err(Error::OutsideTable(format!(
                "N = {dim}, k = {k}, l = {l}"
            )))
        }
    };
    Ok(regime)
}

/// Leading correction `E ≈ γ₀S + coefficient · scale(ε)` from the table.
pub fn expansion_prediction(
    dim: usize,
    k: f64,
    l: f64,
    a_coeff: f64,
    b_coeff: f64,
    lambda: f64,
) -> Result<Prediction> {
    let regime = classify_regime(dim, k, l)?;
    let c = bubble_constants(dim)?;
    let omega4 = unit_sphere_area(4);
    let (scale, coefficient) = match regime {
        Regime::HighBothSuperquadratic => (Scale::Eps, -lambda * c.k3()? / c.k2),
        Regime::HighBothQuadratic => {
            let k3 = c.k3()?;
            let c2 = correction_constant(dim, a_coeff, 2.0)?;
            let d2 = correction_constant(dim, b_coeff, 2.0)?;
            (Scale::Eps, -(lambda - c2 / (2.0 * k3) - d2 / (2.0 * k3)) * k3 / c.k2)
        }
        Regime::HighQuadraticA => {
            let k3 = c.k3()?;
            let c2 = correction_constant(dim, a_coeff, 2.0)?;
            (Scale::Eps, -(lambda - c2 / (2.0 * k3)) * k3 / c.k2)
        }
        Regime::HighQuadraticB => {
            let k3 = c.k3()?;
            let d2 = correction_constant(dim, b_coeff, 2.0)?;
            (Scale::Eps, -(lambda - d2 / (2.0 * k3)) * k3 / c.k2)
        }
        Regime::FourBothSuperquadratic => (Scale::EpsLogEps, -lambda * omega4 / c.k2),
        Regime::FourBothQuadratic => (
            Scale::EpsLogEps,
            -(omega4 / c.k2) * (lambda - (a_coeff + b_coeff)),
        ),
        Regime::FourQuadraticA => (Scale::EpsLogEps, -(omega4 / c.k2) * (lambda - a_coeff)),
        Regime::FourQuadraticB => (Scale::EpsLogEps, -(omega4 / c.k2) * (lambda - b_coeff)),
        Regime::FourSubquadraticA => (
            Scale::EpsPow(0.5 * k),
            correction_constant(dim, a_coeff, k)? / c.k2,
        ),
        Regime::FourSubquadraticB => (
            Scale::EpsPow(0.5 * l),
            correction_constant(dim, b_coeff, l)? / c.k2,
        ),
    };
    Ok(Prediction {
        regime,
        scale,
        coefficient,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFit {
    pub scale: Scale,
    pub leading_coeff: f64,
    /// Standard error of `leading_coeff`.
    pub std_error: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Coefficients of any extra higher-order columns, in order.
    pub nuisance: Vec<f64>,
    pub regime: Option<Regime>,
}

/// Higher-order powers produced by the cutoff tail, `ε^{(N-2)/2}` and
/// `ε^{N/2}`; the tail expands in `ε/r²` over the transition region, so the
/// second term is not negligible across two decades of ε.
pub fn cutoff_nuisance(dim: usize) -> Vec<Scale> {
    let p = 0.5 * (dim as f64 - 2.0);
    vec![Scale::EpsPow(p), Scale::EpsPow(p + 1.0)]
}

/// Least squares `E ≈ intercept + c · scale(ε)`.
pub fn fit_expansion(curve: &[CurvePoint], scale: Scale) -> Result<ExpansionFit> {
    fit_expansion_with(curve, scale, &[])
}

/// As [`fit_expansion`], with extra columns absorbing known higher-order
/// terms (e.g. the `ε^{(N-2)/2}` cutoff correction).
pub fn fit_expansion_with(curve: &[CurvePoint], scale: Scale, extra: &[Scale]) -> Result<ExpansionFit> {
    let xs: Vec<f64> = curve.iter().map(|p| p.epsilon).collect();
    let ys: Vec<f64> = curve.iter().map(|p| p.report.value).collect();
    fit_points(&xs, &ys, scale, extra)
}

pub fn fit_points(eps: &[f64], values: &[f64], scale: Scale, extra: &[Scale]) -> Result<ExpansionFit> {
    let m = eps.len();
    let p = 2 + extra.len();
    if m < 5 || m < p + 1 {
        return Err(Error::FitFailure(format!("{m} points are too few")));
    }
    if values.len() != m {
        return Err(Error::ShapeMismatch {
            expected: m,
            got: values.len(),
        });
    }
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; m], eps.iter().map(|&e| scale.eval(e)).collect()];
    for s in extra {
        cols.push(eps.iter().map(|&e| s.eval(e)).collect());
    }
    let (beta, cov_diag, r_squared) = least_squares(&cols, values)?;
    Ok(ExpansionFit {
        scale,
        leading_coeff: beta[1],
        std_error: cov_diag[1].sqrt(),
        intercept: beta[0],
        r_squared,
        nuisance: beta[2..].to_vec(),
        regime: None,
    })
}

/// Column-scaled modified Gram–Schmidt least squares. Returns coefficients,
/// the diagonal of their covariance, and r².
fn least_squares(cols: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let m = y.len();
    let p = cols.len();
    let scales: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().fold(0.0_f64, |a, x| a.max(x.abs())))
        .collect();
    if scales.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::FitFailure("zero or non-finite design column".into()));
    }
    let mut q: Vec<Vec<f64>> = cols
        .iter()
        .zip(&scales)
        .map(|(c, s)| c.iter().map(|x| x / s).collect())
        .collect();
    let mut r = vec![vec![0.0; p]; p];
    for j in 0..p {
        for i in 0..j {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = d;
            let qi = q[i].clone();
            for (x, a) in q[j].iter_mut().zip(&qi) {
                *x -= d * a;
            }
        }
        let norm = q[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return Err(Error::FitFailure(format!("design matrix is rank deficient at column {j}")));
        }
        r[j][j] = norm;
        for x in q[j].iter_mut() {
            *x /= norm;
        }
    }
    let qty: Vec<f64> = q.iter().map(|c| c.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    // back substitution, then undo column scaling
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = qty[i];
        for j in i + 1..p {
            s -= r[i][j] * beta[j];
        }
        beta[i] = s / r[i][i];
    }
    // R^{-1} for the covariance
    let mut rinv = vec![vec![0.0; p]; p];
    for c in 0..p {
        for i in (0..=c).rev() {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for j in i + 1..=c {
                s -= r[i][j] * rinv[j][c];
            }
            rinv[i][c] = s / r[i][i];
        }
    }
    let fitted: Vec<f64> = (0..m)
        .map(|k| (0..p).map(|j| beta[j] * cols[j][k] / scales[j]).sum())
        .collect();
    let ss_res: f64 = fitted.iter().zip(y).map(|(f, v)| (f - v).powi(2)).sum();
    let mean = y.iter().sum::<f64>() / m as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    let sigma2 = if m > p { ss_res / (m - p) as f64 } else { 0.0 };
    let cov_diag = (0..p)
        .map(|i| sigma2 * (0..p).map(|c| rinv[i][c].powi(2)).sum::<f64>() / (scales[i] * scales[i]))
        .collect();
    let beta = beta.iter().zip(&scales).map(|(b, s)| b / s).collect();
    Ok((beta, cov_diag, r_squared))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::energy::lq_norm;
    use crate::radial::Grading;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.2, 0.8), 1.0);
        assert_eq!(cutoff(0.4, 0.8), 1.0);
        assert_eq!(cutoff(0.8, 0.8), 0.0);
        assert!((cutoff(0.6, 0.8) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let z = cutoff(0.4 + 0.004 * i as f64, 0.8);
            assert!(z <= prev);
            prev = z;
        }
    }

    #[test]
    fn bubble_peak_and_resolution() {
        let g = RadialGrid::build(5, 1.0, 1000, Grading::Uniform).unwrap();
        let eps = 0.01;
        let u = bubble_field(&BubbleParams::new(eps, 0.9).unwrap(), &g).unwrap();
        assert!((u[0] - eps.powf(-0.75)).abs() < 1e-12);
        assert_eq!(u[1000], 0.0);
        assert!(matches!(
            bubble_field(&BubbleParams::new(1e-6, 0.9).unwrap(), &g),
            Err(Error::UnderResolvedBubble { .. })
        ));
    }

    #[test]
    fn identity_rescale_and_round_trip() {
        let g = RadialGrid::build(5, 1.0, 200, Grading::Uniform).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|r| (1.0 - r) * (1.0 + r)).collect();
        let (g1, w1) = blowup_rescale(&u, 1.0, &g).unwrap();
        assert_eq!(w1, u);
        assert_eq!(g1.nodes(), g.nodes());
        let (gd, w) = blowup_rescale(&u, 0.03, &g).unwrap();
        let (gb, back) = inverse_rescale(&w, 0.03, &gd).unwrap();
        let sup = back.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-12);
        assert!((gb.radius() - 1.0).abs() < 1e-12);
        let ratio = lq_norm(&w, &gd).unwrap() / lq_norm(&u, &g).unwrap();
        assert!((ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synthetic_linear_fit() {
        let eps: Vec<f64> = epsilon_ladder(1e-2, 1e-4);
        let vals: Vec<f64> = eps.iter().map(|e| 3.0 - 2.0 * e).collect();
        let fit = fit_points(&eps, &vals, Scale::Eps, &[]).unwrap();
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!((fit.leading_coeff + 2.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_design() {
        let eps = vec![1e-3; 6];
        let vals = vec![1.0; 6];
        assert!(matches!(
            fit_points(&eps, &vals, Scale::Eps, &[]),
            Err(Error::FitFailure(_))
        ));
        assert!(matches!(
            fit_points(&[1e-2, 1e-3], &[1.0, 1.0], Scale::Eps, &[]),
            Err(Error::FitFailure(_))
        ));
    }

    #[test]
    fn table_rows() {
        let c = bubble_constants(5).unwrap();
        let p = expansion_prediction(5, 2.0, 2.0, 1.0, 1.0, 10.0).unwrap();
        assert_eq!(p.scale, Scale::Eps);
        let expect = -(10.0 - 105.0 / 16.0) * c.k3().unwrap() / c.k2;
        assert!((p.coefficient - expect).abs() < 1e-8 * expect.abs());
        let p = expansion_prediction(5, 3.0, 4.0, 1.0, 1.0, 2.0).unwrap();
        assert!((p.coefficient + 2.0 * c.k3().unwrap() / c.k2).abs() < 1e-12);
        for lambda in [0.5, 3.0] {
            let p = expansion_prediction(4, 2.0, 3.0, 1.0, 1.0, lambda).unwrap();
            assert_eq!(p.scale, Scale::EpsLogEps);
            assert_eq!(p.coefficient.signum(), (1.0 - lambda).signum());
        }
        let p = expansion_prediction(4, 1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.scale, Scale::EpsPow(0.5));
        assert!(p.coefficient > 0.0);
        assert!(matches!(
            expansion_prediction(5, 1.0, 2.0, 1.0, 1.0, 1.0),
            Err(Error::OutsideTable(_))
        ));
        assert!(matches!(
            expansion_prediction(4, 1.0, 1.0, 1.0, 1.0, 1.0),
            Err(Error::OutsideTable(_))
        ));
    }
}
