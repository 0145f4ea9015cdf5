use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::unit_sphere_area;

/// Minimum number of cells accepted by [`RadialGrid::build`].
pub const MIN_CELLS: usize = 16;

/// Node distribution along [0, R].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Grading {
    Uniform,
    /// Cell widths grow by `ratio` from the origin outwards.
    Geometric { ratio: f64 },
}

/// Radial discretization of the ball B(0, R) in R^N.
///
/// Node `i` owns the dual cell `[r_{i-1/2}, r_{i+1/2}]` (clipped to [0, R]);
/// `measure[i]` is the exact N-dimensional volume of that shell, so the
/// surface factor and `r^{N-1}` are folded into the quadrature weight and
/// the origin keeps a positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    radius: f64,
    grading: Grading,
    sigma: f64,
    nodes: Vec<f64>,
    widths: Vec<f64>,
    midpoints: Vec<f64>,
    face_areas: Vec<f64>,
    quad_weights: Vec<f64>,
    measure: Vec<f64>,
}

impl RadialGrid {
    pub fn build(dim: usize, radius: f64, cells: usize, grading: Grading) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDomain(format!("dimension {dim} < 2")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::BadDomain(format!("radius {radius} must be positive")));
        }
        if cells < MIN_CELLS {
            return Err(Error::GridTooCoarse {
                cells,
                min: MIN_CELLS,
            });
        }
        let nodes = match grading {
            Grading::Uniform => uniform_nodes(radius, cells),
            Grading::Geometric { ratio } => {
                if !(ratio > 0.0) || !ratio.is_finite() {
                    return Err(Error::BadDomain(format!("grading ratio {ratio} must be positive")));
                }
                if (ratio - 1.0).abs() < 1e-14 {
                    uniform_nodes(radius, cells)
                } else {
                    geometric_nodes(radius, cells, ratio)
                }
            }
        };
        Ok(Self::from_nodes(dim, radius, grading, nodes))
    }

    fn from_nodes(dim: usize, radius: f64, grading: Grading, nodes: Vec<f64>) -> Self {
        let sigma = unit_sphere_area(dim);
        let n = nodes.len() - 1;
        let widths: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let midpoints: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let face_areas = midpoints
            .iter()
            .map(|&m| sigma * m.powi(dim as i32 - 1))
            .collect();
        let mut quad_weights = vec![0.0; n + 1];
        for (c, &h) in widths.iter().enumerate() {
            quad_weights[c] += 0.5 * h;
            quad_weights[c + 1] += 0.5 * h;
        }
        let shell = |lo: f64, hi: f64| sigma * (hi.powi(dim as i32) - lo.powi(dim as i32)) / dim as f64;
        let measure = (0..=n)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { midpoints[i - 1] };
                let hi = if i == n { nodes[n] } else { midpoints[i] };
                shell(lo, hi)
            })
            .collect();
        RadialGrid {
            dim,
            radius,
            grading,
            sigma,
            nodes,
            widths,
            midpoints,
            face_areas,
            quad_weights,
            measure,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// Area of the unit (N-1)-sphere.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Number of cells; there are `cells() + 1` nodes.
    pub fn cells(&self) -> usize {
        self.widths.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    /// σ r_{c}^{N-1} at each cell midpoint.
    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    /// Composite trapezoid weights for ∫_0^R · dr.
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Volume of the dual shell owned by each node.
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn min_spacing(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn volume(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// ∫_Ω f dx for radial samples `f`.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        Ok(self.measure.iter().zip(f).map(|(m, v)| m * v).sum())
    }

    pub(crate) fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.nodes.len() {
            return Err(Error::ShapeMismatch {
                expected: self.nodes.len(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Number of nodes with r < `radius`.
    pub fn nodes_below(&self, radius: f64) -> usize {
        self.nodes.partition_point(|&r| r < radius)
    }

    /// Portion of the dual-cell volume of each node lying inside B(0, δ).
    pub fn measure_within(&self, delta: f64) -> Vec<f64> {
        let n = self.cells();
        let d = self.dim as i32;
        (0..=n)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { self.midpoints[i - 1] };
                let hi = if i == n { self.nodes[n] } else { self.midpoints[i] };
                let hi = hi.min(delta);
                if hi <= lo {
                    0.0
                } else {
                    self.sigma * (hi.powi(d) - lo.powi(d)) / self.dim as f64
                }
            })
            .collect()
    }

    /// Same node pattern with every length multiplied by `factor`.
    pub fn dilated(&self, factor: f64) -> Self {
        let nodes = self.nodes.iter().map(|r| r * factor).collect();
        Self::from_nodes(self.dim, self.radius * factor, self.grading, nodes)
    }

    /// Nested refinement with twice as many cells; every old node is kept.
    pub fn refined(&self) -> Self {
        let (nodes, grading) = match self.grading {
            Grading::Uniform => (uniform_nodes(self.radius, 2 * self.cells()), self.grading),
            Grading::Geometric { ratio } => {
                let fine = ratio.sqrt();
                let mut nodes = geometric_nodes(self.radius, 2 * self.cells(), fine);
                // pin the shared nodes exactly
                for (i, &r) in self.nodes.iter().enumerate() {
                    nodes[2 * i] = r;
                }
                (nodes, Grading::Geometric { ratio: fine })
            }
        };
        Self::from_nodes(self.dim, self.radius, grading, nodes)
    }

    /// Piecewise-linear interpolation of `f` (sampled on `coarse`) onto this grid.
    pub fn interpolate_from(&self, coarse: &RadialGrid, f: &[f64]) -> Vec<f64> {
        let cn = coarse.nodes();
        self.nodes
            .iter()
            .map(|&r| {
                let j = cn.partition_point(|&x| x <= r);
                if j == 0 {
                    f[0]
                } else if j >= cn.len() {
                    f[cn.len() - 1]
                } else {
                    let t = (r - cn[j - 1]) / (cn[j] - cn[j - 1]);
                    f[j - 1] + t * (f[j] - f[j - 1])
                }
            })
            .collect()
    }

    /// Second-order derivative at every node: zero at the origin (radial
    /// smoothness), three-point central in the interior, three-point
    /// one-sided at r = R.
    pub fn derivative(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let x = &self.nodes;
        let n = self.cells();
        let mut d = vec![0.0; n + 1];
        for i in 1..n {
            d[i] = three_point_derivative(x[i], [x[i - 1], x[i], x[i + 1]], [f[i - 1], f[i], f[i + 1]]);
        }
        d[n] = three_point_derivative(x[n], [x[n - 2], x[n - 1], x[n]], [f[n - 2], f[n - 1], f[n]]);
        Ok(d)
    }
}

/// Derivative at `at` of the quadratic through three points.
fn three_point_derivative(at: f64, x: [f64; 3], f: [f64; 3]) -> f64 {
    let mut total = 0.0;
    for j in 0..3 {
        let mut denom = 1.0;
        for m in 0..3 {
            if m != j {
                denom *= x[j] - x[m];
            }
        }
        // d/dx of prod_{m != j} (x - x_m)
        let mut num = 0.0;
        for m in 0..3 {
            if m == j {
                continue;
            }
            let mut prod = 1.0;
            for p in 0..3 {
                if p != j && p != m {
                    prod *= at - x[p];
                }
            }
            num += prod;
        }
        total += f[j] * num / denom;
    }
    total
}

fn uniform_nodes(radius: f64, cells: usize) -> Vec<f64> {
    let h = radius / cells as f64;
    let mut nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
    nodes[cells] = radius;
    nodes
}

fn geometric_nodes(radius: f64, cells: usize, ratio: f64) -> Vec<f64> {
    // widths h0 * ratio^i summing to R
    let total = (ratio.powi(cells as i32) - 1.0) / (ratio - 1.0);
    let h0 = radius / total;
    let mut nodes = Vec::with_capacity(cells + 1);
    nodes.push(0.0);
    for i in 1..=cells {
        nodes.push(h0 * (ratio.powi(i as i32) - 1.0) / (ratio - 1.0));
    }
    nodes[cells] = radius;
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ball_volume;
    use crate::tolerances::rel_diff;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            RadialGrid::build(4, 1.0, 8, Grading::Uniform),
            Err(Error::GridTooCoarse { .. })
        ));
        assert!(matches!(
            RadialGrid::build(4, 0.0, 100, Grading::Uniform),
            Err(Error::BadDomain(_))
        ));
        assert!(matches!(
            RadialGrid::build(4, -1.0, 100, Grading::Uniform),
            Err(Error::BadDomain(_))
        ));
    }

    #[test]
    fn ball_volume_n4() {
        let g = RadialGrid::build(4, 1.0, 2000, Grading::Uniform).unwrap();
        let ones = vec![1.0; g.len()];
        let vol = g.integrate(&ones).unwrap();
        assert!(rel_diff(vol, PI * PI / 2.0) < 1e-6);
        assert!(rel_diff(g.sigma(), 2.0 * PI * PI) < 1e-12);
    }

    #[test]
    fn unit_disk_n2() {
        let g = RadialGrid::build(2, 1.0, 16, Grading::Uniform).unwrap();
        let vol = g.integrate(&vec![1.0; g.len()]).unwrap();
        assert!(rel_diff(vol, PI) < 1.0 / 16.0_f64.powi(2));
    }

    #[test]
    fn geometric_ratio_constant() {
        let g = RadialGrid::build(5, 2.0, 1000, Grading::Geometric { ratio: 1.01 }).unwrap();
        for w in g.widths().windows(2) {
            assert!((w[1] / w[0] - 1.01).abs() < 1e-12);
        }
        assert_eq!(*g.nodes().last().unwrap(), 2.0);
        assert!(rel_diff(g.volume(), ball_volume(5, 2.0)) < 1e-12);
    }

    #[test]
    fn integrate_r_squared_n5() {
        let g = RadialGrid::build(5, 1.0, 2000, Grading::Uniform).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let sigma4 = 8.0 * PI * PI / 3.0;
        assert!(rel_diff(g.integrate(&f).unwrap(), sigma4 / 7.0) < 1e-6);
        assert_eq!(g.integrate(&vec![0.0; g.len()]).unwrap(), 0.0);
        assert!(matches!(g.integrate(&[1.0, 2.0]), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn monomial_moments_converge_second_order() {
        for s in 0..=6 {
            let errs: Vec<f64> = [200usize, 400, 800]
                .iter()
                .map(|&n| {
                    let g = RadialGrid::build(4, 1.0, n, Grading::Uniform).unwrap();
                    let f: Vec<f64> = g.nodes().iter().map(|r| r.powi(s)).collect();
                    let exact = g.sigma() / (s as f64 + 4.0);
                    (g.integrate(&f).unwrap() - exact).abs()
                })
                .collect();
            if errs[0] < 1e-13 {
                continue;
            }
            let rate = (errs[1] / errs[2]).log2();
            assert!(rate > 1.8, "s = {s}: rate {rate}");
        }
    }

    #[test]
    fn refinement_is_nested() {
        for grading in [Grading::Uniform, Grading::Geometric { ratio: 1.02 }] {
            let g = RadialGrid::build(5, 1.0, 100, grading).unwrap();
            let f = g.refined();
            assert_eq!(f.cells(), 200);
            for (i, &r) in g.nodes().iter().enumerate() {
                assert!((f.nodes()[2 * i] - r).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn derivative_is_exact_for_quadratics() {
        let g = RadialGrid::build(5, 1.0, 50, Grading::Geometric { ratio: 1.05 }).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| 1.0 - r * r).collect();
        let d = g.derivative(&f).unwrap();
        for (i, &r) in g.nodes().iter().enumerate().skip(1) {
            assert!((d[i] + 2.0 * r).abs() < 1e-10, "node {i}");
        }
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn measure_within_matches_volume_ratio() {
        let g = RadialGrid::build(4, 1.0, 333, Grading::Uniform).unwrap();
        let inside: f64 = g.measure_within(0.1).iter().sum();
        assert!(rel_diff(inside / g.volume(), 0.1f64.powi(4)) < 1e-12);
    }
}
