use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use crate::error::{Error, Result};

/// Tabulated perturbation θ(d), linearly interpolated and held constant
/// outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl Perturbation {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(Error::BadDomain(
                "perturbation table needs at least two (r, θ) pairs".into(),
            ));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadDomain("perturbation radii must increase".into()));
        }
        Ok(Perturbation { radii, values })
    }

    /// Tabulates `f` on `samples` equally spaced points of [0, extent].
    pub fn tabulate(extent: f64, samples: usize, f: impl Fn(f64) -> f64) -> Self {
        let radii: Vec<f64> = (0..samples)
            .map(|i| extent * i as f64 / (samples - 1) as f64)
            .collect();
        let values = radii.iter().map(|&r| f(r)).collect();
        Perturbation { radii, values }
    }

    /// θ and its slope at `d`.
    pub fn eval(&self, d: f64) -> (f64, f64) {
        let r = &self.radii;
        let v = &self.values;
        if d <= r[0] {
            return (v[0], 0.0);
        }
        if d >= r[r.len() - 1] {
            return (v[v.len() - 1], 0.0);
        }
        let j = r.partition_point(|&x| x <= d);
        let slope = (v[j] - v[j - 1]) / (r[j] - r[j - 1]);
        (v[j - 1] + slope * (d - r[j - 1]), slope)
    }
}

/// Radial weight `γ0 + c·d^k + d^k·θ(d)` with `d = |r - anchor|`.
///
/// The weights of interest have `anchor = 0`, so that the minimum γ0 sits at
/// the center of the ball; a nonzero anchor is used to build profiles whose
/// radial derivative changes sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub gamma0: f64,
    pub exponent: f64,
    pub coefficient: f64,
    #[serde(default)]
    pub anchor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
}

impl WeightProfile {
    pub fn constant(gamma0: f64) -> Self {
        WeightProfile {
            gamma0,
            exponent: 2.0,
            coefficient: 0.0,
            anchor: 0.0,
            perturbation: None,
        }
    }

    pub fn power(gamma0: f64, coefficient: f64, exponent: f64) -> Self {
        WeightProfile {
            gamma0,
            exponent,
            coefficient,
            anchor: 0.0,
            perturbation: None,
        }
    }

    pub fn with_anchor(mut self, anchor: f64) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn with_perturbation(mut self, table: Perturbation) -> Self {
        self.perturbation = Some(table);
        self
    }

    /// True when the profile is the constant γ0.
    pub fn is_constant(&self) -> bool {
        self.coefficient == 0.0
            && self
                .perturbation
                .as_ref()
                .map_or(true, |p| p.values.iter().all(|&v| v == 0.0))
    }

    fn theta(&self, d: f64) -> (f64, f64) {
        self.perturbation.as_ref().map_or((0.0, 0.0), |p| p.eval(d))
    }

    pub fn value(&self, r: f64) -> f64 {
        let d = (r - self.anchor).abs();
        let (theta, _) = self.theta(d);
        self.gamma0 + d.powf(self.exponent) * (self.coefficient + theta)
    }

    /// dw/dr.
    pub fn derivative(&self, r: f64) -> f64 {
        let d = (r - self.anchor).abs();
        if d == 0.0 {
            return 0.0;
        }
        let sign = if r >= self.anchor { 1.0 } else { -1.0 };
        let (theta, slope) = self.theta(d);
        let k = self.exponent;
        sign * (k * d.powf(k - 1.0) * (self.coefficient + theta) + d.powf(k) * slope)
    }

    /// ã(r) = ∇w(x)·x = r w'(r).
    pub fn tilde(&self, r: f64) -> f64 {
        if self.anchor == 0.0 {
            // avoid d^{k-1} at the origin
            let (theta, slope) = self.theta(r);
            let k = self.exponent;
            k * r.powf(k) * (self.coefficient + theta) + r.powf(k + 1.0) * slope
        } else {
            r * self.derivative(r)
        }
    }

    pub fn samples(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.nodes().iter().map(|&r| self.value(r)).collect()
    }

    pub fn midpoint_samples(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.midpoints().iter().map(|&r| self.value(r)).collect()
    }

    /// Fails with `IndefiniteWeight` at the first nonpositive node or midpoint sample.
    pub fn check_positive(&self, grid: &RadialGrid) -> Result<()> {
        for &r in grid.nodes().iter().chain(grid.midpoints()) {
            let value = self.value(r);
            if !(value > 0.0) {
                return Err(Error::IndefiniteWeight { r, value });
            }
        }
        Ok(())
    }

    /// Checks `k·c·r^k <= r w'(r)` at every interior node.
    pub fn check_monotonicity(&self, grid: &RadialGrid, tol: f64) -> MonotonicityReport {
        let mut report = MonotonicityReport {
            holds: true,
            worst_node: 0,
            worst_radius: 0.0,
            worst_margin: f64::INFINITY,
        };
        let n = grid.cells();
        for (i, &r) in grid.nodes().iter().enumerate().take(n).skip(1) {
            let required = self.exponent * self.coefficient * r.powf(self.exponent);
            let margin = self.tilde(r) - required;
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.worst_node = i;
                report.worst_radius = r;
            }
        }
        report.holds = report.worst_margin >= -tol;
        report
    }
}

/// Outcome of [`WeightProfile::check_monotonicity`]; `worst_*` locate the
/// node with the smallest margin `r w'(r) - k c r^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    pub holds: bool,
    pub worst_node: usize,
    pub worst_radius: f64,
    pub worst_margin: f64,
}
