use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimizer::{FlowParams, Init};
use crate::radial::{Grading, Perturbation, RadialGrid, WeightProfile};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Constants,
    Eig,
    Minimize,
    Asymptotics,
    Omega,
    Pohozaev,
}

impl Analysis {
    pub const ALL: [Analysis; 6] = [
        Analysis::Constants,
        Analysis::Eig,
        Analysis::Minimize,
        Analysis::Asymptotics,
        Analysis::Omega,
        Analysis::Pohozaev,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Analysis::Constants => "constants",
            Analysis::Eig => "eig",
            Analysis::Minimize => "minimize",
            Analysis::Asymptotics => "asymptotics",
            Analysis::Omega => "omega",
            Analysis::Pohozaev => "pohozaev",
        }
    }

    /// Analyses whose results this one consumes.
    pub fn requires(self) -> &'static [Analysis] {
        match self {
            Analysis::Constants | Analysis::Eig | Analysis::Asymptotics | Analysis::Omega => &[],
            Analysis::Minimize => &[Analysis::Constants, Analysis::Eig],
            Analysis::Pohozaev => &[Analysis::Constants, Analysis::Eig, Analysis::Minimize],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// N ∈ [4, 8].
    #[default]
    Theorem,
    /// N ∈ [2, 8], for exercising the numerics outside the theory.
    Machinery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradingKind {
    #[default]
    Uniform,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub dim: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default)]
    pub grading: GradingKind,
    /// Ratio of successive cell widths for geometric grading.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub mode: Mode,
    /// Outer radius of the bubble cutoff; defaults to 0.9 R.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_radius: Option<f64>,
}

fn default_radius() -> f64 {
    1.0
}

fn default_cells() -> usize {
    2000
}

/// `gamma0 + coefficient |r - anchor|^exponent (1 + θ)` in config form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub gamma0: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    #[serde(default)]
    pub coefficient: f64,
    #[serde(default)]
    pub anchor: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbation_radii: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbation_values: Vec<f64>,
}

fn default_exponent() -> f64 {
    2.0
}

impl WeightSpec {
    pub fn profile(&self) -> Result<WeightProfile> {
        let mut w = WeightProfile::power(self.gamma0, self.coefficient, self.exponent).with_anchor(self.anchor);
        if !(self.exponent > 0.0) || !(self.gamma0 > 0.0) || self.coefficient < 0.0 {
            return Err(Error::ConfigError(format!(
                "weight needs gamma0 > 0, exponent > 0, coefficient >= 0 (got {}, {}, {})",
                self.gamma0, self.exponent, self.coefficient
            )));
        }
        if !self.perturbation_radii.is_empty() || !self.perturbation_values.is_empty() {
            let table = Perturbation::new(self.perturbation_radii.clone(), self.perturbation_values.clone())
                .map_err(|e| Error::ConfigError(format!("perturbation table: {e}")))?;
            w = w.with_perturbation(table);
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSpec {
    pub a: WeightSpec,
    pub b: WeightSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    Bubble,
    Eigenfunction,
    /// Seeded by the scenario `seed`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSpec {
    pub step: f64,
    pub min_step: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub stall_window: usize,
    pub init: InitKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_epsilon: Option<f64>,
    pub concentration_radius: f64,
    pub concentration_mass: f64,
    pub sup_growth: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        let p = FlowParams::default();
        FlowSpec {
            step: p.step,
            min_step: p.min_step,
            max_iters: p.max_iters,
            grad_tol: p.grad_tol,
            stall_window: p.stall_window,
            init: InitKind::Bubble,
            init_epsilon: None,
            concentration_radius: p.concentration_radius,
            concentration_mass: p.concentration_mass,
            sup_growth: p.sup_growth,
        }
    }
}

impl FlowSpec {
    pub fn params(&self, seed: u64) -> FlowParams {
        FlowParams {
            step: self.step,
            min_step: self.min_step,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            stall_window: self.stall_window,
            init: match self.init {
                InitKind::Bubble => Init::Bubble {
                    epsilon: self.init_epsilon,
                },
                InitKind::Eigenfunction => Init::Eigenfunction,
                InitKind::Random => Init::Random { seed },
            },
            concentration_radius: self.concentration_radius,
            concentration_mass: self.concentration_mass,
            sup_growth: self.sup_growth,
        }
    }
}

/// Coupling values: an explicit list, or `start..=stop` in steps of `step`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl SweepSpec {
    /// Sorted, deduplicated coupling values.
    pub fn values(&self) -> Result<Vec<f64>> {
        let mut out = self.lambdas.clone();
        match (self.start, self.stop, self.step) {
            (None, None, None) => {}
            (Some(start), Some(stop), Some(step)) => {
                if !(step > 0.0) || stop < start {
                    return Err(Error::ConfigError(
                        "sweep range needs step > 0 and stop >= start".into(),
                    ));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|i| start + i as f64 * step));
            }
            _ => {
                return Err(Error::ConfigError(
                    "sweep range needs all of start, stop and step".into(),
                ))
            }
        }
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::ConfigError("sweep values must be finite".into()));
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub plots: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("critvar-out"),
            plots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "all_analyses")]
    pub analyses: Vec<Analysis>,
    pub domain: DomainSpec,
    pub weights: WeightsSpec,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn all_analyses() -> Vec<Analysis> {
    Analysis::ALL.to_vec()
}

/// Parses and validates a scenario document, filling every default.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut s: Scenario = toml::from_str(text).map_err(|e| Error::ConfigError(e.message().to_string()))?;
    s.analyses.sort();
    s.analyses.dedup();
    if s.domain.cutoff_radius.is_none() {
        s.domain.cutoff_radius = Some(0.9 * s.domain.radius);
    }
    s.validate()?;
    Ok(s)
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigError(msg));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("schema = {} is not supported (expected {SCHEMA_VERSION})", self.schema));
        }
        let d = &self.domain;
        let range = match d.mode {
            Mode::Theorem => 4..=8,
            Mode::Machinery => 2..=8,
        };
        if !range.contains(&d.dim) {
            return bad(format!(
                "domain.dim = {} outside [{}, {}] for {:?} mode",
                d.dim,
                range.start(),
                range.end(),
                d.mode
            ));
        }
        if !(d.radius > 0.0) {
            return bad("domain.radius must be positive".into());
        }
        if d.grading == GradingKind::Geometric && !d.ratio.is_some_and(|r| r > 0.0) {
            return bad("geometric grading needs domain.ratio > 0".into());
        }
        if let Some(c) = d.cutoff_radius {
            if !(c > 0.0 && c < d.radius) {
                return bad(format!("domain.cutoff_radius = {c} must lie in (0, radius)"));
            }
        }
        let (a, b) = (&self.weights.a, &self.weights.b);
        if a.gamma0 != b.gamma0 {
            return bad(format!(
                "weights.a.gamma0 = {} differs from weights.b.gamma0 = {}; both weights must take the same minimum value at the center",
                a.gamma0, b.gamma0
            ));
        }
        a.profile()?;
        b.profile()?;
        self.flow.params(self.seed).validate()?;
        self.sweep.values()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        let d = &self.domain;
        let grading = match d.grading {
            GradingKind::Uniform => Grading::Uniform,
            GradingKind::Geometric => Grading::Geometric {
                ratio: d.ratio.unwrap_or(1.0),
            },
        };
        RadialGrid::build(d.dim, d.radius, d.cells, grading)
    }

    pub fn weights(&self) -> Result<(WeightProfile, WeightProfile)> {
        Ok((self.weights.a.profile()?, self.weights.b.profile()?))
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.domain.cutoff_radius.unwrap_or(0.9 * self.domain.radius)
    }

    /// Requested analyses closed under their dependencies, in run order.
    pub fn plan(&self) -> Vec<Analysis> {
        let mut out: Vec<Analysis> = Vec::new();
        for a in &self.analyses {
            for dep in a.requires() {
                out.push(*dep);
            }
            out.push(*a);
        }
        out.sort();
        out.dedup();
        out
    }

    /// The fully defaulted document.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigError(format!("cannot serialize scenario: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema = 1
[domain]
dim = 5
[weights.a]
gamma0 = 1.0
coefficient = 1.0
[weights.b]
gamma0 = 1.0
coefficient = 1.0
[sweep]
lambdas = [10.0]
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.domain.cells, 2000);
        assert_eq!(s.domain.grading, GradingKind::Uniform);
        assert_eq!(s.domain.radius, 1.0);
        assert_eq!(s.weights.a.exponent, 2.0);
        assert_eq!(s.sweep.values().unwrap(), vec![10.0]);
        assert_eq!(s.analyses, Analysis::ALL.to_vec());
    }

    #[test]
    fn roundtrip_is_identical() {
        let s = parse_scenario(MINIMAL).unwrap();
        let again = parse_scenario(&s.to_toml().unwrap()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn gamma0_mismatch_is_rejected() {
        let text = MINIMAL.replacen("gamma0 = 1.0\ncoefficient = 1.0\n[sweep]", "gamma0 = 2.0\ncoefficient = 1.0\n[sweep]", 1);
        match parse_scenario(&text) {
            Err(Error::ConfigError(msg)) => assert!(msg.contains("gamma0")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("dim = 5", "dim = 5\nradiux = 2.0");
        match parse_scenario(&text) {
            Err(Error::ConfigError(msg)) => assert!(msg.contains("radiux"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_sweep_and_plan() {
        let text = MINIMAL.replace("lambdas = [10.0]", "start = 0.0\nstop = 1.0\nstep = 0.25")
            .replace("schema = 1", "schema = 1\nanalyses = [\"pohozaev\"]");
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.sweep.values().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(
            s.plan(),
            vec![Analysis::Constants, Analysis::Eig, Analysis::Minimize, Analysis::Pohozaev]
        );
    }

    #[test]
    fn theorem_mode_rejects_dimension_three() {
        let text = MINIMAL.replace("dim = 5", "dim = 3");
        assert!(matches!(parse_scenario(&text), Err(Error::ConfigError(_))));
        let text = MINIMAL.replace("dim = 5", "dim = 3\nmode = \"machinery\"");
        assert!(parse_scenario(&text).is_ok());
    }
}
