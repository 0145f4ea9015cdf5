use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::diagnostics::{concentration_diagnostic, el_residual, Multipliers};
use crate::asymptotics::{bubble_field, BubbleParams};
use crate::error::{Error, Result};
use crate::radial::energy::{EnergyReport, Functional};
use crate::radial::FieldPair;
use crate::spectral::eigenpair_of;
use crate::spectral::operator_from_stiffness;

/// Starting pair of a descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Init {
    /// Cutoff bubble; `epsilon` defaults to R²/100.
    Bubble {
        #[serde(default)]
        epsilon: Option<f64>,
    },
    Eigenfunction,
    Random {
        seed: u64,
    },
    Custom {
        u: Vec<f64>,
        v: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    /// Initial step of each iteration, halved on energy increase.
    pub step: f64,
    pub min_step: f64,
    pub max_iters: usize,
    /// Stop when the Euler–Lagrange residual drops below this.
    pub grad_tol: f64,
    /// Give up after this many iterations without a lower energy.
    pub stall_window: usize,
    pub init: Init,
    /// Radius of the concentration ball as a fraction of R.
    pub concentration_radius: f64,
    pub concentration_mass: f64,
    /// Required growth of sup|u| over its initial value.
    pub sup_growth: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            step: 1.0,
            min_step: 1e-6,
            max_iters: 20_000,
            grad_tol: 1e-6,
            stall_window: 2_000,
            init: Init::Bubble { epsilon: None },
            concentration_radius: 0.1,
            concentration_mass: 0.99,
            sup_growth: 10.0,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::ConfigError(msg.to_string()));
        if !(self.step > 0.0) {
            return bad("flow.step must be positive");
        }
        if !(self.grad_tol > 0.0) {
            return bad("flow.grad_tol must be positive");
        }
        if !(self.min_step > 0.0 && self.min_step <= self.step) {
            return bad("flow.min_step must lie in (0, step]");
        }
        if !(self.concentration_radius > 0.0 && self.concentration_radius < 1.0) {
            return bad("flow.concentration_radius must lie in (0, 1)");
        }
        if !(self.concentration_mass > 0.0 && self.concentration_mass <= 1.0) {
            return bad("flow.concentration_mass must lie in (0, 1]");
        }
        if self.max_iters == 0 || self.stall_window == 0 {
            return bad("flow.max_iters and flow.stall_window must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    Concentrating,
    Stalled,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Concentrating => "concentrating",
            Status::Stalled => "stalled",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    /// Lowest-energy pair seen, normalized in L^q; on convergence the
    /// stationary iterate, whose energy matches the lowest to rounding.
    pub pair: FieldPair,
    pub q_lambda: f64,
    pub report: EnergyReport,
    pub multipliers: Multipliers,
    pub el_residual: f64,
    /// Smaller of the two δ-mass ratios of the returned pair.
    pub concentration: f64,
    pub status: Status,
    pub iterations: usize,
    /// Best energy after each iteration (index 0 is the initial pair).
    pub history: Vec<f64>,
    pub initial_sup: f64,
    pub final_sup: f64,
}

const ROUNDING_SLACK: f64 = 1e-13;

fn sup(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn normalized(f: &Functional, x: Vec<f64>, which: &str) -> Result<Vec<f64>> {
    let n = f.lq_norm(&x);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::DegeneratePair(format!("{which} has L^q norm {n}")));
    }
    Ok(x.into_iter().map(|y| y / n).collect())
}

/// Builds the starting pair requested by `params.init`.
pub fn initial_pair(f: &Functional, params: &FlowParams, lambda: f64) -> Result<FieldPair> {
    let grid = f.grid();
    let radius = grid.radius();
    match &params.init {
        Init::Bubble { epsilon } => {
            let eps = epsilon.unwrap_or(radius * radius / 100.0);
            let u = bubble_field(&BubbleParams::new(eps, 0.9 * radius)?, grid)?;
            FieldPair::symmetric(grid, u, lambda)
        }
        Init::Eigenfunction => {
            let tol = 1e-10;
            let (ka, kb) = f.stiffness();
            let ea = eigenpair_of(&operator_from_stiffness(ka, grid), grid, tol)?;
            let eb = eigenpair_of(&operator_from_stiffness(kb, grid), grid, tol)?;
            FieldPair::new(grid, ea.eigenfunction, eb.eigenfunction, lambda)
        }
        Init::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut field = || {
                let coeffs: Vec<f64> = (1..=6)
                    .map(|j| rng.gen_range(-0.5..0.5) / j as f64)
                    .collect();
                FieldPair::sample(grid, |r| {
                    let t = r / radius;
                    let modes: f64 = coeffs
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * ((j + 1) as f64 * std::f64::consts::PI * t).cos())
                        .sum();
                    (1.0 - t * t) * (1.0 + modes)
                })
            };
            let u = field();
            let v = field();
            FieldPair::new(grid, u, v, lambda)
        }
        Init::Custom { u, v } => FieldPair::new(grid, u.clone(), v.clone(), lambda),
    }
}

/// Initial pair from `params.init`, then [`descend`].
pub fn minimize(f: &Functional, lambda: f64, params: &FlowParams) -> Result<MinimizeResult> {
    let init = initial_pair(f, params, lambda)?;
    descend(&init, f, lambda, params)
}

/// Normalized gradient flow on (u, v).
///
/// Both components move simultaneously along the Sobolev gradient
/// `K⁻¹∇E` of the normalized functional, are renormalized in L^q, and the
/// step is halved until the energy does not increase.
pub fn descend(init: &FieldPair, f: &Functional, lambda: f64, params: &FlowParams) -> Result<MinimizeResult> {
    params.validate()?;
    let grid = f.grid();
    let n = grid.cells();
    let q = f.q();
    let mu = grid.measure();
    let (ka, kb) = f.stiffness();
    let (mat_a, mat_b) = (ka.dirichlet_matrix(), kb.dirichlet_matrix());
    let delta = params.concentration_radius * grid.radius();

    let mut u = normalized(f, init.u.clone(), "u")?;
    let mut v = normalized(f, init.v.clone(), "v")?;
    let mut report = f.evaluate(&u, &v, lambda)?;
    let initial_sup = sup(&u).max(sup(&v));
    let mut history = vec![report.value];
    let mut best = (u.clone(), v.clone(), report);
    let mut status = Status::Stalled;
    let mut last_improvement = 0;
    let mut iterations = 0;
    let mut generation = init.generation;

    for it in 1..=params.max_iters {
        let m = Multipliers::from_report(&report);
        let current = FieldPair {
            u: u.clone(),
            v: v.clone(),
            lambda,
            generation,
        };
        if el_residual(&current, m, f, lambda)? <= params.grad_tol {
            status = Status::Converged;
            // prefer the stationary iterate over a rounding-level lower energy
            if report.value <= best.2.value + ROUNDING_SLACK * best.2.value.abs() {
                best = (u.clone(), v.clone(), report);
            }
            break;
        }
        let growth = sup(&u).max(sup(&v)) / initial_sup;
        if growth >= params.sup_growth {
            let c = concentration_diagnostic(&u, delta, q, grid)?
                .min(concentration_diagnostic(&v, delta, q, grid)?);
            if c > params.concentration_mass {
                status = Status::Concentrating;
                break;
            }
        }

        let mut rhs_u = vec![0.0; n];
        let mut rhs_v = vec![0.0; n];
        for i in 0..n {
            rhs_u[i] = mu[i] * (lambda * v[i] + m.u * u[i].abs().powf(q - 2.0) * u[i]);
            rhs_v[i] = mu[i] * (lambda * u[i] + m.v * v[i].abs().powf(q - 2.0) * v[i]);
        }
        let mut target_u = mat_a.solve(&rhs_u)?;
        let mut target_v = mat_b.solve(&rhs_v)?;
        target_u.push(0.0);
        target_v.push(0.0);

        let mut tau = params.step;
        let accepted = loop {
            let cu: Vec<f64> = u.iter().zip(&target_u).map(|(a, b)| (1.0 - tau) * a + tau * b).collect();
            let cv: Vec<f64> = v.iter().zip(&target_v).map(|(a, b)| (1.0 - tau) * a + tau * b).collect();
            let candidate = normalized(f, cu, "u")
                .and_then(|cu| Ok((cu, normalized(f, cv, "v")?)))
                .and_then(|(cu, cv)| {
                    let r = f.evaluate(&cu, &cv, lambda)?;
                    Ok((cu, cv, r))
                });
            match candidate {
                // near a critical point energy differences sink below rounding
                Ok((cu, cv, r)) if r.value <= report.value + ROUNDING_SLACK * report.value.abs() => {
                    break Some((cu, cv, r))
                }
                Ok(_) | Err(Error::DegeneratePair(_)) => {}
                Err(e) => return Err(e),
            }
            tau *= 0.5;
            if tau < params.min_step {
                break None;
            }
        };
        iterations = it;
        let Some((cu, cv, r)) = accepted else {
            history.push(best.2.value);
            break;
        };
        u = cu;
        v = cv;
        report = r;
        generation += 1;
        if report.value < best.2.value {
            last_improvement = it;
            best = (u.clone(), v.clone(), report);
        }
        history.push(best.2.value);
        if it - last_improvement >= params.stall_window {
            break;
        }
    }

    let (u, v, report) = best;
    let pair = FieldPair {
        u,
        v,
        lambda,
        generation,
    };
    let multipliers = Multipliers::from_report(&report);
    let residual = el_residual(&pair, multipliers, f, lambda)?;
    let concentration = concentration_diagnostic(&pair.u, delta, q, grid)?
        .min(concentration_diagnostic(&pair.v, delta, q, grid)?);
    let final_sup = sup(&pair.u).max(sup(&pair.v));
    Ok(MinimizeResult {
        q_lambda: report.value,
        report,
        multipliers,
        el_residual: residual,
        concentration,
        status,
        iterations,
        history,
        initial_sup,
        final_sup,
        pair,
    })
}
