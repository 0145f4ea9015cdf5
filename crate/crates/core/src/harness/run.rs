use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::plot::{emit_plot, Chart, Series};
use super::scenario::{Analysis, Scenario};
use super::table::{emit_csv, Cell, Table};
use crate::asymptotics::{
    cutoff_nuisance, fit_ladder, effective_exponent, energy_curve, expansion_prediction,
    fit_expansion_with, CurvePoint, Scale,
};
use crate::constants::{
    best_sobolev_constant, bubble_constants, bubble_constants_with, correction_constant, thresholds,
    MomentRoute,
};
use crate::error::{Error, Result};
use crate::minimizer::{
    sobolev_grid_constant, sweep, verdict, ExistenceVerdict, Multipliers, SobolevGrid, Status,
    VerdictInput,
};
use crate::nonexistence::{
    omega_estimate, omega_lower_bound, pohozaev_report, OmegaEstimate, OmegaSearch, OmegaValue,
    PohozaevReport,
};
use crate::radial::{Functional, RadialGrid, WeightProfile};
use crate::spectral::{lambda_tilde, LambdaTilde};
use crate::tolerances::rel_diff;

pub const CONSTANTS_HEADER: &[&str] = &["name", "value", "reference", "rel_residual"];
pub const EIGENVALUES_HEADER: &[&str] = &["weight", "lambda1", "iterations", "residual"];
pub const EIGENFUNCTIONS_HEADER: &[&str] = &["r", "phi_a", "phi_b"];
pub const MINIMIZE_HEADER: &[&str] = &[
    "lambda",
    "q_hat",
    "gamma0_s_grid",
    "multiplier_u",
    "multiplier_v",
    "el_residual",
    "concentration",
    "status",
    "verdict",
    "case_id",
    "threshold_lower",
    "threshold_upper",
    "omega_lower",
    "q_lambda",
    "iterations",
    "error",
];
pub const CURVE_HEADER: &[&str] = &["lambda", "epsilon", "scale_value", "energy"];
pub const FIT_HEADER: &[&str] = &[
    "lambda",
    "regime",
    "scale",
    "predicted_coeff",
    "fitted_coeff",
    "std_error",
    "rel_error",
    "intercept",
    "gamma0_s",
    "r_squared",
    "error",
];
pub const OMEGA_HEADER: &[&str] = &[
    "value",
    "neg_infinity",
    "witness_radius",
    "lower_bound",
    "upper_bound",
    "shape_value",
    "family_min",
    "respects_bounds",
];
pub const OMEGA_FAMILY_HEADER: &[&str] = &["scale", "value"];
pub const POHOZAEV_HEADER: &[&str] = &[
    "lambda",
    "coupling_term",
    "interior_a",
    "interior_b",
    "boundary_a",
    "boundary_b",
    "residual",
    "relative_residual",
];

/// Absolute slack of the sweep monotonicity check, relative to `|Q̂|`.
const MONOTONE_SLACK: f64 = 1e-8;
const EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; the global pool when absent.
    pub jobs: Option<usize>,
    pub plots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub version: &'static str,
    /// SHA-256 of the fully defaulted scenario document.
    pub config_hash: String,
    pub grid: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsRow {
    pub name: &'static str,
    pub value: f64,
    pub reference: Option<f64>,
    pub rel_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRow {
    pub lambda: f64,
    pub status: Option<Status>,
    pub error: Option<String>,
    pub q_lambda: Option<f64>,
    pub q_hat: Option<f64>,
    pub multipliers: Option<Multipliers>,
    pub el_residual: Option<f64>,
    pub concentration: Option<f64>,
    pub iterations: Option<usize>,
    pub verdict: ExistenceVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub lambda: f64,
    pub regime: Option<&'static str>,
    pub scale: Scale,
    pub predicted: Option<f64>,
    pub fitted: Option<f64>,
    pub std_error: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PohozaevRow {
    pub lambda: f64,
    pub report: PohozaevReport,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: Scenario,
    pub provenance: Provenance,
    pub plan: Vec<Analysis>,
    pub gamma0: f64,
    pub constants: Vec<ConstantsRow>,
    pub eig: Option<LambdaTilde>,
    pub grid_nodes: Vec<f64>,
    pub s_grid: Option<SobolevGrid>,
    pub rows: Vec<LambdaRow>,
    pub curves: Vec<(f64, Vec<CurvePoint>)>,
    pub fits: Vec<FitRow>,
    pub omega: Option<OmegaEstimate>,
    pub pohozaev: Vec<PohozaevRow>,
    /// Violated invariants; a nonempty list means the run failed.
    pub invariant_failures: Vec<String>,
}

pub fn provenance(scenario: &Scenario) -> Result<Provenance> {
    let canonical = scenario.to_toml()?;
    let d = &scenario.domain;
    let grading = match d.ratio {
        Some(r) if d.grading == super::scenario::GradingKind::Geometric => format!("geometric({r})"),
        _ => "uniform".into(),
    };
    Ok(Provenance {
        version: env!("CARGO_PKG_VERSION"),
        config_hash: hex::encode(Sha256::digest(canonical.as_bytes())),
        grid: format!("N={} R={} n={} {}", d.dim, d.radius, d.cells, grading),
    })
}

/// Executes the scenario's analyses in dependency order. Per-row failures
/// are recorded in the rows; only configuration and numeric faults abort.
pub fn run(scenario: &Scenario, options: &RunOptions) -> Result<RunReport> {
    scenario.validate()?;
    match options.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| Error::ConfigError(format!("cannot build a pool of {jobs} workers: {e}")))?;
            pool.install(|| run_in_pool(scenario))
        }
        None => run_in_pool(scenario),
    }
}

fn run_in_pool(scenario: &Scenario) -> Result<RunReport> {
    let plan = scenario.plan();
    let grid = scenario.grid()?;
    let (a, b) = scenario.weights()?;
    a.check_positive(&grid)?;
    b.check_positive(&grid)?;
    let dim = grid.dim();
    let gamma0 = a.gamma0;
    let mut report = RunReport {
        scenario: scenario.clone(),
        provenance: provenance(scenario)?,
        plan: plan.clone(),
        gamma0,
        constants: Vec::new(),
        eig: None,
        grid_nodes: grid.nodes().to_vec(),
        s_grid: None,
        rows: Vec::new(),
        curves: Vec::new(),
        fits: Vec::new(),
        omega: None,
        pohozaev: Vec::new(),
        invariant_failures: Vec::new(),
    };
    let lambdas = scenario.sweep.values()?;
    let cutoff = scenario.cutoff_radius();

    if plan.contains(&Analysis::Constants) {
        report.constants = constants_rows(dim, &a, &b)?;
    }
    if plan.contains(&Analysis::Eig) {
        report.eig = Some(lambda_tilde(&a, &b, &grid, EIG_TOL)?);
    }

    let mut pairs = Vec::new();
    if plan.contains(&Analysis::Minimize) && !lambdas.is_empty() {
        let f = Functional::new(&grid, &a, &b)?;
        let params = scenario.flow.params(scenario.seed);
        report.s_grid = sobolev_grid_constant(&grid, cutoff).ok();
        let lt = report.eig.as_ref().map(|e| e.value).expect("eig runs before minimize");
        let omega_lower = omega_lower_bound(&a, &b, &grid)?;
        for row in sweep(&f, &lambdas, &params) {
            let v = verdict(&VerdictInput {
                dim,
                k: effective_exponent(&a),
                l: effective_exponent(&b),
                a_coeff: a.coefficient,
                b_coeff: b.coefficient,
                lambda: row.lambda,
                lambda_tilde: lt,
                omega_lower,
            })?;
            let mut out = LambdaRow {
                lambda: row.lambda,
                status: None,
                error: None,
                q_lambda: None,
                q_hat: row.q_hat,
                multipliers: None,
                el_residual: None,
                concentration: None,
                iterations: None,
                verdict: v,
            };
            match row.outcome {
                Ok(m) => {
                    out.status = Some(m.status);
                    out.q_lambda = Some(m.q_lambda);
                    out.multipliers = Some(m.multipliers);
                    out.el_residual = Some(m.el_residual);
                    out.concentration = Some(m.concentration);
                    out.iterations = Some(m.iterations);
                    pairs.push(Some(m.pair));
                }
                Err(Error::NumericFault(msg)) => return Err(Error::NumericFault(msg)),
                Err(e) => {
                    out.error = Some(e.to_string());
                    pairs.push(None);
                }
            }
            report.rows.push(out);
        }
    }

    if plan.contains(&Analysis::Asymptotics) {
        let ladder = fit_ladder(&grid, cutoff);
        for &lambda in &lambdas {
            let (curve, fit) = asymptotics_row(lambda, &a, &b, &ladder, cutoff, &grid);
            if let Some(c) = curve {
                report.curves.push((lambda, c));
            }
            report.fits.push(fit);
        }
    }

    if plan.contains(&Analysis::Omega) {
        report.omega = Some(omega_estimate(&a, &b, &grid, &OmegaSearch::default())?);
    }

    if plan.contains(&Analysis::Pohozaev) {
        for (row, pair) in report.rows.iter().zip(&pairs) {
            if row.status != Some(Status::Converged) {
                continue;
            }
            let pair = pair.as_ref().expect("converged rows carry a pair");
            report.pohozaev.push(PohozaevRow {
                lambda: row.lambda,
                report: pohozaev_report(pair, row.lambda, &a, &b, &grid)?,
            });
        }
    }

    report.invariant_failures = check_invariants(&report);
    Ok(report)
}

fn constants_rows(dim: usize, a: &WeightProfile, b: &WeightProfile) -> Result<Vec<ConstantsRow>> {
    let row = |name, value: f64, reference: Option<f64>| ConstantsRow {
        name,
        value,
        reference,
        rel_residual: reference.map(|r| rel_diff(value, r)),
    };
    let s_closed = best_sobolev_constant(dim);
    if dim < 4 {
        return Ok(vec![row("s", s_closed, None)]);
    }
    let beta = bubble_constants(dim)?;
    let quad = bubble_constants_with(dim, MomentRoute::quadrature())?;
    let mut rows = vec![
        row("sigma", beta.sigma, None),
        row("k1", quad.k1, Some(beta.k1)),
        row("k2", quad.k2, Some(beta.k2)),
    ];
    if let (Ok(k3q), Ok(k3b)) = (quad.k3(), beta.k3()) {
        rows.push(row("k3", k3q, Some(k3b)));
        let n = dim as f64;
        let c2 = correction_constant(dim, 1.0, 2.0)?;
        rows.push(row(
            "c2_over_k3_unit",
            c2 / k3q,
            Some(n * (n - 2.0) * (n + 2.0) / (4.0 * (n - 1.0))),
        ));
    }
    rows.push(row("s", quad.s, Some(s_closed)));
    let quadratic = |w: &WeightProfile| {
        if !w.is_constant() && w.exponent == 2.0 {
            w.coefficient
        } else {
            0.0
        }
    };
    let t = thresholds(dim, quadratic(a), quadratic(b))?;
    let n = dim as u64;
    rows.push(row("m_n", t.m_n, Some((n * (n - 2) * (n + 2)) as f64 / (8 * (n - 1)) as f64)));
    rows.push(row("gamma_n", t.gamma_n, None));
    rows.push(row("gamma_tilde_a", t.gamma_tilde_a, None));
    rows.push(row("gamma_tilde_b", t.gamma_tilde_b, None));
    rows.push(row("gamma0_s", a.gamma0 * s_closed, None));
    Ok(rows)
}

fn asymptotics_row(
    lambda: f64,
    a: &WeightProfile,
    b: &WeightProfile,
    ladder: &[f64],
    cutoff: f64,
    grid: &RadialGrid,
) -> (Option<Vec<CurvePoint>>, FitRow) {
    let dim = grid.dim();
    let prediction = expansion_prediction(
        dim,
        effective_exponent(a),
        effective_exponent(b),
        a.coefficient,
        b.coefficient,
        lambda,
    );
    let mut row = FitRow {
        lambda,
        regime: None,
        scale: Scale::Eps,
        predicted: None,
        fitted: None,
        std_error: None,
        intercept: None,
        r_squared: None,
        error: None,
    };
    match &prediction {
        Ok(p) => {
            row.regime = Some(p.regime.id());
            row.scale = p.scale;
            row.predicted = Some(p.coefficient);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    let curve = match energy_curve(lambda, a, b, ladder, cutoff, grid) {
        Ok(c) => c,
        Err(e) => {
            row.error = Some(e.to_string());
            return (None, row);
        }
    };
    match fit_expansion_with(&curve, row.scale, &cutoff_nuisance(dim)) {
        Ok(fit) => {
            row.fitted = Some(fit.leading_coeff);
            row.std_error = Some(fit.std_error);
            row.intercept = Some(fit.intercept);
            row.r_squared = Some(fit.r_squared);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    (Some(curve), row)
}

fn check_invariants(report: &RunReport) -> Vec<String> {
    let mut failures = Vec::new();
    let gamma0_s = report.gamma0 * best_sobolev_constant(report.scenario.domain.dim);
    let mut previous: Option<(f64, f64)> = None;
    for row in &report.rows {
        if let (Some(q), true) = (row.q_hat, row.lambda >= 0.0) {
            if let Some((lp, qp)) = previous {
                if q > qp + MONOTONE_SLACK * qp.abs().max(1.0) {
                    failures.push(format!(
                        "sweep estimate increases from {qp} at lambda = {lp} to {q} at lambda = {}",
                        row.lambda
                    ));
                }
            }
            previous = Some((row.lambda, q));
        }
        if let (Some(m), Some(q)) = (row.multipliers, row.q_lambda) {
            if (m.mean() - q).abs() > 1e-10 * q.abs().max(1.0) {
                failures.push(format!(
                    "multiplier mean {} differs from the energy {q} at lambda = {}",
                    m.mean(),
                    row.lambda
                ));
            }
        }
        if let (Some(q), Some(eig)) = (row.q_hat, &report.eig) {
            if row.lambda > 0.0 && row.lambda < eig.value && q < -1e-6 * gamma0_s {
                failures.push(format!(
                    "negative infimum estimate {q} at lambda = {} below the first eigenvalue {}",
                    row.lambda, eig.value
                ));
            }
        }
    }
    for p in &report.pohozaev {
        if p.report.boundary_a < 0.0 || p.report.boundary_b < 0.0 {
            failures.push(format!("negative boundary term at lambda = {}", p.lambda));
        }
    }
    if let Some(o) = &report.omega {
        if let (OmegaValue::Finite(v), Some(bounds)) = (o.value, o.bounds) {
            if !o.respects_bounds(1e-8) {
                failures.push(format!(
                    "omega estimate {v} outside the printed bounds [{}, {}]",
                    bounds.lower,
                    bounds.upper.map_or("none".into(), |u| u.to_string())
                ));
            }
        }
    }
    failures
}

impl RunReport {
    pub fn tables(&self) -> Vec<Table> {
        let mut out = Vec::new();
        if !self.constants.is_empty() {
            let mut t = Table::new("constants", CONSTANTS_HEADER);
            for r in &self.constants {
                t.push(vec![r.name.into(), r.value.into(), r.reference.into(), r.rel_residual.into()]);
            }
            out.push(t);
        }
        if let Some(e) = &self.eig {
            let mut t = Table::new("eigenvalues", EIGENVALUES_HEADER);
            for (name, s) in [("a", &e.a), ("b", &e.b)] {
                t.push(vec![name.into(), s.lambda1.into(), s.iterations.into(), s.residual.into()]);
            }
            out.push(t);
            let mut t = Table::new("eigenfunctions", EIGENFUNCTIONS_HEADER);
            for (i, r) in self.grid_nodes.iter().enumerate() {
                t.push(vec![(*r).into(), e.a.eigenfunction[i].into(), e.b.eigenfunction[i].into()]);
            }
            out.push(t);
        }
        if !self.rows.is_empty() {
            let s_grid = self.s_grid.map(|s| self.gamma0 * s.value);
            let mut t = Table::new("minimize", MINIMIZE_HEADER);
            for r in &self.rows {
                let th = r.verdict.thresholds_used;
                t.push(vec![
                    r.lambda.into(),
                    r.q_hat.into(),
                    s_grid.into(),
                    r.multipliers.map(|m| m.u).into(),
                    r.multipliers.map(|m| m.v).into(),
                    r.el_residual.into(),
                    r.concentration.into(),
                    r.status.map_or(Cell::Text("failed".into()), |s| s.as_str().into()),
                    r.verdict.verdict.as_str().into(),
                    r.verdict.case_id.as_str().into(),
                    th.lower.into(),
                    th.upper.into(),
                    th.omega.into(),
                    r.q_lambda.into(),
                    r.iterations.map_or(Cell::Missing, Cell::from),
                    r.error.clone().map_or(Cell::Missing, Cell::from),
                ]);
            }
            out.push(t);
        }
        if !self.curves.is_empty() {
            let mut t = Table::new("asymptotics_curve", CURVE_HEADER);
            for (lambda, curve) in &self.curves {
                let scale = self.fits.iter().find(|f| f.lambda == *lambda).map_or(Scale::Eps, |f| f.scale);
                for p in curve {
                    t.push(vec![
                        (*lambda).into(),
                        p.epsilon.into(),
                        scale.eval(p.epsilon).into(),
                        p.report.value.into(),
                    ]);
                }
            }
            out.push(t);
        }
        if !self.fits.is_empty() {
            let gamma0_s = self.gamma0 * best_sobolev_constant(self.scenario.domain.dim);
            let mut t = Table::new("asymptotics_fit", FIT_HEADER);
            for f in &self.fits {
                let rel = match (f.fitted, f.predicted) {
                    (Some(x), Some(p)) if p != 0.0 => Some(((x - p) / p).abs()),
                    _ => None,
                };
                t.push(vec![
                    f.lambda.into(),
                    f.regime.map_or(Cell::Missing, Cell::from),
                    f.scale.label().into(),
                    f.predicted.into(),
                    f.fitted.into(),
                    f.std_error.into(),
                    rel.into(),
                    f.intercept.into(),
                    gamma0_s.into(),
                    f.r_squared.into(),
                    f.error.clone().map_or(Cell::Missing, Cell::from),
                ]);
            }
            out.push(t);
        }
        if let Some(o) = &self.omega {
            let (neg, witness) = match o.value {
                OmegaValue::NegInfinity { witness, .. } => (true, Some(witness)),
                OmegaValue::Finite(_) => (false, None),
            };
            let family_min = o.family.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
            let mut t = Table::new("omega", OMEGA_HEADER);
            t.push(vec![
                o.value.as_f64().into(),
                neg.into(),
                witness.into(),
                o.bounds.map(|b| b.lower).into(),
                o.bounds.and_then(|b| b.upper).into(),
                o.shape_value.into(),
                family_min.into(),
                o.respects_bounds(1e-8).into(),
            ]);
            out.push(t);
            let mut t = Table::new("omega_family", OMEGA_FAMILY_HEADER);
            for p in &o.family {
                t.push(vec![p.scale.into(), p.value.into()]);
            }
            out.push(t);
        }
        if self.plan.contains(&Analysis::Pohozaev) && !self.pohozaev.is_empty() {
            let mut t = Table::new("pohozaev", POHOZAEV_HEADER);
            for p in &self.pohozaev {
                let r = &p.report;
                t.push(vec![
                    p.lambda.into(),
                    r.coupling_term.into(),
                    r.interior_a.into(),
                    r.interior_b.into(),
                    r.boundary_a.into(),
                    r.boundary_b.into(),
                    r.residual.into(),
                    r.relative_residual.into(),
                ]);
            }
            out.push(t);
        }
        out
    }

    pub fn charts(&self) -> Vec<(&'static str, Chart)> {
        let mut out = Vec::new();
        let dim = self.scenario.domain.dim;
        let gamma0_s = self.gamma0 * best_sobolev_constant(dim);
        if !self.rows.is_empty() {
            let points: Vec<(f64, f64)> = self
                .rows
                .iter()
                .filter_map(|r| r.q_hat.map(|q| (r.lambda, q)))
                .collect();
            let mut horizontal = vec![("gamma0 S".to_string(), gamma0_s)];
            if let Some(s) = self.s_grid {
                horizontal.push(("gamma0 S_grid".into(), self.gamma0 * s.value));
            }
            let mut vertical = Vec::new();
            if let Some(r) = self.rows.first() {
                if let Some(lo) = r.verdict.thresholds_used.lower {
                    vertical.push(("threshold".to_string(), lo));
                }
                if let Some(up) = r.verdict.thresholds_used.upper {
                    vertical.push(("first eigenvalue".to_string(), up));
                }
            }
            out.push((
                "minimize",
                Chart {
                    title: "sweep estimate of the infimum".into(),
                    x_label: "lambda".into(),
                    y_label: "Q_hat".into(),
                    series: vec![Series {
                        label: "Q_hat".into(),
                        points,
                    }],
                    vertical,
                    horizontal,
                },
            ));
        }
        for (lambda, curve) in &self.curves {
            let Some(fit) = self.fits.iter().find(|f| f.lambda == *lambda) else {
                continue;
            };
            let measured: Vec<(f64, f64)> =
                curve.iter().map(|p| (fit.scale.eval(p.epsilon), p.report.value)).collect();
            let mut series = vec![Series {
                label: format!("E at lambda = {lambda}"),
                points: measured.clone(),
            }];
            if let Some(c) = fit.predicted {
                series.push(Series {
                    label: "predicted leading term".into(),
                    points: measured.iter().map(|&(x, _)| (x, gamma0_s + c * x)).collect(),
                });
            }
            out.push((
                "asymptotics",
                Chart {
                    title: format!("bubble energy, lambda = {lambda}"),
                    x_label: fit.scale.label(),
                    y_label: "E".into(),
                    series,
                    vertical: Vec::new(),
                    horizontal: vec![("gamma0 S".into(), gamma0_s)],
                },
            ));
        }
        out
    }

    /// Writes every table as CSV (and charts as SVG when asked) into `dir`,
    /// plus `provenance.toml`, the only file carrying a timestamp.
    pub fn write(&self, dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for t in self.tables() {
            let path = dir.join(format!("{}.csv", t.name));
            emit_csv(&t, &path)?;
            written.push(path);
        }
        if plots {
            let mut count = 0;
            for (name, chart) in self.charts() {
                let path = if name == "asymptotics" {
                    count += 1;
                    dir.join(format!("{name}_{count}.svg"))
                } else {
                    dir.join(format!("{name}.svg"))
                };
                emit_plot(&chart, &path)?;
                written.push(path);
            }
        }
        let path = dir.join("provenance.toml");
        std::fs::write(&path, self.provenance_document()?).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(written)
    }

    fn provenance_document(&self) -> Result<String> {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let p = &self.provenance;
        let failures: Vec<String> = self.invariant_failures.iter().map(|f| format!("{f:?}")).collect();
        Ok(format!(
            "version = \"{}\"\nconfig_hash = \"{}\"\ngrid = \"{}\"\ngenerated_unix = {stamp}\nanalyses = [{}]\ninvariant_failures = [{}]\n\n# scenario with defaults filled\n{}",
            p.version,
            p.config_hash,
            p.grid,
            self.plan.iter().map(|a| format!("\"{}\"", a.as_str())).collect::<Vec<_>>().join(", "),
            failures.join(", "),
            self.scenario.to_toml()?
                .lines()
                .map(|l| format!("# {l}"))
                .collect::<Vec<_>>()
                .join("\n")
        ))
    }
}
