use rayon::prelude::*;

use super::diagnostics::sign_normalize;
use super::flow::{minimize, FlowParams, MinimizeResult};
use crate::error::Result;
use crate::radial::energy::Functional;

/// One coupling value of a sweep.
#[derive(Debug)]
pub struct SweepRow {
    pub lambda: f64,
    pub outcome: Result<MinimizeResult>,
    /// Lowest energy at this λ over the sign-normalized pairs of all rows.
    pub q_hat: Option<f64>,
    /// Row whose pair attains `q_hat`.
    pub q_hat_source: Option<usize>,
}

/// Independent descents for each λ (run on the current rayon pool), then
/// [`harmonize`]d.
pub fn sweep(f: &Functional, lambdas: &[f64], params: &FlowParams) -> Vec<SweepRow> {
    let outcomes: Vec<Result<MinimizeResult>> = lambdas
        .par_iter()
        .map(|&lambda| minimize(f, lambda, params))
        .collect();
    let mut rows: Vec<SweepRow> = lambdas
        .iter()
        .zip(outcomes)
        .map(|(&lambda, outcome)| SweepRow {
            lambda,
            outcome,
            q_hat: None,
            q_hat_source: None,
        })
        .collect();
    harmonize(f, &mut rows);
    rows
}

/// Every row's pair is an admissible competitor at every λ, so the sweep
/// estimate is `min_j E_λ(|u_j|, |v_j|)`. For λ ≥ 0 each candidate energy
/// is nonincreasing in λ, hence so is the estimate.
pub fn harmonize(f: &Functional, rows: &mut [SweepRow]) {
    let candidates: Vec<(usize, (Vec<f64>, Vec<f64>))> = rows
        .iter()
        .enumerate()
        .filter_map(|(j, r)| {
            r.outcome.as_ref().ok().map(|m| {
                let p = sign_normalize(&m.pair);
                (j, (p.u, p.v))
            })
        })
        .collect();
    for row in rows.iter_mut() {
        let mut best: Option<(f64, usize)> = None;
        for (j, (u, v)) in &candidates {
            if let Ok(rep) = f.evaluate(u, v, row.lambda) {
                if best.map_or(true, |(b, _)| rep.value < b) {
                    best = Some((rep.value, *j));
                }
            }
        }
        row.q_hat = best.map(|b| b.0);
        row.q_hat_source = best.map(|b| b.1);
    }
}
