use serde::Serialize;

use crate::asymptotics::{order_of, Order};
use crate::constants::thresholds;
use crate::error::{Error, Result};

/// Which existence or non-existence statement a parameter point falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    /// k > 2 and l > 2, N ≥ 4.
    SuperquadraticBoth,
    /// k = l = 2, N ≥ 5.
    QuadraticBoth,
    /// k = 2 < l, N ≥ 5.
    QuadraticA,
    /// l = 2 < k, N ≥ 5.
    QuadraticB,
    /// k = 2 < l, N = 4.
    FourQuadraticA,
    /// l = 2 < k, N = 4.
    FourQuadraticB,
    /// k = l = 2, N = 4: only the energy gap below γ₀S is known.
    FourQuadraticBoth,
    /// λ ≤ ω(a, b) on a star-shaped domain.
    PohozaevNonexistence,
    Unclassified,
}

impl CaseId {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::SuperquadraticBoth => "existence_k_gt2_l_gt2",
            CaseId::QuadraticBoth => "existence_n_ge5_k2_l2",
            CaseId::QuadraticA => "existence_n_ge5_k2_l_gt2",
            CaseId::QuadraticB => "existence_n_ge5_k_gt2_l2",
            CaseId::FourQuadraticA => "existence_n4_k2_l_gt2",
            CaseId::FourQuadraticB => "existence_n4_k_gt2_l2",
            CaseId::FourQuadraticBoth => "energy_gap_n4_k2_l2",
            CaseId::PohozaevNonexistence => "nonexistence_lambda_le_omega",
            CaseId::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AchievedByTheorem,
    EnergyGapOnly,
    NoMinimizerByTheorem,
    OutsideTheory,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::AchievedByTheorem => "achieved_by_theorem",
            Verdict::EnergyGapOnly => "energy_gap_only",
            Verdict::NoMinimizerByTheorem => "no_minimizer_by_theorem",
            Verdict::OutsideTheory => "outside_theory",
        }
    }
}

/// The coupling interval of the matched case and the ω value consulted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdsUsed {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExistenceVerdict {
    pub case_id: CaseId,
    pub verdict: Verdict,
    pub thresholds_used: ThresholdsUsed,
}

/// Inputs of [`verdict`]. Exponents of constant weights are `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictInput {
    pub dim: usize,
    pub k: f64,
    pub l: f64,
    pub a_coeff: f64,
    pub b_coeff: f64,
    pub lambda: f64,
    pub lambda_tilde: f64,
    /// A value known not to exceed ω(a, b) (a proved lower bound, or the
    /// exact value where it is known); `None` when nothing is known.
    pub omega_lower: Option<f64>,
}

/// Pure case dispatch over the existence and non-existence statements.
pub fn verdict(input: &VerdictInput) -> Result<ExistenceVerdict> {
    let VerdictInput {
        dim,
        k,
        l,
        a_coeff,
        b_coeff,
        lambda,
        lambda_tilde,
        omega_lower,
    } = *input;
    if !(lambda_tilde > 0.0) || !lambda_tilde.is_finite() {
        return Err(Error::BadSpectrum(format!(
            "first eigenvalue {lambda_tilde} must be positive"
        )));
    }
    if let Some(w) = omega_lower {
        if lambda <= w {
            return Ok(ExistenceVerdict {
                case_id: CaseId::PohozaevNonexistence,
                verdict: Verdict::NoMinimizerByTheorem,
                thresholds_used: ThresholdsUsed {
                    lower: None,
                    upper: Some(w),
                    omega: Some(w),
                },
            });
        }
    }
    let outside = |case_id| ExistenceVerdict {
        case_id,
        verdict: Verdict::OutsideTheory,
        thresholds_used: ThresholdsUsed {
            lower: None,
            upper: None,
            omega: omega_lower,
        },
    };
    if dim < 4 {
        return Ok(outside(CaseId::Unclassified));
    }
    let (ok, ol) = (order_of(k), order_of(l));
    let a2 = if ok == Order::Quadratic { a_coeff } else { 0.0 };
    let b2 = if ol == Order::Quadratic { b_coeff } else { 0.0 };
    let t = thresholds(dim, a2, b2)?;
    use Order::*;
    let (case_id, lower, success) = match (dim, ok, ol) {
        (_, Above, Above) => (CaseId::SuperquadraticBoth, 0.0, Verdict::AchievedByTheorem),
        (4, Quadratic, Quadratic) => (CaseId::FourQuadraticBoth, t.gamma_n, Verdict::EnergyGapOnly),
        (4, Quadratic, Above) => (CaseId::FourQuadraticA, t.gamma_tilde_a, Verdict::AchievedByTheorem),
        (4, Above, Quadratic) => (CaseId::FourQuadraticB, t.gamma_tilde_b, Verdict::AchievedByTheorem),
        (_, Quadratic, Quadratic) => (CaseId::QuadraticBoth, t.gamma_n, Verdict::AchievedByTheorem),
        (_, Quadratic, Above) => (CaseId::QuadraticA, t.gamma_tilde_a, Verdict::AchievedByTheorem),
        (_, Above, Quadratic) => (CaseId::QuadraticB, t.gamma_tilde_b, Verdict::AchievedByTheorem),
        _ => return Ok(outside(CaseId::Unclassified)),
    };
    let verdict = if lambda > lower && lambda < lambda_tilde {
        success
    } else {
        Verdict::OutsideTheory
    };
    Ok(ExistenceVerdict {
        case_id,
        verdict,
        thresholds_used: ThresholdsUsed {
            lower: Some(lower),
            upper: Some(lambda_tilde),
            omega: omega_lower,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(dim: usize, k: f64, l: f64, lambda: f64) -> VerdictInput {
        VerdictInput {
            dim,
            k,
            l,
            a_coeff: 1.0,
            b_coeff: 1.0,
            lambda,
            lambda_tilde: 20.0,
            omega_lower: None,
        }
    }

    #[test]
    fn quadratic_pair_in_dimension_five() {
        let v = verdict(&input(5, 2.0, 2.0, 10.0)).unwrap();
        assert_eq!(v.verdict, Verdict::AchievedByTheorem);
        assert_eq!(v.case_id, CaseId::QuadraticBoth);
        assert_eq!(v.thresholds_used.lower, Some(6.5625));
        let below = verdict(&input(5, 2.0, 2.0, 6.0)).unwrap();
        assert_eq!(below.verdict, Verdict::OutsideTheory);
        assert_eq!(below.case_id, CaseId::QuadraticBoth);
    }

    #[test]
    fn superquadratic_pair() {
        for dim in [4, 6] {
            let v = verdict(&input(dim, 3.0, 3.0, 10.0)).unwrap();
            assert_eq!(v.verdict, Verdict::AchievedByTheorem);
        }
        let constant = verdict(&input(5, f64::INFINITY, f64::INFINITY, 1.0)).unwrap();
        assert_eq!(constant.case_id, CaseId::SuperquadraticBoth);
        let above = verdict(&input(5, 3.0, 3.0, 25.0)).unwrap();
        assert_eq!(above.verdict, Verdict::OutsideTheory);
    }

    #[test]
    fn nonexistence_below_omega() {
        let mut i = input(5, 2.0, 2.0, 1.0);
        i.omega_lower = Some(3.125);
        let v = verdict(&i).unwrap();
        assert_eq!(v.verdict, Verdict::NoMinimizerByTheorem);
        assert_eq!(v.case_id, CaseId::PohozaevNonexistence);
    }

    #[test]
    fn dimension_four_cases() {
        assert_eq!(verdict(&input(4, 2.0, 2.0, 3.0)).unwrap().verdict, Verdict::EnergyGapOnly);
        assert_eq!(verdict(&input(4, 2.0, 3.0, 1.5)).unwrap().verdict, Verdict::AchievedByTheorem);
        assert_eq!(verdict(&input(4, 2.0, 3.0, 0.5)).unwrap().verdict, Verdict::OutsideTheory);
        assert_eq!(verdict(&input(4, 1.0, 2.0, 5.0)).unwrap().case_id, CaseId::Unclassified);
    }

    #[test]
    fn bad_spectrum() {
        let mut i = input(5, 2.0, 2.0, 1.0);
        i.lambda_tilde = 0.0;
        assert!(matches!(verdict(&i), Err(Error::BadSpectrum(_))));
    }
}
