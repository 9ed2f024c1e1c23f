//! Coordinate-free scalars entering the n⁻² coefficient.

use super::{FisherMatrix, LMoments};
use super::LScalars;
use crate::models::{MultinomialModel, ParamPoint};
use crate::{Error, Result};

/// The geometric scalars of the risk expansion at one θ.
///
/// `f_alpha` is `F` at the stated α; `f_e` and `f_m` are its values at α = 1
/// and α = −1, related by `F_e = F_m + TdTd`. `tt = T_ijk T^ijk`,
/// `tdtd = T_is^i T_j^js`, `r_contract` is the e-curvature contraction, and
/// the `s_*` fields are the inner products of the e/m second fundamental
/// forms: cross `⟨H_i^j, H_j^i⟩` and trace `⟨H_i^i, H_j^j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarInvariants {
    pub alpha: f64,
    pub f_alpha: f64,
    pub f_e: f64,
    pub f_m: f64,
    pub tt: f64,
    pub tdtd: f64,
    pub r_contract: f64,
    pub s_ee_cross: f64,
    pub s_ee_trace: f64,
    pub s_em_cross: f64,
    pub s_em_trace: f64,
    /// Jackknife standard errors for Monte-Carlo estimates; `None` for exact values.
    pub std_error: Option<InvariantErrors>,
}

/// Standard errors matching the fields of [`ScalarInvariants`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantErrors {
    pub f_alpha: f64,
    pub f_e: f64,
    pub f_m: f64,
    pub tt: f64,
    pub tdtd: f64,
    pub r_contract: f64,
    pub s_ee_cross: f64,
    pub s_ee_trace: f64,
    pub s_em_cross: f64,
    pub s_em_trace: f64,
    /// Standard error of `F_e − F_m − TdTd`.
    pub f_conversion: f64,
}

impl ScalarInvariants {
    /// Invariants of an exponential family: curvature and embedding terms vanish.
    pub fn exponential_family(alpha: f64, f_e: f64, tt: f64, tdtd: f64) -> Self {
        let alpha_prime = (1.0 - alpha) / 2.0;
        Self {
            alpha,
            f_alpha: f_e - alpha_prime * tdtd,
            f_e,
            f_m: f_e - tdtd,
            tt,
            tdtd,
            r_contract: 0.0,
            s_ee_cross: 0.0,
            s_ee_trace: 0.0,
            s_em_cross: 0.0,
            s_em_trace: 0.0,
            std_error: None,
        }
    }

    /// The same invariants with `F_α` re-evaluated at another α.
    pub fn at_alpha(&self, alpha: f64) -> Self {
        Self { alpha, f_alpha: self.f_e - (1.0 - alpha) / 2.0 * self.tdtd, ..self.clone() }
    }

    /// `F_e − F_m − TdTd`, zero up to rounding or Monte-Carlo error.
    pub fn f_conversion_residual(&self) -> f64 {
        self.f_e - self.f_m - self.tdtd
    }
}

fn f_at(s: &LScalars, alpha_prime: f64) -> f64 {
    2.0 * s.l11 + s.l12 + s.l13 - 2.0 * s.l21 - s.l23 - s.l22 - alpha_prime * s.l24
}

/// All invariants as functions of the contracted scalars and the parameter count.
fn evaluate(s: &LScalars, p: f64, alpha_prime: f64) -> [f64; 11] {
    let f_e = f_at(s, 0.0);
    let f_m = f_at(s, 1.0);
    [
        f_at(s, alpha_prime),
        f_e,
        f_m,
        s.l23,
        s.l24,
        s.l14 - s.l15 + s.l11 - s.l12 - s.l25 + s.l26 + s.l22 - s.l21,
        s.l14 - s.l25 - p,
        s.l15 - s.l26 - p * p,
        s.l11 + s.l14 - s.l25 - s.l21,
        s.l12 + s.l15 - s.l26 - s.l22,
        f_e - f_m - s.l24,
    ]
}

/// Invariants from contracted scalars alone, without standard errors.
pub fn invariants_from_scalars(s: &LScalars, p: usize, alpha: f64) -> ScalarInvariants {
    let v = evaluate(s, p as f64, (1.0 - alpha) / 2.0);
    ScalarInvariants {
        alpha,
        f_alpha: v[0],
        f_e: v[1],
        f_m: v[2],
        tt: v[3],
        tdtd: v[4],
        r_contract: v[5],
        s_ee_cross: v[6],
        s_ee_trace: v[7],
        s_em_cross: v[8],
        s_em_trace: v[9],
        std_error: None,
    }
}

/// Maps Monte-Carlo L-moments to invariants, with jackknife errors.
pub fn invariants_from_l_moments(l: &LMoments, g: &FisherMatrix, alpha: f64) -> Result<ScalarInvariants> {
    if g.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: g.dim() });
    }
    let p = l.dim() as f64;
    let alpha_prime = (1.0 - alpha) / 2.0;
    let v = evaluate(&l.scalars, p, alpha_prime);
    let se: Vec<f64> = (0..11).map(|k| l.scalar_se(|s| evaluate(s, p, alpha_prime)[k])).collect();
    Ok(ScalarInvariants {
        alpha,
        f_alpha: v[0],
        f_e: v[1],
        f_m: v[2],
        tt: v[3],
        tdtd: v[4],
        r_contract: v[5],
        s_ee_cross: v[6],
        s_ee_trace: v[7],
        s_em_cross: v[8],
        s_em_trace: v[9],
        std_error: Some(InvariantErrors {
            f_alpha: se[0],
            f_e: se[1],
            f_m: se[2],
            tt: se[3],
            tdtd: se[4],
            r_contract: se[5],
            s_ee_cross: se[6],
            s_ee_trace: se[7],
            s_em_cross: se[8],
            s_em_trace: se[9],
            f_conversion: se[10],
        }),
    })
}

/// `M = Σ_{t=0}^p 1/m_t`.
pub fn multinomial_m_statistic(m: &ParamPoint) -> f64 {
    MultinomialModel::probabilities(m).iter().map(|v| 1.0 / v).sum()
}

/// Closed forms for the multinomial family:
/// `TT = M − 3p − 1`, `TdTd = M − (p+1)²`, `F_m = −M + p + 1`.
pub fn analytic_invariants_multinomial(m: &ParamPoint, alpha: f64) -> Result<ScalarInvariants> {
    if MultinomialModel::probabilities(m).iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid(format!("multinomial point {:?} is not interior", m.coords())));
    }
    let p = m.dim() as f64;
    let big_m = multinomial_m_statistic(m);
    let tt = big_m - 3.0 * p - 1.0;
    let tdtd = big_m - (p + 1.0) * (p + 1.0);
    let f_m = -big_m + p + 1.0;
    Ok(ScalarInvariants::exponential_family(alpha, f_m + tdtd, tt, tdtd))
}

/// Closed forms for `N_p(0, Σ)` (independent of Σ):
/// `TT = p³ + 3p² + 4p`, `TdTd = 2p(p+1)²`, `F_m = −p(p+1)²`.
pub fn analytic_invariants_normal(p: usize, alpha: f64) -> Result<ScalarInvariants> {
    if p == 0 {
        return Err(Error::invalid("normal dimension must be at least 1"));
    }
    let p = p as f64;
    let tt = p * p * p + 3.0 * p * p + 4.0 * p;
    let tdtd = 2.0 * p * (p + 1.0) * (p + 1.0);
    let f_m = -p * (p + 1.0) * (p + 1.0);
    Ok(ScalarInvariants::exponential_family(alpha, f_m + tdtd, tt, tdtd))
}
