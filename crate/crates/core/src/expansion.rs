//! The n⁻¹ and n⁻² coefficients of the MLE risk `E_θ[D_α(θ̂ : θ)]`.
//!
//! `c₁ = p/2` always. `c₂ = B/24` where the bracket `B` is quadratic in
//! `α′ = (1 − α)/2`:
//!
//! ```text
//! B = α′² {3F_e + 3TT − 6(S_em_c − S_ee_c) − 3(S_em_t − S_ee_t) + 3p² + 6p}
//!   + α′  {3F_e − 5TT − 6TdTd + 6(S_em_c − S_ee_c) + 3(S_em_t − S_ee_t) − 3p² − 6p}
//!   + 12 S_ee_c − 2 S_em_c − S_em_t + TT + 9 TdTd + 8 R − 9 F_e
//! ```
//!
//! with `_c`/`_t` the cross/trace second-fundamental-form products.

use std::fmt;

use crate::geometry::{
    invariants_from_l_moments, invariants_from_scalars, multinomial_m_statistic, LMoments, ScalarInvariants,
};
use crate::models::{MultinomialModel, ParamPoint};
use crate::numeric::compensated_sum;
use crate::{Error, Result};

/// Which formula produced an [`ExpansionResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    General,
    ExponentialCorollary,
    MixtureCorollary,
    MultinomialClosed,
    NormalClosed,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::General => "general",
            Provenance::ExponentialCorollary => "exponential-corollary",
            Provenance::MixtureCorollary => "mixture-corollary",
            Provenance::MultinomialClosed => "multinomial-closed",
            Provenance::NormalClosed => "normal-closed",
        })
    }
}

/// `E_θ[D_α(θ̂ : θ)] ≈ c₁/n + c₂/n²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionResult {
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
    pub param_dim: usize,
    pub provenance: Provenance,
}

impl ExpansionResult {
    fn new(param_dim: usize, alpha: f64, c2: f64, provenance: Provenance) -> Self {
        Self {
            c1: param_dim as f64 / 2.0,
            c2,
            alpha,
            alpha_prime: alpha_prime(alpha),
            param_dim,
            provenance,
        }
    }

    /// `c₁/n + c₂/n²`.
    pub fn value(&self, n: f64) -> f64 {
        self.c1 / n + self.c2 / (n * n)
    }
}

pub fn alpha_prime(alpha: f64) -> f64 {
    (1.0 - alpha) / 2.0
}

fn check_inputs(p: usize, alpha: f64) -> Result<()> {
    if p == 0 {
        return Err(Error::invalid("parameter count must be positive"));
    }
    if !alpha.is_finite() {
        return Err(Error::invalid(format!("α must be finite, got {alpha}")));
    }
    Ok(())
}

/// The full n⁻² coefficient from all eight scalars, `F` taken as `inv.f_e`.
pub fn expansion_general(inv: &ScalarInvariants, p: usize, alpha: f64) -> Result<ExpansionResult> {
    check_inputs(p, alpha)?;
    let a = alpha_prime(alpha);
    let a2 = a * a;
    let pf = p as f64;
    let cross = inv.s_em_cross - inv.s_ee_cross;
    let trace = inv.s_em_trace - inv.s_ee_trace;
    let terms = [
        a2 * 3.0 * inv.f_e,
        a2 * 3.0 * inv.tt,
        -a2 * 6.0 * cross,
        -a2 * 3.0 * trace,
        a2 * (3.0 * pf * pf + 6.0 * pf),
        a * 3.0 * inv.f_e,
        -a * 5.0 * inv.tt,
        -a * 6.0 * inv.tdtd,
        a * 6.0 * cross,
        a * 3.0 * trace,
        -a * (3.0 * pf * pf + 6.0 * pf),
        12.0 * inv.s_ee_cross,
        -2.0 * inv.s_em_cross,
        -inv.s_em_trace,
        inv.tt,
        9.0 * inv.tdtd,
        8.0 * inv.r_contract,
        -9.0 * inv.f_e,
    ];
    Ok(ExpansionResult::new(p, alpha, compensated_sum(terms) / 24.0, Provenance::General))
}

/// Absolute tolerance for a term that should vanish: four standard errors
/// for Monte-Carlo input, rounding noise for exact input.
fn vanishing_tolerance(inv: &ScalarInvariants, se: Option<f64>) -> f64 {
    match se {
        Some(se) => 4.0 * se + 1e-12,
        None => 1e-10 * (1.0 + inv.tt.abs() + inv.tdtd.abs() + inv.f_e.abs()),
    }
}

fn require_vanishing(inv: &ScalarInvariants, name: &str, value: f64, se: Option<f64>) -> Result<()> {
    let tol = vanishing_tolerance(inv, se);
    if value.abs() > tol {
        return Err(Error::ContractViolation(format!("{name} = {value:e} should vanish (tolerance {tol:e})")));
    }
    Ok(())
}

/// Exponential family: curvature and all second-fundamental-form terms vanish.
pub fn expansion_exponential_family(inv: &ScalarInvariants, p: usize, alpha: f64) -> Result<ExpansionResult> {
    check_inputs(p, alpha)?;
    let se = inv.std_error.as_ref();
    require_vanishing(inv, "R", inv.r_contract, se.map(|e| e.r_contract))?;
    require_vanishing(inv, "S_ee_cross", inv.s_ee_cross, se.map(|e| e.s_ee_cross))?;
    require_vanishing(inv, "S_ee_trace", inv.s_ee_trace, se.map(|e| e.s_ee_trace))?;
    require_vanishing(inv, "S_em_cross", inv.s_em_cross, se.map(|e| e.s_em_cross))?;
    require_vanishing(inv, "S_em_trace", inv.s_em_trace, se.map(|e| e.s_em_trace))?;
    let a = alpha_prime(alpha);
    let pf = p as f64;
    let terms = [
        a * a * (3.0 * inv.f_e + 3.0 * inv.tt + 3.0 * pf * pf + 6.0 * pf),
        a * (3.0 * inv.f_e - 5.0 * inv.tt - 6.0 * inv.tdtd - 3.0 * pf * pf - 6.0 * pf),
        inv.tt,
        9.0 * inv.tdtd,
        -9.0 * inv.f_e,
    ];
    Ok(ExpansionResult::new(p, alpha, compensated_sum(terms) / 24.0, Provenance::ExponentialCorollary))
}

/// Mixture family: curvature and the e/m cross products vanish.
pub fn expansion_mixture_family(inv: &ScalarInvariants, p: usize, alpha: f64) -> Result<ExpansionResult> {
    check_inputs(p, alpha)?;
    let se = inv.std_error.as_ref();
    require_vanishing(inv, "R", inv.r_contract, se.map(|e| e.r_contract))?;
    require_vanishing(inv, "S_em_cross", inv.s_em_cross, se.map(|e| e.s_em_cross))?;
    require_vanishing(inv, "S_em_trace", inv.s_em_trace, se.map(|e| e.s_em_trace))?;
    let a = alpha_prime(alpha);
    let pf = p as f64;
    let (sc, st) = (inv.s_ee_cross, inv.s_ee_trace);
    let terms = [
        a * a * (3.0 * inv.f_e + 3.0 * inv.tt + 6.0 * sc + 3.0 * st + 3.0 * pf * pf + 6.0 * pf),
        a * (3.0 * inv.f_e - 5.0 * inv.tt - 6.0 * inv.tdtd - 6.0 * sc - 3.0 * st - 3.0 * pf * pf - 6.0 * pf),
        12.0 * sc,
        inv.tt,
        9.0 * inv.tdtd,
        -9.0 * inv.f_e,
    ];
    Ok(ExpansionResult::new(p, alpha, compensated_sum(terms) / 24.0, Provenance::MixtureCorollary))
}

/// The general coefficients from Monte-Carlo L-moments, with the jackknife
/// standard error of `c₂` (`c₁` is exact).
pub fn expansion_from_l_moments(l: &LMoments, alpha: f64) -> Result<(ExpansionResult, f64)> {
    let p = l.dim();
    let inv = invariants_from_l_moments(l, &l.fisher, alpha)?;
    let result = expansion_general(&inv, p, alpha)?;
    let se = l.scalar_se(|s| {
        expansion_general(&invariants_from_scalars(s, p, alpha), p, alpha).map_or(f64::NAN, |e| e.c2)
    });
    Ok((result, se))
}

/// Multinomial closed form with `M = Σ 1/m_t`:
/// `c₂ = {(3+α)(7+3α)(M−1) − 6(α+3)(α+1)p} / 96`.
pub fn expansion_multinomial_closed(m: &ParamPoint, alpha: f64) -> Result<ExpansionResult> {
    let p = m.dim();
    check_inputs(p, alpha)?;
    if MultinomialModel::probabilities(m).iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid(format!("multinomial point {:?} is not interior", m.coords())));
    }
    let big_m = multinomial_m_statistic(m);
    let pf = p as f64;
    let c2 = ((3.0 + alpha) * (7.0 + 3.0 * alpha) * (big_m - 1.0) - 6.0 * (alpha + 3.0) * (alpha + 1.0) * pf) / 96.0;
    Ok(ExpansionResult::new(p, alpha, c2, Provenance::MultinomialClosed))
}

/// `N_p(0, Σ)` closed form; the parameter count is `q = p(p+1)/2`, so
/// `c₁ = p(p+1)/4`, and
/// `24c₂ = α′²(¾p⁴ + 15/2 p³ + 75/4 p² + 18p) − α′(¾p⁴ + 31/2 p³ + 147/4 p² + 32p) + 10p³ + 21p² + 13p`.
pub fn expansion_normal_closed(p: usize, alpha: f64) -> Result<ExpansionResult> {
    check_inputs(p, alpha)?;
    let a = alpha_prime(alpha);
    let x = p as f64;
    let (x2, x3, x4) = (x * x, x * x * x, x * x * x * x);
    let quad = 0.75 * x4 + 7.5 * x3 + 18.75 * x2 + 18.0 * x;
    let lin = 0.75 * x4 + 15.5 * x3 + 36.75 * x2 + 32.0 * x;
    let constant = 10.0 * x3 + 21.0 * x2 + 13.0 * x;
    let c2 = (a * a * quad - a * lin + constant) / 24.0;
    Ok(ExpansionResult::new(p * (p + 1) / 2, alpha, c2, Provenance::NormalClosed))
}

/// The published reductions at α = −1 (Kullback–Leibler), α = 0 (Hellinger)
/// and α = −3 (χ²), each written out term by term.
pub fn special_alpha_reductions(inv: &ScalarInvariants, p: usize) -> Result<[ExpansionResult; 3]> {
    check_inputs(p, 0.0)?;
    let pf = p as f64;
    let i = inv;
    let kl = [
        -3.0 * i.f_e,
        -i.tt,
        3.0 * i.tdtd,
        12.0 * i.s_ee_cross,
        -2.0 * i.s_em_cross,
        -i.s_em_trace,
        8.0 * i.r_contract,
    ];
    let hellinger = [
        -6.75 * i.f_e,
        -0.75 * i.tt,
        6.0 * i.tdtd,
        10.5 * i.s_ee_cross,
        -0.75 * i.s_ee_trace,
        -0.5 * i.s_em_cross,
        -0.25 * i.s_em_trace,
        8.0 * i.r_contract,
        -0.75 * pf * pf,
        -1.5 * pf,
    ];
    let chi2 = [
        9.0 * i.f_e,
        3.0 * i.tt,
        -3.0 * i.tdtd,
        24.0 * i.s_ee_cross,
        6.0 * i.s_ee_trace,
        -14.0 * i.s_em_cross,
        -7.0 * i.s_em_trace,
        8.0 * i.r_contract,
        6.0 * pf * pf,
        12.0 * pf,
    ];
    Ok([
        ExpansionResult::new(p, -1.0, compensated_sum(kl) / 24.0, Provenance::General),
        ExpansionResult::new(p, 0.0, compensated_sum(hellinger) / 24.0, Provenance::General),
        ExpansionResult::new(p, -3.0, compensated_sum(chi2) / 24.0, Provenance::General),
    ])
}
