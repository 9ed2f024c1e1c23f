//! Exact α-divergence `D_α[θ₁ : θ₂]` for the built-in families.
//!
//! With `β = (1 − α)/2`, `f₁ = f(·; θ₁)` and `f₂ = f(·; θ₂)`:
//!
//! ```text
//! D_α = 4/(1 − α²) · (1 − ∫ f₁^β f₂^{1−β})    α ≠ ±1
//! D₋₁ = KL(f₁ ‖ f₂),   D₊₁ = KL(f₂ ‖ f₁)
//! ```
//!
//! All branches are evaluated through one pointwise kernel of the log ratio
//! `t = log(f₁/f₂)`, integrated against `f₂`:
//! `k_β(t) = (β(eᵗ − 1) − (e^{βt} − 1)) / (β(1 − β))`. It is nonnegative,
//! continuous in β (its limits at β = 1 and β = 0 are the two KL integrands)
//! and has the series `Σ_{k≥2} tᵏ/k! · (1 + β + … + β^{k−2})`, used near
//! `t = 0` where the closed form cancels. Infinite values are returned as
//! `f64::INFINITY`, not as errors.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::models::{MultinomialModel, ParamPoint, TwoNormalMixtureModel};
use crate::numeric::{integrate_adaptive, QuadratureConfig};
use crate::{Error, Result};

/// `β = α′ = (1 − α)/2`.
pub fn beta_of(alpha: f64) -> f64 {
    (1.0 - alpha) / 2.0
}

/// The pointwise kernel `k_β(t)` described in the module docs.
pub fn alpha_kernel(t: f64, beta: f64) -> f64 {
    if t == f64::NEG_INFINITY {
        // f₁ vanishes where f₂ does not.
        return if beta > 0.0 { 1.0 / beta } else { f64::INFINITY };
    }
    if t.is_nan() {
        return f64::NAN;
    }
    if (t * beta.abs().max(1.0)).abs() < 0.05 {
        let mut sum = 0.0;
        let mut term = t; // tᵏ/k!
        let mut geometric = 0.0; // 1 + β + … + β^{k−2}
        let mut power = 1.0;
        for k in 2..=14 {
            term *= t / k as f64;
            geometric += power;
            power *= beta;
            sum += term * geometric;
        }
        return sum;
    }
    if beta == 1.0 {
        t.exp() * t - t.exp_m1()
    } else if beta == 0.0 {
        t.exp_m1() - t
    } else {
        (beta * t.exp_m1() - (beta * t).exp_m1()) / (beta * (1.0 - beta))
    }
}

/// `f₂ · k_β(log f₁ − log f₂)` from the two log-densities, without forming
/// `e^t` when the ratio is extreme (where `f₂ · e^t` would read `0 · ∞`).
pub fn weighted_alpha_kernel(log_f1: f64, log_f2: f64, beta: f64) -> f64 {
    if log_f2 == f64::NEG_INFINITY {
        return if log_f1 == f64::NEG_INFINITY || beta >= 1.0 { 0.0 } else { f64::INFINITY };
    }
    let t = log_f1 - log_f2;
    if (t * beta.abs().max(1.0)).abs() < 0.05 || t == f64::NEG_INFINITY {
        return log_f2.exp() * alpha_kernel(t, beta);
    }
    let (f1, f2) = (log_f1.exp(), log_f2.exp());
    if beta == 1.0 {
        f1 * t - (f1 - f2)
    } else if beta == 0.0 {
        (f1 - f2) - f2 * t
    } else {
        let blend = (beta * log_f1 + (1.0 - beta) * log_f2).exp();
        (beta * (f1 - f2) - (blend - f2)) / (beta * (1.0 - beta))
    }
}

/// Multinomial divergence between free-coordinate points `m̂` (closed
/// simplex) and `m` (interior).
pub fn alpha_divergence_multinomial(m_hat: &ParamPoint, m: &ParamPoint, alpha: f64) -> Result<f64> {
    if m_hat.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: m_hat.dim() });
    }
    check_alpha(alpha)?;
    let truth = MultinomialModel::probabilities(m);
    if truth.iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid(format!("true multinomial point {:?} is not interior", m.coords())));
    }
    let est = MultinomialModel::probabilities(m_hat);
    if est.iter().any(|&v| v < -1e-12) {
        return Err(Error::invalid(format!("estimate {:?} lies outside the simplex", m_hat.coords())));
    }
    let beta = beta_of(alpha);
    let mut total = 0.0;
    for (&e, &t) in est.iter().zip(&truth) {
        let e = e.max(0.0);
        let log_ratio = if e == 0.0 { f64::NEG_INFINITY } else { (e / t).ln() };
        total += t * alpha_kernel(log_ratio, beta);
    }
    Ok(total.max(0.0))
}

/// Divergence between `N(0, Σ̂)` and `N(0, Σ)` through the eigenvalues λ of
/// `Σ⁻¹Σ̂` (computed in the whitened basis of `Σ`).
pub fn alpha_divergence_normal(sigma_hat: &DMatrix<f64>, sigma: &DMatrix<f64>, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let p = sigma.nrows();
    if sigma.ncols() != p || sigma_hat.nrows() != p || sigma_hat.ncols() != p {
        return Err(Error::DimensionMismatch { expected: p, got: sigma_hat.nrows() });
    }
    let chol = Cholesky::new(sigma.clone()).ok_or_else(|| Error::invalid("Σ is not positive definite"))?;
    Cholesky::new(sigma_hat.clone()).ok_or_else(|| Error::invalid("Σ̂ is not positive definite"))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::Numeric("triangular solve failed".into()))?;
    let mut whitened = &l_inv * sigma_hat * l_inv.transpose();
    whitened = 0.5 * (&whitened + whitened.transpose());
    let lambdas = SymmetricEigen::new(whitened).eigenvalues;
    if lambdas.iter().any(|&v| v <= 0.0) {
        return Err(Error::Numeric("Σ⁻¹Σ̂ has a nonpositive eigenvalue".into()));
    }
    let beta = beta_of(alpha);
    let logs: Vec<f64> = lambdas.iter().map(|v| v.ln()).collect();
    if beta == 1.0 {
        return Ok(0.5 * logs.iter().map(|&u| alpha_kernel(u, 0.0)).sum::<f64>());
    }
    if beta == 0.0 {
        return Ok(0.5 * logs.iter().map(|&u| alpha_kernel(-u, 0.0)).sum::<f64>());
    }
    let mut log_integral = 0.0;
    for (&lambda, &u) in lambdas.iter().zip(&logs) {
        let blended = beta / lambda + (1.0 - beta);
        if blended <= 0.0 {
            return Err(Error::DivergenceUndefined { eigenvalue: blended });
        }
        // β + (1−β)λ = 1 + (1−β)(λ − 1)
        log_integral -= 0.5 * (((1.0 - beta) * u.exp_m1()).ln_1p() - (1.0 - beta) * u);
    }
    Ok((-log_integral.exp_m1() / (beta * (1.0 - beta))).max(0.0))
}

/// Mixture divergence by adaptive Gauss–Legendre quadrature over the
/// family's window. Weights may lie on the closed interval [0, 1].
pub fn alpha_divergence_mixture(theta_hat: f64, theta: f64, sigma2: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let model = TwoNormalMixtureModel::new(sigma2)?;
    for w in [theta_hat, theta] {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::invalid(format!("mixture weight {w} outside [0, 1]")));
        }
    }
    if theta_hat == theta {
        return Ok(0.0);
    }
    let beta = beta_of(alpha);
    let (a, b) = model.window();
    let value = integrate_adaptive(
        |x| {
            weighted_alpha_kernel(model.log_density_at(x, theta_hat), model.log_density_at(x, theta), beta)
        },
        a,
        b,
        QuadratureConfig::default(),
    )?;
    Ok(value.max(0.0))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::invalid(format!("α must be finite, got {alpha}")));
    }
    Ok(())
}
