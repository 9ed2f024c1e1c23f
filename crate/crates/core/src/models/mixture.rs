//! Two-component normal mixture `(1−θ)·N(0, σ²) + θ·N(1, σ²)` with known σ².
//!
//! With `h = g₁ − g₀` the family is linear in θ, so every derivative is a
//! power of the score `l₁ = h/f`: `l₁₁ = −l₁²`, `l₁₁₁ = 2l₁³`, `l₁₁₁₁ = −6l₁⁴`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_dim, check_order, factorial_minus_one, DerivativeStack, MleFit, ModelFamily, ParamPoint};
use crate::divergence::alpha_divergence_mixture;
use crate::numeric::{integrate_adaptive, log_add_exp, maximize_concave, QuadratureConfig};
use crate::tensor::SymTensor;
use crate::{Error, Result};

/// Search interval `[ε, 1−ε]` for the maximum-likelihood fit.
pub const MLE_EPS: f64 = 1e-8;
const MLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoNormalMixtureModel {
    sigma2: f64,
}

impl TwoNormalMixtureModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::invalid(format!("mixture variance must be positive, got {sigma2}")));
        }
        Ok(Self { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn point(&self, theta1: f64) -> Result<ParamPoint> {
        let point = ParamPoint::new(vec![theta1])?;
        if !self.domain_check(&point) {
            return Err(Error::invalid(format!("mixture weight {theta1} outside (0, 1)")));
        }
        Ok(point)
    }

    /// Integration window covering both components by ten standard deviations.
    pub fn window(&self) -> (f64, f64) {
        let s = self.sigma2.sqrt();
        (-10.0 * s - 1.0, 10.0 * s + 2.0)
    }

    /// `(log g₀(x), log g₁(x))`.
    pub fn component_log_densities(&self, x: f64) -> (f64, f64) {
        let norm = -0.5 * (2.0 * std::f64::consts::PI * self.sigma2).ln();
        (
            norm - x * x / (2.0 * self.sigma2),
            norm - (x - 1.0) * (x - 1.0) / (2.0 * self.sigma2),
        )
    }

    /// `log f(x; θ)` for a weight in the closed interval [0, 1].
    pub fn log_density_at(&self, x: f64, theta1: f64) -> f64 {
        let (lg0, lg1) = self.component_log_densities(x);
        log_add_exp((1.0 - theta1).ln() + lg0, theta1.ln() + lg1)
    }

    /// `(log f, l₁)` at a single observation.
    fn log_density_and_score(&self, x: f64, theta1: f64) -> (f64, f64) {
        let (lg0, lg1) = self.component_log_densities(x);
        let lf = log_add_exp((1.0 - theta1).ln() + lg0, theta1.ln() + lg1);
        (lf, (lg1 - lf).exp() - (lg0 - lf).exp())
    }

    fn weight(theta: &ParamPoint) -> f64 {
        theta.coords()[0]
    }
}

impl ModelFamily for TwoNormalMixtureModel {
    type Obs = f64;

    fn name(&self) -> &'static str {
        "mixture"
    }

    fn param_dim(&self) -> usize {
        1
    }

    fn domain_check(&self, theta: &ParamPoint) -> bool {
        theta.dim() == 1 && Self::weight(theta) > 0.0 && Self::weight(theta) < 1.0
    }

    fn log_density(&self, x: &f64, theta: &ParamPoint) -> Result<f64> {
        check_dim(theta, 1)?;
        Ok(self.log_density_at(*x, Self::weight(theta)))
    }

    fn derivative_stack(&self, x: &f64, theta: &ParamPoint, max_order: usize) -> Result<DerivativeStack> {
        check_dim(theta, 1)?;
        check_order(max_order)?;
        let (_, l1) = self.log_density_and_score(*x, Self::weight(theta));
        let tensors = (1..=max_order)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                SymTensor::from_vec(1, k, vec![sign * factorial_minus_one(k) * l1.powi(k as i32)])
            })
            .collect();
        Ok(DerivativeStack { tensors })
    }

    fn sample_with<R: Rng + ?Sized>(&self, theta: &ParamPoint, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        check_dim(theta, 1)?;
        let w = Self::weight(theta);
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::invalid(format!("mixture weight {w} outside [0, 1]")));
        }
        let s = self.sigma2.sqrt();
        Ok((0..count)
            .map(|_| {
                let mean = if rng.random::<f64>() < w { 1.0 } else { 0.0 };
                mean + s * rng.sample::<f64, _>(StandardNormal)
            })
            .collect())
    }

    /// Golden-section bracketing then Newton on `[ε, 1−ε]`. The log-likelihood
    /// is concave since its second derivative is `−Σ l₁²`.
    fn mle(&self, observations: &[f64]) -> Result<MleFit> {
        if observations.is_empty() {
            return Err(Error::invalid("no observations"));
        }
        if let Some(bad) = observations.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite observation {bad}")));
        }
        // h(x) = g₁(x) − g₀(x) vanishes only at x = ½; there the likelihood is flat.
        if observations.iter().all(|&x| x == 0.5) {
            return Ok(MleFit { point: ParamPoint::new(vec![0.5])?, boundary: false, flat: true });
        }
        let eval = |t: f64| {
            let (mut f, mut d1, mut d2) = (0.0, 0.0, 0.0);
            for &x in observations {
                let (lf, l1) = self.log_density_and_score(x, t);
                f += lf;
                d1 += l1;
                d2 -= l1 * l1;
            }
            (f, d1, d2)
        };
        let best = maximize_concave(eval, MLE_EPS, 1.0 - MLE_EPS, MLE_TOL);
        Ok(MleFit {
            point: ParamPoint::new(vec![best.arg])?,
            boundary: best.at_boundary,
            flat: false,
        })
    }

    /// `g = ∫ h²/f dx` by adaptive Gauss–Legendre quadrature.
    fn exact_fisher(&self, theta: &ParamPoint) -> Result<Option<DMatrix<f64>>> {
        check_dim(theta, 1)?;
        if !self.domain_check(theta) {
            return Err(Error::invalid("Fisher matrix requested at a non-interior point"));
        }
        let t = Self::weight(theta);
        let (a, b) = self.window();
        let g = integrate_adaptive(
            |x| {
                let (lf, l1) = self.log_density_and_score(x, t);
                lf.exp() * l1 * l1
            },
            a,
            b,
            QuadratureConfig::default(),
        )?;
        Ok(Some(DMatrix::from_element(1, 1, g)))
    }

    fn alpha_divergence(&self, theta1: &ParamPoint, theta2: &ParamPoint, alpha: f64) -> Result<f64> {
        check_dim(theta1, 1)?;
        check_dim(theta2, 1)?;
        alpha_divergence_mixture(Self::weight(theta1), Self::weight(theta2), self.sigma2, alpha)
    }
}
