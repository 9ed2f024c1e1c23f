//! Multinomial (categorical) family over categories `0..=p` in
//! m-coordinates: free parameters `m₁,…,m_p`, with `m₀ = 1 − Σ mᵢ`.

use nalgebra::DMatrix;
use rand::Rng;

use super::{check_dim, check_order, factorial_minus_one, DerivativeStack, MleFit, ModelFamily, ParamPoint};
use crate::divergence::alpha_divergence_multinomial;
use crate::tensor::SymTensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultinomialModel {
    p: usize,
}

impl MultinomialModel {
    /// A family with `p + 1` categories.
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("multinomial family needs at least two categories"));
        }
        Ok(Self { p })
    }

    pub fn category_count(&self) -> usize {
        self.p + 1
    }

    /// An interior point from the free probabilities `m₁,…,m_p`.
    pub fn point(&self, m: &[f64]) -> Result<ParamPoint> {
        let point = ParamPoint::new(m.to_vec())?;
        check_dim(&point, self.p)?;
        if !self.domain_check(&point) {
            return Err(Error::invalid(format!(
                "multinomial probabilities {m:?} are not interior (each mᵢ and 1 − Σmᵢ must be positive)"
            )));
        }
        Ok(point)
    }

    /// All `p + 1` cell probabilities `(m₀, m₁, …, m_p)`.
    pub fn probabilities(theta: &ParamPoint) -> Vec<f64> {
        let mut full = Vec::with_capacity(theta.dim() + 1);
        full.push(1.0 - theta.coords().iter().sum::<f64>());
        full.extend_from_slice(theta.coords());
        full
    }

    /// MLE from cell counts `(n₀, n₁, …, n_p)`.
    pub fn mle_counts(&self, counts: &[u64]) -> Result<MleFit> {
        if counts.len() != self.p + 1 {
            return Err(Error::DimensionMismatch { expected: self.p + 1, got: counts.len() });
        }
        multinomial_mle(counts)
    }

    fn check_obs(&self, x: usize) -> Result<()> {
        if x > self.p {
            return Err(Error::invalid(format!("category {x} outside 0..={}", self.p)));
        }
        Ok(())
    }
}

/// Relative frequencies `mᵢ = nᵢ / n` for `i = 1…p` from counts `(n₀, …, n_p)`.
/// Zero cells give a boundary estimate, flagged as such.
pub fn multinomial_mle(counts: &[u64]) -> Result<MleFit> {
    if counts.len() < 2 {
        return Err(Error::invalid("need counts for at least two categories"));
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::invalid("total count is zero"));
    }
    let nf = n as f64;
    let m: Vec<f64> = counts[1..].iter().map(|&c| c as f64 / nf).collect();
    Ok(MleFit {
        point: ParamPoint::new(m)?,
        boundary: counts.contains(&0),
        flat: false,
    })
}

impl ModelFamily for MultinomialModel {
    type Obs = usize;

    fn name(&self) -> &'static str {
        "multinomial"
    }

    fn param_dim(&self) -> usize {
        self.p
    }

    fn domain_check(&self, theta: &ParamPoint) -> bool {
        theta.dim() == self.p && Self::probabilities(theta).iter().all(|&m| m > 0.0)
    }

    fn log_density(&self, x: &usize, theta: &ParamPoint) -> Result<f64> {
        check_dim(theta, self.p)?;
        self.check_obs(*x)?;
        Ok(Self::probabilities(theta)[*x].ln())
    }

    fn derivative_stack(&self, x: &usize, theta: &ParamPoint, max_order: usize) -> Result<DerivativeStack> {
        check_dim(theta, self.p)?;
        check_order(max_order)?;
        self.check_obs(*x)?;
        let mx = Self::probabilities(theta)[*x];
        let p = self.p;
        let tensors = (1..=max_order)
            .map(|k| {
                let c = factorial_minus_one(k) / mx.powi(k as i32);
                if *x == 0 {
                    // log m₀ = log(1 − Σmᵢ): every mixed partial is −(k−1)!/m₀ᵏ.
                    SymTensor::from_sorted_fn(p, k, |_| -c)
                } else {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    SymTensor::from_sorted_fn(p, k, |idx| {
                        if idx.iter().all(|&i| i + 1 == *x) {
                            sign * c
                        } else {
                            0.0
                        }
                    })
                }
            })
            .collect();
        Ok(DerivativeStack { tensors })
    }

    fn sample_with<R: Rng + ?Sized>(&self, theta: &ParamPoint, count: usize, rng: &mut R) -> Result<Vec<usize>> {
        check_dim(theta, self.p)?;
        let probs = Self::probabilities(theta);
        if probs.iter().any(|&m| m < 0.0) {
            return Err(Error::invalid("cannot sample outside the closed simplex"));
        }
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for m in &probs {
            acc += m;
            cumulative.push(acc);
        }
        Ok((0..count)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                cumulative.iter().position(|&c| u < c).unwrap_or(self.p)
            })
            .collect())
    }

    fn mle(&self, observations: &[usize]) -> Result<MleFit> {
        let mut counts = vec![0u64; self.p + 1];
        for &x in observations {
            self.check_obs(x)?;
            counts[x] += 1;
        }
        self.mle_counts(&counts)
    }

    fn exact_fisher(&self, theta: &ParamPoint) -> Result<Option<DMatrix<f64>>> {
        check_dim(theta, self.p)?;
        if !self.domain_check(theta) {
            return Err(Error::invalid("Fisher matrix requested at a non-interior point"));
        }
        let full = Self::probabilities(theta);
        let m0 = full[0];
        Ok(Some(DMatrix::from_fn(self.p, self.p, |i, j| {
            1.0 / m0 + if i == j { 1.0 / full[i + 1] } else { 0.0 }
        })))
    }

    fn alpha_divergence(&self, theta1: &ParamPoint, theta2: &ParamPoint, alpha: f64) -> Result<f64> {
        check_dim(theta1, self.p)?;
        check_dim(theta2, self.p)?;
        alpha_divergence_multinomial(theta1, theta2, alpha)
    }
}
