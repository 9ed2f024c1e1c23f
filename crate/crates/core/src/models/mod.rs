//! Parametric families: the [`ModelFamily`] abstraction and the three
//! built-in families.
//!
//! A family supplies its log-density, the symmetric tensors of θ-derivatives
//! of the log-density up to order four, an exact sampler, a maximum-likelihood
//! fit and the exact α-divergence between two of its members. Everything
//! downstream (Monte-Carlo geometry, risk simulation) is generic over it.

mod mixture;
mod multinomial;
mod normal;

pub use mixture::TwoNormalMixtureModel;
pub use multinomial::{multinomial_mle, MultinomialModel};
pub use normal::ZeroMeanNormalModel;

use std::fmt::Debug;

use nalgebra::DMatrix;
use rand::Rng;

use crate::rng::substream;
use crate::tensor::SymTensor;
use crate::{Error, Result};

/// A point θ of the parameter space. Coordinates are finite; membership of
/// the open parameter set is a separate question answered by
/// [`ModelFamily::domain_check`], since boundary estimates are legitimate
/// outputs of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    coords: Vec<f64>,
}

impl ParamPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("parameter vector is empty"));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite parameter coordinate {bad}")));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }
}

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    pub point: ParamPoint,
    /// The estimate lies on the boundary of the parameter set.
    pub boundary: bool,
    /// The likelihood is constant in θ; `point` is a conventional choice.
    pub flat: bool,
}

impl MleFit {
    pub(crate) fn interior(point: ParamPoint) -> Self {
        Self { point, boundary: false, flat: false }
    }
}

/// Log-density derivatives at one observation: `tensors[k - 1]` holds the
/// order-k tensor `∂_{i₁}…∂_{i_k} log f`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeStack {
    pub tensors: Vec<SymTensor>,
}

impl DerivativeStack {
    pub fn order(&self, k: usize) -> &SymTensor {
        &self.tensors[k - 1]
    }
}

pub trait ModelFamily: Send + Sync {
    type Obs: Clone + Debug + Send + Sync;

    /// Short identifier used in reports.
    fn name(&self) -> &'static str;

    /// Number of free parameters p.
    fn param_dim(&self) -> usize;

    /// θ lies in the open parameter set.
    fn domain_check(&self, theta: &ParamPoint) -> bool;

    fn log_density(&self, x: &Self::Obs, theta: &ParamPoint) -> Result<f64>;

    /// Derivative tensors of orders `1..=max_order` (at most 4).
    fn derivative_stack(
        &self,
        x: &Self::Obs,
        theta: &ParamPoint,
        max_order: usize,
    ) -> Result<DerivativeStack>;

    fn sample_with<R: Rng + ?Sized>(
        &self,
        theta: &ParamPoint,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Self::Obs>>;

    fn mle(&self, observations: &[Self::Obs]) -> Result<MleFit>;

    /// Closed-form or quadrature Fisher matrix, if the family has one.
    fn exact_fisher(&self, theta: &ParamPoint) -> Result<Option<DMatrix<f64>>>;

    /// D_α[theta1 : theta2]; may be +∞.
    fn alpha_divergence(&self, theta1: &ParamPoint, theta2: &ParamPoint, alpha: f64) -> Result<f64>;

    /// Order-k derivative tensor.
    fn log_derivs(&self, x: &Self::Obs, theta: &ParamPoint, order: usize) -> Result<SymTensor> {
        let mut stack = self.derivative_stack(x, theta, order)?;
        Ok(stack.tensors.swap_remove(order - 1))
    }

    fn score(&self, x: &Self::Obs, theta: &ParamPoint) -> Result<Vec<f64>> {
        Ok(self.log_derivs(x, theta, 1)?.into_vec())
    }

    /// Draws are a pure function of `(theta, count, seed)`.
    fn sample(&self, theta: &ParamPoint, count: usize, seed: u64) -> Result<Vec<Self::Obs>> {
        self.sample_with(theta, count, &mut substream(seed, 0))
    }
}

pub(crate) fn check_dim(theta: &ParamPoint, expected: usize) -> Result<()> {
    if theta.dim() != expected {
        return Err(Error::DimensionMismatch { expected, got: theta.dim() });
    }
    Ok(())
}

pub(crate) fn check_order(max_order: usize) -> Result<()> {
    if !(1..=4).contains(&max_order) {
        return Err(Error::invalid(format!(
            "derivative order must be between 1 and 4, got {max_order}"
        )));
    }
    Ok(())
}

/// (k−1)! for k ≤ 4.
pub(crate) fn factorial_minus_one(k: usize) -> f64 {
    [1.0, 1.0, 2.0, 6.0][k - 1]
}
