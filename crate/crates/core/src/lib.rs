//! # riskx
//!
//! Second-order asymptotics for the risk of the maximum-likelihood estimator
//! when the loss is an α-divergence between the fitted and the true density:
//!
//! ```text
//! E_θ[ D_α(θ̂ : θ) ] = p / (2n) + c₂ / n² + o(n⁻²)
//! ```
//!
//! The n⁻¹ coefficient depends only on the parameter count `p`. The n⁻²
//! coefficient `c₂` is a quadratic polynomial in `α′ = (1 − α)/2` whose
//! coefficients are coordinate-free information-geometric scalars of the model:
//! skewness contractions, the `F` scalar, the e-curvature contraction and the
//! inner products of the e/m second fundamental forms.
//!
//! ## Layout
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`models`] | [`ModelFamily`] trait and the multinomial, zero-mean normal and two-normal mixture families |
//! | [`divergence`] | exact α-divergence per family (closed forms, Gauss–Legendre quadrature) |
//! | [`geometry`] | Fisher metric, Monte-Carlo moment aggregates, scalar invariants |
//! | [`expansion`] | the n⁻¹/n⁻² coefficients: general, corollaries, closed forms |
//! | [`simulation`] | empirical risk by repeated sampling and refitting |
//! | [`contraction`] | loop counting for σ-index contractions of the normal model |
//! | [`cli`] | the `riskx` command-line front end |
//!
//! ## Quick start
//!
//! ```
//! use riskx::expansion::expansion_multinomial_closed;
//! use riskx::models::MultinomialModel;
//!
//! let model = MultinomialModel::new(1).unwrap();
//! let m = model.point(&[0.1]).unwrap();
//! let res = expansion_multinomial_closed(&m, -1.0).unwrap();
//! assert!((res.value(10.0) - 0.0584).abs() < 5e-5);
//! ```

pub mod cli;
pub mod contraction;
pub mod divergence;
mod error;
pub mod expansion;
pub mod geometry;
pub mod models;
pub mod numeric;
pub mod rng;
pub mod simulation;
pub mod tensor;

pub use error::{Error, Result};
pub use expansion::ExpansionResult;
pub use geometry::{FisherMatrix, LMoments, ScalarInvariants};
pub use models::{ModelFamily, ParamPoint};
pub use simulation::RiskEstimate;
