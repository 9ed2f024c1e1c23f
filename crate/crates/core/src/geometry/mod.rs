//! Fisher metric and the scalar invariants entering the n⁻² risk term.
//!
//! Invariants come either from closed forms (multinomial, zero-mean normal)
//! or from Monte-Carlo estimates of expectations of products of log-likelihood
//! derivatives ([`LMoments`]), contracted with the inverse metric.

mod fisher;
mod invariants;
mod moments;

pub use fisher::{fisher_matrix, FisherMatrix};
pub use invariants::{
    analytic_invariants_multinomial, analytic_invariants_normal, invariants_from_l_moments, invariants_from_scalars, multinomial_m_statistic,
    InvariantErrors, ScalarInvariants,
};
pub use moments::{estimate_l_moments, FisherSource, LMoments, LScalars, RawMoments, DEFAULT_MC_SAMPLES, JACKKNIFE_BLOCKS};
