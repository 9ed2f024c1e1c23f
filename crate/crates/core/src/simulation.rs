//! Empirical risk `E_θ[D_α(θ̂ : θ)]` by repeated sampling and refitting.
//!
//! Replicate `r` draws its sample from substream `(seed, r)`, so any
//! replicate can be replayed alone and results are bit-identical for every
//! worker count. Per-replicate divergences are kept in replicate order and
//! reduced by pairwise summation.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::expansion::ExpansionResult;
use crate::models::{ModelFamily, ParamPoint, ZeroMeanNormalModel};
use crate::numeric::pairwise_sum;
use crate::rng::{derive_seed, substream};
use crate::divergence::alpha_divergence_multinomial;
use crate::{Error, Result};

pub const MIN_REPS: usize = 100;

/// Treatment of replicates whose divergence is +∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InfinitePolicy {
    /// Average the finite replicates and report how many were infinite.
    #[default]
    CountAndExclude,
    /// Any infinite replicate makes the mean infinite.
    Propagate,
}

#[derive(Debug, Clone)]
pub struct SimulationPlan<M> {
    pub family: M,
    pub theta: ParamPoint,
    pub alpha: f64,
    /// Sample size per replicate.
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub policy: InfinitePolicy,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
}

impl<M: ModelFamily> SimulationPlan<M> {
    pub fn new(family: M, theta: ParamPoint, alpha: f64, n: usize, reps: usize, seed: u64) -> Self {
        Self {
            family,
            theta,
            alpha,
            n,
            reps,
            seed,
            policy: InfinitePolicy::default(),
            workers: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(Error::invalid(format!("reps must be at least {MIN_REPS}, got {}", self.reps)));
        }
        if self.n == 0 {
            return Err(Error::invalid("sample size n must be at least 1"));
        }
        if !self.alpha.is_finite() {
            return Err(Error::invalid(format!("α must be finite, got {}", self.alpha)));
        }
        if !self.family.domain_check(&self.theta) {
            return Err(Error::invalid(format!("true θ = {:?} is not interior", self.theta.coords())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub reps_used: usize,
    pub infinite_count: usize,
    /// Replicates whose estimate fell on the parameter boundary.
    pub boundary_count: usize,
    pub expansion_value: Option<f64>,
}

impl RiskEstimate {
    pub fn with_expansion(mut self, expansion: &ExpansionResult, n: usize) -> Self {
        self.expansion_value = Some(expansion.value(n as f64));
        self
    }

    /// `(mean − expansion) / std_error`, when an expansion value is attached.
    pub fn z_score(&self) -> Option<f64> {
        self.expansion_value.map(|e| (self.mean - e) / self.std_error)
    }
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// One replicate's fitted estimate (replay helper).
pub fn replicate_fit<M: ModelFamily>(plan: &SimulationPlan<M>, r: usize) -> Result<crate::models::MleFit> {
    let mut rng = substream(plan.seed, r as u64);
    let sample = plan.family.sample_with(&plan.theta, plan.n, &mut rng)?;
    plan.family.mle(&sample)
}

pub fn simulate_risk<M: ModelFamily>(plan: &SimulationPlan<M>) -> Result<RiskEstimate> {
    plan.validate()?;
    let outcomes: Vec<(f64, bool)> = with_workers(plan.workers, || {
        (0..plan.reps)
            .into_par_iter()
            .map(|r| {
                let fit = replicate_fit(plan, r)?;
                let d = plan.family.alpha_divergence(&fit.point, &plan.theta, plan.alpha)?;
                Ok((d, fit.boundary))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let boundary_count = outcomes.iter().filter(|o| o.1).count();
    let finite: Vec<f64> = outcomes.iter().map(|o| o.0).filter(|d| d.is_finite()).collect();
    let infinite_count = plan.reps - finite.len();
    if finite.is_empty() {
        return Err(Error::EstimationImpossible { reps: plan.reps });
    }
    if plan.policy == InfinitePolicy::Propagate && infinite_count > 0 {
        return Ok(RiskEstimate {
            mean: f64::INFINITY,
            std_error: f64::INFINITY,
            reps_used: plan.reps,
            infinite_count,
            boundary_count,
            expansion_value: None,
        });
    }
    let (mean, std_error) = mean_and_se(&finite);
    Ok(RiskEstimate {
        mean,
        std_error,
        reps_used: finite.len(),
        infinite_count,
        boundary_count,
        expansion_value: None,
    })
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = pairwise_sum(xs) / k;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, (pairwise_sum(&sq) / (k - 1.0) / k).sqrt())
}

/// Exact `E[D_α(m̂ : m)]` for the binomial (p = 1) by summing over all counts.
/// Boundary counts with infinite divergence are excluded and their total
/// probability returned alongside, mirroring [`InfinitePolicy::CountAndExclude`].
pub fn exact_binomial_risk(m1: f64, n: usize, alpha: f64) -> Result<(f64, f64)> {
    if !(m1 > 0.0 && m1 < 1.0) {
        return Err(Error::invalid(format!("binomial probability {m1} outside (0, 1)")));
    }
    let truth = ParamPoint::new(vec![m1])?;
    let (lp, lq) = (m1.ln(), (1.0 - m1).ln());
    let mut log_pmf = n as f64 * lq;
    let (mut weighted, mut finite_mass, mut infinite_mass) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..=n {
        if k > 0 {
            log_pmf += ((n - k + 1) as f64 / k as f64).ln() + lp - lq;
        }
        let pmf = log_pmf.exp();
        let d = alpha_divergence_multinomial(&ParamPoint::new(vec![k as f64 / n as f64])?, &truth, alpha)?;
        if d.is_finite() {
            weighted.push(pmf * d);
            finite_mass.push(pmf);
        } else {
            infinite_mass.push(pmf);
        }
    }
    Ok((pairwise_sum(&weighted) / pairwise_sum(&finite_mass), pairwise_sum(&infinite_mass)))
}

/// Risks at two covariances of the same dimension, which must agree since
/// the risk of the covariance MLE does not depend on Σ.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub a: RiskEstimate,
    pub b: RiskEstimate,
    pub z: f64,
    pub pass: bool,
}

/// Runs the two simulations with independent seeds derived from `seed` and
/// checks `|mean_a − mean_b| < 3·√(se_a² + se_b²)`.
pub fn invariance_check_normal(
    p: usize,
    sigma_a: &DMatrix<f64>,
    sigma_b: &DMatrix<f64>,
    alpha: f64,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    let model = ZeroMeanNormalModel::new(p)?;
    let run = |sigma: &DMatrix<f64>, label: u64| -> Result<RiskEstimate> {
        let theta = model.point_from_matrix(sigma)?;
        simulate_risk(&SimulationPlan::new(model.clone(), theta, alpha, n, reps, derive_seed(seed, label)))
    };
    let a = run(sigma_a, 0)?;
    let b = run(sigma_b, 1)?;
    let z = (a.mean - b.mean) / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    Ok(InvarianceReport { pass: z.abs() < 3.0, a, b, z })
}

/// A seeded random SPD matrix `W/ν` with `W ~ Wishart_p(I, ν)`, `ν = p + 3`.
pub fn random_spd(p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = substream(seed, 0);
    let dof = p + 3;
    let mut w = DMatrix::zeros(p, p);
    for _ in 0..dof {
        let z = DVector::<f64>::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
        w += &z * z.transpose();
    }
    w / dof as f64
}

/// Budget constant in the tolerance `|g⁻¹| · c / n` of [`mle_moment_check`].
pub const MOMENT_BIAS_CONSTANT: f64 = 5.0;

/// `n · Cov(θ̂)` against `g⁻¹` entry by entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub scaled_cov: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub std_error: DMatrix<f64>,
    pub tolerance: DMatrix<f64>,
    pub pass: bool,
}

/// Each entry passes when `|n·cov − g⁻¹| ≤ max(5·s.e., |g⁻¹|·c/n)`, the
/// second term allowing for the O(n⁻¹) relative bias of the leading order.
pub fn mle_moment_check<M: ModelFamily>(
    family: &M,
    theta: &ParamPoint,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<MomentReport> {
    let g_inv = crate::geometry::fisher_matrix(family, theta)?.g_inv;
    let plan = SimulationPlan::new(family, theta.clone(), -1.0, n, reps, seed);
    plan.validate()?;
    let fits: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| replicate_fit(&plan, r).map(|f| f.point.into_vec()))
        .collect::<Result<_>>()?;
    let p = family.param_dim();
    let means: Vec<f64> = (0..p)
        .map(|i| pairwise_sum(&fits.iter().map(|f| f[i]).collect::<Vec<_>>()) / reps as f64)
        .collect();
    let nf = n as f64;
    let mut scaled_cov = DMatrix::zeros(p, p);
    let mut std_error = DMatrix::zeros(p, p);
    let mut tolerance = DMatrix::zeros(p, p);
    let mut pass = true;
    for i in 0..p {
        for j in 0..p {
            let prods: Vec<f64> = fits.iter().map(|f| (f[i] - means[i]) * (f[j] - means[j])).collect();
            let (mean, se) = mean_and_se(&prods);
            let cov = mean * reps as f64 / (reps - 1) as f64;
            scaled_cov[(i, j)] = nf * cov;
            std_error[(i, j)] = nf * se;
            tolerance[(i, j)] = (5.0 * nf * se).max(g_inv[(i, j)].abs() * MOMENT_BIAS_CONSTANT / nf);
            pass &= (scaled_cov[(i, j)] - g_inv[(i, j)]).abs() <= tolerance[(i, j)];
        }
    }
    Ok(MomentReport { scaled_cov, g_inv, std_error, tolerance, pass })
}

impl<M: ModelFamily> ModelFamily for &M {
    type Obs = M::Obs;

    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn domain_check(&self, theta: &ParamPoint) -> bool {
        (**self).domain_check(theta)
    }
    fn log_density(&self, x: &Self::Obs, theta: &ParamPoint) -> Result<f64> {
        (**self).log_density(x, theta)
    }
    fn derivative_stack(
        &self,
        x: &Self::Obs,
        theta: &ParamPoint,
        max_order: usize,
    ) -> Result<crate::models::DerivativeStack> {
        (**self).derivative_stack(x, theta, max_order)
    }
    fn sample_with<R: rand::Rng + ?Sized>(&self, theta: &ParamPoint, count: usize, rng: &mut R) -> Result<Vec<Self::Obs>> {
        (**self).sample_with(theta, count, rng)
    }
    fn mle(&self, observations: &[Self::Obs]) -> Result<crate::models::MleFit> {
        (**self).mle(observations)
    }
    fn exact_fisher(&self, theta: &ParamPoint) -> Result<Option<DMatrix<f64>>> {
        (**self).exact_fisher(theta)
    }
    fn alpha_divergence(&self, theta1: &ParamPoint, theta2: &ParamPoint, alpha: f64) -> Result<f64> {
        (**self).alpha_divergence(theta1, theta2, alpha)
    }
}
