//! Zero-mean multivariate normal `N_p(0, Σ)` parameterized by the upper
//! triangle `σᵢⱼ, i ≤ j`, ordered row-major.

use itertools::Itertools;
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_dim, check_order, DerivativeStack, MleFit, ModelFamily, ParamPoint};
use crate::divergence::alpha_divergence_normal;
use crate::tensor::SymTensor;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroMeanNormalModel {
    p: usize,
    pairs: Vec<(usize, usize)>,
}

impl ZeroMeanNormalModel {
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("normal family needs dimension p >= 1"));
        }
        let pairs = (0..p).flat_map(|i| (i..p).map(move |j| (i, j))).collect();
        Ok(Self { p, pairs })
    }

    /// Dimension of the observations.
    pub fn dim(&self) -> usize {
        self.p
    }

    /// Index pairs `(i, j)`, `i ≤ j`, in coordinate order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn matrix(&self, theta: &ParamPoint) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.p, self.p);
        for (&(i, j), &v) in self.pairs.iter().zip(theta.coords()) {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// The parameter point of a symmetric positive-definite matrix.
    pub fn point_from_matrix(&self, sigma: &DMatrix<f64>) -> Result<ParamPoint> {
        if sigma.nrows() != self.p || sigma.ncols() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, got: sigma.nrows() });
        }
        let scale = sigma.amax().max(f64::MIN_POSITIVE);
        if (sigma - sigma.transpose()).amax() > 1e-12 * scale {
            return Err(Error::invalid("covariance matrix is not symmetric"));
        }
        let point = ParamPoint::new(self.pairs.iter().map(|&(i, j)| sigma[(i, j)]).collect())?;
        if !self.domain_check(&point) {
            return Err(Error::invalid("covariance matrix is not positive definite"));
        }
        Ok(point)
    }

    fn direction(&self, a: usize) -> DMatrix<f64> {
        let (i, j) = self.pairs[a];
        let mut e = DMatrix::zeros(self.p, self.p);
        e[(i, j)] = 1.0;
        e[(j, i)] = 1.0;
        e
    }

    fn cholesky(&self, theta: &ParamPoint) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        check_dim(theta, self.pairs.len())?;
        Cholesky::new(self.matrix(theta))
            .ok_or_else(|| Error::invalid("covariance matrix is not positive definite"))
    }

    fn check_obs(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, got: x.len() });
        }
        Ok(())
    }
}

impl ModelFamily for ZeroMeanNormalModel {
    type Obs = Vec<f64>;

    fn name(&self) -> &'static str {
        "normal"
    }

    fn param_dim(&self) -> usize {
        self.pairs.len()
    }

    fn domain_check(&self, theta: &ParamPoint) -> bool {
        theta.dim() == self.pairs.len() && Cholesky::new(self.matrix(theta)).is_some()
    }

    fn log_density(&self, x: &Vec<f64>, theta: &ParamPoint) -> Result<f64> {
        self.check_obs(x)?;
        let chol = self.cholesky(theta)?;
        let xv = DVector::from_column_slice(x);
        let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let quad = xv.dot(&chol.solve(&xv));
        let p = self.p as f64;
        Ok(-0.5 * (log_det + quad + p * (2.0 * std::f64::consts::PI).ln()))
    }

    /// With `S = Σ⁻¹`, `v = Sx`, `Eₐ = ∂Σ/∂θₐ` and `Aₐ = S Eₐ`:
    /// `∂ᵏ log det Σ = (−1)^{k−1} Σ_π tr(A_{a₁} A_{π₂} ⋯ A_{π_k})` over orderings
    /// of the last k−1 indices, and
    /// `∂ᵏ xᵀSx = (−1)ᵏ Σ_π vᵀ E_{π₁} A_{π₂} ⋯ A_{π_k} v` over all orderings.
    fn derivative_stack(&self, x: &Vec<f64>, theta: &ParamPoint, max_order: usize) -> Result<DerivativeStack> {
        check_order(max_order)?;
        self.check_obs(x)?;
        let chol = self.cholesky(theta)?;
        let s = chol.inverse();
        let v = &s * DVector::from_column_slice(x);
        let q = self.pairs.len();
        let e: Vec<DMatrix<f64>> = (0..q).map(|a| self.direction(a)).collect();
        let a_mats: Vec<DMatrix<f64>> = e.iter().map(|ea| &s * ea).collect();
        let ev: Vec<DVector<f64>> = e.iter().map(|ea| ea * &v).collect();

        let tensors = (1..=max_order)
            .map(|k| {
                SymTensor::from_sorted_fn(q, k, |idx| {
                    let mut trace_part = 0.0;
                    for rest in idx[1..].iter().copied().permutations(k - 1) {
                        let prod = rest.iter().fold(a_mats[idx[0]].clone(), |m, &b| m * &a_mats[b]);
                        trace_part += prod.trace();
                    }
                    let mut quad_part = 0.0;
                    for order in idx.iter().copied().permutations(k) {
                        let tail = order[1..].iter().rev().fold(v.clone(), |w, &b| &a_mats[b] * w);
                        quad_part += ev[order[0]].dot(&tail);
                    }
                    let sign_tr = if k % 2 == 1 { 1.0 } else { -1.0 };
                    -0.5 * (sign_tr * trace_part - sign_tr * quad_part)
                })
            })
            .collect();
        Ok(DerivativeStack { tensors })
    }

    fn sample_with<R: Rng + ?Sized>(&self, theta: &ParamPoint, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        let chol = self.cholesky(theta)?;
        let l = chol.l();
        Ok((0..count)
            .map(|_| {
                let z = DVector::from_fn(self.p, |_, _| rng.sample::<f64, _>(StandardNormal));
                (&l * z).as_slice().to_vec()
            })
            .collect())
    }

    /// `Σ̂ = n⁻¹ Σ xᵢ xᵢᵀ`; numerically singular estimates are rejected.
    fn mle(&self, observations: &[Vec<f64>]) -> Result<MleFit> {
        if observations.is_empty() {
            return Err(Error::invalid("no observations"));
        }
        let mut acc = DMatrix::zeros(self.p, self.p);
        for x in observations {
            self.check_obs(x)?;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite observation {x:?}")));
            }
            let xv = DVector::from_column_slice(x);
            acc += &xv * xv.transpose();
        }
        acc /= observations.len() as f64;
        let eig = SymmetricEigen::new(acc.clone()).eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        if lo.is_nan() || lo <= 1e-12 * hi.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateEstimate(format!(
                "sample covariance is singular (eigenvalues {lo:e} .. {hi:e})"
            )));
        }
        let point = ParamPoint::new(self.pairs.iter().map(|&(i, j)| acc[(i, j)]).collect())?;
        Ok(MleFit::interior(point))
    }

    /// `g_ab = ½ tr(Aₐ A_b)`.
    fn exact_fisher(&self, theta: &ParamPoint) -> Result<Option<DMatrix<f64>>> {
        let s = self.cholesky(theta)?.inverse();
        let q = self.pairs.len();
        let a_mats: Vec<DMatrix<f64>> = (0..q).map(|a| &s * self.direction(a)).collect();
        Ok(Some(DMatrix::from_fn(q, q, |a, b| 0.5 * (&a_mats[a] * &a_mats[b]).trace())))
    }

    fn alpha_divergence(&self, theta1: &ParamPoint, theta2: &ParamPoint, alpha: f64) -> Result<f64> {
        self.cholesky(theta1)?;
        self.cholesky(theta2)?;
        alpha_divergence_normal(&self.matrix(theta1), &self.matrix(theta2), alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::test_support::check_derivatives;

    #[test]
    fn mle_examples() {
        let m1 = ZeroMeanNormalModel::new(1).unwrap();
        assert_eq!(m1.mle(&[vec![1.0], vec![-1.0]]).unwrap().point.coords(), &[1.0]);
        assert_eq!(m1.mle(&[vec![2.0], vec![0.0]]).unwrap().point.coords(), &[2.0]);

        let m2 = ZeroMeanNormalModel::new(2).unwrap();
        let fit = m2.mle(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(fit.point.coords(), &[0.5, 0.0, 0.5]);

        let err = m2.mle(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateEstimate(_)));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let model = ZeroMeanNormalModel::new(2).unwrap();
        let sigma = DMatrix::from_row_slice(2, 2, &[1.5, 0.3, 0.3, 0.8]);
        let theta = model.point_from_matrix(&sigma).unwrap();
        check_derivatives(&model, &vec![0.7, -1.2], &theta);
        check_derivatives(&model, &vec![-0.1, 0.4], &theta);
    }

    #[test]
    fn score_vanishes_at_the_mle() {
        let model = ZeroMeanNormalModel::new(2).unwrap();
        let truth = model.point_from_matrix(&DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        let obs = model.sample(&truth, 50, 3).unwrap();
        let fit = model.mle(&obs).unwrap();
        let mut total = vec![0.0; 3];
        for x in &obs {
            for (t, s) in total.iter_mut().zip(model.score(x, &fit.point).unwrap()) {
                *t += s;
            }
        }
        assert!(total.iter().all(|t| t.abs() < 1e-10), "{total:?}");
    }

    #[test]
    fn fisher_in_one_dimension() {
        // g = 1/(2σ⁴) and its inverse 2σ⁴.
        let model = ZeroMeanNormalModel::new(1).unwrap();
        let g = model.exact_fisher(&ParamPoint::new(vec![3.0]).unwrap()).unwrap().unwrap();
        assert!((g[(0, 0)] - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn fisher_matches_closed_inverse() {
        // g⁻¹_{(ij)(kl)} = σᵢₖσⱼₗ + σᵢₗσⱼₖ.
        let model = ZeroMeanNormalModel::new(2).unwrap();
        let sigma = DMatrix::from_row_slice(2, 2, &[1.5, 0.3, 0.3, 0.8]);
        let g = model.exact_fisher(&model.point_from_matrix(&sigma).unwrap()).unwrap().unwrap();
        let pairs = model.pairs();
        let g_inv = DMatrix::from_fn(3, 3, |a, b| {
            let ((i, j), (k, l)) = (pairs[a], pairs[b]);
            sigma[(i, k)] * sigma[(j, l)] + sigma[(i, l)] * sigma[(j, k)]
        });
        let prod = g * g_inv;
        assert!((prod - DMatrix::identity(3, 3)).amax() < 1e-12);
    }
}
