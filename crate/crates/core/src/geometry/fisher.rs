use nalgebra::{Cholesky, DMatrix};

use crate::models::{ModelFamily, ParamPoint};
use crate::{Error, Result};

/// The Fisher metric `g_ij = E[l_i l_j]` and its inverse `g^{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
}

impl FisherMatrix {
    /// Wraps a metric after checking it is symmetric positive definite and
    /// that the computed inverse satisfies `g·g⁻¹ = I` to 1e-8.
    pub fn from_metric(g: DMatrix<f64>) -> Result<Self> {
        let p = g.nrows();
        if g.ncols() != p || p == 0 {
            return Err(Error::invalid("Fisher matrix must be square and non-empty"));
        }
        let scale = g.amax();
        if !(scale.is_finite()) || (&g - g.transpose()).amax() > 1e-10 * scale {
            return Err(Error::Numeric("Fisher matrix is not symmetric".into()));
        }
        let chol = Cholesky::new(g.clone())
            .ok_or_else(|| Error::Numeric("Fisher matrix is not positive definite".into()))?;
        let g_inv = chol.inverse();
        let residual = (&g * &g_inv - DMatrix::identity(p, p)).amax();
        if residual > 1e-8 {
            return Err(Error::Numeric(format!("Fisher matrix inversion residual {residual:e}")));
        }
        Ok(Self { g, g_inv })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }
}

/// Closed-form (or quadrature) Fisher matrix of a family at an interior θ.
pub fn fisher_matrix<M: ModelFamily>(model: &M, theta: &ParamPoint) -> Result<FisherMatrix> {
    if !model.domain_check(theta) {
        return Err(Error::invalid(format!("θ = {:?} is not interior", theta.coords())));
    }
    match model.exact_fisher(theta)? {
        Some(g) => FisherMatrix::from_metric(g),
        None => Err(Error::invalid(format!(
            "the {} family has no closed-form Fisher matrix; estimate it from moments",
            model.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{MultinomialModel, TwoNormalMixtureModel, ZeroMeanNormalModel};
    use crate::numeric::{integrate_adaptive, QuadratureConfig};

    #[test]
    fn multinomial_examples() {
        let model = MultinomialModel::new(2).unwrap();
        let f = fisher_matrix(&model, &model.point(&[1.0 / 3.0, 1.0 / 3.0]).unwrap()).unwrap();
        assert!((f.g.clone() - DMatrix::from_row_slice(2, 2, &[6.0, 3.0, 3.0, 6.0])).amax() < 1e-12);

        let model = MultinomialModel::new(1).unwrap();
        let f = fisher_matrix(&model, &model.point(&[0.5]).unwrap()).unwrap();
        assert!((f.g[(0, 0)] - 4.0).abs() < 1e-12);
        assert!((f.g_inv[(0, 0)] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn normal_one_dimensional_duality() {
        // g_{(1,1)(1,1)} = (σ¹¹)²/2 and its dual g^{(1,1)(1,1)} = 2σ₁₁².
        let model = ZeroMeanNormalModel::new(1).unwrap();
        let sigma = 1.7;
        let f = fisher_matrix(&model, &ParamPoint::new(vec![sigma]).unwrap()).unwrap();
        assert!((f.g[(0, 0)] - 0.5 / (sigma * sigma)).abs() < 1e-14);
        assert!((f.g_inv[(0, 0)] - 2.0 * sigma * sigma).abs() < 1e-12);
        assert!((f.g[(0, 0)] * f.g_inv[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mixture_quadrature_against_direct_integral() {
        let model = TwoNormalMixtureModel::new(0.25).unwrap();
        let f = fisher_matrix(&model, &model.point(0.5).unwrap()).unwrap();
        // Independent evaluation from the raw densities on a wider window.
        let s = 0.5_f64;
        let phi = |x: f64, mu: f64| (-(x - mu) * (x - mu) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let direct = integrate_adaptive(
            |x| {
                let (g0, g1) = (phi(x, 0.0), phi(x, 1.0));
                let f = 0.5 * g0 + 0.5 * g1;
                if f > 0.0 { (g1 - g0) * (g1 - g0) / f } else { 0.0 }
            },
            -12.0,
            13.0,
            QuadratureConfig::default(),
        )
        .unwrap();
        assert!((f.g[(0, 0)] - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn rejects_indefinite() {
        assert!(FisherMatrix::from_metric(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
    }
}
