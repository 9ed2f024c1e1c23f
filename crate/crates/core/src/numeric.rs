//! Small numerical kernels shared across modules: deterministic summation,
//! Gauss–Legendre quadrature and one-dimensional concave maximization.

use crate::{Error, Result};

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// slice length, so the result is reproducible bit for bit.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Kahan–Babuška (Neumaier) compensated sum.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Composite rule over `panels` equal sub-intervals of [a, b].
    pub fn composite<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut panel_sums = Vec::with_capacity(panels);
        for k in 0..panels {
            let lo = a + h * k as f64;
            let mid = lo + 0.5 * h;
            let s: f64 = self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum();
            panel_sums.push(0.5 * h * s);
        }
        pairwise_sum(&panel_sums)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Settings for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub order: usize,
    pub initial_panels: usize,
    pub max_panels: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            order: 20,
            initial_panels: 16,
            max_panels: 1 << 16,
            rel_tol: 1e-10,
        }
    }
}

/// Composite Gauss–Legendre with panel doubling until two successive
/// estimates agree to `rel_tol` relative.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: QuadratureConfig,
) -> Result<f64> {
    let rule = GaussLegendre::new(cfg.order);
    let mut panels = cfg.initial_panels.max(1);
    let mut previous = rule.composite(&mut f, a, b, panels);
    loop {
        panels *= 2;
        let current = rule.composite(&mut f, a, b, panels);
        if !current.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite quadrature estimate {current} on [{a}, {b}]"
            )));
        }
        let diff = (current - previous).abs();
        if diff <= cfg.rel_tol * current.abs() || current.abs() < 1e-300 && diff < 1e-300 {
            return Ok(current);
        }
        if panels >= cfg.max_panels {
            return Err(Error::QuadratureNonConvergence {
                panels,
                previous,
                current,
            });
        }
        previous = current;
    }
}

/// Outcome of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
    /// The maximizer sits on an end of the search interval.
    pub at_boundary: bool,
}

/// Maximize a concave function on [lo, hi]: golden-section bracketing down
/// to a coarse width, then safeguarded Newton steps until |step| < `tol`.
///
/// `eval` returns (value, first derivative, second derivative).
pub fn maximize_concave<F>(mut eval: F, lo: f64, hi: f64, tol: f64) -> Maximum
where
    F: FnMut(f64) -> (f64, f64, f64),
{
    let (f_lo, d_lo, _) = eval(lo);
    if d_lo <= 0.0 {
        return Maximum { arg: lo, value: f_lo, at_boundary: true };
    }
    let (f_hi, d_hi, _) = eval(hi);
    if d_hi >= 0.0 {
        return Maximum { arg: hi, value: f_hi, at_boundary: true };
    }

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c).0;
    let mut fd = eval(d).0;
    while b - a > 1e-4 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d).0;
        }
    }

    let mut x = 0.5 * (a + b);
    // Widen the bracket slightly so Newton can move past golden-section noise.
    let (mut left, mut right) = ((a - 1e-4).max(lo), (b + 1e-4).min(hi));
    for _ in 0..100 {
        let (_, d1, d2) = eval(x);
        if d1 > 0.0 {
            left = x;
        } else {
            right = x;
        }
        let mut next = if d2 < 0.0 { x - d1 / d2 } else { f64::NAN };
        if !(next > left && next < right) {
            next = 0.5 * (left + right);
        }
        let step = (next - x).abs();
        x = next;
        if step < tol || right - left < tol {
            break;
        }
    }
    let (value, _, _) = eval(x);
    Maximum { arg: x, value, at_boundary: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(5);
        // Degree 9 is the exactness limit of a 5-point rule.
        let mut f = |x: f64| x.powi(8) + 3.0 * x.powi(3) + 1.0;
        let got = rule.composite(&mut f, -1.0, 1.0, 1);
        assert!((got - (2.0 / 9.0 + 2.0)).abs() < 1e-14);
        let w: f64 = rule.weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_integrates_gaussian() {
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let got = integrate_adaptive(f, -12.0, 12.0, QuadratureConfig::default()).unwrap();
        assert!((got - 1.0).abs() < 1e-13);
    }

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        assert_eq!(compensated_sum([1e16, 1.0, -1e16]), 1.0);
    }

    #[test]
    fn concave_maximum_interior_and_boundary() {
        let m = maximize_concave(|x| (-(x - 0.3).powi(2), -2.0 * (x - 0.3), -2.0), 0.0, 1.0, 1e-12);
        assert!((m.arg - 0.3).abs() < 1e-10);
        assert!(!m.at_boundary);
        let m = maximize_concave(|x| (x, 1.0, 0.0), 0.0, 1.0, 1e-12);
        assert_eq!(m.arg, 1.0);
        assert!(m.at_boundary);
    }

    #[test]
    fn log_add_exp_is_stable() {
        assert!((log_add_exp(-1000.0, -1000.0) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 2.0), 2.0);
    }
}
