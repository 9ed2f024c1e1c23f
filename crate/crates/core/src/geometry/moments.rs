//! Monte-Carlo estimation of expectations of products of log-likelihood
//! derivatives and their metric contractions L11…L26.

use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;

use super::FisherMatrix;
use crate::models::{ModelFamily, ParamPoint};
use crate::numeric::pairwise_sum;
use crate::rng::substream;
use crate::{Error, Result};

pub const DEFAULT_MC_SAMPLES: usize = 100_000;
pub const JACKKNIFE_BLOCKS: usize = 100;
const MIN_MC_SAMPLES: usize = 1_000;

/// Expectations of derivative products, each stored as a dense row-major
/// array over the parameter indices. Notation: `lᵢ = ∂ᵢ log f`,
/// `lᵢⱼ = ∂ᵢ∂ⱼ log f`, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMoments {
    p: usize,
    data: Vec<f64>,
}

/// Segment order inside [`RawMoments::data`] and the tensor order of each.
const SEGMENT_ORDERS: [u32; 9] = [2, 2, 3, 3, 3, 4, 4, 4, 4];

impl RawMoments {
    fn zeros(p: usize) -> Self {
        let len = SEGMENT_ORDERS.iter().map(|&r| p.pow(r)).sum();
        Self { p, data: vec![0.0; len] }
    }

    fn segment(&self, which: usize) -> &[f64] {
        let start: usize = SEGMENT_ORDERS[..which].iter().map(|&r| self.p.pow(r)).sum();
        &self.data[start..start + self.p.pow(SEGMENT_ORDERS[which])]
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// `L_(ij) = E[lᵢⱼ]`
    pub fn l_ij_paren(&self) -> &[f64] {
        self.segment(0)
    }
    /// `L_ij = E[lᵢ lⱼ]`
    pub fn l_ij(&self) -> &[f64] {
        self.segment(1)
    }
    /// `L_(ijk) = E[lᵢⱼₖ]`
    pub fn l_ijk_paren(&self) -> &[f64] {
        self.segment(2)
    }
    /// `L_(ij)k = E[lᵢⱼ lₖ]`
    pub fn l_ij_k(&self) -> &[f64] {
        self.segment(3)
    }
    /// `L_ijk = E[lᵢ lⱼ lₖ]`
    pub fn l_ijk(&self) -> &[f64] {
        self.segment(4)
    }
    /// `L_(ij)(kl) = E[lᵢⱼ lₖₗ]`
    pub fn l_ij_kl_paren(&self) -> &[f64] {
        self.segment(5)
    }
    /// `L_(ijk)l = E[lᵢⱼₖ lₗ]`
    pub fn l_ijk_l(&self) -> &[f64] {
        self.segment(6)
    }
    /// `L_(ij)kl = E[lᵢⱼ lₖ lₗ]`
    pub fn l_ij_k_l(&self) -> &[f64] {
        self.segment(7)
    }
    /// `L_ijkl = E[lᵢ lⱼ lₖ lₗ]`
    pub fn l_ijkl(&self) -> &[f64] {
        self.segment(8)
    }

    /// Adds the products at one draw.
    fn accumulate(&mut self, l1: &[f64], l2: &[f64], l3: &[f64]) {
        let p = self.p;
        let mut out = self.data.iter_mut();
        let mut push = |v: f64| *out.next().expect("layout") += v;
        for &v in l2 {
            push(v);
        }
        for i in 0..p {
            for j in 0..p {
                push(l1[i] * l1[j]);
            }
        }
        for &v in l3 {
            push(v);
        }
        for &a in l2 {
            for &k in l1 {
                push(a * k);
            }
        }
        for i in 0..p {
            for j in 0..p {
                let ij = l1[i] * l1[j];
                for &k in l1 {
                    push(ij * k);
                }
            }
        }
        for &a in l2 {
            for &b in l2 {
                push(a * b);
            }
        }
        for &a in l3 {
            for &k in l1 {
                push(a * k);
            }
        }
        for &a in l2 {
            for &k in l1 {
                for &l in l1 {
                    push(a * k * l);
                }
            }
        }
        for i in 0..p {
            for j in 0..p {
                let ij = l1[i] * l1[j];
                for k in 0..p {
                    let ijk = ij * l1[k];
                    for &l in l1 {
                        push(ijk * l);
                    }
                }
            }
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        Self { p: self.p, data: self.data.iter().map(|v| v * factor).collect() }
    }

    fn minus(&self, other: &Self) -> Self {
        Self { p: self.p, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    /// Metric estimate `−E[lᵢⱼ]`, symmetrized.
    fn fisher_estimate(&self) -> DMatrix<f64> {
        let m = DMatrix::from_row_slice(self.p, self.p, self.l_ij_paren());
        -0.5 * (&m + m.transpose())
    }
}

/// Where the metric used in the contractions came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherSource {
    Analytic,
    MonteCarlo,
}

/// The contracted scalars L11…L15 and L21…L26.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LScalars {
    pub l11: f64,
    pub l12: f64,
    pub l13: f64,
    pub l14: f64,
    pub l15: f64,
    pub l21: f64,
    pub l22: f64,
    pub l23: f64,
    pub l24: f64,
    pub l25: f64,
    pub l26: f64,
}

impl LScalars {
    pub const NAMES: [&'static str; 11] =
        ["L11", "L12", "L13", "L14", "L15", "L21", "L22", "L23", "L24", "L25", "L26"];

    pub fn to_array(&self) -> [f64; 11] {
        [
            self.l11, self.l12, self.l13, self.l14, self.l15, self.l21, self.l22, self.l23, self.l24,
            self.l25, self.l26,
        ]
    }

    pub fn from_array(a: [f64; 11]) -> Self {
        let [l11, l12, l13, l14, l15, l21, l22, l23, l24, l25, l26] = a;
        Self { l11, l12, l13, l14, l15, l21, l22, l23, l24, l25, l26 }
    }

    /// Contracts raw moments with `g^{ij}`. Each contraction is computed in a
    /// whitened basis: with `g⁻¹ = W Wᵀ`, `g^{ij} Xᵢ Yⱼ = Σₐ (WᵀX)ₐ (WᵀY)ₐ`.
    pub fn from_raw(raw: &RawMoments, g_inv: &DMatrix<f64>) -> Result<Self> {
        let p = raw.dim();
        let w = Cholesky::new(g_inv.clone())
            .ok_or_else(|| Error::Numeric("inverse metric is not positive definite".into()))?
            .l();
        let a = whiten(raw.l_ij_k(), p, 3, &w);
        let t = whiten(raw.l_ijk(), p, 3, &w);
        let b = whiten(raw.l_ij_k_l(), p, 4, &w);
        let c = whiten(raw.l_ij_kl_paren(), p, 4, &w);
        let q = whiten(raw.l_ijkl(), p, 4, &w);

        let i3 = |x: usize, y: usize, z: usize| (x * p + y) * p + z;
        let i4 = |x: usize, y: usize, z: usize, u: usize| ((x * p + y) * p + z) * p + u;
        let (mut l11, mut l12, mut l13, mut l14, mut l15) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for x in 0..p {
            for y in 0..p {
                l11 += b[i4(x, y, x, y)];
                l12 += b[i4(x, x, y, y)];
                l13 += q[i4(x, x, y, y)];
                l14 += c[i4(x, y, x, y)];
                l15 += c[i4(x, x, y, y)];
            }
        }
        let l21 = a.iter().zip(&t).map(|(u, v)| u * v).sum();
        let l23 = t.iter().map(|v| v * v).sum();
        let l25 = a.iter().map(|v| v * v).sum();
        // Partial traces: over the first two slots, or over the last two.
        let a_tr: Vec<f64> = (0..p).map(|k| (0..p).map(|x| a[i3(x, x, k)]).sum()).collect();
        let t_tr12: Vec<f64> = (0..p).map(|k| (0..p).map(|x| t[i3(x, x, k)]).sum()).collect();
        let t_tr23: Vec<f64> = (0..p).map(|k| (0..p).map(|x| t[i3(k, x, x)]).sum()).collect();
        let l22 = a_tr.iter().zip(&t_tr23).map(|(u, v)| u * v).sum();
        let l24 = t_tr12.iter().zip(&t_tr23).map(|(u, v)| u * v).sum();
        let l26 = a_tr.iter().map(|v| v * v).sum();
        Ok(Self { l11, l12, l13, l14, l15, l21, l22, l23, l24, l25, l26 })
    }
}

/// Applies `Wᵀ` along every axis of an order-`r` tensor.
fn whiten(data: &[f64], p: usize, order: u32, w: &DMatrix<f64>) -> Vec<f64> {
    let mut cur = data.to_vec();
    let mut next = vec![0.0; cur.len()];
    for axis in 0..order {
        let stride = p.pow(order - 1 - axis);
        for (off, slot) in next.iter_mut().enumerate() {
            let a = (off / stride) % p;
            let base = off - a * stride;
            *slot = (0..p).map(|i| w[(i, a)] * cur[base + i * stride]).sum();
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Monte-Carlo L-moments with delete-one-block jackknife standard errors.
#[derive(Debug, Clone)]
pub struct LMoments {
    pub mc_count: usize,
    pub raw: RawMoments,
    pub fisher: FisherMatrix,
    pub fisher_source: FisherSource,
    pub scalars: LScalars,
    pub std_errors: LScalars,
    /// Scalars recomputed with each block left out, in block order.
    pub replicates: Vec<LScalars>,
    block_sums: Vec<RawMoments>,
    block_counts: Vec<usize>,
}

impl LMoments {
    pub fn dim(&self) -> usize {
        self.raw.dim()
    }

    /// Estimate and jackknife standard error of any functional of the raw
    /// moments and the metric in use.
    pub fn jackknife<F>(&self, f: F) -> Result<(f64, f64)>
    where
        F: Fn(&RawMoments, &FisherMatrix) -> Result<f64>,
    {
        let estimate = f(&self.raw, &self.fisher)?;
        let loo: Vec<f64> = self
            .leave_one_out()
            .map(|(raw, fisher)| f(&raw, &fisher?))
            .collect::<Result<_>>()?;
        Ok((estimate, jackknife_se(&loo)))
    }

    /// Jackknife standard error of a functional of the contracted scalars.
    pub fn scalar_se<F: Fn(&LScalars) -> f64>(&self, f: F) -> f64 {
        let loo: Vec<f64> = self.replicates.iter().map(f).collect();
        jackknife_se(&loo)
    }

    fn leave_one_out(&self) -> impl Iterator<Item = (RawMoments, Result<FisherMatrix>)> + '_ {
        let total_sum = self.raw.scaled(self.mc_count as f64);
        self.block_sums.iter().zip(&self.block_counts).map(move |(block, &count)| {
            let raw = total_sum.minus(block).scaled(1.0 / (self.mc_count - count) as f64);
            let fisher = match self.fisher_source {
                FisherSource::Analytic => Ok(self.fisher.clone()),
                FisherSource::MonteCarlo => FisherMatrix::from_metric(raw.fisher_estimate()),
            };
            (raw, fisher)
        })
    }
}

fn jackknife_se(loo: &[f64]) -> f64 {
    let b = loo.len() as f64;
    let mean = pairwise_sum(loo) / b;
    let ss: Vec<f64> = loo.iter().map(|v| (v - mean) * (v - mean)).collect();
    ((b - 1.0) / b * pairwise_sum(&ss)).sqrt()
}

/// Draws `mc_samples` observations at θ in [`JACKKNIFE_BLOCKS`] blocks (block
/// `b` uses substream `(seed, b)`), averages the derivative products and
/// contracts them with `g⁻¹`. The metric is the family's exact one when it
/// exists, else the estimate `−E[lᵢⱼ]`. Results do not depend on the number
/// of worker threads.
pub fn estimate_l_moments<M: ModelFamily>(
    model: &M,
    theta: &ParamPoint,
    mc_samples: usize,
    seed: u64,
) -> Result<LMoments> {
    if mc_samples < MIN_MC_SAMPLES {
        return Err(Error::invalid(format!(
            "mc_samples must be at least {MIN_MC_SAMPLES}, got {mc_samples}"
        )));
    }
    if !model.domain_check(theta) {
        return Err(Error::invalid(format!("θ = {:?} is not interior", theta.coords())));
    }
    let p = model.param_dim();
    let blocks = JACKKNIFE_BLOCKS;
    let block_counts: Vec<usize> =
        (0..blocks).map(|b| mc_samples / blocks + usize::from(b < mc_samples % blocks)).collect();

    let block_sums: Vec<RawMoments> = block_counts
        .par_iter()
        .enumerate()
        .map(|(b, &count)| {
            let mut rng = substream(seed, b as u64);
            let draws = model.sample_with(theta, count, &mut rng)?;
            let mut sums = RawMoments::zeros(p);
            for x in &draws {
                let stack = model.derivative_stack(x, theta, 3)?;
                if !stack.tensors.iter().all(|t| t.all_finite()) {
                    return Err(Error::NonFiniteDerivative { observation: format!("{x:?}") });
                }
                sums.accumulate(stack.order(1).as_slice(), stack.order(2).as_slice(), stack.order(3).as_slice());
            }
            Ok(sums)
        })
        .collect::<Result<_>>()?;

    let mut total = RawMoments::zeros(p);
    for (idx, slot) in total.data.iter_mut().enumerate() {
        let column: Vec<f64> = block_sums.iter().map(|s| s.data[idx]).collect();
        *slot = pairwise_sum(&column);
    }
    let raw = total.scaled(1.0 / mc_samples as f64);

    let (fisher, fisher_source) = match model.exact_fisher(theta)? {
        Some(g) => (FisherMatrix::from_metric(g)?, FisherSource::Analytic),
        None => (FisherMatrix::from_metric(raw.fisher_estimate())?, FisherSource::MonteCarlo),
    };
    let scalars = LScalars::from_raw(&raw, &fisher.g_inv)?;

    let mut out = LMoments {
        mc_count: mc_samples,
        raw,
        fisher,
        fisher_source,
        scalars,
        std_errors: LScalars::default(),
        replicates: Vec::new(),
        block_sums,
        block_counts,
    };
    out.replicates = out
        .leave_one_out()
        .map(|(raw, fisher)| LScalars::from_raw(&raw, &fisher?.g_inv))
        .collect::<Result<_>>()?;
    let mut se = [0.0; 11];
    for (k, slot) in se.iter_mut().enumerate() {
        *slot = out.scalar_se(|s| s.to_array()[k]);
    }
    out.std_errors = LScalars::from_array(se);
    Ok(out)
}
