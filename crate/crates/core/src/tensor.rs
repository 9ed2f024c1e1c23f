//! Dense tensors of partial derivatives, stored row-major.

use itertools::Itertools;

/// A dense `dim^order` array. Log-likelihood derivative tensors are symmetric
/// under index permutation; [`SymTensor::from_sorted_fn`] fills them from the
/// non-decreasing index tuples only.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    dim: usize,
    order: usize,
    data: Vec<f64>,
}

impl SymTensor {
    pub fn zeros(dim: usize, order: usize) -> Self {
        Self { dim, order, data: vec![0.0; dim.pow(order as u32)] }
    }

    /// Build a symmetric tensor by evaluating `f` on each sorted index tuple
    /// and copying the value to every permutation of it.
    pub fn from_sorted_fn<F: FnMut(&[usize]) -> f64>(dim: usize, order: usize, mut f: F) -> Self {
        let mut t = Self::zeros(dim, order);
        if order == 0 {
            t.data[0] = f(&[]);
            return t;
        }
        for idx in (0..order).map(|_| 0..dim).multi_cartesian_product() {
            if idx.windows(2).all(|w| w[0] <= w[1]) {
                let v = f(&idx);
                for perm in idx.iter().copied().permutations(order).unique() {
                    let off = t.offset(&perm);
                    t.data[off] = v;
                }
            }
        }
        t
    }

    pub fn from_vec(dim: usize, order: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim.pow(order as u32));
        Self { dim, order, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest absolute difference between an entry and any permutation of
    /// its index, relative to the entry scale.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for idx in (0..self.order).map(|_| 0..self.dim).multi_cartesian_product() {
            let v = self.get(&idx);
            for perm in idx.iter().copied().permutations(self.order) {
                let w = self.get(&perm);
                worst = worst.max((v - w).abs() / v.abs().max(w.abs()).max(1e-300));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_fill_is_symmetric() {
        let t = SymTensor::from_sorted_fn(3, 3, |i| (i[0] * 100 + i[1] * 10 + i[2]) as f64);
        assert_eq!(t.get(&[2, 0, 1]), 12.0);
        assert_eq!(t.get(&[1, 2, 0]), 12.0);
        assert_eq!(t.max_asymmetry(), 0.0);
    }
}
