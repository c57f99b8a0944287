//! Sampled vector-valued fields and Sobolev indices.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::GridSpec;

/// Samples of a map `Σ → ℝ^dim` on a structured grid.
///
/// Values are stored component-major: component `c` occupies
/// `values[c * nodes .. (c + 1) * nodes]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    grid: GridSpec,
    dim: usize,
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(grid: GridSpec, dim: usize) -> Self {
        assert!(dim > 0, "target dimension must be positive");
        DiscreteField {
            grid,
            dim,
            values: vec![0.0; dim * grid.node_count()],
        }
    }

    pub fn constant(grid: GridSpec, value: &[f64]) -> Self {
        let mut f = DiscreteField::zeros(grid, value.len());
        for (c, v) in value.iter().enumerate() {
            f.component_mut(c).iter_mut().for_each(|x| *x = *v);
        }
        f
    }

    /// Component-major values; length must be `dim * node_count`.
    pub fn from_values(grid: GridSpec, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() != dim * grid.node_count() {
            return Err(LabError::Shape(format!(
                "expected {} values for dim {dim}, got {}",
                dim * grid.node_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvariantViolation("non-finite field value".into()));
        }
        Ok(DiscreteField { grid, dim, values })
    }

    pub fn from_components(grid: GridSpec, components: Vec<Vec<f64>>) -> Result<Self> {
        let dim = components.len();
        let values = components.into_iter().flatten().collect();
        DiscreteField::from_values(grid, dim, values)
    }

    /// Samples `f` at every grid node.
    pub fn from_fn<F>(grid: GridSpec, dim: usize, f: F) -> Self
    where
        F: Fn([f64; 2]) -> Vec<f64>,
    {
        let nodes = grid.node_count();
        let mut values = vec![0.0; dim * nodes];
        for idx in 0..nodes {
            let v = f(grid.point(idx));
            assert_eq!(v.len(), dim, "sampler returned wrong dimension");
            for (c, x) in v.into_iter().enumerate() {
                values[c * nodes + idx] = x;
            }
        }
        DiscreteField { grid, dim, values }
    }

    pub fn scalar_from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn([f64; 2]) -> f64,
    {
        DiscreteField::from_fn(grid, 1, |x| vec![f(x)])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.node_count();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.node_count();
        &mut self.values[c * n..(c + 1) * n]
    }

    pub fn components(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.node_count())
    }

    pub fn node_value(&self, idx: usize) -> Vec<f64> {
        (0..self.dim).map(|c| self.component(c)[idx]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_compatible(&self, other: &DiscreteField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.dim != other.dim {
            return Err(LabError::Shape(format!(
                "target dimension {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &DiscreteField) -> Result<DiscreteField> {
        self.ensure_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + s * b)
            .collect();
        Ok(DiscreteField {
            grid: self.grid,
            dim: self.dim,
            values,
        })
    }

    pub fn add(&self, other: &DiscreteField) -> Result<DiscreteField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &DiscreteField) -> Result<DiscreteField> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> DiscreteField {
        self.map(|v| s * v)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> DiscreteField {
        DiscreteField {
            grid: self.grid,
            dim: self.dim,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product with a scalar field on the same grid.
    pub fn mul_scalar_field(&self, weight: &DiscreteField) -> Result<DiscreteField> {
        self.grid.ensure_same(weight.grid())?;
        if weight.dim != 1 {
            return Err(LabError::Shape("weight must be scalar".into()));
        }
        let w = weight.component(0);
        let mut out = self.clone();
        for c in 0..self.dim {
            out.component_mut(c)
                .iter_mut()
                .zip(w)
                .for_each(|(v, s)| *v *= s);
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &DiscreteField) -> Result<f64> {
        self.ensure_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Discrete L² inner product `Σ_nodes w ⟨f, g⟩`.
    pub fn l2_inner(&self, other: &DiscreteField) -> Result<f64> {
        self.ensure_compatible(other)?;
        let w = self.grid.weights();
        let n = self.node_count();
        let mut acc = 0.0;
        for c in 0..self.dim {
            let (a, b) = (self.component(c), other.component(c));
            for i in 0..n {
                acc += w[i] * a[i] * b[i];
            }
        }
        Ok(acc)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_inner(self).map(f64::sqrt).unwrap_or(0.0)
    }
}

/// Sobolev index `(k, p)` with the derived smoothness degree `m₀ = ⌊k − 2/p⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    k: usize,
    p: f64,
}

impl SobolevIndex {
    /// Requires `p > 2` and `m₀ >= 1`.
    pub fn new(k: usize, p: f64) -> Result<Self> {
        let idx = SobolevIndex::unchecked(k, p)?;
        if p <= 2.0 {
            return Err(LabError::Index(format!("exponent p = {p} must exceed 2")));
        }
        if idx.m0() < 1 {
            return Err(LabError::Index(format!(
                "m0 = floor(k - 2/p) must be >= 1 (k = {k}, p = {p})"
            )));
        }
        Ok(idx)
    }

    /// Any `p >= 1` and any `k`; used for the Hilbert case `p = 2` and for
    /// low-order norms inside the verification harness.
    pub fn unchecked(k: usize, p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(LabError::Index(format!("exponent p = {p} must be >= 1")));
        }
        Ok(SobolevIndex { k, p })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m0(&self) -> i64 {
        (self.k as f64 - 2.0 / self.p).floor() as i64
    }

    /// Index of the space after dropping `m` derivatives; checks `k - m - 2/p > 0`.
    pub fn dropped(&self, m: usize) -> Result<SobolevIndex> {
        if m > self.k {
            return Err(LabError::Index(format!("drop {m} exceeds k = {}", self.k)));
        }
        Ok(SobolevIndex {
            k: self.k - m,
            p: self.p,
        })
    }

    /// Checks the embedding condition `k − m − 2/p > 0`.
    pub fn check_drop(&self, m: usize) -> Result<()> {
        if self.k as f64 - m as f64 - 2.0 / self.p <= 0.0 {
            return Err(LabError::Index(format!(
                "k - m - 2/p must be positive (k = {}, m = {m}, p = {})",
                self.k, self.p
            )));
        }
        Ok(())
    }

    /// The even exponent as an integer, or an unsupported-exponent error.
    pub fn even_exponent(&self) -> Result<u32> {
        let p = self.p;
        if p.fract() != 0.0 || p < 2.0 || !(p as u64).is_multiple_of(2) {
            return Err(LabError::UnsupportedExponent(p));
        }
        Ok(p as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_invariants() {
        let idx = SobolevIndex::new(3, 4.0).unwrap();
        assert_eq!(idx.m0(), 2);
        assert!(SobolevIndex::new(1, 2.0).is_err());
        assert!(SobolevIndex::new(1, 4.0).is_err()); // m0 = 0
        assert!(idx.check_drop(2).is_ok());
        assert!(idx.check_drop(3).is_err());
        assert!(idx.dropped(4).is_err());
        assert_eq!(idx.even_exponent().unwrap(), 4);
        assert!(SobolevIndex::unchecked(2, 3.0).unwrap().even_exponent().is_err());
    }

    #[test]
    fn rejects_nonfinite_values() {
        let g = GridSpec::torus(16).unwrap();
        let mut v = vec![0.0; 256];
        v[3] = f64::NAN;
        assert!(DiscreteField::from_values(g, 1, v).is_err());
        assert!(DiscreteField::from_values(g, 2, vec![0.0; 256]).is_err());
    }
}
