//! Partitions of unity `{α_i}`, `{β_i}` on the torus and the localize and
//! assemble operators `I_α(ξ) = (α_i ξ)_i`, `J_β(η) = Σ_i β_i η_i`.
//!
//! Pieces are tensor products of periodic partitions along each axis. Along an
//! axis with `m` pieces of spacing `s = 2π/m`, piece `i` is centred at `i s`
//! with `V = (−0.6s, 0.6s)`, `V' = [−0.7s, 0.7s]` and `U = (−0.8s, 0.8s)`.

use std::f64::consts::PI;

use crate::diffeo::families::{periodic_delta, smooth_step};
use crate::error::{LabError, Result};
use crate::field::DiscreteField;
use crate::grid::GridSpec;

/// Weights `α_i`, `β_i` with `Σ α_i = 1` and `β_i = 1` on `supp α_i`.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    grid: GridSpec,
    layout: [usize; 2],
    alpha: Vec<DiscreteField>,
    beta: Vec<DiscreteField>,
}

fn bump(d: f64, w: f64) -> f64 {
    let t = d / w;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// `(α_i(x), β_i(x))` for the `m` pieces along one axis.
fn axis_weights(m: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    if m == 1 {
        return (vec![1.0], vec![1.0]);
    }
    let s = 2.0 * PI / m as f64;
    let deltas: Vec<f64> = (0..m).map(|i| periodic_delta(x, i as f64 * s)).collect();
    let omega: Vec<f64> = deltas.iter().map(|d| bump(*d, 0.6 * s)).collect();
    let total: f64 = omega.iter().sum();
    let alpha = omega.iter().map(|w| w / total).collect();
    let beta = deltas
        .iter()
        .map(|d| 1.0 - smooth_step((d.abs() - 0.7 * s) / (0.1 * s)).0)
        .collect();
    (alpha, beta)
}

fn layout_for(l: usize) -> [usize; 2] {
    let m2 = (1..=l).filter(|d| l.is_multiple_of(*d) && d * d <= l).max().unwrap_or(1);
    [l / m2, m2]
}

impl PartitionOfUnity {
    /// `l` pieces laid out as an `m₁ × m₂` tensor grid with `m₁ m₂ = l`,
    /// `m₂ <= m₁` as large as possible (so `l = 2` is `2 × 1`, `l = 4` is `2 × 2`).
    pub fn new(grid: GridSpec, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(LabError::Config("partition needs at least one piece".into()));
        }
        if !grid.is_torus() {
            return Err(LabError::GridMismatch("partitions of unity live on the torus".into()));
        }
        let layout = layout_for(l);
        let points = grid.points();
        let per_axis: Vec<[(Vec<f64>, Vec<f64>); 2]> = points
            .iter()
            .map(|x| [axis_weights(layout[0], x[0]), axis_weights(layout[1], x[1])])
            .collect();
        let mut alpha = Vec::with_capacity(l);
        let mut beta = Vec::with_capacity(l);
        for i2 in 0..layout[1] {
            for i1 in 0..layout[0] {
                let a: Vec<f64> = per_axis.iter().map(|w| w[0].0[i1] * w[1].0[i2]).collect();
                let b: Vec<f64> = per_axis.iter().map(|w| w[0].1[i1] * w[1].1[i2]).collect();
                alpha.push(DiscreteField::from_values(grid, 1, a)?);
                beta.push(DiscreteField::from_values(grid, 1, b)?);
            }
        }
        Ok(PartitionOfUnity { grid, layout, alpha, beta })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn layout(&self) -> [usize; 2] {
        self.layout
    }

    pub fn alpha(&self) -> &[DiscreteField] {
        &self.alpha
    }

    pub fn beta(&self) -> &[DiscreteField] {
        &self.beta
    }
}

/// `I_α(ξ) = (α₁ξ, …, α_l ξ)`.
pub fn partition_localize(xi: &DiscreteField, pou: &PartitionOfUnity) -> Result<Vec<DiscreteField>> {
    xi.grid().ensure_same(pou.grid())?;
    pou.alpha.iter().map(|a| xi.mul_scalar_field(a)).collect()
}

/// `J_β(η₁, …, η_l) = Σ_i β_i η_i`.
pub fn partition_assemble(pieces: &[DiscreteField], pou: &PartitionOfUnity) -> Result<DiscreteField> {
    if pieces.len() != pou.len() {
        return Err(LabError::Shape(format!(
            "{} pieces for a partition of {}",
            pieces.len(),
            pou.len()
        )));
    }
    let mut out = DiscreteField::zeros(*pou.grid(), pieces[0].dim());
    for (p, b) in pieces.iter().zip(&pou.beta) {
        out = out.add(&p.mul_scalar_field(b)?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::synth_field;

    #[test]
    fn layouts() {
        assert_eq!(layout_for(1), [1, 1]);
        assert_eq!(layout_for(2), [2, 1]);
        assert_eq!(layout_for(4), [2, 2]);
        assert_eq!(layout_for(6), [3, 2]);
    }

    #[test]
    fn partition_identities() {
        let g = GridSpec::torus(64).unwrap();
        for l in [1, 2, 4, 6] {
            let pou = PartitionOfUnity::new(g, l).unwrap();
            assert_eq!(pou.len(), l);
            let mut sum = DiscreteField::zeros(g, 1);
            for (a, b) in pou.alpha().iter().zip(pou.beta()) {
                sum = sum.add(a).unwrap();
                let ba = a.mul_scalar_field(b).unwrap();
                assert_eq!(ba.max_abs_diff(a).unwrap(), 0.0);
            }
            assert!(sum.max_abs_diff(&DiscreteField::constant(g, &[1.0])).unwrap() < 1e-15);
            let xi = synth_field(3.0, l as u64, g, 3).unwrap();
            let back = partition_assemble(&partition_localize(&xi, &pou).unwrap(), &pou).unwrap();
            assert!(back.max_abs_diff(&xi).unwrap() < 1e-12);
        }
    }

    #[test]
    fn assemble_checks_length() {
        let g = GridSpec::torus(16).unwrap();
        let pou = PartitionOfUnity::new(g, 2).unwrap();
        let z = DiscreteField::zeros(g, 1);
        assert!(partition_assemble(&[z], &pou).is_err());
    }
}
