//! Sections over the slice and their equivariant extension to the orbit.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::SobolevIndex;
use crate::sphere::field::SphereField;
use crate::sphere::slice::{slice_projection, SliceSpec};

/// Largest relative Chebyshev tail admitted by [`constant_section`].
pub const WITNESS_BAND_TOLERANCE: f64 = 1e-10;
/// Largest relative change of the `L_{k+m}` norm under grid doubling.
pub const WITNESS_REFINEMENT_TOLERANCE: f64 = 0.05;

/// Regularity witness for the extension data of a section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityWitness {
    pub m: usize,
    /// `‖ξ‖_{k+m,p}` on the section's grid.
    pub norm: f64,
    /// The same norm after resampling on the doubled grid.
    pub refined_norm: f64,
    /// `|refined_norm − norm| / norm`.
    pub drift: f64,
    pub high_band_ratio: f64,
}

type SectionMap = dyn Fn(&SphereField) -> Result<SphereField> + Send + Sync;

/// The trivialization representative `[η]` of a section over the slice,
/// with optional extension data.
#[derive(Clone)]
pub struct SectionOnSlice {
    eval: Arc<SectionMap>,
    witness: Option<RegularityWitness>,
}

impl fmt::Debug for SectionOnSlice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SectionOnSlice").field("witness", &self.witness).finish_non_exhaustive()
    }
}

impl SectionOnSlice {
    pub fn new<F>(eval: F) -> Self
    where
        F: Fn(&SphereField) -> Result<SphereField> + Send + Sync + 'static,
    {
        SectionOnSlice { eval: Arc::new(eval), witness: None }
    }

    pub fn with_witness(mut self, witness: RegularityWitness) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn witness(&self) -> Option<&RegularityWitness> {
        self.witness.as_ref()
    }

    /// `[η](h)`.
    pub fn eval(&self, h: &SphereField) -> Result<SphereField> {
        (self.eval)(h)
    }

    /// `[η](h) + s·[ζ](h)`.
    pub fn combine(&self, s: f64, other: &SectionOnSlice) -> SectionOnSlice {
        let (a, b) = (Arc::clone(&self.eval), Arc::clone(&other.eval));
        SectionOnSlice::new(move |h| a(h)?.axpy(s, &b(h)?))
    }
}

/// The constant section `[ξ](h) = ξ₀` with its `L_{k+m}` regularity witness.
pub fn constant_section(xi0: SphereField, m: usize, idx: &SobolevIndex) -> Result<SectionOnSlice> {
    let high_band_ratio = xi0.high_band_ratio();
    if !(high_band_ratio < WITNESS_BAND_TOLERANCE) {
        return Err(LabError::WitnessFailure(format!(
            "Chebyshev tail ratio {high_band_ratio:.3e} exceeds {WITNESS_BAND_TOLERANCE:.0e}"
        )));
    }
    let raised = SobolevIndex::unchecked(idx.k() + m, idx.p())?;
    let norm = xi0.norm(&raised)?;
    let refined_norm = xi0.resample(2 * xi0.grid().n())?.norm(&raised)?;
    let drift = if norm == 0.0 { refined_norm.abs() } else { (refined_norm - norm).abs() / norm };
    if !(norm.is_finite() && drift <= WITNESS_REFINEMENT_TOLERANCE) {
        return Err(LabError::WitnessFailure(format!(
            "L_{{{}}} norm {norm:.6e} changes to {refined_norm:.6e} under refinement",
            raised.k()
        )));
    }
    let witness = RegularityWitness { m, norm, refined_norm, drift, high_band_ratio };
    Ok(SectionOnSlice::new(move |_| Ok(xi0.clone())).with_witness(witness))
}

/// `η_O(k) = [η](k∘T⁻¹(k))∘T(k)`, computed as the chain
/// `k ↦ (T⁻¹(k), k) ↦ (T(k), k∘T⁻¹(k)) ↦ (T(k), [η](k∘T⁻¹(k))) ↦ [η](k∘T⁻¹(k))∘T(k)`.
pub fn equivariant_extension(section: &SectionOnSlice, spec: &SliceSpec, k: &SphereField) -> Result<SphereField> {
    let projection = slice_projection(k, spec)?;
    let t = projection.gamma_inv.inverse();
    let value = section.eval(&projection.projected)?;
    value.compose_mobius(&t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::field::standard_center;
    use crate::sphere::mobius::MobiusElement;
    use num_complex::Complex64;

    fn xi0(n: usize) -> SphereField {
        SphereField::from_fn(n, 4, |x| {
            let e = x.embed();
            vec![e[0] * e[1], 1.0 + e[2], e[0] - 0.5 * e[1] * e[2], 0.25]
        })
        .unwrap()
    }

    #[test]
    fn zero_section_extends_to_zero() {
        let f = standard_center(64).unwrap();
        let spec = SliceSpec::transverse_normal(f.clone()).unwrap();
        let idx = SobolevIndex::new(2, 4.0).unwrap();
        let zero = constant_section(SphereField::zeros(64, 4).unwrap(), 1, &idx).unwrap();
        let g = MobiusElement::exp([Complex64::new(0.01, 0.0), Complex64::new(0.0, 0.01), Complex64::new(0.005, 0.0)], 1.0);
        let out = equivariant_extension(&zero, &spec, &f.compose_mobius(&g).unwrap()).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn constant_section_witness_and_equivariance() {
        let idx = SobolevIndex::new(2, 4.0).unwrap();
        let section = constant_section(xi0(64), 1, &idx).unwrap();
        let w = section.witness().unwrap();
        assert!(w.drift <= WITNESS_REFINEMENT_TOLERANCE, "{w:?}");
        let f = standard_center(64).unwrap();
        let spec = SliceSpec::transverse_normal(f.clone()).unwrap();
        assert_eq!(equivariant_extension(&section, &spec, &f).unwrap(), xi0(64));
        let h = MobiusElement::exp([Complex64::new(0.0, 0.01), Complex64::new(0.008, 0.0), Complex64::new(0.0, -0.006)], 1.0);
        let g = MobiusElement::exp([Complex64::new(0.004, 0.002), Complex64::new(0.0, 0.01), Complex64::new(-0.01, 0.0)], 1.0);
        let k = f.compose_mobius(&h).unwrap();
        let lhs = equivariant_extension(&section, &spec, &k.compose_mobius(&g).unwrap()).unwrap();
        let rhs = equivariant_extension(&section, &spec, &k).unwrap().compose_mobius(&g).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-6);
    }

    #[test]
    fn rough_section_fails_witness() {
        let idx = SobolevIndex::new(2, 4.0).unwrap();
        let rough = SphereField::from_fn(64, 1, |x| vec![x.embed()[0].abs()]).unwrap();
        assert!(matches!(constant_section(rough, 1, &idx), Err(LabError::WitnessFailure(_))));
    }
}
