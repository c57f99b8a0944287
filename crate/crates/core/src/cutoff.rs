//! Smooth bump profiles, the slice cut-off `β(k) = χ(N(k∘T⁻¹(k) − f))` and
//! global perturbations `β·η_O`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffeo::smooth_step;
use crate::error::{LabError, Result};
use crate::field::SobolevIndex;
use crate::probe::ProbeReport;
use crate::sphere::{equivariant_extension, slice_projection, SectionOnSlice, SliceProjection, SliceSpec, SphereField};

/// `χ ≡ 1` on `[0, r₀]`, `χ ≡ 0` on `[r₁, ∞)`, strictly decreasing between,
/// built from the `exp(−1/x)` step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    r0: f64,
    r1: f64,
}

impl BumpProfile {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
            return Err(LabError::Construction(format!("bump radii must satisfy 0 < r0 < r1, got {r0}, {r1}")));
        }
        Ok(BumpProfile { r0, r1 })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn eval(&self, x: f64) -> f64 {
        1.0 - smooth_step((x - self.r0) / (self.r1 - self.r0)).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -smooth_step((x - self.r0) / (self.r1 - self.r0)).1 / (self.r1 - self.r0)
    }
}

/// Projection data and cut-off value at one field.
#[derive(Debug, Clone)]
pub struct CutoffValue {
    pub beta: f64,
    /// `N(k∘T⁻¹(k) − f)`.
    pub norm_power: f64,
    pub projection: SliceProjection,
}

/// `β(k)` with the projection it was computed from.
pub fn slice_cutoff_detail(
    k: &SphereField,
    spec: &SliceSpec,
    chi: &BumpProfile,
    idx: &SobolevIndex,
) -> Result<CutoffValue> {
    let projection = slice_projection(k, spec)?;
    let norm_power = projection.projected.sub(spec.center())?.norm_power(idx)?;
    Ok(CutoffValue { beta: chi.eval(norm_power), norm_power, projection })
}

/// `β(k) = χ(N_idx(k∘T⁻¹(k) − f))`.
pub fn slice_cutoff(k: &SphereField, spec: &SliceSpec, chi: &BumpProfile, idx: &SobolevIndex) -> Result<f64> {
    Ok(slice_cutoff_detail(k, spec, chi, idx)?.beta)
}

/// `β(k)`, taken as 0 when the projection fails.
pub fn slice_cutoff_or_zero(k: &SphereField, spec: &SliceSpec, chi: &BumpProfile, idx: &SobolevIndex) -> Result<f64> {
    match slice_cutoff(k, spec, chi, idx) {
        Err(LabError::ProjectionFailure(_) | LabError::DegenerateTriple(_) | LabError::OutOfNeighborhood { .. }) => {
            Ok(0.0)
        }
        other => other,
    }
}

/// `β(k)·η_O(k)`, identically zero where `β = 0`.
pub fn global_perturbation(
    k: &SphereField,
    spec: &SliceSpec,
    section: &SectionOnSlice,
    chi: &BumpProfile,
    idx: &SobolevIndex,
) -> Result<SphereField> {
    let beta = slice_cutoff(k, spec, chi, idx)?;
    if beta == 0.0 {
        return SphereField::zeros(k.grid().n(), k.dim());
    }
    Ok(equivariant_extension(section, spec, k)?.scale(beta))
}

/// Smooth random direction built from low-degree monomials in the embedding
/// coordinates, one per target component.
pub fn random_sphere_direction(n: usize, dim: usize, seed: u64) -> Result<SphereField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let monomials: Vec<[u32; 3]> = (0..=2)
        .flat_map(|i| (0..=2 - i).flat_map(move |j| (0..=2 - i - j).map(move |l| [i, j, l])))
        .collect();
    let coeffs: Vec<Vec<f64>> =
        (0..dim).map(|_| monomials.iter().map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    SphereField::from_fn(n, dim, |x| {
        let e = x.embed();
        coeffs
            .iter()
            .map(|cs| {
                cs.iter()
                    .zip(&monomials)
                    .map(|(c, m)| c * e[0].powi(m[0] as i32) * e[1].powi(m[1] as i32) * e[2].powi(m[2] as i32))
                    .sum()
            })
            .collect()
    })
}

/// First-derivative consistency of `t ↦ β(k + t v)` with `v` normalised in
/// `L_{k−drop}`: the forward-difference error `|(β(k+tv) − β(k))/t − β'|`
/// against a Richardson-extrapolated central difference `β'`.
#[allow(clippy::too_many_arguments)]
pub fn cutoff_derivative_probe(
    k: &SphereField,
    v: &SphereField,
    spec: &SliceSpec,
    chi: &BumpProfile,
    idx: &SobolevIndex,
    drop: usize,
    steps: &[f64],
    threshold: f64,
) -> Result<ProbeReport> {
    let norm_idx = idx.dropped(drop)?;
    let vn = v.norm(&norm_idx)?;
    if !(vn > 0.0) {
        return Err(LabError::InsufficientData("direction has zero norm".into()));
    }
    let v = v.scale(1.0 / vn);
    let beta = |t: f64| -> Result<f64> { slice_cutoff(&k.axpy(t, &v)?, spec, chi, idx) };
    let b0 = beta(0.0)?;
    let h = steps.iter().copied().fold(f64::INFINITY, f64::min) / 4.0;
    let central = |h: f64| -> Result<f64> { Ok((beta(h)? - beta(-h)?) / (2.0 * h)) };
    let slope = (4.0 * central(h / 2.0)? - central(h)?) / 3.0;
    let residuals = steps
        .iter()
        .map(|&t| Ok(((beta(t)? - b0) / t - slope).abs()))
        .collect::<Result<Vec<_>>>()?;
    ProbeReport::new(steps.to_vec(), residuals, &norm_idx, k.grid().n(), threshold)
}
