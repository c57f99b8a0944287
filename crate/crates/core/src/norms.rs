//! Sobolev norms `‖ξ‖_{k,p} = (Σ_{i≤k} ∫ |∇^i ξ|^p)^{1/p}`, their even-`p`
//! powers with exact gradients, and the multilinear pieces those powers
//! factor through.
//!
//! `|∇^i ξ|` is the Frobenius norm of the full order-`i` derivative tensor.
//! Mixed partials with `α₁` derivatives along `x₁` appear `C(i, α₁)` times in
//! that tensor, so the flattened tensor stores them scaled by `sqrt(C(i, α₁))`.

use crate::error::{LabError, Result};
use crate::field::{DiscreteField, SobolevIndex};
use crate::grid::Domain;
use crate::spectral::{chart_derivative, TorusSpectrum};

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// All partial derivatives `∂₁^{a}∂₂^{i-a} f` for `i <= order`, indexed by
/// `i` then `a`.
pub(crate) fn partials_up_to(f: &DiscreteField, order: usize) -> Result<Vec<Vec<DiscreteField>>> {
    match f.grid().domain() {
        Domain::Torus => {
            let spectrum = TorusSpectrum::new(f)?;
            (0..=order)
                .map(|i| {
                    (0..=i)
                        .map(|a| {
                            let comps = (0..f.dim())
                                .map(|c| spectrum.node_derivative(c, [a, i - a], [0.0, 0.0]))
                                .collect();
                            DiscreteField::from_components(*f.grid(), comps)
                        })
                        .collect()
                })
                .collect()
        }
        Domain::SpherePair => (0..=order)
            .map(|i| (0..=i).map(|a| chart_derivative(f, [a, i - a])).collect())
            .collect(),
    }
}

/// The order-`i` derivative tensor flattened into a field of dimension
/// `dim * (i + 1)` whose pointwise Euclidean norm is `|∇^i f|`.
pub fn derivative_tensor(f: &DiscreteField, i: usize) -> Result<DiscreteField> {
    let partials = partials_up_to(f, i)?;
    Ok(flatten_tensor(&partials[i], i))
}

fn flatten_tensor(partials: &[DiscreteField], i: usize) -> DiscreteField {
    let grid = *partials[0].grid();
    let comps: Vec<Vec<f64>> = partials
        .iter()
        .enumerate()
        .flat_map(|(a, d)| {
            let s = binomial(i, a).sqrt();
            d.components()
                .map(move |c| c.iter().map(|v| s * v).collect::<Vec<f64>>())
                .collect::<Vec<_>>()
        })
        .collect();
    DiscreteField::from_components(grid, comps).expect("tensor shape is consistent")
}

/// Pointwise `|∇^i f|²` for `i = 0..=order`.
fn tensor_sq_norms(f: &DiscreteField, order: usize) -> Result<Vec<Vec<f64>>> {
    let partials = partials_up_to(f, order)?;
    let n = f.node_count();
    Ok(partials
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut acc = vec![0.0; n];
            for (a, d) in row.iter().enumerate() {
                let w = binomial(i, a);
                for comp in d.components() {
                    for (s, v) in acc.iter_mut().zip(comp) {
                        *s += w * v * v;
                    }
                }
            }
            acc
        })
        .collect())
}

/// `Σ_{i≤order} Σ_nodes weight · |∇^i f|^p` for an arbitrary real `p`.
pub(crate) fn weighted_norm_power(f: &DiscreteField, order: usize, p: f64, weights: &[f64]) -> Result<f64> {
    let sq = tensor_sq_norms(f, order)?;
    let half = p / 2.0;
    Ok(sq
        .iter()
        .map(|row| {
            row.iter()
                .zip(weights)
                .map(|(s, w)| w * if half == 1.0 { *s } else { s.powf(half) })
                .sum::<f64>()
        })
        .sum())
}

/// `‖f‖_{k−drop, p}` with node-sum quadrature.
pub fn sobolev_norm(f: &DiscreteField, idx: &SobolevIndex, drop: usize) -> Result<f64> {
    let target = idx.dropped(drop)?;
    let weights = f.grid().weights();
    let power = weighted_norm_power(f, target.k(), idx.p(), &weights)?;
    Ok(power.powf(1.0 / idx.p()))
}

/// Pointwise `⟨f₁, f₂⟩⟨f₃, f₄⟩⋯⟨f_{p−1}, f_p⟩`.
pub fn multilinear_product(fields: &[&DiscreteField]) -> Result<DiscreteField> {
    if fields.is_empty() || !fields.len().is_multiple_of(2) {
        return Err(LabError::Shape(format!(
            "multilinear product needs an even, nonzero number of arguments, got {}",
            fields.len()
        )));
    }
    let first = fields[0];
    for f in &fields[1..] {
        first.ensure_compatible(f)?;
    }
    let n = first.node_count();
    let mut out = vec![1.0; n];
    for pair in fields.chunks(2) {
        let mut inner = vec![0.0; n];
        for c in 0..first.dim() {
            let (a, b) = (pair[0].component(c), pair[1].component(c));
            for i in 0..n {
                inner[i] += a[i] * b[i];
            }
        }
        out.iter_mut().zip(inner).for_each(|(o, v)| *o *= v);
    }
    DiscreteField::from_values(*first.grid(), 1, out)
}

/// `∫ f dvol` as the weighted node sum.
pub fn integrate(f: &DiscreteField) -> Result<f64> {
    if f.dim() != 1 {
        return Err(LabError::Shape(format!(
            "integrate expects a scalar field, got dimension {}",
            f.dim()
        )));
    }
    let w = f.grid().weights();
    Ok(f.component(0).iter().zip(&w).map(|(v, w)| v * w).sum())
}

/// `N_k(f) = ‖f‖_{k,p}^p` for even `p`, assembled as `Σ_i I(M(Δ_p(∇^i f)))`.
pub fn norm_power(f: &DiscreteField, idx: &SobolevIndex) -> Result<f64> {
    let p = idx.even_exponent()? as usize;
    let partials = partials_up_to(f, idx.k())?;
    let mut total = 0.0;
    for (i, row) in partials.iter().enumerate() {
        let tensor = flatten_tensor(row, i);
        let diagonal: Vec<&DiscreteField> = std::iter::repeat_n(&tensor, p).collect();
        total += integrate(&multilinear_product(&diagonal)?)?;
    }
    Ok(total)
}

/// L²-Riesz representative `g` of `dN_k(f)`: `dN_k(f)[h] = ⟨g, h⟩_{L²}`.
///
/// `g = Σ_i Σ_α (−1)^i C(i, α₁) ∂^α (p |∇^i f|^{p−2} ∂^α f)`, using that the
/// node adjoint of `∂^α` is `(−1)^{|α|} ∂^α`.
pub fn norm_power_gradient(f: &DiscreteField, idx: &SobolevIndex) -> Result<DiscreteField> {
    let p = idx.even_exponent()? as i32;
    if f.grid().domain() != Domain::Torus {
        return Err(LabError::GridMismatch(
            "norm_power_gradient is defined for torus fields".into(),
        ));
    }
    let grid = *f.grid();
    let n = f.node_count();
    let dim = f.dim();
    let partials = partials_up_to(f, idx.k())?;
    let sq = tensor_sq_norms(f, idx.k())?;
    let mut grad = vec![0.0; dim * n];
    for (i, row) in partials.iter().enumerate() {
        let weight: Vec<f64> = sq[i]
            .iter()
            .map(|s| p as f64 * if p == 2 { 1.0 } else { s.powi((p - 2) / 2) })
            .collect();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        for (a, d) in row.iter().enumerate() {
            let coeff = sign * binomial(i, a);
            let weighted = d.mul_scalar_field(&DiscreteField::from_values(grid, 1, weight.clone())?)?;
            let back = if i == 0 {
                weighted
            } else {
                let spectrum = TorusSpectrum::new(&weighted)?;
                let comps = (0..dim)
                    .map(|c| spectrum.node_derivative(c, [a, i - a], [0.0, 0.0]))
                    .collect();
                DiscreteField::from_components(grid, comps)?
            };
            for (g, v) in grad.iter_mut().zip(back.values()) {
                *g += coeff * v;
            }
        }
    }
    DiscreteField::from_values(grid, dim, grad)
}

/// Both sides of the pointwise convexity bound
/// `(Σ_t |f| Δt)^p <= Σ_t |f|^p Δt` over a unit time interval.
pub fn time_average_power_bound(samples: &[f64], p: f64) -> (f64, f64) {
    let dt = 1.0 / samples.len() as f64;
    let lhs = samples.iter().map(|v| v.abs() * dt).sum::<f64>().powf(p);
    let rhs = samples.iter().map(|v| v.abs().powf(p) * dt).sum::<f64>();
    (lhs, rhs)
}

/// Both sides of `‖∫ f(·, t) dt‖^p_{k,p} <= ∫ ‖f(·, t)‖^p_{k,p} dt` for a family
/// of time slices on a uniform unit-interval grid.
pub fn averaged_field_bound(slices: &[DiscreteField], idx: &SobolevIndex) -> Result<(f64, f64)> {
    if slices.is_empty() {
        return Err(LabError::InsufficientData("no time slices".into()));
    }
    let dt = 1.0 / slices.len() as f64;
    let mut mean = slices[0].scale(dt);
    for s in &slices[1..] {
        mean = mean.axpy(dt, s)?;
    }
    let lhs = sobolev_norm(&mean, idx, 0)?.powf(idx.p());
    let mut rhs = 0.0;
    for s in slices {
        rhs += dt * sobolev_norm(s, idx, 0)?.powf(idx.p());
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    fn idx(k: usize, p: f64) -> SobolevIndex {
        SobolevIndex::unchecked(k, p).unwrap()
    }

    #[test]
    fn closed_form_norms() {
        let g = GridSpec::torus(64).unwrap();
        let c = 1.7;
        let f = DiscreteField::constant(g, &[c]);
        let v = sobolev_norm(&f, &idx(2, 2.0), 0).unwrap();
        assert!((v - (c * c * 4.0 * PI * PI).sqrt()).abs() / v < 1e-12);
        let s = DiscreteField::scalar_from_fn(g, |x| x[0].sin());
        assert!((sobolev_norm(&s, &idx(1, 2.0), 0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((sobolev_norm(&s, &idx(0, 2.0), 0).unwrap() - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        assert!(matches!(sobolev_norm(&s, &idx(1, 2.0), 2), Err(LabError::Index(_))));
    }

    #[test]
    fn integrate_examples() {
        let g = GridSpec::torus(32).unwrap();
        let one = DiscreteField::constant(g, &[1.0]);
        assert!((integrate(&one).unwrap() - 4.0 * PI * PI).abs() < 1e-12);
        let s = DiscreteField::scalar_from_fn(g, |x| x[0].sin());
        assert!(integrate(&s).unwrap().abs() < 1e-13);
        let s2 = DiscreteField::scalar_from_fn(g, |x| x[0].sin().powi(2));
        assert!((integrate(&s2).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
        let v = DiscreteField::constant(g, &[1.0, 2.0]);
        assert!(integrate(&v).is_err());
    }

    #[test]
    fn norm_power_examples() {
        let g = GridSpec::torus(64).unwrap();
        let one = DiscreteField::constant(g, &[1.0]);
        assert!((norm_power(&one, &idx(0, 4.0)).unwrap() - 4.0 * PI * PI).abs() < 1e-11);
        let s = DiscreteField::scalar_from_fn(g, |x| x[0].sin());
        assert!((norm_power(&s, &idx(0, 2.0)).unwrap() - 2.0 * PI * PI).abs() < 1e-11);
        assert!(matches!(
            norm_power(&s, &idx(1, 3.0)),
            Err(LabError::UnsupportedExponent(_))
        ));
    }

    #[test]
    fn gradient_examples() {
        let g = GridSpec::torus(32).unwrap();
        let zero = DiscreteField::zeros(g, 2);
        assert_eq!(norm_power_gradient(&zero, &idx(2, 4.0)).unwrap().max_abs(), 0.0);
        let f = DiscreteField::from_fn(g, 2, |x| vec![x[0].sin() + 0.3, (2.0 * x[1]).cos()]);
        let grad = norm_power_gradient(&f, &idx(0, 2.0)).unwrap();
        assert!(grad.max_abs_diff(&f.scale(2.0)).unwrap() < 1e-13);
        let s = DiscreteField::scalar_from_fn(g, |x| x[0].sin());
        let grad = norm_power_gradient(&s, &idx(0, 4.0)).unwrap();
        let expected = DiscreteField::scalar_from_fn(g, |x| 4.0 * x[0].sin().powi(3));
        assert!(grad.max_abs_diff(&expected).unwrap() < 1e-13);
        assert!(norm_power_gradient(&s, &idx(0, 5.0)).is_err());
    }

    #[test]
    fn multilinear_examples() {
        let g = GridSpec::torus(16).unwrap();
        let f = DiscreteField::from_fn(g, 2, |x| vec![x[0].cos(), x[1].sin()]);
        let m = multilinear_product(&[&f, &f]).unwrap();
        let sq = DiscreteField::scalar_from_fn(g, |x| x[0].cos().powi(2) + x[1].sin().powi(2));
        assert!(m.max_abs_diff(&sq).unwrap() < 1e-14);
        let z = DiscreteField::zeros(g, 2);
        assert_eq!(multilinear_product(&[&f, &z, &f, &f]).unwrap().max_abs(), 0.0);
        assert!(multilinear_product(&[&f, &f, &f]).is_err());
        let other = DiscreteField::zeros(GridSpec::torus(32).unwrap(), 2);
        assert!(matches!(
            multilinear_product(&[&f, &other]),
            Err(LabError::GridMismatch(_))
        ));
    }

    #[test]
    fn convexity_bound() {
        let (l, r) = time_average_power_bound(&[1.0, -2.0, 0.5, 3.0], 4.0);
        assert!(l <= r);
        let (l, r) = time_average_power_bound(&[2.0, 2.0], 2.0);
        assert!((l - r).abs() < 1e-15);
    }
}
