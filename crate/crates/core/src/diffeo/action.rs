//! The composition operator `Φ(a, η) = η∘T_a` and its parameter derivatives.
//!
//! Higher parameter partials are expanded symbolically into terms
//! `c · (∂^γ η)∘T_a · Π (∂^{β_r} T_{c_r})_a`. Differentiating a term by `a_j`
//! either raises `γ` by `e_c` and appends the factor `(∂_j T_c)`, or adds `j`
//! to one existing factor's `β`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diffeo::families::{det2, DiffeoFamily};
use crate::error::{LabError, Result};
use crate::field::{DiscreteField, SobolevIndex};
use crate::grid::{Domain, GridSpec};
use crate::spectral::derivatives_at_mapped;

/// A parameter `a ∈ B^n_ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupParam {
    a: Vec<f64>,
    radius: f64,
}

impl GroupParam {
    /// Requires `|a| < radius`.
    pub fn new(a: Vec<f64>, radius: f64) -> Result<Self> {
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm < radius) || a.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Domain { norm, radius });
        }
        Ok(GroupParam { a, radius })
    }

    /// Parameter for `fam`; checks dimension and radius.
    pub fn for_family(fam: &dyn DiffeoFamily, a: Vec<f64>) -> Result<Self> {
        if a.len() != fam.param_dim() {
            return Err(LabError::Shape(format!(
                "parameter has {} coordinates, family expects {}",
                a.len(),
                fam.param_dim()
            )));
        }
        GroupParam::new(a, fam.radius())
    }

    pub fn zero(fam: &dyn DiffeoFamily) -> Self {
        GroupParam { a: vec![0.0; fam.param_dim()], radius: fam.radius() }
    }

    pub fn coords(&self) -> &[f64] {
        &self.a
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn norm(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|v| *v == 0.0)
    }

    /// `a + t e_j`, checked against the radius.
    pub fn shifted(&self, j: usize, t: f64) -> Result<Self> {
        let mut a = self.a.clone();
        a[j] += t;
        GroupParam::new(a, self.radius)
    }

    /// `a + t v`, checked against the radius.
    pub fn moved(&self, v: &[f64], t: f64) -> Result<Self> {
        let a = self.a.iter().zip(v).map(|(x, d)| x + t * d).collect();
        GroupParam::new(a, self.radius)
    }
}

fn check_inputs(eta: &DiscreteField, fam: &dyn DiffeoFamily, a: &GroupParam) -> Result<()> {
    if eta.grid().domain() != Domain::Torus {
        return Err(LabError::GridMismatch(
            "diffeomorphism families act on torus fields".into(),
        ));
    }
    if a.coords().len() != fam.param_dim() {
        return Err(LabError::Shape(format!(
            "parameter has {} coordinates, family expects {}",
            a.coords().len(),
            fam.param_dim()
        )));
    }
    if !(a.norm() < fam.radius()) {
        return Err(LabError::Domain { norm: a.norm(), radius: fam.radius() });
    }
    Ok(())
}

fn mapped_nodes(grid: &GridSpec, fam: &dyn DiffeoFamily, a: &[f64]) -> Vec<[f64; 2]> {
    grid.points().into_iter().map(|x| fam.map(a, x)).collect()
}

/// Spatial derivatives `(∂^γ η)∘T_a` for each requested `γ`.
fn pulled_back_derivatives(
    eta: &DiscreteField,
    fam: &dyn DiffeoFamily,
    a: &GroupParam,
    orders: &[[usize; 2]],
) -> Result<Vec<DiscreteField>> {
    let shift = fam.translation_shift(a.coords());
    let mapped = if shift.is_some() {
        Vec::new()
    } else {
        mapped_nodes(eta.grid(), fam, a.coords())
    };
    derivatives_at_mapped(eta, orders, &mapped, shift)
}

/// `η∘T_a` by spectral interpolation at the mapped nodes.
pub fn compose(eta: &DiscreteField, fam: &dyn DiffeoFamily, a: &GroupParam) -> Result<DiscreteField> {
    check_inputs(eta, fam, a)?;
    if a.is_zero() {
        return Ok(eta.clone());
    }
    Ok(pulled_back_derivatives(eta, fam, a, &[[0, 0]])?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Factor {
    axes: Vec<usize>,
    comp: usize,
}

#[derive(Debug, Clone)]
struct Term {
    coeff: f64,
    gamma: [usize; 2],
    factors: Vec<Factor>,
}

fn differentiate(terms: &[Term], j: usize, max_order: Option<usize>) -> Vec<Term> {
    let mut merged: BTreeMap<([usize; 2], Vec<Factor>), f64> = BTreeMap::new();
    let mut push = |gamma: [usize; 2], mut factors: Vec<Factor>, coeff: f64| {
        if max_order.is_some_and(|m| factors.iter().any(|f| f.axes.len() > m)) {
            return;
        }
        factors.sort();
        *merged.entry((gamma, factors)).or_insert(0.0) += coeff;
    };
    for t in terms {
        for c in 0..2 {
            let mut gamma = t.gamma;
            gamma[c] += 1;
            let mut factors = t.factors.clone();
            factors.push(Factor { axes: vec![j], comp: c });
            push(gamma, factors, t.coeff);
        }
        for r in 0..t.factors.len() {
            let mut factors = t.factors.clone();
            factors[r].axes.push(j);
            factors[r].axes.sort_unstable();
            push(t.gamma, factors, t.coeff);
        }
    }
    merged
        .into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|((gamma, factors), coeff)| Term { coeff, gamma, factors })
        .collect()
}

fn expand(axes: &[usize], max_order: Option<usize>) -> Vec<Term> {
    let mut terms = vec![Term { coeff: 1.0, gamma: [0, 0], factors: Vec::new() }];
    for &j in axes {
        terms = differentiate(&terms, j, max_order);
    }
    terms
}

/// `∂_{a_{j_1}} ⋯ ∂_{a_{j_r}} Φ(a, η)` taking the partials in the listed order.
pub fn action_partial_sequence(
    eta: &DiscreteField,
    fam: &dyn DiffeoFamily,
    a: &GroupParam,
    axes: &[usize],
) -> Result<DiscreteField> {
    check_inputs(eta, fam, a)?;
    if let Some(&j) = axes.iter().find(|&&j| j >= fam.param_dim()) {
        return Err(LabError::Index(format!(
            "axis {j} out of range for a {}-parameter family",
            fam.param_dim()
        )));
    }
    if axes.is_empty() {
        return compose(eta, fam, a);
    }
    let terms = expand(axes, fam.max_param_order());
    let grid = *eta.grid();
    let nodes = grid.node_count();
    let dim = eta.dim();
    let mut out = vec![0.0; dim * nodes];
    if terms.is_empty() {
        return DiscreteField::from_values(grid, dim, out);
    }
    let mut gammas: Vec<[usize; 2]> = terms.iter().map(|t| t.gamma).collect();
    gammas.sort();
    gammas.dedup();
    let derivs = pulled_back_derivatives(eta, fam, a, &gammas)?;
    let mut factor_axes: Vec<Vec<usize>> = terms
        .iter()
        .flat_map(|t| t.factors.iter().map(|f| f.axes.clone()))
        .collect();
    factor_axes.sort();
    factor_axes.dedup();
    let points = grid.points();
    let factor_values: Vec<Vec<[f64; 2]>> = factor_axes
        .iter()
        .map(|ax| points.iter().map(|&x| fam.param_partial(a.coords(), x, ax)).collect())
        .collect();
    for t in &terms {
        let d = &derivs[gammas.binary_search(&t.gamma).expect("gamma listed")];
        let mut weight = vec![t.coeff; nodes];
        for f in &t.factors {
            let vals = &factor_values[factor_axes.binary_search(&f.axes).expect("factor listed")];
            weight.iter_mut().zip(vals).for_each(|(w, v)| *w *= v[f.comp]);
        }
        for c in 0..dim {
            let comp = d.component(c);
            let target = &mut out[c * nodes..(c + 1) * nodes];
            for i in 0..nodes {
                target[i] += weight[i] * comp[i];
            }
        }
    }
    DiscreteField::from_values(grid, dim, out)
}

/// `∂_{a_j} Φ(a, η) = (∇η)∘T_a · (∂_j T)_a`.
pub fn action_partial(
    eta: &DiscreteField,
    fam: &dyn DiffeoFamily,
    a: &GroupParam,
    j: usize,
) -> Result<DiscreteField> {
    action_partial_sequence(eta, fam, a, &[j])
}

/// `∂^α_a Φ(a, η)` for a multi-index `alpha` of length `n`; requires
/// `|α| <= k − ⌈2/p⌉`.
pub fn action_higher_partial(
    eta: &DiscreteField,
    fam: &dyn DiffeoFamily,
    a: &GroupParam,
    alpha: &[usize],
    idx: &SobolevIndex,
) -> Result<DiscreteField> {
    if alpha.len() != fam.param_dim() {
        return Err(LabError::Shape(format!(
            "multi-index has {} entries, family has {} parameters",
            alpha.len(),
            fam.param_dim()
        )));
    }
    let order: usize = alpha.iter().sum();
    let budget = idx.k() as i64 - (2.0 / idx.p()).ceil() as i64;
    if order as i64 > budget {
        return Err(LabError::Index(format!(
            "|alpha| = {order} exceeds k - ceil(2/p) = {budget}"
        )));
    }
    let axes: Vec<usize> = alpha
        .iter()
        .enumerate()
        .flat_map(|(j, &m)| std::iter::repeat_n(j, m))
        .collect();
    action_partial_sequence(eta, fam, a, &axes)
}

/// `det Jac T_a` sampled at the nodes of `grid`.
pub fn jacobian_field(fam: &dyn DiffeoFamily, a: &GroupParam, grid: &GridSpec) -> Result<DiscreteField> {
    if !(a.norm() < fam.radius()) {
        return Err(LabError::Domain { norm: a.norm(), radius: fam.radius() });
    }
    let values: Vec<f64> = grid
        .points()
        .into_iter()
        .map(|x| det2(&fam.jacobian(a.coords(), x)))
        .collect();
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(LabError::InvariantViolation(format!(
            "nonpositive Jacobian determinant {v}"
        )));
    }
    DiscreteField::from_values(*grid, 1, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::families::{builtin_family, FamilyKind, FamilyParams};
    use crate::norms::sobolev_norm;
    use crate::synth::synth_field;
    use std::f64::consts::PI;

    fn translation() -> crate::diffeo::BuiltinFamily {
        builtin_family(FamilyKind::Translation, &FamilyParams::default()).unwrap()
    }

    #[test]
    fn term_expansion_counts() {
        // d²/da² η(x + ψa) for one parameter: ∂²η·(∂T)² only, when ∂²T vanishes
        let t = expand(&[0, 0], Some(1));
        assert_eq!(t.len(), 3);
        let t = expand(&[0, 0], None);
        assert_eq!(t.len(), 5);
        assert!(expand(&[0, 1], None).len() == expand(&[1, 0], None).len());
    }

    #[test]
    fn translation_examples() {
        let fam = translation();
        let g = GridSpec::torus(32).unwrap();
        let eta = DiscreteField::scalar_from_fn(g, |x| x[0].sin());
        let a = GroupParam::for_family(&fam, vec![PI, 0.0]).unwrap();
        let c = compose(&eta, &fam, &a).unwrap();
        assert!(c.max_abs_diff(&eta.scale(-1.0)).unwrap() < 1e-13);
        let zero = GroupParam::zero(&fam);
        assert_eq!(compose(&eta, &fam, &zero).unwrap(), eta);
        let d = action_partial(&eta, &fam, &zero, 0).unwrap();
        let cos = DiscreteField::scalar_from_fn(g, |x| x[0].cos());
        assert!(d.max_abs_diff(&cos).unwrap() < 1e-13);
        let idx = SobolevIndex::unchecked(3, 2.0).unwrap();
        let d2 = action_higher_partial(&eta, &fam, &zero, &[2, 0], &idx).unwrap();
        assert!(d2.max_abs_diff(&eta.scale(-1.0)).unwrap() < 1e-12);
        assert!(matches!(
            action_higher_partial(&eta, &fam, &zero, &[3, 0], &idx),
            Err(LabError::Index(_))
        ));
        assert!(matches!(
            GroupParam::for_family(&fam, vec![4.0, 0.0]),
            Err(LabError::Domain { .. })
        ));
    }

    #[test]
    fn translation_preserves_norms() {
        let fam = translation();
        let g = GridSpec::torus(32).unwrap();
        let eta = synth_field(4.0, 11, g, 2).unwrap();
        let a = GroupParam::for_family(&fam, vec![0.37, -1.2]).unwrap();
        let idx = SobolevIndex::unchecked(2, 2.0).unwrap();
        let n0 = sobolev_norm(&eta, &idx, 0).unwrap();
        let n1 = sobolev_norm(&compose(&eta, &fam, &a).unwrap(), &idx, 0).unwrap();
        assert!((n0 - n1).abs() / n0 < 1e-12);
    }

    #[test]
    fn jacobian_examples() {
        let g = GridSpec::torus(64).unwrap();
        let fam = translation();
        let a = GroupParam::for_family(&fam, vec![0.3, 0.0]).unwrap();
        assert!(jacobian_field(&fam, &a, &g).unwrap().max_abs_diff(&DiscreteField::constant(g, &[1.0])).unwrap() == 0.0);
        let bump = builtin_family(FamilyKind::ShearBump, &FamilyParams::default()).unwrap();
        let a = GroupParam::for_family(&bump, vec![0.15, -0.1]).unwrap();
        let jac = jacobian_field(&bump, &a, &g).unwrap();
        let total = crate::norms::integrate(&jac).unwrap();
        assert!((total - 4.0 * PI * PI).abs() < 1e-8);
    }
}
