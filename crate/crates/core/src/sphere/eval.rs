//! Evaluation maps, the localized translation family and the Möbius action
//! on points, elements and fields.

use std::f64::consts::PI;

use crate::diffeo::{compose, periodic_delta, GroupParam, ShearBump};
use crate::error::{LabError, Result};
use crate::field::DiscreteField;
use crate::spectral::torus_eval;
use crate::sphere::field::SphereField;
use crate::sphere::mobius::MobiusElement;
use crate::sphere::point::SpherePoint;

/// Fields that can be evaluated at points of their domain.
pub trait Evaluate {
    type Point;
    fn evaluate_at(&self, x: &Self::Point) -> Result<Vec<f64>>;
}

impl Evaluate for DiscreteField {
    type Point = [f64; 2];
    fn evaluate_at(&self, x: &[f64; 2]) -> Result<Vec<f64>> {
        if !self.grid().is_torus() {
            return Err(LabError::GridMismatch("point evaluation of a chart field needs a SphereField".into()));
        }
        torus_eval(self, *x, [0, 0])
    }
}

impl Evaluate for SphereField {
    type Point = SpherePoint;
    fn evaluate_at(&self, x: &SpherePoint) -> Result<Vec<f64>> {
        Ok(self.evaluate(x))
    }
}

/// `E(g, x) = g(x)`.
pub fn evaluate<E: Evaluate>(g: &E, x: &E::Point) -> Result<Vec<f64>> {
    g.evaluate_at(x)
}

/// Localized translations around `x₀` with parameter `x − x₀`: the shift on the
/// `r`-disk, the identity outside the `2r`-disk.
pub fn translation_family_at(x0: [f64; 2], r: f64) -> Result<ShearBump> {
    ShearBump::new(x0, r)
}

/// The periodic offset `x − x₀` used as the family parameter.
pub fn translation_parameter(x0: [f64; 2], x: [f64; 2]) -> [f64; 2] {
    [periodic_delta(x[0], x0[0]), periodic_delta(x[1], x0[1])]
}

/// Largest component of `E(g∘T_{x−x₀}, x₀) − E(g, x)` for the family
/// [`translation_family_at`]`(x₀, r)`.
pub fn evaluation_identity_gap(g: &DiscreteField, x0: [f64; 2], x: [f64; 2], r: f64) -> Result<f64> {
    let fam = translation_family_at(x0, r)?;
    let a = translation_parameter(x0, x);
    let param = GroupParam::for_family(&fam, a.to_vec())?;
    let lhs = evaluate(&compose(g, &fam, &param)?, &x0)?;
    let rhs = evaluate(g, &[x[0].rem_euclid(2.0 * PI), x[1].rem_euclid(2.0 * PI)])?;
    Ok(lhs.iter().zip(&rhs).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
}

/// Objects acted on by near-identity Möbius elements.
pub trait MobiusAct: Sized {
    fn act_by(&self, g: &MobiusElement) -> Result<Self>;
}

impl MobiusAct for SpherePoint {
    fn act_by(&self, g: &MobiusElement) -> Result<Self> {
        Ok(g.apply(self))
    }
}

impl MobiusAct for MobiusElement {
    fn act_by(&self, g: &MobiusElement) -> Result<Self> {
        Ok(g.compose(self))
    }
}

impl MobiusAct for SphereField {
    fn act_by(&self, g: &MobiusElement) -> Result<Self> {
        let distance = g.distance_to_identity();
        if !g.is_near_identity() {
            return Err(LabError::OutOfNeighborhood { distance, radius: crate::sphere::mobius::EPSILON_G });
        }
        self.compose_mobius(g)
    }
}

/// `γ·arg`: the image point, the product `γ∘arg`, or the field `arg∘γ`.
pub fn mobius_act<T: MobiusAct>(g: &MobiusElement, arg: &T) -> Result<T> {
    arg.act_by(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::sphere::mobius::mobius_from_triple;
    use crate::synth::synth_field;
    use num_complex::Complex64;

    #[test]
    fn torus_evaluation_examples() {
        let grid = GridSpec::torus(32).unwrap();
        let c = DiscreteField::constant(grid, &[2.5, -1.0]);
        assert_eq!(evaluate(&c, &[0.3, 1.7]).unwrap().len(), 2);
        assert!((evaluate(&c, &[0.3, 1.7]).unwrap()[0] - 2.5).abs() < 1e-14);
        let s = DiscreteField::scalar_from_fn(grid, |x| x[0].sin());
        assert!((evaluate(&s, &[PI / 2.0, 0.0]).unwrap()[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn translation_family_properties() {
        use crate::diffeo::DiffeoFamily;
        let x0 = [1.0, 2.0];
        let fam = translation_family_at(x0, 0.8).unwrap();
        assert_eq!(fam.map(&[0.0, 0.0], [0.4, 2.2]), [0.4, 2.2]);
        let a = [0.1, -0.15];
        let y = fam.map(&a, x0);
        assert!((y[0] - 1.1).abs() < 1e-15 && (y[1] - 1.85).abs() < 1e-15);
        let far = [x0[0] + 1.7, x0[1]];
        assert_eq!(fam.map(&a, far), far);
        assert!(translation_family_at(x0, 1.6).is_err());
    }

    #[test]
    fn evaluation_identity() {
        let grid = GridSpec::torus(128).unwrap();
        let g = synth_field(6.0, 3, grid, 2).unwrap();
        let gap = evaluation_identity_gap(&g, [2.0, 3.5], [2.2, 3.4], 1.5).unwrap();
        assert!(gap < 1e-8, "{gap}");
    }

    #[test]
    fn action_examples() {
        let flip = mobius_from_triple(&SpherePoint::real(1.0), &SpherePoint::real(0.0), &SpherePoint::infinity()).unwrap();
        let y = mobius_act(&flip, &SpherePoint::real(0.25)).unwrap();
        assert!((y.z().unwrap() - Complex64::new(0.75, 0.0)).norm() < 1e-15);
        let id = MobiusElement::identity();
        assert_eq!(mobius_act(&id, &flip).unwrap(), flip);
        let f = crate::sphere::field::standard_center(16).unwrap();
        assert_eq!(mobius_act(&id, &f).unwrap(), f);
        assert!(matches!(mobius_act(&flip, &f), Err(LabError::OutOfNeighborhood { .. })));
    }
}
