//! The local slice `W(f, H)` through the marked points `0, 1, ∞` and the
//! Newton-based projection `k ↦ (T⁻¹(k), k∘T⁻¹(k))`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::sphere::field::SphereField;
use crate::sphere::mobius::{mobius_from_triple_local, MobiusElement};
use crate::sphere::point::{Chart, SpherePoint};

/// Residual at which a marked-point Newton solve has converged.
pub const NEWTON_TOLERANCE: f64 = 1e-10;
/// Iteration cap of a marked-point Newton solve.
pub const NEWTON_MAX_ITER: usize = 50;
/// Largest admissible condition number of `L_i ∘ Dk(x_i)`.
pub const MAX_CONDITION: f64 = 1e3;

/// The marked points `0, 1, ∞` with the chart each is solved in.
pub fn marked_points() -> [(SpherePoint, Chart); 3] {
    [
        (SpherePoint::real(0.0), Chart::A),
        (SpherePoint::real(1.0), Chart::A),
        (SpherePoint::infinity(), Chart::B),
    ]
}

/// Affine constraint `L(v) = R (v − v₀)` with a `2 × N_t` matrix `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineConstraint {
    pub rows: [Vec<f64>; 2],
    pub anchor: Vec<f64>,
}

impl AffineConstraint {
    pub fn eval(&self, v: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().zip(v.iter().zip(&self.anchor)).map(|(r, (x, a))| r * (x - a)).sum();
        }
        out
    }

    /// `R · J` for a Jacobian given as one gradient per target component.
    pub fn compose_jacobian(&self, grads: &[[f64; 2]]) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for (r, row) in self.rows.iter().enumerate() {
            for (c, g) in row.iter().zip(grads) {
                m[r][0] += c * g[0];
                m[r][1] += c * g[1];
            }
        }
        m
    }
}

/// Spectral condition number of a 2×2 matrix.
pub fn condition_number(m: &[[f64; 2]; 2]) -> f64 {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let fro = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    if det == 0.0 {
        return f64::INFINITY;
    }
    let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
    let smax = ((fro + disc) / 2.0).sqrt();
    let smin = ((fro - disc) / 2.0).max(0.0).sqrt();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Center field, marked points and codimension-2 constraints defining the slice.
#[derive(Debug, Clone)]
pub struct SliceSpec {
    center: SphereField,
    constraints: [AffineConstraint; 3],
}

impl SliceSpec {
    /// Constraints `R_i (v − f(x_i))` with given `2 × N_t` matrices `R_i`;
    /// checks `L_i(f(x_i)) = 0` and transversality at the center.
    pub fn new(center: SphereField, rows: [[Vec<f64>; 2]; 3]) -> Result<Self> {
        let dim = center.dim();
        let mut constraints = Vec::with_capacity(3);
        for ((x, chart), r) in marked_points().iter().zip(rows) {
            if r.iter().any(|row| row.len() != dim) {
                return Err(LabError::Shape(format!("constraint rows must have length {dim}")));
            }
            let u = x.chart_coord(*chart).expect("marked point lies in its chart");
            let anchor = center.chart_value(*chart, u);
            constraints.push(AffineConstraint { rows: r, anchor });
        }
        let spec = SliceSpec {
            center,
            constraints: constraints.try_into().expect("three constraints"),
        };
        for i in 0..3 {
            let residual = spec.constraint_value(&spec.center, i);
            if residual[0].abs().max(residual[1].abs()) > 1e-12 {
                return Err(LabError::InvariantViolation(format!(
                    "center violates constraint {i}: {residual:?}"
                )));
            }
        }
        spec.transversality(&spec.center)?;
        Ok(spec)
    }

    /// Constraints whose rows are the transposed chart Jacobian of `f` at each
    /// marked point, so `L_i ∘ Df(x_i) = Df(x_i)ᵀ Df(x_i)`.
    pub fn transverse_normal(center: SphereField) -> Result<Self> {
        let rows: Vec<[Vec<f64>; 2]> = marked_points()
            .iter()
            .map(|(x, chart)| {
                let u = x.chart_coord(*chart).expect("marked point lies in its chart");
                let (_, grads) = center.chart_value_and_gradient(*chart, u);
                [grads.iter().map(|g| g[0]).collect(), grads.iter().map(|g| g[1]).collect()]
            })
            .collect();
        SliceSpec::new(center, rows.try_into().expect("three marked points"))
    }

    pub fn center(&self) -> &SphereField {
        &self.center
    }

    pub fn constraints(&self) -> &[AffineConstraint; 3] {
        &self.constraints
    }

    /// `L_i(k(x_i))` evaluated in the marked point's chart.
    pub fn constraint_value(&self, k: &SphereField, i: usize) -> [f64; 2] {
        let (x, chart) = marked_points()[i];
        let u = x.chart_coord(chart).expect("marked point lies in its chart");
        self.constraints[i].eval(&k.chart_value(chart, u))
    }

    /// Largest `|L_i(k(x_i))|` over the marked points.
    pub fn slice_residual(&self, k: &SphereField) -> f64 {
        (0..3)
            .map(|i| {
                let r = self.constraint_value(k, i);
                r[0].abs().max(r[1].abs())
            })
            .fold(0.0, f64::max)
    }

    /// Condition numbers of `L_i ∘ Dk(x_i)`; errors when any exceeds [`MAX_CONDITION`].
    pub fn transversality(&self, k: &SphereField) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (i, (x, chart)) in marked_points().iter().enumerate() {
            let u = x.chart_coord(*chart).expect("marked point lies in its chart");
            let (_, grads) = k.chart_value_and_gradient(*chart, u);
            let cond = condition_number(&self.constraints[i].compose_jacobian(&grads));
            if !(cond <= MAX_CONDITION) {
                return Err(LabError::ProjectionFailure(format!(
                    "constraint {i} is not transversal: condition number {cond:.3e}"
                )));
            }
            out[i] = cond;
        }
        Ok(out)
    }
}

/// Outcome of one marked-point solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkedSolve {
    pub point: SpherePoint,
    pub iterations: usize,
    pub residual: f64,
}

/// Result of [`slice_projection`].
#[derive(Debug, Clone)]
pub struct SliceProjection {
    /// `T⁻¹(k)`.
    pub gamma_inv: MobiusElement,
    /// `k∘T⁻¹(k)`.
    pub projected: SphereField,
    pub solves: [MarkedSolve; 3],
}

impl SliceProjection {
    pub fn max_iterations(&self) -> usize {
        self.solves.iter().map(|s| s.iterations).max().unwrap_or(0)
    }
}

fn residual_norm(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// Damped Newton solve of `L(k_c(u)) = 0` in chart coordinates, from `u₀`,
/// followed by one polishing step once the tolerance is met.
fn newton_marked(k: &SphereField, chart: Chart, con: &AffineConstraint, u0: Complex64) -> Result<MarkedSolve> {
    let value = |u: Complex64| con.eval(&k.chart_value(chart, u));
    let newton_step = |u: Complex64, r: [f64; 2]| -> Result<[f64; 2]> {
        let (_, grads) = k.chart_value_and_gradient(chart, u);
        let m = con.compose_jacobian(&grads);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(LabError::ProjectionFailure("singular Newton matrix".into()));
        }
        Ok([(m[1][1] * r[0] - m[0][1] * r[1]) / det, (-m[1][0] * r[0] + m[0][0] * r[1]) / det])
    };
    let mut u = u0;
    let mut r = value(u);
    let mut res = residual_norm(r);
    let mut iterations = 0;
    while res > NEWTON_TOLERANCE {
        if iterations >= NEWTON_MAX_ITER {
            return Err(LabError::ProjectionFailure(format!(
                "Newton did not converge in {NEWTON_MAX_ITER} iterations (residual {res:.3e})"
            )));
        }
        iterations += 1;
        let step = newton_step(u, r)?;
        let mut lambda = 1.0;
        loop {
            let cand = u - Complex64::new(lambda * step[0], lambda * step[1]);
            let rc = value(cand);
            let rn = residual_norm(rc);
            if rn < res || lambda < 1e-4 {
                u = cand;
                r = rc;
                res = rn;
                break;
            }
            lambda *= 0.5;
        }
        if res <= NEWTON_TOLERANCE {
            let step = newton_step(u, r)?;
            let cand = u - Complex64::new(step[0], step[1]);
            let rn = residual_norm(value(cand));
            if rn <= res {
                u = cand;
                res = rn;
            }
        }
    }
    Ok(MarkedSolve { point: SpherePoint::from_chart(chart, u), iterations, residual: res })
}

/// Solves for `y_i` near `x_i` with `L_i(k(y_i)) = 0`, builds
/// `γ_inv = T⁻¹(k)` sending `(0, 1, ∞)` to `(y₁, y₂, y₃)`, and returns the
/// projected field `k∘γ_inv`.
pub fn slice_projection(k: &SphereField, spec: &SliceSpec) -> Result<SliceProjection> {
    if k.dim() != spec.center().dim() {
        return Err(LabError::Shape("field and slice center have different targets".into()));
    }
    spec.transversality(k)?;
    let solves: Vec<MarkedSolve> = marked_points()
        .par_iter()
        .zip(spec.constraints().par_iter())
        .map(|((x, chart), con)| {
            let u0 = x.chart_coord(*chart).expect("marked point lies in its chart");
            newton_marked(k, *chart, con, u0)
        })
        .collect::<Result<Vec<_>>>()?;
    let solves: [MarkedSolve; 3] = solves.try_into().expect("three solves");
    let gamma_inv = mobius_from_triple_local(&solves[0].point, &solves[1].point, &solves[2].point)?;
    let projected = k.compose_mobius(&gamma_inv)?;
    Ok(SliceProjection { gamma_inv, projected, solves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::field::standard_center;

    #[test]
    fn condition_numbers() {
        assert!((condition_number(&[[2.0, 0.0], [0.0, 1.0]]) - 2.0).abs() < 1e-12);
        assert_eq!(condition_number(&[[1.0, 1.0], [1.0, 1.0]]), f64::INFINITY);
    }

    #[test]
    fn center_projects_to_itself() {
        let f = standard_center(32).unwrap();
        let spec = SliceSpec::transverse_normal(f.clone()).unwrap();
        let proj = slice_projection(&f, &spec).unwrap();
        assert!(proj.gamma_inv.is_identity());
        assert_eq!(proj.projected, f);
        assert_eq!(proj.max_iterations(), 0);
    }

    #[test]
    fn recovers_inverse_element() {
        let f = standard_center(64).unwrap();
        let spec = SliceSpec::transverse_normal(f.clone()).unwrap();
        let g = MobiusElement::exp([Complex64::new(0.01, -0.004), Complex64::new(0.012, 0.0), Complex64::new(-0.005, 0.01)], 1.0);
        let k = f.compose_mobius(&g).unwrap();
        let proj = slice_projection(&k, &spec).unwrap();
        assert!(proj.gamma_inv.distance(&g.inverse()) < 1e-8);
        assert!(proj.projected.max_abs_diff(&f).unwrap() < 1e-7);
        assert!(spec.slice_residual(&proj.projected) < 1e-9);
        assert!(proj.max_iterations() <= 12);
    }
}
