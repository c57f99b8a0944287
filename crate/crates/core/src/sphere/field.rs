//! Fields on the Riemann sphere stored as a pair of chart fields.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::field::{DiscreteField, SobolevIndex};
use crate::grid::{Domain, GridSpec};
use crate::norms::weighted_norm_power;
use crate::spectral::{chart_eval, chart_eval_with_gradient};
use crate::sphere::mobius::MobiusElement;
use crate::sphere::point::{chart_weight, Chart, SpherePoint};

/// Default chart resolution.
pub const DEFAULT_CHART_N: usize = 64;

/// A map `S² → ℝ^{N_t}` sampled on both stereographic charts.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereField {
    a: DiscreteField,
    b: DiscreteField,
}

fn chart_point(u: [f64; 2]) -> Complex64 {
    Complex64::new(u[0], u[1])
}

impl SphereField {
    pub fn new(a: DiscreteField, b: DiscreteField) -> Result<Self> {
        if a.grid().domain() != Domain::SpherePair {
            return Err(LabError::GridMismatch("sphere fields need chart grids".into()));
        }
        a.ensure_compatible(&b)?;
        Ok(SphereField { a, b })
    }

    /// Samples `f` at every node of both charts.
    pub fn from_fn<F>(n: usize, dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&SpherePoint) -> Vec<f64> + Sync,
    {
        let grid = GridSpec::chart(n)?;
        let sample = |c: Chart| -> Result<DiscreteField> {
            let rows: Vec<Vec<f64>> = grid
                .points()
                .par_iter()
                .map(|u| f(&SpherePoint::from_chart(c, chart_point(*u))))
                .collect();
            let nodes = grid.node_count();
            let mut values = vec![0.0; dim * nodes];
            for (idx, v) in rows.into_iter().enumerate() {
                if v.len() != dim {
                    return Err(LabError::Shape(format!("sampler returned {} values, expected {dim}", v.len())));
                }
                for (c, x) in v.into_iter().enumerate() {
                    values[c * nodes + idx] = x;
                }
            }
            DiscreteField::from_values(grid, dim, values)
        };
        Ok(SphereField { a: sample(Chart::A)?, b: sample(Chart::B)? })
    }

    pub fn zeros(n: usize, dim: usize) -> Result<Self> {
        let grid = GridSpec::chart(n)?;
        Ok(SphereField { a: DiscreteField::zeros(grid, dim), b: DiscreteField::zeros(grid, dim) })
    }

    pub fn chart(&self, c: Chart) -> &DiscreteField {
        match c {
            Chart::A => &self.a,
            Chart::B => &self.b,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.a.grid()
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn map_charts<F>(&self, f: F) -> Result<SphereField>
    where
        F: Fn(&DiscreteField) -> Result<DiscreteField>,
    {
        SphereField::new(f(&self.a)?, f(&self.b)?)
    }

    pub fn zip_charts<F>(&self, other: &SphereField, f: F) -> Result<SphereField>
    where
        F: Fn(&DiscreteField, &DiscreteField) -> Result<DiscreteField>,
    {
        SphereField::new(f(&self.a, &other.a)?, f(&self.b, &other.b)?)
    }

    pub fn add(&self, other: &SphereField) -> Result<SphereField> {
        self.zip_charts(other, |x, y| x.add(y))
    }

    pub fn sub(&self, other: &SphereField) -> Result<SphereField> {
        self.zip_charts(other, |x, y| x.sub(y))
    }

    pub fn axpy(&self, s: f64, other: &SphereField) -> Result<SphereField> {
        self.zip_charts(other, |x, y| x.axpy(s, y))
    }

    pub fn scale(&self, s: f64) -> SphereField {
        SphereField { a: self.a.scale(s), b: self.b.scale(s) }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.max_abs().max(self.b.max_abs())
    }

    pub fn max_abs_diff(&self, other: &SphereField) -> Result<f64> {
        Ok(self.a.max_abs_diff(&other.a)?.max(self.b.max_abs_diff(&other.b)?))
    }

    /// Value of chart `c`'s interpolant at chart coordinate `u`.
    pub fn chart_value(&self, c: Chart, u: Complex64) -> Vec<f64> {
        chart_eval(self.chart(c), [u.re, u.im])
    }

    /// Chart value and chart-coordinate gradient at `u`.
    pub fn chart_value_and_gradient(&self, c: Chart, u: Complex64) -> (Vec<f64>, Vec<[f64; 2]>) {
        chart_eval_with_gradient(self.chart(c), [u.re, u.im])
    }

    /// Blended value `ρ_A k_A + ρ_B k_B` at `x`.
    pub fn evaluate(&self, x: &SpherePoint) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for c in Chart::both() {
            if let Some(u) = x.chart_coord(c) {
                let w = chart_weight(u);
                if w > 0.0 {
                    for (o, v) in out.iter_mut().zip(self.chart_value(c, u)) {
                        *o += w * v;
                    }
                }
            }
        }
        out
    }

    /// Largest discrepancy between the two charts at overlap nodes of chart A,
    /// relative to the field's size.
    pub fn overlap_mismatch(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.a
            .grid()
            .points()
            .par_iter()
            .enumerate()
            .filter_map(|(idx, u)| {
                let z = chart_point(*u);
                let r = z.norm();
                if !(r > 0.5 && r < 2.0) {
                    return None;
                }
                let vb = self.chart_value(Chart::B, z.inv());
                let va = self.a.node_value(idx);
                Some(va.iter().zip(&vb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `‖k‖^p_{k,p}` assembled from both charts with blend weights, using
    /// chart-coordinate derivatives.
    pub fn norm_power(&self, idx: &SobolevIndex) -> Result<f64> {
        let grid = *self.grid();
        let quad = grid.weights();
        let mut total = 0.0;
        for c in Chart::both() {
            let weights: Vec<f64> = grid
                .points()
                .iter()
                .zip(&quad)
                .map(|(u, w)| w * chart_weight(chart_point(*u)))
                .collect();
            total += weighted_norm_power(self.chart(c), idx.k(), idx.p(), &weights)?;
        }
        Ok(total)
    }

    pub fn norm(&self, idx: &SobolevIndex) -> Result<f64> {
        Ok(self.norm_power(idx)?.powf(1.0 / idx.p()))
    }

    /// Each chart interpolant sampled on the chart grid with `n` nodes per axis.
    pub fn resample(&self, n: usize) -> Result<SphereField> {
        let grid = GridSpec::chart(n)?;
        let dim = self.dim();
        let nodes = grid.node_count();
        let sample = |c: Chart| -> Result<DiscreteField> {
            let rows: Vec<Vec<f64>> =
                grid.points().par_iter().map(|u| self.chart_value(c, chart_point(*u))).collect();
            let mut values = vec![0.0; dim * nodes];
            for (idx, v) in rows.into_iter().enumerate() {
                for (k, x) in v.into_iter().enumerate() {
                    values[k * nodes + idx] = x;
                }
            }
            DiscreteField::from_values(grid, dim, values)
        };
        Ok(SphereField { a: sample(Chart::A)?, b: sample(Chart::B)? })
    }

    /// `(k∘γ)`, resampled at the nodes of both charts.
    pub fn compose_mobius(&self, g: &MobiusElement) -> Result<SphereField> {
        if g.is_identity() {
            return Ok(self.clone());
        }
        let grid = *self.grid();
        let dim = self.dim();
        let nodes = grid.node_count();
        let resample = |c: Chart| -> Result<DiscreteField> {
            let rows: Vec<Vec<f64>> = grid
                .points()
                .par_iter()
                .map(|u| self.evaluate(&g.apply(&SpherePoint::from_chart(c, chart_point(*u)))))
                .collect();
            let mut values = vec![0.0; dim * nodes];
            for (idx, v) in rows.into_iter().enumerate() {
                for (k, x) in v.into_iter().enumerate() {
                    values[k * nodes + idx] = x;
                }
            }
            DiscreteField::from_values(grid, dim, values)
                .map_err(|e| LabError::Interpolation(format!("chart resampling failed: {e}")))
        };
        Ok(SphereField { a: resample(Chart::A)?, b: resample(Chart::B)? })
    }

    /// Maximum over degrees `>= 7N/8` of the Chebyshev coefficients of every
    /// chart component, relative to the largest coefficient.
    pub fn high_band_ratio(&self) -> f64 {
        let grid = self.grid();
        let basis = grid.chart_basis();
        let n = grid.n();
        let cut = 7 * n / 8;
        let mut top: f64 = 0.0;
        let mut tail: f64 = 0.0;
        for c in Chart::both() {
            for comp in self.chart(c).components() {
                // 2D coefficients: transform rows, then columns
                let rows: Vec<Vec<f64>> = comp.chunks(n).map(|r| basis.chebyshev_coefficients(r)).collect();
                for i in 0..n {
                    let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
                    for (j, v) in basis.chebyshev_coefficients(&col).into_iter().enumerate() {
                        top = top.max(v.abs());
                        if i >= cut || j >= cut {
                            tail = tail.max(v.abs());
                        }
                    }
                }
            }
        }
        if top == 0.0 {
            0.0
        } else {
            tail / top
        }
    }
}

/// The standard center `f = (X₁, X₂, X₃, X₁X₃)` built from the inverse
/// stereographic embedding `X`.
pub fn standard_center(n: usize) -> Result<SphereField> {
    SphereField::from_fn(n, 4, |x| {
        let e = x.embed();
        vec![e[0], e[1], e[2], e[0] * e[2]]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_agree_on_overlap() {
        let f = standard_center(DEFAULT_CHART_N).unwrap();
        assert!(f.overlap_mismatch() < 1e-8);
        let x = SpherePoint::finite(Complex64::new(0.9, 0.6));
        let e = x.embed();
        let v = f.evaluate(&x);
        assert!((v[0] - e[0]).abs() < 1e-10 && (v[3] - e[0] * e[2]).abs() < 1e-10);
        let inf = f.evaluate(&SpherePoint::infinity());
        assert!((inf[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composition_with_mobius() {
        let f = standard_center(DEFAULT_CHART_N).unwrap();
        assert_eq!(f.compose_mobius(&MobiusElement::identity()).unwrap(), f);
        let g = MobiusElement::exp([Complex64::new(0.01, 0.0), Complex64::new(0.02, 0.01), Complex64::new(0.0, -0.01)], 1.0);
        let k = f.compose_mobius(&g).unwrap();
        let exact = SphereField::from_fn(DEFAULT_CHART_N, 4, |x| {
            let e = g.apply(x).embed();
            vec![e[0], e[1], e[2], e[0] * e[2]]
        })
        .unwrap();
        assert!(k.max_abs_diff(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn smooth_fields_have_small_high_band() {
        let f = standard_center(DEFAULT_CHART_N).unwrap();
        assert!(f.high_band_ratio() < 1e-10);
    }
}
