//! Exact differentiation and off-grid evaluation of the trigonometric
//! interpolant on the torus, and Chebyshev differentiation on chart grids.
//!
//! The torus interpolant splits the Nyquist coefficient symmetrically between
//! `±N/2`, so it is real-valued and every derivative of it is well defined.
//! Evaluated at a node, the Nyquist bin contributes `Re(i^d) (N/2)^d`, i.e. it
//! vanishes for odd derivative orders and is kept for even ones.

use std::cell::RefCell;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{LabError, Result};
use crate::field::DiscreteField;
use crate::grid::Domain;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalised 2D FFT of an `n x n` row-major array.
pub(crate) fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            column[j] = data[j * n + i];
        }
        fft.process(&mut column);
        for j in 0..n {
            data[j * n + i] = column[j];
        }
    }
}

/// Signed wavenumber of FFT bin `b`; `None` for the Nyquist bin.
pub(crate) fn wavenumber(b: usize, n: usize) -> Option<i64> {
    use std::cmp::Ordering;
    match b.cmp(&(n / 2)) {
        Ordering::Less => Some(b as i64),
        Ordering::Equal => None,
        Ordering::Greater => Some(b as i64 - n as i64),
    }
}

fn i_pow(d: usize) -> Complex64 {
    match d % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Basis value of bin `b` for derivative order `d` at coordinate `x`:
/// `(ik)^d e^{ikx}`, with the Nyquist bin replaced by its real symmetric split.
pub(crate) fn axis_factor(b: usize, n: usize, d: usize, x: f64) -> Complex64 {
    match wavenumber(b, n) {
        Some(k) => {
            let kf = k as f64;
            let phase = Complex64::from_polar(1.0, kf * x);
            i_pow(d) * kf.powi(d as i32) * phase
        }
        None => {
            let half = n as f64 / 2.0;
            let v = i_pow(d) * Complex64::from_polar(1.0, half * x);
            Complex64::new(half.powi(d as i32) * v.re, 0.0)
        }
    }
}

/// Fourier coefficients of every component of a torus field.
#[derive(Debug, Clone)]
pub(crate) struct TorusSpectrum {
    n: usize,
    coeffs: Vec<Vec<Complex64>>,
}

impl TorusSpectrum {
    pub fn new(f: &DiscreteField) -> Result<Self> {
        if f.grid().domain() != Domain::Torus {
            return Err(LabError::GridMismatch("expected a torus field".into()));
        }
        let n = f.grid().n();
        let coeffs = f
            .components()
            .map(|comp| {
                let mut buf: Vec<Complex64> =
                    comp.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fft2(&mut buf, n, false);
                buf
            })
            .collect();
        Ok(TorusSpectrum { n, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Derivative `∂₁^{d₁}∂₂^{d₂}` of the interpolant sampled at the shifted
    /// nodes `x + shift`.
    pub fn node_derivative(&self, c: usize, order: [usize; 2], shift: [f64; 2]) -> Vec<f64> {
        let n = self.n;
        let m1: Vec<Complex64> = (0..n).map(|b| axis_factor(b, n, order[0], shift[0])).collect();
        let m2: Vec<Complex64> = (0..n).map(|b| axis_factor(b, n, order[1], shift[1])).collect();
        let mut buf: Vec<Complex64> = self.coeffs[c]
            .iter()
            .enumerate()
            .map(|(idx, v)| v * m1[idx % n] * m2[idx / n])
            .collect();
        fft2(&mut buf, n, true);
        let scale = 1.0 / (n * n) as f64;
        buf.iter().map(|v| v.re * scale).collect()
    }

    /// Values of the requested derivatives of every component at `point`;
    /// result indexed `[order][component]`.
    pub fn eval_point(&self, point: [f64; 2], orders: &[[usize; 2]]) -> Vec<Vec<f64>> {
        let n = self.n;
        let max1 = orders.iter().map(|o| o[0]).max().unwrap_or(0);
        let max2 = orders.iter().map(|o| o[1]).max().unwrap_or(0);
        let basis1: Vec<Vec<Complex64>> = (0..=max1)
            .map(|d| (0..n).map(|b| axis_factor(b, n, d, point[0])).collect())
            .collect();
        let basis2: Vec<Vec<Complex64>> = (0..=max2)
            .map(|d| (0..n).map(|b| axis_factor(b, n, d, point[1])).collect())
            .collect();
        let scale = 1.0 / (n * n) as f64;
        let mut out = vec![vec![0.0; self.dim()]; orders.len()];
        for (c, coeffs) in self.coeffs.iter().enumerate() {
            // row sums S[d1][b2] = Σ_b1 C[b2][b1] B1_d1[b1]
            let mut rows: Vec<Option<Vec<Complex64>>> = vec![None; max1 + 1];
            for o in orders {
                if rows[o[0]].is_none() {
                    let b1 = &basis1[o[0]];
                    rows[o[0]] = Some(
                        coeffs
                            .chunks(n)
                            .map(|row| {
                                row.iter()
                                    .zip(b1)
                                    .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b)
                            })
                            .collect(),
                    );
                }
            }
            for (oi, o) in orders.iter().enumerate() {
                let s = rows[o[0]].as_ref().expect("row sums computed");
                let v = s
                    .iter()
                    .zip(&basis2[o[1]])
                    .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b);
                out[oi][c] = v.re * scale;
            }
        }
        out
    }
}

/// Derivative fields of `f`'s interpolant evaluated at `mapped[node]` for each
/// requested order. Nodes whose mapped position equals the node itself reuse
/// the FFT-sampled derivative; a global `shift` uses the FFT path throughout.
pub(crate) fn derivatives_at_mapped(
    f: &DiscreteField,
    orders: &[[usize; 2]],
    mapped: &[[f64; 2]],
    shift: Option<[f64; 2]>,
) -> Result<Vec<DiscreteField>> {
    let spectrum = TorusSpectrum::new(f)?;
    let grid = *f.grid();
    let nodes = grid.node_count();
    let dim = f.dim();
    if let Some(s) = shift {
        return orders
            .iter()
            .map(|&o| {
                let comps = (0..dim).map(|c| spectrum.node_derivative(c, o, s)).collect();
                DiscreteField::from_components(grid, comps)
            })
            .collect();
    }
    let mut out: Vec<Vec<f64>> = orders
        .iter()
        .map(|&o| {
            (0..dim)
                .flat_map(|c| spectrum.node_derivative(c, o, [0.0, 0.0]))
                .collect()
        })
        .collect();
    let moved: Vec<usize> = (0..nodes)
        .filter(|&idx| mapped[idx] != grid.point(idx))
        .collect();
    let evaluated: Vec<Vec<Vec<f64>>> = moved
        .par_iter()
        .map(|&idx| spectrum.eval_point(mapped[idx], orders))
        .collect();
    for (&idx, vals) in moved.iter().zip(evaluated) {
        for (oi, per_comp) in vals.into_iter().enumerate() {
            for (c, v) in per_comp.into_iter().enumerate() {
                out[oi][c * nodes + idx] = v;
            }
        }
    }
    out.into_iter()
        .map(|values| DiscreteField::from_values(grid, dim, values))
        .collect()
}

/// Chart-local partial derivative `∂₁^{d₁}∂₂^{d₂}` via the Chebyshev
/// differentiation matrix.
pub(crate) fn chart_derivative(f: &DiscreteField, order: [usize; 2]) -> Result<DiscreteField> {
    let grid = *f.grid();
    if grid.domain() != Domain::SpherePair {
        return Err(LabError::GridMismatch("expected a chart field".into()));
    }
    let basis = grid.chart_basis();
    let n = grid.n();
    let apply = |data: &[f64], axis: usize| -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for line in 0..n {
            for i in 0..n {
                let row = &basis.diff[i * n..(i + 1) * n];
                let mut acc = 0.0;
                for (k, d) in row.iter().enumerate() {
                    let idx = if axis == 0 { line * n + k } else { k * n + line };
                    acc += d * data[idx];
                }
                let target = if axis == 0 { line * n + i } else { i * n + line };
                out[target] = acc;
            }
        }
        out
    };
    let comps = f
        .components()
        .map(|comp| {
            let mut data = comp.to_vec();
            for _ in 0..order[0] {
                data = apply(&data, 0);
            }
            for _ in 0..order[1] {
                data = apply(&data, 1);
            }
            data
        })
        .collect();
    DiscreteField::from_components(grid, comps)
}

/// Derivative of any grid field: spectral on the torus, Chebyshev on charts.
pub fn partial_derivative(f: &DiscreteField, order: [usize; 2]) -> Result<DiscreteField> {
    match f.grid().domain() {
        Domain::Torus => {
            let spectrum = TorusSpectrum::new(f)?;
            let comps = (0..f.dim())
                .map(|c| spectrum.node_derivative(c, order, [0.0, 0.0]))
                .collect();
            DiscreteField::from_components(*f.grid(), comps)
        }
        Domain::SpherePair => chart_derivative(f, order),
    }
}

/// `(∂_{x₁} f, ∂_{x₂} f)` by exact differentiation of the interpolant.
pub fn spectral_gradient(f: &DiscreteField) -> Result<(DiscreteField, DiscreteField)> {
    Ok((partial_derivative(f, [1, 0])?, partial_derivative(f, [0, 1])?))
}

/// Value of the torus interpolant (and optional derivative order) at an
/// arbitrary point.
pub(crate) fn torus_eval(f: &DiscreteField, point: [f64; 2], order: [usize; 2]) -> Result<Vec<f64>> {
    let spectrum = TorusSpectrum::new(f)?;
    Ok(spectrum.eval_point(point, &[order]).remove(0))
}

/// Value of a chart interpolant at chart coordinates `point`.
pub(crate) fn chart_eval(f: &DiscreteField, point: [f64; 2]) -> Vec<f64> {
    let grid = f.grid();
    let basis = grid.chart_basis();
    let n = grid.n();
    let lx = basis.cardinal(point[0]);
    let ly = basis.cardinal(point[1]);
    f.components()
        .map(|comp| {
            let mut acc = 0.0;
            for (j, wy) in ly.iter().enumerate() {
                if *wy == 0.0 {
                    continue;
                }
                let row = &comp[j * n..(j + 1) * n];
                let s: f64 = row.iter().zip(&lx).map(|(a, b)| a * b).sum();
                acc += wy * s;
            }
            acc
        })
        .collect()
}

/// Value and chart-coordinate gradient (columns ∂₁, ∂₂) of a chart interpolant.
pub(crate) fn chart_eval_with_gradient(f: &DiscreteField, point: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let grid = f.grid();
    let basis = grid.chart_basis();
    let n = grid.n();
    let lx = basis.cardinal(point[0]);
    let ly = basis.cardinal(point[1]);
    let mut values = Vec::with_capacity(f.dim());
    let mut grads = Vec::with_capacity(f.dim());
    for comp in f.components() {
        // contract along x₂ first: u_i = Σ_j ly_j v[i, j]
        let mut u = vec![0.0; n];
        for (j, wy) in ly.iter().enumerate() {
            if *wy == 0.0 {
                continue;
            }
            for i in 0..n {
                u[i] += wy * comp[j * n + i];
            }
        }
        let (value, d1) = basis.value_and_derivative(point[0], &u);
        // contract along x₁: w_j = Σ_i lx_i v[i, j]
        let w: Vec<f64> = (0..n)
            .map(|j| comp[j * n..(j + 1) * n].iter().zip(&lx).map(|(a, b)| a * b).sum())
            .collect();
        let (_, d2) = basis.value_and_derivative(point[1], &w);
        values.push(value);
        grads.push([d1, d2]);
    }
    (values, grads)
}
