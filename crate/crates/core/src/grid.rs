//! Structured grids: the periodic torus `[0, 2π)²` and the square chart grids
//! used for the two stereographic charts of the sphere.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Half width of the square covering each stereographic chart disk `|z| <= 2`.
pub const CHART_HALF_WIDTH: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// Uniform periodic grid on `[0, 2π)²`.
    Torus,
    /// One chart of the stereographic pair: a Chebyshev (first kind) tensor
    /// grid on `[-L, L]²`.
    SpherePair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    domain: Domain,
    n: usize,
    half_width: f64,
}

/// Builds a grid with `resolution` nodes per axis.
pub fn make_grid(domain: Domain, resolution: usize) -> Result<GridSpec> {
    if resolution < 16 || !resolution.is_power_of_two() {
        return Err(LabError::Config(format!(
            "grid resolution must be a power of two >= 16, got {resolution}"
        )));
    }
    let half_width = match domain {
        Domain::Torus => PI,
        Domain::SpherePair => CHART_HALF_WIDTH,
    };
    Ok(GridSpec {
        domain,
        n: resolution,
        half_width,
    })
}

impl GridSpec {
    pub fn torus(resolution: usize) -> Result<Self> {
        make_grid(Domain::Torus, resolution)
    }

    pub fn chart(resolution: usize) -> Result<Self> {
        make_grid(Domain::SpherePair, resolution)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_torus(&self) -> bool {
        self.domain == Domain::Torus
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    /// Uniform spacing on the torus; mean spacing `2L/N` on a chart.
    pub fn spacing(&self) -> f64 {
        match self.domain {
            Domain::Torus => 2.0 * PI / self.n as f64,
            Domain::SpherePair => 2.0 * self.half_width / self.n as f64,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total measure of the domain covered by the grid.
    pub fn total_measure(&self) -> f64 {
        match self.domain {
            Domain::Torus => 4.0 * PI * PI,
            Domain::SpherePair => 4.0 * self.half_width * self.half_width,
        }
    }

    /// One-dimensional node coordinate along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        match self.domain {
            Domain::Torus => self.spacing() * i as f64,
            Domain::SpherePair => self.chart_basis().nodes[i],
        }
    }

    /// Position of node `idx = j * n + i` (i along x₁, j along x₂).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let (i, j) = (idx % self.n, idx / self.n);
        [self.coord(i), self.coord(j)]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.node_count()).map(|idx| self.point(idx)).collect()
    }

    /// Quadrature weight of every node. Uniform cell measure on the torus,
    /// tensor Fejér weights on a chart.
    pub fn weights(&self) -> Vec<f64> {
        match self.domain {
            Domain::Torus => {
                let h = self.spacing();
                vec![h * h; self.node_count()]
            }
            Domain::SpherePair => {
                let basis = self.chart_basis();
                let mut w = Vec::with_capacity(self.node_count());
                for j in 0..self.n {
                    for i in 0..self.n {
                        w.push(basis.weights[i] * basis.weights[j]);
                    }
                }
                w
            }
        }
    }

    pub fn cell_measure(&self) -> f64 {
        self.total_measure() / self.node_count() as f64
    }

    pub fn refined(&self) -> Result<Self> {
        make_grid(self.domain, self.n * 2)
    }

    pub(crate) fn chart_basis(&self) -> Arc<ChartBasis> {
        ChartBasis::cached(self.n, self.half_width)
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(LabError::GridMismatch(format!(
                "{:?}/{} vs {:?}/{}",
                self.domain, self.n, other.domain, other.n
            )));
        }
        Ok(())
    }
}

/// Chebyshev points of the first kind on `[-L, L]` with Fejér quadrature,
/// barycentric weights and the differentiation matrix.
#[derive(Debug)]
pub(crate) struct ChartBasis {
    pub n: usize,
    pub half_width: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    bary: Vec<f64>,
    /// Row-major `n x n` differentiation matrix in physical coordinates.
    pub diff: Vec<f64>,
}

impl ChartBasis {
    fn cached(n: usize, half_width: f64) -> Arc<ChartBasis> {
        type Cache = Mutex<HashMap<(usize, u64), Arc<ChartBasis>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("chart basis cache poisoned");
        guard
            .entry((n, half_width.to_bits()))
            .or_insert_with(|| Arc::new(ChartBasis::new(n, half_width)))
            .clone()
    }

    fn new(n: usize, half_width: f64) -> Self {
        let nf = n as f64;
        let theta: Vec<f64> = (0..n)
            .map(|k| (2.0 * k as f64 + 1.0) * PI / (2.0 * nf))
            .collect();
        // ascending order: x_k = -cos θ_k
        let unit: Vec<f64> = theta.iter().map(|t| -t.cos()).collect();
        let weights = theta
            .iter()
            .map(|&t| {
                let s: f64 = (1..=n / 2)
                    .map(|j| {
                        let jf = j as f64;
                        (2.0 * jf * t).cos() / (4.0 * jf * jf - 1.0)
                    })
                    .sum();
                half_width * (2.0 / nf) * (1.0 - 2.0 * s)
            })
            .collect();
        let bary: Vec<f64> = theta
            .iter()
            .enumerate()
            .map(|(k, t)| if k % 2 == 0 { t.sin() } else { -t.sin() })
            .collect();
        let mut diff = vec![0.0; n * n];
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    let d = (bary[j] / bary[i]) / (unit[i] - unit[j]);
                    diff[i * n + j] = d / half_width;
                    diag -= d;
                }
            }
            diff[i * n + i] = diag / half_width;
        }
        ChartBasis {
            n,
            half_width,
            nodes: unit.iter().map(|x| x * half_width).collect(),
            weights,
            bary,
            diff,
        }
    }

    fn unit(&self, x: f64) -> f64 {
        x / self.half_width
    }

    /// Lagrange cardinal values `l_j(x)`.
    pub fn cardinal(&self, x: f64) -> Vec<f64> {
        let s = self.unit(x);
        let mut out = vec![0.0; self.n];
        let mut denom = 0.0;
        for (j, &node) in self.nodes.iter().enumerate() {
            let diff = s - node / self.half_width;
            if diff == 0.0 {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[j] = 1.0;
                return out;
            }
            let t = self.bary[j] / diff;
            out[j] = t;
            denom += t;
        }
        out.iter_mut().for_each(|v| *v /= denom);
        out
    }

    /// Value and first derivative of the 1D interpolant of `data` at `x`.
    pub fn value_and_derivative(&self, x: f64, data: &[f64]) -> (f64, f64) {
        let s = self.unit(x);
        let unit_nodes = self.nodes.iter().map(|v| v / self.half_width);
        let mut near = None;
        for (j, node) in unit_nodes.enumerate() {
            if (s - node).abs() < 1e-9 {
                near = Some(j);
                break;
            }
        }
        let l = self.cardinal(x);
        let value: f64 = l.iter().zip(data).map(|(a, b)| a * b).sum();
        if let Some(j) = near {
            let row = &self.diff[j * self.n..(j + 1) * self.n];
            let dj: f64 = row.iter().zip(data).map(|(a, b)| a * b).sum();
            return (value, dj);
        }
        // Schneider-Werner formula for the derivative.
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, &node) in self.nodes.iter().enumerate() {
            let diff = s - node / self.half_width;
            let t = self.bary[j] / diff;
            num += t * (value - data[j]) / diff;
            den += t;
        }
        (value, num / den / self.half_width)
    }

    /// Chebyshev coefficients of the interpolant through the node values.
    pub fn chebyshev_coefficients(&self, data: &[f64]) -> Vec<f64> {
        let n = self.n;
        let nf = n as f64;
        (0..n)
            .map(|m| {
                let s: f64 = (0..n)
                    .map(|k| {
                        // node k (ascending) equals -cos θ_k = cos(π - θ_k)
                        let theta = PI - (2.0 * k as f64 + 1.0) * PI / (2.0 * nf);
                        data[k] * (m as f64 * theta).cos()
                    })
                    .sum();
                if m == 0 {
                    s / nf
                } else {
                    2.0 * s / nf
                }
            })
            .collect()
    }
}
