//! Points of the Riemann sphere and the two stereographic charts.
//!
//! Chart A carries the coordinate `z`, chart B the coordinate `w = 1/z`; both
//! are sampled on `[−2, 2]²`. The blend `ρ_A(z) = 1 − h((ln|z| + ln 2)/(2 ln 2))`
//! equals 1 on `|z| <= 1/2`, 0 on `|z| >= 2`, and `ρ_B(w) = ρ_A(w)` satisfies
//! `ρ_A(z) + ρ_B(1/z) = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diffeo::smooth_step;

/// Chordal radius below which two sphere points are treated as equal.
pub const POINT_TOLERANCE: f64 = 1e-14;

/// The two stereographic charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    /// Coordinate `z`, centred at `0`.
    A,
    /// Coordinate `w = 1/z`, centred at `∞`.
    B,
}

impl Chart {
    pub fn both() -> [Chart; 2] {
        [Chart::A, Chart::B]
    }
}

/// A point `[p : q]` of `ℂP¹`; `q = 0` is `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    p: Complex64,
    q: Complex64,
}

impl SpherePoint {
    pub fn finite(z: Complex64) -> Self {
        SpherePoint { p: z, q: Complex64::new(1.0, 0.0) }
    }

    pub fn real(x: f64) -> Self {
        SpherePoint::finite(Complex64::new(x, 0.0))
    }

    pub fn infinity() -> Self {
        SpherePoint { p: Complex64::new(1.0, 0.0), q: Complex64::new(0.0, 0.0) }
    }

    /// `[p : q]`; `None` when both coordinates vanish.
    pub fn homogeneous(p: Complex64, q: Complex64) -> Option<Self> {
        if p.norm() == 0.0 && q.norm() == 0.0 {
            return None;
        }
        Some(SpherePoint { p, q })
    }

    /// The point with coordinate `u` in chart `c`.
    pub fn from_chart(c: Chart, u: Complex64) -> Self {
        match c {
            Chart::A => SpherePoint::finite(u),
            Chart::B => SpherePoint { p: Complex64::new(1.0, 0.0), q: u },
        }
    }

    pub fn coords(&self) -> (Complex64, Complex64) {
        (self.p, self.q)
    }

    pub fn is_infinity(&self) -> bool {
        self.q.norm() == 0.0
    }

    /// Coordinate in chart `c`, or `None` at that chart's pole.
    pub fn chart_coord(&self, c: Chart) -> Option<Complex64> {
        match c {
            Chart::A if self.q.norm() > 0.0 => Some(self.p / self.q),
            Chart::B if self.p.norm() > 0.0 => Some(self.q / self.p),
            _ => None,
        }
    }

    /// Affine value `z`, or `None` at `∞`.
    pub fn z(&self) -> Option<Complex64> {
        self.chart_coord(Chart::A)
    }

    /// Unit-sphere image under inverse stereographic projection.
    pub fn embed(&self) -> [f64; 3] {
        let (p, q) = (self.p, self.q);
        let n = p.norm_sqr() + q.norm_sqr();
        let pq = p * q.conj();
        [2.0 * pq.re / n, 2.0 * pq.im / n, (p.norm_sqr() - q.norm_sqr()) / n]
    }

    /// Chordal distance (on the unit sphere) to `other`.
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        let (a, b) = (self.embed(), other.embed());
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        self.chordal_distance(other) <= tol
    }
}

/// Blend weight `ρ_c` of chart `c` at a chart coordinate `u`.
pub fn chart_weight(u: Complex64) -> f64 {
    let r = u.norm();
    if r == 0.0 {
        return 1.0;
    }
    let ln2 = std::f64::consts::LN_2;
    1.0 - smooth_step((r.ln() + ln2) / (2.0 * ln2)).0
}

/// Blend weight of chart `c` at a sphere point (0 at the chart's pole).
pub fn point_weight(c: Chart, x: &SpherePoint) -> f64 {
    x.chart_coord(c).map_or(0.0, chart_weight)
}
