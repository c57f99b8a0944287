//! Elements of `PSL(2, ℂ)` and the three-point construction.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::sphere::point::SpherePoint;

/// Radius of the near-identity neighbourhood `G_e`, in coefficient distance.
pub const EPSILON_G: f64 = 0.1;

/// `z ↦ (az + b)/(cz + d)` normalised to `ad − bc = 1` and `Re(a + d) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusElement {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl MobiusElement {
    pub fn identity() -> Self {
        MobiusElement { a: c(1.0), b: c(0.0), c: c(0.0), d: c(1.0) }
    }

    /// Normalises `(a, b, c, d)`; a singular matrix is a construction error.
    pub fn new(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * cc;
        let scale = [a, b, cc, d].iter().map(|v| v.norm_sqr()).sum::<f64>();
        if !(det.norm() > 1e-14 * scale) {
            return Err(LabError::Construction(format!("singular Möbius matrix, det = {det}")));
        }
        let s = det.sqrt().inv();
        let mut m = MobiusElement { a: a * s, b: b * s, c: cc * s, d: d * s };
        let tr = m.a + m.d;
        if tr.re < 0.0 || (tr.re == 0.0 && tr.im < 0.0) {
            m = MobiusElement { a: -m.a, b: -m.b, c: -m.c, d: -m.d };
        }
        Ok(m)
    }

    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_identity(&self) -> bool {
        *self == MobiusElement::identity()
    }

    /// Frobenius distance of the normalised matrix to the identity.
    pub fn distance_to_identity(&self) -> f64 {
        ((self.a - 1.0).norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + (self.d - 1.0).norm_sqr()).sqrt()
    }

    /// Coefficient distance to `other`.
    pub fn distance(&self, other: &MobiusElement) -> f64 {
        self.coefficients()
            .iter()
            .zip(other.coefficients().iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_near_identity(&self) -> bool {
        self.distance_to_identity() < EPSILON_G
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusElement) -> MobiusElement {
        let m = MobiusElement {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        };
        MobiusElement::new(m.a, m.b, m.c, m.d).expect("product of invertible matrices")
    }

    pub fn inverse(&self) -> MobiusElement {
        MobiusElement::new(self.d, -self.b, -self.c, self.a).expect("inverse of invertible matrix")
    }

    pub fn apply(&self, x: &SpherePoint) -> SpherePoint {
        let (p, q) = x.coords();
        SpherePoint::homogeneous(self.a * p + self.b * q, self.c * p + self.d * q)
            .expect("invertible matrix maps nonzero vectors to nonzero vectors")
    }

    /// Infinitesimal generator scaled by `t`: `exp(t X)` for
    /// `X = [[x₁, x₂], [x₃, −x₁]]`, computed from the closed form of the
    /// exponential of a traceless matrix.
    pub fn exp(x: [Complex64; 3], t: f64) -> MobiusElement {
        let (p, q, r) = (x[0] * t, x[1] * t, x[2] * t);
        let disc = (p * p + q * r).sqrt();
        let (ch, sh_over) = if disc.norm() < 1e-8 {
            let d2 = p * p + q * r;
            (1.0 + d2 / 2.0, 1.0 + d2 / 6.0)
        } else {
            (disc.cosh(), disc.sinh() / disc)
        };
        MobiusElement::new(ch + sh_over * p, sh_over * q, sh_over * r, ch - sh_over * p)
            .expect("exponential is invertible")
    }
}

/// Seeded element `exp(t X)` with a random traceless generator `X` and
/// `distance_to_identity` drawn uniformly from `[0, max_distance]`.
pub fn sample_near_identity(seed: u64, max_distance: f64) -> MobiusElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: [Complex64; 3] =
        std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let target = max_distance * rng.random::<f64>();
    let gen_norm = (2.0 * x[0].norm_sqr() + x[1].norm_sqr() + x[2].norm_sqr()).sqrt();
    if target == 0.0 || gen_norm == 0.0 {
        return MobiusElement::identity();
    }
    let (mut lo, mut hi) = (0.0, 2.0 * target / gen_norm);
    while MobiusElement::exp(x, hi).distance_to_identity() < target {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if MobiusElement::exp(x, mid).distance_to_identity() <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    MobiusElement::exp(x, lo)
}

/// Cross products `p_i q_j − p_j q_i`.
fn cross(x: &SpherePoint, y: &SpherePoint) -> Complex64 {
    let (p1, q1) = x.coords();
    let (p2, q2) = y.coords();
    p1 * q2 - p2 * q1
}

/// The Möbius map sending `(0, 1, ∞)` to `(y₁, y₂, y₃)`.
pub fn mobius_from_triple(y1: &SpherePoint, y2: &SpherePoint, y3: &SpherePoint) -> Result<MobiusElement> {
    let pairs = [(y1, y2, "y1 = y2"), (y1, y3, "y1 = y3"), (y2, y3, "y2 = y3")];
    for (u, v, label) in pairs {
        let (pu, qu) = u.coords();
        let (pv, qv) = v.coords();
        let scale = (pu.norm_sqr() + qu.norm_sqr()).sqrt() * (pv.norm_sqr() + qv.norm_sqr()).sqrt();
        if cross(u, v).norm() <= 1e-14 * scale {
            return Err(LabError::DegenerateTriple(label.into()));
        }
    }
    let (p1, q1) = y1.coords();
    let (p3, q3) = y3.coords();
    let lambda = -cross(y1, y2);
    let mu = -cross(y2, y3);
    MobiusElement::new(lambda * p3, mu * p1, lambda * q3, mu * q1)
}

/// As [`mobius_from_triple`], additionally requiring the result to lie in the
/// near-identity neighbourhood of radius [`EPSILON_G`].
pub fn mobius_from_triple_local(y1: &SpherePoint, y2: &SpherePoint, y3: &SpherePoint) -> Result<MobiusElement> {
    let g = mobius_from_triple(y1, y2, y3)?;
    let distance = g.distance_to_identity();
    if distance >= EPSILON_G {
        return Err(LabError::OutOfNeighborhood { distance, radius: EPSILON_G });
    }
    Ok(g)
}

/// Largest chordal error of `γ` at the marked points `0, 1, ∞` against `(y₁, y₂, y₃)`.
pub fn marked_point_residual(g: &MobiusElement, ys: [&SpherePoint; 3]) -> f64 {
    let marked = [SpherePoint::real(0.0), SpherePoint::real(1.0), SpherePoint::infinity()];
    marked
        .iter()
        .zip(ys)
        .map(|(x, y)| g.apply(x).chordal_distance(y))
        .fold(0.0, f64::max)
}
