//! Parametrized diffeomorphism families `T: B_ε × T² → T²` with closed-form
//! parameter partials and Jacobians.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Minimum of `det Jac T_a` required over the closed parameter ball.
pub const MIN_JACOBIAN: f64 = 0.5;

/// A smooth family of orientation-preserving diffeomorphisms of the torus.
pub trait DiffeoFamily: Send + Sync {
    /// Parameter dimension `n`.
    fn param_dim(&self) -> usize;
    /// Radius `ε` of the admissible parameter ball.
    fn radius(&self) -> f64;
    /// `T_a(x)` as a point of `ℝ²` (not reduced modulo `2π`).
    fn map(&self, a: &[f64], x: [f64; 2]) -> [f64; 2];
    /// `∂^β_a T(a, x)` for a nonempty list `axes` of parameter indices.
    fn param_partial(&self, a: &[f64], x: [f64; 2], axes: &[usize]) -> [f64; 2];
    /// Order above which every parameter partial vanishes identically.
    fn max_param_order(&self) -> Option<usize> {
        None
    }
    /// Spatial Jacobian `[[∂₁T₁, ∂₂T₁], [∂₁T₂, ∂₂T₂]]`.
    fn jacobian(&self, a: &[f64], x: [f64; 2]) -> [[f64; 2]; 2];
    fn jacobian_inverse(&self, a: &[f64], x: [f64; 2]) -> [[f64; 2]; 2] {
        let j = self.jacobian(a, x);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]]
    }
    /// `T_a^{-1}(y)`.
    fn inverse_map(&self, a: &[f64], y: [f64; 2]) -> [f64; 2];
    /// `Some(a)` when `T_a` is the rigid shift by a vector.
    fn translation_shift(&self, _a: &[f64]) -> Option<[f64; 2]> {
        None
    }
}

pub(crate) fn det2(j: &[[f64; 2]; 2]) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// Periodic difference `x − y` reduced to `(−π, π]`.
pub(crate) fn periodic_delta(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

/// `h(t) = e(t) / (e(t) + e(1 − t))` with `e(t) = exp(−1/t)`: a `C^∞` step
/// from 0 on `t <= 0` to 1 on `t >= 1`. Returns `(h, h')`.
pub(crate) fn smooth_step(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let g = 1.0 / t - 1.0 / (1.0 - t);
    let dg = -1.0 / (t * t) - 1.0 / ((1.0 - t) * (1.0 - t));
    let h = 1.0 / (1.0 + g.exp());
    (h, -h * (1.0 - h) * dg)
}

/// Radial plateau `ψ(ρ)`: 1 on `ρ <= r`, 0 on `ρ >= 2r`, returns `(ψ, ψ')`.
#[derive(Debug, Clone, Copy)]
struct Plateau {
    r: f64,
}

impl Plateau {
    fn eval(&self, rho: f64) -> (f64, f64) {
        let (h, dh) = smooth_step((rho - self.r) / self.r);
        (1.0 - h, -dh / self.r)
    }

    fn max_slope(&self) -> f64 {
        (0..=4000)
            .map(|i| self.eval(self.r * (1.0 + i as f64 / 4000.0)).1.abs())
            .fold(0.0, f64::max)
    }
}

/// Local polar data of `x` around `x0`: periodic offset, distance, unit vector.
fn polar(x0: [f64; 2], x: [f64; 2]) -> ([f64; 2], f64, [f64; 2]) {
    let d = [periodic_delta(x[0], x0[0]), periodic_delta(x[1], x0[1])];
    let rho = d[0].hypot(d[1]);
    let u = if rho > 0.0 { [d[0] / rho, d[1] / rho] } else { [0.0, 0.0] };
    (d, rho, u)
}

fn fixed_point_inverse<F: Fn([f64; 2]) -> [f64; 2]>(displacement: F, y: [f64; 2]) -> [f64; 2] {
    let mut x = y;
    for _ in 0..200 {
        let d = displacement(x);
        let next = [y[0] - d[0], y[1] - d[1]];
        let step = (next[0] - x[0]).abs().max((next[1] - x[1]).abs());
        x = next;
        if step < 1e-15 {
            break;
        }
    }
    x
}

/// Rigid translations `T_a(x) = x + a`.
#[derive(Debug, Clone)]
pub struct Translation {
    radius: f64,
}

impl Translation {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(LabError::Construction(format!("radius {radius} must be positive")));
        }
        Ok(Translation { radius })
    }
}

impl DiffeoFamily for Translation {
    fn param_dim(&self) -> usize {
        2
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn map(&self, a: &[f64], x: [f64; 2]) -> [f64; 2] {
        [x[0] + a[0], x[1] + a[1]]
    }
    fn param_partial(&self, _a: &[f64], _x: [f64; 2], axes: &[usize]) -> [f64; 2] {
        match axes {
            [0] => [1.0, 0.0],
            [1] => [0.0, 1.0],
            _ => [0.0, 0.0],
        }
    }
    fn max_param_order(&self) -> Option<usize> {
        Some(1)
    }
    fn jacobian(&self, _a: &[f64], _x: [f64; 2]) -> [[f64; 2]; 2] {
        [[1.0, 0.0], [0.0, 1.0]]
    }
    fn inverse_map(&self, a: &[f64], y: [f64; 2]) -> [f64; 2] {
        [y[0] - a[0], y[1] - a[1]]
    }
    fn translation_shift(&self, a: &[f64]) -> Option<[f64; 2]> {
        Some([a[0], a[1]])
    }
}

/// Compactly supported translations `T_a(x) = x + ψ(|x − x₀|) a`: the shift by
/// `a` on the `r`-disk, the identity outside the `2r`-disk.
#[derive(Debug, Clone)]
pub struct ShearBump {
    center: [f64; 2],
    plateau: Plateau,
    radius: f64,
}

impl ShearBump {
    /// `ε = 0.5 / max|ψ'|`, which keeps `det Jac = 1 + ψ'(ρ)(a·u) >= 0.5`.
    pub fn new(center: [f64; 2], r: f64) -> Result<Self> {
        if !(r > 0.0 && 2.0 * r < PI) {
            return Err(LabError::Construction(format!(
                "bump radius r = {r} must satisfy 0 < 2r < π"
            )));
        }
        let plateau = Plateau { r };
        let radius = (1.0 - MIN_JACOBIAN) / plateau.max_slope();
        Ok(ShearBump { center, plateau, radius })
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn bump_radius(&self) -> f64 {
        self.plateau.r
    }

    fn displacement(&self, a: &[f64], x: [f64; 2]) -> [f64; 2] {
        let (_, rho, _) = polar(self.center, x);
        let (psi, _) = self.plateau.eval(rho);
        [psi * a[0], psi * a[1]]
    }
}

impl DiffeoFamily for ShearBump {
    fn param_dim(&self) -> usize {
        2
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn map(&self, a: &[f64], x: [f64; 2]) -> [f64; 2] {
        let d = self.displacement(a, x);
        [x[0] + d[0], x[1] + d[1]]
    }
    fn param_partial(&self, _a: &[f64], x: [f64; 2], axes: &[usize]) -> [f64; 2] {
        let (_, rho, _) = polar(self.center, x);
        let (psi, _) = self.plateau.eval(rho);
        match axes {
            [0] => [psi, 0.0],
            [1] => [0.0, psi],
            _ => [0.0, 0.0],
        }
    }
    fn max_param_order(&self) -> Option<usize> {
        Some(1)
    }
    fn jacobian(&self, a: &[f64], x: [f64; 2]) -> [[f64; 2]; 2] {
        let (_, rho, u) = polar(self.center, x);
        let (_, dpsi) = self.plateau.eval(rho);
        [
            [1.0 + dpsi * a[0] * u[0], dpsi * a[0] * u[1]],
            [dpsi * a[1] * u[0], 1.0 + dpsi * a[1] * u[1]],
        ]
    }
    fn inverse_map(&self, a: &[f64], y: [f64; 2]) -> [f64; 2] {
        fixed_point_inverse(|x| self.displacement(a, x), y)
    }
}

/// Localized Möbius pushforward `T_a(x) = x + ψ(|x − x₀|) ℓ (γ_a(z) − z)` with
/// `z = (x − x₀)/ℓ` and `γ_a(z) = (Az + B)/(Cz + 1)`, where
/// `A = 1 + a₁ + i a₂`, `B = a₃ + i a₄`, `C = a₅ + i a₆`.
#[derive(Debug, Clone)]
pub struct MobiusPushforward {
    center: [f64; 2],
    plateau: Plateau,
    scale: f64,
    radius: f64,
}

fn mobius_coeffs(a: &[f64]) -> (Complex64, Complex64, Complex64) {
    (
        Complex64::new(1.0 + a[0], a[1]),
        Complex64::new(a[2], a[3]),
        Complex64::new(a[4], a[5]),
    )
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

impl MobiusPushforward {
    pub fn new(center: [f64; 2], r: f64, scale: f64, radius: f64) -> Result<Self> {
        if !(r > 0.0 && 2.0 * r < PI) {
            return Err(LabError::Construction(format!(
                "bump radius r = {r} must satisfy 0 < 2r < π"
            )));
        }
        if !(scale > 0.0 && radius > 0.0) {
            return Err(LabError::Construction("scale and radius must be positive".into()));
        }
        let fam = MobiusPushforward { center, plateau: Plateau { r }, scale, radius };
        let min_det = fam.min_jacobian_on_ball(48);
        if min_det < MIN_JACOBIAN {
            return Err(LabError::Construction(format!(
                "min det Jac = {min_det:.4} < {MIN_JACOBIAN} on the ball of radius {radius}"
            )));
        }
        Ok(fam)
    }

    fn z(&self, x: [f64; 2]) -> (Complex64, f64, [f64; 2]) {
        let (d, rho, u) = polar(self.center, x);
        (Complex64::new(d[0], d[1]) / self.scale, rho, u)
    }

    fn gamma(&self, a: &[f64], z: Complex64) -> Complex64 {
        let (ca, cb, cc) = mobius_coeffs(a);
        (ca * z + cb) / (cc * z + 1.0)
    }

    fn displacement(&self, a: &[f64], x: [f64; 2]) -> [f64; 2] {
        let (z, rho, _) = self.z(x);
        let (psi, _) = self.plateau.eval(rho);
        let d = (self.gamma(a, z) - z) * (psi * self.scale);
        [d.re, d.im]
    }

    /// Minimum of `det Jac T_a` over parameter directions on the sphere of
    /// radius `ε` and a polar sample of the support.
    pub fn min_jacobian_on_ball(&self, samples: usize) -> f64 {
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for j in 0..6 {
            for s in [-1.0, 1.0] {
                let mut a = vec![0.0; 6];
                a[j] = s * self.radius;
                dirs.push(a);
            }
        }
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..64 {
            let mut a: Vec<f64> = (0..6)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            a.iter_mut().for_each(|v| *v *= self.radius / norm);
            dirs.push(a);
        }
        let r2 = 2.0 * self.plateau.r;
        let mut min = f64::INFINITY;
        for a in &dirs {
            for i in 0..=samples {
                let rho = r2 * i as f64 / samples as f64;
                for t in 0..samples {
                    let th = 2.0 * PI * t as f64 / samples as f64;
                    let x = [self.center[0] + rho * th.cos(), self.center[1] + rho * th.sin()];
                    min = min.min(det2(&self.jacobian(a, x)));
                }
            }
        }
        min
    }
}

impl DiffeoFamily for MobiusPushforward {
    fn param_dim(&self) -> usize {
        6
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn map(&self, a: &[f64], x: [f64; 2]) -> [f64; 2] {
        let d = self.displacement(a, x);
        [x[0] + d[0], x[1] + d[1]]
    }
    fn param_partial(&self, a: &[f64], x: [f64; 2], axes: &[usize]) -> [f64; 2] {
        let (z, rho, _) = self.z(x);
        let (psi, _) = self.plateau.eval(rho);
        if psi == 0.0 {
            return [0.0, 0.0];
        }
        let (ca, cb, cc) = mobius_coeffs(a);
        let mut factor = Complex64::new(1.0, 0.0);
        let (mut n_a, mut n_b, mut n_c) = (0usize, 0usize, 0usize);
        for &j in axes {
            if j % 2 == 1 {
                factor *= Complex64::i();
            }
            match j / 2 {
                0 => n_a += 1,
                1 => n_b += 1,
                _ => n_c += 1,
            }
        }
        if n_a + n_b >= 2 {
            return [0.0, 0.0];
        }
        let denom = cc * z + 1.0;
        let sign = if n_c % 2 == 0 { 1.0 } else { -1.0 };
        let base = z.powu(n_c as u32) * (sign * factorial(n_c)) / denom.powu(n_c as u32 + 1);
        let partial = if n_a == 1 {
            z * base
        } else if n_b == 1 {
            base
        } else {
            (ca * z + cb) * base
        };
        let v = factor * partial * (psi * self.scale);
        [v.re, v.im]
    }
    fn jacobian(&self, a: &[f64], x: [f64; 2]) -> [[f64; 2]; 2] {
        let (z, rho, u) = self.z(x);
        let (psi, dpsi) = self.plateau.eval(rho);
        let (ca, cb, cc) = mobius_coeffs(a);
        let denom = cc * z + 1.0;
        let disp = (ca * z + cb) / denom - z;
        let dd = (ca - cb * cc) / (denom * denom) - 1.0;
        let l = self.scale;
        [
            [1.0 + psi * dd.re + l * disp.re * dpsi * u[0], -psi * dd.im + l * disp.re * dpsi * u[1]],
            [psi * dd.im + l * disp.im * dpsi * u[0], 1.0 + psi * dd.re + l * disp.im * dpsi * u[1]],
        ]
    }
    fn inverse_map(&self, a: &[f64], y: [f64; 2]) -> [f64; 2] {
        fixed_point_inverse(|x| self.displacement(a, x), y)
    }
}

/// Selector for the built-in families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Translation,
    MobiusPushforward,
    ShearBump,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Translation => "translation",
            FamilyKind::MobiusPushforward => "mobius-pushforward",
            FamilyKind::ShearBump => "shear-bump",
        }
    }
}

/// Constructor parameters; unused entries are ignored by a given kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyParams {
    pub center: [f64; 2],
    pub bump_radius: f64,
    pub scale: f64,
    pub radius: Option<f64>,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams { center: [PI, PI], bump_radius: 1.0, scale: 1.0, radius: None }
    }
}

/// One of the built-in families behind a shared handle.
#[derive(Clone)]
pub enum BuiltinFamily {
    Translation(Translation),
    ShearBump(ShearBump),
    MobiusPushforward(MobiusPushforward),
}

impl std::fmt::Debug for BuiltinFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(n={}, ε={})", self.kind().name(), self.param_dim(), self.radius())
    }
}

impl BuiltinFamily {
    pub fn kind(&self) -> FamilyKind {
        match self {
            BuiltinFamily::Translation(_) => FamilyKind::Translation,
            BuiltinFamily::ShearBump(_) => FamilyKind::ShearBump,
            BuiltinFamily::MobiusPushforward(_) => FamilyKind::MobiusPushforward,
        }
    }

    fn inner(&self) -> &dyn DiffeoFamily {
        match self {
            BuiltinFamily::Translation(f) => f,
            BuiltinFamily::ShearBump(f) => f,
            BuiltinFamily::MobiusPushforward(f) => f,
        }
    }

    pub fn shared(self) -> Arc<dyn DiffeoFamily> {
        Arc::new(self)
    }
}

impl DiffeoFamily for BuiltinFamily {
    fn param_dim(&self) -> usize {
        self.inner().param_dim()
    }
    fn radius(&self) -> f64 {
        self.inner().radius()
    }
    fn map(&self, a: &[f64], x: [f64; 2]) -> [f64; 2] {
        self.inner().map(a, x)
    }
    fn param_partial(&self, a: &[f64], x: [f64; 2], axes: &[usize]) -> [f64; 2] {
        self.inner().param_partial(a, x, axes)
    }
    fn max_param_order(&self) -> Option<usize> {
        self.inner().max_param_order()
    }
    fn jacobian(&self, a: &[f64], x: [f64; 2]) -> [[f64; 2]; 2] {
        self.inner().jacobian(a, x)
    }
    fn jacobian_inverse(&self, a: &[f64], x: [f64; 2]) -> [[f64; 2]; 2] {
        self.inner().jacobian_inverse(a, x)
    }
    fn inverse_map(&self, a: &[f64], y: [f64; 2]) -> [f64; 2] {
        self.inner().inverse_map(a, y)
    }
    fn translation_shift(&self, a: &[f64]) -> Option<[f64; 2]> {
        self.inner().translation_shift(a)
    }
}

/// Default ball radius of the translation family; admits shifts up to `π`.
pub const TRANSLATION_RADIUS: f64 = 4.0;
/// Default ball radius of the Möbius pushforward family.
pub const MOBIUS_RADIUS: f64 = 0.02;

/// Builds a family; invalid parameters yield a construction error.
pub fn builtin_family(kind: FamilyKind, params: &FamilyParams) -> Result<BuiltinFamily> {
    Ok(match kind {
        FamilyKind::Translation => {
            BuiltinFamily::Translation(Translation::new(params.radius.unwrap_or(TRANSLATION_RADIUS))?)
        }
        FamilyKind::ShearBump => {
            let fam = ShearBump::new(params.center, params.bump_radius)?;
            if let Some(r) = params.radius {
                if r > fam.radius {
                    return Err(LabError::Construction(format!(
                        "requested radius {r} exceeds the orientation-preserving bound {}",
                        fam.radius
                    )));
                }
                BuiltinFamily::ShearBump(ShearBump { radius: r, ..fam })
            } else {
                BuiltinFamily::ShearBump(fam)
            }
        }
        FamilyKind::MobiusPushforward => BuiltinFamily::MobiusPushforward(MobiusPushforward::new(
            params.center,
            params.bump_radius,
            params.scale,
            params.radius.unwrap_or(MOBIUS_RADIUS),
        )?),
    })
}
