//! Finite-difference verification of Fréchet derivatives, continuity moduli
//! and regularity sweeps for the composition operator and Sobolev norm powers.
//!
//! Every map here is smooth at a fixed grid size, so non-smoothness of the
//! continuum operator shows up as non-uniformity under grid refinement:
//! fitted convergence orders that drift or collapse as `N` grows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffeo::{action_higher_partial, action_partial, compose, DiffeoFamily, GroupParam};
use crate::error::{LabError, Result};
use crate::field::{DiscreteField, SobolevIndex};
use crate::grid::GridSpec;
use crate::norms::{norm_power, norm_power_gradient, sobolev_norm, weighted_norm_power};
use crate::synth::{spectral_truncate, synth_field};

/// Fits whose RMS log10 residual exceeds this are reported as unresolved.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.15;
/// Default number of sampled fields for operator-norm style suprema.
pub const DEFAULT_SAMPLES: usize = 32;

/// SplitMix64 mixing of a seed with a cell index.
pub fn sub_seed(seed: u64, cell: u64) -> u64 {
    let mut z = seed ^ cell.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeStatus {
    Pass,
    Fail,
    Unresolved,
}

/// Residuals of one finite-difference experiment and their fitted order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    pub order: f64,
    pub fit_residual: f64,
    /// Sobolev order `k − drop` of the norm every residual is measured in.
    pub norm_k: usize,
    pub norm_p: f64,
    pub grid: usize,
    pub threshold: f64,
    pub status: ProbeStatus,
}

/// Least-squares slope of `log r` against `log t` over the three smallest
/// steps, with the RMS residual of the fit in decades.
pub fn fit_order(steps: &[f64], residuals: &[f64]) -> Result<(f64, f64)> {
    if steps.len() < 3 || steps.len() != residuals.len() {
        return Err(LabError::InsufficientData(format!(
            "order fit needs at least 3 paired samples, got {} steps and {} residuals",
            steps.len(),
            residuals.len()
        )));
    }
    let mut pairs: Vec<(f64, f64)> = steps.iter().copied().zip(residuals.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pts: Vec<(f64, f64)> = pairs[..3].iter().map(|(t, r)| (t.log10(), r.log10())).collect();
    if pts.iter().any(|(_, r)| !r.is_finite()) {
        return Ok((f64::NAN, f64::INFINITY));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok((slope, rms))
}

impl ProbeReport {
    pub fn new(
        steps: Vec<f64>,
        residuals: Vec<f64>,
        norm: &SobolevIndex,
        grid: usize,
        threshold: f64,
    ) -> Result<Self> {
        let (order, fit_residual) = fit_order(&steps, &residuals)?;
        let mut report = ProbeReport {
            steps,
            residuals,
            order,
            fit_residual,
            norm_k: norm.k(),
            norm_p: norm.p(),
            grid,
            threshold,
            status: ProbeStatus::Unresolved,
        };
        report.status = report.judge(threshold);
        Ok(report)
    }

    /// Status against `threshold` on the fitted order; all-zero residuals pass.
    pub fn judge(&self, threshold: f64) -> ProbeStatus {
        if self.residuals.iter().all(|r| *r == 0.0) {
            return ProbeStatus::Pass;
        }
        if !(self.fit_residual <= FIT_RESIDUAL_LIMIT) || !self.order.is_finite() {
            return ProbeStatus::Unresolved;
        }
        if self.order >= threshold {
            ProbeStatus::Pass
        } else {
            ProbeStatus::Fail
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self.status = self.judge(threshold);
        self
    }

    /// The report for `r(t)/t`, i.e. for the difference quotient error.
    pub fn quotient(&self, threshold: f64) -> Result<ProbeReport> {
        let residuals = self.steps.iter().zip(&self.residuals).map(|(t, r)| r / t).collect();
        let idx = SobolevIndex::unchecked(self.norm_k, self.norm_p)?;
        ProbeReport::new(self.steps.clone(), residuals, &idx, self.grid, threshold)
    }

    pub fn passed(&self) -> bool {
        self.status == ProbeStatus::Pass
    }
}

fn check_steps(steps: &[f64]) -> Result<()> {
    if steps.len() < 3 {
        return Err(LabError::InsufficientData(format!(
            "need at least 3 steps, got {}",
            steps.len()
        )));
    }
    if steps.iter().any(|t| !(*t > 0.0)) || steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::InsufficientData(
            "steps must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Residual order of the first-order Taylor expansion in `a_j`:
/// `r(t) = ‖Φ(a + t e_j, η) − Φ(a, η) − t ∂_jΦ(a, η)‖_{k−drop, p}`.
pub fn derivative_check(
    fam: &dyn DiffeoFamily,
    eta: &DiscreteField,
    a: &GroupParam,
    j: usize,
    idx: &SobolevIndex,
    drop: usize,
    steps: &[f64],
) -> Result<ProbeReport> {
    taylor_remainder_check(fam, eta, a, j, idx, drop, 1, steps, 1.8)
}

/// Residual of the order-`m` Taylor polynomial in `a_j`, measured in
/// `L_{k−drop}`; smooth data gives order `m + 1`.
#[allow(clippy::too_many_arguments)]
pub fn taylor_remainder_check(
    fam: &dyn DiffeoFamily,
    eta: &DiscreteField,
    a: &GroupParam,
    j: usize,
    idx: &SobolevIndex,
    drop: usize,
    m: usize,
    steps: &[f64],
    threshold: f64,
) -> Result<ProbeReport> {
    check_steps(steps)?;
    let target = idx.dropped(drop)?;
    let base = compose(eta, fam, a)?;
    let mut partials = Vec::with_capacity(m);
    for order in 1..=m {
        let mut alpha = vec![0; fam.param_dim()];
        alpha[j] = order;
        let d = if order == 1 {
            action_partial(eta, fam, a, j)?
        } else {
            action_higher_partial(eta, fam, a, &alpha, idx)?
        };
        partials.push(d);
    }
    let residuals = steps
        .par_iter()
        .map(|&t| {
            let moved = compose(eta, fam, &a.shifted(j, t)?)?;
            let mut r = moved.sub(&base)?;
            let mut coeff = 1.0;
            for (i, d) in partials.iter().enumerate() {
                coeff *= t / (i + 1) as f64;
                r = r.axpy(-coeff, d)?;
            }
            sobolev_norm(&r, &target, 0)
        })
        .collect::<Result<Vec<f64>>>()?;
    ProbeReport::new(steps.to_vec(), residuals, &target, eta.grid().n(), threshold)
}

/// Norms of the pieces of `Φ(a+t, η+γ) − Φ(a, η) = A + B₁ + B₂ + B₃` with
/// `A = Φ(a+t, γ)`, `B₁ = Φ(a+t, η−ξ)`, `B₂ = Φ(a+t, ξ) − Φ(a, ξ)`,
/// `B₃ = Φ(a, ξ−η)` for a spectrally truncated `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuitySplit {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    /// `steps` are the radii `δ`, `residuals` the moduli `ω(δ)`; the fitted
    /// order is the modulus exponent.
    pub report: ProbeReport,
    pub splits: Vec<ContinuitySplit>,
    /// Largest relative increase of `ω` as `δ` decreases.
    pub monotonicity_defect: f64,
}

/// `ω(δ) = sup ‖Φ(a + t v, η + γ) − Φ(a, η)‖_{k,p}` over `samples` seeded
/// pairs with `|t| <= δ` and `‖γ‖_{k,p} <= δ`. The same sampled directions are
/// rescaled for every `δ`.
#[allow(clippy::too_many_arguments)]
pub fn continuity_modulus(
    fam: &dyn DiffeoFamily,
    eta: &DiscreteField,
    a: &GroupParam,
    idx: &SobolevIndex,
    deltas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ContinuityReport> {
    check_steps(deltas)?;
    if samples == 0 {
        return Err(LabError::InsufficientData("need at least one sample".into()));
    }
    let grid = *eta.grid();
    let n = fam.param_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(samples);
    for s in 0..samples {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let (ut, ug) = (rng.random::<f64>(), rng.random::<f64>());
        let gamma = synth_field(idx.k() as f64 + 3.0, sub_seed(seed, s as u64), grid, eta.dim())?;
        let gn = sobolev_norm(&gamma, idx, 0)?;
        draws.push((v, ut, gamma.scale(ug / gn)));
    }
    let xi = spectral_truncate(eta, grid.n() / 8)?;
    let base = compose(eta, fam, a)?;
    let results = deltas
        .par_iter()
        .map(|&delta| {
            let mut best = (0.0, ContinuitySplit { a: 0.0, b1: 0.0, b2: 0.0, b3: 0.0 });
            for (v, ut, unit_gamma) in &draws {
                let at = a.moved(v, delta * ut)?;
                let gamma = unit_gamma.scale(delta);
                let moved_eta = compose(eta, fam, &at)?;
                let moved_gamma = compose(&gamma, fam, &at)?;
                let total = moved_eta.add(&moved_gamma)?.sub(&base)?;
                let w = sobolev_norm(&total, idx, 0)?;
                if w >= best.0 {
                    let rough = eta.sub(&xi)?;
                    let b1 = compose(&rough, fam, &at)?;
                    let b2 = compose(&xi, fam, &at)?.sub(&compose(&xi, fam, a)?)?;
                    let b3 = compose(&rough.scale(-1.0), fam, a)?;
                    best = (
                        w,
                        ContinuitySplit {
                            a: sobolev_norm(&moved_gamma, idx, 0)?,
                            b1: sobolev_norm(&b1, idx, 0)?,
                            b2: sobolev_norm(&b2, idx, 0)?,
                            b3: sobolev_norm(&b3, idx, 0)?,
                        },
                    );
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let omegas: Vec<f64> = results.iter().map(|r| r.0).collect();
    let splits = results.iter().map(|r| r.1).collect();
    let monotonicity_defect = omegas
        .windows(2)
        .map(|w| if w[0] > 0.0 { (w[1] - w[0]) / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max);
    let report = ProbeReport::new(deltas.to_vec(), omegas, idx, grid.n(), 0.9)?;
    Ok(ContinuityReport { report, splits, monotonicity_defect })
}

/// How many derivatives each sweep cell drops from the target norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropRule {
    /// `drop = m`, the loss of derivatives the theory allows for.
    MatchOrder,
    Fixed(usize),
}

impl DropRule {
    pub fn drop_for(&self, m: usize) -> usize {
        match self {
            DropRule::MatchOrder => m,
            DropRule::Fixed(d) => *d,
        }
    }
}

/// Position of a sweep cell's field regularity relative to the threshold
/// `τ = k − d + m + 1 + 2/p` beyond which the order-`m` Taylor remainder in
/// `L_{k−d}` is controlled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `s >= τ + 1`.
    Smooth,
    /// `τ <= s < τ + 1`.
    Marginal,
    /// `s < τ`.
    Rough,
}

pub fn regime(idx: &SobolevIndex, s: f64, m: usize, drop: usize) -> Regime {
    let tau = idx.k() as f64 - drop as f64 + m as f64 + 1.0 + 2.0 / idx.p();
    if s >= tau + 1.0 {
        Regime::Smooth
    } else if s >= tau {
        Regime::Marginal
    } else {
        Regime::Rough
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub grid: usize,
    pub s: f64,
    pub m: usize,
    pub drop: usize,
    pub regime: Regime,
    /// `None` when the inner check could not run; the error text is kept.
    pub report: Option<ProbeReport>,
    pub error: Option<String>,
}

/// Per-`(s, m)` comparison of fitted orders across grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGroup {
    pub s: f64,
    pub m: usize,
    pub drop: usize,
    pub regime: Regime,
    pub grids: Vec<usize>,
    pub orders: Vec<f64>,
    /// `max − min` of the fitted orders.
    pub drift: f64,
    /// Order at the coarsest grid minus order at the finest grid.
    pub degradation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub k: usize,
    pub p: f64,
    pub cells: Vec<SweepCell>,
    pub groups: Vec<SweepGroup>,
}

/// Parameters of a regularity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub idx: SobolevIndex,
    pub s_list: Vec<f64>,
    pub m_list: Vec<usize>,
    pub grids: Vec<usize>,
    pub drop: DropRule,
    pub steps: Vec<f64>,
    pub axis: usize,
    pub target_dim: usize,
    pub seed: u64,
}

/// Runs the Taylor-remainder check of order `m` for every `(N, s, m)` cell.
/// Fields for a given `s` share their seed across grids, so each grid sees the
/// same function truncated at its own band.
pub fn regularity_sweep(fam: &dyn DiffeoFamily, spec: &SweepSpec) -> Result<SweepTable> {
    if spec.grids.is_empty() || spec.s_list.is_empty() || spec.m_list.is_empty() {
        return Err(LabError::InsufficientData("sweep lists must be nonempty".into()));
    }
    check_steps(&spec.steps)?;
    let grids = spec
        .grids
        .iter()
        .map(|&n| GridSpec::torus(n))
        .collect::<Result<Vec<_>>>()?;
    let mut cells_in = Vec::new();
    for (si, &s) in spec.s_list.iter().enumerate() {
        for &m in &spec.m_list {
            for g in &grids {
                cells_in.push((si, s, m, *g));
            }
        }
    }
    let zero = GroupParam::zero(fam);
    let cells: Vec<SweepCell> = cells_in
        .par_iter()
        .map(|&(si, s, m, g)| {
            let drop = spec.drop.drop_for(m);
            let regime = regime(&spec.idx, s, m, drop);
            let run = || -> Result<ProbeReport> {
                let eta = synth_field(s, sub_seed(spec.seed, si as u64), g, spec.target_dim)?;
                let threshold = 0.9 * (m + 1) as f64;
                taylor_remainder_check(fam, &eta, &zero, spec.axis, &spec.idx, drop, m, &spec.steps, threshold)
            };
            let (report, error) = match run() {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepCell { grid: g.n(), s, m, drop, regime, report, error }
        })
        .collect();
    let mut groups = Vec::new();
    for chunk in cells.chunks(grids.len()) {
        let first = &chunk[0];
        let orders: Vec<f64> = chunk
            .iter()
            .map(|c| c.report.as_ref().map_or(f64::NAN, |r| r.order))
            .collect();
        let finite: Vec<f64> = orders.iter().copied().filter(|o| o.is_finite()).collect();
        let drift = if finite.len() == orders.len() {
            finite.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - finite.iter().copied().fold(f64::INFINITY, f64::min)
        } else {
            f64::NAN
        };
        groups.push(SweepGroup {
            s: first.s,
            m: first.m,
            drop: first.drop,
            regime: first.regime,
            grids: chunk.iter().map(|c| c.grid).collect(),
            drift,
            degradation: orders[0] - orders[orders.len() - 1],
            orders,
        });
    }
    Ok(SweepTable { k: spec.idx.k(), p: spec.idx.p(), cells, groups })
}

/// One direction of a norm-smoothness check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionCheck {
    pub analytic: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSmoothnessReport {
    pub k: usize,
    pub p: f64,
    pub grid: usize,
    pub step: f64,
    /// Checks of `dN` (no family) or of `∂_f F` (with a family).
    pub field_checks: Vec<DirectionCheck>,
    /// Checks of `∂_{a_j} F`, one per parameter axis.
    pub param_checks: Vec<DirectionCheck>,
    /// `max |F(a_s, f) − F(0, f)| / F(0, f)` over sampled `a_s`, with a family.
    pub param_drift: Option<f64>,
    /// Relative gap of `∫|f∘T_a|^p` against `∫ |f|^p / det Jac(T_a)∘T_a^{-1}`.
    pub change_of_variables_gap: Option<f64>,
    pub max_relative_error: f64,
}

/// Fraction of the Cauchy–Schwarz bound `‖g‖‖d‖` below which derivative
/// values are compared in absolute rather than relative terms.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;
/// Rounding budget of a central difference, in units of `ε_mach |F| / h`.
pub const ROUNDOFF_ULPS: f64 = 64.0;

/// `(|an − fd| − roundoff)₊ / max(|an|, |fd|, floor · scale)`.
fn relative_error(an: f64, fd: f64, scale: f64, roundoff: f64) -> f64 {
    let denom = an.abs().max(fd.abs()).max(RELATIVE_ERROR_FLOOR * scale);
    let excess = ((an - fd).abs() - roundoff).max(0.0);
    if denom == 0.0 {
        0.0
    } else {
        excess / denom
    }
}

/// Checks the derivative of `N_k(f) = ‖f‖_{k,p}^p` (no family) or of
/// `F_k(a, f) = N_k(f∘T_a)` in both slots (with a family) against central
/// differences with the given step.
#[allow(clippy::too_many_arguments)]
pub fn norm_smoothness_check(
    f: &DiscreteField,
    idx: &SobolevIndex,
    fam: Option<(&dyn DiffeoFamily, &GroupParam)>,
    directions: usize,
    step: f64,
    seed: u64,
) -> Result<NormSmoothnessReport> {
    idx.even_exponent()?;
    if directions < 3 {
        return Err(LabError::InsufficientData(format!(
            "need at least 3 directions, got {directions}"
        )));
    }
    let grid = *f.grid();
    let dirs = (0..directions)
        .map(|i| {
            let h = synth_field(idx.k() as f64 + 3.0, sub_seed(seed, i as u64), grid, f.dim())?;
            let n = h.l2_norm();
            Ok(h.scale(1.0 / n))
        })
        .collect::<Result<Vec<_>>>()?;
    let zero_param;
    let (fam, a) = match fam {
        Some((fam, a)) => (Some(fam), a),
        None => {
            zero_param = GroupParam::new(vec![], 1.0)?;
            (None, &zero_param)
        }
    };
    let value = |field: &DiscreteField, at: &GroupParam| -> Result<f64> {
        match fam {
            Some(fam) => norm_power(&compose(field, fam, at)?, idx),
            None => norm_power(field, idx),
        }
    };
    let pulled = match fam {
        Some(fam) => compose(f, fam, a)?,
        None => f.clone(),
    };
    let g = norm_power_gradient(&pulled, idx)?;
    let g_norm = g.l2_norm();
    let roundoff = ROUNDOFF_ULPS * f64::EPSILON * norm_power(&pulled, idx)?.abs() / step;
    let field_checks = dirs
        .par_iter()
        .map(|h| {
            let moved_h = match fam {
                Some(fam) => compose(h, fam, a)?,
                None => h.clone(),
            };
            let an = g.l2_inner(&moved_h)?;
            let plus = value(&f.axpy(step, h)?, a)?;
            let minus = value(&f.axpy(-step, h)?, a)?;
            let fd = (plus - minus) / (2.0 * step);
            Ok(DirectionCheck {
                analytic: an,
                finite_difference: fd,
                relative_error: relative_error(an, fd, g_norm * moved_h.l2_norm(), roundoff),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut param_checks = Vec::new();
    let mut param_drift = None;
    let mut change_of_variables_gap = None;
    if let Some(fam) = fam {
        for j in 0..fam.param_dim() {
            let d = action_partial(f, fam, a, j)?;
            let an = g.l2_inner(&d)?;
            let fd = (value(f, &a.shifted(j, step)?)? - value(f, &a.shifted(j, -step)?)?) / (2.0 * step);
            param_checks.push(DirectionCheck {
                analytic: an,
                finite_difference: fd,
                relative_error: relative_error(an, fd, g_norm * d.l2_norm(), roundoff),
            });
        }
        let f0 = value(f, &GroupParam::zero(fam))?;
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, u64::MAX));
        let mut drift: f64 = 0.0;
        for _ in 0..8 {
            let v: Vec<f64> = (0..fam.param_dim()).map(|_| rng.random::<f64>() - 0.5).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = 0.9 * fam.radius() * rng.random::<f64>() / norm;
            let at = GroupParam::for_family(fam, v.iter().map(|x| x * scale).collect())?;
            let fa = value(f, &at)?;
            drift = drift.max((fa - f0).abs() / f0.abs().max(f64::MIN_POSITIVE));
        }
        param_drift = Some(drift);
        let p = idx.p();
        let order0 = SobolevIndex::unchecked(0, p)?;
        let direct = norm_power(&pulled, &order0)?;
        let inv_jac: Vec<f64> = grid
            .points()
            .into_iter()
            .map(|y| {
                let j = fam.jacobian(a.coords(), fam.inverse_map(a.coords(), y));
                1.0 / (j[0][0] * j[1][1] - j[0][1] * j[1][0])
            })
            .collect();
        let weights: Vec<f64> = grid.weights().iter().zip(&inv_jac).map(|(w, j)| w * j).collect();
        let transported = weighted_norm_power(f, 0, p, &weights)?;
        change_of_variables_gap = Some((direct - transported).abs() / direct.abs().max(f64::MIN_POSITIVE));
    }
    let max_relative_error = field_checks
        .iter()
        .chain(&param_checks)
        .map(|c| c.relative_error)
        .fold(0.0, f64::max);
    Ok(NormSmoothnessReport {
        k: idx.k(),
        p: idx.p(),
        grid: grid.n(),
        step,
        field_checks,
        param_checks,
        param_drift,
        change_of_variables_gap,
        max_relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::{builtin_family, FamilyKind, FamilyParams};

    #[test]
    fn fit_recovers_power_laws() {
        let steps = [0.1, 0.03, 0.01, 0.003];
        let r: Vec<f64> = steps.iter().map(|t| 5.0 * t * t).collect();
        let (o, res) = fit_order(&steps, &r).unwrap();
        assert!((o - 2.0).abs() < 1e-12 && res < 1e-12);
        assert!(fit_order(&steps[..2], &r[..2]).is_err());
        let idx = SobolevIndex::unchecked(1, 2.0).unwrap();
        let rep = ProbeReport::new(steps.to_vec(), vec![0.0; 4], &idx, 16, 1.8).unwrap();
        assert_eq!(rep.status, ProbeStatus::Pass);
        let noisy = vec![1e-2, 1e-5, 1e-3, 1e-7];
        let rep = ProbeReport::new(steps.to_vec(), noisy, &idx, 16, 1.8).unwrap();
        assert_eq!(rep.status, ProbeStatus::Unresolved);
    }

    #[test]
    fn constant_field_has_zero_residuals() {
        let fam = builtin_family(FamilyKind::ShearBump, &FamilyParams::default()).unwrap();
        let g = GridSpec::torus(32).unwrap();
        let eta = DiscreteField::constant(g, &[2.0, -1.0]);
        let idx = SobolevIndex::unchecked(3, 2.0).unwrap();
        let rep = derivative_check(&fam, &eta, &GroupParam::zero(&fam), 0, &idx, 2, &[1e-2, 3e-3, 1e-3]).unwrap();
        assert!(rep.residuals.iter().all(|r| *r < 1e-12));
    }

    #[test]
    fn zero_field_norm_derivatives_vanish() {
        let g = GridSpec::torus(16).unwrap();
        let idx = SobolevIndex::unchecked(1, 4.0).unwrap();
        let rep = norm_smoothness_check(&DiscreteField::zeros(g, 1), &idx, None, 3, 1e-4, 1).unwrap();
        assert!(rep.field_checks.iter().all(|c| c.analytic == 0.0 && c.finite_difference.abs() < 1e-12));
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(1, 0), sub_seed(1, 1));
        assert_eq!(sub_seed(9, 4), sub_seed(9, 4));
    }
}
