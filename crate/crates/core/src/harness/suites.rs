//! The verification suites run by the command-line harness.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::cutoff::{
    global_perturbation, random_sphere_direction, slice_cutoff, slice_cutoff_detail, cutoff_derivative_probe,
    BumpProfile,
};
use crate::diffeo::{builtin_family, BuiltinFamily, DiffeoFamily, FamilyKind, GroupParam};
use crate::error::Result;
use crate::field::{DiscreteField, SobolevIndex};
use crate::grid::GridSpec;
use crate::harness::config::{ExperimentConfig, Suite};
use crate::harness::report::{Comparison, Row};
use crate::norms::{norm_power, sobolev_norm};
use crate::probe::{norm_smoothness_check, regularity_sweep, sub_seed, taylor_remainder_check, ProbeStatus, Regime, SweepSpec};
use crate::sphere::{
    constant_section, equivariant_extension, evaluate, evaluation_identity_gap, sample_near_identity, slice_projection,
    standard_center, SectionOnSlice, SliceSpec,
};
use crate::synth::synth_field;

/// Metric names accepted as tolerance overrides.
pub const METRICS: [&str; 24] = [
    "closed-form-relative-error",
    "gradient-relative-error",
    "composed-field-relative-error",
    "composed-param-relative-error",
    "translation-drift",
    "change-of-variables-gap",
    "taylor-order",
    "remainder-order",
    "coefficient-error",
    "newton-iterations",
    "slice-residual",
    "field-error",
    "idempotence",
    "equivariance-error",
    "restriction-error",
    "normalization-error",
    "support-value",
    "orbit-constancy",
    "perturbation-equivariance",
    "cutoff-derivative-order",
    "constant-error",
    "closed-form-error",
    "identity-gap",
    "overlap-mismatch",
];

pub fn known_metric(name: &str) -> bool {
    METRICS.contains(&name)
}

/// Rows and suite-specific aggregates of one run.
#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub rows: Vec<Row>,
    pub details: serde_json::Value,
}

/// Runs the configured suite.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    cfg.validate()?;
    match cfg.suite {
        Suite::Norm => norm_suite(cfg),
        Suite::ActionDerivative => action_derivative_suite(cfg),
        Suite::LossOfDerivatives => loss_of_derivatives_suite(cfg),
        Suite::SliceRoundtrip => slice_roundtrip_suite(cfg),
        Suite::Equivariance => equivariance_suite(cfg),
        Suite::Cutoff => cutoff_suite(cfg),
        Suite::EvalMap => eval_map_suite(cfg),
    }
}

struct RowMaker<'a> {
    cfg: &'a ExperimentConfig,
    grid: usize,
    k: usize,
    p: f64,
}

impl RowMaker<'_> {
    fn row(&self, cell: String, metric: &str, value: f64, default: f64, cmp: Comparison) -> Row {
        Row::new(self.cfg.suite, cell, self.grid, self.k, self.p, metric, value, self.cfg.tolerance(metric, default), cmp)
    }

    fn at_most(&self, cell: String, metric: &str, value: f64, default: f64) -> Row {
        self.row(cell, metric, value, default, Comparison::AtMost)
    }

    fn at_least(&self, cell: String, metric: &str, value: f64, default: f64) -> Row {
        self.row(cell, metric, value, default, Comparison::AtLeast)
    }

    fn error(&self, cell: String, metric: &str) -> Row {
        Row::error(self.cfg.suite, cell, self.grid, self.k, self.p, metric)
    }
}

fn relative(value: f64, exact: f64) -> f64 {
    (value - exact).abs() / exact.abs()
}

fn family(cfg: &ExperimentConfig, kind: FamilyKind) -> Result<BuiltinFamily> {
    builtin_family(kind, &cfg.family_params)
}

/// Parameter of norm `0.3 ε` in a seeded direction.
fn sample_param(fam: &dyn DiffeoFamily, seed: u64) -> Result<GroupParam> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..fam.param_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    GroupParam::for_family(fam, v.iter().map(|x| 0.3 * fam.radius() * x / n).collect())
}

fn norm_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut rows = Vec::new();
    for &n in &cfg.grids {
        let grid = GridSpec::torus(n)?;
        let maker = |k, p| RowMaker { cfg, grid: n, k, p };
        let metric = "closed-form-relative-error";
        let c = DiscreteField::constant(grid, &[1.5, -0.5]);
        let sin = DiscreteField::scalar_from_fn(grid, |x| x[0].sin());
        let one = DiscreteField::constant(grid, &[1.0]);
        let cases: [(&str, &DiscreteField, usize, f64, bool, f64); 5] = [
            ("constant-k2-p2", &c, 2, 2.0, false, (2.5 * 4.0 * PI * PI).sqrt()),
            ("sin-k1-p2", &sin, 1, 2.0, false, 2.0 * PI),
            ("sin-k0-p2", &sin, 0, 2.0, false, (2.0 * PI * PI).sqrt()),
            ("one-power-k0-p4", &one, 0, 4.0, true, 4.0 * PI * PI),
            ("sin-power-k0-p4", &sin, 0, 4.0, true, 1.5 * PI * PI),
        ];
        for (name, f, k, p, power, exact) in cases {
            let idx = SobolevIndex::unchecked(k, p)?;
            let value = if power { norm_power(f, &idx)? } else { sobolev_norm(f, &idx, 0)? };
            rows.push(maker(k, p).at_most(format!("g{n}-{name}"), metric, relative(value, exact), 1e-10));
        }
        let gradient_rows: Vec<Vec<Row>> = cfg
            .indices
            .par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let idx = spec.index()?;
                let m = maker(idx.k(), idx.p());
                let f = synth_field(idx.k() as f64 + 4.0, sub_seed(cfg.seed, i as u64), grid, 2)?;
                let report = norm_smoothness_check(&f, &idx, None, cfg.samples, cfg.steps[0], sub_seed(cfg.seed, 100 + i as u64))?;
                Ok(report
                    .field_checks
                    .iter()
                    .enumerate()
                    .map(|(d, c)| {
                        m.at_most(
                            format!("g{n}-k{}-p{}-dir{d:02}", idx.k(), idx.p()),
                            "gradient-relative-error",
                            c.relative_error,
                            1e-6,
                        )
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        rows.extend(gradient_rows.into_iter().flatten());
        for &kind in &cfg.families {
            let fam = family(cfg, kind)?;
            let composed: Vec<Vec<Row>> = cfg
                .indices
                .par_iter()
                .enumerate()
                .map(|(i, spec)| {
                    let idx = spec.index()?;
                    let m = maker(idx.k(), idx.p());
                    let base = format!("g{n}-{}-k{}-p{}", kind.name(), idx.k(), idx.p());
                    let f = synth_field(idx.k() as f64 + 6.0, sub_seed(cfg.seed, 200 + i as u64), grid, 2)?;
                    let a = sample_param(&fam, sub_seed(cfg.seed, 300 + i as u64))?;
                    let r = norm_smoothness_check(
                        &f,
                        &idx,
                        Some((&fam, &a)),
                        cfg.samples.min(5),
                        cfg.steps[0],
                        sub_seed(cfg.seed, 400 + i as u64),
                    )?;
                    let mut out = Vec::new();
                    for (d, c) in r.field_checks.iter().enumerate() {
                        out.push(m.at_most(format!("{base}-dir{d:02}"), "composed-field-relative-error", c.relative_error, 1e-5));
                    }
                    for (j, c) in r.param_checks.iter().enumerate() {
                        out.push(m.at_most(format!("{base}-a{j}"), "composed-param-relative-error", c.relative_error, 1e-5));
                    }
                    if kind == FamilyKind::Translation {
                        if let Some(drift) = r.param_drift {
                            out.push(m.at_most(base.clone(), "translation-drift", drift, 1e-10));
                        }
                    }
                    if let Some(gap) = r.change_of_variables_gap {
                        out.push(m.at_most(base, "change-of-variables-gap", gap, 1e-6));
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            rows.extend(composed.into_iter().flatten());
        }
    }
    Ok(SuiteOutput { rows, details: serde_json::Value::Null })
}

fn action_derivative_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut jobs = Vec::new();
    for &kind in &cfg.families {
        for &n in &cfg.grids {
            for spec in &cfg.indices {
                for (si, &s) in cfg.regularities.iter().enumerate() {
                    jobs.push((kind, n, spec.index()?, si, s));
                }
            }
        }
    }
    let drop = cfg.drop.drop_for(1);
    let per_job: Vec<Vec<Row>> = jobs
        .par_iter()
        .map(|&(kind, n, idx, si, s)| {
            let fam = family(cfg, kind)?;
            let m = RowMaker { cfg, grid: n, k: idx.k(), p: idx.p() };
            let eta = synth_field(s, sub_seed(cfg.seed, si as u64), GridSpec::torus(n)?, 2)?;
            let zero = GroupParam::zero(&fam);
            let threshold = cfg.tolerance("taylor-order", 1.8);
            (0..fam.param_dim())
                .map(|j| {
                    let cell = format!("{}-g{n}-k{}-p{}-s{s}-a{j}-d{drop}", kind.name(), idx.k(), idx.p());
                    Ok(match taylor_remainder_check(&fam, &eta, &zero, j, &idx, drop, 1, &cfg.steps, threshold) {
                        Ok(r) => {
                            let mut row = m.at_least(cell, "taylor-order", r.order, 1.8).with_m(1).with_s(s);
                            row.pass &= r.status != ProbeStatus::Unresolved;
                            row
                        }
                        Err(_) => m.error(cell, "taylor-order").with_m(1).with_s(s),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(SuiteOutput { rows: per_job.into_iter().flatten().collect(), details: serde_json::Value::Null })
}

fn loss_of_derivatives_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let fam = family(cfg, cfg.families[0])?;
    let mut rows = Vec::new();
    let mut tables = Vec::new();
    for spec in &cfg.indices {
        let idx = spec.index()?;
        let sweep = SweepSpec {
            idx,
            s_list: cfg.regularities.clone(),
            m_list: cfg.orders.clone(),
            grids: cfg.grids.clone(),
            drop: cfg.drop,
            steps: cfg.steps.clone(),
            axis: 0,
            target_dim: 2,
            seed: cfg.seed,
        };
        let table = regularity_sweep(&fam, &sweep)?;
        for c in &table.cells {
            let m = RowMaker { cfg, grid: c.grid, k: idx.k(), p: idx.p() };
            let cell = format!("{}-g{}-s{}-m{}-d{}", fam.kind().name(), c.grid, c.s, c.m, c.drop);
            let row = match &c.report {
                Some(r) if c.regime == Regime::Smooth => {
                    let mut row = m.at_least(cell, "remainder-order", r.order, 0.9 * (c.m + 1) as f64);
                    row.pass &= r.status != ProbeStatus::Unresolved;
                    row
                }
                Some(r) => m.row(cell, "remainder-order", r.order, 0.9 * (c.m + 1) as f64, Comparison::Info),
                None => m.error(cell, "remainder-order"),
            };
            rows.push(row.with_m(c.m).with_s(c.s));
        }
        tables.push(table);
    }
    Ok(SuiteOutput { rows, details: json!({ "family": fam.kind().name(), "tables": tables }) })
}

fn slice_roundtrip_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let n = cfg.chart_n;
    let f = standard_center(n)?;
    let spec = SliceSpec::transverse_normal(f.clone())?;
    let m = RowMaker { cfg, grid: n, k: 0, p: 0.0 };
    let per_sample: Vec<Vec<Row>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let cell = format!("sample{i:03}");
            let g = sample_near_identity(sub_seed(cfg.seed, i as u64), cfg.mobius_scale);
            let k = f.compose_mobius(&g)?;
            let Ok(proj) = slice_projection(&k, &spec) else {
                return Ok(vec![m.error(cell, "coefficient-error")]);
            };
            let idem = match slice_projection(&proj.projected, &spec) {
                Ok(again) => again.gamma_inv.distance_to_identity(),
                Err(_) => f64::NAN,
            };
            Ok(vec![
                m.at_most(cell.clone(), "coefficient-error", proj.gamma_inv.distance(&g.inverse()), 1e-8),
                m.at_most(cell.clone(), "newton-iterations", proj.max_iterations() as f64, 12.0),
                m.at_most(cell.clone(), "slice-residual", spec.slice_residual(&proj.projected), 1e-9),
                m.at_most(cell.clone(), "field-error", proj.projected.max_abs_diff(&f)?, 1e-7),
                m.at_most(cell, "idempotence", idem, 1e-10),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(SuiteOutput { rows: per_sample.into_iter().flatten().collect(), details: serde_json::Value::Null })
}

/// A smooth constant section over the chart grid of `n` nodes.
fn smooth_section(cfg: &ExperimentConfig, n: usize, idx: &SobolevIndex) -> Result<SectionOnSlice> {
    let xi0 = random_sphere_direction(n, 4, sub_seed(cfg.seed, u64::MAX - 1))?;
    constant_section(xi0, 1, idx)
}

fn equivariance_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let n = cfg.chart_n;
    let idx = cfg.indices[0].index()?;
    let f = standard_center(n)?;
    let spec = SliceSpec::transverse_normal(f.clone())?;
    let section = smooth_section(cfg, n, &idx)?;
    let m = RowMaker { cfg, grid: n, k: idx.k(), p: idx.p() };
    let per_sample: Vec<Vec<Row>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let cell = format!("pair{i:03}");
            let h = sample_near_identity(sub_seed(cfg.seed, 2 * i as u64), cfg.mobius_scale);
            let g = sample_near_identity(sub_seed(cfg.seed, 2 * i as u64 + 1), cfg.mobius_scale);
            let k = f.compose_mobius(&h)?;
            let run = || -> Result<(f64, f64)> {
                let lhs = equivariant_extension(&section, &spec, &k.compose_mobius(&g)?)?;
                let rhs = equivariant_extension(&section, &spec, &k)?.compose_mobius(&g)?;
                let member = slice_projection(&k, &spec)?.projected;
                let restricted = equivariant_extension(&section, &spec, &member)?;
                Ok((lhs.max_abs_diff(&rhs)?, restricted.max_abs_diff(&section.eval(&member)?)?))
            };
            Ok(match run() {
                Ok((equi, restr)) => vec![
                    m.at_most(cell.clone(), "equivariance-error", equi, 1e-6),
                    m.at_most(cell, "restriction-error", restr, 0.0),
                ],
                Err(_) => vec![m.error(cell, "equivariance-error")],
            })
        })
        .collect::<Result<_>>()?;
    Ok(SuiteOutput { rows: per_sample.into_iter().flatten().collect(), details: serde_json::Value::Null })
}

fn cutoff_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let n = cfg.chart_n;
    let idx = cfg.indices[0].index()?;
    let f = standard_center(n)?;
    let spec = SliceSpec::transverse_normal(f.clone())?;
    let section = smooth_section(cfg, n, &idx)?;
    let v0 = random_sphere_direction(n, 4, sub_seed(cfg.seed, u64::MAX - 2))?;
    let k0 = f.axpy(0.01, &v0)?;
    let n0 = slice_cutoff_detail(&k0, &spec, &BumpProfile::new(1.0, 2.0)?, &idx)?.norm_power;
    let chi = BumpProfile::new(cfg.bump_scale[0] * n0, cfg.bump_scale[1] * n0)?;
    let m = RowMaker { cfg, grid: n, k: idx.k(), p: idx.p() };
    let mut rows = vec![m.at_most("center".into(), "normalization-error", (slice_cutoff(&f, &spec, &chi, &idx)? - 1.0).abs(), 0.0)];
    let far = f.axpy(0.01 * (2.0 * cfg.bump_scale[1]).powf(1.0 / idx.p()), &v0)?;
    let far_detail = slice_cutoff_detail(&far, &spec, &chi, &idx)?;
    rows.push(m.at_most("outside-support".into(), "support-value", far_detail.beta, 0.0));
    let far_gp = global_perturbation(&far, &spec, &section, &chi, &idx)?;
    rows.push(m.at_most("outside-support-perturbation".into(), "support-value", far_gp.max_abs(), 0.0));
    let orbit: Vec<Vec<Row>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let cell = format!("pair{i:03}");
            let g = sample_near_identity(sub_seed(cfg.seed, i as u64), cfg.mobius_scale);
            let run = || -> Result<(f64, f64)> {
                let kg = k0.compose_mobius(&g)?;
                let b = (slice_cutoff(&kg, &spec, &chi, &idx)? - slice_cutoff(&k0, &spec, &chi, &idx)?).abs();
                let lhs = global_perturbation(&kg, &spec, &section, &chi, &idx)?;
                let rhs = global_perturbation(&k0, &spec, &section, &chi, &idx)?.compose_mobius(&g)?;
                Ok((b, lhs.max_abs_diff(&rhs)?))
            };
            Ok(match run() {
                Ok((b, e)) => vec![
                    m.at_most(cell.clone(), "orbit-constancy", b, 1e-8),
                    m.at_most(cell, "perturbation-equivariance", e, 1e-6),
                ],
                Err(_) => vec![m.error(cell, "orbit-constancy")],
            })
        })
        .collect::<Result<_>>()?;
    rows.extend(orbit.into_iter().flatten());
    let probes: Vec<Row> = (0..cfg.samples)
        .flat_map(|i| [1usize, 2].map(|d| (i, d)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, drop)| {
            let cell = format!("dir{i:03}-d{drop}");
            let threshold = cfg.tolerance("cutoff-derivative-order", 0.9);
            let run = || -> Result<_> {
                let v = random_sphere_direction(n, 4, sub_seed(cfg.seed, 1000 + i as u64))?;
                cutoff_derivative_probe(&k0, &v, &spec, &chi, &idx, drop, &cfg.steps, threshold)
            };
            Ok(match run() {
                Ok(r) => {
                    let mut row = m.at_least(cell, "cutoff-derivative-order", r.order, 0.9).with_m(drop);
                    row.pass &= r.status != ProbeStatus::Unresolved;
                    row
                }
                Err(_) => m.error(cell, "cutoff-derivative-order").with_m(drop),
            })
        })
        .collect::<Result<_>>()?;
    rows.extend(probes);
    let details = json!({
        "reference_norm_power": n0,
        "bump": [chi.r0(), chi.r1()],
        "outside_norm_power": far_detail.norm_power,
    });
    Ok(SuiteOutput { rows, details })
}

fn eval_map_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let r = cfg.family_params.bump_radius;
    let mut rows = Vec::new();
    for &n in &cfg.grids {
        let grid = GridSpec::torus(n)?;
        let m = RowMaker { cfg, grid: n, k: 0, p: 0.0 };
        let c = DiscreteField::constant(grid, &[0.75, -2.0]);
        let sin = DiscreteField::scalar_from_fn(grid, |x| x[0].sin());
        let x = [1.234, 5.678];
        let cv = evaluate(&c, &x)?;
        rows.push(m.at_most(format!("g{n}-constant"), "constant-error", (cv[0] - 0.75).abs().max((cv[1] + 2.0).abs()), 1e-12));
        rows.push(m.at_most(
            format!("g{n}-sin"),
            "closed-form-error",
            (evaluate(&sin, &[PI / 2.0, 0.0])?[0] - 1.0).abs(),
            1e-10,
        ));
        let fam = crate::sphere::translation_family_at([0.0, 0.0], r)?;
        let reach = 0.9 * fam.radius();
        for (si, &s) in cfg.regularities.iter().enumerate() {
            let g = synth_field(s, sub_seed(cfg.seed, si as u64), grid, 2)?;
            let gaps: Vec<Row> = (0..cfg.samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, 1000 * (si as u64 + 1) + i as u64));
                    let x0 = [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)];
                    let rho = reach * rng.random::<f64>().sqrt();
                    let th = rng.random_range(0.0..2.0 * PI);
                    let x = [x0[0] + rho * th.cos(), x0[1] + rho * th.sin()];
                    let cell = format!("g{n}-s{s}-pair{i:03}");
                    Ok(match evaluation_identity_gap(&g, x0, x, r) {
                        Ok(gap) => m.at_most(cell, "identity-gap", gap, 1e-8).with_s(s),
                        Err(_) => m.error(cell, "identity-gap").with_s(s),
                    })
                })
                .collect::<Result<_>>()?;
            rows.extend(gaps);
        }
    }
    let sphere = standard_center(cfg.chart_n)?;
    let m = RowMaker { cfg, grid: cfg.chart_n, k: 0, p: 0.0 };
    rows.push(m.at_most("sphere-center".into(), "overlap-mismatch", sphere.overlap_mismatch(), 1e-8));
    Ok(SuiteOutput { rows, details: serde_json::Value::Null })
}
