//! Experiment configuration: a TOML document with documented defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diffeo::{FamilyKind, FamilyParams};
use crate::error::{LabError, Result};
use crate::field::SobolevIndex;
use crate::grid::GridSpec;
use crate::probe::DropRule;

/// The verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Norm,
    ActionDerivative,
    LossOfDerivatives,
    SliceRoundtrip,
    Equivariance,
    Cutoff,
    EvalMap,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Norm,
        Suite::ActionDerivative,
        Suite::LossOfDerivatives,
        Suite::SliceRoundtrip,
        Suite::Equivariance,
        Suite::Cutoff,
        Suite::EvalMap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Norm => "norm",
            Suite::ActionDerivative => "action-derivative",
            Suite::LossOfDerivatives => "loss-of-derivatives",
            Suite::SliceRoundtrip => "slice-roundtrip",
            Suite::Equivariance => "equivariance",
            Suite::Cutoff => "cutoff",
            Suite::EvalMap => "eval-map",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Suite::Norm => "closed-form norms, norm-power gradients and composed-norm derivatives",
            Suite::ActionDerivative => "Taylor remainder order of the composition operator for smooth fields",
            Suite::LossOfDerivatives => "regularity sweep of Taylor remainder orders across grids",
            Suite::SliceRoundtrip => "slice projection of Mobius-reparametrized centers",
            Suite::Equivariance => "equivariance of the extension of a constant section",
            Suite::Cutoff => "orbit constancy, support and smoothness of the slice cut-off",
            Suite::EvalMap => "evaluation maps and the localized-translation identity",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown suite `{s}`")))
    }
}

/// A Sobolev index `(k, p)` as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSpec {
    pub k: usize,
    pub p: f64,
}

impl IndexSpec {
    pub fn index(&self) -> Result<SobolevIndex> {
        SobolevIndex::unchecked(self.k, self.p)
    }
}

/// Every knob of a suite run. Entries a suite does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub suite: Suite,
    /// Torus resolutions (points per axis).
    pub grids: Vec<usize>,
    /// Sobolev indices `(k, p)`.
    pub indices: Vec<IndexSpec>,
    pub families: Vec<FamilyKind>,
    pub family_params: FamilyParams,
    /// Field regularities `s` for synthesized torus fields.
    pub regularities: Vec<f64>,
    /// Taylor orders `m` of the sweep.
    pub orders: Vec<usize>,
    pub drop: DropRule,
    pub seed: u64,
    /// Finite-difference step ladder, strictly decreasing.
    pub steps: Vec<f64>,
    /// Number of seeded samples (directions, pairs or points).
    pub samples: usize,
    /// Chart resolution of sphere fields.
    pub chart_n: usize,
    /// Upper bound on `|γ − id|` for sampled Möbius elements.
    pub mobius_scale: f64,
    /// Cut-off radii as multiples of the reference norm power.
    pub bump_scale: [f64; 2],
    /// Output directory; overridden by `--out` and `SOBOLEV_LAB_OUT`.
    pub output: Option<PathBuf>,
    /// Worker threads; overridden by `--threads` and `SOBOLEV_LAB_THREADS`.
    pub threads: Option<usize>,
    /// Threshold overrides keyed by metric name.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::for_suite(Suite::Norm)
    }
}

fn idx(k: usize, p: f64) -> IndexSpec {
    IndexSpec { k, p }
}

impl ExperimentConfig {
    /// The documented defaults of `suite`.
    pub fn for_suite(suite: Suite) -> Self {
        let base = ExperimentConfig {
            suite,
            grids: vec![64],
            indices: vec![idx(2, 4.0)],
            families: vec![FamilyKind::Translation],
            family_params: FamilyParams::default(),
            regularities: vec![8.0],
            orders: vec![1],
            drop: DropRule::MatchOrder,
            seed: 20240917,
            steps: vec![1e-4],
            samples: 10,
            chart_n: 64,
            mobius_scale: 0.05,
            bump_scale: [0.25, 4.0],
            output: None,
            threads: None,
            tolerances: BTreeMap::new(),
        };
        match suite {
            Suite::Norm => ExperimentConfig {
                indices: [0, 1, 2].iter().flat_map(|&k| [idx(k, 2.0), idx(k, 4.0)]).collect(),
                families: vec![FamilyKind::Translation, FamilyKind::ShearBump],
                samples: 20,
                ..base
            },
            Suite::ActionDerivative => ExperimentConfig {
                grids: vec![64, 128],
                indices: vec![idx(3, 2.0)],
                families: vec![FamilyKind::Translation, FamilyKind::ShearBump],
                regularities: vec![9.0],
                drop: DropRule::Fixed(2),
                steps: vec![1e-2, 3e-3, 1e-3],
                ..base
            },
            Suite::LossOfDerivatives => ExperimentConfig {
                grids: vec![64, 128, 256],
                indices: vec![idx(3, 2.0)],
                regularities: vec![7.0, 4.25],
                orders: vec![1],
                steps: vec![0.2, 0.1, 0.05, 0.025],
                ..base
            },
            Suite::SliceRoundtrip | Suite::Equivariance | Suite::Cutoff => ExperimentConfig {
                steps: vec![1e-3, 5e-4, 2.5e-4],
                samples: 5,
                ..base
            },
            Suite::EvalMap => ExperimentConfig {
                grids: vec![128],
                regularities: vec![6.0],
                family_params: FamilyParams { bump_radius: 1.5, ..FamilyParams::default() },
                samples: 20,
                ..base
            },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; the `suite` key defaults to `suite` when absent
    /// and must agree with it otherwise.
    pub fn load(path: &Path, suite: Suite) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
        match table.get("suite") {
            Some(toml::Value::String(s)) if s.parse::<Suite>()? != suite => {
                return Err(LabError::Config(format!("config is for suite `{s}`, not `{suite}`")));
            }
            Some(toml::Value::String(_)) => {}
            Some(other) => return Err(LabError::Config(format!("`suite` must be a string, got {other}"))),
            None => {
                table.insert("suite".into(), toml::Value::String(suite.name().into()));
            }
        }
        let defaults = toml::Table::try_from(ExperimentConfig::for_suite(suite))
            .map_err(|e| LabError::Config(e.to_string()))?;
        for (key, value) in defaults {
            table.entry(key).or_insert(value);
        }
        ExperimentConfig::from_toml(&toml::to_string(&table).map_err(|e| LabError::Config(e.to_string()))?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(LabError::Config(msg));
        if self.grids.is_empty() {
            return fail("`grids` must not be empty".into());
        }
        for &n in &self.grids {
            GridSpec::torus(n)?;
        }
        GridSpec::chart(self.chart_n)?;
        if self.indices.is_empty() {
            return fail("`indices` must not be empty".into());
        }
        for i in &self.indices {
            i.index()?;
        }
        if self.regularities.is_empty() || self.regularities.iter().any(|s| !(*s > 1.0)) {
            return fail("`regularities` must be nonempty with every s > 1".into());
        }
        if self.orders.is_empty() {
            return fail("`orders` must not be empty".into());
        }
        if self.families.is_empty() {
            return fail("`families` must not be empty".into());
        }
        if self.steps.is_empty()
            || self.steps.iter().any(|t| !(*t > 0.0 && t.is_finite()))
            || self.steps.windows(2).any(|w| w[1] >= w[0])
        {
            return fail("`steps` must be positive and strictly decreasing".into());
        }
        if self.samples == 0 {
            return fail("`samples` must be positive".into());
        }
        if !(0.0..=crate::sphere::EPSILON_G / 2.0).contains(&self.mobius_scale) {
            return fail(format!("`mobius_scale` must lie in [0, {}]", crate::sphere::EPSILON_G / 2.0));
        }
        if !(self.bump_scale[0] > 0.0 && self.bump_scale[1] > self.bump_scale[0]) {
            return fail("`bump_scale` must satisfy 0 < inner < outer".into());
        }
        if self.threads == Some(0) {
            return fail("`threads` must be positive".into());
        }
        for (name, value) in &self.tolerances {
            if !crate::harness::suites::known_metric(name) {
                return fail(format!("unknown tolerance key `{name}`"));
            }
            if !value.is_finite() {
                return fail(format!("tolerance `{name}` must be finite"));
            }
        }
        let needs_even = matches!(self.suite, Suite::Norm | Suite::Cutoff);
        if needs_even {
            for i in &self.indices {
                i.index()?.even_exponent()?;
            }
        }
        match self.suite {
            Suite::Norm if self.steps.len() != 1 => fail("suite `norm` uses a single step".into()),
            Suite::ActionDerivative | Suite::LossOfDerivatives | Suite::Cutoff if self.steps.len() < 3 => {
                fail(format!("suite `{}` needs at least 3 steps", self.suite))
            }
            Suite::Norm if self.samples < 3 => fail("suite `norm` needs at least 3 samples".into()),
            _ => Ok(()),
        }
    }

    /// Threshold for `metric`, honouring overrides.
    pub fn tolerance(&self, metric: &str, default: f64) -> f64 {
        self.tolerances.get(metric).copied().unwrap_or(default)
    }
}
