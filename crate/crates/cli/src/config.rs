//! JSON experiment configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use mfent_core::spectrum::uniform_grid;
use mfent_core::{
    default_schedule, CylinderSet, DepthOffset, MeasureModel, Potential, ScheduleEntry, ShiftSpace,
    Word,
};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub space: SpaceSpec,
    pub measure: MeasureSpec,
    #[serde(default)]
    pub q_grid: Option<GridSpec>,
    #[serde(default)]
    pub beta_grid: Option<GridSpec>,
    #[serde(default)]
    pub k: u32,
    #[serde(default)]
    pub schedule: Option<Vec<ScheduleSpec>>,
    /// Exponents for `premeasure` and `entropy`.
    #[serde(default)]
    pub q: Option<Vec<f64>>,
    #[serde(default)]
    pub t: Option<Vec<f64>>,
    /// Cylinders whose union is the target set; the whole space if absent.
    #[serde(default)]
    pub set: Option<Vec<String>>,
    #[serde(default)]
    pub n_min: Option<usize>,
    #[serde(default)]
    pub d_max: Option<usize>,
    #[serde(default)]
    pub cover_depth: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub tail_fraction: Option<f64>,
    #[serde(default)]
    pub bin_width: Option<f64>,
    #[serde(default)]
    pub residual_q: Option<Vec<f64>>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub alphabet: usize,
    /// 0/1 matrix; the full shift if absent.
    #[serde(default)]
    pub transitions: Option<Vec<Vec<u8>>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Bernoulli {
        p: Vec<f64>,
    },
    Markov {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        #[serde(default)]
        pi: Option<Vec<f64>>,
    },
    Gibbs {
        r: usize,
        psi: BTreeMap<String, f64>,
    },
    MaxEntropy,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<f64>),
    Range { from: f64, to: f64, step: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub n: usize,
    pub d: usize,
}

/// A validated configuration with defaults filled in.
#[derive(Debug)]
pub struct Config {
    pub model: MeasureModel,
    pub q_grid: Vec<f64>,
    pub beta_grid: Option<Vec<f64>>,
    pub k: DepthOffset,
    pub schedule: Vec<ScheduleEntry>,
    pub q: Vec<f64>,
    pub t: Vec<f64>,
    pub set: CylinderSet,
    pub n_min: usize,
    pub d_max: usize,
    pub cover_depth: Option<usize>,
    pub n: Option<usize>,
    pub samples: usize,
    pub tail_fraction: f64,
    pub bin_width: f64,
    pub residual_q: Vec<f64>,
    pub n_max: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn field(name: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {e}"))
}

/// `source` is a file path, or inline JSON when it starts with `{`.
pub fn load(source: &str) -> Result<Config, CliError> {
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        std::fs::read_to_string(source)
            .map_err(|e| CliError::Config(format!("cannot read config {source}: {e}")))?
    };
    let raw: RawConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
    raw.validate()
}

fn grid(name: &str, spec: &GridSpec) -> Result<Vec<f64>, CliError> {
    let points = match spec {
        GridSpec::Points(p) => p.clone(),
        GridSpec::Range { from, to, step } => uniform_grid(*from, *to, *step).map_err(|e| field(name, e))?,
    };
    if points.is_empty() {
        return Err(field(name, "grid is empty"));
    }
    if let Some(x) = points.iter().find(|x| !x.is_finite()) {
        return Err(field(name, format!("non-finite point {x}")));
    }
    if points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(field(name, "points must be strictly increasing"));
    }
    Ok(points)
}

fn positive(name: &str, v: usize) -> Result<usize, CliError> {
    if v == 0 {
        Err(field(name, "must be at least 1"))
    } else {
        Ok(v)
    }
}

impl RawConfig {
    fn validate(self) -> Result<Config, CliError> {
        let space = match &self.space.transitions {
            Some(t) => ShiftSpace::new(self.space.alphabet, t).map_err(|e| field("space", e))?,
            None if (2..=256).contains(&self.space.alphabet) => ShiftSpace::full(self.space.alphabet),
            None => return Err(field("space.alphabet", "must be between 2 and 256")),
        };
        let model = build_measure(&space, &self.measure).map_err(|e| field("measure", e))?;
        let q_grid = match &self.q_grid {
            Some(g) => grid("q_grid", g)?,
            None => uniform_grid(-3.0, 3.0, 0.25).expect("default grid"),
        };
        let beta_grid = self.beta_grid.as_ref().map(|g| grid("beta_grid", g)).transpose()?;
        let schedule = match &self.schedule {
            Some(s) if s.is_empty() => return Err(field("schedule", "needs at least one entry")),
            Some(s) => {
                for (i, e) in s.iter().enumerate() {
                    if e.n == 0 || e.d < e.n {
                        return Err(field(&format!("schedule[{i}]"), "needs 1 <= n <= d"));
                    }
                }
                s.iter().map(|e| ScheduleEntry::new(e.n, e.d)).collect()
            }
            None => default_schedule(),
        };
        let set = match &self.set {
            None => CylinderSet::full(),
            Some(words) => {
                let words: Vec<Word> = words
                    .iter()
                    .map(|w| w.parse::<Word>().map_err(|e| field("set", e)))
                    .collect::<Result<_, _>>()?;
                CylinderSet::union(&space, words).map_err(|e| field("set", e))?
            }
        };
        let n_min = positive("n_min", self.n_min.unwrap_or(4))?;
        let d_max = self.d_max.unwrap_or(n_min);
        if d_max < n_min {
            return Err(field("d_max", format!("must be at least n_min = {n_min}")));
        }
        let tail_fraction = self.tail_fraction.unwrap_or(mfent_core::local::DEFAULT_TAIL_FRACTION);
        if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
            return Err(field("tail_fraction", "must lie in (0, 1]"));
        }
        let bin_width = self.bin_width.unwrap_or(0.25);
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(field("bin_width", "must be positive"));
        }
        let finite = |name: &str, v: Vec<f64>| -> Result<Vec<f64>, CliError> {
            match v.iter().find(|x| !x.is_finite()) {
                Some(x) => Err(field(name, format!("non-finite value {x}"))),
                None if v.is_empty() => Err(field(name, "needs at least one value")),
                None => Ok(v),
            }
        };
        Ok(Config {
            model,
            q_grid,
            beta_grid,
            k: DepthOffset(self.k),
            schedule,
            q: finite("q", self.q.unwrap_or_else(|| vec![0.0]))?,
            t: finite("t", self.t.unwrap_or_else(|| vec![0.0]))?,
            set,
            n_min,
            d_max,
            cover_depth: self.cover_depth,
            n: self.n.map(|n| positive("n", n)).transpose()?,
            samples: positive("samples", self.samples.unwrap_or(100))?,
            tail_fraction,
            bin_width,
            residual_q: finite("residual_q", self.residual_q.unwrap_or_else(|| vec![-1.0, 0.0, 1.0, 2.0]))?,
            n_max: positive("n_max", self.n_max.unwrap_or(12))?,
            seed: self.seed.unwrap_or(0),
            out: self.out,
        })
    }
}

fn build_measure(space: &ShiftSpace, spec: &MeasureSpec) -> mfent_core::Result<MeasureModel> {
    match spec {
        MeasureSpec::Bernoulli { p } => MeasureModel::bernoulli(space, p.clone()),
        MeasureSpec::Markov { p, pi: Some(pi) } => MeasureModel::markov(space, p.clone(), pi.clone()),
        MeasureSpec::Markov { p, pi: None } => MeasureModel::markov_stationary(space, p.clone()),
        MeasureSpec::Gibbs { r, psi } => {
            let table = psi
                .iter()
                .map(|(w, v)| Ok((w.parse::<Word>()?, *v)))
                .collect::<mfent_core::Result<BTreeMap<_, _>>>()?;
            MeasureModel::gibbs(space, Potential::new(space, *r, table)?)
        }
        MeasureSpec::MaxEntropy => MeasureModel::max_entropy(space),
    }
}
