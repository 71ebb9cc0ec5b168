//! Run configuration (TOML or JSON).

use std::fs;
use std::path::{Path, PathBuf};

use mola_core::sampler::{AnnealOptions, AnnealSchedule, SamplerKind};
use mola_core::{Boundary, PrioritySet, SuitabilityField};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{MolaError, Result};
use crate::generate::{generate_field, GeneratorSpec};
use crate::io;

pub const EFFECTIVE_CONFIG: &str = "effective_config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub suitability: SuitabilitySource,
    #[serde(default)]
    pub priorities: PriorityConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub seeds: SeedPolicy,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "three")]
    pub types: usize,
    #[serde(default)]
    pub boundary: BoundaryChoice,
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryChoice {
    #[default]
    Open,
    Periodic,
}

impl From<BoundaryChoice> for Boundary {
    fn from(b: BoundaryChoice) -> Self {
        match b {
            BoundaryChoice::Open => Boundary::Open,
            BoundaryChoice::Periodic => Boundary::Periodic,
        }
    }
}

/// Exactly one of `file`, `layered` or `generator`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuitabilitySource {
    /// Long-form `i,j,s,c` file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Stem of `<stem>.<s>.csv` layers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layered: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorityConfig {
    #[serde(default = "one")]
    pub compactness: f64,
    /// Single suitability priority for `anneal`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suitability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn one() -> f64 {
    1.0
}

impl Default for PriorityConfig {
    fn default() -> Self {
        Self { compactness: 1.0, suitability: None, sweep: None }
    }
}

/// Either explicit `values` or `start`/`stop`/`step` (both ends included).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

/// Rounds away the binary noise of `start + k * step`.
fn tidy(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

impl SweepSpec {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Self { values: None, start: Some(start), stop: Some(stop), step: Some(step) }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        let f = "priorities.sweep";
        let values = match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(h)) => {
                if !(h > 0.0) || !h.is_finite() || !a.is_finite() || !b.is_finite() {
                    return Err(MolaError::config(format!("{f}.step"), "must be positive and finite"));
                }
                if b < a {
                    return Err(MolaError::config(format!("{f}.stop"), "must be >= start"));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize + 1;
                (0..n).map(|k| tidy(a + k as f64 * h)).collect()
            }
            _ => return Err(MolaError::config(f, "give either `values` or all of `start`, `stop`, `step`")),
        };
        if values.is_empty() {
            return Err(MolaError::config(format!("{f}.values"), "empty"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(MolaError::config(format!("{f}.values"), "priorities must be finite and >= 0"));
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MolaError::config(format!("{f}.values"), "must be strictly increasing"));
        }
        Ok(values)
    }
}

/// Missing fields take the reference protocol's values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub t_start: f64,
    pub t_target: f64,
    pub thermalize_sweeps: u64,
    pub cool_sweeps: u64,
    pub equilibrate_sweeps: u64,
    pub measure_sweeps: u64,
    pub measure_interval: u64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        AnnealSchedule::default().into()
    }
}

impl From<AnnealSchedule> for ScheduleConfig {
    fn from(s: AnnealSchedule) -> Self {
        Self {
            t_start: s.t_start,
            t_target: s.t_target,
            thermalize_sweeps: s.thermalize_sweeps,
            cool_sweeps: s.cool_sweeps,
            equilibrate_sweeps: s.equilibrate_sweeps,
            measure_sweeps: s.measure_sweeps,
            measure_interval: s.measure_interval,
        }
    }
}

impl From<ScheduleConfig> for AnnealSchedule {
    fn from(s: ScheduleConfig) -> Self {
        AnnealSchedule {
            t_start: s.t_start,
            t_target: s.t_target,
            thermalize_sweeps: s.thermalize_sweeps,
            cool_sweeps: s.cool_sweeps,
            equilibrate_sweeps: s.equilibrate_sweeps,
            measure_sweeps: s.measure_sweeps,
            measure_interval: s.measure_interval,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    Metropolis,
    #[default]
    Wolff,
}

impl std::str::FromStr for SamplerChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "metropolis" => Ok(SamplerChoice::Metropolis),
            "wolff" => Ok(SamplerChoice::Wolff),
            other => Err(format!("unknown sampler `{other}` (metropolis|wolff)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    #[serde(default)]
    pub kind: SamplerChoice,
    /// Follow every cluster move with a Metropolis sweep.
    #[serde(default = "yes")]
    pub interleave_metropolis: bool,
}

fn yes() -> bool {
    true
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { kind: SamplerChoice::Wolff, interleave_metropolis: true }
    }
}

impl SamplerConfig {
    pub fn kind(&self) -> SamplerKind {
        match self.kind {
            SamplerChoice::Metropolis => SamplerKind::Metropolis,
            SamplerChoice::Wolff => SamplerKind::Wolff { interleave_metropolis: self.interleave_metropolis },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedPolicy {
    /// Root of every random stream in the run.
    #[serde(default)]
    pub master: u64,
    /// Replicates per priority point; seeds are `0..count` unless `list` is given.
    #[serde(default = "default_seed_count")]
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<u64>>,
    /// Write one grid snapshot per record.
    #[serde(default)]
    pub keep_snapshots: bool,
}

fn default_seed_count() -> usize {
    300
}

impl Default for SeedPolicy {
    fn default() -> Self {
        Self { master: 0, count: default_seed_count(), list: None, keep_snapshots: false }
    }
}

impl SeedPolicy {
    pub fn seeds(&self) -> Vec<u64> {
        match &self.list {
            Some(l) => l.clone(),
            None => (0..self.count as u64).collect(),
        }
    }

    /// `multiplier` times as many seeds, extending the base list.
    pub fn scaled(&self, multiplier: usize) -> Vec<u64> {
        let base = self.seeds();
        let want = base.len() * multiplier.max(1);
        let mut out = base.clone();
        let mut next = base.iter().max().map_or(0, |m| m + 1);
        while out.len() < want {
            out.push(next);
            next += 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("mola-out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_window")]
    pub smoothing_window: usize,
    /// Bisection levels applied to each flagged interval.
    #[serde(default)]
    pub refinement_depth: usize,
    /// Replicate multiplier at refined points.
    #[serde(default = "two")]
    pub refinement_multiplier: usize,
    /// Max-norm distance (parcels) from the optimal counts for a sample to
    /// enter the gray-area ensemble; defaults to `N*M/30`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gray_area_tolerance: Option<usize>,
}

fn default_alpha() -> f64 {
    mola_core::analysis::DEFAULT_ALPHA
}

fn default_window() -> usize {
    mola_core::analysis::DEFAULT_SMOOTHING_WINDOW
}

fn two() -> usize {
    2
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            smoothing_window: default_window(),
            refinement_depth: 0,
            refinement_multiplier: 2,
            gray_area_tolerance: None,
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub sampler: Option<SamplerChoice>,
}

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "MOLA_OUT_DIR";

impl RunConfig {
    /// Minimal config around a generated field, all else default.
    pub fn with_generator(rows: usize, cols: usize, generator: GeneratorSpec) -> Self {
        Self {
            grid: GridConfig { rows, cols, types: 3, boundary: BoundaryChoice::Open },
            suitability: SuitabilitySource { generator: Some(generator), ..Default::default() },
            priorities: PriorityConfig::default(),
            schedule: ScheduleConfig::default(),
            sampler: SamplerConfig::default(),
            seeds: SeedPolicy::default(),
            output: OutputConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.rows == 0 || g.cols == 0 {
            return Err(MolaError::config("grid.rows", "grid dimensions must be positive"));
        }
        if !(2..=255).contains(&g.types) {
            return Err(MolaError::config("grid.types", "need between 2 and 255 types"));
        }
        if g.boundary == BoundaryChoice::Periodic && (g.rows < 3 || g.cols < 3) {
            return Err(MolaError::config("grid.boundary", "periodic boundaries need at least 3x3"));
        }
        let s = &self.suitability;
        let sources = s.file.is_some() as u8 + s.layered.is_some() as u8 + s.generator.is_some() as u8;
        if sources != 1 {
            return Err(MolaError::config("suitability", "give exactly one of `file`, `layered`, `generator`"));
        }
        let p = &self.priorities;
        if !(p.compactness >= 0.0) || !p.compactness.is_finite() {
            return Err(MolaError::config("priorities.compactness", "must be finite and >= 0"));
        }
        if let Some(v) = p.suitability {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(MolaError::config("priorities.suitability", "must be finite and >= 0"));
            }
        }
        if let Some(sw) = &p.sweep {
            sw.points()?;
        }
        AnnealSchedule::from(self.schedule)
            .validate()
            .map_err(|e| MolaError::config("schedule", e.to_string()))?;
        let seeds = self.seeds.seeds();
        if seeds.is_empty() {
            return Err(MolaError::config("seeds.count", "need at least one seed"));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(MolaError::config("seeds.list", format!("duplicate seed {}", w[0])));
        }
        let a = &self.analysis;
        if !(a.alpha > 0.0 && a.alpha < 1.0) {
            return Err(MolaError::config("analysis.alpha", format!("{} is outside (0, 1)", a.alpha)));
        }
        if a.smoothing_window == 0 {
            return Err(MolaError::config("analysis.smoothing_window", "must be >= 1"));
        }
        if a.refinement_multiplier == 0 {
            return Err(MolaError::config("analysis.refinement_multiplier", "must be >= 1"));
        }
        Ok(())
    }

    /// Applies CLI/env overrides; the flag beats the environment, which beats
    /// the file.
    pub fn apply(&mut self, o: &Overrides, env_out: Option<PathBuf>) {
        if let Some(dir) = o.out.clone().or(env_out) {
            self.output.dir = dir;
        }
        if let Some(seed) = o.seed {
            self.seeds.master = seed;
        }
        if let Some(kind) = o.sampler {
            self.sampler.kind = kind;
        }
    }

    /// Resolves implicit values so the serialized form is self-contained.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if let Some(g) = c.suitability.generator.take() {
            c.suitability.generator = Some(g.with_default_seed(self.seeds.master));
        }
        if c.analysis.gray_area_tolerance.is_none() {
            c.analysis.gray_area_tolerance = Some(self.default_gray_tolerance());
        }
        c
    }

    fn default_gray_tolerance(&self) -> usize {
        (self.grid.rows * self.grid.cols / 30).max(1)
    }

    pub fn gray_area_tolerance(&self) -> usize {
        self.analysis.gray_area_tolerance.unwrap_or_else(|| self.default_gray_tolerance())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hash of the resolved config with the output directory blanked; two runs
    /// with equal fingerprints produce the same data.
    pub fn fingerprint(&self) -> String {
        let mut c = self.resolved();
        c.output.dir = PathBuf::new();
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn schedule(&self) -> AnnealSchedule {
        self.schedule.into()
    }

    pub fn anneal_options(&self) -> AnnealOptions {
        AnnealOptions {
            boundary: self.grid.boundary.into(),
            keep_snapshots: self.seeds.keep_snapshots,
            master_seed: self.seeds.master,
        }
    }

    pub fn priorities_at(&self, p_s: f64) -> Result<PrioritySet> {
        PrioritySet::new(self.priorities.compactness, p_s, self.schedule.t_target)
            .map_err(|e| MolaError::config("priorities", e.to_string()))
    }

    pub fn sweep_points(&self) -> Result<Vec<f64>> {
        self.priorities
            .sweep
            .as_ref()
            .ok_or_else(|| MolaError::config("priorities.sweep", "a sweep is required"))?
            .points()
    }

    pub fn load_field(&self) -> Result<SuitabilityField> {
        let g = &self.grid;
        let field = match (&self.suitability.file, &self.suitability.layered, &self.suitability.generator) {
            (Some(p), None, None) => io::read_suitability_csv(p)?,
            (None, Some(stem), None) => io::read_suitability_layered(stem, g.types)?,
            (None, None, Some(spec)) => {
                generate_field(&spec.clone().with_default_seed(self.seeds.master), g.rows, g.cols, g.types)?
            }
            _ => return Err(MolaError::config("suitability", "give exactly one of `file`, `layered`, `generator`")),
        };
        if (field.rows(), field.cols(), field.types()) != (g.rows, g.cols, g.types) {
            return Err(MolaError::config(
                "suitability",
                format!(
                    "field is {}x{} with {} types, grid is {}x{} with {}",
                    field.rows(),
                    field.cols(),
                    field.types(),
                    g.rows,
                    g.cols,
                    g.types
                ),
            ));
        }
        Ok(field)
    }

    /// Writes the resolved config into `dir`.
    pub fn write_effective(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(EFFECTIVE_CONFIG);
        io::write_atomic(&path, self.resolved().to_toml().as_bytes())?;
        Ok(path)
    }
}

/// Parses a config from text; `json` selects the format.
pub fn parse_config(text: &str, json: bool, origin: &Path) -> Result<RunConfig> {
    let config: RunConfig = if json {
        serde_json::from_str(text).map_err(|e| MolaError::ConfigParse { path: origin.into(), message: e.to_string() })?
    } else {
        toml::from_str(text).map_err(|e| MolaError::ConfigParse { path: origin.into(), message: e.to_string() })?
    };
    config.validate()?;
    Ok(config)
}

/// Loads and validates a config. Relative suitability and output paths are
/// taken from the config file's directory. Files ending in `.json` are JSON, anything
/// else TOML.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| MolaError::io(path, e))?;
    let json = path.extension().is_some_and(|e| e == "json");
    let mut config = parse_config(&text, json, path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [&mut config.suitability.file, &mut config.suitability.layered].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    if config.output.dir.is_relative() {
        config.output.dir = base.join(&config.output.dir);
    }
    Ok(config)
}
