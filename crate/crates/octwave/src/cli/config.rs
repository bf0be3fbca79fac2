//! TOML run configuration with `OCTWAVE_` environment overrides.
//!
//! Every field has a default, so an empty file (or no file at all) is a valid
//! configuration: the `(σ, δ, p) = (1, 0, 2)` desk run in one dimension.
//!
//! ```toml
//! seed = 7
//!
//! [model]
//! sigma = 1.0          # σ > 0
//! delta = 0.0          # 0 <= δ <= σ
//! p = 2                # integer power, p >= 2
//! n = 1                # spatial dimension, 1..=3
//!
//! [grid]
//! m = 4                # lattice points per unit frequency (power of two)
//! k = 64               # frequency box side; N = K·M points per axis
//!
//! [norm]
//! alpha = -1.0         # exponential weight 2^{α|ξ|}
//! s = -1.5             # Sobolev index
//!
//! [solver]
//! steps = 4000         # uniform steps on [0, T]
//! max_iter = 40
//! contraction_tol = 1e-12
//! residual_tol = 1e-6
//! nu_fraction = 0.5    # fraction of the ν bound used as budget
//! truncation_tol = 1e-8
//! shell = 0.1
//! # t_final = 50.0     # default: e^{-rate T} = 1e-8
//!
//! [scaling]
//! eps0 = 0.25
//! calibration_samples = 8
//! calibration_steps = 2000
//! # lambda = 4         # manual λ (same as --lambda)
//! # c = 1.0            # fitted-constant overrides; any subset of c, c0, c1
//!
//! [data]
//! kind = "random_octant"   # zero | single_cube | random_octant | file
//! cubes = []               # default: the first admissible diagonal cube
//! seed = 1
//! budget_fraction = 1.0    # size so the linear part uses this share of ν/2
//! # amplitude = 0.01       # or: multiply the generated field
//! # admissible_multiple = 10.0  # or: multiple of the λ = 2 admissible size
//! # path = "u0.bin"        # for kind = "file" (.bin or .csv); u1 is zero
//!
//! [kernels]
//! pairs = [[1.0, 0.0], [2.0, 1.0], [1.0, 1.0]]
//! lambdas = [1.0, 2.0, 4.0, 8.0]
//! r_points = 8
//! times = [0.0, 0.01, 0.1, 1.0, 10.0]
//!
//! [io]
//! out = "octwave-out"
//! formats = ["json", "csv"]
//! ```
//!
//! Environment variables `OCTWAVE_<SECTION>_<KEY>` (or `OCTWAVE_SEED`) override
//! the file; their values use TOML syntax, bare words are taken as strings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernels::{ModelParams, DEFAULT_EPS0};
use crate::norms::NormSpec;
use crate::propagator::calibrate::CalibrationConfig;
use crate::propagator::{PicardConfig, Problem};
use crate::spectral::{CubeIndex, GridSpec};

pub const ENV_PREFIX: &str = "OCTWAVE_";

const SECTIONS: [&str; 8] = ["model", "grid", "norm", "solver", "scaling", "data", "kernels", "io"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub model: ModelSection,
    pub grid: GridSection,
    pub norm: NormSection,
    pub solver: SolverSection,
    pub scaling: ScalingSection,
    pub data: DataSection,
    pub kernels: KernelsSection,
    pub io: IoSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            model: ModelSection::default(),
            grid: GridSection::default(),
            norm: NormSection::default(),
            solver: SolverSection::default(),
            scaling: ScalingSection::default(),
            data: DataSection::default(),
            kernels: KernelsSection::default(),
            io: IoSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub sigma: f64,
    pub delta: f64,
    pub p: usize,
    pub n: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { sigma: 1.0, delta: 0.0, p: 2, n: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub m: usize,
    pub k: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { m: 4, k: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormSection {
    pub alpha: f64,
    pub s: f64,
}

impl Default for NormSection {
    fn default() -> Self {
        NormSection { alpha: -1.0, s: -1.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub steps: usize,
    pub max_iter: usize,
    pub contraction_tol: f64,
    pub residual_tol: f64,
    pub nu_fraction: f64,
    pub truncation_tol: f64,
    pub shell: f64,
    pub t_final: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = PicardConfig::default();
        SolverSection {
            steps: d.steps,
            max_iter: d.max_iter,
            contraction_tol: d.contraction_tol,
            residual_tol: d.residual_tol,
            nu_fraction: d.nu_fraction,
            truncation_tol: d.truncation_tol,
            shell: d.shell,
            t_final: d.t_final,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    pub eps0: f64,
    pub lambda: Option<u32>,
    pub calibration_samples: usize,
    pub calibration_steps: usize,
    pub c: Option<f64>,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
}

impl Default for ScalingSection {
    fn default() -> Self {
        let d = CalibrationConfig::default();
        ScalingSection {
            eps0: DEFAULT_EPS0,
            lambda: None,
            calibration_samples: d.samples,
            calibration_steps: d.steps,
            c: None,
            c0: None,
            c1: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Zero,
    SingleCube,
    RandomOctant,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub kind: DataKind,
    pub cubes: Vec<Vec<i64>>,
    pub seed: u64,
    pub budget_fraction: Option<f64>,
    pub amplitude: Option<f64>,
    pub admissible_multiple: Option<f64>,
    pub path: Option<PathBuf>,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            kind: DataKind::RandomOctant,
            cubes: Vec::new(),
            seed: 1,
            budget_fraction: None,
            amplitude: None,
            admissible_multiple: None,
            path: None,
        }
    }
}

/// How the generated data is sized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sizing {
    /// Linear part at this share of the accepted maximum `ν/2`.
    Budget(f64),
    Amplitude(f64),
    /// Multiple of the largest data norm admissible at `λ = 2`.
    Admissible(f64),
}

impl DataSection {
    pub fn sizing(&self) -> Sizing {
        match (self.budget_fraction, self.amplitude, self.admissible_multiple) {
            (_, Some(a), _) => Sizing::Amplitude(a),
            (_, _, Some(m)) => Sizing::Admissible(m),
            (Some(f), _, _) => Sizing::Budget(f),
            (None, None, None) => Sizing::Budget(1.0),
        }
    }

    pub fn cube_indices(&self) -> Vec<CubeIndex> {
        self.cubes.iter().map(|c| CubeIndex::new(c)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelsSection {
    pub pairs: Vec<[f64; 2]>,
    pub lambdas: Vec<f64>,
    pub r_points: usize,
    pub times: Vec<f64>,
}

impl Default for KernelsSection {
    fn default() -> Self {
        KernelsSection {
            pairs: vec![[1.0, 0.0], [2.0, 1.0], [1.0, 1.0]],
            lambdas: vec![1.0, 2.0, 4.0, 8.0],
            r_points: 8,
            times: vec![0.0, 0.01, 0.1, 1.0, 10.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoSection {
    pub out: PathBuf,
    pub formats: Vec<String>,
}

impl Default for IoSection {
    fn default() -> Self {
        IoSection { out: PathBuf::from("octwave-out"), formats: vec!["json".into(), "csv".into()] }
    }
}

/// 1-based line of `key` inside `[section]` (or at the top level when `section` is empty).
fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

/// Where a value came from, for error messages.
enum Origin<'a> {
    File { path: &'a str, src: &'a str },
    Env(String),
    Default,
}

fn fail(origin: &Origin, section: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    let field = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
    match origin {
        Origin::File { path, src } => match locate(src, section, key) {
            Some(line) => Error::Config(format!("{path}:{line}: {field}: {msg}")),
            None => Error::Config(format!("{path}: {field}: {msg}")),
        },
        Origin::Env(var) => Error::Config(format!("environment {var}: {field}: {msg}")),
        Origin::Default => Error::Config(format!("{field}: {msg}")),
    }
}

impl RunConfig {
    /// Parses `src`; errors carry `path:line`.
    pub fn from_toml_str(src: &str, path: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| src[..s.start].matches('\n').count() + 1);
            let msg = e.message().to_string();
            match line {
                Some(l) => Error::Config(format!("{path}:{l}: {msg}")),
                None => Error::Config(format!("{path}: {msg}")),
            }
        })?;
        cfg.validate_with(&Origin::File { path, src })?;
        Ok(cfg)
    }

    /// Reads `path` (or the defaults when `None`) and applies environment overrides.
    pub fn load(path: Option<&Path>, env: &BTreeMap<String, String>) -> Result<Self> {
        let base = match path {
            Some(p) => {
                let src = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
                Self::from_toml_str(&src, &p.display().to_string())?
            }
            None => RunConfig::default(),
        };
        base.with_env(env)
    }

    /// Applies every `OCTWAVE_*` entry of `env` that names a config field.
    pub fn with_env(self, env: &BTreeMap<String, String>) -> Result<Self> {
        // TOML integers are i64, so the u64 seed stays out of the table.
        let mut seed = self.seed;
        let mut table = toml::Table::try_from(RunConfig { seed: 0, ..self }).map_err(|e| Error::Config(e.to_string()))?;
        let mut touched = Vec::new();
        for (var, value) in env {
            let Some(rest) = var.strip_prefix(ENV_PREFIX) else { continue };
            let rest = rest.to_ascii_lowercase();
            if rest == "seed" {
                seed = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("environment {var}: expected an unsigned 64-bit seed, got '{value}'")))?;
                continue;
            }
            let (section, key) = match rest.split_once('_') {
                Some((s, k)) if SECTIONS.contains(&s) => (s.to_string(), k.to_string()),
                // Flags such as OCTWAVE_OUT are handled by the command line layer.
                _ => continue,
            };
            let parsed = parse_env_value(value);
            let target = table
                .entry(section.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("environment {var}: [{section}] is not a table")))?;
            target.insert(key.clone(), parsed);
            touched.push((var.clone(), section, key));
        }
        let mut cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| {
            let names: Vec<&str> = touched.iter().map(|(v, _, _)| v.as_str()).collect();
            Error::Config(format!("environment override {}: {}", names.join(", "), e.message()))
        })?;
        for (var, _, _) in &touched {
            cfg.validate_with(&Origin::Env(var.clone()))?;
        }
        cfg.seed = seed;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(&Origin::Default)
    }

    fn validate_with(&self, origin: &Origin) -> Result<()> {
        let m = &self.model;
        if let Err(e) = ModelParams::new(m.sigma, m.delta, m.p, m.n) {
            let key = if !(m.sigma > 0.0) {
                "sigma"
            } else if !(m.delta >= 0.0 && m.delta <= m.sigma) {
                "delta"
            } else if m.p < 2 {
                "p"
            } else {
                "n"
            };
            return Err(fail(origin, "model", key, e));
        }
        if let Err(e) = GridSpec::new(m.n, self.grid.m, self.grid.k) {
            let key = if self.grid.m.is_power_of_two() { "k" } else { "m" };
            return Err(fail(origin, "grid", key, e));
        }
        if !self.norm.alpha.is_finite() || self.norm.alpha > 0.0 {
            return Err(fail(origin, "norm", "alpha", "must be finite and <= 0"));
        }
        if !self.norm.s.is_finite() {
            return Err(fail(origin, "norm", "s", "must be finite"));
        }
        if let Err(e) = self.picard().validate() {
            let s = &self.solver;
            let key = if s.steps == 0 {
                "steps"
            } else if s.max_iter == 0 {
                "max_iter"
            } else if !(s.contraction_tol > 0.0 && s.contraction_tol < 1.0) {
                "contraction_tol"
            } else if !(s.nu_fraction > 0.0 && s.nu_fraction <= 1.0) {
                "nu_fraction"
            } else if !(s.residual_tol > 0.0) {
                "residual_tol"
            } else {
                "t_final"
            };
            return Err(fail(origin, "solver", key, e));
        }
        if !(self.solver.truncation_tol > 0.0) {
            return Err(fail(origin, "solver", "truncation_tol", "must be positive"));
        }
        if !(self.solver.shell > 0.0 && self.solver.shell < 1.0) {
            return Err(fail(origin, "solver", "shell", "must lie in (0, 1)"));
        }
        if !(self.scaling.eps0 > 0.0 && self.scaling.eps0 <= 1.0) {
            return Err(fail(origin, "scaling", "eps0", "must lie in (0, 1]"));
        }
        if self.scaling.lambda == Some(0) {
            return Err(fail(origin, "scaling", "lambda", "must be a positive integer"));
        }
        if self.scaling.calibration_samples == 0 {
            return Err(fail(origin, "scaling", "calibration_samples", "must be positive"));
        }
        if self.scaling.calibration_steps == 0 {
            return Err(fail(origin, "scaling", "calibration_steps", "must be positive"));
        }
        for key in ["c", "c0", "c1"] {
            let v = match key {
                "c" => self.scaling.c,
                "c0" => self.scaling.c0,
                _ => self.scaling.c1,
            };
            if matches!(v, Some(x) if !(x > 0.0 && x.is_finite())) {
                return Err(fail(origin, "scaling", key, "must be positive and finite"));
            }
        }
        let d = &self.data;
        let set = [d.budget_fraction.is_some(), d.amplitude.is_some(), d.admissible_multiple.is_some()];
        if set.iter().filter(|b| **b).count() > 1 {
            return Err(fail(origin, "data", "amplitude", "set at most one of budget_fraction, amplitude, admissible_multiple"));
        }
        for (key, v) in [("budget_fraction", d.budget_fraction), ("amplitude", d.amplitude), ("admissible_multiple", d.admissible_multiple)] {
            if matches!(v, Some(x) if !(x >= 0.0 && x.is_finite())) {
                return Err(fail(origin, "data", key, "must be nonnegative and finite"));
            }
        }
        if d.cubes.iter().any(|c| c.len() != m.n) {
            return Err(fail(origin, "data", "cubes", format!("every cube needs {} coordinates", m.n)));
        }
        if d.kind == DataKind::File && d.path.is_none() {
            return Err(fail(origin, "data", "path", "kind = \"file\" needs a path"));
        }
        for pair in &self.kernels.pairs {
            if let Err(e) = ModelParams::new(pair[0], pair[1], 2, 1) {
                return Err(fail(origin, "kernels", "pairs", e));
            }
        }
        if self.kernels.lambdas.iter().any(|l| !(*l >= 1.0 && l.is_finite())) {
            return Err(fail(origin, "kernels", "lambdas", "every λ must be finite and >= 1"));
        }
        if self.kernels.r_points == 0 {
            return Err(fail(origin, "kernels", "r_points", "must be positive"));
        }
        if self.kernels.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(fail(origin, "kernels", "times", "times must be finite and >= 0"));
        }
        for f in &self.io.formats {
            if f != "json" && f != "csv" {
                return Err(fail(origin, "io", "formats", format!("unknown format {f:?} (json, csv)")));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.model.sigma, self.model.delta, self.model.p, self.model.n)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.model.n, self.grid.m, self.grid.k)
    }

    pub fn problem(&self, lambda: f64) -> Result<Problem> {
        Ok(Problem {
            params: self.params()?,
            lambda,
            norm: NormSpec { alpha: self.norm.alpha, s: self.norm.s },
            eps0: self.scaling.eps0,
        })
    }

    pub fn picard(&self) -> PicardConfig {
        let s = &self.solver;
        PicardConfig {
            t_final: s.t_final,
            steps: s.steps,
            max_iter: s.max_iter,
            contraction_tol: s.contraction_tol,
            residual_tol: s.residual_tol,
            nu_fraction: s.nu_fraction,
            truncation_tol: s.truncation_tol,
            shell: s.shell,
            ..PicardConfig::default()
        }
    }

    pub fn calibration(&self) -> CalibrationConfig {
        CalibrationConfig {
            samples: self.scaling.calibration_samples,
            seed: self.seed,
            steps: self.scaling.calibration_steps,
            t_final: self.solver.t_final,
            cubes: self.data.cube_indices(),
        }
    }

    /// Canonical JSON of the effective configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`RunConfig::canonical_json`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

fn parse_env_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// The process environment restricted to `OCTWAVE_*` variables.
pub fn process_env() -> BTreeMap<String, String> {
    std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml_str("", "empty.toml").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert!(cfg.params().is_ok());
        assert_eq!(cfg.grid_spec().unwrap().points_per_axis(), 256);
    }

    #[test]
    fn sigma_below_delta_names_the_line() {
        let src = "seed = 3\n\n[model]\nsigma = 1.0\ndelta = 2.0\n";
        let err = RunConfig::from_toml_str(src, "bad.toml").unwrap_err().to_string();
        assert!(err.contains("bad.toml:5:"), "{err}");
        assert!(err.contains("model.delta"), "{err}");
    }

    #[test]
    fn syntax_and_unknown_keys_name_the_line() {
        let err = RunConfig::from_toml_str("[grid]\nm = 4\nk = \n", "x.toml").unwrap_err().to_string();
        assert!(err.contains("x.toml:3:"), "{err}");
        let err = RunConfig::from_toml_str("[solver]\nstepz = 4\n", "x.toml").unwrap_err().to_string();
        assert!(err.contains("x.toml:2:"), "{err}");
        let err = RunConfig::from_toml_str("[model]\np = \"two\"\n", "x.toml").unwrap_err().to_string();
        assert!(err.contains("x.toml:2:"), "{err}");
    }

    #[test]
    fn env_overrides_apply_and_validate() {
        let cfg = RunConfig::default()
            .with_env(&env(&[("OCTWAVE_SOLVER_STEPS", "123"), ("OCTWAVE_SEED", "9"), ("OCTWAVE_DATA_KIND", "zero"), ("OTHER", "1")]))
            .unwrap();
        assert_eq!(cfg.solver.steps, 123);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.data.kind, DataKind::Zero);
        let err = RunConfig::default().with_env(&env(&[("OCTWAVE_MODEL_DELTA", "5.0")])).unwrap_err().to_string();
        assert!(err.contains("OCTWAVE_MODEL_DELTA"), "{err}");
        // Unrelated OCTWAVE_ variables (command line flags) are left alone.
        assert!(RunConfig::default().with_env(&env(&[("OCTWAVE_OUT", "/tmp/x")])).is_ok());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.solver.steps += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn sizing_modes_are_exclusive() {
        let src = "[data]\namplitude = 1.0\nbudget_fraction = 0.5\n";
        assert!(RunConfig::from_toml_str(src, "x.toml").is_err());
        let cfg = RunConfig::from_toml_str("[data]\nadmissible_multiple = 10.0\n", "x.toml").unwrap();
        assert_eq!(cfg.data.sizing(), Sizing::Admissible(10.0));
        assert_eq!(RunConfig::default().data.sizing(), Sizing::Budget(1.0));
    }
}
