//! `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, keys are case-sensitive.
//! Parsing never stops at the first problem: every unknown key, malformed
//! value and violated constraint is collected with its line number.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use alcs_core::spectral::Grid2D;
use alcs_core::tensor::{Mode, ModelParams};

/// Environment variable that replaces `out_dir`.
pub const OUT_DIR_ENV: &str = "ALCS_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcKind {
    TaylorGreen,
    RandomSpectrum,
    UniformDirector,
    File,
}

impl IcKind {
    pub fn name(self) -> &'static str {
        match self {
            IcKind::TaylorGreen => "taylor_green",
            IcKind::RandomSpectrum => "random_spectrum",
            IcKind::UniformDirector => "uniform_director",
            IcKind::File => "file",
        }
    }
}

/// Initial-condition recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub kind: IcKind,
    pub seed: u64,
    /// Velocity scale: peak speed for `taylor_green`, RMS speed for
    /// `random_spectrum`.
    pub amplitude: f64,
    /// RMS of `|Q|` for `random_spectrum`.
    pub q_amplitude: f64,
    pub peak_wavenumber: f64,
    /// Director angle in radians.
    pub director_angle: f64,
    pub s_order: f64,
    /// RMS of the band-limited noise added to `uniform_director`.
    pub noise: f64,
    pub path: Option<PathBuf>,
    /// RMS of an extra seeded perturbation of `Q` (twin experiments).
    pub perturb: f64,
    pub perturb_seed: u64,
}

impl InitialSpec {
    /// Equal apart from the twin perturbation.
    pub fn same_base(&self, other: &InitialSpec) -> bool {
        InitialSpec {
            perturb: 0.0,
            perturb_seed: 0,
            ..self.clone()
        } == InitialSpec {
            perturb: 0.0,
            perturb_seed: 0,
            ..other.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub l: f64,
    pub dt: f64,
    pub t_end: f64,
    pub order: u8,
    pub cfl_target: f64,
    pub dt_max: f64,
    pub adaptive: bool,
    pub params: ModelParams,
    pub ic: InitialSpec,
    pub energy_every: f64,
    pub snapshot_every: Option<f64>,
    pub out_dir: PathBuf,
    pub checks: Vec<String>,
    pub s_exponent: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 64,
            l: 2.0 * std::f64::consts::PI,
            dt: 1e-3,
            t_end: 1.0,
            order: 2,
            cfl_target: 0.5,
            dt_max: 1e-2,
            adaptive: false,
            params: ModelParams::default(),
            ic: InitialSpec {
                kind: IcKind::RandomSpectrum,
                seed: 1,
                amplitude: 0.1,
                q_amplitude: 0.1,
                peak_wavenumber: 2.0,
                director_angle: 0.0,
                s_order: 0.5,
                noise: 0.0,
                path: None,
                perturb: 0.0,
                perturb_seed: 2,
            },
            energy_every: 0.0,
            snapshot_every: None,
            out_dir: PathBuf::from("out"),
            checks: vec!["identity".into(), "inequality".into()],
            s_exponent: 1.0,
        }
    }
}

/// Diagnostic toggles accepted in `checks`.
pub const CHECK_NAMES: [&str; 5] = [
    "identity",
    "inequality",
    "apriori",
    "growth",
    "shadow_trace",
];

/// One problem in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// 1-based line, `None` for problems with defaults or combinations
    /// not tied to a single line.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// All problems found in one file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl ConfigErrors {
    pub fn mentions(&self, needle: &str) -> bool {
        self.0.iter().any(|e| e.message.contains(needle))
    }
}

struct Parser {
    cfg: RunConfig,
    lines: HashMap<&'static str, usize>,
    issues: Vec<ConfigIssue>,
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

impl Parser {
    fn issue(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line,
            message: message.into(),
        });
    }

    fn num(&mut self, line: usize, key: &str, v: &str) -> Option<f64> {
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                self.issue(
                    Some(line),
                    format!("{key}: expected a finite number, got '{v}'"),
                );
                None
            }
        }
    }

    fn uint(&mut self, line: usize, key: &str, v: &str) -> Option<u64> {
        match v.parse::<u64>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.issue(
                    Some(line),
                    format!("{key}: expected an unsigned integer, got '{v}'"),
                );
                None
            }
        }
    }

    fn assign(&mut self, line: usize, key: &str, v: &str) {
        macro_rules! set_f {
            ($field:expr) => {{
                if let Some(x) = self.num(line, key, v) {
                    $field(&mut self.cfg, x);
                }
            }};
        }
        let canonical: &'static str = match key {
            "N" => {
                if let Some(x) = self.uint(line, key, v) {
                    self.cfg.n = usize::try_from(x).unwrap_or(usize::MAX);
                }
                "N"
            }
            "L" => {
                set_f!(|c: &mut RunConfig, x| c.l = x);
                "L"
            }
            "dt" => {
                set_f!(|c: &mut RunConfig, x| c.dt = x);
                "dt"
            }
            "t_end" => {
                set_f!(|c: &mut RunConfig, x| c.t_end = x);
                "t_end"
            }
            "scheme" => {
                match v {
                    "1" | "etd1" => self.cfg.order = 1,
                    "2" | "etd2" => self.cfg.order = 2,
                    _ => self.issue(
                        Some(line),
                        format!("scheme: expected 1, 2, etd1 or etd2, got '{v}'"),
                    ),
                }
                "scheme"
            }
            "cfl_target" => {
                set_f!(|c: &mut RunConfig, x| c.cfl_target = x);
                "cfl_target"
            }
            "dt_max" => {
                set_f!(|c: &mut RunConfig, x| c.dt_max = x);
                "dt_max"
            }
            "adaptive" => {
                match parse_bool(v) {
                    Some(b) => self.cfg.adaptive = b,
                    None => self.issue(
                        Some(line),
                        format!("adaptive: expected true or false, got '{v}'"),
                    ),
                }
                "adaptive"
            }
            "a" => {
                set_f!(|c: &mut RunConfig, x| c.params.a = x);
                "a"
            }
            "b" => {
                set_f!(|c: &mut RunConfig, x| c.params.b = x);
                "b"
            }
            "c" => {
                set_f!(|c: &mut RunConfig, x| c.params.c = x);
                "c"
            }
            "kappa" => {
                set_f!(|c: &mut RunConfig, x| c.params.kappa = x);
                "kappa"
            }
            "lambda" => {
                set_f!(|c: &mut RunConfig, x| c.params.lambda = x);
                "lambda"
            }
            "Gamma" | "gamma" => {
                set_f!(|c: &mut RunConfig, x| c.params.gamma = x);
                "Gamma"
            }
            "mu" => {
                set_f!(|c: &mut RunConfig, x| c.params.mu = x);
                "mu"
            }
            "eps" => {
                set_f!(|c: &mut RunConfig, x| c.params.eps = x);
                "eps"
            }
            "n_trunc" => {
                if let Some(x) = self.uint(line, key, v) {
                    self.cfg.params.n_trunc = u32::try_from(x).unwrap_or(u32::MAX);
                }
                "n_trunc"
            }
            "keep_mean" => {
                match parse_bool(v) {
                    Some(b) => self.cfg.params.keep_mean = b,
                    None => self.issue(
                        Some(line),
                        format!("keep_mean: expected true or false, got '{v}'"),
                    ),
                }
                "keep_mean"
            }
            "mode" => {
                match v {
                    "direct" => self.cfg.params.mode = Mode::Direct,
                    "mollified" => self.cfg.params.mode = Mode::Mollified,
                    "friedrichs" => self.cfg.params.mode = Mode::Friedrichs,
                    _ => self.issue(
                        Some(line),
                        format!("mode: expected direct, mollified or friedrichs, got '{v}'"),
                    ),
                }
                "mode"
            }
            "ic" => {
                match v {
                    "taylor_green" => self.cfg.ic.kind = IcKind::TaylorGreen,
                    "random_spectrum" => self.cfg.ic.kind = IcKind::RandomSpectrum,
                    "uniform_director" => self.cfg.ic.kind = IcKind::UniformDirector,
                    "file" => self.cfg.ic.kind = IcKind::File,
                    _ => self.issue(
                        Some(line),
                        format!("ic: expected taylor_green, random_spectrum, uniform_director or file, got '{v}'"),
                    ),
                }
                "ic"
            }
            "seed" => {
                if let Some(x) = self.uint(line, key, v) {
                    self.cfg.ic.seed = x;
                }
                "seed"
            }
            "amplitude" => {
                set_f!(|c: &mut RunConfig, x| c.ic.amplitude = x);
                "amplitude"
            }
            "q_amplitude" => {
                set_f!(|c: &mut RunConfig, x| c.ic.q_amplitude = x);
                "q_amplitude"
            }
            "peak_wavenumber" => {
                set_f!(|c: &mut RunConfig, x| c.ic.peak_wavenumber = x);
                "peak_wavenumber"
            }
            "director_angle" => {
                set_f!(|c: &mut RunConfig, x| c.ic.director_angle = x);
                "director_angle"
            }
            "s_order" => {
                set_f!(|c: &mut RunConfig, x| c.ic.s_order = x);
                "s_order"
            }
            "noise" => {
                set_f!(|c: &mut RunConfig, x| c.ic.noise = x);
                "noise"
            }
            "ic_path" => {
                self.cfg.ic.path = Some(PathBuf::from(v));
                "ic_path"
            }
            "perturb" => {
                set_f!(|c: &mut RunConfig, x| c.ic.perturb = x);
                "perturb"
            }
            "perturb_seed" => {
                if let Some(x) = self.uint(line, key, v) {
                    self.cfg.ic.perturb_seed = x;
                }
                "perturb_seed"
            }
            "energy_every" => {
                set_f!(|c: &mut RunConfig, x| c.energy_every = x);
                "energy_every"
            }
            "snapshot_every" => {
                if v == "none" {
                    self.cfg.snapshot_every = None;
                } else if let Some(x) = self.num(line, key, v) {
                    self.cfg.snapshot_every = Some(x);
                }
                "snapshot_every"
            }
            "out_dir" => {
                self.cfg.out_dir = PathBuf::from(v);
                "out_dir"
            }
            "checks" => {
                let list: Vec<String> = if v == "none" {
                    Vec::new()
                } else {
                    v.split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect()
                };
                for name in &list {
                    if !CHECK_NAMES.contains(&name.as_str()) {
                        self.issue(
                            Some(line),
                            format!(
                                "checks: unknown check '{name}' (known: {})",
                                CHECK_NAMES.join(", ")
                            ),
                        );
                    }
                }
                self.cfg.checks = list;
                "checks"
            }
            "s_exponent" => {
                set_f!(|c: &mut RunConfig, x| c.s_exponent = x);
                "s_exponent"
            }
            _ => {
                self.issue(Some(line), format!("unknown key '{key}'"));
                return;
            }
        };
        if let Some(prev) = self.lines.insert(canonical, line) {
            self.issue(Some(line), format!("{key}: already set on line {prev}"));
        }
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.lines.get(key).copied()
    }

    fn validate(&mut self) {
        let c = self.cfg.clone();
        let mut bad = |key: &str, msg: String| {
            let line = self.line_of(key);
            self.issues.push(ConfigIssue { line, message: msg });
        };
        if c.n < 8 || !c.n.is_power_of_two() {
            bad("N", format!("N must be a power of two >= 8, got {}", c.n));
        }
        if !(c.l > 0.0) {
            bad("L", "L must be > 0".into());
        }
        if !(c.dt > 0.0) {
            bad("dt", "dt must be > 0".into());
        }
        if !(c.t_end >= 0.0) {
            bad("t_end", "t_end must be >= 0".into());
        }
        if !(c.cfl_target > 0.0 && c.cfl_target <= 1.0) {
            bad("cfl_target", "cfl_target must be in (0, 1]".into());
        }
        if !(c.dt_max > 0.0) {
            bad("dt_max", "dt_max must be > 0".into());
        }
        if !(c.energy_every >= 0.0) {
            bad("energy_every", "energy_every must be >= 0".into());
        }
        if let Some(s) = c.snapshot_every {
            if !(s >= 0.0) {
                bad(
                    "snapshot_every",
                    "snapshot_every must be >= 0 or none".into(),
                );
            }
        }
        let p = &c.params;
        if !(p.mu > 0.0) {
            bad("mu", "mu must be > 0".into());
        }
        if !(p.gamma > 0.0) {
            bad("Gamma", "Gamma must be > 0".into());
        }
        if !(p.c > 0.0) && !(p.a == 0.0 && p.b == 0.0 && p.c == 0.0) {
            bad("c", "c must be > 0".into());
        }
        if !(p.eps >= 0.0) {
            bad("eps", "eps must be >= 0".into());
        }
        if p.n_trunc < 1 {
            bad("n_trunc", "n_trunc must be >= 1".into());
        } else if p.mode == Mode::Friedrichs && c.n >= 8 && c.n.is_power_of_two() && c.l > 0.0 {
            if let Ok(g) = Grid2D::new(c.n, c.l) {
                let (lo, hi) = g.trunc_range();
                if p.n_trunc < lo || p.n_trunc > hi {
                    bad(
                        "n_trunc",
                        format!(
                            "n_trunc = {} outside the grid's dyadic range {lo}..={hi} for N = {}",
                            p.n_trunc, c.n
                        ),
                    );
                }
            }
        }
        if c.ic.kind == IcKind::File && c.ic.path.is_none() {
            bad("ic", "ic = file needs ic_path".into());
        }
        if !(c.ic.amplitude >= 0.0)
            || !(c.ic.q_amplitude >= 0.0)
            || !(c.ic.noise >= 0.0)
            || !(c.ic.perturb >= 0.0)
        {
            bad(
                "amplitude",
                "amplitudes (amplitude, q_amplitude, noise, perturb) must be >= 0".into(),
            );
        }
        if !(c.ic.peak_wavenumber > 0.0) {
            bad("peak_wavenumber", "peak_wavenumber must be > 0".into());
        }
    }
}

/// Parses config text; `base` is the directory relative paths are
/// resolved against.
pub fn parse_config(text: &str, base: Option<&Path>) -> Result<RunConfig, ConfigErrors> {
    let mut p = Parser {
        cfg: RunConfig::default(),
        lines: HashMap::new(),
        issues: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            p.issue(
                Some(line),
                format!("expected 'key = value', got '{content}'"),
            );
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            p.issue(
                Some(line),
                format!("expected 'key = value', got '{content}'"),
            );
            continue;
        }
        p.assign(line, k, v);
    }
    p.validate();
    if !p.issues.is_empty() {
        return Err(ConfigErrors(p.issues));
    }
    let mut cfg = p.cfg;
    if let Some(base) = base {
        if let Some(path) = &cfg.ic.path {
            if path.is_relative() {
                cfg.ic.path = Some(base.join(path));
            }
        }
        if cfg.out_dir.is_relative() && p.lines.contains_key("out_dir") {
            cfg.out_dir = base.join(&cfg.out_dir);
        }
    }
    if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
        if !dir.is_empty() {
            cfg.out_dir = PathBuf::from(dir);
        }
    }
    Ok(cfg)
}

/// Why a config file could not be loaded.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:\n{errors}")]
    Invalid { path: PathBuf, errors: ConfigErrors },
}

pub fn load_config(path: &Path) -> Result<RunConfig, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path.parent()).map_err(|errors| LoadError::Invalid {
        path: path.to_path_buf(),
        errors,
    })
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Direct => "direct",
        Mode::Mollified => "mollified",
        Mode::Friedrichs => "friedrichs",
    }
}

impl RunConfig {
    pub fn grid(&self) -> Grid2D {
        Grid2D::new(self.n, self.l).expect("validated grid")
    }

    /// Config text that parses back to `self` (floats printed
    /// round-trip exact).
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let ic = &self.ic;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("N", self.n.to_string());
        kv("L", format!("{:?}", self.l));
        kv("dt", format!("{:?}", self.dt));
        kv("t_end", format!("{:?}", self.t_end));
        kv("scheme", self.order.to_string());
        kv("cfl_target", format!("{:?}", self.cfl_target));
        kv("dt_max", format!("{:?}", self.dt_max));
        kv("adaptive", self.adaptive.to_string());
        kv("a", format!("{:?}", p.a));
        kv("b", format!("{:?}", p.b));
        kv("c", format!("{:?}", p.c));
        kv("kappa", format!("{:?}", p.kappa));
        kv("lambda", format!("{:?}", p.lambda));
        kv("Gamma", format!("{:?}", p.gamma));
        kv("mu", format!("{:?}", p.mu));
        kv("mode", mode_name(p.mode).into());
        kv("eps", format!("{:?}", p.eps));
        kv("n_trunc", p.n_trunc.to_string());
        kv("keep_mean", p.keep_mean.to_string());
        kv("ic", ic.kind.name().into());
        kv("seed", ic.seed.to_string());
        kv("amplitude", format!("{:?}", ic.amplitude));
        kv("q_amplitude", format!("{:?}", ic.q_amplitude));
        kv("peak_wavenumber", format!("{:?}", ic.peak_wavenumber));
        kv("director_angle", format!("{:?}", ic.director_angle));
        kv("s_order", format!("{:?}", ic.s_order));
        kv("noise", format!("{:?}", ic.noise));
        if let Some(path) = &ic.path {
            kv("ic_path", path.display().to_string());
        }
        kv("perturb", format!("{:?}", ic.perturb));
        kv("perturb_seed", ic.perturb_seed.to_string());
        kv("energy_every", format!("{:?}", self.energy_every));
        kv(
            "snapshot_every",
            self.snapshot_every
                .map_or("none".into(), |v| format!("{v:?}")),
        );
        kv("out_dir", self.out_dir.display().to_string());
        kv(
            "checks",
            if self.checks.is_empty() {
                "none".into()
            } else {
                self.checks.join(",")
            },
        );
        kv("s_exponent", format!("{:?}", self.s_exponent));
        s
    }
}
