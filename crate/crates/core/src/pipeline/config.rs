//! Constants, presets and the flat `key = value` run configuration.

use crate::corrections::CorrectionOptions;
use crate::error::{Error, Result};
use crate::numeric::fmt_f64;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    PaperStrict,
    Relaxed,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-strict" => Ok(Preset::PaperStrict),
            "relaxed" => Ok(Preset::Relaxed),
            _ => Err(Error::Config(format!("unknown preset {s:?} (expected paper-strict or relaxed)"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::PaperStrict => "paper-strict",
            Preset::Relaxed => "relaxed",
        })
    }
}

/// `c₂ = min{c₁/4, 1 − √(1 − c₁²/64)}`.
pub fn c2_from(c1: f64) -> f64 {
    (c1 / 4.0).min(1.0 - (1.0 - c1 * c1 / 64.0).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub k_flat: f64,
    /// Ceiling for every measured constant (`K_g`, `K_set`, clause-2/4 `K`).
    pub ceiling: f64,
    /// Oversampling factor of the stage-report grids.
    pub grid_factor: u64,
    pub freq_cap: u64,
    pub stage_budget: u32,
    /// Halving steps allowed inside one gap-killing stage.
    pub iteration_budget: u32,
    pub eps: f64,
    /// `ε` of the initial pair.
    pub init_eps: f64,
}

impl Constants {
    pub fn paper_strict() -> Self {
        let c1 = 0.25;
        let c2 = c2_from(c1);
        Constants {
            c1,
            c2,
            c3: c2 / 10.0,
            k_flat: 3.0,
            ceiling: 5.0,
            grid_factor: 16,
            freq_cap: 1 << 22,
            stage_budget: 3,
            iteration_budget: 8,
            eps: 0.05,
            init_eps: 0.01,
        }
    }

    /// Bands wide enough to admit the desk-scale initial pair; every
    /// certificate is still checked.
    pub fn relaxed() -> Self {
        Constants { c1: 0.49, c2: 0.45, c3: 0.45, stage_budget: 2, ..Constants::paper_strict() }
    }

    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::PaperStrict => Constants::paper_strict(),
            Preset::Relaxed => Constants::relaxed(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.c1 > 0.0 && self.c1 < 0.5) {
            return bad(format!("c1 = {} outside (0, 1/2)", self.c1));
        }
        if !(self.c2 > 0.0 && self.c2 <= self.c1) || !(self.c3 > 0.0 && self.c3 <= self.c2) {
            return bad(format!("need 0 < c3 ≤ c2 ≤ c1, got c2 = {}, c3 = {}", self.c2, self.c3));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) || !(self.init_eps > 0.0 && self.init_eps < 0.5) {
            return bad(format!("eps = {} or init_eps = {} out of range", self.eps, self.init_eps));
        }
        if self.grid_factor < 2 || self.k_flat <= 0.0 || self.ceiling <= 0.0 {
            return bad("grid_factor ≥ 2, k_flat > 0 and ceiling > 0 are required".into());
        }
        Ok(())
    }

    pub fn correction_options(&self, seed: u64) -> CorrectionOptions {
        CorrectionOptions {
            c1: self.c1,
            ceiling: self.ceiling,
            k_flat: self.k_flat,
            freq_cap: self.freq_cap,
            seed,
            ..CorrectionOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub preset: Preset,
    pub constants: Constants,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Rows of `t,|f|,arg f,|g|,arg g` written per stage (0 for none).
    pub emit_samples: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config::with_preset(Preset::Relaxed)
    }
}

const KEYS: &[&str] = &[
    "preset", "c1", "c2", "c3", "k_flat", "ceiling", "grid_factor", "freq_cap", "stage_budget",
    "iteration_budget", "eps", "init_eps", "seed", "output_dir", "emit_samples",
];

impl Config {
    pub fn with_preset(preset: Preset) -> Self {
        Config { preset, constants: Constants::preset(preset), seed: 0, output_dir: None, emit_samples: 0 }
    }

    /// Parses `key = value` lines; `#` starts a comment. A `preset` line is
    /// applied first so that other keys override it wherever they appear.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: idx + 1, message: format!("expected key = value, got {line:?}") })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("unknown key {k:?} on line {}", idx + 1)));
            }
            pairs.push((k.to_string(), v.to_string()));
        }
        let preset = match pairs.iter().rev().find(|(k, _)| k == "preset") {
            Some((_, v)) => v.parse()?,
            None => Preset::Relaxed,
        };
        let mut cfg = Config::with_preset(preset);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.constants.validate()?;
        Ok(cfg)
    }

    /// Sets one key; `preset` resets all constants to that preset.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
        }
        let c = &mut self.constants;
        match key {
            "preset" => {
                let p: Preset = value.parse()?;
                if p != self.preset {
                    self.preset = p;
                    *c = Constants::preset(p);
                }
            }
            "c1" => c.c1 = num(key, value)?,
            "c2" => c.c2 = num(key, value)?,
            "c3" => c.c3 = num(key, value)?,
            "k_flat" => c.k_flat = num(key, value)?,
            "ceiling" => c.ceiling = num(key, value)?,
            "grid_factor" => c.grid_factor = num(key, value)?,
            "freq_cap" => c.freq_cap = num(key, value)?,
            "stage_budget" => c.stage_budget = num(key, value)?,
            "iteration_budget" => c.iteration_budget = num(key, value)?,
            "eps" => c.eps = num(key, value)?,
            "init_eps" => c.init_eps = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            "emit_samples" => self.emit_samples = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// The configuration in the same flat format [`Config::parse`] reads.
    pub fn to_text(&self) -> String {
        let c = &self.constants;
        let mut s = format!("preset = {}\n", self.preset);
        for (k, v) in [
            ("c1", fmt_f64(c.c1)),
            ("c2", fmt_f64(c.c2)),
            ("c3", fmt_f64(c.c3)),
            ("k_flat", fmt_f64(c.k_flat)),
            ("ceiling", fmt_f64(c.ceiling)),
            ("grid_factor", c.grid_factor.to_string()),
            ("freq_cap", c.freq_cap.to_string()),
            ("stage_budget", c.stage_budget.to_string()),
            ("iteration_budget", c.iteration_budget.to_string()),
            ("eps", fmt_f64(c.eps)),
            ("init_eps", fmt_f64(c.init_eps)),
            ("seed", self.seed.to_string()),
            ("emit_samples", self.emit_samples.to_string()),
        ] {
            s.push_str(&format!("{k} = {v}\n"));
        }
        if let Some(d) = &self.output_dir {
            s.push_str(&format!("output_dir = {}\n", d.display()));
        }
        s
    }
}
