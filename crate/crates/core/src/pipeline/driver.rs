//! The alternating driver with per-stage checkpoints.

use super::config::Config;
use super::init::{init_partners_with, InitOptions, InitReport};
use super::stages::kill_gap;
use super::PartnerPair;
use crate::error::{Error, Result};
use crate::metrics::{modulus_range_on, winding};
use crate::numeric::fmt_f64;
use crate::report::{first_failure, Check};
use crate::trigpoly::{moduli_equal, TrigPoly};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

/// Slack applied to the stage bounds `5ε2^{−j}` and `6ε2^{−j}`.
pub const CERT_SLACK: f64 = 1.25;

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub stage: u32,
    pub role_swapped: bool,
    pub osc_f: f64,
    pub osc_g: f64,
    pub dist_f: f64,
    pub dist_g: f64,
    pub deg_f: u64,
    pub deg_g: u64,
    /// Normalisation `ν_j` applied before the stage (1 for the initial pair).
    pub nu: f64,
    pub winding_f: i64,
    pub winding_g: i64,
    pub moduli_residual: f64,
    pub l2_gap: f64,
    /// `‖f_j − ν_j f_{j−1}‖∞` and `‖g_j − ν_j g_{j−1}‖∞`, certified.
    pub step_f: f64,
    pub step_g: f64,
    /// `max(step_f, step_g) / √(ε2^{−j})`.
    pub k_step: f64,
    /// Wall time; not serialised so checkpoints stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
    /// Hard invariants; a failure aborts the run.
    pub certificates: Vec<Check>,
    /// The `5ε2^{−j}` and `6ε2^{−j}` bounds, reported rather than enforced.
    pub bounds: Vec<Check>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub pair: PartnerPair,
    pub init: InitReport,
    pub stages: Vec<StageReport>,
}

/// A stage failed; everything up to `last_checkpoint` is intact.
#[derive(Debug)]
pub struct RunAbort {
    pub stage: u32,
    pub error: Error,
    pub completed: Vec<StageReport>,
    pub last_checkpoint: Option<PathBuf>,
}

impl std::fmt::Display for RunAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "stage {} aborted: {}", self.stage, self.error)?;
        if let Some(p) = &self.last_checkpoint {
            write!(f, " (last checkpoint {})", p.display())?;
        }
        Ok(())
    }
}

impl std::error::Error for RunAbort {}

fn report_for(
    stage: u32,
    swapped: bool,
    nu: f64,
    pair: &PartnerPair,
    prev: Option<&PartnerPair>,
    cfg: &Config,
    started: Instant,
) -> StageReport {
    let c = &cfg.constants;
    let rf = modulus_range_on(&pair.f, c.grid_factor, 4096);
    let rg = modulus_range_on(&pair.g, c.grid_factor, 4096);
    let (step_f, step_g) = match prev {
        Some(p) => (
            (&pair.f - &p.f.scale(nu)).sup_norm_certified().hi,
            (&pair.g - &p.g.scale(nu)).sup_norm_certified().hi,
        ),
        None => (0.0, 0.0),
    };
    let eps_j = c.eps * 0.5f64.powi(stage as i32);
    let mut certificates = vec![
        Check::at_most("moduli residual", pair.moduli_residual, 1e-11 * pair.f.max_abs_coeff().max(1.0), 0),
        Check::at_most("wind f = 1", (pair.winding_f - 1).abs() as f64, 0.0, 0),
        Check::at_most("wind g = 0", pair.winding_g.abs() as f64, 0.0, 0),
        Check::at_most("‖f‖₂ = ‖g‖₂", (pair.f.l2_norm() - pair.g.l2_norm()).abs(), 1e-11, 0),
    ];
    let mut bounds = Vec::new();
    if let Some(p) = prev {
        let floor_f = modulus_range_on(&p.f.scale(nu), c.grid_factor, 4096).min_lo;
        let floor_g = modulus_range_on(&p.g.scale(nu), c.grid_factor, 4096).min_lo;
        certificates.push(Check::below("homotopy ‖f_j − ν f_{j−1}‖∞ < min|ν f_{j−1}|", step_f, floor_f, rf.grid_size));
        certificates.push(Check::below("homotopy ‖g_j − ν g_{j−1}‖∞ < min|ν g_{j−1}|", step_g, floor_g, rg.grid_size));
        let slack = CERT_SLACK * eps_j;
        bounds.push(Check::below("Osc f < 5ε2^−j·1.25", rf.oscillation(), 5.0 * slack, rf.grid_size));
        bounds.push(Check::below("Osc g < 5ε2^−j·1.25", rg.oscillation(), 5.0 * slack, rg.grid_size));
        bounds.push(Check::below("‖|f| − 1‖∞ < 6ε2^−j·1.25", rf.dist_to_one(), 6.0 * slack, rf.grid_size));
        bounds.push(Check::below("‖|g| − 1‖∞ < 6ε2^−j·1.25", rg.dist_to_one(), 6.0 * slack, rg.grid_size));
    }
    StageReport {
        stage,
        role_swapped: swapped,
        osc_f: rf.oscillation(),
        osc_g: rg.oscillation(),
        dist_f: rf.dist_to_one(),
        dist_g: rg.dist_to_one(),
        deg_f: pair.f.degree(),
        deg_g: pair.g.degree(),
        nu,
        winding_f: pair.winding_f,
        winding_g: pair.winding_g,
        moduli_residual: pair.moduli_residual,
        l2_gap: (pair.f.l2_norm() - pair.g.l2_norm()).abs(),
        step_f,
        step_g,
        k_step: step_f.max(step_g) / eps_j.sqrt(),
        elapsed: started.elapsed(),
        certificates,
        bounds,
    }
}

/// `t,|f|,arg f,|g|,arg g` on `rows` equally spaced points.
pub fn samples_csv(f: &TrigPoly, g: &TrigPoly, rows: usize) -> String {
    let mut s = String::from("t,|f|,arg f,|g|,arg g\n");
    for i in 0..rows {
        let t = i as f64 / rows as f64;
        let (a, b) = (f.evaluate(t), g.evaluate(t));
        s.push_str(&format!("{},{},{},{},{}\n", fmt_f64(t), fmt_f64(a.norm()), fmt_f64(a.arg()), fmt_f64(b.norm()), fmt_f64(b.arg())));
    }
    s
}

/// Writes `stage_<j>/{f.poly, g.poly, report.json, rng.state}` (plus
/// `samples.csv` when requested) and returns the directory.
pub fn write_checkpoint(
    dir: &Path,
    report: &StageReport,
    pair: &PartnerPair,
    seed: u64,
    rng: &ChaCha8Rng,
    samples: usize,
) -> Result<PathBuf> {
    let stage_dir = dir.join(format!("stage_{}", report.stage));
    fs::create_dir_all(&stage_dir)?;
    fs::write(stage_dir.join("f.poly"), pair.f.to_text())?;
    fs::write(stage_dir.join("g.poly"), pair.g.to_text())?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(stage_dir.join("report.json"), json + "\n")?;
    fs::write(stage_dir.join("rng.state"), format!("seed={seed}\nword_pos={}\n", rng.get_word_pos()))?;
    if samples > 0 {
        fs::write(stage_dir.join("samples.csv"), samples_csv(&pair.f, &pair.g, samples))?;
    }
    Ok(stage_dir)
}

/// Initial pair, then `stage_budget` gap-killing stages alternating the
/// roles of `f` and `g`, with `ε_j = 2^{−j}ε`.
pub fn run(cfg: &Config) -> std::result::Result<RunOutput, RunAbort> {
    let c = &cfg.constants;
    let abort = |stage, error, completed: &Vec<StageReport>, last: &Option<PathBuf>| RunAbort {
        stage,
        error,
        completed: completed.clone(),
        last_checkpoint: last.clone(),
    };
    if let Err(e) = c.validate() {
        return Err(abort(1, e, &Vec::new(), &None));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut reports = Vec::new();
    let mut last: Option<PathBuf> = None;

    let started = Instant::now();
    let init_opts = InitOptions { k_flat: c.k_flat, ceiling: c.ceiling, ..InitOptions::default() };
    let (mut pair, init) = match init_partners_with(c.init_eps, rng.next_u64(), &init_opts) {
        Ok(v) => v,
        Err(e) => return Err(abort(1, e, &reports, &last)),
    };
    let first = report_for(1, false, 1.0, &pair, None, cfg, started);
    if let Some(bad) = first_failure(&first.certificates) {
        let e = Error::Certificate(format!("stage 1: {} = {}", bad.name, bad.value));
        return Err(abort(1, e, &reports, &last));
    }
    if let Some(dir) = &cfg.output_dir {
        match write_checkpoint(dir, &first, &pair, cfg.seed, &rng, cfg.emit_samples) {
            Ok(p) => last = Some(p),
            Err(e) => return Err(abort(1, e, &reports, &last)),
        }
    }
    reports.push(first);

    for j in 2..2 + c.stage_budget {
        let started = Instant::now();
        let swapped = j % 2 == 1;
        let (lead, other) = if swapped { (&pair.g, &pair.f) } else { (&pair.f, &pair.g) };
        let nu = 1.0 / lead.sup_norm_certified().hi.max(1.0);
        let eps_j = c.eps * 0.5f64.powi(j as i32);
        let stage_seed = rng.next_u64();
        let out = match kill_gap(&lead.scale(nu), &other.scale(nu), eps_j, c, stage_seed) {
            Ok(o) => o,
            Err(e) => return Err(abort(j, e, &reports, &last)),
        };
        let (f, g) = if swapped { (out.g, out.f) } else { (out.f, out.g) };
        let wf = winding(&f);
        let wg = winding(&g);
        let (wf, wg) = match (wf, wg) {
            (Ok(a), Ok(b)) => (a.value, b.value),
            (Err(e), _) | (_, Err(e)) => return Err(abort(j, e, &reports, &last)),
        };
        let residual = moduli_equal(&f, &g, 0.0).residual;
        let next = PartnerPair { f, g, winding_f: wf, winding_g: wg, moduli_residual: residual };
        let report = report_for(j, swapped, nu, &next, Some(&pair), cfg, started);
        if let Some(bad) = first_failure(&report.certificates) {
            let e = Error::Certificate(format!("stage {j}: {} = {} against {}", bad.name, bad.value, bad.bound));
            return Err(abort(j, e, &reports, &last));
        }
        if let Some(dir) = &cfg.output_dir {
            match write_checkpoint(dir, &report, &next, cfg.seed, &rng, cfg.emit_samples) {
                Ok(p) => last = Some(p),
                Err(e) => return Err(abort(j, e, &reports, &last)),
            }
        }
        reports.push(report);
        pair = next;
    }
    Ok(RunOutput { pair, init, stages: reports })
}
