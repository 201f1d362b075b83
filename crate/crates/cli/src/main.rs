//! `pauli`: batch driver for the constructions in `pauli-core`.
//!
//! Exit codes: 0 pass, 1 usage or parse error, 2 certificate failure,
//! 3 pipeline abort.

use clap::{Parser, Subcommand};
use pauli_core::demos::{run_demo, DEMO_IDS};
use pauli_core::metrics::{modulus_range, winding};
use pauli_core::numeric::fmt_f64;
use pauli_core::pipeline::{run, samples_csv, Config};
use pauli_core::{moduli_equal, Error, TrigPoly};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pauli", version, about = "Equal-modulus trigonometric polynomial pairs with different winding numbers")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `paper-strict` or `relaxed`.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Rows of `t,|f|,arg f,|g|,arg g` samples to write.
    #[arg(long, global = true)]
    emit_samples: Option<usize>,
    /// Absolute tolerance for the coefficient-moduli comparison in `verify`.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the certified winding number of a coefficient file.
    Wind { file: PathBuf },
    /// Run the desk instance of one construction step (1..=10).
    Demo { id: u32 },
    /// Run the full pipeline with checkpoints.
    Run,
    /// Compare two coefficient files: moduli residual and windings.
    Verify { f: PathBuf, g: PathBuf },
    /// Summarise a coefficient file; with --emit-samples also print samples.
    Dump { file: PathBuf },
}

enum Failure {
    Usage(String),
    Certificate(String),
    Abort(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Config(_) | Error::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Certificate(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Certificate(m)) => {
            eprintln!("certificate failed: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Abort(m)) => {
            eprintln!("pipeline aborted: {m}");
            ExitCode::from(3)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => Config::parse(&read(p)?)?,
        None => Config::default(),
    };
    if let Some(p) = &cli.preset {
        cfg.set("preset", p)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = Some(o.clone());
    }
    if let Some(k) = cli.emit_samples {
        cfg.emit_samples = k;
    }
    cfg.constants.validate()?;
    Ok(cfg)
}

fn read(p: &Path) -> Result<String, Failure> {
    fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn read_poly(p: &Path) -> Result<TrigPoly, Failure> {
    TrigPoly::from_text(&read(p)?).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn write(p: &Path, content: &str) -> Result<(), Failure> {
    if let Some(parent) = p.parent() {
        fs::create_dir_all(parent).map_err(|e| Failure::Usage(format!("{}: {e}", parent.display())))?;
    }
    fs::write(p, content).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Wind { file } => {
            let p = read_poly(file)?;
            let w = winding(&p)?;
            println!("{}", w.value);
            println!("{}", serde_json::to_string(&w).expect("plain struct"));
            Ok(())
        }
        Command::Demo { id } => demo(cli, *id),
        Command::Run => run_pipeline(cli),
        Command::Verify { f, g } => verify(cli, f, g),
        Command::Dump { file } => {
            let p = read_poly(file)?;
            let r = modulus_range(&p);
            let sup = p.sup_norm_certified();
            let w = winding(&p).ok().map(|w| w.value);
            let summary = json!({
                "degree": p.degree(),
                "nonzero": p.nnz(),
                "l2": p.l2_norm(),
                "sup_lo": sup.lo,
                "sup_hi": sup.hi,
                "min_modulus_lo": r.min_lo,
                "max_modulus_hi": r.max_hi,
                "winding": w,
            });
            println!("{summary}");
            if let Some(k) = cli.emit_samples.filter(|&k| k > 0) {
                print!("{}", samples_csv(&p, &p, k));
            }
            Ok(())
        }
    }
}

fn demo(cli: &Cli, id: u32) -> Result<(), Failure> {
    if !DEMO_IDS.contains(&id) {
        return Err(Failure::Usage(format!("demo id {id} outside 1..=10")));
    }
    let cfg = load_config(cli)?;
    let outcome = run_demo(id, cfg.seed)?;
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out")).join(format!("demo_{id}"));
    let cert = serde_json::to_string_pretty(&outcome.to_json()).expect("json value");
    write(&dir.join("certificate.json"), &(cert + "\n"))?;
    for (name, p) in &outcome.polys {
        write(&dir.join(format!("{name}.poly")), &p.to_text())?;
    }
    for c in &outcome.checks {
        println!("{:<5} {}: {} (bound {})", if c.pass { "PASS" } else { "FAIL" }, c.name, fmt_f64(c.value), fmt_f64(c.bound));
    }
    match outcome.checks.iter().find(|c| !c.pass) {
        None => Ok(()),
        Some(c) => Err(Failure::Certificate(format!("demo {id}: {}", c.name))),
    }
}

fn run_pipeline(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let header = "j,role_swapped,osc_f,osc_g,dist_f,dist_g,deg_f,residual,wind_f,wind_g";
    let row = |r: &pauli_core::pipeline::StageReport| {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            r.stage,
            r.role_swapped,
            fmt_f64(r.osc_f),
            fmt_f64(r.osc_g),
            fmt_f64(r.dist_f),
            fmt_f64(r.dist_g),
            r.deg_f,
            fmt_f64(r.moduli_residual),
            r.winding_f,
            r.winding_g
        )
    };
    match run(&cfg) {
        Ok(out) => {
            println!("{header}");
            for r in &out.stages {
                println!("{}", row(r));
            }
            Ok(())
        }
        Err(abort) => {
            println!("{header}");
            for r in &abort.completed {
                println!("{}", row(r));
            }
            Err(Failure::Abort(abort.to_string()))
        }
    }
}

fn verify(cli: &Cli, f: &Path, g: &Path) -> Result<(), Failure> {
    let (p, q) = (read_poly(f)?, read_poly(g)?);
    let rep = moduli_equal(&p, &q, cli.tol);
    let wf = winding(&p).ok().map(|w| w.value);
    let wg = winding(&q).ok().map(|w| w.value);
    let out = json!({
        "moduli_residual": rep.residual,
        "tol": cli.tol,
        "winding_f": wf,
        "winding_g": wg,
        "pass": rep.pass,
    });
    println!("{out}");
    if rep.pass {
        Ok(())
    } else {
        Err(Failure::Certificate(format!("moduli residual {} above {}", rep.residual, cli.tol)))
    }
}
