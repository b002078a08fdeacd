//! Command-line front end for `qpf-core`.
//!
//! Each run resolves a [`RunConfig`] (config file, then flags), computes the
//! artifact, and writes it to `--out` or stdout. With a cache directory the
//! artifact is stored under the SHA-256 of the canonical resolved
//! configuration and replayed byte for byte on the next identical run.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;
use sha2::{Digest, Sha256};

use args::{Cli, Command, CommonArgs, EdgeArg, MethodArg};
use commands::Artifact;
pub use config::RunConfig;
pub use error::{exit, CliError, CliResult};
use qpf_core::rotnum::Method;
use qpf_core::scan::Edge;

fn set<T: Clone>(slot: &mut T, flag: &Option<T>) {
    if let Some(v) = flag {
        *slot = v.clone();
    }
}

fn set_opt<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
    if flag.is_some() {
        *slot = flag.clone();
    }
}

fn apply_common(cfg: &mut RunConfig, c: &CommonArgs) -> CliResult<()> {
    set(&mut cfg.seed, &c.seed);
    set_opt(&mut cfg.jobs, &c.jobs);
    set(&mut cfg.format, &c.format);
    set_opt(&mut cfg.out, &c.out);
    set_opt(&mut cfg.cache_dir, &c.cache_dir);

    if let Some(name) = &c.family {
        cfg.family = Some(config::family_by_name(name)?);
    }
    let params = [
        ("rho0", c.rho0),
        ("alpha", c.alpha),
        ("tau", c.tau),
        ("beta", c.beta),
        ("lambda", c.lambda),
        ("energy", c.energy),
        ("omega", c.omega),
    ];
    for (name, value) in params {
        if let Some(v) = value {
            let family =
                cfg.family.as_mut().ok_or_else(|| CliError::config(format!("--{name} given without a family")))?;
            family.set_param(name, v).map_err(|e| CliError::config(e.to_string()))?;
        }
    }

    let e = &mut cfg.estimator;
    set(&mut e.n, &c.n);
    set(&mut e.seeds, &c.seeds);
    set(&mut e.transient, &c.transient);
    if let Some(m) = c.method {
        e.method = match m {
            MethodArg::Plain => Method::Plain,
            MethodArg::Weighted => Method::Weighted,
        };
    }
    Ok(())
}

/// Config file (if any) with the command's flags applied on top.
pub fn resolve(command: &Command) -> CliResult<RunConfig> {
    let common = command.common();
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    apply_common(&mut cfg, common)?;
    match command {
        Command::Rho(_) => {}
        Command::Probe(a) => set_opt(&mut cfg.probe.eps, &a.eps),
        Command::Deviations(a) => {
            let d = &mut cfg.deviations;
            set(&mut d.theta, &a.theta);
            set(&mut d.x, &a.x);
            set(&mut d.n, &a.n_list);
            set_opt(&mut d.rho, &a.rho);
            set_opt(&mut d.n_max, &a.n_max);
            set(&mut d.growth_window, &a.growth_window);
        }
        Command::Sweep(a) => {
            let s = &mut cfg.sweep;
            set(&mut s.param, &a.param);
            set(&mut s.lo, &a.lo);
            set(&mut s.hi, &a.hi);
            set(&mut s.points, &a.points);
            set_opt(&mut s.param2, &a.param2);
            set_opt(&mut s.lo2, &a.lo2);
            set_opt(&mut s.hi2, &a.hi2);
            set_opt(&mut s.points2, &a.points2);
            set(&mut s.eps, &a.eps);
            set(&mut s.min_width, &a.min_width);
            set(&mut s.witness.tol, &a.witness_tol);
            set(&mut s.witness.qmax, &a.qmax);
            set(&mut s.witness.pmax, &a.pmax);
        }
        Command::Tongue(a) => {
            let t = &mut cfg.tongue;
            set(&mut t.param, &a.param);
            set(&mut t.target, &a.target);
            set(&mut t.lo, &a.lo);
            set(&mut t.hi, &a.hi);
            set(&mut t.tol, &a.tol);
            if let Some(edge) = a.edge {
                t.edge = match edge {
                    EdgeArg::Left => Edge::Left,
                    EdgeArg::Right => Edge::Right,
                };
            }
        }
        Command::Strip(a) => {
            let s = &mut cfg.strip;
            set(&mut s.grid, &a.grid);
            set(&mut s.below, &a.below);
            set(&mut s.above, &a.above);
            set(&mut s.tol, &a.tol);
            set(&mut s.max_iter, &a.max_iter);
            set(&mut s.radius, &a.radius);
            set(&mut s.pinch_tol, &a.pinch_tol);
        }
        Command::Annulus(a) => {
            let s = &mut cfg.annulus;
            set(&mut s.grid, &a.grid);
            set(&mut s.candidates, &a.candidates);
            set(&mut s.max_iter, &a.max_iter);
            set(&mut s.strict_tol, &a.strict_tol);
        }
        Command::Ids(a) => {
            let s = &mut cfg.ids;
            set(&mut s.e_lo, &a.e_lo);
            set(&mut s.e_hi, &a.e_hi);
            set(&mut s.points, &a.points);
            set(&mut s.size, &a.size);
            set(&mut s.phases, &a.phases);
            set(&mut s.label_tol, &a.label_tol);
            set(&mut s.kmax, &a.kmax);
        }
        Command::GapLabel(a) => {
            let s = &mut cfg.gap_label;
            set(&mut s.e_lo, &a.e_lo);
            set(&mut s.e_hi, &a.e_hi);
            set(&mut s.tol, &a.tol);
            set(&mut s.kmax, &a.kmax);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Hex SHA-256 of everything that determines the artifact bytes. Output
/// paths, cache location and thread count are excluded.
pub fn cache_key(command: &str, cfg: &RunConfig) -> String {
    let section = match command {
        "probe" => json!(cfg.probe),
        "deviations" => json!(cfg.deviations),
        "sweep" => json!(cfg.sweep),
        "tongue" => json!(cfg.tongue),
        "strip" => json!(cfg.strip),
        "annulus" => json!(cfg.annulus),
        "ids" => json!(cfg.ids),
        "gap-label" => json!(cfg.gap_label),
        _ => json!(null),
    };
    let canonical = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "family": cfg.family,
        "estimator": cfg.estimator,
        "seed": cfg.seed,
        "format": cfg.format,
        "section": section,
    });
    // serde_json maps are ordered by key, so this rendering is canonical.
    let bytes = serde_json::to_vec(&canonical).expect("JSON values serialize");
    format!("{:x}", Sha256::digest(&bytes))
}

pub fn execute(command: &str, cfg: &RunConfig) -> CliResult<Artifact> {
    match command {
        "rho" => commands::rho(cfg),
        "probe" => commands::probe(cfg),
        "deviations" => commands::deviations_cmd(cfg),
        "sweep" => commands::sweep(cfg),
        "tongue" => commands::tongue(cfg),
        "strip" => commands::strip(cfg),
        "annulus" => commands::annulus(cfg),
        "ids" => commands::ids(cfg),
        "gap-label" => commands::gap_label_cmd(cfg),
        other => Err(CliError::config(format!("unknown command {other:?}"))),
    }
}

const BODY: &str = "artifact";
const SUMMARY: &str = "summary.txt";

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn load_cached(dir: &Path) -> CliResult<Option<Artifact>> {
    if !dir.join(SUMMARY).is_file() {
        return Ok(None);
    }
    let body = read(&dir.join(BODY))?;
    let summary = String::from_utf8_lossy(&read(&dir.join(SUMMARY))?).lines().map(str::to_owned).collect();
    let mut extras = Vec::new();
    if dir.join(BODY.to_owned() + commands::GRID_SUFFIX).is_file() {
        let suffix = commands::GRID_SUFFIX.to_owned();
        extras.push((suffix.clone(), read(&dir.join(BODY.to_owned() + &suffix))?));
    }
    Ok(Some(Artifact { body, extras, summary }))
}

fn store_cached(dir: &Path, artifact: &Artifact) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write(&dir.join(BODY), &artifact.body)?;
    for (suffix, bytes) in &artifact.extras {
        write(&dir.join(BODY.to_owned() + suffix), bytes)?;
    }
    // Written last: its presence marks a complete entry.
    write(&dir.join(SUMMARY), (artifact.summary.join("\n") + "\n").as_bytes())
}

/// Computes or replays the artifact for `command` under `cfg`.
pub fn produce(command: &str, cfg: &RunConfig, notes: &mut dyn Write) -> CliResult<Artifact> {
    let Some(cache) = &cfg.cache_dir else {
        return execute(command, cfg);
    };
    let key = cache_key(command, cfg);
    let dir = cache.join(&key);
    if let Some(hit) = load_cached(&dir)? {
        let _ = writeln!(notes, "cache hit: {} (key {key})", dir.display());
        return Ok(hit);
    }
    let artifact = execute(command, cfg)?;
    store_cached(&dir, &artifact)?;
    Ok(artifact)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes the artifact: files under `--out` plus the summary on stdout, or
/// the body on stdout plus the summary on stderr.
pub fn emit(artifact: &Artifact, out: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let console = |e| CliError::io("<stdout>", e);
    match out {
        Some(path) => {
            write(path, &artifact.body)?;
            for (suffix, bytes) in &artifact.extras {
                write(&with_suffix(path, suffix), bytes)?;
            }
            for line in &artifact.summary {
                writeln!(stdout, "{line}").map_err(console)?;
            }
        }
        None => {
            if !artifact.extras.is_empty() {
                return Err(CliError::config("this command writes several files; pass --out"));
            }
            stdout.write_all(&artifact.body).map_err(console)?;
            for line in &artifact.summary {
                let _ = writeln!(stderr, "{line}");
            }
        }
    }
    Ok(())
}

/// Full run; returns the process exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let command = cli.command.name();
    let result = resolve(&cli.command).and_then(|cfg| {
        let work = || -> CliResult<(Artifact, Vec<u8>)> {
            let mut notes = Vec::new();
            let artifact = produce(command, &cfg, &mut notes)?;
            Ok((artifact, notes))
        };
        let (artifact, notes) = match cfg.jobs {
            Some(jobs) => rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| CliError::config(format!("cannot start {jobs} workers: {e}")))?
                .install(work)?,
            None => work()?,
        };
        let _ = stderr.write_all(&notes);
        emit(&artifact, cfg.out.as_deref(), stdout, stderr)
    });
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(stderr, "qpf {command}: {e}");
            e.exit_code()
        }
    }
}
