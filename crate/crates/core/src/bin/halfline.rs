//! Command-line harness: runs each module end to end, writes CSV/JSON
//! artifacts plus a `run.json` manifest into the output directory.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use halfline::acim::{nu_gamma_cylinders, support_intervals, ulam_density, AcimSystem};
use halfline::affine::{coincidence_search, compose, SystemParams};
use halfline::error::Error;
use halfline::shift::ShiftMeasure;
use halfline::skew::path_average;
use halfline::sphere::sphere_measure;
use halfline::stationary::{
    holder_certificate, moment_oracle, rotation_number, rotation_number_numeric,
    solve_stationary, DEFAULT_GRID, DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
use halfline::steering::{approx_sequence, exp_targets, steer};
use halfline::Result;

#[derive(Parser)]
#[command(
    name = "halfline",
    version,
    about = "Random affine dynamics on the half-line: stationary measures, \
             ergodic averages, Ulam densities and steering words"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON config file; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Contracting slope, as a decimal or a rational like 1/2.
    #[arg(long, global = true)]
    a: Option<String>,
    /// Expanding slope, as a decimal or a rational like 4/3.
    #[arg(long, global = true)]
    b: Option<String>,
    /// Bernoulli mass of symbol 0.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Threshold of the interval map (acim).
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Depth / step count / sequence length, per subcommand.
    #[arg(long, global = true)]
    n: Option<u64>,
    /// Grid nodes of the stationary solver.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Ulam bins.
    #[arg(long, global = true)]
    bins: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: hardware parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Fixed-point tolerance of the stationary solver.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory for artifacts and the run manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the stationary CDF and export it with its moment report.
    Stationary,
    /// Exact cylinder-weighted sphere average at depth n.
    SphereAvg {
        /// Start point of the fiber.
        #[arg(long, default_value_t = 1.0)]
        x: f64,
    },
    /// Empirical measure of one sampled orbit of n steps.
    PathAvg {
        #[arg(long, default_value_t = 1.0)]
        x: f64,
    },
    /// Ulam invariant density of the interval map, with support report and
    /// cylinder table diagnostics.
    Acim,
    /// Build and verify a word steering x to within eps of y.
    Steer {
        #[arg(long, default_value_t = 1.0)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Universal approximation sequence toward a truncated Exp(1) target.
    ApproxSeq,
    /// Exact-rational search for distinct words acting identically.
    Coincidence {
        #[arg(long, default_value_t = 5)]
        max_len: u32,
    },
    /// Interval lower-bound certificate word and constants.
    HolderCert {
        #[arg(long)]
        center: f64,
        #[arg(long)]
        length: f64,
    },
    /// Rotation number of the comparison circle map, formula vs numeric.
    Rotation,
    /// Run the full acceptance suite.
    Verify,
}

/// A slope parameter that may carry an exact rational representation.
#[derive(Clone, Copy)]
enum Slope {
    Exact(i64, i64),
    Float(f64),
}

impl Slope {
    fn parse(s: &str) -> Result<Slope> {
        if let Some((num, den)) = s.split_once('/') {
            let n: i64 = num
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad rational {s:?}")))?;
            let d: i64 = den
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad rational {s:?}")))?;
            if d == 0 {
                return Err(Error::InvalidConfig(format!("zero denominator in {s:?}")));
            }
            Ok(Slope::Exact(n, d))
        } else {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad number {s:?}")))?;
            Ok(Slope::Float(v))
        }
    }

    fn value(self) -> f64 {
        match self {
            Slope::Exact(n, d) => n as f64 / d as f64,
            Slope::Float(v) => v,
        }
    }
}

/// Fully resolved run settings: config-file fields overridden by flags.
struct Settings {
    a: Slope,
    b: Slope,
    p: f64,
    gamma: f64,
    n: Option<u64>,
    grid: usize,
    bins: usize,
    seed: u64,
    workers: Option<usize>,
    tol: f64,
    out: PathBuf,
}

fn field_err(field: &str, v: &serde_json::Value) -> Error {
    Error::InvalidConfig(format!("config field {field:?}: unusable value {v}"))
}

impl Settings {
    fn resolve(cli: &Cli) -> Result<Settings> {
        let mut s = Settings {
            a: Slope::Exact(1, 2),
            b: Slope::Float(1.25),
            p: 0.6,
            gamma: 2.0,
            n: None,
            grid: DEFAULT_GRID,
            bins: 4096,
            seed: 7,
            workers: None,
            tol: DEFAULT_TOL,
            out: PathBuf::from("out"),
        };
        if let Some(path) = &cli.config {
            let text = fs::read_to_string(path)?;
            let cfg: serde_json::Value = serde_json::from_str(&text)?;
            let obj = cfg
                .as_object()
                .ok_or_else(|| Error::InvalidConfig("config root must be an object".into()))?;
            for (key, v) in obj {
                match key.as_str() {
                    "a" | "b" => {
                        let slope = match v {
                            serde_json::Value::String(text) => Slope::parse(text)?,
                            serde_json::Value::Number(x) => Slope::Float(
                                x.as_f64().ok_or_else(|| field_err(key, v))?,
                            ),
                            _ => return Err(field_err(key, v)),
                        };
                        if key == "a" {
                            s.a = slope;
                        } else {
                            s.b = slope;
                        }
                    }
                    "p" => s.p = v.as_f64().ok_or_else(|| field_err(key, v))?,
                    "gamma" => s.gamma = v.as_f64().ok_or_else(|| field_err(key, v))?,
                    "n" => s.n = Some(v.as_u64().ok_or_else(|| field_err(key, v))?),
                    "grid" => {
                        s.grid = v.as_u64().ok_or_else(|| field_err(key, v))? as usize;
                    }
                    "bins" => {
                        s.bins = v.as_u64().ok_or_else(|| field_err(key, v))? as usize;
                    }
                    "seed" => s.seed = v.as_u64().ok_or_else(|| field_err(key, v))?,
                    "workers" => {
                        s.workers = Some(v.as_u64().ok_or_else(|| field_err(key, v))? as usize);
                    }
                    "tol" => s.tol = v.as_f64().ok_or_else(|| field_err(key, v))?,
                    "out" => {
                        s.out = PathBuf::from(v.as_str().ok_or_else(|| field_err(key, v))?);
                    }
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "unknown config field {other:?}"
                        )))
                    }
                }
            }
        }
        if let Some(a) = &cli.a {
            s.a = Slope::parse(a)?;
        }
        if let Some(b) = &cli.b {
            s.b = Slope::parse(b)?;
        }
        if let Some(p) = cli.p {
            s.p = p;
        }
        if let Some(g) = cli.gamma {
            s.gamma = g;
        }
        if let Some(n) = cli.n {
            s.n = Some(n);
        }
        if let Some(g) = cli.grid {
            s.grid = g;
        }
        if let Some(b) = cli.bins {
            s.bins = b;
        }
        if let Some(seed) = cli.seed {
            s.seed = seed;
        }
        if let Some(w) = cli.workers {
            s.workers = Some(w);
        }
        if let Some(t) = cli.tol {
            s.tol = t;
        }
        if let Some(out) = &cli.out {
            s.out = out.clone();
        }
        if !(s.p > 0.0 && s.p < 1.0) {
            return Err(Error::InvalidBernoulli(s.p));
        }
        Ok(s)
    }

    fn params(&self) -> Result<SystemParams> {
        if let (Slope::Exact(an, ad), Slope::Exact(bn, bd)) = (self.a, self.b) {
            SystemParams::new_exact(an, ad, bn, bd)
        } else {
            SystemParams::new(self.a.value(), self.b.value())
        }
    }

    fn params_json(&self) -> serde_json::Value {
        json!({
            "a": self.a.value(),
            "b": self.b.value(),
            "p": self.p,
            "gamma": self.gamma,
            "n": self.n,
            "grid": self.grid,
            "bins": self.bins,
            "seed": self.seed,
            "tol": self.tol,
        })
    }
}

fn write_manifest(
    settings: &Settings,
    command: &str,
    artifacts: &[String],
    started: Instant,
) -> Result<()> {
    let manifest = json!({
        "command": command,
        "params": settings.params_json(),
        "artifacts": artifacts,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    fs::write(
        settings.out.join("run.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<String> {
    fs::write(dir.join(name), serde_json::to_string_pretty(value)?)?;
    Ok(name.to_string())
}

/// Atoms of a point-mass measure as `x,weight` rows at full precision.
fn write_atoms_csv(
    dir: &Path,
    name: &str,
    atoms: impl Iterator<Item = (f64, f64)>,
) -> Result<String> {
    let mut f = fs::File::create(dir.join(name))?;
    writeln!(f, "x,weight")?;
    for (x, w) in atoms {
        writeln!(f, "{x:.17e},{w:.17e}")?;
    }
    Ok(name.to_string())
}

fn run(cli: &Cli) -> Result<()> {
    let settings = Settings::resolve(cli)?;
    if let Some(workers) = settings.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    }
    fs::create_dir_all(&settings.out)?;
    let started = Instant::now();
    let mut artifacts: Vec<String> = Vec::new();
    let command;

    match &cli.cmd {
        Cmd::Stationary => {
            command = "stationary";
            let params = settings.params()?;
            let sol = solve_stationary(
                settings.p,
                &params,
                settings.grid,
                settings.tol,
                DEFAULT_MAX_ITERS,
            )?;
            sol.measure
                .write_csv(fs::File::create(settings.out.join("stationary.csv"))?)?;
            artifacts.push("stationary.csv".into());
            let sidecar = json!({
                "a": params.a,
                "b": params.b,
                "p": settings.p,
                "N": settings.grid,
                "tol": settings.tol,
                "residual": sol.residual,
                "mass_at_infinity": sol.measure.mass_at_infinity_value(),
            });
            artifacts.push(write_json(&settings.out, "stationary.json", &sidecar)?);
            let mean = sol.measure.moment(1);
            println!(
                "stationary: mean {mean:.6} (oracle {:.6}), residual {:.3e} after {} iterations",
                moment_oracle(settings.p, &params, 1)?,
                sol.residual,
                sol.iterations
            );
        }
        Cmd::SphereAvg { x } => {
            command = "sphere-avg";
            let params = settings.params()?;
            let nu = ShiftMeasure::bernoulli(settings.p)?;
            let n = settings.n.unwrap_or(14) as u32;
            let m = sphere_measure(&nu, *x, n, &params)?;
            artifacts.push(write_atoms_csv(&settings.out, "sphere.csv", m.atoms())?);
            println!(
                "sphere average: depth {n}, {} atoms, mean {:.6}",
                m.len(),
                m.mean()
            );
        }
        Cmd::PathAvg { x } => {
            command = "path-avg";
            let params = settings.params()?;
            let nu = ShiftMeasure::bernoulli(settings.p)?;
            let n = settings.n.unwrap_or(1_000_000) as usize;
            let m = path_average(&nu, *x, n, settings.seed, &params);
            artifacts.push(write_atoms_csv(&settings.out, "path.csv", m.atoms())?);
            println!("path average: {n} steps, mean {:.6}", m.mean());
        }
        Cmd::Acim => {
            command = "acim";
            let params = settings.params()?;
            let sys = AcimSystem::new(params, settings.gamma)?;
            let density = ulam_density(&sys, settings.bins, 20_000)?;
            density.write_csv(fs::File::create(settings.out.join("density.csv"))?)?;
            artifacts.push("density.csv".into());
            let report = support_intervals(&density, 1e-3)?;
            artifacts.push(write_json(
                &settings.out,
                "support.json",
                &serde_json::to_value(&report)?,
            )?);
            let table = nu_gamma_cylinders(
                &sys,
                &density,
                1,
                settings.n.unwrap_or(1_000_000) as usize,
                settings.seed,
            )?;
            println!(
                "acim: gamma {}, I = [{:.6}, {:.6}], residual {:.3e}, {} support intervals, \
                 symbol-0 frequency {:.4}",
                settings.gamma,
                sys.lo,
                sys.hi,
                density.residual,
                report.intervals.len(),
                table.freq[0]
            );
        }
        Cmd::Steer { x, y, eps } => {
            command = "steer";
            let params = settings.params()?;
            let result = steer(*x, *y, *eps, &params)?;
            let map = compose(&result.word, &params);
            let report = json!({
                "word": result.word.to_string(),
                "value": result.value,
                "error": result.error,
                "slope": map.slope,
                "orbit_min": result.orbit_min,
                "orbit_max": result.orbit_max,
            });
            artifacts.push(write_json(&settings.out, "steer.json", &report)?);
            println!(
                "steer: |T_w({x}) - {y}| = {:.3e} with {} symbols (slope {:.3e})",
                result.error,
                result.word.len(),
                map.slope
            );
        }
        Cmd::ApproxSeq => {
            command = "approx-seq";
            let params = settings.params()?;
            let n = settings.n.unwrap_or(2000) as usize;
            let targets = exp_targets(n, 30.0, settings.seed);
            let seq = approx_sequence(&targets, &params)?;
            let mut words = String::new();
            for e in &seq {
                words.push_str(&e.word.to_string());
                words.push('\n');
            }
            fs::write(settings.out.join("sequence.txt"), words)?;
            artifacts.push("sequence.txt".into());
            artifacts.push(write_json(
                &settings.out,
                "sequence.json",
                &serde_json::to_value(&seq)?,
            )?);
            let worst = seq
                .iter()
                .enumerate()
                .map(|(i, e)| e.error * (i + 1) as f64)
                .fold(0.0f64, f64::max);
            println!("approx-seq: {n} words, worst normalized error {worst:.4}");
        }
        Cmd::Coincidence { max_len } => {
            command = "coincidence";
            let params = settings.params()?;
            if !params.is_exact() {
                return Err(Error::ExactModeUnavailable);
            }
            let classes = coincidence_search(*max_len, &params)?;
            let listing: Vec<serde_json::Value> = classes
                .iter()
                .map(|c| {
                    let map = c.map.to_float();
                    json!({
                        "slope": map.slope,
                        "intercept": map.intercept,
                        "words": c.words.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            artifacts.push(write_json(
                &settings.out,
                "coincidence.json",
                &json!({ "max_len": max_len, "classes": listing }),
            )?);
            println!(
                "coincidence: {} nontrivial class(es) up to length {max_len}",
                classes.len()
            );
            for c in &classes {
                println!(
                    "  {}",
                    c.words
                        .iter()
                        .map(|w| w.to_string())
                        .collect::<Vec<_>>()
                        .join(" = ")
                );
            }
        }
        Cmd::HolderCert { center, length } => {
            command = "holder-cert";
            let params = settings.params()?;
            let cert = holder_certificate(*center, *length, settings.p, &params)?;
            let report = json!({
                "center": cert.center,
                "length": cert.length,
                "k": cert.k,
                "m": cert.m,
                "word": cert.word.to_string(),
                "image": [cert.image_lo, cert.image_hi],
                "q": cert.q,
                "mass_lower_bound_exponent": cert.word_len(),
                "constants": serde_json::to_value(&cert.constants)?,
                "length_bound_holds": cert.length_bound_holds(),
            });
            artifacts.push(write_json(&settings.out, "certificate.json", &report)?);
            println!(
                "holder-cert: word of length {} maps [0, {:.4}] into [{:.6}, {:.6}]",
                cert.word_len(),
                1.0 / params.a,
                cert.image_lo,
                cert.image_hi
            );
        }
        Cmd::Rotation => {
            command = "rotation";
            let params = settings.params()?;
            let exact = rotation_number(&params);
            let iters = settings.n.unwrap_or(1_000_000) as usize;
            let numeric = rotation_number_numeric(&params, iters);
            artifacts.push(write_json(
                &settings.out,
                "rotation.json",
                &json!({ "formula": exact, "numeric": numeric, "iterates": iters }),
            )?);
            println!("rotation: formula {exact:.12}, numeric {numeric:.12} at {iters} iterates");
        }
        Cmd::Verify => {
            command = "verify";
            let results = halfline::verify::run_all(settings.seed);
            for r in &results {
                println!("{}", r.line());
            }
            halfline::verify::write_artifacts(&settings.out.join("artifacts"), settings.seed)?;
            artifacts.push("artifacts".into());
            artifacts.push(write_json(
                &settings.out,
                "verify.json",
                &serde_json::to_value(&results)?,
            )?);
            let failures = results.iter().filter(|r| !r.passed).count();
            if failures > 0 {
                return Err(Error::InvalidConfig(format!(
                    "{failures} acceptance criteria failed"
                )));
            }
        }
    }

    write_manifest(&settings, command, &artifacts, started)?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
