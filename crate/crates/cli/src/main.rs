//! `roth`: command-line front end for roth-core.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 a hypothesis
//! precondition failed, 3 an internal invariant was violated.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use roth_core::bohr::{build_regular, bohr_build, size_doubling_check, BohrSpec};
use roth_core::constructions::{self, write_table, ConstructionReport};
use roth_core::increment::{
    dispatch, heuristic_structure, increment_large, increment_mid, increment_nonsmoothing, increment_smoothing,
    iterate, l2_increment,
};
use roth_core::report::{analyze, write_report, write_spectrum_csv, AnalysisReport, InputDescriptor};
use roth_core::spectrum::{case_split, dyadic_peak_level, energy_2m, spectrum_at};
use roth_core::{selftest, CountMode, Error, GroupSet, Method, ReportFormat, RunConfig, SetFile};

#[derive(Parser, Debug)]
#[command(name = "roth", version, about = "Density-increment toolkit for sets in Z/NZ")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Input set file (JSON `{"n", "elements"}` or `N=<int>` text).
    #[arg(long, global = true, value_name = "FILE")]
    set: Option<PathBuf>,
    /// Config file (`key = value` lines or JSON); flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Band exponent, 0 < mu < 0.1; also raises f to at least mu
    #[arg(long, global = true, value_name = "R")]
    mu: Option<f64>,
    /// Constant used for every asymptotic inequality (X <= c * Y)
    #[arg(long = "c-omega", global = true, value_name = "R")]
    c_omega: Option<f64>,
    /// Seed for every random choice
    #[arg(long, global = true, value_name = "K")]
    seed: Option<u64>,
    /// Write the JSON result (or the set file for `construct`) here.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write CSV tables into this directory.
    #[arg(long, global = true, value_name = "DIR")]
    csv: Option<PathBuf>,
    /// Print JSON on stdout instead of a text summary.
    #[arg(long, global = true)]
    json: bool,
    /// Record wall-clock time in reports (breaks byte-for-byte determinism).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Case split, spectra, smoothing test and one dispatched increment.
    Analyze,
    /// The theta-spectrum of the input set.
    Spectrum {
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
    },
    /// Additive energy E_{2m}.
    Energy {
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, value_enum, default_value_t = Mode::Fourier)]
        mode: Mode,
    },
    /// Materialize a Bohr set B(Gamma, radius) in Z/N.
    Bohr {
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated frequencies.
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<usize>,
        #[arg(long)]
        radius: f64,
        /// Shrink to a certified regular radius in [radius/2, radius].
        #[arg(long)]
        regular: bool,
    },
    /// Run one increment pipeline.
    Increment {
        #[arg(long, value_enum, default_value_t = Pipeline::Auto)]
        pipeline: Pipeline,
        /// Spectrum threshold; defaults depend on the pipeline.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Progression-free subset of [1, n].
    Construct {
        #[arg(long, value_enum)]
        method: CliMethod,
        #[arg(long)]
        n: usize,
    },
    /// Exact maximum progression-free subset of [1, n] (n <= 50).
    MaxExact {
        #[arg(long)]
        n: usize,
    },
    /// Iterate the increment on a progression-free subset of [1, n].
    Iterate {
        /// Interval length; defaults to the largest element.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Run every acceptance criterion.
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Direct,
    Fourier,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Pipeline {
    Auto,
    L2,
    Mid,
    Smoothing,
    Nonsmoothing,
    Large,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CliMethod {
    Behrend,
    Greedy,
    Exact,
}

impl From<CliMethod> for Method {
    fn from(m: CliMethod) -> Self {
        match m {
            CliMethod::Behrend => Method::Behrend,
            CliMethod::Greedy => Method::Greedy,
            CliMethod::Exact => Method::Exact,
        }
    }
}

/// `println!` that ignores a closed stdout (for example `roth ... | head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Precondition { .. } => 2,
        Error::Invariant(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("roth: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

struct Ctx {
    common: Common,
    cfg: RunConfig,
}

impl Ctx {
    fn new(common: Common) -> Result<Self, Error> {
        let mut cfg = match &common.config {
            Some(p) => RunConfig::read(p)?,
            None => RunConfig::default(),
        };
        if let Some(mu) = common.mu {
            cfg.pipeline.mu = mu;
            cfg.pipeline.f = cfg.pipeline.f.max(mu);
        }
        if let Some(c) = common.c_omega {
            cfg.pipeline.c_omega = c;
        }
        if let Some(s) = common.seed {
            cfg.pipeline.seed = s;
        }
        if common.out.is_some() {
            cfg.out = common.out.clone();
        }
        if common.csv.is_some() {
            cfg.csv_dir = common.csv.clone();
        }
        cfg.pipeline.validate()?;
        Ok(Ctx { common, cfg })
    }

    fn set_file(&self) -> Result<(SetFile, String), Error> {
        let path = self
            .common
            .set
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("this command needs --set FILE".into()))?;
        Ok((SetFile::read(path)?, path.display().to_string()))
    }

    fn group_set(&self) -> Result<(GroupSet, String), Error> {
        let (f, name) = self.set_file()?;
        Ok((f.to_group_set()?, name))
    }

    /// JSON to `--out` and stdout per `--json`, text summary otherwise.
    fn emit(&self, value: &Value, text: &str) -> Result<(), Error> {
        let pretty = serde_json::to_string_pretty(value).expect("JSON values serialize");
        if let Some(out) = &self.cfg.out {
            write_text(out, &format!("{pretty}\n"))?;
        }
        if self.common.json {
            say!("{pretty}");
        } else {
            say!("{text}");
        }
        Ok(())
    }

    fn emit_report(&self, mut report: AnalysisReport, started: Instant, text: &str) -> Result<(), Error> {
        if self.common.timing {
            report.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        }
        if let Some(out) = &self.cfg.out {
            write_report(&report, ReportFormat::Json, out)?;
        }
        if let Some(dir) = &self.cfg.csv_dir {
            write_report(&report, ReportFormat::Csv, dir)?;
        }
        if self.common.json {
            say!("{}", report.to_json());
        } else {
            say!("{text}");
        }
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn run(cli: Cli) -> Result<u8, Error> {
    let ctx = Ctx::new(cli.common)?;
    let cfg = &ctx.cfg.pipeline;
    let started = Instant::now();
    match cli.command {
        Command::Analyze => {
            let (set, name) = ctx.group_set()?;
            let report = analyze(&set, &name, cfg)?;
            let inc = &report.increments[0];
            let text = format!(
                "N = {}, |A| = {}, delta = {:.6}\ncase {:?}; increment {:?} factor {:.6} (rank {}, t = {})",
                set.modulus(),
                set.len(),
                set.density(),
                report.case_split.as_ref().map(|c| c.verdict),
                inc.provenance,
                inc.factor,
                inc.bohr.rank(),
                inc.t
            );
            ctx.emit_report(report, started, &text)?;
        }
        Command::Spectrum { theta } => {
            let (set, _) = ctx.group_set()?;
            let level = spectrum_at(&set, theta)?;
            let summary = level.summary(set.density());
            if let Some(dir) = &ctx.cfg.csv_dir {
                std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                    path: dir.clone(),
                    source,
                })?;
                write_spectrum_csv(&set, &dir.join("spectrum.csv"))?;
            }
            let value = json!({
                "theta": summary.theta,
                "size": summary.size,
                "parseval_bound": summary.parseval_bound,
                "frequencies": level.frequencies.to_vec(),
            });
            let text = format!(
                "|Delta_{theta}| = {} (Parseval bound {:.3})",
                summary.size, summary.parseval_bound
            );
            ctx.emit(&value, &text)?;
        }
        Command::Energy { m, mode } => {
            let (set, _) = ctx.group_set()?;
            let mode = match mode {
                Mode::Direct => CountMode::Direct,
                Mode::Fourier => CountMode::Fourier,
            };
            let mut e = energy_2m(&set, m, mode)?;
            if mode == CountMode::Fourier {
                e = e.round();
            }
            let value = json!({ "m": m, "mode": mode, "size": set.len(), "energy": e });
            ctx.emit(&value, &format!("E_{}(D) = {e}", 2 * m))?;
        }
        Command::Bohr { n, gamma, radius, regular } => {
            let n = match (n, &ctx.common.set) {
                (Some(n), _) => n,
                (None, Some(_)) => ctx.set_file()?.0.n,
                (None, None) => return Err(Error::InvalidInput("bohr needs --n or --set".into())),
            };
            let group = roth_core::CyclicGroup::new(n)?;
            let spec = BohrSpec::new(gamma, radius)?;
            let b = if regular { build_regular(group, &spec)? } else { bohr_build(group, &spec)? };
            let sd = size_doubling_check(group, &spec)?;
            let value = json!({
                "n": n,
                "spec": to_value(&b.spec),
                "size": b.len(),
                "elements": b.elements.to_vec(),
                "size_bounds": to_value(&sd),
                "regularity": b.regular.as_ref().map(to_value),
            });
            let text = format!(
                "|B| = {} at radius {} (rank {}); size bounds hold: {}",
                b.len(),
                b.spec.radius,
                b.spec.rank(),
                sd.holds
            );
            ctx.emit(&value, &text)?;
        }
        Command::Increment { pipeline, theta } => {
            let (set, name) = ctx.group_set()?;
            let delta = set.density();
            let sml_peak = || dyadic_peak_level(&set, delta.powf(1.0 + cfg.mu), delta.powf(1.0 - cfg.mu));
            let res = match pipeline {
                Pipeline::Auto => dispatch(&set, cfg)?,
                Pipeline::L2 => {
                    let gamma = spectrum_at(&set, theta.unwrap_or(0.5))?.frequencies;
                    l2_increment(&set, &gamma, cfg)?
                }
                Pipeline::Mid => increment_mid(&set, cfg)?,
                Pipeline::Large => increment_large(&set, cfg)?,
                Pipeline::Smoothing => {
                    let theta = match theta {
                        Some(t) => t,
                        None => sml_peak()?.theta,
                    };
                    increment_smoothing(&set, theta, cfg)?
                }
                Pipeline::Nonsmoothing => {
                    let (theta, level) = match theta {
                        Some(t) => (t, spectrum_at(&set, t)?),
                        None => {
                            let p = sml_peak()?;
                            (p.theta, p.level)
                        }
                    };
                    let s = heuristic_structure(&level.frequencies)?;
                    increment_nonsmoothing(&set, &s.x, &s.h, theta, cfg)?
                }
            };
            res.recount(&set)?;
            let text = format!(
                "{:?}: factor {:.6}, density {:.6} -> {:.6}, rank {}, radius {:.6}, t = {}",
                res.provenance,
                res.factor,
                res.old_density,
                res.new_density,
                res.bohr.rank(),
                res.bohr.radius,
                res.t
            );
            let mut report = AnalysisReport::new(InputDescriptor::of(&set, name), cfg.clone());
            report.case_split = case_split(&set, cfg.mu).ok();
            report.increments.push(res);
            ctx.emit_report(report, started, &text)?;
        }
        Command::Construct { method, n } => {
            let rep = match Method::from(method) {
                Method::Behrend => constructions::behrend(n)?,
                Method::Greedy => constructions::greedy_3ap_free(n)?,
                Method::Exact => constructions::max_3ap_free_exact(n)?,
            };
            emit_construction(&ctx, &rep)?;
        }
        Command::MaxExact { n } => {
            let rep = constructions::max_3ap_free_exact(n)?;
            emit_construction(&ctx, &rep)?;
        }
        Command::Iterate { n, steps } => {
            let (file, name) = ctx.set_file()?;
            let a0 = file.positive_elements()?;
            let n = n.or_else(|| a0.iter().copied().max()).unwrap_or(1);
            let it = iterate(&a0, n, cfg, steps)?;
            let input = InputDescriptor {
                source: name,
                n: n as usize,
                size: a0.len(),
                density: a0.len() as f64 / n as f64,
            };
            let text = format!(
                "{} steps, termination {:?}, final |A| = {} in [1, {}]",
                it.steps.len(),
                it.termination,
                it.final_set.len(),
                it.final_interval
            );
            let report = AnalysisReport::new(input, cfg.clone()).with_iteration(it);
            ctx.emit_report(report, started, &text)?;
        }
        Command::Selftest => {
            let outcomes = selftest::run_all(cfg.seed);
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if ctx.common.json {
                let rows: Vec<Value> = outcomes
                    .iter()
                    .map(|o| json!({ "id": o.id, "name": o.name, "passed": o.passed, "detail": o.detail }))
                    .collect();
                say!("{}", serde_json::to_string_pretty(&rows).expect("JSON values serialize"));
            } else {
                for o in &outcomes {
                    say!("{o}");
                }
                say!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
            }
            return Ok(if failed == 0 { 0 } else { 3 });
        }
    }
    Ok(0)
}

fn emit_construction(ctx: &Ctx, rep: &ConstructionReport) -> Result<(), Error> {
    if let Some(out) = &ctx.cfg.out {
        rep.to_set_file().write(out)?;
    }
    if let Some(dir) = &ctx.cfg.csv_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        let path = dir.join("constructions.csv");
        let file = std::fs::File::create(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        write_table(std::slice::from_ref(rep), file).map_err(|source| Error::Io { path, source })?;
    }
    if ctx.common.json {
        say!("{}", serde_json::to_string_pretty(rep).expect("reports serialize"));
    } else {
        say!(
            "{} n = {}: size {}, progression-free {}",
            rep.method, rep.n, rep.size, rep.verified_free
        );
    }
    Ok(())
}
