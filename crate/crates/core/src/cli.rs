//! `ionize` command-line surface.
//!
//! Configuration is resolved as flag > `--config` file > default. Files may
//! be JSON objects or flat `key = value` lines (`#` starts a comment). Every
//! run writes `<command>_report.json` next to its tables.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::acceptance::{self, Level};
use crate::csv::{write_atomic, Table};
use crate::error::{Error, Result};
use crate::lattice::LatticeSolution;
use crate::rates::{find_decay_pole, fit_decay_slope, gamma_hat_limit, sweep_table, SweepRow};
use crate::resolvent::{invert_laplace_theta, sample_line, samples_table, BromwichOptions};
use crate::volterra::{big_theta, evolve, max_step, unitarity_defect, DriveParams, KGrid, SurvivalTrace, TimeGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ionize", version, about = "Ionization of a 1D delta well under r sin(wt) modulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

/// Overrides shared by every subcommand.
#[derive(clap::Args, Debug, Default, Clone)]
pub struct Flags {
    #[arg(long, global = true)]
    pub r: Option<f64>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long = "t-max", global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long = "k-max", global = true)]
    pub k_max: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the run report as JSON on stdout instead of the text summary.
    #[arg(long = "json-report", global = true)]
    pub json_report: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// March the Volterra equation and write the survival trace.
    Evolve,
    /// Locate the decay pole and compare with the small-r limit.
    Rate {
        /// Comma-separated amplitudes for a sweep (defaults to `r`).
        #[arg(long = "r-list", value_delimiter = ',')]
        r_list: Option<Vec<f64>>,
        /// Trace CSV written by `evolve`, for the slope comparison.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sample y(p) on a vertical line and invert it to θ(t).
    Resolvent {
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long = "tau-max")]
        tau_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Ejected-electron spectrum Θ(k, t) at one time.
    Spectrum {
        /// Evaluation time, on the dt grid (defaults to t_max).
        #[arg(long)]
        at: Option<f64>,
    },
    /// log10|θ|² traces for a set of (ω, r) pairs.
    Figure1 {
        /// `omega:r` pairs separated by commas.
        #[arg(long, value_delimiter = ',')]
        pairs: Option<Vec<String>>,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(value_enum, default_value = "quick")]
        level: Level,
    },
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub r: f64,
    pub omega: f64,
    pub t_max: f64,
    /// `None` selects `min(0.01, max_step(ω))`.
    pub dt: Option<f64>,
    pub k_max: f64,
    pub tol: f64,
    pub out: PathBuf,
    pub sigma: f64,
    pub tau_max: f64,
    pub samples: usize,
    pub at: Option<f64>,
    pub r_list: Vec<f64>,
    pub trace: Option<PathBuf>,
    pub pairs: Vec<(f64, f64)>,
    pub level: Level,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            r: 0.3,
            omega: 1.5,
            t_max: 20.0,
            dt: None,
            k_max: 6.0,
            tol: 1e-6,
            out: PathBuf::from("."),
            sigma: 0.5,
            tau_max: 10.0,
            samples: 201,
            at: None,
            r_list: Vec::new(),
            trace: None,
            pairs: vec![(1.5, 0.3), (1.5, 1.0), (0.8, 0.5), (0.8, 1.0), (2.5, 0.5)],
            level: Level::Quick,
        }
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let (w, r) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("pair `{s}` must read omega:r")))?;
    Ok((parse_f64("pairs", w)?, parse_f64("pairs", r)?))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{}`", v.trim())))
}

impl RunConfig {
    /// Parses a JSON object or `key = value` lines into a sparse override map.
    pub fn parse_file_text(text: &str) -> Result<serde_json::Map<String, Value>> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            return match serde_json::from_str::<Value>(trimmed) {
                Ok(Value::Object(m)) => Ok(m),
                Ok(_) => Err(Error::Config("JSON config must be an object".into())),
                Err(e) => Err(Error::Config(format!("bad JSON config: {e}"))),
            };
        }
        let mut map = serde_json::Map::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{line}`", i + 1)))?;
            let key = k.trim().replace('-', "_");
            let v = v.trim();
            let value = match key.as_str() {
                "out" | "trace" => json!(v),
                "level" => json!(v.to_ascii_lowercase()),
                "samples" => json!(v
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("`samples` expects an integer, got `{v}`")))?),
                "r_list" => json!(v.split(',').map(|x| parse_f64(&key, x)).collect::<Result<Vec<_>>>()?),
                "pairs" => json!(v.split(',').map(parse_pair).collect::<Result<Vec<_>>>()?),
                _ => json!(parse_f64(&key, v)?),
            };
            map.insert(key, value);
        }
        Ok(map)
    }

    /// Defaults, then the file, then explicit flags.
    pub fn resolve(flags: &Flags, command: &Command) -> Result<Self> {
        let mut merged = serde_json::to_value(RunConfig::default()).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(path) = &flags.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            for (k, v) in Self::parse_file_text(&text)? {
                merged[k.replace('-', "_")] = v;
            }
        }
        let mut cfg: RunConfig = serde_json::from_value(merged).map_err(|e| Error::Config(e.to_string()))?;
        let f = flags;
        cfg.r = f.r.unwrap_or(cfg.r);
        cfg.omega = f.omega.unwrap_or(cfg.omega);
        cfg.t_max = f.t_max.unwrap_or(cfg.t_max);
        cfg.dt = f.dt.or(cfg.dt);
        cfg.k_max = f.k_max.unwrap_or(cfg.k_max);
        cfg.tol = f.tol.unwrap_or(cfg.tol);
        cfg.out = f.out.clone().unwrap_or(cfg.out);
        match command {
            Command::Rate { r_list, trace } => {
                cfg.r_list = r_list.clone().unwrap_or(cfg.r_list);
                cfg.trace = trace.clone().or(cfg.trace);
            }
            Command::Resolvent { sigma, tau_max, samples } => {
                cfg.sigma = sigma.unwrap_or(cfg.sigma);
                cfg.tau_max = tau_max.unwrap_or(cfg.tau_max);
                cfg.samples = samples.unwrap_or(cfg.samples);
            }
            Command::Spectrum { at } => cfg.at = at.or(cfg.at),
            Command::Figure1 { pairs: Some(p) } => {
                cfg.pairs = p.iter().map(|s| parse_pair(s)).collect::<Result<_>>()?;
            }
            Command::Verify { level } => cfg.level = *level,
            _ => {}
        }
        cfg.dt = Some(cfg.dt.unwrap_or_else(|| 0.01f64.min(max_step(cfg.omega))));
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(0.01)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r", self.r),
            ("omega", self.omega),
            ("t_max", self.t_max),
            ("dt", self.dt()),
            ("k_max", self.k_max),
            ("tol", self.tol),
            ("sigma", self.sigma),
            ("tau_max", self.tau_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive and finite")));
            }
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter("samples must be at least 2".into()));
        }
        for &r in &self.r_list {
            DriveParams::new(r, self.omega)?;
        }
        for &(w, r) in &self.pairs {
            DriveParams::new(r, w)?;
            if self.dt() > max_step(w) * (1.0 + 1e-12) {
                return Err(Error::StepTooLarge {
                    dt: self.dt(),
                    suggested: max_step(w),
                });
            }
        }
        let limit = max_step(self.omega);
        if self.dt() > limit * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge {
                dt: self.dt(),
                suggested: limit,
            });
        }
        let bound = (1.0 / self.dt() - 1.0).max(0.0).sqrt();
        if self.k_max > bound {
            return Err(Error::SpectralResolution {
                k_max: self.k_max,
                dt: self.dt(),
                bound,
            });
        }
        let grid = TimeGrid::new(self.t_max, self.dt())?;
        if let Some(at) = self.at {
            if grid.index_of(at).is_none() {
                return Err(Error::InvalidParameter(format!(
                    "spectrum time {at} is not a grid point in [0, {}] with dt = {}",
                    self.t_max,
                    self.dt()
                )));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<DriveParams> {
        DriveParams::new(self.r, self.omega)
    }

    fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_max, self.dt())
    }
}

/// Machine-readable record of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: RunConfig,
    pub outputs: Vec<PathBuf>,
    pub summary: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, Value>,
    pub wall_seconds: f64,
    pub exit_code: i32,
}

impl RunReport {
    fn new(command: &str, config: RunConfig) -> Self {
        RunReport {
            command: command.into(),
            config,
            outputs: Vec::new(),
            summary: BTreeMap::new(),
            residuals: BTreeMap::new(),
            wall_seconds: 0.0,
            exit_code: EXIT_OK,
        }
    }

    fn write_table(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = self.config.out.join(name);
        table.write_atomic(&path)?;
        self.outputs.push(path);
        Ok(())
    }

    fn summary(&mut self, key: &str, v: impl Serialize) {
        self.summary.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn residual(&mut self, key: &str, v: impl Serialize) {
        self.residuals.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }
}

/// Exit code for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_)
        | Error::Domain { .. }
        | Error::PoleAtOrigin
        | Error::StepTooLarge { .. }
        | Error::SpectralResolution { .. }
        | Error::SingularSource { .. }
        | Error::UseShiftedRelation { .. }
        | Error::BranchPoint { .. }
        | Error::Resonance { .. }
        | Error::EmptyWindow(_)
        | Error::Config(_) => EXIT_VALIDATION,
        Error::Instability { .. }
        | Error::InsufficientDepth { .. }
        | Error::ExponentRange
        | Error::InconsistentSolutions { .. }
        | Error::BromwichTail { .. }
        | Error::NoConvergence { .. }
        | Error::ContinuationAmbiguity { .. }
        | Error::Io(_) => EXIT_NUMERICAL,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = match RunConfig::resolve(&cli.flags, &cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&config.out) {
        eprintln!("error: cannot create {}: {e}", config.out.display());
        return EXIT_NUMERICAL;
    }
    let start = Instant::now();
    let name = command_name(&cli.command);
    let mut report = RunReport::new(name, config);
    let result = match cli.command {
        Command::Evolve => cmd_evolve(&mut report),
        Command::Rate { .. } => cmd_rate(&mut report),
        Command::Resolvent { .. } => cmd_resolvent(&mut report),
        Command::Spectrum { .. } => cmd_spectrum(&mut report),
        Command::Figure1 { .. } => cmd_figure1(&mut report),
        Command::Verify { .. } => cmd_verify(&mut report),
    };
    if let Err(e) = &result {
        eprintln!("error: {e}");
        report.exit_code = exit_code(e);
        report.summary("error", e.to_string());
    }
    report.wall_seconds = start.elapsed().as_secs_f64();
    let json = serde_json::to_string_pretty(&report).unwrap_or_default();
    let path = report.config.out.join(format!("{name}_report.json"));
    if let Err(e) = write_atomic(&path, json.as_bytes()) {
        eprintln!("error: cannot write report: {e}");
        return EXIT_NUMERICAL;
    }
    if cli.flags.json_report {
        println!("{json}");
    } else {
        for line in result.unwrap_or_default() {
            println!("{line}");
        }
    }
    report.exit_code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Evolve => "evolve",
        Command::Rate { .. } => "rate",
        Command::Resolvent { .. } => "resolvent",
        Command::Spectrum { .. } => "spectrum",
        Command::Figure1 { .. } => "figure1",
        Command::Verify { .. } => "verify",
    }
}

type Lines = Vec<String>;

fn checkpoints(t_max: f64, grid: &TimeGrid) -> Vec<f64> {
    let mut ts: Vec<f64> = [0.25, 0.5, 1.0]
        .iter()
        .map(|f| grid.time(((f * t_max) / grid.dt).round() as usize))
        .collect();
    ts.dedup();
    ts
}

fn cmd_evolve(report: &mut RunReport) -> Result<Lines> {
    let cfg = report.config.clone();
    let grid = cfg.grid()?;
    let trace = evolve(&cfg.params()?, &grid)?;
    report.write_table("trace.csv", &trace.table())?;
    let last = trace.theta[grid.count].norm_sqr();
    let mut lines = vec![format!("final |theta|^2 at t = {}: {last:.10e}", grid.t_max())];
    let mut defects = BTreeMap::new();
    for t in checkpoints(cfg.t_max, &grid) {
        let spectrum = big_theta(&trace, &KGrid::for_time(cfg.k_max, t), t)?;
        let d = unitarity_defect(&trace, &spectrum);
        lines.push(format!("unitarity defect at t = {t}: {d:.3e}"));
        defects.insert(format!("{t}"), d);
    }
    report.summary("rows", grid.len());
    report.summary("final_abs_theta_sq", last);
    report.residual("unitarity_defect", defects);
    Ok(lines)
}

/// Reads a trace table written by `evolve`.
pub fn read_trace(path: &Path) -> Result<SurvivalTrace> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != "t,re_theta,im_theta,abs_theta_sq,re_Y,im_Y" {
        return Err(Error::Config(format!("{} is not a trace table", path.display())));
    }
    let mut rows = Vec::new();
    for l in lines.filter(|l| !l.is_empty()) {
        let v: Vec<f64> = l.split(',').map(|x| parse_f64("trace", x)).collect::<Result<_>>()?;
        if v.len() != 6 {
            return Err(Error::Config(format!("bad trace row `{l}`")));
        }
        rows.push(v);
    }
    if rows.len() < 2 {
        return Err(Error::Config("trace needs at least two rows".into()));
    }
    let dt = rows[1][0] - rows[0][0];
    let grid = TimeGrid::new(rows[rows.len() - 1][0], dt)?;
    if grid.len() != rows.len() {
        return Err(Error::Config("trace times are not uniform".into()));
    }
    Ok(SurvivalTrace {
        grid,
        y_samples: rows.iter().map(|v| C64::new(v[4], v[5])).collect(),
        theta: rows.iter().map(|v| C64::new(v[1], v[2])).collect(),
    })
}

fn cmd_rate(report: &mut RunReport) -> Result<Lines> {
    let cfg = report.config.clone();
    let rs = if cfg.r_list.is_empty() { vec![cfg.r] } else { cfg.r_list.clone() };
    let hat = gamma_hat_limit(cfg.omega)?;
    let trace = cfg.trace.as_deref().map(read_trace).transpose()?;
    let slope = match &trace {
        Some(t) => Some(fit_decay_slope(t, 1e-4, 0.5, cfg.omega)?),
        None => None,
    };
    let poles: Vec<_> = rs
        .par_iter()
        .map(|&r| find_decay_pole(&DriveParams::new(r, cfg.omega)?))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (&r, pole) in rs.iter().zip(&poles) {
        let gamma_hat = hat.gamma_hat * r.powi(2 * hat.n_photon as i32);
        let fit = if r == cfg.r { slope.unwrap_or(f64::NAN) } else { f64::NAN };
        lines.push(format!(
            "r = {r}: p* = {:.12e} {:+.12e}i, Gamma = {:.10e}, Gamma_hat r^{} = {:.10e}, Gamma/r^{} = {:.8}",
            pole.p_star.0,
            pole.p_star.1,
            pole.gamma_rate,
            2 * hat.n_photon,
            gamma_hat,
            2 * hat.n_photon,
            pole.gamma_rate / r.powi(2 * hat.n_photon as i32)
        ));
        if fit.is_finite() {
            lines.push(format!(
                "  slope fit of ln|theta|^2: {fit:.10e} vs -Gamma = {:.10e} (relative {:.3e})",
                -pole.gamma_rate,
                (fit + pole.gamma_rate).abs() / pole.gamma_rate
            ));
        }
        rows.push(SweepRow {
            r,
            omega: cfg.omega,
            pole: *pole,
            gamma_hat: hat.gamma_hat,
            slope_fit: fit,
        });
    }
    report.write_table("sweep.csv", &sweep_table(&rows))?;
    report.summary("gamma_hat_coefficient", hat);
    report.summary("poles", &poles);
    if let Some(s) = slope {
        report.summary("slope_fit", s);
    }
    report.residual(
        "wronskian",
        poles.iter().map(|p| p.wronskian_residual).collect::<Vec<_>>(),
    );
    Ok(lines)
}

fn cmd_resolvent(report: &mut RunReport) -> Result<Lines> {
    let cfg = report.config.clone();
    let params = cfg.params()?;
    let samples = sample_line(cfg.sigma, cfg.tau_max, cfg.samples, cfg.r, cfg.omega)?;
    report.write_table("resolvent.csv", &samples_table(&samples))?;
    let worst = samples.iter().map(|s| s.residual).fold(0.0, f64::max);

    let lattice = LatticeSolution::build(C64::new(cfg.sigma, 0.0), cfg.r, cfg.omega, -64, 64)?;
    report.write_table("lattice.csv", &lattice.table())?;
    let w = lattice.wronskian()?;

    let opts = BromwichOptions {
        tol: cfg.tol,
        ..BromwichOptions::default()
    };
    let (trace, bromwich) = invert_laplace_theta(&params, &TimeGrid::new(cfg.t_max, cfg.t_max / 400.0)?, &opts)?;
    let mut table = Table::new(&["t", "log10_abs_theta_sq"]);
    for (j, th) in trace.theta.iter().enumerate() {
        table.push(vec![trace.grid.time(j), th.norm_sqr().log10()]);
    }
    report.write_table("bromwich.csv", &table)?;

    report.summary("samples", samples.len());
    report.summary("bromwich", bromwich);
    report.residual("max_fnceq_residual", worst);
    report.residual("wronskian_constancy", w.constancy);
    Ok(vec![
        format!("{} samples on Re p = {}, max functional-equation residual {worst:.3e}", samples.len(), cfg.sigma),
        format!("lattice dump n in [-64, 64], Wronskian constancy {:.3e}", w.constancy),
        format!(
            "Bromwich inversion: P = {}, tail {:.3e}, |theta(t_max)|^2 = {:.10e}",
            bromwich.p_max,
            bromwich.tail,
            trace.theta.last().map_or(f64::NAN, |z| z.norm_sqr())
        ),
    ])
}

fn cmd_spectrum(report: &mut RunReport) -> Result<Lines> {
    let cfg = report.config.clone();
    let t = cfg.at.unwrap_or(cfg.t_max);
    let grid = TimeGrid::new(t, cfg.dt())?;
    let trace = evolve(&cfg.params()?, &grid)?;
    let spectrum = big_theta(&trace, &KGrid::for_time(cfg.k_max, t), t)?;
    report.write_table("spectrum.csv", &spectrum.table())?;
    let d = unitarity_defect(&trace, &spectrum);
    report.summary("t", t);
    report.summary("ejected_fraction", spectrum.ejected_fraction());
    report.summary("tail", spectrum.tail);
    report.residual("unitarity_defect", d);
    Ok(vec![
        format!("spectrum at t = {t}: {} k nodes, ejected fraction {:.10e}", spectrum.amplitudes.len(), spectrum.ejected_fraction()),
        format!("unitarity defect: {d:.3e}"),
    ])
}

/// File name for one figure trace, e.g. `figure1_omega1.5_r0.3.csv`.
pub fn figure1_name(omega: f64, r: f64) -> String {
    format!("figure1_omega{omega}_r{r}.csv")
}

fn cmd_figure1(report: &mut RunReport) -> Result<Lines> {
    let cfg = report.config.clone();
    let grid = cfg.grid()?;
    let tables: Vec<(f64, f64, Table, f64)> = cfg
        .pairs
        .par_iter()
        .map(|&(w, r)| {
            let trace = evolve(&DriveParams::new(r, w)?, &grid)?;
            let mut t = Table::new(&["t", "log10_abs_theta_sq"]);
            for (j, th) in trace.theta.iter().enumerate() {
                t.push(vec![grid.time(j), th.norm_sqr().log10()]);
            }
            Ok((w, r, t, trace.theta[grid.count].norm_sqr()))
        })
        .collect::<Result<_>>()?;
    let mut lines = Vec::new();
    let mut finals = BTreeMap::new();
    for (w, r, table, last) in &tables {
        report.write_table(&figure1_name(*w, *r), table)?;
        lines.push(format!("omega = {w}, r = {r}: |theta(t_max)|^2 = {last:.6e}"));
        finals.insert(format!("omega={w},r={r}"), *last);
    }
    report.summary("final_abs_theta_sq", finals);
    Ok(lines)
}

fn cmd_verify(report: &mut RunReport) -> Result<Lines> {
    let suite = acceptance::run_suite(report.config.level);
    let lines: Vec<String> = suite.criteria.iter().map(|c| c.line()).collect();
    report.summary("passed", suite.passed);
    report.summary("criteria", &suite.criteria);
    if !suite.passed {
        report.exit_code = EXIT_VERIFICATION;
    }
    Ok(lines)
}
