//! Batch front end: TOML job configs in, CSV or JSON reports out.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coefficients::{CoefficientSequence, Generator};
use crate::dynamics::{reflection_probe, ProbeStep, WavePacket};
use crate::error::{CmvError, Result};
use crate::operator::{defect, truncate, Window};
use crate::oracle::dense_green;
use crate::resolvent::{
    clamp_density, green_adaptive, m_function, RadialSchedule, ShiftedResolvent, Side, SolveOptions, ThetaGrid,
};
use crate::scattering::{
    half_line_m_boundary, report_from_samples, scattering_sweep, ScatteringConfig, ScatteringSample,
};
use crate::weyl::{green_weyl, Variant};
use crate::{C64, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Job {
    Density,
    ScatteringSweep,
    ReflectionlessReport,
    DynamicsProbe,
    OracleCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub a: i64,
    pub b: i64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { a: -2048, b: 2048 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub unitarity: f64,
    pub offdiag: f64,
    pub window_doubling: f64,
    pub support_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { unitarity: 1e-3, offdiag: 1e-3, window_doubling: 1e-6, support_threshold: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub center: i64,
    pub width: f64,
    pub theta0: f64,
    pub horizon: i64,
    pub record_every: i64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { center: -400, width: 40.0, theta0: FRAC_PI_2, horizon: 6000, record_every: 10 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// A complete job description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub job: Job,
    pub coefficients: Generator,
    #[serde(default)]
    pub decoupling_n: i64,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub theta_grid: ThetaGrid,
    #[serde(default)]
    pub radial: RadialSchedule,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Optional CSV dump of the truncation on `window`.
    #[serde(default)]
    pub dump_truncation: Option<PathBuf>,
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: JobConfig = toml::from_str(text).map_err(|e| CmvError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CmvError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.sequence()?;
        self.window()?;
        self.radial.validate()?;
        if self.theta_grid.count == 0 {
            return Err(CmvError::Config("theta_grid.count must be positive".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [("unitarity", t.unitarity), ("offdiag", t.offdiag), ("window_doubling", t.window_doubling)] {
            if v.is_nan() || v <= 0.0 {
                return Err(CmvError::Config(format!("tolerances.{name} must be positive")));
            }
        }
        if t.support_threshold.is_nan() || t.support_threshold < 0.0 {
            return Err(CmvError::Config("tolerances.support_threshold must be non-negative".into()));
        }
        Ok(())
    }

    pub fn sequence(&self) -> Result<CoefficientSequence> {
        CoefficientSequence::new(self.coefficients.clone())
    }

    pub fn window(&self) -> Result<Window> {
        Window::new(self.window.a, self.window.b)
    }

    pub fn scattering_config(&self) -> ScatteringConfig {
        let half = ((self.window.b - self.window.a) / 2).max(8);
        ScatteringConfig {
            schedule: self.radial,
            solve: SolveOptions {
                min_half_width: half,
                doubling_tol: self.tolerances.window_doubling,
                ..SolveOptions::default()
            },
            support_threshold: self.tolerances.support_threshold,
        }
    }
}

/// A finished report: header comments, CSV table, JSON mirror.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
    /// `false` when the job ran but its checks did not pass.
    pub ok: bool,
}

impl Report {
    pub fn render(&self, format: Format, config: &JobConfig) -> Result<String> {
        let config_json = serde_json::to_value(config).map_err(|e| CmvError::Config(e.to_string()))?;
        match format {
            Format::Csv => {
                let mut out = String::new();
                writeln!(out, "# cmvscat {VERSION}").ok();
                writeln!(out, "# config: {config_json}").ok();
                let mut wr = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| CmvError::Io(e.to_string());
                wr.write_record(&self.header).map_err(io)?;
                for r in &self.rows {
                    wr.write_record(r).map_err(io)?;
                }
                let bytes = wr.into_inner().map_err(|e| CmvError::Io(e.to_string()))?;
                out.push_str(&String::from_utf8_lossy(&bytes));
                Ok(out)
            }
            Format::Json => {
                let doc = json!({
                    "version": VERSION,
                    "config": config_json,
                    "ok": self.ok,
                    "report": self.json,
                });
                let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CmvError::Io(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
        }
    }
}

fn row_objects(header: &[&str], rows: &[Vec<String>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                let obj: serde_json::Map<String, Value> = header
                    .iter()
                    .zip(r)
                    .map(|(h, v)| {
                        let val = if let Ok(x) = v.parse::<i64>() {
                            json!(x)
                        } else if let Ok(x) = v.parse::<f64>() {
                            if x.is_finite() {
                                json!(x)
                            } else {
                                Value::Null
                            }
                        } else if let Ok(b) = v.parse::<bool>() {
                            json!(b)
                        } else if v.is_empty() {
                            Value::Null
                        } else {
                            json!(v)
                        };
                        ((*h).to_string(), val)
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect(),
    )
}

fn table(header: &[&str], rows: Vec<Vec<String>>, extra: Value, ok: bool) -> Report {
    let mut json = json!({ "rows": row_objects(header, &rows) });
    if let (Value::Object(m), Value::Object(e)) = (&mut json, extra) {
        m.extend(e);
    }
    Report { header: header.iter().map(|s| s.to_string()).collect(), rows, json, ok }
}

pub const DENSITY_HEADER: [&str; 11] =
    ["theta", "n", "density_l", "density_r", "m_l_re", "m_l_im", "m_r_re", "m_r_im", "err_est", "converged", "error"];

fn density_job(cfg: &JobConfig, seq: &CoefficientSequence) -> Report {
    use rayon::prelude::*;
    let sc = cfg.scattering_config();
    let n = cfg.decoupling_n;
    let tol = sc.schedule.tol;
    let rows: Vec<Vec<String>> = cfg
        .theta_grid
        .points()
        .par_iter()
        .map(|&theta| {
            let r = half_line_m_boundary(seq, n, theta, &sc).and_then(|b| {
                let dl = clamp_density(-b.best[0].re, theta, tol)?;
                let dr = clamp_density(b.best[1].re, theta, tol)?;
                Ok((b.clone(), dl, dr, b.err_est(0).max(b.err_est(1))))
            });
            match r {
                Ok((b, dl, dr, err)) => vec![
                    format!("{theta}"),
                    n.to_string(),
                    format!("{dl:e}"),
                    format!("{dr:e}"),
                    format!("{:e}", b.best[0].re),
                    format!("{:e}", b.best[0].im),
                    format!("{:e}", b.best[1].re),
                    format!("{:e}", b.best[1].im),
                    format!("{err:e}"),
                    (err <= tol).to_string(),
                    String::new(),
                ],
                Err(e) => {
                    let mut r = vec![format!("{theta}"), n.to_string()];
                    r.extend(std::iter::repeat_n("NaN".to_string(), 7));
                    r.push("false".into());
                    r.push(format!("{}: {e}", e.kind()));
                    r
                }
            }
        })
        .collect();
    let converged: Vec<&Vec<String>> = rows.iter().filter(|r| r[9] == "true").collect();
    let mass_l: f64 = converged.iter().filter_map(|r| r[2].parse::<f64>().ok()).sum::<f64>() * cfg.theta_grid.weight();
    let mass_r: f64 = converged.iter().filter_map(|r| r[3].parse::<f64>().ok()).sum::<f64>() * cfg.theta_grid.weight();
    let extra = json!({ "summary": { "converged": converged.len(), "total": rows.len(), "ac_mass_l": mass_l, "ac_mass_r": mass_r } });
    table(&DENSITY_HEADER, rows, extra, true)
}

fn scattering_job(cfg: &JobConfig, seq: &CoefficientSequence) -> Report {
    let samples = scattering_sweep(seq, cfg.decoupling_n, &cfg.theta_grid.points(), &cfg.scattering_config());
    let tol = cfg.tolerances.unitarity;
    let converged = samples.iter().filter(|s| s.converged).count();
    let worst = samples.iter().filter(|s| s.converged).map(|s| s.unitarity_defect).fold(0.0, f64::max);
    let rows = samples.iter().map(ScatteringSample::csv_record).collect();
    let extra = json!({ "summary": { "total": samples.len(), "converged": converged, "max_unitarity_defect": worst } });
    table(&ScatteringSample::CSV_HEADER, rows, extra, worst <= tol)
}

pub const REFL_EXTRA_HEADER: [&str; 3] = ["off_diagonal", "reflectionless", "straddles"];

fn refl_job(cfg: &JobConfig, seq: &CoefficientSequence) -> Report {
    let samples = scattering_sweep(seq, cfg.decoupling_n, &cfg.theta_grid.points(), &cfg.scattering_config());
    let report = report_from_samples(cfg.decoupling_n, cfg.tolerances.offdiag, samples);
    let opt = |b: Option<bool>| b.map(|v| v.to_string()).unwrap_or_default();
    let rows = report
        .samples
        .iter()
        .zip(&report.classes)
        .map(|(s, c)| {
            let mut r = s.csv_record();
            r.push(opt(c.off_diagonal));
            r.push(opt(c.reflectionless));
            r.push(c.straddles.to_string());
            r
        })
        .collect();
    let header: Vec<&str> = ScatteringSample::CSV_HEADER.iter().chain(REFL_EXTRA_HEADER.iter()).copied().collect();
    let extra = json!({ "summary": report.summary });
    table(&header, rows, extra, true)
}

fn probe_job(cfg: &JobConfig, seq: &CoefficientSequence) -> Result<Report> {
    let p = cfg.probe;
    let packet = WavePacket::new(p.center, p.width, p.theta0)?;
    let r = reflection_probe(seq, cfg.decoupling_n, &packet, p.horizon, cfg.window()?, p.record_every)?;
    let rows = r.series.iter().map(ProbeStep::csv_record).collect();
    let extra = json!({ "summary": {
        "left_mass": r.left_mass, "right_mass": r.right_mass, "escaped": r.escaped,
        "steps": r.steps, "edge_contact": r.edge_contact,
    }});
    Ok(table(&ProbeStep::CSV_HEADER, rows, extra, true))
}

pub const ORACLE_HEADER: [&str; 4] = ["check", "value", "tolerance", "pass"];

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn oracle_checks(seq: &CoefficientSequence, n: i64) -> Result<Vec<(String, f64, f64)>> {
    let opts = SolveOptions::default();
    let mut out = Vec::new();

    let w = Window::centered(n, 40)?;
    let z = C64::new(0.4, 0.2);
    let dense = dense_green(seq, w, z)?;
    let banded = ShiftedResolvent::new(truncate(seq, w), z, &opts)?;
    let mut worst: f64 = 0.0;
    for j in w.sites() {
        let col = banded.solve_sparse(&[(j, C64::new(1.0, 0.0))])?;
        for (i, g) in w.sites().zip(&col) {
            let d = dense.get(i, j)?;
            worst = worst.max((g - d).norm() / d.norm().max(1e-14));
        }
    }
    out.push(("banded_vs_dense_green".into(), worst, 1e-10));

    let u = truncate(seq, w);
    out.push(("truncation_unitarity".into(), u.unitarity_defect(), 1e-12));

    let wide = Window::centered(n, 250)?;
    let mut worst: f64 = 0.0;
    for r in [0.3, 0.7, 1.5] {
        let z = C64::from_polar(r, 0.9);
        let dense = dense_green(seq, wide, z)?;
        for (k, kp) in [(n, n), (n + 1, n + 1), (n - 1, n + 2), (n + 3, n - 2)] {
            let d = dense.get(k, kp)?;
            for variant in [Variant::Plain, Variant::Hat] {
                for k0 in [n, n + 1] {
                    worst = worst.max(rel(green_weyl(seq, k, kp, z, k0, variant, &opts)?, d));
                }
            }
        }
    }
    out.push(("weyl_green_vs_dense".into(), worst, 1e-8));

    let zero = C64::new(0.0, 0.0);
    let mut worst: f64 = 0.0;
    for k in [n - 1, n, n + 1] {
        worst = worst.max((m_function(seq, Side::Left, k, zero, &opts)? + 1.0).norm());
        worst = worst.max((m_function(seq, Side::Right, k, zero, &opts)? - 1.0).norm());
    }
    out.push(("m_normalization".into(), worst, 1e-12));

    let first = green_adaptive(seq, n, n + 1, z, &opts)?;
    let check = dense_green(seq, wide, z)?.get(n, n + 1)?;
    out.push(("adaptive_green_vs_dense".into(), rel(first, check), 1e-8));

    let d = defect(seq, n);
    let col = |j: i64| -> Vec<C64> { (n - 3..=n + 3).map(|i| d.get(i, j)).collect() };
    let adj = |q: i64| -> Vec<C64> { (n - 3..=n + 3).map(|j| d.get(q, j).conj()).collect() };
    let diff = |a: Vec<C64>, b: Vec<C64>, s: C64| a.iter().zip(&b).map(|(x, y)| (x - s * y).norm()).fold(0.0, f64::max);
    let (a1, r1) = (seq.alpha_at(n + 1), seq.rho_at(n + 1));
    let (am, rm) = (seq.alpha_at(n - 1), seq.rho_at(n - 1));
    let identities = if n.rem_euclid(2) == 0 {
        diff(col(n), col(n + 1), -a1 / r1).max(diff(col(n - 1), col(n - 2), am.conj() / rm))
    } else {
        diff(adj(n), adj(n + 1), -a1.conj() / r1).max(diff(adj(n - 1), adj(n - 2), am / rm))
    };
    out.push(("defect_identities".into(), identities, 1e-14));
    Ok(out)
}

fn oracle_job(cfg: &JobConfig, seq: &CoefficientSequence) -> Result<Report> {
    let checks = oracle_checks(seq, cfg.decoupling_n)?;
    let ok = checks.iter().all(|(_, v, t)| v <= t);
    let rows = checks
        .iter()
        .map(|(name, v, t)| vec![name.clone(), format!("{v:e}"), format!("{t:e}"), (v <= t).to_string()])
        .collect();
    Ok(table(&ORACLE_HEADER, rows, json!({ "passed": ok }), ok))
}

/// Runs one job; numerical failures of single samples are recorded in the
/// report rather than aborting.
pub fn run(cfg: &JobConfig) -> Result<Report> {
    cfg.validate()?;
    let seq = cfg.sequence()?;
    if let Some(path) = &cfg.dump_truncation {
        let file = std::fs::File::create(path).map_err(|e| CmvError::Io(format!("{}: {e}", path.display())))?;
        truncate(&seq, cfg.window()?).write_csv(std::io::BufWriter::new(file))?;
    }
    match cfg.job {
        Job::Density => Ok(density_job(cfg, &seq)),
        Job::ScatteringSweep => Ok(scattering_job(cfg, &seq)),
        Job::ReflectionlessReport => Ok(refl_job(cfg, &seq)),
        Job::DynamicsProbe => probe_job(cfg, &seq),
        Job::OracleCheck => oracle_job(cfg, &seq),
    }
}

/// Column documentation printed by `cmvscat schema`.
pub fn schema_text() -> String {
    let mut s = String::new();
    let sections: [(&str, &[(&str, &str)]); 5] = [
        (
            "scatter",
            &[
                ("theta", "angle on the unit circle, radians"),
                ("n", "decoupling site"),
                ("s_ll_re, s_ll_im", "left-left entry of the scattering matrix"),
                ("s_lr_re, s_lr_im", "left-right entry"),
                ("s_rl_re, s_rl_im", "right-left entry"),
                ("s_rr_re, s_rr_im", "right-right entry"),
                ("density_l", "-Re m^(l)_{n-1}(e^{i theta}), a.c. density of the left half-line"),
                ("density_r", "Re m^(r)_n(e^{i theta}), a.c. density of the right half-line"),
                ("support_l, support_r", "density above tolerances.support_threshold"),
                ("unitarity_defect", "max |s*s - I| over active channels (||s_ii| - 1| for one channel)"),
                ("refl_residual", "|M^(l)_n + conj M^(r)_n| on the circle"),
                ("err_est", "largest radial-extrapolation error estimate of the row"),
                ("converged", "all error estimates within radial.tol"),
                ("error", "error kind and message when the sample was excluded"),
            ],
        ),
        (
            "refl",
            &[
                ("(scatter columns)", "as above"),
                (
                    "off_diagonal",
                    "every supported diagonal entry within tolerances.offdiag; empty if excluded or no support",
                ),
                ("reflectionless", "refl_residual within tolerances.offdiag; empty if excluded"),
                ("straddles", "an error bar crosses the tolerance"),
            ],
        ),
        (
            "density",
            &[
                ("theta, n", "as above"),
                ("density_l, density_r", "clamped a.c. densities at sites n-1 (left) and n (right)"),
                ("m_l_re, m_l_im", "boundary value of m^(l)_{n-1}"),
                ("m_r_re, m_r_im", "boundary value of m^(r)_n"),
                ("err_est", "radial-extrapolation error estimate"),
                ("converged", "err_est within radial.tol"),
                ("error", "error kind and message when the sample was excluded"),
            ],
        ),
        (
            "probe",
            &[
                ("step", "number of applications of the truncated operator"),
                ("left_mass", "mass on sites k <= n - 1 away from the window edges"),
                ("right_mass", "mass on sites k >= n away from the window edges"),
                ("escaped", "mass within 3 sites of either window edge"),
            ],
        ),
        (
            "oracle",
            &[
                ("check", "name of the comparison"),
                ("value", "observed discrepancy"),
                ("tolerance", "documented tolerance"),
                ("pass", "value <= tolerance"),
            ],
        ),
    ];
    for (name, cols) in sections {
        writeln!(s, "[{name}]").ok();
        for (c, d) in cols {
            writeln!(s, "  {c:<24} {d}").ok();
        }
        s.push('\n');
    }
    s.push_str("CSV reports start with '#' lines holding the library version and the resolved config.\n");
    s
}

#[derive(Debug, Parser)]
#[command(name = "cmvscat", version, about = "Scattering and spectral diagnostics for full-line CMV operators")]
pub struct Cli {
    /// Worker threads for θ sweeps.
    #[arg(long, global = true, env = "CMV_WORKERS")]
    pub workers: Option<usize>,
    /// Report path (stdout when absent). Overrides output.path.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Report format. Overrides output.format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the truncation on the configured window as CSV.
    #[arg(long, global = true)]
    pub dump_truncation: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the job named in the config.
    Run { config: PathBuf },
    /// a.c. densities over the θ grid.
    Density { config: PathBuf },
    /// Scattering matrix over the θ grid.
    Scatter { config: PathBuf },
    /// Off-diagonality and reflectionless classification.
    Refl { config: PathBuf },
    /// Wave-packet reflection probe.
    Probe { config: PathBuf },
    /// Compare against dense oracles.
    Oracle { config: PathBuf },
    /// Document the report columns.
    Schema,
    /// Line plot of columns of a finished CSV report.
    Plot {
        input: PathBuf,
        /// Column for the horizontal axis (default: the first).
        #[arg(long)]
        x: Option<String>,
        /// Comma-separated columns to draw (default: all numeric ones).
        #[arg(long, value_delimiter = ',')]
        y: Vec<String>,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 500)]
        height: u32,
    },
}

fn error_record(e: &CmvError) -> String {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CmvError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn job_command(cli: &Cli, config: &Path, job: Option<Job>) -> Result<bool> {
    let mut cfg = JobConfig::load(config)?;
    if let Some(j) = job {
        cfg.job = j;
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(p) = &cli.output {
        cfg.output.path = Some(p.clone());
    }
    if let Some(p) = &cli.dump_truncation {
        cfg.dump_truncation = Some(p.clone());
    }
    let report = match cli.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| CmvError::Config(e.to_string()))?
            .install(|| run(&cfg))?,
        None => run(&cfg)?,
    };
    emit(&report.render(cfg.output.format, &cfg)?, cfg.output.path.as_deref())?;
    Ok(report.ok)
}

/// Entry point of the `cmvscat` binary.
pub fn main_with(cli: Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Run { config } => job_command(&cli, config, None),
        Command::Density { config } => job_command(&cli, config, Some(Job::Density)),
        Command::Scatter { config } => job_command(&cli, config, Some(Job::ScatteringSweep)),
        Command::Refl { config } => job_command(&cli, config, Some(Job::ReflectionlessReport)),
        Command::Probe { config } => job_command(&cli, config, Some(Job::DynamicsProbe)),
        Command::Oracle { config } => job_command(&cli, config, Some(Job::OracleCheck)),
        Command::Schema => emit(&schema_text(), cli.output.as_deref()).map(|_| true),
        Command::Plot { input, x, y, width, height } => match &cli.output {
            Some(out) => crate::plot::plot_csv(input, out, x.as_deref(), y, *width, *height).map(|_| true),
            None => Err(CmvError::Config("plot needs --output".into())),
        },
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(2)
        }
    }
}
