//! Batch front end: time series, λ sweeps, figure presets, CSV and gnuplot
//! output.
//!
//! Settings come from `key=value` config files and command-line flags; keys
//! are the long flag names without the leading dashes (`lambda-prime`,
//! `t-max`, ...). Flags win over the file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::correlations::evaluate;
use crate::error::{Error, Result};
use crate::model::{ModelParams, Phase};
use crate::reduced_dynamics::EvolutionContext;

/// Exact CSV header.
pub const CSV_HEADER: &str =
    "t,lambda,lambda_prime,discord,classical,mutual_info,concurrence,eof,purity,a,b,c,y,re_z,im_z";

pub const DEFAULT_T_MAX: f64 = 4.0;
pub const DEFAULT_STEPS: usize = 801;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Timeseries,
    Sweep,
    Figure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaPrimePolicy {
    Fixed(f64),
    EqualToLambda,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_steps: usize,
    pub lambda_prime: LambdaPrimePolicy,
}

impl SweepAxis {
    pub fn lambdas(&self) -> Vec<f64> {
        if self.lambda_steps == 1 {
            return vec![self.lambda_min];
        }
        let span = self.lambda_max - self.lambda_min;
        (0..self.lambda_steps)
            .map(|i| self.lambda_min + span * i as f64 / (self.lambda_steps - 1) as f64)
            .collect()
    }

    fn lambda_prime_for(&self, lambda: f64) -> f64 {
        match self.lambda_prime {
            LambdaPrimePolicy::Fixed(v) => v,
            LambdaPrimePolicy::EqualToLambda => lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    /// For sweeps, `lambda` and `lambda_prime` are overridden per grid point.
    pub params: ModelParams,
    pub t_max: f64,
    pub steps: usize,
    pub sweep: Option<SweepAxis>,
    /// CSV path; the plot script goes next to it with a `.gp` extension.
    pub output: PathBuf,
    pub emit_plot: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t-max must be positive, got {}",
                self.t_max
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "steps must be at least 2, got {}",
                self.steps
            )));
        }
        if let Some(axis) = &self.sweep {
            if !(axis.lambda_min.is_finite() && axis.lambda_min > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "lambda-min must be positive, got {}",
                    axis.lambda_min
                )));
            }
            if !(axis.lambda_max.is_finite() && axis.lambda_max >= axis.lambda_min) {
                return Err(Error::InvalidParameter(format!(
                    "lambda-max must be at least lambda-min, got {}",
                    axis.lambda_max
                )));
            }
            if axis.lambda_steps == 0 {
                return Err(Error::InvalidParameter("lambda-steps must be positive".into()));
            }
            if let LambdaPrimePolicy::Fixed(v) = axis.lambda_prime {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "lambda-prime must be non-negative, got {v}"
                    )));
                }
            }
        } else if self.mode == RunMode::Sweep {
            return Err(Error::InvalidParameter("sweep mode needs a lambda axis".into()));
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Vec<f64> {
        time_grid(self.t_max, self.steps)
    }

    /// Every `λ` this run evaluates.
    pub fn lambdas(&self) -> Vec<f64> {
        match &self.sweep {
            Some(axis) => axis.lambdas(),
            None => vec![self.params.lambda],
        }
    }
}

/// `steps` points evenly spaced over `[0, t_max]`, both ends included.
pub fn time_grid(t_max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..steps)
            .map(|i| t_max * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// One line of CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputRow {
    pub t: f64,
    pub lambda: f64,
    pub lambda_prime: f64,
    pub discord: f64,
    pub classical: f64,
    pub mutual_info: f64,
    pub concurrence: f64,
    pub eof: f64,
    pub purity: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub y: f64,
    pub re_z: f64,
    pub im_z: f64,
}

impl OutputRow {
    fn values(&self) -> [f64; 15] {
        [
            self.t,
            self.lambda,
            self.lambda_prime,
            self.discord,
            self.classical,
            self.mutual_info,
            self.concurrence,
            self.eof,
            self.purity,
            self.a,
            self.b,
            self.c,
            self.y,
            self.re_z,
            self.im_z,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

fn evaluate_row(ctx: &EvolutionContext, t: f64) -> Result<OutputRow> {
    let state = ctx.state_at(t)?;
    state.validate()?;
    let record = evaluate(&state, t)?;
    if (record.discord + record.classical - record.mutual_info).abs() > 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "discord + classical != mutual information at t={t}"
        )));
    }
    let p = ctx.params();
    let row = OutputRow {
        t,
        lambda: p.lambda,
        lambda_prime: p.lambda_prime,
        discord: record.discord,
        classical: record.classical,
        mutual_info: record.mutual_info,
        concurrence: record.concurrence,
        eof: record.eof,
        purity: record.purity,
        a: state.a,
        b: state.b,
        c: state.c,
        y: state.y,
        re_z: state.z.re,
        im_z: state.z.im,
    };
    if !row.is_finite() {
        return Err(Error::InvariantViolation(format!("non-finite output at t={t}")));
    }
    Ok(row)
}

fn series(params: ModelParams, times: &[f64]) -> Result<Vec<OutputRow>> {
    let ctx = EvolutionContext::new(params)?;
    times.par_iter().map(|&t| evaluate_row(&ctx, t)).collect()
}

/// Correlations at `steps` evenly spaced times in `[0, t_max]`.
pub fn run_timeseries(config: &RunConfig) -> Result<Vec<OutputRow>> {
    config.validate()?;
    series(config.params, &config.time_grid())
}

/// Correlations on the `(λ, t)` grid, rows ordered by `λ` then `t`.
pub fn run_sweep(config: &RunConfig) -> Result<Vec<OutputRow>> {
    config.validate()?;
    let axis = config
        .sweep
        .ok_or_else(|| Error::InvalidParameter("sweep mode needs a lambda axis".into()))?;
    let times = config.time_grid();
    let per_lambda: Vec<Vec<OutputRow>> = axis
        .lambdas()
        .into_par_iter()
        .map(|lambda| {
            let params = ModelParams {
                lambda,
                lambda_prime: axis.lambda_prime_for(lambda),
                ..config.params
            };
            params.validate()?;
            series(params, &times)
        })
        .collect::<Result<_>>()?;
    Ok(per_lambda.into_iter().flatten().collect())
}

/// Runs the mode named by `config`.
pub fn run(config: &RunConfig) -> Result<Vec<OutputRow>> {
    match config.mode {
        RunMode::Sweep => run_sweep(config),
        RunMode::Timeseries | RunMode::Figure if config.sweep.is_some() => run_sweep(config),
        RunMode::Timeseries | RunMode::Figure => run_timeseries(config),
    }
}

/// Writes rows as CSV with [`CSV_HEADER`]; floats use the shortest
/// representation that round-trips.
pub fn write_csv<W: Write>(rows: &[OutputRow], writer: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Files produced by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFiles {
    pub csv: PathBuf,
    pub plot: Option<PathBuf>,
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// gnuplot script plotting the CSV named `csv_name`, to be run from the
/// directory holding it.
pub fn plot_script(csv_name: &str, sweep: bool) -> String {
    let stem = csv_name.strip_suffix(".csv").unwrap_or(csv_name);
    let mut s = String::new();
    s.push_str("# gnuplot script; run from the directory containing the CSV\n");
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set terminal pngcairo size 1000,500\n");
    s.push_str(&format!("set output \"{stem}.png\"\n"));
    if sweep {
        s.push_str("set view map\n");
        s.push_str("set xlabel \"lambda\"\nset ylabel \"t\"\n");
        s.push_str("set multiplot layout 1,2\n");
        s.push_str("set title \"quantum discord\"\n");
        s.push_str(&format!(
            "splot \"{csv_name}\" skip 1 using 2:1:4 with points pointtype 5 pointsize 0.4 palette notitle\n"
        ));
        s.push_str("set title \"entanglement of formation\"\n");
        s.push_str(&format!(
            "splot \"{csv_name}\" skip 1 using 2:1:8 with points pointtype 5 pointsize 0.4 palette notitle\n"
        ));
        s.push_str("unset multiplot\n");
    } else {
        s.push_str("set xlabel \"t\"\nset ylabel \"bits\"\n");
        s.push_str("set yrange [0:*]\n");
        s.push_str(&format!(
            "plot \"{csv_name}\" skip 1 using 1:4 with lines title \"Q\", \\\n     \"{csv_name}\" skip 1 using 1:8 with lines title \"E\"\n"
        ));
    }
    s
}

/// Writes the CSV (and, if requested, the plot script next to it).
pub fn emit_outputs(rows: &[OutputRow], config: &RunConfig) -> Result<EmittedFiles> {
    if let Some(bad) = rows.iter().find(|r| !r.is_finite()) {
        return Err(Error::InvariantViolation(format!("non-finite row at t={}", bad.t)));
    }
    let csv_path = config.output.clone();
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let file = fs::File::create(&csv_path).map_err(|source| Error::Io {
        path: csv_path.clone(),
        source,
    })?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(|source| Error::Csv {
        path: csv_path.clone(),
        source,
    })?;

    let plot = if config.emit_plot {
        let plot_path = csv_path.with_extension("gp");
        let script = plot_script(&file_name(&csv_path), config.sweep.is_some());
        fs::write(&plot_path, script).map_err(|source| Error::Io {
            path: plot_path.clone(),
            source,
        })?;
        Some(plot_path)
    } else {
        None
    };
    Ok(EmittedFiles { csv: csv_path, plot })
}

/// Published parameter sets. Figures 2-5 fix `λ` and vary `λ'` over panels
/// a-d; figure 1 sweeps `λ = λ'` across the critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    Fig1,
    Panel { figure: u8, panel: char },
}

/// Names accepted by [`FigurePreset::parse`], in order.
pub const FIGURE_NAMES: [&str; 17] = [
    "fig1", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4b",
    "fig4c", "fig4d", "fig5a", "fig5b", "fig5c", "fig5d",
];

/// `λ` range of the figure-1 sweep.
pub const FIG1_LAMBDA_RANGE: (f64, f64) = (0.25, 2.0);
pub const FIG1_LAMBDA_STEPS: usize = 36;

const PANEL_LAMBDA_PRIME: [(char, f64); 4] = [('a', 0.5), ('b', 2.0), ('c', 3.5), ('d', 5.0)];

impl FigurePreset {
    pub fn parse(name: &str) -> Result<Self> {
        if name == "fig1" {
            return Ok(FigurePreset::Fig1);
        }
        let mut chars = name.strip_prefix("fig").unwrap_or("").chars();
        if let (Some(d), Some(panel), None) = (chars.next(), chars.next(), chars.next()) {
            if let Some(figure) = d.to_digit(10).filter(|f| (2..=5).contains(f)) {
                if PANEL_LAMBDA_PRIME.iter().any(|(p, _)| *p == panel) {
                    return Ok(FigurePreset::Panel {
                        figure: figure as u8,
                        panel,
                    });
                }
            }
        }
        Err(Error::InvalidParameter(format!(
            "unknown figure preset {name:?}; expected one of {}",
            FIGURE_NAMES.join(", ")
        )))
    }

    pub fn name(&self) -> String {
        match self {
            FigurePreset::Fig1 => "fig1".to_string(),
            FigurePreset::Panel { figure, panel } => format!("fig{figure}{panel}"),
        }
    }

    pub fn all() -> Vec<FigurePreset> {
        FIGURE_NAMES
            .iter()
            .map(|n| FigurePreset::parse(n).expect("preset names parse"))
            .collect()
    }

    /// Run configuration writing `<out_dir>/<name>.csv` and `<name>.gp`.
    pub fn config(&self, out_dir: &Path, t_max: f64, steps: usize) -> RunConfig {
        let output = out_dir.join(format!("{}.csv", self.name()));
        match *self {
            FigurePreset::Fig1 => RunConfig {
                mode: RunMode::Figure,
                params: ModelParams {
                    lambda: FIG1_LAMBDA_RANGE.0,
                    lambda_prime: FIG1_LAMBDA_RANGE.0,
                    n_spins: 500,
                    kx: 1.0,
                    ky: -1.0,
                    kz: 1.0,
                },
                t_max,
                steps,
                sweep: Some(SweepAxis {
                    lambda_min: FIG1_LAMBDA_RANGE.0,
                    lambda_max: FIG1_LAMBDA_RANGE.1,
                    lambda_steps: FIG1_LAMBDA_STEPS,
                    lambda_prime: LambdaPrimePolicy::EqualToLambda,
                }),
                output,
                emit_plot: true,
            },
            FigurePreset::Panel { figure, panel } => {
                let lambda = if figure % 2 == 0 { 0.75 } else { 1.25 };
                let (kx, ky, kz) = if figure <= 3 { (1.0, -1.0, 1.0) } else { (1.0, -0.2, 0.2) };
                let lambda_prime = PANEL_LAMBDA_PRIME
                    .iter()
                    .find(|(p, _)| *p == panel)
                    .map(|(_, v)| *v)
                    .unwrap_or(0.5);
                RunConfig {
                    mode: RunMode::Figure,
                    params: ModelParams {
                        lambda,
                        lambda_prime,
                        n_spins: 1000,
                        kx,
                        ky,
                        kz,
                    },
                    t_max,
                    steps,
                    sweep: None,
                    output,
                    emit_plot: true,
                }
            }
        }
    }
}

/// Runs a preset and writes its CSV and plot script.
pub fn run_figure(preset: FigurePreset, out_dir: &Path, t_max: f64, steps: usize) -> Result<EmittedFiles> {
    let config = preset.config(out_dir, t_max, steps);
    let rows = run(&config)?;
    emit_outputs(&rows, &config)
}

/// Parses a flat `key=value` file. Blank lines and lines starting with `#`
/// are skipped; keys may carry leading dashes.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("config line {}: expected key=value", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches('-').to_string();
        if key.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "config line {}: empty key",
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: [&str; 15] = [
    "lambda",
    "lambda-prime",
    "spins",
    "kx",
    "ky",
    "kz",
    "t-max",
    "steps",
    "out",
    "plot",
    "lambda-min",
    "lambda-max",
    "lambda-steps",
    "lambda-prime-equal-lambda",
    "out-dir",
];

/// Merged settings: config-file values overlaid by command-line values.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn from_file_text(text: &str) -> Result<Self> {
        let values = parse_config_file(text)?;
        if let Some(unknown) = values.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("unknown config key {unknown:?}")));
        }
        Ok(Settings { values })
    }

    /// Sets `key` if `value` is present; command-line values go through here.
    pub fn overlay<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidParameter(format!("cannot parse {key}={raw:?}"))),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key)?
            .ok_or_else(|| Error::InvalidParameter(format!("missing required setting --{key}")))
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some("true" | "1" | "yes" | "") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(raw) => Err(Error::InvalidParameter(format!("cannot parse {key}={raw:?} as a flag"))),
        }
    }

    fn base(&self, mode: RunMode, lambda: f64, lambda_prime: f64) -> Result<RunConfig> {
        let params = ModelParams {
            lambda,
            lambda_prime,
            n_spins: self.parse("spins")?.unwrap_or(1000),
            kx: self.parse("kx")?.unwrap_or(1.0),
            ky: self.parse("ky")?.unwrap_or(-1.0),
            kz: self.parse("kz")?.unwrap_or(1.0),
        };
        Ok(RunConfig {
            mode,
            params,
            t_max: self.parse("t-max")?.unwrap_or(DEFAULT_T_MAX),
            steps: self.parse("steps")?.unwrap_or(DEFAULT_STEPS),
            sweep: None,
            output: self.parse("out")?.unwrap_or_else(|| PathBuf::from("out.csv")),
            emit_plot: self.flag("plot")?,
        })
    }

    pub fn timeseries_config(&self) -> Result<RunConfig> {
        let config = self.base(RunMode::Timeseries, self.require("lambda")?, self.require("lambda-prime")?)?;
        config.validate()?;
        Ok(config)
    }

    pub fn sweep_config(&self) -> Result<RunConfig> {
        let lambda_min: f64 = self.require("lambda-min")?;
        let equal = self.flag("lambda-prime-equal-lambda")?;
        let fixed: Option<f64> = self.parse("lambda-prime")?;
        let policy = match (equal, fixed) {
            (true, None) => LambdaPrimePolicy::EqualToLambda,
            (false, Some(v)) => LambdaPrimePolicy::Fixed(v),
            (true, Some(_)) => {
                return Err(Error::InvalidParameter(
                    "--lambda-prime and --lambda-prime-equal-lambda are mutually exclusive".into(),
                ))
            }
            (false, None) => {
                return Err(Error::InvalidParameter(
                    "sweep needs --lambda-prime or --lambda-prime-equal-lambda".into(),
                ))
            }
        };
        let axis = SweepAxis {
            lambda_min,
            lambda_max: self.require("lambda-max")?,
            lambda_steps: self.require("lambda-steps")?,
            lambda_prime: policy,
        };
        let mut config = self.base(RunMode::Sweep, lambda_min, axis.lambda_prime_for(lambda_min))?;
        config.sweep = Some(axis);
        config.validate()?;
        Ok(config)
    }
}

/// Whether any `λ` of the run sits exactly at the critical point.
pub fn touches_critical_point(config: &RunConfig) -> bool {
    config
        .lambdas()
        .iter()
        .any(|&l| crate::model::classify_phase(l).ok() == Some(Phase::Critical))
}
