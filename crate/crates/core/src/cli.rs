//! Command-line front end: argument/config resolution, the commands, and
//! CSV rendering. The binary is a thin wrapper around [`run`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, SearchParams};
use crate::dynamics::{reduced_state_closed_form_for, CouplingConfig, InitialState};
use crate::error::Error;
use crate::frontier::{self, FrontierCurve, DEFAULT_SEED, MBVMS_TOL};
use crate::measures::{self, Measure};
use crate::qcore::{self, partial_trace_field, TwoQubitDensity, BASIS_LABELS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// CSV layout of every command, shown by `--help`.
pub const CSV_SCHEMA: &str = "\
OUTPUT
  UTF-8 CSV, '.' decimal separator, numbers with 12 significant digits.
  Lines starting with '#' carry run metadata (version, command, resolved
  configuration, seed, tolerances); the first other line is the header.

  evolve      chi, theta, rho_re_<r>_<c> x16, rho_im_<r>_<c> x16,
              concurrence, linear_entropy, bell_max
              (<r>, <c> in ee, eg, ge, gg)
  evolve2     u, concurrence, linear_entropy, bell_max, p0, p1, p2
              (pk: probability of k cavity photons)
  fig 1|2     theta, chi, M, measure
              (measure: concurrence for 1, maximal Bell violation for 2)
  fig 3a..4b  chi, max_value, argmax_phase
              (3a/3b: |eg> start, phase is Theta;
               4a/4b: |ee> start, phase is u = lambda_1 t)
  global-max  chi, c_max, c_argmax, c_branch, bell_max, bell_argmax, bell_branch
  symmetry    chi, c_m_chi, c_m_inv_chi, bell_chi, bell_inv_chi,
              concurrence_symmetric, bell_symmetric
  frontier    kind, parameter, M, value
              (parameter: C for mems, p for werner, M for mbvms)

EXIT STATUS
  0 success, 2 usage or invalid parameter, 3 numeric failure

CONFIG FILE
  --config FILE reads key=value lines whose keys are the long flag names
  without dashes (e.g. chi-min=0.1); '#' starts a comment. Flags given on
  the command line override the file.";

#[derive(Parser, Debug)]
#[command(name = "cavity-mems", version, about = "Two atoms unequally coupled to one cavity mode: dynamics, entanglement and Bell-violation maxima, MEMS frontiers", after_long_help = CSV_SCHEMA)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Reduced atomic state and its measures at one (chi, theta).
    Evolve,
    /// Dataset behind one figure.
    Fig {
        #[arg(value_enum)]
        figure: Figure,
    },
    /// Frontier curve in the (linear entropy, measure) plane.
    Frontier {
        #[arg(value_enum)]
        kind: FrontierArg,
    },
    /// Exchange-symmetry report of the global maxima per chi.
    Symmetry,
    /// Global maxima over the evolution on a chi grid.
    GlobalMax,
    /// Two-excitation (|ee>) trace over u at one chi.
    Evolve2,
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Evolve => "evolve".into(),
            Command::Fig { figure } => format!("fig {}", figure.id()),
            Command::Frontier { kind } => format!("frontier {}", kind.id()),
            Command::Symmetry => "symmetry".into(),
            Command::GlobalMax => "global-max".into(),
            Command::Evolve2 => "evolve2".into(),
        }
    }
}

#[derive(ValueEnum, Copy, Clone, Debug, PartialEq, Eq)]
pub enum Figure {
    #[value(name = "1")]
    F1,
    #[value(name = "2")]
    F2,
    #[value(name = "3a")]
    F3a,
    #[value(name = "3b")]
    F3b,
    #[value(name = "4a")]
    F4a,
    #[value(name = "4b")]
    F4b,
}

impl Figure {
    fn id(self) -> &'static str {
        match self {
            Figure::F1 => "1",
            Figure::F2 => "2",
            Figure::F3a => "3a",
            Figure::F3b => "3b",
            Figure::F4a => "4a",
            Figure::F4b => "4b",
        }
    }
}

#[derive(ValueEnum, Copy, Clone, Debug, PartialEq, Eq)]
pub enum FrontierArg {
    Mems,
    Werner,
    Mbvms,
}

impl FrontierArg {
    fn id(self) -> &'static str {
        match self {
            FrontierArg::Mems => "mems",
            FrontierArg::Werner => "werner",
            FrontierArg::Mbvms => "mbvms",
        }
    }
}

#[derive(ValueEnum, Copy, Clone, Debug, PartialEq, Eq)]
pub enum InitialArg {
    Eg,
    Ge,
    Ee,
}

impl From<InitialArg> for InitialState {
    fn from(a: InitialArg) -> Self {
        match a {
            InitialArg::Eg => InitialState::Eg,
            InitialArg::Ge => InitialState::Ge,
            InitialArg::Ee => InitialState::Ee,
        }
    }
}

#[derive(ValueEnum, Copy, Clone, Debug, PartialEq, Eq)]
pub enum MeasureArg {
    Concurrence,
    Bell,
}

impl From<MeasureArg> for Measure {
    fn from(a: MeasureArg) -> Self {
        match a {
            MeasureArg::Concurrence => Measure::Concurrence,
            MeasureArg::Bell => Measure::Bell,
        }
    }
}

/// Optional settings shared by all commands; unset values fall back to the
/// config file and then to per-command defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Coupling ratio lambda_2 / lambda_1.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub chi: Option<f64>,
    /// Pulse area Theta in radians.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub chi_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub chi_max: Option<f64>,
    /// Number of chi grid points (per side of chi = 1 for fig 1/2).
    #[arg(long, global = true)]
    pub chi_steps: Option<usize>,
    /// Comma-separated chi values (symmetry).
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub chi_list: Option<Vec<f64>>,
    /// Comma-separated pulse areas (fig 1/2).
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta_list: Option<Vec<f64>>,
    /// Largest u scanned for the |ee> start.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    /// Coarse grid step of the phase scans (u step for evolve2).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub coarse_step: Option<f64>,
    /// Seed of the randomized frontier search.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Frontier sample count.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Random restarts per point of the Bell frontier.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub initial: Option<InitialArg>,
    /// Measure of the Werner curve.
    #[arg(long, global = true, value_enum)]
    pub measure: Option<MeasureArg>,
    /// Use the numeric search for the single-excitation starts in global-max.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub numeric: Option<bool>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key=value file of defaults for the flags above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(no_binary_name = true)]
struct FlagsOnly {
    #[command(flatten)]
    flags: Flags,
}

impl Flags {
    /// Parses `key=value` lines through the same argument definitions as
    /// the command line.
    pub fn from_config_text(text: &str) -> Result<Self, CliError> {
        let mut args = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = k.trim();
            if key == "config" {
                return Err(CliError::Usage("config files cannot include other config files".into()));
            }
            args.push(format!("--{key}={}", v.trim()));
        }
        FlagsOnly::try_parse_from(args).map(|f| f.flags).map_err(|e| CliError::Usage(format!("config file: {e}")))
    }

    /// Field-wise `self.or(lower)`.
    pub fn or(self, lower: Flags) -> Flags {
        Flags {
            chi: self.chi.or(lower.chi),
            theta: self.theta.or(lower.theta),
            chi_min: self.chi_min.or(lower.chi_min),
            chi_max: self.chi_max.or(lower.chi_max),
            chi_steps: self.chi_steps.or(lower.chi_steps),
            chi_list: self.chi_list.or(lower.chi_list),
            theta_list: self.theta_list.or(lower.theta_list),
            horizon: self.horizon.or(lower.horizon),
            coarse_step: self.coarse_step.or(lower.coarse_step),
            seed: self.seed.or(lower.seed),
            samples: self.samples.or(lower.samples),
            restarts: self.restarts.or(lower.restarts),
            initial: self.initial.or(lower.initial),
            measure: self.measure.or(lower.measure),
            numeric: self.numeric.or(lower.numeric),
            out: self.out.or(lower.out),
            config: self.config.or(lower.config),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::UnsupportedSector(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub chi: f64,
    pub theta: f64,
    pub chi_min: f64,
    pub chi_max: f64,
    pub chi_steps: usize,
    pub chi_list: Vec<f64>,
    pub theta_list: Vec<f64>,
    pub horizon: f64,
    pub coarse_step: f64,
    pub seed: u64,
    pub samples: usize,
    pub restarts: usize,
    pub initial: InitialArg,
    pub measure: MeasureArg,
    pub numeric: bool,
    pub out: Option<PathBuf>,
}

impl PartialEq for Command {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl RunConfig {
    /// Per-command defaults overridden by `flags`.
    pub fn resolve(command: Command, flags: Flags) -> Result<Self, CliError> {
        let (chi_min, chi_max, chi_steps) = match &command {
            Command::Fig { figure: Figure::F1 | Figure::F2 } => (0.0, 40.0, 200),
            Command::Fig { figure: Figure::F3a | Figure::F3b } | Command::GlobalMax => (0.025, 40.0, 401),
            Command::Fig { figure: Figure::F4a | Figure::F4b } => (0.0, 1.0, 101),
            _ => (0.025, 40.0, 401),
        };
        let (horizon, coarse_step) = match &command {
            Command::Evolve2 => (50.0, 0.01),
            _ => (SearchParams::two_excitation().horizon, SearchParams::two_excitation().coarse_step),
        };
        let samples = match &command {
            Command::Frontier { kind: FrontierArg::Mbvms } => 41,
            _ => 200,
        };
        let cfg = RunConfig {
            chi: flags.chi.unwrap_or(1.0),
            theta: flags.theta.unwrap_or(std::f64::consts::FRAC_PI_2),
            chi_min: flags.chi_min.unwrap_or(chi_min),
            chi_max: flags.chi_max.unwrap_or(chi_max),
            chi_steps: flags.chi_steps.unwrap_or(chi_steps),
            chi_list: flags.chi_list.unwrap_or_else(|| vec![0.25, 0.5, 1.0 / 3f64.sqrt(), 1.0, 1.5, 2.0, 3.0]),
            theta_list: flags.theta_list.unwrap_or_else(frontier::standard_theta_list),
            horizon: flags.horizon.unwrap_or(horizon),
            coarse_step: flags.coarse_step.unwrap_or(coarse_step),
            seed: flags.seed.unwrap_or(DEFAULT_SEED),
            samples: flags.samples.unwrap_or(samples),
            restarts: flags.restarts.unwrap_or(16),
            initial: flags.initial.unwrap_or(InitialArg::Eg),
            measure: flags.measure.unwrap_or(MeasureArg::Concurrence),
            numeric: flags.numeric.unwrap_or(false),
            out: flags.out,
            command,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let scalars = [
            ("chi", self.chi),
            ("theta", self.theta),
            ("chi-min", self.chi_min),
            ("chi-max", self.chi_max),
            ("horizon", self.horizon),
            ("coarse-step", self.coarse_step),
        ];
        for (name, v) in scalars {
            if !v.is_finite() {
                return Err(CliError::Usage(format!("{name} must be finite, got {v}")));
            }
        }
        for v in self.chi_list.iter().chain(&self.theta_list) {
            if !v.is_finite() {
                return Err(CliError::Usage(format!("list entries must be finite, got {v}")));
            }
        }
        if self.chi_steps < 1 || self.samples < 1 {
            return Err(CliError::Usage("chi-steps and samples must be >= 1".into()));
        }
        if self.chi_min > self.chi_max {
            return Err(CliError::Usage(format!("chi-min {} exceeds chi-max {}", self.chi_min, self.chi_max)));
        }
        if self.chi_list.is_empty() || self.theta_list.is_empty() {
            return Err(CliError::Usage("chi-list and theta-list must not be empty".into()));
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!(
            "chi={} theta={} chi-min={} chi-max={} chi-steps={} horizon={} coarse-step={} samples={} restarts={} initial={:?} measure={:?} numeric={}",
            fmt_num(self.chi),
            fmt_num(self.theta),
            fmt_num(self.chi_min),
            fmt_num(self.chi_max),
            self.chi_steps,
            fmt_num(self.horizon),
            fmt_num(self.coarse_step),
            self.samples,
            self.restarts,
            self.initial,
            self.measure,
            self.numeric,
        )
    }

    fn search_params(&self) -> SearchParams {
        match InitialState::from(self.initial) {
            InitialState::Ee => SearchParams { horizon: self.horizon, coarse_step: self.coarse_step, ..SearchParams::two_excitation() },
            _ => SearchParams::one_excitation(),
        }
    }

    /// `chi_steps` points from `chi_min` to `chi_max`, log-spaced when
    /// `log` and the range is positive.
    fn chi_grid(&self, log: bool) -> Vec<f64> {
        let n = self.chi_steps;
        if n == 1 {
            return vec![self.chi_min];
        }
        let t = |k: usize| k as f64 / (n - 1) as f64;
        if log && self.chi_min > 0.0 {
            let (a, b) = (self.chi_min.ln(), self.chi_max.ln());
            (0..n).map(|k| (a + (b - a) * t(k)).exp()).collect()
        } else {
            (0..n).map(|k| self.chi_min + (self.chi_max - self.chi_min) * t(k)).collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
}

/// 12 significant digits in scientific notation; `-0` prints as `0`.
pub fn fmt_num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

struct Table {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self { meta: Vec::new(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.into(), value.into()));
    }

    fn push(&mut self, row: Vec<Cell>) -> Result<(), CliError> {
        debug_assert_eq!(row.len(), self.columns.len());
        if let Some(bad) = row.iter().find(|c| matches!(c, Cell::Num(v) if !v.is_finite())) {
            return Err(CliError::Numeric(format!("non-finite output value {bad:?}")));
        }
        self.rows.push(row);
        Ok(())
    }

    fn render(&self, cfg: &RunConfig) -> Result<String, CliError> {
        let mut s = String::new();
        let _ = writeln!(s, "# cavity-mems {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# command: {}", cfg.command.name());
        let _ = writeln!(s, "# config: {}", cfg.describe());
        let _ = writeln!(s, "# seed: {}", cfg.seed);
        let _ = writeln!(
            s,
            "# tolerances: hermitian={:e} trace={:e} psd={:e} search={:e}",
            qcore::HERMITIAN_TOL,
            qcore::TRACE_TOL,
            qcore::PSD_TOL,
            cfg.search_params().tolerance
        );
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(v) => fmt_num(*v),
                Cell::Text(t) => t.clone(),
                Cell::Bool(b) => b.to_string(),
            }))?;
        }
        let body = w.into_inner().map_err(|e| CliError::Numeric(e.to_string()))?;
        s.push_str(&String::from_utf8(body).map_err(|e| CliError::Numeric(e.to_string()))?);
        Ok(s)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Numeric(format!("csv: {e}"))
    }
}

fn measures_of(rho: &TwoQubitDensity) -> Result<[f64; 3], CliError> {
    Ok([measures::concurrence(rho)?, measures::linear_entropy(rho), measures::bell_max(rho)?])
}

fn cmd_evolve(cfg: &RunConfig) -> Result<Table, CliError> {
    let initial = InitialState::from(cfg.initial);
    if initial == InitialState::Ee {
        return Err(CliError::Usage("evolve covers the |eg> and |ge> starts; use evolve2 for |ee>".into()));
    }
    let rho = reduced_state_closed_form_for(&CouplingConfig::new(cfg.chi, cfg.theta)?, initial)?;
    let mut cols = vec!["chi".to_string(), "theta".to_string()];
    for part in ["re", "im"] {
        for r in BASIS_LABELS {
            for c in BASIS_LABELS {
                cols.push(format!("rho_{part}_{r}_{c}"));
            }
        }
    }
    cols.extend(["concurrence", "linear_entropy", "bell_max"].map(String::from));
    let mut table = Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    table.meta("initial", format!("{:?}", cfg.initial).to_lowercase());
    let mut row = vec![Cell::Num(cfg.chi), Cell::Num(cfg.theta)];
    row.extend(rho.matrix().transpose().iter().map(|z| Cell::Num(z.re)));
    row.extend(rho.matrix().transpose().iter().map(|z| Cell::Num(z.im)));
    row.extend(measures_of(&rho)?.map(Cell::Num));
    table.push(row)?;
    Ok(table)
}

fn cmd_evolve2(cfg: &RunConfig) -> Result<Table, CliError> {
    if !(cfg.horizon > 0.0 && cfg.coarse_step > 0.0) {
        return Err(CliError::Usage("horizon and coarse-step must be positive".into()));
    }
    let h = crate::dynamics::build_sector_hamiltonian(2, cfg.chi)?;
    let prop = crate::dynamics::Propagator::new(&h);
    let start = InitialState::Ee.sector_state();
    let n = (cfg.horizon / cfg.coarse_step).round() as usize;
    let mut table = Table::new(&["u", "concurrence", "linear_entropy", "bell_max", "p0", "p1", "p2"]);
    for k in 0..=n {
        let u = k as f64 * cfg.coarse_step;
        let s = prop.evolve(&start, u)?;
        let rho = partial_trace_field(&s)?;
        let mut row = vec![Cell::Num(u)];
        row.extend(measures_of(&rho)?.map(Cell::Num));
        row.extend(s.photon_distribution().map(Cell::Num));
        table.push(row)?;
    }
    Ok(table)
}

fn trajectory_table(cfg: &RunConfig, measure: Measure) -> Result<Table, CliError> {
    let curves = frontier::trajectory_sweep(&cfg.theta_list, (cfg.chi_min, cfg.chi_max), cfg.chi_steps, measure)?;
    let mut table = Table::new(&["theta", "chi", "M", "measure"]);
    table.meta("measure", measure.label());
    table.meta("chi_sampling", "linear below 1, log-spaced above 1, chi-steps points per side");
    for curve in curves {
        let theta = curve.theta.unwrap_or(f64::NAN);
        for p in curve.points {
            table.push(vec![Cell::Num(theta), Cell::Num(p.parameter), Cell::Num(p.entropy), Cell::Num(p.value)])?;
        }
    }
    Ok(table)
}

fn maxima_table(cfg: &RunConfig, initial: InitialState, measure: Measure) -> Result<Table, CliError> {
    let params = SearchParams { horizon: cfg.horizon, coarse_step: cfg.coarse_step, ..SearchParams::two_excitation() };
    let log = initial != InitialState::Ee;
    let mut table = Table::new(&["chi", "max_value", "argmax_phase"]);
    table.meta("measure", measure.label());
    table.meta("initial", format!("{initial:?}").to_lowercase());
    if initial == InitialState::Ee {
        table.meta("search", format!("horizon={} coarse_step={}", fmt_num(params.horizon), fmt_num(params.coarse_step)));
    } else {
        table.meta("search", "closed form");
    }
    for chi in cfg.chi_grid(log) {
        let r = match (initial, measure) {
            (InitialState::Ee, Measure::Concurrence) => analysis::global_max_concurrence_numeric(chi, initial, &params)?,
            (InitialState::Ee, Measure::Bell) => analysis::global_max_bell_numeric(chi, initial, &params)?,
            (_, Measure::Concurrence) => analysis::global_max_concurrence_closed(chi)?,
            (_, Measure::Bell) => analysis::global_max_bell_closed(chi)?,
        };
        table.push(vec![Cell::Num(chi), Cell::Num(r.max_value), Cell::Num(r.argmax_phase)])?;
    }
    Ok(table)
}

fn cmd_fig(cfg: &RunConfig, figure: Figure) -> Result<Table, CliError> {
    match figure {
        Figure::F1 => trajectory_table(cfg, Measure::Concurrence),
        Figure::F2 => trajectory_table(cfg, Measure::Bell),
        Figure::F3a => maxima_table(cfg, InitialState::Eg, Measure::Concurrence),
        Figure::F3b => maxima_table(cfg, InitialState::Eg, Measure::Bell),
        Figure::F4a => maxima_table(cfg, InitialState::Ee, Measure::Concurrence),
        Figure::F4b => maxima_table(cfg, InitialState::Ee, Measure::Bell),
    }
}

fn cmd_global_max(cfg: &RunConfig) -> Result<Table, CliError> {
    let initial = InitialState::from(cfg.initial);
    let params = cfg.search_params();
    let mut table = Table::new(&["chi", "c_max", "c_argmax", "c_branch", "bell_max", "bell_argmax", "bell_branch"]);
    table.meta("initial", format!("{initial:?}").to_lowercase());
    let numeric = cfg.numeric || initial != InitialState::Eg;
    table.meta("search", if numeric { "numeric" } else { "closed form" });
    for chi in cfg.chi_grid(initial != InitialState::Ee) {
        let (c, b) = if numeric {
            (
                analysis::global_max_concurrence_numeric(chi, initial, &params)?,
                analysis::global_max_bell_numeric(chi, initial, &params)?,
            )
        } else {
            (analysis::global_max_concurrence_closed(chi)?, analysis::global_max_bell_closed(chi)?)
        };
        table.push(vec![
            Cell::Num(chi),
            Cell::Num(c.max_value),
            Cell::Num(c.argmax_phase),
            Cell::Text(c.branch.label().into()),
            Cell::Num(b.max_value),
            Cell::Num(b.argmax_phase),
            Cell::Text(b.branch.label().into()),
        ])?;
    }
    Ok(table)
}

fn cmd_symmetry(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&[
        "chi",
        "c_m_chi",
        "c_m_inv_chi",
        "bell_chi",
        "bell_inv_chi",
        "concurrence_symmetric",
        "bell_symmetric",
    ]);
    table.meta("symmetry_tolerance", fmt_num(analysis::SYMMETRY_TOL));
    let mut chis = cfg.chi_list.clone();
    chis.sort_by(f64::total_cmp);
    for chi in chis {
        let r = analysis::exchange_symmetry_report(chi)?;
        table.push(vec![
            Cell::Num(r.chi),
            Cell::Num(r.c_m_chi),
            Cell::Num(r.c_m_inv_chi),
            Cell::Num(r.bell_chi),
            Cell::Num(r.bell_inv_chi),
            Cell::Bool(r.concurrence_symmetric),
            Cell::Bool(r.bell_symmetric),
        ])?;
    }
    Ok(table)
}

fn frontier_rows(table: &mut Table, curve: &FrontierCurve) -> Result<(), CliError> {
    for p in &curve.points {
        table.push(vec![
            Cell::Text(curve.kind.label().into()),
            Cell::Num(p.parameter),
            Cell::Num(p.entropy),
            Cell::Num(p.value),
        ])?;
    }
    Ok(())
}

fn cmd_frontier(cfg: &RunConfig, kind: FrontierArg) -> Result<Table, CliError> {
    let mut table = Table::new(&["kind", "parameter", "M", "value"]);
    match kind {
        FrontierArg::Mems => {
            table.meta("measure", Measure::Concurrence.label());
            frontier_rows(&mut table, &frontier::mems_frontier(cfg.samples)?)?;
        }
        FrontierArg::Werner => {
            let measure = Measure::from(cfg.measure);
            table.meta("measure", measure.label());
            frontier_rows(&mut table, &frontier::werner_curve(cfg.samples, measure)?)?;
        }
        FrontierArg::Mbvms => {
            if cfg.samples < 2 {
                return Err(CliError::Usage("mbvms needs samples >= 2".into()));
            }
            let top = 8.0 / 9.0;
            let grid: Vec<f64> = (0..cfg.samples).map(|k| top * k as f64 / (cfg.samples - 1) as f64).collect();
            table.meta("measure", Measure::Bell.label());
            table.meta("optimizer", format!("X-state coordinate ascent, restarts={}, tolerance={:e}", cfg.restarts, MBVMS_TOL));
            table.meta("note", "numerically derived lower bound on the maximal-Bell-violation frontier");
            frontier_rows(&mut table, &frontier::mbvms_frontier(&grid, cfg.restarts, cfg.seed)?)?;
        }
    }
    Ok(table)
}

/// Runs one resolved configuration and returns the CSV text.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    let table = match &cfg.command {
        Command::Evolve => cmd_evolve(cfg)?,
        Command::Evolve2 => cmd_evolve2(cfg)?,
        Command::Fig { figure } => cmd_fig(cfg, *figure)?,
        Command::Frontier { kind } => cmd_frontier(cfg, *kind)?,
        Command::Symmetry => cmd_symmetry(cfg)?,
        Command::GlobalMax => cmd_global_max(cfg)?,
    };
    table.render(cfg)
}

/// Resolves flags against the optional config file.
pub fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let file_flags = match &cli.flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            Flags::from_config_text(&text)?
        }
        None => Flags::default(),
    };
    RunConfig::resolve(cli.command, cli.flags.or(file_flags))
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = resolve(cli).and_then(|cfg| {
        let csv = execute(&cfg)?;
        match &cfg.out {
            Some(path) => std::fs::write(path, csv)
                .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{csv}");
                Ok(())
            }
        }
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("cavity-mems: {e}");
            e.exit_code()
        }
    }
}

/// Parses a rendered CSV into `(header, rows)`, skipping metadata lines.
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<BTreeMap<String, String>>) {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map(|h| h.iter().map(String::from).collect()).unwrap_or_default();
    let rows = reader
        .records()
        .filter_map(|r| r.ok())
        .map(|r| header.iter().cloned().zip(r.iter().map(String::from)).collect())
        .collect();
    (header, rows)
}
