//! Monte Carlo experiment runner: TOML configuration, parallel trials and CSV output.
//!
//! Powers are given in dBW and converted once when the configuration is read.
//! Trial `t` of every sweep point uses the same channel seed, so points of a sweep
//! are compared on common channel draws.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::baselines::{solve_scheme, Regime, Scheme};
use crate::channel::{derive_seed, make_scenario, ChannelGenConfig, ScenarioRegime};
use crate::conic::SolveOptions;
use crate::dinkelbach::{AlgoError, DinkelbachConfig};
use crate::model::{OutageSpec, SolveReport, Status, SystemParams};

pub const CSV_HEADER: &str =
    "sweep_value,trial,seed,status,see_bits_per_joule_hz,rate_bits_per_s_hz,power_w,outer_iters,total_inner_iters,residual,rank_ratio";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Pool(String),
}

fn config_err(field: &'static str, reason: impl Into<String>) -> HarnessError {
    HarnessError::Config { field, reason: reason.into() }
}

pub fn dbw_to_watts(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeName {
    Perfect,
    Statistical,
    Robust,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    SeeMax,
    RateMax,
    PowerMin,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::SeeMax => Scheme::SeeMax,
            SchemeName::RateMax => Scheme::RateMax,
            SchemeName::PowerMin => Scheme::PowerMin,
        }
    }
}

/// Swept parameter. `omega_s` and `p_tx` values are in dBW.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    RD,
    OmegaS,
    PTx,
    Eps,
    ASq,
    NT,
    ZetaEh,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub n_t: usize,
    pub sigma_su_sq_dbw: f64,
    pub sigma_er_sq_dbw: f64,
    pub p_c_dbw: f64,
    pub xi: f64,
    pub p_tx_dbw: f64,
    pub p_f_dbw: f64,
    pub omega_s_dbw: f64,
    pub zeta_eh: f64,
    pub r_d: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            n_t: 3,
            sigma_su_sq_dbw: 0.0,
            sigma_er_sq_dbw: 0.0,
            p_c_dbw: 0.0,
            xi: 1.0,
            p_tx_dbw: 20.0,
            p_f_dbw: 0.0,
            omega_s_dbw: -20.0,
            zeta_eh: 0.5,
            r_d: 0.5,
        }
    }
}

impl ParamsConfig {
    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            n_t: self.n_t,
            sigma_su_sq: dbw_to_watts(self.sigma_su_sq_dbw),
            sigma_er_sq: dbw_to_watts(self.sigma_er_sq_dbw),
            p_c: dbw_to_watts(self.p_c_dbw),
            xi: self.xi,
            p_tx: dbw_to_watts(self.p_tx_dbw),
            p_f: dbw_to_watts(self.p_f_dbw),
            omega_s: dbw_to_watts(self.omega_s_dbw),
            zeta_eh: self.zeta_eh,
            r_d: self.r_d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    /// Distances to the secondary receiver, primary receiver and energy receiver.
    pub distances: [f64; 3],
    pub pathloss_exp: f64,
    /// Eavesdropper channel variance (statistical regime).
    pub a_sq: f64,
    /// Common error radius of all three channels (robust regime).
    pub eps: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { distances: [1.0; 3], pathloss_exp: 2.7, a_sq: 0.1, eps: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutageConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for OutageConfig {
    fn default() -> Self {
        let d = OutageSpec::default();
        Self { alpha: d.alpha, beta: d.beta, gamma: d.gamma }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub lambda0: f64,
    pub eps_outer: f64,
    pub zeta_inner: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = DinkelbachConfig::default();
        Self { lambda0: d.lambda0, eps_outer: d.eps_outer, zeta_inner: d.zeta_inner, max_outer: d.max_outer, max_inner: d.max_inner }
    }
}

impl SolverConfig {
    pub fn to_dinkelbach(&self) -> DinkelbachConfig {
        DinkelbachConfig {
            lambda0: self.lambda0,
            eps_outer: self.eps_outer,
            zeta_inner: self.zeta_inner,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            conic: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub regime: RegimeName,
    #[serde(default)]
    pub scheme: SchemeName,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub outage: OutageConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// Fully resolved inputs of one sweep point.
#[derive(Debug, Clone)]
pub struct PointSetup {
    pub params: SystemParams,
    pub regime: Regime,
    pub scenario: ScenarioRegime,
    pub channel: ChannelGenConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| config_err("config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.values.is_empty() {
            return Err(config_err("values", "sweep values must be nonempty"));
        }
        if self.trials == 0 {
            return Err(config_err("trials", "must be at least 1"));
        }
        match (self.sweep, self.regime) {
            (SweepVar::Eps, r) if r != RegimeName::Robust => return Err(config_err("sweep", "eps applies to the robust regime only")),
            (SweepVar::ASq, r) if r != RegimeName::Statistical => return Err(config_err("sweep", "a_sq applies to the statistical regime only")),
            _ => {}
        }
        if self.sweep == SweepVar::NT && self.values.iter().any(|v| !(v.fract() == 0.0 && *v >= 1.0)) {
            return Err(config_err("values", "n_t values must be positive integers"));
        }
        self.solver.to_dinkelbach().validate().map_err(|e| config_err("solver", e.to_string()))?;
        for &v in &self.values {
            self.point(v)?;
        }
        Ok(())
    }

    /// Parameters, regime and channel settings at sweep value `v`.
    pub fn point(&self, v: f64) -> Result<PointSetup, HarnessError> {
        let mut pc = self.params.clone();
        let mut ch = self.channel.clone();
        match self.sweep {
            SweepVar::RD => pc.r_d = v,
            SweepVar::OmegaS => pc.omega_s_dbw = v,
            SweepVar::PTx => pc.p_tx_dbw = v,
            SweepVar::Eps => ch.eps = v,
            SweepVar::ASq => ch.a_sq = v,
            SweepVar::NT => pc.n_t = v as usize,
            SweepVar::ZetaEh => pc.zeta_eh = v,
        }
        let params = pc.to_params();
        params.validate().map_err(|e| config_err("params", e.to_string()))?;
        let spec = OutageSpec { alpha: self.outage.alpha, beta: self.outage.beta, gamma: self.outage.gamma };
        let (regime, scenario) = match self.regime {
            RegimeName::Perfect => (Regime::Perfect, ScenarioRegime::Perfect),
            RegimeName::Statistical => {
                spec.validate().map_err(|e| config_err("outage", e.to_string()))?;
                if !(ch.a_sq > 0.0 && ch.a_sq.is_finite()) {
                    return Err(config_err("channel.a_sq", format!("must be > 0, got {}", ch.a_sq)));
                }
                (Regime::Statistical(spec), ScenarioRegime::Statistical { a_sq: ch.a_sq })
            }
            RegimeName::Robust => {
                if !(ch.eps >= 0.0 && ch.eps.is_finite()) {
                    return Err(config_err("channel.eps", format!("must be >= 0, got {}", ch.eps)));
                }
                (Regime::Robust, ScenarioRegime::Ellipsoidal { eps_s: ch.eps, eps_p: ch.eps, eps_e: ch.eps })
            }
        };
        let [ds, dp, de] = ch.distances;
        let channel = ChannelGenConfig { n_t: params.n_t, distances: (ds, dp, de), pathloss_exp: ch.pathloss_exp, seed: 0 };
        channel.validate().map_err(|e| config_err("channel", e.to_string()))?;
        Ok(PointSetup { params, regime, scenario, channel })
    }

    /// Channel seed of trial `trial` (shared by all sweep points).
    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.seed, trial as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Solved(Status),
    SolverFailure,
}

impl std::fmt::Display for RowStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowStatus::Solved(s) => write!(f, "{s}"),
            RowStatus::SolverFailure => f.write_str("SolverFailure"),
        }
    }
}

/// One trial; `see` is 0 for infeasible or failed trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub status: RowStatus,
    pub see: f64,
    pub rate: f64,
    pub power: f64,
    pub outer_iters: usize,
    pub total_inner_iters: usize,
    pub residual: f64,
    pub rank_ratio: f64,
    pub lambda_trace: Vec<f64>,
    pub f_trace: Vec<f64>,
}

impl Row {
    pub fn from_outcome(sweep_value: f64, trial: usize, seed: u64, outcome: Result<SolveReport, AlgoError>) -> Self {
        match outcome {
            Ok(r) => Row {
                sweep_value,
                trial,
                seed,
                status: RowStatus::Solved(r.status),
                see: if r.status == Status::Infeasible { 0.0 } else { r.see },
                rate: r.secrecy_rate,
                power: r.tx_power,
                outer_iters: r.outer_iters(),
                total_inner_iters: r.total_inner_iters(),
                residual: r.residual,
                rank_ratio: r.rank_ratio,
                lambda_trace: r.lambda_trace,
                f_trace: r.f_trace,
            },
            Err(_) => Row {
                sweep_value,
                trial,
                seed,
                status: RowStatus::SolverFailure,
                see: 0.0,
                rate: 0.0,
                power: 0.0,
                outer_iters: 0,
                total_inner_iters: 0,
                residual: f64::NAN,
                rank_ratio: f64::NAN,
                lambda_trace: Vec::new(),
                f_trace: Vec::new(),
            },
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.sweep_value,
            self.trial,
            self.seed,
            self.status,
            self.see,
            self.rate,
            self.power,
            self.outer_iters,
            self.total_inner_iters,
            self.residual,
            self.rank_ratio
        )
    }
}

/// Mean over the trials of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub sweep_value: f64,
    pub mean_see: f64,
    pub feasible: usize,
    pub trials: usize,
}

/// Rows in `(sweep index, trial)` order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn summary(&self) -> Vec<PointSummary> {
        let mut out: Vec<PointSummary> = Vec::new();
        for r in &self.rows {
            let feasible = matches!(r.status, RowStatus::Solved(Status::Optimal | Status::MaxIterations)) as usize;
            match out.last_mut() {
                Some(p) if p.sweep_value.to_bits() == r.sweep_value.to_bits() => {
                    p.mean_see += r.see;
                    p.feasible += feasible;
                    p.trials += 1;
                }
                _ => out.push(PointSummary { sweep_value: r.sweep_value, mean_see: r.see, feasible, trials: 1 }),
            }
        }
        for p in &mut out {
            p.mean_see /= p.trials as f64;
        }
        out
    }

    pub fn any_solver_failure(&self) -> bool {
        self.rows.iter().any(|r| r.status == RowStatus::SolverFailure)
    }

    pub fn all_infeasible(&self) -> bool {
        self.rows.iter().all(|r| r.status == RowStatus::Solved(Status::Infeasible))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.csv_line());
        }
        s
    }
}

/// Solve one trial of one sweep point.
pub fn run_trial(setup: &PointSetup, scheme: Scheme, cfg: &DinkelbachConfig, seed: u64) -> Result<SolveReport, AlgoError> {
    let ch = make_scenario(&setup.params, setup.scenario, &ChannelGenConfig { seed, ..setup.channel })?;
    solve_scheme(scheme, setup.regime, &ch, &setup.params, cfg)
}

/// Every `(sweep value, trial)` pair on at most `workers` threads (0 = all cores).
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<ResultTable, HarnessError> {
    config.validate()?;
    let setups = config.values.iter().map(|&v| config.point(v)).collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..setups.len()).flat_map(|i| (0..config.trials).map(move |t| (i, t))).collect();
    let cfg = config.solver.to_dinkelbach();
    let scheme = Scheme::from(config.scheme);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| HarnessError::Pool(e.to_string()))?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, t)| {
                let seed = config.trial_seed(t);
                Row::from_outcome(config.values[i], t, seed, run_trial(&setups[i], scheme, &cfg, seed))
            })
            .collect()
    });
    Ok(ResultTable { rows })
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<(), HarnessError> {
    write_file(path, &table.to_csv())
}

pub fn trace_csv(lambda_trace: &[f64], f_trace: &[f64]) -> String {
    let mut s = String::from("iteration,lambda,f\n");
    for (i, (l, f)) in lambda_trace.iter().zip(f_trace).enumerate() {
        let _ = writeln!(s, "{i},{l},{f}");
    }
    s
}

/// Convergence trace of one solve as `(iteration, lambda, F)` rows.
pub fn emit_trace(report: &SolveReport, path: &Path) -> Result<(), HarnessError> {
    write_file(path, &trace_csv(&report.lambda_trace, &report.f_trace))
}
