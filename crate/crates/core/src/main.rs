use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use see_opt::baselines::Scheme;
use see_opt::channel::{make_scenario, ChannelGenConfig};
use see_opt::harness::{emit_csv, run_trial, trace_csv, ChannelConfig, ExperimentConfig, HarnessError, ParamsConfig, RegimeName, ResultTable, Row, SchemeName, SweepVar};
use see_opt::oracle::grid_search_see;
use see_opt::perfect::maximize_see_perfect;

const EXIT_CONFIG: u8 = 2;
const EXIT_ALL_INFEASIBLE: u8 = 3;
const EXIT_SOLVER_FAILURE: u8 = 4;

#[derive(Parser)]
#[command(name = "see-opt", version, about = "Secrecy energy efficiency beamforming experiments")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write one convergence trace per trial into this directory.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Solve a single seeded instance.
    Solve {
        #[arg(long, value_enum)]
        regime: RegimeArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SchemeArg::SeeMax)]
        scheme: SchemeArg,
        #[command(flatten)]
        params: ParamArgs,
        /// Write the (iteration, lambda, F) trace to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Brute-force rank-one search on a seeded perfect-CSI instance.
    Oracle {
        #[arg(long)]
        seed: u64,
        /// Points per angle.
        #[arg(long)]
        res: usize,
        #[arg(long, default_value_t = 200)]
        power_res: usize,
        /// `--n-t` defaults to 2 here.
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Perfect,
    Statistical,
    Robust,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    SeeMax,
    RateMax,
    PowerMin,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    n_t: Option<usize>,
    /// Target secrecy rate (bits/s/Hz).
    #[arg(long)]
    r_d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p_tx_dbw: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega_s_dbw: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p_f_dbw: Option<f64>,
    #[arg(long)]
    zeta_eh: Option<f64>,
    /// Eavesdropper channel variance (statistical regime).
    #[arg(long)]
    a_sq: Option<f64>,
    /// Common error radius (robust regime).
    #[arg(long)]
    eps: Option<f64>,
}

impl ParamArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        let p = &mut cfg.params;
        p.n_t = self.n_t.unwrap_or(p.n_t);
        p.r_d = self.r_d.unwrap_or(p.r_d);
        p.p_tx_dbw = self.p_tx_dbw.unwrap_or(p.p_tx_dbw);
        p.omega_s_dbw = self.omega_s_dbw.unwrap_or(p.omega_s_dbw);
        p.p_f_dbw = self.p_f_dbw.unwrap_or(p.p_f_dbw);
        p.zeta_eh = self.zeta_eh.unwrap_or(p.zeta_eh);
        cfg.channel.a_sq = self.a_sq.unwrap_or(cfg.channel.a_sq);
        cfg.channel.eps = self.eps.unwrap_or(cfg.channel.eps);
    }
}

/// Single-instance configuration: one trial, swept variable pinned at its configured value.
fn single_config(regime: RegimeName, scheme: SchemeName, seed: u64, params: &ParamArgs) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        regime,
        scheme,
        sweep: SweepVar::RD,
        values: vec![],
        trials: 1,
        seed,
        output: None,
        params: ParamsConfig::default(),
        channel: ChannelConfig::default(),
        outage: Default::default(),
        solver: Default::default(),
    };
    params.apply(&mut cfg);
    cfg.values = vec![cfg.params.r_d];
    cfg
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn table_exit(table: &ResultTable) -> ExitCode {
    if table.any_solver_failure() {
        ExitCode::from(EXIT_SOLVER_FAILURE)
    } else if table.all_infeasible() {
        ExitCode::from(EXIT_ALL_INFEASIBLE)
    } else {
        ExitCode::SUCCESS
    }
}

fn harness_exit(e: &HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        HarnessError::Io { .. } | HarnessError::Pool(_) => ExitCode::FAILURE,
        HarnessError::Parse(_) | HarnessError::Config { .. } => ExitCode::from(EXIT_CONFIG),
    }
}

fn run(cli: &Cli, config: &Path, trace_dir: Option<&Path>) -> Result<ExitCode, HarnessError> {
    let cfg = ExperimentConfig::from_path(config)?;
    let table = see_opt::harness::run_experiment(&cfg, cli.workers)?;
    match cli.out.as_deref().or(cfg.output.as_deref()) {
        Some(path) => emit_csv(&table, path)?,
        None => print!("{}", table.to_csv()),
    }
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_path_buf(), source })?;
        let index = |v: f64| cfg.values.iter().position(|x| x.to_bits() == v.to_bits()).unwrap_or(0);
        for r in &table.rows {
            let path = dir.join(format!("trace_{}_{}.csv", index(r.sweep_value), r.trial));
            write_output(Some(&path), &trace_csv(&r.lambda_trace, &r.f_trace))?;
        }
    }
    for p in table.summary() {
        eprintln!("sweep {:>10}: mean SEE {:.6} ({} of {} feasible)", p.sweep_value, p.mean_see, p.feasible, p.trials);
    }
    Ok(table_exit(&table))
}

fn solve(cli: &Cli, regime: RegimeArg, scheme: SchemeArg, seed: u64, params: &ParamArgs, trace: Option<&Path>) -> Result<ExitCode, HarnessError> {
    let regime = match regime {
        RegimeArg::Perfect => RegimeName::Perfect,
        RegimeArg::Statistical => RegimeName::Statistical,
        RegimeArg::Robust => RegimeName::Robust,
    };
    let scheme = match scheme {
        SchemeArg::SeeMax => SchemeName::SeeMax,
        SchemeArg::RateMax => SchemeName::RateMax,
        SchemeArg::PowerMin => SchemeName::PowerMin,
    };
    let cfg = single_config(regime, scheme, seed, params);
    cfg.validate()?;
    let setup = cfg.point(cfg.values[0])?;
    let outcome = run_trial(&setup, Scheme::from(scheme), &cfg.solver.to_dinkelbach(), seed);
    if let Err(e) = &outcome {
        eprintln!("solver: {e}");
    }
    let row = Row::from_outcome(cfg.values[0], 0, seed, outcome);
    if let Some(path) = trace {
        write_output(Some(path), &trace_csv(&row.lambda_trace, &row.f_trace))?;
    }
    let table = ResultTable { rows: vec![row] };
    write_output(cli.out.as_deref(), &table.to_csv())?;
    Ok(table_exit(&table))
}

fn oracle(cli: &Cli, seed: u64, res: usize, power_res: usize, params: &ParamArgs) -> Result<ExitCode, HarnessError> {
    let mut cfg = single_config(RegimeName::Perfect, SchemeName::SeeMax, seed, params);
    cfg.params.n_t = params.n_t.unwrap_or(2);
    cfg.validate()?;
    let setup = cfg.point(cfg.values[0])?;
    let ch = make_scenario(&setup.params, setup.scenario, &ChannelGenConfig { seed, ..setup.channel })
        .map_err(|e| HarnessError::Config { field: "params", reason: e.to_string() })?;
    let (text, code) = match grid_search_see(&ch, &setup.params, res, power_res) {
        Ok((beam, see)) => {
            let algo = maximize_see_perfect(&ch, &setup.params, &cfg.solver.to_dinkelbach()).map(|r| r.see).unwrap_or(f64::NAN);
            let coords: Vec<String> = beam.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect();
            (format!("seed,oracle_see,algorithm_see,beam\n{seed},{see},{algo},{}\n", coords.join(" ")), ExitCode::SUCCESS)
        }
        Err(see_opt::oracle::OracleError::NoFeasiblePoint) => (format!("seed,oracle_see,algorithm_see,beam\n{seed},0,0,\n"), ExitCode::from(EXIT_ALL_INFEASIBLE)),
        Err(e) => return Err(HarnessError::Config { field: "oracle", reason: e.to_string() }),
    };
    write_output(cli.out.as_deref(), &text)?;
    Ok(code)
}

fn dispatch(cli: &Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Run { config, trace_dir } => run(cli, config, trace_dir.as_deref()),
        Command::Solve { regime, seed, scheme, params, trace } => solve(cli, *regime, *scheme, *seed, params, trace.as_deref()),
        Command::Oracle { seed, res, power_res, params } => oracle(cli, *seed, *res, *power_res, params),
    };
    result.unwrap_or_else(|e| harness_exit(&e))
}

fn main() -> ExitCode {
    dispatch(&Cli::parse())
}
