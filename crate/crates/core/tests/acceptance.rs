//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any fails. Pass criterion numbers as arguments to run a subset.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;

use see_opt::baselines::{solve_scheme, Regime, Scheme};
use see_opt::channel::{empirical_outage, make_scenario, rng_from_seed, sample_cn_with_cov, sample_ellipsoid_perturbation, ChannelGenConfig, OutageEvent, PerturbationMode};
use see_opt::dinkelbach::{AlgoError, DinkelbachConfig};
use see_opt::harness::{run_experiment, ExperimentConfig, PointSetup, RowStatus};
use see_opt::model::{harvested_power, interference_leakage, secrecy_rate, ChannelSet, SolveReport, Status, RANK_ONE_TOL};
use see_opt::oracle::{grid_search_see, relaxed_see_upper_bound, OracleError};
use see_opt::robust::worst_case_check;

type Outcome = Arc<Result<SolveReport, AlgoError>>;

/// One seeded instance under one scheme and starting λ.
#[derive(Clone)]
struct Job {
    setup: PointSetup,
    seed: u64,
    scheme: Scheme,
    lambda0: f64,
}

impl Job {
    fn see_max(setup: &PointSetup, seed: u64) -> Self {
        Self { setup: setup.clone(), seed, scheme: Scheme::SeeMax, lambda0: 0.0 }
    }

    fn key(&self) -> String {
        let s = &self.setup;
        format!("{:?}|{:?}|{:?}|{:?}|{}|{:?}|{}", s.params, s.regime, s.scenario, s.channel, self.seed, self.scheme, self.lambda0)
    }

    fn channels(&self) -> ChannelSet {
        make_scenario(&self.setup.params, self.setup.scenario, &ChannelGenConfig { seed: self.seed, ..self.setup.channel }).expect("valid scenario")
    }
}

/// Memoized solver shared by every criterion.
struct Lab {
    cache: Mutex<HashMap<String, Outcome>>,
}

impl Lab {
    fn new() -> Self {
        Self { cache: Mutex::new(HashMap::new()) }
    }

    fn solve_all(&self, jobs: &[Job]) -> Vec<Outcome> {
        jobs.par_iter()
            .map(|job| {
                let key = job.key();
                if let Some(hit) = self.cache.lock().unwrap().get(&key) {
                    return hit.clone();
                }
                let cfg = DinkelbachConfig { lambda0: job.lambda0, ..DinkelbachConfig::default() };
                let out = Arc::new(solve_scheme(job.scheme, job.setup.regime, &job.channels(), &job.setup.params, &cfg));
                self.cache.lock().unwrap().insert(key, out.clone());
                out
            })
            .collect()
    }

    fn solve(&self, job: &Job) -> Outcome {
        self.solve_all(std::slice::from_ref(job)).pop().unwrap()
    }
}

/// Experiment with default parameters for `regime`, swept over `sweep`.
fn experiment(regime: &str, sweep: &str, values: &[f64], seed: u64) -> ExperimentConfig {
    let values: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    let text = format!("regime = \"{regime}\"\nsweep = \"{sweep}\"\nvalues = [{}]\ntrials = 50\nseed = {seed}\n", values.join(", "));
    ExperimentConfig::from_toml(&text).expect("valid experiment")
}

const BASE_SEED: u64 = 2024;
const REGIMES: [&str; 3] = ["perfect", "statistical", "robust"];
const DEFAULT_RD: f64 = 0.5;

fn base(regime: &str) -> (ExperimentConfig, PointSetup) {
    let cfg = experiment(regime, "r_d", &[DEFAULT_RD], BASE_SEED);
    let setup = cfg.point(DEFAULT_RD).unwrap();
    (cfg, setup)
}

fn is_feasible(out: &Outcome) -> bool {
    matches!(out.as_ref(), Ok(r) if r.status != Status::Infeasible)
}

fn mean_see(outs: &[Outcome]) -> Result<f64, String> {
    let mut sum = 0.0;
    for o in outs {
        match o.as_ref() {
            Ok(r) => sum += r.see,
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(sum / outs.len() as f64)
}

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn convergence(_: &Lab) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["perfect_convergence", "statistical_convergence", "robust_convergence"] {
        let cfg = ExperimentConfig::from_path(&configs_dir().join(format!("{name}.toml"))).unwrap();
        let start = Instant::now();
        let table = run_experiment(&cfg, 0).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let ok = table.rows.iter().filter(|r| {
            r.status == RowStatus::Solved(Status::Optimal) && r.outer_iters <= 20 && r.f_trace.last().is_some_and(|f| f.abs() <= 1e-3)
        });
        let n_ok = ok.count();
        let max_iters = table.rows.iter().map(|r| r.outer_iters).max().unwrap_or(0);
        pass &= n_ok == 5 && table.rows.len() == 5 && secs <= 60.0;
        let label = format!("{:?}", cfg.regime).to_lowercase();
        parts.push(format!("{label}: {n_ok}/5 converged, max {max_iters} outer iterations, {secs:.1} s"));
    }
    Verdict::new(pass, parts.join("; "))
}

fn oracle_equivalence(lab: &Lab) -> Verdict {
    let cfg = experiment("perfect", "n_t", &[2.0], BASE_SEED + 2);
    let setup = cfg.point(2.0).unwrap();
    let (mut checked, mut trial, mut failures) = (0, 0, Vec::new());
    let (mut worst_gap, mut worst_excess) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    while checked < 20 && trial < 100 {
        let job = Job::see_max(&setup, cfg.trial_seed(trial));
        trial += 1;
        let ch = job.channels();
        let oracle = grid_search_see(&ch, &setup.params, 180, 200);
        let algo = lab.solve(&job);
        match (oracle, algo.as_ref()) {
            (Err(OracleError::NoFeasiblePoint), Ok(r)) if r.status == Status::Infeasible => continue,
            (Ok((_, oracle_see)), Ok(r)) if r.status != Status::Infeasible => {
                let bound = relaxed_see_upper_bound(&ch, &setup.params, 32, &Default::default());
                checked += 1;
                let gap = (oracle_see - r.see) / oracle_see;
                worst_gap = worst_gap.max(gap);
                match bound {
                    Ok(b) => {
                        worst_excess = worst_excess.max(r.see - b);
                        if gap > 0.01 || r.see > b + 1e-6 {
                            failures.push(format!("seed {}: algorithm {:.6}, oracle {oracle_see:.6}, bound {b:.6}", job.seed, r.see));
                        }
                    }
                    Err(e) => failures.push(format!("seed {}: bound failed: {e}", job.seed)),
                }
            }
            (o, a) => {
                checked += 1;
                failures.push(format!("seed {}: oracle {:?} vs algorithm {:?}", job.seed, o.map(|x| x.1), a.as_ref().map(|r| r.status)));
            }
        }
    }
    let pass = checked == 20 && failures.is_empty();
    let mut detail = format!("{checked} instances, worst shortfall vs oracle {:.3}%, worst excess over bound {worst_excess:.2e}", 100.0 * worst_gap);
    if !failures.is_empty() {
        detail += &format!("; failures: {}", failures.join(", "));
    }
    Verdict::new(pass, detail)
}

/// First `count` feasible base instances of `regime`, with the number of trials drawn.
fn feasible_base(lab: &Lab, regime: &str, count: usize) -> (Vec<(Job, Outcome)>, usize) {
    let (cfg, setup) = base(regime);
    let mut found = Vec::new();
    let mut trial = 0;
    while found.len() < count && trial < 4 * count {
        let batch: Vec<Job> = (trial..trial + count - found.len()).map(|t| Job::see_max(&setup, cfg.trial_seed(t))).collect();
        trial += batch.len();
        let outs = lab.solve_all(&batch);
        found.extend(batch.into_iter().zip(outs).filter(|(_, o)| is_feasible(o)));
    }
    (found, trial)
}

fn rank_one(lab: &Lab) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (regime, count) in [("perfect", 100), ("statistical", 100), ("robust", 50)] {
        let (found, _) = feasible_base(lab, regime, count);
        let mut bad = 0;
        let mut worst = 0.0f64;
        for (_, o) in &found {
            let r = o.as_ref().as_ref().unwrap();
            worst = worst.max(r.rank_ratio);
            if !(r.status == Status::Optimal && r.rank_ratio <= RANK_ONE_TOL) {
                bad += 1;
            }
        }
        pass &= found.len() == count && bad == 0;
        parts.push(format!("{regime}: {bad} of {} above tolerance, max ratio {worst:.2e}", found.len()));
    }
    Verdict::new(pass, parts.join("; "))
}

fn dinkelbach_properties(lab: &Lab) -> Verdict {
    let mut failures = Vec::new();
    let (mut worst_drop, mut worst_gap, mut worst_restart) = (0.0f64, 0.0f64, 0.0f64);
    for regime in REGIMES {
        let (cfg, setup) = base(regime);
        for trial in 0..5 {
            let seed = cfg.trial_seed(trial);
            let jobs: Vec<Job> = [0.0, 0.5, 2.0].iter().map(|&l| Job { lambda0: l, ..Job::see_max(&setup, seed) }).collect();
            let outs = lab.solve_all(&jobs);
            let reports: Vec<&SolveReport> = match outs.iter().map(|o| o.as_ref().as_ref()).collect::<Result<Vec<_>, _>>() {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("{regime} seed {seed}: {e}"));
                    continue;
                }
            };
            if reports[0].status == Status::Infeasible {
                if reports.iter().any(|r| r.status != Status::Infeasible) {
                    failures.push(format!("{regime} seed {seed}: restarts disagree on feasibility"));
                }
                continue;
            }
            let first = reports[0];
            let drop = first.lambda_trace.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
            worst_drop = worst_drop.max(drop);
            let lambda_star = *first.lambda_trace.last().unwrap();
            let gap = (first.see - lambda_star).abs();
            worst_gap = worst_gap.max(gap);
            let restart = reports.iter().map(|r| (r.see - first.see).abs()).fold(0.0, f64::max);
            worst_restart = worst_restart.max(restart);
            if drop > 0.0 || gap > 1e-3 || restart > 1e-3 {
                failures.push(format!("{regime} seed {seed}: drop {drop:.2e}, gap {gap:.2e}, restart {restart:.2e}"));
            }
        }
    }
    let mut detail = format!("largest lambda decrease {worst_drop:.2e}, largest |SEE - lambda*| {worst_gap:.2e}, largest restart spread {worst_restart:.2e}");
    if !failures.is_empty() {
        detail += &format!("; failures: {}", failures.join(", "));
    }
    Verdict::new(failures.is_empty(), detail)
}

/// Mean SEE over 50 trials at each sweep value.
fn sweep_means(lab: &Lab, cfg: &ExperimentConfig) -> Result<Vec<f64>, String> {
    let mut jobs = Vec::new();
    for &v in &cfg.values {
        let setup = cfg.point(v).unwrap();
        jobs.extend((0..cfg.trials).map(|t| Job::see_max(&setup, cfg.trial_seed(t))));
    }
    let outs = lab.solve_all(&jobs);
    outs.chunks(cfg.trials).map(mean_see).collect()
}

fn fmt_means(m: &[f64]) -> String {
    m.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
}

fn trends(lab: &Lab) -> Verdict {
    const TOL: f64 = 1e-3;
    let mut failures = Vec::new();
    let mut check = |name: String, means: Result<Vec<f64>, String>, increasing: bool| match means {
        Ok(m) => {
            let ok = m.windows(2).all(|w| if increasing { w[1] >= w[0] - TOL } else { w[1] <= w[0] + TOL });
            if !ok {
                failures.push(format!("{name} [{}]", fmt_means(&m)));
            }
            format!("{name} [{}]", fmt_means(&m))
        }
        Err(e) => {
            failures.push(format!("{name}: {e}"));
            format!("{name}: error")
        }
    };
    let mut lines = Vec::new();
    for regime in REGIMES {
        let seed = BASE_SEED;
        lines.push(check(format!("{regime} r_d"), sweep_means(lab, &experiment(regime, "r_d", &[0.5, 1.0, 1.5], seed)), false));
        lines.push(check(format!("{regime} omega_s"), sweep_means(lab, &experiment(regime, "omega_s", &[-20.0, -10.0], seed)), false));
        lines.push(check(format!("{regime} n_t"), sweep_means(lab, &experiment(regime, "n_t", &[2.0, 3.0, 4.0], seed)), true));
        lines.push(check(format!("{regime} zeta_eh"), sweep_means(lab, &experiment(regime, "zeta_eh", &[0.1, 0.5, 0.9], seed)), true));
    }
    lines.push(check("robust eps".into(), sweep_means(lab, &experiment("robust", "eps", &[0.0, 0.05, 0.1], BASE_SEED)), false));
    let base_mean = |regime: &str| sweep_means(lab, &experiment(regime, "r_d", &[DEFAULT_RD], BASE_SEED)).map(|m| m[0]);
    for other in ["statistical", "robust"] {
        let pair = base_mean("perfect").and_then(|p| base_mean(other).map(|o| vec![p, o]));
        lines.push(check(format!("perfect vs {other}"), pair, false));
    }
    let mut detail = lines.join("; ");
    if !failures.is_empty() {
        detail = format!("violated: {}; all: {detail}", failures.join(", "));
    }
    Verdict::new(failures.is_empty(), detail)
}

fn scheme_dominance(lab: &Lab) -> Verdict {
    let grid = [0.5, 1.0, 1.5];
    let mut failures = Vec::new();
    let (mut worst_margin, mut worst_spread, mut compared) = (f64::INFINITY, 0.0f64, 0);
    for regime in REGIMES {
        let cfg = experiment(regime, "r_d", &grid, BASE_SEED);
        for trial in 0..10 {
            let seed = cfg.trial_seed(trial);
            let mut rate_max_see = Vec::new();
            for &rd in &grid {
                let setup = cfg.point(rd).unwrap();
                let jobs: Vec<Job> = [Scheme::SeeMax, Scheme::RateMax, Scheme::PowerMin].iter().map(|&s| Job { scheme: s, ..Job::see_max(&setup, seed) }).collect();
                let outs = lab.solve_all(&jobs);
                let reports: Vec<&SolveReport> = match outs.iter().map(|o| o.as_ref().as_ref()).collect::<Result<Vec<_>, _>>() {
                    Ok(r) => r,
                    Err(e) => {
                        failures.push(format!("{regime} seed {seed} r_d {rd}: {e}"));
                        continue;
                    }
                };
                let feasible: Vec<bool> = reports.iter().map(|r| r.status != Status::Infeasible).collect();
                if feasible.iter().any(|&f| f != feasible[0]) {
                    failures.push(format!("{regime} seed {seed} r_d {rd}: schemes disagree on feasibility"));
                    continue;
                }
                if !feasible[0] {
                    continue;
                }
                compared += 1;
                let margin = reports[0].see - reports[1].see.max(reports[2].see);
                worst_margin = worst_margin.min(margin);
                if margin < -1e-6 {
                    failures.push(format!("{regime} seed {seed} r_d {rd}: margin {margin:.2e}"));
                }
                rate_max_see.push(reports[1].see);
            }
            if let (Some(lo), Some(hi)) = (rate_max_see.iter().copied().reduce(f64::min), rate_max_see.iter().copied().reduce(f64::max)) {
                worst_spread = worst_spread.max(hi - lo);
                if hi - lo > 1e-3 {
                    failures.push(format!("{regime} seed {seed}: rate-max SEE spread {:.2e}", hi - lo));
                }
            }
        }
    }
    let mut detail = format!("{compared} feasible points, smallest see-max margin {worst_margin:.2e}, largest rate-max spread {worst_spread:.2e}");
    if !failures.is_empty() {
        detail += &format!("; failures: {}", failures.join(", "));
    }
    Verdict::new(failures.is_empty(), detail)
}

fn power_budget(lab: &Lab) -> Verdict {
    let mut failures = Vec::new();
    let (mut worst, mut compared) = (0.0f64, 0);
    for regime in REGIMES {
        let cfg = experiment(regime, "p_tx", &[20.0, 10.0], BASE_SEED);
        let (high, low) = (cfg.point(20.0).unwrap(), cfg.point(10.0).unwrap());
        for trial in 0..10 {
            let seed = cfg.trial_seed(trial);
            let outs = lab.solve_all(&[Job::see_max(&high, seed), Job::see_max(&low, seed)]);
            match (outs[0].as_ref(), outs[1].as_ref()) {
                (Ok(h), Ok(l)) => {
                    if h.status == Status::Infeasible || h.tx_power >= 10.0 {
                        continue;
                    }
                    compared += 1;
                    let diff = (h.see - l.see).abs();
                    worst = worst.max(diff);
                    if diff > 1e-3 {
                        failures.push(format!("{regime} seed {seed}: {:.6} vs {:.6}", h.see, l.see));
                    }
                }
                (h, l) => failures.push(format!("{regime} seed {seed}: {:?} / {:?}", h.as_ref().err(), l.as_ref().err())),
            }
        }
    }
    let mut detail = format!("{compared} instances with tr Q < 10 W, largest SEE change {worst:.2e}");
    if !failures.is_empty() {
        detail += &format!("; failures: {}", failures.join(", "));
    }
    Verdict::new(failures.is_empty() && compared > 0, detail)
}

fn outage_validity(lab: &Lab) -> Verdict {
    const SAMPLES: usize = 100_000;
    let (found, _) = feasible_base(lab, "statistical", 100);
    let (_, setup) = base("statistical");
    let spec = match setup.regime {
        Regime::Statistical(s) => s,
        _ => unreachable!(),
    };
    let p = &setup.params;
    let (mut worst_rate, mut worst_harvest, mut worst_mean) = (0.0f64, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for (job, out) in &found {
        let r = out.as_ref().as_ref().unwrap();
        let ch = job.channels();
        let g_e = ch.g_e.as_ref().unwrap();
        let mut rng = rng_from_seed(job.seed ^ 0xACCE);
        let rate = empirical_outage(&r.q_cov, g_e, &ch.h_s, p, OutageEvent::RateBelow(p.r_d), SAMPLES, &mut rng).unwrap();
        let harvest = empirical_outage(&r.q_cov, g_e, &ch.h_s, p, OutageEvent::HarvestBelow(p.omega_s), SAMPLES, &mut rng).unwrap();
        let mean = (0..SAMPLES).map(|_| r.q_cov.quad_form(&sample_cn_with_cov(g_e, &mut rng)).unwrap()).sum::<f64>() / SAMPLES as f64;
        let expected = g_e.inner(&r.q_cov).unwrap();
        let mean_err = (mean - expected).abs() / expected;
        worst_rate = worst_rate.max(rate);
        worst_harvest = worst_harvest.max(harvest);
        worst_mean = worst_mean.max(mean_err);
        if rate > spec.beta + 0.02 || harvest > spec.gamma + 0.02 || mean_err > 0.02 {
            failures.push(format!("seed {}: rate {rate:.4}, harvest {harvest:.4}, mean error {mean_err:.4}", job.seed));
        }
    }
    let mut detail = format!(
        "{} instances, max rate outage {worst_rate:.4}, max harvest outage {worst_harvest:.4}, max mean error {:.2}%",
        found.len(),
        100.0 * worst_mean
    );
    if !failures.is_empty() {
        detail += &format!("; failures: {}", failures.join(", "));
    }
    Verdict::new(failures.is_empty() && found.len() == 100, detail)
}

fn robust_guarantee(lab: &Lab) -> Verdict {
    const SAMPLES: usize = 10_000;
    const TOL: f64 = 1e-6;
    let (found, _) = feasible_base(lab, "robust", 50);
    let (_, setup) = base("robust");
    let p = &setup.params;
    let mut failures = Vec::new();
    let (mut worst_check, mut worst_sample) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (job, out) in &found {
        let r = out.as_ref().as_ref().unwrap();
        let ch = job.channels();
        let b = ch.bounds.unwrap();
        let wc = worst_case_check(&r.q_cov, &ch, p);
        let check = (p.r_d - wc.secrecy_rate).max(p.omega_s - wc.harvested_power).max(wc.leakage - p.p_f);
        worst_check = worst_check.max(check);
        if check > TOL {
            failures.push(format!("seed {}: worst-case violation {check:.2e}", job.seed));
        }
        let mut rng = rng_from_seed(job.seed ^ 0xE111);
        let mut violations = 0;
        for i in 0..SAMPLES {
            let mode = if i % 2 == 0 { PerturbationMode::Interior } else { PerturbationMode::Boundary };
            let h_s = sample_ellipsoid_perturbation(&ch.h_s, b.eps_s, mode, &mut rng);
            let h_p = sample_ellipsoid_perturbation(&ch.h_p, b.eps_p, mode, &mut rng);
            let h_e = sample_ellipsoid_perturbation(&ch.h_e, b.eps_e, mode, &mut rng);
            let perturbed = ChannelSet::new(h_s, h_p.clone(), h_e.clone()).unwrap();
            let v = (p.r_d - secrecy_rate(&r.q_cov, &perturbed, p).unwrap())
                .max(p.omega_s - harvested_power(&r.q_cov, &h_e, p.zeta_eh).unwrap())
                .max(interference_leakage(&r.q_cov, &h_p).unwrap() - p.p_f);
            worst_sample = worst_sample.max(v);
            if v > TOL {
                violations += 1;
            }
        }
        if violations > 0 {
            failures.push(format!("seed {}: {violations} sampled violations", job.seed));
        }
    }
    let mut detail = format!(
        "{} instances, largest worst-case violation {worst_check:.2e}, largest sampled violation {worst_sample:.2e}",
        found.len()
    );
    if !failures.is_empty() {
        detail += &format!("; failures: {}", failures.join(", "));
    }
    Verdict::new(failures.is_empty() && found.len() == 50, detail)
}

fn run_cli(args: &[&str]) -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_see-opt")).args(args).output().expect("binary runs");
    (out.stdout, out.status.code())
}

fn determinism(_: &Lab) -> Verdict {
    let fig2 = configs_dir().join("perfect_convergence.toml");
    let fig2 = fig2.to_str().unwrap();
    let invocations: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (vec!["run", "--config", fig2, "--workers", "1"], vec!["run", "--config", fig2, "--workers", "4"]),
        (vec!["solve", "--regime", "perfect", "--seed", "7"], vec!["solve", "--regime", "perfect", "--seed", "7"]),
        (vec!["solve", "--regime", "statistical", "--seed", "7"], vec!["solve", "--regime", "statistical", "--seed", "7"]),
        (vec!["solve", "--regime", "robust", "--seed", "7"], vec!["solve", "--regime", "robust", "--seed", "7"]),
        (vec!["solve", "--regime", "perfect", "--seed", "7", "--scheme", "rate-max"], vec!["solve", "--regime", "perfect", "--seed", "7", "--scheme", "rate-max"]),
        (vec!["oracle", "--seed", "3", "--res", "24"], vec!["oracle", "--seed", "3", "--res", "24"]),
    ];
    let mut failures = Vec::new();
    for (a, b) in &invocations {
        let (out_a, code_a) = run_cli(a);
        let (out_b, code_b) = run_cli(b);
        if out_a.is_empty() || out_a != out_b || code_a != code_b {
            failures.push(a.join(" "));
        }
    }
    let mut detail = format!("{} invocation pairs compared", invocations.len());
    if !failures.is_empty() {
        detail += &format!("; differing: {}", failures.join(", "));
    }
    Verdict::new(failures.is_empty(), detail)
}

type Criterion = (&'static str, fn(&Lab) -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("convergence", convergence),
        ("oracle equivalence", oracle_equivalence),
        ("rank-one certification", rank_one),
        ("dinkelbach properties", dinkelbach_properties),
        ("trend suite", trends),
        ("scheme dominance", scheme_dominance),
        ("power-budget insensitivity", power_budget),
        ("statistical outage validity", outage_validity),
        ("robust guarantee", robust_guarantee),
        ("determinism", determinism),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let lab = Lab::new();
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let v = run(&lab);
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {name}: {tag} ({}) [{:.1} s]", v.detail, start.elapsed().as_secs_f64());
        if !v.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
