//! Comparison schemes: transmit-power minimization and secrecy-rate maximization
//! under the same constraint sets as the SEE maximizers.

use crate::dinkelbach::{dc_inner_loop, solve_for_matrix, AlgoError, DcModel, DinkelbachConfig};
use crate::model::{ChannelSet, OutageSpec, SolveReport, Status, SystemParams};
use crate::perfect::{maximize_see_perfect, perfect_model};
use crate::robust::{compute_nu_min, maximize_see_robust, solve_inner_theta, worst_case_report};
use crate::statistical::{check_outage, maximize_see_statistical, statistical_model, REPORT_OUTAGE_SAMPLES};

const BASELINE_OUTAGE_SEED: u64 = 0x5EE0_00B5;

/// CSI assumption of an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Perfect,
    Statistical(OutageSpec),
    Robust,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    SeeMax,
    RateMax,
    PowerMin,
}

/// Run `scheme` under `regime`.
pub fn solve_scheme(scheme: Scheme, regime: Regime, ch: &ChannelSet, params: &SystemParams, cfg: &DinkelbachConfig) -> Result<SolveReport, AlgoError> {
    match scheme {
        Scheme::SeeMax => maximize_see(regime, ch, params, cfg),
        Scheme::RateMax => maximize_secrecy_rate(regime, ch, params, cfg),
        Scheme::PowerMin => minimize_power(regime, ch, params, cfg),
    }
}

pub fn maximize_see(regime: Regime, ch: &ChannelSet, params: &SystemParams, cfg: &DinkelbachConfig) -> Result<SolveReport, AlgoError> {
    match regime {
        Regime::Perfect => maximize_see_perfect(ch, params, cfg),
        Regime::Statistical(spec) => maximize_see_statistical(ch, params, &spec, cfg),
        Regime::Robust => maximize_see_robust(ch, params, cfg),
    }
}

fn linear_model(regime: Regime, ch: &ChannelSet, params: &SystemParams) -> Result<Option<DcModel>, AlgoError> {
    Ok(match regime {
        Regime::Perfect => Some(perfect_model(ch, params)?),
        Regime::Statistical(spec) => Some(statistical_model(ch, params, &spec)?),
        Regime::Robust => None,
    })
}

fn model_report(model: &DcModel, q: crate::model::HermitianMatrix, status: Status) -> Result<SolveReport, AlgoError> {
    let rate = model.rate(&q)?;
    let power = model.power(&q);
    Ok(SolveReport::from_covariance(q, rate, power, status))
}

fn with_outage(mut report: SolveReport, regime: Regime, ch: &ChannelSet, params: &SystemParams) -> Result<SolveReport, AlgoError> {
    if matches!(regime, Regime::Statistical(_)) && report.status != Status::Infeasible {
        report.outage = Some(check_outage(&report.q_cov, ch, params, REPORT_OUTAGE_SAMPLES, BASELINE_OUTAGE_SEED)?);
    }
    Ok(report)
}

/// Minimum `tr Q` meeting the regime's rate, harvesting and leakage constraints.
/// Every constraint is linear in `Q` (worst-case forms for the robust regime),
/// so this is one convex solve; `residual` is 0 at an optimum.
pub fn minimize_power(regime: Regime, ch: &ChannelSet, params: &SystemParams, cfg: &DinkelbachConfig) -> Result<SolveReport, AlgoError> {
    cfg.validate()?;
    let n = ch.n_t();
    let mut report = match linear_model(regime, ch, params)? {
        Some(model) => match solve_for_matrix(&model.feasibility_program(), &cfg.conic) {
            Ok(q) => model_report(&model, q, Status::Optimal)?,
            Err(AlgoError::Infeasible) => return Ok(SolveReport::infeasible(n)),
            Err(e) => return Err(e),
        },
        None => match compute_nu_min(ch, params, &cfg.conic) {
            Ok((_, q)) => worst_case_report(q, ch, params, Status::Optimal),
            Err(AlgoError::Infeasible) => return Ok(SolveReport::infeasible(n)),
            Err(e) => return Err(e),
        },
    };
    report.residual = 0.0;
    with_outage(report, regime, ch, params)
}

/// Maximum secrecy rate under the regime's constraints; the DC loop of the SEE
/// maximizer at `λ = 0`. `residual` is the last change of the true rate.
///
/// The rate is nearly flat along the power direction near its maximum, so the
/// single DC run gets the iteration budget of a whole Dinkelbach solve,
/// `max_outer·max_inner`; stopping earlier leaves an `R_d`-dependent iterate.
pub fn maximize_secrecy_rate(regime: Regime, ch: &ChannelSet, params: &SystemParams, cfg: &DinkelbachConfig) -> Result<SolveReport, AlgoError> {
    cfg.validate()?;
    let n = ch.n_t();
    let dc_cfg = DinkelbachConfig { max_inner: cfg.max_outer * cfg.max_inner, ..*cfg };
    let report = match linear_model(regime, ch, params)? {
        Some(model) if model.is_infeasible(&cfg.conic) => return Ok(SolveReport::infeasible(n)),
        Some(model) => match dc_inner_loop(&model, 0.0, &dc_cfg) {
            Ok(r) => {
                let status = if r.converged { Status::Optimal } else { Status::MaxIterations };
                let residual = match r.trace.as_slice() {
                    [.., a, b] => (b - a).abs(),
                    _ => f64::NAN,
                };
                let mut rep = model_report(&model, r.q, status)?;
                rep.inner_iters = vec![r.iters];
                rep.residual = residual;
                rep
            }
            Err(AlgoError::Infeasible) => return Ok(SolveReport::infeasible(n)),
            Err(e) => return Err(e),
        },
        None => {
            match solve_inner_theta(0.0, 0.0, ch, params, &cfg.conic) {
                Ok((_, sol)) => {
                    let mut rep = worst_case_report(sol.recovered_q, ch, params, Status::Optimal);
                    rep.inner_iters = vec![1];
                    rep.residual = 0.0;
                    rep
                }
                Err(AlgoError::Infeasible) => return Ok(SolveReport::infeasible(n)),
                Err(e) => return Err(e),
            }
        }
    };
    with_outage(report, regime, ch, params)
}
