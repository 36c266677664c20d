//! SEE maximization when only the eavesdropper's channel covariance is known.
//!
//! For a rank-one `Q`, `h_eᴴQh_e` with `h_e ~ CN(0, G_e)` is exponential with
//! mean `tr(G_e·Q)`, so each outage constraint has an exact linear equivalent
//! and the SEE outage turns into a log penalty in `tr(G_e·Q)`.

use crate::channel::{covariance_factor, empirical_outage, rng_from_seed, OutageEvent};
use crate::conic::Sense;
use crate::dinkelbach::{dinkelbach, linearize_log_penalty, AlgoError, DcModel, DinkelbachConfig, LinearConstraint, Linearization};
use crate::model::{ChannelSet, HermitianMatrix, ModelError, OutageCheck, OutageSpec, SolveReport, Status, SystemParams};

/// Monte Carlo draws used to fill [`SolveReport::outage`].
pub const REPORT_OUTAGE_SAMPLES: usize = 10_000;
const REPORT_OUTAGE_SEED: u64 = 0x5EE0_0017;

/// Deterministic equivalents of the three outage constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicOutage {
    /// `1 + h_sᴴQh_s/σ_su² ≥ rate_gain + rate_slope·tr(G_e·Q)`.
    pub rate_gain: f64,
    pub rate_slope: f64,
    /// `tr(G_e·Q) ≥ harvest_floor`.
    pub harvest_floor: f64,
    /// `c_α = −ln α/σ_er²`; the surrogate eavesdropper rate is `log2(1 + c_α·tr(G_e·Q))`.
    pub see_penalty: f64,
    pub g_e: HermitianMatrix,
}

impl DeterministicOutage {
    pub fn constraints(&self, ch: &ChannelSet, params: &SystemParams) -> Vec<LinearConstraint> {
        let n = ch.n_t();
        let hs = HermitianMatrix::outer(&ch.h_s).scale(1.0 / params.sigma_su_sq);
        vec![
            LinearConstraint {
                name: "rate_outage",
                coeff: hs.add(&self.g_e.scale(-self.rate_slope)),
                constant: 1.0 - self.rate_gain,
                sense: Sense::Ge,
            },
            LinearConstraint { name: "harvest_outage", coeff: self.g_e.clone(), constant: -self.harvest_floor, sense: Sense::Ge },
            LinearConstraint { name: "leakage", coeff: HermitianMatrix::outer(&ch.h_p), constant: -params.p_f, sense: Sense::Le },
            LinearConstraint { name: "power", coeff: HermitianMatrix::identity(n), constant: -params.p_tx, sense: Sense::Le },
        ]
    }
}

pub fn outage_to_deterministic(params: &SystemParams, g_e: &HermitianMatrix, spec: &OutageSpec) -> Result<DeterministicOutage, ModelError> {
    spec.validate()?;
    params.validate()?;
    let f = covariance_factor(g_e);
    let g_e = HermitianMatrix::symmetrized(&f * f.adjoint());
    let rate_gain = 2f64.powf(params.r_d);
    Ok(DeterministicOutage {
        rate_gain,
        rate_slope: -rate_gain * spec.beta.ln() / params.sigma_er_sq,
        harvest_floor: params.omega_s / (params.zeta_eh * -(1.0 - spec.gamma).ln()),
        see_penalty: -spec.alpha.ln() / params.sigma_er_sq,
        g_e,
    })
}

/// Tangent of `log2(1 − tr(G_e·Q)·ln α/σ²)` at `Q^k`.
pub fn dc_linearize_statistical(q_k: &HermitianMatrix, g_e: &HermitianMatrix, sigma_er_sq: f64, alpha: f64) -> Result<Linearization, ModelError> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(ModelError::InvalidParameter { name: "alpha", reason: format!("must lie in (0, 0.5), got {alpha}") });
    }
    linearize_log_penalty(&g_e.scale(-alpha.ln() / sigma_er_sq), q_k)
}

pub fn statistical_model(ch: &ChannelSet, params: &SystemParams, spec: &OutageSpec) -> Result<DcModel, ModelError> {
    if ch.n_t() != params.n_t {
        return Err(ModelError::DimensionMismatch { expected: params.n_t, found: ch.n_t() });
    }
    let g_e = ch.g_e.as_ref().ok_or(ModelError::InvalidParameter { name: "g_e", reason: "statistical regime needs a covariance".into() })?;
    let det = outage_to_deterministic(params, g_e, spec)?;
    Ok(DcModel {
        h_s: ch.h_s.clone(),
        sigma_su_sq: params.sigma_su_sq,
        penalty: det.g_e.scale(det.see_penalty),
        constraints: det.constraints(ch, params),
        p_c: params.p_c,
        xi: params.xi,
    })
}

/// Monte Carlo frequencies of the rate and harvesting outage events at `q`.
pub fn check_outage(q: &HermitianMatrix, ch: &ChannelSet, params: &SystemParams, n_samples: usize, seed: u64) -> Result<OutageCheck, ModelError> {
    let g_e = ch.g_e.as_ref().ok_or(ModelError::InvalidParameter { name: "g_e", reason: "statistical regime needs a covariance".into() })?;
    let mut rng = rng_from_seed(seed);
    let rate_outage = empirical_outage(q, g_e, &ch.h_s, params, OutageEvent::RateBelow(params.r_d), n_samples, &mut rng)?;
    let harvest_outage = empirical_outage(q, g_e, &ch.h_s, params, OutageEvent::HarvestBelow(params.omega_s), n_samples, &mut rng)?;
    Ok(OutageCheck { rate_outage, harvest_outage, samples: n_samples })
}

/// The reported SEE and secrecy rate are the surrogate values the optimizer maximizes;
/// `outage` carries a Monte Carlo check of the returned covariance.
pub fn maximize_see_statistical(ch: &ChannelSet, params: &SystemParams, spec: &OutageSpec, cfg: &DinkelbachConfig) -> Result<SolveReport, AlgoError> {
    cfg.validate()?;
    let model = statistical_model(ch, params, spec)?;
    let mut report = dinkelbach(&model, cfg);
    if report.status != Status::Infeasible {
        report.outage = Some(check_outage(&report.q_cov, ch, params, REPORT_OUTAGE_SAMPLES, REPORT_OUTAGE_SEED)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_scenario, ChannelGenConfig, ScenarioRegime};
    use approx::assert_abs_diff_eq;

    fn scenario(seed: u64, omega_s: f64) -> (ChannelSet, SystemParams) {
        let p = SystemParams { omega_s, ..SystemParams::default() };
        let ch = make_scenario(&p, ScenarioRegime::Statistical { a_sq: 0.1 }, &ChannelGenConfig { seed, ..ChannelGenConfig::default() }).unwrap();
        (ch, p)
    }

    #[test]
    fn harvest_floor_uses_log_of_complement() {
        let oracle_ln = (0.9f64).ln();
        assert_abs_diff_eq!(oracle_ln, -0.105361, epsilon = 1e-6);
        let p = SystemParams { omega_s: 0.2, zeta_eh: 0.5, ..SystemParams::default() };
        let det = outage_to_deterministic(&p, &HermitianMatrix::identity(3), &OutageSpec::default()).unwrap();
        assert_abs_diff_eq!(det.harvest_floor, 0.2 / (0.5 * 0.105361), epsilon = 1e-4);
    }

    #[test]
    fn half_beta_rate_bound() {
        let p = SystemParams { r_d: 1.0, ..SystemParams::default() };
        let spec = OutageSpec { alpha: 0.1, beta: 0.499_999_999, gamma: 0.1 };
        let det = outage_to_deterministic(&p, &HermitianMatrix::identity(3), &spec).unwrap();
        assert_abs_diff_eq!(det.rate_slope / det.rate_gain, 0.693147, epsilon = 1e-6);
    }

    #[test]
    fn statistical_linearization_from_zero() {
        let g = HermitianMatrix::from_real_diagonal(&[0.1, 0.3]);
        let lin = dc_linearize_statistical(&HermitianMatrix::zeros(2), &g, 1.0, 0.1).unwrap();
        assert_abs_diff_eq!(lin.constant, 0.0);
        let expected = g.scale(-(0.1f64).ln() / std::f64::consts::LN_2);
        assert!((lin.slope.as_matrix() - expected.as_matrix()).norm() < 1e-14);
    }

    #[test]
    fn statistical_linearization_slope_matches_finite_differences() {
        let g = HermitianMatrix::from_real_diagonal(&[0.1, 0.3, 0.2]);
        let q_k = HermitianMatrix::from_real_diagonal(&[2.0, 0.5, 1.0]);
        let (sigma, alpha) = (1.0, 0.1);
        let lin = dc_linearize_statistical(&q_k, &g, sigma, alpha).unwrap();
        assert_abs_diff_eq!(lin.eval(&q_k).unwrap(), (1.0 - g.inner(&q_k).unwrap() * alpha.ln() / sigma).log2(), epsilon = 1e-14);
        let dir = HermitianMatrix::from_real_diagonal(&[1.0, -0.5, 0.3]);
        let f = |t: f64| (1.0 - g.inner(&q_k.add(&dir.scale(t))).unwrap() * alpha.ln() / sigma).log2();
        let step = 1e-5;
        assert_abs_diff_eq!((f(step) - f(-step)) / (2.0 * step), lin.slope.inner(&dir).unwrap(), epsilon = 1e-6);
    }

    #[test]
    fn rejects_alpha_outside_range() {
        assert!(dc_linearize_statistical(&HermitianMatrix::zeros(1), &HermitianMatrix::identity(1), 1.0, 0.6).is_err());
        let p = SystemParams::default();
        let bad = OutageSpec { alpha: 0.5, ..OutageSpec::default() };
        assert!(outage_to_deterministic(&p, &HermitianMatrix::identity(3), &bad).is_err());
    }

    #[test]
    fn default_outage_setup_converges() {
        let (ch, p) = scenario(11, 0.5);
        let rep = maximize_see_statistical(&ch, &p, &OutageSpec::default(), &DinkelbachConfig::default()).unwrap();
        assert_eq!(rep.status, Status::Optimal);
        assert!(rep.residual <= 1e-3);
        assert!(rep.rank_ratio <= 1e-6);
        let out = rep.outage.unwrap();
        assert!(out.rate_outage <= 0.1 + 0.02 && out.harvest_outage <= 0.1 + 0.02, "{out:?}");
    }

    #[test]
    fn covariance_orthogonal_to_every_feasible_q_is_infeasible() {
        let (mut ch, p) = scenario(12, 0.5);
        ch.g_e = Some(HermitianMatrix::zeros(3));
        let rep = maximize_see_statistical(&ch, &p, &OutageSpec::default(), &DinkelbachConfig::default()).unwrap();
        assert_eq!(rep.status, Status::Infeasible);
    }

    #[test]
    fn missing_covariance_is_an_error() {
        let p = SystemParams::default();
        let ch = make_scenario(&p, ScenarioRegime::Perfect, &ChannelGenConfig::default()).unwrap();
        assert!(maximize_see_statistical(&ch, &p, &OutageSpec::default(), &DinkelbachConfig::default()).is_err());
    }
}
