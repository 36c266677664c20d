//! SEE maximization with perfect channel knowledge.

use crate::conic::{ConicProgram, Sense};
use crate::dinkelbach::{dc_inner_loop, dinkelbach, linearize_log_penalty, AlgoError, DcModel, DinkelbachConfig, LinearConstraint, Linearization};
use crate::model::{ChannelSet, CVector, HermitianMatrix, ModelError, SolveReport, SystemParams};

/// Tangent of `log2(1 + h_eᴴQh_e/σ²)` at `Q^k`.
pub fn dc_linearize_eavesdropper(q_k: &HermitianMatrix, h_e: &CVector, sigma_er_sq: f64) -> Result<Linearization, ModelError> {
    linearize_log_penalty(&HermitianMatrix::outer(h_e).scale(1.0 / sigma_er_sq), q_k)
}

/// Rate, harvesting, leakage and power constraints, all linear in `Q`.
pub fn perfect_constraints(ch: &ChannelSet, params: &SystemParams) -> Vec<LinearConstraint> {
    let n = ch.n_t();
    let gain = 2f64.powf(params.r_d);
    let hs = HermitianMatrix::outer(&ch.h_s);
    let he = HermitianMatrix::outer(&ch.h_e);
    vec![
        LinearConstraint {
            name: "secrecy_rate",
            coeff: hs.scale(1.0 / params.sigma_su_sq).add(&he.scale(-gain / params.sigma_er_sq)),
            constant: 1.0 - gain,
            sense: Sense::Ge,
        },
        LinearConstraint { name: "harvest", coeff: he.scale(params.zeta_eh), constant: -params.omega_s, sense: Sense::Ge },
        LinearConstraint { name: "leakage", coeff: HermitianMatrix::outer(&ch.h_p), constant: -params.p_f, sense: Sense::Le },
        LinearConstraint { name: "power", coeff: HermitianMatrix::identity(n), constant: -params.p_tx, sense: Sense::Le },
    ]
}

pub fn perfect_model(ch: &ChannelSet, params: &SystemParams) -> Result<DcModel, ModelError> {
    params.validate()?;
    if ch.n_t() != params.n_t {
        return Err(ModelError::DimensionMismatch { expected: params.n_t, found: ch.n_t() });
    }
    Ok(DcModel {
        h_s: ch.h_s.clone(),
        sigma_su_sq: params.sigma_su_sq,
        penalty: HermitianMatrix::outer(&ch.h_e).scale(1.0 / params.sigma_er_sq),
        constraints: perfect_constraints(ch, params),
        p_c: params.p_c,
        xi: params.xi,
    })
}

/// Convex surrogate of the parametric problem at `(λ, Q^k)`; objective in nats.
pub fn build_dc_subproblem(lambda: f64, q_k: &HermitianMatrix, ch: &ChannelSet, params: &SystemParams) -> Result<ConicProgram, ModelError> {
    let model = perfect_model(ch, params)?;
    let lin = linearize_log_penalty(&model.penalty, q_k)?;
    Ok(model.subproblem(lambda, &lin))
}

/// DC loop at fixed `λ`; returns `Q` and `R_s(Q) − λ·P(Q)` with the true secrecy rate.
pub fn solve_fixed_lambda_dc(lambda: f64, ch: &ChannelSet, params: &SystemParams, cfg: &DinkelbachConfig) -> Result<(HermitianMatrix, f64), AlgoError> {
    cfg.validate()?;
    let model = perfect_model(ch, params)?;
    let r = dc_inner_loop(&model, lambda, cfg)?;
    Ok((r.q, r.f_value))
}

pub fn maximize_see_perfect(ch: &ChannelSet, params: &SystemParams, cfg: &DinkelbachConfig) -> Result<SolveReport, AlgoError> {
    cfg.validate()?;
    let model = perfect_model(ch, params)?;
    if params.omega_s > 0.0 && ch.h_e.norm() == 0.0 {
        return Ok(SolveReport::infeasible(ch.n_t()));
    }
    Ok(dinkelbach(&model, cfg))
}
