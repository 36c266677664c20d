//! Worst-case SEE maximization under norm-bounded channel errors.
//!
//! Each robust quadratic constraint `c·(ĥ+e)ᴴX(ĥ+e) + k ≥ 0 ∀‖e‖ ≤ ε` is
//! replaced by its exact S-procedure LMI
//! `c·[I ĥ]ᴴX[I ĥ] + diag(ϑ·I, k − ϑε²) ⪰ 0`, `ϑ ≥ 0`.
//! With `W = Q/τ` and `Γ = 1/τ` the fixed-budget inner problem becomes a
//! linear SDP whose value is `θ(λ, ν) = (1 + min SNR_s)/(1 + max SNR_e)`;
//! the outer problem maximizes `log2 θ(λ, ν) − ν` over `ν`.

use rayon::prelude::*;

use crate::conic::{solve_conic, AffineExpr, Bound, ConicProgram, ConicSolution, ConicStatus, Lmi, MatVar, ScalarVar, Sense, SolveOptions};
use crate::dinkelbach::{AlgoError, DinkelbachConfig};
use crate::model::{CMatrix, CVector, ChannelSet, ErrorBounds, HermitianMatrix, ModelError, SolveReport, Status, SystemParams, WorstCaseCheck, C64};

/// Lower bound on `Γ` keeping `Q = W/Γ` well-posed.
pub const GAMMA_MIN: f64 = 1e-9;
pub const DEFAULT_GRID: usize = 32;
/// Golden-section stop, relative to the `ν` interval width.
const GOLDEN_REL_WIDTH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

/// Exact extremum of `(ĥ+e)ᴴQ(ĥ+e)` over `‖e‖ ≤ eps`, via the secular equation
/// of the trust-region subproblem in `Q`'s eigenbasis.
pub fn quadratic_extremum_over_ball(q: &HermitianMatrix, h_hat: &CVector, eps: f64, mode: Extremum) -> f64 {
    let (vals, vecs) = q.eigen_desc();
    let vals: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    let g2: Vec<f64> = (vecs.adjoint() * h_hat).iter().map(|z| z.norm_sqr()).collect();
    let nominal: f64 = vals.iter().zip(&g2).map(|(l, g)| l * g).sum();
    let q_max = vals.first().copied().unwrap_or(0.0);
    if eps == 0.0 || q_max == 0.0 {
        return nominal;
    }
    let g_norm = g2.iter().sum::<f64>().sqrt();
    match mode {
        Extremum::Min => {
            let range: f64 = vals.iter().zip(&g2).filter(|(l, _)| **l > 1e-12 * q_max).map(|(_, g)| g).sum();
            if range.sqrt() <= eps {
                return 0.0;
            }
            // ‖e(μ)‖² = Σ λᵢ²|gᵢ|²/(λᵢ+μ)², decreasing on μ > 0.
            let norm2 = |mu: f64| vals.iter().zip(&g2).map(|(l, g)| l * l * g / ((l + mu) * (l + mu))).sum::<f64>();
            let mu = bisect_decreasing(norm2, eps * eps, 0.0, q_max * range.sqrt() / eps);
            vals.iter().zip(&g2).map(|(l, g)| l * mu * mu * g / ((l + mu) * (l + mu))).sum()
        }
        Extremum::Max => {
            let top = |l: f64| l >= q_max * (1.0 - 1e-12);
            let w_top: f64 = vals.iter().zip(&g2).filter(|(l, _)| top(**l)).map(|(_, g)| g).sum();
            // ‖e(μ)‖² = Σ λᵢ²|gᵢ|²/(μ−λᵢ)², decreasing on μ > λ_max.
            let norm2 = |mu: f64| {
                vals.iter().zip(&g2).filter(|(l, _)| !top(**l) || w_top > 0.0).map(|(l, g)| l * l * g / ((mu - l) * (mu - l))).sum::<f64>()
            };
            if w_top <= 1e-30 * g_norm * g_norm {
                let rest = norm2(q_max);
                if rest <= eps * eps {
                    let off_top: f64 = vals
                        .iter()
                        .zip(&g2)
                        .filter(|(l, _)| !top(**l))
                        .map(|(l, g)| l * q_max * q_max * g / ((q_max - l) * (q_max - l)))
                        .sum();
                    return off_top + q_max * (eps * eps - rest);
                }
            }
            let mu = bisect_decreasing(norm2, eps * eps, q_max, q_max + q_max * g_norm / eps);
            vals.iter().zip(&g2).map(|(l, g)| l * mu * mu * g / ((mu - l) * (mu - l))).sum()
        }
    }
}

/// Root of a decreasing `f(μ) = target` on `(lo, hi]`, bracketed to relative width 1e-13.
fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Worst-case secrecy rate, harvested power and leakage of `q` over the error balls.
pub fn worst_case_check(q: &HermitianMatrix, ch: &ChannelSet, params: &SystemParams) -> WorstCaseCheck {
    let b = ch.bounds.unwrap_or(ErrorBounds::uniform(0.0));
    let s_min = quadratic_extremum_over_ball(q, &ch.h_s, b.eps_s, Extremum::Min);
    let e_max = quadratic_extremum_over_ball(q, &ch.h_e, b.eps_e, Extremum::Max);
    let e_min = quadratic_extremum_over_ball(q, &ch.h_e, b.eps_e, Extremum::Min);
    let p_max = quadratic_extremum_over_ball(q, &ch.h_p, b.eps_p, Extremum::Max);
    WorstCaseCheck {
        secrecy_rate: (1.0 + s_min / params.sigma_su_sq).log2() - (1.0 + e_max / params.sigma_er_sq).log2(),
        harvested_power: params.zeta_eh * e_min,
        leakage: p_max,
    }
}

/// `constant + Σ aᵢ·xᵢ`, the scalar part of a robust constraint.
#[derive(Debug, Clone, Default)]
struct Corner {
    constant: f64,
    terms: Vec<(ScalarVar, f64)>,
}

impl Corner {
    fn new(constant: f64, terms: &[(ScalarVar, f64)]) -> Self {
        Self { constant, terms: terms.to_vec() }
    }
}

/// Enforce `coeff·(ĥ+e)ᴴX(ĥ+e) + corner ≥ 0` for all `‖e‖ ≤ eps`; returns the multiplier
/// (`None` when `eps = 0`, where the constraint is imposed at `ĥ` directly).
fn add_robust_quadratic(prog: &mut ConicProgram, x: MatVar, h_hat: &CVector, eps: f64, coeff: f64, corner: Corner, name: &str) -> Option<ScalarVar> {
    let n = h_hat.len();
    if eps == 0.0 {
        let mut expr = AffineExpr::trace(x, HermitianMatrix::outer(h_hat).scale(coeff)).plus_constant(corner.constant);
        for (v, a) in corner.terms {
            expr = expr.plus_scalar(v, a);
        }
        prog.constrain(expr, Sense::Ge);
        return None;
    }
    let theta = prog.scalar_var(name, Bound::NonNegative);
    let mut e = CMatrix::zeros(n, n + 1);
    for i in 0..n {
        e[(i, i)] = C64::new(1.0, 0.0);
        e[(i, n)] = h_hat[i];
    }
    let corner_unit = |a: f64| {
        let mut m = CMatrix::zeros(n + 1, n + 1);
        m[(n, n)] = C64::new(a, 0.0);
        m
    };
    let mut pad = CMatrix::identity(n + 1, n + 1);
    pad[(n, n)] = C64::new(-eps * eps, 0.0);
    let mut lmi = Lmi::new(n + 1).with_constant(corner_unit(corner.constant)).with_congruence(x, coeff, e).with_scalar(theta, pad);
    for (v, a) in corner.terms {
        lmi = lmi.with_scalar(v, corner_unit(a));
    }
    prog.add_lmi(lmi);
    Some(theta)
}

fn bounds_of(ch: &ChannelSet) -> Result<ErrorBounds, ModelError> {
    ch.bounds.ok_or(ModelError::InvalidParameter { name: "bounds", reason: "robust regime needs error radii".into() })
}

/// Handles into the inner program built by [`build_sprocedure_lmis`].
#[derive(Debug, Clone)]
pub struct InnerVars {
    pub w: MatVar,
    pub gamma: ScalarVar,
    pub rho: ScalarVar,
    /// Multipliers of the signal, eavesdropper, rate, harvesting and leakage blocks.
    pub thetas: [Option<ScalarVar>; 5],
}

/// Charnes-Cooper form of the fixed-budget inner problem at `(λ, ν)`; maximizes `ϱ`.
/// For `λ = 0` the budget constraint is vacuous and omitted.
pub fn build_sprocedure_lmis(ch: &ChannelSet, params: &SystemParams, lambda: f64, nu: f64) -> Result<(ConicProgram, InnerVars), ModelError> {
    params.validate()?;
    let b = bounds_of(ch)?;
    let n = ch.n_t();
    let mut prog = ConicProgram::new();
    let w = prog.matrix_var("W", n);
    let gamma = prog.scalar_var("Gamma", Bound::NonNegative);
    let rho = prog.scalar_var("rho", Bound::Free);
    let (ss, se) = (1.0 / params.sigma_su_sq, 1.0 / params.sigma_er_sq);
    let t1 = add_robust_quadratic(&mut prog, w, &ch.h_s, b.eps_s, ss, Corner::new(0.0, &[(gamma, 1.0), (rho, -1.0)]), "theta1");
    let t2 = add_robust_quadratic(&mut prog, w, &ch.h_e, b.eps_e, -se, Corner::new(1.0, &[(gamma, -1.0)]), "theta2");
    let t3 = add_robust_quadratic(&mut prog, w, &ch.h_s, b.eps_s, ss, Corner::new(-(2f64.powf(params.r_d)), &[(gamma, 1.0)]), "theta3");
    let t4 = add_robust_quadratic(&mut prog, w, &ch.h_e, b.eps_e, params.zeta_eh, Corner::new(0.0, &[(gamma, -params.omega_s)]), "theta4");
    let t5 = add_robust_quadratic(&mut prog, w, &ch.h_p, b.eps_p, -1.0, Corner::new(0.0, &[(gamma, params.p_f)]), "theta5");
    let id = HermitianMatrix::identity(n);
    if lambda > 0.0 {
        prog.constrain(AffineExpr::trace(w, id.scale(lambda)).plus_scalar(gamma, lambda * params.p_c - nu), Sense::Le);
    }
    prog.constrain(AffineExpr::trace(w, id.clone()).plus_scalar(gamma, -params.p_tx), Sense::Le);
    prog.constrain(AffineExpr::scalar(gamma, 1.0).plus_constant(-GAMMA_MIN), Sense::Ge);
    prog.maximize(AffineExpr::scalar(rho, 1.0));
    Ok((prog, InnerVars { w, gamma, rho, thetas: [t1, t2, t3, t4, t5] }))
}

#[derive(Debug, Clone)]
pub struct RobustInnerSolution {
    pub w: HermitianMatrix,
    pub gamma: f64,
    pub rho: f64,
    pub thetas: [f64; 5],
    pub recovered_q: HermitianMatrix,
    pub recovered_tau: f64,
}

fn conic_outcome(sol: &ConicSolution) -> Result<(), AlgoError> {
    match sol.status {
        ConicStatus::Optimal => Ok(()),
        ConicStatus::Infeasible => Err(AlgoError::Infeasible),
        ConicStatus::Unbounded => Err(AlgoError::SolverFailure("unbounded program".into())),
        ConicStatus::MaxIterations => Err(AlgoError::SolverFailure(format!("no convergence (residual {:.3e})", sol.primal_residual))),
    }
}

/// `θ(λ, ν)` and the solution attaining it.
pub fn solve_inner_theta(lambda: f64, nu: f64, ch: &ChannelSet, params: &SystemParams, opts: &SolveOptions) -> Result<(f64, RobustInnerSolution), AlgoError> {
    let (prog, vars) = build_sprocedure_lmis(ch, params, lambda, nu)?;
    let sol = solve_conic(&prog, opts).map_err(|e| AlgoError::SolverFailure(e.to_string()))?;
    conic_outcome(&sol)?;
    let gamma = sol.scalar(vars.gamma);
    if gamma <= 2.0 * GAMMA_MIN {
        return Err(AlgoError::SolverFailure(format!("Gamma at its lower bound ({gamma:.3e})")));
    }
    let w = sol.matrix(vars.w).clone();
    let rho = sol.scalar(vars.rho);
    let thetas = vars.thetas.map(|t| t.map_or(0.0, |v| sol.scalar(v)));
    Ok((rho, RobustInnerSolution { recovered_q: w.scale(1.0 / gamma), recovered_tau: 1.0 / gamma, w, gamma, rho, thetas }))
}

/// Minimal transmit power meeting every worst-case constraint.
pub fn compute_nu_min(ch: &ChannelSet, params: &SystemParams, opts: &SolveOptions) -> Result<(f64, HermitianMatrix), AlgoError> {
    params.validate()?;
    let b = bounds_of(ch)?;
    let n = ch.n_t();
    let mut prog = ConicProgram::new();
    let q = prog.matrix_var("Q", n);
    // min SNR_s ≥ s, max SNR_e ≤ t, 1 + s ≥ 2^R_d (1 + t)
    let s = prog.scalar_var("s", Bound::NonNegative);
    let t = prog.scalar_var("t", Bound::NonNegative);
    add_robust_quadratic(&mut prog, q, &ch.h_s, b.eps_s, 1.0 / params.sigma_su_sq, Corner::new(0.0, &[(s, -1.0)]), "theta_s");
    add_robust_quadratic(&mut prog, q, &ch.h_e, b.eps_e, -1.0 / params.sigma_er_sq, Corner::new(0.0, &[(t, 1.0)]), "theta_e");
    let gain = 2f64.powf(params.r_d);
    prog.constrain(AffineExpr::scalar(s, 1.0).plus_scalar(t, -gain).plus_constant(1.0 - gain), Sense::Ge);
    add_robust_quadratic(&mut prog, q, &ch.h_e, b.eps_e, params.zeta_eh, Corner::new(-params.omega_s, &[]), "theta_h");
    add_robust_quadratic(&mut prog, q, &ch.h_p, b.eps_p, -1.0, Corner::new(params.p_f, &[]), "theta_p");
    let id = HermitianMatrix::identity(n);
    prog.constrain(AffineExpr::trace(q, id.clone()).plus_constant(-params.p_tx), Sense::Le);
    prog.maximize(AffineExpr::trace(q, id).scaled(-1.0));
    let sol = solve_conic(&prog, opts).map_err(|e| AlgoError::SolverFailure(e.to_string()))?;
    conic_outcome(&sol)?;
    let qm = sol.matrix(q).clone();
    Ok((qm.trace(), qm))
}

/// Best `ν` and the value `F_m(λ) = log2 θ(λ, ν) − ν` there.
#[derive(Debug, Clone)]
pub struct LineSearchResult {
    pub nu_star: f64,
    pub f_m: f64,
    pub q: HermitianMatrix,
    pub evaluations: usize,
}

/// Uniform grid of `grid` points over `[λ(ν_min + P_c), λ(P_tx + P_c)]`, then golden-section
/// refinement around the best grid point.
pub fn outer_line_search(lambda: f64, nu_min: f64, ch: &ChannelSet, params: &SystemParams, grid: usize, opts: &SolveOptions) -> Result<LineSearchResult, AlgoError> {
    if !(lambda > 0.0) {
        return Err(ModelError::InvalidParameter { name: "lambda", reason: "line search needs lambda > 0".into() }.into());
    }
    let grid = grid.max(2);
    let lo = lambda * (nu_min + params.p_c);
    let hi = lambda * (params.p_tx + params.p_c);
    let eval = |nu: f64| -> Result<Option<(f64, HermitianMatrix)>, AlgoError> {
        match solve_inner_theta(lambda, nu, ch, params, opts) {
            Ok((theta, sol)) if theta > 0.0 => Ok(Some((theta.log2() - nu, sol.recovered_q))),
            Ok(_) | Err(AlgoError::Infeasible) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let nus: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect();
    let values: Vec<Result<Option<(f64, HermitianMatrix)>, AlgoError>> = nus.par_iter().map(|&nu| eval(nu)).collect();
    let mut evaluations = grid;
    let mut best: Option<(f64, f64, HermitianMatrix)> = None;
    let mut best_idx = 0;
    let mut failure = None;
    for (i, v) in values.into_iter().enumerate() {
        match v {
            Ok(Some((f, q))) => {
                if best.as_ref().map_or(true, |b| f > b.1) {
                    best = Some((nus[i], f, q));
                    best_idx = i;
                }
            }
            Ok(None) => {}
            Err(e) => failure = Some(e),
        }
    }
    let Some(mut best) = best else {
        return Err(failure.unwrap_or(AlgoError::Infeasible));
    };

    let phi = |nu: f64| -> Result<(f64, Option<HermitianMatrix>), AlgoError> {
        Ok(match eval(nu)? {
            Some((f, q)) => (f, Some(q)),
            None => (f64::NEG_INFINITY, None),
        })
    };
    let mut a = nus[best_idx.saturating_sub(1)];
    let mut b = nus[(best_idx + 1).min(grid - 1)];
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut qc) = phi(c)?;
    let (mut fd, mut qd) = phi(d)?;
    evaluations += 2;
    let consider = |nu: f64, f: f64, q: Option<HermitianMatrix>, best: &mut (f64, f64, HermitianMatrix)| {
        if let Some(q) = q {
            if f > best.1 {
                *best = (nu, f, q);
            }
        }
    };
    consider(c, fc, qc.clone(), &mut best);
    consider(d, fd, qd.clone(), &mut best);
    while b - a > GOLDEN_REL_WIDTH * (hi - lo) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            qd = qc.take();
            c = b - ratio * (b - a);
            (fc, qc) = phi(c)?;
            consider(c, fc, qc.clone(), &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            qc = qd.take();
            d = a + ratio * (b - a);
            (fd, qd) = phi(d)?;
            consider(d, fd, qd.clone(), &mut best);
        }
        evaluations += 1;
    }
    Ok(LineSearchResult { nu_star: best.0, f_m: best.1, q: best.2, evaluations })
}

/// Dinkelbach iterations on the worst-case SEE. `λ₀ = 0` is evaluated by the
/// unconstrained-budget inner solve; later iterations use the line search.
pub fn maximize_see_robust(ch: &ChannelSet, params: &SystemParams, cfg: &DinkelbachConfig) -> Result<SolveReport, AlgoError> {
    maximize_see_robust_with_grid(ch, params, cfg, DEFAULT_GRID)
}

pub fn maximize_see_robust_with_grid(ch: &ChannelSet, params: &SystemParams, cfg: &DinkelbachConfig, grid: usize) -> Result<SolveReport, AlgoError> {
    cfg.validate()?;
    params.validate()?;
    bounds_of(ch)?;
    let n = ch.n_t();
    let nu_min = match compute_nu_min(ch, params, &cfg.conic) {
        Ok((p, _)) => p,
        Err(AlgoError::Infeasible) => return Ok(SolveReport::infeasible(n)),
        Err(e) => return Err(e),
    };
    let power = |q: &HermitianMatrix| (q.trace() + params.p_c) / params.xi;
    let rate = |q: &HermitianMatrix| worst_case_check(q, ch, params).secrecy_rate;

    let mut lambda = cfg.lambda0;
    let (mut lambda_trace, mut f_trace, mut inner_iters) = (Vec::new(), Vec::new(), Vec::new());
    let mut best: Option<HermitianMatrix> = None;
    let mut status = Status::MaxIterations;
    let mut residual = f64::NAN;
    for _ in 0..cfg.max_outer {
        let step = if lambda > 0.0 {
            outer_line_search(lambda, nu_min, ch, params, grid, &cfg.conic).map(|r| (r.q, r.evaluations))
        } else {
            solve_inner_theta(0.0, 0.0, ch, params, &cfg.conic).map(|(_, s)| (s.recovered_q, 1))
        };
        let (mut q, evals) = match step {
            Ok(r) => r,
            Err(AlgoError::Infeasible) if best.is_none() => return Ok(SolveReport::infeasible(n)),
            Err(AlgoError::Infeasible) => break,
            Err(e) if best.is_none() => return Err(e),
            Err(_) => break,
        };
        let mut f = rate(&q) - lambda * power(&q);
        if let Some(prev) = &best {
            let f_prev = rate(prev) - lambda * power(prev);
            if f < f_prev {
                q = prev.clone();
                f = f_prev;
            }
        }
        lambda_trace.push(lambda);
        f_trace.push(f);
        inner_iters.push(evals);
        residual = f.abs();
        let next = rate(&q) / power(&q);
        best = Some(q);
        if residual <= cfg.eps_outer {
            status = Status::Optimal;
            break;
        }
        lambda = next;
    }
    let q = best.expect("at least one outer iteration");
    let mut report = worst_case_report(q, ch, params, status);
    report.lambda_trace = lambda_trace;
    report.f_trace = f_trace;
    report.inner_iters = inner_iters;
    report.residual = residual;
    Ok(report)
}

/// Report of `q` scored with its worst-case secrecy rate.
pub(crate) fn worst_case_report(q: HermitianMatrix, ch: &ChannelSet, params: &SystemParams, status: Status) -> SolveReport {
    let wc = worst_case_check(&q, ch, params);
    let p = (q.trace() + params.p_c) / params.xi;
    let mut report = SolveReport::from_covariance(q, wc.secrecy_rate, p, status);
    report.worst_case = Some(wc);
    report
}
