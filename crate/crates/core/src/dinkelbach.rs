//! Dinkelbach outer loop with a difference-of-convex inner loop, shared by
//! the perfect-CSI and statistical-CSI maximizers.
//!
//! Both regimes maximize
//! `[log2(1 + h_sᴴQh_s/σ_su²) − log2(1 + tr(A·Q))] / ((tr Q + P_c)/ξ)`
//! over a polyhedral slice of the PSD cone; they differ only in the penalty
//! matrix `A` and in the linear constraints, which a [`DcModel`] carries.

use thiserror::Error;

use crate::conic::{solve_conic, AffineExpr, ConicProgram, ConicStatus, SolveOptions, Sense};
use crate::model::{eigen_ratio, HermitianMatrix, ModelError, SolveReport, Status, CVector, LN_2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgoError {
    #[error("no point satisfies the constraints")]
    Infeasible,
    #[error("conic solver failed: {0}")]
    SolverFailure(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DinkelbachConfig {
    /// Initial λ (bits/J/Hz).
    pub lambda0: f64,
    /// Outer stop: `|F(λ)| ≤ eps_outer`.
    pub eps_outer: f64,
    /// Inner stop: change of the true inner objective between consecutive subproblem solutions.
    pub zeta_inner: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub conic: SolveOptions,
}

impl Default for DinkelbachConfig {
    fn default() -> Self {
        Self { lambda0: 0.0, eps_outer: 1e-3, zeta_inner: 1e-6, max_outer: 50, max_inner: 50, conic: SolveOptions::default() }
    }
}

impl DinkelbachConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |name, reason: &str| Err(ModelError::InvalidParameter { name, reason: reason.into() });
        if !(self.lambda0.is_finite() && self.lambda0 >= 0.0) {
            return bad("lambda0", "must be finite and >= 0");
        }
        if !(self.eps_outer > 0.0 && self.zeta_inner > 0.0) {
            return bad("tolerance", "must be > 0");
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("max_iters", "must be >= 1");
        }
        Ok(())
    }
}

/// Affine function `c + tr(S·Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub constant: f64,
    pub slope: HermitianMatrix,
}

impl Linearization {
    pub fn eval(&self, q: &HermitianMatrix) -> Result<f64, ModelError> {
        Ok(self.constant + self.slope.inner(q)?)
    }
}

/// First-order expansion of `log2(1 + tr(A·Q))` at `Q^k`.
pub fn linearize_log_penalty(a: &HermitianMatrix, q_k: &HermitianMatrix) -> Result<Linearization, ModelError> {
    let t = a.inner(q_k)?;
    let denom = (1.0 + t) * LN_2;
    Ok(Linearization { constant: (1.0 + t).log2() - t / denom, slope: a.scale(1.0 / denom) })
}

/// `tr(coeff·Q) + constant  (sense)  0`
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub name: &'static str,
    pub coeff: HermitianMatrix,
    pub constant: f64,
    pub sense: Sense,
}

impl LinearConstraint {
    /// Signed slack: nonnegative iff satisfied.
    pub fn slack(&self, q: &HermitianMatrix) -> Result<f64, ModelError> {
        let v = self.coeff.inner(q)? + self.constant;
        Ok(match self.sense {
            Sense::Ge => v,
            Sense::Le => -v,
            Sense::Eq => -v.abs(),
        })
    }
}

/// One regime's fractional program, with every constraint linear in `Q`.
#[derive(Debug, Clone)]
pub struct DcModel {
    pub h_s: CVector,
    pub sigma_su_sq: f64,
    /// Penalty matrix `A` of the subtracted term `log2(1 + tr(A·Q))`.
    pub penalty: HermitianMatrix,
    pub constraints: Vec<LinearConstraint>,
    pub p_c: f64,
    pub xi: f64,
}

impl DcModel {
    pub fn n_t(&self) -> usize {
        self.h_s.len()
    }

    /// True numerator in bits.
    pub fn rate(&self, q: &HermitianMatrix) -> Result<f64, ModelError> {
        let s = q.quad_form(&self.h_s)? / self.sigma_su_sq;
        Ok((1.0 + s).log2() - (1.0 + self.penalty.inner(q)?).log2())
    }

    pub fn power(&self, q: &HermitianMatrix) -> f64 {
        (q.trace() + self.p_c) / self.xi
    }

    /// Smallest constraint slack (negative when violated).
    pub fn min_slack(&self, q: &HermitianMatrix) -> Result<f64, ModelError> {
        let mut worst = f64::INFINITY;
        for c in &self.constraints {
            worst = worst.min(c.slack(q)?);
        }
        Ok(worst)
    }

    /// Convex surrogate at `(λ, Q^k)`, objective in natural-log units:
    /// `ln(1 + h_sᴴQh_s/σ_su²) − ln2·[lin(Q) + λ·(tr Q + P_c)/ξ]`.
    pub fn subproblem(&self, lambda: f64, lin: &Linearization) -> ConicProgram {
        let n = self.n_t();
        let mut prog = ConicProgram::new();
        let q = prog.matrix_var("Q", n);
        let signal = HermitianMatrix::outer(&self.h_s).scale(1.0 / self.sigma_su_sq);
        prog.add_log(1.0, AffineExpr::trace(q, signal).plus_constant(1.0));
        let price = lin.slope.add(&HermitianMatrix::identity(n).scale(lambda / self.xi)).scale(-LN_2);
        prog.maximize(AffineExpr::trace(q, price).plus_constant(-LN_2 * (lin.constant + lambda * self.p_c / self.xi)));
        for c in &self.constraints {
            prog.constrain(AffineExpr::trace(q, c.coeff.clone()).plus_constant(c.constant), c.sense);
        }
        prog
    }

    /// Whether the linear feasibility program certifies an empty constraint set.
    /// Cheaper and better conditioned than the log subproblem when targets are extreme.
    pub fn is_infeasible(&self, opts: &SolveOptions) -> bool {
        matches!(solve_for_matrix(&self.feasibility_program(), opts), Err(AlgoError::Infeasible))
    }

    /// Minimum `tr Q` over the constraint set, independent of `λ` and `Q^k`.
    pub fn feasibility_program(&self) -> ConicProgram {
        let n = self.n_t();
        let mut prog = ConicProgram::new();
        let q = prog.matrix_var("Q", n);
        prog.maximize(AffineExpr::trace(q, HermitianMatrix::identity(n)).scaled(-1.0));
        for c in &self.constraints {
            prog.constrain(AffineExpr::trace(q, c.coeff.clone()).plus_constant(c.constant), c.sense);
        }
        prog
    }
}

/// Solve one convex program and return its single matrix variable.
pub(crate) fn solve_for_matrix(prog: &ConicProgram, opts: &SolveOptions) -> Result<HermitianMatrix, AlgoError> {
    let sol = solve_conic(prog, opts).map_err(|e| AlgoError::SolverFailure(e.to_string()))?;
    match sol.status {
        ConicStatus::Optimal => Ok(sol.matrices.into_iter().next().expect("one matrix variable")),
        ConicStatus::Infeasible => Err(AlgoError::Infeasible),
        ConicStatus::Unbounded => Err(AlgoError::SolverFailure("unbounded subproblem".into())),
        ConicStatus::MaxIterations => Err(AlgoError::SolverFailure(format!(
            "no convergence (residual {:.3e} after {} iterations)",
            sol.primal_residual, sol.iterations
        ))),
    }
}

/// Result of the DC loop at fixed `λ`.
#[derive(Debug, Clone)]
pub struct InnerResult {
    pub q: HermitianMatrix,
    /// `R(Q) − λ·P(Q)` with the true rate.
    pub f_value: f64,
    pub iters: usize,
    /// True inner objective after each subproblem solve.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// DC iterations from `Q⁰ = 0` until the true objective changes by at most `zeta_inner`.
pub fn dc_inner_loop(model: &DcModel, lambda: f64, cfg: &DinkelbachConfig) -> Result<InnerResult, AlgoError> {
    let mut q_k = HermitianMatrix::zeros(model.n_t());
    let mut trace = Vec::new();
    for k in 0..cfg.max_inner {
        let lin = linearize_log_penalty(&model.penalty, &q_k)?;
        let q = solve_for_matrix(&model.subproblem(lambda, &lin), &cfg.conic)?;
        let f = model.rate(&q)? - lambda * model.power(&q);
        let done = k >= 1 && (f - trace.last().copied().unwrap_or(f64::NAN)).abs() <= cfg.zeta_inner;
        trace.push(f);
        q_k = q;
        if done {
            return Ok(InnerResult { q: q_k, f_value: f, iters: k + 1, trace, converged: true });
        }
    }
    let f = *trace.last().expect("max_inner >= 1");
    Ok(InnerResult { q: q_k, f_value: f, iters: cfg.max_inner, trace, converged: false })
}

/// Dinkelbach iterations `λ_{i+1} = R(Q_i)/P(Q_i)` until `|F(λ_i)| ≤ eps_outer`.
///
/// When the inner loop returns a point worse than the previous iterate (which
/// attains `F(λ_i) = 0`), the previous iterate is kept and the loop stops.
pub fn dinkelbach(model: &DcModel, cfg: &DinkelbachConfig) -> SolveReport {
    let n = model.n_t();
    let mut lambda = cfg.lambda0;
    let mut lambda_trace = Vec::new();
    let mut f_trace = Vec::new();
    let mut inner_iters = Vec::new();
    let mut best: Option<HermitianMatrix> = None;
    let mut status = Status::MaxIterations;
    let mut residual = f64::NAN;
    if model.is_infeasible(&cfg.conic) {
        return SolveReport::infeasible(n);
    }

    for _ in 0..cfg.max_outer {
        let inner = match dc_inner_loop(model, lambda, cfg) {
            Ok(r) => r,
            Err(AlgoError::Infeasible) if best.is_none() => return SolveReport::infeasible(n),
            Err(_) => break,
        };
        let (mut q, mut f) = (inner.q, inner.f_value);
        if let Some(prev) = &best {
            let f_prev = model.rate(prev).unwrap_or(f64::NAN) - lambda * model.power(prev);
            if f < f_prev {
                q = prev.clone();
                f = f_prev;
            }
        }
        lambda_trace.push(lambda);
        f_trace.push(f);
        inner_iters.push(inner.iters);
        residual = f.abs();
        let rate = model.rate(&q).unwrap_or(f64::NAN);
        let next = rate / model.power(&q);
        best = Some(q);
        if residual <= cfg.eps_outer {
            status = Status::Optimal;
            break;
        }
        lambda = next;
    }

    let Some(q) = best else {
        return SolveReport { status: Status::MaxIterations, ..SolveReport::infeasible(n) };
    };
    let rate = model.rate(&q).unwrap_or(f64::NAN);
    let power = model.power(&q);
    let mut report = SolveReport::from_covariance(q, rate, power, status);
    report.lambda_trace = lambda_trace;
    report.f_trace = f_trace;
    report.inner_iters = inner_iters;
    report.residual = residual;
    report.rank_ratio = eigen_ratio(&report.q_cov);
    report
}
