//! Declarative convex programs over Hermitian PSD variables and their solution.
//!
//! A [`ConicProgram`] maximizes a linear functional plus weighted natural logs
//! of affine functionals, subject to affine (in)equalities, PSD matrix
//! variables and linear matrix inequalities. Complex Hermitian blocks are
//! lowered to real symmetric ones through [`hermitian_to_real_embedding`],
//! log terms become exponential-cone constraints, and the result is handed to
//! Clarabel's interior-point method.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use nalgebra::DMatrix;
use thiserror::Error;

use crate::model::{CMatrix, HermitianMatrix, C64, HERMITIAN_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatVar(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarVar(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Free,
    NonNegative,
}

/// `constant + Σ aᵢ·xᵢ + Σ Re tr(Cⱼ·Xⱼ)`
#[derive(Debug, Clone, Default)]
pub struct AffineExpr {
    pub constant: f64,
    pub scalars: Vec<(ScalarVar, f64)>,
    pub traces: Vec<(MatVar, HermitianMatrix)>,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, ..Self::default() }
    }

    pub fn scalar(v: ScalarVar, a: f64) -> Self {
        Self::default().plus_scalar(v, a)
    }

    pub fn trace(x: MatVar, c: HermitianMatrix) -> Self {
        Self::default().plus_trace(x, c)
    }

    pub fn plus_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn plus_scalar(mut self, v: ScalarVar, a: f64) -> Self {
        self.scalars.push((v, a));
        self
    }

    pub fn plus_trace(mut self, x: MatVar, c: HermitianMatrix) -> Self {
        self.traces.push((x, c));
        self
    }

    pub fn plus(mut self, other: AffineExpr) -> Self {
        self.constant += other.constant;
        self.scalars.extend(other.scalars);
        self.traces.extend(other.traces);
        self
    }

    pub fn scaled(mut self, a: f64) -> Self {
        self.constant *= a;
        for (_, c) in &mut self.scalars {
            *c *= a;
        }
        for (_, m) in &mut self.traces {
            *m = m.scale(a);
        }
        self
    }

    /// `1 + |constant| + Σ|term|`, the scale violations are measured against.
    pub fn magnitude(&self, matrices: &[HermitianMatrix], scalars: &[f64]) -> f64 {
        let mut m = 1.0 + self.constant.abs();
        for (s, a) in &self.scalars {
            m += (a * scalars[s.0]).abs();
        }
        for (x, c) in &self.traces {
            m += c.inner(&matrices[x.0]).map_or(0.0, f64::abs);
        }
        m
    }

    /// Evaluate at explicit variable values.
    pub fn eval(&self, matrices: &[HermitianMatrix], scalars: &[f64]) -> f64 {
        let mut v = self.constant;
        for (s, a) in &self.scalars {
            v += a * scalars[s.0];
        }
        for (x, c) in &self.traces {
            v += c.inner(&matrices[x.0]).unwrap_or(f64::NAN);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `expr ≤ 0`
    Le,
    /// `expr = 0`
    Eq,
    /// `expr ≥ 0`
    Ge,
}

#[derive(Debug, Clone)]
pub struct AffineConstraint {
    pub expr: AffineExpr,
    pub sense: Sense,
}

/// `weight · ln(arg)` in the maximized objective.
#[derive(Debug, Clone)]
pub struct LogTerm {
    pub weight: f64,
    pub arg: AffineExpr,
}

/// Hermitian block `C₀ + Σ xᵢ·Cᵢ + Σ aⱼ·Eⱼᴴ Xⱼ Eⱼ ⪰ 0`.
#[derive(Debug, Clone)]
pub struct Lmi {
    pub dim: usize,
    pub constant: CMatrix,
    pub scalars: Vec<(ScalarVar, CMatrix)>,
    /// `(X, a, E)` contributes `a·Eᴴ X E`; `E` is `dim(X) × dim`.
    pub congruences: Vec<(MatVar, f64, CMatrix)>,
}

impl Lmi {
    pub fn new(dim: usize) -> Self {
        Self { dim, constant: CMatrix::zeros(dim, dim), scalars: Vec::new(), congruences: Vec::new() }
    }

    pub fn with_constant(mut self, c: CMatrix) -> Self {
        self.constant += c;
        self
    }

    pub fn with_scalar(mut self, v: ScalarVar, c: CMatrix) -> Self {
        self.scalars.push((v, c));
        self
    }

    pub fn with_congruence(mut self, x: MatVar, a: f64, e: CMatrix) -> Self {
        self.congruences.push((x, a, e));
        self
    }

    pub fn eval(&self, matrices: &[HermitianMatrix], scalars: &[f64]) -> CMatrix {
        let mut m = self.constant.clone();
        for (v, c) in &self.scalars {
            m += c * C64::new(scalars[v.0], 0.0);
        }
        for (x, a, e) in &self.congruences {
            m += e.adjoint() * matrices[x.0].as_matrix() * e * C64::new(*a, 0.0);
        }
        m
    }
}

/// Maximization program; see the module docs.
#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    matrix_vars: Vec<(String, usize)>,
    scalar_vars: Vec<(String, Bound)>,
    linear: AffineExpr,
    logs: Vec<LogTerm>,
    constraints: Vec<AffineConstraint>,
    lmis: Vec<Lmi>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Hermitian PSD variable of dimension `dim`.
    pub fn matrix_var(&mut self, name: &str, dim: usize) -> MatVar {
        self.matrix_vars.push((name.to_owned(), dim));
        MatVar(self.matrix_vars.len() - 1)
    }

    pub fn scalar_var(&mut self, name: &str, bound: Bound) -> ScalarVar {
        self.scalar_vars.push((name.to_owned(), bound));
        ScalarVar(self.scalar_vars.len() - 1)
    }

    /// Adds `expr` to the linear part of the objective.
    pub fn maximize(&mut self, expr: AffineExpr) {
        let lin = std::mem::take(&mut self.linear);
        self.linear = lin.plus(expr);
    }

    pub fn add_log(&mut self, weight: f64, arg: AffineExpr) {
        self.logs.push(LogTerm { weight, arg });
    }

    pub fn constrain(&mut self, expr: AffineExpr, sense: Sense) {
        self.constraints.push(AffineConstraint { expr, sense });
    }

    pub fn add_lmi(&mut self, lmi: Lmi) {
        self.lmis.push(lmi);
    }

    pub fn matrix_vars(&self) -> &[(String, usize)] {
        &self.matrix_vars
    }

    pub fn scalar_vars(&self) -> &[(String, Bound)] {
        &self.scalar_vars
    }

    pub fn constraints(&self) -> &[AffineConstraint] {
        &self.constraints
    }

    pub fn lmis(&self) -> &[Lmi] {
        &self.lmis
    }

    /// Objective value at explicit variable values; `-∞` when a log argument is not positive.
    pub fn objective_at(&self, matrices: &[HermitianMatrix], scalars: &[f64]) -> f64 {
        let mut v = self.linear.eval(matrices, scalars);
        for t in &self.logs {
            let a = t.arg.eval(matrices, scalars);
            if a <= 0.0 {
                return f64::NEG_INFINITY;
            }
            v += t.weight * a.ln();
        }
        v
    }

    /// Largest violation of any constraint (affine, bounds, LMIs, PSD variables, log domains),
    /// each divided by the magnitude of the terms that make up the constraint.
    pub fn max_violation(&self, matrices: &[HermitianMatrix], scalars: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for c in &self.constraints {
            let v = c.expr.eval(matrices, scalars);
            let viol = match c.sense {
                Sense::Le => v.max(0.0),
                Sense::Ge => (-v).max(0.0),
                Sense::Eq => v.abs(),
            };
            worst = worst.max(viol / c.expr.magnitude(matrices, scalars));
        }
        for (i, (_, b)) in self.scalar_vars.iter().enumerate() {
            if *b == Bound::NonNegative {
                worst = worst.max(-scalars[i]);
            }
        }
        for lmi in &self.lmis {
            let m = HermitianMatrix::symmetrized(lmi.eval(matrices, scalars));
            let (ev, _) = m.eigen_desc();
            let scale = 1.0 + ev.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            worst = worst.max(-ev.last().copied().unwrap_or(0.0) / scale);
        }
        for m in matrices {
            worst = worst.max(-m.min_eigenvalue() / (1.0 + m.trace().abs()));
        }
        for t in &self.logs {
            worst = worst.max(-t.arg.eval(matrices, scalars));
        }
        worst
    }

    fn validate(&self) -> Result<(), ConicError> {
        let bad = |msg: String| Err(ConicError::MalformedProgram(msg));
        let check_expr = |e: &AffineExpr, what: &str| -> Result<(), ConicError> {
            for (s, a) in &e.scalars {
                if s.0 >= self.scalar_vars.len() {
                    return bad(format!("{what}: unknown scalar variable #{}", s.0));
                }
                if !a.is_finite() {
                    return bad(format!("{what}: non-finite coefficient"));
                }
            }
            for (x, c) in &e.traces {
                let Some((name, dim)) = self.matrix_vars.get(x.0) else {
                    return bad(format!("{what}: unknown matrix variable #{}", x.0));
                };
                if c.dim() != *dim {
                    return bad(format!("{what}: coefficient of `{name}` has dim {} but variable has dim {dim}", c.dim()));
                }
            }
            if !e.constant.is_finite() {
                return bad(format!("{what}: non-finite constant"));
            }
            Ok(())
        };
        check_expr(&self.linear, "objective")?;
        for t in &self.logs {
            if !(t.weight > 0.0 && t.weight.is_finite()) {
                return bad(format!("log term weight must be positive, got {}", t.weight));
            }
            check_expr(&t.arg, "log term")?;
        }
        for (i, c) in self.constraints.iter().enumerate() {
            check_expr(&c.expr, &format!("constraint {i}"))?;
        }
        for (i, l) in self.lmis.iter().enumerate() {
            let herm = |m: &CMatrix| m.nrows() == l.dim && m.ncols() == l.dim && (m - m.adjoint()).camax() <= HERMITIAN_TOL;
            if !herm(&l.constant) {
                return bad(format!("lmi {i}: constant block is not a Hermitian {}x{} matrix", l.dim, l.dim));
            }
            for (s, m) in &l.scalars {
                if s.0 >= self.scalar_vars.len() {
                    return bad(format!("lmi {i}: unknown scalar variable #{}", s.0));
                }
                if !herm(m) {
                    return bad(format!("lmi {i}: scalar coefficient block is not Hermitian"));
                }
            }
            for (x, _, e) in &l.congruences {
                let Some((name, dim)) = self.matrix_vars.get(x.0) else {
                    return bad(format!("lmi {i}: unknown matrix variable #{}", x.0));
                };
                if e.nrows() != *dim || e.ncols() != l.dim {
                    return bad(format!("lmi {i}: congruence for `{name}` must be {dim}x{}", l.dim));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub max_iters: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { feas_tol: 1e-8, opt_tol: 1e-8, max_iters: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub matrices: Vec<HermitianMatrix>,
    pub scalars: Vec<f64>,
    /// Objective in the program's own (natural-log) units.
    pub objective: f64,
    pub primal_residual: f64,
    pub status: ConicStatus,
    /// The interior-point method reported convergence, possibly to reduced accuracy.
    pub converged: bool,
    pub iterations: u32,
}

impl ConicSolution {
    pub fn matrix(&self, x: MatVar) -> &HermitianMatrix {
        &self.matrices[x.0]
    }

    pub fn scalar(&self, v: ScalarVar) -> f64 {
        self.scalars[v.0]
    }

    pub fn is_optimal(&self) -> bool {
        self.status == ConicStatus::Optimal
    }
}

/// `[[Re M, −Im M], [Im M, Re M]]`; its spectrum is that of `M` with doubled multiplicities.
pub fn hermitian_to_real_embedding(m: &CMatrix) -> Result<DMatrix<f64>, ConicError> {
    if !m.is_square() {
        return Err(ConicError::MalformedProgram("embedding needs a square matrix".into()));
    }
    if (m - m.adjoint()).camax() > HERMITIAN_TOL {
        return Err(ConicError::MalformedProgram("embedding needs a Hermitian matrix".into()));
    }
    Ok(real_embedding(m))
}

fn real_embedding(m: &CMatrix) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Clarabel's scaled upper-triangular column-major vectorization.
fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in 0..=j {
            let v = if i == j { m[(i, j)] } else { std::f64::consts::SQRT_2 * m[(i, j)] };
            out.push(v);
        }
    }
    out
}

/// Real parametrization of one Hermitian variable: `X = Σ_k x_k B_k`.
#[derive(Clone, Copy)]
enum Basis {
    Diag(usize),
    Re(usize, usize),
    Im(usize, usize),
}

fn basis_of(dim: usize) -> Vec<Basis> {
    let mut b: Vec<Basis> = (0..dim).map(Basis::Diag).collect();
    for i in 0..dim {
        for j in (i + 1)..dim {
            b.push(Basis::Re(i, j));
            b.push(Basis::Im(i, j));
        }
    }
    b
}

fn basis_matrix(dim: usize, b: Basis) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    match b {
        Basis::Diag(i) => m[(i, i)] = C64::new(1.0, 0.0),
        Basis::Re(i, j) => {
            m[(i, j)] = C64::new(1.0, 0.0);
            m[(j, i)] = C64::new(1.0, 0.0);
        }
        Basis::Im(i, j) => {
            m[(i, j)] = C64::new(0.0, 1.0);
            m[(j, i)] = C64::new(0.0, -1.0);
        }
    }
    m
}

/// `Re tr(C B)` for a Hermitian `C`.
fn trace_coeff(c: &CMatrix, b: Basis) -> f64 {
    match b {
        Basis::Diag(i) => c[(i, i)].re,
        Basis::Re(i, j) => 2.0 * c[(i, j)].re,
        Basis::Im(i, j) => 2.0 * c[(i, j)].im,
    }
}

struct Layout {
    mat_offset: Vec<usize>,
    mat_basis: Vec<Vec<Basis>>,
    scalar_offset: usize,
    log_offset: usize,
    n: usize,
}

impl Layout {
    fn new(prog: &ConicProgram) -> Self {
        let mut off = 0;
        let mut mat_offset = Vec::new();
        let mut mat_basis = Vec::new();
        for (_, d) in &prog.matrix_vars {
            mat_offset.push(off);
            let b = basis_of(*d);
            off += b.len();
            mat_basis.push(b);
        }
        let scalar_offset = off;
        off += prog.scalar_vars.len();
        let log_offset = off;
        off += prog.logs.len();
        Self { mat_offset, mat_basis, scalar_offset, log_offset, n: off }
    }

    /// Dense coefficient row of an affine expression (without constant).
    fn row(&self, e: &AffineExpr) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (s, a) in &e.scalars {
            out.push((self.scalar_offset + s.0, *a));
        }
        for (x, c) in &e.traces {
            for (k, b) in self.mat_basis[x.0].iter().enumerate() {
                let v = trace_coeff(c.as_matrix(), *b);
                if v != 0.0 {
                    out.push((self.mat_offset[x.0] + k, v));
                }
            }
        }
        out
    }

    fn unpack(&self, prog: &ConicProgram, x: &[f64]) -> (Vec<HermitianMatrix>, Vec<f64>) {
        let mats = prog
            .matrix_vars
            .iter()
            .enumerate()
            .map(|(v, (_, d))| {
                let mut m = CMatrix::zeros(*d, *d);
                for (k, b) in self.mat_basis[v].iter().enumerate() {
                    m += basis_matrix(*d, *b) * C64::new(x[self.mat_offset[v] + k], 0.0);
                }
                project_psd(&HermitianMatrix::symmetrized(m))
            })
            .collect();
        let scalars = x[self.scalar_offset..self.scalar_offset + prog.scalar_vars.len()].to_vec();
        (mats, scalars)
    }
}

struct Rows {
    ii: Vec<usize>,
    jj: Vec<usize>,
    vv: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    fn push_row(&mut self, coeffs: &[(usize, f64)], rhs: f64) {
        let r = self.b.len();
        for &(j, v) in coeffs {
            self.ii.push(r);
            self.jj.push(j);
            self.vv.push(v);
        }
        self.b.push(rhs);
    }
}

/// Solve `prog` to the requested tolerances.
///
/// The returned status is `Optimal` only when the interior-point method
/// converged and the independently recomputed primal residual is within
/// `feas_tol` scaled by the data magnitude.
pub fn solve_conic(prog: &ConicProgram, opts: &SolveOptions) -> Result<ConicSolution, ConicError> {
    prog.validate()?;
    let layout = Layout::new(prog);
    let mut rows = Rows { ii: Vec::new(), jj: Vec::new(), vv: Vec::new(), b: Vec::new() };
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();

    // A x + s = b, s ∈ K. For `expr = a·x + c` a slack `s = expr` needs row `−a`, rhs `c`.
    let neg = |r: Vec<(usize, f64)>| r.into_iter().map(|(j, v)| (j, -v)).collect::<Vec<_>>();

    let eqs: Vec<_> = prog.constraints.iter().filter(|c| c.sense == Sense::Eq).collect();
    for c in &eqs {
        rows.push_row(&neg(layout.row(&c.expr)), c.expr.constant);
    }
    if !eqs.is_empty() {
        cones.push(SupportedConeT::ZeroConeT(eqs.len()));
    }

    let mut n_nonneg = 0;
    let mut ineq_rows = Vec::new();
    for c in prog.constraints.iter().filter(|c| c.sense != Sense::Eq) {
        ineq_rows.push(rows.b.len());
        let row = layout.row(&c.expr);
        match c.sense {
            Sense::Ge => rows.push_row(&neg(row), c.expr.constant),
            Sense::Le => rows.push_row(&row, -c.expr.constant),
            Sense::Eq => unreachable!(),
        }
        n_nonneg += 1;
    }
    for (i, (_, b)) in prog.scalar_vars.iter().enumerate() {
        if *b == Bound::NonNegative {
            rows.push_row(&[(layout.scalar_offset + i, -1.0)], 0.0);
            n_nonneg += 1;
        }
    }
    if n_nonneg > 0 {
        cones.push(SupportedConeT::NonnegativeConeT(n_nonneg));
    }

    // (t, 1, arg) ∈ K_exp  ⇔  t ≤ ln(arg)
    for (j, t) in prog.logs.iter().enumerate() {
        rows.push_row(&[(layout.log_offset + j, -1.0)], 0.0);
        rows.push_row(&[], 1.0);
        rows.push_row(&neg(layout.row(&t.arg)), t.arg.constant);
        cones.push(SupportedConeT::ExponentialConeT());
    }

    // PSD variables
    for (v, (_, d)) in prog.matrix_vars.iter().enumerate() {
        let per_k: Vec<Vec<f64>> = layout.mat_basis[v].iter().map(|b| svec(&real_embedding(&basis_matrix(*d, *b)))).collect();
        push_psd_rows(&mut rows, 2 * d, |r| {
            per_k.iter().enumerate().filter(|(_, s)| s[r] != 0.0).map(|(k, s)| (layout.mat_offset[v] + k, -s[r])).collect()
        }, &vec![0.0; 2 * d * (2 * d + 1) / 2]);
        cones.push(SupportedConeT::PSDTriangleConeT(2 * d));
    }

    // LMIs
    for lmi in &prog.lmis {
        let mut cols: Vec<(usize, Vec<f64>)> = Vec::new();
        for (s, c) in &lmi.scalars {
            cols.push((layout.scalar_offset + s.0, svec(&real_embedding(c))));
        }
        for (x, a, e) in &lmi.congruences {
            let d = prog.matrix_vars[x.0].1;
            for (k, b) in layout.mat_basis[x.0].iter().enumerate() {
                let blk = e.adjoint() * basis_matrix(d, *b) * e * C64::new(*a, 0.0);
                cols.push((layout.mat_offset[x.0] + k, svec(&real_embedding(&blk))));
            }
        }
        let rhs = svec(&real_embedding(&lmi.constant));
        push_psd_rows(&mut rows, 2 * lmi.dim, |r| {
            cols.iter().filter(|(_, s)| s[r] != 0.0).map(|(j, s)| (*j, -s[r])).collect()
        }, &rhs);
        cones.push(SupportedConeT::PSDTriangleConeT(2 * lmi.dim));
    }

    let m = rows.b.len();
    let n = layout.n;
    let mut q = vec![0.0; n];
    for (j, v) in layout.row(&prog.linear) {
        q[j] -= v;
    }
    for (j, t) in prog.logs.iter().enumerate() {
        q[layout.log_offset + j] -= t.weight;
    }

    let a = CscMatrix::new_from_triplets(m, n, rows.ii, rows.jj, rows.vv);
    let p = CscMatrix::zeros((n, n));

    let attempt = |step: f64, tol_scale: f64, b: &[f64]| -> Result<ConicSolution, ConicError> {
        let settings = DefaultSettings {
            verbose: false,
            max_iter: opts.max_iters,
            tol_feas: opts.feas_tol * tol_scale,
            tol_gap_abs: opts.opt_tol,
            tol_gap_rel: opts.opt_tol,
            max_step_fraction: step,
            presolve_enable: false,
            ..DefaultSettings::default()
        };
        let mut solver = DefaultSolver::new(&p, &q, &a, b, &cones, settings).map_err(|e| ConicError::MalformedProgram(format!("{e:?}")))?;
        solver.solve();
        let sol = &solver.solution;
        let (matrices, scalars) = layout.unpack(prog, &sol.x);
        let primal_residual = prog.max_violation(&matrices, &scalars);
        let objective = prog.objective_at(&matrices, &scalars);
        let converged = matches!(
            sol.status,
            SolverStatus::Solved | SolverStatus::AlmostSolved | SolverStatus::InsufficientProgress
        );
        let status = match sol.status {
            _ if converged && primal_residual <= opts.feas_tol && objective.is_finite() => ConicStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => ConicStatus::Infeasible,
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => ConicStatus::Unbounded,
            _ => ConicStatus::MaxIterations,
        };
        Ok(ConicSolution { matrices, scalars, objective, primal_residual, status, converged, iterations: sol.iterations })
    };

    // Exponential-cone solves occasionally stall short of `feas_tol`; shorter
    // steps usually get past the stall. The last attempt tightens the solver's own
    // tolerance for residuals that land just above `feas_tol`.
    let mut best: Option<ConicSolution> = None;
    for &(step, tol_scale) in &ATTEMPTS {
        let cand = attempt(step, tol_scale, &rows.b)?;
        if cand.status != ConicStatus::MaxIterations {
            return Ok(cand);
        }
        if best.as_ref().map_or(true, |b| cand.primal_residual < b.primal_residual) {
            best = Some(cand);
        }
    }
    let best = best.expect("at least one attempt");
    if !best.converged {
        return Ok(best);
    }
    // The solver's feasibility tolerance is relative to the iterate norm, so a
    // converged point can miss a small-magnitude row by more than `feas_tol`.
    // Backing every inequality off by a multiple of that row's scale absorbs the miss.
    for factor in BACKOFF {
        let mut b = rows.b.clone();
        for (c, &r) in prog.constraints.iter().filter(|c| c.sense != Sense::Eq).zip(&ineq_rows) {
            b[r] -= factor * opts.feas_tol * c.expr.magnitude(&best.matrices, &best.scalars);
        }
        let backed_off = attempt(ATTEMPTS[0].0, ATTEMPTS[0].1, &b)?;
        if backed_off.status == ConicStatus::Optimal {
            return Ok(backed_off);
        }
    }
    Ok(best)
}

/// `(max_step_fraction, tolerance scale)` per attempt.
const ATTEMPTS: [(f64, f64); 5] = [(0.99, 1.0), (0.95, 1.0), (0.9, 1.0), (0.8, 1.0), (0.99, 1e-2)];

/// Inequality back-offs of the final attempts, in units of `feas_tol` times the row
/// magnitude; each tightens a row by at most `1e3·feas_tol` of its scale.
const BACKOFF: [f64; 3] = [10.0, 100.0, 1000.0];

/// Nearest PSD matrix in Frobenius norm.
fn project_psd(m: &HermitianMatrix) -> HermitianMatrix {
    let (vals, vecs) = m.eigen_desc();
    if vals.last().map_or(true, |v| *v >= 0.0) {
        return m.clone();
    }
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|v| C64::new(v.max(0.0), 0.0))));
    HermitianMatrix::symmetrized(&vecs * d * vecs.adjoint())
}

fn push_psd_rows(rows: &mut Rows, real_dim: usize, coeffs_of_row: impl Fn(usize) -> Vec<(usize, f64)>, rhs: &[f64]) {
    let len = real_dim * (real_dim + 1) / 2;
    for r in 0..len {
        rows.push_row(&coeffs_of_row(r), rhs[r]);
    }
}
