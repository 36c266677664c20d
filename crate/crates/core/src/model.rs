//! Domain types and closed-form performance metrics.
//!
//! Everything here is watt-denominated and uses base-2 logarithms for rates.
//! Transmit covariances are Hermitian positive semidefinite matrices; the
//! beamformer of a rank-one covariance `Q = q qᴴ` is recovered with
//! [`rank_one_extract`].

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// `ln 2`, the single conversion constant between natural-log and bit units.
pub const LN_2: f64 = std::f64::consts::LN_2;

/// Entrywise tolerance used when checking that input data is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default acceptance threshold for `λ₂/λ₁` in [`rank_one_extract`].
pub const RANK_ONE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not rank one (eigenvalue ratio {ratio:.3e})")]
    NotRankOne { ratio: f64 },
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

/// Scalar network constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_t: usize,
    /// Equivalent noise variance at the secondary receiver (W).
    pub sigma_su_sq: f64,
    /// Equivalent noise variance at the energy receiver (W).
    pub sigma_er_sq: f64,
    /// Circuit power (W).
    pub p_c: f64,
    /// Power amplifier efficiency.
    pub xi: f64,
    /// Transmit power budget (W).
    pub p_tx: f64,
    /// Interference leakage tolerance at the primary receiver (W).
    pub p_f: f64,
    /// Minimum harvested power at the energy receiver (W).
    pub omega_s: f64,
    /// Energy-harvesting conversion efficiency.
    pub zeta_eh: f64,
    /// Target secrecy rate (bits/s/Hz).
    pub r_d: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            n_t: 3,
            sigma_su_sq: 1.0,
            sigma_er_sq: 1.0,
            p_c: 1.0,
            xi: 1.0,
            p_tx: 100.0,
            p_f: 1.0,
            omega_s: 0.01,
            zeta_eh: 0.5,
            r_d: 0.5,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        fn positive(name: &'static str, v: f64) -> Result<(), ModelError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { name, reason: format!("must be > 0, got {v}") })
            }
        }
        fn nonnegative(name: &'static str, v: f64) -> Result<(), ModelError> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { name, reason: format!("must be >= 0, got {v}") })
            }
        }
        fn unit_interval(name: &'static str, v: f64) -> Result<(), ModelError> {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { name, reason: format!("must lie in (0, 1], got {v}") })
            }
        }
        if self.n_t == 0 {
            return Err(ModelError::InvalidParameter { name: "n_t", reason: "must be >= 1".into() });
        }
        positive("sigma_su_sq", self.sigma_su_sq)?;
        positive("sigma_er_sq", self.sigma_er_sq)?;
        positive("p_c", self.p_c)?;
        positive("p_tx", self.p_tx)?;
        positive("p_f", self.p_f)?;
        nonnegative("omega_s", self.omega_s)?;
        nonnegative("r_d", self.r_d)?;
        unit_interval("xi", self.xi)?;
        unit_interval("zeta_eh", self.zeta_eh)?;
        Ok(())
    }
}

/// Outage probabilities for the SEE, secrecy-rate and harvesting events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for OutageSpec {
    fn default() -> Self {
        Self { alpha: 0.1, beta: 0.1, gamma: 0.1 }
    }
}

impl OutageSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v > 0.0 && v < 0.5) {
                return Err(ModelError::InvalidParameter { name, reason: format!("must lie in (0, 0.5), got {v}") });
            }
        }
        Ok(())
    }
}

/// Complex Hermitian matrix. Construction checks Hermitian symmetry and
/// stores the exactly-symmetrized copy.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self, ModelError> {
        if !m.is_square() {
            return Err(ModelError::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let asym = max_asymmetry(&m);
        if asym > HERMITIAN_TOL {
            return Err(ModelError::NotHermitian(asym));
        }
        Ok(Self::symmetrized(m))
    }

    /// `(M + Mᴴ)/2` without any tolerance check. Used for solver output.
    pub fn symmetrized(m: CMatrix) -> Self {
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Self(h)
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self(CMatrix::from_fn(n, n, |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) }))
    }

    /// `v vᴴ`
    pub fn outer(v: &CVector) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(&self.0 * C64::new(a, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    /// `vᴴ M v`, which is real for Hermitian `M`.
    pub fn quad_form(&self, v: &CVector) -> Result<f64, ModelError> {
        check_dim(self.dim(), v.len())?;
        Ok(v.dotc(&(&self.0 * v)).re)
    }

    /// `Re tr(self · other)`
    pub fn inner(&self, other: &Self) -> Result<f64, ModelError> {
        check_dim(self.dim(), other.dim())?;
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.0[(i, j)] * other.0[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    /// Eigenvalues in descending order with matching eigenvectors (columns).
    pub fn eigen_desc(&self) -> (Vec<f64>, CMatrix) {
        let eig = SymmetricEigen::new(self.0.clone());
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen_desc().0.last().copied().unwrap_or(0.0)
    }
}

fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_dim(expected: usize, found: usize) -> Result<(), ModelError> {
    if expected == found {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch { expected, found })
    }
}

/// Radii of the norm-bounded channel errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBounds {
    pub eps_s: f64,
    pub eps_p: f64,
    pub eps_e: f64,
}

impl ErrorBounds {
    pub fn uniform(eps: f64) -> Self {
        Self { eps_s: eps, eps_p: eps, eps_e: eps }
    }
}

/// Channels from the secondary transmitter to the secondary receiver (`h_s`),
/// the primary receiver (`h_p`) and the energy receiver (`h_e`).
///
/// Under the norm-bounded regime the three vectors are the transmitter's
/// estimates `ĥ` and `bounds` carries the error radii. Under the statistical
/// regime `g_e` is the covariance the designer sees; `h_e` is then one
/// realization that the designer never uses.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h_s: CVector,
    pub h_p: CVector,
    pub h_e: CVector,
    pub g_e: Option<HermitianMatrix>,
    pub bounds: Option<ErrorBounds>,
}

impl ChannelSet {
    pub fn new(h_s: CVector, h_p: CVector, h_e: CVector) -> Result<Self, ModelError> {
        let n = h_s.len();
        check_dim(n, h_p.len())?;
        check_dim(n, h_e.len())?;
        Ok(Self { h_s, h_p, h_e, g_e: None, bounds: None })
    }

    pub fn with_covariance(mut self, g_e: HermitianMatrix) -> Result<Self, ModelError> {
        check_dim(self.n_t(), g_e.dim())?;
        if !validate_hermitian_psd(&g_e, 1e-8) {
            return Err(ModelError::InvalidParameter { name: "g_e", reason: "must be PSD".into() });
        }
        self.g_e = Some(g_e);
        Ok(self)
    }

    pub fn with_bounds(mut self, bounds: ErrorBounds) -> Result<Self, ModelError> {
        for (name, v) in [("eps_s", bounds.eps_s), ("eps_p", bounds.eps_p), ("eps_e", bounds.eps_e)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::InvalidParameter { name, reason: format!("must be >= 0, got {v}") });
            }
        }
        self.bounds = Some(bounds);
        Ok(self)
    }

    pub fn n_t(&self) -> usize {
        self.h_s.len()
    }
}

/// Outcome classification shared by all maximizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    MaxIterations,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "Optimal",
            Status::Infeasible => "Infeasible",
            Status::MaxIterations => "MaxIterations",
        })
    }
}

/// Monte Carlo check of the statistical-regime outage constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageCheck {
    pub rate_outage: f64,
    pub harvest_outage: f64,
    pub samples: usize,
}

/// Exact worst-case constraint values over the error ellipsoids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCaseCheck {
    pub secrecy_rate: f64,
    pub harvested_power: f64,
    pub leakage: f64,
}

/// Result bundle of every maximizer and baseline.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub q_cov: HermitianMatrix,
    /// Principal-eigenvector beamformer; `None` when `q_cov` is not rank one.
    pub q_beam: Option<CVector>,
    /// Secrecy energy efficiency (bits/J/Hz) of `q_cov` under the regime's rate model.
    pub see: f64,
    /// Secrecy rate (bits/s/Hz) under the regime's rate model.
    pub secrecy_rate: f64,
    /// `tr(q_cov)` (W).
    pub tx_power: f64,
    pub lambda_trace: Vec<f64>,
    /// `F(λ_i)` for every outer iteration.
    pub f_trace: Vec<f64>,
    pub inner_iters: Vec<usize>,
    pub residual: f64,
    pub rank_ratio: f64,
    pub status: Status,
    pub outage: Option<OutageCheck>,
    pub worst_case: Option<WorstCaseCheck>,
}

impl SolveReport {
    /// The report of an instance with no feasible point: zero SEE and zero covariance.
    pub fn infeasible(n_t: usize) -> Self {
        Self {
            q_cov: HermitianMatrix::zeros(n_t),
            q_beam: None,
            see: 0.0,
            secrecy_rate: 0.0,
            tx_power: 0.0,
            lambda_trace: Vec::new(),
            f_trace: Vec::new(),
            inner_iters: Vec::new(),
            residual: f64::NAN,
            rank_ratio: f64::NAN,
            status: Status::Infeasible,
            outage: None,
            worst_case: None,
        }
    }

    pub fn outer_iters(&self) -> usize {
        self.lambda_trace.len()
    }

    pub fn total_inner_iters(&self) -> usize {
        self.inner_iters.iter().sum()
    }

    /// Fill `q_cov`-derived fields (power, rank ratio, beam).
    pub(crate) fn from_covariance(q: HermitianMatrix, rate: f64, total_power: f64, status: Status) -> Self {
        let tx_power = q.trace();
        let rank_ratio = eigen_ratio(&q);
        let q_beam = rank_one_extract(&q, RANK_ONE_TOL).ok().map(|(b, _)| b);
        Self {
            see: rate / total_power,
            secrecy_rate: rate,
            tx_power,
            q_cov: q,
            q_beam,
            lambda_trace: Vec::new(),
            f_trace: Vec::new(),
            inner_iters: Vec::new(),
            residual: f64::NAN,
            rank_ratio,
            status,
            outage: None,
            worst_case: None,
        }
    }
}

/// `λ₂/λ₁` of a PSD matrix, `0` for dimension one and `NaN` for the zero matrix.
pub fn eigen_ratio(q: &HermitianMatrix) -> f64 {
    let (vals, _) = q.eigen_desc();
    match vals.as_slice() {
        [] => f64::NAN,
        [l1] => {
            if *l1 > 0.0 {
                0.0
            } else {
                f64::NAN
            }
        }
        [l1, l2, ..] => {
            if *l1 > 0.0 {
                l2.max(0.0) / l1
            } else {
                f64::NAN
            }
        }
    }
}

/// `log2(1 + hᴴQh/σ²)`
pub fn link_rate(q: &HermitianMatrix, h: &CVector, noise: f64) -> Result<f64, ModelError> {
    Ok((1.0 + q.quad_form(h)? / noise).log2())
}

/// Secrecy rate `log2(1 + h_sᴴQh_s/σ_su²) − log2(1 + h_eᴴQh_e/σ_er²)`; may be negative.
pub fn secrecy_rate(q: &HermitianMatrix, ch: &ChannelSet, params: &SystemParams) -> Result<f64, ModelError> {
    check_dim(ch.n_t(), q.dim())?;
    Ok(link_rate(q, &ch.h_s, params.sigma_su_sq)? - link_rate(q, &ch.h_e, params.sigma_er_sq)?)
}

/// Secrecy energy efficiency in bits/J/Hz.
pub fn see_value(q: &HermitianMatrix, ch: &ChannelSet, params: &SystemParams) -> Result<f64, ModelError> {
    let rate = secrecy_rate(q, ch, params)?;
    Ok(rate / total_power(q, params))
}

/// `(tr Q + P_c)/ξ`
pub fn total_power(q: &HermitianMatrix, params: &SystemParams) -> f64 {
    (q.trace() + params.p_c) / params.xi
}

/// Interference leakage `h_pᴴQh_p` at the primary receiver.
pub fn interference_leakage(q: &HermitianMatrix, h_p: &CVector) -> Result<f64, ModelError> {
    q.quad_form(h_p)
}

/// Linear-model harvested power `ζ_eh · h_eᴴQh_e`.
pub fn harvested_power(q: &HermitianMatrix, h_e: &CVector, zeta_eh: f64) -> Result<f64, ModelError> {
    Ok(zeta_eh * q.quad_form(h_e)?)
}

/// Recover the beamformer `√λ₁·v₁` of a (numerically) rank-one PSD matrix.
///
/// The returned vector's first non-negligible entry is real and nonnegative.
/// Fails with `NotRankOne` when `λ₂/λ₁ > tol`.
pub fn rank_one_extract(q: &HermitianMatrix, tol: f64) -> Result<(CVector, f64), ModelError> {
    let (vals, vecs) = q.eigen_desc();
    let l1 = vals.first().copied().unwrap_or(0.0);
    if !(l1 > 0.0) {
        return Err(ModelError::ZeroMatrix);
    }
    let residual = vals.get(1).map_or(0.0, |l2| l2.max(0.0) / l1);
    if residual > tol {
        return Err(ModelError::NotRankOne { ratio: residual });
    }
    let mut beam: CVector = vecs.column(0).into_owned() * C64::new(l1.sqrt(), 0.0);
    normalize_phase(&mut beam);
    Ok((beam, residual))
}

/// Rotate `v` so that its first entry with magnitude above `1e-12·‖v‖` is real and nonnegative.
pub fn normalize_phase(v: &mut CVector) {
    let scale = v.norm();
    if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-12 * scale).copied() {
        let rot = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// True iff `m` is Hermitian within `tol` (entrywise) and its minimum eigenvalue is at least `−tol·tr(m)`.
pub fn validate_hermitian_psd(m: &HermitianMatrix, tol: f64) -> bool {
    if max_asymmetry(&m.0) > tol {
        return false;
    }
    let trace = m.trace();
    m.min_eigenvalue() >= -tol * trace.abs()
}

/// Same check on raw (possibly non-Hermitian) data.
pub fn validate_matrix_psd(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() || max_asymmetry(m) > tol {
        return false;
    }
    validate_hermitian_psd(&HermitianMatrix::symmetrized(m.clone()), tol)
}
