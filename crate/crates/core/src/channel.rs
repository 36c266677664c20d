//! Channel generation, error-ball sampling and Monte Carlo outage estimation.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::model::{ChannelSet, CMatrix, CVector, ErrorBounds, HermitianMatrix, ModelError, SystemParams, C64};

/// Large-scale geometry and seed of one random scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGenConfig {
    pub n_t: usize,
    /// Distances to the secondary receiver, primary receiver and energy receiver.
    pub distances: (f64, f64, f64),
    pub pathloss_exp: f64,
    pub seed: u64,
}

impl Default for ChannelGenConfig {
    fn default() -> Self {
        Self { n_t: 3, distances: (1.0, 1.0, 1.0), pathloss_exp: 2.7, seed: 0 }
    }
}

impl ChannelGenConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let (ds, dp, de) = self.distances;
        for (name, v) in [("d_s", ds), ("d_p", dp), ("d_e", de), ("pathloss_exp", self.pathloss_exp)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParameter { name, reason: format!("must be > 0, got {v}") });
            }
        }
        if self.n_t == 0 {
            return Err(ModelError::InvalidParameter { name: "n_t", reason: "must be >= 1".into() });
        }
        Ok(())
    }
}

/// CSI model a scenario is generated for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScenarioRegime {
    Perfect,
    /// `G_e = a²·I`; the stored `h_e` is one draw from `CN(0, G_e)`.
    Statistical { a_sq: f64 },
    Ellipsoidal { eps_s: f64, eps_p: f64, eps_e: f64 },
}

/// Event whose frequency [`empirical_outage`] estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutageEvent {
    SeeBelow(f64),
    RateBelow(f64),
    HarvestBelow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationMode {
    /// Uniform in the ball.
    Interior,
    /// Uniform on the sphere of radius `eps`.
    Boundary,
}

/// One `CN(0, 1)` draw, `(x + iy)/√2`.
pub fn sample_cn<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    C64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn sample_cn_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| sample_cn(rng))
}

/// `χ·√(d^{−α})` with `χ ~ CN(0, I)`.
pub fn sample_rayleigh_channel<R: Rng + ?Sized>(n_t: usize, d: f64, pathloss_exp: f64, rng: &mut R) -> CVector {
    let scale = d.powf(-pathloss_exp).sqrt();
    sample_cn_vector(n_t, rng) * C64::new(scale, 0.0)
}

/// Square-root factor `V·√max(D, 0)` of a PSD covariance.
pub fn covariance_factor(g: &HermitianMatrix) -> CMatrix {
    let (vals, vecs) = g.eigen_desc();
    let mut f = vecs;
    for (j, v) in vals.iter().enumerate() {
        let s = C64::new(v.max(0.0).sqrt(), 0.0);
        for i in 0..f.nrows() {
            f[(i, j)] *= s;
        }
    }
    f
}

/// One draw from `CN(0, G)`.
pub fn sample_cn_with_cov<R: Rng + ?Sized>(g: &HermitianMatrix, rng: &mut R) -> CVector {
    covariance_factor(g) * sample_cn_vector(g.dim(), rng)
}

/// Assemble a scenario. The small-scale draws `χ_s, χ_p, χ_e` are taken in
/// that order from the seed, so every regime sees the same `h_s` and `h_p`
/// for a given seed.
pub fn make_scenario(params: &SystemParams, regime: ScenarioRegime, cfg: &ChannelGenConfig) -> Result<ChannelSet, ModelError> {
    params.validate()?;
    cfg.validate()?;
    if params.n_t != cfg.n_t {
        return Err(ModelError::DimensionMismatch { expected: params.n_t, found: cfg.n_t });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (ds, dp, de) = cfg.distances;
    let h_s = sample_rayleigh_channel(cfg.n_t, ds, cfg.pathloss_exp, &mut rng);
    let h_p = sample_rayleigh_channel(cfg.n_t, dp, cfg.pathloss_exp, &mut rng);
    match regime {
        ScenarioRegime::Perfect => {
            let h_e = sample_rayleigh_channel(cfg.n_t, de, cfg.pathloss_exp, &mut rng);
            ChannelSet::new(h_s, h_p, h_e)
        }
        ScenarioRegime::Statistical { a_sq } => {
            if !(a_sq.is_finite() && a_sq >= 0.0) {
                return Err(ModelError::InvalidParameter { name: "a_sq", reason: format!("must be >= 0, got {a_sq}") });
            }
            let g_e = HermitianMatrix::identity(cfg.n_t).scale(a_sq);
            let h_e = sample_cn_with_cov(&g_e, &mut rng);
            ChannelSet::new(h_s, h_p, h_e)?.with_covariance(g_e)
        }
        ScenarioRegime::Ellipsoidal { eps_s, eps_p, eps_e } => {
            let h_e = sample_rayleigh_channel(cfg.n_t, de, cfg.pathloss_exp, &mut rng);
            ChannelSet::new(h_s, h_p, h_e)?.with_bounds(ErrorBounds { eps_s, eps_p, eps_e })
        }
    }
}

/// `ĥ + e` with `‖e‖ ≤ eps`; the direction is uniform on the complex unit sphere.
pub fn sample_ellipsoid_perturbation<R: Rng + ?Sized>(h_hat: &CVector, eps: f64, mode: PerturbationMode, rng: &mut R) -> CVector {
    if eps == 0.0 {
        return h_hat.clone();
    }
    let n = h_hat.len();
    let mut dir = sample_cn_vector(n, rng);
    let norm = dir.norm();
    if norm == 0.0 {
        return h_hat.clone();
    }
    dir /= C64::new(norm, 0.0);
    let radius = match mode {
        PerturbationMode::Boundary => eps,
        PerturbationMode::Interior => {
            let u: f64 = rng.sample(Uniform::new(0.0, 1.0).expect("valid range"));
            eps * u.powf(1.0 / (2.0 * n as f64))
        }
    };
    h_hat + dir * C64::new(radius, 0.0)
}

/// Frequency of `event` over `n_samples` draws `h_e ~ CN(0, g_e)` with `h_s` fixed.
pub fn empirical_outage<R: Rng + ?Sized>(
    q: &HermitianMatrix,
    g_e: &HermitianMatrix,
    h_s: &CVector,
    params: &SystemParams,
    event: OutageEvent,
    n_samples: usize,
    rng: &mut R,
) -> Result<f64, ModelError> {
    if q.dim() != g_e.dim() {
        return Err(ModelError::DimensionMismatch { expected: q.dim(), found: g_e.dim() });
    }
    if n_samples == 0 {
        return Err(ModelError::InvalidParameter { name: "n_samples", reason: "must be >= 1".into() });
    }
    let factor = covariance_factor(g_e);
    let rate_s = (1.0 + q.quad_form(h_s)? / params.sigma_su_sq).log2();
    let p_tot = (q.trace() + params.p_c) / params.xi;
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let h_e = &factor * sample_cn_vector(g_e.dim(), rng);
        let x = q.quad_form(&h_e)?;
        let rate = rate_s - (1.0 + x / params.sigma_er_sq).log2();
        let hit = match event {
            OutageEvent::RateBelow(r) => rate < r,
            OutageEvent::SeeBelow(d) => rate / p_tot < d,
            OutageEvent::HarvestBelow(w) => params.zeta_eh * x < w,
        };
        hits += usize::from(hit);
    }
    Ok(hits as f64 / n_samples as f64)
}

/// Independent seed for stream `index` under `base` (SplitMix64 finalizer over a combined word).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
