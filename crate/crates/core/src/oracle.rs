//! Exhaustive search over rank-one beamformers for small `n_t`, and a certified
//! upper bound from the semidefinite relaxation. Both are references for tests.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use thiserror::Error;

use crate::conic::SolveOptions;
use crate::dinkelbach::AlgoError;
use crate::model::{harvested_power, interference_leakage, ChannelSet, CVector, ErrorBounds, HermitianMatrix, ModelError, SystemParams, C64};
use crate::robust::{compute_nu_min, solve_inner_theta};

pub const MIN_RESOLUTION: usize = 8;
/// Lowest grid power, relative to `P_tx`.
const POWER_FLOOR: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("no grid point satisfies the constraints")]
    NoFeasiblePoint,
    #[error("grid search supports n_t in {{2, 3}}, got {0}")]
    UnsupportedDimension(usize),
    #[error("resolution must be at least {MIN_RESOLUTION}, got {0}")]
    ResolutionTooSmall(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Unit vector with a real, nonnegative first coordinate.
fn direction(thetas: &[f64], phis: &[f64]) -> CVector {
    match (thetas, phis) {
        ([t], [p]) => CVector::from_vec(vec![C64::new(t.cos(), 0.0), C64::from_polar(t.sin(), *p)]),
        ([t1, t2], [p1, p2]) => CVector::from_vec(vec![
            C64::new(t1.cos(), 0.0),
            C64::from_polar(t1.sin() * t2.cos(), *p1),
            C64::from_polar(t1.sin() * t2.sin(), *p2),
        ]),
        _ => unreachable!("one or two angle pairs"),
    }
}

fn angle_grid(res: usize) -> (Vec<f64>, Vec<f64>) {
    let polar = (0..res).map(|i| FRAC_PI_2 * i as f64 / (res - 1) as f64).collect();
    let azimuth = (0..res).map(|j| 2.0 * PI * j as f64 / res as f64).collect();
    (polar, azimuth)
}

/// Per-unit-power gains of one direction.
struct Gains {
    snr_s: f64,
    snr_e: f64,
    harvest: f64,
    leakage: f64,
}

fn gains(v: &CVector, ch: &ChannelSet, params: &SystemParams) -> Result<Gains, ModelError> {
    let q = HermitianMatrix::outer(v);
    Ok(Gains {
        snr_s: q.quad_form(&ch.h_s)? / params.sigma_su_sq,
        snr_e: q.quad_form(&ch.h_e)? / params.sigma_er_sq,
        harvest: harvested_power(&q, &ch.h_e, params.zeta_eh)?,
        leakage: interference_leakage(&q, &ch.h_p)?,
    })
}

/// Best feasible SEE of direction `g` over the power grid.
fn best_power(g: &Gains, powers: &[f64], params: &SystemParams) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &p in powers {
        let rate = (1.0 + p * g.snr_s).log2() - (1.0 + p * g.snr_e).log2();
        let feasible = rate >= params.r_d && p * g.harvest >= params.omega_s && p * g.leakage <= params.p_f;
        if feasible {
            let see = rate * params.xi / (p + params.p_c);
            if best.map_or(true, |b| see > b.1) {
                best = Some((p, see));
            }
        }
    }
    best
}

/// Exhaustive search over `q = √p·v`: `angular_res` points per angle, `power_res`
/// log-spaced powers in `[P_tx·1e-4, P_tx]`. Returns the best beam and its SEE.
pub fn grid_search_see(ch: &ChannelSet, params: &SystemParams, angular_res: usize, power_res: usize) -> Result<(CVector, f64), OracleError> {
    params.validate()?;
    let n = ch.n_t();
    if n != 2 && n != 3 {
        return Err(OracleError::UnsupportedDimension(n));
    }
    for r in [angular_res, power_res] {
        if r < MIN_RESOLUTION {
            return Err(OracleError::ResolutionTooSmall(r));
        }
    }
    let lo = params.p_tx * POWER_FLOOR;
    let powers: Vec<f64> = (0..power_res).map(|k| lo * (params.p_tx / lo).powf(k as f64 / (power_res - 1) as f64)).collect();
    let (polar, azimuth) = angle_grid(angular_res);
    let angles: Vec<(Vec<f64>, Vec<f64>)> = if n == 2 {
        polar.iter().flat_map(|&t| azimuth.iter().map(move |&p| (vec![t], vec![p]))).collect()
    } else {
        let pairs: Vec<(f64, f64)> = polar.iter().flat_map(|&t| azimuth.iter().map(move |&p| (t, p))).collect();
        pairs.iter().flat_map(|&(t1, p1)| pairs.iter().map(move |&(t2, p2)| (vec![t1, t2], vec![p1, p2]))).collect()
    };
    let best = angles
        .par_iter()
        .enumerate()
        .map(|(i, (t, p))| -> Result<Option<(usize, f64, f64)>, ModelError> {
            let v = direction(t, p);
            Ok(best_power(&gains(&v, ch, params)?, &powers, params).map(|(pw, see)| (i, pw, see)))
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        // Ties resolve to the lowest index, independent of scheduling.
        .fold(None, |acc: Option<(usize, f64, f64)>, c| match acc {
            Some(a) if a.2 >= c.2 => Some(a),
            _ => Some(c),
        });
    let (i, p, see) = best.ok_or(OracleError::NoFeasiblePoint)?;
    let (t, ph) = &angles[i];
    Ok((direction(t, ph).scale(p.sqrt()), see))
}

/// Upper bound on the SEE of any feasible `Q` from the relaxed (rank-free) problem.
///
/// `θ(t) = max (1 + SNR_s)/(1 + SNR_e)` over `tr Q ≤ t` is exact and nondecreasing
/// in `t`, so on `[t_k, t_{k+1}]` the SEE is at most `ξ·log2 θ(t_{k+1})/(t_k + P_c)`.
/// The partition starts at the minimum feasible power and is geometric up to `P_tx`.
/// Returns 0 when the relaxation is infeasible.
pub fn relaxed_see_upper_bound(ch: &ChannelSet, params: &SystemParams, segments: usize, opts: &SolveOptions) -> Result<f64, AlgoError> {
    let nominal = ChannelSet { g_e: None, bounds: Some(ErrorBounds::uniform(0.0)), ..ch.clone() };
    let t_min = match compute_nu_min(&nominal, params, opts) {
        Ok((t, _)) => t.max(0.0),
        Err(AlgoError::Infeasible) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let start = t_min.max(params.p_tx * 1e-6).min(params.p_tx);
    let segments = segments.max(1);
    let mut knots = vec![t_min];
    knots.extend((0..=segments).map(|k| start * (params.p_tx / start).powf(k as f64 / segments as f64)));
    knots.dedup_by(|a, b| *a <= *b);
    let thetas = knots[1..]
        .par_iter()
        .map(|&t| match solve_inner_theta(1.0, t + params.p_c, &nominal, params, opts) {
            Ok((theta, _)) => Ok(theta),
            Err(AlgoError::Infeasible) => Ok(0.0),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<f64>, AlgoError>>()?;
    let bound = knots
        .windows(2)
        .zip(&thetas)
        .filter(|(_, th)| **th > 0.0)
        .map(|(w, th)| th.log2() * params.xi / (w[0] + params.p_c))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(bound.max(0.0))
}
