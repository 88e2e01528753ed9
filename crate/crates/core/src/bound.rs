//! Upper bound on the achievable SDR under source-channel separation: the
//! MAC sum-capacity from iterative waterfilling, the distributed
//! rate-distortion sum-rate lower bound, and the sum-distortion at which the
//! two meet.
//!
//! Rates are in bits per channel use (base-2 logs on both sides, which is all
//! that matters when equating them). For more than two users only the
//! sum-rate constraint is enforced, so the bound is optimistic; the same
//! sum-rate-based bound is used for two users as well and labeled
//! approximate.

use rayon::prelude::*;

use crate::linalg::{C64, CMat, LinalgError};
use crate::model::{ChannelRealization, ModelError, RngStream, Scenario, SourceModel};

/// Waterfilling stops once a full cycle improves the sum-rate by less.
pub const WATERFILL_TOL: f64 = 1e-9;
/// Waterfilling cycle cap.
pub const WATERFILL_MAX_CYCLES: usize = 1000;
/// Residual target for the rate-equating bisection.
pub const BISECTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, thiserror::Error)]
pub enum BoundError {
    #[error("source covariance is singular; the rate-distortion bound needs rho < 1")]
    SingularCovariance,
    #[error("invalid distortion target: {0}")]
    InvalidDistortion(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Sum-capacity result: per-user transmit covariances and the attained rate.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub covariances: Vec<CMat>,
    /// Bits per channel use.
    pub sum_rate: f64,
    pub iterations: usize,
}

/// Separation bound for one channel realization.
#[derive(Debug, Clone)]
pub struct BoundResult {
    /// Sum distortion `K * D` at the rate-equating point.
    pub d_sum: f64,
    /// Residual `|R_D - R_C|` of the bisection at the returned point.
    pub residual: f64,
}

/// Monte Carlo bound curve point.
#[derive(Debug, Clone)]
pub struct BoundRow {
    pub snr_db: f64,
    pub d_sum_mean: f64,
    /// `10 log10(K * E[1/D_sum])`, comparable to the normalized SDR metric.
    pub sdr_opt_db: f64,
    /// `10 log10(E[1/D_sum])` without the user-count normalization.
    pub sdr_opt_raw_db: f64,
    pub trials: usize,
}

/// Cyclic iterative waterfilling for the MAC sum-capacity
/// `log2 |I + (1/noise_var) sum_k H_k Q_k H_k^H|` under `tr(Q_k) <= T_k`.
pub fn iterative_waterfilling(
    channel: &ChannelRealization,
    powers: &[f64],
    noise_var: f64,
    tol: f64,
    max_cycles: usize,
) -> Result<CapacityResult, BoundError> {
    let users = channel.users();
    assert_eq!(powers.len(), users);
    let nr = channel.stacked().rows();
    let nt = channel.block(0).cols();

    let mut q: Vec<CMat> = (0..users).map(|_| CMat::zeros(nt, nt)).collect();
    let mut rate = 0.0f64;
    let mut iterations = 0;

    for _cycle in 0..max_cycles {
        iterations += 1;
        for k in 0..users {
            // Noise-plus-others covariance.
            let mut cov = CMat::identity(nr).scale_re(noise_var);
            for j in 0..users {
                if j == k {
                    continue;
                }
                let hq = channel.block(j).mul(&q[j])?;
                cov = cov.add(&hq.mul(&channel.block(j).adjoint())?)?;
            }
            let cov_inv = cov.inverse()?;
            let gk = channel
                .block(k)
                .adjoint()
                .mul(&cov_inv)?
                .mul(channel.block(k))?
                .symmetrize();
            let eig = gk.herm_eig()?;
            let filled = waterfill(&eig.eigenvalues, powers[k]);
            q[k] = CMat::from_fn(nt, nt, |i, j| {
                let mut acc = C64::new(0.0, 0.0);
                for (idx, &p) in filled.iter().enumerate() {
                    acc += eig.eigenvectors[(i, idx)] * eig.eigenvectors[(j, idx)].conj() * p;
                }
                acc
            });
        }
        let new_rate = sum_rate(channel, &q, noise_var)?;
        if new_rate - rate < tol && iterations > 1 {
            rate = new_rate.max(rate);
            break;
        }
        rate = new_rate;
    }

    Ok(CapacityResult {
        covariances: q,
        sum_rate: rate,
        iterations,
    })
}

fn sum_rate(channel: &ChannelRealization, q: &[CMat], noise_var: f64) -> Result<f64, BoundError> {
    let nr = channel.stacked().rows();
    let mut m = CMat::identity(nr);
    for (k, qk) in q.iter().enumerate() {
        let hq = channel.block(k).mul(qk)?;
        m = m.add(&hq.mul(&channel.block(k).adjoint())?.scale_re(1.0 / noise_var))?;
    }
    // Hermitian positive definite by construction.
    let l = m.symmetrize().cholesky()?;
    let mut log_det = 0.0;
    for i in 0..nr {
        log_det += l[(i, i)].re.log2();
    }
    Ok(2.0 * log_det)
}

/// Exact single-constraint waterfilling: maximize `sum_i log2(1 + g_i p_i)`
/// subject to `sum p_i = budget`, `p_i >= 0`, for mode gains `g_i` sorted
/// descending.
fn waterfill(gains_desc: &[f64], budget: f64) -> Vec<f64> {
    let n = gains_desc.len();
    let mut powers = vec![0.0; n];
    let positive: Vec<f64> = gains_desc.iter().copied().take_while(|&g| g > 1e-300).collect();
    if positive.is_empty() {
        return powers;
    }
    // Find the active-mode count: level = (budget + sum 1/g_i)/m must exceed
    // 1/g_m for all active modes.
    let mut inv_sum = 0.0;
    let mut level = 0.0;
    let mut active = 0;
    for (m, &g) in positive.iter().enumerate() {
        inv_sum += 1.0 / g;
        let candidate = (budget + inv_sum) / (m + 1) as f64;
        if candidate > 1.0 / g {
            level = candidate;
            active = m + 1;
        } else {
            break;
        }
    }
    for i in 0..active {
        powers[i] = (level - 1.0 / positive[i]).max(0.0);
    }
    powers
}

/// Distributed-source sum-rate lower bound
/// `min_B log2(|C_s| / |(C_s^{-1} + B)^{-1}|)` over diagonal `B >= 0` with
/// the diagonal of `(C_s^{-1} + B)^{-1}` held at or below the targets.
pub fn sum_rate_distortion(source: &SourceModel, targets: &[f64]) -> Result<f64, BoundError> {
    let cs_inv = source.inverse().ok_or(BoundError::SingularCovariance)?;
    let k = source.users();
    if targets.len() != k {
        return Err(BoundError::InvalidDistortion(format!(
            "{} targets for {k} users",
            targets.len()
        )));
    }
    for &d in targets {
        if !(d > 0.0 && d <= 1.0) {
            return Err(BoundError::InvalidDistortion(format!(
                "per-user distortion must lie in (0, 1], got {d}"
            )));
        }
    }

    let uniform = targets.windows(2).all(|w| w[0] == w[1]);
    if uniform {
        // Symmetric case: B = b I, with b found by a scalar bisection on the
        // monotone map b -> [D_s]_11. Everything reduces to the cached
        // spectrum of C_s: D_s shares its eigenvectors and has eigenvalues
        // 1/(1/lambda_j + b).
        let d = targets[0];
        let eig = source.eigendecomposition();
        let diag_at = |b: f64| -> f64 {
            // [D_s]_ii averaged across i (they agree for a uniform C_s).
            let mut acc = 0.0;
            for i in 0..k {
                for j in 0..k {
                    acc += eig.eigenvectors[(i, j)].norm_sqr()
                        / (1.0 / eig.eigenvalues[j] + b);
                }
            }
            acc / k as f64
        };
        let b = solve_monotone_decreasing(diag_at, d, 1e-14);
        let rate: f64 = eig
            .eigenvalues
            .iter()
            .map(|&l| (l * (1.0 / l + b)).log2())
            .sum();
        return Ok(rate.max(0.0));
    }
    let b = {
        // Coordinate descent: each sweep bisects one b_i to put that user's
        // diagonal entry on target (or at its prior variance with b_i = 0).
        let mut b = vec![0.0f64; k];
        for _sweep in 0..200 {
            let mut max_move = 0.0f64;
            for i in 0..k {
                let others = b.clone();
                let diag_at = |bi: f64| -> f64 {
                    let mut m = cs_inv.clone();
                    for (j, &bj) in others.iter().enumerate() {
                        m[(j, j)] += if j == i { bi } else { bj };
                    }
                    m.inverse().expect("positive definite by construction")[(i, i)].re
                };
                let new_bi = solve_monotone_decreasing(diag_at, targets[i], 1e-13);
                max_move = max_move.max((new_bi - b[i]).abs() / (1.0 + b[i].abs()));
                b[i] = new_bi;
            }
            if max_move < 1e-12 {
                break;
            }
        }
        b
    };

    let mut m = cs_inv.clone();
    for (i, &bi) in b.iter().enumerate() {
        m[(i, i)] += bi;
    }
    let ds = m.inverse()?;
    let det_cs = source.covariance().det()?.re;
    let det_ds = ds.det()?.re;
    Ok((det_cs / det_ds).log2().max(0.0))
}

/// Find `b >= 0` with `f(b) = target` for a continuous strictly decreasing
/// `f`; returns 0 when `f(0) <= target` already.
fn solve_monotone_decreasing(f: impl Fn(f64) -> f64, target: f64, tol: f64) -> f64 {
    if f(0.0) <= target {
        return 0.0;
    }
    let mut hi = 1.0;
    while f(hi) > target {
        hi *= 2.0;
        if hi > 1e18 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < tol * (1.0 + hi) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Separation bound for a single realization: bisect the common per-user
/// distortion `D` so the sum-rate bound meets the channel sum-capacity, and
/// report `D_sum = K * D`. A vanishing capacity returns the zero-rate prior
/// distortion `tr(C_s) = K`.
pub fn separation_bound(
    channel: &ChannelRealization,
    source: &SourceModel,
    powers: &[f64],
    noise_var: f64,
) -> Result<BoundResult, BoundError> {
    if source.inverse().is_none() {
        return Err(BoundError::SingularCovariance);
    }
    let k = source.users() as f64;
    let cap = iterative_waterfilling(channel, powers, noise_var, WATERFILL_TOL, WATERFILL_MAX_CYCLES)?;
    if cap.sum_rate <= 0.0 {
        return Ok(BoundResult {
            d_sum: k,
            residual: 0.0,
        });
    }

    // R_D(D) is continuous and decreasing, R_D(1) = 0 < R_C, and it grows
    // without bound as D -> 0, so a bracket always exists.
    let rate_at = |d: f64| sum_rate_distortion(source, &vec![d; source.users()]);
    let mut lo = 1e-12;
    let mut hi = 1.0;
    // Guard the lower end: shrink until the rate exceeds capacity.
    while rate_at(lo)? < cap.sum_rate {
        lo *= 0.5;
        if lo < 1e-300 {
            break;
        }
    }
    let mut residual = f64::INFINITY;
    let mut d_star = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = rate_at(mid)?;
        let res = r - cap.sum_rate;
        if res.abs() < residual {
            residual = res.abs();
            d_star = mid;
        }
        if res > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if residual < BISECTION_TOL && (hi - lo) < 1e-15 * (1.0 + hi) {
            break;
        }
    }

    Ok(BoundResult {
        d_sum: k * d_star,
        residual,
    })
}

/// Monte Carlo bound curve over a common-SNR grid: the per-trial channel
/// streams match the experiment engine's, so bound and achieved curves share
/// realizations under the same master seed.
pub fn sdr_bound_curve(
    scenario_base: &Scenario,
    snr_grid_db: &[f64],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<BoundRow>, BoundError> {
    let source = SourceModel::uniform(scenario_base.users, scenario_base.rho)
        .map_err(BoundError::Model)?;
    if source.inverse().is_none() {
        return Err(BoundError::SingularCovariance);
    }
    let mut rows = Vec::with_capacity(snr_grid_db.len());
    for &snr in snr_grid_db {
        let scn = Scenario::with_common_snr_db(
            scenario_base.users,
            scenario_base.nt,
            scenario_base.nr,
            scenario_base.rho,
            snr,
        )?;
        let per_trial: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let stream = RngStream::new(master_seed, crate::sim::trial_stream_id(trial));
                let ch = ChannelRealization::sample(&scn, &stream);
                separation_bound(&ch, &source, &scn.powers, scn.noise_var).map(|b| b.d_sum)
            })
            .collect::<Result<_, _>>()?;
        let k = scn.users as f64;
        let mean_d: f64 = per_trial.iter().sum::<f64>() / trials as f64;
        let mean_inv: f64 = per_trial.iter().map(|d| 1.0 / d).sum::<f64>() / trials as f64;
        rows.push(BoundRow {
            snr_db: snr,
            d_sum_mean: mean_d,
            sdr_opt_db: 10.0 * (k * mean_inv).log10(),
            sdr_opt_raw_db: 10.0 * mean_inv.log10(),
            trials,
        });
    }
    Ok(rows)
}
