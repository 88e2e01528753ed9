//! Projected gradient descent on the sum-MSE over block-diagonal precoders
//! with per-user power constraints.
//!
//! The cost is `f(P) = tr((1/noise_var) P^H H^H H P + C_s^{-1})^{-1}` and the
//! gradient (in the `2 df/dP*` convention, so its real and imaginary parts
//! equal the partial derivatives of `f` with respect to the real and
//! imaginary parts of each entry) is
//! `-(2/noise_var) H^H H P ((1/noise_var) P^H H^H H P + C_s^{-1})^{-2}`.
//! The iteration steps against that gradient and projects back onto the
//! feasible set; an Armijo condition along the projection arc guarantees the
//! objective never increases on accepted steps.

use serde::{Deserialize, Serialize};

use crate::linalg::{CMat, LinalgError};
use crate::model::{sum_mse_from_gram, ModelError, PrecoderSet, Scenario, SourceModel};

use super::amrt;

#[derive(Debug, Clone, thiserror::Error)]
pub enum PrecodingError {
    #[error("source covariance is singular; this design needs its inverse")]
    SingularCovariance,
    #[error("degenerate channel for user {0}")]
    DegenerateChannel(usize),
    #[error("infeasible dimensions: {0}")]
    InfeasibleDimensions(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Step-size control for the projected gradient iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientConfig {
    pub max_iters: usize,
    /// Backtracking factor in (0, 1).
    pub armijo_shrink: f64,
    /// Sufficient-decrease slope in (0, 1).
    pub armijo_slope: f64,
    pub init_step: f64,
    /// Stop once the iterate moves less than this (Frobenius norm).
    pub convergence_tol: f64,
}

impl Default for GradientConfig {
    fn default() -> Self {
        GradientConfig {
            max_iters: 5000,
            armijo_shrink: 0.5,
            armijo_slope: 1e-4,
            init_step: 1.0,
            convergence_tol: 1e-8,
        }
    }
}

/// Result of a projected gradient run. `converged` is false when the
/// iteration cap fired first; the best iterate seen is returned either way.
#[derive(Debug, Clone)]
pub struct GradientOutcome {
    pub precoders: PrecoderSet,
    pub xi: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Gradient of the sum-MSE with respect to the full precoding matrix:
/// `-(2/noise_var) H^H H P ((1/noise_var) P^H H^H H P + C_s^{-1})^{-2}`.
///
/// Needs a positive definite source covariance.
pub fn mse_gradient(
    p: &CMat,
    h: &CMat,
    source: &SourceModel,
    noise_var: f64,
) -> Result<CMat, PrecodingError> {
    let cs_inv = source.inverse().ok_or(PrecodingError::SingularCovariance)?;
    let gram = h.adjoint().mul(h)?;
    gradient_from_gram(&gram, p, cs_inv, noise_var)
}

fn gradient_from_gram(
    gram: &CMat,
    p: &CMat,
    cs_inv: &CMat,
    noise_var: f64,
) -> Result<CMat, PrecodingError> {
    let gp = gram.mul(p)?;
    let inner = p.adjoint().mul(&gp)?.scale_re(1.0 / noise_var).add(cs_inv)?;
    let inv = inner.inverse()?;
    let inv2 = inv.mul(&inv)?;
    Ok(gp.mul(&inv2)?.scale_re(-2.0 / noise_var))
}

/// Project a raw precoding matrix onto the feasible set: zero everything off
/// the block diagonal and rescale any user block whose power exceeds its
/// limit back onto the constraint sphere.
pub fn project_feasible(p_raw: &CMat, scn: &Scenario) -> Result<PrecoderSet, PrecodingError> {
    let expect_rows = scn.nt * scn.users;
    if p_raw.rows() != expect_rows || p_raw.cols() != scn.users {
        return Err(PrecodingError::InfeasibleDimensions(format!(
            "precoding matrix is {}x{}, expected {}x{}",
            p_raw.rows(),
            p_raw.cols(),
            expect_rows,
            scn.users
        )));
    }
    let mut vectors = Vec::with_capacity(scn.users);
    for k in 0..scn.users {
        let mut v = p_raw.block(k * scn.nt, k, scn.nt, 1);
        let power = v.fro_norm().powi(2);
        if power > scn.powers[k] {
            v = v.scale_re((scn.powers[k] / power).sqrt());
        }
        vectors.push(v);
    }
    Ok(PrecoderSet::new(vectors, scn)?)
}

/// Projected steepest descent with Armijo backtracking along the projection
/// arc, starting from a feasible `p_init`.
pub fn projected_gradient(
    scn: &Scenario,
    channel: &crate::model::ChannelRealization,
    source: &SourceModel,
    config: &GradientConfig,
    p_init: &PrecoderSet,
) -> Result<GradientOutcome, PrecodingError> {
    let cs_inv = source.inverse().ok_or(PrecodingError::SingularCovariance)?;
    let h = channel.stacked();
    let gram = h.adjoint().mul(h)?;

    let mut p = p_init.block_diag_matrix().clone();
    let mut f = sum_mse_from_gram(&gram, &p, cs_inv, scn.noise_var)?;
    let mut best = (p.clone(), f);
    let mut step = config.init_step;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iters {
        iterations += 1;
        let grad = gradient_from_gram(&gram, &p, cs_inv, scn.noise_var)?;
        let descent = grad.scale_re(-1.0);

        // Warm-start the step from the last accepted one.
        step = (step * 2.0).clamp(1e-16, 1e8f64.max(config.init_step));
        let mut accepted: Option<(CMat, f64)> = None;
        for _ in 0..80 {
            let raw = p.add(&descent.scale_re(step))?;
            let cand = project_feasible(&raw, scn)?;
            let cand_mat = cand.block_diag_matrix().clone();
            let fc = sum_mse_from_gram(&gram, &cand_mat, cs_inv, scn.noise_var)?;
            let move_dir = cand_mat.sub(&p)?;
            let decrease = config.armijo_slope * descent.inner_re(&move_dir);
            if fc <= f - decrease {
                accepted = Some((cand_mat, fc));
                break;
            }
            step *= config.armijo_shrink;
        }
        let Some((p_next, f_next)) = accepted else {
            // No step produced sufficient decrease: stationary to precision.
            converged = true;
            break;
        };
        let moved = p_next.sub(&p)?.fro_norm();
        p = p_next;
        f = f_next;
        if f < best.1 {
            best = (p.clone(), f);
        }
        if moved < config.convergence_tol {
            converged = true;
            break;
        }
    }

    let precoders = project_feasible(&best.0, scn)?;
    Ok(GradientOutcome {
        precoders,
        xi: best.1,
        iterations,
        converged,
    })
}

/// Default design entry point: projected gradient initialized at the aligned
/// MRT solution.
pub fn design_gradient(
    scn: &Scenario,
    channel: &crate::model::ChannelRealization,
    source: &SourceModel,
    config: &GradientConfig,
) -> Result<GradientOutcome, PrecodingError> {
    let init = amrt(scn, channel)?;
    projected_gradient(scn, channel, source, config, &init)
}

/// Multistart variant: aligned MRT, full power, and `extra_random` random
/// feasible starts; returns the best outcome. The problem is non-convex, so
/// distinct starts can land on distinct stationary points.
pub fn design_gradient_multistart(
    scn: &Scenario,
    channel: &crate::model::ChannelRealization,
    source: &SourceModel,
    config: &GradientConfig,
    extra_random: usize,
    stream: &crate::model::RngStream,
) -> Result<GradientOutcome, PrecodingError> {
    let mut starts = vec![amrt(scn, channel)?, super::full_power(scn, channel)?];
    let mut rng = stream.rng();
    for _ in 0..extra_random {
        let raw = CMat::from_fn(scn.nt * scn.users, scn.users, |_, _| {
            crate::model::complex_gaussian_unit(&mut rng)
        });
        // Scale blocks up so the projection lands on a random point of the
        // feasible region rather than hugging the origin.
        let scaled = CMat::from_fn(raw.rows(), raw.cols(), |i, j| {
            raw[(i, j)] * scn.powers[j].sqrt()
        });
        starts.push(project_feasible(&scaled, scn)?);
    }
    let mut best: Option<GradientOutcome> = None;
    for start in &starts {
        let out = projected_gradient(scn, channel, source, config, start)?;
        if best.as_ref().map_or(true, |b| out.xi < b.xi) {
            best = Some(out);
        }
    }
    Ok(best.expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::model::{ChannelRealization, RngStream};

    #[test]
    fn gradient_scalar_case() {
        // h = 1, p = 1, Cs = 1, noise 1: f(p) = 1/(p^2+1), derivative -0.5.
        let source = SourceModel::uniform(1, 0.0).unwrap();
        let h = CMat::from_real(1, 1, &[1.0]);
        let p = CMat::from_real(1, 1, &[1.0]);
        let g = mse_gradient(&p, &h, &source, 1.0).unwrap();
        assert!((g[(0, 0)].re + 0.5).abs() < 1e-12);
        assert!(g[(0, 0)].im.abs() < 1e-15);
    }

    #[test]
    fn gradient_zero_channel_is_zero() {
        let source = SourceModel::uniform(2, 0.5).unwrap();
        let h = CMat::zeros(2, 2);
        let p = CMat::zeros(2, 2);
        let g = mse_gradient(&p, &h, &source, 1.0).unwrap();
        assert!(g.fro_norm() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = RngStream::new(31, 0).rng();
        for trial in 0..100 {
            let k = 1 + trial % 4;
            let nt = 1 + (trial / 4) % 2;
            let nr = 1 + trial % 4;
            let rho = [0.3, 0.8, 0.95][trial % 3];
            let noise = 0.8;
            let source = SourceModel::uniform(k, rho).unwrap();
            let scn = Scenario::new(k, nt, nr, rho, vec![2.0; k], noise).unwrap();
            let ch = ChannelRealization::sample_with(&scn, &mut rng);
            let p = CMat::from_fn(nt * k, k, |_, _| crate::model::complex_gaussian_unit(&mut rng));
            let g = mse_gradient(&p, ch.stacked(), &source, noise).unwrap();
            let gram = ch.stacked().adjoint().mul(ch.stacked()).unwrap();
            let cs_inv = source.inverse().unwrap();

            let f = |pm: &CMat| sum_mse_from_gram(&gram, pm, cs_inv, noise).unwrap();
            let step = 1e-6;
            let gnorm = g.fro_norm();
            for i in 0..p.rows() {
                for j in 0..p.cols() {
                    for (axis, expected) in [(0, g[(i, j)].re), (1, g[(i, j)].im)] {
                        let mut hi = p.clone();
                        let mut lo = p.clone();
                        let delta = if axis == 0 {
                            C64::new(step, 0.0)
                        } else {
                            C64::new(0.0, step)
                        };
                        hi[(i, j)] += delta;
                        lo[(i, j)] -= delta;
                        let fd = (f(&hi) - f(&lo)) / (2.0 * step);
                        let denom = expected.abs().max(1e-7 * gnorm);
                        assert!(
                            (fd - expected).abs() / denom < 1e-5,
                            "trial {trial} entry ({i},{j}) axis {axis}: fd {fd} vs {expected}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn projection_behaviour() {
        let scn = Scenario::new(2, 1, 1, 0.0, vec![1.0, 4.0], 1.0).unwrap();
        // Feasible input is untouched.
        let p = CMat::from_real(2, 2, &[0.5, 0.0, 0.0, 1.0]);
        let proj = project_feasible(&p, &scn).unwrap();
        assert!((proj.vector(0)[(0, 0)].re - 0.5).abs() < 1e-15);
        // A block at 4x its limit is halved; off-diagonal junk is cleared.
        let p = CMat::from_real(2, 2, &[2.0, 7.0, 7.0, 4.0]);
        let proj = project_feasible(&p, &scn).unwrap();
        assert!((proj.vector(0)[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((proj.vector(1)[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!(proj.block_diag_matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn projection_is_nonexpansive() {
        let scn = Scenario::new(3, 2, 2, 0.5, vec![1.0, 2.0, 0.5], 1.0).unwrap();
        let mut rng = RngStream::new(32, 0).rng();
        for _ in 0..1000 {
            let a = CMat::from_fn(6, 3, |_, _| crate::model::complex_gaussian_unit(&mut rng) * 2.0);
            let b = CMat::from_fn(6, 3, |_, _| crate::model::complex_gaussian_unit(&mut rng) * 2.0);
            let pa = project_feasible(&a, &scn).unwrap();
            let pb = project_feasible(&b, &scn).unwrap();
            let dist_proj = pa
                .block_diag_matrix()
                .sub(pb.block_diag_matrix())
                .unwrap()
                .fro_norm();
            let dist = a.sub(&b).unwrap().fro_norm();
            assert!(dist_proj <= dist + 1e-12);
        }
    }

    #[test]
    fn uncorrelated_sources_converge_to_full_power() {
        let scn = Scenario::new(3, 1, 2, 0.0, vec![1.0, 2.0, 4.0], 1.0).unwrap();
        let source = SourceModel::uniform(3, 0.0).unwrap();
        let ch = ChannelRealization::sample(&scn, &RngStream::new(33, 0));
        let out = design_gradient(&scn, &ch, &source, &GradientConfig::default()).unwrap();
        assert!(out.converged);
        for (k, power) in out.precoders.powers().iter().enumerate() {
            assert!(
                (power - scn.powers[k]).abs() < 1e-6,
                "user {k}: {power} vs {}",
                scn.powers[k]
            );
        }
    }
}
