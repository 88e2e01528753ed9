//! Closed-form optimal linear precoder for two single-antenna users and an
//! arbitrary number of receive antennas.
//!
//! With `P = diag(sqrt(P1), sqrt(P2) e^{-j phi_d})` (the first user's phase
//! anchored to zero) the sum-MSE is a rational function of the powers and the
//! phase difference. The phase enters only through
//! `Re{p1^* p2 h1^H h2}`, so the optimum is `phi_d = arg(h1^H h2)`. For the
//! powers, the KKT system admits exactly three candidate points: both
//! constraints active, or one active with the other power on the curve where
//! its partial derivative vanishes. All feasible candidates are evaluated and
//! the cheapest one returned, which also makes the routine robust to
//! region-boundary rounding.

use crate::linalg::{C64, CMat};
use crate::model::{PrecoderSet, Scenario};

use super::gradient::PrecodingError;

/// Which KKT region the power budget point `(T1, T2)` falls into:
/// `R1` both partials nonpositive (full power optimal), `R2`/`R3` one user
/// backs off, `Special` for the uncorrelated / fully-correlated / orthogonal
/// cases where full power is always optimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoUserRegion {
    R1,
    R2,
    R3,
    Special,
}

/// Closed-form two-user solution: powers, phase difference, achieved
/// sum-MSE, and the region of the budget point.
#[derive(Debug, Clone)]
pub struct TwoUserSolution {
    pub p1: f64,
    pub p2: f64,
    /// Optimal phase difference `phi_1 - phi_2 = arg(h1^H h2)`.
    pub phi_d: f64,
    pub xi: f64,
    pub region: TwoUserRegion,
}

impl TwoUserSolution {
    /// Materialize the diagonal precoder with `phi_1 = 0`:
    /// `p_1 = sqrt(P1)`, `p_2 = sqrt(P2) e^{-j phi_d}`.
    pub fn precoders(&self, scn: &Scenario) -> Result<PrecoderSet, PrecodingError> {
        let vectors = vec![
            CMat::col_vector(&[C64::new(self.p1.sqrt(), 0.0)]),
            CMat::col_vector(&[C64::from_polar(self.p2.sqrt(), -self.phi_d)]),
        ];
        Ok(PrecoderSet::new(vectors, scn)?)
    }
}

struct Geometry {
    n1: f64,        // ||h1||^2
    n2: f64,        // ||h2||^2
    coupling: C64,  // h1^H h2
    m: f64,         // |h1^H h2|
    det_gram: f64,  // ||h1||^2 ||h2||^2 - |h1^H h2|^2
}

fn geometry(h1: &CMat, h2: &CMat) -> Result<Geometry, PrecodingError> {
    if h1.cols() != 1 || h2.cols() != 1 || h1.rows() != h2.rows() {
        return Err(PrecodingError::InfeasibleDimensions(
            "two-user channels must be column vectors of equal length".into(),
        ));
    }
    let n1 = h1.fro_norm().powi(2);
    let n2 = h2.fro_norm().powi(2);
    if n1 == 0.0 {
        return Err(PrecodingError::DegenerateChannel(0));
    }
    if n2 == 0.0 {
        return Err(PrecodingError::DegenerateChannel(1));
    }
    let coupling = h1.adjoint().mul(h2)?[(0, 0)];
    let m = coupling.norm();
    Ok(Geometry {
        n1,
        n2,
        coupling,
        m,
        det_gram: (n1 * n2 - m * m).max(0.0),
    })
}

/// Sum-MSE for given powers and phase difference:
/// numerator `noise (2 noise + (1-rho^2)(P1||h1||^2 + P2||h2||^2))` over
/// `noise^2 + noise*upsilon + omega` with
/// `upsilon = P1||h1||^2 + P2||h2||^2 + 2 rho sqrt(P1 P2) Re{e^{-j phi} h1^H h2}`
/// and `omega = P1 P2 (1-rho^2)(||h1||^2||h2||^2 - |h1^H h2|^2)`.
pub fn two_user_mse(
    p1: f64,
    p2: f64,
    phi_d: f64,
    h1: &CMat,
    h2: &CMat,
    rho: f64,
    noise_var: f64,
) -> Result<f64, PrecodingError> {
    let g = geometry(h1, h2)?;
    let cos_term = (C64::from_polar(1.0, -phi_d) * g.coupling).re;
    Ok(mse_at(&g, p1, p2, cos_term, rho, noise_var))
}

fn mse_at(g: &Geometry, p1: f64, p2: f64, cos_term: f64, rho: f64, noise_var: f64) -> f64 {
    let s = noise_var;
    let one_m_r2 = 1.0 - rho * rho;
    let num = s * (2.0 * s + one_m_r2 * (p1 * g.n1 + p2 * g.n2));
    let upsilon = p1 * g.n1 + p2 * g.n2 + 2.0 * rho * (p1 * p2).sqrt() * cos_term;
    let omega = p1 * p2 * one_m_r2 * g.det_gram;
    num / (s * s + s * upsilon + omega)
}

/// Sum-MSE at the optimal phase (`Re{.} = |h1^H h2|`).
pub fn two_user_mse_optimal_phase(
    p1: f64,
    p2: f64,
    h1: &CMat,
    h2: &CMat,
    rho: f64,
    noise_var: f64,
) -> Result<f64, PrecodingError> {
    let g = geometry(h1, h2)?;
    Ok(mse_at(&g, p1, p2, g.m, rho, noise_var))
}

/// Partial-derivative numerators of the phase-optimized sum-MSE with respect
/// to each power. Signs decide the KKT region: a positive value means the
/// objective still decreases when that user sheds power.
pub fn two_user_alpha(
    p1: f64,
    p2: f64,
    h1: &CMat,
    h2: &CMat,
    rho: f64,
    noise_var: f64,
) -> Result<(f64, f64), PrecodingError> {
    let g = geometry(h1, h2)?;
    Ok((
        alpha_at(&g, p1, p2, rho, noise_var, false),
        alpha_at(&g, p1, p2, rho, noise_var, true),
    ))
}

/// `alpha_1(P1, P2)`; `swapped` exchanges the roles of the two users (which
/// yields `alpha_2`).
fn alpha_at(g: &Geometry, p1: f64, p2: f64, rho: f64, noise_var: f64, swapped: bool) -> f64 {
    let (n_own, n_other, p_own, p_other) = if swapped {
        (g.n2, g.n1, p2, p1)
    } else {
        (g.n1, g.n2, p1, p2)
    };
    let s2 = noise_var;
    let s4 = s2 * s2;
    let one_m_r2 = 1.0 - rho * rho;
    let a = -s4 * (1.0 + rho * rho) * n_own
        - 2.0 * s2 * one_m_r2 * g.det_gram * p_other
        - one_m_r2 * one_m_r2 * n_other * g.det_gram * p_other * p_other;
    let b = s2 * rho * one_m_r2 * g.m;
    let ratio = (p_other / p_own).sqrt();
    a + b * (n_own * p_own - n_other * p_other) * ratio - 2.0 * s4 * rho * g.m * ratio
}

/// Boundary curve `sqrt(P_own) = f(P_other)` solving `alpha = 0`; the larger
/// root of the quadratic in `sqrt(P_own)`.
fn boundary_sqrt_power(g: &Geometry, p_other: f64, rho: f64, noise_var: f64, swapped: bool) -> f64 {
    let (n_own, n_other) = if swapped { (g.n2, g.n1) } else { (g.n1, g.n2) };
    let s2 = noise_var;
    let s4 = s2 * s2;
    let one_m_r2 = 1.0 - rho * rho;
    let a = -s4 * (1.0 + rho * rho) * n_own
        - 2.0 * s2 * one_m_r2 * g.det_gram * p_other
        - one_m_r2 * one_m_r2 * n_other * g.det_gram * p_other * p_other;
    let b = s2 * rho * one_m_r2 * g.m;
    let lin = -a / (2.0 * b * n_own * p_other.sqrt());
    lin + (lin * lin + (n_other / n_own) * p_other + 2.0 * s2 / (one_m_r2 * n_own)).sqrt()
}

/// Optimal two-user precoder: phase `phi_d = arg(h1^H h2)` and the cheapest
/// feasible KKT power candidate among `(T1, T2)`, `(f1(T2)^2, T2)` and
/// `(T1, f2(T1)^2)`.
pub fn two_user_optimal(
    h1: &CMat,
    h2: &CMat,
    t1: f64,
    t2: f64,
    rho: f64,
    noise_var: f64,
) -> Result<TwoUserSolution, PrecodingError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(PrecodingError::InfeasibleDimensions(format!(
            "correlation must lie in [0, 1], got {rho}"
        )));
    }
    let g = geometry(h1, h2)?;
    let phi_d = if g.m > 0.0 { g.coupling.arg() } else { 0.0 };

    if rho == 0.0 || rho == 1.0 || g.m == 0.0 {
        return Ok(TwoUserSolution {
            p1: t1,
            p2: t2,
            phi_d,
            xi: mse_at(&g, t1, t2, g.m, rho, noise_var),
            region: TwoUserRegion::Special,
        });
    }

    let a1 = alpha_at(&g, t1, t2, rho, noise_var, false);
    let a2 = alpha_at(&g, t1, t2, rho, noise_var, true);
    let region = if a1 > 0.0 {
        TwoUserRegion::R3
    } else if a2 > 0.0 {
        TwoUserRegion::R2
    } else {
        TwoUserRegion::R1
    };

    let mut candidates = vec![(t1, t2)];
    let f1 = boundary_sqrt_power(&g, t2, rho, noise_var, false);
    if f1 * f1 <= t1 {
        candidates.push((f1 * f1, t2));
    }
    let f2 = boundary_sqrt_power(&g, t1, rho, noise_var, true);
    if f2 * f2 <= t2 {
        candidates.push((t1, f2 * f2));
    }

    let (p1, p2, xi) = candidates
        .into_iter()
        .map(|(p1, p2)| (p1, p2, mse_at(&g, p1, p2, g.m, rho, noise_var)))
        .min_by(|a, b| a.2.partial_cmp(&b.2).expect("finite sum-MSE"))
        .expect("at least the full-power candidate");

    Ok(TwoUserSolution {
        p1,
        p2,
        phi_d,
        xi,
        region,
    })
}

/// Large-array sum-MSE approximation for i.i.d. unit-variance fading:
/// `(2 s^2 + (1-rho^2) s Nr (T1+T2)) / (s^2 + s Nr (T1+T2) + T1 T2 Nr^2 (1-rho^2))`.
pub fn asymptotic_mse_large_nr(nr: usize, t1: f64, t2: f64, rho: f64, noise_var: f64) -> f64 {
    let s = noise_var;
    let nr = nr as f64;
    let one_m_r2 = 1.0 - rho * rho;
    let tsum = t1 + t2;
    (2.0 * s * s + one_m_r2 * s * nr * tsum)
        / (s * s + s * nr * tsum + t1 * t2 * nr * nr * one_m_r2)
}

/// Single-receive-antenna sum-MSE at the optimal phase; the Gram-determinant
/// term vanishes in this case.
pub fn asymptotic_mse_single_antenna(
    p1: f64,
    p2: f64,
    h1: C64,
    h2: C64,
    rho: f64,
    noise_var: f64,
) -> f64 {
    let s = noise_var;
    let n1 = h1.norm_sqr();
    let n2 = h2.norm_sqr();
    let m = (h1.conj() * h2).norm();
    let one_m_r2 = 1.0 - rho * rho;
    (2.0 * s + one_m_r2 * (p1 * n1 + p2 * n2))
        / (s + p1 * n1 + p2 * n2 + 2.0 * (p1 * p2).sqrt() * rho * m)
}
