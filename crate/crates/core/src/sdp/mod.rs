//! Semidefinite relaxation route for single-antenna users and a single
//! receive antenna.
//!
//! The power-constrained sum-MSE quotient is homogenized with `p = q/t` into
//! a quadratic form over `z = (q, t)`, lifted to `Z = z z^H`, and the rank-1
//! constraint dropped, leaving
//! `max tr(A Z)` s.t. `tr(B Z) = 1`, `tr(D_k Z) <= 0`, `Z >= 0` with
//! `A = blockdiag(H Cs^2 H^H, 0)`, `B = blockdiag(H Cs H^H, noise_var)`,
//! `D_k = blockdiag(e_k e_k^T, -T_k)` and `H = diag(h)`. When the top-left
//! block of the optimizer is rank-1 the relaxation is tight and the precoder
//! is recovered exactly as `p = u / sqrt(w)`.

pub mod ipm;

use crate::linalg::{C64, CMat, LinalgError};
use crate::model::{ChannelRealization, ModelError, PrecoderSet, Scenario, SourceModel};

use ipm::{ConicProblem, IpmError};

/// Relative second-eigenvalue threshold below which the lifted block counts
/// as rank-1 and extraction is exact.
pub const RANK1_REL_TOL: f64 = 1e-7;
/// Default solver tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Interior-point iteration cap.
pub const MAX_ITERS: usize = 200;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SdpError {
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degenerate homogenization (w = {0:.3e})")]
    DegenerateHomogenization(f64),
    #[error("numerical failure in SDP solve: {0}")]
    Numerical(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Homogenized problem data. `n = users + 1`.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub a: CMat,
    pub b: CMat,
    pub d: Vec<CMat>,
    pub powers: Vec<f64>,
    pub n: usize,
}

/// Solver output: the PSD matrix `Z` over `z = (q, t)`, the attained
/// objective `tr(A Z)`, and solve diagnostics.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub z: CMat,
    pub objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap at exit.
    pub duality_gap: f64,
    pub iterations: usize,
    /// Inequality slacks `-tr(D_k Z)` recovered from the conic solve.
    pub slacks: Vec<f64>,
}

/// Rank-1 extraction output; `eig_ratio` is the second-to-first eigenvalue
/// ratio of the lifted block that the rank decision was based on.
#[derive(Debug, Clone)]
pub struct ExtractedPrecoder {
    /// Recovered homogenized vector `u / sqrt(w)`, `users x 1`. The quotient
    /// variable stacks the diagonal of `P^H`, so the per-user precoder gains
    /// are the conjugates of these entries.
    pub p: CMat,
    pub rank1: bool,
    pub eig_ratio: f64,
}

/// End-to-end design product.
#[derive(Debug, Clone)]
pub struct SisoDesign {
    pub precoders: PrecoderSet,
    pub solution: SdpSolution,
    pub extraction: ExtractedPrecoder,
}

/// Assemble the homogenized matrices from the per-user scalar channels
/// (a `1 x K` row), the source covariance, and the power limits.
pub fn build_problem(
    h: &CMat,
    source: &SourceModel,
    powers: &[f64],
    noise_var: f64,
) -> Result<SdpProblem, SdpError> {
    if h.rows() != 1 {
        return Err(SdpError::Unsupported(format!(
            "homogenized design is restricted to single-antenna users (channel row expected, got {} rows)",
            h.rows()
        )));
    }
    let k = h.cols();
    if k == 0 || source.users() != k || powers.len() != k {
        return Err(SdpError::Dimension(format!(
            "channel has {k} users, covariance {}, powers {}",
            source.users(),
            powers.len()
        )));
    }
    if powers.iter().any(|&t| !(t > 0.0)) {
        return Err(SdpError::Dimension("power limits must be positive".into()));
    }
    let n = k + 1;
    let hdiag = CMat::from_diag(&(0..k).map(|i| h[(0, i)]).collect::<Vec<_>>());
    let cs = source.covariance();
    let cs2 = cs.mul(cs)?;
    let core_a = hdiag.mul(&cs2)?.mul(&hdiag.adjoint())?.symmetrize();
    let core_b = hdiag.mul(cs)?.mul(&hdiag.adjoint())?.symmetrize();

    let mut a = CMat::zeros(n, n);
    a.set_block(0, 0, &core_a);
    let mut b = CMat::zeros(n, n);
    b.set_block(0, 0, &core_b);
    b[(k, k)] = C64::new(noise_var, 0.0);

    let d = (0..k)
        .map(|i| {
            let mut di = CMat::zeros(n, n);
            di[(i, i)] = C64::new(1.0, 0.0);
            di[(k, k)] = C64::new(-powers[i], 0.0);
            di
        })
        .collect();

    Ok(SdpProblem {
        a,
        b,
        d,
        powers: powers.to_vec(),
        n,
    })
}

/// Solve the relaxation with the interior-point method. The conic variable
/// stacks `Z` with one nonnegative slack per power constraint.
pub fn solve_sdp(prob: &SdpProblem, tol: f64) -> Result<SdpSolution, SdpError> {
    let n = prob.n;
    let k = prob.d.len();
    let total = n + k;

    let embed = |m: &CMat| {
        let mut big = CMat::zeros(total, total);
        big.set_block(0, 0, m);
        big
    };

    // max tr(A Z) becomes min <-A, X>.
    let c = embed(&prob.a).scale_re(-1.0);
    let mut constraints = vec![embed(&prob.b)];
    let mut rhs = vec![1.0];
    for (i, d) in prob.d.iter().enumerate() {
        let mut a = embed(d);
        a[(n + i, n + i)] = C64::new(1.0, 0.0);
        constraints.push(a);
        rhs.push(0.0);
    }

    let conic = ConicProblem {
        c,
        constraints,
        b: rhs,
    };
    let sol = match ipm::solve(&conic, tol, MAX_ITERS) {
        Ok(sol) => sol,
        Err(IpmError::IterationCap(cap, best)) => {
            return Err(SdpError::Numerical(format!(
                "iteration cap {cap} exceeded (best gap {:.3e}, primal residual {:.3e})",
                best.gap, best.primal_residual
            )));
        }
        Err(IpmError::Numerical(msg)) => return Err(SdpError::Numerical(msg)),
        Err(IpmError::Linalg(e)) => return Err(SdpError::Linalg(e)),
    };

    let z = sol.x.block(0, 0, n, n);
    let slacks = (0..k).map(|i| sol.x[(n + i, n + i)].re).collect();
    let objective = prob.a.inner_re(&z);
    Ok(SdpSolution {
        z,
        objective,
        dual_objective: -sol.dual_objective,
        duality_gap: (sol.primal_objective - sol.dual_objective).abs()
            / (1.0 + sol.primal_objective.abs() + sol.dual_objective.abs()),
        iterations: sol.iterations,
        slacks,
    })
}

/// Recover the precoder from the lifted solution: exact when the top-left
/// block is rank-1, dominant-eigenvector approximation otherwise. The global
/// phase makes the first user's gain real nonnegative.
pub fn extract_rank1(sol: &SdpSolution, powers: &[f64]) -> Result<ExtractedPrecoder, SdpError> {
    let n = sol.z.rows();
    let k = n - 1;
    if powers.len() != k {
        return Err(SdpError::Dimension(format!(
            "{} powers for {k} users",
            powers.len()
        )));
    }
    let w = sol.z[(k, k)].re;
    if w <= 1e-12 {
        return Err(SdpError::DegenerateHomogenization(w));
    }
    let zbar = sol.z.block(0, 0, k, k);
    let eig = zbar.herm_eig()?;
    let lam1 = eig.eigenvalues[0].max(0.0);
    let lam2 = if k > 1 { eig.eigenvalues[1].max(0.0) } else { 0.0 };
    let eig_ratio = if lam1 > 0.0 { lam2 / lam1 } else { 0.0 };
    let rank1 = eig_ratio <= RANK1_REL_TOL;

    let mut p = eig.eigenvectors.col(0).scale_re((lam1 / w).sqrt());
    let anchor = p[(0, 0)];
    if anchor.norm() > 0.0 {
        p = p.scale(anchor.conj() / anchor.norm());
    }
    Ok(ExtractedPrecoder { p, rank1, eig_ratio })
}

/// End-to-end SISO design: homogenize, solve, extract, and wrap as a
/// [`PrecoderSet`] (with the tiny solver slack projected out).
pub fn siso_precoder(
    h: &CMat,
    source: &SourceModel,
    powers: &[f64],
    noise_var: f64,
) -> Result<SisoDesign, SdpError> {
    let prob = build_problem(h, source, powers, noise_var)?;
    let solution = solve_sdp(&prob, DEFAULT_TOL)?;
    let mut extraction = extract_rank1(&solution, powers)?;

    if !extraction.rank1 {
        // The lifted block is not rank-1, so the dominant eigenvector is only
        // a rounding. This happens when the optimal face is degenerate (the
        // objective blind to off-diagonal coupling, e.g. uncorrelated
        // sources); compare against the full-power vertex on the true
        // quotient and keep the better candidate.
        let full = CMat::col_vector(
            &powers
                .iter()
                .map(|t| C64::new(t.sqrt(), 0.0))
                .collect::<Vec<_>>(),
        );
        let candidate = clamp_to_powers(&extraction.p, powers);
        if rank1_objective(h, source, &full, noise_var)?
            > rank1_objective(h, source, &candidate, noise_var)?
        {
            extraction.p = full;
        }
    }

    let k = powers.len();
    let scn = Scenario::new(k, 1, 1, 0.0, powers.to_vec(), noise_var)?;
    let clamped = clamp_to_powers(&extraction.p, powers);
    // The homogenized variable stacks diag(P^H); conjugate to get the gains.
    let vectors = (0..k)
        .map(|i| CMat::col_vector(&[clamped[(i, 0)].conj()]))
        .collect();
    let precoders = PrecoderSet::new(vectors, &scn)?;
    Ok(SisoDesign {
        precoders,
        solution,
        extraction,
    })
}

/// Project per-user gains onto their power limits (removes the tiny solver
/// slack; a no-op for strictly feasible extractions).
fn clamp_to_powers(p: &CMat, powers: &[f64]) -> CMat {
    CMat::from_fn(p.rows(), 1, |i, _| {
        let g = p[(i, 0)];
        let limit = powers[i].sqrt();
        if g.norm() > limit {
            g * (limit / g.norm())
        } else {
            g
        }
    })
}

/// Convenience wrapper taking a sampled channel; rejects anything but the
/// single-antenna / single-receive-antenna configuration.
pub fn design_sdp(
    scn: &Scenario,
    channel: &ChannelRealization,
    source: &SourceModel,
) -> Result<SisoDesign, SdpError> {
    if scn.nt != 1 || scn.nr != 1 {
        return Err(SdpError::Unsupported(format!(
            "SDP design needs nt = nr = 1, got nt = {}, nr = {}",
            scn.nt, scn.nr
        )));
    }
    let h = CMat::from_fn(1, scn.users, |_, k| channel.block(k)[(0, 0)]);
    siso_precoder(&h, source, &scn.powers, scn.noise_var)
}

/// Homogenized objective value of a feasible rank-1 precoder `p`:
/// `p^H H Cs^2 H^H p / (p^H H Cs H^H p + noise_var)`. Useful for dominance
/// checks against the relaxation.
pub fn rank1_objective(
    h: &CMat,
    source: &SourceModel,
    p: &CMat,
    noise_var: f64,
) -> Result<f64, SdpError> {
    let k = h.cols();
    let hdiag = CMat::from_diag(&(0..k).map(|i| h[(0, i)]).collect::<Vec<_>>());
    let cs = source.covariance();
    let hp = hdiag.adjoint().mul(p)?;
    let num = hp.adjoint().mul(&cs.mul(cs)?)?.mul(&hp)?[(0, 0)].re;
    let den = hp.adjoint().mul(cs)?.mul(&hp)?[(0, 0)].re + noise_var;
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RngStream;

    #[test]
    fn build_hand_assembled_single_user() {
        let source = SourceModel::uniform(1, 0.0).unwrap();
        let h = CMat::from_real(1, 1, &[1.0]);
        let prob = build_problem(&h, &source, &[1.0], 1.0).unwrap();
        assert_eq!(prob.n, 2);
        assert!((prob.a[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(prob.a[(1, 1)].norm() < 1e-14);
        assert!((prob.b[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((prob.b[(1, 1)].re - 1.0).abs() < 1e-14);
        assert!((prob.d[0][(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((prob.d[0][(1, 1)].re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn build_matrices_are_hermitian() {
        let mut rng = RngStream::new(71, 0).rng();
        for _ in 0..20 {
            let k = 3;
            let source = SourceModel::uniform(k, 0.9).unwrap();
            let h = CMat::from_fn(1, k, |_, _| crate::model::complex_gaussian_unit(&mut rng));
            let prob = build_problem(&h, &source, &[1.0, 2.0, 3.0], 1.0).unwrap();
            assert!(prob.a.is_hermitian(1e-12));
            assert!(prob.b.is_hermitian(1e-12));
            for d in &prob.d {
                assert!(d.is_hermitian(1e-12));
            }
        }
    }

    #[test]
    fn quotient_identity_at_normalized_point() {
        // z = (p, 1) gives z^H A z / z^H B z equal to the rank-1 quotient,
        // by scale invariance of the homogenized form.
        let mut rng = RngStream::new(72, 0).rng();
        let k = 2;
        let source = SourceModel::uniform(k, 0.8).unwrap();
        let h = CMat::from_fn(1, k, |_, _| crate::model::complex_gaussian_unit(&mut rng));
        let prob = build_problem(&h, &source, &[2.0, 3.0], 1.0).unwrap();
        let p = CMat::col_vector(&[C64::new(1.2, 0.3), C64::new(-0.5, 0.9)]);
        let z = CMat::from_fn(k + 1, 1, |i, _| {
            if i < k {
                p[(i, 0)]
            } else {
                C64::new(1.0, 0.0)
            }
        });
        let zz = z.mul(&z.adjoint()).unwrap();
        let denom = prob.b.inner_re(&zz);
        let quotient = prob.a.inner_re(&zz) / denom;
        let direct = rank1_objective(&h, &source, &p, 1.0).unwrap();
        assert!((quotient - direct).abs() < 1e-10);
    }

    #[test]
    fn single_user_uses_full_power() {
        let source = SourceModel::uniform(1, 0.0).unwrap();
        let h = CMat::from_real(1, 1, &[0.8]);
        let design = siso_precoder(&h, &source, &[4.0], 1.0).unwrap();
        let gain = design.precoders.vector(0)[(0, 0)];
        assert!(
            (gain.norm_sqr() - 4.0).abs() < 1e-6,
            "|p|^2 = {}",
            gain.norm_sqr()
        );
        assert!(design.extraction.rank1);
        // Feasibility of the lifted solution.
        let prob = build_problem(&h, &source, &[4.0], 1.0).unwrap();
        assert!((prob.b.inner_re(&design.solution.z) - 1.0).abs() < 1e-7);
        for d in &prob.d {
            assert!(d.inner_re(&design.solution.z) <= 1e-7);
        }
        let min_eig = design.solution.z.herm_eig().unwrap().min_eigenvalue();
        assert!(min_eig >= -1e-8);
    }

    #[test]
    fn planted_rank1_roundtrip() {
        // Build Z = z z^H from a known (q, t) and recover p = q/t.
        let q = CMat::col_vector(&[C64::new(0.4, -0.2), C64::new(-0.1, 0.5)]);
        let t = 0.7f64;
        let z = CMat::from_fn(3, 1, |i, _| {
            if i < 2 {
                q[(i, 0)]
            } else {
                C64::new(t, 0.0)
            }
        });
        let sol = SdpSolution {
            z: z.mul(&z.adjoint()).unwrap(),
            objective: 0.0,
            dual_objective: 0.0,
            duality_gap: 0.0,
            iterations: 0,
            slacks: vec![],
        };
        let ext = extract_rank1(&sol, &[1.0, 1.0]).unwrap();
        assert!(ext.rank1);
        let expected = q.scale_re(1.0 / t);
        // Same up to a global phase; the convention anchors entry 0.
        let anchor = expected[(0, 0)];
        let expected = expected.scale(anchor.conj() / anchor.norm());
        assert!(ext.p.sub(&expected).unwrap().fro_norm() < 1e-9);
    }

    #[test]
    fn uncorrelated_sources_get_full_power() {
        let mut rng = RngStream::new(73, 0).rng();
        let k = 3;
        let source = SourceModel::uniform(k, 0.0).unwrap();
        let h = CMat::from_fn(1, k, |_, _| crate::model::complex_gaussian_unit(&mut rng));
        let powers = [1.0, 4.0, 9.0];
        let design = siso_precoder(&h, &source, &powers, 1.0).unwrap();
        for (i, &t) in powers.iter().enumerate() {
            let got = design.precoders.vector(i)[(0, 0)].norm_sqr();
            assert!((got - t).abs() < 1e-5, "user {i}: {got} vs {t}");
        }
    }
}
