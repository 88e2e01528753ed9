//! Primal-dual path-following interior-point solver for small dense
//! semidefinite programs over the complex Hermitian PSD cone.
//!
//! Standard form: minimize `<C, X>` subject to `<A_i, X> = b_i`, `X >= 0`,
//! with `<., .>` the real trace inner product. The dual is
//! `maximize b^T y` subject to `sum_i y_i A_i + S = C`, `S >= 0`.
//!
//! The implementation is an infeasible-start Nesterov-Todd method with a
//! Mehrotra-style adaptive centering parameter: one Schur-complement
//! factorization per iteration drives both the affine probe and the combined
//! step. Problems here have cone sizes of a couple dozen at most, so every
//! block is dense and factorizations go through the Jacobi eigensolver.

use crate::linalg::{C64, CMat, LinalgError};

#[derive(Debug, Clone, thiserror::Error)]
pub enum IpmError {
    #[error("interior point iteration cap ({0}) exceeded")]
    IterationCap(usize, Box<ConicSolution>),
    #[error("interior point numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `min <c, X> s.t. <constraints[i], X> = b[i], X >= 0` over Hermitian `X`.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub c: CMat,
    pub constraints: Vec<CMat>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub x: CMat,
    pub y: Vec<f64>,
    pub s: CMat,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Complementarity `<X, S>` at exit.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

pub fn solve(prob: &ConicProblem, tol: f64, max_iters: usize) -> Result<ConicSolution, IpmError> {
    let n = prob.c.rows();
    let m = prob.constraints.len();
    assert!(prob.b.len() == m, "constraint/rhs count mismatch");
    for a in &prob.constraints {
        assert!(a.rows() == n && a.cols() == n);
    }

    // Normalize constraints to unit Frobenius norm; improves the Schur
    // system conditioning with mixed power scales.
    let mut norms = Vec::with_capacity(m);
    let mut cons = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for (a, &bi) in prob.constraints.iter().zip(&prob.b) {
        let nf = a.fro_norm().max(1e-300);
        norms.push(nf);
        cons.push(a.scale_re(1.0 / nf));
        b.push(bi / nf);
    }
    let c = &prob.c;

    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = c.fro_norm();
    let eta_x = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let eta_s = 1.0 + c_norm / (n as f64).sqrt();

    let mut x = CMat::identity(n).scale_re(eta_x);
    let mut s = CMat::identity(n).scale_re(eta_s);
    let mut y = vec![0.0f64; m];

    let nu = n as f64;
    let mut best: Option<ConicSolution> = None;
    let mut stalls = 0usize;

    for iteration in 1..=max_iters {
        let rp: Vec<f64> = (0..m).map(|i| b[i] - cons[i].inner_re(&x)).collect();
        let mut rd = c.clone();
        for i in 0..m {
            rd = rd.sub(&cons[i].scale_re(y[i]))?;
        }
        rd = rd.sub(&s)?;

        let gap = x.inner_re(&s);
        let mu = gap / nu;
        let pobj = c.inner_re(&x);
        let dobj: f64 = (0..m).map(|i| b[i] * y[i]).sum();

        let rp_norm = rp.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rd_norm = rd.fro_norm();
        let rel_p = rp_norm / (1.0 + b_norm);
        let rel_d = rd_norm / (1.0 + c_norm);
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let rel_mu = gap / (1.0 + pobj.abs() + dobj.abs());

        let snapshot = |iters: usize| ConicSolution {
            x: x.clone(),
            y: y.clone(),
            s: s.clone(),
            primal_objective: pobj,
            dual_objective: dobj,
            gap,
            primal_residual: rp_norm,
            dual_residual: rd_norm,
            iterations: iters,
        };
        if best
            .as_ref()
            .map_or(true, |bst| gap.abs() + rp_norm + rd_norm < bst.gap.abs() + bst.primal_residual + bst.dual_residual)
        {
            best = Some(snapshot(iteration - 1));
        }

        // Push complementarity two orders below tol so downstream rank
        // detection sees a clean spectrum.
        let met_basic = rel_p <= tol && rel_d <= tol && rel_gap <= tol;
        if met_basic && rel_mu <= tol * 1e-2 {
            return Ok(snapshot(iteration - 1));
        }

        // Nesterov-Todd scaling point W.
        let s_eig = s.herm_eig()?;
        let s_floor = s_eig.eigenvalues[0].max(1e-300) * 1e-14;
        let s_half = s_eig.map_spectrum(|l| l.max(s_floor).sqrt());
        let s_inv_half = s_eig.map_spectrum(|l| 1.0 / l.max(s_floor).sqrt());
        let s_inv = s_eig.map_spectrum(|l| 1.0 / l.max(s_floor));
        let t2 = s_half.mul(&x)?.mul(&s_half)?.symmetrize();
        let t2_eig = t2.herm_eig()?;
        let t2_floor = t2_eig.eigenvalues[0].max(1e-300) * 1e-14;
        let t2_half = t2_eig.map_spectrum(|l| l.max(t2_floor).sqrt());
        let w = s_inv_half.mul(&t2_half)?.mul(&s_inv_half)?.symmetrize();

        // Schur complement M[i][j] = <A_i, W A_j W>.
        let waw: Vec<CMat> = cons
            .iter()
            .map(|a| w.mul(a).and_then(|t| t.mul(&w)).map(|t| t.symmetrize()))
            .collect::<Result<_, _>>()?;
        let mut schur = CMat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                schur[(i, j)] = C64::new(cons[i].inner_re(&waw[j]), 0.0);
            }
        }

        let w_rd_w = w.mul(&rd)?.mul(&w)?.symmetrize();

        // Direction for a given centering parameter sigma; returns
        // (dx, dy, ds).
        let direction = |sigma: f64| -> Result<(CMat, Vec<f64>, CMat), IpmError> {
            let rc = s_inv.scale_re(sigma * mu).sub(&x)?;
            let mut rhs = CMat::zeros(m, 1);
            for i in 0..m {
                rhs[(i, 0)] = C64::new(
                    rp[i] - cons[i].inner_re(&rc) + cons[i].inner_re(&w_rd_w),
                    0.0,
                );
            }
            let dy_mat = solve_schur(&schur, &rhs)?;
            let dy: Vec<f64> = (0..m).map(|i| dy_mat[(i, 0)].re).collect();
            let mut ds = rd.clone();
            for i in 0..m {
                ds = ds.sub(&cons[i].scale_re(dy[i]))?;
            }
            let w_ds_w = w.mul(&ds)?.mul(&w)?.symmetrize();
            let dx = rc.sub(&w_ds_w)?.symmetrize();
            Ok((dx, dy, ds))
        };

        // Once the gap and residuals are within tolerance the remaining
        // iterations only polish complementarity; a late numerical failure
        // there is not worth failing the solve over.
        let descend = |r: Result<(CMat, Vec<f64>, CMat), IpmError>| match r {
            Ok(v) => Ok(Some(v)),
            Err(_) if met_basic => Ok(None),
            Err(e) => Err(e),
        };

        // Affine probe chooses the centering weight.
        let Some((dx_aff, _, ds_aff)) = descend(direction(0.0))? else {
            return Ok(snapshot(iteration - 1));
        };
        let ap_aff = max_psd_step(&x, &dx_aff)?.min(1.0);
        let ad_aff = max_psd_step(&s, &ds_aff)?.min(1.0);
        let x_probe = x.add(&dx_aff.scale_re(ap_aff))?;
        let s_probe = s.add(&ds_aff.scale_re(ad_aff))?;
        let mu_aff = (x_probe.inner_re(&s_probe) / nu).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(1e-8, 1.0);

        let Some((dx, dy, ds)) = descend(direction(sigma))? else {
            return Ok(snapshot(iteration - 1));
        };
        let ap = (0.98 * max_psd_step(&x, &dx)?).min(1.0);
        let ad = (0.98 * max_psd_step(&s, &ds)?).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                return Err(IpmError::Numerical(format!(
                    "step sizes collapsed at iteration {iteration} (gap {gap:.3e})"
                )));
            }
        } else {
            stalls = 0;
        }

        x = x.add(&dx.scale_re(ap))?.symmetrize();
        s = s.add(&ds.scale_re(ad))?.symmetrize();
        for i in 0..m {
            y[i] += ad * dy[i];
        }
    }

    Err(IpmError::IterationCap(
        max_iters,
        Box::new(best.expect("at least one iterate")),
    ))
}

/// Solve the (symmetric positive definite) Schur system, adding a small
/// ridge and retrying when conditioning has decayed too far for a clean
/// factorization.
fn solve_schur(schur: &CMat, rhs: &CMat) -> Result<CMat, IpmError> {
    let m = schur.rows();
    let scale = schur.max_abs().max(1e-300);
    let mut ridge = 0.0f64;
    for _attempt in 0..8 {
        let reg = if ridge == 0.0 {
            schur.clone()
        } else {
            let mut r = schur.clone();
            for i in 0..m {
                r[(i, i)] += ridge;
            }
            r
        };
        if let Some(l) = robust_cholesky(&reg) {
            let y = lower_solve(&l, rhs)?;
            return upper_solve_adjoint(&l, &y);
        }
        ridge = if ridge == 0.0 { scale * 1e-14 } else { ridge * 100.0 };
    }
    Err(IpmError::Numerical(
        "Schur complement lost positive definiteness beyond repair".into(),
    ))
}

/// Solve `L^H X = B` for lower-triangular `L`.
fn upper_solve_adjoint(l: &CMat, b: &CMat) -> Result<CMat, IpmError> {
    let n = l.rows();
    let mut x = b.clone();
    for i in (0..n).rev() {
        for k in i + 1..n {
            // (L^H)[i][k] = conj(L[k][i])
            let u = l[(k, i)].conj();
            if u.re == 0.0 && u.im == 0.0 {
                continue;
            }
            for j in 0..x.cols() {
                let t = u * x[(k, j)];
                x[(i, j)] -= t;
            }
        }
        let d = l[(i, i)].conj();
        for j in 0..x.cols() {
            x[(i, j)] /= d;
        }
    }
    Ok(x)
}

/// Largest step `alpha` with `X + alpha D >= 0`, computed from the smallest
/// eigenvalue of `L^{-1} D L^{-H}` where `X = L L^H`. Unbounded directions
/// return a large sentinel.
fn max_psd_step(x: &CMat, d: &CMat) -> Result<f64, IpmError> {
    const BIG: f64 = 1e16;
    let l = match robust_cholesky(x) {
        Some(l) => l,
        None => return Ok(backtrack_psd_step(x, d)),
    };
    let y = lower_solve(&l, d)?;
    let t = lower_solve(&l, &y.adjoint())?;
    let lam_min = t
        .symmetrize()
        .herm_eig()?
        .min_eigenvalue();
    if lam_min >= -1e-300 {
        Ok(BIG)
    } else {
        Ok(1.0 / (-lam_min))
    }
}

/// Cholesky with a scale-relative pivot floor (the public one uses an
/// absolute floor tuned for unit-scale covariances).
fn robust_cholesky(m: &CMat) -> Option<CMat> {
    let n = m.rows();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= scale * 1e-15 {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / djj;
        }
    }
    Some(l)
}

/// Solve `L Y = B` for lower-triangular `L`.
fn lower_solve(l: &CMat, b: &CMat) -> Result<CMat, IpmError> {
    let n = l.rows();
    let mut y = b.clone();
    for i in 0..n {
        for k in 0..i {
            let lik = l[(i, k)];
            if lik.re == 0.0 && lik.im == 0.0 {
                continue;
            }
            for j in 0..y.cols() {
                let t = lik * y[(k, j)];
                y[(i, j)] -= t;
            }
        }
        let lii = l[(i, i)];
        for j in 0..y.cols() {
            y[(i, j)] /= lii;
        }
    }
    Ok(y)
}

/// Fallback step rule when the iterate has lost strict definiteness to
/// rounding: shrink until the candidate admits a Cholesky factor.
fn backtrack_psd_step(x: &CMat, d: &CMat) -> f64 {
    let mut alpha = 1.0;
    for _ in 0..80 {
        let cand = x.add(&d.scale_re(alpha)).expect("same shapes");
        if robust_cholesky(&cand).is_some() {
            return alpha;
        }
        alpha *= 0.7;
    }
    0.0
}
