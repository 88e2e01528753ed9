//! Factorizations on [`CMat`]: SVD, Hermitian eigendecomposition, Cholesky,
//! LU-based solve/det/inverse, and an SVD-based nullspace.
//!
//! The SVD is a one-sided Jacobi on the complex field and the symmetric
//! eigensolver a cyclic two-sided Jacobi; both converge to high relative
//! accuracy on the matrix sizes used here and carry an iteration cap so a
//! failure surfaces as an error instead of a silent partial result. Vectors
//! are phase-normalized deterministically: the largest-magnitude component of
//! each accumulated column is made real nonnegative.

use super::{C64, CMat, LinalgError, HERM_TOL, PD_PIVOT_TOL};

/// Sweep cap factor for the Jacobi iterations: `100 * max(rows, cols)`.
const JACOBI_SWEEP_FACTOR: usize = 100;
/// Relative off-diagonal threshold that counts as converged.
const JACOBI_EPS: f64 = 1e-14;

/// Thin singular value decomposition `M = U diag(S) V^H`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Left singular vectors, `rows x min(rows, cols)`, orthonormal columns.
    pub u: CMat,
    /// Singular values, nonnegative, descending.
    pub s: Vec<f64>,
    /// Right singular vectors, `cols x min(rows, cols)`, orthonormal columns.
    pub v: CMat,
}

impl SvdResult {
    /// Largest singular value (0 for an all-zero matrix).
    pub fn spectral_norm(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Reassemble `U diag(S) V^H`.
    pub fn reconstruct(&self) -> CMat {
        let us = CMat::from_fn(self.u.rows(), self.s.len(), |i, j| self.u[(i, j)] * self.s[j]);
        us.mul(&self.v.adjoint()).expect("shapes fixed by construction")
    }
}

/// Hermitian eigendecomposition `M = Q diag(vals) Q^H`.
#[derive(Debug, Clone)]
pub struct HermEigResult {
    /// Real eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues` order.
    pub eigenvectors: CMat,
}

impl HermEigResult {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> CMat {
        let qd = CMat::from_fn(self.eigenvectors.rows(), self.eigenvalues.len(), |i, j| {
            self.eigenvectors[(i, j)] * self.eigenvalues[j]
        });
        qd.mul(&self.eigenvectors.adjoint()).expect("square by construction")
    }

    /// `f` applied to the spectrum: `Q diag(f(vals)) Q^H`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMat {
        let qd = CMat::from_fn(self.eigenvectors.rows(), self.eigenvalues.len(), |i, j| {
            self.eigenvectors[(i, j)] * f(self.eigenvalues[j])
        });
        qd.mul(&self.eigenvectors.adjoint()).expect("square by construction")
    }
}

impl CMat {
    /// Thin SVD via one-sided Jacobi rotations on the complex field.
    ///
    /// Columns of the working matrix are rotated pairwise until mutually
    /// orthogonal; singular values are the final column norms. Fails with
    /// [`LinalgError::NonConvergence`] if the sweep cap is exceeded.
    pub fn svd(&self) -> Result<SvdResult, LinalgError> {
        assert!(self.rows() >= 1 && self.cols() >= 1, "svd of empty matrix");
        if self.rows() < self.cols() {
            // Factor the adjoint and swap the roles of U and V.
            let t = self.adjoint().svd()?;
            return Ok(SvdResult { u: t.v, s: t.s, v: t.u });
        }

        let m = self.rows();
        let n = self.cols();
        let mut g = self.clone(); // columns get rotated in place
        let mut v = CMat::identity(n);

        let max_sweeps = JACOBI_SWEEP_FACTOR * m.max(n);
        let mut converged = n < 2;
        for _sweep in 0..max_sweeps {
            if n < 2 {
                break;
            }
            converged = true;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let mut app = 0.0;
                    let mut aqq = 0.0;
                    let mut apq = C64::new(0.0, 0.0);
                    for i in 0..m {
                        let gp = g[(i, p)];
                        let gq = g[(i, q)];
                        app += gp.norm_sqr();
                        aqq += gq.norm_sqr();
                        apq += gp.conj() * gq;
                    }
                    let coupling = apq.norm();
                    if coupling <= JACOBI_EPS * (app * aqq).sqrt() {
                        continue;
                    }
                    converged = false;
                    let phase = apq / coupling; // e^{i arg(apq)}
                    let tau = (aqq - app) / (2.0 * coupling);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    let sp = phase * s; // s e^{i phi}
                    let spc = sp.conj();
                    for i in 0..m {
                        let gp = g[(i, p)];
                        let gq = g[(i, q)];
                        g[(i, p)] = gp * c - gq * spc;
                        g[(i, q)] = gp * sp + gq * c;
                    }
                    for i in 0..n {
                        let vp = v[(i, p)];
                        let vq = v[(i, q)];
                        v[(i, p)] = vp * c - vq * spc;
                        v[(i, q)] = vp * sp + vq * c;
                    }
                }
            }
            if converged {
                break;
            }
        }
        if !converged {
            return Err(LinalgError::NonConvergence {
                op: "svd",
                iterations: max_sweeps,
            });
        }

        // Column norms are the singular values; sort descending.
        let mut order: Vec<usize> = (0..n).collect();
        let norms: Vec<f64> = (0..n)
            .map(|j| (0..m).map(|i| g[(i, j)].norm_sqr()).sum::<f64>().sqrt())
            .collect();
        order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("finite norms"));

        let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
        let smax = s.first().copied().unwrap_or(0.0);
        let rank_tol = smax * f64::EPSILON * (m.max(n) as f64);

        let mut u = CMat::zeros(m, n);
        let mut vv = CMat::zeros(n, n);
        for (k, &j) in order.iter().enumerate() {
            if s[k] > rank_tol && s[k] > 0.0 {
                for i in 0..m {
                    u[(i, k)] = g[(i, j)] / s[k];
                }
            }
            for i in 0..n {
                vv[(i, k)] = v[(i, j)];
            }
        }
        complete_orthonormal_columns(&mut u, &s, rank_tol);

        // Shared phase convention: anchor on the rotation accumulator V and
        // carry the same factor into U so U diag(S) V^H is unchanged.
        for k in 0..n {
            let phase = column_anchor_phase(&vv, k);
            for i in 0..n {
                vv[(i, k)] *= phase;
            }
            for i in 0..m {
                u[(i, k)] *= phase;
            }
        }

        Ok(SvdResult { u, s, v: vv })
    }

    /// Eigendecomposition of a Hermitian matrix via cyclic Jacobi.
    ///
    /// The input must be Hermitian within [`HERM_TOL`] (relative); it is
    /// symmetrized before iterating. Eigenvalues come back descending.
    pub fn herm_eig(&self) -> Result<HermEigResult, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                op: "herm_eig",
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let asym = self.asymmetry();
        if asym > HERM_TOL * (1.0 + self.fro_norm()) {
            return Err(LinalgError::NotHermitian { asymmetry: asym });
        }
        let n = self.rows();
        let mut a = self.symmetrize();
        let mut q = CMat::identity(n);
        let scale = a.fro_norm().max(f64::MIN_POSITIVE);

        let max_sweeps = JACOBI_SWEEP_FACTOR * n;
        let mut converged = n < 2;
        for _sweep in 0..max_sweeps {
            if n < 2 {
                break;
            }
            converged = true;
            for p in 0..n - 1 {
                for pq in p + 1..n {
                    let apq = a[(p, pq)];
                    let coupling = apq.norm();
                    if coupling <= JACOBI_EPS * scale {
                        continue;
                    }
                    converged = false;
                    let phase = apq / coupling;
                    let app = a[(p, p)].re;
                    let aqq = a[(pq, pq)].re;
                    let tau = (aqq - app) / (2.0 * coupling);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    let sp = phase * s;
                    let spc = sp.conj();
                    // A <- R^H A R with R acting on columns (p, pq).
                    for i in 0..n {
                        let aip = a[(i, p)];
                        let aiq = a[(i, pq)];
                        a[(i, p)] = aip * c - aiq * spc;
                        a[(i, pq)] = aip * sp + aiq * c;
                    }
                    for j in 0..n {
                        let apj = a[(p, j)];
                        let aqj = a[(pq, j)];
                        a[(p, j)] = apj * c - aqj * sp;
                        a[(pq, j)] = apj * spc + aqj * c;
                    }
                    // Clamp the rotated pair to exactly Hermitian.
                    let v = (a[(p, pq)] + a[(pq, p)].conj()) * 0.5;
                    a[(p, pq)] = v;
                    a[(pq, p)] = v.conj();
                    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                    a[(pq, pq)] = C64::new(a[(pq, pq)].re, 0.0);
                    for i in 0..n {
                        let qip = q[(i, p)];
                        let qiq = q[(i, pq)];
                        q[(i, p)] = qip * c - qiq * spc;
                        q[(i, pq)] = qip * sp + qiq * c;
                    }
                }
            }
            if converged {
                break;
            }
        }
        if !converged {
            return Err(LinalgError::NonConvergence {
                op: "herm_eig",
                iterations: max_sweeps,
            });
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&x, &y| diag[y].partial_cmp(&diag[x]).expect("finite eigenvalues"));

        let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
        let mut eigenvectors = CMat::zeros(n, n);
        for (k, &j) in order.iter().enumerate() {
            for i in 0..n {
                eigenvectors[(i, k)] = q[(i, j)];
            }
            let phase = column_anchor_phase(&eigenvectors, k);
            for i in 0..n {
                eigenvectors[(i, k)] *= phase;
            }
        }

        Ok(HermEigResult {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Cholesky factor `L` (lower triangular) with `L L^H = M`.
    ///
    /// Fails with [`LinalgError::NotPositiveDefinite`] when a squared pivot
    /// drops to [`PD_PIVOT_TOL`] or below.
    pub fn cholesky(&self) -> Result<CMat, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                op: "cholesky",
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let n = self.rows();
        let mut l = CMat::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d <= PD_PIVOT_TOL {
                return Err(LinalgError::NotPositiveDefinite { pivot: d, index: j });
            }
            let djj = d.sqrt();
            l[(j, j)] = C64::new(djj, 0.0);
            for i in j + 1..n {
                let mut v = self[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = v / djj;
            }
        }
        Ok(l)
    }

    /// Solve `M X = B` by LU with partial pivoting.
    pub fn solve(&self, b: &CMat) -> Result<CMat, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                op: "solve",
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        if self.rows() != b.rows() {
            return Err(LinalgError::DimensionMismatch {
                op: "solve",
                lhs_rows: self.rows(),
                lhs_cols: self.cols(),
                rhs_rows: b.rows(),
                rhs_cols: b.cols(),
            });
        }
        let (lu, perm, _sign) = self.lu()?;
        let n = self.rows();
        let mut x = CMat::zeros(n, b.cols());
        for i in 0..n {
            for j in 0..b.cols() {
                x[(i, j)] = b[(perm[i], j)];
            }
        }
        // Forward substitution (unit lower factor).
        for i in 1..n {
            for k in 0..i {
                let lik = lu[(i, k)];
                if lik.re == 0.0 && lik.im == 0.0 {
                    continue;
                }
                for j in 0..b.cols() {
                    let t = lik * x[(k, j)];
                    x[(i, j)] -= t;
                }
            }
        }
        // Back substitution.
        for i in (0..n).rev() {
            for k in i + 1..n {
                let uik = lu[(i, k)];
                if uik.re == 0.0 && uik.im == 0.0 {
                    continue;
                }
                for j in 0..b.cols() {
                    let t = uik * x[(k, j)];
                    x[(i, j)] -= t;
                }
            }
            let uii = lu[(i, i)];
            for j in 0..b.cols() {
                x[(i, j)] /= uii;
            }
        }
        Ok(x)
    }

    /// Determinant via the LU factors.
    pub fn det(&self) -> Result<C64, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                op: "det",
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        match self.lu() {
            Ok((lu, _perm, sign)) => {
                let mut d = C64::new(sign, 0.0);
                for i in 0..self.rows() {
                    d *= lu[(i, i)];
                }
                Ok(d)
            }
            // A rank-deficient matrix has a zero determinant rather than
            // being an error for this operation.
            Err(LinalgError::Singular { .. }) => Ok(C64::new(0.0, 0.0)),
            Err(e) => Err(e),
        }
    }

    pub fn inverse(&self) -> Result<CMat, LinalgError> {
        self.solve(&CMat::identity(self.rows()))
    }

    /// Orthonormal basis for the right nullspace: columns `n_i` with
    /// `||M n_i|| <= tol * ||M||`. Column count equals the number of singular
    /// values at or below `tol * max(S)`. Full-rank input yields 0 columns.
    pub fn nullspace(&self, tol: f64) -> Result<CMat, LinalgError> {
        let svd = self.svd()?;
        let smax = svd.spectral_norm();
        let n = self.cols();
        let r = svd.s.len();
        let mut keep: Vec<usize> = (0..r).filter(|&k| svd.s[k] <= tol * smax).collect();
        // Right singular vectors beyond min(m, n) (wide matrices) also span
        // the nullspace; the thin V from a wide factorization already has
        // cols == min dimension, so extend with an orthonormal completion.
        let extra = n.saturating_sub(r);
        let mut basis = CMat::zeros(n, keep.len() + extra);
        for (idx, &k) in keep.iter().enumerate() {
            for i in 0..n {
                basis[(i, idx)] = svd.v[(i, k)];
            }
        }
        if extra > 0 {
            // Complete against all of V, then append the new directions.
            let mut full = CMat::zeros(n, n);
            full.set_block(0, 0, &svd.v);
            let snominal: Vec<f64> = (0..n).map(|i| if i < r { svd.s[i].max(1.0) } else { 0.0 }).collect();
            complete_orthonormal_columns(&mut full, &snominal, 0.0);
            for e in 0..extra {
                for i in 0..n {
                    basis[(i, keep.len() + e)] = full[(i, r + e)];
                }
            }
            keep.extend(r..n);
        }
        Ok(basis)
    }

    /// Packed LU with partial pivoting: returns (LU, row permutation, pivot sign).
    fn lu(&self) -> Result<(CMat, Vec<usize>, f64), LinalgError> {
        let n = self.rows();
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (mut imax, mut vmax) = (k, lu[(k, k)].norm());
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > vmax {
                    imax = i;
                    vmax = v;
                }
            }
            if vmax <= scale * 1e-14 * (n as f64) {
                return Err(LinalgError::Singular { pivot: vmax, index: k });
            }
            if imax != k {
                perm.swap(k, imax);
                sign = -sign;
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(imax, j)];
                    lu[(imax, j)] = t;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let t = f * lu[(k, j)];
                    lu[(i, j)] -= t;
                }
            }
        }
        Ok((lu, perm, sign))
    }
}

/// Phase factor making the largest-magnitude component of column `k` real
/// nonnegative. Returns 1 for an all-zero column.
fn column_anchor_phase(m: &CMat, k: usize) -> C64 {
    let mut best = 0.0;
    let mut anchor = C64::new(0.0, 0.0);
    for i in 0..m.rows() {
        let v = m[(i, k)];
        let mag = v.norm();
        if mag > best {
            best = mag;
            anchor = v;
        }
    }
    if best == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        anchor.conj() / best
    }
}

/// Fill columns whose singular value is at or below `tol` with an orthonormal
/// completion built from standard basis vectors (modified Gram-Schmidt).
fn complete_orthonormal_columns(u: &mut CMat, s: &[f64], tol: f64) {
    let m = u.rows();
    for k in 0..s.len() {
        if s[k] > tol && s[k] > 0.0 {
            continue;
        }
        let mut best_col: Option<Vec<C64>> = None;
        let mut best_norm = 0.0;
        for cand in 0..m {
            let mut v = vec![C64::new(0.0, 0.0); m];
            v[cand] = C64::new(1.0, 0.0);
            for j in 0..s.len() {
                if j == k || (s[j] <= tol && j > k) {
                    continue; // only project against columns already filled
                }
                let mut dot = C64::new(0.0, 0.0);
                for i in 0..m {
                    dot += u[(i, j)].conj() * v[i];
                }
                for i in 0..m {
                    let t = u[(i, j)] * dot;
                    v[i] -= t;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > best_norm {
                best_norm = norm;
                best_col = Some(v);
            }
        }
        if let Some(v) = best_col {
            for i in 0..m {
                u[(i, k)] = v[i] / best_norm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{C64, CMat, RECON_TOL};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_cmat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
        })
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        let a = random_cmat(rng, n, n);
        a.add(&a.adjoint()).unwrap().scale_re(0.5)
    }

    fn ortho_error(m: &CMat) -> f64 {
        let g = m.adjoint().mul(m).unwrap();
        g.sub(&CMat::identity(m.cols())).unwrap().fro_norm()
    }

    #[test]
    fn svd_identity() {
        let svd = CMat::identity(2).svd().unwrap();
        assert!((svd.s[0] - 1.0).abs() < 1e-12);
        assert!((svd.s[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_diagonal_with_zero() {
        let m = CMat::from_real(2, 2, &[3.0, 0.0, 0.0, 0.0]);
        let svd = m.svd().unwrap();
        assert!((svd.s[0] - 3.0).abs() < 1e-12);
        assert!(svd.s[1].abs() < 1e-12);
        // U and V are the identity under the sign convention.
        assert!(svd.u.sub(&CMat::identity(2)).unwrap().fro_norm() < 1e-10);
        assert!(svd.v.sub(&CMat::identity(2)).unwrap().fro_norm() < 1e-10);
    }

    #[test]
    fn svd_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, n) in &[(3usize, 2usize), (2, 3), (5, 5), (16, 16), (9, 4)] {
            let a = random_cmat(&mut rng, m, n);
            let svd = a.svd().unwrap();
            let err = svd.reconstruct().sub(&a).unwrap().fro_norm();
            assert!(err <= RECON_TOL * a.fro_norm(), "recon err {err}");
            assert!(ortho_error(&svd.u) < 1e-10);
            assert!(ortho_error(&svd.v) < 1e-10);
            for w in svd.s.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn svd_matches_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_cmat(&mut rng, 6, 4);
        let svd = a.svd().unwrap();
        let gram = a.adjoint().mul(&a).unwrap();
        let eig = gram.herm_eig().unwrap();
        for (k, &s) in svd.s.iter().enumerate() {
            assert!((s - eig.eigenvalues[k].max(0.0).sqrt()).abs() < 1e-8);
        }
    }

    #[test]
    fn herm_eig_identity_and_rank1() {
        let eig = CMat::identity(3).herm_eig().unwrap();
        for v in &eig.eigenvalues {
            assert!((v - 1.0).abs() < 1e-12);
        }
        // u u^H with ||u|| = 2 has eigenvalues (4, 0, ...).
        let u = CMat::col_vector(&[C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let m = u.mul(&u.adjoint()).unwrap();
        let eig = m.herm_eig().unwrap();
        assert!((eig.eigenvalues[0] - 4.0).abs() < 1e-12);
        assert!(eig.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn herm_eig_trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_hermitian(&mut rng, 4);
        let eig = m.herm_eig().unwrap();
        let tr: f64 = eig.eigenvalues.iter().sum();
        assert!((tr - m.trace().re).abs() < 1e-10);
        let err = eig.reconstruct().sub(&m).unwrap().fro_norm();
        assert!(err <= RECON_TOL * m.fro_norm().max(1.0));
        assert!(ortho_error(&eig.eigenvectors) < 1e-10);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = CMat::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(m.herm_eig(), Err(super::LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn cholesky_cases() {
        let l = CMat::identity(3).cholesky().unwrap();
        assert!(l.sub(&CMat::identity(3)).unwrap().fro_norm() < 1e-14);

        let m = CMat::from_real(2, 2, &[1.0, 0.8, 0.8, 1.0]);
        let l = m.cholesky().unwrap();
        assert!((l[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((l[(1, 0)].re - 0.8).abs() < 1e-14);
        assert!((l[(1, 1)].re - 0.6).abs() < 1e-14);
        let err = l.mul(&l.adjoint()).unwrap().sub(&m).unwrap().fro_norm();
        assert!(err <= 1e-10 * m.fro_norm());

        let rho = 1.0 - 1e-14;
        let near = CMat::from_real(2, 2, &[1.0, rho, rho, 1.0]);
        assert!(matches!(
            near.cholesky(),
            Err(super::LinalgError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn solve_det_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let b = random_cmat(&mut rng, 3, 2);
        let x = CMat::identity(3).solve(&b).unwrap();
        assert!(x.sub(&b).unwrap().fro_norm() < 1e-14);

        let d = CMat::from_row_major(
            2,
            2,
            vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 3.0)],
        );
        let det = d.det().unwrap();
        assert!((det - C64::new(0.0, 6.0)).norm() < 1e-12);

        let m = random_cmat(&mut rng, 3, 3);
        let inv = m.inverse().unwrap();
        let err = m.mul(&inv).unwrap().sub(&CMat::identity(3)).unwrap().fro_norm();
        assert!(err < 1e-9);

        let singular = CMat::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            singular.solve(&CMat::identity(2)),
            Err(super::LinalgError::Singular { .. })
        ));
    }

    #[test]
    fn det_of_hermitian_matches_eigenvalue_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_hermitian(&mut rng, 4);
        let det = m.det().unwrap();
        let eig = m.herm_eig().unwrap();
        let prod: f64 = eig.eigenvalues.iter().product();
        assert!((det.re - prod).abs() <= 1e-8 * prod.abs().max(1.0));
        assert!(det.im.abs() < 1e-9);
    }

    #[test]
    fn nullspace_cases() {
        let row = CMat::from_real(1, 2, &[1.0, 0.0]);
        let n = row.nullspace(1e-10).unwrap();
        assert_eq!(n.cols(), 1);
        assert!((n[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(n[(0, 0)].norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let full = random_cmat(&mut rng, 2, 2);
        assert_eq!(full.nullspace(1e-10).unwrap().cols(), 0);

        // Random rank-1 3x3.
        let a = random_cmat(&mut rng, 3, 1);
        let b = random_cmat(&mut rng, 3, 1);
        let m = a.mul(&b.adjoint()).unwrap();
        let n = m.nullspace(1e-9).unwrap();
        assert_eq!(n.cols(), 2);
        assert!(m.mul(&n).unwrap().fro_norm() <= 1e-9 * m.fro_norm());
        let g = n.adjoint().mul(&n).unwrap();
        assert!(g.sub(&CMat::identity(2)).unwrap().fro_norm() < 1e-10);
    }

    #[test]
    fn factorization_reconstruction_sweep() {
        // 1000 random matrices up to 16x16 across svd/eig.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..1000 {
            let m = 1 + (trial % 16);
            let n = 1 + ((trial / 16) % 16);
            if trial % 2 == 0 {
                let a = random_cmat(&mut rng, m, n);
                let svd = a.svd().unwrap();
                let err = svd.reconstruct().sub(&a).unwrap().fro_norm();
                assert!(err <= RECON_TOL * a.fro_norm().max(1e-30), "svd {m}x{n}: {err}");
            } else {
                let h = random_hermitian(&mut rng, m);
                let eig = h.herm_eig().unwrap();
                let err = eig.reconstruct().sub(&h).unwrap().fro_norm();
                assert!(err <= RECON_TOL * h.fro_norm().max(1.0), "eig {m}: {err}");
            }
        }
    }
}
