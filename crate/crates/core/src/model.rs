//! MAC system model: correlated source statistics, Rayleigh channel sampling,
//! the linear MMSE receiver, and analytic/empirical sum-MSE.
//!
//! The signal model is `y = H P s + n` with `H = [H_1 .. H_K]`,
//! `P = blockdiag(p_1, .., p_K)`, source covariance `C_s` with unit diagonal,
//! and white noise of variance `noise_var` per receive antenna. The SNR
//! convention fixes `noise_var = 1` in the simulations so each user's SNR in
//! dB is `10 log10(T_k)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{C64, CMat, HermEigResult, LinalgError};

/// A source covariance whose smallest eigenvalue falls below this is treated
/// as singular: the closed inverse is unavailable and the matrix-inversion
/// lemma form of the sum-MSE is used instead.
pub const SINGULAR_COV_TOL: f64 = 1e-10;
/// Slack admitted on per-user power constraints (`||p_k||^2 <= T_k + slack`).
pub const POWER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ModelError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid source covariance: {0}")]
    InvalidCovariance(String),
    #[error("{0}")]
    Domain(String),
    #[error("precoder for user {user} exceeds its power limit: {power:.6} > {limit:.6}")]
    PowerViolation { user: usize, power: f64, limit: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Static description of a MAC scenario: K users with `nt` transmit antennas
/// each, `nr` receive antennas, uniform pairwise correlation `rho`, per-user
/// power limits and noise variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub users: usize,
    pub nt: usize,
    pub nr: usize,
    pub rho: f64,
    pub powers: Vec<f64>,
    pub noise_var: f64,
}

impl Scenario {
    pub fn new(
        users: usize,
        nt: usize,
        nr: usize,
        rho: f64,
        powers: Vec<f64>,
        noise_var: f64,
    ) -> Result<Self, ModelError> {
        if users == 0 {
            return Err(ModelError::InvalidScenario("at least one user required".into()));
        }
        if nt == 0 || nr == 0 {
            return Err(ModelError::InvalidScenario("antenna counts must be positive".into()));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(ModelError::InvalidScenario(format!(
                "correlation must lie in [0, 1], got {rho}"
            )));
        }
        if powers.len() != users {
            return Err(ModelError::InvalidScenario(format!(
                "{} power limits for {} users",
                powers.len(),
                users
            )));
        }
        if powers.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(ModelError::InvalidScenario("power limits must be positive".into()));
        }
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(ModelError::InvalidScenario("noise variance must be positive".into()));
        }
        Ok(Scenario {
            users,
            nt,
            nr,
            rho,
            powers,
            noise_var,
        })
    }

    /// Equal-power scenario from a common per-user SNR in dB (noise_var = 1).
    pub fn with_common_snr_db(
        users: usize,
        nt: usize,
        nr: usize,
        rho: f64,
        snr_db: f64,
    ) -> Result<Self, ModelError> {
        let t = 10f64.powf(snr_db / 10.0);
        Scenario::new(users, nt, nr, rho, vec![t; users], 1.0)
    }

    /// Per-user SNRs in dB (noise_var = 1).
    pub fn with_snrs_db(
        users: usize,
        nt: usize,
        nr: usize,
        rho: f64,
        snrs_db: &[f64],
    ) -> Result<Self, ModelError> {
        let powers = snrs_db.iter().map(|s| 10f64.powf(s / 10.0)).collect();
        Scenario::new(users, nt, nr, rho, powers, 1.0)
    }
}

/// Source statistics: covariance, its eigendecomposition, the inverse when it
/// exists, and the factor used to draw correlated Gaussian symbols.
#[derive(Debug, Clone)]
pub struct SourceModel {
    cs: CMat,
    eig: HermEigResult,
    cs_inv: Option<CMat>,
    factor: CMat,
}

impl SourceModel {
    /// Validate and prepare an arbitrary covariance: Hermitian, unit
    /// diagonal, PSD, off-diagonal magnitudes at most 1.
    pub fn new(cs: CMat) -> Result<Self, ModelError> {
        if !cs.is_square() {
            return Err(ModelError::InvalidCovariance("must be square".into()));
        }
        if !cs.is_hermitian(1e-10) {
            return Err(ModelError::InvalidCovariance("must be Hermitian".into()));
        }
        let k = cs.rows();
        for i in 0..k {
            if (cs[(i, i)] - C64::new(1.0, 0.0)).norm() > 1e-10 {
                return Err(ModelError::InvalidCovariance(format!(
                    "diagonal entry {i} is {} instead of 1",
                    cs[(i, i)]
                )));
            }
            for j in 0..k {
                if cs[(i, j)].norm() > 1.0 + 1e-10 {
                    return Err(ModelError::InvalidCovariance(format!(
                        "entry ({i},{j}) has magnitude above 1"
                    )));
                }
            }
        }
        let cs = cs.symmetrize();
        let eig = cs.herm_eig()?;
        if eig.min_eigenvalue() < -1e-10 {
            return Err(ModelError::InvalidCovariance(format!(
                "not positive semidefinite (min eigenvalue {:.3e})",
                eig.min_eigenvalue()
            )));
        }
        let cs_inv = if eig.min_eigenvalue() < SINGULAR_COV_TOL {
            None
        } else {
            Some(eig.map_spectrum(|l| 1.0 / l))
        };
        // Sampling factor V L^{1/2}; tiny negative eigenvalues clamp to zero,
        // which also covers the fully correlated (singular) case.
        let factor = {
            let q = &eig.eigenvectors;
            CMat::from_fn(k, k, |i, j| q[(i, j)] * eig.eigenvalues[j].max(0.0).sqrt())
        };
        Ok(SourceModel {
            cs,
            eig,
            cs_inv,
            factor,
        })
    }

    /// Uniform correlation model: unit diagonal, `rho` everywhere else.
    pub fn uniform(users: usize, rho: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(ModelError::InvalidCovariance(format!(
                "correlation must lie in [0, 1], got {rho}"
            )));
        }
        let cs = CMat::from_fn(users, users, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(rho, 0.0)
            }
        });
        SourceModel::new(cs)
    }

    pub fn users(&self) -> usize {
        self.cs.rows()
    }

    pub fn covariance(&self) -> &CMat {
        &self.cs
    }

    /// Inverse covariance, absent when the covariance is singular.
    pub fn inverse(&self) -> Option<&CMat> {
        self.cs_inv.as_ref()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min_eigenvalue()
    }

    /// Cached eigendecomposition of the covariance.
    pub fn eigendecomposition(&self) -> &crate::linalg::HermEigResult {
        &self.eig
    }

    /// Draw `m` source vectors (columns) with covariance `C_s`.
    pub fn sample(&self, m: usize, stream: &RngStream) -> CMat {
        let mut rng = stream.rng();
        self.sample_with(m, &mut rng)
    }

    /// Same, drawing from an already-positioned generator.
    pub fn sample_with(&self, m: usize, rng: &mut ChaCha8Rng) -> CMat {
        let k = self.users();
        let white = CMat::from_fn(k, m, |_, _| complex_gaussian_unit(rng));
        self.factor.mul(&white).expect("shapes fixed by construction")
    }
}

/// Seedable, stream-addressable RNG handle. Identical `(seed, stream)` pairs
/// reproduce identical draw sequences regardless of scheduling, which is what
/// makes parallel Monte Carlo runs deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        // Derive a full 256-bit key from (seed, stream) with a SplitMix64
        // chain. The finalizer is bijective, so for a fixed seed every stream
        // id maps to a distinct key.
        let mut state = mix64(self.seed ^ 0x9e37_79b9_7f4a_7c15)
            .wrapping_add(mix64(self.stream ^ 0x6a09_e667_f3bc_c909));
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// SplitMix64 finalizer.
fn mix64(z: u64) -> u64 {
    let mut z = z;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Complex circularly symmetric Gaussian with `E|z|^2 = 1`, from a Box-Muller
/// pair: magnitude `sqrt(-ln u)`, uniform phase.
pub fn complex_gaussian_unit(rng: &mut ChaCha8Rng) -> C64 {
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let v: f64 = rng.random();
    let r = (-u.ln()).sqrt();
    C64::from_polar(r, std::f64::consts::TAU * v)
}

/// One fading realization: per-user channel blocks and their horizontal
/// stacking `H = [H_1 .. H_K]`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    blocks: Vec<CMat>,
    stacked: CMat,
}

impl ChannelRealization {
    pub fn new(blocks: Vec<CMat>) -> Self {
        let stacked = CMat::hcat(&blocks);
        ChannelRealization { blocks, stacked }
    }

    /// i.i.d. Rayleigh fading: every entry CN(0, 1).
    pub fn sample(scn: &Scenario, stream: &RngStream) -> Self {
        let mut rng = stream.rng();
        Self::sample_with(scn, &mut rng)
    }

    /// Same, drawing from an already-positioned generator.
    pub fn sample_with(scn: &Scenario, rng: &mut ChaCha8Rng) -> Self {
        let blocks = (0..scn.users)
            .map(|_| CMat::from_fn(scn.nr, scn.nt, |_, _| complex_gaussian_unit(rng)))
            .collect();
        ChannelRealization::new(blocks)
    }

    pub fn users(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    /// `H`, size `nr x (nt * K)`.
    pub fn stacked(&self) -> &CMat {
        &self.stacked
    }
}

/// Per-user precoding vectors with their block-diagonal matrix form.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    vectors: Vec<CMat>,
    block: CMat,
}

impl PrecoderSet {
    /// Wrap per-user `nt x 1` vectors, enforcing the power constraints of the
    /// owning scenario.
    pub fn new(vectors: Vec<CMat>, scn: &Scenario) -> Result<Self, ModelError> {
        if vectors.len() != scn.users {
            return Err(ModelError::InvalidScenario(format!(
                "{} precoders for {} users",
                vectors.len(),
                scn.users
            )));
        }
        for (k, v) in vectors.iter().enumerate() {
            if v.rows() != scn.nt || v.cols() != 1 {
                return Err(ModelError::InvalidScenario(format!(
                    "precoder {k} is {}x{}, expected {}x1",
                    v.rows(),
                    v.cols(),
                    scn.nt
                )));
            }
            let power = v.fro_norm().powi(2);
            if power > scn.powers[k] + POWER_SLACK {
                return Err(ModelError::PowerViolation {
                    user: k,
                    power,
                    limit: scn.powers[k],
                });
            }
        }
        let block = CMat::block_diag(&vectors);
        Ok(PrecoderSet { vectors, block })
    }

    pub fn vector(&self, k: usize) -> &CMat {
        &self.vectors[k]
    }

    pub fn vectors(&self) -> &[CMat] {
        &self.vectors
    }

    /// `P = blockdiag(p_1, .., p_K)`, size `(nt * K) x K`.
    pub fn block_diag_matrix(&self) -> &CMat {
        &self.block
    }

    /// Allocated power per user, `||p_k||^2`.
    pub fn powers(&self) -> Vec<f64> {
        self.vectors.iter().map(|v| v.fro_norm().powi(2)).collect()
    }
}

/// Linear MMSE receive filter `W` (so the estimate is `W^H y`):
/// `W = (H P C_s P^H H^H + noise_var I)^{-1} H P C_s`.
pub fn mmse_receiver(
    h: &CMat,
    p: &CMat,
    source: &SourceModel,
    noise_var: f64,
) -> Result<CMat, ModelError> {
    let hp = h.mul(p)?;
    let hpc = hp.mul(source.covariance())?;
    let mut gram = hpc.mul(&hp.adjoint())?;
    for i in 0..gram.rows() {
        gram[(i, i)] += noise_var;
    }
    Ok(gram.solve(&hpc)?)
}

/// Analytic sum-MSE for fixed `H`, `P`:
/// `tr( (1/noise_var) P^H H^H H P + C_s^{-1} )^{-1}`, falling back to the
/// matrix-inversion-lemma form when `C_s` is singular.
pub fn sum_mse(h: &CMat, p: &CMat, source: &SourceModel, noise_var: f64) -> Result<f64, ModelError> {
    match source.inverse() {
        Some(cs_inv) => {
            let gram = h.adjoint().mul(h)?;
            sum_mse_from_gram(&gram, p, cs_inv, noise_var)
        }
        None => sum_mse_lemma_form(h, p, source, noise_var),
    }
}

pub(crate) fn sum_mse_from_gram(
    gram: &CMat,
    p: &CMat,
    cs_inv: &CMat,
    noise_var: f64,
) -> Result<f64, ModelError> {
    let inner = p
        .adjoint()
        .mul(&gram.mul(p)?)?
        .scale_re(1.0 / noise_var)
        .add(cs_inv)?;
    let inv = inner.inverse()?;
    Ok(inv.trace().re)
}

/// Sum-MSE in the form `K - tr(C_s P^H H^H (H P C_s P^H H^H + noise_var I)^{-1} H P C_s)`,
/// valid for singular `C_s` as well.
pub fn sum_mse_lemma_form(
    h: &CMat,
    p: &CMat,
    source: &SourceModel,
    noise_var: f64,
) -> Result<f64, ModelError> {
    let k = source.users() as f64;
    let hp = h.mul(p)?;
    let hpc = hp.mul(source.covariance())?;
    let mut gram = hpc.mul(&hp.adjoint())?;
    for i in 0..gram.rows() {
        gram[(i, i)] += noise_var;
    }
    let solved = gram.solve(&hpc)?;
    let reduced = hpc.adjoint().mul(&solved)?;
    Ok(k - reduced.trace().re)
}

/// Empirical sum-MSE: `(1/M) sum_m sum_k |s - s_hat|^2`.
pub fn empirical_sum_mse(s: &CMat, s_hat: &CMat) -> Result<f64, ModelError> {
    if s.rows() != s_hat.rows() || s.cols() != s_hat.cols() {
        return Err(ModelError::Domain("sample matrices must have matching shapes".into()));
    }
    let m = s.cols();
    if m == 0 {
        return Err(ModelError::Domain("no symbols to average over".into()));
    }
    let total: f64 = s
        .data()
        .iter()
        .zip(s_hat.data())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(total / m as f64)
}

/// Signal-to-distortion ratio normalized by the user count:
/// `10 log10(K / xi)`. Errors on a nonpositive distortion.
pub fn sdr_db(users: usize, xi: f64) -> Result<f64, ModelError> {
    if !(xi > 0.0) {
        return Err(ModelError::Domain(format!(
            "sum-MSE must be positive for an SDR, got {xi}"
        )));
    }
    Ok(10.0 * (users as f64 / xi).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_covariance_shapes() {
        let m = SourceModel::uniform(2, 0.0).unwrap();
        assert!(m.covariance().sub(&CMat::identity(2)).unwrap().fro_norm() < 1e-14);

        let m = SourceModel::uniform(2, 0.8).unwrap();
        assert!((m.covariance()[(0, 1)].re - 0.8).abs() < 1e-14);
        assert!((m.covariance()[(1, 1)].re - 1.0).abs() < 1e-14);

        // Eigenvalues of a 3x3 uniform covariance: 1 - rho (twice), 1 + 2 rho.
        let m = SourceModel::uniform(3, 0.95).unwrap();
        assert!((m.min_eigenvalue() - 0.05).abs() < 1e-10);

        assert!(SourceModel::uniform(2, 1.2).is_err());
    }

    #[test]
    fn singular_covariance_has_no_inverse() {
        let m = SourceModel::uniform(2, 1.0).unwrap();
        assert!(m.inverse().is_none());
        let m = SourceModel::uniform(2, 0.5).unwrap();
        assert!(m.inverse().is_some());
    }

    #[test]
    fn source_sampling_statistics() {
        let m = SourceModel::uniform(1, 0.0).unwrap();
        let s = m.sample(100_000, &RngStream::new(1, 0));
        let var: f64 = s.data().iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e5;
        assert!((var - 1.0).abs() < 0.02, "variance {var}");

        // Fully correlated: both rows identical per column.
        let m = SourceModel::uniform(2, 1.0).unwrap();
        let s = m.sample(100, &RngStream::new(2, 0));
        for j in 0..100 {
            assert!((s[(0, j)] - s[(1, j)]).norm() < 1e-10);
        }

        let m = SourceModel::uniform(2, 0.8).unwrap();
        let s = m.sample(100_000, &RngStream::new(3, 0));
        let cross: f64 = (0..100_000)
            .map(|j| (s[(0, j)] * s[(1, j)].conj()).re)
            .sum::<f64>()
            / 1e5;
        assert!((cross - 0.8).abs() < 0.02, "cross-correlation {cross}");
    }

    #[test]
    fn channel_sampling_statistics() {
        let scn = Scenario::new(2, 2, 3, 0.5, vec![1.0, 1.0], 1.0).unwrap();
        let mut acc = 0.0;
        let mut count = 0usize;
        for t in 0..9_000 {
            let ch = ChannelRealization::sample(&scn, &RngStream::new(7, t));
            for b in ch.blocks() {
                acc += b.data().iter().map(|z| z.norm_sqr()).sum::<f64>();
                count += b.data().len();
            }
        }
        let mean = acc / count as f64;
        assert!((mean - 1.0).abs() < 0.02, "E|h|^2 = {mean}");

        // Determinism and stream separation.
        let a = ChannelRealization::sample(&scn, &RngStream::new(7, 0));
        let b = ChannelRealization::sample(&scn, &RngStream::new(7, 0));
        assert_eq!(a.stacked().data(), b.stacked().data());
        let c = ChannelRealization::sample(&scn, &RngStream::new(7, 1));
        assert!(a.stacked().sub(c.stacked()).unwrap().fro_norm() > 1e-6);
    }

    #[test]
    fn scalar_wiener_filter() {
        let scn = Scenario::new(1, 1, 1, 0.0, vec![1.0], 1.0).unwrap();
        let source = SourceModel::uniform(1, 0.0).unwrap();
        let h = CMat::from_real(1, 1, &[1.0]);
        let p = PrecoderSet::new(vec![CMat::from_real(1, 1, &[1.0])], &scn).unwrap();
        let w = mmse_receiver(&h, p.block_diag_matrix(), &source, 1.0).unwrap();
        assert!((w[(0, 0)].re - 0.5).abs() < 1e-12);
        let xi = sum_mse(&h, p.block_diag_matrix(), &source, 1.0).unwrap();
        assert!((xi - 0.5).abs() < 1e-12);
        let xi2 = sum_mse_lemma_form(&h, p.block_diag_matrix(), &source, 1.0).unwrap();
        assert!((xi2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_precoder_receiver_is_zero() {
        let source = SourceModel::uniform(2, 0.5).unwrap();
        let h = CMat::from_real(2, 2, &[1.0, 0.3, 0.2, 0.9]);
        let p = CMat::zeros(2, 2);
        let w = mmse_receiver(&h, &p, &source, 1.0).unwrap();
        assert!(w.fro_norm() < 1e-14);
    }

    #[test]
    fn lemma_form_agrees_with_direct_form() {
        let mut rng = RngStream::new(11, 0).rng();
        for trial in 0..1000 {
            let k = 1 + trial % 4;
            let nt = 1 + (trial / 4) % 2;
            let nr = 1 + (trial / 8) % 3;
            let rho = [0.0, 0.3, 0.8, 0.95][trial % 4];
            let source = SourceModel::uniform(k, rho).unwrap();
            let scn = Scenario::new(k, nt, nr, rho, vec![4.0; k], 0.7).unwrap();
            let ch = ChannelRealization::sample_with(&scn, &mut rng);
            let p = CMat::block_diag(
                &(0..k)
                    .map(|_| CMat::from_fn(nt, 1, |_, _| complex_gaussian_unit(&mut rng)))
                    .collect::<Vec<_>>(),
            );
            let a = sum_mse(ch.stacked(), &p, &source, 0.7).unwrap();
            let b = sum_mse_lemma_form(ch.stacked(), &p, &source, 0.7).unwrap();
            assert!((a - b).abs() < 1e-10, "trial {trial}: {a} vs {b}");
        }
    }

    #[test]
    fn fully_correlated_zero_power_keeps_prior_variance() {
        let source = SourceModel::uniform(2, 1.0).unwrap();
        let h = CMat::from_real(1, 2, &[1.0, 0.5]);
        let p = CMat::zeros(2, 2);
        let xi = sum_mse_lemma_form(&h, &p, &source, 1.0).unwrap();
        assert!((xi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_and_sdr_guards() {
        let s = CMat::from_real(1, 3, &[1.0, 2.0, 3.0]);
        assert!((empirical_sum_mse(&s, &s).unwrap() - 0.0).abs() < 1e-15);
        assert!(sdr_db(2, 0.0).is_err());
        assert!((sdr_db(2, 2.0).unwrap() - 0.0).abs() < 1e-12);
        assert!(sdr_db(2, 1.0).unwrap() > 0.0);
        let empty = CMat::zeros(1, 0);
        assert!(empirical_sum_mse(&empty, &empty).is_err());
    }

    #[test]
    fn mmse_is_optimal_among_linear_filters() {
        // Perturbing W or replacing it with random competitors never lowers
        // the empirical MSE computed on the same draws.
        let scn = Scenario::new(2, 1, 2, 0.8, vec![2.0, 3.0], 1.0).unwrap();
        let source = SourceModel::uniform(2, 0.8).unwrap();
        let ch = ChannelRealization::sample(&scn, &RngStream::new(21, 0));
        let p = PrecoderSet::new(
            vec![
                CMat::from_real(1, 1, &[2f64.sqrt()]),
                CMat::from_real(1, 1, &[3f64.sqrt()]),
            ],
            &scn,
        )
        .unwrap();
        let w = mmse_receiver(ch.stacked(), p.block_diag_matrix(), &source, 1.0).unwrap();

        let m = 20_000;
        let s = source.sample(m, &RngStream::new(21, 1));
        let mut rng = RngStream::new(21, 2).rng();
        let noise = CMat::from_fn(scn.nr, m, |_, _| complex_gaussian_unit(&mut rng));
        let y = ch
            .stacked()
            .mul(p.block_diag_matrix())
            .unwrap()
            .mul(&s)
            .unwrap()
            .add(&noise)
            .unwrap();

        let mse_of = |filter: &CMat| {
            let est = filter.adjoint().mul(&y).unwrap();
            empirical_sum_mse(&s, &est).unwrap()
        };
        let base = mse_of(&w);

        let mut comp_rng = RngStream::new(21, 3).rng();
        for _ in 0..20 {
            let delta = CMat::from_fn(w.rows(), w.cols(), |_, _| {
                complex_gaussian_unit(&mut comp_rng) * 0.05
            });
            let competitor = w.add(&delta).unwrap();
            assert!(mse_of(&competitor) >= base - 1e-9);
        }
    }
}
