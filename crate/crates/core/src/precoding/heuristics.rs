//! Baseline and direction-based precoder constructions: full power, aligned
//! MRT, per-user MRT directions, and correlation-aware gain optimization on
//! top of a fixed direction set.

use crate::linalg::{C64, CMat};
use crate::model::{ChannelRealization, PrecoderSet, RngStream, Scenario, SourceModel};

use super::gradient::{projected_gradient, GradientConfig, PrecodingError};
use super::two_user::two_user_optimal;

/// Unit-norm transmit directions, one per user.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    dirs: Vec<CMat>,
}

impl DirectionSet {
    pub fn new(dirs: Vec<CMat>) -> Result<Self, PrecodingError> {
        for (k, d) in dirs.iter().enumerate() {
            if d.cols() != 1 {
                return Err(PrecodingError::InfeasibleDimensions(format!(
                    "direction {k} is not a column vector"
                )));
            }
            if (d.fro_norm() - 1.0).abs() > 1e-10 {
                return Err(PrecodingError::InfeasibleDimensions(format!(
                    "direction {k} is not unit norm"
                )));
            }
        }
        Ok(DirectionSet { dirs })
    }

    pub fn users(&self) -> usize {
        self.dirs.len()
    }

    pub fn dir(&self, k: usize) -> &CMat {
        &self.dirs[k]
    }

    /// Equivalent single-antenna channels `h~_k = H_k u_k`.
    pub fn equivalent_channel(&self, channel: &ChannelRealization) -> ChannelRealization {
        let blocks: Vec<CMat> = self
            .dirs
            .iter()
            .enumerate()
            .map(|(k, u)| channel.block(k).mul(u).expect("direction dims match channel"))
            .collect();
        ChannelRealization::new(blocks)
    }

    /// Precoders `p_k = gamma_k u_k`.
    pub fn scaled(&self, gains: &GainVector, scn: &Scenario) -> Result<PrecoderSet, PrecodingError> {
        let vectors = self
            .dirs
            .iter()
            .zip(&gains.gains)
            .map(|(u, &g)| u.scale(g))
            .collect();
        Ok(PrecoderSet::new(vectors, scn)?)
    }

    /// Full-power gains with zero phase.
    pub fn at_full_power(&self, scn: &Scenario) -> Result<PrecoderSet, PrecodingError> {
        let gains = GainVector {
            gains: scn.powers.iter().map(|t| C64::new(t.sqrt(), 0.0)).collect(),
        };
        self.scaled(&gains, scn)
    }
}

/// Complex per-user gain factors applied to a [`DirectionSet`].
#[derive(Debug, Clone)]
pub struct GainVector {
    pub gains: Vec<C64>,
}

/// Baseline without precoding: every user transmits at its power limit with
/// zero phase. Multi-antenna users fall back to their MRT direction at full
/// gain.
pub fn full_power(scn: &Scenario, channel: &ChannelRealization) -> Result<PrecoderSet, PrecodingError> {
    if scn.nt == 1 {
        let vectors = scn
            .powers
            .iter()
            .map(|t| CMat::from_real(1, 1, &[t.sqrt()]))
            .collect();
        Ok(PrecoderSet::new(vectors, scn)?)
    } else {
        mrt_directions(channel)?.at_full_power(scn)
    }
}

/// Aligned MRT: pick the receive direction `g` as the left singular vector of
/// the strongest user channel (largest singular value across users, lowest
/// index on ties), then give every user the precoder maximizing
/// `|g^H H_k p_k|` at full power: `p_k = sqrt(T_k) H_k^H g / ||H_k^H g||`.
pub fn amrt(scn: &Scenario, channel: &ChannelRealization) -> Result<PrecoderSet, PrecodingError> {
    let svds: Vec<_> = channel
        .blocks()
        .iter()
        .map(|b| b.svd())
        .collect::<Result<_, _>>()?;
    let mut strongest = 0usize;
    for k in 1..svds.len() {
        if svds[k].spectral_norm() > svds[strongest].spectral_norm() {
            strongest = k;
        }
    }
    let g = svds[strongest].u.col(0);

    let mut vectors = Vec::with_capacity(scn.users);
    for k in 0..scn.users {
        let d = channel.block(k).adjoint().mul(&g)?;
        let norm = d.fro_norm();
        let v = if norm <= 1e-12 * (1.0 + channel.block(k).fro_norm()) {
            // Receive direction orthogonal to this channel: fall back to the
            // user's own MRT direction at full power.
            svds[k].v.col(0).scale_re(scn.powers[k].sqrt())
        } else {
            d.scale_re(scn.powers[k].sqrt() / norm)
        };
        vectors.push(v);
    }
    Ok(PrecoderSet::new(vectors, scn)?)
}

/// Per-user MRT directions: the top right singular vector of each channel
/// block (receiver-SNR maximizing), phase-normalized.
pub fn mrt_directions(channel: &ChannelRealization) -> Result<DirectionSet, PrecodingError> {
    let dirs = channel
        .blocks()
        .iter()
        .map(|b| b.svd().map(|svd| svd.v.col(0)))
        .collect::<Result<Vec<_>, _>>()?;
    DirectionSet::new(dirs)
}

/// Optimize the complex gains of a fixed direction set against the source
/// correlation. Reduces to a single-antenna problem on the equivalent
/// channels `h~_k = H_k u_k`: the two-user case is solved in closed form,
/// larger ones by projected gradient from both an aligned full-power start
/// and a plain full-power start (so the result never loses to full gain).
pub fn optimize_gains(
    directions: &DirectionSet,
    scn: &Scenario,
    channel: &ChannelRealization,
    source: &SourceModel,
    config: &GradientConfig,
) -> Result<(GainVector, PrecoderSet), PrecodingError> {
    let eq_channel = directions.equivalent_channel(channel);
    let eq_scn = Scenario::new(
        scn.users,
        1,
        scn.nr,
        scn.rho,
        scn.powers.clone(),
        scn.noise_var,
    )?;

    let gains = if scn.users == 2 {
        let sol = two_user_optimal(
            &eq_channel.block(0).clone(),
            &eq_channel.block(1).clone(),
            scn.powers[0],
            scn.powers[1],
            scn.rho,
            scn.noise_var,
        )?;
        GainVector {
            gains: vec![
                C64::new(sol.p1.sqrt(), 0.0),
                C64::from_polar(sol.p2.sqrt(), -sol.phi_d),
            ],
        }
    } else {
        let starts = [amrt(&eq_scn, &eq_channel)?, full_power(&eq_scn, &eq_channel)?];
        let mut best: Option<crate::precoding::GradientOutcome> = None;
        for start in &starts {
            let out = projected_gradient(&eq_scn, &eq_channel, source, config, start)?;
            if best.as_ref().map_or(true, |b| out.xi < b.xi) {
                best = Some(out);
            }
        }
        let best = best.expect("two starts");
        GainVector {
            gains: (0..scn.users)
                .map(|k| best.precoders.vector(k)[(0, 0)])
                .collect(),
        }
    };

    let precoders = directions.scaled(&gains, scn)?;
    Ok((gains, precoders))
}

/// Gradient design on an equivalent single-antenna channel, used by tests
/// and the two-user fallbacks.
pub fn gradient_on_equivalent(
    directions: &DirectionSet,
    scn: &Scenario,
    channel: &ChannelRealization,
    source: &SourceModel,
    config: &GradientConfig,
    stream: &RngStream,
) -> Result<PrecoderSet, PrecodingError> {
    let eq_channel = directions.equivalent_channel(channel);
    let eq_scn = Scenario::new(
        scn.users,
        1,
        scn.nr,
        scn.rho,
        scn.powers.clone(),
        scn.noise_var,
    )?;
    let out = super::gradient::design_gradient_multistart(
        &eq_scn, &eq_channel, source, config, 3, stream,
    )?;
    let gains = GainVector {
        gains: (0..scn.users)
            .map(|k| out.precoders.vector(k)[(0, 0)])
            .collect(),
    };
    directions.scaled(&gains, scn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sum_mse;

    #[test]
    fn full_power_single_antenna() {
        let scn = Scenario::new(2, 1, 2, 0.0, vec![1.0, 1.0], 1.0).unwrap();
        let ch = ChannelRealization::sample(&scn, &RngStream::new(41, 0));
        let p = full_power(&scn, &ch).unwrap();
        assert!((p.vector(0)[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((p.vector(1)[(0, 0)].re - 1.0).abs() < 1e-14);

        let scn = Scenario::new(2, 1, 2, 0.0, vec![400.0, 300.0], 1.0).unwrap();
        let p = full_power(&scn, &ch).unwrap();
        assert!((p.vector(0)[(0, 0)].re - 20.0).abs() < 1e-12);
        assert!((p.vector(1)[(0, 0)].re - 300f64.sqrt()).abs() < 1e-12);
        for (k, pw) in p.powers().iter().enumerate() {
            assert!((pw - scn.powers[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn amrt_phase_matches_channel_inner_product() {
        // For two single-antenna users the AMRT phase difference equals the
        // optimal arg(h1^H h2).
        let scn = Scenario::new(2, 1, 2, 0.9, vec![4.0, 2.0], 1.0).unwrap();
        for t in 0..50 {
            let ch = ChannelRealization::sample(&scn, &RngStream::new(42, t));
            let p = amrt(&scn, &ch).unwrap();
            let phase_diff = p.vector(0)[(0, 0)].arg() - p.vector(1)[(0, 0)].arg();
            let expected = ch.block(0).adjoint().mul(ch.block(1)).unwrap()[(0, 0)].arg();
            let wrapped = (phase_diff - expected).rem_euclid(std::f64::consts::TAU);
            let dist = wrapped.min(std::f64::consts::TAU - wrapped);
            assert!(dist < 1e-9, "trial {t}: phase distance {dist}");
            for (k, pw) in p.powers().iter().enumerate() {
                assert!((pw - scn.powers[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn amrt_single_user_is_mrt_at_full_power() {
        let scn = Scenario::new(1, 2, 3, 0.0, vec![5.0], 1.0).unwrap();
        let ch = ChannelRealization::sample(&scn, &RngStream::new(43, 0));
        let a = amrt(&scn, &ch).unwrap();
        let mrt = mrt_directions(&ch).unwrap().at_full_power(&scn).unwrap();
        // Same direction up to phase and same power.
        let da = a.vector(0).scale_re(1.0 / a.vector(0).fro_norm());
        let dm = mrt.vector(0).scale_re(1.0 / mrt.vector(0).fro_norm());
        let overlap = da.adjoint().mul(&dm).unwrap()[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-9);
        assert!((a.powers()[0] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn mrt_direction_attains_top_singular_value() {
        let scn = Scenario::new(3, 2, 4, 0.0, vec![1.0; 3], 1.0).unwrap();
        let ch = ChannelRealization::sample(&scn, &RngStream::new(44, 0));
        let dirs = mrt_directions(&ch).unwrap();
        for k in 0..3 {
            let gain = ch.block(k).mul(dirs.dir(k)).unwrap().fro_norm();
            let smax = ch.block(k).svd().unwrap().spectral_norm();
            assert!((gain - smax).abs() < 1e-9);
        }
        // Nt = 1 collapses to the scalar direction 1.
        let scn1 = Scenario::new(2, 1, 2, 0.0, vec![1.0; 2], 1.0).unwrap();
        let ch1 = ChannelRealization::sample(&scn1, &RngStream::new(44, 1));
        let dirs1 = mrt_directions(&ch1).unwrap();
        for k in 0..2 {
            assert!((dirs1.dir(k)[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        // Rank-1 block: direction proportional to the right factor.
        let a = CMat::from_real(3, 1, &[1.0, 2.0, -1.0]);
        let b = CMat::from_real(2, 1, &[0.6, 0.8]);
        let rank1 = ChannelRealization::new(vec![a.mul(&b.adjoint()).unwrap()]);
        let d = mrt_directions(&rank1).unwrap();
        let overlap = d.dir(0).adjoint().mul(&b).unwrap()[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-9);
    }

    #[test]
    fn optimized_gains_never_lose_to_full_gain() {
        let cfg = GradientConfig::default();
        for t in 0..20 {
            let k = 2 + (t % 3);
            let rho = [0.5, 0.8, 0.95][t % 3];
            let scn = Scenario::new(k, 2, k + 1, rho, vec![10.0; k], 1.0).unwrap();
            let source = SourceModel::uniform(k, rho).unwrap();
            let ch = ChannelRealization::sample(&scn, &RngStream::new(45, t as u64));
            let dirs = mrt_directions(&ch).unwrap();
            let (_, opt) = optimize_gains(&dirs, &scn, &ch, &source, &cfg).unwrap();
            let full = dirs.at_full_power(&scn).unwrap();
            let xi_opt = sum_mse(ch.stacked(), opt.block_diag_matrix(), &source, 1.0).unwrap();
            let xi_full = sum_mse(ch.stacked(), full.block_diag_matrix(), &source, 1.0).unwrap();
            assert!(xi_opt <= xi_full + 1e-9, "trial {t}: {xi_opt} vs {xi_full}");
        }
    }

    #[test]
    fn uncorrelated_gains_are_full_power() {
        let scn = Scenario::new(3, 2, 4, 0.0, vec![1.0, 2.0, 3.0], 1.0).unwrap();
        let source = SourceModel::uniform(3, 0.0).unwrap();
        let ch = ChannelRealization::sample(&scn, &RngStream::new(46, 0));
        let dirs = mrt_directions(&ch).unwrap();
        let (gains, _) = optimize_gains(&dirs, &scn, &ch, &source, &GradientConfig::default()).unwrap();
        for (k, g) in gains.gains.iter().enumerate() {
            assert!(
                (g.norm() - scn.powers[k].sqrt()).abs() < 1e-5,
                "user {k}: |gamma| {}",
                g.norm()
            );
        }
    }
}
