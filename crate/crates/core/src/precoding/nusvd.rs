//! Nullspace-directed SVD: block-coordinate search for unit transmit
//! directions whose zero-forcing receiver cancels all inter-user
//! interference, `W^H H P = I`.
//!
//! Each round visits every user in turn: stack the other users' effective
//! channels, restrict user k's channel to their nullspace, and take the top
//! singular pair of the restricted channel as the new receive/transmit
//! directions. Needs at least as many receive antennas as users so every
//! nullspace is nonempty.

use crate::linalg::CMat;
use crate::model::ChannelRealization;

use super::gradient::PrecodingError;
use super::heuristics::{mrt_directions, DirectionSet};

/// Directions plus the scaled zero-forcing receiver (`receiver^H H P = I`
/// for `P = blockdiag(directions)`).
#[derive(Debug, Clone)]
pub struct NusvdOutcome {
    pub directions: DirectionSet,
    pub receiver: CMat,
    pub iterations: usize,
    pub converged: bool,
}

pub fn nusvd_directions(
    channel: &ChannelRealization,
    tol: f64,
    max_iters: usize,
) -> Result<NusvdOutcome, PrecodingError> {
    let users = channel.users();
    let nr = channel.stacked().rows();
    if nr < users {
        return Err(PrecodingError::InfeasibleDimensions(format!(
            "nullspace-directed SVD needs nr >= users, got nr = {nr}, users = {users}"
        )));
    }

    let mut dirs: Vec<CMat> = {
        let mrt = mrt_directions(channel)?;
        (0..users).map(|k| mrt.dir(k).clone()).collect()
    };

    let mut iterations = 0;
    let mut converged = users == 1;
    while iterations < max_iters && !converged {
        iterations += 1;
        let mut max_change = 0.0f64;
        for k in 0..users {
            let null = others_nullspace(channel, &dirs, k)?;
            let restricted = null.adjoint().mul(channel.block(k))?;
            let svd = restricted.svd()?;
            let new_dir = svd.v.col(0);
            let change = new_dir.sub(&dirs[k])?.fro_norm();
            max_change = max_change.max(change);
            dirs[k] = new_dir;
        }
        if max_change < tol {
            converged = true;
        }
    }

    // The zero-forcing receiver is structural: with the final directions,
    // project each user's effective channel on the others' nullspace and
    // scale for a unit diagonal. Off-diagonals vanish by construction.
    let mut receiver = CMat::zeros(nr, users);
    for k in 0..users {
        let null = others_nullspace(channel, &dirs, k)?;
        let h_eff = channel.block(k).mul(&dirs[k])?;
        let restricted = null.adjoint().mul(&h_eff)?;
        let g = null.mul(&restricted)?; // projection of h_eff onto the nullspace
        let gain = h_eff.adjoint().mul(&g)?[(0, 0)];
        if gain.norm() <= 1e-12 * (1.0 + h_eff.fro_norm().powi(2)) {
            return Err(PrecodingError::DegenerateChannel(k));
        }
        let w = g.scale(gain.inv());
        receiver.set_block(0, k, &w);
    }

    Ok(NusvdOutcome {
        directions: DirectionSet::new(dirs)?,
        receiver,
        iterations,
        converged,
    })
}

/// Orthonormal basis of the space orthogonal to all other users' effective
/// channels `H_j u_j`.
fn others_nullspace(
    channel: &ChannelRealization,
    dirs: &[CMat],
    k: usize,
) -> Result<CMat, PrecodingError> {
    let users = channel.users();
    let nr = channel.stacked().rows();
    if users == 1 {
        return Ok(CMat::identity(nr));
    }
    let rows: Vec<CMat> = (0..users)
        .filter(|&j| j != k)
        .map(|j| {
            channel
                .block(j)
                .mul(&dirs[j])
                .map(|h_eff| h_eff.adjoint())
        })
        .collect::<Result<_, _>>()?;
    let stacked = vcat(&rows);
    Ok(stacked.nullspace(1e-10)?)
}

fn vcat(rows: &[CMat]) -> CMat {
    let total: usize = rows.iter().map(|r| r.rows()).sum();
    let cols = rows[0].cols();
    let mut out = CMat::zeros(total, cols);
    let mut at = 0;
    for r in rows {
        out.set_block(at, 0, r);
        at += r.rows();
    }
    out
}
