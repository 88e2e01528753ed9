//! Experiment driver: configuration, the deterministic parallel Monte Carlo
//! engine, figure presets, and CSV emission.
//!
//! Determinism contract: a given `(config, master_seed)` produces the same
//! rows regardless of the worker count. Every trial owns an RNG stream keyed
//! by its index, draws happen in a fixed order inside the trial (channel,
//! then symbols, then noise), and the reduction folds trials in index order.

mod csv;
pub mod figures;

pub use csv::{
    parse_csv, read_csv, render_bound_csv, render_csv, write_bound_csv, write_csv, CSV_HEADER,
};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::model::{
    complex_gaussian_unit, empirical_sum_mse, mmse_receiver, sum_mse, ChannelRealization,
    ModelError, PrecoderSet, RngStream, Scenario, SourceModel,
};
use crate::precoding::{
    amrt, design_gradient, full_power, mrt_directions, nusvd_directions, optimize_gains,
    two_user_optimal, GradientConfig, NusvdOutcome, PrecodingError,
};
use crate::sdp::{design_sdp, SdpError};

/// Config schema version accepted by [`load_config`].
pub const CONFIG_VERSION: u32 = 1;

/// Stream id used for trial `l`; the bound curve uses the same mapping so
/// achieved and bound curves share channel realizations under one seed.
pub fn trial_stream_id(trial: usize) -> u64 {
    trial as u64
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("malformed input at {location}: {message}")]
    Parse { location: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<ModelError> for SimError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidScenario(_) | ModelError::InvalidCovariance(_) => {
                SimError::Config(e.to_string())
            }
            other => SimError::Numerical(other.to_string()),
        }
    }
}

impl From<PrecodingError> for SimError {
    fn from(e: PrecodingError) -> Self {
        SimError::Numerical(e.to_string())
    }
}

impl From<SdpError> for SimError {
    fn from(e: SdpError) -> Self {
        SimError::Numerical(e.to_string())
    }
}

impl From<crate::bound::BoundError> for SimError {
    fn from(e: crate::bound::BoundError) -> Self {
        SimError::Numerical(e.to_string())
    }
}

/// Precoder selector names as they appear in configs and CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderKind {
    None,
    Amrt,
    Gradient,
    Sdp,
    Mrt,
    MrtOpt,
    Nusvd,
    NusvdOpt,
    TwoUserClosed,
}

impl PrecoderKind {
    pub const ALL: [PrecoderKind; 9] = [
        PrecoderKind::None,
        PrecoderKind::Amrt,
        PrecoderKind::Gradient,
        PrecoderKind::Sdp,
        PrecoderKind::Mrt,
        PrecoderKind::MrtOpt,
        PrecoderKind::Nusvd,
        PrecoderKind::NusvdOpt,
        PrecoderKind::TwoUserClosed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PrecoderKind::None => "none",
            PrecoderKind::Amrt => "amrt",
            PrecoderKind::Gradient => "gradient",
            PrecoderKind::Sdp => "sdp",
            PrecoderKind::Mrt => "mrt",
            PrecoderKind::MrtOpt => "mrt_opt",
            PrecoderKind::Nusvd => "nusvd",
            PrecoderKind::NusvdOpt => "nusvd_opt",
            PrecoderKind::TwoUserClosed => "two_user_closed",
        }
    }

    /// Needs the inverse source covariance (so `rho = 1` is out).
    fn needs_pd_covariance(&self) -> bool {
        matches!(
            self,
            PrecoderKind::Gradient | PrecoderKind::MrtOpt | PrecoderKind::NusvdOpt
        )
    }
}

impl fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrecoderKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PrecoderKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown precoder '{s}'"))
    }
}

/// One point of the SNR grid: a common per-user SNR or explicit per-user
/// values in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrPoint {
    Common(f64),
    PerUser(Vec<f64>),
}

impl SnrPoint {
    pub fn per_user(&self, users: usize) -> Vec<f64> {
        match self {
            SnrPoint::Common(v) => vec![*v; users],
            SnrPoint::PerUser(v) => v.clone(),
        }
    }

    /// Representative value used as the CSV row key (the first user's SNR).
    pub fn label(&self) -> f64 {
        match self {
            SnrPoint::Common(v) => *v,
            SnrPoint::PerUser(v) => v.first().copied().unwrap_or(f64::NAN),
        }
    }
}

fn default_noise_var() -> f64 {
    1.0
}
fn default_version() -> u32 {
    CONFIG_VERSION
}

/// Full experiment description; the JSON config file mirrors these fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub users: usize,
    pub nt: usize,
    pub nr: usize,
    pub rho: f64,
    #[serde(default = "default_noise_var")]
    pub noise_var: f64,
    pub snr_grid_db: Vec<SnrPoint>,
    pub precoders: Vec<PrecoderKind>,
    /// Symbols per block (the empirical-decode path).
    pub symbols: usize,
    /// Channel realizations per grid point.
    pub trials: usize,
    pub master_seed: u64,
    /// 0 means one worker per available core.
    #[serde(default)]
    pub workers: usize,
    /// Decode `symbols` symbols per trial and report the empirical SDR next
    /// to the analytic one.
    #[serde(default)]
    pub empirical: bool,
    /// Record wall time per row. Off by default so repeated runs are
    /// byte-identical.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub gradient: GradientConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.version != CONFIG_VERSION {
            return Err(SimError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.trials == 0 || self.symbols == 0 {
            return Err(SimError::Config(
                "trials and symbols must both be at least 1".into(),
            ));
        }
        if self.precoders.is_empty() {
            return Err(SimError::Config("no precoders selected".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(SimError::Config("empty SNR grid".into()));
        }
        Scenario::new(
            self.users,
            self.nt,
            self.nr,
            self.rho,
            vec![1.0; self.users],
            self.noise_var,
        )?;
        for point in &self.snr_grid_db {
            if let SnrPoint::PerUser(v) = point {
                if v.len() != self.users {
                    return Err(SimError::Config(format!(
                        "per-user SNR point has {} entries for {} users",
                        v.len(),
                        self.users
                    )));
                }
            }
        }
        for p in &self.precoders {
            match p {
                PrecoderKind::Sdp if self.nt != 1 || self.nr != 1 => {
                    return Err(SimError::Config(format!(
                        "precoder 'sdp' needs nt = nr = 1, scenario has nt = {}, nr = {}",
                        self.nt, self.nr
                    )));
                }
                PrecoderKind::TwoUserClosed if self.users != 2 || self.nt != 1 => {
                    return Err(SimError::Config(format!(
                        "precoder 'two_user_closed' needs two single-antenna users, \
                         scenario has users = {}, nt = {}",
                        self.users, self.nt
                    )));
                }
                PrecoderKind::Nusvd | PrecoderKind::NusvdOpt if self.nr < self.users => {
                    return Err(SimError::Config(format!(
                        "precoder '{p}' needs nr >= users, scenario has nr = {}, users = {}",
                        self.nr, self.users
                    )));
                }
                _ => {}
            }
            if p.needs_pd_covariance() && self.rho >= 1.0 {
                return Err(SimError::Config(format!(
                    "precoder '{p}' needs an invertible source covariance (rho < 1)"
                )));
            }
        }
        Ok(())
    }
}

/// One aggregated row of an experiment: a (grid point, precoder) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub snr_db: f64,
    pub precoder: PrecoderKind,
    /// Empirical SDR when decoding is on, otherwise equal to the analytic
    /// value.
    pub sdr_db: f64,
    /// SDR from the analytic sum-MSE averaged over trials.
    pub sdr_analytic_db: f64,
    /// Delta-method standard error of `sdr_db` in dB.
    pub stderr_db: f64,
    pub trials: usize,
    pub elapsed_ms: u64,
}

struct TrialOut {
    xi_analytic: f64,
    xi_empirical: Option<f64>,
}

/// Run the full SNR-grid experiment described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, SimError> {
    cfg.validate()?;
    let source = SourceModel::uniform(cfg.users, cfg.rho)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| SimError::Config(format!("worker pool: {e}")))?;

    let mut rows = Vec::with_capacity(cfg.snr_grid_db.len() * cfg.precoders.len());
    for point in &cfg.snr_grid_db {
        let snrs = point.per_user(cfg.users);
        let scn = Scenario::with_snrs_db(cfg.users, cfg.nt, cfg.nr, cfg.rho, &snrs)?;
        let started = Instant::now();
        let trials: Vec<Vec<TrialOut>> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|l| run_trial(cfg, &scn, &source, l))
                .collect::<Result<_, _>>()
        })?;
        let elapsed_ms = if cfg.timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        };

        for (pi, &kind) in cfg.precoders.iter().enumerate() {
            let analytic: Vec<f64> = trials.iter().map(|t| t[pi].xi_analytic).collect();
            let reported: Vec<f64> = trials
                .iter()
                .map(|t| t[pi].xi_empirical.unwrap_or(t[pi].xi_analytic))
                .collect();
            let mean_a = mean(&analytic);
            let mean_r = mean(&reported);
            let k = cfg.users as f64;
            let stderr_db = if cfg.trials > 1 {
                let var = reported
                    .iter()
                    .map(|x| (x - mean_r) * (x - mean_r))
                    .sum::<f64>()
                    / (cfg.trials as f64 - 1.0);
                let se = (var / cfg.trials as f64).sqrt();
                10.0 / std::f64::consts::LN_10 * se / mean_r
            } else {
                0.0
            };
            rows.push(ResultRow {
                snr_db: point.label(),
                precoder: kind,
                sdr_db: 10.0 * (k / mean_r).log10(),
                sdr_analytic_db: 10.0 * (k / mean_a).log10(),
                stderr_db,
                trials: cfg.trials,
                elapsed_ms,
            });
        }
    }
    Ok(rows)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn run_trial(
    cfg: &ExperimentConfig,
    scn: &Scenario,
    source: &SourceModel,
    trial: usize,
) -> Result<Vec<TrialOut>, SimError> {
    let stream = RngStream::new(cfg.master_seed, trial_stream_id(trial));
    let mut rng = stream.rng();
    let channel = ChannelRealization::sample_with(scn, &mut rng);
    let empirical_draws = if cfg.empirical {
        let symbols = source.sample_with(cfg.symbols, &mut rng);
        let noise = CMat::from_fn(scn.nr, cfg.symbols, |_, _| {
            complex_gaussian_unit(&mut rng) * scn.noise_var.sqrt()
        });
        Some((symbols, noise))
    } else {
        None
    };

    // Nullspace directions are shared between the plain and gain-optimized
    // variants when both are requested.
    let mut nusvd_memo: Option<NusvdOutcome> = None;
    let mut outs = Vec::with_capacity(cfg.precoders.len());
    for &kind in &cfg.precoders {
        let precoders = design(kind, scn, &channel, source, &cfg.gradient, &mut nusvd_memo)?;
        let p = precoders.block_diag_matrix();
        let xi_analytic = sum_mse(channel.stacked(), p, source, scn.noise_var)?;
        let xi_empirical = match &empirical_draws {
            Some((symbols, noise)) => {
                let w = mmse_receiver(channel.stacked(), p, source, scn.noise_var)?;
                let y = channel
                    .stacked()
                    .mul(p)
                    .map_err(ModelError::from)?
                    .mul(symbols)
                    .map_err(ModelError::from)?
                    .add(noise)
                    .map_err(ModelError::from)?;
                let estimate = w.adjoint().mul(&y).map_err(ModelError::from)?;
                Some(empirical_sum_mse(symbols, &estimate)?)
            }
            None => None,
        };
        outs.push(TrialOut {
            xi_analytic,
            xi_empirical,
        });
    }
    Ok(outs)
}

/// Design a precoder of the requested kind for one realization.
pub fn design(
    kind: PrecoderKind,
    scn: &Scenario,
    channel: &ChannelRealization,
    source: &SourceModel,
    gradient_cfg: &GradientConfig,
    nusvd_memo: &mut Option<NusvdOutcome>,
) -> Result<PrecoderSet, SimError> {
    let nusvd = |memo: &mut Option<NusvdOutcome>| -> Result<NusvdOutcome, SimError> {
        if memo.is_none() {
            *memo = Some(nusvd_directions(channel, 1e-8, 200)?);
        }
        Ok(memo.clone().expect("just set"))
    };
    Ok(match kind {
        PrecoderKind::None => full_power(scn, channel)?,
        PrecoderKind::Amrt => amrt(scn, channel)?,
        PrecoderKind::Gradient => design_gradient(scn, channel, source, gradient_cfg)?.precoders,
        PrecoderKind::Sdp => design_sdp(scn, channel, source)?.precoders,
        PrecoderKind::Mrt => mrt_directions(channel)?.at_full_power(scn)?,
        PrecoderKind::MrtOpt => {
            let dirs = mrt_directions(channel)?;
            optimize_gains(&dirs, scn, channel, source, gradient_cfg)?.1
        }
        PrecoderKind::Nusvd => nusvd(nusvd_memo)?.directions.at_full_power(scn)?,
        PrecoderKind::NusvdOpt => {
            let out = nusvd(nusvd_memo)?;
            optimize_gains(&out.directions, scn, channel, source, gradient_cfg)?.1
        }
        PrecoderKind::TwoUserClosed => {
            let sol = two_user_optimal(
                channel.block(0),
                channel.block(1),
                scn.powers[0],
                scn.powers[1],
                scn.rho,
                scn.noise_var,
            )?;
            sol.precoders(scn)?
        }
    })
}

/// Parse a JSON config file with line/column diagnostics.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, SimError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        SimError::Parse { location, message } => SimError::Parse {
            location: format!("{}:{location}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, SimError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| SimError::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            version: CONFIG_VERSION,
            users: 2,
            nt: 1,
            nr: 2,
            rho: 0.9,
            noise_var: 1.0,
            snr_grid_db: vec![SnrPoint::Common(0.0), SnrPoint::Common(10.0)],
            precoders: vec![
                PrecoderKind::None,
                PrecoderKind::Amrt,
                PrecoderKind::TwoUserClosed,
            ],
            symbols: 200,
            trials: 16,
            master_seed: 7,
            workers: 2,
            empirical: true,
            timing: false,
            gradient: GradientConfig::default(),
        }
    }

    #[test]
    fn engine_is_deterministic_across_worker_counts() {
        let mut cfg = tiny_config();
        cfg.workers = 1;
        let rows1 = run_experiment(&cfg).unwrap();
        cfg.workers = 4;
        let rows4 = run_experiment(&cfg).unwrap();
        assert_eq!(rows1, rows4);
        let csv1 = render_csv(&rows1);
        let csv4 = render_csv(&rows4);
        assert_eq!(csv1, csv4);
    }

    #[test]
    fn empirical_tracks_analytic() {
        let mut cfg = tiny_config();
        cfg.trials = 32;
        cfg.symbols = 1000;
        let rows = run_experiment(&cfg).unwrap();
        for row in &rows {
            assert!(
                (row.sdr_db - row.sdr_analytic_db).abs() <= 3.0 * row.stderr_db.max(0.05),
                "row {row:?}"
            );
        }
    }

    #[test]
    fn incompatible_precoders_are_rejected_before_work() {
        let mut cfg = tiny_config();
        cfg.precoders = vec![PrecoderKind::Sdp];
        assert!(matches!(run_experiment(&cfg), Err(SimError::Config(_))));

        let mut cfg = tiny_config();
        cfg.users = 3;
        cfg.precoders = vec![PrecoderKind::TwoUserClosed];
        assert!(matches!(run_experiment(&cfg), Err(SimError::Config(_))));

        let mut cfg = tiny_config();
        cfg.nr = 1;
        cfg.precoders = vec![PrecoderKind::Nusvd];
        assert!(matches!(run_experiment(&cfg), Err(SimError::Config(_))));

        let mut cfg = tiny_config();
        cfg.rho = 1.0;
        cfg.precoders = vec![PrecoderKind::Gradient];
        assert!(matches!(run_experiment(&cfg), Err(SimError::Config(_))));
    }

    #[test]
    fn config_json_round_trip_and_errors() {
        let cfg = tiny_config();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let parsed = parse_config(&text).unwrap();
        assert_eq!(cfg, parsed);

        // A missing required field names itself in the error.
        let bad = r#"{"users": 2, "nt": 1, "nr": 2, "rho": 0.9}"#;
        let err = parse_config(bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("snr_grid_db") || msg.contains("missing field"), "{msg}");
    }
}
