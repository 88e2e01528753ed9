//! Figure-reproduction presets. Each preset assembles one or more tables
//! (SDR curves, power allocations, antenna sweeps, separation bounds) with a
//! fixed seed so reruns are reproducible.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bound::{sdr_bound_curve, BoundRow};
use crate::linalg::CMat;
use crate::model::{ChannelRealization, RngStream, Scenario, SourceModel};
use crate::precoding::{two_user_optimal, GradientConfig};

use super::csv::{format_g6, render_bound_csv, render_csv};
use super::{
    design, run_experiment, trial_stream_id, ExperimentConfig, PrecoderKind, ResultRow, SimError,
    SnrPoint, CONFIG_VERSION,
};

/// Seed shared by all presets.
pub const FIGURE_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    /// Two users, two receive antennas, rho in {0.8, 0.95}: SDR vs SNR for
    /// no precoding, AMRT, gradient, and the closed form, plus the bound.
    TwoByTwo,
    /// Average allocated power vs correlation for an asymmetric two-user
    /// scenario and a four-user SISO scenario, plus the fixed-channel golden
    /// points.
    PowerAllocation,
    /// Closed-form SDR vs receive antenna count at 5 and 20 dB.
    AntennaSweep,
    /// Ten users, nr in {1, 2, 5}, rho = 0.95: gradient/AMRT/SDP vs no
    /// precoding, plus bounds.
    ComNr,
    /// Ten users with two transmit antennas each, ten receive antennas,
    /// rho in {0.40, 0.99}: gradient, AMRT, optimized MRT, Nu-SVD variants.
    Mimo10,
}

impl FigurePreset {
    pub const ALL: [FigurePreset; 5] = [
        FigurePreset::TwoByTwo,
        FigurePreset::PowerAllocation,
        FigurePreset::AntennaSweep,
        FigurePreset::ComNr,
        FigurePreset::Mimo10,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigurePreset::TwoByTwo => "2x2",
            FigurePreset::PowerAllocation => "powerAllocation",
            FigurePreset::AntennaSweep => "Fig2-1xNR",
            FigurePreset::ComNr => "comNR",
            FigurePreset::Mimo10 => "10-2x10",
        }
    }
}

impl fmt::Display for FigurePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigurePreset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigurePreset::ALL
            .iter()
            .find(|p| p.name() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = FigurePreset::ALL.iter().map(|p| p.name()).collect();
                format!("unknown preset '{s}' (known: {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Reduced trial counts, minutes on a laptop.
    Desk,
    /// Trial counts matching the published experiments.
    Full,
}

impl FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            other => Err(format!("unknown scale '{other}' (use desk or full)")),
        }
    }
}

/// Average allocated power of one user under one design, at one correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub rho: f64,
    pub precoder: PrecoderKind,
    pub user: usize,
    pub mean_power: f64,
    pub trials: usize,
}

/// Closed-form SDR for one (antenna count, SNR, correlation) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaRow {
    pub nr: usize,
    pub rho: f64,
    pub snr_db: f64,
    pub sdr_analytic_db: f64,
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub enum FigureTable {
    Sdr { name: String, rows: Vec<ResultRow> },
    Power { name: String, rows: Vec<PowerRow> },
    Antenna { name: String, rows: Vec<AntennaRow> },
    Bound { name: String, rows: Vec<BoundRow> },
}

impl FigureTable {
    pub fn name(&self) -> &str {
        match self {
            FigureTable::Sdr { name, .. }
            | FigureTable::Power { name, .. }
            | FigureTable::Antenna { name, .. }
            | FigureTable::Bound { name, .. } => name,
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            FigureTable::Sdr { rows, .. } => render_csv(rows),
            FigureTable::Bound { rows, .. } => render_bound_csv(rows),
            FigureTable::Power { rows, .. } => {
                let mut out = String::from("rho,precoder,user,mean_power,trials\n");
                for r in rows {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        format_g6(r.rho),
                        r.precoder,
                        r.user,
                        format_g6(r.mean_power),
                        r.trials
                    ));
                }
                out
            }
            FigureTable::Antenna { rows, .. } => {
                let mut out = String::from("nr,rho,snr_db,sdr_analytic_db,trials\n");
                for r in rows {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        r.nr,
                        format_g6(r.rho),
                        format_g6(r.snr_db),
                        format_g6(r.sdr_analytic_db),
                        r.trials
                    ));
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub preset: FigurePreset,
    pub tables: Vec<FigureTable>,
}

fn snr_sweep() -> Vec<SnrPoint> {
    (-4..=6).map(|i| SnrPoint::Common(5.0 * i as f64)).collect()
}

fn base_config(users: usize, nt: usize, nr: usize, rho: f64, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        version: CONFIG_VERSION,
        users,
        nt,
        nr,
        rho,
        noise_var: 1.0,
        snr_grid_db: snr_sweep(),
        precoders: vec![],
        symbols: 1000,
        trials,
        master_seed: FIGURE_SEED,
        workers: 0,
        empirical: false,
        timing: false,
        gradient: GradientConfig::default(),
    }
}

pub fn reproduce_figure(preset: FigurePreset, scale: Scale) -> Result<FigureOutput, SimError> {
    let tables = match preset {
        FigurePreset::TwoByTwo => two_by_two(scale)?,
        FigurePreset::PowerAllocation => power_allocation(scale)?,
        FigurePreset::AntennaSweep => antenna_sweep(scale)?,
        FigurePreset::ComNr => com_nr(scale)?,
        FigurePreset::Mimo10 => mimo10(scale)?,
    };
    Ok(FigureOutput { preset, tables })
}

fn two_by_two(scale: Scale) -> Result<Vec<FigureTable>, SimError> {
    let trials = match scale {
        Scale::Desk => 200,
        Scale::Full => 1000,
    };
    let mut tables = Vec::new();
    for rho in [0.8, 0.95] {
        let mut cfg = base_config(2, 1, 2, rho, trials);
        cfg.precoders = vec![
            PrecoderKind::None,
            PrecoderKind::Amrt,
            PrecoderKind::Gradient,
            PrecoderKind::TwoUserClosed,
        ];
        cfg.empirical = true;
        let rows = run_experiment(&cfg)?;
        tables.push(FigureTable::Sdr {
            name: format!("sdr_rho{rho:.2}"),
            rows,
        });
        let scn = Scenario::with_common_snr_db(2, 1, 2, rho, 0.0)?;
        let grid: Vec<f64> = snr_sweep().iter().map(|p| p.label()).collect();
        let bound = sdr_bound_curve(&scn, &grid, trials, FIGURE_SEED)?;
        tables.push(FigureTable::Bound {
            name: format!("bound_rho{rho:.2}"),
            rows: bound,
        });
    }
    Ok(tables)
}

fn rho_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
    g.extend([0.95, 0.99, 1.0]);
    g
}

fn power_allocation(scale: Scale) -> Result<Vec<FigureTable>, SimError> {
    let trials = match scale {
        Scale::Desk => 200,
        Scale::Full => 1000,
    };
    let mut tables = Vec::new();

    // Scenario 1: two users, nr = 2, SNRs (30, 5) dB.
    tables.push(FigureTable::Power {
        name: "two_user_30_5".into(),
        rows: mean_allocated_power(
            &[30.0, 5.0],
            1,
            2,
            &[PrecoderKind::TwoUserClosed, PrecoderKind::Gradient],
            trials,
        )?,
    });

    // Scenario 2: four single-antenna users, nr = 1, SNRs (35, 25, 15, 5) dB.
    tables.push(FigureTable::Power {
        name: "four_user_35_25_15_5".into(),
        rows: mean_allocated_power(
            &[35.0, 25.0, 15.0, 5.0],
            1,
            1,
            &[PrecoderKind::Sdp, PrecoderKind::Gradient],
            trials,
        )?,
    });

    // Fixed-channel worked example: h1 = (1, 1)^T, h2 = (1, 0.5)^T.
    let h1 = CMat::from_real(2, 1, &[1.0, 1.0]);
    let h2 = CMat::from_real(2, 1, &[1.0, 0.5]);
    for (t1, t2) in [(700.0, 200.0), (400.0, 300.0)] {
        let mut rows = Vec::new();
        for rho in [0.95, 0.99] {
            let sol = two_user_optimal(&h1, &h2, t1, t2, rho, 1.0)
                .map_err(|e| SimError::Numerical(e.to_string()))?;
            rows.push(PowerRow {
                rho,
                precoder: PrecoderKind::TwoUserClosed,
                user: 1,
                mean_power: sol.p1,
                trials: 1,
            });
            rows.push(PowerRow {
                rho,
                precoder: PrecoderKind::TwoUserClosed,
                user: 2,
                mean_power: sol.p2,
                trials: 1,
            });
        }
        tables.push(FigureTable::Power {
            name: format!("golden_t{t1:.0}_t{t2:.0}"),
            rows,
        });
    }
    Ok(tables)
}

fn mean_allocated_power(
    snrs_db: &[f64],
    nt: usize,
    nr: usize,
    precoders: &[PrecoderKind],
    trials: usize,
) -> Result<Vec<PowerRow>, SimError> {
    let users = snrs_db.len();
    let gradient_cfg = GradientConfig::default();
    let mut rows = Vec::new();
    for rho in rho_grid() {
        let scn = Scenario::with_snrs_db(users, nt, nr, rho, snrs_db)?;
        let source = SourceModel::uniform(users, rho)?;
        for &kind in precoders {
            // Designs needing the inverse covariance sit out the rho = 1
            // endpoint (full power is optimal there anyway).
            if rho >= 1.0 && kind.needs_pd_covariance() {
                continue;
            }
            let sums: Vec<Vec<f64>> = (0..trials)
                .into_par_iter()
                .map(|l| {
                    let stream = RngStream::new(FIGURE_SEED, trial_stream_id(l));
                    let ch = ChannelRealization::sample(&scn, &stream);
                    let mut memo = None;
                    design(kind, &scn, &ch, &source, &gradient_cfg, &mut memo)
                        .map(|p| p.powers())
                })
                .collect::<Result<_, _>>()?;
            for user in 0..users {
                let mean = sums.iter().map(|p| p[user]).sum::<f64>() / trials as f64;
                rows.push(PowerRow {
                    rho,
                    precoder: kind,
                    user: user + 1,
                    mean_power: mean,
                    trials,
                });
            }
        }
    }
    Ok(rows)
}

fn antenna_sweep(scale: Scale) -> Result<Vec<FigureTable>, SimError> {
    let trials = match scale {
        Scale::Desk => 200,
        Scale::Full => 1000,
    };
    let antenna_counts = [1usize, 2, 3, 4, 6, 8, 12, 16, 24, 32];
    let mut rows = Vec::new();
    for rho in [0.0, 0.8, 0.95, 0.99] {
        for snr_db in [5.0, 20.0] {
            for &nr in &antenna_counts {
                let scn = Scenario::with_common_snr_db(2, 1, nr, rho, snr_db)?;
                let xi_sum: f64 = (0..trials)
                    .into_par_iter()
                    .map(|l| {
                        let stream = RngStream::new(FIGURE_SEED, trial_stream_id(l));
                        let ch = ChannelRealization::sample(&scn, &stream);
                        two_user_optimal(
                            ch.block(0),
                            ch.block(1),
                            scn.powers[0],
                            scn.powers[1],
                            rho,
                            1.0,
                        )
                        .map(|sol| sol.xi)
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| SimError::Numerical(e.to_string()))?
                    .iter()
                    .sum();
                let mean_xi = xi_sum / trials as f64;
                rows.push(AntennaRow {
                    nr,
                    rho,
                    snr_db,
                    sdr_analytic_db: 10.0 * (2.0 / mean_xi).log10(),
                    trials,
                });
            }
        }
    }
    Ok(vec![FigureTable::Antenna {
        name: "closed_form_vs_nr".into(),
        rows,
    }])
}

fn com_nr(scale: Scale) -> Result<Vec<FigureTable>, SimError> {
    let trials = match scale {
        Scale::Desk => 100,
        Scale::Full => 1000,
    };
    let rho = 0.95;
    let mut tables = Vec::new();
    for nr in [1usize, 2, 5] {
        let mut cfg = base_config(10, 1, nr, rho, trials);
        cfg.precoders = vec![PrecoderKind::None, PrecoderKind::Amrt, PrecoderKind::Gradient];
        if nr == 1 {
            cfg.precoders.push(PrecoderKind::Sdp);
        }
        let rows = run_experiment(&cfg)?;
        tables.push(FigureTable::Sdr {
            name: format!("sdr_nr{nr}"),
            rows,
        });
        let scn = Scenario::with_common_snr_db(10, 1, nr, rho, 0.0)?;
        let grid: Vec<f64> = snr_sweep().iter().map(|p| p.label()).collect();
        tables.push(FigureTable::Bound {
            name: format!("bound_nr{nr}"),
            rows: sdr_bound_curve(&scn, &grid, trials, FIGURE_SEED)?,
        });
    }
    Ok(tables)
}

fn mimo10(scale: Scale) -> Result<Vec<FigureTable>, SimError> {
    let trials = match scale {
        Scale::Desk => 100,
        Scale::Full => 1000,
    };
    let mut tables = Vec::new();
    for rho in [0.40, 0.99] {
        let mut cfg = base_config(10, 2, 10, rho, trials);
        cfg.precoders = vec![
            PrecoderKind::Gradient,
            PrecoderKind::Amrt,
            PrecoderKind::MrtOpt,
            PrecoderKind::Nusvd,
            PrecoderKind::NusvdOpt,
        ];
        let rows = run_experiment(&cfg)?;
        tables.push(FigureTable::Sdr {
            name: format!("sdr_rho{rho:.2}"),
            rows,
        });
        let scn = Scenario::with_common_snr_db(10, 2, 10, rho, 0.0)?;
        let grid: Vec<f64> = snr_sweep().iter().map(|p| p.label()).collect();
        tables.push(FigureTable::Bound {
            name: format!("bound_rho{rho:.2}"),
            rows: sdr_bound_curve(&scn, &grid, trials, FIGURE_SEED)?,
        });
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in FigurePreset::ALL {
            assert_eq!(FigurePreset::from_str(p.name()).unwrap(), p);
        }
        assert!(FigurePreset::from_str("bogus").is_err());
        assert!(Scale::from_str("desk").is_ok());
        assert!(Scale::from_str("granite").is_err());
    }

    #[test]
    fn golden_fixed_channel_rows() {
        // The fixed-channel table carries the worked-example allocations.
        let out = reproduce_figure(FigurePreset::PowerAllocation, Scale::Desk).unwrap();
        let golden = out
            .tables
            .iter()
            .find_map(|t| match t {
                FigureTable::Power { name, rows } if name == "golden_t700_t200" => Some(rows),
                _ => None,
            })
            .expect("golden table present");
        let p1_99 = golden
            .iter()
            .find(|r| r.rho == 0.99 && r.user == 1)
            .unwrap();
        assert!((p1_99.mean_power - 452.73).abs() < 0.01, "{}", p1_99.mean_power);
        let p1_95 = golden
            .iter()
            .find(|r| r.rho == 0.95 && r.user == 1)
            .unwrap();
        assert!((p1_95.mean_power - 700.0).abs() < 1e-9);
    }
}
