//! Pinned experiment presets that reproduce the reference constellations,
//! with machine-checkable verdicts for each claimed behavior.
//!
//! Training is stochastic, so each preset fixes its seeds and budget;
//! structural verdicts (Gray labeling, separability) are invariant to the
//! sign/permutation symmetries that vary from run to run.

use std::fmt;
use std::str::FromStr;

use crate::analysis::{
    detect_gray_user2, estimate_ser, extract_constellation, power_decomposition,
    power_inversion_sweep, sweep::median, Constellation, PowerSplit, SweepConfig, SweepTable,
    DISTINCT_POINT_TOL,
};
use crate::autoencoder::{train, ArchSpec, TrainConfig, TrainedModel};
use crate::channel::ChannelConfig;
use crate::error::{Error, Result};

/// The reproducible experiment presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// 5/30 dB, 1+1 bits: unequal power, sign-coded user 1.
    Fig3,
    /// 5/5 dB, 1+1 bits: near-equal spacing, ~5.6 dB power ratio.
    Fig4,
    /// 10 dB user 1, user 2 swept 10..30 dB: power inversion.
    Fig5,
    /// -10/30 dB: zero allocation to the hopeless user.
    Fig6,
    /// 20/40 dB, 1+2 bits, higher-order preset: Gray-coded superposition.
    Fig7,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            "fig7" => Ok(Figure::Fig7),
            other => Err(Error::Input(format!(
                "unknown figure id `{other}` (expected fig3..fig7)"
            ))),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
        };
        f.write_str(s)
    }
}

pub const FIG3_SEED: u64 = 1;
pub const FIG4_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const FIG5_BASE_SEED: u64 = 20;
pub const FIG5_SNR2_LIST: [f64; 5] = [10.0, 15.0, 20.0, 25.0, 30.0];
pub const FIG5_REPEATS: usize = 3;
pub const FIG6_SEED: u64 = 5;
/// Short budget: with longer training the optimizer starts exploiting the
/// weak user's residual capacity and moves power back to user 1.
pub const FIG6_STEPS: usize = 1500;
pub const FIG7_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const FIG7_STEPS: usize = 20_000;
/// Monte-Carlo budget and seed for per-figure SER measurements.
pub const SER_TRIALS: usize = 100_000;
pub const SER_SEED: u64 = 0x5E12;

/// Acceptance band for the learned power ratio at equal SNRs, bracketing the
/// observed ~5.6 dB (equal spacing would be 6.02 dB).
pub const EQUAL_SNR_RATIO_BAND: (f64, f64) = (5.0, 6.5);

/// One pass/fail check of a claimed behavior.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub claim: String,
    pub measured: String,
    pub pass: bool,
}

impl Verdict {
    fn new(claim: impl Into<String>, measured: impl Into<String>, pass: bool) -> Self {
        Verdict {
            claim: claim.into(),
            measured: measured.into(),
            pass,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}: measured {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.claim,
            self.measured
        )
    }
}

/// One trained run with its analysis.
#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub label: String,
    pub model: TrainedModel,
    pub constellation: Constellation,
    pub split: PowerSplit,
    pub gray_user2: bool,
    pub user1_separable: bool,
}

fn run_config(
    label: String,
    arch: &ArchSpec,
    channel: &ChannelConfig,
    cfg: &TrainConfig,
) -> Result<RunArtifact> {
    let model = train(arch, channel, cfg)?;
    let constellation = extract_constellation(&model)?;
    let split = power_decomposition(&constellation);
    let gray_user2 = detect_gray_user2(&constellation);
    let user1_separable = crate::analysis::user1_label_separable(&constellation);
    Ok(RunArtifact {
        label,
        model,
        constellation,
        split,
        gray_user2,
        user1_separable,
    })
}

/// Everything a reproduced figure produced.
#[derive(Debug, Clone)]
pub struct FigureReport {
    pub figure: Figure,
    pub runs: Vec<RunArtifact>,
    pub sweep: Option<SweepTable>,
    pub verdicts: Vec<Verdict>,
}

impl FigureReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Seed set for a five-run preset: the pinned seeds, or five consecutive
/// seeds from an override base.
fn five_seeds(pinned: [u64; 5], base: Option<u64>) -> [u64; 5] {
    match base {
        Some(s) => [s, s + 1, s + 2, s + 3, s + 4],
        None => pinned,
    }
}

/// Five equal-SNR runs (5/5 dB) plus their aggregate verdicts.
pub fn run_fig4(seed_base: Option<u64>) -> Result<FigureReport> {
    let arch = ArchSpec::table1(1, 1)?;
    let channel = ChannelConfig::new(5.0, 5.0, 1.0)?;
    let mut runs = Vec::new();
    for &seed in &five_seeds(FIG4_SEEDS, seed_base) {
        let cfg = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        runs.push(run_config(format!("fig4-seed{seed}"), &arch, &channel, &cfg)?);
    }

    let ratios: Vec<f64> = runs.iter().map(|r| r.split.ratio_db.as_f64()).collect();
    let med = median(&ratios).unwrap();
    let gray_count = runs.iter().filter(|r| r.gray_user2).count();
    let sep_count = runs.iter().filter(|r| r.user1_separable).count();
    let (lo, hi) = EQUAL_SNR_RATIO_BAND;

    let verdicts = vec![
        Verdict::new(
            format!("median power ratio in [{lo}, {hi}] dB"),
            format!("{med:.3} dB over {ratios:.3?}"),
            (lo..=hi).contains(&med),
        ),
        Verdict::new(
            "Gray labeling of user 2 in >= 4/5 runs",
            format!("{gray_count}/5"),
            gray_count >= 4,
        ),
        Verdict::new(
            "user-1 labels threshold-separable in >= 4/5 runs",
            format!("{sep_count}/5"),
            sep_count >= 4,
        ),
    ];
    Ok(FigureReport {
        figure: Figure::Fig4,
        runs,
        sweep: None,
        verdicts,
    })
}

/// Median power ratio of the equal-SNR preset, the baseline that the 5/30 dB
/// run must exceed.
pub fn fig4_median_ratio_db(report: &FigureReport) -> f64 {
    let ratios: Vec<f64> = report.runs.iter().map(|r| r.split.ratio_db.as_f64()).collect();
    median(&ratios).unwrap()
}

/// One 5/30 dB run judged against the equal-SNR median ratio.
pub fn run_fig3(equal_snr_median_ratio_db: f64, seed: Option<u64>) -> Result<FigureReport> {
    let arch = ArchSpec::table1(1, 1)?;
    let channel = ChannelConfig::new(5.0, 30.0, 1.0)?;
    let seed = seed.unwrap_or(FIG3_SEED);
    let cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let run = run_config(format!("fig3-seed{seed}"), &arch, &channel, &cfg)?;

    let ratio = run.split.ratio_db.as_f64();
    let distinct = run.constellation.distinct_points(DISTINCT_POINT_TOL);
    let verdicts = vec![
        Verdict::new(
            "more power to the weak user than at equal SNRs",
            format!("{ratio:.3} dB vs equal-SNR median {equal_snr_median_ratio_db:.3} dB"),
            ratio > equal_snr_median_ratio_db,
        ),
        Verdict::new("Gray labeling of user 2", format!("{}", run.gray_user2), run.gray_user2),
        Verdict::new(
            "constellation has 4 distinct points",
            format!("{distinct}"),
            distinct == 4,
        ),
        Verdict::new(
            "user-1 labels threshold-separable",
            format!("{}", run.user1_separable),
            run.user1_separable,
        ),
    ];
    Ok(FigureReport {
        figure: Figure::Fig3,
        runs: vec![run],
        sweep: None,
        verdicts,
    })
}

/// The power-inversion sweep preset and its verdicts.
pub fn fig5_sweep_config(base_seed: Option<u64>) -> SweepConfig {
    SweepConfig {
        arch: ArchSpec::table1(1, 1).expect("valid preset"),
        snr1_db: 10.0,
        power: 1.0,
        snr2_list_db: FIG5_SNR2_LIST.to_vec(),
        repeats: FIG5_REPEATS,
        base_seed: base_seed.unwrap_or(FIG5_BASE_SEED),
        train: TrainConfig::default(),
    }
}

pub fn run_fig5(base_seed: Option<u64>) -> Result<FigureReport> {
    let table = power_inversion_sweep(&fig5_sweep_config(base_seed))?;

    let medians: Vec<f64> = table
        .points
        .iter()
        .map(|p| p.median_fraction.unwrap_or(f64::NAN))
        .collect();
    let non_decreasing = medians.windows(2).all(|w| w[1] >= w[0]);
    let first_ratio = table.points[0].median_ratio_db.unwrap_or(f64::NAN);
    let (lo, hi) = EQUAL_SNR_RATIO_BAND;

    let verdicts = vec![
        Verdict::new(
            "median user-1 power fraction non-decreasing in snr2",
            format!("{medians:.4?}"),
            non_decreasing,
        ),
        Verdict::new(
            format!("equal-SNR sweep point has ratio in [{lo}, {hi}] dB"),
            format!("{first_ratio:.3} dB"),
            (lo..=hi).contains(&first_ratio),
        ),
    ];
    Ok(FigureReport {
        figure: Figure::Fig5,
        runs: Vec::new(),
        sweep: Some(table),
        verdicts,
    })
}

/// The zero-allocation run (-10/30 dB) with its SER check.
pub fn run_fig6(seed: Option<u64>) -> Result<FigureReport> {
    let arch = ArchSpec::table1(1, 1)?;
    let channel = ChannelConfig::new(-10.0, 30.0, 1.0)?;
    let seed = seed.unwrap_or(FIG6_SEED);
    let cfg = TrainConfig {
        seed,
        steps: FIG6_STEPS,
        ..TrainConfig::default()
    };
    let run = run_config(format!("fig6-seed{seed}"), &arch, &channel, &cfg)?;
    let ser = estimate_ser(&run.model, &channel, SER_TRIALS, SER_SEED)?;

    let fraction = run.split.fraction_user1();
    let verdicts = vec![
        Verdict::new(
            "user-1 power fraction < 0.05",
            format!("{fraction:.5}"),
            fraction < 0.05,
        ),
        Verdict::new(
            "user-1 symbol error rate in [0.45, 0.55] (pure guessing)",
            format!("{:.4} +- {:.4}", ser.ser1, ser.half_width_95[0]),
            (0.45..=0.55).contains(&ser.ser1),
        ),
    ];
    Ok(FigureReport {
        figure: Figure::Fig6,
        runs: vec![run],
        sweep: None,
        verdicts,
    })
}

/// Five higher-order runs (1+2 bits at 20/40 dB); structure must emerge in
/// at least 3 of 5.
pub fn run_fig7(seed_base: Option<u64>) -> Result<FigureReport> {
    let arch = ArchSpec::table2(1, 2)?;
    let channel = ChannelConfig::new(20.0, 40.0, 1.0)?;
    let mut runs = Vec::new();
    for &seed in &five_seeds(FIG7_SEEDS, seed_base) {
        let cfg = TrainConfig {
            seed,
            steps: FIG7_STEPS,
            ..TrainConfig::default()
        };
        runs.push(run_config(format!("fig7-seed{seed}"), &arch, &channel, &cfg)?);
    }

    let structured = runs
        .iter()
        .filter(|r| {
            r.constellation.distinct_points(DISTINCT_POINT_TOL) == 8
                && r.gray_user2
                && r.user1_separable
        })
        .count();
    let detail: Vec<String> = runs
        .iter()
        .map(|r| {
            format!(
                "{}: distinct={} gray={} sep={}",
                r.label,
                r.constellation.distinct_points(DISTINCT_POINT_TOL),
                r.gray_user2,
                r.user1_separable
            )
        })
        .collect();

    let verdicts = vec![Verdict::new(
        "8 distinct points, separable user 1, Gray user 2 in >= 3/5 runs",
        format!("{structured}/5 ({})", detail.join("; ")),
        structured >= 3,
    )];
    Ok(FigureReport {
        figure: Figure::Fig7,
        runs,
        sweep: None,
        verdicts,
    })
}

/// Runs one figure preset end to end. `fig3` internally reruns the equal-SNR
/// preset to obtain its comparison baseline. A seed override replaces the
/// pinned seed (five-run presets use it as the base of five consecutive
/// seeds).
pub fn run_figure(figure: Figure, seed: Option<u64>) -> Result<FigureReport> {
    match figure {
        Figure::Fig3 => {
            let fig4 = run_fig4(None)?;
            run_fig3(fig4_median_ratio_db(&fig4), seed)
        }
        Figure::Fig4 => run_fig4(seed),
        Figure::Fig5 => run_fig5(seed),
        Figure::Fig6 => run_fig6(seed),
        Figure::Fig7 => run_fig7(seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids_parse() {
        assert_eq!("fig3".parse::<Figure>().unwrap(), Figure::Fig3);
        assert_eq!("fig7".parse::<Figure>().unwrap(), Figure::Fig7);
        assert!("fig8".parse::<Figure>().is_err());
        assert_eq!(Figure::Fig5.to_string(), "fig5");
    }

    #[test]
    fn verdict_lines_render() {
        let v = Verdict::new("claim", "1.0", true);
        assert_eq!(v.line(), "[PASS] claim: measured 1.0");
        let v = Verdict::new("claim", "2.0", false);
        assert!(v.line().starts_with("[FAIL]"));
    }
}
