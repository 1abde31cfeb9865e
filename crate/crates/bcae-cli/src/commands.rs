//! Implementations of the CLI subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bcae::analysis::{
    self, constellation_to_csv, detect_gray_user2, estimate_ser, extract_constellation,
    power_decomposition, power_inversion_sweep, report::{AnalysisReport, ConfigEcho},
    user1_label_separable, SweepConfig, SweepTable,
};
use bcae::autoencoder::{train, ArchSpec, TrainConfig, TrainedModel};
use bcae::channel::ChannelConfig;
use bcae::checkpoint::{self, write_atomic};
use bcae::error::{Error, Result};
use bcae::repro::{self, Figure};

/// Fully resolved experiment settings shared by train and sweep.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub k1: u32,
    pub k2: u32,
    pub snr1_db: f64,
    pub snr2_db: f64,
    pub power: f64,
    pub arch_preset: ArchPreset,
    pub train: TrainConfig,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ArchPreset {
    Table1,
    Table2,
}

impl std::str::FromStr for ArchPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(ArchPreset::Table1),
            "table2" => Ok(ArchPreset::Table2),
            other => Err(Error::Config(format!(
                "unknown arch preset `{other}` (expected table1 or table2)"
            ))),
        }
    }
}

impl Experiment {
    pub fn arch(&self) -> Result<ArchSpec> {
        match self.arch_preset {
            ArchPreset::Table1 => ArchSpec::table1(self.k1, self.k2),
            ArchPreset::Table2 => ArchSpec::table2(self.k1, self.k2),
        }
    }

    pub fn channel(&self) -> Result<ChannelConfig> {
        ChannelConfig::new(self.snr1_db, self.snr2_db, self.power)
    }
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn history_csv(model: &TrainedModel) -> String {
    let mut out = String::from("step,loss\n");
    for sample in &model.history {
        writeln!(out, "{},{}", sample.step, sample.loss).unwrap();
    }
    out
}

/// `train`: fit one model, write the checkpoint and loss history.
pub fn cmd_train(exp: &Experiment) -> Result<()> {
    let arch = exp.arch()?;
    let channel = exp.channel()?;
    ensure_out_dir(&exp.out_dir)?;

    let model = train(&arch, &channel, &exp.train)?;
    let ckpt_path = exp.out_dir.join("model.ckpt");
    let history_path = exp.out_dir.join("history.csv");
    checkpoint::save_model(&model, &ckpt_path)?;
    write_atomic(&history_path, &history_csv(&model))?;

    let final_loss = model.history.last().map(|s| s.loss).unwrap_or(f64::NAN);
    println!("final loss: {final_loss}");
    println!("checkpoint: {}", ckpt_path.display());
    println!("history: {}", history_path.display());
    Ok(())
}

/// Plot-ready dump: one row per point, sorted by position, with binary
/// labels for both users.
fn plot_csv(c: &analysis::Constellation, k1: u32, k2: u32) -> String {
    let mut rows: Vec<(f64, usize, usize)> = c.iter().map(|(a, b, x)| (x, a, b)).collect();
    rows.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out = String::from("x,s1,s2,s1_bits,s2_bits\n");
    for (x, s1, s2) in rows {
        writeln!(
            out,
            "{},{s1},{s2},{:0>width1$b},{:0>width2$b}",
            checkpoint::fmt_f64(x),
            s1,
            s2,
            width1 = k1 as usize,
            width2 = k2 as usize
        )
        .unwrap();
    }
    out
}

/// `analyze`: load a checkpoint, emit the JSON report, the constellation
/// CSV, and optionally plot data.
pub fn cmd_analyze(
    model_path: &Path,
    out_dir: &Path,
    trials: usize,
    ser_seed: u64,
    plot_data: bool,
) -> Result<()> {
    let model = checkpoint::load_model(model_path)?;
    ensure_out_dir(out_dir)?;

    let constellation = extract_constellation(&model)?;
    let split = power_decomposition(&constellation);
    let ser = estimate_ser(&model, &model.channel, trials, ser_seed)?;
    let report = AnalysisReport {
        power_split: (&split).into(),
        gray_user2: detect_gray_user2(&constellation),
        user1_separable: user1_label_separable(&constellation),
        ser: (&ser).into(),
        config: ConfigEcho::from(&model),
    };

    let report_path = out_dir.join("report.json");
    let csv_path = out_dir.join("constellation.csv");
    write_atomic(&report_path, &(report.to_json() + "\n"))?;
    write_atomic(&csv_path, &constellation_to_csv(&constellation))?;
    println!("report: {}", report_path.display());
    println!("constellation: {}", csv_path.display());
    if plot_data {
        let plot_path = out_dir.join("plot.csv");
        write_atomic(&plot_path, &plot_csv(&constellation, model.arch.k1, model.arch.k2))?;
        println!("plot data: {}", plot_path.display());
    }
    println!(
        "ratio_db: {}  gray_user2: {}  user1_separable: {}  ser1: {}  ser2: {}",
        split.ratio_db, report.gray_user2, report.user1_separable, ser.ser1, ser.ser2
    );
    Ok(())
}

/// `ser`: Monte-Carlo error rates for a checkpoint, optionally at a channel
/// other than the one it was trained for.
pub fn cmd_ser(
    model_path: &Path,
    snr_override: Option<(f64, f64)>,
    trials: usize,
    seed: u64,
) -> Result<()> {
    let model = checkpoint::load_model(model_path)?;
    let channel = match snr_override {
        Some((snr1_db, snr2_db)) => ChannelConfig::new(snr1_db, snr2_db, model.channel.power)?,
        None => model.channel.clone(),
    };
    let est = estimate_ser(&model, &channel, trials, seed)?;
    println!(
        "snr1_db {} snr2_db {} trials {}",
        channel.snr1_db, channel.snr2_db, est.trials
    );
    println!("ser1 {} half_width_95 {}", est.ser1, est.half_width_95[0]);
    println!("ser2 {} half_width_95 {}", est.ser2, est.half_width_95[1]);
    Ok(())
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("snr2_db,median_user1_fraction,median_ratio_db,seeds,failures,status\n");
    for p in &table.points {
        let seeds = p
            .seeds
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        let status = if p.fractions.is_empty() { "failed" } else { "ok" };
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.snr2_db,
            p.median_fraction.map_or(String::from("nan"), |v| v.to_string()),
            p.median_ratio_db.map_or(String::from("nan"), |v| v.to_string()),
            seeds,
            p.failures.len(),
            status
        )
        .unwrap();
    }
    out
}

/// `sweep`: power-inversion sweep over user-2 SNRs.
pub fn cmd_sweep(
    exp: &Experiment,
    snr2_from: f64,
    snr2_to: f64,
    snr2_step: f64,
    repeats: usize,
) -> Result<()> {
    if !(snr2_step > 0.0) || snr2_to < snr2_from {
        return Err(Error::Config(
            "sweep range needs snr2_from <= snr2_to and snr2_step > 0".into(),
        ));
    }
    let mut snr2_list = Vec::new();
    let mut v = snr2_from;
    while v <= snr2_to + 1e-9 {
        snr2_list.push(v);
        v += snr2_step;
    }
    let cfg = SweepConfig {
        arch: exp.arch()?,
        snr1_db: exp.snr1_db,
        power: exp.power,
        snr2_list_db: snr2_list,
        repeats,
        base_seed: exp.train.seed,
        train: exp.train.clone(),
    };
    let table = power_inversion_sweep(&cfg)?;
    ensure_out_dir(&exp.out_dir)?;
    let path = exp.out_dir.join("sweep.csv");
    write_atomic(&path, &sweep_csv(&table))?;
    println!("sweep table: {}", path.display());
    for p in &table.points {
        println!(
            "snr2_db {}: median fraction {:?} median ratio_db {:?} ({} failures)",
            p.snr2_db,
            p.median_fraction,
            p.median_ratio_db,
            p.failures.len()
        );
    }

    let ok = table.succeeded_points();
    let total = table.points.len();
    if (ok as f64) < 0.8 * total as f64 {
        return Err(Error::Training {
            step: 0,
            reason: format!("only {ok}/{total} sweep points succeeded"),
        });
    }
    Ok(())
}

/// `reproduce`: run a pinned figure preset, write its artifacts, and print
/// one verdict line per claim.
pub fn cmd_reproduce(figure: Figure, out_dir: &Path, seed: Option<u64>) -> Result<()> {
    let report = repro::run_figure(figure, seed)?;
    let fig_dir = out_dir.join(figure.to_string());
    ensure_out_dir(&fig_dir)?;

    for run in &report.runs {
        checkpoint::save_model(&run.model, &fig_dir.join(format!("{}.ckpt", run.label)))?;
        write_atomic(
            &fig_dir.join(format!("{}.constellation.csv", run.label)),
            &constellation_to_csv(&run.constellation),
        )?;
    }
    if let Some(table) = &report.sweep {
        write_atomic(&fig_dir.join("sweep.csv"), &sweep_csv(table))?;
    }

    let mut verdict_text = String::new();
    for v in &report.verdicts {
        println!("{}", v.line());
        verdict_text.push_str(&v.line());
        verdict_text.push('\n');
    }
    write_atomic(&fig_dir.join("verdicts.txt"), &verdict_text)?;
    println!("artifacts: {}", fig_dir.display());
    Ok(())
}
