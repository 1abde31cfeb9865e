//! Classical superposition-coding baseline and its analytic error oracle.
//!
//! The baseline transmits `sqrt(p1) * pam(s1) + sqrt(p2) * pam(s2)` with
//! unit-power Gray-labeled PAM alphabets and `p1 + p2 = P`. The oracle
//! computes exact per-user symbol-error probabilities for minimum-distance
//! decoding by enumerating the decision intervals of the composite
//! constellation and summing Gaussian tail probabilities; the Monte-Carlo
//! twin simulates the same decoder and must agree within binomial error.

use rand::Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::analysis::ser::{gaussian_sample, SerEstimate, SER_CHUNK};
use crate::analysis::Constellation;
use crate::autoencoder::ArchSpec;
use crate::channel::ChannelConfig;
use crate::error::{Error, Result};
use crate::streams;

/// Reflected binary code of `i`.
pub fn gray_code(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Inverse of [`gray_code`].
pub fn gray_decode(g: usize) -> usize {
    let mut i = g;
    let mut shift = 1;
    while (g >> shift) != 0 {
        i ^= g >> shift;
        shift += 1;
    }
    i
}

/// Ascending unit-average-power M-PAM levels: `(2i - M + 1) * sqrt(3/(M^2-1))`.
/// For `m = 1` the single level is 0.
pub fn pam_levels(m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![0.0];
    }
    let d = (3.0 / ((m * m - 1) as f64)).sqrt();
    (0..m).map(|i| (2.0 * i as f64 - (m as f64 - 1.0)) * d).collect()
}

/// Amplitude of message `s` under Gray labeling: position `gray_decode(s)`
/// on the level ladder carries label `s`.
pub fn pam_symbol(s: usize, m: usize) -> f64 {
    pam_levels(m)[gray_decode(s)]
}

/// Exact classical superposition constellation for the given user-1 power
/// fraction of the total budget `power`.
pub fn baseline_superposition(
    arch: &ArchSpec,
    power_fraction_user1: f64,
    power: f64,
) -> Result<Constellation> {
    if !(0.0..=1.0).contains(&power_fraction_user1) {
        return Err(Error::Input(format!(
            "power fraction must be in [0, 1], got {power_fraction_user1}"
        )));
    }
    let m1 = arch.m1();
    let m2 = arch.m2();
    let a1 = (power_fraction_user1 * power).sqrt();
    let a2 = ((1.0 - power_fraction_user1) * power).sqrt();
    let mut points = Vec::with_capacity(m1 * m2);
    for s1 in 0..m1 {
        let coarse = a1 * pam_symbol(s1, m1);
        for s2 in 0..m2 {
            points.push(coarse + a2 * pam_symbol(s2, m2));
        }
    }
    Constellation::new(m1, m2, points)
}

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_func(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Decision intervals of the constellation under nearest-point decoding with
/// ties broken toward the lowest message index. Duplicate positions share one
/// interval owned by the lowest index among them.
struct DecisionRegions {
    /// `(lower, upper, winner_joint_index)` with infinite end caps.
    regions: Vec<(f64, f64, usize)>,
    /// Region index owning each point's own position.
    home_region: Vec<usize>,
}

fn decision_regions(c: &Constellation) -> DecisionRegions {
    let n = c.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| c.points()[a].total_cmp(&c.points()[b]).then(a.cmp(&b)));

    // Collapse exact duplicates; the lowest original index wins the interval.
    let mut groups: Vec<(f64, usize, Vec<usize>)> = Vec::new();
    for &idx in &order {
        let x = c.points()[idx];
        match groups.last_mut() {
            Some((gx, winner, members)) if *gx == x => {
                *winner = (*winner).min(idx);
                members.push(idx);
            }
            _ => groups.push((x, idx, vec![idx])),
        }
    }

    let mut regions = Vec::with_capacity(groups.len());
    let mut home_region = vec![0usize; n];
    for (g, (x, winner, members)) in groups.iter().enumerate() {
        let lo = if g == 0 {
            f64::NEG_INFINITY
        } else {
            0.5 * (groups[g - 1].0 + x)
        };
        let hi = if g + 1 == groups.len() {
            f64::INFINITY
        } else {
            0.5 * (x + groups[g + 1].0)
        };
        regions.push((lo, hi, *winner));
        for &m in members {
            home_region[m] = g;
        }
    }
    DecisionRegions {
        regions,
        home_region,
    }
}

/// Exact per-user symbol-error probabilities of the superposition baseline
/// under per-receiver minimum-distance decoding.
pub fn baseline_ser_oracle(
    arch: &ArchSpec,
    power_fraction_user1: f64,
    cfg: &ChannelConfig,
) -> Result<(f64, f64)> {
    let c = baseline_superposition(arch, power_fraction_user1, cfg.power)?;
    let regions = decision_regions(&c);
    let ser1 = user_error_probability(&c, &regions, cfg.noise_var_user1(), |s1, _| s1);
    let ser2 = user_error_probability(&c, &regions, cfg.noise_var_user2(), |_, s2| s2);
    Ok((ser1, ser2))
}

fn user_error_probability(
    c: &Constellation,
    regions: &DecisionRegions,
    noise_var: f64,
    label_of: impl Fn(usize, usize) -> usize,
) -> f64 {
    let m2 = c.m2();
    let label = |joint: usize| label_of(joint / m2, joint % m2);
    let n = c.len() as f64;
    let mut total_error = 0.0;

    for sent in 0..c.len() {
        let x = c.points()[sent];
        let sent_label = label(sent);
        if noise_var == 0.0 {
            let (_, _, winner) = regions.regions[regions.home_region[sent]];
            if label(winner) != sent_label {
                total_error += 1.0;
            }
            continue;
        }
        let sigma = noise_var.sqrt();
        for &(lo, hi, winner) in &regions.regions {
            if label(winner) == sent_label {
                continue;
            }
            let p = q_func((lo - x) / sigma) - q_func((hi - x) / sigma);
            total_error += p;
        }
    }
    total_error / n
}

/// Monte-Carlo twin of [`baseline_ser_oracle`]: simulates the same
/// nearest-point decoders over `trials` uniform messages with fresh noise.
/// Deterministic given `seed` and independent of the worker count (fixed
/// chunk size, one rng stream per chunk).
pub fn baseline_ser_monte_carlo(
    arch: &ArchSpec,
    power_fraction_user1: f64,
    cfg: &ChannelConfig,
    trials: usize,
    seed: u64,
) -> Result<SerEstimate> {
    if trials < 10_000 {
        return Err(Error::Input(format!(
            "need at least 10^4 trials, got {trials}"
        )));
    }
    let c = baseline_superposition(arch, power_fraction_user1, cfg.power)?;
    let m1 = c.m1();
    let m2 = c.m2();
    let points = c.points().to_vec();

    let chunk_count = trials.div_ceil(SER_CHUNK);
    let (errors1, errors2) = (0..chunk_count)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * SER_CHUNK;
            let count = SER_CHUNK.min(trials - start);
            let mut rng = streams::substream(seed, streams::SER_CHUNK_BASE + chunk as u64);
            let mut e1 = 0u64;
            let mut e2 = 0u64;
            for _ in 0..count {
                let s1 = rng.random_range(0..m1);
                let s2 = rng.random_range(0..m2);
                let x = points[s1 * m2 + s2];
                let y2 = x + gaussian_sample(&mut rng, cfg.sigma2_sq);
                let y1 = y2 + gaussian_sample(&mut rng, cfg.sigma1_sq);
                let d1 = nearest_point(&points, y1);
                let d2 = nearest_point(&points, y2);
                if d1 / m2 != s1 {
                    e1 += 1;
                }
                if d2 % m2 != s2 {
                    e2 += 1;
                }
            }
            (e1, e2)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    Ok(SerEstimate::from_counts(errors1, errors2, trials))
}

fn nearest_point(points: &[f64], y: f64) -> usize {
    let mut best = 0;
    let mut best_d = (points[0] - y).abs();
    for (i, &p) in points.iter().enumerate().skip(1) {
        let d = (p - y).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{power_decomposition, RatioDb};

    #[test]
    fn gray_code_round_trips() {
        for i in 0..64 {
            assert_eq!(gray_decode(gray_code(i)), i);
        }
        assert_eq!(gray_code(0), 0);
        assert_eq!(gray_code(1), 1);
        assert_eq!(gray_code(2), 3);
        assert_eq!(gray_code(3), 2);
    }

    #[test]
    fn pam_levels_have_unit_power() {
        for m in [2usize, 4, 8, 16] {
            let levels = pam_levels(m);
            let power: f64 = levels.iter().map(|v| v * v).sum::<f64>() / m as f64;
            assert!((power - 1.0).abs() < 1e-12, "M = {m}: power {power}");
            let mean: f64 = levels.iter().sum::<f64>() / m as f64;
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn fraction_08_gives_equally_spaced_points() {
        let arch = ArchSpec::table1(1, 1).unwrap();
        let c = baseline_superposition(&arch, 0.8, 1.0).unwrap();
        let a = 0.8f64.sqrt();
        let b = 0.2f64.sqrt();
        let mut xs: Vec<f64> = c.points().to_vec();
        xs.sort_by(f64::total_cmp);
        let expected = [-(a + b), -(a - b), a - b, a + b];
        for (x, e) in xs.iter().zip(&expected) {
            assert!((x - e).abs() < 1e-12);
        }
        let gaps: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        for g in &gaps {
            assert!((g - gaps[0]).abs() < 1e-12, "not equally spaced: {gaps:?}");
        }
    }

    #[test]
    fn fraction_one_collapses_user2() {
        let arch = ArchSpec::table1(1, 2).unwrap();
        let c = baseline_superposition(&arch, 1.0, 1.0).unwrap();
        assert_eq!(c.distinct_points(1e-9), arch.m1());
    }

    #[test]
    fn decomposition_round_trips_the_fraction() {
        let arch = ArchSpec::table1(1, 2).unwrap();
        for &f in &[0.2, 0.5, 0.8, 0.9] {
            let c = baseline_superposition(&arch, f, 1.0).unwrap();
            let split = power_decomposition(&c);
            let expected = 10.0 * (f / (1.0 - f)).log10();
            match split.ratio_db {
                RatioDb::Finite(db) => assert!(
                    (db - expected).abs() < 1e-9,
                    "f = {f}: {db} vs {expected}"
                ),
                other => panic!("expected finite ratio for f = {f}, got {other:?}"),
            }
            assert!((split.fraction_user1() - f).abs() < 1e-12);
        }
    }

    #[test]
    fn single_user_bpsk_matches_q_function() {
        // All power to user 1 at 10 dB: ser1 = Q(sqrt(10)) ~= 7.827e-4.
        let arch = ArchSpec::table1(1, 1).unwrap();
        let cfg = ChannelConfig::new(10.0, 10.0, 1.0).unwrap();
        let (ser1, _) = baseline_ser_oracle(&arch, 1.0, &cfg).unwrap();
        assert!(
            (ser1 - 7.827011290012756e-4).abs() < 1e-12,
            "ser1 = {ser1}"
        );
    }

    #[test]
    fn zero_noise_gives_zero_error() {
        let arch = ArchSpec::table1(1, 1).unwrap();
        let cfg = ChannelConfig::new(f64::INFINITY, f64::INFINITY, 1.0).unwrap();
        let (ser1, ser2) = baseline_ser_oracle(&arch, 0.8, &cfg).unwrap();
        assert_eq!(ser1, 0.0);
        assert_eq!(ser2, 0.0);
    }

    #[test]
    fn monte_carlo_agrees_with_oracle() {
        let arch = ArchSpec::table1(1, 1).unwrap();
        let cfg = ChannelConfig::new(5.0, 30.0, 1.0).unwrap();
        let fraction = 0.8;
        let trials = 1_000_000;
        let (o1, o2) = baseline_ser_oracle(&arch, fraction, &cfg).unwrap();
        let mc = baseline_ser_monte_carlo(&arch, fraction, &cfg, trials, 99).unwrap();
        assert!(
            (mc.ser1 - o1).abs() <= 3.0 * mc.half_width_95[0].max(1e-6),
            "user 1: mc {} vs oracle {o1} (hw {})",
            mc.ser1,
            mc.half_width_95[0]
        );
        assert!(
            (mc.ser2 - o2).abs() <= 3.0 * mc.half_width_95[1].max(1e-6),
            "user 2: mc {} vs oracle {o2} (hw {})",
            mc.ser2,
            mc.half_width_95[1]
        );
    }

    #[test]
    fn q_func_endpoints() {
        assert_eq!(q_func(f64::INFINITY), 0.0);
        assert_eq!(q_func(f64::NEG_INFINITY), 1.0);
        assert!((q_func(0.0) - 0.5).abs() < 1e-15);
    }
}
