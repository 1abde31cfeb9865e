//! The degraded AWGN broadcast channel.
//!
//! Receiver 2 sees `y2 = x + n2`; receiver 1 sees the physically degraded
//! `y1 = x + n1 + n2`, reusing the same `n2` realization. Noise variances
//! come from the per-user SNRs as `sigma2^2 = 1/SNR_2` and
//! `sigma1^2 = 1/SNR_1 - sigma2^2`, which forces `snr1 <= snr2`.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::batch::Batch;
use crate::error::{Error, Result};

/// `10^(db/10)`.
pub fn snr_db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Noise variances `(sigma1_sq, sigma2_sq)` for the two receivers.
///
/// Fails with a degradedness violation when `snr1_db > snr2_db`, which would
/// require negative variance for the extra noise at receiver 1. Equal SNRs
/// are accepted and give `sigma1_sq = 0`.
pub fn derive_noise_variances(snr1_db: f64, snr2_db: f64) -> Result<(f64, f64)> {
    let sigma2_sq = 1.0 / snr_db_to_linear(snr2_db);
    let sigma1_sq = 1.0 / snr_db_to_linear(snr1_db) - sigma2_sq;
    if sigma1_sq < 0.0 {
        return Err(Error::Degradedness { snr1_db, snr2_db });
    }
    Ok((sigma1_sq, sigma2_sq))
}

/// Validated channel parameters with derived noise variances.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub snr1_db: f64,
    pub snr2_db: f64,
    /// Average symbol power budget.
    pub power: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
}

impl ChannelConfig {
    pub fn new(snr1_db: f64, snr2_db: f64, power: f64) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Config(format!(
                "power must be positive and finite, got {power}"
            )));
        }
        let (sigma1_sq, sigma2_sq) = derive_noise_variances(snr1_db, snr2_db)?;
        Ok(ChannelConfig {
            snr1_db,
            snr2_db,
            power,
            sigma1_sq,
            sigma2_sq,
        })
    }

    /// Total noise variance seen by receiver 1 (`sigma1^2 + sigma2^2`).
    pub fn noise_var_user1(&self) -> f64 {
        self.sigma1_sq + self.sigma2_sq
    }

    pub fn noise_var_user2(&self) -> f64 {
        self.sigma2_sq
    }
}

/// One transmission through the broadcast channel.
#[derive(Debug, Clone)]
pub struct ChannelSample {
    pub x: Batch,
    pub y1: Batch,
    pub y2: Batch,
}

/// Adds the two noise layers. `n2` is drawn first (row-major element order),
/// then `n1`; a zero-variance component is skipped entirely and contributes
/// exact zeros without consuming the rng.
pub fn transmit<R: Rng + ?Sized>(x: &Batch, cfg: &ChannelConfig, rng: &mut R) -> ChannelSample {
    let y2 = add_gaussian(x, cfg.sigma2_sq, rng);
    let y1 = add_gaussian(&y2, cfg.sigma1_sq, rng);
    ChannelSample {
        x: x.clone(),
        y1,
        y2,
    }
}

fn add_gaussian<R: Rng + ?Sized>(x: &Batch, variance: f64, rng: &mut R) -> Batch {
    if variance == 0.0 {
        return x.clone();
    }
    let normal = Normal::new(0.0, variance.sqrt()).expect("finite std");
    let mut out = x.clone();
    for v in out.data_mut() {
        *v += normal.sample(rng);
    }
    out
}

/// Scale factor context from one normalization, kept for the backward pass.
#[derive(Debug, Clone, Copy)]
pub struct NormCtx {
    pub scale: f64,
    pub sum_sq: f64,
}

/// Rescales the batch so its average element power is exactly `power`:
/// `out = x * sqrt(power * n / sum(x^2))` with `n` the total element count.
pub fn normalize_power(x: &Batch, power: f64) -> Result<Batch> {
    normalize_power_ctx(x, power).map(|(b, _)| b)
}

/// [`normalize_power`] that also returns the scale context needed by
/// [`normalize_power_backward`].
pub fn normalize_power_ctx(x: &Batch, power: f64) -> Result<(Batch, NormCtx)> {
    let sum_sq = x.sum_sq();
    if sum_sq < 1e-30 {
        return Err(Error::DegenerateEncoder { sum_sq });
    }
    let n = (x.dim() * x.len()) as f64;
    let scale = (power * n / sum_sq).sqrt();
    Ok((x.scaled(scale), NormCtx { scale, sum_sq }))
}

/// Gradient of the normalization, treating the shared scale as part of the
/// differentiable graph:
///
/// `dL/dx_j = s * (g_j - x_j * <g, x> / sum_sq)` for `y = s(x) * x`.
pub fn normalize_power_backward(x: &Batch, ctx: &NormCtx, upstream: &Batch) -> Batch {
    assert_eq!(x.dim(), upstream.dim());
    assert_eq!(x.len(), upstream.len());
    let dot: f64 = x
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(xi, gi)| xi * gi)
        .sum();
    let coupling = dot / ctx.sum_sq;
    let mut out = upstream.clone();
    for (d, &xi) in out.data_mut().iter_mut().zip(x.data()) {
        *d = ctx.scale * (*d - xi * coupling);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn db_conversion_known_values() {
        assert_eq!(snr_db_to_linear(0.0), 1.0);
        assert!((snr_db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((snr_db_to_linear(5.0) - 3.16227766).abs() < 1e-7);
    }

    #[test]
    fn noise_variances_from_paper_formulas() {
        let (s1, s2) = derive_noise_variances(0.0, 0.0).unwrap();
        assert_eq!(s1, 0.0);
        assert_eq!(s2, 1.0);

        let (s1, s2) = derive_noise_variances(5.0, 30.0).unwrap();
        assert!((s1 - 0.315228).abs() < 1e-6);
        assert!((s2 - 0.001).abs() < 1e-15);
    }

    #[test]
    fn rejects_inverted_snrs() {
        match derive_noise_variances(10.0, 5.0) {
            Err(Error::Degradedness { snr1_db, snr2_db }) => {
                assert_eq!(snr1_db, 10.0);
                assert_eq!(snr2_db, 5.0);
            }
            other => panic!("expected degradedness violation, got {other:?}"),
        }
    }

    #[test]
    fn normalize_known_values() {
        let x = Batch::from_vec(1, 4, vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(normalize_power(&x, 1.0).unwrap(), x);

        let x = Batch::from_vec(1, 2, vec![2.0, -2.0]).unwrap();
        let out = normalize_power(&x, 1.0).unwrap();
        assert_eq!(out.row(0), &[1.0, -1.0]);

        let x = Batch::from_vec(1, 4, vec![3.0, 1.0, -1.0, -3.0]).unwrap();
        let out = normalize_power(&x, 1.0).unwrap();
        let scale = (4.0f64 / 20.0).sqrt();
        for (o, e) in out.row(0).iter().zip(&[3.0, 1.0, -1.0, -3.0]) {
            assert!((o - e * scale).abs() < 1e-12);
        }
        let mean_sq = out.sum_sq() / 4.0;
        assert!((mean_sq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_rejects_zero_batch() {
        let x = Batch::from_vec(1, 3, vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            normalize_power(&x, 1.0),
            Err(Error::DegenerateEncoder { .. })
        ));
    }

    #[test]
    fn normalize_backward_matches_finite_differences() {
        let x = Batch::from_vec(1, 4, vec![0.8, -1.3, 2.1, 0.4]).unwrap();
        let upstream = Batch::from_vec(1, 4, vec![0.3, -0.7, 0.2, 1.1]).unwrap();
        let (_, ctx) = normalize_power_ctx(&x, 1.0).unwrap();
        let analytic = normalize_power_backward(&x, &ctx, &upstream);

        // Scalar probe: L = <upstream, normalize(x)>.
        let eps = 1e-7;
        for j in 0..4 {
            let mut probe = |v: f64| {
                let mut xp = x.clone();
                xp.set(0, j, v);
                let out = normalize_power(&xp, 1.0).unwrap();
                out.data()
                    .iter()
                    .zip(upstream.data())
                    .map(|(o, g)| o * g)
                    .sum::<f64>()
            };
            let base = x.get(0, j);
            let numeric = (probe(base + eps) - probe(base - eps)) / (2.0 * eps);
            assert!(
                (analytic.get(0, j) - numeric).abs() < 1e-6,
                "element {j}: analytic {} vs numeric {numeric}",
                analytic.get(0, j)
            );
        }
    }

    #[test]
    fn noiseless_transmit_is_identity() {
        let cfg = ChannelConfig::new(f64::INFINITY, f64::INFINITY, 1.0).unwrap();
        assert_eq!(cfg.sigma1_sq, 0.0);
        assert_eq!(cfg.sigma2_sq, 0.0);
        let x = Batch::from_vec(1, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sample = transmit(&x, &cfg, &mut rng);
        assert_eq!(sample.y1, x);
        assert_eq!(sample.y2, x);
    }

    #[test]
    fn transmit_is_seed_reproducible() {
        let cfg = ChannelConfig::new(5.0, 30.0, 1.0).unwrap();
        let x = Batch::from_vec(1, 16, (0..16).map(|i| (i as f64).sin()).collect()).unwrap();
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = transmit(&x, &cfg, &mut rng);
            (s.y1, s.y2)
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42).0, run(43).0);
    }

    #[test]
    fn empirical_noise_variance_matches_config() {
        // Sample variance of (y2 - x) over 1e6 draws concentrates around
        // sigma2^2 within 3 standard errors (chi-square concentration).
        let cfg = ChannelConfig::new(5.0, 30.0, 1.0).unwrap();
        let n = 1_000_000usize;
        let x = Batch::zeros(1, n);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sample = transmit(&x, &cfg, &mut rng);

        let n2: Vec<f64> = sample.y2.row(0).to_vec();
        let mean = n2.iter().sum::<f64>() / n as f64;
        let var = n2.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        let se = cfg.sigma2_sq * (2.0 / (n as f64 - 1.0)).sqrt();
        assert!(
            (var - cfg.sigma2_sq).abs() < 3.0 * se,
            "sample variance {var} vs sigma2_sq {} (3 se = {})",
            cfg.sigma2_sq,
            3.0 * se
        );

        // The two noise layers are drawn independently: the sample covariance
        // of (y1 - y2) and (y2 - x) is zero within 3 standard errors.
        let n1: Vec<f64> = sample
            .y1
            .row(0)
            .iter()
            .zip(sample.y2.row(0))
            .map(|(a, b)| a - b)
            .collect();
        let mean1 = n1.iter().sum::<f64>() / n as f64;
        let cov = n1
            .iter()
            .zip(&n2)
            .map(|(a, b)| (a - mean1) * (b - mean))
            .sum::<f64>()
            / (n - 1) as f64;
        let se_cov = (cfg.sigma1_sq * cfg.sigma2_sq / n as f64).sqrt();
        assert!(
            cov.abs() < 3.0 * se_cov,
            "covariance {cov} exceeds 3 se = {}",
            3.0 * se_cov
        );
    }
}
