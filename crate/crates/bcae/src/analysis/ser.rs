//! Monte-Carlo symbol-error-rate estimation for trained models.

use rand::Rng;
use rayon::prelude::*;

use crate::autoencoder::{decode_batch, forward_system, sample_messages, TrainedModel};
use crate::channel::ChannelConfig;
use crate::error::{Error, Result};
use crate::streams;

/// Trials per rng chunk. Fixed so results do not depend on how many workers
/// process the chunks.
pub const SER_CHUNK: usize = 65_536;

/// Per-user symbol error rates with 95% binomial confidence half-widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerEstimate {
    pub ser1: f64,
    pub ser2: f64,
    pub trials: usize,
    pub half_width_95: [f64; 2],
}

impl SerEstimate {
    pub fn from_counts(errors1: u64, errors2: u64, trials: usize) -> Self {
        let n = trials as f64;
        let ser1 = errors1 as f64 / n;
        let ser2 = errors2 as f64 / n;
        let hw = |p: f64| 1.96 * (p * (1.0 - p) / n).sqrt();
        SerEstimate {
            ser1,
            ser2,
            trials,
            half_width_95: [hw(ser1), hw(ser2)],
        }
    }
}

/// Monte-Carlo SER over uniform messages and fresh noise, evaluated at
/// `cfg` (which may differ from the model's training channel).
///
/// Trials are processed in chunks of [`SER_CHUNK`]; chunk `i` draws from
/// stream `SER_CHUNK_BASE + i` of `seed`, so the counts are reproducible and
/// independent of parallelism.
pub fn estimate_ser(
    model: &TrainedModel,
    cfg: &ChannelConfig,
    trials: usize,
    seed: u64,
) -> Result<SerEstimate> {
    if trials < 10_000 {
        return Err(Error::Input(format!(
            "need at least 10^4 trials, got {trials}"
        )));
    }
    let m1 = model.arch.m1();
    let m2 = model.arch.m2();
    let eval_model = TrainedModel {
        channel: cfg.clone(),
        ..model.clone()
    };

    let chunk_count = trials.div_ceil(SER_CHUNK);
    let results: Result<Vec<(u64, u64)>> = (0..chunk_count)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * SER_CHUNK;
            let count = SER_CHUNK.min(trials - start);
            let mut rng = streams::substream(seed, streams::SER_CHUNK_BASE + chunk as u64);
            let s1 = sample_messages(&mut rng, m1, count);
            let s2 = sample_messages(&mut rng, m2, count);
            let out = forward_system(&eval_model, &s1, &s2, Some(&mut rng))?;
            let d1 = decode_batch(&out.p1);
            let d2 = decode_batch(&out.p2);
            let e1 = d1.iter().zip(&s1).filter(|(a, b)| a != b).count() as u64;
            let e2 = d2.iter().zip(&s2).filter(|(a, b)| a != b).count() as u64;
            Ok((e1, e2))
        })
        .collect();

    let (errors1, errors2) = results?
        .into_iter()
        .fold((0u64, 0u64), |acc, (e1, e2)| (acc.0 + e1, acc.1 + e2));
    Ok(SerEstimate::from_counts(errors1, errors2, trials))
}

/// Draws one zero-mean Gaussian with the given variance (exact zero for
/// zero variance).
pub fn gaussian_sample<R: Rng>(rng: &mut R, variance: f64) -> f64 {
    if variance == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    z * variance.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_too_few_trials() {
        use crate::autoencoder::{init_model, ArchSpec, TrainConfig};
        let arch = ArchSpec::table1(1, 1).unwrap();
        let cfg = ChannelConfig::new(5.0, 5.0, 1.0).unwrap();
        let model = init_model(&arch, &cfg, &TrainConfig::default()).unwrap();
        assert!(matches!(
            estimate_ser(&model, &cfg, 100, 0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn confidence_half_width_formula() {
        let est = SerEstimate::from_counts(100, 0, 10_000);
        assert!((est.ser1 - 0.01).abs() < 1e-15);
        let expected = 1.96 * (0.01f64 * 0.99 / 10_000.0).sqrt();
        assert!((est.half_width_95[0] - expected).abs() < 1e-15);
        assert_eq!(est.half_width_95[1], 0.0);
    }
}
