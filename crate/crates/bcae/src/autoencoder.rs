//! System assembly and the joint training loop.
//!
//! The transmitter maps the one-hot encoded joint message through a dense
//! encoder to a single real symbol, the power normalizer enforces the average
//! power budget over the batch, the channel adds the two noise layers, and
//! two independent dense decoders output per-user message distributions.
//! Training minimizes the sum of the two cross-entropies end to end, with
//! gradients flowing through the decoders, the noise addition, the
//! normalization, and the encoder.

use rand_chacha::ChaCha8Rng;

use crate::adam::AdamState;
use crate::batch::Batch;
use crate::channel::{self, ChannelConfig};
use crate::error::{Error, Result};
use crate::nn::{self, Activation, DenseNet, NetGrads};
use crate::streams;

use rand::Rng;

/// Widest supported one-hot input (joint bits `k1 + k2`).
pub const MAX_TOTAL_BITS: u32 = 10;

/// Architecture of one encoder/decoder trio.
///
/// The encoder is always `M -> M (ReLU) -> 1 (linear)`. The two presets
/// differ in the decoder bodies: the base configuration uses one ReLU layer
/// of width `M1` (resp. `M2`), the higher-order configuration uses two ReLU
/// layers of width `M` in both decoders. Both end in a softmax head over the
/// user's message set.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchSpec {
    pub k1: u32,
    pub k2: u32,
    pub decoder1_hidden: Vec<usize>,
    pub decoder2_hidden: Vec<usize>,
    /// Channel uses per message; this system is single-use.
    pub n: usize,
}

impl ArchSpec {
    /// Base preset: decoder hidden widths `[M1]` and `[M2]`.
    pub fn table1(k1: u32, k2: u32) -> Result<Self> {
        let spec = ArchSpec {
            k1,
            k2,
            decoder1_hidden: vec![1usize << k1],
            decoder2_hidden: vec![1usize << k2],
            n: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Higher-order preset: both decoders use hidden widths `[M, M]`.
    pub fn table2(k1: u32, k2: u32) -> Result<Self> {
        let m = 1usize << (k1 + k2);
        let spec = ArchSpec {
            k1,
            k2,
            decoder1_hidden: vec![m, m],
            decoder2_hidden: vec![m, m],
            n: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k1 < 1 || self.k2 < 1 {
            return Err(Error::Config("k1 and k2 must be at least 1".into()));
        }
        if self.k1 + self.k2 > MAX_TOTAL_BITS {
            return Err(Error::Config(format!(
                "k1 + k2 = {} exceeds the one-hot width guard of {MAX_TOTAL_BITS} bits",
                self.k1 + self.k2
            )));
        }
        if self.n != 1 {
            return Err(Error::Config("only single-channel-use systems are supported".into()));
        }
        if self.decoder1_hidden.iter().any(|&w| w == 0)
            || self.decoder2_hidden.iter().any(|&w| w == 0)
        {
            return Err(Error::Config("decoder hidden widths must be >= 1".into()));
        }
        Ok(())
    }

    /// User-1 message count `2^k1`.
    pub fn m1(&self) -> usize {
        1usize << self.k1
    }

    /// User-2 message count `2^k2`.
    pub fn m2(&self) -> usize {
        1usize << self.k2
    }

    /// Joint message count `2^(k1+k2)`.
    pub fn m(&self) -> usize {
        1usize << (self.k1 + self.k2)
    }
}

/// Training hyperparameters. Defaults follow the reference configuration:
/// batch 1000, learning rate 0.001.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Steps between loss-history records; the first and last step are
    /// always recorded.
    pub snapshot_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 20_000,
            batch_size: 1000,
            learning_rate: 0.001,
            seed: 0,
            snapshot_every: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Config("steps must be >= 1".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::Config("batch size must be >= 2".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.snapshot_every < 1 {
            return Err(Error::Config("snapshot interval must be >= 1".into()));
        }
        Ok(())
    }
}

/// One loss-history record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSample {
    pub step: usize,
    pub loss: f64,
}

/// A trained (frozen) system. Immutable after training; safe to share across
/// threads for analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub encoder: DenseNet,
    pub decoder1: DenseNet,
    pub decoder2: DenseNet,
    pub arch: ArchSpec,
    pub channel: ChannelConfig,
    pub train_cfg: TrainConfig,
    /// Loss trajectory; not part of the checkpoint format.
    pub history: Vec<LossSample>,
}

/// Row index of `(s1, s2)` in the joint one-hot encoding: `s1 * M2 + s2`.
pub fn joint_index(s1: usize, s2: usize, arch: &ArchSpec) -> Result<usize> {
    if s1 >= arch.m1() {
        return Err(Error::Input(format!(
            "message s1 = {s1} out of range for M1 = {}",
            arch.m1()
        )));
    }
    if s2 >= arch.m2() {
        return Err(Error::Input(format!(
            "message s2 = {s2} out of range for M2 = {}",
            arch.m2()
        )));
    }
    Ok(s1 * arch.m2() + s2)
}

/// Length-`m` indicator vector with a single 1 at `index`.
pub fn one_hot(index: usize, m: usize) -> Result<Vec<f64>> {
    if index >= m {
        return Err(Error::Input(format!(
            "one-hot index {index} out of range for length {m}"
        )));
    }
    let mut v = vec![0.0; m];
    v[index] = 1.0;
    Ok(v)
}

/// One-hot batch (M x B) from per-column joint indices.
fn one_hot_batch(joint: &[usize], m: usize) -> Batch {
    let mut b = Batch::zeros(m, joint.len());
    for (c, &idx) in joint.iter().enumerate() {
        debug_assert!(idx < m);
        b.set(idx, c, 1.0);
    }
    b
}

/// Uniform message indices in `[0, m)`.
pub fn sample_messages<R: Rng + ?Sized>(rng: &mut R, m: usize, count: usize) -> Vec<usize> {
    (0..count).map(|_| rng.random_range(0..m)).collect()
}

/// Argmax with ties broken toward the lowest index.
pub fn decode(probs: &[f64]) -> usize {
    let mut best = 0;
    let mut best_p = probs[0];
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > best_p {
            best = i;
            best_p = p;
        }
    }
    best
}

/// Per-column [`decode`] over a probability batch.
pub fn decode_batch(probs: &Batch) -> Vec<usize> {
    (0..probs.len())
        .map(|c| {
            let mut best = 0;
            let mut best_p = probs.get(0, c);
            for r in 1..probs.dim() {
                let p = probs.get(r, c);
                if p > best_p {
                    best = r;
                    best_p = p;
                }
            }
            best
        })
        .collect()
}

/// Sum of the two per-user cross-entropies.
pub fn loss_joint(p1: &Batch, p2: &Batch, s1: &[usize], s2: &[usize]) -> Result<f64> {
    Ok(nn::cross_entropy(p1, s1)? + nn::cross_entropy(p2, s2)?)
}

/// Output of one full system pass.
#[derive(Debug, Clone)]
pub struct SystemOutput {
    /// Decoder-1 message distribution (M1 x B).
    pub p1: Batch,
    /// Decoder-2 message distribution (M2 x B).
    pub p2: Batch,
    /// Transmitted (power-normalized) symbols (1 x B).
    pub x: Batch,
}

/// Runs messages through encoder, normalization, channel, and both decoders.
/// Noise is drawn only when an rng is supplied; otherwise both receivers see
/// the clean symbols.
pub fn forward_system(
    model: &TrainedModel,
    s1: &[usize],
    s2: &[usize],
    noise: Option<&mut ChaCha8Rng>,
) -> Result<SystemOutput> {
    if s1.len() != s2.len() || s1.is_empty() {
        return Err(Error::Input(
            "message batches must be non-empty and of equal length".into(),
        ));
    }
    let joint = s1
        .iter()
        .zip(s2)
        .map(|(&a, &b)| joint_index(a, b, &model.arch))
        .collect::<Result<Vec<_>>>()?;
    let input = one_hot_batch(&joint, model.arch.m());
    let encoded = model.encoder.output(&input)?;
    let x = channel::normalize_power(&encoded, model.channel.power)?;
    let (y1, y2) = match noise {
        Some(rng) => {
            let sample = channel::transmit(&x, &model.channel, rng);
            (sample.y1, sample.y2)
        }
        None => (x.clone(), x.clone()),
    };
    let p1 = model.decoder1.output(&y1)?;
    let p2 = model.decoder2.output(&y2)?;
    Ok(SystemOutput { p1, p2, x })
}

/// Loss and exact parameter gradients for one batch. Factored out so the
/// training loop and the end-to-end gradient check share the same path.
struct StepEval {
    loss: f64,
    enc_grads: NetGrads,
    dec1_grads: NetGrads,
    dec2_grads: NetGrads,
}

fn evaluate_step(
    encoder: &DenseNet,
    decoder1: &DenseNet,
    decoder2: &DenseNet,
    power: f64,
    input: &Batch,
    s1: &[usize],
    s2: &[usize],
    noise: Option<(&Batch, &Batch)>,
) -> Result<StepEval> {
    let (encoded, enc_tape) = encoder.forward(input)?;
    let (x, norm_ctx) = channel::normalize_power_ctx(&encoded, power)?;
    let (y1, y2) = match noise {
        // Physically degraded: receiver 1 sees receiver 2's noise plus extra.
        Some((n1, n2)) => {
            let y2 = x.add(n2);
            (y2.add(n1), y2)
        }
        None => (x.clone(), x.clone()),
    };
    let (p1, tape1) = decoder1.forward(&y1)?;
    let (p2, tape2) = decoder2.forward(&y2)?;
    let loss = loss_joint(&p1, &p2, s1, s2)?;

    let g1 = nn::cross_entropy_grad(&p1, s1)?;
    let g2 = nn::cross_entropy_grad(&p2, s2)?;
    let (dec1_grads, dy1) = decoder1.backward(&tape1, &g1)?;
    let (dec2_grads, dy2) = decoder2.backward(&tape2, &g2)?;
    // Additive noise passes upstream gradients through unchanged.
    let dx = dy1.add(&dy2);
    let d_encoded = channel::normalize_power_backward(&encoded, &norm_ctx, &dx);
    let (enc_grads, _) = encoder.backward(&enc_tape, &d_encoded)?;

    Ok(StepEval {
        loss,
        enc_grads,
        dec1_grads,
        dec2_grads,
    })
}

fn noiseless_loss(
    encoder: &DenseNet,
    decoder1: &DenseNet,
    decoder2: &DenseNet,
    power: f64,
    input: &Batch,
    s1: &[usize],
    s2: &[usize],
) -> Result<f64> {
    let encoded = encoder.output(input)?;
    let x = channel::normalize_power(&encoded, power)?;
    let p1 = decoder1.output(&x)?;
    let p2 = decoder2.output(&x)?;
    loss_joint(&p1, &p2, s1, s2)
}

/// Fresh (untrained) model with seeded initialization.
pub fn init_model(arch: &ArchSpec, channel: &ChannelConfig, cfg: &TrainConfig) -> Result<TrainedModel> {
    arch.validate()?;
    cfg.validate()?;
    let m = arch.m();
    let mut rng = streams::substream(cfg.seed, streams::STREAM_INIT);

    let encoder = DenseNet::init(
        m,
        &[(m, Activation::Relu), (arch.n, Activation::Linear)],
        &mut rng,
    );
    let decoder1 = DenseNet::init(arch.n, &decoder_specs(&arch.decoder1_hidden, arch.m1()), &mut rng);
    let decoder2 = DenseNet::init(arch.n, &decoder_specs(&arch.decoder2_hidden, arch.m2()), &mut rng);

    Ok(TrainedModel {
        encoder,
        decoder1,
        decoder2,
        arch: arch.clone(),
        channel: channel.clone(),
        train_cfg: cfg.clone(),
        history: Vec::new(),
    })
}

fn decoder_specs(hidden: &[usize], classes: usize) -> Vec<(usize, Activation)> {
    let mut specs: Vec<(usize, Activation)> =
        hidden.iter().map(|&w| (w, Activation::Relu)).collect();
    specs.push((classes, Activation::Softmax));
    specs
}

/// Joint end-to-end training. Each step draws a fresh uniform message batch
/// and fresh channel noise, backpropagates the summed cross-entropy through
/// the whole chain, and applies one Adam update per network. The result is a
/// pure function of `(arch, channel, cfg)`.
pub fn train(arch: &ArchSpec, channel_cfg: &ChannelConfig, cfg: &TrainConfig) -> Result<TrainedModel> {
    let mut model = init_model(arch, channel_cfg, cfg)?;
    let mut msg_rng = streams::substream(cfg.seed, streams::STREAM_TRAIN_MESSAGES);
    let mut noise_rng = streams::substream(cfg.seed, streams::STREAM_TRAIN_NOISE);

    let mut adam_enc = AdamState::new(&model.encoder, cfg.learning_rate);
    let mut adam_dec1 = AdamState::new(&model.decoder1, cfg.learning_rate);
    let mut adam_dec2 = AdamState::new(&model.decoder2, cfg.learning_rate);

    let m1 = arch.m1();
    let m2 = arch.m2();
    let mut history = Vec::new();

    for step in 1..=cfg.steps {
        let s1 = sample_messages(&mut msg_rng, m1, cfg.batch_size);
        let s2 = sample_messages(&mut msg_rng, m2, cfg.batch_size);
        let joint: Vec<usize> = s1
            .iter()
            .zip(&s2)
            .map(|(&a, &b)| a * m2 + b)
            .collect();
        let input = one_hot_batch(&joint, arch.m());

        // Fresh noise every batch, shared n2 realization across receivers.
        let zeros = Batch::zeros(arch.n, cfg.batch_size);
        let noise_sample = channel::transmit(&zeros, channel_cfg, &mut noise_rng);
        let n2 = noise_sample.y2;
        let n1 = Batch::from_vec(
            arch.n,
            cfg.batch_size,
            noise_sample
                .y1
                .data()
                .iter()
                .zip(n2.data())
                .map(|(a, b)| a - b)
                .collect(),
        )?;

        let eval = evaluate_step(
            &model.encoder,
            &model.decoder1,
            &model.decoder2,
            channel_cfg.power,
            &input,
            &s1,
            &s2,
            Some((&n1, &n2)),
        )
        .map_err(|e| match e {
            Error::DegenerateEncoder { sum_sq } => Error::Training {
                step: step as u64,
                reason: format!("degenerate encoder output (batch energy {sum_sq:.3e})"),
            },
            other => other,
        })?;

        if !eval.loss.is_finite() {
            return Err(Error::Training {
                step: step as u64,
                reason: format!("non-finite loss {}", eval.loss),
            });
        }

        adam_enc.step(&mut model.encoder, &eval.enc_grads)?;
        adam_dec1.step(&mut model.decoder1, &eval.dec1_grads)?;
        adam_dec2.step(&mut model.decoder2, &eval.dec2_grads)?;

        if step == 1 || step == cfg.steps || step % cfg.snapshot_every == 0 {
            history.push(LossSample {
                step,
                loss: eval.loss,
            });
        }
    }

    model.history = history;
    Ok(model)
}

/// End-to-end gradient check: analytic gradients of the noiseless joint loss
/// against central finite differences over every parameter of all three
/// networks. Returns the max relative error
/// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-12)`.
pub fn grad_check_system(
    model: &mut TrainedModel,
    s1: &[usize],
    s2: &[usize],
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(Error::Input(format!("eps must be in (0, 1e-2], got {eps}")));
    }
    let joint = s1
        .iter()
        .zip(s2)
        .map(|(&a, &b)| joint_index(a, b, &model.arch))
        .collect::<Result<Vec<_>>>()?;
    let input = one_hot_batch(&joint, model.arch.m());
    let power = model.channel.power;

    let eval = evaluate_step(
        &model.encoder,
        &model.decoder1,
        &model.decoder2,
        power,
        &input,
        s1,
        s2,
        None,
    )?;
    let analytic = [&eval.enc_grads, &eval.dec1_grads, &eval.dec2_grads];

    let mut max_rel = 0.0f64;
    for net_idx in 0..3 {
        let layer_count = net_of(model, net_idx).layers().len();
        for l in 0..layer_count {
            let count = net_of(model, net_idx).layers()[l].param_count();
            for idx in 0..count {
                let a = analytic[net_idx].layers[l].param(idx);
                let original = net_of(model, net_idx).layers()[l].param(idx);

                net_of_mut(model, net_idx).layers_mut()[l].set_param(idx, original + eps);
                let plus = noiseless_loss(
                    &model.encoder,
                    &model.decoder1,
                    &model.decoder2,
                    power,
                    &input,
                    s1,
                    s2,
                )?;
                net_of_mut(model, net_idx).layers_mut()[l].set_param(idx, original - eps);
                let minus = noiseless_loss(
                    &model.encoder,
                    &model.decoder1,
                    &model.decoder2,
                    power,
                    &input,
                    s1,
                    s2,
                )?;
                net_of_mut(model, net_idx).layers_mut()[l].set_param(idx, original);

                let numeric = (plus - minus) / (2.0 * eps);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-12);
                max_rel = max_rel.max(rel);
            }
        }
    }
    Ok(max_rel)
}

fn net_of(model: &TrainedModel, idx: usize) -> &DenseNet {
    match idx {
        0 => &model.encoder,
        1 => &model.decoder1,
        _ => &model.decoder2,
    }
}

fn net_of_mut(model: &mut TrainedModel, idx: usize) -> &mut DenseNet {
    match idx {
        0 => &mut model.encoder,
        1 => &mut model.decoder1,
        _ => &mut model.decoder2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::substream;

    fn small_setup() -> (ArchSpec, ChannelConfig, TrainConfig) {
        let arch = ArchSpec::table1(1, 1).unwrap();
        let channel = ChannelConfig::new(5.0, 5.0, 1.0).unwrap();
        let cfg = TrainConfig {
            steps: 1,
            batch_size: 16,
            seed: 3,
            ..TrainConfig::default()
        };
        (arch, channel, cfg)
    }

    #[test]
    fn joint_index_convention() {
        let arch = ArchSpec::table1(1, 1).unwrap();
        assert_eq!(joint_index(0, 0, &arch).unwrap(), 0);
        assert_eq!(joint_index(0, 1, &arch).unwrap(), 1);
        assert_eq!(joint_index(1, 0, &arch).unwrap(), 2);
        assert_eq!(joint_index(1, 1, &arch).unwrap(), 3);

        let arch12 = ArchSpec::table1(1, 2).unwrap();
        assert_eq!(joint_index(1, 2, &arch12).unwrap(), 6);

        assert!(matches!(
            joint_index(arch.m1(), 0, &arch),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn one_hot_basics() {
        assert_eq!(one_hot(2, 4).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(one_hot(0, 1).unwrap(), vec![1.0]);
        assert!(matches!(one_hot(4, 4), Err(Error::Input(_))));
    }

    #[test]
    fn arch_guard_rejects_wide_message_sets() {
        assert!(ArchSpec::table1(6, 5).is_err());
        assert!(ArchSpec::table1(0, 1).is_err());
        assert!(ArchSpec::table2(5, 5).is_ok());
    }

    #[test]
    fn decode_rules() {
        assert_eq!(decode(&[0.1, 0.7, 0.2]), 1);
        assert_eq!(decode(&[0.5, 0.5]), 0);
        assert_eq!(decode(&[1.0, 0.0, 0.0, 0.0]), 0);
    }

    #[test]
    fn loss_joint_known_values() {
        // Both decoders certain and correct.
        let p1 = Batch::from_vec(2, 1, vec![1.0, 0.0]).unwrap();
        let p2 = Batch::from_vec(2, 1, vec![0.0, 1.0]).unwrap();
        assert!(loss_joint(&p1, &p2, &[0], &[1]).unwrap().abs() < 1e-12);

        // Both uniform over 2 messages.
        let u = Batch::from_vec(2, 1, vec![0.5, 0.5]).unwrap();
        let loss = loss_joint(&u, &u, &[0], &[1]).unwrap();
        assert!((loss - 2.0 * 2.0f64.ln()).abs() < 1e-12);

        // Decoder 1 certain-correct, decoder 2 uniform over 4.
        let certain = Batch::from_vec(2, 1, vec![1.0, 0.0]).unwrap();
        let uniform4 = Batch::from_vec(4, 1, vec![0.25; 4]).unwrap();
        let loss = loss_joint(&certain, &uniform4, &[0], &[3]).unwrap();
        assert!((loss - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn forward_system_probability_columns() {
        let (arch, channel, cfg) = small_setup();
        let model = init_model(&arch, &channel, &cfg).unwrap();
        let s1 = vec![0, 1, 0, 1];
        let s2 = vec![0, 0, 1, 1];
        let out = forward_system(&model, &s1, &s2, None).unwrap();
        for c in 0..4 {
            let sum1: f64 = out.p1.column(c).iter().sum();
            let sum2: f64 = out.p2.column(c).iter().sum();
            assert!((sum1 - 1.0).abs() < 1e-9);
            assert!((sum2 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_messages_give_identical_symbols() {
        let (arch, channel, cfg) = small_setup();
        let model = init_model(&arch, &channel, &cfg).unwrap();
        let s1 = vec![1; 8];
        let s2 = vec![0; 8];
        let out = forward_system(&model, &s1, &s2, None).unwrap();
        let first = out.x.get(0, 0);
        assert!(out.x.row(0).iter().all(|&v| v == first));
    }

    #[test]
    fn untrained_loss_is_near_log_m1_plus_log_m2() {
        let (arch, channel, mut cfg) = small_setup();
        cfg.batch_size = 1000;
        let model = init_model(&arch, &channel, &cfg).unwrap();
        let mut rng = substream(99, 7);
        let s1 = sample_messages(&mut rng, arch.m1(), cfg.batch_size);
        let s2 = sample_messages(&mut rng, arch.m2(), cfg.batch_size);
        let out = forward_system(&model, &s1, &s2, None).unwrap();
        let loss = loss_joint(&out.p1, &out.p2, &s1, &s2).unwrap();
        let expected = (arch.m1() as f64).ln() + (arch.m2() as f64).ln();
        assert!(
            (loss - expected).abs() / expected < 0.25,
            "untrained loss {loss} too far from {expected}"
        );
    }

    #[test]
    fn train_rejects_zero_steps() {
        let (arch, channel, mut cfg) = small_setup();
        cfg.steps = 0;
        assert!(matches!(
            train(&arch, &channel, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn single_step_moves_parameters() {
        let (arch, channel, cfg) = small_setup();
        let init = init_model(&arch, &channel, &cfg).unwrap();
        let trained = train(&arch, &channel, &cfg).unwrap();
        assert_ne!(init.encoder, trained.encoder);
        assert_eq!(trained.history.len(), 1);
    }

    #[test]
    fn training_is_deterministic() {
        let (arch, channel, mut cfg) = small_setup();
        cfg.steps = 25;
        let a = train(&arch, &channel, &cfg).unwrap();
        let b = train(&arch, &channel, &cfg).unwrap();
        assert_eq!(a.encoder, b.encoder);
        assert_eq!(a.decoder1, b.decoder1);
        assert_eq!(a.decoder2, b.decoder2);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn message_sampling_is_uniform() {
        let arch = ArchSpec::table1(1, 1).unwrap();
        let n = 1_000_000usize;
        let mut rng = substream(5, streams::STREAM_TRAIN_MESSAGES);
        let s1 = sample_messages(&mut rng, arch.m1(), n);
        let s2 = sample_messages(&mut rng, arch.m2(), n);
        let m = arch.m();
        let mut counts = vec![0usize; m];
        for (a, b) in s1.iter().zip(&s2) {
            counts[a * arch.m2() + b] += 1;
        }
        let p = 1.0 / m as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for (joint, &c) in counts.iter().enumerate() {
            let dev = (c as f64 - n as f64 * p).abs();
            assert!(
                dev < 5.0 * sigma,
                "joint message {joint} count {c} deviates {dev} (5 sigma = {})",
                5.0 * sigma
            );
        }
    }

    #[test]
    fn end_to_end_gradients_match_finite_differences() {
        let (arch, channel, cfg) = small_setup();
        let mut model = init_model(&arch, &channel, &cfg).unwrap();
        let s1 = vec![0, 1, 1, 0, 1];
        let s2 = vec![0, 0, 1, 1, 0];
        let err = grad_check_system(&mut model, &s1, &s2, 1e-5).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }
}
