//! Versioned text checkpoints.
//!
//! A network block is a layer count followed by one `dense <in> <out>
//! <activation>` header per layer and `out_dim` rows of `in_dim + 1`
//! decimals (the weight row, then the bias). Every float is printed with 17
//! significant digits so the round trip is bit-exact.
//!
//! A standalone net file is the version line plus one block. A model file is
//! the version line, three metadata lines (`arch`, `channel`, `train`), and
//! the encoder, decoder-1, and decoder-2 blocks in that order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::autoencoder::{ArchSpec, TrainConfig, TrainedModel};
use crate::channel::ChannelConfig;
use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, DenseNet};

pub const FORMAT_VERSION: &str = "bcae-v1";

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Checkpoint(format!("cannot parse {what} from `{s}`")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Checkpoint(format!("cannot parse {what} from `{s}`")))
}

/// Writes via a temp sibling and rename, so readers never observe a partial
/// file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Lines<'a> {
    lines: std::str::Lines<'a>,
    current: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            lines: text.lines(),
            current: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.current += 1;
        self.lines
            .next()
            .ok_or_else(|| Error::Checkpoint(format!("file ends before {what}")))
    }

    fn context(&self) -> usize {
        self.current
    }
}

fn write_net_block(out: &mut String, net: &DenseNet) {
    writeln!(out, "{}", net.layers().len()).unwrap();
    for layer in net.layers() {
        writeln!(
            out,
            "dense {} {} {}",
            layer.in_dim(),
            layer.out_dim(),
            layer.activation().name()
        )
        .unwrap();
        for o in 0..layer.out_dim() {
            let row = &layer.weights()[o * layer.in_dim()..(o + 1) * layer.in_dim()];
            let mut fields: Vec<String> = row.iter().map(|&w| fmt_f64(w)).collect();
            fields.push(fmt_f64(layer.bias()[o]));
            writeln!(out, "{}", fields.join(" ")).unwrap();
        }
    }
}

fn read_net_block(lines: &mut Lines) -> Result<DenseNet> {
    let count = parse_usize(lines.next("layer count")?.trim(), "layer count")?;
    if count == 0 {
        return Err(Error::Checkpoint("network block with zero layers".into()));
    }
    let mut layers = Vec::with_capacity(count);
    let mut net_input_dim = None;
    for _ in 0..count {
        let header = lines.next("layer header")?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "dense" {
            return Err(Error::Checkpoint(format!(
                "line {}: expected `dense <in> <out> <activation>`, got `{header}`",
                lines.context()
            )));
        }
        let in_dim = parse_usize(fields[1], "layer input dim")?;
        let out_dim = parse_usize(fields[2], "layer output dim")?;
        let activation = Activation::from_name(fields[3])?;
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Checkpoint(format!(
                "line {}: layer dims must be >= 1",
                lines.context()
            )));
        }
        net_input_dim.get_or_insert(in_dim);

        let mut weights = Vec::with_capacity(in_dim * out_dim);
        let mut bias = Vec::with_capacity(out_dim);
        for _ in 0..out_dim {
            let row_line = lines.next("parameter row")?;
            let values = row_line
                .split_whitespace()
                .map(|f| parse_f64(f, "parameter"))
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != in_dim + 1 {
                return Err(Error::Checkpoint(format!(
                    "line {}: expected {} values, got {}",
                    lines.context(),
                    in_dim + 1,
                    values.len()
                )));
            }
            weights.extend_from_slice(&values[..in_dim]);
            bias.push(values[in_dim]);
        }
        layers.push(
            DenseLayer::from_params(in_dim, out_dim, activation, weights, bias)
                .map_err(|e| Error::Checkpoint(e.to_string()))?,
        );
    }
    DenseNet::from_layers(net_input_dim.unwrap(), layers)
        .map_err(|e| Error::Checkpoint(e.to_string()))
}

fn check_version(lines: &mut Lines) -> Result<()> {
    let version = lines.next("version header")?.trim();
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version `{version}` (expected `{FORMAT_VERSION}`)"
        )));
    }
    Ok(())
}

/// Serializes a standalone network.
pub fn net_to_string(net: &DenseNet) -> String {
    let mut out = String::new();
    writeln!(out, "{FORMAT_VERSION}").unwrap();
    write_net_block(&mut out, net);
    out
}

pub fn net_from_string(text: &str) -> Result<DenseNet> {
    let mut lines = Lines::new(text);
    check_version(&mut lines)?;
    read_net_block(&mut lines)
}

pub fn save_net(net: &DenseNet, path: &Path) -> Result<()> {
    write_atomic(path, &net_to_string(net))
}

pub fn load_net(path: &Path) -> Result<DenseNet> {
    net_from_string(&fs::read_to_string(path)?)
}

/// Serializes a trained model (nets plus arch/channel/train metadata; the
/// loss history lives in its own CSV, not here).
pub fn model_to_string(model: &TrainedModel) -> String {
    let mut out = String::new();
    writeln!(out, "{FORMAT_VERSION}").unwrap();
    writeln!(
        out,
        "arch {} {} {}",
        model.arch.k1, model.arch.k2, model.arch.n
    )
    .unwrap();
    writeln!(
        out,
        "channel {} {} {}",
        fmt_f64(model.channel.snr1_db),
        fmt_f64(model.channel.snr2_db),
        fmt_f64(model.channel.power)
    )
    .unwrap();
    writeln!(
        out,
        "train {} {} {} {}",
        model.train_cfg.seed,
        model.train_cfg.steps,
        model.train_cfg.batch_size,
        fmt_f64(model.train_cfg.learning_rate)
    )
    .unwrap();
    write_net_block(&mut out, &model.encoder);
    write_net_block(&mut out, &model.decoder1);
    write_net_block(&mut out, &model.decoder2);
    out
}

pub fn model_from_string(text: &str) -> Result<TrainedModel> {
    let mut lines = Lines::new(text);
    check_version(&mut lines)?;

    let arch_line = lines.next("arch line")?;
    let fields: Vec<&str> = arch_line.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "arch" {
        return Err(Error::Checkpoint(format!(
            "expected `arch <k1> <k2> <n>`, got `{arch_line}`"
        )));
    }
    let k1 = parse_usize(fields[1], "k1")? as u32;
    let k2 = parse_usize(fields[2], "k2")? as u32;
    let n = parse_usize(fields[3], "n")?;

    let channel_line = lines.next("channel line")?;
    let fields: Vec<&str> = channel_line.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "channel" {
        return Err(Error::Checkpoint(format!(
            "expected `channel <snr1_db> <snr2_db> <power>`, got `{channel_line}`"
        )));
    }
    let snr1_db = parse_f64(fields[1], "snr1_db")?;
    let snr2_db = parse_f64(fields[2], "snr2_db")?;
    let power = parse_f64(fields[3], "power")?;
    let channel = ChannelConfig::new(snr1_db, snr2_db, power)
        .map_err(|e| Error::Checkpoint(e.to_string()))?;

    let train_line = lines.next("train line")?;
    let fields: Vec<&str> = train_line.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "train" {
        return Err(Error::Checkpoint(format!(
            "expected `train <seed> <steps> <batch> <lr>`, got `{train_line}`"
        )));
    }
    let seed = fields[1]
        .parse::<u64>()
        .map_err(|_| Error::Checkpoint(format!("cannot parse seed from `{}`", fields[1])))?;
    let steps = parse_usize(fields[2], "steps")?;
    let batch_size = parse_usize(fields[3], "batch size")?;
    let learning_rate = parse_f64(fields[4], "learning rate")?;

    let encoder = read_net_block(&mut lines)?;
    let decoder1 = read_net_block(&mut lines)?;
    let decoder2 = read_net_block(&mut lines)?;

    // Hidden widths are recovered from the decoder layer stacks themselves.
    let hidden = |net: &DenseNet| -> Vec<usize> {
        let layers = net.layers();
        layers[..layers.len() - 1]
            .iter()
            .map(|l| l.out_dim())
            .collect()
    };
    let arch = ArchSpec {
        k1,
        k2,
        decoder1_hidden: hidden(&decoder1),
        decoder2_hidden: hidden(&decoder2),
        n,
    };
    arch.validate().map_err(|e| Error::Checkpoint(e.to_string()))?;

    let model = TrainedModel {
        encoder,
        decoder1,
        decoder2,
        arch,
        channel,
        train_cfg: TrainConfig {
            steps,
            batch_size,
            learning_rate,
            seed,
            ..TrainConfig::default()
        },
        history: Vec::new(),
    };
    validate_model_shapes(&model)?;
    Ok(model)
}

fn validate_model_shapes(model: &TrainedModel) -> Result<()> {
    let arch = &model.arch;
    if model.encoder.input_dim() != arch.m()
        || model.encoder.output_dim() != arch.n
        || model.decoder1.input_dim() != arch.n
        || model.decoder1.output_dim() != arch.m1()
        || model.decoder2.input_dim() != arch.n
        || model.decoder2.output_dim() != arch.m2()
    {
        return Err(Error::Checkpoint(
            "network dimensions do not match the declared architecture".into(),
        ));
    }
    Ok(())
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    write_atomic(path, &model_to_string(model))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    model_from_string(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::init_model;

    fn sample_model() -> TrainedModel {
        let arch = ArchSpec::table1(1, 2).unwrap();
        let channel = ChannelConfig::new(5.0, 30.0, 1.0).unwrap();
        let cfg = TrainConfig {
            steps: 3,
            batch_size: 8,
            seed: 11,
            ..TrainConfig::default()
        };
        init_model(&arch, &channel, &cfg).unwrap()
    }

    #[test]
    fn model_round_trip_is_bit_exact() {
        let model = sample_model();
        let text = model_to_string(&model);
        let loaded = model_from_string(&text).unwrap();
        assert_eq!(loaded.encoder, model.encoder);
        assert_eq!(loaded.decoder1, model.decoder1);
        assert_eq!(loaded.decoder2, model.decoder2);
        assert_eq!(loaded.arch, model.arch);
        assert_eq!(loaded.channel, model.channel);
        assert_eq!(loaded.train_cfg.seed, model.train_cfg.seed);
        // Serializing again gives the identical byte stream.
        assert_eq!(model_to_string(&loaded), text);
    }

    #[test]
    fn net_round_trip_is_bit_exact() {
        let model = sample_model();
        let text = net_to_string(&model.encoder);
        let loaded = net_from_string(&text).unwrap();
        assert_eq!(loaded, model.encoder);
    }

    #[test]
    fn rejects_wrong_version() {
        let model = sample_model();
        let text = model_to_string(&model).replacen("bcae-v1", "bcae-v0", 1);
        match model_from_string(&text) {
            Err(Error::Checkpoint(msg)) => assert!(msg.contains("bcae-v0")),
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_truncated_file() {
        let model = sample_model();
        let text = model_to_string(&model);
        let truncated = &text[..text.len() / 2];
        assert!(matches!(
            model_from_string(truncated),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn rejects_garbage_parameters() {
        let model = sample_model();
        let text = model_to_string(&model).replacen("e0", "null", 1);
        assert!(model_from_string(&text).is_err());
    }

    #[test]
    fn seventeen_digit_floats_round_trip() {
        for &v in &[
            0.1,
            -1.0 / 3.0,
            1e-300,
            -0.0,
            123456.789e12,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "value {v} via `{s}`");
        }
    }
}
