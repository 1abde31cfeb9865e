//! File formats for analysis results: the JSON report and the
//! constellation CSV.

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analysis::ser::SerEstimate;
use crate::analysis::{Constellation, PowerSplit, RatioDb};
use crate::autoencoder::TrainedModel;
use crate::checkpoint::fmt_f64;
use crate::error::{Error, Result};

impl Serialize for RatioDb {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RatioDb::Finite(v) => serializer.serialize_f64(*v),
            RatioDb::PosInf => serializer.serialize_str("inf"),
            RatioDb::NegInf => serializer.serialize_str("-inf"),
            RatioDb::Undefined => serializer.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for RatioDb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RatioVisitor;
        impl Visitor<'_> for RatioVisitor {
            type Value = RatioDb;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"undefined\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<RatioDb, E> {
                Ok(RatioDb::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<RatioDb, E> {
                Ok(RatioDb::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<RatioDb, E> {
                Ok(RatioDb::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<RatioDb, E> {
                match v {
                    "inf" => Ok(RatioDb::PosInf),
                    "-inf" => Ok(RatioDb::NegInf),
                    "undefined" => Ok(RatioDb::Undefined),
                    other => Err(E::custom(format!("unknown ratio marker `{other}`"))),
                }
            }
        }
        deserializer.deserialize_any(RatioVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSplitReport {
    pub p1: f64,
    pub p2: f64,
    pub ratio_db: RatioDb,
    pub dc_offset: f64,
}

impl From<&PowerSplit> for PowerSplitReport {
    fn from(s: &PowerSplit) -> Self {
        PowerSplitReport {
            p1: s.p1,
            p2: s.p2,
            ratio_db: s.ratio_db,
            dc_offset: s.dc_offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerReport {
    pub ser1: f64,
    pub ser2: f64,
    pub trials: usize,
    pub half_width_95: [f64; 2],
}

impl From<&SerEstimate> for SerReport {
    fn from(e: &SerEstimate) -> Self {
        SerReport {
            ser1: e.ser1,
            ser2: e.ser2,
            trials: e.trials,
            half_width_95: e.half_width_95,
        }
    }
}

/// Echo of the analyzed model's configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub k1: u32,
    pub k2: u32,
    pub n: usize,
    pub snr1_db: f64,
    pub snr2_db: f64,
    pub power: f64,
    pub seed: u64,
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl From<&TrainedModel> for ConfigEcho {
    fn from(m: &TrainedModel) -> Self {
        ConfigEcho {
            k1: m.arch.k1,
            k2: m.arch.k2,
            n: m.arch.n,
            snr1_db: m.channel.snr1_db,
            snr2_db: m.channel.snr2_db,
            power: m.channel.power,
            seed: m.train_cfg.seed,
            steps: m.train_cfg.steps,
            batch_size: m.train_cfg.batch_size,
            learning_rate: m.train_cfg.learning_rate,
        }
    }
}

/// Everything the analyzer concluded about one trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub power_split: PowerSplitReport,
    pub gray_user2: bool,
    pub user1_separable: bool,
    pub ser: SerReport,
    pub config: ConfigEcho,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Input(format!("cannot parse analysis report: {e}")))
    }
}

/// `s1,s2,x` rows in message order, symbols printed with 17 significant
/// digits so re-analysis reproduces them bit-exactly.
pub fn constellation_to_csv(c: &Constellation) -> String {
    let mut out = String::from("s1,s2,x\n");
    for (s1, s2, x) in c.iter() {
        out.push_str(&format!("{s1},{s2},{}\n", fmt_f64(x)));
    }
    out
}

pub fn constellation_from_csv(text: &str) -> Result<Constellation> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Input("empty constellation CSV".into()))?;
    if header.trim() != "s1,s2,x" {
        return Err(Error::Input(format!(
            "unexpected constellation CSV header `{header}`"
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Input(format!(
                "constellation CSV row {} has {} fields, expected 3",
                i + 2,
                fields.len()
            )));
        }
        let s1: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad s1 in row {}", i + 2)))?;
        let s2: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad s2 in row {}", i + 2)))?;
        let x: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad x in row {}", i + 2)))?;
        rows.push((s1, s2, x));
    }
    if rows.is_empty() {
        return Err(Error::Input("constellation CSV has no rows".into()));
    }
    let m1 = rows.iter().map(|r| r.0).max().unwrap() + 1;
    let m2 = rows.iter().map(|r| r.1).max().unwrap() + 1;
    let mut points = vec![f64::NAN; m1 * m2];
    for (s1, s2, x) in rows {
        points[s1 * m2 + s2] = x;
    }
    if points.iter().any(|v| v.is_nan()) {
        return Err(Error::Input(
            "constellation CSV does not cover the full message grid".into(),
        ));
    }
    Constellation::new(m1, m2, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> AnalysisReport {
        AnalysisReport {
            power_split: PowerSplitReport {
                p1: 0.78,
                p2: 0.22,
                ratio_db: RatioDb::Finite(5.496),
                dc_offset: -0.003,
            },
            gray_user2: true,
            user1_separable: true,
            ser: SerReport {
                ser1: 0.012,
                ser2: 0.004,
                trials: 1_000_000,
                half_width_95: [2.1e-4, 1.2e-4],
            },
            config: ConfigEcho {
                k1: 1,
                k2: 1,
                n: 1,
                snr1_db: 5.0,
                snr2_db: 5.0,
                power: 1.0,
                seed: 1,
                steps: 20_000,
                batch_size: 1000,
                learning_rate: 0.001,
            },
        }
    }

    #[test]
    fn report_json_round_trip() {
        let report = sample_report();
        let json = report.to_json();
        let back = AnalysisReport::from_json(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn infinite_ratio_survives_json() {
        let mut report = sample_report();
        report.power_split.ratio_db = RatioDb::PosInf;
        let back = AnalysisReport::from_json(&report.to_json()).unwrap();
        assert_eq!(back.power_split.ratio_db, RatioDb::PosInf);

        report.power_split.ratio_db = RatioDb::Undefined;
        let back = AnalysisReport::from_json(&report.to_json()).unwrap();
        assert_eq!(back.power_split.ratio_db, RatioDb::Undefined);
    }

    #[test]
    fn constellation_csv_round_trip() {
        let c = Constellation::new(2, 2, vec![-1.25, -0.4, 0.4, 1.25]).unwrap();
        let csv = constellation_to_csv(&c);
        let back = constellation_from_csv(&csv).unwrap();
        assert_eq!(back, c);
        assert_eq!(constellation_to_csv(&back), csv);
    }

    #[test]
    fn constellation_csv_rejects_gaps() {
        let csv = "s1,s2,x\n0,0,1.0\n1,1,-1.0\n";
        assert!(constellation_from_csv(csv).is_err());
    }
}
