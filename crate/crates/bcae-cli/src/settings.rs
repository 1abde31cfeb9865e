//! Flag / config-file / default resolution.
//!
//! Precedence: command-line flags override the optional `key=value` config
//! file, which overrides built-in defaults.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bcae::error::{Error, Result};

/// Parsed `key=value` config file. Lines starting with `#` and blank lines
/// are ignored.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "k1",
    "k2",
    "snr1_db",
    "snr2_db",
    "power",
    "steps",
    "batch",
    "lr",
    "seed",
    "arch",
    "out_dir",
    "jobs",
    "snapshot_every",
    "trials",
];

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected key=value, got `{line}`",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "{}:{}: unknown config key `{key}`",
                    path.display(),
                    lineno + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("config key `{key}`: cannot parse `{raw}`"))
            }),
        }
    }
}

/// `flag` beats `file` beats `default`.
pub fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`resolve`] but with no default: the value must come from a flag or
/// the config file.
pub fn resolve_required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T> {
    flag.or(file)
        .ok_or_else(|| Error::Config(format!("missing required setting `{name}`")))
}

pub fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_key_value_lines() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\nk1 = 2\nsnr1_db=7.5\n\nseed=42").unwrap();
        let cfg = FileConfig::load(Some(f.path())).unwrap();
        assert_eq!(cfg.get::<u32>("k1").unwrap(), Some(2));
        assert_eq!(cfg.get::<f64>("snr1_db").unwrap(), Some(7.5));
        assert_eq!(cfg.get::<u64>("seed").unwrap(), Some(42));
        assert_eq!(cfg.get::<u32>("k2").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "bogus=1").unwrap();
        assert!(FileConfig::load(Some(f.path())).is_err());

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "k1=notanumber").unwrap();
        let cfg = FileConfig::load(Some(f.path())).unwrap();
        assert!(cfg.get::<u32>("k1").is_err());
    }

    #[test]
    fn precedence_is_flag_file_default() {
        assert_eq!(resolve(Some(1), Some(2), 3), 1);
        assert_eq!(resolve(None, Some(2), 3), 2);
        assert_eq!(resolve::<u32>(None, None, 3), 3);
    }
}
