//! Effective settings shared by every subcommand.
//!
//! Each value comes from the first source that sets it: command-line flag,
//! then environment (`MORSE_SEED`, `MORSE_THREADS`), then an optional
//! `key = value` config file, then the built-in default.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;

use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 1;
pub const ENV_SEED: &str = "MORSE_SEED";
pub const ENV_THREADS: &str = "MORSE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Flag,
    Env,
    File,
    Default,
}

/// Arithmetic used for training and inference. Weights are always stored as
/// 32-bit floats; computation is 64-bit only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliConfig {
    pub seed: u64,
    pub seed_source: Source,
    /// Worker threads; `None` lets rayon pick. Never echoed into reports
    /// because results do not depend on it.
    #[serde(skip)]
    pub threads: Option<usize>,
    pub precision: Precision,
    pub verbosity: u8,
    pub config_file: Option<PathBuf>,
}

/// Raw values given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub verbosity: Option<u8>,
    pub config_file: Option<PathBuf>,
}

pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i as u64 + 1, msg: format!("expected key = value, found {line:?}") })?;
        let key = k.trim().to_string();
        if !matches!(key.as_str(), "seed" | "threads" | "precision" | "verbosity") {
            return Err(Error::Parse { line: i as u64 + 1, msg: format!("unknown key {key:?}") });
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(what: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Usage(format!("invalid {what} {s:?}")))
}

impl CliConfig {
    /// Resolves settings with `env` standing in for the process environment.
    pub fn resolve_with(flags: &Flags, env: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let file = match &flags.config_file {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let (seed, seed_source) = if let Some(s) = flags.seed {
            (s, Source::Flag)
        } else if let Some(s) = env(ENV_SEED) {
            (parse_num(ENV_SEED, &s)?, Source::Env)
        } else if let Some(s) = file.get("seed") {
            (parse_num("seed", s)?, Source::File)
        } else {
            (DEFAULT_SEED, Source::Default)
        };
        let threads = match flags.threads {
            Some(t) => Some(t),
            None => match env(ENV_THREADS) {
                Some(s) => Some(parse_num(ENV_THREADS, &s)?),
                None => file.get("threads").map(|s| parse_num("threads", s)).transpose()?,
            },
        };
        if threads == Some(0) {
            return Err(Error::Usage("thread count must be at least 1".into()));
        }
        let precision = match file.get("precision").map(String::as_str) {
            None | Some("f64") => Precision::F64,
            Some(other) => return Err(Error::Usage(format!("unsupported precision {other:?} (only f64)"))),
        };
        let verbosity = match flags.verbosity {
            Some(v) => v,
            None => file.get("verbosity").map(|s| parse_num("verbosity", s)).transpose()?.unwrap_or(0),
        };
        Ok(CliConfig { seed, seed_source, threads, precision, verbosity, config_file: flags.config_file.clone() })
    }

    pub fn resolve(flags: &Flags) -> Result<Self> {
        Self::resolve_with(flags, |k| std::env::var(k).ok())
    }

    /// A rayon pool honouring the thread setting.
    pub fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads.unwrap_or(0))
            .build()
            .map_err(|e| Error::Usage(format!("thread pool: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn env_of(pairs: &'static [(&'static str, &'static str)]) -> impl Fn(&str) -> Option<String> {
        move |k| pairs.iter().find(|(n, _)| *n == k).map(|(_, v)| v.to_string())
    }

    #[test]
    fn precedence() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# settings\nseed = 7\nthreads = 3\nverbosity = 2").unwrap();
        let file = Flags { config_file: Some(f.path().into()), ..Flags::default() };

        let c = CliConfig::resolve_with(&file, env_of(&[])).unwrap();
        assert_eq!((c.seed, c.seed_source, c.threads, c.verbosity), (7, Source::File, Some(3), 2));

        let c = CliConfig::resolve_with(&file, env_of(&[("MORSE_SEED", "8"), ("MORSE_THREADS", "1")])).unwrap();
        assert_eq!((c.seed, c.seed_source, c.threads), (8, Source::Env, Some(1)));

        let flags = Flags { seed: Some(9), threads: Some(2), ..file };
        let c = CliConfig::resolve_with(&flags, env_of(&[("MORSE_SEED", "8")])).unwrap();
        assert_eq!((c.seed, c.seed_source, c.threads), (9, Source::Flag, Some(2)));

        let c = CliConfig::resolve_with(&Flags::default(), env_of(&[])).unwrap();
        assert_eq!((c.seed, c.seed_source, c.threads), (DEFAULT_SEED, Source::Default, None));
    }

    #[test]
    fn bad_values() {
        assert!(CliConfig::resolve_with(&Flags::default(), env_of(&[("MORSE_SEED", "x")])).is_err());
        assert!(CliConfig::resolve_with(&Flags::default(), env_of(&[("MORSE_THREADS", "0")])).is_err());
        assert!(matches!(parse_config_file("seed 3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config_file("\ncolour = red"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn report_echo_omits_threads() {
        let c = CliConfig::resolve_with(&Flags { threads: Some(4), ..Flags::default() }, env_of(&[])).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert!(v.get("threads").is_none());
        assert_eq!(v["seed"], 1);
        assert_eq!(v["precision"], "f64");
    }
}
