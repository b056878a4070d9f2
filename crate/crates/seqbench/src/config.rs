//! Flat `key = value` training configs.
//!
//! Blank lines and `#` comment lines are skipped. Recognized keys:
//!
//! ```text
//! optimizer     adam | adamax | adagrad | adadelta | rmsprop | asgd | sgd
//! lr            positive float        (default: the family's default)
//! weight_decay  non-negative float    (default 0)
//! eps           positive float        (default: the family's default)
//! embed_dim     positive int          (default 32)
//! hidden_size   positive int          (default 64)
//! max_epochs    positive int          (default 100)
//! batch_size    positive int          (default 128)
//! patience      positive int          (default 5)
//! clip_norm     positive float        (default: unset)
//! seed          unsigned int          (default 0)
//! ```
//!
//! Unknown and duplicate keys are rejected with their line number, so typos
//! fail loudly instead of silently training with defaults.

use std::collections::BTreeMap;
use std::path::Path;

use seqbench_core::optim::{Family, OptimizerConfig, TrainConfig};

use crate::error::{Error, Result};

/// Everything a `train` invocation reads from its config file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub optimizer: OptimizerConfig,
    pub train: TrainConfig,
    pub embed_dim: usize,
    pub hidden_size: usize,
}

pub fn load_train_config(path: &Path) -> Result<TrainSettings> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_train_config(&text, path)
}

pub fn parse_train_config(text: &str, path: &Path) -> Result<TrainSettings> {
    let mut pairs: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (offset, raw) in text.lines().enumerate() {
        let lineno = offset + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::at_line(path, lineno, format!("expected key = value, got {line:?}")))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(Error::at_line(path, lineno, format!("empty value for {key:?}")));
        }
        if pairs.insert(key, (lineno, value)).is_some() {
            return Err(Error::at_line(path, lineno, format!("duplicate key {key:?}")));
        }
    }

    const KNOWN: [&str; 11] = [
        "optimizer",
        "lr",
        "weight_decay",
        "eps",
        "embed_dim",
        "hidden_size",
        "max_epochs",
        "batch_size",
        "patience",
        "clip_norm",
        "seed",
    ];
    for (&key, &(lineno, _)) in &pairs {
        if !KNOWN.contains(&key) {
            return Err(Error::at_line(path, lineno, format!("unknown key {key:?}")));
        }
    }

    let field = |key: &str| pairs.get(key).copied();
    let parse_num = |key: &str, parse: fn(&str) -> Option<f64>| -> Result<Option<f64>> {
        match field(key) {
            None => Ok(None),
            Some((lineno, value)) => parse(value)
                .map(Some)
                .ok_or_else(|| Error::at_line(path, lineno, format!("bad value for {key}: {value:?}"))),
        }
    };
    let float = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
    let uint = |s: &str| s.parse::<u64>().ok().map(|v| v as f64);

    let family = match field("optimizer") {
        None => Family::Adam,
        Some((lineno, value)) => {
            Family::parse(value).map_err(|e| Error::at_line(path, lineno, e))?
        }
    };
    let mut optimizer = OptimizerConfig::new(family);
    if let Some(lr) = parse_num("lr", float)? {
        optimizer.lr = lr;
    }
    if let Some(wd) = parse_num("weight_decay", float)? {
        optimizer.weight_decay = wd;
    }
    if let Some(eps) = parse_num("eps", float)? {
        optimizer.eps = eps;
    }
    optimizer.validate()?;

    let mut train = TrainConfig::default();
    if let Some(v) = parse_num("max_epochs", uint)? {
        train.max_epochs = v as usize;
    }
    if let Some(v) = parse_num("batch_size", uint)? {
        train.batch_size = v as usize;
    }
    if let Some(v) = parse_num("patience", uint)? {
        train.patience = v as usize;
    }
    if let Some(v) = parse_num("clip_norm", float)? {
        train.clip_norm = Some(v);
    }
    if let Some(v) = parse_num("seed", uint)? {
        train.seed = v as u64;
    }
    train.validate()?;

    let embed_dim = parse_num("embed_dim", uint)?.map_or(32, |v| v as usize);
    let hidden_size = parse_num("hidden_size", uint)?.map_or(64, |v| v as usize);
    if embed_dim == 0 || hidden_size == 0 {
        return Err(Error::format(path, "embed_dim and hidden_size must be positive"));
    }

    Ok(TrainSettings { optimizer, train, embed_dim, hidden_size })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<TrainSettings> {
        parse_train_config(text, Path::new("test.cfg"))
    }

    #[test]
    fn empty_config_is_all_defaults() {
        let settings = parse("").unwrap();
        assert_eq!(settings.optimizer, OptimizerConfig::new(Family::Adam));
        assert_eq!(settings.train, TrainConfig::default());
        assert_eq!((settings.embed_dim, settings.hidden_size), (32, 64));
    }

    #[test]
    fn full_config_parses() {
        let text = "# training setup\n\
                    optimizer = rmsprop\n\
                    lr = 0.005\n\
                    weight_decay = 1e-6\n\
                    eps = 1e-7\n\
                    embed_dim = 16\n\
                    hidden_size = 24\n\
                    max_epochs = 12\n\
                    batch_size = 32\n\
                    patience = 3\n\
                    clip_norm = 5\n\
                    seed = 9\n";
        let settings = parse(text).unwrap();
        assert_eq!(settings.optimizer.family, Family::Rmsprop);
        assert_eq!(settings.optimizer.lr, 0.005);
        assert_eq!(settings.optimizer.weight_decay, 1e-6);
        assert_eq!(settings.optimizer.eps, 1e-7);
        assert_eq!((settings.embed_dim, settings.hidden_size), (16, 24));
        assert_eq!(settings.train.max_epochs, 12);
        assert_eq!(settings.train.batch_size, 32);
        assert_eq!(settings.train.patience, 3);
        assert_eq!(settings.train.clip_norm, Some(5.0));
        assert_eq!(settings.train.seed, 9);
    }

    #[test]
    fn unset_lr_and_eps_take_family_defaults() {
        let settings = parse("optimizer = adagrad\n").unwrap();
        assert_eq!(settings.optimizer.lr, 0.1);
        assert_eq!(settings.optimizer.eps, 1e-10);
    }

    #[test]
    fn unknown_key_errors_with_line() {
        let err = parse("lr = 0.1\nlearning_rate = 0.2\n").unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("learning_rate"), "{err}");
    }

    #[test]
    fn duplicate_key_errors() {
        let err = parse("lr = 0.1\nlr = 0.2\n").unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn malformed_values_are_rejected() {
        assert!(parse("lr = fast\n").is_err());
        assert!(parse("max_epochs = -3\n").is_err());
        assert!(parse("lr\n").is_err());
        assert!(parse("clip_norm = inf\n").is_err());
    }
}
