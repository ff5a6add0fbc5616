//! Benchmark settings from a plain `key = value` file. Blank lines and
//! lines starting with `#` are skipped. Command-line flags are applied after
//! the file, so they win.
//!
//! Keys: `n`, `d`, `m`, `lambda` (comma-separated lists), `trials`, `seed`,
//! `output`, `oracle_cap`, `parallel_trials`, `knots`, `degree`, `order`,
//! `eps`, `delta`, `w` (list), `rows_per_block`, `boost`, `reweight`,
//! `probability` (`path` or `marginal`).

use std::path::{Path, PathBuf};
use std::str::FromStr;

use kronsketch_core::l1::SampleProbability;

use crate::bench::ExperimentConfig;
use crate::error::{io_err, Error, Result};

/// Optional replacements for fields of an [`ExperimentConfig`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub row_dims: Option<Vec<usize>>,
    pub col_dims: Option<Vec<usize>>,
    pub sketch_rows: Option<Vec<usize>>,
    pub lambdas: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub oracle_cap: Option<usize>,
    pub parallel_trials: Option<bool>,
    pub knots: Option<usize>,
    pub degree: Option<usize>,
    pub order: Option<usize>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub heights: Option<Vec<usize>>,
    pub rows_per_block: Option<usize>,
    pub boost: Option<usize>,
    pub reweight: Option<bool>,
    pub probability: Option<SampleProbability>,
}

fn scalar<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

pub fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| scalar(key, s))
        .collect()
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {v:?}"))),
    }
}

pub fn probability(v: &str) -> Result<SampleProbability> {
    match v {
        "path" => Ok(SampleProbability::Path),
        "marginal" => Ok(SampleProbability::Marginal),
        _ => Err(Error::Config(format!("probability: expected path or marginal, got {v:?}"))),
    }
}

impl ConfigOverrides {
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = ConfigOverrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            o.set(key.trim(), value.trim())?;
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "n" => self.row_dims = Some(parse_list(key, v)?),
            "d" => self.col_dims = Some(parse_list(key, v)?),
            "m" => self.sketch_rows = Some(parse_list(key, v)?),
            "lambda" => self.lambdas = Some(parse_list(key, v)?),
            "trials" => self.trials = Some(scalar(key, v)?),
            "seed" => self.seed = Some(scalar(key, v)?),
            "output" => self.output = Some(PathBuf::from(v)),
            "oracle_cap" => self.oracle_cap = Some(scalar(key, v)?),
            "parallel_trials" => self.parallel_trials = Some(boolean(key, v)?),
            "knots" => self.knots = Some(scalar(key, v)?),
            "degree" => self.degree = Some(scalar(key, v)?),
            "order" => self.order = Some(scalar(key, v)?),
            "eps" => self.eps = Some(scalar(key, v)?),
            "delta" => self.delta = Some(scalar(key, v)?),
            "w" => self.heights = Some(parse_list(key, v)?),
            "rows_per_block" => self.rows_per_block = Some(scalar(key, v)?),
            "boost" => self.boost = Some(scalar(key, v)?),
            "reweight" => self.reweight = Some(boolean(key, v)?),
            "probability" => self.probability = Some(probability(v)?),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        let o = self.clone();
        macro_rules! take {
            ($($src:ident => $dst:ident),* $(,)?) => {
                $(if let Some(v) = o.$src { cfg.$dst = v; })*
            };
        }
        take!(
            row_dims => row_dims,
            col_dims => col_dims,
            sketch_rows => sketch_rows,
            lambdas => lambdas,
            trials => trials,
            seed => seed,
            oracle_cap => oracle_cap,
            parallel_trials => parallel_trials,
            knots => knots,
            degree => degree,
            order => order,
            eps => eps,
            delta => delta,
            reweight => reweight,
            probability => probability,
        );
        if let Some(p) = o.output {
            cfg.output = Some(p);
        }
        if let Some(h) = o.heights {
            cfg.heights = Some(h);
        }
        if let Some(m) = o.rows_per_block {
            cfg.rows_per_block = Some(m);
        }
        if let Some(t) = o.boost {
            cfg.boost = Some(t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::Example;

    #[test]
    fn parses_and_applies() {
        let o = ConfigOverrides::parse("# comment\n\nm = 100, 200\ntrials=3\nreweight = no\nlambda=1,0.5\n").unwrap();
        let mut cfg = ExperimentConfig::preset(Example::Pspline);
        o.apply(&mut cfg);
        assert_eq!(cfg.sketch_rows, vec![100, 200]);
        assert_eq!(cfg.trials, 3);
        assert!(!cfg.reweight);
        assert_eq!(cfg.lambdas, vec![1.0, 0.5]);
        assert_eq!(cfg.knots, 21);
    }

    #[test]
    fn later_overrides_win() {
        let file = ConfigOverrides::parse("trials = 4\nseed = 9").unwrap();
        let flags = ConfigOverrides {
            trials: Some(2),
            ..Default::default()
        };
        let mut cfg = ExperimentConfig::preset(Example::L2);
        file.apply(&mut cfg);
        flags.apply(&mut cfg);
        assert_eq!((cfg.trials, cfg.seed), (2, 9));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigOverrides::parse("trials").is_err());
        assert!(ConfigOverrides::parse("colour = red").is_err());
        assert!(ConfigOverrides::parse("trials = many").is_err());
        assert!(ConfigOverrides::parse("reweight = maybe").is_err());
    }
}
