//! The small `key=value` parameter file shared by the name and
//! transliteration models.
//!
//! ```text
//! # probabilities estimated from running text
//! p_name_in_text=0.002
//! p_TN=0.0005
//! prior.SF+SG=0.15
//! prior.SF+DG=0.80
//! prior.DF+SG=0.01
//! prior.DF+DG=0.04
//! bigram_threshold=5
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{read_to_string, Error, Result};
use crate::lexicon::{DEFAULT_FALLBACK_COST, DEFAULT_LARGE_COST};
use crate::names::NameShape;

pub const DEFAULT_BIGRAM_THRESHOLD: u64 = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub p_name_in_text: Option<f64>,
    pub p_tn: Option<f64>,
    pub type_prior: BTreeMap<NameShape, f64>,
    pub bigram_threshold: u64,
    pub large_cost: f64,
    pub fallback_cost: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            p_name_in_text: None,
            p_tn: None,
            type_prior: BTreeMap::new(),
            bigram_threshold: DEFAULT_BIGRAM_THRESHOLD,
            large_cost: DEFAULT_LARGE_COST,
            fallback_cost: DEFAULT_FALLBACK_COST,
        }
    }
}

impl ModelParams {
    pub fn parse(text: &str, source: &str) -> Result<ModelParams> {
        let mut p = ModelParams::default();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse(source, lineno, "expected key=value"))?;
            let real = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(source, lineno, format!("bad number `{value}`")))
            };
            let prob = || {
                real().and_then(|v| {
                    if v > 0.0 && v <= 1.0 {
                        Ok(v)
                    } else {
                        Err(Error::parse(
                            source,
                            lineno,
                            format!("{key} must be in (0, 1], got {v}"),
                        ))
                    }
                })
            };
            match key {
                "p_name_in_text" => p.p_name_in_text = Some(prob()?),
                "p_TN" => p.p_tn = Some(prob()?),
                "bigram_threshold" => {
                    p.bigram_threshold = value.parse().map_err(|_| {
                        Error::parse(source, lineno, format!("bad integer `{value}`"))
                    })?
                }
                "large_cost" => p.large_cost = real()?,
                "fallback_cost" => p.fallback_cost = real()?,
                k if k.starts_with("prior.") => {
                    let shape: NameShape = k["prior.".len()..]
                        .parse()
                        .map_err(|e: Error| Error::parse(source, lineno, e.to_string()))?;
                    let v = real()?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::parse(
                            source,
                            lineno,
                            format!("{k} must be in [0, 1]"),
                        ));
                    }
                    p.type_prior.insert(shape, v);
                }
                other => {
                    return Err(Error::parse(
                        source,
                        lineno,
                        format!("unknown key `{other}`"),
                    ))
                }
            }
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<ModelParams> {
        ModelParams::parse(&read_to_string(path)?, &path.display().to_string())
    }
}
