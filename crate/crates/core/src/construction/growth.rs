use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite truncation `g(1..=N)` of a positive nondecreasing growth sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSequence {
    values: Vec<f64>,
}

impl GrowthSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("growth sequence is empty"));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::config(format!(
                    "growth value g({}) = {v} must be positive and finite",
                    i + 1
                )));
            }
            if i > 0 && v < values[i - 1] {
                return Err(Error::config(format!(
                    "growth sequence is not monotone at index {}: g({}) = {} < g({}) = {}",
                    i + 1,
                    i + 1,
                    v,
                    i,
                    values[i - 1]
                )));
            }
        }
        Ok(GrowthSequence { values })
    }

    /// Whitespace, comma or newline separated values. `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
                if tok.is_empty() {
                    continue;
                }
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::config(format!("growth file: cannot parse `{tok}`")))?;
                values.push(v);
            }
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `g(k)` for `k >= 1`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }
}

/// Built-in growth sequences, all normalized to `g(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthPreset {
    /// `g(k) = k`
    Linear,
    /// `g(k) = √k`
    Sqrt,
    /// `g(k) = log(k+1) / log 2`
    Log,
}

impl GrowthPreset {
    pub fn sequence(self, levels: usize) -> Result<GrowthSequence> {
        let values = (1..=levels)
            .map(|k| {
                let k = k as f64;
                match self {
                    GrowthPreset::Linear => k,
                    GrowthPreset::Sqrt => k.sqrt(),
                    GrowthPreset::Log => (k + 1.0).ln() / std::f64::consts::LN_2,
                }
            })
            .collect();
        GrowthSequence::new(values)
    }

    pub fn name(self) -> &'static str {
        match self {
            GrowthPreset::Linear => "linear",
            GrowthPreset::Sqrt => "sqrt",
            GrowthPreset::Log => "log",
        }
    }
}

impl fmt::Display for GrowthPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GrowthPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(GrowthPreset::Linear),
            "sqrt" => Ok(GrowthPreset::Sqrt),
            "log" => Ok(GrowthPreset::Log),
            _ => Err(Error::config(format!("unknown growth preset `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_start_at_one() {
        for p in [GrowthPreset::Linear, GrowthPreset::Sqrt, GrowthPreset::Log] {
            let g = p.sequence(5).unwrap();
            assert_eq!(g.get(1), 1.0);
            assert!(g.values().windows(2).all(|w| w[1] > w[0]));
        }
        assert_eq!(GrowthPreset::Sqrt.sequence(4).unwrap().get(4), 2.0);
    }

    #[test]
    fn rejects_non_monotone_with_index() {
        let err = GrowthSequence::parse_text("1\n2\n1.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("index 3"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn parses_files() {
        let g = GrowthSequence::parse_text("# header\n1, 2 3\n4 # trailing\n").unwrap();
        assert_eq!(g.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(GrowthSequence::parse_text("1 x").is_err());
        assert!(GrowthSequence::parse_text("").is_err());
        assert!(GrowthSequence::parse_text("0 1").is_err());
    }
}
