//! Frozen regression records: inputs, convention hash, complex values and a tolerance.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::convention_hash;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenRecord {
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub convention_hash: String,
    pub values: Vec<[f64; 2]>,
    pub tolerance: f64,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl GoldenRecord {
    /// Record stamped with the current convention hash.
    pub fn new(
        inputs: BTreeMap<String, serde_json::Value>,
        values: &[Complex64],
        tolerance: f64,
    ) -> Self {
        GoldenRecord {
            inputs,
            convention_hash: convention_hash(),
            values: values.iter().map(|v| [v.re, v.im]).collect(),
            tolerance,
            metadata: BTreeMap::new(),
        }
    }

    pub fn complex_values(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect()
    }

    pub fn encode(&self) -> Result<String> {
        self.validate()?;
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Golden(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn decode(text: &str) -> Result<Self> {
        let rec: GoldenRecord =
            serde_json::from_str(text).map_err(|e| Error::Golden(e.to_string()))?;
        rec.validate()?;
        Ok(rec)
    }

    fn validate(&self) -> Result<()> {
        if self.convention_hash.len() != 64
            || !self.convention_hash.bytes().all(|b| b.is_ascii_hexdigit())
        {
            return Err(Error::Golden(
                "convention hash must be 64 hex digits".into(),
            ));
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(Error::Golden(format!("bad tolerance {}", self.tolerance)));
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Golden("non-finite value".into()));
        }
        Ok(())
    }

    /// Largest deviation of `computed` from the frozen values. Fails on a length
    /// or convention mismatch.
    pub fn max_deviation(&self, computed: &[Complex64]) -> Result<f64> {
        if self.convention_hash != convention_hash() {
            return Err(Error::Golden(
                "record was frozen under a different convention ledger".into(),
            ));
        }
        if computed.len() != self.values.len() {
            return Err(Error::Golden(format!(
                "{} values computed, {} frozen",
                computed.len(),
                self.values.len()
            )));
        }
        Ok(self
            .complex_values()
            .iter()
            .zip(computed)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn check(&self, computed: &[Complex64]) -> Result<f64> {
        let dev = self.max_deviation(computed)?;
        if dev > self.tolerance {
            return Err(Error::Golden(format!(
                "deviation {dev:.3e} exceeds {:.3e}",
                self.tolerance
            )));
        }
        Ok(dev)
    }
}
