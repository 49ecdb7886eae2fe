//! Run reports and CSV formatting.

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Everything a command reports, in output order.
#[derive(Debug, Serialize)]
pub struct RunReport {
    /// The command line as invoked.
    pub command: Vec<String>,
    /// SHA-256 of the canonicalized inputs, hex encoded.
    pub inputs_digest: String,
    pub results: Map<String, Value>,
    pub wall_time_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Collects the canonical input bytes and the results of one command.
#[derive(Debug, Default)]
pub struct Results {
    inputs: Vec<String>,
    values: Map<String, Value>,
    seed: Option<u64>,
}

impl Results {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one input in canonical form; the digest covers all of them
    /// in order.
    pub fn input(&mut self, canonical: impl Into<String>) {
        self.inputs.push(canonical.into());
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for input in &self.inputs {
            hasher.update((input.len() as u64).to_le_bytes());
            hasher.update(input.as_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn into_report(self, command: Vec<String>, wall_time_seconds: f64) -> RunReport {
        RunReport {
            command,
            inputs_digest: self.digest(),
            results: self.values,
            wall_time_seconds,
            seed: self.seed,
        }
    }
}

impl RunReport {
    /// `key: value` lines for terminal output.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.results {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}: {shown}\n"));
        }
        out.push_str(&format!("inputs_digest: {}\n", self.inputs_digest));
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed: {seed}\n"));
        }
        out.push_str(&format!(
            "wall_time_seconds: {:.3}\n",
            self.wall_time_seconds
        ));
        out
    }
}

/// Decimal rendering with nine significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_string()
    } else {
        s
    }
}
