use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SAMPLE_COUNT: usize = 10;
pub const FEATURE_DIM: usize = 4;
pub const FEATURE_BOUND: f64 = 5.0;

/// SplitMix64 generator (Steele, Lea and Flood).
///
/// Pinned so that generated datasets are bit-reproducible across platforms:
///
/// ```text
/// state += 0x9E3779B97F4A7C15
/// z = state
/// z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
/// z = (z ^ (z >> 27)) * 0x94D049BB133111EB
/// return z ^ (z >> 31)
/// ```
///
/// All multiplications wrap modulo 2^64.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// `+1` if the top bit is set, `-1` otherwise.
    pub fn sign(&mut self) -> i32 {
        if self.next_u64() >> 63 == 1 {
            1
        } else {
            -1
        }
    }
}

/// Ten labelled points in `[-5, 5]^4` for the regularized logistic loss.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticDataset {
    pub seed: u64,
    pub features: Vec<[f64; FEATURE_DIM]>,
    pub labels: Vec<i32>,
}

impl LogisticDataset {
    /// Features are drawn row-major as `-5 + 10 u` with `u` from
    /// [`SplitMix64::next_f64`]; the ten labels follow, one draw each via
    /// [`SplitMix64::sign`].
    pub fn generate(seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let features = (0..SAMPLE_COUNT)
            .map(|_| {
                let mut row = [0.0; FEATURE_DIM];
                for entry in row.iter_mut() {
                    *entry = rng.uniform(-FEATURE_BOUND, FEATURE_BOUND);
                }
                row
            })
            .collect();
        let labels = (0..SAMPLE_COUNT).map(|_| rng.sign()).collect();
        Self {
            seed,
            features,
            labels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.len() != SAMPLE_COUNT || self.labels.len() != SAMPLE_COUNT {
            return Err(Error::InvalidDataset(format!(
                "expected {SAMPLE_COUNT} samples, got {} features and {} labels",
                self.features.len(),
                self.labels.len()
            )));
        }
        for (i, row) in self.features.iter().enumerate() {
            if row.iter().any(|z| !(z.abs() <= FEATURE_BOUND)) {
                return Err(Error::InvalidDataset(format!(
                    "feature row {i} leaves [-{FEATURE_BOUND}, {FEATURE_BOUND}]"
                )));
            }
        }
        if let Some(bad) = self.labels.iter().find(|y| y.abs() != 1) {
            return Err(Error::InvalidDataset(format!("label {bad} is not +1 or -1")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dataset: Self = serde_json::from_str(text)?;
        dataset.validate()?;
        Ok(dataset)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
