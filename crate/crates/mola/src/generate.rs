//! Synthetic suitability fields.

use mola_core::nucleation::RegionMask;
use mola_core::SuitabilityField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MolaError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Independent scores drawn uniformly from `[low, high)`.
    UniformRandom {
        #[serde(default)]
        low: f64,
        #[serde(default = "one")]
        high: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Linear ramps: type 0 favored on the left, type 1 on the right, type 2
    /// toward the bottom, further types alternate between the diagonals.
    Gradient {
        #[serde(default)]
        low: f64,
        #[serde(default = "one")]
        high: f64,
    },
    /// Uniform background with a rectangular island where `to` gains
    /// `margin` over its background score.
    TwoRegionIsland {
        /// Score of every type outside the island (and the base inside it).
        background: Vec<f64>,
        from: u8,
        to: u8,
        margin: f64,
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },
    /// `count` Gaussian bumps of width `radius` and height `amplitude`, each
    /// raising a randomly chosen type.
    Blobs {
        count: usize,
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

fn one() -> f64 {
    1.0
}

impl GeneratorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::UniformRandom { .. } => "uniform-random",
            GeneratorSpec::Gradient { .. } => "gradient",
            GeneratorSpec::TwoRegionIsland { .. } => "two-region-island",
            GeneratorSpec::Blobs { .. } => "blobs",
        }
    }

    /// Fills an unset seed, leaving an explicit one alone.
    pub fn with_default_seed(mut self, master: u64) -> Self {
        match &mut self {
            GeneratorSpec::UniformRandom { seed, .. } | GeneratorSpec::Blobs { seed, .. } => {
                seed.get_or_insert(master);
            }
            _ => {}
        }
        self
    }

    /// The island as a mask, for the two-region family.
    pub fn island_mask(&self, rows: usize, cols: usize) -> Option<Result<RegionMask>> {
        match *self {
            GeneratorSpec::TwoRegionIsland { row, col, height, width, .. } => Some(
                RegionMask::rectangle(rows, cols, row, col, height, width)
                    .map_err(|e| MolaError::config("suitability.generator", e.to_string())),
            ),
            _ => None,
        }
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(MolaError::config(format!("suitability.generator.{field}"), "must be finite"))
    }
}

/// Builds the field; deterministic in `spec` (unset seeds count as 0).
pub fn generate_field(spec: &GeneratorSpec, rows: usize, cols: usize, types: usize) -> Result<SuitabilityField> {
    let mut field = SuitabilityField::zeros(rows, cols, types)?;
    match *spec {
        GeneratorSpec::UniformRandom { low, high, seed } => {
            finite("low", low)?;
            finite("high", high)?;
            if high < low {
                return Err(MolaError::config("suitability.generator.high", "must be >= low"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            for i in 0..rows {
                for j in 0..cols {
                    for s in 0..types {
                        let v = if high > low { rng.random_range(low..high) } else { low };
                        field.set(i, j, s, v)?;
                    }
                }
            }
        }
        GeneratorSpec::Gradient { low, high } => {
            finite("low", low)?;
            finite("high", high)?;
            let frac = |k: usize, n: usize| if n > 1 { k as f64 / (n - 1) as f64 } else { 0.5 };
            for i in 0..rows {
                for j in 0..cols {
                    let (x, y) = (frac(j, cols), frac(i, rows));
                    for s in 0..types {
                        let t = match s % 4 {
                            0 => 1.0 - x,
                            1 => x,
                            2 => y,
                            _ => 1.0 - y,
                        };
                        field.set(i, j, s, low + (high - low) * t)?;
                    }
                }
            }
        }
        GeneratorSpec::TwoRegionIsland { ref background, from, to, margin, .. } => {
            if background.len() != types {
                return Err(MolaError::config(
                    "suitability.generator.background",
                    format!("{} scores given for {types} types", background.len()),
                ));
            }
            for (k, &b) in background.iter().enumerate() {
                finite(&format!("background[{k}]"), b)?;
            }
            finite("margin", margin)?;
            if from as usize >= types || to as usize >= types || from == to {
                return Err(MolaError::config("suitability.generator.to", "from/to must be distinct types"));
            }
            let mask = spec.island_mask(rows, cols).expect("island spec")?;
            for i in 0..rows {
                for j in 0..cols {
                    for (s, &b) in background.iter().enumerate() {
                        let bump = if mask.contains(i, j) && s == to as usize { margin } else { 0.0 };
                        field.set(i, j, s, b + bump)?;
                    }
                }
            }
        }
        GeneratorSpec::Blobs { count, radius, amplitude, seed } => {
            finite("amplitude", amplitude)?;
            if !(radius > 0.0) || !radius.is_finite() {
                return Err(MolaError::config("suitability.generator.radius", "must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            let mut scores = vec![0.0; rows * cols * types];
            for _ in 0..count {
                let ci = rng.random_range(0.0..rows as f64);
                let cj = rng.random_range(0.0..cols as f64);
                let s = rng.random_range(0..types);
                for i in 0..rows {
                    for j in 0..cols {
                        let d2 = (i as f64 - ci).powi(2) + (j as f64 - cj).powi(2);
                        scores[(i * cols + j) * types + s] += amplitude * (-d2 / (2.0 * radius * radius)).exp();
                    }
                }
            }
            field = SuitabilityField::from_scores(rows, cols, types, scores)?;
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn island(margin: f64) -> GeneratorSpec {
        GeneratorSpec::TwoRegionIsland {
            background: vec![1.0, 0.0, 0.0],
            from: 0,
            to: 1,
            margin,
            row: 12,
            col: 12,
            height: 6,
            width: 6,
        }
    }

    #[test]
    fn zero_range_uniform_is_all_zero() {
        let spec = GeneratorSpec::UniformRandom { low: 0.0, high: 0.0, seed: Some(3) };
        let f = generate_field(&spec, 5, 4, 3).unwrap();
        assert!(f.scores().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_margin_island_is_background() {
        let f = generate_field(&island(0.0), 30, 30, 3).unwrap();
        for k in 0..900 {
            assert_eq!(f.at(k), [1.0, 0.0, 0.0]);
        }
        let f = generate_field(&island(2.0), 30, 30, 3).unwrap();
        assert_eq!(f.score(12, 12, 1), 2.0);
        assert_eq!(f.score(17, 17, 1), 2.0);
        assert_eq!(f.score(18, 17, 1), 0.0);
        assert_eq!(f.scores().iter().filter(|&&v| v == 2.0).count(), 36);
    }

    #[test]
    fn island_outside_grid_rejected() {
        let spec = GeneratorSpec::TwoRegionIsland {
            background: vec![0.0; 3],
            from: 0,
            to: 1,
            margin: 1.0,
            row: 26,
            col: 0,
            height: 6,
            width: 6,
        };
        assert!(generate_field(&spec, 30, 30, 3).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let specs = [
            GeneratorSpec::UniformRandom { low: -1.0, high: 2.0, seed: Some(9) },
            GeneratorSpec::Gradient { low: 0.0, high: 3.0 },
            GeneratorSpec::Blobs { count: 4, radius: 3.0, amplitude: 2.0, seed: Some(1) },
            island(1.5),
        ];
        for spec in &specs {
            assert_eq!(generate_field(spec, 30, 24, 3).unwrap(), generate_field(spec, 30, 24, 3).unwrap());
        }
        let a = generate_field(&specs[0], 12, 9, 3).unwrap();
        let b = generate_field(&GeneratorSpec::UniformRandom { low: -1.0, high: 2.0, seed: Some(10) }, 12, 9, 3).unwrap();
        assert_ne!(a, b);
        assert!(a.scores().iter().all(|&v| (-1.0..2.0).contains(&v)));
    }

    #[test]
    fn gradient_corners() {
        let f = generate_field(&GeneratorSpec::Gradient { low: 0.0, high: 1.0 }, 3, 5, 3).unwrap();
        assert_eq!(f.score(0, 0, 0), 1.0);
        assert_eq!(f.score(0, 4, 1), 1.0);
        assert_eq!(f.score(2, 0, 2), 1.0);
        assert_eq!(f.score(0, 0, 2), 0.0);
    }

    #[test]
    fn spec_parses_from_toml() {
        let spec: GeneratorSpec = toml::from_str(
            "kind = \"two-region-island\"\nbackground = [1.0, 0.0, 0.0]\nfrom = 0\nto = 1\nmargin = 2.0\nrow = 12\ncol = 12\nheight = 6\nwidth = 6\n",
        )
        .unwrap();
        assert_eq!(spec, island(2.0));
        let spec: GeneratorSpec = toml::from_str("kind = \"uniform-random\"").unwrap();
        assert_eq!(spec, GeneratorSpec::UniformRandom { low: 0.0, high: 1.0, seed: None });
        assert!(toml::from_str::<GeneratorSpec>("kind = \"gradient\"\nslope = 2").is_err());
    }
}
