//! Synthetic banded images standing in for real color maps.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image_io::ImageRgb;

/// Base colors, in the order they are used.
pub const PALETTE: [[u8; 3]; 8] = [
    [236, 226, 198],
    [196, 40, 44],
    [38, 92, 196],
    [64, 150, 64],
    [128, 80, 38],
    [30, 30, 34],
    [240, 200, 64],
    [150, 64, 170],
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub colors: usize,
    pub width: usize,
    pub height: usize,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// The pinned 6-color, 128×128 fixture used by the acceptance suite.
    /// Noise 11 is the smallest integer level that occupies at least 100
    /// pre-partition cells (it gives 104).
    pub const FIXTURE: SyntheticSpec = SyntheticSpec {
        colors: 6,
        width: 128,
        height: 128,
        noise: 11.0,
        seed: 2024,
    };
}

/// Parses `k,w,h,noise,seed`.
impl FromStr for SyntheticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::arg(format!("bad synthetic spec {s:?}, expected k,w,h,noise,seed"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(bad());
        }
        Ok(Self {
            colors: parts[0].parse().map_err(|_| bad())?,
            width: parts[1].parse().map_err(|_| bad())?,
            height: parts[2].parse().map_err(|_| bad())?,
            noise: parts[3].parse().map_err(|_| bad())?,
            seed: parts[4].parse().map_err(|_| bad())?,
        })
    }
}

impl fmt::Display for SyntheticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{}", self.colors, self.width, self.height, self.noise, self.seed)
    }
}

/// Region of column `x`: bands of relative widths 1, 2, 3, 1, 2, 3, ...
fn band_of(x: usize, width: usize, colors: usize) -> usize {
    let weights: Vec<usize> = (0..colors).map(|i| i % 3 + 1).collect();
    let total: usize = weights.iter().sum();
    let pos = x * total / width;
    let mut acc = 0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if pos < acc {
            return i;
        }
    }
    colors - 1
}

/// Vertical color bands with additive Gaussian channel noise.
///
/// The top quarter of the image is striped diagonally across all bands so
/// every color also appears in thin, fragmented regions.
pub fn make_synthetic_image(spec: &SyntheticSpec) -> Result<ImageRgb> {
    if !(2..=PALETTE.len()).contains(&spec.colors) {
        return Err(Error::arg(format!(
            "synthetic image needs 2..={} colors, got {}",
            PALETTE.len(),
            spec.colors
        )));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(Error::arg("noise standard deviation must be >= 0"));
    }
    let normal = Normal::new(0.0, spec.noise).map_err(|e| Error::arg(e.to_string()))?;
    let mut rng = crate::rng_from_seed(spec.seed);
    let mut pixels = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            let region = if y < spec.height / 4 {
                ((x + y) / 4) % spec.colors
            } else {
                band_of(x, spec.width, spec.colors)
            };
            let base = PALETTE[region];
            let px = if spec.noise == 0.0 {
                base
            } else {
                base.map(|c| {
                    let v = f64::from(c) + normal.sample(&mut rng);
                    v.round().clamp(0.0, 255.0) as u8
                })
            };
            pixels.push(px);
        }
    }
    ImageRgb::new(spec.width, spec.height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prepartition::{build_histogram, partition_cells};

    #[test]
    fn noiseless_has_exact_palette() {
        let spec = SyntheticSpec { colors: 6, width: 64, height: 32, noise: 0.0, seed: 1 };
        let img = make_synthetic_image(&spec).unwrap();
        let hist = build_histogram(&img);
        assert_eq!(hist.len(), 6);
        assert!(partition_cells(&hist).unwrap().len() <= 6);
    }

    #[test]
    fn every_color_count_supported() {
        for k in 2..=8 {
            let spec = SyntheticSpec { colors: k, width: 40, height: 40, noise: 0.0, seed: 1 };
            assert_eq!(build_histogram(&make_synthetic_image(&spec).unwrap()).len(), k);
        }
        for k in [0, 1, 9] {
            let spec = SyntheticSpec { colors: k, width: 4, height: 4, noise: 0.0, seed: 1 };
            assert!(make_synthetic_image(&spec).is_err());
        }
    }

    #[test]
    fn fixture_is_rich_and_deterministic() {
        let a = make_synthetic_image(&SyntheticSpec::FIXTURE).unwrap();
        let b = make_synthetic_image(&SyntheticSpec::FIXTURE).unwrap();
        assert_eq!(a, b);
        let cells = partition_cells(&build_histogram(&a)).unwrap();
        assert_eq!(cells.len(), 104);
    }

    #[test]
    fn spec_round_trips() {
        let s: SyntheticSpec = "6,128,128,11,2024".parse().unwrap();
        assert_eq!(s, SyntheticSpec::FIXTURE);
        assert_eq!(s.to_string().parse::<SyntheticSpec>().unwrap(), s);
        assert!("6,128,128".parse::<SyntheticSpec>().is_err());
    }
}
