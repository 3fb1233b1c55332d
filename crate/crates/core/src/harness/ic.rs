//! Initial-condition presets.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

/// Seeded band-limited random field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomBand {
    pub seed: u64,
    /// Amplitudes scale as `|k|^{-decay_exponent}`.
    pub decay_exponent: f64,
    /// Modes with `1 ≤ |k| ≤ band` are filled.
    pub band: i64,
}

impl Default for RandomBand {
    fn default() -> Self {
        Self {
            seed: 0,
            decay_exponent: 2.0,
            band: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition {
    /// `cos x`: transport-steady, decays as `e^{-t} cos x`.
    SteadyMode,
    /// `cos x + cos 2y`.
    TwoMode,
    /// `sin x sin y + cos y`.
    ClassicShear,
    RandomBand(RandomBand),
}

impl InitialCondition {
    pub const NAMES: [&'static str; 4] = ["steady_mode", "two_mode", "classic_shear", "random_band"];

    pub fn name(&self) -> &'static str {
        match self {
            InitialCondition::SteadyMode => "steady_mode",
            InitialCondition::TwoMode => "two_mode",
            InitialCondition::ClassicShear => "classic_shear",
            InitialCondition::RandomBand(_) => "random_band",
        }
    }

    /// Largest `dt` for which the preset is considered safely in the small-step regime.
    pub fn max_dt(&self) -> f64 {
        match self {
            InitialCondition::SteadyMode => 1.0,
            InitialCondition::TwoMode | InitialCondition::ClassicShear => 0.1,
            InitialCondition::RandomBand(_) => 0.05,
        }
    }

    /// Largest `max|k_i|` the preset excites.
    pub fn band(&self) -> i64 {
        match self {
            InitialCondition::SteadyMode | InitialCondition::ClassicShear => 1,
            InitialCondition::TwoMode => 2,
            InitialCondition::RandomBand(r) => r.band,
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<SpectralField> {
        build_ic(self, grid)
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    /// Preset names; `random_band` takes the default seed, decay and band.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steady_mode" => Ok(InitialCondition::SteadyMode),
            "two_mode" => Ok(InitialCondition::TwoMode),
            "classic_shear" => Ok(InitialCondition::ClassicShear),
            "random_band" => Ok(InitialCondition::RandomBand(RandomBand::default())),
            other => Err(Error::Parse(format!(
                "unknown initial condition {other:?}, expected one of {:?}",
                Self::NAMES
            ))),
        }
    }
}

impl Serialize for InitialCondition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            InitialCondition::RandomBand(r) => r.serialize(serializer),
            other => serializer.serialize_str(other.name()),
        }
    }
}

impl<'de> Deserialize<'de> for InitialCondition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct IcVisitor;

        impl<'de> Visitor<'de> for IcVisitor {
            type Value = InitialCondition;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a preset name or {\"seed\", \"decay_exponent\", \"band\"}")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                v.parse().map_err(|e: Error| E::custom(e))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> std::result::Result<Self::Value, A::Error> {
                RandomBand::deserialize(de::value::MapAccessDeserializer::new(map))
                    .map(InitialCondition::RandomBand)
            }
        }

        deserializer.deserialize_any(IcVisitor)
    }
}

fn real_pair(k: (i64, i64), c: f64) -> [((i64, i64), Complex64); 2] {
    let c = Complex64::new(c, 0.0);
    [(k, c), ((-k.0, -k.1), c)]
}

/// Builds the mean-zero spectral field of a preset on `grid`.
pub fn build_ic(ic: &InitialCondition, grid: &Grid) -> Result<SpectralField> {
    let limit = grid.n() as i64 / 4;
    if ic.band() > limit {
        return Err(Error::Band {
            band: ic.band(),
            limit,
        });
    }
    match ic {
        InitialCondition::SteadyMode => SpectralField::from_modes(grid, &real_pair((1, 0), 0.5)),
        InitialCondition::TwoMode => {
            let modes: Vec<_> = real_pair((1, 0), 0.5)
                .into_iter()
                .chain(real_pair((0, 2), 0.5))
                .collect();
            SpectralField::from_modes(grid, &modes)
        }
        InitialCondition::ClassicShear => {
            // sin x sin y = -(e^{i(x+y)} + e^{-i(x+y)} - e^{i(x-y)} - e^{-i(x-y)}) / 4
            let modes: Vec<_> = real_pair((1, 1), -0.25)
                .into_iter()
                .chain(real_pair((1, -1), 0.25))
                .chain(real_pair((0, 1), 0.5))
                .collect();
            SpectralField::from_modes(grid, &modes)
        }
        InitialCondition::RandomBand(spec) => random_band(spec, grid),
    }
}

fn random_band(spec: &RandomBand, grid: &Grid) -> Result<SpectralField> {
    if spec.band < 1 {
        return Err(Error::Validation(format!("random_band needs band >= 1, got {}", spec.band)));
    }
    if !spec.decay_exponent.is_finite() {
        return Err(Error::Validation("random_band decay_exponent must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let band = spec.band;
    let mut modes = Vec::new();
    for k1 in 0..=band {
        for k2 in -band..=band {
            // One representative per ±k pair; the partner is the conjugate.
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            let mag2 = k1 * k1 + k2 * k2;
            if mag2 > band * band {
                continue;
            }
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let amp = (mag2 as f64).sqrt().powf(-spec.decay_exponent);
            let c = Complex64::new(re, im) * amp;
            modes.push(((k1, k2), c));
            modes.push(((-k1, -k2), c.conj()));
        }
    }
    SpectralField::from_modes(grid, &modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{inverse_transform, sobolev_norm};
    use std::f64::consts::PI;

    #[test]
    fn steady_mode_is_cos_x() {
        let g = Grid::new(16).unwrap();
        let f = build_ic(&InitialCondition::SteadyMode, &g).unwrap();
        let s = inverse_transform(&f).unwrap();
        let expected = g.sample(|x, _| x.cos());
        assert!(s.iter().zip(&expected).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn classic_shear_samples_and_norm() {
        let g = Grid::new(32).unwrap();
        let f = build_ic(&InitialCondition::ClassicShear, &g).unwrap();
        let s = inverse_transform(&f).unwrap();
        let expected = g.sample(|x, y| x.sin() * y.sin() + y.cos());
        assert!(s.iter().zip(&expected).all(|(a, b)| (a - b).abs() < 1e-14));
        assert!((sobolev_norm(&f, 0.0) - PI * 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn random_band_is_deterministic_and_real() {
        let g = Grid::new(32).unwrap();
        let ic = InitialCondition::RandomBand(RandomBand {
            seed: 42,
            decay_exponent: 1.5,
            band: 6,
        });
        let a = build_ic(&ic, &g).unwrap();
        let b = build_ic(&ic, &g).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
        assert_eq!(a.zero_mode(), Complex64::default());
        assert!(a.max_mode() <= 6);
        inverse_transform(&a).unwrap();
    }

    #[test]
    fn presets_are_mean_zero_and_band_limited() {
        let g = Grid::new(8).unwrap();
        for name in ["steady_mode", "two_mode", "classic_shear"] {
            let ic: InitialCondition = name.parse().unwrap();
            let f = build_ic(&ic, &g).unwrap();
            assert_eq!(f.zero_mode(), Complex64::default());
            assert!(f.max_mode() <= 2);
        }
    }

    #[test]
    fn band_too_wide_is_rejected() {
        let g = Grid::new(16).unwrap();
        let ic = InitialCondition::RandomBand(RandomBand {
            band: 5,
            ..RandomBand::default()
        });
        assert!(matches!(build_ic(&ic, &g), Err(Error::Band { band: 5, limit: 4 })));
    }

    #[test]
    fn deserializes_names_and_specs() {
        let ic: InitialCondition = serde_json::from_str("\"two_mode\"").unwrap();
        assert_eq!(ic, InitialCondition::TwoMode);
        let ic: InitialCondition =
            serde_json::from_str(r#"{"seed": 7, "decay_exponent": 2.0, "band": 4}"#).unwrap();
        assert!(matches!(ic, InitialCondition::RandomBand(RandomBand { seed: 7, band: 4, .. })));
        assert!(serde_json::from_str::<InitialCondition>(r#"{"seed": 7, "decay_exponent": 2.0, "band": 4, "x": 1}"#).is_err());
        assert!(serde_json::from_str::<InitialCondition>("\"vortex\"").is_err());
    }
}
