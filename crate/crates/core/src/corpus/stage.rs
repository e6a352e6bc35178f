use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Approximate career stage from publication age, in five-year bands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CareerStage {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl CareerStage {
    pub const ALL: [CareerStage; 8] = [
        CareerStage::I,
        CareerStage::II,
        CareerStage::III,
        CareerStage::IV,
        CareerStage::V,
        CareerStage::VI,
        CareerStage::VII,
        CareerStage::VIII,
    ];

    pub const MAX_AGE: u32 = 100;

    /// Inclusive publication-age range of the stage.
    pub fn age_range(self) -> (u32, u32) {
        match self {
            CareerStage::VIII => (35, Self::MAX_AGE),
            other => {
                let low = other.ordinal() * 5;
                (low, low + 4)
            }
        }
    }

    pub fn ordinal(self) -> u32 {
        self as u32
    }

    pub fn label(self) -> &'static str {
        match self {
            CareerStage::I => "Student",
            CareerStage::II => "Postdoc",
            CareerStage::III => "Early career",
            CareerStage::IV => "Established",
            CareerStage::V => "Career Building",
            CareerStage::VI => "Peak Production",
            CareerStage::VII => "Advanced",
            CareerStage::VIII => "Senior Researcher",
        }
    }

    pub fn roman(self) -> &'static str {
        match self {
            CareerStage::I => "I",
            CareerStage::II => "II",
            CareerStage::III => "III",
            CareerStage::IV => "IV",
            CareerStage::V => "V",
            CareerStage::VI => "VI",
            CareerStage::VII => "VII",
            CareerStage::VIII => "VIII",
        }
    }

    pub fn is_young(self) -> bool {
        matches!(self, CareerStage::I | CareerStage::II)
    }
}

/// Maps a publication age onto its career stage.
pub fn career_stage(age: i64) -> Result<CareerStage> {
    if !(0..=CareerStage::MAX_AGE as i64).contains(&age) {
        return Err(Error::AgeOutOfRange(age));
    }
    let band = (age / 5).min(7) as usize;
    Ok(CareerStage::ALL[band])
}

impl fmt::Display for CareerStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.roman())
    }
}

impl FromStr for CareerStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CareerStage::ALL
            .into_iter()
            .find(|stage| stage.roman().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown career stage `{s}`")))
    }
}

impl Serialize for CareerStage {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.roman())
    }
}

impl<'de> Deserialize<'de> for CareerStage {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_boundaries() {
        let expected = [
            (CareerStage::I, 0, 4),
            (CareerStage::II, 5, 9),
            (CareerStage::III, 10, 14),
            (CareerStage::IV, 15, 19),
            (CareerStage::V, 20, 24),
            (CareerStage::VI, 25, 29),
            (CareerStage::VII, 30, 34),
            (CareerStage::VIII, 35, 100),
        ];
        for (stage, low, high) in expected {
            assert_eq!(stage.age_range(), (low, high));
        }
        assert_eq!(career_stage(0).unwrap(), CareerStage::I);
        assert_eq!(career_stage(9).unwrap(), CareerStage::II);
        assert_eq!(career_stage(37).unwrap(), CareerStage::VIII);
        assert_eq!(career_stage(100).unwrap(), CareerStage::VIII);
    }

    #[test]
    fn ages_outside_range_fail() {
        assert!(matches!(career_stage(-1), Err(Error::AgeOutOfRange(-1))));
        assert!(matches!(career_stage(101), Err(Error::AgeOutOfRange(101))));
    }

    #[test]
    fn stages_partition_the_age_range() {
        for age in 0..=100u32 {
            let containing: Vec<_> = CareerStage::ALL
                .into_iter()
                .filter(|s| {
                    let (lo, hi) = s.age_range();
                    (lo..=hi).contains(&age)
                })
                .collect();
            assert_eq!(containing.len(), 1, "age {age}");
            assert_eq!(career_stage(age as i64).unwrap(), containing[0]);
        }
    }

    #[test]
    fn roman_round_trip() {
        for stage in CareerStage::ALL {
            assert_eq!(stage.roman().parse::<CareerStage>().unwrap(), stage);
        }
        assert!("IX".parse::<CareerStage>().is_err());
    }
}
