//! Run configuration: a TOML file whose every field has a default, overlaid
//! by command-line flags and environment variables.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use millscope::analysis::{NullModelSpec, PeerReviewSpec};
use millscope::synthgen::SynthConfig;
use millscope::{DetectorParams, YearRange};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Scalar used for every floating-point output.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    /// Publications as `.jsonl` or `.csv`.
    pub corpus: Option<PathBuf>,
    /// `pub_id, flag_type` CSV.
    pub flags: Option<PathBuf>,
    /// `researcher_id, year, journal_id, review_count` CSV.
    pub reviews: Option<PathBuf>,
    /// Ground-truth JSON written by `synth`.
    pub truth: Option<PathBuf>,
    /// Detector parameters as a standalone TOML table; replaces `[detector]`.
    pub params: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlapParams {
    /// Flag-list window; defaults to `cohort_years`.
    pub window: Option<YearRange>,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for OverlapParams {
    fn default() -> Self {
        OverlapParams {
            window: None,
            n_samples: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportParams {
    /// Journals need strictly more eligible papers than this.
    pub journal_min_pubs: usize,
    /// Institutions need strictly more researchers than this.
    pub institution_min_researchers: usize,
}

impl Default for ReportParams {
    fn default() -> Self {
        ReportParams {
            journal_min_pubs: 50,
            institution_min_researchers: 3000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateParams {
    /// Mill researchers need at least this many mill papers in a cohort year
    /// to count towards recall.
    pub min_mill_papers: usize,
}

impl Default for EvaluateParams {
    fn default() -> Self {
        EvaluateParams {
            min_mill_papers: 21,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing)]
    pub inputs: Inputs,
    #[serde(skip_serializing)]
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every available core. Results do not depend on it.
    #[serde(skip_serializing)]
    pub workers: usize,
    pub precision: Precision,
    /// Analysis year for single-year subcommands.
    pub year: Option<i32>,
    /// Year span for `trend`, `evaluate` and publisher reports; defaults to
    /// the corpus range.
    pub years: Option<YearRange>,
    /// Years whose cohorts are pooled by `validate` and `reviews`.
    pub cohort_years: Option<YearRange>,
    pub detector: DetectorParams,
    pub nullmodel: NullModelSpec,
    pub overlap: OverlapParams,
    pub reviews: PeerReviewSpec,
    pub report: ReportParams,
    pub evaluate: EvaluateParams,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Inputs::default(),
            out_dir: PathBuf::from("out"),
            workers: 0,
            precision: Precision::F64,
            year: None,
            years: None,
            cohort_years: None,
            detector: DetectorParams::default(),
            nullmodel: NullModelSpec::default(),
            overlap: OverlapParams::default(),
            reviews: PeerReviewSpec::default(),
            report: ReportParams::default(),
            evaluate: EvaluateParams::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads a config file. Relative input paths stay relative to the
    /// working directory, not the file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_text(path)?;
        let cfg = Self::from_toml(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        cfg.check_ranges()?;
        Ok(cfg)
    }

    /// The config as TOML, including the input and output fields that the
    /// manifest leaves out.
    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct Full<'a> {
            inputs: &'a Inputs,
            out_dir: &'a Path,
            workers: usize,
            #[serde(flatten)]
            rest: &'a RunConfig,
        }
        toml::to_string(&Full {
            inputs: &self.inputs,
            out_dir: &self.out_dir,
            workers: self.workers,
            rest: self,
        })
        .expect("config serialises")
    }

    /// Rejects reversed year ranges, which serde accepts unchecked.
    pub fn check_ranges(&self) -> CliResult<()> {
        let ranges = [
            ("years", self.years),
            ("cohort_years", self.cohort_years),
            ("overlap.window", self.overlap.window),
            ("synth.years", Some(self.synth.years)),
        ];
        for (name, range) in ranges {
            if let Some(r) = range {
                YearRange::new(r.start, r.end)
                    .map_err(|e| CliError::usage(format!("{name}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        self.check_ranges()?;
        self.detector.validate()?;
        self.nullmodel.validate()?;
        if self.overlap.n_samples == 0 {
            return Err(CliError::usage("overlap.n_samples must be positive"));
        }
        if self.evaluate.min_mill_papers == 0 {
            return Err(CliError::usage("evaluate.min_mill_papers must be positive"));
        }
        Ok(())
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    if !path.is_file() {
        return Err(CliError::usage(format!(
            "`{}` does not exist",
            path.display()
        )));
    }
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Parses `2015..2022`, `2015-2022`, `2015:2022` or a single year.
pub fn parse_years(s: &str) -> Result<YearRange, String> {
    let s = s.trim();
    let parts: Vec<&str> = match s.find("..") {
        Some(i) => vec![&s[..i], &s[i + 2..]],
        None => s.splitn(2, [':', '-']).collect(),
    };
    let year = |p: &str| {
        p.trim()
            .parse::<i32>()
            .map_err(|_| format!("bad year `{p}` in `{s}`"))
    };
    let range = match parts.as_slice() {
        [one] => YearRange::single(year(one)?),
        [a, b] => YearRange::new(year(a)?, year(b)?).map_err(|e| e.to_string())?,
        _ => unreachable!("splitn yields at most two parts"),
    };
    Ok(range)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_ranges_parse_in_every_spelling() {
        for s in ["2015..2022", "2015-2022", "2015:2022", " 2015 .. 2022 "] {
            assert_eq!(
                parse_years(s).unwrap(),
                YearRange::new(2015, 2022).unwrap(),
                "{s}"
            );
        }
        assert_eq!(parse_years("2020").unwrap(), YearRange::single(2020));
        assert!(parse_years("2022..2015").is_err());
        assert!(parse_years("x..2015").is_err());
    }

    #[test]
    fn an_empty_file_is_the_default_config() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn full_toml_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.inputs.corpus = Some("c.jsonl".into());
        cfg.year = Some(2021);
        cfg.years = Some(YearRange::new(2015, 2022).unwrap());
        cfg.workers = 3;
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn the_shipped_default_config_matches_the_code() {
        let text = include_str!("../../../configs/default.toml");
        assert_eq!(RunConfig::from_toml(text).unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("colour = 1").is_err());
        assert!(RunConfig::from_toml("[detector]\nrare = 3").is_err());
    }

    #[test]
    fn reversed_ranges_are_usage_errors() {
        let cfg = RunConfig::from_toml("years = { start = 2022, end = 2015 }").unwrap();
        assert!(matches!(cfg.check_ranges(), Err(CliError::Usage(_))));
    }
}
