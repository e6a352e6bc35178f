use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use millscope::analysis::PoolRule;
use millscope::YearRange;

use crate::config::{parse_years, Precision, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "millscope",
    version,
    about = "Co-authorship network fingerprints of authorship-for-sale activity"
)]
pub struct Cli {
    /// Run configuration (TOML); flags and environment override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(
        long = "out",
        global = true,
        env = "MILLSCOPE_OUT_DIR",
        value_name = "DIR"
    )]
    pub out_dir: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "MILLSCOPE_WORKERS")]
    pub workers: Option<usize>,

    /// Floating-point precision of emitted values.
    #[arg(long, global = true, value_enum)]
    pub precision: Option<Precision>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Publication corpus (.jsonl or .csv).
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,

    /// Detector parameters (TOML table), replacing `[detector]`.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Publisher,
    Journal,
    Country,
    Institution,
}

impl ReportKind {
    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Publisher => "publisher",
            ReportKind::Journal => "journal",
            ReportKind::Country => "country",
            ReportKind::Institution => "institution",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PoolSide {
    Below,
    Above,
}

impl From<PoolSide> for PoolRule {
    fn from(side: PoolSide) -> Self {
        match side {
            PoolSide::Below => PoolRule::Below,
            PoolSide::Above => PoolRule::Above,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus and emit researcher profiles.
    Ingest {
        #[command(flatten)]
        input: CorpusArgs,
    },
    /// Egocentric shape of every researcher active in a year.
    Shapes {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        year: Option<i32>,
    },
    /// Filter cascade and largest connected component for a year.
    Detect {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        year: Option<i32>,
    },
    /// Cohort sizes over a span of years.
    Trend {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long, value_parser = parse_years)]
        years: Option<YearRange>,
    },
    /// Density and component baselines from random researcher samples.
    Nullmodel {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        year: Option<i32>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        c_max: Option<f64>,
        #[arg(long, value_enum)]
        pool_rule: Option<PoolSide>,
    },
    /// Overlap of flag lists with the cohort, against random paper sets.
    Validate {
        #[command(flatten)]
        input: CorpusArgs,
        /// `pub_id, flag_type` CSV.
        #[arg(long, value_name = "FILE")]
        flags: Option<PathBuf>,
        #[arg(long, value_parser = parse_years)]
        window: Option<YearRange>,
        #[arg(long, value_parser = parse_years)]
        cohort_years: Option<YearRange>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Heavy peer reviewers and their ties to the cohort.
    Reviews {
        #[command(flatten)]
        input: CorpusArgs,
        /// `researcher_id, year, journal_id, review_count` CSV.
        #[arg(long, value_name = "FILE")]
        reviews: Option<PathBuf>,
        /// Last year of the review window.
        #[arg(long)]
        year: Option<i32>,
        #[arg(long, value_parser = parse_years)]
        cohort_years: Option<YearRange>,
        #[arg(long)]
        min_reviews: Option<u64>,
    },
    /// Exposure by publisher, journal, country or institution.
    Report {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long, value_enum)]
        kind: ReportKind,
        #[arg(long)]
        year: Option<i32>,
        /// Publisher reports only.
        #[arg(long, value_parser = parse_years)]
        years: Option<YearRange>,
        #[arg(long)]
        min_pubs: Option<usize>,
        #[arg(long)]
        min_researchers: Option<usize>,
    },
    /// Generate a labelled synthetic corpus from the `[synth]` table.
    Synth {
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Precision and recall of detected cohorts against ground truth.
    Evaluate {
        #[command(flatten)]
        input: CorpusArgs,
        /// Ground-truth JSON from `synth`.
        #[arg(long, value_name = "FILE")]
        truth: Option<PathBuf>,
        #[arg(long, value_parser = parse_years)]
        years: Option<YearRange>,
        #[arg(long)]
        min_mill_papers: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Shapes { .. } => "shapes",
            Command::Detect { .. } => "detect",
            Command::Trend { .. } => "trend",
            Command::Nullmodel { .. } => "nullmodel",
            Command::Validate { .. } => "validate",
            Command::Reviews { .. } => "reviews",
            Command::Report { .. } => "report",
            Command::Synth { .. } => "synth",
            Command::Evaluate { .. } => "evaluate",
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_some<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

impl Cli {
    /// Applies every flag on top of `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.out_dir, self.out_dir.clone());
        set(&mut cfg.workers, self.workers);
        set(&mut cfg.precision, self.precision);
        let input = match &self.command {
            Command::Ingest { input }
            | Command::Shapes { input, .. }
            | Command::Detect { input, .. }
            | Command::Trend { input, .. }
            | Command::Nullmodel { input, .. }
            | Command::Validate { input, .. }
            | Command::Reviews { input, .. }
            | Command::Report { input, .. }
            | Command::Evaluate { input, .. } => Some(input),
            Command::Synth { .. } => None,
        };
        if let Some(input) = input {
            set_some(&mut cfg.inputs.corpus, input.corpus.clone());
            set_some(&mut cfg.inputs.params, input.params.clone());
        }
        match &self.command {
            Command::Ingest { .. } => {}
            Command::Shapes { year, .. } | Command::Detect { year, .. } => {
                set_some(&mut cfg.year, *year);
            }
            Command::Trend { years, .. } => set_some(&mut cfg.years, *years),
            Command::Nullmodel {
                year,
                samples,
                seed,
                c_max,
                pool_rule,
                ..
            } => {
                set_some(&mut cfg.year, *year);
                set(&mut cfg.nullmodel.n_samples, *samples);
                set(&mut cfg.nullmodel.seed, *seed);
                set(&mut cfg.nullmodel.c_max, *c_max);
                set(&mut cfg.nullmodel.pool_rule, pool_rule.map(Into::into));
            }
            Command::Validate {
                flags,
                window,
                cohort_years,
                samples,
                seed,
                ..
            } => {
                set_some(&mut cfg.inputs.flags, flags.clone());
                set_some(&mut cfg.overlap.window, *window);
                set_some(&mut cfg.cohort_years, *cohort_years);
                set(&mut cfg.overlap.n_samples, *samples);
                set(&mut cfg.overlap.seed, *seed);
            }
            Command::Reviews {
                reviews,
                year,
                cohort_years,
                min_reviews,
                ..
            } => {
                set_some(&mut cfg.inputs.reviews, reviews.clone());
                set_some(&mut cfg.year, *year);
                set_some(&mut cfg.cohort_years, *cohort_years);
                set(&mut cfg.reviews.min_reviews, *min_reviews);
            }
            Command::Report {
                year,
                years,
                min_pubs,
                min_researchers,
                ..
            } => {
                set_some(&mut cfg.year, *year);
                set_some(&mut cfg.years, *years);
                set(&mut cfg.report.journal_min_pubs, *min_pubs);
                set(
                    &mut cfg.report.institution_min_researchers,
                    *min_researchers,
                );
            }
            Command::Synth { seed } => set(&mut cfg.synth.seed, *seed),
            Command::Evaluate {
                truth,
                years,
                min_mill_papers,
                ..
            } => {
                set_some(&mut cfg.inputs.truth, truth.clone());
                set_some(&mut cfg.years, *years);
                set(&mut cfg.evaluate.min_mill_papers, *min_mill_papers);
            }
        }
    }
}
