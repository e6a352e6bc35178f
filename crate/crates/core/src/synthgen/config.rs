use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::YearRange;
use crate::error::{Error, Result};

/// Complete generator configuration. Every field has a default, so a TOML
/// file only needs the values it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub years: YearRange,
    pub organic: OrganicConfig,
    pub mill: MillConfig,
    pub flags: FlagConfig,
    pub reviews: ReviewConfig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 20240501,
            years: YearRange {
                start: 2010,
                end: 2023,
            },
            organic: OrganicConfig::default(),
            mill: MillConfig::default(),
            flags: FlagConfig::default(),
            reviews: ReviewConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrganicConfig {
    /// Researchers already active in the first year, ages spread evenly.
    pub initial_researchers: usize,
    pub initial_max_age: u32,
    pub initial_labs: usize,
    pub new_researchers_per_year: usize,
    /// A new researcher's PI must be between these publication ages.
    pub mentor_min_age: u32,
    pub mentor_max_age: u32,
    /// Share of a member's papers that include their PI.
    pub mentor_inclusion: f64,
    /// Mean authors per organic paper, lead included.
    pub team_size_mean: f64,
    /// Papers led per year by career stage I..VIII.
    pub papers_per_researcher_by_stage: [f64; 8],
    /// Extra papers a PI leads per active lab member.
    pub pi_papers_per_member: f64,
    /// Spread of the log-normal, mean-one productivity of each researcher.
    pub productivity_sigma: f64,
    /// Yearly probability that a lab member becomes inactive.
    pub dropout_rate: f64,
    /// Yearly probability that a member old enough to mentor opens a lab.
    pub lab_founding_rate: f64,
    pub partners_per_lab: usize,
    /// Share of papers that add a PI from a partner lab.
    pub cross_lab_probability: f64,
    pub consortium_papers_per_year: usize,
    pub consortium_min_labs: usize,
    pub consortium_max_labs: usize,
    pub review_share: f64,
    pub other_share: f64,
    /// Share of papers that become 21-40 author collaborations.
    pub large_collaboration_rate: f64,
    pub unresolved_author_rate: f64,
    pub citations_per_paper: f64,
    /// Young researchers per year who publish a burst of loosely connected
    /// two- and three-author papers outside their lab.
    pub prolific_young_per_year: usize,
    pub prolific_min_papers: usize,
    pub prolific_max_papers: usize,
    pub publishers: usize,
    pub journals: usize,
    pub journals_per_lab: usize,
    pub institutions: usize,
    pub countries: Vec<String>,
}

impl Default for OrganicConfig {
    fn default() -> Self {
        OrganicConfig {
            initial_researchers: 20_000,
            initial_max_age: 34,
            initial_labs: 1_200,
            new_researchers_per_year: 2_100,
            mentor_min_age: 10,
            mentor_max_age: 25,
            mentor_inclusion: 0.7,
            team_size_mean: 2.6,
            papers_per_researcher_by_stage: [0.09, 0.11, 0.12, 0.12, 0.11, 0.1, 0.08, 0.06],
            pi_papers_per_member: 0.7,
            productivity_sigma: 0.0,
            dropout_rate: 0.05,
            lab_founding_rate: 0.01,
            partners_per_lab: 6,
            cross_lab_probability: 0.15,
            consortium_papers_per_year: 200,
            consortium_min_labs: 3,
            consortium_max_labs: 4,
            review_share: 0.05,
            other_share: 0.03,
            large_collaboration_rate: 0.002,
            unresolved_author_rate: 0.02,
            citations_per_paper: 3.0,
            prolific_young_per_year: 50,
            prolific_min_papers: 22,
            prolific_max_papers: 32,
            publishers: 15,
            journals: 200,
            journals_per_lab: 3,
            institutions: 600,
            countries: [
                "US", "CN", "GB", "DE", "IN", "JP", "FR", "IT", "CA", "AU", "ES", "KR", "BR", "NL",
                "SE", "CH", "IR", "PL", "TR", "SA", "EG", "PK", "RU", "MX", "BE", "DK", "AT", "IL",
                "SG", "NG",
            ]
            .map(String::from)
            .to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MillConfig {
    pub start_year: i32,
    /// Customers buying in each year from `start_year`; the last entry repeats.
    pub customers_per_year: Vec<usize>,
    /// Chance that a customer buys again the following year.
    pub repeat_probability: f64,
    /// Share of new customers recruited from existing young researchers.
    pub existing_customer_share: f64,
    pub papers_per_customer_min: usize,
    pub papers_per_customer_extra_mean: f64,
    /// Share of bought slots that go to casual buyers.
    pub casual_share: f64,
    pub casual_papers_max: usize,
    pub authors_per_mill_paper_mean: f64,
    pub foundation_author_count: usize,
    /// Chance that a foundation author is on a mill paper of their journal.
    pub foundation_reuse_probability: f64,
    pub target_publisher: usize,
    /// Relative weights of the mill journals; their count sets the number
    /// of journals used.
    pub journal_weights: Vec<f64>,
    /// Chance that a customer's paper lands in their home journal.
    pub venue_focus: f64,
    pub intra_mill_citation_probability: f64,
    pub citations_per_mill_paper: f64,
    /// Country weights for newly created customers.
    pub customer_countries: BTreeMap<String, f64>,
    pub mill_reviewer_count: usize,
    pub mill_reviews_per_year: f64,
}

impl Default for MillConfig {
    fn default() -> Self {
        MillConfig {
            start_year: 2015,
            customers_per_year: vec![15, 30, 55, 85, 120, 150, 170, 185, 200],
            repeat_probability: 0.3,
            existing_customer_share: 0.1,
            papers_per_customer_min: 21,
            papers_per_customer_extra_mean: 5.0,
            casual_share: 0.25,
            casual_papers_max: 3,
            authors_per_mill_paper_mean: 4.5,
            foundation_author_count: 24,
            foundation_reuse_probability: 0.35,
            target_publisher: 0,
            journal_weights: vec![1.0; 12],
            venue_focus: 0.9,
            intra_mill_citation_probability: 0.8,
            citations_per_mill_paper: 4.0,
            customer_countries: BTreeMap::from([
                ("EG".to_string(), 3.0),
                ("PK".to_string(), 2.0),
                ("SA".to_string(), 2.0),
                ("IN".to_string(), 1.0),
            ]),
            mill_reviewer_count: 150,
            mill_reviews_per_year: 140.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlagConfig {
    /// Share of mill papers placed on the emitted flag list.
    pub fraction: f64,
    pub name: String,
}

impl Default for FlagConfig {
    fn default() -> Self {
        FlagConfig {
            fraction: 0.3,
            name: "synthetic".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReviewConfig {
    pub senior_reviewer_share: f64,
    pub senior_reviews_mean: f64,
    pub young_reviewer_share: f64,
    pub young_reviews_mean: f64,
    /// Organic young researchers who review heavily for three years.
    pub heavy_young_per_year: usize,
    pub heavy_reviews_mean: f64,
}

impl Default for ReviewConfig {
    fn default() -> Self {
        ReviewConfig {
            senior_reviewer_share: 0.3,
            senior_reviews_mean: 10.0,
            young_reviewer_share: 0.1,
            young_reviews_mean: 3.0,
            heavy_young_per_year: 3,
            heavy_reviews_mean: 100.0,
        }
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(msg.to_string()))
    }
}

fn probability(p: f64, name: &str) -> Result<()> {
    check(
        (0.0..=1.0).contains(&p),
        &format!("{name} must lie in [0, 1]"),
    )
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let o = &self.organic;
        let m = &self.mill;
        YearRange::new(self.years.start, self.years.end)?;
        for (p, name) in [
            (o.mentor_inclusion, "organic.mentor_inclusion"),
            (o.dropout_rate, "organic.dropout_rate"),
            (o.lab_founding_rate, "organic.lab_founding_rate"),
            (o.cross_lab_probability, "organic.cross_lab_probability"),
            (o.review_share, "organic.review_share"),
            (o.other_share, "organic.other_share"),
            (
                o.large_collaboration_rate,
                "organic.large_collaboration_rate",
            ),
            (o.unresolved_author_rate, "organic.unresolved_author_rate"),
            (m.repeat_probability, "mill.repeat_probability"),
            (m.existing_customer_share, "mill.existing_customer_share"),
            (m.casual_share, "mill.casual_share"),
            (
                m.foundation_reuse_probability,
                "mill.foundation_reuse_probability",
            ),
            (m.venue_focus, "mill.venue_focus"),
            (
                m.intra_mill_citation_probability,
                "mill.intra_mill_citation_probability",
            ),
            (self.flags.fraction, "flags.fraction"),
            (
                self.reviews.senior_reviewer_share,
                "reviews.senior_reviewer_share",
            ),
            (
                self.reviews.young_reviewer_share,
                "reviews.young_reviewer_share",
            ),
        ] {
            probability(p, name)?;
        }
        check(
            o.review_share + o.other_share <= 1.0,
            "document type shares exceed 1",
        )?;
        check(m.casual_share < 1.0, "mill.casual_share must be below 1")?;
        check(
            o.team_size_mean >= 1.0,
            "organic.team_size_mean must be at least 1",
        )?;
        check(
            o.papers_per_researcher_by_stage.iter().all(|&r| r > 0.0),
            "organic.papers_per_researcher_by_stage must be positive",
        )?;
        check(
            o.productivity_sigma >= 0.0 && o.productivity_sigma.is_finite(),
            "organic.productivity_sigma must be finite and non-negative",
        )?;
        check(
            o.pi_papers_per_member >= 0.0,
            "organic.pi_papers_per_member is negative",
        )?;
        check(
            o.initial_researchers > 0,
            "organic.initial_researchers must be positive",
        )?;
        check(
            o.initial_labs > 0 && o.initial_labs <= o.initial_researchers,
            "organic.initial_labs must lie in [1, initial_researchers]",
        )?;
        check(
            o.initial_max_age <= 100,
            "organic.initial_max_age exceeds 100",
        )?;
        check(
            o.initial_max_age >= o.mentor_min_age && o.mentor_min_age <= o.mentor_max_age,
            "mentor ages are inconsistent",
        )?;
        check(
            o.consortium_min_labs >= 2 && o.consortium_min_labs <= o.consortium_max_labs,
            "consortium lab counts are inconsistent",
        )?;
        check(
            o.prolific_min_papers <= o.prolific_max_papers,
            "prolific paper counts are inconsistent",
        )?;
        check(
            o.publishers > 0 && o.journals >= o.publishers,
            "need at least one journal per publisher",
        )?;
        check(
            o.journals_per_lab > 0 && o.journals_per_lab <= o.journals,
            "organic.journals_per_lab must lie in [1, journals]",
        )?;
        check(o.institutions > 0, "organic.institutions must be positive")?;
        check(
            !o.countries.is_empty(),
            "organic.countries must not be empty",
        )?;
        check(
            o.citations_per_paper >= 0.0,
            "organic.citations_per_paper is negative",
        )?;

        check(
            self.years.contains(m.start_year) && m.start_year > self.years.start,
            "mill.start_year must lie after the first year of the range",
        )?;
        check(
            !m.journal_weights.is_empty(),
            "mill.journal_weights must not be empty",
        )?;
        check(
            m.journal_weights.iter().all(|&w| w >= 0.0)
                && m.journal_weights.iter().sum::<f64>() > 0.0,
            "mill.journal_weights must be non-negative with a positive sum",
        )?;
        let journals_per_publisher = o.journals / o.publishers;
        check(
            m.target_publisher < o.publishers && m.journal_weights.len() <= journals_per_publisher,
            "mill journals must fit inside the target publisher",
        )?;
        check(
            m.authors_per_mill_paper_mean >= 2.0
                && m.authors_per_mill_paper_mean <= crate::corpus::MAX_AUTHORS as f64,
            "mill.authors_per_mill_paper_mean must lie in [2, 20]",
        )?;
        check(
            m.papers_per_customer_min > 0,
            "mill.papers_per_customer_min must be positive",
        )?;
        check(
            m.papers_per_customer_extra_mean >= 0.0,
            "negative mill paper mean",
        )?;
        check(
            m.casual_papers_max > 0,
            "mill.casual_papers_max must be positive",
        )?;
        check(
            m.citations_per_mill_paper >= 0.0,
            "negative mill citation mean",
        )?;
        check(m.mill_reviews_per_year >= 0.0, "negative mill review mean")?;
        check(
            m.customer_countries.values().all(|&w| w >= 0.0),
            "mill.customer_countries weights must be non-negative",
        )?;
        let mills = m.customers_per_year.iter().any(|&c| c > 0);
        check(
            !mills || m.foundation_author_count > 0,
            "a mill needs at least one foundation author",
        )?;
        check(
            m.foundation_author_count == 0 || m.foundation_author_count >= m.journal_weights.len(),
            "every mill journal needs a foundation author",
        )?;
        Ok(())
    }

    /// Customers buying in `year`.
    pub fn customers_in(&self, year: i32) -> usize {
        let m = &self.mill;
        if year < m.start_year {
            return 0;
        }
        let i = (year - m.start_year) as usize;
        m.customers_per_year
            .get(i)
            .or(m.customers_per_year.last())
            .copied()
            .unwrap_or(0)
    }
}
