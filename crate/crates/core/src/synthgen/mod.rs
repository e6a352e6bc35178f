//! Labelled synthetic corpora: an organic, mentorship-structured research
//! network with an injected authorship-for-sale operation.
//!
//! Organic science is organised in labs. Every researcher belongs to a lab led
//! by a principal investigator (PI); most papers pair a lab member with the PI
//! and a few labmates, so organic ego networks are dense. Labs also cite, review
//! and occasionally co-author across partner labs and in multi-lab consortia.
//!
//! The mill sells author slots. Each year a set of customers buys a quota of
//! papers; their slots are shuffled into papers of a few target journals
//! together with casual buyers and a small group of foundation authors, so
//! customers collide at random and their ego networks are sparse.
//!
//! Generation consumes a single seeded random stream and is byte-for-byte
//! reproducible.

mod config;
mod world;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, FlagList, PeerReviewRecord, ResearcherIdx};
use crate::detector::SuspiciousCohort;
use crate::error::{Error, Result};
use crate::scalar::{ratio, Real};

pub use config::{FlagConfig, MillConfig, OrganicConfig, ReviewConfig, SynthConfig};

/// Labels known only to the generator.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Customers and foundation authors.
    pub mill_researchers: BTreeSet<String>,
    pub mill_papers: BTreeSet<String>,
    pub foundation_authors: BTreeSet<String>,
    pub mill_reviewers: BTreeSet<String>,
    /// Researchers with a few bought slots but no quota.
    pub casual_buyers: BTreeSet<String>,
    pub customers_by_year: BTreeMap<i32, BTreeSet<String>>,
    /// Organic researchers given one very prolific, loosely connected year.
    pub prolific_organic: BTreeMap<i32, BTreeSet<String>>,
}

impl GroundTruth {
    pub fn is_empty(&self) -> bool {
        self.mill_researchers.is_empty() && self.mill_papers.is_empty()
    }

    pub fn write_json(&self, out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}

pub struct SynthOutput {
    pub corpus: Corpus,
    pub truth: GroundTruth,
    pub flags: Option<FlagList>,
    pub reviews: Vec<PeerReviewRecord>,
}

/// Generates a corpus, its labels, a partial flag list over mill papers and
/// peer-review records.
pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    world::World::new(config).run()
}

/// Number of mill papers per researcher in `year`.
pub fn mill_paper_counts(
    corpus: &Corpus,
    truth: &GroundTruth,
    year: i32,
) -> BTreeMap<ResearcherIdx, usize> {
    let mut counts = BTreeMap::new();
    for &p in corpus.publications_in(year) {
        if truth.mill_papers.contains(&corpus.publication(p).pub_id) {
            for &r in corpus.resolved_authors(p) {
                *counts.entry(r).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Detection quality against the ground truth.
///
/// Precision is taken over the cohort's component members and is 1 for an
/// empty cohort; recall is over mill researchers with at least
/// `min_mill_papers` mill papers in the cohort year and is 1 when none
/// qualify.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation<T> {
    pub years: Vec<i32>,
    pub min_mill_papers: usize,
    pub n_cohort: usize,
    pub n_true_positive: usize,
    pub n_qualifying: usize,
    pub n_recalled: usize,
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

fn check_truth(corpus: &Corpus, truth: &GroundTruth) -> Result<()> {
    if let Some(id) = truth
        .mill_researchers
        .iter()
        .find(|id| corpus.researcher_idx(id).is_none())
    {
        return Err(Error::TruthMismatch(id.clone()));
    }
    if let Some(id) = truth
        .mill_papers
        .iter()
        .find(|id| corpus.pub_idx(id).is_none())
    {
        return Err(Error::TruthMismatch(id.clone()));
    }
    Ok(())
}

pub fn evaluate<T: Real>(
    corpus: &Corpus,
    cohort: &SuspiciousCohort,
    truth: &GroundTruth,
    min_mill_papers: usize,
) -> Result<Evaluation<T>> {
    evaluate_pooled(corpus, std::slice::from_ref(cohort), truth, min_mill_papers)
}

/// Sums counts over several cohort years before forming the ratios.
pub fn evaluate_pooled<T: Real>(
    corpus: &Corpus,
    cohorts: &[SuspiciousCohort],
    truth: &GroundTruth,
    min_mill_papers: usize,
) -> Result<Evaluation<T>> {
    check_truth(corpus, truth)?;
    let mill: BTreeSet<ResearcherIdx> = truth
        .mill_researchers
        .iter()
        .filter_map(|id| corpus.researcher_idx(id))
        .collect();

    let (mut n_cohort, mut tp, mut n_qualifying, mut recalled) = (0, 0, 0, 0);
    for cohort in cohorts {
        n_cohort += cohort.lcc_members.len();
        tp += cohort
            .lcc_members
            .iter()
            .filter(|r| mill.contains(r))
            .count();
        for (r, count) in mill_paper_counts(corpus, truth, cohort.year) {
            if count >= min_mill_papers && mill.contains(&r) {
                n_qualifying += 1;
                recalled += cohort.lcc_members.contains(&r) as usize;
            }
        }
    }

    let precision: T = if n_cohort == 0 {
        T::one()
    } else {
        ratio(tp, n_cohort)
    };
    let recall: T = if n_qualifying == 0 {
        T::one()
    } else {
        ratio(recalled, n_qualifying)
    };
    let f1 = if precision + recall > T::zero() {
        T::from_count(2) * precision * recall / (precision + recall)
    } else {
        T::zero()
    };
    Ok(Evaluation {
        years: cohorts.iter().map(|c| c.year).collect(),
        min_mill_papers,
        n_cohort,
        n_true_positive: tp,
        n_qualifying,
        n_recalled: recalled,
        precision,
        recall,
        f1,
    })
}
