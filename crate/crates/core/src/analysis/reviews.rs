use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::one_degree_set;
use crate::corpus::{CareerStage, Corpus, PeerReviewRecord, ResearcherIdx, YearRange};
use crate::error::{Error, Result};
use crate::graph::build_graph;
use crate::scalar::{percent, ratio, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeerReviewSpec {
    /// Summed reviews over the window must strictly exceed this.
    pub min_reviews: u64,
    pub window_years: u32,
    /// Stages measured at the last window year.
    pub stages: BTreeSet<CareerStage>,
    /// Journals whose reviews per publication exceed this are flagged.
    pub journal_ratio_max: f64,
}

impl Default for PeerReviewSpec {
    fn default() -> Self {
        PeerReviewSpec {
            min_reviews: 250,
            window_years: 3,
            stages: BTreeSet::from([CareerStage::I, CareerStage::II]),
            journal_ratio_max: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JournalReviewRatio<T> {
    pub journal_id: String,
    pub reviews: u64,
    /// Eligible publications of the journal in the window.
    pub publications: usize,
    pub ratio: T,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeerReviewReport<T> {
    pub window: YearRange,
    pub min_reviews: u64,
    /// Researchers with any review record in the window.
    pub n_reviewers: usize,
    /// Stage-gated reviewers above `min_reviews`.
    pub n_heavy: usize,
    pub n_heavy_in_cohort: usize,
    pub pct_heavy_in_cohort: T,
    /// Heavy reviewers outside the cohort who co-authored with a member.
    pub n_heavy_connected: usize,
    pub pct_heavy_connected: T,
    pub reviews_matched: u64,
    pub reviews_unmatched: u64,
    /// Cohort share of the stage-gated population active at window end.
    pub pct_population_in_cohort: T,
    pub heavy_reviewers: Vec<String>,
    pub journals: Vec<JournalReviewRatio<T>>,
}

/// Heavy young reviewers over the `window_years` ending at `end_year` and
/// their proximity to the cohort.
pub fn peer_review_overlap<T: Real>(
    reviews: &[PeerReviewRecord],
    corpus: &Corpus,
    cohort: &BTreeSet<ResearcherIdx>,
    end_year: i32,
    spec: &PeerReviewSpec,
) -> Result<PeerReviewReport<T>> {
    if reviews.is_empty() {
        return Err(Error::EmptyReviews);
    }
    if spec.window_years == 0 {
        return Err(Error::InvalidConfig("window_years must be positive".into()));
    }
    let window = YearRange::new(end_year - spec.window_years as i32 + 1, end_year)?;
    corpus.check_window(window)?;

    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    let mut by_journal: BTreeMap<&str, u64> = BTreeMap::new();
    for record in reviews.iter().filter(|r| window.contains(r.year)) {
        *totals.entry(&record.researcher_id).or_insert(0) += record.review_count;
        if let Some(journal) = &record.journal_id {
            *by_journal.entry(journal).or_insert(0) += record.review_count;
        }
    }

    let heavy: Vec<(ResearcherIdx, u64)> = totals
        .iter()
        .filter(|&(_, &count)| count > spec.min_reviews)
        .filter_map(|(&id, &count)| corpus.researcher_idx(id).map(|r| (r, count)))
        .filter(|&(r, _)| {
            corpus
                .stage_at(r, end_year)
                .is_some_and(|s| spec.stages.contains(&s))
        })
        .collect();

    let graph = build_graph(corpus, window);
    let one_degree = one_degree_set(&graph, cohort);
    let (mut in_cohort, mut connected) = (0, 0);
    let (mut matched, mut unmatched) = (0, 0);
    for &(r, count) in &heavy {
        if cohort.contains(&r) {
            in_cohort += 1;
            matched += count;
        } else if one_degree.contains(&r) {
            connected += 1;
            matched += count;
        } else {
            unmatched += count;
        }
    }

    let population: Vec<ResearcherIdx> = corpus
        .active_in(end_year)
        .into_iter()
        .filter(|&r| {
            corpus
                .stage_at(r, end_year)
                .is_some_and(|s| spec.stages.contains(&s))
        })
        .collect();
    let population_in_cohort = population.iter().filter(|r| cohort.contains(r)).count();

    let mut pubs_by_journal: BTreeMap<&str, usize> = BTreeMap::new();
    for p in corpus.eligible_in_window(window) {
        *pubs_by_journal
            .entry(&corpus.publication(p).journal_id)
            .or_insert(0) += 1;
    }
    let journals = by_journal
        .into_iter()
        .filter_map(|(journal, reviews)| {
            let publications = *pubs_by_journal.get(journal)?;
            let r: T = ratio(reviews as usize, publications);
            Some(JournalReviewRatio {
                journal_id: journal.to_string(),
                reviews,
                publications,
                ratio: r,
                flagged: reviews as f64 > spec.journal_ratio_max * publications as f64,
            })
        })
        .collect();

    Ok(PeerReviewReport {
        window,
        min_reviews: spec.min_reviews,
        n_reviewers: totals.len(),
        n_heavy: heavy.len(),
        n_heavy_in_cohort: in_cohort,
        pct_heavy_in_cohort: percent(in_cohort, heavy.len()),
        n_heavy_connected: connected,
        pct_heavy_connected: percent(connected, heavy.len()),
        reviews_matched: matched,
        reviews_unmatched: unmatched,
        pct_population_in_cohort: percent(population_in_cohort, population.len()),
        heavy_reviewers: heavy
            .iter()
            .map(|&(r, _)| corpus.researcher_id(r).to_string())
            .collect(),
        journals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::paper;
    use crate::corpus::DocType;

    fn review(id: &str, year: i32, count: u64) -> PeerReviewRecord {
        PeerReviewRecord {
            researcher_id: id.into(),
            year,
            journal_id: Some("J1".into()),
            review_count: count,
        }
    }

    fn fixture() -> Corpus {
        let mut old = paper("old", 1990, &["S"]);
        old.doc_type = DocType::Other;
        Corpus::from_records(vec![
            old,
            paper("p1", 2020, &["A", "B"]),
            paper("p2", 2021, &["C"]),
            paper("p3", 2022, &["S", "C"]),
        ])
        .unwrap()
    }

    #[test]
    fn threshold_is_strict_and_stage_gated() {
        let corpus = fixture();
        let cohort = BTreeSet::from([corpus.researcher_idx("A").unwrap()]);
        let reviews = vec![
            review("A", 2020, 100),
            review("A", 2022, 151),
            review("B", 2021, 250),
            review("C", 2019, 400),
            review("S", 2021, 1000),
        ];
        let report: PeerReviewReport<f64> =
            peer_review_overlap(&reviews, &corpus, &cohort, 2022, &PeerReviewSpec::default())
                .unwrap();
        assert_eq!(report.window, YearRange::new(2020, 2022).unwrap());
        assert_eq!(report.heavy_reviewers, vec!["A".to_string()]);
        assert_eq!(report.n_heavy_in_cohort, 1);
        assert_eq!(report.reviews_matched, 251);
        assert_eq!(report.journals.len(), 1);
        assert!(report.journals[0].flagged);
    }

    #[test]
    fn empty_reviews_are_an_error() {
        let corpus = fixture();
        assert!(matches!(
            peer_review_overlap::<f64>(&[], &corpus, &BTreeSet::new(), 2022, &Default::default()),
            Err(Error::EmptyReviews)
        ));
    }
}
