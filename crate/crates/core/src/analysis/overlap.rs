use std::collections::BTreeSet;

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use super::{one_degree_set, sample_rng};
use crate::corpus::{Corpus, FlagList, FlagType, PubIdx, ResearcherIdx, YearRange};
use crate::error::{Error, Result};
use crate::graph::{build_graph, CoauthorGraph};
use crate::scalar::{percent, ratio, MeanSd, Real};

/// Author-list profile of a group of papers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PaperStats<T> {
    pub n_papers: usize,
    pub avg_authors: T,
    pub avg_resolved_authors: T,
    /// Papers with at least two distinct author countries.
    pub n_international: usize,
    pub pct_international: T,
    /// Papers with exactly one distinct institution.
    pub n_single_institution: usize,
    pub pct_single_institution: T,
    /// Papers without any author country.
    pub n_no_country: usize,
}

impl<T: Real> PaperStats<T> {
    pub fn of(corpus: &Corpus, papers: &[PubIdx]) -> Self {
        let (mut authors, mut resolved) = (0, 0);
        let (mut international, mut single, mut no_country) = (0, 0, 0);
        for &p in papers {
            let publication = corpus.publication(p);
            authors += publication.authorships.len();
            resolved += corpus.resolved_authors(p).len();
            let countries: BTreeSet<&str> = publication
                .authorships
                .iter()
                .filter_map(|a| a.country_code.as_deref())
                .collect();
            let institutions: BTreeSet<&str> = publication
                .authorships
                .iter()
                .filter_map(|a| a.institution_id.as_deref())
                .collect();
            match countries.len() {
                0 => no_country += 1,
                1 => {}
                _ => international += 1,
            }
            if institutions.len() == 1 {
                single += 1;
            }
        }
        let n = papers.len();
        PaperStats {
            n_papers: n,
            avg_authors: ratio(authors, n),
            avg_resolved_authors: ratio(resolved, n),
            n_international: international,
            pct_international: percent(international, n),
            n_single_institution: single,
            pct_single_institution: percent(single, n),
            n_no_country: no_country,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapReport<T> {
    pub window: YearRange,
    pub flaglist_name: String,
    pub flag_type: FlagType,
    /// Listed ids, before restriction.
    pub n_listed: usize,
    /// Listed eligible papers in the window with a resolved author.
    pub n_flagged_eligible: usize,
    pub n_direct: usize,
    pub n_one_degree: usize,
    pub pct_direct: T,
    pub pct_one_degree: T,
    pub n_cohort: usize,
    pub n_researchers_direct: usize,
    pub n_researchers_connected: usize,
    pub pct_researchers_direct: T,
    pub pct_researchers_connected: T,
    /// Flagged papers reached within one co-authorship hop of the cohort.
    pub matched_stats: PaperStats<T>,
    pub unmatched_stats: PaperStats<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PublicationBaseline<T> {
    pub window: YearRange,
    pub set_size: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub population: usize,
    pub direct: MeanSd<T>,
    pub one_degree: MeanSd<T>,
    pub pct_direct_samples: Vec<T>,
    pub pct_one_degree_samples: Vec<T>,
}

/// Cohort, window graph and one-degree set, shared by every overlap query.
pub struct OverlapContext<'c> {
    corpus: &'c Corpus,
    window: YearRange,
    cohort: BTreeSet<ResearcherIdx>,
    graph: CoauthorGraph,
    one_degree: BTreeSet<ResearcherIdx>,
}

impl<'c> OverlapContext<'c> {
    pub fn new(
        corpus: &'c Corpus,
        cohort: &BTreeSet<ResearcherIdx>,
        window: YearRange,
    ) -> Result<Self> {
        corpus.check_window(window)?;
        let graph = build_graph(corpus, window);
        let one_degree = one_degree_set(&graph, cohort);
        Ok(OverlapContext {
            corpus,
            window,
            cohort: cohort.clone(),
            graph,
            one_degree,
        })
    }

    pub fn one_degree(&self) -> &BTreeSet<ResearcherIdx> {
        &self.one_degree
    }

    /// Eligible papers in the window with at least one resolved author.
    pub fn population(&self) -> Vec<PubIdx> {
        self.corpus
            .eligible_in_window(self.window)
            .filter(|&p| !self.corpus.resolved_authors(p).is_empty())
            .collect()
    }

    /// Restricts `pub_ids` to the population, in corpus order.
    pub fn restrict<'a>(&self, pub_ids: impl IntoIterator<Item = &'a String>) -> Vec<PubIdx> {
        let mut papers: Vec<PubIdx> = pub_ids
            .into_iter()
            .filter_map(|id| self.corpus.pub_idx(id))
            .filter(|&p| {
                let publication = self.corpus.publication(p);
                self.window.contains(publication.year)
                    && publication.is_eligible()
                    && !self.corpus.resolved_authors(p).is_empty()
            })
            .collect();
        papers.sort_unstable();
        papers.dedup();
        papers
    }

    fn touches(&self, p: PubIdx, set: &BTreeSet<ResearcherIdx>) -> bool {
        self.corpus
            .resolved_authors(p)
            .iter()
            .any(|r| set.contains(r))
    }

    pub fn is_direct(&self, p: PubIdx) -> bool {
        self.touches(p, &self.cohort)
    }

    pub fn is_one_degree(&self, p: PubIdx) -> bool {
        self.touches(p, &self.one_degree)
    }

    /// Numbers of papers with a cohort author and with a one-degree author.
    pub fn counts(&self, papers: &[PubIdx]) -> (usize, usize) {
        papers.iter().fold((0, 0), |(d, o), &p| {
            (
                d + self.is_direct(p) as usize,
                o + self.is_one_degree(p) as usize,
            )
        })
    }

    pub fn report<T: Real>(&self, flaglist: &FlagList) -> Result<OverlapReport<T>> {
        let papers = self.restrict(flaglist.pub_ids());
        if papers.is_empty() {
            return Err(Error::EmptyFlagList(flaglist.name().to_string()));
        }
        let (n_direct, n_one_degree) = self.counts(&papers);
        let (matched, unmatched): (Vec<PubIdx>, Vec<PubIdx>) =
            papers.iter().partition(|&&p| self.is_one_degree(p));

        let flagged_authors: BTreeSet<ResearcherIdx> = papers
            .iter()
            .flat_map(|&p| self.corpus.resolved_authors(p).iter().copied())
            .collect();
        let researchers_direct = self
            .cohort
            .iter()
            .filter(|r| flagged_authors.contains(r))
            .count();
        let researchers_connected = self
            .cohort
            .iter()
            .filter(|&&r| {
                flagged_authors.contains(&r)
                    || self
                        .graph
                        .neighbors(r)
                        .iter()
                        .any(|(n, _)| flagged_authors.contains(n))
            })
            .count();

        let n = papers.len();
        Ok(OverlapReport {
            window: self.window,
            flaglist_name: flaglist.name().to_string(),
            flag_type: flaglist.flag_type(),
            n_listed: flaglist.pub_ids().len(),
            n_flagged_eligible: n,
            n_direct,
            n_one_degree,
            pct_direct: percent(n_direct, n),
            pct_one_degree: percent(n_one_degree, n),
            n_cohort: self.cohort.len(),
            n_researchers_direct: researchers_direct,
            n_researchers_connected: researchers_connected,
            pct_researchers_direct: percent(researchers_direct, self.cohort.len()),
            pct_researchers_connected: percent(researchers_connected, self.cohort.len()),
            matched_stats: PaperStats::of(self.corpus, &matched),
            unmatched_stats: PaperStats::of(self.corpus, &unmatched),
        })
    }

    pub fn random_baseline<T: Real>(
        &self,
        set_size: usize,
        n_samples: usize,
        seed: u64,
    ) -> Result<PublicationBaseline<T>> {
        if n_samples == 0 || set_size == 0 {
            return Err(Error::InvalidConfig(
                "set_size and n_samples must be positive".into(),
            ));
        }
        let population = self.population();
        if population.len() < set_size {
            return Err(Error::PoolTooSmall {
                pool: population.len(),
                needed: set_size,
            });
        }
        let pcts: Vec<(T, T)> = (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(seed, i as u64);
                let sample: Vec<PubIdx> = index::sample(&mut rng, population.len(), set_size)
                    .into_iter()
                    .map(|j| population[j])
                    .collect();
                let (d, o) = self.counts(&sample);
                (percent(d, set_size), percent(o, set_size))
            })
            .collect();
        let direct: Vec<T> = pcts.iter().map(|p| p.0).collect();
        let one_degree: Vec<T> = pcts.iter().map(|p| p.1).collect();
        Ok(PublicationBaseline {
            window: self.window,
            set_size,
            n_samples,
            seed,
            population: population.len(),
            direct: MeanSd::of(&direct),
            one_degree: MeanSd::of(&one_degree),
            pct_direct_samples: direct,
            pct_one_degree_samples: one_degree,
        })
    }
}

/// Overlap between a flag list and a (multi-year) cohort over `window`.
pub fn flaglist_overlap<T: Real>(
    corpus: &Corpus,
    cohort: &BTreeSet<ResearcherIdx>,
    flaglist: &FlagList,
    window: YearRange,
) -> Result<OverlapReport<T>> {
    OverlapContext::new(corpus, cohort, window)?.report(flaglist)
}

/// Overlap rates of random eligible publication sets of `set_size` papers.
pub fn random_publication_baseline<T: Real>(
    corpus: &Corpus,
    cohort: &BTreeSet<ResearcherIdx>,
    set_size: usize,
    window: YearRange,
    n_samples: usize,
    seed: u64,
) -> Result<PublicationBaseline<T>> {
    OverlapContext::new(corpus, cohort, window)?.random_baseline(set_size, n_samples, seed)
}

/// Fraction of retraction-listed papers with a cohort author.
pub fn retraction_overlap<T: Real>(
    corpus: &Corpus,
    cohort: &BTreeSet<ResearcherIdx>,
    flaglist: &FlagList,
    window: YearRange,
) -> Result<T> {
    if flaglist.flag_type() != FlagType::RetractionIntegrity {
        return Err(Error::WrongFlagType {
            name: flaglist.name().to_string(),
            expected: FlagType::RetractionIntegrity.to_string(),
            actual: flaglist.flag_type().to_string(),
        });
    }
    let context = OverlapContext::new(corpus, cohort, window)?;
    let papers = context.restrict(flaglist.pub_ids());
    if papers.is_empty() {
        return Err(Error::EmptyFlagList(flaglist.name().to_string()));
    }
    Ok(ratio(context.counts(&papers).0, papers.len()))
}
