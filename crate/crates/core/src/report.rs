//! Exposure of publishers, journals, countries and institutions to a cohort.
//!
//! A paper is implicated when a cohort member is among its resolved authors.
//! Rows carry raw numerators and denominators next to every percentage.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::analysis::one_degree_set;
use crate::corpus::{Corpus, PubIdx, ResearcherIdx, YearRange};
use crate::error::Result;
use crate::graph::build_graph;
use crate::scalar::{percent, ratio, Real};

pub const UNKNOWN_COUNTRY: &str = "unknown";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Publisher,
    Journal,
    Country,
    Institution,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExposureRow<T> {
    pub entity_kind: EntityKind,
    pub entity_id: String,
    pub year: i32,
    pub total_pubs: usize,
    pub implicated_pubs: usize,
    pub pct_implicated: T,
    pub connected_researchers: Option<usize>,
    pub junior_connected: Option<usize>,
}

fn implicated(corpus: &Corpus, p: PubIdx, cohort: &BTreeSet<ResearcherIdx>) -> bool {
    corpus
        .resolved_authors(p)
        .iter()
        .any(|r| cohort.contains(r))
}

/// Eligible papers of `year` grouped by `key`, as (total, implicated).
fn tally<'c>(
    corpus: &'c Corpus,
    cohort: &BTreeSet<ResearcherIdx>,
    year: i32,
    key: impl Fn(PubIdx) -> &'c str,
) -> BTreeMap<&'c str, (usize, usize)> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for p in corpus.eligible_in(year) {
        let entry = counts.entry(key(p)).or_insert((0, 0));
        entry.0 += 1;
        entry.1 += implicated(corpus, p, cohort) as usize;
    }
    counts
}

fn exposure_rows<T: Real>(
    kind: EntityKind,
    year: i32,
    counts: BTreeMap<&str, (usize, usize)>,
) -> Vec<ExposureRow<T>> {
    counts
        .into_iter()
        .map(|(id, (total, hit))| ExposureRow {
            entity_kind: kind,
            entity_id: id.to_string(),
            year,
            total_pubs: total,
            implicated_pubs: hit,
            pct_implicated: percent(hit, total),
            connected_researchers: None,
            junior_connected: None,
        })
        .collect()
}

/// Per publisher-year exposure for every year of `years` with a cohort.
/// Years without a cohort entry are skipped.
pub fn publisher_profile<T: Real>(
    corpus: &Corpus,
    cohorts: &BTreeMap<i32, BTreeSet<ResearcherIdx>>,
    years: YearRange,
) -> Vec<ExposureRow<T>> {
    years
        .years()
        .filter_map(|year| cohorts.get(&year).map(|c| (year, c)))
        .flat_map(|(year, cohort)| {
            let counts = tally(corpus, cohort, year, |p| {
                &corpus.publication(p).publisher_id
            });
            exposure_rows(EntityKind::Publisher, year, counts)
        })
        .collect()
}

/// Exposure bands in percent: `[0, 2)`, `[2, 4)` and `[4, 100]`.
pub const BAND_LABELS: [&str; 3] = ["0-2", "2-4", "4+"];

/// Band index of `implicated / total`, decided in exact integer arithmetic.
pub fn exposure_band(implicated: usize, total: usize) -> usize {
    let scaled = 100 * implicated;
    if scaled < 2 * total {
        0
    } else if scaled < 4 * total {
        1
    } else {
        2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JournalExposure<T> {
    pub year: i32,
    pub min_pubs: usize,
    /// Journals with more than `min_pubs` eligible papers.
    pub rows: Vec<ExposureRow<T>>,
    pub bands: [usize; 3],
}

pub fn journal_exposure<T: Real>(
    corpus: &Corpus,
    cohort: &BTreeSet<ResearcherIdx>,
    year: i32,
    min_pubs: usize,
) -> JournalExposure<T> {
    let mut counts = tally(corpus, cohort, year, |p| &corpus.publication(p).journal_id);
    counts.retain(|_, &mut (total, _)| total > min_pubs);
    let mut bands = [0; 3];
    for &(total, hit) in counts.values() {
        bands[exposure_band(hit, total)] += 1;
    }
    JournalExposure {
        year,
        min_pubs,
        rows: exposure_rows(EntityKind::Journal, year, counts),
        bands,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountryRow<T> {
    pub country: String,
    pub year: i32,
    pub n_cohort_researchers: usize,
    pub pct_of_cohort: T,
    /// Active Stage I/II researchers whose latest country is this one.
    pub stage12_workforce: usize,
    pub pct_of_stage12_workforce: T,
    /// Eligible papers of the year with an author from this country.
    pub total_articles: usize,
    pub implicated_articles: usize,
    pub pct_articles_implicated: T,
    /// Distinct latest institutions of the country's cohort members.
    pub n_institutions: usize,
}

fn country_of(corpus: &Corpus, r: ResearcherIdx) -> &str {
    corpus
        .profile(r)
        .latest_country
        .as_deref()
        .unwrap_or(UNKNOWN_COUNTRY)
}

/// Countries with at least one cohort member in `year`, keyed by each
/// member's latest country.
pub fn country_profile<T: Real>(
    corpus: &Corpus,
    cohort: &BTreeSet<ResearcherIdx>,
    year: i32,
) -> Vec<CountryRow<T>> {
    let mut members: BTreeMap<&str, Vec<ResearcherIdx>> = BTreeMap::new();
    for &r in cohort {
        members.entry(country_of(corpus, r)).or_default().push(r);
    }
    if members.is_empty() {
        return Vec::new();
    }

    let mut workforce: HashMap<&str, usize> = HashMap::new();
    for r in corpus.active_in(year) {
        if corpus.stage_at(r, year).is_some_and(|s| s.is_young()) {
            *workforce.entry(country_of(corpus, r)).or_insert(0) += 1;
        }
    }

    let mut articles: HashMap<&str, (usize, usize)> = HashMap::new();
    for p in corpus.eligible_in(year) {
        let hit = implicated(corpus, p, cohort) as usize;
        let countries: BTreeSet<&str> = corpus
            .publication(p)
            .authorships
            .iter()
            .map(|a| a.country_code.as_deref().unwrap_or(UNKNOWN_COUNTRY))
            .collect();
        for country in countries {
            let entry = articles.entry(country).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += hit;
        }
    }

    members
        .into_iter()
        .map(|(country, rs)| {
            let institutions: BTreeSet<&str> = rs
                .iter()
                .filter_map(|&r| corpus.profile(r).latest_institution.as_deref())
                .collect();
            let work = workforce.get(country).copied().unwrap_or(0);
            let (total, hit) = articles.get(country).copied().unwrap_or((0, 0));
            CountryRow {
                country: country.to_string(),
                year,
                n_cohort_researchers: rs.len(),
                pct_of_cohort: percent(rs.len(), cohort.len()),
                stage12_workforce: work,
                pct_of_stage12_workforce: percent(rs.len(), work),
                total_articles: total,
                implicated_articles: hit,
                pct_articles_implicated: percent(hit, total),
                n_institutions: institutions.len(),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstitutionLoadRow<T> {
    pub country: String,
    pub year: i32,
    pub n_institutions: usize,
    pub total_researchers: usize,
    pub total_connected: usize,
    pub total_junior_connected: usize,
    pub avg_connected_per_institution: T,
    pub avg_junior_connected: T,
}

/// Institution and country of each researcher's most recent eligible paper
/// in `year`; ties go to the greatest pub id.
pub fn year_affiliations(corpus: &Corpus, year: i32) -> HashMap<ResearcherIdx, (&str, &str)> {
    let mut affiliation = HashMap::new();
    // Eligible papers come in pub_id order; later entries overwrite.
    for p in corpus.eligible_in(year) {
        let publication = corpus.publication(p);
        let resolved = publication
            .authorships
            .iter()
            .filter(|a| a.researcher_id.is_some());
        for (authorship, &r) in resolved.zip(corpus.resolved_authors(p)) {
            if let Some(institution) = authorship.institution_id.as_deref() {
                let country = authorship
                    .country_code
                    .as_deref()
                    .unwrap_or(UNKNOWN_COUNTRY);
                affiliation.insert(r, (institution, country));
            }
        }
    }
    affiliation
}

/// Cohort-connected researchers per qualifying institution, averaged by
/// country. Institutions need more than `min_researchers` affiliated
/// researchers in `year`; an institution's country is its most common
/// affiliation country, ties to the smallest code.
pub fn institution_review_load<T: Real>(
    corpus: &Corpus,
    cohort: &BTreeSet<ResearcherIdx>,
    year: i32,
    min_researchers: usize,
) -> Result<Vec<InstitutionLoadRow<T>>> {
    corpus.check_year(year)?;
    let graph = build_graph(corpus, YearRange::single(year));
    let connected = one_degree_set(&graph, cohort);

    #[derive(Default)]
    struct Load<'c> {
        researchers: usize,
        connected: usize,
        junior: usize,
        countries: BTreeMap<&'c str, usize>,
    }
    let mut loads: BTreeMap<&str, Load> = BTreeMap::new();
    for (r, (institution, country)) in year_affiliations(corpus, year) {
        let load = loads.entry(institution).or_default();
        load.researchers += 1;
        *load.countries.entry(country).or_insert(0) += 1;
        if connected.contains(&r) {
            load.connected += 1;
            if corpus.stage_at(r, year).is_some_and(|s| s.is_young()) {
                load.junior += 1;
            }
        }
    }

    let mut by_country: BTreeMap<&str, (usize, usize, usize, usize)> = BTreeMap::new();
    for load in loads.values().filter(|l| l.researchers > min_researchers) {
        let country = load
            .countries
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&c, _)| c)
            .unwrap_or(UNKNOWN_COUNTRY);
        let entry = by_country.entry(country).or_insert((0, 0, 0, 0));
        entry.0 += 1;
        entry.1 += load.researchers;
        entry.2 += load.connected;
        entry.3 += load.junior;
    }

    Ok(by_country
        .into_iter()
        .map(
            |(country, (n, researchers, conn, junior))| InstitutionLoadRow {
                country: country.to_string(),
                year,
                n_institutions: n,
                total_researchers: researchers,
                total_connected: conn,
                total_junior_connected: junior,
                avg_connected_per_institution: ratio(conn, n),
                avg_junior_connected: ratio(junior, n),
            },
        )
        .collect())
}
