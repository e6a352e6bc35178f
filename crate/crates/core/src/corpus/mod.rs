//! Publication records, researcher profiles and the immutable [`Corpus`].

mod ingest;
mod stage;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ingest::{
    read_corpus, read_csv_publications, read_flag_lists, read_jsonl_publications,
    read_peer_reviews, write_flag_list, write_jsonl, write_peer_reviews, InputFormat,
};
pub use stage::{career_stage, CareerStage};

/// Papers with more authors than this are left out of all network work.
pub const MAX_AUTHORS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    ResearchArticle,
    Review,
    Other,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Authorship {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub researcher_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub institution_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "country")]
    pub country_code: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub journal_id: String,
    pub publisher_id: String,
    #[serde(rename = "authors")]
    pub authorships: Vec<Authorship>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cited_pub_ids: Option<Vec<String>>,
}

impl PublicationRecord {
    /// Research articles with at most [`MAX_AUTHORS`] authors.
    pub fn is_eligible(&self) -> bool {
        self.doc_type == DocType::ResearchArticle && self.authorships.len() <= MAX_AUTHORS
    }
}

/// Inclusive range of calendar years.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidConfig(format!(
                "year range {start}..={end} is empty"
            )));
        }
        Ok(YearRange { start, end })
    }

    pub fn single(year: i32) -> Self {
        YearRange {
            start: year,
            end: year,
        }
    }

    /// `len` consecutive years starting at `start`.
    pub fn starting_at(start: i32, len: u32) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidConfig(
                "window length must be positive".into(),
            ));
        }
        YearRange::new(start, start + len as i32 - 1)
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn covers(&self, other: &YearRange) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn years(&self) -> std::ops::RangeInclusive<i32> {
        self.start..=self.end
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..={}", self.start, self.end)
    }
}

/// Dense index of a researcher inside a [`Corpus`].
///
/// Indices follow the lexicographic order of researcher ids, so sorting by
/// index sorts by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ResearcherIdx(pub u32);

impl ResearcherIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense index of a publication inside a [`Corpus`], in pub_id order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PubIdx(pub u32);

impl PubIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResearcherProfile {
    pub researcher_id: String,
    pub first_pub_year: i32,
    pub last_pub_year: i32,
    /// Eligible publications per year.
    pub pubs_by_year: BTreeMap<i32, u32>,
    pub latest_country: Option<String>,
    pub latest_institution: Option<String>,
}

impl ResearcherProfile {
    pub fn eligible_pubs_in(&self, year: i32) -> u32 {
        self.pubs_by_year.get(&year).copied().unwrap_or(0)
    }

    pub fn publication_age(&self, at_year: i32) -> Result<u32> {
        publication_age(self, at_year)
    }

    /// Career stage at `year`, or `None` when not yet active or older than
    /// the stage table allows.
    pub fn stage_at(&self, year: i32) -> Option<CareerStage> {
        let age = self.publication_age(year).ok()?;
        career_stage(age as i64).ok()
    }
}

/// Snapshot publication age at `at_year`.
pub fn publication_age(profile: &ResearcherProfile, at_year: i32) -> Result<u32> {
    if at_year < profile.first_pub_year {
        return Err(Error::NotYetActive {
            first_pub_year: profile.first_pub_year,
            at_year,
        });
    }
    Ok((at_year - profile.first_pub_year) as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagType {
    TorturedPhrase,
    ClayFeet,
    RetractionIntegrity,
    Other,
}

impl FlagType {
    pub fn as_str(self) -> &'static str {
        match self {
            FlagType::TorturedPhrase => "tortured_phrase",
            FlagType::ClayFeet => "clay_feet",
            FlagType::RetractionIntegrity => "retraction_integrity",
            FlagType::Other => "other",
        }
    }
}

impl fmt::Display for FlagType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FlagType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tortured_phrase" => Ok(FlagType::TorturedPhrase),
            "clay_feet" => Ok(FlagType::ClayFeet),
            "retraction_integrity" => Ok(FlagType::RetractionIntegrity),
            "other" => Ok(FlagType::Other),
            other => Err(Error::InvalidConfig(format!("unknown flag type `{other}`"))),
        }
    }
}

/// An externally produced list of problematic publications.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlagList {
    name: String,
    flag_type: FlagType,
    pub_ids: BTreeSet<String>,
}

impl FlagList {
    pub fn new(
        name: impl Into<String>,
        flag_type: FlagType,
        pub_ids: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let name = name.into();
        let pub_ids: BTreeSet<String> = pub_ids.into_iter().collect();
        if pub_ids.is_empty() {
            return Err(Error::InvalidConfig(format!("flag list `{name}` is empty")));
        }
        Ok(FlagList {
            name,
            flag_type,
            pub_ids,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flag_type(&self) -> FlagType {
        self.flag_type
    }

    pub fn pub_ids(&self) -> &BTreeSet<String> {
        &self.pub_ids
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PeerReviewRecord {
    pub researcher_id: String,
    pub year: i32,
    #[serde(default)]
    pub journal_id: Option<String>,
    pub review_count: u64,
}

/// An ingested, immutable publication corpus with derived researcher profiles.
#[derive(Debug, Clone)]
pub struct Corpus {
    publications: Vec<PublicationRecord>,
    resolved: Vec<Vec<ResearcherIdx>>,
    pub_lookup: HashMap<String, PubIdx>,
    profiles: Vec<ResearcherProfile>,
    researcher_lookup: HashMap<String, ResearcherIdx>,
    range: Option<YearRange>,
    by_year: BTreeMap<i32, Vec<PubIdx>>,
}

impl Corpus {
    /// Builds a corpus whose year range is inferred from the records.
    pub fn from_records(records: impl IntoIterator<Item = PublicationRecord>) -> Result<Self> {
        Self::build(records.into_iter().collect(), None)
    }

    /// Builds a corpus and rejects records outside `range`.
    pub fn with_range(
        records: impl IntoIterator<Item = PublicationRecord>,
        range: YearRange,
    ) -> Result<Self> {
        Self::build(records.into_iter().collect(), Some(range))
    }

    fn build(mut publications: Vec<PublicationRecord>, range: Option<YearRange>) -> Result<Self> {
        publications.sort_by(|a, b| a.pub_id.cmp(&b.pub_id));
        for pair in publications.windows(2) {
            if pair[0].pub_id == pair[1].pub_id {
                return Err(Error::DuplicatePublication(pair[0].pub_id.clone()));
            }
        }

        let mut ids = BTreeSet::new();
        for publication in &publications {
            if publication.authorships.is_empty() {
                return Err(Error::NoAuthors(publication.pub_id.clone()));
            }
            if let Some(range) = range {
                if !range.contains(publication.year) {
                    return Err(Error::YearOutOfRange {
                        year: publication.year,
                        range,
                    });
                }
            }
            let mut seen = BTreeSet::new();
            for id in publication
                .authorships
                .iter()
                .filter_map(|a| a.researcher_id.as_deref())
            {
                if !seen.insert(id) {
                    return Err(Error::DuplicateAuthor {
                        pub_id: publication.pub_id.clone(),
                        researcher_id: id.to_string(),
                    });
                }
                ids.insert(id);
            }
        }

        let researcher_ids: Vec<String> = ids.into_iter().map(str::to_string).collect();
        let researcher_lookup: HashMap<String, ResearcherIdx> = researcher_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), ResearcherIdx(i as u32)))
            .collect();

        let mut resolved = Vec::with_capacity(publications.len());
        let mut pub_lookup = HashMap::with_capacity(publications.len());
        let mut by_year: BTreeMap<i32, Vec<PubIdx>> = BTreeMap::new();
        for (i, publication) in publications.iter().enumerate() {
            let idx = PubIdx(i as u32);
            pub_lookup.insert(publication.pub_id.clone(), idx);
            by_year.entry(publication.year).or_default().push(idx);
            resolved.push(
                publication
                    .authorships
                    .iter()
                    .filter_map(|a| a.researcher_id.as_ref())
                    .map(|id| researcher_lookup[id])
                    .collect::<Vec<_>>(),
            );
        }

        // Latest affiliation: most recent publication, ties to the greatest pub_id.
        // Publications are visited in pub_id order, so `>=` on year keeps the
        // greatest pub_id among equal years.
        let mut profiles: Vec<ResearcherProfile> = researcher_ids
            .into_iter()
            .map(|researcher_id| ResearcherProfile {
                researcher_id,
                first_pub_year: i32::MAX,
                last_pub_year: i32::MIN,
                pubs_by_year: BTreeMap::new(),
                latest_country: None,
                latest_institution: None,
            })
            .collect();
        for (publication, authors) in publications.iter().zip(&resolved) {
            let eligible = publication.is_eligible();
            let resolved_authorships = publication
                .authorships
                .iter()
                .filter(|a| a.researcher_id.is_some());
            for (authorship, r) in resolved_authorships.zip(authors) {
                let profile = &mut profiles[r.index()];
                profile.first_pub_year = profile.first_pub_year.min(publication.year);
                if publication.year >= profile.last_pub_year {
                    profile.last_pub_year = publication.year;
                    profile.latest_country = authorship.country_code.clone();
                    profile.latest_institution = authorship.institution_id.clone();
                }
                if eligible {
                    *profile.pubs_by_year.entry(publication.year).or_insert(0) += 1;
                }
            }
        }

        let range = match range {
            Some(r) => Some(r),
            None => match (by_year.keys().next(), by_year.keys().next_back()) {
                (Some(&lo), Some(&hi)) => Some(YearRange { start: lo, end: hi }),
                _ => None,
            },
        };

        Ok(Corpus {
            publications,
            resolved,
            pub_lookup,
            profiles,
            researcher_lookup,
            range,
            by_year,
        })
    }

    pub fn len(&self) -> usize {
        self.publications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    pub fn researcher_count(&self) -> usize {
        self.profiles.len()
    }

    pub fn range(&self) -> Option<YearRange> {
        self.range
    }

    pub fn publications(&self) -> &[PublicationRecord] {
        &self.publications
    }

    pub fn publication(&self, idx: PubIdx) -> &PublicationRecord {
        &self.publications[idx.index()]
    }

    pub fn pub_idx(&self, pub_id: &str) -> Option<PubIdx> {
        self.pub_lookup.get(pub_id).copied()
    }

    /// Resolved authors of a publication, in author order.
    pub fn resolved_authors(&self, idx: PubIdx) -> &[ResearcherIdx] {
        &self.resolved[idx.index()]
    }

    pub fn profiles(&self) -> &[ResearcherProfile] {
        &self.profiles
    }

    pub fn profile(&self, idx: ResearcherIdx) -> &ResearcherProfile {
        &self.profiles[idx.index()]
    }

    pub fn researcher_id(&self, idx: ResearcherIdx) -> &str {
        &self.profiles[idx.index()].researcher_id
    }

    pub fn researcher_idx(&self, id: &str) -> Option<ResearcherIdx> {
        self.researcher_lookup.get(id).copied()
    }

    pub fn researcher_indices(&self) -> impl Iterator<Item = ResearcherIdx> {
        (0..self.profiles.len() as u32).map(ResearcherIdx)
    }

    pub fn stage_at(&self, idx: ResearcherIdx, year: i32) -> Option<CareerStage> {
        self.profile(idx).stage_at(year)
    }

    /// All publications of a year, eligible or not.
    pub fn publications_in(&self, year: i32) -> &[PubIdx] {
        self.by_year.get(&year).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_eligible(&self, idx: PubIdx) -> bool {
        self.publication(idx).is_eligible()
    }

    pub fn eligible_in(&self, year: i32) -> impl Iterator<Item = PubIdx> + '_ {
        self.publications_in(year)
            .iter()
            .copied()
            .filter(move |&p| self.is_eligible(p))
    }

    pub fn eligible_in_window(&self, window: YearRange) -> impl Iterator<Item = PubIdx> + '_ {
        self.by_year
            .range(window.start..=window.end)
            .flat_map(|(_, pubs)| pubs.iter().copied())
            .filter(move |&p| self.is_eligible(p))
    }

    pub fn check_year(&self, year: i32) -> Result<()> {
        let range = self.range.ok_or(Error::EmptyCorpus)?;
        if range.contains(year) {
            Ok(())
        } else {
            Err(Error::YearOutOfRange { year, range })
        }
    }

    pub fn check_window(&self, window: YearRange) -> Result<()> {
        let range = self.range.ok_or(Error::EmptyCorpus)?;
        if range.covers(&window) {
            Ok(())
        } else {
            Err(Error::WindowOutOfRange { window, range })
        }
    }

    /// Researchers with at least one eligible publication in `year`.
    pub fn active_in(&self, year: i32) -> Vec<ResearcherIdx> {
        let mut active: Vec<ResearcherIdx> = self
            .eligible_in(year)
            .flat_map(|p| self.resolved_authors(p).iter().copied())
            .collect();
        active.sort_unstable();
        active.dedup();
        active
    }

    /// Maps researcher indices back to their ids.
    pub fn ids<'a>(&'a self, members: impl IntoIterator<Item = &'a ResearcherIdx>) -> Vec<&'a str> {
        members
            .into_iter()
            .map(|&r| self.researcher_id(r))
            .collect()
    }
}

/// Eligible publication ids of `year`: research articles with at most 20 authors.
pub fn eligible_publications(corpus: &Corpus, year: i32) -> BTreeSet<String> {
    corpus
        .eligible_in(year)
        .map(|p| corpus.publication(p).pub_id.clone())
        .collect()
}
