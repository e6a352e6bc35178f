//! Suspicious-author filter cascade, candidate co-authorship components and
//! the yearly cohort trend.

mod components;

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CareerStage, Corpus, ResearcherIdx, YearRange};
use crate::error::{Error, Result};
use crate::graph::{build_graph, FrequencyMode, ShapeKey, YearShapes};
use crate::scalar::{percent, ratio, Real};

pub use components::{connected_components, largest_connected_component, DisjointSets};

/// Which filters a researcher passed, as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct FilterMask(u8);

impl FilterMask {
    /// F1: ego career stage is young.
    pub const YOUNG_EGO: FilterMask = FilterMask(1);
    /// F2: shape seen fewer than `rare_shape_max` times.
    pub const RARE_SHAPE: FilterMask = FilterMask(2);
    /// F3: more than `min_pubs_per_year` eligible papers.
    pub const HIGH_VOLUME: FilterMask = FilterMask(4);
    /// F4: a most frequent collaborator is early career.
    pub const YOUNG_TOP_COLLABORATOR: FilterMask = FilterMask(8);
    /// F5: enough of the co-author network is Stage I/II.
    pub const YOUNG_NETWORK: FilterMask = FilterMask(16);
    pub const ALL: FilterMask = FilterMask(31);

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, other: FilterMask) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn passes_all(self) -> bool {
        self.contains(Self::ALL)
    }

    fn set(&mut self, flag: FilterMask, on: bool) {
        if on {
            self.0 |= flag.0;
        }
    }
}

fn young_stages() -> BTreeSet<CareerStage> {
    BTreeSet::from([CareerStage::I, CareerStage::II])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorParams {
    /// Shapes seen at least this often are common.
    pub rare_shape_max: u64,
    /// Eligible papers in the year must strictly exceed this.
    pub min_pubs_per_year: u32,
    pub ego_stages: BTreeSet<CareerStage>,
    pub collaborator_stages: BTreeSet<CareerStage>,
    /// Minimum share of Stage I/II co-authors (inclusive).
    pub young_fraction_min: f64,
    pub lcc_window_years: u32,
    pub frequency_mode: FrequencyMode,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            rare_shape_max: 10,
            min_pubs_per_year: 20,
            ego_stages: young_stages(),
            collaborator_stages: BTreeSet::from([
                CareerStage::I,
                CareerStage::II,
                CareerStage::III,
            ]),
            young_fraction_min: 0.5,
            lcc_window_years: 2,
            frequency_mode: FrequencyMode::PerYear,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.rare_shape_max == 0 {
            return bad("rare_shape_max must be positive");
        }
        if self.min_pubs_per_year == 0 {
            return bad("min_pubs_per_year must be positive");
        }
        if self.lcc_window_years == 0 {
            return bad("lcc_window_years must be positive");
        }
        if !(0.0..=1.0).contains(&self.young_fraction_min) {
            return bad("young_fraction_min must lie in [0, 1]");
        }
        if self.ego_stages.is_empty() || self.collaborator_stages.is_empty() {
            return bad("stage sets must not be empty");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FilterOutcome {
    pub researcher: ResearcherIdx,
    pub mask: FilterMask,
    pub shape_frequency: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuspiciousCohort {
    pub year: i32,
    /// Co-authorship window used for the component graph.
    pub window: YearRange,
    pub candidates: BTreeSet<ResearcherIdx>,
    pub lcc_members: BTreeSet<ResearcherIdx>,
    /// Component sizes of the candidate graph, largest first.
    pub component_sizes: Vec<usize>,
    /// Candidate pairs sharing an eligible paper in the window.
    pub candidate_edges: Vec<(ResearcherIdx, ResearcherIdx)>,
}

impl SuspiciousCohort {
    /// Share of candidates inside the largest component.
    pub fn lcc_share<T: Real>(&self) -> T {
        ratio(self.lcc_members.len(), self.candidates.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrendPoint<T> {
    pub year: i32,
    /// Active Stage I/II researchers (the normalisation base).
    pub stage12_population: usize,
    pub n_candidates: usize,
    pub n_lcc: usize,
    pub pct_candidates: T,
    pub pct_lcc: T,
    /// `n_lcc / n_candidates`.
    pub lcc_share: T,
}

/// Runs the filter cascade over a corpus, caching per-year shapes.
pub struct Detector<'c> {
    corpus: &'c Corpus,
    params: DetectorParams,
    first_year: i32,
    shapes: Vec<OnceLock<Arc<YearShapes>>>,
    pooled: OnceLock<HashMap<ShapeKey, u64>>,
}

impl<'c> Detector<'c> {
    pub fn new(corpus: &'c Corpus, params: DetectorParams) -> Result<Self> {
        params.validate()?;
        let range = corpus.range();
        Ok(Detector {
            corpus,
            params,
            first_year: range.map_or(0, |r| r.start),
            shapes: range
                .map(|r| (0..r.len()).map(|_| OnceLock::new()).collect())
                .unwrap_or_default(),
            pooled: OnceLock::new(),
        })
    }

    pub fn corpus(&self) -> &'c Corpus {
        self.corpus
    }

    pub fn params(&self) -> &DetectorParams {
        &self.params
    }

    pub fn year_shapes(&self, year: i32) -> Result<Arc<YearShapes>> {
        self.corpus.check_year(year)?;
        let slot = &self.shapes[(year - self.first_year) as usize];
        if let Some(shapes) = slot.get() {
            return Ok(shapes.clone());
        }
        let computed = Arc::new(YearShapes::compute(self.corpus, year)?);
        Ok(slot.get_or_init(|| computed).clone())
    }

    fn pooled_frequency(&self) -> Result<&HashMap<ShapeKey, u64>> {
        if let Some(table) = self.pooled.get() {
            return Ok(table);
        }
        let range = self.corpus.range().ok_or(Error::EmptyCorpus)?;
        let mut table = HashMap::new();
        for year in range.years() {
            for (&key, &count) in &self.year_shapes(year)?.frequency {
                *table.entry(key).or_insert(0) += count;
            }
        }
        Ok(self.pooled.get_or_init(|| table))
    }

    /// Frequency of `key` under the configured frequency mode.
    pub fn shape_frequency(&self, shapes: &YearShapes, key: &ShapeKey) -> Result<u64> {
        Ok(match self.params.frequency_mode {
            FrequencyMode::PerYear => shapes.frequency_of(key),
            FrequencyMode::Pooled => self.pooled_frequency()?.get(key).copied().unwrap_or(0),
        })
    }

    /// Filter outcomes for every researcher active in `year`.
    pub fn filter_outcomes(&self, year: i32) -> Result<Vec<FilterOutcome>> {
        let shapes = self.year_shapes(year)?;
        let corpus = self.corpus;
        let p = &self.params;
        let young = young_stages();
        let frequencies: Vec<u64> = shapes
            .shapes
            .iter()
            .map(|s| self.shape_frequency(&shapes, &s.key()))
            .collect::<Result<_>>()?;

        Ok(shapes
            .shapes
            .par_iter()
            .zip(frequencies.par_iter())
            .map(|(shape, &frequency)| {
                let r = shape.researcher;
                let stage_of = |x: ResearcherIdx| corpus.stage_at(x, year);
                let neighbors = shapes.graph.neighbors(r);
                let mut mask = FilterMask::default();

                mask.set(
                    FilterMask::YOUNG_EGO,
                    stage_of(r).is_some_and(|s| p.ego_stages.contains(&s)),
                );
                mask.set(FilterMask::RARE_SHAPE, frequency < p.rare_shape_max);
                mask.set(
                    FilterMask::HIGH_VOLUME,
                    corpus.profile(r).eligible_pubs_in(year) > p.min_pubs_per_year,
                );
                let top = neighbors.iter().map(|&(_, m)| m).max().unwrap_or(0);
                mask.set(
                    FilterMask::YOUNG_TOP_COLLABORATOR,
                    neighbors.iter().any(|&(n, m)| {
                        m == top && stage_of(n).is_some_and(|s| p.collaborator_stages.contains(&s))
                    }),
                );
                let young_count = neighbors
                    .iter()
                    .filter(|&&(n, _)| stage_of(n).is_some_and(|s| young.contains(&s)))
                    .count();
                mask.set(
                    FilterMask::YOUNG_NETWORK,
                    !neighbors.is_empty()
                        && young_count as f64 >= p.young_fraction_min * neighbors.len() as f64,
                );

                FilterOutcome {
                    researcher: r,
                    mask,
                    shape_frequency: frequency,
                }
            })
            .collect())
    }

    pub fn candidates(&self, year: i32) -> Result<BTreeSet<ResearcherIdx>> {
        Ok(self
            .filter_outcomes(year)?
            .into_iter()
            .filter(|o| o.mask.passes_all())
            .map(|o| o.researcher)
            .collect())
    }

    /// Component window starting at `year`, checked against the corpus range.
    pub fn window_for(&self, year: i32) -> Result<YearRange> {
        let window = YearRange::starting_at(year, self.params.lcc_window_years)?;
        self.corpus.check_window(window)?;
        Ok(window)
    }

    pub fn cohort(&self, year: i32) -> Result<SuspiciousCohort> {
        let window = self.window_for(year)?;
        let candidates = self.candidates(year)?;
        Ok(self.cohort_from_candidates(year, window, candidates))
    }

    pub(crate) fn cohort_from_candidates(
        &self,
        year: i32,
        window: YearRange,
        candidates: BTreeSet<ResearcherIdx>,
    ) -> SuspiciousCohort {
        let members: Vec<ResearcherIdx> = candidates.iter().copied().collect();
        let edges = if members.is_empty() {
            Vec::new()
        } else {
            build_graph(self.corpus, window).induced_edges(&members)
        };
        let components = connected_components(&members, &edges);
        SuspiciousCohort {
            year,
            window,
            lcc_members: components
                .first()
                .map(|c| c.iter().copied().collect())
                .unwrap_or_default(),
            component_sizes: components.iter().map(Vec::len).collect(),
            candidates,
            candidate_edges: edges,
        }
    }

    pub fn trend<T: Real>(&self, years: YearRange) -> Result<Vec<TrendPoint<T>>> {
        years
            .years()
            .map(|year| {
                let cohort = self.cohort(year)?;
                let shapes = self.year_shapes(year)?;
                let stage12_population = shapes
                    .graph
                    .nodes()
                    .iter()
                    .filter(|&&r| {
                        self.corpus
                            .stage_at(r, year)
                            .is_some_and(CareerStage::is_young)
                    })
                    .count();
                Ok(TrendPoint {
                    year,
                    stage12_population,
                    n_candidates: cohort.candidates.len(),
                    n_lcc: cohort.lcc_members.len(),
                    pct_candidates: percent(cohort.candidates.len(), stage12_population),
                    pct_lcc: percent(cohort.lcc_members.len(), stage12_population),
                    lcc_share: cohort.lcc_share(),
                })
            })
            .collect()
    }
}

/// Researchers of `year` passing every filter.
pub fn candidate_filter(
    corpus: &Corpus,
    year: i32,
    params: &DetectorParams,
) -> Result<BTreeSet<ResearcherIdx>> {
    Detector::new(corpus, params.clone())?.candidates(year)
}

pub fn suspicious_cohort(
    corpus: &Corpus,
    year: i32,
    params: &DetectorParams,
) -> Result<SuspiciousCohort> {
    Detector::new(corpus, params.clone())?.cohort(year)
}

pub fn cohort_trend<T: Real>(
    corpus: &Corpus,
    years: YearRange,
    params: &DetectorParams,
) -> Result<Vec<TrendPoint<T>>> {
    Detector::new(corpus, params.clone())?.trend(years)
}
