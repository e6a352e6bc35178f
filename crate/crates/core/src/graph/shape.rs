use std::collections::{BTreeMap, HashMap};

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_graph, CoauthorGraph};
use crate::corpus::{Corpus, ResearcherIdx, YearRange};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::Coefficient;

/// Depersonalised shape of an ego network: node and edge counts including
/// the ego. Determines the clustering coefficient exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShapeKey {
    pub total_nodes: u64,
    pub total_edges: u64,
}

impl ShapeKey {
    /// Co-author count `N`.
    pub fn n_co(&self) -> u64 {
        self.total_nodes - 1
    }

    /// Edges among co-authors once the ego's own edges are removed (`E`).
    pub fn e_residual(&self) -> u64 {
        self.total_edges - self.n_co()
    }

    pub fn coefficient(&self) -> Coefficient {
        clustering_coefficient(self.n_co(), self.e_residual())
    }
}

/// `C = 2E / (N(N-1))`, with `C = 0` when `N <= 1`.
pub fn clustering_coefficient(n_co: u64, e_residual: u64) -> Coefficient {
    if n_co <= 1 {
        return Coefficient::zero();
    }
    Coefficient::new(2 * e_residual, n_co * (n_co - 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EgoShape {
    pub researcher: ResearcherIdx,
    pub year: i32,
    pub total_nodes: u64,
    pub total_edges: u64,
    pub n_co: u64,
    pub e_residual: u64,
    #[serde(skip)]
    pub clustering_coefficient: Coefficient,
}

impl EgoShape {
    pub fn key(&self) -> ShapeKey {
        ShapeKey {
            total_nodes: self.total_nodes,
            total_edges: self.total_edges,
        }
    }

    /// Decimal rendering of the exact coefficient.
    pub fn coefficient_as<T: Real>(&self) -> T {
        let c = &self.clustering_coefficient;
        T::from_f64_lossy(c.numer().to_f64().unwrap() / c.denom().to_f64().unwrap())
    }
}

/// Shape of `researcher`'s egocentric network in `graph`.
///
/// Edge multiplicities are ignored; the ego network is the subgraph induced
/// on the researcher and their co-authors.
pub fn ego_shape(
    corpus: &Corpus,
    graph: &CoauthorGraph,
    researcher: ResearcherIdx,
) -> Result<EgoShape> {
    if !graph.contains(researcher) {
        return Err(Error::UnknownResearcher(
            corpus
                .profiles()
                .get(researcher.index())
                .map(|p| p.researcher_id.clone())
                .unwrap_or_else(|| format!("#{}", researcher.0)),
        ));
    }
    Ok(ego_shape_unchecked(graph, researcher))
}

pub(crate) fn ego_shape_unchecked(graph: &CoauthorGraph, ego: ResearcherIdx) -> EgoShape {
    let neighbors = graph.neighbors(ego);
    let mut residual = 0u64;
    for &(u, _) in neighbors {
        for &(v, _) in graph.neighbors(u) {
            if v > u && v != ego && neighbors.binary_search_by_key(&v, |&(r, _)| r).is_ok() {
                residual += 1;
            }
        }
    }
    let n_co = neighbors.len() as u64;
    EgoShape {
        researcher: ego,
        year: graph.window().start,
        total_nodes: n_co + 1,
        total_edges: n_co + residual,
        n_co,
        e_residual: residual,
        clustering_coefficient: clustering_coefficient(n_co, residual),
    }
}

/// Order-of-magnitude frequency bin: `floor(log10(count))`.
pub fn uniqueness_bin(count: u64) -> Result<u32> {
    if count == 0 {
        return Err(Error::ZeroCount);
    }
    Ok(count.ilog10())
}

/// Whether shape frequencies are tallied within the analysis year or pooled
/// over every year of the corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyMode {
    #[default]
    PerYear,
    Pooled,
}

/// Single-year co-authorship graph with every active researcher's shape.
#[derive(Clone, Debug)]
pub struct YearShapes {
    pub year: i32,
    pub graph: CoauthorGraph,
    /// One entry per graph node, in node order.
    pub shapes: Vec<EgoShape>,
    pub frequency: HashMap<ShapeKey, u64>,
}

impl YearShapes {
    pub fn compute(corpus: &Corpus, year: i32) -> Result<Self> {
        corpus.check_year(year)?;
        let graph = build_graph(corpus, YearRange::single(year));
        let shapes: Vec<EgoShape> = graph
            .nodes()
            .par_iter()
            .map(|&r| ego_shape_unchecked(&graph, r))
            .collect();
        let mut frequency = HashMap::new();
        for shape in &shapes {
            *frequency.entry(shape.key()).or_insert(0) += 1;
        }
        Ok(YearShapes {
            year,
            graph,
            shapes,
            frequency,
        })
    }

    pub fn shape_of(&self, r: ResearcherIdx) -> Option<&EgoShape> {
        self.graph
            .nodes()
            .binary_search(&r)
            .ok()
            .map(|i| &self.shapes[i])
    }

    pub fn frequency_of(&self, key: &ShapeKey) -> u64 {
        self.frequency.get(key).copied().unwrap_or(0)
    }

    pub fn sorted_frequency(&self) -> BTreeMap<ShapeKey, u64> {
        self.frequency.iter().map(|(&k, &v)| (k, v)).collect()
    }
}

/// Frequency of each shape among researchers with an eligible paper in `year`.
pub fn shape_frequency_table(corpus: &Corpus, year: i32) -> Result<BTreeMap<ShapeKey, u64>> {
    Ok(YearShapes::compute(corpus, year)?.sorted_frequency())
}

/// Shape frequencies pooled over all author-year pairs in `years`.
pub fn shape_frequency_table_pooled(
    corpus: &Corpus,
    years: YearRange,
) -> Result<BTreeMap<ShapeKey, u64>> {
    corpus.check_window(years)?;
    let mut pooled = BTreeMap::new();
    for year in years.years() {
        for (key, count) in shape_frequency_table(corpus, year)? {
            *pooled.entry(key).or_insert(0) += count;
        }
    }
    Ok(pooled)
}
