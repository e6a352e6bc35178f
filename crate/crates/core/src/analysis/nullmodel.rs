use std::collections::BTreeSet;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample_rng;
use crate::corpus::{Corpus, ResearcherIdx};
use crate::detector::{largest_connected_component, SuspiciousCohort};
use crate::error::{Error, Result};
use crate::graph::{build_graph, CoauthorGraph, YearShapes};
use crate::scalar::{ratio, MeanSd, Real};

/// `2m / (n(n-1))` with multiplicities collapsed.
pub fn graph_density<T: Real>(graph: &CoauthorGraph) -> Result<T> {
    density(graph.node_count(), graph.edge_count())
}

fn density<T: Real>(nodes: usize, edges: usize) -> Result<T> {
    if nodes < 2 {
        return Err(Error::TooFewNodes(nodes));
    }
    Ok(ratio(2 * edges, nodes * (nodes - 1)))
}

/// Which side of `c_max` the sampling pool is drawn from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolRule {
    #[default]
    Below,
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NullModelSpec {
    pub c_max: f64,
    /// Eligible papers in the cohort year must strictly exceed this.
    pub min_pubs: u32,
    pub pool_rule: PoolRule,
    pub n_samples: usize,
    pub seed: u64,
    /// Drop cohort candidates from the pool.
    pub exclude_cohort: bool,
}

impl Default for NullModelSpec {
    fn default() -> Self {
        NullModelSpec {
            c_max: 0.4,
            min_pubs: 20,
            pool_rule: PoolRule::Below,
            n_samples: 190,
            seed: 0,
            exclude_cohort: true,
        }
    }
}

impl NullModelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.c_max) {
            return Err(Error::InvalidConfig("c_max must lie in [0, 1]".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleMetrics<T> {
    pub nodes: usize,
    pub edges: usize,
    pub lcc_size: usize,
    pub density: T,
    /// `lcc_size / nodes`.
    pub lcc_ratio: T,
}

/// Density and largest-component ratio of the subgraph of `graph` induced on
/// `members` (sorted, deduplicated). Members absent from `graph` are isolated.
pub fn sample_metrics<T: Real>(
    graph: &CoauthorGraph,
    members: &[ResearcherIdx],
) -> Result<SampleMetrics<T>> {
    let edges = graph.induced_edges(members);
    let lcc = largest_connected_component(members, &edges);
    Ok(SampleMetrics {
        nodes: members.len(),
        edges: edges.len(),
        lcc_size: lcc.len(),
        density: density(members.len(), edges.len())?,
        lcc_ratio: ratio(lcc.len(), members.len()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NullModelResult<T> {
    pub year: i32,
    pub sample_size: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub pool_size: usize,
    pub densities: Vec<T>,
    pub lcc_ratios: Vec<T>,
    pub density: MeanSd<T>,
    pub lcc_ratio: MeanSd<T>,
    pub observed_density: T,
    pub observed_lcc_ratio: T,
}

/// Researchers active in the shapes' year whose coefficient falls on the
/// configured side of `c_max` and who exceed `min_pubs` eligible papers.
pub fn baseline_pool(
    corpus: &Corpus,
    shapes: &YearShapes,
    cohort: &SuspiciousCohort,
    spec: &NullModelSpec,
) -> Vec<ResearcherIdx> {
    shapes
        .shapes
        .iter()
        .filter(|s| {
            let c: f64 = s.coefficient_as();
            match spec.pool_rule {
                PoolRule::Below => c < spec.c_max,
                PoolRule::Above => c > spec.c_max,
            }
        })
        .map(|s| s.researcher)
        .filter(|&r| corpus.profile(r).eligible_pubs_in(shapes.year) > spec.min_pubs)
        .filter(|r| !(spec.exclude_cohort && cohort.candidates.contains(r)))
        .collect()
}

/// Compares the cohort's component graph with random same-size samples from
/// the baseline pool.
pub fn null_density_baseline<T: Real>(
    corpus: &Corpus,
    cohort: &SuspiciousCohort,
    spec: &NullModelSpec,
) -> Result<NullModelResult<T>> {
    spec.validate()?;
    let shapes = YearShapes::compute(corpus, cohort.year)?;
    let pool = baseline_pool(corpus, &shapes, cohort, spec);
    null_density_from_pool(corpus, cohort, &pool, spec)
}

/// As [`null_density_baseline`] with an explicit pool.
pub fn null_density_from_pool<T: Real>(
    corpus: &Corpus,
    cohort: &SuspiciousCohort,
    pool: &[ResearcherIdx],
    spec: &NullModelSpec,
) -> Result<NullModelResult<T>> {
    spec.validate()?;
    let members: Vec<ResearcherIdx> = cohort.candidates.iter().copied().collect();
    let k = members.len();
    let observed_density = density::<T>(k, cohort.candidate_edges.len())?;
    let observed_lcc_ratio = ratio(cohort.lcc_members.len(), k);

    let pool: Vec<ResearcherIdx> = pool
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if pool.len() < k {
        return Err(Error::PoolTooSmall {
            pool: pool.len(),
            needed: k,
        });
    }

    let graph = build_graph(corpus, cohort.window);
    let samples: Vec<SampleMetrics<T>> = (0..spec.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(spec.seed, i as u64);
            let mut sample: Vec<ResearcherIdx> = index::sample(&mut rng, pool.len(), k)
                .into_iter()
                .map(|j| pool[j])
                .collect();
            sample.sort_unstable();
            sample_metrics(&graph, &sample)
        })
        .collect::<Result<_>>()?;

    let densities: Vec<T> = samples.iter().map(|s| s.density).collect();
    let lcc_ratios: Vec<T> = samples.iter().map(|s| s.lcc_ratio).collect();
    Ok(NullModelResult {
        year: cohort.year,
        sample_size: k,
        n_samples: spec.n_samples,
        seed: spec.seed,
        pool_size: pool.len(),
        density: MeanSd::of(&densities),
        lcc_ratio: MeanSd::of(&lcc_ratios),
        densities,
        lcc_ratios,
        observed_density,
        observed_lcc_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::paper;
    use crate::corpus::YearRange;

    fn graph_of(papers: Vec<crate::corpus::PublicationRecord>) -> CoauthorGraph {
        let corpus = Corpus::from_records(papers).unwrap();
        build_graph(&corpus, YearRange::single(2020))
    }

    #[test]
    fn triangle_is_complete() {
        let g = graph_of(vec![paper("p", 2020, &["a", "b", "c"])]);
        assert_eq!(graph_density::<f64>(&g).unwrap(), 1.0);
    }

    #[test]
    fn four_nodes_three_edges() {
        let g = graph_of(vec![
            paper("p1", 2020, &["a", "b"]),
            paper("p2", 2020, &["b", "c"]),
            paper("p3", 2020, &["c", "d"]),
            paper("p4", 2020, &["c", "d"]),
        ]);
        assert_eq!(graph_density::<f64>(&g).unwrap(), 0.5);
    }

    #[test]
    fn path_of_hundred() {
        let ids: Vec<String> = (0..100).map(|i| format!("r{i:03}")).collect();
        let papers = (0..99)
            .map(|i| paper(&format!("p{i}"), 2020, &[&ids[i], &ids[i + 1]]))
            .collect();
        let g = graph_of(papers);
        assert_eq!(graph_density::<f64>(&g).unwrap(), 99.0 / 4950.0);
    }

    #[test]
    fn single_node_is_an_error() {
        let g = graph_of(vec![paper("p", 2020, &["a"])]);
        assert!(matches!(
            graph_density::<f64>(&g),
            Err(Error::TooFewNodes(1))
        ));
    }
}
