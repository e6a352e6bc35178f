//! Windowed co-authorship graphs and egocentric network shapes.

mod shape;

use std::collections::HashMap;

use crate::corpus::{Corpus, ResearcherIdx, YearRange};

pub use shape::{
    clustering_coefficient, ego_shape, shape_frequency_table, shape_frequency_table_pooled,
    uniqueness_bin, EgoShape, FrequencyMode, ShapeKey, YearShapes,
};

/// Co-authorship graph over the eligible publications of a year window.
///
/// Nodes are resolved authors; an edge carries the number of shared papers.
#[derive(Clone, Debug)]
pub struct CoauthorGraph {
    window: YearRange,
    nodes: Vec<ResearcherIdx>,
    slot: HashMap<ResearcherIdx, usize>,
    /// Per node slot, neighbours sorted by index with their multiplicity.
    adjacency: Vec<Vec<(ResearcherIdx, u32)>>,
    edge_count: usize,
}

/// Builds the co-authorship graph of all eligible papers in `window`.
pub fn build_graph(corpus: &Corpus, window: YearRange) -> CoauthorGraph {
    let mut nodes = Vec::new();
    let mut pairs: Vec<(ResearcherIdx, ResearcherIdx)> = Vec::new();
    for p in corpus.eligible_in_window(window) {
        let authors = corpus.resolved_authors(p);
        nodes.extend_from_slice(authors);
        for (i, &a) in authors.iter().enumerate() {
            for &b in &authors[i + 1..] {
                pairs.push(if a < b { (a, b) } else { (b, a) });
            }
        }
    }
    CoauthorGraph::from_pairs(window, nodes, pairs)
}

impl CoauthorGraph {
    fn from_pairs(
        window: YearRange,
        mut nodes: Vec<ResearcherIdx>,
        mut pairs: Vec<(ResearcherIdx, ResearcherIdx)>,
    ) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        let slot: HashMap<ResearcherIdx, usize> =
            nodes.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        pairs.sort_unstable();

        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut edge_count = 0;
        for run in pairs.chunk_by(|x, y| x == y) {
            let (a, b) = run[0];
            let multiplicity = run.len() as u32;
            adjacency[slot[&a]].push((b, multiplicity));
            adjacency[slot[&b]].push((a, multiplicity));
            edge_count += 1;
        }
        for list in &mut adjacency {
            list.sort_unstable_by_key(|&(r, _)| r);
        }
        CoauthorGraph {
            window,
            nodes,
            slot,
            adjacency,
            edge_count,
        }
    }

    pub fn window(&self) -> YearRange {
        self.window
    }

    /// Nodes in ascending index order.
    pub fn nodes(&self) -> &[ResearcherIdx] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of distinct co-author pairs.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, r: ResearcherIdx) -> bool {
        self.slot.contains_key(&r)
    }

    /// Neighbours with edge multiplicities, sorted by index. Empty for
    /// researchers outside the graph.
    pub fn neighbors(&self, r: ResearcherIdx) -> &[(ResearcherIdx, u32)] {
        self.slot
            .get(&r)
            .map(|&s| self.adjacency[s].as_slice())
            .unwrap_or(&[])
    }

    pub fn degree(&self, r: ResearcherIdx) -> usize {
        self.neighbors(r).len()
    }

    pub fn multiplicity(&self, a: ResearcherIdx, b: ResearcherIdx) -> u32 {
        let list = self.neighbors(a);
        list.binary_search_by_key(&b, |&(r, _)| r)
            .map(|i| list[i].1)
            .unwrap_or(0)
    }

    pub fn has_edge(&self, a: ResearcherIdx, b: ResearcherIdx) -> bool {
        self.multiplicity(a, b) > 0
    }

    /// Each edge once, as `(low, high, multiplicity)` in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (ResearcherIdx, ResearcherIdx, u32)> + '_ {
        self.nodes
            .iter()
            .zip(&self.adjacency)
            .flat_map(|(&a, list)| {
                list.iter()
                    .filter(move |&&(b, _)| a < b)
                    .map(move |&(b, m)| (a, b, m))
            })
    }

    /// Edges of the subgraph induced on `members` (which must be sorted and
    /// deduplicated), each reported once with the lower index first.
    pub fn induced_edges(&self, members: &[ResearcherIdx]) -> Vec<(ResearcherIdx, ResearcherIdx)> {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        let mut edges = Vec::new();
        for &a in members {
            for &(b, _) in self.neighbors(a) {
                if a < b && members.binary_search(&b).is_ok() {
                    edges.push((a, b));
                }
            }
        }
        edges
    }
}
