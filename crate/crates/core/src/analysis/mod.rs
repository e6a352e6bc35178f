//! Baselines and external validation of a suspicious cohort.

mod citations;
mod nullmodel;
mod overlap;
mod reviews;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::ResearcherIdx;
use crate::graph::CoauthorGraph;

pub use citations::{citation_cartel_score, citation_counts, CitationCounts};
pub use nullmodel::{
    baseline_pool, graph_density, null_density_baseline, null_density_from_pool, sample_metrics,
    NullModelResult, NullModelSpec, PoolRule, SampleMetrics,
};
pub use overlap::{
    flaglist_overlap, random_publication_baseline, retraction_overlap, OverlapContext,
    OverlapReport, PaperStats, PublicationBaseline,
};
pub use reviews::{peer_review_overlap, JournalReviewRatio, PeerReviewReport, PeerReviewSpec};

/// Cohort members together with everyone who co-authored with one of them in
/// `graph`.
pub fn one_degree_set(
    graph: &CoauthorGraph,
    cohort: &BTreeSet<ResearcherIdx>,
) -> BTreeSet<ResearcherIdx> {
    let mut set = cohort.clone();
    for &r in cohort {
        set.extend(graph.neighbors(r).iter().map(|&(n, _)| n));
    }
    set
}

/// Independent generator for Monte Carlo sample `index`; the stream depends
/// only on `(seed, index)`, never on scheduling.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
