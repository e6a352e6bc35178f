use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scalar::{ratio, Real};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CitationCounts {
    /// Citation edges whose target is flagged.
    pub in_citations: usize,
    /// Of those, edges whose source is flagged too.
    pub from_flagged: usize,
}

/// Counts citation edges into `flagged`. A paper citing the same target twice
/// contributes one edge.
pub fn citation_counts(corpus: &Corpus, flagged: &BTreeSet<String>) -> CitationCounts {
    let mut counts = CitationCounts::default();
    for publication in corpus.publications() {
        let Some(cited) = &publication.cited_pub_ids else {
            continue;
        };
        let source_flagged = flagged.contains(&publication.pub_id);
        let targets: HashSet<&String> = cited.iter().filter(|c| flagged.contains(*c)).collect();
        counts.in_citations += targets.len();
        if source_flagged {
            counts.from_flagged += targets.len();
        }
    }
    counts
}

/// Share of citations into `flagged` that come from flagged papers.
pub fn citation_cartel_score<T: Real>(corpus: &Corpus, flagged: &BTreeSet<String>) -> Result<T> {
    let counts = citation_counts(corpus, flagged);
    if counts.in_citations == 0 {
        return Err(Error::NoCitations);
    }
    Ok(ratio(counts.from_flagged, counts.in_citations))
}
