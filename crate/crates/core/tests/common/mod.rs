//! Fixtures and brute-force oracles shared by the integration tests. The
//! oracles work from raw records only and never call into the crate's
//! derivations.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use millscope::{Authorship, DocType, PublicationRecord};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const COUNTRIES: [&str; 4] = ["AA", "BB", "CC", "DD"];

/// Random corpus over `years` with `n_researchers` potential authors. A few
/// papers are reviews, oversized or carry unresolved authors so every
/// eligibility branch is exercised.
pub fn random_records(
    seed: u64,
    n_papers: usize,
    n_researchers: usize,
    years: std::ops::RangeInclusive<i32>,
) -> Vec<PublicationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_papers);
    for i in 0..n_papers {
        let year = rng.random_range(years.clone());
        let k = if rng.random_bool(0.02) {
            rng.random_range(21..=24).min(n_researchers)
        } else {
            rng.random_range(1..=6).min(n_researchers)
        };
        let authors = rand::seq::index::sample(&mut rng, n_researchers, k);
        let mut authorships: Vec<Authorship> = authors
            .iter()
            .map(|r| Authorship {
                researcher_id: Some(format!("R{r:04}")),
                institution_id: Some(format!("I{}", r % 7)),
                country_code: rng.random_bool(0.9).then(|| COUNTRIES[r % 4].to_string()),
            })
            .collect();
        if rng.random_bool(0.05) {
            authorships.push(Authorship::default());
        }
        let doc_type = match rng.random_range(0..20) {
            0 => DocType::Review,
            1 => DocType::Other,
            _ => DocType::ResearchArticle,
        };
        let j = rng.random_range(0..6);
        out.push(PublicationRecord {
            pub_id: format!("P{i:06}"),
            year,
            doc_type,
            journal_id: format!("J{j}"),
            publisher_id: format!("PB{}", j % 3),
            authorships,
            cited_pub_ids: None,
        });
    }
    out
}

/// A corpus with a planted high-volume cluster: `n_hubs` researchers who
/// debut in `year - 1` and each write 22-30 papers with random partners from
/// a shared young pool, on top of an organic background.
pub fn planted_records(seed: u64, n_hubs: usize, year: i32) -> Vec<PublicationRecord> {
    let mut records = random_records(seed, 3_000, 400, year - 6..=year + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let hubs: Vec<String> = (0..n_hubs).map(|h| format!("H{h:03}")).collect();
    let young: Vec<String> = (0..60).map(|y| format!("Y{y:03}")).collect();
    let mut next = records.len();
    let mut push = |records: &mut Vec<PublicationRecord>, y: i32, authors: Vec<String>| {
        records.push(PublicationRecord {
            pub_id: format!("Q{next:06}"),
            year: y,
            doc_type: DocType::ResearchArticle,
            journal_id: "JM".into(),
            publisher_id: "PBM".into(),
            authorships: authors
                .into_iter()
                .map(|id| Authorship {
                    researcher_id: Some(id),
                    institution_id: Some("IM".into()),
                    country_code: Some("MM".into()),
                })
                .collect(),
            cited_pub_ids: None,
        });
        next += 1;
    };
    for id in hubs.iter().chain(&young) {
        push(&mut records, year - 1, vec![id.clone()]);
    }
    for (h, hub) in hubs.iter().enumerate() {
        let n = rng.random_range(22..=30);
        for _ in 0..n {
            let mut authors = vec![hub.clone()];
            let k = rng.random_range(1..=3);
            for y in young.choose_multiple(&mut rng, k) {
                authors.push(y.clone());
            }
            // Neighbouring hubs collide now and then.
            if rng.random_bool(0.15) {
                authors.push(hubs[(h + 1) % n_hubs].clone());
            }
            if authors[1..].contains(hub) {
                continue;
            }
            authors.dedup();
            let y = if rng.random_bool(0.8) { year } else { year + 1 };
            push(&mut records, y, authors);
        }
    }
    records
}

pub fn eligible(p: &PublicationRecord) -> bool {
    p.doc_type == DocType::ResearchArticle && p.authorships.len() <= 20
}

pub fn resolved(p: &PublicationRecord) -> Vec<&str> {
    p.authorships
        .iter()
        .filter_map(|a| a.researcher_id.as_deref())
        .collect()
}

/// Pairwise expansion: unordered author pair -> number of shared eligible
/// papers in `[start, end]`.
pub fn pair_multiplicities(
    records: &[PublicationRecord],
    start: i32,
    end: i32,
) -> BTreeMap<(String, String), u32> {
    let mut pairs = BTreeMap::new();
    for p in records
        .iter()
        .filter(|p| eligible(p) && (start..=end).contains(&p.year))
    {
        let authors = resolved(p);
        for i in 0..authors.len() {
            for j in i + 1..authors.len() {
                let (a, b) = if authors[i] < authors[j] {
                    (authors[i], authors[j])
                } else {
                    (authors[j], authors[i])
                };
                *pairs.entry((a.to_string(), b.to_string())).or_insert(0) += 1;
            }
        }
    }
    pairs
}

pub fn adjacency(
    pairs: &BTreeMap<(String, String), u32>,
) -> BTreeMap<String, BTreeMap<String, u32>> {
    let mut adj: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
    for ((a, b), &m) in pairs {
        adj.entry(a.clone()).or_default().insert(b.clone(), m);
        adj.entry(b.clone()).or_default().insert(a.clone(), m);
    }
    adj
}

/// Authors of eligible papers in `year`, including solo authors.
pub fn active(records: &[PublicationRecord], year: i32) -> BTreeSet<String> {
    records
        .iter()
        .filter(|p| eligible(p) && p.year == year)
        .flat_map(|p| resolved(p).into_iter().map(str::to_string))
        .collect()
}

pub fn first_years(records: &[PublicationRecord]) -> HashMap<String, i32> {
    let mut first = HashMap::new();
    for p in records {
        for a in resolved(p) {
            let e = first.entry(a.to_string()).or_insert(p.year);
            *e = (*e).min(p.year);
        }
    }
    first
}

pub fn eligible_counts(records: &[PublicationRecord], year: i32) -> HashMap<String, u32> {
    let mut counts = HashMap::new();
    for p in records.iter().filter(|p| eligible(p) && p.year == year) {
        for a in resolved(p) {
            *counts.entry(a.to_string()).or_insert(0) += 1;
        }
    }
    counts
}

/// Stage ordinal 1..=8 from the five-year bands, open-ended at 35.
pub fn stage(first: i32, year: i32) -> Option<u32> {
    let age = year - first;
    if !(0..=100).contains(&age) {
        return None;
    }
    Some((age as u32 / 5).min(7) + 1)
}

/// `(total_nodes, total_edges)` of `ego`'s ego network.
pub fn ego_key(adj: &BTreeMap<String, BTreeMap<String, u32>>, ego: &str) -> (u64, u64) {
    let Some(neighbours) = adj.get(ego) else {
        return (1, 0);
    };
    let n = neighbours.len() as u64;
    let mut residual = 0;
    for a in neighbours.keys() {
        for b in neighbours.keys() {
            if a < b && adj[a].contains_key(b) {
                residual += 1;
            }
        }
    }
    (n + 1, n + residual)
}

/// Bitmask of F1-F5 under the default thresholds.
pub fn filter_bits(records: &[PublicationRecord], year: i32) -> BTreeMap<String, u8> {
    let first = first_years(records);
    let counts = eligible_counts(records, year);
    let adj = adjacency(&pair_multiplicities(records, year, year));
    let people = active(records, year);
    let mut freq: HashMap<(u64, u64), u64> = HashMap::new();
    for r in &people {
        *freq.entry(ego_key(&adj, r)).or_insert(0) += 1;
    }
    let stage_of = |r: &str| stage(first[r], year);
    let empty = BTreeMap::new();
    people
        .iter()
        .map(|r| {
            let mut bits = 0u8;
            if matches!(stage_of(r), Some(1 | 2)) {
                bits |= 1;
            }
            if freq[&ego_key(&adj, r)] < 10 {
                bits |= 2;
            }
            if counts.get(r.as_str()).copied().unwrap_or(0) > 20 {
                bits |= 4;
            }
            let neighbours = adj.get(r).unwrap_or(&empty);
            let top = neighbours.values().copied().max().unwrap_or(0);
            if neighbours
                .iter()
                .any(|(n, &m)| m == top && matches!(stage_of(n), Some(1..=3)))
            {
                bits |= 8;
            }
            let young = neighbours
                .keys()
                .filter(|n| matches!(stage_of(n), Some(1 | 2)))
                .count();
            if !neighbours.is_empty() && 2 * young >= neighbours.len() {
                bits |= 16;
            }
            (r.clone(), bits)
        })
        .collect()
}

/// Components of an undirected graph by breadth-first search.
pub fn bfs_components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut component = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    component.push(w);
                    queue.push_back(w);
                }
            }
        }
        component.sort_unstable();
        out.push(component);
    }
    out
}
