mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use millscope::detector::{connected_components, largest_connected_component};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::bfs_components;

fn random_graph(rng: &mut ChaCha8Rng) -> (Vec<u32>, Vec<(u32, u32)>) {
    let n = rng.random_range(0..=200usize);
    let p = rng.random_range(0.005..=0.2);
    // Sparse ids so tie-breaking by id is not tie-breaking by position.
    let ids: Vec<u32> = (0..n as u32).map(|i| i * 7 + 3).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((ids[i], ids[j]));
            }
        }
    }
    (ids, edges)
}

/// Largest BFS component, ties to the component with the smallest member.
fn bfs_lcc(ids: &[u32], edges: &[(u32, u32)]) -> BTreeSet<u32> {
    let pos = |x: u32| ids.iter().position(|&y| y == x).unwrap();
    let index_edges: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (pos(a), pos(b))).collect();
    bfs_components(ids.len(), &index_edges)
        .into_iter()
        .map(|c| c.into_iter().map(|i| ids[i]).collect::<BTreeSet<u32>>())
        .max_by(|a, b| a.len().cmp(&b.len()).then(b.first().cmp(&a.first())))
        .unwrap_or_default()
}

#[test]
fn lcc_matches_bfs_on_a_thousand_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    for g in 0..1000 {
        let (ids, edges) = random_graph(&mut rng);
        assert_eq!(
            largest_connected_component(&ids, &edges),
            bfs_lcc(&ids, &edges),
            "graph {g}"
        );
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn equal_sized_components_resolve_to_the_smallest_id() {
    let ids = ["b", "c", "a", "d"];
    let edges = [("c", "d"), ("a", "b")];
    let lcc = largest_connected_component(&ids, &edges);
    assert_eq!(lcc, BTreeSet::from(["a", "b"]));
}

#[test]
fn empty_input_gives_empty_lcc() {
    let lcc = largest_connected_component::<u32>(&[], &[]);
    assert!(lcc.is_empty());
}

proptest! {
    #[test]
    fn components_partition_the_nodes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ids, edges) = random_graph(&mut rng);
        let components = connected_components(&ids, &edges);
        let total: usize = components.iter().map(Vec::len).sum();
        prop_assert_eq!(total, ids.len());
        let all: BTreeSet<u32> = components.iter().flatten().copied().collect();
        prop_assert_eq!(all.len(), ids.len());
        prop_assert!(components.windows(2).all(|w| w[0].len() >= w[1].len()));
        // No edge crosses between components.
        for &(a, b) in &edges {
            let ca = components.iter().position(|c| c.contains(&a));
            let cb = components.iter().position(|c| c.contains(&b));
            prop_assert_eq!(ca, cb);
        }
    }
}
