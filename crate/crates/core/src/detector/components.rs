use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;

/// Disjoint sets with path halving and union by size.
#[derive(Clone, Debug)]
pub struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grandparent = self.parent[self.parent[x] as usize];
            self.parent[x] = grandparent;
            x = grandparent as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let root = self.find(x);
        self.size[root] as usize
    }
}

/// Connected components, each sorted ascending, ordered by descending size
/// and then by smallest member.
///
/// Duplicate nodes are merged; edges touching unknown nodes are ignored.
pub fn connected_components<Id>(nodes: &[Id], edges: &[(Id, Id)]) -> Vec<Vec<Id>>
where
    Id: Ord + Hash + Copy,
{
    let mut sorted: Vec<Id> = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let position: HashMap<Id, usize> = sorted.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut sets = DisjointSets::new(sorted.len());
    for (a, b) in edges {
        if let (Some(&i), Some(&j)) = (position.get(a), position.get(b)) {
            sets.union(i, j);
        }
    }

    let mut by_root: HashMap<usize, Vec<Id>> = HashMap::new();
    for (i, &id) in sorted.iter().enumerate() {
        by_root.entry(sets.find(i)).or_default().push(id);
    }
    // members were pushed in ascending order, so each component is sorted
    let mut components: Vec<Vec<Id>> = by_root.into_values().collect();
    components.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| x[0].cmp(&y[0])));
    components
}

/// The largest connected component; ties go to the component holding the
/// smallest member id. Empty input yields an empty set.
pub fn largest_connected_component<Id>(nodes: &[Id], edges: &[(Id, Id)]) -> BTreeSet<Id>
where
    Id: Ord + Hash + Copy,
{
    connected_components(nodes, edges)
        .into_iter()
        .next()
        .map(|c| c.into_iter().collect())
        .unwrap_or_default()
}
