//! Disjoint-set forest used for cluster extraction.

#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }

    /// Members of the largest set in ascending order. Ties go to the set
    /// whose smallest member is smallest.
    pub(crate) fn largest_set(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut best_root = None;
        let mut best_size = 0;
        // scanning in ascending order meets each set first at its minimum
        for x in 0..n {
            let r = self.find(x);
            if self.size[r] > best_size {
                best_size = self.size[r];
                best_root = Some(r);
            }
        }
        match best_root {
            Some(root) => (0..n).filter(|&x| self.find(x) == root).collect(),
            None => Vec::new(),
        }
    }
}

/// Keep the edges inside `members` and relabel them densely in the order of
/// `members`.
pub(crate) fn induced_edges(
    n: usize,
    members: &[usize],
    edges: &[(usize, usize)],
) -> Vec<(usize, usize, f64)> {
    let mut label = vec![usize::MAX; n];
    for (i, &m) in members.iter().enumerate() {
        label[m] = i;
    }
    edges
        .iter()
        .filter(|&&(u, v)| label[u] != usize::MAX && label[v] != usize::MAX)
        .map(|&(u, v)| (label[u], label[v], 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn largest_set_breaks_ties_by_minimum() {
        let mut d = DisjointSet::new(6);
        d.union(4, 5);
        d.union(1, 2);
        assert_eq!(d.largest_set(), vec![1, 2]);
        d.union(3, 4);
        assert_eq!(d.largest_set(), vec![3, 4, 5]);
    }
}
