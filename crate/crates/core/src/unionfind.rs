/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Union-find carrying an integer potential along each element, used to detect
/// cycles with nonzero total step (for instance a cluster wrapping around an
/// annulus).
#[derive(Debug, Clone)]
pub struct WeightedUnionFind {
    parent: Vec<usize>,
    // potential of the element relative to its parent
    offset: Vec<i64>,
    size: Vec<usize>,
    wraps: Vec<bool>,
}

impl WeightedUnionFind {
    pub fn new(n: usize) -> Self {
        WeightedUnionFind {
            parent: (0..n).collect(),
            offset: vec![0; n],
            size: vec![1; n],
            wraps: vec![false; n],
        }
    }

    /// Returns the root of `x` and the potential of `x` relative to it.
    pub fn find(&mut self, x: usize) -> (usize, i64) {
        let mut path = Vec::new();
        let mut cur = x;
        while self.parent[cur] != cur {
            path.push(cur);
            cur = self.parent[cur];
        }
        let root = cur;
        // compress: walk from the top of the path down
        let mut acc = 0i64;
        for &node in path.iter().rev() {
            acc += self.offset[node];
            self.offset[node] = acc;
            self.parent[node] = root;
        }
        (root, if path.is_empty() { 0 } else { self.offset[x] })
    }

    /// Records that `pot(b) - pot(a) = step`. A contradiction marks the merged
    /// set as wrapping.
    pub fn union(&mut self, a: usize, b: usize, step: i64) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            if pb - pa != step {
                self.wraps[ra] = true;
            }
            return;
        }
        // pot(rb) - pot(ra) = pa + step - pb
        let d = pa + step - pb;
        let wrap = self.wraps[ra] || self.wraps[rb];
        if self.size[ra] >= self.size[rb] {
            self.parent[rb] = ra;
            self.offset[rb] = d;
            self.size[ra] += self.size[rb];
            self.wraps[ra] = wrap;
        } else {
            self.parent[ra] = rb;
            self.offset[ra] = -d;
            self.size[rb] += self.size[ra];
            self.wraps[rb] = wrap;
        }
    }

    pub fn wraps(&mut self, x: usize) -> bool {
        let (r, _) = self.find(x);
        self.wraps[r]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_union_find_joins_sets() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert_eq!(uf.find(0), uf.find(1));
        assert_ne!(uf.find(1), uf.find(3));
    }

    #[test]
    fn weighted_cycle_detects_wrap() {
        // four pieces around a ring, steps of +1
        let mut w = WeightedUnionFind::new(4);
        w.union(0, 1, 1);
        w.union(1, 2, 1);
        w.union(2, 3, 1);
        assert!(!w.wraps(0));
        w.union(3, 0, 1);
        assert!(w.wraps(2));

        // going there and back does not wrap
        let mut w = WeightedUnionFind::new(3);
        w.union(0, 1, 1);
        w.union(1, 2, -1);
        w.union(2, 0, 0);
        assert!(!w.wraps(0));
    }
}
