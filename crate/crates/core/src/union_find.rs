/// Disjoint-set forest with path halving and union by size. Roots are
/// canonicalized to the smallest member when labels are extracted, so the
/// labelling depends only on the set of unions, not on their order.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
    }

    /// Dense component labels `0..k` over the elements selected by `keep`,
    /// numbered in order of first appearance. Unselected elements get `None`.
    pub fn labels(&mut self, keep: impl Fn(usize) -> bool) -> (Vec<Option<usize>>, usize) {
        let n = self.parent.len();
        let mut root_label = vec![usize::MAX; n];
        let mut out = vec![None; n];
        let mut count = 0;
        for i in 0..n {
            if !keep(i) {
                continue;
            }
            let r = self.find(i);
            if root_label[r] == usize::MAX {
                root_label[r] = count;
                count += 1;
            }
            out[i] = Some(root_label[r]);
        }
        (out, count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_follow_first_appearance() {
        let mut uf = UnionFind::new(6);
        uf.union(4, 5);
        uf.union(0, 2);
        uf.union(2, 4);
        let (labels, count) = uf.labels(|i| i != 3);
        assert_eq!(count, 2);
        assert_eq!(
            labels,
            vec![Some(0), Some(1), Some(0), None, Some(0), Some(0)]
        );
    }
}
