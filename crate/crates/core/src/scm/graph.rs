//! Directed acyclic graphs and d-separation.

use std::collections::VecDeque;

/// A DAG over nodes `0..n`, stored as parent lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    /// Builds a DAG from parent lists. Returns `None` on a cycle or an
    /// out-of-range parent.
    pub fn from_parents(parents: Vec<Vec<usize>>) -> Option<Self> {
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        for (v, ps) in parents.iter().enumerate() {
            for &p in ps {
                if p >= n || p == v {
                    return None;
                }
                children[p].push(v);
            }
        }
        let dag = Self { parents, children };
        dag.topological_order().map(|_| dag)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Descendants of `v`, excluding `v`.
    pub fn descendants(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = self.children[v].clone();
        while let Some(u) = stack.pop() {
            if !seen[u] {
                seen[u] = true;
                stack.extend_from_slice(&self.children[u]);
            }
        }
        seen
    }

    /// Nodes in `set` together with all their ancestors.
    fn ancestral_closure(&self, set: &[bool]) -> Vec<bool> {
        let mut out = set.to_vec();
        let mut stack: Vec<usize> = (0..self.len()).filter(|&v| set[v]).collect();
        while let Some(u) = stack.pop() {
            for &p in &self.parents[u] {
                if !out[p] {
                    out[p] = true;
                    stack.push(p);
                }
            }
        }
        out
    }

    /// Whether `x` and `y` are d-separated by `s` (Bayes-ball reachability).
    pub fn d_separated(&self, x: usize, y: usize, s: &[usize]) -> bool {
        let n = self.len();
        let mut in_s = vec![false; n];
        for &v in s {
            in_s[v] = true;
        }
        let anc = self.ancestral_closure(&in_s);
        // visited[v][0]: reached travelling up (from a child),
        // visited[v][1]: reached travelling down (from a parent).
        let mut visited = vec![[false; 2]; n];
        let mut queue = VecDeque::from([(x, 0usize)]);
        while let Some((v, dir)) = queue.pop_front() {
            if visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            if v == y && !in_s[v] {
                return false;
            }
            if dir == 0 {
                if !in_s[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, 0)));
                    queue.extend(self.children[v].iter().map(|&c| (c, 1)));
                }
            } else {
                if !in_s[v] {
                    queue.extend(self.children[v].iter().map(|&c| (c, 1)));
                }
                if anc[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, 0)));
                }
            }
        }
        true
    }
}
