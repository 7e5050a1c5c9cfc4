//! Compact adjacency storage and strongly connected components.

use std::collections::VecDeque;

/// Adjacency lists in compressed sparse row form.
#[derive(Debug, Clone, Default)]
pub struct Csr {
    pub offsets: Vec<usize>,
    pub targets: Vec<u32>,
}

impl Csr {
    pub fn new() -> Self {
        Csr {
            offsets: vec![0],
            targets: Vec::new(),
        }
    }

    pub fn from_lists(lists: &[Vec<u32>]) -> Self {
        let mut g = Csr::new();
        for l in lists {
            g.push_node(l.iter().copied());
        }
        g
    }

    /// Appends the next node with the given successors.
    pub fn push_node(&mut self, succ: impl IntoIterator<Item = u32>) {
        self.targets.extend(succ);
        self.offsets.push(self.targets.len());
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn succ(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

const UNVISITED: u32 = u32::MAX;

/// Strongly connected components (iterative Tarjan). Component ids are
/// assigned in the order components are completed.
pub fn scc(g: &Csr) -> (Vec<u32>, usize) {
    let n = g.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut frames: Vec<(u32, usize)> = Vec::new();
    let mut counter = 0u32;
    let mut count = 0usize;
    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        frames.push((root as u32, 0));
        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            let v = v as usize;
            let succ = g.succ(v);
            if *pos < succ.len() {
                let w = succ[*pos] as usize;
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    frames.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow") as usize;
                    on_stack[w] = false;
                    comp[w] = count as u32;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
            if let Some(&(parent, _)) = frames.last() {
                let p = parent as usize;
                low[p] = low[p].min(low[v]);
            }
        }
    }
    (comp, count)
}

/// Marks components that contain a cycle (more than one node, or a
/// self-loop).
pub fn cyclic_components(g: &Csr, comp: &[u32], count: usize) -> Vec<bool> {
    let mut size = vec![0usize; count];
    for &c in comp {
        size[c as usize] += 1;
    }
    let mut cyclic: Vec<bool> = size.iter().map(|&s| s > 1).collect();
    for v in 0..g.len() {
        if g.succ(v).iter().any(|&w| w as usize == v) {
            cyclic[comp[v] as usize] = true;
        }
    }
    cyclic
}

/// Shortest path from any of `sources` to a node satisfying `goal`, moving
/// only through nodes accepted by `allowed`. Returns the node sequence.
pub fn bfs_path(
    g: &Csr,
    sources: &[usize],
    allowed: impl Fn(usize) -> bool,
    goal: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; g.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if allowed(s) && parent[s] == usize::MAX {
            parent[s] = s;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if goal(v) {
            let mut path = vec![v];
            let mut cur = v;
            while parent[cur] != cur {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in g.succ(v) {
            let w = w as usize;
            if parent[w] == usize::MAX && allowed(w) {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// A cycle through `start` that stays inside `allowed` and visits a node
/// of every class in `visit` (in order). Returns nodes from `start` up to,
/// but excluding, the return to `start`.
pub fn cycle_through(
    g: &Csr,
    start: usize,
    allowed: impl Fn(usize) -> bool + Copy,
    visit: &[&dyn Fn(usize) -> bool],
) -> Option<Vec<usize>> {
    let mut path = vec![start];
    let mut cur = start;
    for goal in visit {
        if goal(cur) {
            continue;
        }
        let seg = bfs_path(g, &[cur], allowed, goal)?;
        path.extend(&seg[1..]);
        cur = *seg.last().expect("non-empty path");
    }
    let succ: Vec<usize> = g.succ(cur).iter().map(|&w| w as usize).collect();
    if succ.contains(&start) {
        return Some(path);
    }
    let back = bfs_path(
        g,
        &succ
            .iter()
            .copied()
            .filter(|&w| allowed(w))
            .collect::<Vec<_>>(),
        allowed,
        |v| v == start,
    )?;
    path.extend(&back[..back.len() - 1]);
    Some(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_finds_cycles() {
        let g = Csr::from_lists(&[vec![1], vec![2], vec![0, 3], vec![3], vec![]]);
        let (comp, count) = scc(&g);
        assert_eq!(count, 3);
        assert_eq!(comp[0], comp[1]);
        assert_eq!(comp[1], comp[2]);
        assert_ne!(comp[3], comp[0]);
        let cyc = cyclic_components(&g, &comp, count);
        assert!(cyc[comp[0] as usize]);
        assert!(cyc[comp[3] as usize]);
        assert!(!cyc[comp[4] as usize]);
    }

    #[test]
    fn cycle_through_visits_goal() {
        let g = Csr::from_lists(&[vec![1], vec![2], vec![0]]);
        let c = cycle_through(&g, 0, |_| true, &[&|v| v == 2]).unwrap();
        assert_eq!(c, vec![0, 1, 2]);
        let s = Csr::from_lists(&[vec![0]]);
        assert_eq!(cycle_through(&s, 0, |_| true, &[]).unwrap(), vec![0]);
    }
}
