//! Small directed-graph helpers shared by the acceptance procedures.

use std::collections::VecDeque;

/// Strongly connected components (iterative Tarjan). Returns the component
/// index of every node; components are numbered in reverse topological order.
pub fn scc(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut count = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if let Some(&w) = adj[v].get(*edge) {
                *edge += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = count;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    (comp, count)
}

/// Nodes reachable from `from` (including it).
pub fn reachable(adj: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Shortest path `from → to` using at least one edge, through nodes
/// satisfying `allowed`. The result lists nodes from `from` to `to` inclusive.
pub fn path(
    adj: &[Vec<usize>],
    from: usize,
    to: usize,
    allowed: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    for &w in &adj[from] {
        if allowed(w) && parent[w] == usize::MAX {
            parent[w] = from;
            queue.push_back(w);
        }
    }
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut out = vec![to];
            let mut cur = to;
            loop {
                cur = parent[cur];
                out.push(cur);
                if cur == from {
                    break;
                }
            }
            out.reverse();
            return Some(out);
        }
        for &w in &adj[v] {
            if allowed(w) && parent[w] == usize::MAX {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_of_small_graph() {
        let adj = vec![vec![1], vec![2], vec![0, 3], vec![]];
        let (comp, count) = scc(&adj);
        assert_eq!(count, 2);
        assert_eq!(comp[0], comp[1]);
        assert_eq!(comp[1], comp[2]);
        assert_ne!(comp[2], comp[3]);
    }

    #[test]
    fn cycle_path_needs_an_edge() {
        let adj = vec![vec![1], vec![0], vec![2]];
        assert_eq!(path(&adj, 0, 0, |_| true), Some(vec![0, 1, 0]));
        assert_eq!(path(&adj, 2, 2, |_| true), Some(vec![2, 2]));
        assert_eq!(path(&adj, 0, 2, |_| true), None);
    }
}
