//! Small directed-graph helpers over dense `0..n` vertex indices.

use std::collections::BTreeSet;

/// Finds cycles with a depth-first search started from each vertex in index
/// order. Each back edge yields one cycle, reported as a closed vertex path
/// (`[a, b, a]`). Returns an empty list for a DAG.
pub(crate) fn find_cycles(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;

    let n = adjacency.len();
    let mut color = vec![WHITE; n];
    let mut cycles = Vec::new();

    for start in 0..n {
        if color[start] != WHITE {
            continue;
        }
        // (vertex, next child position)
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        color[start] = GRAY;
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if let Some(&w) = adjacency[v].get(top.1) {
                top.1 += 1;
                match color[w] {
                    WHITE => {
                        color[w] = GRAY;
                        stack.push((w, 0));
                    }
                    GRAY => {
                        let from = stack.iter().position(|&(u, _)| u == w).unwrap_or(0);
                        let mut path: Vec<usize> = stack[from..].iter().map(|&(u, _)| u).collect();
                        path.push(w);
                        cycles.push(path);
                    }
                    _ => {}
                }
            } else {
                color[v] = BLACK;
                stack.pop();
            }
        }
    }
    cycles
}

/// Kahn's algorithm; among ready vertices the smallest index goes first.
/// Returns `None` if the graph has a cycle.
pub(crate) fn topological_order(adjacency: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adjacency.len();
    let mut indegree = vec![0usize; n];
    for targets in adjacency {
        for &w in targets {
            indegree[w] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &w in &adjacency[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.insert(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Vertices reachable from `start` through at least one edge.
pub(crate) fn descendants(adjacency: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adjacency.len()];
    let mut stack: Vec<usize> = adjacency[start].clone();
    while let Some(v) = stack.pop() {
        if !seen[v] {
            seen[v] = true;
            stack.extend(adjacency[v].iter().copied());
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycle_is_reported_as_closed_path() {
        let adj = vec![vec![1], vec![0]];
        assert_eq!(find_cycles(&adj), vec![vec![0, 1, 0]]);
        assert!(topological_order(&adj).is_none());
    }

    #[test]
    fn self_loop_is_a_cycle() {
        assert_eq!(find_cycles(&[vec![0]]), vec![vec![0, 0]]);
    }

    #[test]
    fn dag_has_no_cycles_and_a_stable_order() {
        // 2 -> 0 -> 1, 3 isolated
        let adj = vec![vec![1], vec![], vec![0], vec![]];
        assert!(find_cycles(&adj).is_empty());
        assert_eq!(topological_order(&adj), Some(vec![2, 0, 1, 3]));
        assert_eq!(descendants(&adj, 2), vec![true, true, false, false]);
        assert_eq!(descendants(&adj, 1), vec![false; 4]);
    }
}
