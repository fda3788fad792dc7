use std::collections::BTreeSet;

/// Strongly connected components of the digraph with an edge `i → j`
/// whenever `pattern[i][j]` is set.
///
/// Components come back in a topological order of the condensation (every
/// edge between distinct components points from an earlier component to a
/// later one), so relabelling the matrix by the concatenated order makes it
/// block upper triangular. Among valid orders the one taking the available
/// component with the smallest index first is chosen, which keeps an already
/// block triangular matrix in place. Indices inside a component are sorted.
pub fn scc_partition(pattern: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = pattern.len();
    assert!(pattern.iter().all(|r| r.len() == n), "pattern must be square");
    let adj: Vec<Vec<usize>> = pattern
        .iter()
        .map(|row| (0..n).filter(|&j| row[j]).collect())
        .collect();

    let mut comps = tarjan(&adj);
    for c in &mut comps {
        c.sort_unstable();
    }

    // Condensation graph, then Kahn's algorithm keyed on the smallest member.
    let mut comp_of = vec![0; n];
    for (ci, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = ci;
        }
    }
    let m = comps.len();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    let mut indeg = vec![0usize; m];
    for (i, row) in adj.iter().enumerate() {
        for &j in row {
            let (ci, cj) = (comp_of[i], comp_of[j]);
            if ci != cj && succ[ci].insert(cj) {
                indeg[cj] += 1;
            }
        }
    }
    let mut ready: BTreeSet<(usize, usize)> = (0..m)
        .filter(|&c| indeg[c] == 0)
        .map(|c| (comps[c][0], c))
        .collect();
    let mut order = Vec::with_capacity(m);
    while let Some(&first) = ready.iter().next() {
        ready.remove(&first);
        let c = first.1;
        order.push(c);
        for &d in &succ[c] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                ready.insert((comps[d][0], d));
            }
        }
    }
    debug_assert_eq!(order.len(), m);

    let mut slots: Vec<Option<Vec<usize>>> = comps.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|c| slots[c].take().expect("component emitted twice"))
        .collect()
}

/// Iterative Tarjan; components are emitted sinks first.
fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    // (vertex, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        while let Some(&(v, pos)) = call.last() {
            if pos == 0 && index[v] == UNSEEN {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(pos) {
                if let Some(top) = call.last_mut() {
                    top.1 += 1;
                }
                if index[w] == UNSEEN {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}

/// Concatenation of the components, i.e. the relabelling permutation
/// (`perm[new] = old`).
pub fn block_order(parts: &[Vec<usize>]) -> Vec<usize> {
    parts.iter().flatten().copied().collect()
}

pub fn is_irreducible(pattern: &[Vec<bool>]) -> bool {
    pattern.len() <= 1 || scc_partition(pattern).len() == 1
}
