//! Brute-force reference implementations, independent of the library code.

use hgnet::graph::Graph;

/// Modularity from the textbook double sum over node pairs.
pub fn modularity_pairs(g: &Graph, assignment: &[usize]) -> f64 {
    let n = g.num_nodes();
    let mut a = vec![vec![0.0; n]; n];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        a[u][v] += g.weight(e);
        a[v][u] += g.weight(e);
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Calls `f` on every set partition of `0..n` as a restricted growth string.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if i == cur.len() {
            f(cur);
            return;
        }
        for b in 0..=max + 1 {
            cur[i] = b;
            rec(i + 1, max.max(b), cur, f);
        }
    }
    if n == 0 {
        f(&[]);
        return;
    }
    let mut cur = vec![0; n];
    // node 0 always opens block 0
    rec(1, 0, &mut cur, &mut f);
}

pub fn max_modularity(g: &Graph) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_partition(g.num_nodes(), |p| best = best.max(modularity_pairs(g, p)));
    best
}

/// Every matching of `g` as a sorted list of edge indices.
pub fn all_matchings(g: &Graph) -> Vec<Vec<usize>> {
    fn rec(g: &Graph, e: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if e == g.num_edges() {
            out.push(cur.clone());
            return;
        }
        rec(g, e + 1, used, cur, out);
        let (u, v) = g.edge(e);
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            cur.push(e);
            rec(g, e + 1, used, cur, out);
            cur.pop();
            used[u] = false;
            used[v] = false;
        }
    }
    let mut out = Vec::new();
    rec(g, 0, &mut vec![false; g.num_nodes()], &mut Vec::new(), &mut out);
    out
}

/// Maximal matchings: no edge of `g` can be added.
pub fn maximal_matchings(g: &Graph) -> Vec<Vec<usize>> {
    all_matchings(g)
        .into_iter()
        .filter(|m| {
            let mut used = vec![false; g.num_nodes()];
            for &e in m {
                let (u, v) = g.edge(e);
                used[u] = true;
                used[v] = true;
            }
            g.edges().iter().all(|&(u, v)| used[u] || used[v])
        })
        .collect()
}

/// All-pairs hop distances by Floyd-Warshall; `usize::MAX` if disconnected.
pub fn all_pairs_hops(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.num_nodes();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    for row in d.iter_mut() {
        for x in row.iter_mut() {
            if *x >= inf {
                *x = usize::MAX;
            }
        }
    }
    d
}

pub fn is_connected(g: &Graph) -> bool {
    g.num_nodes() > 0 && all_pairs_hops(g)[0].iter().all(|&d| d != usize::MAX)
}

/// Every labeled graph on `n` nodes, enumerated by edge mask over `u < v`.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0u64..1 << pairs.len()).map(move |mask| {
        let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p);
        Graph::new(n, edges).unwrap()
    })
}
