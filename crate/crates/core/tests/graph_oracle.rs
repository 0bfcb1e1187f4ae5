//! Decision procedure against a brute-force pullback enumeration, exhaustive on ≤ 4 vertices.
//! (The acceptance suite repeats this on ≤ 5 vertices.)

use deltaeq_core::ncgraph::{decide_delta_graphs, Graph};

/// Adjacency rows as bitmasks, independent of the library's graph type.
#[derive(Clone, PartialEq, Eq)]
struct Adj {
    n: usize,
    rows: Vec<u32>,
}

impl Adj {
    fn from_bits(n: usize, bits: u64) -> Adj {
        let mut rows = vec![0u32; n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if bits >> k & 1 == 1 {
                    rows[i] |= 1 << j;
                    rows[j] |= 1 << i;
                }
                k += 1;
            }
        }
        Adj { n, rows }
    }

    fn similar(&self, i: usize, j: usize) -> bool {
        i == j || self.rows[i] >> j & 1 == 1
    }

    fn to_graph(&self) -> Graph {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.rows[i] >> j & 1 == 1 {
                    edges.push((i, j));
                }
            }
        }
        Graph::new(self.n, &edges).unwrap()
    }
}

fn maps(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut f = vec![0; n];
    loop {
        let mut hit = vec![false; k];
        f.iter().for_each(|&v| hit[v] = true);
        if hit.iter().all(|&h| h) {
            out.push(f.clone());
        }
        let mut i = 0;
        while i < n {
            f[i] += 1;
            if f[i] < k {
                break;
            }
            f[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
    }
}

/// Every labelled target `K` on ≤ `max` vertices that `g` pulls back along some surjection.
fn targets(g: &Adj, max: usize) -> Vec<bool> {
    let mut out = Vec::new();
    for k in 1..=max {
        let pairs = k * (k - 1) / 2;
        let ms = if k <= g.n { maps(g.n, k) } else { Vec::new() };
        for bits in 0..1u64 << pairs {
            let target = Adj::from_bits(k, bits);
            let hit = ms.iter().any(|f| {
                (0..g.n).all(|x| (0..g.n).all(|y| g.similar(x, y) == target.similar(f[x], f[y])))
            });
            out.push(hit);
        }
    }
    out
}

#[test]
fn decisions_match_pullback_enumeration_up_to_four_vertices() {
    let max = 4;
    let graphs: Vec<Adj> =
        (1..=max).flat_map(|n| (0..1u64 << (n * (n - 1) / 2)).map(move |b| Adj::from_bits(n, b))).collect();
    let sets: Vec<Vec<bool>> = graphs.iter().map(|g| targets(g, max)).collect();
    let mut positives = 0;
    for (i, g) in graphs.iter().enumerate() {
        for (j, h) in graphs.iter().enumerate().skip(i) {
            let oracle = sets[i].iter().zip(&sets[j]).any(|(a, b)| *a && *b);
            let d = decide_delta_graphs(&g.to_graph(), &h.to_graph()).unwrap();
            assert_eq!(d.is_equivalent(), oracle, "graphs {i} and {j}");
            if let Some(w) = d.witness() {
                assert!(w.verify());
                positives += 1;
            }
        }
    }
    assert!(positives > 0);
}
