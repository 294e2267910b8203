use std::collections::BTreeSet;

use super::MetricGraph;

/// Block-cut decomposition: each block is a list of edge indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blocks {
    pub blocks: Vec<Vec<usize>>,
    pub cut_vertices: Vec<usize>,
}

impl Blocks {
    /// Sorted vertex set of block `i`.
    pub fn vertices(&self, g: &MetricGraph, i: usize) -> Vec<usize> {
        let mut s = BTreeSet::new();
        for &e in &self.blocks[i] {
            s.insert(g.edge(e).u);
            s.insert(g.edge(e).v);
        }
        s.into_iter().collect()
    }
}

/// Biconnected components via an iterative Hopcroft-Tarjan edge stack.
pub fn biconnected_components(g: &MetricGraph) -> Blocks {
    const NONE: usize = usize::MAX;
    let n = g.n();
    let mut disc = vec![NONE; n];
    let mut low = vec![0; n];
    let mut timer = 0;
    let mut estack: Vec<usize> = Vec::new();
    let mut blocks = Vec::new();
    for s in 0..n {
        if disc[s] != NONE {
            continue;
        }
        disc[s] = timer;
        low[s] = timer;
        timer += 1;
        // (vertex, edge to parent, next incidence to scan)
        let mut frames: Vec<(usize, usize, usize)> = vec![(s, NONE, 0)];
        while let Some(&mut (v, pe, ref mut it)) = frames.last_mut() {
            if *it < g.incident(v).len() {
                let (w, ei) = g.incident(v)[*it];
                *it += 1;
                if ei == pe {
                    continue;
                }
                if disc[w] == NONE {
                    estack.push(ei);
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    frames.push((w, ei, 0));
                } else if disc[w] < disc[v] {
                    estack.push(ei);
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                frames.pop();
                if let Some(&(p, _, _)) = frames.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        let mut block = Vec::new();
                        while let Some(e) = estack.pop() {
                            block.push(e);
                            if e == pe {
                                break;
                            }
                        }
                        block.sort_unstable();
                        blocks.push(block);
                    }
                }
            }
        }
    }
    let mut count = vec![0usize; n];
    let mut out = Blocks {
        blocks,
        cut_vertices: Vec::new(),
    };
    for i in 0..out.blocks.len() {
        for v in out.vertices(g, i) {
            count[v] += 1;
        }
    }
    out.cut_vertices = (0..n).filter(|&v| count[v] >= 2).collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_blocks_are_edges() {
        let g = MetricGraph::from_int(4, &[(0, 1, 1), (1, 2, 1), (1, 3, 1)]);
        let b = biconnected_components(&g);
        assert_eq!(b.blocks.len(), 3);
        assert!(b.blocks.iter().all(|x| x.len() == 1));
        assert_eq!(b.cut_vertices, vec![1]);
    }

    #[test]
    fn cycle_is_one_block() {
        let g = MetricGraph::from_int(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]);
        let b = biconnected_components(&g);
        assert_eq!(b.blocks.len(), 1);
        assert!(b.cut_vertices.is_empty());
    }

    #[test]
    fn bowtie_articulation_matches_brute_force() {
        let g = MetricGraph::from_int(
            5,
            &[
                (0, 1, 1),
                (1, 2, 1),
                (2, 0, 1),
                (2, 3, 1),
                (3, 4, 1),
                (4, 2, 1),
            ],
        );
        let b = biconnected_components(&g);
        assert_eq!(b.blocks.len(), 2);
        assert_eq!(b.cut_vertices, vec![2]);
        // a vertex is a cut vertex iff deleting it disconnects the rest
        for v in 0..5 {
            let rest = g.edge_subgraph(|i| g.edge(i).u != v && g.edge(i).v != v);
            let comp = rest.components();
            let labels: BTreeSet<usize> = (0..5).filter(|&x| x != v).map(|x| comp[x]).collect();
            assert_eq!(labels.len() > 1, b.cut_vertices.contains(&v));
        }
    }
}
