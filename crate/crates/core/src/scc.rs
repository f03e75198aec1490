//! Strongly connected components and bottom SCCs.

use crate::graph::GameGraph;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

/// All SCCs, each sorted, listed by smallest member.
pub fn sccs(graph: &GameGraph) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(graph.len(), graph.edge_count());
    let nodes: Vec<_> = (0..graph.len()).map(|_| g.add_node(())).collect();
    for v in 0..graph.len() {
        for &u in graph.succ(v) {
            g.add_edge(nodes[v], nodes[u], ());
        }
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Component index of every vertex.
pub fn component_of(graph: &GameGraph, comps: &[Vec<usize>]) -> Vec<usize> {
    let mut comp = vec![0; graph.len()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp[v] = i;
        }
    }
    comp
}

/// SCCs with no edge leaving them.
pub fn bsccs(graph: &GameGraph) -> Vec<Vec<usize>> {
    let comps = sccs(graph);
    let comp = component_of(graph, &comps);
    comps
        .iter()
        .enumerate()
        .filter(|(i, c)| c.iter().all(|&v| graph.succ(v).iter().all(|&u| comp[u] == *i)))
        .map(|(_, c)| c.clone())
        .collect()
}

pub fn is_strongly_connected(graph: &GameGraph) -> bool {
    sccs(graph).len() == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::GameGraph;
    use crate::num::q;

    fn names(g: &GameGraph, sets: Vec<Vec<usize>>) -> Vec<Vec<String>> {
        sets.into_iter().map(|s| s.into_iter().map(|v| g.id(v).to_string()).collect()).collect()
    }

    #[test]
    fn loops_is_one_bscc() {
        let g = fixtures::loops();
        assert_eq!(names(&g, bsccs(&g)), vec![vec!["v1", "v2"]]);
    }

    #[test]
    fn chain_bsccs_are_the_targets() {
        let g = fixtures::chain();
        assert_eq!(names(&g, bsccs(&g)), vec![vec!["u1"], vec!["u2"]]);
        assert_eq!(sccs(&g).len(), 3);
    }

    #[test]
    fn disjoint_loops_give_two_bsccs() {
        let g = GameGraph::from_parts(
            &[("a1", q(1)), ("a2", q(-1)), ("b1", q(1)), ("b2", q(-1))],
            &[("a1", "a2"), ("a2", "a1"), ("a1", "a1"), ("b1", "b2"), ("b2", "b1"), ("b2", "b2")],
        );
        assert_eq!(names(&g, bsccs(&g)), vec![vec!["a1", "a2"], vec!["b1", "b2"]]);
    }
}
