//! The document×transducer product DAG and its shortest-path tree.
//!
//! Nodes are (state, position) pairs; an edge from layer `i-1` to layer `i`
//! exists for every transition that consumes the document's i-th symbol. The
//! edge carries the transition's weight and, for non-empty markers, the label
//! `(marker, i)`. Accepting runs correspond one-to-one to source-to-sink
//! paths, preserving weight and output.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::group::GroupElement;
use crate::transducer::{CostTransducer, Document, MarkerId, StateId};
use crate::{Error, Result};

pub type NodeId = u32;
pub type EdgeId = u32;

/// Handle into the shared label-chain arena; `CHAIN_NIL` is the empty chain.
pub type ChainRef = u32;
pub const CHAIN_NIL: ChainRef = u32::MAX;

/// One output item: a (marker, position) pair.
pub type LabelItem = (MarkerId, u32);

#[derive(Clone, Debug)]
pub struct DagEdge<W> {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: W,
    pub label: Option<LabelItem>,
}

#[derive(Clone, Copy, Debug)]
pub struct NodeMeta {
    pub state: StateId,
    pub layer: u32,
}

/// A DAG with group weights and at most one label item per edge.
#[derive(Clone, Debug)]
pub struct LabeledWeightedDag<W> {
    nodes: Vec<NodeMeta>,
    edges: Vec<DagEdge<W>>,
    out: Vec<Vec<EdgeId>>,
    source: NodeId,
    sink: NodeId,
}

/// Construction of arbitrary test DAGs and of the product DAG.
pub struct DagBuilder<W> {
    nodes: Vec<NodeMeta>,
    edges: Vec<DagEdge<W>>,
    source: Option<NodeId>,
    sink: Option<NodeId>,
}

impl<W: GroupElement> Default for DagBuilder<W> {
    fn default() -> Self {
        Self::new()
    }
}

impl<W: GroupElement> DagBuilder<W> {
    pub fn new() -> Self {
        DagBuilder { nodes: Vec::new(), edges: Vec::new(), source: None, sink: None }
    }

    pub fn node(&mut self, state: StateId, layer: u32) -> NodeId {
        self.nodes.push(NodeMeta { state, layer });
        (self.nodes.len() - 1) as NodeId
    }

    pub fn edge(&mut self, from: NodeId, to: NodeId, weight: W, label: Option<LabelItem>) -> EdgeId {
        self.edges.push(DagEdge { from, to, weight, label });
        (self.edges.len() - 1) as EdgeId
    }

    pub fn source(&mut self, s: NodeId) -> &mut Self {
        self.source = Some(s);
        self
    }

    pub fn sink(&mut self, t: NodeId) -> &mut Self {
        self.sink = Some(t);
        self
    }

    pub fn build(self) -> Result<LabeledWeightedDag<W>> {
        let source = self.source.ok_or_else(|| Error::Validation("no source".into()))?;
        let sink = self.sink.ok_or_else(|| Error::Validation("no sink".into()))?;
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from as usize].push(i as EdgeId);
        }
        let dag =
            LabeledWeightedDag { nodes: self.nodes, edges: self.edges, out, source, sink };
        dag.topological_order()
            .ok_or_else(|| Error::Validation("graph contains a cycle".into()))?;
        Ok(dag)
    }
}

impl<W: GroupElement> LabeledWeightedDag<W> {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: NodeId) -> &NodeMeta {
        &self.nodes[v as usize]
    }

    pub fn edge(&self, e: EdgeId) -> &DagEdge<W> {
        &self.edges[e as usize]
    }

    pub fn edges(&self) -> &[DagEdge<W>] {
        &self.edges
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out[v as usize]
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    /// Topological order, or `None` if the graph has a cycle.
    fn topological_order(&self) -> Option<Vec<NodeId>> {
        let n = self.nodes.len();
        let mut indeg = vec![0u32; n];
        for e in &self.edges {
            indeg[e.to as usize] += 1;
        }
        let mut queue: VecDeque<NodeId> =
            (0..n as NodeId).filter(|&v| indeg[v as usize] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &e in &self.out[v as usize] {
                let to = self.edges[e as usize].to as usize;
                indeg[to] -= 1;
                if indeg[to] == 0 {
                    queue.push_back(to as NodeId);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Number of source-to-sink paths, saturating at `u64::MAX`.
    pub fn count_paths(&self) -> u64 {
        if self.nodes.is_empty() {
            return 0;
        }
        let order = self.topological_order().expect("construction rejects cycles");
        let mut count = vec![0u64; self.nodes.len()];
        count[self.sink as usize] = 1;
        for &v in order.iter().rev() {
            for &e in &self.out[v as usize] {
                let c = count[self.edges[e as usize].to as usize];
                count[v as usize] = count[v as usize].saturating_add(c);
            }
        }
        count[self.source as usize]
    }

    /// GraphViz rendering for debugging; marker names resolved by `marker_of`.
    pub fn to_dot(&self, marker_of: impl Fn(MarkerId) -> String) -> String {
        let mut s = String::from("digraph product {\n  rankdir=LR;\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if i as NodeId == self.sink {
                "doublecircle"
            } else if i as NodeId == self.source {
                "box"
            } else {
                "circle"
            };
            let _ = writeln!(s, "  n{i} [label=\"q{}@{}\", shape={shape}];", n.state, n.layer);
        }
        for e in &self.edges {
            let label = match &e.label {
                Some((m, p)) => format!("{}@{p}", marker_of(*m)),
                None => String::new(),
            };
            let _ = writeln!(
                s,
                "  n{} -> n{} [label=\"{:?} {label}\"];",
                e.from, e.to, e.weight
            );
        }
        s.push_str("}\n");
        s
    }
}

/// Builds the product DAG of a single-final-state transducer and a document.
/// Runs in O(|D|·|T|): transitions are indexed by symbol once.
pub fn build_product_dag<W: GroupElement>(
    transducer: &CostTransducer<W>,
    doc: &Document,
) -> Result<LabeledWeightedDag<W>> {
    let finals = transducer.final_states();
    let [qf] = finals.as_slice() else {
        return Err(Error::InvalidArgument(
            "product construction needs a single-final-state transducer".into(),
        ));
    };
    transducer.check_document(doc)?;
    let num_states = transducer.num_states() as u32;
    let n = doc.len() as u32;
    let node_id = |q: StateId, layer: u32| -> NodeId { layer * num_states + q };

    let mut builder = DagBuilder::new();
    for layer in 0..=n {
        for q in 0..num_states {
            builder.node(q, layer);
        }
    }
    for i in 1..=n {
        let symbol = doc.symbol(i as usize);
        for &t in transducer.transitions_on(symbol) {
            let tr = &transducer.transitions()[t as usize];
            let label = (tr.marker != transducer.empty_marker()).then_some((tr.marker, i));
            builder.edge(node_id(tr.from, i - 1), node_id(tr.to, i), tr.weight.clone(), label);
        }
    }
    builder.source(node_id(transducer.initial(), 0));
    builder.sink(node_id(*qf, n));
    builder.build()
}

/// Drops every node that is not reachable from the source or cannot reach the
/// sink; the source-to-sink path set is unchanged. If the sink is unreachable
/// the result is the empty graph.
pub fn prune<W: GroupElement>(dag: &LabeledWeightedDag<W>) -> LabeledWeightedDag<W> {
    let n = dag.nodes.len();
    if n == 0 {
        return dag.clone();
    }
    let mut forward = vec![false; n];
    let mut stack = vec![dag.source];
    forward[dag.source as usize] = true;
    while let Some(v) = stack.pop() {
        for &e in &dag.out[v as usize] {
            let to = dag.edges[e as usize].to;
            if !forward[to as usize] {
                forward[to as usize] = true;
                stack.push(to);
            }
        }
    }
    let mut incoming = vec![Vec::new(); n];
    for (i, e) in dag.edges.iter().enumerate() {
        incoming[e.to as usize].push(i as EdgeId);
    }
    let mut backward = vec![false; n];
    let mut stack = vec![dag.sink];
    backward[dag.sink as usize] = true;
    while let Some(v) = stack.pop() {
        for &e in &incoming[v as usize] {
            let from = dag.edges[e as usize].from;
            if !backward[from as usize] {
                backward[from as usize] = true;
                stack.push(from);
            }
        }
    }
    let keep: Vec<bool> = (0..n).map(|v| forward[v] && backward[v]).collect();
    if !keep[dag.source as usize] || !keep[dag.sink as usize] {
        return LabeledWeightedDag {
            nodes: Vec::new(),
            edges: Vec::new(),
            out: Vec::new(),
            source: 0,
            sink: 0,
        };
    }
    let mut remap = vec![NodeId::MAX; n];
    let mut nodes = Vec::new();
    for v in 0..n {
        if keep[v] {
            remap[v] = nodes.len() as NodeId;
            nodes.push(dag.nodes[v]);
        }
    }
    let mut edges = Vec::new();
    let mut out = vec![Vec::new(); nodes.len()];
    for e in &dag.edges {
        if keep[e.from as usize] && keep[e.to as usize] {
            let id = edges.len() as EdgeId;
            let from = remap[e.from as usize];
            edges.push(DagEdge {
                from,
                to: remap[e.to as usize],
                weight: e.weight.clone(),
                label: e.label,
            });
            out[from as usize].push(id);
        }
    }
    LabeledWeightedDag {
        nodes,
        edges,
        out,
        source: remap[dag.source as usize],
        sink: remap[dag.sink as usize],
    }
}

/// Shortest-path tree toward the sink: per node the distance `d(v, sink)`,
/// the chosen parent edge, and the suffix label as a persistent chain whose
/// tails are shared between a node and its tree successor.
#[derive(Clone, Debug)]
pub struct ShortestPathTree<W> {
    dist: Vec<W>,
    parent: Vec<Option<EdgeId>>,
    chain: Vec<ChainRef>,
    chain_items: Vec<(LabelItem, ChainRef)>,
    /// Nodes in topological order (source side first).
    order: Vec<NodeId>,
}

impl<W: GroupElement> ShortestPathTree<W> {
    pub fn dist(&self, v: NodeId) -> &W {
        &self.dist[v as usize]
    }

    pub fn parent_edge(&self, v: NodeId) -> Option<EdgeId> {
        self.parent[v as usize]
    }

    pub fn chain(&self, v: NodeId) -> ChainRef {
        self.chain[v as usize]
    }

    pub fn topological(&self) -> &[NodeId] {
        &self.order
    }

    pub fn chain_item(&self, c: ChainRef) -> (LabelItem, ChainRef) {
        self.chain_items[c as usize]
    }

    /// Appends the chain's items (the suffix label β_v) to `out`.
    pub fn write_chain(&self, mut c: ChainRef, out: &mut Vec<LabelItem>) {
        while c != CHAIN_NIL {
            let (item, next) = self.chain_items[c as usize];
            out.push(item);
            c = next;
        }
    }

    /// The suffix label β_v materialized.
    pub fn suffix_label(&self, v: NodeId) -> Vec<LabelItem> {
        let mut out = Vec::new();
        self.write_chain(self.chain[v as usize], &mut out);
        out
    }

    /// Items of `from`'s chain up to (not including) the shared tail `until`,
    /// i.e. the label of the tree path between the two nodes owning the
    /// chains. Returns the number of arena steps taken.
    pub fn write_chain_until(
        &self,
        from: ChainRef,
        until: ChainRef,
        out: &mut Vec<LabelItem>,
    ) -> usize {
        let mut c = from;
        let mut steps = 0;
        while c != until {
            debug_assert!(c != CHAIN_NIL, "until is not a tail of from");
            let (item, next) = self.chain_items[c as usize];
            out.push(item);
            c = next;
            steps += 1;
        }
        steps
    }
}

/// One backward relaxation pass in reverse topological order. Valid for
/// arbitrary group weights because the graph is acyclic. Ties pick the
/// smallest edge id, fixing one canonical tree.
pub fn shortest_path_tree<W: GroupElement>(
    dag: &LabeledWeightedDag<W>,
) -> Result<ShortestPathTree<W>> {
    if dag.is_empty() {
        return Err(Error::NoPaths);
    }
    let order = dag.topological_order().expect("construction rejects cycles");
    let n = dag.num_nodes();
    let mut dist: Vec<Option<W>> = vec![None; n];
    let mut parent: Vec<Option<EdgeId>> = vec![None; n];
    let mut chain: Vec<ChainRef> = vec![CHAIN_NIL; n];
    let mut chain_items: Vec<(LabelItem, ChainRef)> = Vec::new();
    dist[dag.sink as usize] = Some(W::zero());

    for &v in order.iter().rev() {
        if v == dag.sink {
            continue;
        }
        let mut best: Option<(W, EdgeId)> = None;
        for &e in dag.out_edges(v) {
            let edge = dag.edge(e);
            let Some(d_to) = dist[edge.to as usize].as_ref() else {
                continue;
            };
            let cand = edge.weight.add(d_to);
            match &best {
                Some((w, _)) if *w <= cand => {}
                _ => best = Some((cand, e)),
            }
        }
        if let Some((w, e)) = best {
            dist[v as usize] = Some(w);
            parent[v as usize] = Some(e);
            let edge = dag.edge(e);
            chain[v as usize] = match edge.label {
                Some(item) => {
                    chain_items.push((item, chain[edge.to as usize]));
                    (chain_items.len() - 1) as ChainRef
                }
                None => chain[edge.to as usize],
            };
        }
    }
    // after pruning every node reaches the sink
    let dist: Vec<W> = dist
        .into_iter()
        .map(|d| d.ok_or(Error::NoPaths))
        .collect::<Result<_>>()
        .map_err(|_| Error::InvalidArgument("graph must be pruned first".into()))?;
    Ok(ShortestPathTree { dist, parent, chain, chain_items, order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::transducer::{brute_force_outputs, normalize_single_final, TransducerBuilder};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn node_count_is_states_times_layers() {
        let mut b = TransducerBuilder::new("ab", "_");
        let q0 = b.state("q0");
        let q1 = b.state("q1");
        b.initial(q0).make_final(q1);
        b.transition(q0, 'a', 1, b.empty_marker(), q1);
        let t = normalize_single_final(&b.build().unwrap());
        let dag = build_product_dag(&t, &Document::new("ab")).unwrap();
        assert_eq!(dag.num_nodes(), t.num_states() * 3);
    }

    #[test]
    fn single_transition_edge() {
        let mut b = TransducerBuilder::new("a", "_");
        let q0 = b.state("q0");
        let qf = b.state("qf");
        let g = b.marker("g");
        b.initial(q0).make_final(qf);
        b.transition(q0, 'a', 7, g, qf);
        let t = b.build().unwrap();
        let dag = build_product_dag(&t, &Document::new("a")).unwrap();
        assert_eq!(dag.num_edges(), 1);
        let e = dag.edge(0);
        assert_eq!(e.weight, 7);
        assert_eq!(e.label, Some((g, 1)));
        assert_eq!(dag.node(e.from).layer, 0);
        assert_eq!(dag.node(e.to).layer, 1);
    }

    #[test]
    fn paths_match_oracle_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(41);
        let mut checked = 0;
        for _ in 0..150 {
            let t = fixtures::random_transducer(&mut rng, 5, 3, 2);
            let doc = fixtures::random_document(&mut rng, &t, 1, 8);
            let Ok(outs) = brute_force_outputs(&t, &doc) else {
                continue; // ambiguous instances are rejected by the oracle
            };
            let n = normalize_single_final(&t);
            let dag = prune(&build_product_dag(&n, &doc).unwrap());
            let mut paths = fixtures::all_paths(&dag);
            // accepting runs and s-to-sink paths correspond one-to-one; on
            // unambiguous instances outputs are unique
            let runs = n.accepting_runs(&doc, 1_000_000).unwrap();
            assert_eq!(paths.len(), runs.len());
            paths.sort();
            paths.dedup();
            let mut expected: Vec<_> =
                outs.into_iter().map(|o| (o.weight, o.entries)).collect();
            expected.sort();
            assert_eq!(paths, expected);
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn prune_unreachable_sink_gives_empty_graph() {
        let mut b = DagBuilder::<i64>::new();
        let s = b.node(0, 0);
        let t = b.node(0, 1);
        let dead = b.node(1, 1);
        b.edge(s, dead, 1, None);
        b.source(s).sink(t);
        let dag = b.build().unwrap();
        let pruned = prune(&dag);
        assert!(pruned.is_empty());
        assert_eq!(pruned.count_paths(), 0);
    }

    #[test]
    fn prune_drops_dead_ends() {
        let mut b = DagBuilder::<i64>::new();
        let s = b.node(0, 0);
        let mid = b.node(1, 1);
        let dead = b.node(2, 1);
        let t = b.node(0, 2);
        b.edge(s, mid, 1, None);
        b.edge(s, dead, 1, None);
        b.edge(mid, t, 1, None);
        b.source(s).sink(t);
        let dag = b.build().unwrap();
        let pruned = prune(&dag);
        assert_eq!(pruned.num_nodes(), 3);
        assert_eq!(pruned.num_edges(), 2);
    }

    #[test]
    fn prune_preserves_path_multiset() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..60 {
            let dag = fixtures::random_dag(&mut rng, 14, 0.3, 3, 2);
            let mut before = fixtures::all_paths(&dag);
            let mut after = fixtures::all_paths(&prune(&dag));
            before.sort();
            after.sort();
            assert_eq!(before, after);
        }
    }

    #[test]
    fn tree_on_single_path() {
        let mut b = DagBuilder::<i64>::new();
        let s = b.node(0, 0);
        let m = b.node(0, 1);
        let t = b.node(0, 2);
        b.edge(s, m, 1, Some((1, 1)));
        b.edge(m, t, 2, None);
        b.source(s).sink(t);
        let dag = b.build().unwrap();
        let tree = shortest_path_tree(&dag).unwrap();
        assert_eq!(*tree.dist(s), 3);
        assert_eq!(tree.suffix_label(s), vec![(1, 1)]);
    }

    #[test]
    fn tree_on_diamond() {
        let mut b = DagBuilder::<i64>::new();
        let s = b.node(0, 0);
        let a = b.node(1, 1);
        let bb = b.node(2, 1);
        let t = b.node(0, 2);
        b.edge(s, a, 1, None);
        b.edge(s, bb, 2, None);
        b.edge(a, t, 5, None);
        b.edge(bb, t, 1, None);
        b.source(s).sink(t);
        let dag = b.build().unwrap();
        let tree = shortest_path_tree(&dag).unwrap();
        assert_eq!(*tree.dist(s), 3);
        // route via b
        assert_eq!(tree.parent_edge(s), Some(1));
    }

    #[test]
    fn tree_matches_exhaustive_minimum() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..80 {
            let dag = prune(&fixtures::random_dag(&mut rng, 30, 0.25, 4, 2));
            if dag.is_empty() {
                continue;
            }
            let tree = shortest_path_tree(&dag).unwrap();
            let paths = fixtures::all_paths(&dag);
            let min = paths.iter().map(|(w, _)| *w).min().unwrap();
            assert_eq!(*tree.dist(dag.source()), min);
            // optimality at every node, equality on tree edges
            for v in 0..dag.num_nodes() as NodeId {
                for &e in dag.out_edges(v) {
                    let edge = dag.edge(e);
                    let via = edge.weight.add(tree.dist(edge.to));
                    assert!(*tree.dist(v) <= via);
                    if tree.parent_edge(v) == Some(e) {
                        assert_eq!(*tree.dist(v), via);
                    }
                }
            }
        }
    }

    #[test]
    fn tree_suffix_labels_follow_parents() {
        let mut rng = StdRng::seed_from_u64(19);
        for _ in 0..40 {
            let dag = prune(&fixtures::random_dag(&mut rng, 20, 0.3, 3, 3));
            if dag.is_empty() {
                continue;
            }
            let tree = shortest_path_tree(&dag).unwrap();
            for v in 0..dag.num_nodes() as NodeId {
                // walk parents, accumulate labels and weight
                let mut w = 0i64;
                let mut label = Vec::new();
                let mut cur = v;
                while let Some(e) = tree.parent_edge(cur) {
                    let edge = dag.edge(e);
                    w += edge.weight;
                    if let Some(item) = edge.label {
                        label.push(item);
                    }
                    cur = edge.to;
                }
                assert_eq!(cur, dag.sink());
                assert_eq!(w, *tree.dist(v));
                assert_eq!(label, tree.suffix_label(v));
            }
        }
    }

    #[test]
    fn layers_increase_along_edges() {
        let t = normalize_single_final(&fixtures::spanner_fixture());
        let dag = build_product_dag(&t, &Document::new("cbcabaaac")).unwrap();
        for e in dag.edges() {
            assert_eq!(dag.node(e.from).layer + 1, dag.node(e.to).layer);
        }
    }

    #[test]
    fn dot_export_mentions_nodes() {
        let mut b = DagBuilder::<i64>::new();
        let s = b.node(0, 0);
        let t = b.node(1, 1);
        b.edge(s, t, 1, Some((1, 1)));
        b.source(s).sink(t);
        let dot = b.build().unwrap().to_dot(|m| format!("m{m}"));
        assert!(dot.contains("digraph"));
        assert!(dot.contains("q0@0"));
        assert!(dot.contains("m1@1"));
    }
}
