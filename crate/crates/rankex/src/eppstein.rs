//! The implicit path heap: a degree-4 DAG whose r-paths correspond one-to-one
//! to source-to-sink paths of the underlying graph, heap-ordered by weight.
//!
//! Every node represents one sidetrack edge `e` (an edge off the shortest-path
//! tree) with its detour cost `δ(e) = w(e) + d(target, sink) − d(source, sink)`.
//! Per graph node `v` there is a heap `H(v)` over the sidetracks whose source
//! lies on `v`'s tree path: the sidetracks leaving `v` itself form a private
//! binary heap whose minimum is inserted persistently (path-copying, leftist
//! melding) into the heap of `v`'s tree successor. A node therefore has at
//! most three heap children (two leftist children plus the rest of its own
//! sidetracks) and one cross edge into the heap of its sidetrack's target.
//! Heap edges weigh `δ(child) − δ(parent)`, cross edges `δ(child)`; all are
//! non-negative, which is what makes the r-path order a min-heap.
//!
//! The persistent construction costs O(|E| log |V|) time and space; nodes live
//! in a flat arena and are addressed by index, never mutated after creation.

use std::sync::Arc;

use crate::dag::{ChainRef, EdgeId, LabelItem, LabeledWeightedDag, ShortestPathTree};
use crate::group::GroupElement;
use crate::{Error, Result};

pub type NodeRef = u32;
pub const NIL: NodeRef = u32::MAX;

#[derive(Clone, Debug)]
struct EppNode<W> {
    /// The represented sidetrack edge of the underlying graph.
    edge: EdgeId,
    delta: W,
    /// Label chain at the sidetrack's source node (λ walks stop here).
    src_chain: ChainRef,
    /// Heap children: leftist left/right, then the own-heap remainder.
    kids: [NodeRef; 3],
    /// Null-path length of the leftist part.
    rank: u8,
}

/// The Eppstein DAG plus the graph and tree it was built from.
#[derive(Debug)]
pub struct EppsteinDag<W> {
    dag: LabeledWeightedDag<W>,
    tree: Option<ShortestPathTree<W>>,
    nodes: Vec<EppNode<W>>,
    heap_root: Vec<NodeRef>,
    edge_count: u64,
}

impl<W: GroupElement> EppsteinDag<W> {
    /// Builds the structure. An empty (pruned-away) graph yields a pathless
    /// instance; otherwise the tree must belong to `dag`.
    pub fn build(dag: LabeledWeightedDag<W>, tree: Option<ShortestPathTree<W>>) -> Result<Self> {
        if dag.is_empty() {
            return Ok(EppsteinDag {
                dag,
                tree: None,
                nodes: Vec::new(),
                heap_root: Vec::new(),
                edge_count: 0,
            });
        }
        let tree = tree.ok_or_else(|| {
            Error::InvalidArgument("non-empty graph needs its shortest-path tree".into())
        })?;
        let mut this = EppsteinDag {
            heap_root: vec![NIL; dag.num_nodes()],
            dag,
            tree: Some(tree),
            nodes: Vec::new(),
            edge_count: 0,
        };
        this.construct();
        Ok(this)
    }

    fn construct(&mut self) {
        let tree = self.tree.take().expect("set in build");
        for &v in tree.topological().iter().rev() {
            // own sidetracks: out-edges that are not the tree parent edge
            let parent = tree.parent_edge(v);
            let succ_root = match parent {
                Some(pe) => self.heap_root[self.dag.edge(pe).to as usize],
                None => NIL, // the sink
            };
            let mut deltas: Vec<(W, EdgeId)> = self
                .dag
                .out_edges(v)
                .iter()
                .copied()
                .filter(|&e| Some(e) != parent)
                .map(|e| {
                    let edge = self.dag.edge(e);
                    let delta = edge.weight.add(tree.dist(edge.to)).sub(tree.dist(v));
                    (delta, e)
                })
                .collect();
            if deltas.is_empty() {
                self.heap_root[v as usize] = succ_root;
                continue;
            }
            deltas.sort();
            // private binary heap over the non-minimal own sidetracks: a
            // sorted array in heap shape, children of i at 2i+1 and 2i+2
            let rest = &deltas[1..];
            let mut rest_refs = vec![NIL; rest.len()];
            for i in (0..rest.len()).rev() {
                let kid = |j: usize| if j < rest.len() { rest_refs[j] } else { NIL };
                let kids = [kid(2 * i + 1), kid(2 * i + 2), NIL];
                let (delta, edge) = rest[i].clone();
                rest_refs[i] = self.alloc(edge, delta, tree.chain(v), kids, 1);
            }
            let rest_root = rest_refs.first().copied().unwrap_or(NIL);
            let (delta, edge) = deltas[0].clone();
            let entry = self.alloc(edge, delta, tree.chain(v), [NIL, NIL, rest_root], 1);
            self.heap_root[v as usize] = self.meld(succ_root, entry);
        }
        self.edge_count += u64::from(self.heap_root[self.dag.source() as usize] != NIL);
        self.tree = Some(tree);
    }

    fn alloc(
        &mut self,
        edge: EdgeId,
        delta: W,
        src_chain: ChainRef,
        kids: [NodeRef; 3],
        rank: u8,
    ) -> NodeRef {
        let cross = self.cross_target(edge).is_some() as u64;
        self.edge_count += kids.iter().filter(|&&k| k != NIL).count() as u64 + cross;
        self.nodes.push(EppNode { edge, delta, src_chain, kids, rank });
        (self.nodes.len() - 1) as NodeRef
    }

    fn rank(&self, x: NodeRef) -> u8 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].rank
        }
    }

    fn key(&self, x: NodeRef) -> (&W, EdgeId) {
        let n = &self.nodes[x as usize];
        (&n.delta, n.edge)
    }

    /// Persistent leftist meld; shared subtrees are reused, the spine is
    /// copied into fresh arena nodes.
    fn meld(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        let (top, bot) = if self.key(a) <= self.key(b) { (a, b) } else { (b, a) };
        let top_node = self.nodes[top as usize].clone();
        let merged = self.meld(top_node.kids[1], bot);
        let (left, right) = if self.rank(top_node.kids[0]) >= self.rank(merged) {
            (top_node.kids[0], merged)
        } else {
            (merged, top_node.kids[0])
        };
        let rank = self.rank(right) + 1;
        self.alloc(
            top_node.edge,
            top_node.delta,
            top_node.src_chain,
            [left, right, top_node.kids[2]],
            rank,
        )
    }

    fn cross_target(&self, edge: EdgeId) -> Option<NodeRef> {
        let to = self.dag.edge(edge).to;
        let root = self.heap_root[to as usize];
        (root != NIL).then_some(root)
    }

    pub fn graph(&self) -> &LabeledWeightedDag<W> {
        &self.dag
    }

    pub fn tree(&self) -> Option<&ShortestPathTree<W>> {
        self.tree.as_ref()
    }

    /// Whether any source-to-sink path exists.
    pub fn has_paths(&self) -> bool {
        !self.dag.is_empty()
    }

    /// Number of physical heap nodes.
    pub fn num_heap_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Total number of edges of the structure (heap, cross, and the root's).
    pub fn num_heap_edges(&self) -> u64 {
        self.edge_count
    }

    /// δ-value of a heap node.
    pub fn delta(&self, x: NodeRef) -> &W {
        &self.nodes[x as usize].delta
    }

    /// The sidetrack edge a heap node represents.
    pub fn sidetrack(&self, x: NodeRef) -> EdgeId {
        self.nodes[x as usize].edge
    }

    /// The cursor at the heap representation's root: the shortest path.
    pub fn cursor_root(&self) -> Result<PathCursor<W>> {
        if !self.has_paths() {
            return Err(Error::NoPaths);
        }
        Ok(PathCursor {
            frames: None,
            depth: 0,
            weight_acc: W::zero(),
            label: None,
            parent: None,
        })
    }

    fn tree_ref(&self) -> &ShortestPathTree<W> {
        self.tree.as_ref().expect("non-empty instance")
    }
}

#[derive(Clone, Debug)]
struct Frame {
    node: NodeRef,
    owner_chain: ChainRef,
    base_label: Label,
    prev: Frames,
}

type Frames = Option<Arc<Frame>>;

#[derive(Clone, Debug)]
struct LabelSeg {
    prev: Label,
    owner_chain: ChainRef,
    until_chain: ChainRef,
    edge_item: Option<LabelItem>,
}

type Label = Option<Arc<LabelSeg>>;

/// A position in the implicit heap: one r-path, hence one source-to-sink
/// path. Cheap to clone; child and parent moves are O(1) and never touch the
/// label, which stays a persistent chain of shared segments.
#[derive(Clone, Debug)]
pub struct PathCursor<W> {
    frames: Frames,
    depth: u32,
    weight_acc: W,
    label: Label,
    parent: Option<Arc<PathCursor<W>>>,
}

/// Kind of edge a child move traverses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Heap,
    Cross,
}

impl<W: GroupElement> PathCursor<W> {
    /// Number of induced heap nodes (traversed heaps).
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Accumulated weight over the traversed heap edges.
    pub fn detour_weight(&self) -> &W {
        &self.weight_acc
    }

    /// Absolute weight of the denoted source-to-sink path.
    pub fn path_weight(&self, epp: &EppsteinDag<W>) -> W {
        epp.tree_ref().dist(epp.graph().source()).add(&self.weight_acc)
    }

    fn top(&self) -> Option<&Arc<Frame>> {
        self.frames.as_ref()
    }

    /// The current heap node, if any (`None` at the root).
    pub fn heap_node(&self) -> Option<NodeRef> {
        self.top().map(|f| f.node)
    }

    /// The available child slots, in fixed order: heap children then cross.
    pub fn branch_targets(&self, epp: &EppsteinDag<W>) -> Vec<(MoveKind, NodeRef)> {
        let mut out = Vec::with_capacity(4);
        match self.top() {
            None => {
                let root = epp.heap_root[epp.graph().source() as usize];
                if root != NIL {
                    out.push((MoveKind::Cross, root));
                }
            }
            Some(frame) => {
                let node = &epp.nodes[frame.node as usize];
                for &k in &node.kids {
                    if k != NIL {
                        out.push((MoveKind::Heap, k));
                    }
                }
                if let Some(root) = epp.cross_target(node.edge) {
                    out.push((MoveKind::Cross, root));
                }
            }
        }
        out
    }

    pub fn out_degree(&self, epp: &EppsteinDag<W>) -> usize {
        self.branch_targets(epp).len()
    }

    /// Moves to child `branch`; `branch` indexes the slots reported by
    /// [`out_degree`](Self::out_degree).
    pub fn child(&self, epp: &EppsteinDag<W>, branch: usize) -> Result<PathCursor<W>> {
        let branches = self.branch_targets(epp);
        let &(kind, target) = branches
            .get(branch)
            .ok_or(Error::BranchOutOfRange { branch, degree: branches.len() })?;
        let tnode = &epp.nodes[target as usize];
        let edge_item = epp.graph().edge(tnode.edge).label;
        let parent = Some(Arc::new(self.clone()));
        match kind {
            MoveKind::Heap => {
                let frame = self.top().expect("heap moves need a frame");
                let step = tnode.delta.sub(epp.delta(frame.node));
                let label = Some(Arc::new(LabelSeg {
                    prev: frame.base_label.clone(),
                    owner_chain: frame.owner_chain,
                    until_chain: tnode.src_chain,
                    edge_item,
                }));
                Ok(PathCursor {
                    frames: Some(Arc::new(Frame {
                        node: target,
                        owner_chain: frame.owner_chain,
                        base_label: frame.base_label.clone(),
                        prev: frame.prev.clone(),
                    })),
                    depth: self.depth,
                    weight_acc: self.weight_acc.add(&step),
                    label,
                    parent,
                })
            }
            MoveKind::Cross => {
                let owner = match self.top() {
                    None => epp.graph().source(),
                    Some(frame) => epp.graph().edge(epp.nodes[frame.node as usize].edge).to,
                };
                let owner_chain = epp.tree_ref().chain(owner);
                let label = Some(Arc::new(LabelSeg {
                    prev: self.label.clone(),
                    owner_chain,
                    until_chain: tnode.src_chain,
                    edge_item,
                }));
                Ok(PathCursor {
                    frames: Some(Arc::new(Frame {
                        node: target,
                        owner_chain,
                        base_label: self.label.clone(),
                        prev: self.frames.clone(),
                    })),
                    depth: self.depth + 1,
                    weight_acc: self.weight_acc.add(&tnode.delta),
                    label,
                    parent,
                })
            }
        }
    }

    /// Inverse of [`child`](Self::child).
    pub fn to_parent(&self) -> Result<PathCursor<W>> {
        match &self.parent {
            Some(p) => Ok((**p).clone()),
            None => Err(Error::AtRoot),
        }
    }

    pub fn is_root(&self) -> bool {
        self.parent.is_none()
    }

    /// The induced heap nodes, outermost first. Test support.
    pub fn induced_nodes(&self) -> Vec<NodeRef> {
        let mut out = Vec::with_capacity(self.depth as usize);
        let mut cur = &self.frames;
        while let Some(f) = cur {
            out.push(f.node);
            cur = &f.prev;
        }
        out.reverse();
        out
    }

    /// The denoted path's output label. Work is linear in the emitted length
    /// plus the number of traversed heaps.
    pub fn materialize_label(&self, epp: &EppsteinDag<W>) -> Vec<LabelItem> {
        self.materialize_label_counted(epp).0
    }

    /// As [`materialize_label`](Self::materialize_label), also reporting the
    /// number of chain/segment steps taken (the instrumented label cost).
    pub fn materialize_label_counted(&self, epp: &EppsteinDag<W>) -> (Vec<LabelItem>, usize) {
        let tree = epp.tree_ref();
        let mut segs = Vec::with_capacity(self.depth as usize);
        let mut cur = &self.label;
        while let Some(seg) = cur {
            segs.push(seg);
            cur = &seg.prev;
        }
        let mut out = Vec::new();
        let mut steps = segs.len();
        for seg in segs.into_iter().rev() {
            steps += tree.write_chain_until(seg.owner_chain, seg.until_chain, &mut out);
            if let Some(item) = seg.edge_item {
                out.push(item);
                steps += 1;
            }
        }
        // suffix after the last sidetrack: the tree path from its target
        let tail = match self.top() {
            None => tree.chain(epp.graph().source()),
            Some(frame) => {
                let edge = epp.nodes[frame.node as usize].edge;
                tree.chain(epp.graph().edge(edge).to)
            }
        };
        let before = out.len();
        tree.write_chain(tail, &mut out);
        steps += out.len() - before;
        (out, steps)
    }

    /// Stable identity of the denoted r-path, for tests.
    pub fn identity(&self) -> (Vec<NodeRef>, W) {
        (self.induced_nodes(), self.weight_acc.clone())
    }
}
