//! Ranked enumeration over the implicit path heap.
//!
//! Three enumerators share one output contract (weights non-decreasing, every
//! path exactly once, ties in discovery order):
//!
//! - [`SimpleEnumerator`]: best-first traversal. Pending cursors are queued in
//!   per-edge bucket lists whose weights are non-decreasing, and only the
//!   front of each non-empty bucket sits in the auxiliary min-heap, which
//!   therefore never outgrows the heap structure's edge count plus one.
//! - [`select_k_smallest`]: bounded best-first extraction of the k smallest
//!   paths, unsorted, O(k log k) heap operations.
//! - [`EpochEnumerator`]: emits rank range `(2^{i-2}·n, 2^{i-1}·n]` in epoch
//!   `i` from a pre-sorted buffer while interleaving, under a per-output work
//!   budget, the selection and n-sum sort that prepare the next epoch.
//!
//! [`prepare`] and [`enumerate_transducer`] wire the whole pipeline together
//! for a transducer and a document.

use std::cmp::Reverse;
use std::sync::Arc;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use crate::dag::{build_product_dag, prune, shortest_path_tree, LabelItem};
use crate::eppstein::{EppsteinDag, MoveKind, PathCursor};
use crate::group::{distinctify, CmpCounter, GeneratorBasis, GroupElement, NSum};
use crate::nsum::{sort_nsums, Backend, SortOptions};
use crate::transducer::{normalize_single_final, CostTransducer, Document};
use crate::Result;

/// One emitted element: the k-th smallest path's weight and output items.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedOutput<W> {
    pub rank: u64,
    pub weight: W,
    pub items: Vec<LabelItem>,
}

/// Instrumentation shared by the enumerators.
#[derive(Clone, Debug, Default)]
pub struct EnumStats {
    pub emitted: u64,
    /// Current and peak auxiliary-heap size (simple enumerator).
    pub aux_size: usize,
    pub max_aux_size: usize,
    /// `|edges(D_G)| + 1`, the bound the auxiliary heap must respect.
    pub aux_bound: u64,
    /// Current epoch index (epoch enumerator), 1-based; 0 before the first.
    pub epoch: u32,
    pub buffer_underruns: u64,
    /// Abstract work units: heap operations, group comparisons, cursor moves.
    pub work_units: u64,
}

const ROOT_BUCKET: u64 = u64::MAX;

struct Pending<W> {
    cursor: PathCursor<W>,
    seq: u64,
}

/// Best-first enumerator with the bucket-list tweak.
pub struct SimpleEnumerator<'a, W: GroupElement> {
    epp: &'a EppsteinDag<W>,
    buckets: HashMap<u64, VecDeque<Pending<W>>>,
    aux: BinaryHeap<Reverse<(W, u64, u64)>>, // (detour weight, seq, bucket)
    next_seq: u64,
    stats: EnumStats,
}

impl<'a, W: GroupElement> SimpleEnumerator<'a, W> {
    pub fn new(epp: &'a EppsteinDag<W>) -> Self {
        let mut this = SimpleEnumerator {
            epp,
            buckets: HashMap::new(),
            aux: BinaryHeap::new(),
            next_seq: 0,
            stats: EnumStats { aux_bound: epp.num_heap_edges() + 1, ..EnumStats::default() },
        };
        if let Ok(root) = epp.cursor_root() {
            this.enqueue(ROOT_BUCKET, root);
        }
        this
    }

    fn enqueue(&mut self, bucket: u64, cursor: PathCursor<W>) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let queue = self.buckets.entry(bucket).or_default();
        if let Some(back) = queue.back() {
            // the invariant the bucket lists live by
            assert!(
                back.cursor.detour_weight() <= cursor.detour_weight(),
                "bucket weights must be non-decreasing"
            );
        }
        let was_empty = queue.is_empty();
        queue.push_back(Pending { cursor, seq });
        if was_empty {
            let front = &self.buckets[&bucket][0];
            self.aux.push(Reverse((front.cursor.detour_weight().clone(), front.seq, bucket)));
            self.stats.aux_size = self.aux.len();
            self.stats.max_aux_size = self.stats.max_aux_size.max(self.aux.len());
        }
    }

    pub fn stats(&self) -> &EnumStats {
        &self.stats
    }

    /// Pops the next path in (weight, discovery) order and inserts its
    /// children into their arrival-edge buckets.
    fn pop(&mut self) -> Option<Pending<W>> {
        let Reverse((_, _, bucket)) = self.aux.pop()?;
        let queue = self.buckets.get_mut(&bucket).expect("aux entries track fronts");
        let pending = queue.pop_front().expect("aux entries track fronts");
        if let Some(front) = queue.front() {
            self.aux.push(Reverse((front.cursor.detour_weight().clone(), front.seq, bucket)));
        }
        let parent_key = match pending.cursor.heap_node() {
            Some(node) => node as u64 * 4,
            None => ROOT_BUCKET - 1, // the root's single outgoing edge
        };
        for branch in 0..pending.cursor.out_degree(self.epp) {
            let child = pending.cursor.child(self.epp, branch).expect("branch in range");
            self.enqueue(parent_key - branch as u64, child);
        }
        self.stats.aux_size = self.aux.len();
        self.stats.max_aux_size = self.stats.max_aux_size.max(self.aux.len());
        Some(pending)
    }

    pub fn next_output(&mut self) -> Option<RankedOutput<W>> {
        let pending = self.pop()?;
        self.stats.emitted += 1;
        Some(RankedOutput {
            rank: self.stats.emitted,
            weight: pending.cursor.path_weight(self.epp),
            items: pending.cursor.materialize_label(self.epp),
        })
    }
}

impl<W: GroupElement> Iterator for SimpleEnumerator<'_, W> {
    type Item = RankedOutput<W>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_output()
    }
}

/// The k smallest paths of the heap (all of them if fewer exist), unsorted,
/// by bounded best-first search with O(k log k) heap operations.
pub fn select_k_smallest<W: GroupElement>(
    epp: &EppsteinDag<W>,
    k: usize,
) -> Vec<PathCursor<W>> {
    let mut selector = Selector::new(epp, None);
    let mut out = Vec::new();
    while out.len() < k {
        match selector.step() {
            Some(sel) => out.push(sel.cursor),
            None => break,
        }
    }
    out
}

/// One selected path with its weight coefficient vector.
struct Selected<W> {
    cursor: PathCursor<W>,
    /// Edge-weight-class counts along the denoted path; tracked only when the
    /// selector was built with a class map.
    alpha: Vec<i64>,
}

/// Incremental best-first selection; one `step` pops one path. Optionally
/// maintains per-path coefficient vectors over the graph's distinct edge
/// weights, at O(t) per cursor move.
struct Selector<'a, W: GroupElement> {
    epp: &'a EppsteinDag<W>,
    heap: BinaryHeap<Reverse<(W, u64, usize)>>,
    store: Vec<Option<(PathCursor<W>, Vec<i64>)>>,
    next_seq: u64,
    /// Work units spent: one per heap push/pop and per cursor move.
    units: u64,
    alpha_ctx: Option<Arc<AlphaContext<W>>>,
}

/// Precomputed support for coefficient tracking: the distinct edge weights,
/// each edge's class, and per node the class counts of its tree path.
struct AlphaContext<W> {
    basis: GeneratorBasis<W>,
    class_of_edge: Vec<u32>,
    tree_counts: Vec<Vec<i64>>,
}

impl<W: GroupElement> AlphaContext<W> {
    fn new(epp: &EppsteinDag<W>) -> Option<Self> {
        let dag = epp.graph();
        if dag.is_empty() {
            return None;
        }
        let tree = epp.tree().expect("non-empty instance");
        let mut classes: BTreeMap<W, u32> = BTreeMap::new();
        for e in dag.edges() {
            let next = classes.len() as u32;
            classes.entry(e.weight.clone()).or_insert(next);
        }
        let class_of_edge: Vec<u32> =
            dag.edges().iter().map(|e| classes[&e.weight]).collect();
        let t = classes.len();
        let mut gens = vec![W::zero(); t];
        for (w, i) in &classes {
            gens[*i as usize] = w.clone();
        }
        let mut tree_counts = vec![Vec::new(); dag.num_nodes()];
        for &v in tree.topological().iter() {
            // filled in reverse below
            let _ = v;
        }
        for &v in tree.topological().to_vec().iter().rev() {
            match tree.parent_edge(v) {
                None => tree_counts[v as usize] = vec![0i64; t],
                Some(e) => {
                    let to = dag.edge(e).to as usize;
                    let mut c = tree_counts[to].clone();
                    c[class_of_edge[e as usize] as usize] += 1;
                    tree_counts[v as usize] = c;
                }
            }
        }
        Some(AlphaContext {
            basis: GeneratorBasis::new(gens).expect("non-empty graph has edges or one node"),
            class_of_edge,
            tree_counts,
        })
    }

    /// Applies `sign`× the coefficient delta of detouring through sidetrack
    /// `edge` (the sidetrack itself plus the tree-path difference).
    fn apply_detour(&self, alpha: &mut [i64], epp: &EppsteinDag<W>, edge: u32, sign: i64) {
        let e = epp.graph().edge(edge);
        alpha[self.class_of_edge[edge as usize] as usize] += sign;
        let to = &self.tree_counts[e.to as usize];
        let from = &self.tree_counts[e.from as usize];
        for i in 0..alpha.len() {
            alpha[i] += sign * (to[i] - from[i]);
        }
    }
}

impl<'a, W: GroupElement> Selector<'a, W> {
    fn new(epp: &'a EppsteinDag<W>, alpha_ctx: Option<Arc<AlphaContext<W>>>) -> Self {
        let mut this = Selector {
            epp,
            heap: BinaryHeap::new(),
            store: Vec::new(),
            next_seq: 0,
            units: 0,
            alpha_ctx,
        };
        if let Ok(root) = epp.cursor_root() {
            let alpha = match &this.alpha_ctx {
                Some(ctx) => ctx.tree_counts[epp.graph().source() as usize].clone(),
                None => Vec::new(),
            };
            this.push(root, alpha);
        }
        this
    }

    fn push(&mut self, cursor: PathCursor<W>, alpha: Vec<i64>) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let idx = self.store.len();
        self.heap.push(Reverse((cursor.detour_weight().clone(), seq, idx)));
        self.store.push(Some((cursor, alpha)));
        self.units += 1;
    }

    /// Pops the next path in (weight, discovery) order; `None` when all paths
    /// have been selected.
    fn step(&mut self) -> Option<Selected<W>> {
        let Reverse((_, _seq, idx)) = self.heap.pop()?;
        self.units += 1;
        let (cursor, alpha) = self.store[idx].take().expect("each entry pops once");
        for branch in 0..cursor.out_degree(self.epp) {
            let (kind, target) = cursor.branch_targets(self.epp)[branch];
            let child = cursor.child(self.epp, branch).expect("branch in range");
            self.units += 1;
            let child_alpha = match self.alpha_ctx.as_deref() {
                None => Vec::new(),
                Some(ctx) => {
                    let mut a = alpha.clone();
                    if kind == MoveKind::Heap {
                        let replaced =
                            cursor.heap_node().expect("heap moves leave the root");
                        ctx.apply_detour(&mut a, self.epp, self.epp.sidetrack(replaced), -1);
                    }
                    ctx.apply_detour(&mut a, self.epp, self.epp.sidetrack(target), 1);
                    a
                }
            };
            self.push(child, child_alpha);
        }
        Some(Selected { cursor, alpha })
    }
}

/// Picks the sorting backend for epoch buffers.
fn epoch_sort_options(seed: u64, parallel: bool) -> SortOptions {
    SortOptions { backend: Backend::Auto, seed, parallel, ..SortOptions::default() }
}

/// Epoch-paced enumerator: identical output sequence to the simple
/// enumerator, with per-output work pacing.
pub struct EpochEnumerator<'a, W: GroupElement> {
    epp: &'a EppsteinDag<W>,
    alpha_ctx: Option<Arc<AlphaContext<W>>>,
    n: u64,
    limit: u64,
    seed: u64,
    parallel: bool,
    /// Sorted buffer for the current epoch.
    buffer: VecDeque<(PathCursor<W>, W)>,
    /// Selection in progress for the next epoch, with results so far.
    work: Option<WorkState<'a, W>>,
    /// Highest rank prepared across buffer and completed work.
    prepared_upper: u64,
    /// True once selection has exhausted all paths.
    exhausted: bool,
    budget_per_output: u64,
    units_this_epoch: u64,
    emitted_this_epoch: u64,
    counter: CmpCounter,
    stats: EnumStats,
}

struct WorkState<'a, W: GroupElement> {
    selector: Selector<'a, W>,
    selected: Vec<Selected<W>>,
    target: u64,
    /// Ranks (from, to] become the next buffer once sorting finishes.
    keep_from: u64,
    done: Option<VecDeque<(PathCursor<W>, W)>>,
}

impl<'a, W: GroupElement> EpochEnumerator<'a, W> {
    pub fn new(epp: &'a EppsteinDag<W>, limit: u64, seed: u64, parallel: bool) -> Result<Self> {
        let counter = CmpCounter::new();
        let mut this = EpochEnumerator {
            alpha_ctx: AlphaContext::new(epp).map(Arc::new),
            epp,
            n: (epp.graph().num_nodes() as u64).max(1),
            limit,
            seed,
            parallel,
            buffer: VecDeque::new(),
            work: None,
            prepared_upper: 0,
            exhausted: false,
            budget_per_output: 1,
            units_this_epoch: 0,
            emitted_this_epoch: 0,
            counter,
            stats: EnumStats::default(),
        };
        if !epp.has_paths() || limit == 0 {
            this.exhausted = true;
            return Ok(this);
        }
        // preprocessing: extract and sort the first n elements (epoch 1)
        let mut state = this.start_selection(this.n, 0);
        while state.done.is_none() {
            this.work_step(&mut state)?;
        }
        let prep_units = this.units_this_epoch;
        this.buffer = state.done.take().unwrap();
        this.prepared_upper = this.n.min(this.buffer.len() as u64);
        // per-output budget: twice the calibrated per-element preprocessing
        // cost, in work units
        this.budget_per_output = (2 * prep_units / this.n.max(1)).max(1);
        this.stats.epoch = 1;
        this.units_this_epoch = 0;
        this.emitted_this_epoch = 0;
        this.schedule_next_epoch();
        Ok(this)
    }

    fn start_selection(&mut self, target: u64, keep_from: u64) -> WorkState<'a, W> {
        WorkState {
            selector: Selector::new(self.epp, self.alpha_ctx.clone()),
            selected: Vec::new(),
            target,
            keep_from,
            done: None,
        }
    }

    fn schedule_next_epoch(&mut self) {
        if self.exhausted || self.work.is_some() {
            return;
        }
        if self.limit <= self.prepared_upper {
            // the f-bound is already covered; no further epoch work
            return;
        }
        let target = self.prepared_upper * 2;
        let state = self.start_selection(target, self.prepared_upper);
        self.work = Some(state);
    }

    /// Runs one unit of epoch work: a selection pop, or the final sort when
    /// selection has reached its target.
    fn work_step(&mut self, state: &mut WorkState<'a, W>) -> Result<()> {
        if state.done.is_some() {
            return Ok(());
        }
        let before = state.selector.units;
        if (state.selected.len() as u64) < state.target {
            if let Some(sel) = state.selector.step() {
                state.selected.push(sel);
                self.units_this_epoch += state.selector.units - before;
                return Ok(());
            }
            self.exhausted = true;
        }
        self.units_this_epoch += state.selector.units - before;
        // selection finished: sort, keep the ranks for the next epoch
        let sorted = self.sort_selected(std::mem::take(&mut state.selected))?;
        let from = state.keep_from.min(sorted.len() as u64) as usize;
        state.done = Some(sorted.into_iter().skip(from).collect());
        Ok(())
    }

    /// Sorts selected paths by (weight, discovery index): the weights become
    /// n-sums over the distinct edge weights, made pairwise distinct with the
    /// discovery index, and go through the n-sum sorter.
    fn sort_selected(&mut self, selected: Vec<Selected<W>>) -> Result<Vec<(PathCursor<W>, W)>> {
        let Some(ctx) = self.alpha_ctx.as_deref() else {
            return Ok(Vec::new());
        };
        if selected.is_empty() {
            return Ok(Vec::new());
        }
        // `selected` is in pop order: (weight, discovery) ascending. Using the
        // list position as the distinctness index therefore breaks weight ties
        // by discovery order, matching the simple enumerator.
        let sums: Vec<NSum> = selected
            .iter()
            .map(|s| {
                NSum::new(
                    s.alpha
                        .iter()
                        .map(|&a| u32::try_from(a).expect("path coefficients are non-negative"))
                        .collect(),
                )
            })
            .collect();
        let n_bound = u32::try_from(self.n).unwrap_or(u32::MAX);
        let distinct = distinctify(&sums, &ctx.basis, n_bound)?;
        let before = self.counter.get();
        let outcome = sort_nsums(
            &distinct.sums,
            &distinct.basis,
            distinct.bound,
            &epoch_sort_options(self.seed ^ self.prepared_upper, self.parallel),
            &self.counter,
        )?;
        self.units_this_epoch += self.counter.get() - before;
        let mut cursors: Vec<Option<Selected<W>>> = selected.into_iter().map(Some).collect();
        let ordered: Vec<(PathCursor<W>, W)> = outcome
            .permutation
            .iter()
            .map(|&i| {
                let sel = cursors[i].take().expect("permutation is a bijection");
                let w = sel.cursor.path_weight(self.epp);
                (sel.cursor, w)
            })
            .collect();
        debug_assert!(ordered.windows(2).all(|p| p[0].1 <= p[1].1));
        Ok(ordered)
    }

    pub fn stats(&self) -> &EnumStats {
        &self.stats
    }

    pub fn next_output(&mut self) -> Option<RankedOutput<W>> {
        if self.stats.emitted >= self.limit {
            return None;
        }
        if self.buffer.is_empty() {
            // epoch boundary: the next buffer must be ready
            let Some(mut state) = self.work.take() else {
                return None;
            };
            if state.done.is_none() {
                // pacing miscalibration; finish the work eagerly
                self.stats.buffer_underruns += 1;
                while state.done.is_none() {
                    if self.work_step(&mut state).is_err() {
                        return None;
                    }
                }
            }
            self.buffer = state.done.take().unwrap();
            if self.buffer.is_empty() {
                return None;
            }
            self.prepared_upper = state.target.min(self.prepared_upper + self.buffer.len() as u64);
            self.stats.epoch += 1;
            self.units_this_epoch = 0;
            self.emitted_this_epoch = 0;
            self.schedule_next_epoch();
        }
        // pace: put in the budgeted work before releasing the next element
        if let Some(mut state) = self.work.take() {
            let owed = self.budget_per_output.saturating_mul(self.emitted_this_epoch + 1);
            while state.done.is_none() && self.units_this_epoch < owed {
                if self.work_step(&mut state).is_err() {
                    break;
                }
            }
            self.work = Some(state);
        }
        let (cursor, weight) = self.buffer.pop_front()?;
        self.emitted_this_epoch += 1;
        self.stats.emitted += 1;
        self.stats.work_units = self.units_this_epoch;
        Some(RankedOutput {
            rank: self.stats.emitted,
            weight,
            items: cursor.materialize_label(self.epp),
        })
    }
}

impl<W: GroupElement> Iterator for EpochEnumerator<'_, W> {
    type Item = RankedOutput<W>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_output()
    }
}

/// Which enumerator drives the stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Simple,
    Epoch,
}

/// A preprocessed (transducer, document) query: the pruned product DAG with
/// its shortest-path tree and heap structure, ready to enumerate.
pub struct PreparedQuery<W: GroupElement> {
    epp: EppsteinDag<W>,
    /// The empty document accepts iff the initial state is final; the
    /// single-final-state reduction cannot express that case, so it is
    /// resolved against the original transducer here.
    empty_doc_accepts: bool,
    doc_len: usize,
}

/// Normalizes, builds the product DAG, prunes it, and constructs the
/// shortest-path tree and heap structure.
pub fn prepare<W: GroupElement>(
    transducer: &CostTransducer<W>,
    doc: &Document,
) -> Result<PreparedQuery<W>> {
    transducer.check_document(doc)?;
    if doc.is_empty() {
        return Ok(PreparedQuery {
            epp: EppsteinDag::build(
                prune(&build_product_dag(&normalize_single_final(transducer), doc)?),
                None,
            )?,
            empty_doc_accepts: transducer.is_final(transducer.initial()),
            doc_len: 0,
        });
    }
    let normalized = normalize_single_final(transducer);
    let dag = prune(&build_product_dag(&normalized, doc)?);
    let tree = if dag.is_empty() { None } else { Some(shortest_path_tree(&dag)?) };
    Ok(PreparedQuery { epp: EppsteinDag::build(dag, tree)?, empty_doc_accepts: false, doc_len: doc.len() })
}

impl<W: GroupElement> PreparedQuery<W> {
    pub fn heap(&self) -> &EppsteinDag<W> {
        &self.epp
    }

    pub fn doc_len(&self) -> usize {
        self.doc_len
    }
}

enum StreamKind<'a, W: GroupElement> {
    EmptyDoc { pending: bool },
    Simple(Box<SimpleEnumerator<'a, W>>),
    Epoch(Box<EpochEnumerator<'a, W>>),
}

/// The output stream of [`enumerate_transducer`].
pub struct OutputStream<'a, W: GroupElement> {
    kind: StreamKind<'a, W>,
    remaining: u64,
    emitted: u64,
}

impl<W: GroupElement> OutputStream<'_, W> {
    pub fn stats(&self) -> EnumStats {
        match &self.kind {
            StreamKind::EmptyDoc { .. } => EnumStats { emitted: self.emitted, ..Default::default() },
            StreamKind::Simple(e) => e.stats().clone(),
            StreamKind::Epoch(e) => e.stats().clone(),
        }
    }
}

impl<W: GroupElement> Iterator for OutputStream<'_, W> {
    type Item = RankedOutput<W>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let out = match &mut self.kind {
            StreamKind::EmptyDoc { pending } => {
                if *pending {
                    *pending = false;
                    Some(RankedOutput { rank: 1, weight: W::zero(), items: Vec::new() })
                } else {
                    None
                }
            }
            StreamKind::Simple(e) => e.next_output(),
            StreamKind::Epoch(e) => e.next_output(),
        }?;
        self.remaining -= 1;
        self.emitted += 1;
        Some(out)
    }
}

/// Streams the query's output tuples in non-decreasing weight order, at most
/// `limit` of them (the f-bound). The transducer is assumed unambiguous.
pub fn enumerate_transducer<'a, W: GroupElement>(
    query: &'a PreparedQuery<W>,
    algorithm: Algorithm,
    limit: u64,
    seed: u64,
) -> Result<OutputStream<'a, W>> {
    let kind = if query.doc_len == 0 {
        StreamKind::EmptyDoc { pending: query.empty_doc_accepts }
    } else {
        match algorithm {
            Algorithm::Simple => StreamKind::Simple(Box::new(SimpleEnumerator::new(&query.epp))),
            Algorithm::Epoch => StreamKind::Epoch(Box::new(EpochEnumerator::new(
                &query.epp,
                limit,
                seed,
                true,
            )?)),
        }
    };
    Ok(OutputStream { kind, remaining: limit, emitted: 0 })
}
