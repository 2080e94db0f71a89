//! Example transducers and randomized instance generators.
//!
//! The span encoding is fixed here and in the README: a span `(i, j)` is
//! emitted as an open bracket marker at position `i` and a close bracket
//! marker at position `j + 1`, the first letter after the span's content.
//! Brackets falling on the same position fuse into one combined marker (for
//! example `]x[y` when one span closes exactly where the next opens), and a
//! span can only close if a letter follows it.

use rand::Rng;

use crate::dag::{DagBuilder, LabelItem, LabeledWeightedDag};
use crate::group::GroupElement;
use crate::transducer::{
    check_unambiguous, CostTransducer, Document, MarkerId, StateId, TransducerBuilder,
};

/// Bracket marker text for opening variable `var`.
pub fn open_bracket(var: &str) -> String {
    format!("[{var}")
}

/// Bracket marker text for closing variable `var`.
pub fn close_bracket(var: &str) -> String {
    format!("]{var}")
}

/// Spanner for `(c+b)* [x (a+b)* ]x a* [y a* ]y c*` over Σ = {a, b, c},
/// all weights zero. Extracts two-variable span tuples under the bracket
/// encoding above.
pub fn spanner_fixture() -> CostTransducer<i64> {
    // phase p consumes letters of the p-th regex block; jumping from phase i
    // to phase j > i crosses the brackets in between, fused into one marker
    let phase_letters: [&[char]; 5] = [&['c', 'b'], &['a', 'b'], &['a'], &['a'], &['c']];
    let brackets = ["[x", "]x", "[y", "]y"];

    let mut b = TransducerBuilder::new("abc", "_");
    let states: Vec<StateId> = (0..5).map(|i| b.state(&format!("s{i}"))).collect();
    b.initial(states[0]).make_final(states[4]);
    for from in 0..5 {
        for to in from..5 {
            let marker = if from == to {
                b.empty_marker()
            } else {
                let crossed: String = brackets[from..to].concat();
                b.marker(&crossed)
            };
            for &letter in phase_letters[to] {
                b.transition(states[from], letter, 0, marker, states[to]);
            }
        }
    }
    b.build().expect("fixture is well-formed")
}

/// The output entries encoding a span tuple under the bracket encoding:
/// each `(var, i, j)` contributes `[var` at position `i` and `]var` at
/// `j + 1`, with brackets landing on one position fused in tuple order
/// (closes before opens).
pub fn span_tuple_output<W: GroupElement>(
    transducer: &CostTransducer<W>,
    spans: &[(&str, u32, u32)],
) -> Vec<(MarkerId, u32)> {
    let mut events: Vec<(u32, String)> = Vec::new();
    for &(var, i, j) in spans {
        events.push((i, open_bracket(var)));
        events.push((j + 1, close_bracket(var)));
    }
    // closes sort before opens at equal positions because spans are listed in
    // opening order and a close of an earlier span precedes a later open
    let mut by_pos: Vec<(u32, String)> = Vec::new();
    events.sort_by(|a, b| a.0.cmp(&b.0));
    for (pos, text) in events {
        match by_pos.last_mut() {
            Some((p, acc)) if *p == pos => acc.push_str(&text),
            _ => by_pos.push((pos, text)),
        }
    }
    by_pos
        .into_iter()
        .map(|(pos, text)| {
            let id = transducer
                .marker_id(&text)
                .unwrap_or_else(|| panic!("marker {text:?} not in fixture"));
            (id, pos)
        })
        .collect()
}

/// Error-tolerant extraction fixture over Σ = {a, b, @}: marks factors of the
/// shape `a+ @ a+` (an address with local part and domain), where the `@` may
/// have been corrupted into a `b`; reading `b` in the `@` slot costs weight 1,
/// everything else weight 0. The close bracket needs one following letter.
pub fn email_fixture() -> CostTransducer<i64> {
    let mut b = TransducerBuilder::new("ab@", "_");
    let scan = b.state("scan");
    let local = b.state("local");
    let predomain = b.state("predomain");
    let domain = b.state("domain");
    let done = b.state("done");
    let open = b.marker("[e");
    let close = b.marker("]e");
    let e = b.empty_marker();
    b.initial(scan).make_final(done);
    for c in ['a', 'b', '@'] {
        b.transition(scan, c, 0, e, scan);
        b.transition(done, c, 0, e, done);
        // the close bracket lands on whatever letter follows the domain
        b.transition(domain, c, 0, close, done);
    }
    // first letter of the local part opens the span
    b.transition(scan, 'a', 0, open, local);
    b.transition(local, 'a', 0, e, local);
    // the @ slot: exact match is free, a corrupted 'b' costs 1
    b.transition(local, '@', 0, e, predomain);
    b.transition(local, 'b', 1, e, predomain);
    // the domain needs at least one letter
    b.transition(predomain, 'a', 0, e, domain);
    b.transition(domain, 'a', 0, e, domain);
    b.build().expect("fixture is well-formed")
}

/// Random transducer over a subset of {a, b, c} with integer weights in
/// [-3, 3], up to `max_states` states and at most two non-empty markers.
/// Transition density is kept low so the exponential oracle stays cheap.
pub fn random_transducer<R: Rng>(
    rng: &mut R,
    max_states: usize,
    max_symbols: usize,
    max_markers: usize,
) -> CostTransducer<i64> {
    let num_states = rng.gen_range(1..=max_states);
    let num_symbols = rng.gen_range(1..=max_symbols);
    let num_markers = rng.gen_range(0..=max_markers);
    let alphabet: String = "abc".chars().take(num_symbols).collect();

    let mut b = TransducerBuilder::new(&alphabet, "_");
    let states: Vec<StateId> = (0..num_states).map(|i| b.state(&format!("q{i}"))).collect();
    let mut markers = vec![b.empty_marker()];
    for name in ["γ", "δ"].iter().take(num_markers) {
        markers.push(b.marker(name));
    }
    b.initial(states[0]);
    let mut any_final = false;
    for &q in &states {
        if rng.gen_bool(0.4) {
            b.make_final(q);
            any_final = true;
        }
    }
    if !any_final {
        let q = states[rng.gen_range(0..states.len())];
        b.make_final(q);
    }
    for &from in &states {
        for sym in alphabet.chars() {
            let fanout = match rng.gen_range(0..100) {
                0..=24 => 0,
                25..=84 => 1,
                _ => 2,
            };
            for _ in 0..fanout {
                let to = states[rng.gen_range(0..states.len())];
                let marker = markers[rng.gen_range(0..markers.len())];
                let weight = rng.gen_range(-3..=3);
                b.transition(from, sym, weight, marker, to);
            }
        }
    }
    b.build().expect("generated transducer is well-formed")
}

/// Random transducer filtered to be unambiguous up to documents of
/// `unambiguity_len`.
pub fn random_unambiguous_transducer<R: Rng>(
    rng: &mut R,
    max_states: usize,
    max_symbols: usize,
    max_markers: usize,
    unambiguity_len: usize,
) -> CostTransducer<i64> {
    loop {
        let t = random_transducer(rng, max_states, max_symbols, max_markers);
        if check_unambiguous(&t, unambiguity_len).expect("desk-scale bound").is_ok() {
            return t;
        }
    }
}

/// Random document over the transducer's declared alphabet.
pub fn random_document<R: Rng>(
    rng: &mut R,
    transducer: &CostTransducer<i64>,
    min_len: usize,
    max_len: usize,
) -> Document {
    let alphabet: Vec<char> = transducer.alphabet().iter().copied().collect();
    let len = rng.gen_range(min_len..=max_len);
    let text: String = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
    Document::new(&text)
}

/// Random DAG on up to `max_nodes` nodes with forward edges, integer weights
/// in `[-max_weight, max_weight]` and labels over `max_markers` markers.
/// Node 0 is the source and the last node the sink; the instance is not
/// pruned and may have no source-to-sink path.
pub fn random_dag<R: Rng>(
    rng: &mut R,
    max_nodes: usize,
    edge_prob: f64,
    max_weight: i64,
    max_markers: u32,
) -> LabeledWeightedDag<i64> {
    let n = rng.gen_range(2..=max_nodes.max(2));
    let mut b = DagBuilder::new();
    for i in 0..n {
        b.node(0, i as u32);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(edge_prob) {
                let weight = rng.gen_range(-max_weight..=max_weight);
                let label = rng
                    .gen_bool(0.6)
                    .then(|| (rng.gen_range(1..=max_markers), j as u32));
                b.edge(i as u32, j as u32, weight, label);
            }
        }
    }
    b.source(0).sink((n - 1) as u32);
    b.build().expect("forward edges cannot form a cycle")
}

/// Like [`random_dag`] but resampled until the pruned instance is non-empty
/// and has at most `max_paths` source-to-sink paths.
pub fn random_dag_with_path_cap<R: Rng>(
    rng: &mut R,
    max_nodes: usize,
    max_paths: u64,
) -> LabeledWeightedDag<i64> {
    loop {
        let dag = crate::dag::prune(&random_dag(rng, max_nodes, 0.25, 4, 3));
        let paths = dag.count_paths();
        if paths >= 1 && paths <= max_paths {
            return dag;
        }
    }
}

/// Exhaustive (weight, label) enumeration of all source-to-sink paths by DFS;
/// the independent oracle the enumeration engine is checked against.
pub fn all_paths<W: GroupElement>(dag: &LabeledWeightedDag<W>) -> Vec<(W, Vec<LabelItem>)> {
    let mut out = Vec::new();
    if dag.is_empty() {
        return out;
    }
    let mut label = Vec::new();
    fn dfs<W: GroupElement>(
        dag: &LabeledWeightedDag<W>,
        v: u32,
        weight: W,
        label: &mut Vec<LabelItem>,
        out: &mut Vec<(W, Vec<LabelItem>)>,
    ) {
        if v == dag.sink() {
            out.push((weight, label.clone()));
            return;
        }
        for &e in dag.out_edges(v) {
            let edge = dag.edge(e);
            let pushed = if let Some(item) = edge.label {
                label.push(item);
                true
            } else {
                false
            };
            dfs(dag, edge.to, weight.add(&edge.weight), label, out);
            if pushed {
                label.pop();
            }
            assert!(out.len() <= 2_000_000, "path oracle blew its desk-scale bound");
        }
    }
    dfs(dag, dag.source(), W::zero(), &mut label, &mut out);
    out
}
