//! Cost transducers: the query model.
//!
//! A cost transducer is an NFA whose transitions carry an input symbol, a
//! group weight, and a marker. An accepting run on a document produces an
//! output tuple: the sequence of (marker, position) pairs at the positions
//! whose marker is not the designated empty marker, together with the sum of
//! the transition weights.
//!
//! This module holds the model itself, its JSON file format, the exponential
//! brute-force oracle used by tests, a bounded unambiguity check, and the
//! single-final-state normalization the DAG reduction requires.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::group::{GroupElement, IntVec};
use crate::{Error, Result};

pub type StateId = u32;
pub type MarkerId = u32;
pub type TransitionId = u32;

/// Default document-length bound for the exponential oracle.
pub const BRUTE_FORCE_MAX_LEN: usize = 12;

/// A text document; positions are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    chars: Vec<char>,
}

impl Document {
    pub fn new(text: &str) -> Self {
        Document { chars: text.chars().collect() }
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    /// Symbol at 1-based position `i`.
    pub fn symbol(&self, i: usize) -> char {
        self.chars[i - 1]
    }

    pub fn symbols(&self) -> &[char] {
        &self.chars
    }
}

/// One transition `(from, symbol, weight, marker, to)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition<W> {
    pub from: StateId,
    pub symbol: char,
    pub weight: W,
    pub marker: MarkerId,
    pub to: StateId,
}

/// An output tuple: `(marker, position)` entries with strictly increasing
/// positions, none carrying the empty marker, plus the run weight.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutputTuple<W> {
    pub entries: Vec<(MarkerId, u32)>,
    pub weight: W,
}

/// A cost transducer over weight group `W`.
#[derive(Clone, Debug)]
pub struct CostTransducer<W> {
    alphabet: BTreeSet<char>,
    marker_names: Vec<String>,
    empty_marker: MarkerId,
    state_names: Vec<String>,
    initial: StateId,
    finals: Vec<bool>,
    transitions: Vec<Transition<W>>,
    by_symbol: HashMap<char, Vec<TransitionId>>,
}

/// Incremental construction of a [`CostTransducer`].
pub struct TransducerBuilder<W> {
    alphabet: BTreeSet<char>,
    marker_names: Vec<String>,
    state_names: Vec<String>,
    initial: Option<StateId>,
    finals: Vec<bool>,
    transitions: Vec<Transition<W>>,
}

impl<W: GroupElement> TransducerBuilder<W> {
    /// Starts a builder with the declared alphabet and the name of the empty
    /// marker (which always gets marker id 0).
    pub fn new(alphabet: &str, empty_marker: &str) -> Self {
        TransducerBuilder {
            alphabet: alphabet.chars().collect(),
            marker_names: vec![empty_marker.to_string()],
            state_names: Vec::new(),
            initial: None,
            finals: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(i) = self.state_names.iter().position(|s| s == name) {
            return i as StateId;
        }
        self.state_names.push(name.to_string());
        self.finals.push(false);
        (self.state_names.len() - 1) as StateId
    }

    pub fn marker(&mut self, name: &str) -> MarkerId {
        if let Some(i) = self.marker_names.iter().position(|s| s == name) {
            return i as MarkerId;
        }
        self.marker_names.push(name.to_string());
        (self.marker_names.len() - 1) as MarkerId
    }

    pub fn empty_marker(&self) -> MarkerId {
        0
    }

    pub fn initial(&mut self, state: StateId) -> &mut Self {
        self.initial = Some(state);
        self
    }

    pub fn make_final(&mut self, state: StateId) -> &mut Self {
        self.finals[state as usize] = true;
        self
    }

    pub fn transition(
        &mut self,
        from: StateId,
        symbol: char,
        weight: W,
        marker: MarkerId,
        to: StateId,
    ) -> &mut Self {
        self.transitions.push(Transition { from, symbol, weight, marker, to });
        self
    }

    pub fn build(self) -> Result<CostTransducer<W>> {
        let initial = self
            .initial
            .ok_or_else(|| Error::Validation("no initial state declared".into()))?;
        CostTransducer::assemble(
            self.alphabet,
            self.marker_names,
            0,
            self.state_names,
            initial,
            self.finals,
            self.transitions,
        )
    }
}

impl<W: GroupElement> CostTransducer<W> {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        alphabet: BTreeSet<char>,
        marker_names: Vec<String>,
        empty_marker: MarkerId,
        state_names: Vec<String>,
        initial: StateId,
        finals: Vec<bool>,
        transitions: Vec<Transition<W>>,
    ) -> Result<Self> {
        if state_names.is_empty() {
            return Err(Error::Validation("transducer has no states".into()));
        }
        if initial as usize >= state_names.len() {
            return Err(Error::Validation("initial state out of range".into()));
        }
        for (i, tr) in transitions.iter().enumerate() {
            if tr.from as usize >= state_names.len() || tr.to as usize >= state_names.len() {
                return Err(Error::Validation(format!("transition {i}: unknown state")));
            }
            if tr.marker as usize >= marker_names.len() {
                return Err(Error::Validation(format!("transition {i}: unknown marker")));
            }
            if !alphabet.contains(&tr.symbol) {
                return Err(Error::Validation(format!(
                    "transition {i}: symbol {:?} not in declared alphabet",
                    tr.symbol
                )));
            }
        }
        let mut by_symbol: HashMap<char, Vec<TransitionId>> = HashMap::new();
        for (i, tr) in transitions.iter().enumerate() {
            by_symbol.entry(tr.symbol).or_default().push(i as TransitionId);
        }
        Ok(CostTransducer {
            alphabet,
            marker_names,
            empty_marker,
            state_names,
            initial,
            finals,
            transitions,
            by_symbol,
        })
    }

    pub fn alphabet(&self) -> &BTreeSet<char> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q as usize]
    }

    pub fn marker_name(&self, m: MarkerId) -> &str {
        &self.marker_names[m as usize]
    }

    pub fn marker_id(&self, name: &str) -> Option<MarkerId> {
        self.marker_names.iter().position(|s| s == name).map(|i| i as MarkerId)
    }

    pub fn empty_marker(&self) -> MarkerId {
        self.empty_marker
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q as usize]
    }

    pub fn final_states(&self) -> Vec<StateId> {
        (0..self.num_states() as StateId).filter(|&q| self.finals[q as usize]).collect()
    }

    pub fn transitions(&self) -> &[Transition<W>] {
        &self.transitions
    }

    /// Transition ids consuming `symbol`, in declaration order.
    pub fn transitions_on(&self, symbol: char) -> &[TransitionId] {
        self.by_symbol.get(&symbol).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Checks every document symbol against the declared alphabet; reports
    /// the 1-based position of the first violation.
    pub fn check_document(&self, doc: &Document) -> Result<()> {
        for (i, &c) in doc.symbols().iter().enumerate() {
            if !self.alphabet.contains(&c) {
                return Err(Error::Parse(format!(
                    "document symbol {c:?} at position {} is not in the declared alphabet",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// The output tuple of a run given as a transition sequence.
    pub fn output_of_run(&self, run: &[TransitionId]) -> OutputTuple<W> {
        let mut entries = Vec::new();
        let mut weight = W::zero();
        for (i, &t) in run.iter().enumerate() {
            let tr = &self.transitions[t as usize];
            weight = weight.add(&tr.weight);
            if tr.marker != self.empty_marker {
                entries.push((tr.marker, (i + 1) as u32));
            }
        }
        OutputTuple { entries, weight }
    }

    /// All accepting runs on `doc`, as transition sequences. Exponential;
    /// `max_runs` caps the search.
    pub fn accepting_runs(&self, doc: &Document, max_runs: usize) -> Result<Vec<Vec<TransitionId>>> {
        let mut runs = Vec::new();
        let mut stack: Vec<TransitionId> = Vec::new();
        self.run_dfs(doc, 1, self.initial, &mut stack, &mut runs, max_runs)?;
        Ok(runs)
    }

    fn run_dfs(
        &self,
        doc: &Document,
        pos: usize,
        state: StateId,
        stack: &mut Vec<TransitionId>,
        runs: &mut Vec<Vec<TransitionId>>,
        max_runs: usize,
    ) -> Result<()> {
        if pos > doc.len() {
            if self.finals[state as usize] {
                if runs.len() >= max_runs {
                    return Err(Error::SizeBound(format!("more than {max_runs} accepting runs")));
                }
                runs.push(stack.clone());
            }
            return Ok(());
        }
        for &t in self.transitions_on(doc.symbol(pos)) {
            let tr = &self.transitions[t as usize];
            if tr.from == state {
                stack.push(t);
                self.run_dfs(doc, pos + 1, tr.to, stack, runs, max_runs)?;
                stack.pop();
            }
        }
        Ok(())
    }
}

/// Exact output set of `transducer` on `doc` by exhaustive run enumeration.
///
/// Test oracle only: exponential in `|doc|`, bounded by
/// [`BRUTE_FORCE_MAX_LEN`]. Fails with [`Error::Ambiguous`] when two accepting
/// runs share an output but disagree on its weight.
pub fn brute_force_outputs<W: GroupElement>(
    transducer: &CostTransducer<W>,
    doc: &Document,
) -> Result<Vec<OutputTuple<W>>> {
    if doc.len() > BRUTE_FORCE_MAX_LEN {
        return Err(Error::SizeBound(format!(
            "document of length {} exceeds the oracle bound {BRUTE_FORCE_MAX_LEN}",
            doc.len()
        )));
    }
    let runs = transducer.accepting_runs(doc, 2_000_000)?;
    let mut by_entries: HashMap<Vec<(MarkerId, u32)>, W> = HashMap::new();
    for run in &runs {
        let out = transducer.output_of_run(run);
        match by_entries.get(&out.entries) {
            Some(w) if *w != out.weight => {
                return Err(Error::Ambiguous {
                    document: doc.symbols().iter().collect(),
                });
            }
            _ => {
                by_entries.insert(out.entries, out.weight);
            }
        }
    }
    let mut outputs: Vec<OutputTuple<W>> = by_entries
        .into_iter()
        .map(|(entries, weight)| OutputTuple { entries, weight })
        .collect();
    outputs.sort();
    Ok(outputs)
}

/// Two distinct accepting runs on the same document with equal outputs.
#[derive(Clone, Debug)]
pub struct AmbiguityWitness {
    pub document: String,
    pub run1: Vec<TransitionId>,
    pub run2: Vec<TransitionId>,
}

/// Searches for two distinct accepting runs with equal output on any document
/// of length at most `max_len`, via breadth-first search over the synchronized
/// pair construction. Returns the shortest witness if one exists.
pub fn check_unambiguous<W: GroupElement>(
    transducer: &CostTransducer<W>,
    max_len: usize,
) -> Result<std::result::Result<(), AmbiguityWitness>> {
    if max_len > 64 {
        return Err(Error::SizeBound("unambiguity check bound is desk-scale (<= 64)".into()));
    }
    type Key = (StateId, StateId, bool);
    // parent pointers: child -> (parent, symbol, transition pair)
    let mut seen: HashMap<Key, Option<(Key, char, TransitionId, TransitionId)>> = HashMap::new();
    let start: Key = (transducer.initial(), transducer.initial(), false);
    seen.insert(start, None);
    let mut frontier: VecDeque<Key> = VecDeque::from([start]);
    let mut steps = 0usize;
    let mut hit: Option<Key> = None;

    'bfs: while !frontier.is_empty() && steps < max_len {
        steps += 1;
        let mut next: VecDeque<Key> = VecDeque::new();
        while let Some(key) = frontier.pop_front() {
            let (a, b, diverged) = key;
            for &sym in transducer.alphabet() {
                for &t1 in transducer.transitions_on(sym) {
                    let tr1 = &transducer.transitions()[t1 as usize];
                    if tr1.from != a {
                        continue;
                    }
                    for &t2 in transducer.transitions_on(sym) {
                        let tr2 = &transducer.transitions()[t2 as usize];
                        if tr2.from != b || tr1.marker != tr2.marker {
                            continue;
                        }
                        let child: Key = (tr1.to, tr2.to, diverged || t1 != t2);
                        if seen.contains_key(&child) {
                            continue;
                        }
                        seen.insert(child, Some((key, sym, t1, t2)));
                        if child.2
                            && transducer.is_final(child.0)
                            && transducer.is_final(child.1)
                        {
                            hit = Some(child);
                            break 'bfs;
                        }
                        next.push_back(child);
                    }
                }
            }
        }
        frontier = next;
    }

    let Some(mut key) = hit else {
        return Ok(Ok(()));
    };
    let mut doc_rev = Vec::new();
    let mut run1 = Vec::new();
    let mut run2 = Vec::new();
    while let Some(Some((parent, sym, t1, t2))) = seen.get(&key) {
        doc_rev.push(*sym);
        run1.push(*t1);
        run2.push(*t2);
        key = *parent;
    }
    doc_rev.reverse();
    run1.reverse();
    run2.reverse();
    Ok(Err(AmbiguityWitness { document: doc_rev.into_iter().collect(), run1, run2 }))
}

/// Rewrites `transducer` to have exactly one final state with no outgoing
/// transitions: a fresh state `q_f` is added, every transition into a former
/// final state is duplicated into `q_f`, and `q_f` becomes the only final
/// state. The multiset of (output, weight) pairs is preserved for every
/// non-empty document, and unambiguity is preserved. Acceptance of the empty
/// document (initial state final) is not representable with a single fresh
/// final state; the enumeration facade checks it against the original
/// transducer before reducing.
pub fn normalize_single_final<W: GroupElement>(t: &CostTransducer<W>) -> CostTransducer<W> {
    let finals = t.final_states();
    if finals.len() == 1 {
        let f = finals[0];
        if t.transitions().iter().all(|tr| tr.from != f) {
            return t.clone();
        }
    }
    let mut state_names = t.state_names.clone();
    let mut name = "__final".to_string();
    while state_names.contains(&name) {
        name.push('\'');
    }
    state_names.push(name);
    let qf = (state_names.len() - 1) as StateId;

    let mut transitions = t.transitions.clone();
    for tr in t.transitions.iter() {
        if t.is_final(tr.to) {
            transitions.push(Transition {
                from: tr.from,
                symbol: tr.symbol,
                weight: tr.weight.clone(),
                marker: tr.marker,
                to: qf,
            });
        }
    }
    let mut finals = vec![false; state_names.len()];
    finals[qf as usize] = true;

    CostTransducer::assemble(
        t.alphabet.clone(),
        t.marker_names.clone(),
        t.empty_marker,
        state_names,
        t.initial,
        finals,
        transitions,
    )
    .expect("normalization preserves validity")
}

// ---------------------------------------------------------------------------
// JSON file format
// ---------------------------------------------------------------------------

/// Weight-group declaration carried once per file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSpec {
    Int,
    IntVec { len: usize },
}

#[derive(Serialize, Deserialize)]
struct TransitionFile {
    from: String,
    symbol: char,
    weight: serde_json::Value,
    marker: String,
    to: String,
}

#[derive(Serialize, Deserialize)]
struct TransducerFile {
    group: GroupSpec,
    alphabet: String,
    markers: Vec<String>,
    empty_marker: String,
    states: Vec<String>,
    initial: String,
    finals: Vec<String>,
    transitions: Vec<TransitionFile>,
}

/// A loaded transducer, dispatched on the file's group declaration.
#[derive(Debug)]
pub enum AnyTransducer {
    Int(CostTransducer<i64>),
    IntVec(CostTransducer<IntVec>, usize),
}

fn weight_from_json(v: &serde_json::Value, group: GroupSpec, at: usize) -> Result<WeightValue> {
    match group {
        GroupSpec::Int => v
            .as_i64()
            .map(WeightValue::Int)
            .ok_or_else(|| Error::Parse(format!("transition {at}: weight must be an integer"))),
        GroupSpec::IntVec { len } => {
            let arr = v.as_array().ok_or_else(|| {
                Error::Parse(format!("transition {at}: weight must be an integer array"))
            })?;
            if arr.len() != len {
                return Err(Error::Parse(format!(
                    "transition {at}: weight has {} coordinates, group declares {len}",
                    arr.len()
                )));
            }
            let coords = arr
                .iter()
                .map(|x| {
                    x.as_i64().ok_or_else(|| {
                        Error::Parse(format!("transition {at}: weight coordinates must be integers"))
                    })
                })
                .collect::<Result<Vec<i64>>>()?;
            Ok(WeightValue::IntVec(IntVec::new(coords)))
        }
    }
}

enum WeightValue {
    Int(i64),
    IntVec(IntVec),
}

fn build_from_file<W: GroupElement>(
    file: &TransducerFile,
    weights: Vec<W>,
) -> Result<CostTransducer<W>> {
    let alphabet: BTreeSet<char> = file.alphabet.chars().collect();
    let marker_names = file.markers.clone();
    let empty_marker = marker_names
        .iter()
        .position(|m| *m == file.empty_marker)
        .ok_or_else(|| Error::Parse("empty_marker is not listed in markers".into()))?
        as MarkerId;
    let state_index = |name: &str, at: usize| -> Result<StateId> {
        file.states
            .iter()
            .position(|s| s == name)
            .map(|i| i as StateId)
            .ok_or_else(|| Error::Parse(format!("transition {at}: unknown state {name:?}")))
    };
    let initial = file
        .states
        .iter()
        .position(|s| *s == file.initial)
        .ok_or_else(|| Error::Parse(format!("unknown initial state {:?}", file.initial)))?
        as StateId;
    let mut finals = vec![false; file.states.len()];
    for f in &file.finals {
        let i = file
            .states
            .iter()
            .position(|s| s == f)
            .ok_or_else(|| Error::Parse(format!("unknown final state {f:?}")))?;
        finals[i] = true;
    }
    let mut transitions = Vec::with_capacity(file.transitions.len());
    for (i, (tf, w)) in file.transitions.iter().zip(weights).enumerate() {
        let marker = marker_names
            .iter()
            .position(|m| *m == tf.marker)
            .ok_or_else(|| Error::Parse(format!("transition {i}: unknown marker {:?}", tf.marker)))?
            as MarkerId;
        transitions.push(Transition {
            from: state_index(&tf.from, i)?,
            symbol: tf.symbol,
            weight: w,
            marker,
            to: state_index(&tf.to, i)?,
        });
    }
    CostTransducer::assemble(
        alphabet,
        marker_names,
        empty_marker,
        file.states.clone(),
        initial,
        finals,
        transitions,
    )
}

/// Parses a transducer from its JSON description.
pub fn load_transducer(json: &str) -> Result<AnyTransducer> {
    let file: TransducerFile =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    let raw: Vec<WeightValue> = file
        .transitions
        .iter()
        .enumerate()
        .map(|(i, t)| weight_from_json(&t.weight, file.group, i))
        .collect::<Result<_>>()?;
    match file.group {
        GroupSpec::Int => {
            let weights = raw
                .into_iter()
                .map(|w| match w {
                    WeightValue::Int(v) => v,
                    WeightValue::IntVec(_) => unreachable!(),
                })
                .collect();
            Ok(AnyTransducer::Int(build_from_file(&file, weights)?))
        }
        GroupSpec::IntVec { len } => {
            let weights = raw
                .into_iter()
                .map(|w| match w {
                    WeightValue::IntVec(v) => v,
                    WeightValue::Int(_) => unreachable!(),
                })
                .collect();
            Ok(AnyTransducer::IntVec(build_from_file(&file, weights)?, len))
        }
    }
}

/// Serializes a weight for the JSON formats.
pub trait SerialWeight: GroupElement {
    fn group_spec(ctx: usize) -> GroupSpec;
    fn to_json(&self, ctx: usize) -> serde_json::Value;
}

impl SerialWeight for i64 {
    fn group_spec(_ctx: usize) -> GroupSpec {
        GroupSpec::Int
    }

    fn to_json(&self, _ctx: usize) -> serde_json::Value {
        serde_json::Value::from(*self)
    }
}

impl SerialWeight for IntVec {
    fn group_spec(ctx: usize) -> GroupSpec {
        GroupSpec::IntVec { len: ctx }
    }

    fn to_json(&self, ctx: usize) -> serde_json::Value {
        serde_json::Value::from(self.padded(ctx).expect("declared length covers values"))
    }
}

impl<W: SerialWeight> CostTransducer<W> {
    /// Serializes to the JSON file format. `ctx` is the vector length for
    /// vector groups (ignored for integers).
    pub fn to_json(&self, ctx: usize) -> String {
        let file = TransducerFile {
            group: W::group_spec(ctx),
            alphabet: self.alphabet.iter().collect(),
            markers: self.marker_names.clone(),
            empty_marker: self.marker_names[self.empty_marker as usize].clone(),
            states: self.state_names.clone(),
            initial: self.state_names[self.initial as usize].clone(),
            finals: self.final_states().iter().map(|&q| self.state_names[q as usize].clone()).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionFile {
                    from: self.state_names[t.from as usize].clone(),
                    symbol: t.symbol,
                    weight: t.weight.to_json(ctx),
                    marker: self.marker_names[t.marker as usize].clone(),
                    to: self.state_names[t.to as usize].clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("format is serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn single_transition(marker_name: &str) -> CostTransducer<i64> {
        let mut b = TransducerBuilder::new("a", "_");
        let q0 = b.state("q0");
        let qf = b.state("qf");
        let m = if marker_name == "_" { b.empty_marker() } else { b.marker(marker_name) };
        b.initial(q0).make_final(qf).transition(q0, 'a', 7, m, qf);
        b.build().unwrap()
    }

    #[test]
    fn single_run_output() {
        let t = single_transition("g");
        let outs = brute_force_outputs(&t, &Document::new("a")).unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(outs[0].weight, 7);
        assert_eq!(outs[0].entries, vec![(t.marker_id("g").unwrap(), 1)]);
    }

    #[test]
    fn empty_marker_positions_are_dropped() {
        let t = single_transition("_");
        let outs = brute_force_outputs(&t, &Document::new("a")).unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(outs[0].weight, 7);
        assert!(outs[0].entries.is_empty());
    }

    #[test]
    fn annotation_example() {
        // marking of "abaabc" as (_,a)(γ,b)(δ,a)(_,a)(_,b)(δ,c)
        let mut b = TransducerBuilder::new("abc", "_");
        let states: Vec<StateId> = (0..=6).map(|i| b.state(&format!("p{i}"))).collect();
        let gamma = b.marker("γ");
        let delta = b.marker("δ");
        let markers = [0, gamma, delta, 0, 0, delta];
        let doc = "abaabc";
        for (i, c) in doc.chars().enumerate() {
            b.transition(states[i], c, 1, markers[i], states[i + 1]);
        }
        b.initial(states[0]).make_final(states[6]);
        let t = b.build().unwrap();
        let outs = brute_force_outputs(&t, &Document::new(doc)).unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(outs[0].entries, vec![(gamma, 2), (delta, 3), (delta, 6)]);
    }

    #[test]
    fn ambiguity_weight_conflict_detected() {
        let mut b = TransducerBuilder::new("a", "_");
        let q0 = b.state("q0");
        let qf = b.state("qf");
        let e = b.empty_marker();
        b.initial(q0).make_final(qf);
        b.transition(q0, 'a', 1, e, qf);
        b.transition(q0, 'a', 2, e, qf);
        let t = b.build().unwrap();
        assert!(matches!(
            brute_force_outputs(&t, &Document::new("a")),
            Err(Error::Ambiguous { .. })
        ));
        let witness = check_unambiguous(&t, 4).unwrap().unwrap_err();
        assert_eq!(witness.document, "a");
        assert_ne!(witness.run1, witness.run2);
    }

    #[test]
    fn deterministic_transducer_is_unambiguous() {
        let t = single_transition("g");
        assert!(check_unambiguous(&t, 6).unwrap().is_ok());
    }

    #[test]
    fn spanner_fixture_is_unambiguous_to_len_9() {
        let t = fixtures::spanner_fixture();
        assert!(check_unambiguous(&t, 9).unwrap().is_ok());
    }

    #[test]
    fn normalize_adds_redirected_transitions() {
        let t = single_transition("g");
        let n = normalize_single_final(&t);
        // already single-final with no outgoing: unchanged
        assert_eq!(n.num_states(), 2);

        let mut b = TransducerBuilder::new("ab", "_");
        let q0 = b.state("q0");
        let q1 = b.state("q1");
        let g = b.marker("g");
        b.initial(q0).make_final(q1);
        b.transition(q0, 'a', 3, g, q1);
        b.transition(q1, 'b', 1, b.empty_marker(), q1);
        let t = b.build().unwrap();
        let n = normalize_single_final(&t);
        assert_eq!(n.final_states().len(), 1);
        let qf = n.final_states()[0];
        assert!(n.transitions().iter().all(|tr| tr.from != qf));
        // duplicated edges into q_f for both transitions entering q1
        assert_eq!(n.transitions().iter().filter(|tr| tr.to == qf).count(), 2);
    }

    #[test]
    fn normalize_empty_finals_accepts_nothing() {
        let mut b = TransducerBuilder::new("a", "_");
        let q0 = b.state("q0");
        b.initial(q0);
        b.transition(q0, 'a', 1, b.empty_marker(), q0);
        let t = b.build().unwrap();
        let n = normalize_single_final(&t);
        for len in 0..4 {
            let doc = Document::new(&"a".repeat(len));
            assert!(brute_force_outputs(&n, &doc).unwrap().is_empty());
        }
    }

    #[test]
    fn normalize_is_idempotent() {
        let t = fixtures::spanner_fixture();
        let n1 = normalize_single_final(&t);
        let n2 = normalize_single_final(&n1);
        assert_eq!(n1.num_states(), n2.num_states());
        assert_eq!(n1.transitions().len(), n2.transitions().len());
    }

    #[test]
    fn normalize_preserves_outputs_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(7);
        let mut nontrivial = 0;
        for _ in 0..120 {
            let t = fixtures::random_transducer(&mut rng, 4, 2, 2);
            let n = normalize_single_final(&t);
            for _ in 0..4 {
                let doc = fixtures::random_document(&mut rng, &t, 1, 8);
                let before = brute_force_outputs(&t, &doc);
                let after = brute_force_outputs(&n, &doc);
                match (before, after) {
                    (Ok(b), Ok(a)) => {
                        if !b.is_empty() {
                            nontrivial += 1;
                        }
                        assert_eq!(b, a);
                    }
                    // ambiguity conflicts must be caught identically
                    (Err(Error::Ambiguous { .. }), Err(Error::Ambiguous { .. })) => {}
                    (b, a) => panic!("divergent oracle outcomes: {b:?} vs {a:?}"),
                }
            }
        }
        assert!(nontrivial > 40, "generator produced too few accepting instances");
    }

    #[test]
    fn spanner_fixture_extracts_the_expected_span_tuples() {
        let t = fixtures::spanner_fixture();
        let outs = brute_force_outputs(&t, &Document::new("cbcabaaac")).unwrap();
        let want1 = fixtures::span_tuple_output(&t, &[("x", 4, 6), ("y", 8, 8)]);
        let want2 = fixtures::span_tuple_output(&t, &[("x", 4, 5), ("y", 6, 8)]);
        assert!(outs.iter().any(|o| o.entries == want1));
        assert!(outs.iter().any(|o| o.entries == want2));
    }

    #[test]
    fn json_round_trip() {
        let t = fixtures::spanner_fixture();
        let json = t.to_json(0);
        let AnyTransducer::Int(t2) = load_transducer(&json).unwrap() else {
            panic!("expected integer group");
        };
        assert_eq!(t.num_states(), t2.num_states());
        assert_eq!(t.transitions().len(), t2.transitions().len());
        let doc = Document::new("cbcabaaac");
        assert_eq!(
            brute_force_outputs(&t, &doc).unwrap(),
            brute_force_outputs(&t2, &doc).unwrap()
        );
    }

    #[test]
    fn json_diagnostics() {
        let json = r#"{
            "group": "int",
            "alphabet": "ab",
            "markers": ["_", "g"],
            "empty_marker": "_",
            "states": ["q0"],
            "initial": "q0",
            "finals": ["q0"],
            "transitions": [{"from": "q0", "symbol": "a", "weight": 1, "marker": "nope", "to": "q0"}]
        }"#;
        let err = load_transducer(json).unwrap_err();
        assert!(err.to_string().contains("transition 0"));
        assert!(err.to_string().contains("nope"));
    }
}
