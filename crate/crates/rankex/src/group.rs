//! Ordered abelian groups, generator bases, and n-sums.
//!
//! A weight domain is any type implementing [`GroupElement`]: an abelian group
//! with a translation-invariant total order, cheap to clone and compare. Three
//! instantiations are provided: `i64` (overflow-checked), [`IntVec`]
//! (fixed-length integer vectors under lexicographic order), and
//! `num_bigint::BigInt` for tests that need unbounded magnitudes.
//!
//! An n-sum is an expression `Σ αᵢ·gᵢ` with non-negative integer coefficients
//! over a fixed basis `g₁..g_t`, represented by its coefficient vector. After
//! an O(n·t) precomputation ([`PrecomputeTable`]) any such sum evaluates in
//! O(t) group additions.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;

use crate::{Error, Result};

/// An element of an ordered abelian group.
///
/// Requirements beyond the trait signature: `add` is associative and
/// commutative with `zero` neutral and `neg` the inverse, and the derived
/// `Ord` is total and translation-invariant (`x <= y` implies
/// `x + z <= y + z`). The instantiations in this crate are exercised against
/// these laws by randomized tests.
pub trait GroupElement:
    Clone + Eq + Ord + std::hash::Hash + std::fmt::Debug + Send + Sync + 'static
{
    fn zero() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// The value as a machine integer, when the group is the integers and the
    /// value fits. Backends that require bounded integer keys (radix sorting)
    /// gate on this.
    fn as_small_int(&self) -> Option<i64> {
        None
    }
}

impl GroupElement for i64 {
    fn zero() -> Self {
        0
    }

    fn add(&self, rhs: &Self) -> Self {
        self.checked_add(*rhs).expect("integer group overflow")
    }

    fn neg(&self) -> Self {
        self.checked_neg().expect("integer group overflow")
    }

    fn as_small_int(&self) -> Option<i64> {
        Some(*self)
    }
}

impl GroupElement for BigInt {
    fn zero() -> Self {
        BigInt::from(0)
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn neg(&self) -> Self {
        -self
    }
}

/// Fixed-length integer vector under lexicographic order.
///
/// Trailing zeros are stripped on construction so that equality, hashing and
/// comparison agree with the zero-padded semantics: `[1]` and `[1, 0]` denote
/// the same element, and vectors of different lengths compare as if padded.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct IntVec(Vec<i64>);

impl IntVec {
    pub fn new(mut coords: Vec<i64>) -> Self {
        while coords.last() == Some(&0) {
            coords.pop();
        }
        IntVec(coords)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// Coordinates padded with zeros to `len`. Fails if the value does not fit.
    pub fn padded(&self, len: usize) -> Result<Vec<i64>> {
        if self.0.len() > len {
            return Err(Error::InvalidArgument(format!(
                "vector value has {} coordinates, group is declared with {len}",
                self.0.len()
            )));
        }
        let mut out = self.0.clone();
        out.resize(len, 0);
        Ok(out)
    }

    fn coord(&self, i: usize) -> i64 {
        self.0.get(i).copied().unwrap_or(0)
    }
}

impl PartialOrd for IntVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IntVec {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.0.len().max(other.0.len());
        for i in 0..len {
            match self.coord(i).cmp(&other.coord(i)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl GroupElement for IntVec {
    fn zero() -> Self {
        IntVec(Vec::new())
    }

    fn add(&self, rhs: &Self) -> Self {
        let len = self.0.len().max(rhs.0.len());
        IntVec::new(
            (0..len)
                .map(|i| {
                    self.coord(i)
                        .checked_add(rhs.coord(i))
                        .expect("integer group overflow")
                })
                .collect(),
        )
    }

    fn neg(&self) -> Self {
        IntVec::new(self.0.iter().map(|&c| -c).collect())
    }
}

/// Pair `(a, k)` of a group element and an integer, compared lexicographically.
///
/// This is the extended group used by [`distinctify`]: the product `G × ℤ`
/// with coordinate-wise addition.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LexPair<W> {
    pub major: W,
    pub minor: i64,
}

impl<W: GroupElement> GroupElement for LexPair<W> {
    fn zero() -> Self {
        LexPair { major: W::zero(), minor: 0 }
    }

    fn add(&self, rhs: &Self) -> Self {
        LexPair {
            major: self.major.add(&rhs.major),
            minor: self.minor.checked_add(rhs.minor).expect("integer group overflow"),
        }
    }

    fn neg(&self) -> Self {
        LexPair { major: self.major.neg(), minor: -self.minor }
    }
}

/// Counter for group comparisons, shared by one sorting or enumeration
/// session. Atomic so that instrumented sessions can coexist with the
/// parallel bulk passes (which never compare group values themselves).
#[derive(Debug, Default)]
pub struct CmpCounter(AtomicU64);

impl CmpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.0.load(AtomicOrdering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, AtomicOrdering::Relaxed);
    }

    /// Compare two group values, counting one comparison.
    pub fn cmp<W: GroupElement>(&self, a: &W, b: &W) -> Ordering {
        self.0.fetch_add(1, AtomicOrdering::Relaxed);
        a.cmp(b)
    }

    pub fn le<W: GroupElement>(&self, a: &W, b: &W) -> bool {
        self.cmp(a, b) != Ordering::Greater
    }
}

/// The fixed generators `g₁..g_t` an n-sum ranges over.
#[derive(Clone, Debug)]
pub struct GeneratorBasis<W> {
    gens: Vec<W>,
}

impl<W: GroupElement> GeneratorBasis<W> {
    pub fn new(gens: Vec<W>) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::InvalidArgument("basis needs at least one generator".into()));
        }
        Ok(GeneratorBasis { gens })
    }

    pub fn generators(&self) -> &[W] {
        &self.gens
    }

    /// Number of generators.
    pub fn t(&self) -> usize {
        self.gens.len()
    }
}

/// An n-sum `Σ αᵢ·gᵢ`, stored as its coefficient vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NSum {
    pub coeffs: Vec<u32>,
}

impl NSum {
    pub fn new(coeffs: Vec<u32>) -> Self {
        NSum { coeffs }
    }

    pub fn total(&self) -> u64 {
        self.coeffs.iter().map(|&c| c as u64).sum()
    }
}

/// Table of `k·gᵢ` for `k ∈ [1, n]`, `i ∈ [1, t]`; built with O(n·t) group
/// additions, evaluates any in-bounds sum with O(t) additions and lookups.
#[derive(Clone, Debug)]
pub struct PrecomputeTable<W> {
    basis: GeneratorBasis<W>,
    n: u32,
    // multiples[i * n + (k-1)] = k * g_i
    multiples: Vec<W>,
}

/// Builds the multiples table for `basis` up to coefficient `n`.
pub fn build_precompute_table<W: GroupElement>(
    basis: &GeneratorBasis<W>,
    n: i64,
) -> Result<PrecomputeTable<W>> {
    if n <= 0 {
        return Err(Error::InvalidArgument(format!("table bound must be positive, got {n}")));
    }
    let n = u32::try_from(n).map_err(|_| Error::InvalidArgument("table bound too large".into()))?;
    let mut multiples = Vec::with_capacity(basis.t() * n as usize);
    for g in basis.generators() {
        let mut acc = g.clone();
        multiples.push(acc.clone());
        for _ in 1..n {
            acc = acc.add(g);
            multiples.push(acc.clone());
        }
    }
    Ok(PrecomputeTable { basis: basis.clone(), n, multiples })
}

impl<W: GroupElement> PrecomputeTable<W> {
    pub fn basis(&self) -> &GeneratorBasis<W> {
        &self.basis
    }

    pub fn bound(&self) -> u32 {
        self.n
    }

    /// `k·gᵢ` for `k ∈ [1, n]` (1-based `k`, 0-based generator index).
    pub fn multiple(&self, gen: usize, k: u32) -> &W {
        debug_assert!(k >= 1 && k <= self.n);
        &self.multiples[gen * self.n as usize + (k - 1) as usize]
    }

    /// Evaluates `Σ αᵢ·gᵢ` with O(t) additions.
    pub fn eval(&self, sum: &NSum) -> Result<W> {
        if sum.coeffs.len() != self.basis.t() {
            return Err(Error::InvalidArgument(format!(
                "sum has {} coefficients, basis has {}",
                sum.coeffs.len(),
                self.basis.t()
            )));
        }
        let mut acc = W::zero();
        for (i, &a) in sum.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if a > self.n {
                return Err(Error::InvalidArgument(format!(
                    "coefficient {a} exceeds table bound {}",
                    self.n
                )));
            }
            acc = acc.add(self.multiple(i, a));
        }
        Ok(acc)
    }

    /// Evaluates a difference vector with coefficients in `[-n, n]`.
    pub fn eval_diff(&self, coeffs: &[i64]) -> Result<W> {
        if coeffs.len() != self.basis.t() {
            return Err(Error::InvalidArgument(format!(
                "vector has {} coefficients, basis has {}",
                coeffs.len(),
                self.basis.t()
            )));
        }
        let mut acc = W::zero();
        for (i, &a) in coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let k = u32::try_from(a.unsigned_abs())
                .ok()
                .filter(|&k| k <= self.n)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "coefficient {a} exceeds table bound {}",
                        self.n
                    ))
                })?;
            let m = self.multiple(i, k);
            acc = if a > 0 { acc.add(m) } else { acc.add(&m.neg()) };
        }
        Ok(acc)
    }
}

/// Result of the distinctness reduction: the inputs re-expressed over an
/// extended basis in `G × ℤ`, with pairwise distinct values.
#[derive(Clone, Debug)]
pub struct DistinctSums<W> {
    pub sums: Vec<NSum>,
    pub basis: GeneratorBasis<LexPair<W>>,
    /// Coefficient bound of the output sums (`N + n` for `N` inputs).
    pub bound: u32,
}

/// Converts `N` n-sums over `g₁..g_t` into `N` pairwise-distinct
/// `(N+n)`-sums over `g'₁..g'_{t+1}` in `G × ℤ`, where `g'ᵢ = (gᵢ, 0)` and
/// `g'_{t+1} = (0, 1)`; the k-th input (1-based) gains the term `k·g'_{t+1}`.
/// Sorting the outputs strictly increasing orders the inputs non-decreasingly
/// with ties broken by input index.
pub fn distinctify<W: GroupElement>(
    sums: &[NSum],
    basis: &GeneratorBasis<W>,
    n: u32,
) -> Result<DistinctSums<W>> {
    let t = basis.t();
    let mut out = Vec::with_capacity(sums.len());
    for (k, s) in sums.iter().enumerate() {
        if s.coeffs.len() != t {
            return Err(Error::InvalidArgument(format!(
                "sum {k} has {} coefficients, basis has {t}",
                s.coeffs.len()
            )));
        }
        let mut coeffs = s.coeffs.clone();
        coeffs.push(
            u32::try_from(k + 1).map_err(|_| Error::InvalidArgument("too many sums".into()))?,
        );
        out.push(NSum::new(coeffs));
    }
    let mut gens: Vec<LexPair<W>> =
        basis.generators().iter().map(|g| LexPair { major: g.clone(), minor: 0 }).collect();
    gens.push(LexPair { major: W::zero(), minor: 1 });
    let bound = u32::try_from(sums.len() as u64 + n as u64)
        .map_err(|_| Error::InvalidArgument("distinctified bound overflows".into()))?;
    Ok(DistinctSums { sums: out, basis: GeneratorBasis::new(gens)?, bound })
}
