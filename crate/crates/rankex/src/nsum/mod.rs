//! Sorting n-sums over a generator basis.
//!
//! Three interchangeable backends return the same value order:
//!
//! - `Baseline`: evaluate every sum, comparison-sort. Always available, the
//!   correctness oracle for everything else.
//! - `Radix`: integer groups whose evaluations fit a bounded word; evaluate
//!   and radix-sort deterministically, no group comparisons at all.
//! - `Rounding`: the randomized two-phase algorithm. Duplicate coefficient
//!   vectors are merged, the distinctness reduction appends an index
//!   generator, a sampled constraint system is solved exactly for a rational
//!   stand-in of the generators, and the rationals' floor images are radix
//!   sorted. Phase one partitions into buckets (with exact repair of the few
//!   misplaced elements), phase two approximately sorts within buckets and
//!   finishes by insertion sort under true group comparisons. The output is
//!   verified and the whole attempt restarts on a budget miss, falling back
//!   to the baseline after `max_attempts`; the returned permutation is
//!   correct unconditionally.
//!
//! All group comparisons flow through the session's [`CmpCounter`], which is
//! how the comparison-budget claims are observed.

mod feasibility;
mod radix;

pub use feasibility::{solve_feasibility, Constraint, InequalitySystem, RationalVector, Relation};
pub use radix::{bit_budget, floor_scaled, round_and_radix_sort, sort_coeff_vectors};

use std::cmp::Ordering;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec;
use crate::group::{
    build_precompute_table, distinctify, CmpCounter, GeneratorBasis, GroupElement, NSum,
};
use crate::{Error, Result};

/// Sorting backend selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Baseline below the small-input threshold, rounding above it.
    Auto,
    Baseline,
    Radix,
    Rounding,
}

#[derive(Clone, Debug)]
pub struct SortOptions {
    pub backend: Backend,
    pub seed: u64,
    /// Run the pure bulk passes on the rayon pool (identical output).
    pub parallel: bool,
    /// Inputs smaller than this route straight to the baseline.
    pub small_input_threshold: usize,
    /// Sampling exponent c: sample probability 1/log^c N, sizes tN/log^c N.
    pub sampling_exponent: u32,
    /// Bucket boundary stride over the sorted sample, log^{c+3} N by default.
    pub stride_exponent: u32,
    /// Rounding attempts before falling back to the baseline.
    pub max_attempts: u32,
    /// Comparison budget per attempt: `budget_factor · t · N`.
    pub budget_factor: u64,
}

impl Default for SortOptions {
    fn default() -> Self {
        SortOptions {
            backend: Backend::Auto,
            seed: 0,
            parallel: true,
            small_input_threshold: 4096,
            sampling_exponent: 1,
            stride_exponent: 4,
            max_attempts: 3,
            budget_factor: 512,
        }
    }
}

/// Which code path produced the permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendUsed {
    Baseline,
    Radix,
    Rounding,
}

/// Why a rounding run abandoned the randomized path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FallbackReason {
    Budget,
    VerifyFailed,
    SolverFailed,
}

#[derive(Clone, Debug)]
pub struct SortReport {
    pub requested: Backend,
    pub used: BackendUsed,
    /// Group comparisons consumed by this call.
    pub comparisons: u64,
    pub attempts: u32,
    pub fallback: Option<FallbackReason>,
    /// True when the input was routed to the baseline by the size threshold.
    pub small_input: bool,
    pub buckets: usize,
}

#[derive(Clone, Debug)]
pub struct SortOutcome {
    /// Applying the permutation to the input yields non-decreasing values,
    /// ties in input order.
    pub permutation: Vec<usize>,
    pub report: SortReport,
}

/// Sorts `sums` (n-sums over `basis` with coefficient bound `n`) by evaluated
/// group value; stable. The result is correct for every backend and seed.
pub fn sort_nsums<W: GroupElement>(
    sums: &[NSum],
    basis: &GeneratorBasis<W>,
    n: u32,
    opts: &SortOptions,
    counter: &CmpCounter,
) -> Result<SortOutcome> {
    let t = basis.t();
    for (i, s) in sums.iter().enumerate() {
        if s.coeffs.len() != t {
            return Err(Error::InvalidArgument(format!(
                "sum {i} has {} coefficients, basis has {t}",
                s.coeffs.len()
            )));
        }
        if let Some(&bad) = s.coeffs.iter().find(|&&c| c > n) {
            return Err(Error::InvalidArgument(format!(
                "sum {i} has coefficient {bad} above the bound {n}"
            )));
        }
    }
    let start = counter.get();
    let mut report = SortReport {
        requested: opts.backend,
        used: BackendUsed::Baseline,
        comparisons: 0,
        attempts: 0,
        fallback: None,
        small_input: false,
        buckets: 0,
    };
    if sums.len() <= 1 {
        report.comparisons = 0;
        return Ok(SortOutcome { permutation: (0..sums.len()).collect(), report });
    }
    let permutation = match opts.backend {
        Backend::Baseline => baseline_sort(sums, basis, n, opts, counter)?,
        Backend::Radix => {
            report.used = BackendUsed::Radix;
            radix_smallints_sort(sums, basis, n, opts)?
        }
        Backend::Auto | Backend::Rounding => {
            if sums.len() < opts.small_input_threshold {
                report.small_input = true;
                baseline_sort(sums, basis, n, opts, counter)?
            } else {
                report.used = BackendUsed::Rounding;
                rounding_sort(sums, basis, n, opts, counter, &mut report)?
            }
        }
    };
    report.comparisons = counter.get() - start;
    debug_assert_eq!(permutation.len(), sums.len());
    Ok(SortOutcome { permutation, report })
}

/// Evaluate everything, stable comparison sort on the cached values.
fn baseline_sort<W: GroupElement>(
    sums: &[NSum],
    basis: &GeneratorBasis<W>,
    n: u32,
    opts: &SortOptions,
    counter: &CmpCounter,
) -> Result<Vec<usize>> {
    let table = build_precompute_table(basis, i64::from(n.max(1)))?;
    let vals = exec::map_slice(opts.parallel, sums, |s| {
        table.eval(s).expect("coefficients validated")
    });
    let mut perm: Vec<usize> = (0..sums.len()).collect();
    perm.sort_by(|&a, &b| counter.cmp(&vals[a], &vals[b]));
    Ok(perm)
}

/// Deterministic bounded-integer backend: evaluations must fit 48 bits.
fn radix_smallints_sort<W: GroupElement>(
    sums: &[NSum],
    basis: &GeneratorBasis<W>,
    n: u32,
    opts: &SortOptions,
) -> Result<Vec<usize>> {
    const BIT_BUDGET: u32 = 48;
    let gens: Vec<i64> = basis
        .generators()
        .iter()
        .map(|g| {
            g.as_small_int().ok_or_else(|| {
                Error::InvalidArgument("radix backend needs the integer group".into())
            })
        })
        .collect::<Result<_>>()?;
    let max_abs = gens.iter().map(|g| g.unsigned_abs()).max().unwrap_or(0) as u128;
    let bound = max_abs * u128::from(n);
    if bound >= 1u128 << (BIT_BUDGET - 1) {
        return Err(Error::InvalidArgument(format!(
            "generator magnitudes exceed the {BIT_BUDGET}-bit radix budget"
        )));
    }
    let offset = 1i64 << (BIT_BUDGET - 1);
    let keys = exec::map_slice(opts.parallel, sums, |s| {
        let v: i64 = s.coeffs.iter().zip(&gens).map(|(&a, &g)| i64::from(a) * g).sum();
        (v + offset) as u64
    });
    Ok(radix::sort_u64_keys(&keys, BIT_BUDGET).into_iter().map(|i| i as usize).collect())
}

/// Merges equal coefficient vectors. Returns the unique vectors ordered by
/// first occurrence and, per unique vector, its original indices ascending.
pub fn dedup_vectors(sums: &[NSum], n: u32) -> (Vec<NSum>, Vec<Vec<u32>>) {
    if sums.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let t = sums[0].coeffs.len();
    let coeffs: Vec<Vec<u32>> = sums.iter().map(|s| s.coeffs.clone()).collect();
    let order = radix::sort_coeff_vectors(&coeffs, t, n);
    let mut groups: Vec<(u32, Vec<u32>)> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some((rep, members)) if coeffs[*rep as usize] == coeffs[i as usize] => {
                members.push(i)
            }
            _ => groups.push((i, vec![i])),
        }
    }
    // order groups by first occurrence so downstream tie-breaks are stable
    for (_, members) in groups.iter_mut() {
        members.sort_unstable();
    }
    groups.sort_unstable_by_key(|(_, members)| members[0]);
    let uniques = groups.iter().map(|(rep, _)| sums[*rep as usize].clone()).collect();
    let multiplicity = groups.into_iter().map(|(_, members)| members).collect();
    (uniques, multiplicity)
}

/// The sorted sample, its bucket boundaries, and both bucket families of the
/// first phase: the provisional buckets from the rational approximation and
/// the exact buckets after repair.
#[derive(Debug)]
pub struct BucketPartition {
    /// Element indices of the bucket lower boundaries, increasing by value;
    /// bucket `j` holds values in `[value(boundary[j]), value(boundary[j+1]))`
    /// and the last bucket is unbounded above.
    pub boundaries: Vec<u32>,
    pub provisional: Vec<Vec<u32>>,
    pub buckets: Vec<Vec<u32>>,
}

struct Attempt<'a, W> {
    vals: &'a [W],
    coeffs: &'a [Vec<i64>],
    opts: &'a SortOptions,
    counter: &'a CmpCounter,
    budget_start: u64,
    budget_cap: u64,
    log_n: u32,
}

enum AttemptError {
    Budget,
    Solver,
}

impl<W: GroupElement> Attempt<'_, W> {
    fn m(&self) -> usize {
        self.vals.len()
    }

    fn check_budget(&self) -> std::result::Result<(), AttemptError> {
        if self.counter.get() - self.budget_start > self.budget_cap {
            return Err(AttemptError::Budget);
        }
        Ok(())
    }

    fn cmp(&self, a: usize, b: usize) -> Ordering {
        self.counter.cmp(&self.vals[a], &self.vals[b])
    }
}

fn log2_ceil(n: usize) -> u32 {
    (usize::BITS - n.next_power_of_two().leading_zeros()).max(2) - 1
}

/// The randomized two-phase sort of pairwise-distinct values. `vals[i]` is
/// the evaluated group value of `coeffs[i]`.
fn rounding_sort<W: GroupElement>(
    sums: &[NSum],
    basis: &GeneratorBasis<W>,
    n: u32,
    opts: &SortOptions,
    counter: &CmpCounter,
    report: &mut SortReport,
) -> Result<Vec<usize>> {
    let (uniques, multiplicity) = dedup_vectors(sums, n);
    if uniques.len() <= 1 {
        let mut out = Vec::with_capacity(sums.len());
        for members in &multiplicity {
            out.extend(members.iter().map(|&i| i as usize));
        }
        return Ok(out);
    }

    // distinctness reduction: values become pairwise distinct in G × Z
    let distinct = distinctify(&uniques, basis, n)?;
    let table = build_precompute_table(&distinct.basis, 2 * i64::from(distinct.bound))?;
    let vals = exec::map_slice(opts.parallel, &distinct.sums, |s| {
        table.eval(s).expect("reduction stays in bounds")
    });
    let coeffs: Vec<Vec<i64>> = distinct
        .sums
        .iter()
        .map(|s| s.coeffs.iter().map(|&c| i64::from(c)).collect())
        .collect();

    // expansion back to original indices: distinct vectors with equal group
    // values form runs in the sorted order (they differ only in the appended
    // index coordinate); merging each run's occurrence lists keeps the
    // overall sort stable over the original input
    let expand = |perm: Vec<usize>| -> Vec<usize> {
        let mut out = Vec::with_capacity(sums.len());
        let mut i = 0;
        while i < perm.len() {
            let mut j = i + 1;
            while j < perm.len()
                && counter.cmp(&vals[perm[j - 1]].major, &vals[perm[j]].major)
                    == Ordering::Equal
            {
                j += 1;
            }
            let mut run: Vec<u32> = Vec::new();
            for &u in &perm[i..j] {
                run.extend(multiplicity[u].iter().copied());
            }
            run.sort_unstable();
            out.extend(run.into_iter().map(|i| i as usize));
            i = j;
        }
        out
    };

    let t_eff = distinct.basis.t() as u64;
    let attempt_ctx = |start: u64| Attempt {
        vals: &vals,
        coeffs: &coeffs,
        opts,
        counter,
        budget_start: start,
        budget_cap: opts.budget_factor * t_eff * vals.len() as u64,
        log_n: log2_ceil(vals.len()),
    };

    for attempt in 0..opts.max_attempts {
        report.attempts = attempt + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(attempt as u64));
        let ctx = attempt_ctx(counter.get());
        let outcome = (|| {
            let partition = phase1_partition(&ctx, &mut rng)?;
            report.buckets = partition.buckets.len();
            let perm = phase2_sort_buckets(&ctx, &partition, &mut rng)?;
            verify_sorted(&ctx, &perm)?;
            Ok::<Vec<usize>, AttemptError>(perm)
        })();
        match outcome {
            Ok(perm) => return Ok(expand(perm)),
            Err(AttemptError::Budget) => report.fallback = Some(FallbackReason::Budget),
            Err(AttemptError::Solver) => report.fallback = Some(FallbackReason::SolverFailed),
        }
    }
    // unconditional correctness: the baseline finishes the job
    report.used = BackendUsed::Baseline;
    let inner = baseline_distinct_sort(&vals, counter);
    Ok(expand(inner))
}

fn baseline_distinct_sort<W: GroupElement>(vals: &[W], counter: &CmpCounter) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..vals.len()).collect();
    perm.sort_by(|&a, &b| counter.cmp(&vals[a], &vals[b]));
    perm
}

/// First phase: sample, sort the sample, approximate all values by exact
/// rationals from a solved constraint system, bucket by the sample's
/// boundaries, repair the stragglers exactly.
fn phase1_partition<W: GroupElement>(
    ctx: &Attempt<'_, W>,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<BucketPartition, AttemptError> {
    let m_total = ctx.m();
    let c = ctx.opts.sampling_exponent;
    let log_c = u64::from(ctx.log_n.pow(c)).max(1);

    // the smallest and largest element always join the sample: 2N comparisons
    let mut min_i = 0usize;
    let mut max_i = 0usize;
    for i in 1..m_total {
        if ctx.cmp(i, min_i) == Ordering::Less {
            min_i = i;
        }
        if ctx.cmp(i, max_i) == Ordering::Greater {
            max_i = i;
        }
    }
    let mut sample: Vec<u32> = vec![min_i as u32, max_i as u32];
    for i in 0..m_total {
        if i != min_i && i != max_i && rng.gen_range(0..log_c) == 0 {
            sample.push(i as u32);
        }
    }
    sample.sort_by(|&a, &b| ctx.cmp(a as usize, b as usize));
    ctx.check_budget().map_err(|e| e)?;

    // bucket boundaries every log^{c+3} N sample elements
    let stride = (ctx.log_n as u64).pow(ctx.opts.stride_exponent).max(1);
    let boundaries: Vec<u32> =
        sample.iter().step_by(stride as usize).copied().collect();

    // sampled difference vectors, their signs, and the sample's own chain
    let s_target = ((t_of(ctx) as u64 * m_total as u64) / log_c).clamp(1, 200_000) as usize;
    let pairs: Vec<(u32, u32)> = (0..s_target)
        .map(|_| {
            let a = rng.gen_range(0..m_total) as u32;
            let mut b = rng.gen_range(0..m_total) as u32;
            while b == a {
                b = rng.gen_range(0..m_total) as u32;
            }
            (a, b)
        })
        .collect();
    let diffs: Vec<W> = pairs
        .iter()
        .map(|&(a, b)| ctx.vals[a as usize].sub(&ctx.vals[b as usize]))
        .collect();
    let mut diff_order: Vec<u32> = (0..pairs.len() as u32).collect();
    diff_order.sort_by(|&a, &b| ctx.counter.cmp(&diffs[a as usize], &diffs[b as usize]));
    ctx.check_budget()?;

    let mut system = InequalitySystem::new(t_of(ctx));
    // family one: the sorted sample's consecutive differences are strict
    for w in sample.windows(2) {
        system.push(row_diff(ctx, w[0], w[1]), Relation::LeMinusOne);
    }
    // family two: the sign of every sampled difference vector
    let zero = W::zero();
    for &k in &diff_order {
        let rel = match ctx.counter.cmp(&diffs[k as usize], &zero) {
            Ordering::Less => Relation::LeMinusOne,
            Ordering::Equal => Relation::EqZero,
            Ordering::Greater => Relation::GePlusOne,
        };
        let (a, b) = pairs[k as usize];
        system.push(row_diff(ctx, a, b), rel);
    }
    // family three: consecutive differences of the sorted sampled vectors
    for w in diff_order.windows(2) {
        let rel = match ctx.counter.cmp(&diffs[w[0] as usize], &diffs[w[1] as usize]) {
            Ordering::Less => Relation::LeMinusOne,
            _ => Relation::EqZero,
        };
        let (a0, b0) = pairs[w[0] as usize];
        let (a1, b1) = pairs[w[1] as usize];
        let row: Vec<i64> = (0..t_of(ctx))
            .map(|j| {
                (ctx.coeffs[a0 as usize][j] - ctx.coeffs[b0 as usize][j])
                    - (ctx.coeffs[a1 as usize][j] - ctx.coeffs[b1 as usize][j])
            })
            .collect();
        system.push(row, rel);
    }
    ctx.check_budget()?;

    let gtilde =
        solve_feasibility(&system, rng.gen()).map_err(|_| AttemptError::Solver)?;
    let keys = rational_keys(ctx, &gtilde);

    // provisional buckets from the rounded keys: boundary keys are strictly
    // increasing thanks to the family-one margins
    let boundary_keys: Vec<&BigInt> =
        boundaries.iter().map(|&b| &keys[b as usize]).collect();
    debug_assert!(boundary_keys.windows(2).all(|w| w[0] < w[1]));
    let mut provisional: Vec<Vec<u32>> = vec![Vec::new(); boundaries.len()];
    for i in 0..m_total {
        let j = match boundary_keys.binary_search_by(|bk| (*bk).cmp(&keys[i])) {
            Ok(j) => j,
            Err(0) => 0,
            Err(j) => j - 1,
        };
        provisional[j].push(i as u32);
    }

    // exact repair: constant-time membership against the neighborhood, then
    // binary search over the boundaries for the stragglers
    let in_bucket = |i: usize, j: usize| -> bool {
        let lower = ctx.cmp(boundaries[j] as usize, i) != Ordering::Greater;
        let upper = match boundaries.get(j + 1) {
            Some(&b) => ctx.cmp(i, b as usize) == Ordering::Less,
            None => true,
        };
        lower && upper
    };
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); boundaries.len()];
    for (j_hat, members) in provisional.iter().enumerate() {
        for &i in members {
            let i = i as usize;
            let near = [Some(j_hat), j_hat.checked_sub(1), Some(j_hat + 1)];
            let mut placed = false;
            for j in near.into_iter().flatten() {
                if j < buckets.len() && in_bucket(i, j) {
                    buckets[j].push(i as u32);
                    placed = true;
                    break;
                }
            }
            if !placed {
                let mut lo = 0usize;
                let mut hi = boundaries.len() - 1;
                while lo < hi {
                    let mid = (lo + hi + 1) / 2;
                    if ctx.cmp(boundaries[mid] as usize, i) != Ordering::Greater {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                buckets[lo].push(i as u32);
            }
        }
        ctx.check_budget()?;
    }
    Ok(BucketPartition { boundaries, provisional, buckets })
}

fn t_of<W: GroupElement>(ctx: &Attempt<'_, W>) -> usize {
    ctx.coeffs[0].len()
}

fn row_diff<W: GroupElement>(ctx: &Attempt<'_, W>, a: u32, b: u32) -> Vec<i64> {
    let (ca, cb) = (&ctx.coeffs[a as usize], &ctx.coeffs[b as usize]);
    (0..ca.len()).map(|j| ca[j] - cb[j]).collect()
}

/// `⟨g̃, h_i⟩` for every element, as floor-scaled integers over the solution's
/// common denominator.
fn rational_keys<W: GroupElement>(ctx: &Attempt<'_, W>, gtilde: &RationalVector) -> Vec<BigInt> {
    let (nums, den) = gtilde.common_denominator();
    let b = nums
        .iter()
        .map(|v| v.magnitude().bits())
        .chain([den.magnitude().bits()])
        .max()
        .unwrap_or(1)
        .max(1)
        + 64;
    let coeffs = ctx.coeffs;
    let values: Vec<(BigInt, BigInt)> = exec::map_slice(ctx.opts.parallel, coeffs, |row| {
        let mut acc = BigInt::from(0);
        for (c, p) in row.iter().zip(&nums) {
            if *c != 0 {
                acc += p * *c;
            }
        }
        (acc, den.clone())
    });
    exec::map_slice(ctx.opts.parallel, &values, |(p, q)| floor_scaled(p, q, b))
}

/// Second phase: approximate within-bucket order from a freshly sampled
/// system, then insertion-sort each bucket under true comparisons.
fn phase2_sort_buckets<W: GroupElement>(
    ctx: &Attempt<'_, W>,
    partition: &BucketPartition,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<Vec<usize>, AttemptError> {
    let m_total = ctx.m();
    let mut bucket_of = vec![0u32; m_total];
    for (j, members) in partition.buckets.iter().enumerate() {
        for &i in members {
            bucket_of[i as usize] = j as u32;
        }
    }
    // sample pairs within buckets, weighted by pair count
    let weights: Vec<u64> = partition
        .buckets
        .iter()
        .map(|b| (b.len() as u64) * (b.len() as u64).saturating_sub(1))
        .collect();
    let total_weight: u64 = weights.iter().sum();

    let keys: Vec<BigInt> = if total_weight == 0 {
        // every bucket is a singleton or empty: order is already decided
        vec![BigInt::from(0); m_total]
    } else {
        let log_c = u64::from(ctx.log_n.pow(ctx.opts.sampling_exponent)).max(1);
        let s_target =
            ((t_of(ctx) as u64 * m_total as u64) / log_c).clamp(1, 200_000) as usize;
        let cumulative: Vec<u64> = weights
            .iter()
            .scan(0u64, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        let pairs: Vec<(u32, u32)> = (0..s_target)
            .map(|_| {
                let r = rng.gen_range(0..total_weight);
                let j = cumulative.partition_point(|&c| c <= r);
                let members = &partition.buckets[j];
                let a = members[rng.gen_range(0..members.len())];
                let mut b = members[rng.gen_range(0..members.len())];
                while b == a {
                    b = members[rng.gen_range(0..members.len())];
                }
                (a, b)
            })
            .collect();
        let diffs: Vec<W> = pairs
            .iter()
            .map(|&(a, b)| ctx.vals[a as usize].sub(&ctx.vals[b as usize]))
            .collect();
        let mut diff_order: Vec<u32> = (0..pairs.len() as u32).collect();
        diff_order.sort_by(|&a, &b| ctx.counter.cmp(&diffs[a as usize], &diffs[b as usize]));
        ctx.check_budget()?;

        // a single constraint family: consecutive sorted differences
        let mut system = InequalitySystem::new(t_of(ctx));
        for w in diff_order.windows(2) {
            let rel = match ctx.counter.cmp(&diffs[w[0] as usize], &diffs[w[1] as usize]) {
                Ordering::Less => Relation::LeMinusOne,
                _ => Relation::EqZero,
            };
            let (a0, b0) = pairs[w[0] as usize];
            let (a1, b1) = pairs[w[1] as usize];
            let row: Vec<i64> = (0..t_of(ctx))
                .map(|j| {
                    (ctx.coeffs[a0 as usize][j] - ctx.coeffs[b0 as usize][j])
                        - (ctx.coeffs[a1 as usize][j] - ctx.coeffs[b1 as usize][j])
                })
                .collect();
            system.push(row, rel);
        }
        ctx.check_budget()?;
        let gtilde =
            solve_feasibility(&system, rng.gen()).map_err(|_| AttemptError::Solver)?;
        rational_keys(ctx, &gtilde)
    };

    // joint radix sort of (bucket, key) puts every bucket together in
    // approximate order; ties keep index order
    let key_perm = radix::sort_bigint_keys(&keys, ctx.opts.parallel);
    let mut grouped: Vec<Vec<u32>> = vec![Vec::new(); partition.buckets.len()];
    for &i in &key_perm {
        grouped[bucket_of[i as usize] as usize].push(i);
    }

    // finish each bucket exactly; few inversions remain
    let mut perm = Vec::with_capacity(m_total);
    for (j, bucket) in grouped.iter_mut().enumerate() {
        let arr = bucket.as_mut_slice();
        for i in 1..arr.len() {
            let mut k = i;
            while k > 0
                && ctx.cmp(arr[k - 1] as usize, arr[k] as usize) == Ordering::Greater
            {
                arr.swap(k - 1, k);
                k -= 1;
            }
        }
        if j % 64 == 0 {
            ctx.check_budget()?;
        }
        perm.extend(arr.iter().map(|&i| i as usize));
    }
    ctx.check_budget()?;
    Ok(perm)
}

/// The N−1 comparison scan; distinct inputs must come out strictly increasing.
fn verify_sorted<W: GroupElement>(
    ctx: &Attempt<'_, W>,
    perm: &[usize],
) -> std::result::Result<(), AttemptError> {
    for w in perm.windows(2) {
        if ctx.cmp(w[0], w[1]) != Ordering::Less {
            return Err(AttemptError::Budget);
        }
    }
    Ok(())
}
