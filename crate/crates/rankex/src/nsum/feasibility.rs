//! Exact-rational feasibility for the constraint systems the rounding sorter
//! builds: few variables, many integer rows of the shapes `⟨x,h⟩ ≤ −1`,
//! `⟨x,h⟩ ≥ 1`, `⟨x,h⟩ = 0`.
//!
//! Equalities are eliminated first by exact Gaussian elimination (they are
//! homogeneous, so the solution space is a linear subspace). The remaining
//! inequalities are processed incrementally in random order, maintaining a
//! point satisfying the prefix: when the new row is violated, a point is
//! searched on that row's boundary hyperplane by substituting one variable
//! and recursing one dimension down. If the boundary meets no point of the
//! prefix region, the whole system is infeasible — a violated point plus a
//! non-empty intersection would put a boundary crossing on the segment
//! between them. All arithmetic is exact over big integers; the returned
//! vector satisfies every row exactly, and its coordinates stay within the
//! bit growth of at most `dims` eliminations over the input rows.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Relation of one constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `⟨x, h⟩ ≤ −1`
    LeMinusOne,
    /// `⟨x, h⟩ ≥ 1`
    GePlusOne,
    /// `⟨x, h⟩ = 0`
    EqZero,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coeffs: Vec<i64>,
    pub relation: Relation,
}

/// A system of integer constraint rows over `dims` rational unknowns.
#[derive(Clone, Debug, Default)]
pub struct InequalitySystem {
    pub dims: usize,
    pub constraints: Vec<Constraint>,
}

impl InequalitySystem {
    pub fn new(dims: usize) -> Self {
        InequalitySystem { dims, constraints: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<i64>, relation: Relation) {
        debug_assert_eq!(coeffs.len(), self.dims);
        self.constraints.push(Constraint { coeffs, relation });
    }

    /// Facet complexity: the largest bit size over the rows' encodings.
    pub fn facet_bits(&self) -> u64 {
        self.constraints
            .iter()
            .flat_map(|c| c.coeffs.iter().map(|&v| 64 - v.unsigned_abs().leading_zeros() as u64))
            .max()
            .unwrap_or(1)
    }
}

/// An exact rational point; every coordinate a reduced fraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalVector {
    pub coords: Vec<BigRational>,
}

impl RationalVector {
    /// Largest bit size over all numerators and denominators.
    pub fn max_bits(&self) -> u64 {
        self.coords
            .iter()
            .flat_map(|c| [c.numer().magnitude().bits(), c.denom().magnitude().bits()])
            .max()
            .unwrap_or(1)
            .max(1)
    }

    /// Numerators over one common positive denominator.
    pub fn common_denominator(&self) -> (Vec<BigInt>, BigInt) {
        let mut den = BigInt::from(1);
        for c in &self.coords {
            den = den.lcm(c.denom());
        }
        let nums = self.coords.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        (nums, den)
    }

    /// Exact check of one row.
    pub fn satisfies(&self, c: &Constraint) -> bool {
        let mut acc = BigRational::zero();
        for (x, &h) in self.coords.iter().zip(&c.coeffs) {
            acc += x * BigRational::from(BigInt::from(h));
        }
        let one = BigRational::from(BigInt::from(1));
        match c.relation {
            Relation::LeMinusOne => acc <= -one,
            Relation::GePlusOne => acc >= one,
            Relation::EqZero => acc.is_zero(),
        }
    }
}

/// Inequality row in internal form `⟨y, coeffs⟩ ≤ rhs`, big-integer exact.
#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<BigInt>,
    rhs: BigInt,
}

impl Row {
    fn normalize(&mut self) {
        let mut g = self.rhs.magnitude().clone();
        for c in &self.coeffs {
            g = g.gcd(c.magnitude());
        }
        let g = BigInt::from(g);
        if g > BigInt::from(1) {
            for c in &mut self.coeffs {
                *c /= &g;
            }
            self.rhs /= &g;
        }
    }
}

struct Search {
    ops: u64,
    cap: u64,
}

impl Search {
    fn charge(&mut self, units: u64) -> Result<()> {
        self.ops += units;
        if self.ops > self.cap {
            return Err(Error::SizeBound("feasibility search exceeded its work cap".into()));
        }
        Ok(())
    }
}

/// Finds an exact rational point satisfying every constraint, or reports
/// infeasibility. `seed` randomizes the processing order only; the outcome
/// (feasible/infeasible) does not depend on it.
pub fn solve_feasibility(system: &InequalitySystem, seed: u64) -> Result<RationalVector> {
    let dims = system.dims;
    // deduplicate rows; the samplers produce repeats
    let mut seen = std::collections::HashSet::new();
    let mut equalities: Vec<&Constraint> = Vec::new();
    let mut inequalities: Vec<Row> = Vec::new();
    for c in &system.constraints {
        if !seen.insert(c.clone()) {
            continue;
        }
        match c.relation {
            Relation::EqZero => equalities.push(c),
            Relation::LeMinusOne => inequalities.push(Row {
                coeffs: c.coeffs.iter().map(|&v| BigInt::from(v)).collect(),
                rhs: BigInt::from(-1),
            }),
            Relation::GePlusOne => inequalities.push(Row {
                coeffs: c.coeffs.iter().map(|&v| BigInt::from(-v)).collect(),
                rhs: BigInt::from(-1),
            }),
        }
    }

    // eliminate the (homogeneous) equalities: x = basis · y with an integer
    // basis, so substitution keeps the rows integer
    let basis = null_space_basis(dims, &equalities);
    let free = basis.first().map(|r| r.len()).unwrap_or(0);
    let mut rows: Vec<Row> = Vec::with_capacity(inequalities.len());
    for row in inequalities {
        let mut coeffs = vec![BigInt::zero(); free];
        for (xi, b_row) in basis.iter().enumerate() {
            if row.coeffs[xi].is_zero() {
                continue;
            }
            for (yj, b) in b_row.iter().enumerate() {
                coeffs[yj] += &row.coeffs[xi] * b;
            }
        }
        let mut r = Row { coeffs, rhs: row.rhs };
        r.normalize();
        rows.push(r);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rows.shuffle(&mut rng);
    let mut search = Search {
        ops: 0,
        cap: 5_000_000_u64.max(rows.len() as u64 * (dims as u64 + 1) * 64),
    };
    let y = feasible_point(&rows, free, &mut rng, &mut search)?;

    // map back through the null-space basis
    let coords: Vec<BigRational> = basis
        .iter()
        .map(|b_row| {
            let mut acc = BigRational::zero();
            for (yj, b) in b_row.iter().enumerate() {
                acc += &y.coords[yj] * BigRational::from(b.clone());
            }
            acc
        })
        .collect();
    let out = RationalVector { coords };
    if !satisfies_all(&out, &system.constraints) {
        return Err(Error::InvalidArgument(
            "feasibility solution failed exact verification".into(),
        ));
    }
    Ok(out)
}

/// Exact check of every constraint against one common-denominator form.
fn satisfies_all(point: &RationalVector, constraints: &[Constraint]) -> bool {
    let (nums, den) = point.common_denominator();
    let small_nums: Option<Vec<i64>> =
        nums.iter().map(|v| v.to_i64().filter(|x| x.abs() < 1 << 55)).collect();
    let check = |c: &Constraint| -> bool {
        if let (Some(nums_i), Some(den_i)) =
            (&small_nums, den.to_i64().filter(|x| x.abs() < 1 << 55))
        {
            if c.coeffs.iter().all(|&v| v.abs() < 1 << 55) {
                let acc: i128 = c
                    .coeffs
                    .iter()
                    .zip(nums_i)
                    .map(|(&h, &x)| i128::from(h) * i128::from(x))
                    .sum();
                let rhs = i128::from(den_i);
                return match c.relation {
                    Relation::LeMinusOne => acc <= -rhs,
                    Relation::GePlusOne => acc >= rhs,
                    Relation::EqZero => acc == 0,
                };
            }
        }
        let mut acc = BigInt::zero();
        for (&h, x) in c.coeffs.iter().zip(&nums) {
            if h != 0 {
                acc += x * h;
            }
        }
        match c.relation {
            Relation::LeMinusOne => acc <= -&den,
            Relation::GePlusOne => acc >= den.clone(),
            Relation::EqZero => acc.is_zero(),
        }
    };
    constraints.iter().all(check)
}

/// Integer basis of the null space of the homogeneous equality rows:
/// returns a `dims × free` matrix B with x = B·y ranging over all solutions.
fn null_space_basis(dims: usize, equalities: &[&Constraint]) -> Vec<Vec<BigInt>> {
    // fraction-free Gaussian elimination on the equality matrix
    let mut mat: Vec<Vec<BigRational>> = equalities
        .iter()
        .map(|c| c.coeffs.iter().map(|&v| BigRational::from(BigInt::from(v))).collect())
        .collect();
    let mut pivot_col_of_row = Vec::new();
    let mut r = 0usize;
    for col in 0..dims {
        let Some(p) = (r..mat.len()).find(|&i| !mat[i][col].is_zero()) else {
            continue;
        };
        mat.swap(r, p);
        let inv = mat[r][col].clone();
        for x in mat[r].iter_mut() {
            *x /= &inv;
        }
        for i in 0..mat.len() {
            if i != r && !mat[i][col].is_zero() {
                let f = mat[i][col].clone();
                for c2 in 0..dims {
                    let sub = &mat[r][c2] * &f;
                    mat[i][c2] -= sub;
                }
            }
        }
        pivot_col_of_row.push(col);
        r += 1;
        if r == mat.len() {
            break;
        }
    }
    let pivot_cols: std::collections::HashSet<usize> = pivot_col_of_row.iter().copied().collect();
    let free_cols: Vec<usize> = (0..dims).filter(|c| !pivot_cols.contains(c)).collect();
    // x_pivot = -Σ mat[row][free] · y_free ; x_free = y_free ; clear
    // denominators per column so the basis is integer
    let mut basis = vec![vec![BigRational::zero(); free_cols.len()]; dims];
    for (yj, &fc) in free_cols.iter().enumerate() {
        basis[fc][yj] = BigRational::from(BigInt::from(1));
        for (row, &pc) in pivot_col_of_row.iter().enumerate() {
            basis[pc][yj] = -mat[row][fc].clone();
        }
    }
    let mut out = vec![vec![BigInt::zero(); free_cols.len()]; dims];
    for yj in 0..free_cols.len() {
        let mut den = BigInt::from(1);
        for row in basis.iter() {
            den = den.lcm(row[yj].denom());
        }
        for (xi, row) in basis.iter().enumerate() {
            out[xi][yj] = row[yj].numer() * (&den / row[yj].denom());
        }
    }
    out
}

/// A point satisfying `⟨y, row.coeffs⟩ ≤ row.rhs` for every row, in `dims`
/// dimensions, or infeasibility.
///
/// Large systems go through sampling with multiplicative reweighting: a small
/// weighted sample is solved exactly by the incremental search, violated rows
/// (found by an integer-only scan of everything) have their weights doubled,
/// and after expectedly O(dims·log rows) iterations a sample solution
/// satisfies the whole system. The iteration cap falls back to the exact
/// incremental search over all rows, so infeasibility is always decided.
fn feasible_point(
    rows: &[Row],
    dims: usize,
    rng: &mut ChaCha8Rng,
    search: &mut Search,
) -> Result<RationalVector> {
    let sample_size = (6 * dims * dims).max(dims + 1);
    if rows.len() <= 2 * sample_size || dims <= 1 {
        let mut point = incremental_point(rows, dims, search)?;
        simplify_point(rows, &mut point);
        return Ok(point);
    }
    let mut weights = vec![1.0f64; rows.len()];
    let small_rows: Option<Vec<(Vec<i64>, i64)>> = rows
        .iter()
        .map(|r| {
            let coeffs: Option<Vec<i64>> =
                r.coeffs.iter().map(|c| c.to_i64().filter(|v| v.abs() < 1 << 55)).collect();
            Some((coeffs?, r.rhs.to_i64().filter(|v| v.abs() < 1 << 55)?))
        })
        .collect();
    let cap = 32 * (dims as u32 + 2) * (64 - (rows.len() as u64).leading_zeros());
    for _ in 0..cap {
        // weighted sample, drawn with replacement
        let total: f64 = weights.iter().sum();
        if !total.is_finite() {
            for w in weights.iter_mut() {
                *w = (*w / 1e200).max(1e-12);
            }
        }
        let total: f64 = weights.iter().sum();
        let mut cumulative = Vec::with_capacity(rows.len());
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        let sample: Vec<Row> = (0..sample_size)
            .map(|_| {
                let r = rng.gen::<f64>() * total;
                let i = cumulative.partition_point(|&c| c < r).min(rows.len() - 1);
                rows[i].clone()
            })
            .collect();
        let mut candidate = incremental_point(&sample, dims, search)?;
        // small coordinates keep the violation scan on the machine-word path
        simplify_point(&sample, &mut candidate);
        let (nums, den) = candidate.common_denominator();
        search.charge(rows.len() as u64)?;
        let violated = violated_indices(rows, &small_rows, &nums, &den);
        if violated.is_empty() {
            return Ok(candidate);
        }
        // double the violators' weights only when they are light, the usual
        // guard that keeps the potential argument working
        let violated_weight: f64 = violated.iter().map(|&i| weights[i]).sum();
        if violated_weight <= total / (3.0 * dims as f64) {
            for i in violated {
                weights[i] *= 2.0;
            }
        }
    }
    // iteration cap reached: decide exactly on the full system
    let mut point = incremental_point(rows, dims, search)?;
    simplify_point(rows, &mut point);
    Ok(point)
}

/// Exact violation scan; uses i128 arithmetic when every operand fits.
fn violated_indices(
    rows: &[Row],
    small_rows: &Option<Vec<(Vec<i64>, i64)>>,
    nums: &[BigInt],
    den: &BigInt,
) -> Vec<usize> {
    if let Some(small) = small_rows {
        let nums_i: Option<Vec<i64>> =
            nums.iter().map(|v| v.to_i64().filter(|x| x.abs() < 1 << 55)).collect();
        let den_i = den.to_i64().filter(|x| x.abs() < 1 << 55);
        if let (Some(nums_i), Some(den_i)) = (nums_i, den_i) {
            return (0..rows.len())
                .filter(|&i| {
                    let (coeffs, rhs) = &small[i];
                    let mut acc: i128 = 0;
                    for (&c, &x) in coeffs.iter().zip(&nums_i) {
                        acc += i128::from(c) * i128::from(x);
                    }
                    acc > i128::from(*rhs) * i128::from(den_i)
                })
                .collect();
        }
    }
    (0..rows.len())
        .filter(|&i| {
            let mut acc = BigInt::zero();
            for (c, x) in rows[i].coeffs.iter().zip(nums) {
                if !c.is_zero() {
                    acc += c * x;
                }
            }
            acc > &rows[i].rhs * den
        })
        .collect()
}

/// Randomized-order incremental search (exact, recursive in the dimension).
fn incremental_point(rows: &[Row], dims: usize, search: &mut Search) -> Result<RationalVector> {
    if dims == 0 {
        for row in rows {
            if !(BigInt::zero() <= row.rhs) {
                return Err(Error::Infeasible);
            }
        }
        return Ok(RationalVector { coords: Vec::new() });
    }
    if dims == 1 {
        return interval_point(rows).map(|p| RationalVector { coords: vec![p] });
    }
    let mut point = vec![BigRational::zero(); dims];
    for (i, row) in rows.iter().enumerate() {
        search.charge(dims as u64)?;
        if dot(&point, &row.coeffs) <= BigRational::from(row.rhs.clone()) {
            continue;
        }
        // restrict to this row's boundary hyperplane and solve the prefix
        let j = (0..dims)
            .max_by_key(|&j| row.coeffs[j].magnitude().clone())
            .expect("dims >= 1");
        if row.coeffs[j].is_zero() {
            // all-zero row violated means 0 > rhs
            return Err(Error::Infeasible);
        }
        let restricted: Vec<Row> = rows[..i]
            .iter()
            .map(|r| substitute(r, row, j, search))
            .collect::<Result<_>>()?;
        let sub = incremental_point(&restricted, dims - 1, search)?;
        // lift: y_j = (rhs − Σ_{l≠j} a_l y_l) / a_j
        let mut lifted = Vec::with_capacity(dims);
        let mut acc = BigRational::from(row.rhs.clone());
        let mut it = sub.coords.iter();
        for l in 0..dims {
            if l == j {
                lifted.push(BigRational::zero());
            } else {
                let v = it.next().expect("dims-1 coordinates").clone();
                acc -= &v * BigRational::from(row.coeffs[l].clone());
                lifted.push(v);
            }
        }
        lifted[j] = acc / BigRational::from(row.coeffs[j].clone());
        point = lifted;
        debug_assert!(dot(&point, &row.coeffs) == BigRational::from(row.rhs.clone()));
    }
    Ok(RationalVector { coords: point })
}

/// Eliminates variable `j` from `r` using the boundary `⟨y, b⟩ = b.rhs`;
/// the result is scaled by `|b.coeffs[j]|` to stay integer.
fn substitute(r: &Row, b: &Row, j: usize, search: &mut Search) -> Result<Row> {
    search.charge(r.coeffs.len() as u64)?;
    let a_j = &b.coeffs[j];
    let scale = a_j.abs();
    let sign = a_j.signum();
    let mut coeffs = Vec::with_capacity(r.coeffs.len() - 1);
    for l in 0..r.coeffs.len() {
        if l == j {
            continue;
        }
        coeffs.push(&r.coeffs[l] * &scale - &r.coeffs[j] * &b.coeffs[l] * &sign);
    }
    let rhs = &r.rhs * &scale - &r.coeffs[j] * &b.rhs * &sign;
    let mut row = Row { coeffs, rhs };
    row.normalize();
    Ok(row)
}

/// One-dimensional base case: intersect half-lines, prefer small points.
fn interval_point(rows: &[Row]) -> Result<BigRational> {
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for row in rows {
        let a = &row.coeffs[0];
        let bound = || BigRational::new(row.rhs.clone(), a.clone());
        match a.sign() {
            num_bigint::Sign::NoSign => {
                if !(BigInt::zero() <= row.rhs) {
                    return Err(Error::Infeasible);
                }
            }
            num_bigint::Sign::Plus => {
                let b = bound();
                if hi.as_ref().map_or(true, |h| b < *h) {
                    hi = Some(b);
                }
            }
            num_bigint::Sign::Minus => {
                let b = bound();
                if lo.as_ref().map_or(true, |l| b > *l) {
                    lo = Some(b);
                }
            }
        }
    }
    if let (Some(l), Some(h)) = (&lo, &hi) {
        if l > h {
            return Err(Error::Infeasible);
        }
    }
    let zero = BigRational::zero();
    Ok(match (&lo, &hi) {
        (Some(l), _) if *l > zero => l.clone(),
        (_, Some(h)) if *h < zero => h.clone(),
        _ => zero,
    })
}

/// Coordinate descent to low-complexity coordinates: each coordinate in turn
/// is replaced by the simplest rational inside its one-dimensional feasible
/// interval (all other coordinates fixed). Feasibility is preserved exactly.
fn simplify_point(rows: &[Row], point: &mut RationalVector) {
    let dims = point.coords.len();
    if dims == 0 || rows.is_empty() {
        return;
    }
    let mut dots: Vec<BigRational> =
        rows.iter().map(|r| dot(&point.coords, &r.coeffs)).collect();
    for _ in 0..2 {
        for j in 0..dims {
            let mut lo: Option<BigRational> = None;
            let mut hi: Option<BigRational> = None;
            for (r, d) in rows.iter().zip(&dots) {
                let a = &r.coeffs[j];
                if a.is_zero() {
                    continue;
                }
                // a·x_j ≤ rhs − (dot − a·x_j)
                let rest = d - &point.coords[j] * BigRational::from(a.clone());
                let bound = (BigRational::from(r.rhs.clone()) - rest)
                    / BigRational::from(a.clone());
                if a.is_positive() {
                    if hi.as_ref().map_or(true, |h| bound < *h) {
                        hi = Some(bound);
                    }
                } else if lo.as_ref().map_or(true, |l| bound > *l) {
                    lo = Some(bound);
                }
            }
            let new = simplest_in(lo.as_ref(), hi.as_ref());
            if new != point.coords[j] {
                let delta = &new - &point.coords[j];
                for (r, d) in rows.iter().zip(dots.iter_mut()) {
                    if !r.coeffs[j].is_zero() {
                        *d += &delta * BigRational::from(r.coeffs[j].clone());
                    }
                }
                point.coords[j] = new;
            }
        }
    }
}

/// The simplest rational in the closed interval (None = unbounded side):
/// an integer of minimal magnitude when one fits, otherwise the
/// continued-fraction descent into the common integer cell.
fn simplest_in(lo: Option<&BigRational>, hi: Option<&BigRational>) -> BigRational {
    let zero = BigRational::zero();
    match (lo, hi) {
        (None, None) => zero,
        (Some(l), None) => {
            if *l <= zero {
                zero
            } else {
                l.ceil()
            }
        }
        (None, Some(h)) => {
            if *h >= zero {
                zero
            } else {
                h.floor()
            }
        }
        (Some(l), Some(h)) => simplest_between(l, h),
    }
}

fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    debug_assert!(lo <= hi);
    let zero = BigRational::zero();
    let il = lo.ceil();
    let ih = hi.floor();
    if il <= ih {
        // an integer fits; take the one nearest zero
        return if il > zero {
            il
        } else if ih < zero {
            ih
        } else {
            zero
        };
    }
    // no integer inside: recurse on the inverted fractional interval
    let n = lo.floor();
    let fl = lo - &n;
    let fh = hi - &n;
    n + (BigRational::from(BigInt::from(1)) / simplest_between(&fh.recip(), &fl.recip()))
}

fn dot(point: &[BigRational], coeffs: &[BigInt]) -> BigRational {
    let mut acc = BigRational::zero();
    for (p, c) in point.iter().zip(coeffs) {
        if !c.is_zero() {
            acc += p * BigRational::from(c.clone());
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn solve(sys: &InequalitySystem) -> Result<RationalVector> {
        solve_feasibility(sys, 7)
    }

    #[test]
    fn single_upper_bound() {
        let mut sys = InequalitySystem::new(1);
        sys.push(vec![1], Relation::LeMinusOne);
        let x = solve(&sys).unwrap();
        assert!(x.coords[0] <= BigRational::from(BigInt::from(-1)));
    }

    #[test]
    fn contradiction_is_infeasible() {
        let mut sys = InequalitySystem::new(1);
        sys.push(vec![1], Relation::LeMinusOne);
        sys.push(vec![1], Relation::GePlusOne);
        assert!(matches!(solve(&sys), Err(Error::Infeasible)));
    }

    #[test]
    fn equalities_pin_a_subspace() {
        // x1 = x2, x1 + x2 >= 1, x1 - 2 x2 <= -1
        let mut sys = InequalitySystem::new(2);
        sys.push(vec![1, -1], Relation::EqZero);
        sys.push(vec![1, 1], Relation::GePlusOne);
        sys.push(vec![1, -2], Relation::LeMinusOne);
        let x = solve(&sys).unwrap();
        assert_eq!(x.coords[0], x.coords[1]);
    }

    #[test]
    fn equalities_forcing_origin_clash_with_strict_rows() {
        let mut sys = InequalitySystem::new(2);
        sys.push(vec![1, 0], Relation::EqZero);
        sys.push(vec![0, 1], Relation::EqZero);
        sys.push(vec![1, 1], Relation::GePlusOne);
        assert!(matches!(solve(&sys), Err(Error::Infeasible)));
    }

    #[test]
    fn random_systems_from_a_hidden_point_are_solved_exactly() {
        let mut rng = StdRng::seed_from_u64(99);
        for round in 0..60 {
            let dims = rng.gen_range(1..=5);
            // hidden integer point, scaled so margins reach ±1
            let hidden: Vec<i64> = (0..dims).map(|_| rng.gen_range(-50..=50)).collect();
            let mut sys = InequalitySystem::new(dims);
            for _ in 0..rng.gen_range(1..=120) {
                let h: Vec<i64> = (0..dims).map(|_| rng.gen_range(-9..=9)).collect();
                let v: i64 = h.iter().zip(&hidden).map(|(a, b)| a * b).sum();
                let rel = match v.signum() {
                    1 => Relation::GePlusOne,
                    -1 => Relation::LeMinusOne,
                    _ => Relation::EqZero,
                };
                sys.push(h, rel);
            }
            let x = solve_feasibility(&sys, round).unwrap();
            for c in &sys.constraints {
                assert!(x.satisfies(c));
            }
            // bit sizes stay tame
            assert!(x.max_bits() <= 64 * dims as u64 + 64);
        }
    }

    #[test]
    fn common_denominator_is_consistent() {
        let mut sys = InequalitySystem::new(2);
        sys.push(vec![2, 3], Relation::GePlusOne);
        sys.push(vec![5, -7], Relation::LeMinusOne);
        let x = solve(&sys).unwrap();
        let (nums, den) = x.common_denominator();
        assert!(den.is_positive());
        for (i, c) in x.coords.iter().enumerate() {
            assert_eq!(BigRational::new(nums[i].clone(), den.clone()), *c);
        }
    }
}
