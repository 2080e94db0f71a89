//! Radix sorting passes: bounded machine integers, coefficient vectors, and
//! big-integer keys produced by the rational rounding step.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;

use crate::exec;

/// Stable LSD sort of `keys` (16-bit digits); returns the sorting permutation.
pub fn sort_u64_keys(keys: &[u64], significant_bits: u32) -> Vec<u32> {
    let mut perm: Vec<u32> = (0..keys.len() as u32).collect();
    let mut scratch = vec![0u32; keys.len()];
    let passes = significant_bits.div_ceil(16).max(1);
    for pass in 0..passes {
        let shift = pass * 16;
        let mut counts = [0u32; 1 << 16];
        for &i in &perm {
            counts[((keys[i as usize] >> shift) & 0xFFFF) as usize] += 1;
        }
        let mut sum = 0u32;
        for c in counts.iter_mut() {
            let v = *c;
            *c = sum;
            sum += v;
        }
        for &i in &perm {
            let d = ((keys[i as usize] >> shift) & 0xFFFF) as usize;
            scratch[counts[d] as usize] = i;
            counts[d] += 1;
        }
        std::mem::swap(&mut perm, &mut scratch);
    }
    perm
}

/// Stable lexicographic sort of equal-length coefficient vectors by counting
/// passes, one per coordinate, last coordinate first. Bucket count is
/// `max_value + 1`. Returns the sorting permutation.
pub fn sort_coeff_vectors(coeffs: &[Vec<u32>], t: usize, max_value: u32) -> Vec<u32> {
    let mut perm: Vec<u32> = (0..coeffs.len() as u32).collect();
    let mut scratch = vec![0u32; coeffs.len()];
    let mut counts = vec![0u32; max_value as usize + 1];
    for coord in (0..t).rev() {
        counts.iter_mut().for_each(|c| *c = 0);
        for &i in &perm {
            counts[coeffs[i as usize][coord] as usize] += 1;
        }
        let mut sum = 0u32;
        for c in counts.iter_mut() {
            let v = *c;
            *c = sum;
            sum += v;
        }
        for &i in &perm {
            let d = coeffs[i as usize][coord] as usize;
            scratch[counts[d] as usize] = i;
            counts[d] += 1;
        }
        std::mem::swap(&mut perm, &mut scratch);
    }
    perm
}

/// `⌊p · 4^{b+1} / q⌋` — the order-preserving integer image of `p/q` for
/// values within the `b`-bit budget. `q` must be positive.
pub fn floor_scaled(p: &BigInt, q: &BigInt, b: u64) -> BigInt {
    debug_assert!(q.is_positive());
    (p << (2 * (b + 1))).div_floor(q)
}

/// Converts rationals `p_i/q_i` (denominators positive, numerators and
/// denominators of at most `b` bits) to integers with [`floor_scaled`] and
/// radix-sorts them. Distinct rationals keep their strict order; equal
/// rationals map to equal integers, ties resolved by input index.
pub fn round_and_radix_sort(values: &[(BigInt, BigInt)], b: u64, parallel: bool) -> Vec<u32> {
    let scaled = exec::map_slice(parallel, values, |(p, q)| floor_scaled(p, q, b));
    sort_bigint_keys(&scaled, parallel)
}

/// Stable LSD radix sort of arbitrary-size integer keys: keys are offset by
/// the minimum to become non-negative, decomposed into 16-bit digits, and
/// counting-sorted digit by digit.
pub fn sort_bigint_keys(keys: &[BigInt], parallel: bool) -> Vec<u32> {
    if keys.len() <= 1 {
        return (0..keys.len() as u32).collect();
    }
    let min = keys.iter().min().expect("non-empty");
    let shifted = exec::map_slice(parallel, keys, |k| {
        (k - min).to_biguint().expect("offset values are non-negative")
    });
    let width_u32 = shifted.iter().map(|v| v.iter_u32_digits().len()).max().unwrap_or(1).max(1);
    let digit_width = width_u32 * 2;
    let digits: Vec<u16> = {
        let rows = exec::map_slice(parallel, &shifted, |v| {
            let mut row = vec![0u16; digit_width];
            for (i, d) in v.iter_u32_digits().enumerate() {
                row[2 * i] = (d & 0xFFFF) as u16;
                row[2 * i + 1] = (d >> 16) as u16;
            }
            row
        });
        rows.into_iter().flatten().collect()
    };
    let mut perm: Vec<u32> = (0..keys.len() as u32).collect();
    let mut scratch = vec![0u32; keys.len()];
    let mut counts = vec![0u32; 1 << 16];
    for pass in 0..digit_width {
        counts.iter_mut().for_each(|c| *c = 0);
        for &i in &perm {
            counts[digits[i as usize * digit_width + pass] as usize] += 1;
        }
        if counts[0] as usize == keys.len() {
            continue;
        }
        let mut sum = 0u32;
        for c in counts.iter_mut() {
            let v = *c;
            *c = sum;
            sum += v;
        }
        for &i in &perm {
            let d = digits[i as usize * digit_width + pass] as usize;
            scratch[counts[d] as usize] = i;
            counts[d] += 1;
        }
        std::mem::swap(&mut perm, &mut scratch);
    }
    perm
}

/// Bits needed to store the magnitude of every numerator and denominator.
pub fn bit_budget(values: &[(BigInt, BigInt)]) -> u64 {
    values
        .iter()
        .flat_map(|(p, q)| [p.magnitude().bits(), q.magnitude().bits()])
        .max()
        .unwrap_or(1)
        .max(1)
}
