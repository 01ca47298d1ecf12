//! Exact rank of integer matrices by fraction-free column reduction.

use crate::error::{HodgeError, Result};
use crate::sparse::CsrMatrix;
use std::collections::HashMap;

type SparseColumn = Vec<(usize, i64)>;

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `a·x − b·y` for sorted sparse columns, with overflow checking.
fn combine(a: i64, x: &SparseColumn, b: i64, y: &SparseColumn) -> Result<SparseColumn> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    let scaled = |c: i64, v: i64| c.checked_mul(v).ok_or(HodgeError::Overflow);
    while i < x.len() || j < y.len() {
        let (row, value) = match (x.get(i), y.get(j)) {
            (Some(&(rx, vx)), Some(&(ry, _))) if rx < ry => {
                i += 1;
                (rx, scaled(a, vx)?)
            }
            (Some(&(rx, _)), Some(&(ry, vy))) if ry < rx => {
                j += 1;
                (ry, scaled(-b, vy)?)
            }
            (Some(&(rx, vx)), Some(&(_, vy))) => {
                i += 1;
                j += 1;
                let v = scaled(a, vx)?
                    .checked_sub(scaled(b, vy)?)
                    .ok_or(HodgeError::Overflow)?;
                (rx, v)
            }
            (Some(&(rx, vx)), None) => {
                i += 1;
                (rx, scaled(a, vx)?)
            }
            (None, Some(&(ry, vy))) => {
                j += 1;
                (ry, scaled(-b, vy)?)
            }
            (None, None) => unreachable!(),
        };
        if value != 0 {
            out.push((row, value));
        }
    }
    let content = out.iter().fold(0, |g, &(_, v)| gcd(g, v));
    if content > 1 {
        for entry in &mut out {
            entry.1 /= content;
        }
    }
    Ok(out)
}

/// Rank over ℚ of an integer matrix.
///
/// Columns are reduced left to right against earlier columns sharing the same
/// lowest nonzero row; all arithmetic is exact (`i64` with overflow checks and
/// content normalization), so the result is the true rational rank.
pub fn integer_rank(matrix: &CsrMatrix<i32>) -> Result<usize> {
    let transposed = matrix.transpose();
    let mut columns: Vec<SparseColumn> = (0..matrix.ncols())
        .map(|j| transposed.row(j).map(|(i, v)| (i, i64::from(v))).collect())
        .collect();
    let mut pivot_of_row: HashMap<usize, usize> = HashMap::new();
    let mut rank = 0;
    for j in 0..columns.len() {
        while let Some(&(low, value)) = columns[j].last() {
            match pivot_of_row.get(&low) {
                Some(&k) => {
                    let pivot = columns[k].last().expect("pivot column is nonzero").1;
                    let g = gcd(pivot, value);
                    columns[j] = combine(pivot / g, &columns[j], value / g, &columns[k])?;
                }
                None => {
                    pivot_of_row.insert(low, j);
                    rank += 1;
                    break;
                }
            }
        }
    }
    Ok(rank)
}
