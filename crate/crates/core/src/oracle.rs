//! Exact `max_{‖x‖∞≤1} xᵀMx` by hypercube enumeration.
//!
//! With `M_ii ≥ 0` the objective is convex in each coordinate, so the maximum
//! sits on a vertex of `[-1, 1]ⁿ`. Vertices are visited in Gray-code order:
//! flipping `x_i` changes the value by `−4 x_i (Mx)_i + 4 M_ii` and `Mx` by
//! `−2 x_i M[:, i]`, so each step costs `O(n)`. Fixing `x_0 = +1` halves the
//! work since `x` and `−x` give the same value.

use alloc::vec;
use alloc::vec::Vec;

use crate::certify::norm_matrix;
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SymmetricMatrix};

/// Largest dimension the oracle accepts.
pub const ORACLE_MAX_N: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub value: f64,
    pub argmax: Vec<i8>,
}

impl QpSolution {
    pub fn argmax_f64(&self) -> Vec<f64> {
        self.argmax.iter().map(|&s| f64::from(s)).collect()
    }
}

pub fn brute_force_qp(m: &SymmetricMatrix) -> Result<QpSolution> {
    brute_force_qp_chunk(m, 0, 0)
}

/// Number of chunks `brute_force_qp_chunk` splits the search into for a given
/// `chunk_bits`, after clamping to what `n` allows.
pub fn chunk_count(n: usize, chunk_bits: u32) -> usize {
    1usize << effective_bits(n, chunk_bits)
}

fn effective_bits(n: usize, chunk_bits: u32) -> u32 {
    chunk_bits.min(n.saturating_sub(1) as u32)
}

/// Best vertex among those whose last `chunk_bits` coordinates are fixed by
/// the bits of `chunk` (a set bit means `−1`). The chunks partition the half
/// hypercube `x_0 = +1`, so the maximum over all chunks is the QP value.
pub fn brute_force_qp_chunk(m: &SymmetricMatrix, chunk_bits: u32, chunk: usize) -> Result<QpSolution> {
    let n = m.n();
    if n == 0 {
        return Err(Error::InvalidDimension("oracle needs n >= 1"));
    }
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge { n, cap: ORACLE_MAX_N });
    }
    m.check_nonnegative_diagonal()?;
    let b = effective_bits(n, chunk_bits) as usize;
    if chunk >= 1 << b {
        return Err(Error::InvalidParameter("chunk index out of range"));
    }
    let free = n - 1 - b;

    let mut x = vec![1.0f64; n];
    for k in 0..b {
        if chunk >> k & 1 == 1 {
            x[n - b + k] = -1.0;
        }
    }
    let mut mx = m.matvec(&x);
    let mut value: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
    let mut best_value = value;
    let mut best_code = 0u32;
    let mut code = 0u32;

    for k in 1..(1u32 << free) {
        let bit = k.trailing_zeros() as usize;
        let i = bit + 1;
        let xi = x[i];
        value += 4.0 * (m.get(i, i) - xi * mx[i]);
        for (g, &mij) in mx.iter_mut().zip(m.row(i)) {
            *g -= 2.0 * xi * mij;
        }
        x[i] = -xi;
        code ^= 1 << bit;
        if value > best_value {
            best_value = value;
            best_code = code;
        }
    }

    let argmax: Vec<i8> = (0..n)
        .map(|i| {
            let flipped = if i == 0 {
                false
            } else if i <= free {
                best_code >> (i - 1) & 1 == 1
            } else {
                chunk >> (i - 1 - free) & 1 == 1
            };
            if flipped { -1 } else { 1 }
        })
        .collect();
    let xs: Vec<f64> = argmax.iter().map(|&s| f64::from(s)).collect();
    Ok(QpSolution { value: m.quad_form(&xs), argmax })
}

/// Deterministic merge of chunk results: larger value wins, ties go to the
/// earlier chunk.
pub fn merge_chunks(parts: impl IntoIterator<Item = QpSolution>) -> Option<QpSolution> {
    parts.into_iter().fold(None, |acc: Option<QpSolution>, s| match acc {
        Some(a) if a.value >= s.value => Some(a),
        _ => Some(s),
    })
}

/// Exact `‖P‖_{∞→1}` of a projection (or `‖P‖²_{∞→2}` of a general `P`).
pub fn infty_to_1_exact(p: &DenseMatrix) -> Result<f64> {
    let (m, _) = norm_matrix(p);
    Ok(brute_force_qp(&m)?.value)
}
