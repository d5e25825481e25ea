//! Parallel brute-force oracle.

use opnorm_core::oracle::{brute_force_qp_chunk, chunk_count, merge_chunks};
use opnorm_core::{QpSolution, SymmetricMatrix};
use rayon::prelude::*;

/// Fixed split so the result does not depend on the thread count.
pub const CHUNK_BITS: u32 = 6;

pub fn parallel_qp(m: &SymmetricMatrix) -> opnorm_core::Result<QpSolution> {
    let parts: Vec<QpSolution> = (0..chunk_count(m.n(), CHUNK_BITS))
        .into_par_iter()
        .map(|c| brute_force_qp_chunk(m, CHUNK_BITS, c))
        .collect::<opnorm_core::Result<_>>()?;
    Ok(merge_chunks(parts).expect("at least one chunk"))
}
