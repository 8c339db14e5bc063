//! Fixtures shared by the benchmarks.

use holodimer::{ReducedCell, VertexSignature};

pub fn one_two_cell(a: f64, b: f64, c: f64) -> ReducedCell {
    let s = VertexSignature::one_two(a, b, c);
    ReducedCell::orthogonal(s, s, 1e-9).expect("1-2 signatures are orthogonally realizable")
}
