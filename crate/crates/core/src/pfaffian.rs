//! Kasteleyn matrices on the Fisher torus and their Pfaffians.
//!
//! The four sectors `(theta, tau)` flip the signs of connecting edges that
//! cross the x seam (`theta = 1`) or the y seam (`tau = 1`). The weighted
//! matching count is `eps * 1/2 * sum_i s_i Pf(K_i)` where the pattern `s`
//! depends only on the parity of n (see [`sign_pattern`]) and `eps = +-1`
//! is read off the same combination at unit weights.

mod fourier;

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{FisherEdge, FisherEdgeKind, FisherTorus};

pub use fourier::{fourier_sector_pfaffian, kasteleyn_inverse_finite};

/// Sector order used everywhere: `(0,0), (1,0), (0,1), (1,1)`.
pub const SECTORS: [(u8, u8); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Sign applied to each sector Pfaffian, calibrated against exhaustive
/// matching counts for n = 1..4.
pub fn sign_pattern(n: usize) -> [i8; 4] {
    if n % 2 == 1 {
        [1, 1, 1, -1]
    } else {
        [-1, 1, 1, 1]
    }
}

/// A real number stored as sign and log-magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub sign: f64,
    pub ln_abs: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { sign: 0.0, ln_abs: f64::NEG_INFINITY };
    pub const ONE: LogValue = LogValue { sign: 1.0, ln_abs: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            LogValue::ZERO
        } else {
            LogValue { sign: x.signum(), ln_abs: x.abs().ln() }
        }
    }

    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0.0
    }

    pub fn mul(self, o: LogValue) -> LogValue {
        if self.is_zero() || o.is_zero() {
            LogValue::ZERO
        } else {
            LogValue { sign: self.sign * o.sign, ln_abs: self.ln_abs + o.ln_abs }
        }
    }

    pub fn scale(self, c: f64) -> LogValue {
        self.mul(LogValue::from_f64(c))
    }

    /// `sum_k c_k x_k` without leaving log space.
    pub fn linear_combination(terms: &[(f64, LogValue)]) -> LogValue {
        let top = terms
            .iter()
            .filter(|(c, x)| *c != 0.0 && !x.is_zero())
            .map(|(_, x)| x.ln_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return LogValue::ZERO;
        }
        let s: f64 = terms
            .iter()
            .filter(|(_, x)| !x.is_zero())
            .map(|(c, x)| c * x.sign * (x.ln_abs - top).exp())
            .sum();
        LogValue::from_f64(s).mul(LogValue { sign: 1.0, ln_abs: top })
    }
}

/// Dense skew-symmetric matrix, row-major. Mutators keep `A = -A^T` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    m: usize,
    data: Vec<f64>,
}

impl SkewMatrix {
    pub fn zeros(m: usize) -> Self {
        SkewMatrix { m, data: vec![0.0; m * m] }
    }

    /// Validates skew-symmetry to `1e-12` relative to the largest entry.
    pub fn from_dense(m: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != m * m {
            return Err(Error::InvalidInput(format!("expected {} entries, got {}", m * m, data.len())));
        }
        let scale = data.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(f64::MIN_POSITIVE);
        for i in 0..m {
            for j in i..m {
                if (data[i * m + j] + data[j * m + i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!("matrix not skew-symmetric at ({i},{j})")));
                }
            }
        }
        Ok(SkewMatrix { m, data })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    /// Adds `v` at `(i, j)` and `-v` at `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.m + j] += v;
        self.data[j * self.m + i] -= v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.m + j] = v;
        self.data[j * self.m + i] = -v;
    }

    pub fn principal(&self, keep: &[usize]) -> SkewMatrix {
        let k = keep.len();
        let mut out = SkewMatrix::zeros(k);
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                out.data[a * k + b] = self.get(i, j);
            }
        }
        out
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Determinant by partial-pivot LU, for cross-checks.
    pub fn determinant(&self) -> f64 {
        let m = self.m;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..m {
            let p = (k..m)
                .max_by(|&x, &y| a[x * m + k].abs().total_cmp(&a[y * m + k].abs()))
                .unwrap();
            if a[p * m + k] == 0.0 {
                return 0.0;
            }
            if p != k {
                for c in 0..m {
                    a.swap(k * m + c, p * m + c);
                }
                det = -det;
            }
            let piv = a[k * m + k];
            det *= piv;
            for r in k + 1..m {
                let f = a[r * m + k] / piv;
                if f != 0.0 {
                    for c in k..m {
                        a[r * m + c] -= f * a[k * m + c];
                    }
                }
            }
        }
        det
    }
}

/// Pfaffian of a skew matrix. Odd dimension is an error.
pub fn pfaffian(a: &SkewMatrix) -> Result<f64> {
    if a.size() % 2 == 1 {
        return Err(Error::InvalidInput(format!("Pfaffian of odd dimension {}", a.size())));
    }
    Ok(pfaffian_log(a).value())
}

/// Pfaffian in log form; zero for odd dimension.
///
/// Parlett-Reid elimination: at step k the largest entry of row k beyond
/// the diagonal is pivoted into column k+1, then rows k, k+1 are eliminated
/// from the trailing block by a skew rank-2 update. Only the upper triangle
/// of the working copy is read or written.
pub fn pfaffian_log(a: &SkewMatrix) -> LogValue {
    let m = a.size();
    if m % 2 == 1 {
        return LogValue::ZERO;
    }
    let mut w = a.data.clone();
    let mut acc = LogValue::ONE;
    let mut row1 = vec![0.0; m];
    let mut tau = vec![0.0; m];
    let mut k = 0;
    while k + 1 < m {
        let (mut p, mut best) = (k + 1, 0.0f64);
        for j in k + 1..m {
            let v = w[k * m + j].abs();
            if v > best {
                best = v;
                p = j;
            }
        }
        if best == 0.0 {
            return LogValue::ZERO;
        }
        if p != k + 1 {
            swap_upper(&mut w, m, k, k + 1, p);
            acc.sign = -acc.sign;
        }
        let piv = w[k * m + k + 1];
        acc = acc.mul(LogValue::from_f64(piv));
        for j in k + 2..m {
            row1[j] = w[(k + 1) * m + j];
            tau[j] = w[k * m + j] / piv;
        }
        for i in k + 2..m {
            let (ri, ti) = (row1[i], tau[i]);
            if ri == 0.0 && ti == 0.0 {
                continue;
            }
            let row = &mut w[i * m..(i + 1) * m];
            for j in i + 1..m {
                row[j] += ri * tau[j] - ti * row1[j];
            }
        }
        k += 2;
    }
    acc
}

// Symmetric swap of indices p < q in upper-triangle storage, touching only
// rows and columns >= lo.
fn swap_upper(w: &mut [f64], m: usize, lo: usize, p: usize, q: usize) {
    for r in lo..p {
        w.swap(r * m + p, r * m + q);
    }
    for r in p + 1..q {
        let a = w[p * m + r];
        w[p * m + r] = -w[r * m + q];
        w[r * m + q] = -a;
    }
    for r in q + 1..m {
        w.swap(p * m + r, q * m + r);
    }
    w[p * m + q] = -w[p * m + q];
}

#[derive(Clone, Debug, PartialEq)]
pub struct KasteleynMatrix {
    pub sector: (u8, u8),
    pub matrix: SkewMatrix,
    /// Row of each Fisher vertex, `None` for deleted vertices.
    pub rows: Vec<Option<usize>>,
}

/// Subgraph of the Fisher torus used by conditioning and Kenyon minors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Restriction {
    /// Fisher vertices deleted from the graph.
    pub removed: Vec<usize>,
    /// Honeycomb vertices whose three triangle edges are deleted.
    pub dropped: Vec<usize>,
}

impl Restriction {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.dropped.is_empty()
    }
}

pub fn build_kasteleyn(f: &FisherTorus, theta: u8, tau: u8) -> KasteleynMatrix {
    build_restricted(f, theta, tau, &Restriction::default(), false)
}

fn build_restricted(
    f: &FisherTorus,
    theta: u8,
    tau: u8,
    r: &Restriction,
    unit: bool,
) -> KasteleynMatrix {
    let removed: HashSet<usize> = r.removed.iter().copied().collect();
    let dropped: HashSet<usize> = r.dropped.iter().copied().collect();
    let mut rows = vec![None; f.vertex_count()];
    let mut next = 0;
    for (v, row) in rows.iter_mut().enumerate() {
        if !removed.contains(&v) {
            *row = Some(next);
            next += 1;
        }
    }
    let mut k = SkewMatrix::zeros(next);
    for e in f.edges() {
        if let FisherEdgeKind::Internal { vertex, .. } = e.kind {
            if dropped.contains(&vertex) {
                continue;
            }
        }
        if let (Some(i), Some(j)) = (rows[e.from], rows[e.to]) {
            let w = if unit { 1.0 } else { e.weight };
            k.add(i, j, w * sector_sign(&e, theta, tau));
        }
    }
    KasteleynMatrix { sector: (theta, tau), matrix: k, rows }
}

fn sector_sign(e: &FisherEdge, theta: u8, tau: u8) -> f64 {
    let mut s = 1.0;
    if e.crosses_x && theta == 1 {
        s = -s;
    }
    if e.crosses_y && tau == 1 {
        s = -s;
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult {
    /// Signed matching sum of the normalized graph (all `d = 1`). Equals the
    /// ordinary weighted count; negative only if some weights are negative.
    pub z: f64,
    pub log_z: LogValue,
    pub sector_pfaffians: [LogValue; 4],
    pub sign_pattern: [i8; 4],
    /// `eps`, the overall sign read off at unit weights.
    pub orientation_sign: f64,
    /// `ln |prod d|` over all triangles; the unnormalized sum is `z * prod d`.
    pub log_normalization: f64,
    pub normalization_sign: f64,
}

impl PartitionResult {
    /// Log of the matching sum with the original (unnormalized) weights.
    pub fn log_unnormalized(&self) -> LogValue {
        self.log_z.mul(LogValue { sign: self.normalization_sign, ln_abs: self.log_normalization })
    }
}

fn combine(pfs: &[LogValue; 4], pattern: [i8; 4]) -> LogValue {
    let terms: Vec<(f64, LogValue)> =
        pattern.iter().zip(pfs).map(|(&s, &p)| (0.5 * s as f64, p)).collect();
    LogValue::linear_combination(&terms)
}

fn sector_pfaffians(f: &FisherTorus, r: &Restriction, unit: bool) -> [LogValue; 4] {
    let v: Vec<LogValue> = SECTORS
        .par_iter()
        .map(|&(t, u)| pfaffian_log(&build_restricted(f, t, u, r, unit).matrix))
        .collect();
    [v[0], v[1], v[2], v[3]]
}

/// Signed matching sum of the restricted normalized graph.
pub fn restricted_partition(f: &FisherTorus, r: &Restriction) -> LogValue {
    if (f.vertex_count() - dedup_len(&r.removed)) % 2 == 1 {
        return LogValue::ZERO;
    }
    let pattern = sign_pattern(f.n());
    let reference = combine(&sector_pfaffians(f, r, true), pattern);
    // At unit weights the combination is an integer count.
    if reference.is_zero() || reference.ln_abs < 0.5f64.ln() {
        return LogValue::ZERO;
    }
    combine(&sector_pfaffians(f, r, false), pattern).scale(reference.sign)
}

fn dedup_len(v: &[usize]) -> usize {
    v.iter().collect::<HashSet<_>>().len()
}

/// Dense evaluation of all four sectors.
pub fn partition_function_dense(f: &FisherTorus) -> PartitionResult {
    let pattern = sign_pattern(f.n());
    let none = Restriction::default();
    let pfs = sector_pfaffians(f, &none, false);
    let eps = combine(&sector_pfaffians(f, &none, true), pattern).sign;
    finish(f, pfs, pattern, eps)
}

/// Partition function, using the Fourier block decomposition when the
/// weights are 1x1-periodic and dense elimination otherwise.
pub fn partition_function(f: &FisherTorus) -> PartitionResult {
    match f.cell_weights() {
        Some(cell) if f.n() > 2 => {
            let n = f.n();
            let pattern = sign_pattern(n);
            let sectors = |c| {
                let v: Vec<LogValue> = SECTORS
                    .par_iter()
                    .map(|&(t, u)| fourier_sector_pfaffian(&c, n, t, u))
                    .collect();
                [v[0], v[1], v[2], v[3]]
            };
            let pfs = sectors(cell);
            let eps = combine(&sectors(crate::lattice::CellWeights::uniform(1.0)), pattern).sign;
            finish(f, pfs, pattern, eps)
        }
        _ => partition_function_dense(f),
    }
}

fn finish(f: &FisherTorus, pfs: [LogValue; 4], pattern: [i8; 4], eps: f64) -> PartitionResult {
    let log_z = combine(&pfs, pattern).scale(if eps == 0.0 { 1.0 } else { eps });
    let (log_normalization, normalization_sign) = f.normalization();
    PartitionResult {
        z: log_z.value(),
        log_z,
        sector_pfaffians: pfs,
        sign_pattern: pattern,
        orientation_sign: eps,
        log_normalization,
        normalization_sign,
    }
}

/// Probability that all listed Fisher edges (indices into
/// [`FisherTorus::edges`]) are in the random matching.
pub fn edge_probabilities(f: &FisherTorus, edges: &[usize]) -> Result<f64> {
    let all = f.edges();
    let mut removed = Vec::with_capacity(2 * edges.len());
    let mut weight = 1.0;
    for &e in edges {
        let fe = all
            .get(e)
            .ok_or_else(|| Error::InvalidInput(format!("edge index {e} out of range")))?;
        removed.push(fe.from);
        removed.push(fe.to);
        weight *= fe.weight;
    }
    if dedup_len(&removed) != removed.len() {
        return Err(Error::InvalidInput("edges are not vertex-disjoint".into()));
    }
    if edges.is_empty() {
        return Ok(1.0);
    }
    let z = partition_function_dense(f).log_z;
    let zr = restricted_partition(f, &Restriction { removed, dropped: vec![] });
    Ok(weight * ratio(zr, z))
}

pub(crate) fn ratio(num: LogValue, den: LogValue) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    num.sign * den.sign * (num.ln_abs - den.ln_abs).exp()
}

/// Partition function with some triangles' weights replaced.
pub fn conditioned_partition(
    f: &FisherTorus,
    replacements: &[(usize, crate::lattice::TriangleWeights)],
) -> Result<PartitionResult> {
    let mut w = f.weights().to_vec();
    for &(v, t) in replacements {
        *w.get_mut(v).ok_or_else(|| Error::InvalidInput(format!("vertex {v} out of range")))? = t;
    }
    let g = FisherTorus::new(f.lattice().clone(), w)?;
    Ok(partition_function_dense(&g))
}
