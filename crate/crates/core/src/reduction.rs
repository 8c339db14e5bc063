//! Holographic reduction of vertex models to dimers on the Fisher torus.
//!
//! A black vertex gets the matchgate `(T_a (x) T_b (x) T_c) r` and a white
//! vertex `(T_a (x) T_b (x) T_c)^{-T} r`, so the two tensors cancel across
//! every edge and the matching sum of the resulting matchgrid equals the
//! vertex-model partition function.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CellWeights, Color, FisherTorus, HoneyTorus, TriangleWeights};
use crate::model::VertexModel;
use crate::oracle::enumerate_matchings;
use crate::signatures::{mat_vec, vertex_transform, BaseChange, Mat8, VertexSignature, EVEN_ENTRIES, ODD_ENTRIES};

/// Relative tolerance for entries that parity forces to zero.
pub const PARITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatchgateSignature(pub [f64; 8]);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl MatchgateSignature {
    fn part_max(&self, idx: [usize; 4]) -> f64 {
        idx.iter().fold(0.0f64, |m, &i| m.max(self.0[i].abs()))
    }

    /// Parity, or the relative size of the smaller half when neither half vanishes.
    pub fn parity(&self) -> std::result::Result<Parity, f64> {
        let (odd, even) = (self.part_max(ODD_ENTRIES), self.part_max(EVEN_ENTRIES));
        let big = odd.max(even);
        if big == 0.0 {
            return Err(1.0);
        }
        if even <= PARITY_TOL * big {
            Ok(Parity::Odd)
        } else if odd <= PARITY_TOL * big {
            Ok(Parity::Even)
        } else {
            Err(odd.min(even) / big)
        }
    }
}

pub fn apply_base_change(
    r: &VertexSignature,
    bases: &[BaseChange; 3],
    color: Color,
) -> Result<MatchgateSignature> {
    for t in bases {
        BaseChange::from_matrix(t.matrix())?;
    }
    Ok(MatchgateSignature(mat_vec(&vertex_transform(bases, color), &r.0)))
}

/// Triangle weights `(m(100), m(010), m(001), m(111))` of an odd matchgate.
pub fn fisher_weights(m: &MatchgateSignature) -> Result<TriangleWeights> {
    match m.parity() {
        Ok(Parity::Odd) => Ok(TriangleWeights::new(m.0[4], m.0[2], m.0[1], m.0[7])),
        Ok(Parity::Even) => Err(Error::NotAMatchgate { residual: 1.0 }),
        Err(residual) => Err(Error::NotAMatchgate { residual }),
    }
}

/// A planar local graph whose first vertices, in order, are external.
#[derive(Clone, Debug, PartialEq)]
pub struct Gadget {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub external: Vec<usize>,
}

impl Gadget {
    /// Triangle on the three external vertices, each edge weighted by the
    /// letter of the opposite corner.
    pub fn triangle(a: f64, b: f64, c: f64) -> Self {
        Gadget { vertex_count: 3, edges: vec![(1, 2, a), (0, 2, b), (0, 1, c)], external: vec![0, 1, 2] }
    }
}

/// Entry at subset `X0` (digit 1 = removed, first external vertex first) is
/// the matching sum of the gadget without `X0`.
pub fn matchgate_signature_of_gadget(g: &Gadget) -> Result<Vec<f64>> {
    let k = g.external.len();
    let mut out = vec![0.0; 1 << k];
    for (mask, o) in out.iter_mut().enumerate() {
        let removed: Vec<usize> =
            (0..k).filter(|&d| mask >> (k - 1 - d) & 1 == 1).map(|d| g.external[d]).collect();
        let mut index = vec![usize::MAX; g.vertex_count];
        let mut next = 0;
        for (v, slot) in index.iter_mut().enumerate() {
            if !removed.contains(&v) {
                *slot = next;
                next += 1;
            }
        }
        let edges: Vec<_> = g
            .edges
            .iter()
            .filter(|(u, v, _)| index[*u] != usize::MAX && index[*v] != usize::MAX)
            .map(|&(u, v, w)| (index[u], index[v], w))
            .collect();
        *o = enumerate_matchings(next, &edges)?;
    }
    Ok(out)
}

/// Base changes of the a, b, c edge classes of a 1x1-periodic model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeBases(pub [BaseChange; 3]);

impl EdgeBases {
    pub fn rotations(angles: [f64; 3]) -> Self {
        EdgeBases(angles.map(BaseChange::rotation))
    }

    /// Row ratios `[[a01, a11], [a02, a12], [a03, a13]]`.
    pub fn ratios(&self) -> [[f64; 2]; 3] {
        self.0.map(|t| t.ratios())
    }

    /// One copy per edge of the lattice.
    pub fn expand(&self, lattice: &HoneyTorus) -> Vec<BaseChange> {
        lattice.edges().iter().map(|e| self.0[e.kind.index()]).collect()
    }
}

fn quadratic_roots(q: [f64; 3]) -> Result<[f64; 2]> {
    let scale = q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if q[0].abs() <= 1e-13 * scale {
        return Err(Error::DegenerateQuadratic);
    }
    let disc = q[1] * q[1] - 4.0 * q[0] * q[2];
    if disc < -1e-12 * q[1].abs().max(scale).powi(2) {
        return Err(Error::Infeasible("base-change quadratic has complex roots".into()));
    }
    let s = disc.max(0.0).sqrt();
    // stable form
    let t = -0.5 * (q[1] + q[1].signum().max(0.0).mul_add(2.0, -1.0) * s);
    let (r1, r2) = if t != 0.0 { (t / q[0], q[2] / t) } else { (0.0, 0.0) };
    Ok([r1, r2])
}

/// Solves for real base changes realizing a 1x1-periodic model with white
/// signature `x` and black signature `y`. The row ratios of `T_c` are the
/// roots of one quadratic, those of `T_b` of another; `T_a` follows from
/// the `000` entries. All four root assignments are tried and the one with
/// positive `a02`, `a03` is preferred.
pub fn solve_base_change_1x1(x: &VertexSignature, y: &VertexSignature) -> Result<EdgeBases> {
    x.validate()?;
    y.validate()?;
    let [x1, x2, x3, x4, x5, x6, x7, x8] = x.0;
    let [y1, y2, y3, y4, y5, y6, y7, y8] = y.0;
    let q3 = [
        x6 * y5 + y7 * x8 + y1 * x2 + y3 * x4,
        -y7 * x7 - y3 * x3 + y2 * x2 + y4 * x4 + x6 * y6 - x5 * y5 + y8 * x8 - y1 * x1,
        -(y6 * x5 + x3 * y4 + y2 * x1 + x7 * y8),
    ];
    let q2 = [
        x3 * y1 + y6 * x8 + y2 * x4 + y5 * x7,
        y8 * x8 - x6 * y6 - x5 * y5 + y7 * x7 - y2 * x2 + y3 * x3 + y4 * x4 - y1 * x1,
        -(y8 * x6 + y7 * x5 + x1 * y3 + y4 * x2),
    ];
    let r3 = quadratic_roots(q3)?;
    let r2 = quadratic_roots(q2)?;
    let mut found: Vec<(bool, EdgeBases)> = Vec::new();
    for (i3, &a03) in r3.iter().enumerate() {
        for (i2, &a02) in r2.iter().enumerate() {
            let (a13, a12) = (r3[1 - i3], r2[1 - i2]);
            let den = a02 * a03 * y1 + a02 * y2 + a03 * y3 + y4;
            let a01 = -(a02 * a03 * y5 + a02 * y6 + a03 * y7 + y8) / den;
            let s = [a12 * a13, a12, a13, 1.0];
            let num = s[0] * x4 - s[1] * x3 - s[2] * x2 + s[3] * x1;
            let dd = s[0] * x8 - s[1] * x7 - s[2] * x6 + s[3] * x5;
            let a11 = num / dd;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mk = |a0: f64, a1: f64| BaseChange::from_matrix([[a0 * h, h], [a1 * h, h]]);
            let (Ok(ta), Ok(tb), Ok(tc)) = (mk(a01, a11), mk(a02, a12), mk(a03, a13)) else {
                continue;
            };
            if ![a01, a11].iter().all(|v| v.is_finite()) {
                continue;
            }
            let bases = EdgeBases([ta, tb, tc]);
            let odd = |sig: &VertexSignature, c| {
                apply_base_change(sig, &bases.0, c).map(|m| m.parity() == Ok(Parity::Odd)).unwrap_or(false)
            };
            if odd(y, Color::Black) && odd(x, Color::White) {
                found.push((a02 > 0.0 && a03 > 0.0, bases));
            }
        }
    }
    found.sort_by_key(|(pos, _)| !pos);
    found
        .into_iter()
        .next()
        .map(|(_, b)| b)
        .ok_or_else(|| Error::Infeasible("no root assignment satisfies the parity constraints".into()))
}

/// A reduced 1x1-periodic model.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedCell {
    pub black: VertexSignature,
    pub white: VertexSignature,
    pub bases: EdgeBases,
    pub black_gate: MatchgateSignature,
    pub white_gate: MatchgateSignature,
    pub black_triangle: TriangleWeights,
    pub white_triangle: TriangleWeights,
}

impl ReducedCell {
    pub fn new(black: VertexSignature, white: VertexSignature, bases: EdgeBases) -> Result<Self> {
        let black_gate = apply_base_change(&black, &bases.0, Color::Black)?;
        let white_gate = apply_base_change(&white, &bases.0, Color::White)?;
        let tri = |g: &MatchgateSignature, v| match fisher_weights(g) {
            Err(Error::NotAMatchgate { residual }) => Err(Error::NotRealizable { vertex: v, residual }),
            other => other,
        };
        let black_triangle = tri(&black_gate, 0)?;
        let white_triangle = tri(&white_gate, 1)?;
        for (v, t) in [(0, black_triangle), (1, white_triangle)] {
            if t.d == 0.0 {
                return Err(Error::DegenerateGadget { vertex: v });
            }
        }
        Ok(ReducedCell { black, white, bases, black_gate, white_gate, black_triangle, white_triangle })
    }

    /// Bases from the closed-form solver.
    pub fn solve(black: VertexSignature, white: VertexSignature) -> Result<Self> {
        let bases = solve_base_change_1x1(&white, &black)?;
        ReducedCell::new(black, white, bases)
    }

    /// Rotation bases from the orthogonal criterion at the black vertex.
    /// Shifting two of the three angles by `pi/2` keeps both gadgets odd;
    /// the shift with the largest `|d_black d_white|` is used.
    pub fn orthogonal(black: VertexSignature, white: VertexSignature, tol: f64) -> Result<Self> {
        let c = crate::signatures::check_orthogonal(&black, tol)?;
        if !c.realizable {
            return Err(Error::Infeasible(format!(
                "black signature is not orthogonally realizable (residual {:.3e})",
                c.residual
            )));
        }
        let mut best: Option<(f64, ReducedCell)> = None;
        for shift in [[0, 0, 0], [1, 1, 0], [1, 0, 1], [0, 1, 1]] {
            let angles = std::array::from_fn(|k| c.edge_angles[k] + shift[k] as f64 * std::f64::consts::FRAC_PI_2);
            let Ok(cell) = ReducedCell::new(black, white, EdgeBases::rotations(angles)) else {
                continue;
            };
            let d = (cell.black_triangle.d * cell.white_triangle.d).abs();
            if best.as_ref().is_none_or(|(b, _)| d > *b * (1.0 + 1e-12)) {
                best = Some((d, cell));
            }
        }
        best.map(|(_, c)| c).ok_or_else(|| Error::Infeasible("white signature is not odd under the black rotations".into()))
    }

    pub fn cell_weights(&self) -> CellWeights {
        CellWeights { black: self.black_triangle.normalized(), white: self.white_triangle.normalized() }
    }

    /// `(a1 a2, b1 b2, c1 c2)` of the normalized triangles.
    pub fn products(&self) -> [f64; 3] {
        self.cell_weights().products()
    }

    /// Unnormalized products `(a, b, c, d)`.
    pub fn raw_products(&self) -> [f64; 4] {
        let (b, w) = (self.black_triangle, self.white_triangle);
        [b.a * w.a, b.b * w.b, b.c * w.c, b.d * w.d]
    }

    pub fn transform(&self, color: Color) -> Mat8 {
        vertex_transform(&self.bases.0, color)
    }

    pub fn signature(&self, color: Color) -> &VertexSignature {
        match color {
            Color::Black => &self.black,
            Color::White => &self.white,
        }
    }

    pub fn triangle(&self, color: Color) -> TriangleWeights {
        match color {
            Color::Black => self.black_triangle,
            Color::White => self.white_triangle,
        }
    }

    pub fn fisher(&self, n: usize) -> Result<FisherTorus> {
        FisherTorus::uniform(n, self.black_triangle, self.white_triangle)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub fisher: FisherTorus,
    pub gates: Vec<MatchgateSignature>,
    /// Bases actually used, after any row swaps.
    pub bases: Vec<BaseChange>,
    /// Edges whose base rows were swapped to make every gadget odd.
    pub swapped: Vec<usize>,
}

impl Reduction {
    /// `ln |prod d|`; the vertex-model partition function is
    /// `Z(normalized) * prod d`.
    pub fn log_scale(&self) -> (f64, f64) {
        self.fisher.normalization()
    }
}

/// Per-edge bases, one per lattice edge.
pub fn reduce_model(model: &VertexModel, bases: &[BaseChange]) -> Result<Reduction> {
    let h = model.lattice();
    if bases.len() != h.edge_count() {
        return Err(Error::InvalidInput(format!("expected {} bases, got {}", h.edge_count(), bases.len())));
    }
    for t in bases {
        BaseChange::from_matrix(t.matrix())?;
    }
    let gates_for = |bases: &[BaseChange]| -> Vec<MatchgateSignature> {
        (0..h.vertex_count())
            .map(|v| {
                let inc = h.incident(v);
                let tv = [bases[inc[0]], bases[inc[1]], bases[inc[2]]];
                MatchgateSignature(mat_vec(&vertex_transform(&tv, h.vertex(v).color), &model.signature(v).0))
            })
            .collect()
    };
    let mut bases = bases.to_vec();
    let mut gates = gates_for(&bases);
    let mut even = Vec::new();
    let mut worst: Option<(usize, f64)> = None;
    for (v, g) in gates.iter().enumerate() {
        match g.parity() {
            Ok(Parity::Odd) => {}
            Ok(Parity::Even) => even.push(v),
            Err(r) => {
                if worst.is_none_or(|(_, w)| r > w) {
                    worst = Some((v, r));
                }
            }
        }
    }
    if let Some((vertex, residual)) = worst {
        return Err(Error::NotRealizable { vertex, residual });
    }
    let mut swapped = Vec::new();
    if !even.is_empty() {
        if even.len() % 2 == 1 {
            return Err(Error::Infeasible(format!("{} even gadgets cannot be paired", even.len())));
        }
        let mut flip = vec![false; h.edge_count()];
        for pair in even.chunks(2) {
            for e in lattice_path(h, pair[0], pair[1]) {
                flip[e] = !flip[e];
            }
        }
        for (e, f) in flip.iter().enumerate() {
            if *f {
                bases[e] = bases[e].swap_rows();
                swapped.push(e);
            }
        }
        gates = gates_for(&bases);
    }
    let weights = gates
        .iter()
        .enumerate()
        .map(|(v, g)| {
            fisher_weights(g).map_err(|e| match e {
                Error::NotAMatchgate { residual } => Error::NotRealizable { vertex: v, residual },
                e => e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fisher = FisherTorus::new(h.clone(), weights)?;
    Ok(Reduction { fisher, gates, bases, swapped })
}

/// Edges of a shortest path between two lattice vertices.
pub fn lattice_path(h: &HoneyTorus, from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![None; h.vertex_count()];
    let mut seen = vec![false; h.vertex_count()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for e in h.incident(v) {
            let w = h.across(v, e);
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some((v, e));
                queue.push_back(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = to;
    while let Some((p, e)) = prev[v] {
        path.push(e);
        v = p;
    }
    path
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeCheck {
    pub equivalent: bool,
    /// Largest violation of `w2 = g(u) g(v) w1` in log magnitude.
    pub residual: f64,
    /// One multiplier per Fisher vertex when equivalent.
    pub multipliers: Option<Vec<f64>>,
}

/// Whether `f2` is obtained from `f1` by multiplying all edges at each
/// Fisher vertex by a common nonzero factor.
pub fn check_gauge_equivalent(f1: &FisherTorus, f2: &FisherTorus, tol: f64) -> Result<GaugeCheck> {
    if f1.lattice() != f2.lattice() {
        return Err(Error::InvalidInput("models live on different graphs".into()));
    }
    let (e1, e2) = (f1.edges(), f2.edges());
    let nv = f1.vertex_count();
    let fail = |residual| Ok(GaugeCheck { equivalent: false, residual, multipliers: None });
    let mut rows = Vec::new();
    for (a, b) in e1.iter().zip(&e2) {
        match (a.weight == 0.0, b.weight == 0.0) {
            (true, true) => {}
            (false, false) => rows.push((a.from, a.to, b.weight / a.weight)),
            _ => return fail(f64::INFINITY),
        }
    }
    // signs: sigma(u) sigma(v) = sign(ratio), by propagation
    let mut adj = vec![Vec::new(); nv];
    for &(u, v, r) in &rows {
        let neg = r < 0.0;
        adj[u].push((v, neg));
        adj[v].push((u, neg));
    }
    let mut sigma: Vec<Option<bool>> = vec![None; nv];
    for s in 0..nv {
        if sigma[s].is_some() {
            continue;
        }
        sigma[s] = Some(false);
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            let su = sigma[u].unwrap();
            for &(v, neg) in &adj[u] {
                match sigma[v] {
                    None => {
                        sigma[v] = Some(su ^ neg);
                        stack.push(v);
                    }
                    Some(sv) if sv != su ^ neg => return fail(f64::INFINITY),
                    _ => {}
                }
            }
        }
    }
    let mut a = DMatrix::zeros(rows.len(), nv);
    let mut b = DVector::zeros(rows.len());
    for (k, &(u, v, r)) in rows.iter().enumerate() {
        a[(k, u)] += 1.0;
        a[(k, v)] += 1.0;
        b[k] = r.abs().ln();
    }
    let svd = a.clone().svd(true, true);
    let phi = svd.solve(&b, 1e-12).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let residual = (&a * &phi - &b).amax();
    if residual > tol {
        return fail(residual);
    }
    let multipliers =
        (0..nv).map(|u| if sigma[u] == Some(true) { -phi[u].exp() } else { phi[u].exp() }).collect();
    Ok(GaugeCheck { equivalent: true, residual, multipliers: Some(multipliers) })
}
