//! Toroidal honeycomb lattice and its Fisher matchgrid.
//!
//! Black vertex `(i, j)` meets white `(i, j)` along its a-edge, white
//! `(i-1, j)` along its b-edge and white `(i, j-1)` along its c-edge, all
//! indices mod n. Vertex index is `2(i n + j) + color`, edge index is
//! `3(i n + j) + type` where `(i, j)` is the black endpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn index(self) -> usize {
        match self {
            Color::Black => 0,
            Color::White => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeType {
    A,
    B,
    C,
}

impl EdgeType {
    pub const ALL: [EdgeType; 3] = [EdgeType::A, EdgeType::B, EdgeType::C];

    pub fn index(self) -> usize {
        match self {
            EdgeType::A => 0,
            EdgeType::B => 1,
            EdgeType::C => 2,
        }
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    /// Bit of this edge in a [`crate::LocalConfig`].
    pub fn bit(self) -> u8 {
        4 >> self.index()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub i: usize,
    pub j: usize,
    pub color: Color,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HoneyEdge {
    pub black: usize,
    pub white: usize,
    pub kind: EdgeType,
    /// Crosses the seam between row n-1 and row 0.
    pub crosses_x: bool,
    /// Crosses the seam between column n-1 and column 0.
    pub crosses_y: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoneyTorus {
    n: usize,
    edges: Vec<HoneyEdge>,
    incidence: Vec<[usize; 3]>,
}

impl HoneyTorus {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("lattice period n must be at least 1".into()));
        }
        let cell = |i: usize, j: usize| i * n + j;
        let mut edges = Vec::with_capacity(3 * n * n);
        let mut incidence = vec![[usize::MAX; 3]; 2 * n * n];
        for i in 0..n {
            for j in 0..n {
                let black = 2 * cell(i, j);
                let whites = [
                    (i, j),
                    ((i + n - 1) % n, j),
                    (i, (j + n - 1) % n),
                ];
                for (t, &(wi, wj)) in whites.iter().enumerate() {
                    let white = 2 * cell(wi, wj) + 1;
                    let e = edges.len();
                    edges.push(HoneyEdge {
                        black,
                        white,
                        kind: EdgeType::from_index(t),
                        crosses_x: t == 1 && i == 0,
                        crosses_y: t == 2 && j == 0,
                    });
                    incidence[black][t] = e;
                    incidence[white][t] = e;
                }
            }
        }
        debug_assert!(incidence.iter().flatten().all(|&e| e != usize::MAX));
        Ok(HoneyTorus { n, edges, incidence })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.n * self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, v: Vertex) -> usize {
        2 * (v.i * self.n + v.j) + v.color.index()
    }

    pub fn vertex(&self, idx: usize) -> Vertex {
        let c = idx / 2;
        Vertex {
            i: c / self.n,
            j: c % self.n,
            color: if idx % 2 == 0 { Color::Black } else { Color::White },
        }
    }

    pub fn black(&self, i: usize, j: usize) -> usize {
        2 * ((i % self.n) * self.n + j % self.n)
    }

    pub fn white(&self, i: usize, j: usize) -> usize {
        self.black(i, j) + 1
    }

    pub fn edges(&self) -> &[HoneyEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &HoneyEdge {
        &self.edges[e]
    }

    pub fn edge_index(&self, i: usize, j: usize, kind: EdgeType) -> usize {
        3 * ((i % self.n) * self.n + j % self.n) + kind.index()
    }

    /// Incident edges of a vertex, indexed by edge type.
    pub fn incident(&self, v: usize) -> [usize; 3] {
        self.incidence[v]
    }

    /// The vertex across edge `e` from `v`.
    pub fn across(&self, v: usize, e: usize) -> usize {
        let e = &self.edges[e];
        if e.black == v {
            e.white
        } else {
            e.black
        }
    }
}

/// Triangle gadget weights: `a`, `b`, `c` sit on the triangle edge opposite
/// the external vertex of that type, `d` is the `111` entry of the gadget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleWeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TriangleWeights {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        TriangleWeights { a, b, c, d }
    }

    pub fn normalized(&self) -> [f64; 3] {
        [self.a / self.d, self.b / self.d, self.c / self.d]
    }

    pub fn get(&self, t: EdgeType) -> f64 {
        match t {
            EdgeType::A => self.a,
            EdgeType::B => self.b,
            EdgeType::C => self.c,
        }
    }
}

/// Normalized triangle weights of a 1x1-periodic matchgrid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellWeights {
    pub black: [f64; 3],
    pub white: [f64; 3],
}

impl CellWeights {
    pub fn uniform(t: f64) -> Self {
        CellWeights { black: [t; 3], white: [t; 3] }
    }

    /// Edge-weight products `(a1 a2, b1 b2, c1 c2)`.
    pub fn products(&self) -> [f64; 3] {
        [
            self.black[0] * self.white[0],
            self.black[1] * self.white[1],
            self.black[2] * self.white[2],
        ]
    }
}

/// One oriented edge of the 1x1 Fisher cell: `from` in cell `(x, y)` to
/// `to` in cell `(x + dx, y + dy)`. Local labels are `3 color + type`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemplateEdge {
    pub from: usize,
    pub to: usize,
    pub dx: usize,
    pub dy: usize,
    pub weight: f64,
}

/// The nine oriented edges of a Fisher cell: three per triangle, then the
/// a, b, c connecting edges running white to black.
pub fn cell_template(black: [f64; 3], white: [f64; 3]) -> [TemplateEdge; 9] {
    let e = |from, to, dx, dy, weight| TemplateEdge { from, to, dx, dy, weight };
    [
        e(0, 1, 0, 0, black[2]),
        e(2, 0, 0, 0, black[1]),
        e(1, 2, 0, 0, black[0]),
        e(3, 4, 0, 0, white[2]),
        e(5, 3, 0, 0, white[1]),
        e(4, 5, 0, 0, white[0]),
        e(3, 0, 0, 0, 1.0),
        e(4, 1, 1, 0, 1.0),
        e(5, 2, 0, 1, 1.0),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FisherEdgeKind {
    /// Triangle edge of honeycomb vertex `vertex`, opposite its `opposite` corner.
    Internal { vertex: usize, opposite: EdgeType },
    /// Weight-one edge standing in for honeycomb edge `edge`.
    Connecting { edge: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FisherEdge {
    pub from: usize,
    pub to: usize,
    /// Normalized weight (triangle weights divided by `d`).
    pub weight: f64,
    pub kind: FisherEdgeKind,
    pub crosses_x: bool,
    pub crosses_y: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FisherTorus {
    lattice: HoneyTorus,
    weights: Vec<TriangleWeights>,
}

impl FisherTorus {
    pub fn new(lattice: HoneyTorus, weights: Vec<TriangleWeights>) -> Result<Self> {
        if weights.len() != lattice.vertex_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} triangles, got {}",
                lattice.vertex_count(),
                weights.len()
            )));
        }
        for (v, w) in weights.iter().enumerate() {
            if ![w.a, w.b, w.c, w.d].iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite weight at vertex {v}")));
            }
            if w.d == 0.0 {
                return Err(Error::DegenerateGadget { vertex: v });
            }
        }
        Ok(FisherTorus { lattice, weights })
    }

    pub fn uniform(n: usize, black: TriangleWeights, white: TriangleWeights) -> Result<Self> {
        let lattice = HoneyTorus::new(n)?;
        let weights = (0..lattice.vertex_count())
            .map(|v| if v % 2 == 0 { black } else { white })
            .collect();
        FisherTorus::new(lattice, weights)
    }

    pub fn from_cell(n: usize, cell: CellWeights) -> Result<Self> {
        let t = |w: [f64; 3]| TriangleWeights::new(w[0], w[1], w[2], 1.0);
        FisherTorus::uniform(n, t(cell.black), t(cell.white))
    }

    pub fn lattice(&self) -> &HoneyTorus {
        &self.lattice
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    pub fn weights(&self) -> &[TriangleWeights] {
        &self.weights
    }

    pub fn triangle(&self, v: usize) -> TriangleWeights {
        self.weights[v]
    }

    pub fn vertex_count(&self) -> usize {
        3 * self.lattice.vertex_count()
    }

    /// Fisher vertex on the `t` side of honeycomb vertex `v`.
    pub fn fisher_vertex(&self, v: usize, t: EdgeType) -> usize {
        3 * v + t.index()
    }

    /// All Fisher edges with normalized weights: per honeycomb vertex its three
    /// triangle edges, then one connecting edge per honeycomb edge.
    pub fn edges(&self) -> Vec<FisherEdge> {
        let mut out = Vec::with_capacity(6 * self.lattice.vertex_count());
        for v in 0..self.lattice.vertex_count() {
            let w = self.weights[v].normalized();
            let u = |k: usize| 3 * v + k;
            for (from, to, opp) in [(0, 1, EdgeType::C), (2, 0, EdgeType::B), (1, 2, EdgeType::A)] {
                out.push(FisherEdge {
                    from: u(from),
                    to: u(to),
                    weight: w[opp.index()],
                    kind: FisherEdgeKind::Internal { vertex: v, opposite: opp },
                    crosses_x: false,
                    crosses_y: false,
                });
            }
        }
        for (e, he) in self.lattice.edges().iter().enumerate() {
            let t = he.kind.index();
            out.push(FisherEdge {
                from: 3 * he.white + t,
                to: 3 * he.black + t,
                weight: 1.0,
                kind: FisherEdgeKind::Connecting { edge: e },
                crosses_x: he.crosses_x,
                crosses_y: he.crosses_y,
            });
        }
        out
    }

    /// `(sum of ln|d|, sign of the product of d)`.
    pub fn normalization(&self) -> (f64, f64) {
        self.weights.iter().fold((0.0, 1.0), |(l, s), w| (l + w.d.abs().ln(), s * w.d.signum()))
    }

    /// Same graph with every `d` set to one.
    pub fn normalized(&self) -> FisherTorus {
        let weights = self
            .weights
            .iter()
            .map(|w| {
                let [a, b, c] = w.normalized();
                TriangleWeights::new(a, b, c, 1.0)
            })
            .collect();
        FisherTorus { lattice: self.lattice.clone(), weights }
    }

    /// Normalized cell weights when every black triangle agrees and every
    /// white triangle agrees.
    pub fn cell_weights(&self) -> Option<CellWeights> {
        let b = self.weights[0].normalized();
        let w = self.weights[1].normalized();
        let same = self.weights.iter().enumerate().all(|(v, t)| {
            let r = if v % 2 == 0 { b } else { w };
            t.normalized() == r
        });
        same.then_some(CellWeights { black: b, white: w })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn zero_period_rejected() {
        assert!(matches!(HoneyTorus::new(0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn one_by_one_has_two_vertices_sharing_all_edges() {
        let h = HoneyTorus::new(1).unwrap();
        assert_eq!(h.vertex_count(), 2);
        assert_eq!(h.edge_count(), 3);
        assert_eq!(h.incident(0), [0, 1, 2]);
        assert_eq!(h.incident(1), [0, 1, 2]);
    }

    #[test]
    fn counts_and_degrees() {
        for n in 1..6 {
            let h = HoneyTorus::new(n).unwrap();
            assert_eq!(h.vertex_count(), 2 * n * n);
            assert_eq!(h.edge_count(), 3 * n * n);
            for v in 0..h.vertex_count() {
                let inc = h.incident(v);
                for (t, &e) in inc.iter().enumerate() {
                    let edge = h.edge(e);
                    assert_eq!(edge.kind.index(), t);
                    assert!(edge.black == v || edge.white == v);
                    assert_eq!(edge.black % 2, 0);
                    assert_eq!(edge.white % 2, 1);
                }
            }
        }
    }

    #[test]
    fn three_by_three_adjacency() {
        let h = HoneyTorus::new(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let b = h.black(i, j);
                let inc = h.incident(b);
                assert_eq!(h.edge(inc[0]).white, h.white(i, j));
                assert_eq!(h.edge(inc[1]).white, h.white(i + 2, j));
                assert_eq!(h.edge(inc[2]).white, h.white(i, j + 2));
            }
        }
    }

    #[test]
    fn fisher_degrees_and_connections() {
        let t = TriangleWeights::new(0.3, 0.5, 0.7, 1.0);
        for n in 1..4 {
            let f = FisherTorus::uniform(n, t, t).unwrap();
            let edges = f.edges();
            assert_eq!(edges.len(), 9 * n * n);
            let mut deg = vec![0; f.vertex_count()];
            for e in &edges {
                deg[e.from] += 1;
                deg[e.to] += 1;
                if let FisherEdgeKind::Connecting { .. } = e.kind {
                    assert_ne!(e.from / 3, e.to / 3);
                }
            }
            assert!(deg.iter().all(|&d| d == 3));
            let crossing: HashSet<_> = edges
                .iter()
                .filter(|e| e.crosses_x || e.crosses_y)
                .map(|e| (e.from, e.to))
                .collect();
            assert_eq!(crossing.len(), 2 * n);
        }
    }

    #[test]
    fn degenerate_gadget_rejected() {
        let ok = TriangleWeights::new(1.0, 1.0, 1.0, 1.0);
        let bad = TriangleWeights::new(1.0, 1.0, 1.0, 0.0);
        let r = FisherTorus::uniform(2, ok, bad);
        assert!(matches!(r, Err(Error::DegenerateGadget { vertex: 1 })));
    }

    #[test]
    fn construction_is_deterministic() {
        let t = TriangleWeights::new(0.3, 0.5, 0.7, 2.0);
        let a = FisherTorus::uniform(3, t, t).unwrap().edges();
        let b = FisherTorus::uniform(3, t, t).unwrap().edges();
        assert_eq!(a, b);
    }
}
