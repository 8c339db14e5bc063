//! Vertex signatures, base changes and the realizability criteria.

mod general;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::config::LocalConfig;
use crate::error::{Error, Result};
use crate::lattice::{Color, HoneyTorus};

pub use general::{general_polynomial, general_terms};

pub const ODD_ENTRIES: [usize; 4] = [1, 2, 4, 7];
pub const EVEN_ENTRIES: [usize; 4] = [0, 3, 5, 6];

/// Eight weights indexed by local configuration `000..111`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSignature(pub [f64; 8]);

impl VertexSignature {
    pub fn new(w: [f64; 8]) -> Self {
        VertexSignature(w)
    }

    /// The 1-2 model signature `(0, c, b, a, a, b, c, 0)`.
    pub fn one_two(a: f64, b: f64, c: f64) -> Self {
        VertexSignature([0.0, c, b, a, a, b, c, 0.0])
    }

    pub fn get(&self, c: LocalConfig) -> f64 {
        self.0[c.index()]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        VertexSignature(self.0.map(|x| x * s))
    }

    /// `entry(s) == entry(complement of s)`.
    pub fn is_palindromic(&self, tol: f64) -> bool {
        (0..4).all(|i| (self.0[i] - self.0[7 - i]).abs() <= tol * self.max_abs().max(1e-300))
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidInput("signature has non-finite entries".into()))
        }
    }
}

/// Invertible 2x2 matrix `[[n0, p0], [n1, p1]]` with columns `n` and `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseChange {
    pub n: [f64; 2],
    pub p: [f64; 2],
}

pub type Mat2 = [[f64; 2]; 2];
pub type Mat8 = [[f64; 8]; 8];

impl BaseChange {
    pub fn from_matrix(m: Mat2) -> Result<Self> {
        let t = BaseChange { n: [m[0][0], m[1][0]], p: [m[0][1], m[1][1]] };
        let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
        if !(t.det().abs() > 1e-14 * scale * scale) {
            return Err(Error::InvalidBase(format!("determinant {} vanishes", t.det())));
        }
        Ok(t)
    }

    pub fn identity() -> Self {
        BaseChange { n: [1.0, 0.0], p: [0.0, 1.0] }
    }

    /// `[[cos a, sin a], [-sin a, cos a]]`.
    pub fn rotation(alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        BaseChange { n: [c, -s], p: [s, c] }
    }

    pub fn matrix(&self) -> Mat2 {
        [[self.n[0], self.p[0]], [self.n[1], self.p[1]]]
    }

    pub fn det(&self) -> f64 {
        self.n[0] * self.p[1] - self.n[1] * self.p[0]
    }

    pub fn inverse_transpose(&self) -> BaseChange {
        let d = self.det();
        BaseChange { n: [self.p[1] / d, -self.p[0] / d], p: [-self.n[1] / d, self.n[0] / d] }
    }

    /// Exchange the two rows. Flips the parity of both endpoint matchgates.
    pub fn swap_rows(&self) -> BaseChange {
        BaseChange { n: [self.n[1], self.n[0]], p: [self.p[1], self.p[0]] }
    }

    /// Row ratios `(n0 / p0, n1 / p1)`.
    pub fn ratios(&self) -> [f64; 2] {
        [self.n[0] / self.p[0], self.n[1] / self.p[1]]
    }
}

pub fn kron3(a: &Mat2, b: &Mat2, c: &Mat2) -> Mat8 {
    let mut out = [[0.0; 8]; 8];
    for (r, row) in out.iter_mut().enumerate() {
        for (s, x) in row.iter_mut().enumerate() {
            *x = a[r >> 2][s >> 2] * b[(r >> 1) & 1][(s >> 1) & 1] * c[r & 1][s & 1];
        }
    }
    out
}

pub fn mat_vec(m: &Mat8, v: &[f64; 8]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

/// The tensor applied at a vertex of the given color: `T_a (x) T_b (x) T_c`
/// at a black vertex and its inverse transpose at a white one.
pub fn vertex_transform(bases: &[BaseChange; 3], color: Color) -> Mat8 {
    let pick = |t: &BaseChange| match color {
        Color::Black => t.matrix(),
        Color::White => t.inverse_transpose().matrix(),
    };
    kron3(&pick(&bases[0]), &pick(&bases[1]), &pick(&bases[2]))
}

/// Signature turned into `gate` by the rotations `U(a_k)` on its edges, at
/// either color since rotations are their own inverse transpose.
pub fn realize_with_rotations(angles: [f64; 3], gate: [f64; 8]) -> VertexSignature {
    let [a, b, c] = angles.map(|x| BaseChange::rotation(-x).matrix());
    VertexSignature(mat_vec(&kron3(&a, &b, &c), &gate))
}

/// `(x4+x6+x7-x1, x3+x5+x8-x2, ..., x2+x3+x5-x8)`, 1-based as in the
/// usual listing.
pub fn z_vector(r: &VertexSignature) -> [f64; 8] {
    let [x1, x2, x3, x4, x5, x6, x7, x8] = r.0;
    [
        x4 + x6 + x7 - x1,
        x3 + x5 + x8 - x2,
        x2 + x5 + x8 - x3,
        x1 + x6 + x7 - x4,
        x2 + x3 + x8 - x5,
        x1 + x4 + x7 - x6,
        x1 + x4 + x6 - x7,
        x2 + x3 + x5 - x8,
    ]
}

type C64 = Complex<f64>;

// Pairs entering tt(-z7/z2, -z6/z3, -z4/z5, -z1/z8), 0-based (real, imag).
const PAIRS: [(usize, usize); 4] = [(1, 6), (2, 5), (4, 3), (7, 0)];

fn pair_factors(z: &[f64; 8], scale: f64, vertex: Option<usize>) -> Result<[C64; 4]> {
    let mut out = [C64::new(0.0, 0.0); 4];
    for (k, &(re, im)) in PAIRS.iter().enumerate() {
        if z[re].abs() <= 1e-14 * scale && z[im].abs() <= 1e-14 * scale {
            return Err(Error::IndeterminateRatio { pair: (re + 1, im + 1), vertex });
        }
        out[k] = C64::new(z[re], -z[im]);
    }
    Ok(out)
}

/// Quantities of the orthogonal-realizability system: `P = Q = R = K = 0`
/// when the rotations kill the even part, and `h` predicts the odd entries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalData {
    pub z: [f64; 8],
    pub g: [f64; 8],
    pub j: [f64; 8],
    pub frame_angles: [f64; 3],
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub k: f64,
    pub h_big: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    /// `(h2, h3, h5, h8)` from `4 h2 = H + L - M + N` and its siblings.
    pub h: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalCheck {
    pub realizable: bool,
    /// `Im prod / |prod|` of the tt product.
    pub residual: f64,
    /// `(phi, psi, gamma)` with `sin phi = z4 / |(z4, z5)|` etc.
    pub angles: [f64; 3],
    /// Rotation angles for the a, b, c edges.
    pub edge_angles: [f64; 3],
    /// The fourth sine condition also holds, so the rotated gadget has
    /// nonnegative weights.
    pub positively: bool,
    pub data: OrthogonalData,
}

/// Rotation angles of the a, b, c edges from `(phi, psi, gamma)`.
pub fn edge_rotation_angles(angles: [f64; 3]) -> [f64; 3] {
    let [phi, psi, gam] = angles;
    [(psi + gam) / 2.0, (phi + gam) / 2.0, (phi + psi) / 2.0]
}

pub fn check_orthogonal(r: &VertexSignature, tol: f64) -> Result<OrthogonalCheck> {
    r.validate()?;
    check_orthogonal_at(r, tol, None)
}

fn check_orthogonal_at(r: &VertexSignature, tol: f64, vertex: Option<usize>) -> Result<OrthogonalCheck> {
    let z = z_vector(r);
    let scale = z.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(r.max_abs());
    if scale == 0.0 {
        return Err(Error::IndeterminateRatio { pair: (2, 7), vertex });
    }
    let f = pair_factors(&z, scale, vertex)?;
    let prod = f[0] * f[1] * f[2] * f[3];
    let residual = prod.im / prod.norm();
    let realizable = residual.abs() <= tol;

    let phi = z[3].atan2(-z[4]);
    let psi = z[5].atan2(-z[2]);
    let gam = z[6].atan2(-z[1]);
    let angles = [phi, psi, gam];
    let s1 = z[0] / z[0].hypot(z[7]);
    let positively = realizable && ((-(phi + psi + gam)).sin() - s1).abs() <= 1e-6;

    let data = orthogonal_data(r, z, angles);
    Ok(OrthogonalCheck {
        realizable,
        residual,
        angles,
        edge_angles: edge_rotation_angles(angles),
        positively,
        data,
    })
}

fn orthogonal_data(r: &VertexSignature, z: [f64; 8], angles: [f64; 3]) -> OrthogonalData {
    let g = r.0;
    let [g1, g2, g3, g4, g5, g6, g7, g8] = g;
    let j = [
        g4 + g6 + g7 - g1,
        g1 + g6 + g7 - g4,
        g1 + g4 + g7 - g6,
        g1 + g4 + g6 - g7,
        g3 + g5 + g8 - g2,
        g2 + g5 + g8 - g3,
        g2 + g3 + g8 - g5,
        g2 + g3 + g5 - g8,
    ];
    let [phi, psi, gam] = angles;
    let s = phi + psi + gam;
    let p = j[1] * phi.cos() + j[6] * phi.sin();
    let q = j[2] * psi.cos() + j[5] * psi.sin();
    let rr = j[3] * gam.cos() + j[4] * gam.sin();
    let k = j[0] * s.cos() - j[7] * s.sin();
    let hb = j[6] * phi.cos() - j[1] * phi.sin();
    let l = j[5] * psi.cos() - j[2] * psi.sin();
    let m = j[4] * gam.cos() - j[3] * gam.sin();
    let n = j[7] * s.cos() + j[0] * s.sin();
    let h = [
        (hb + l - m + n) / 4.0,
        (hb - l + m + n) / 4.0,
        (n + m + l - hb) / 4.0,
        (hb + l + m - n) / 4.0,
    ];
    OrthogonalData {
        z,
        g,
        j,
        frame_angles: [phi, psi, gam],
        p,
        q,
        r: rr,
        k,
        h_big: hb,
        l,
        m,
        n,
        h,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicCheck {
    pub realizable: bool,
    /// Vertices failing the per-vertex condition.
    pub failing_vertices: Vec<usize>,
    /// Edges whose two endpoints demand different rotations.
    pub failing_edges: Vec<usize>,
    /// One rotation angle per edge when realizable.
    pub edge_angles: Option<Vec<f64>>,
}

/// Per-vertex condition at every vertex plus agreement of the doubled
/// rotation angle `2 alpha` (mod pi) across every edge.
pub fn check_orthogonal_periodic(
    lattice: &HoneyTorus,
    sigs: &[VertexSignature],
    tol: f64,
) -> Result<PeriodicCheck> {
    if sigs.len() != lattice.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "expected {} signatures, got {}",
            lattice.vertex_count(),
            sigs.len()
        )));
    }
    let mut failing_vertices = Vec::new();
    let mut doubled = Vec::with_capacity(sigs.len());
    for (v, s) in sigs.iter().enumerate() {
        s.validate()?;
        let c = check_orthogonal_at(s, tol, Some(v))?;
        if !c.realizable {
            failing_vertices.push(v);
        }
        let z = c.data.z;
        let scale = z.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let f = pair_factors(&z, scale, Some(v))?;
        // arg(-f_k) is phi, psi, gamma for the pairs (z5,z4), (z3,z6), (z2,z7)
        let (phi, psi, gam) = (-f[2], -f[1], -f[0]);
        doubled.push([psi * gam, phi * gam, phi * psi]);
    }
    let mut failing_edges = Vec::new();
    for (e, he) in lattice.edges().iter().enumerate() {
        let t = he.kind.index();
        let (u, w) = (doubled[he.black][t], doubled[he.white][t]);
        if (u * w.conj()).im.abs() > tol * u.norm() * w.norm() {
            failing_edges.push(e);
        }
    }
    let realizable = failing_vertices.is_empty() && failing_edges.is_empty();
    let edge_angles = realizable.then(|| {
        lattice
            .edges()
            .iter()
            .map(|he| doubled[he.black][he.kind.index()].arg() / 2.0)
            .collect()
    });
    Ok(PeriodicCheck { realizable, failing_vertices, failing_edges, edge_angles })
}

/// Cayley's hyperdeterminant of the signature viewed as a 2x2x2 tensor,
/// together with the largest monomial magnitude.
pub fn bipartite_discriminant(v: &VertexSignature) -> (f64, f64) {
    let [v1, v2, v3, v4, v5, v6, v7, v8] = v.0;
    let terms = [
        v1 * v1 * v8 * v8,
        v2 * v2 * v7 * v7,
        v3 * v3 * v6 * v6,
        v4 * v4 * v5 * v5,
        -2.0 * v1 * v8 * v2 * v7,
        -2.0 * v1 * v8 * v3 * v6,
        -2.0 * v1 * v8 * v4 * v5,
        -2.0 * v2 * v7 * v3 * v6,
        -2.0 * v2 * v7 * v4 * v5,
        -2.0 * v3 * v6 * v4 * v5,
        4.0 * v1 * v4 * v6 * v7,
        4.0 * v2 * v3 * v5 * v8,
    ];
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    (terms.iter().sum(), scale)
}

pub fn check_bipartite(v: &VertexSignature, tol: f64) -> bool {
    let (d, scale) = bipartite_discriminant(v);
    d.abs() <= tol * scale.max(v.max_abs().powi(4))
}

pub fn check_realizable_general(
    x: &VertexSignature,
    y_a: &VertexSignature,
    z_b: &VertexSignature,
    w_c: &VertexSignature,
    tol: f64,
) -> bool {
    let (value, scale) = general_polynomial(x, y_a, z_b, w_c);
    value.abs() <= tol * scale
}

/// The three sums whose vanishing makes the identical-signature comparison
/// between general and orthogonal realizability degenerate.
pub fn degenerate_sums(v: &VertexSignature) -> [f64; 3] {
    let [v1, v2, v3, v4, v5, v6, v7, v8] = v.0;
    [
        v4 * v8 + v1 * v5 + v3 * v7 + v2 * v6,
        v2 * v8 + v1 * v7 + v4 * v6 + v3 * v5,
        v3 * v8 + v1 * v6 + v2 * v5 + v4 * v7,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
}

pub fn ising_signature(p: IsingParams) -> VertexSignature {
    let e = |x: f64| (2.0 * x).exp();
    let all = e(p.j1 + p.j2 + p.j3);
    VertexSignature([all, e(p.j3), e(p.j2), e(p.j1), e(p.j1), e(p.j2), e(p.j3), all])
}
