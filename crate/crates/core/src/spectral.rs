//! Characteristic polynomial of the 1x1 Fisher cell, spectral-curve
//! classification, free energy and infinite-volume local statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, Matrix6};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::LocalConfig;
use crate::error::{Error, Result};
use crate::lattice::{cell_template, CellWeights, Color, FisherTorus};
use crate::pfaffian::{pfaffian, SkewMatrix};
use crate::reduction::ReducedCell;
use crate::signatures::mat_vec;

pub type C64 = Complex<f64>;
pub type Mat6 = Matrix6<C64>;

pub const DEFAULT_GRID: usize = 256;

/// `K(z, w)`: each template edge contributes `w z^dx w^dy` at `(from, to)`
/// and its negative conjugate-phase at `(to, from)`.
pub fn kasteleyn_symbol(cell: &CellWeights, z: C64, w: C64) -> Mat6 {
    let mut k = Mat6::zeros();
    for e in cell_template(cell.black, cell.white) {
        let ph = z.powi(e.dx as i32) * w.powi(e.dy as i32);
        k[(e.from, e.to)] += ph * e.weight;
        k[(e.to, e.from)] -= ph.inv() * e.weight;
    }
    k
}

/// `det K(z, w)`.
pub fn char_poly_det(cell: &CellWeights, z: C64, w: C64) -> C64 {
    kasteleyn_symbol(cell, z, w).determinant()
}

/// `K_n(z, w)` of a whole torus: an edge crossing a seam picks up `z` or
/// `w` to the power of its cell displacement, as in [`kasteleyn_symbol`].
pub fn torus_symbol(f: &FisherTorus, z: C64, w: C64) -> DMatrix<C64> {
    let h = f.lattice();
    let m = f.vertex_count();
    let mut k = DMatrix::zeros(m, m);
    let step = |a: usize, b: usize| if b > a { -1 } else { 1 };
    for e in f.edges() {
        let (p, q) = (h.vertex(e.from / 3), h.vertex(e.to / 3));
        let mut ph = C64::new(1.0, 0.0);
        if e.crosses_x {
            ph *= z.powi(step(p.i, q.i));
        }
        if e.crosses_y {
            ph *= w.powi(step(p.j, q.j));
        }
        k[(e.from, e.to)] += ph * e.weight;
        k[(e.to, e.from)] -= ph.inv() * e.weight;
    }
    k
}

/// The `n` complex `n`-th roots of `z`.
pub fn nth_roots(z: C64, n: usize) -> Vec<C64> {
    let (r, t) = z.to_polar();
    let r = r.powf(1.0 / n as f64);
    (0..n).map(|k| C64::from_polar(r, (t + 2.0 * PI * k as f64) / n as f64)).collect()
}

/// Closed form of `det K(z, w)` in the products `(a, b, c)`.
pub fn char_poly(products: [f64; 3], z: C64, w: C64) -> f64 {
    let [a, b, c] = products;
    let s = |x: C64| (x + x.inv()).re;
    s(z) * (a * b - c) + s(w) * (a * c - b) + s(z / w) * (b * c - a) + a * a + b * b + c * c + 1.0
}

/// `Q(theta, phi) = P(e^{i theta}, e^{i phi})`.
pub fn q_form(products: [f64; 3], theta: f64, phi: f64) -> f64 {
    let [a, b, c] = products;
    2.0 * theta.cos() * (a * b - c)
        + 2.0 * phi.cos() * (a * c - b)
        + 2.0 * (theta - phi).cos() * (b * c - a)
        + a * a
        + b * b
        + c * c
        + 1.0
}

/// True when one of `ab - c`, `ac - b`, `bc - a` vanishes.
pub fn is_degenerate(products: [f64; 3]) -> bool {
    let [a, b, c] = products;
    let scale = 1.0 + a.abs() + b.abs() + c.abs();
    [a * b - c, a * c - b, b * c - a].iter().any(|x| x.abs() <= 1e-12 * scale * scale)
}

pub fn discriminant(products: [f64; 3]) -> f64 {
    let [a, b, c] = products;
    64.0 * a * b * c * (a + b - c - 1.0) * (a + b + c + 1.0) * (a + 1.0 - b - c) * (a + c - b - 1.0)
}

fn scale(products: [f64; 3]) -> f64 {
    let [a, b, c] = products;
    1.0 + a * a + b * b + c * c + 2.0 * ((a * b - c).abs() + (a * c - b).abs() + (b * c - a).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Disjoint,
    /// Real node at `(z, w)` with `z, w` in `{1, -1}`.
    Node { z: i8, w: i8 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralData {
    pub products: [f64; 3],
    pub classification: Classification,
    pub degenerate: bool,
    pub discriminant: f64,
    /// `P` at `(1,1), (-1,1), (1,-1), (-1,-1)`.
    pub real_points: [f64; 4],
}

const REAL_POINTS: [(i8, i8); 4] = [(1, 1), (-1, 1), (1, -1), (-1, -1)];

pub fn classify_spectral_curve(products: [f64; 3]) -> Result<SpectralData> {
    if products.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("products must be finite".into()));
    }
    let s = scale(products);
    let at = |z: i8, w: i8| q_form(products, if z < 0 { PI } else { 0.0 }, if w < 0 { PI } else { 0.0 });
    let real_points = REAL_POINTS.map(|(z, w)| at(z, w));
    let zeros: Vec<(i8, i8)> =
        REAL_POINTS.iter().zip(&real_points).filter(|(_, p)| p.abs() < 1e-12 * s).map(|(&zw, _)| zw).collect();
    if zeros.len() > 1 {
        return Err(Error::InconsistentWeights(format!("P vanishes at {} real points", zeros.len())));
    }
    let g = 64;
    for k in 0..g {
        for l in 0..g {
            let q = q_form(products, 2.0 * PI * (k as f64 + 0.5) / g as f64, 2.0 * PI * (l as f64 + 0.5) / g as f64);
            if q < -1e-10 * s {
                return Err(Error::InconsistentWeights(format!("P = {q:.3e} < 0 on the unit torus")));
            }
        }
    }
    let classification = match zeros.first() {
        Some(&(z, w)) => Classification::Node { z, w },
        None => Classification::Disjoint,
    };
    Ok(SpectralData {
        products,
        classification,
        degenerate: is_degenerate(products),
        discriminant: discriminant(products),
        real_points,
    })
}

/// Local quadratic form of `Q` at a node, `Q ~ alpha x^2 + beta x y + gamma y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NodeConditions {
    pub value: f64,
    pub gradient: [f64; 2],
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `beta^2 - 4 alpha gamma`.
    pub hessian_discriminant: f64,
    pub satisfied: bool,
}

/// Central differences with step `1e-5` at `(theta, phi)`.
pub fn node_conditions(products: [f64; 3], theta: f64, phi: f64) -> NodeConditions {
    let h = 1e-5;
    let q = |x: f64, y: f64| q_form(products, theta + x, phi + y);
    let q0 = q(0.0, 0.0);
    let gradient = [(q(h, 0.0) - q(-h, 0.0)) / (2.0 * h), (q(0.0, h) - q(0.0, -h)) / (2.0 * h)];
    let qxx = (q(h, 0.0) - 2.0 * q0 + q(-h, 0.0)) / (h * h);
    let qyy = (q(0.0, h) - 2.0 * q0 + q(0.0, -h)) / (h * h);
    let qxy = (q(h, h) - q(h, -h) - q(-h, h) + q(-h, -h)) / (4.0 * h * h);
    let (alpha, beta, gamma) = (qxx / 2.0, qxy, qyy / 2.0);
    let hd = beta * beta - 4.0 * alpha * gamma;
    let s = scale(products);
    let satisfied = q0.abs() < 1e-12 * s && gradient.iter().all(|g| g.abs() < 1e-6 * s) && hd <= 1e-5 * s * s;
    NodeConditions { value: q0, gradient, alpha, beta, gamma, hessian_discriminant: hd, satisfied }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreeEnergy {
    pub value: f64,
    /// `|F(grid) - F(grid / 2)|`.
    pub error_estimate: f64,
    pub grid: usize,
    pub classification: Classification,
}

fn node_angles(c: Classification) -> Option<(f64, f64)> {
    match c {
        Classification::Disjoint => None,
        Classification::Node { z, w } => Some((if z < 0 { PI } else { 0.0 }, if w < 0 { PI } else { 0.0 })),
    }
}

fn log_q(products: [f64; 3], s: f64, theta: f64, phi: f64) -> Result<f64> {
    let q = q_form(products, theta, phi);
    if q < -1e-10 * s {
        return Err(Error::InconsistentWeights(format!("P = {q:.3e} < 0 at ({theta:.6}, {phi:.6})")));
    }
    Ok(q.max(f64::MIN_POSITIVE).ln())
}

fn wrap_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

// Integral of log Q over a square cell, splitting cells that touch the node.
fn refine(products: [f64; 3], s: f64, lo: (f64, f64), h: f64, node: (f64, f64), level: u32) -> Result<f64> {
    let touches = |x: f64, y: f64| {
        let c = (x + h / 2.0, y + h / 2.0);
        wrap_dist(c.0, node.0) <= h / 2.0 + 1e-12 && wrap_dist(c.1, node.1) <= h / 2.0 + 1e-12
    };
    if level == 0 || !touches(lo.0, lo.1) {
        return Ok(h * h * log_q(products, s, lo.0 + h / 2.0, lo.1 + h / 2.0)?);
    }
    let hh = h / 2.0;
    let mut acc = 0.0;
    for (dx, dy) in [(0.0, 0.0), (hh, 0.0), (0.0, hh), (hh, hh)] {
        acc += refine(products, s, (lo.0 + dx, lo.1 + dy), hh, node, level - 1)?;
    }
    Ok(acc)
}

/// `(1 / 4 pi^2) * integral of log P` on a `g x g` midpoint grid.
fn mean_log_p(products: [f64; 3], g: usize, node: Option<(f64, f64)>) -> Result<f64> {
    let s = scale(products);
    let h = 2.0 * PI / g as f64;
    let in_block = |k: usize, x: f64| wrap_dist((k as f64 + 0.5) * h, x) < 2.0 * h;
    let rows: Vec<f64> = (0..g)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut acc = 0.0;
            for l in 0..g {
                let v = match node {
                    Some(nd) if in_block(k, nd.0) && in_block(l, nd.1) => {
                        refine(products, s, (k as f64 * h, l as f64 * h), h, nd, 4)? / (h * h)
                    }
                    _ => log_q(products, s, (k as f64 + 0.5) * h, (l as f64 + 0.5) * h)?,
                };
                acc += v;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(rows.iter().sum::<f64>() / (g * g) as f64)
}

/// Free energy per fundamental domain, half the torus average of `log P`.
pub fn free_energy(products: [f64; 3], grid: usize) -> Result<FreeEnergy> {
    if grid < 8 || grid % 4 != 0 {
        return Err(Error::InvalidParameter(format!("grid must be a multiple of 4 and at least 8, got {grid}")));
    }
    let data = classify_spectral_curve(products)?;
    let node = node_angles(data.classification);
    let fine = 0.5 * mean_log_p(products, grid, node)?;
    let coarse = 0.5 * mean_log_p(products, grid / 2, node)?;
    Ok(FreeEnergy { value: fine, error_estimate: (fine - coarse).abs(), grid, classification: data.classification })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InverseKasteleynEntry {
    pub u: usize,
    pub v: usize,
    pub offset: (i64, i64),
    pub value: f64,
}

/// `K^{-1}((u, x1, y1), (v, x2, y2))` of the infinite Fisher graph for a set
/// of offsets `(x1 - x2, y1 - y2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseTable {
    pub grid: usize,
    entries: BTreeMap<(i64, i64), [[f64; 6]; 6]>,
}

impl InverseTable {
    pub fn get(&self, u: usize, v: usize, offset: (i64, i64)) -> Option<f64> {
        self.entries.get(&offset).map(|m| m[u][v])
    }
}

pub fn inverse_table(cell: &CellWeights, offsets: &[(i64, i64)], grid: usize) -> Result<InverseTable> {
    if grid < 2 || grid % 2 != 0 {
        return Err(Error::InvalidParameter(format!("grid must be even and at least 2, got {grid}")));
    }
    let offs: Vec<(i64, i64)> = offsets.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let h = 2.0 * PI / grid as f64;
    let zero = || vec![Mat6::zeros(); offs.len()];
    let rows: Vec<Vec<Mat6>> = (0..grid)
        .into_par_iter()
        .map(|k| -> Result<Vec<Mat6>> {
            let z = C64::from_polar(1.0, (k as f64 + 0.5) * h);
            let mut acc = zero();
            for l in 0..grid {
                let w = C64::from_polar(1.0, (l as f64 + 0.5) * h);
                let inv = kasteleyn_symbol(cell, z, w)
                    .try_inverse()
                    .ok_or_else(|| Error::InconsistentWeights("K(z, w) is singular on the grid".into()))?;
                for (a, &(dx, dy)) in acc.iter_mut().zip(&offs) {
                    *a += inv * (z.powi(dx as i32) * w.powi(dy as i32));
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = zero();
    for r in rows {
        for (t, x) in total.iter_mut().zip(r) {
            *t += x;
        }
    }
    let norm = (grid * grid) as f64;
    let mut entries = BTreeMap::new();
    for (o, m) in offs.into_iter().zip(total) {
        let mut out = [[0.0; 6]; 6];
        for (u, row) in out.iter_mut().enumerate() {
            for (v, x) in row.iter_mut().enumerate() {
                let val = m[(u, v)] / norm;
                if val.im.abs() > 1e-9 * (1.0 + val.re.abs()) {
                    return Err(Error::InconsistentWeights(format!(
                        "inverse entry ({u}, {v}) at offset {o:?} has imaginary part {:.3e}",
                        val.im
                    )));
                }
                *x = val.re;
            }
        }
        entries.insert(o, out);
    }
    Ok(InverseTable { grid, entries })
}

pub fn k_inverse(cell: &CellWeights, u: usize, v: usize, offset: (i64, i64), grid: usize) -> Result<InverseKasteleynEntry> {
    if u >= 6 || v >= 6 {
        return Err(Error::InvalidParameter(format!("cell labels must be below 6, got ({u}, {v})")));
    }
    if is_degenerate(cell.products()) && cell.products().iter().all(|&p| (p - 1.0).abs() < 1e-12) {
        return Err(Error::InconsistentWeights("constant characteristic polynomial".into()));
    }
    let t = inverse_table(cell, &[offset], grid)?;
    Ok(InverseKasteleynEntry { u, v, offset, value: t.get(u, v, offset).unwrap() })
}

/// A vertex of the infinite lattice conditioned on a local configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InfiniteTarget {
    pub cell: (i64, i64),
    pub color: Color,
    pub config: LocalConfig,
}

/// Probability that every target vertex is in its configuration, in the
/// infinite-volume limit of the reduced model.
///
/// The Fisher weights are first gauged to the positive weights `sqrt(a)`,
/// `sqrt(b)`, `sqrt(c)` on both triangles; each target gadget is replaced by
/// the matchgate of its restricted signature, expanded over local dimer
/// patterns, and each pattern is weighted by a minor of the infinite
/// inverse Kasteleyn matrix.
pub fn local_probability_infinite(cell: &ReducedCell, targets: &[InfiniteTarget], grid: usize) -> Result<f64> {
    if targets.is_empty() {
        return Ok(1.0);
    }
    for (i, a) in targets.iter().enumerate() {
        if targets[..i].iter().any(|b| b.cell == a.cell && b.color == a.color) {
            return Err(Error::InvalidInput("targets must be distinct vertices".into()));
        }
    }
    let cw = cell.cell_weights();
    let prod = cw.products();
    if prod.iter().any(|&p| p <= 0.0) {
        return Err(Error::InconsistentWeights(format!("products {prod:?} are not all positive")));
    }
    let t = prod.map(f64::sqrt);
    let [a1, b1, c1] = cw.black;
    let g1 = C64::new((t[1] / b1) * (t[2] / c1) * (a1 / t[0]), 0.0).sqrt();
    let g2 = (t[2] / c1) / g1;
    let g3 = (t[1] / b1) / g1;
    let gauge = [g1, g2, g3, g1.inv(), g2.inv(), g3.inv()];

    let mut offsets = Vec::new();
    for a in targets {
        for b in targets {
            offsets.push((a.cell.0 - b.cell.0, a.cell.1 - b.cell.1));
        }
    }
    let table = inverse_table(&CellWeights { black: t, white: t }, &offsets, grid)?;
    type Label = ((i64, i64), usize);
    let kinv = |p: Label, q: Label| table.get(p.1, q.1, (p.0 .0 - q.0 .0, p.0 .1 - q.0 .1)).unwrap();
    let pf_abs = |labels: &[Label]| -> Result<f64> {
        if labels.len() % 2 == 1 {
            return Ok(0.0);
        }
        let m = labels.len();
        let mut k = SkewMatrix::zeros(m);
        for i in 0..m {
            for j in i + 1..m {
                k.set(i, j, kinv(labels[i], labels[j]));
            }
        }
        Ok(pfaffian(&k)?.abs())
    };

    let mods: Vec<[C64; 8]> = targets
        .iter()
        .map(|tg| {
            let ci = tg.color.index();
            let mut e = [0.0; 8];
            e[tg.config.index()] = cell.signature(tg.color).0[tg.config.index()];
            let d = cell.triangle(tg.color).d;
            let m = mat_vec(&cell.transform(tg.color), &e);
            std::array::from_fn(|p| {
                let mut x = C64::new(m[p] / d, 0.0);
                for k in 0..3 {
                    if p >> (2 - k) & 1 == 0 {
                        x *= gauge[3 * ci + k];
                    }
                }
                x
            })
        })
        .collect();

    let mut total = C64::new(0.0, 0.0);
    let count = targets.len();
    for code in 0..8usize.pow(count as u32) {
        let pats: Vec<usize> = (0..count).map(|k| code / 8usize.pow(k as u32) % 8).collect();
        let coef: C64 = pats.iter().enumerate().map(|(k, &p)| mods[k][p]).product();
        if coef.norm() < 1e-15 {
            continue;
        }
        let mut base: Vec<Label> = Vec::new();
        let mut choices: Vec<Vec<(f64, Vec<Label>)>> = Vec::new();
        for (tg, &p) in targets.iter().zip(&pats) {
            let ci = tg.color.index();
            let bit = |k: usize| p >> (2 - k) & 1 == 1;
            base.extend((0..3).filter(|&k| !bit(k)).map(|k| (tg.cell, 3 * ci + k)));
            let ext: Vec<usize> = (0..3).filter(|&k| bit(k)).collect();
            let mut opts = vec![(1.0, Vec::new())];
            for i in 0..ext.len() {
                for j in i + 1..ext.len() {
                    let opp = 3 - ext[i] - ext[j];
                    opts.push((-t[opp], vec![(tg.cell, 3 * ci + ext[i]), (tg.cell, 3 * ci + ext[j])]));
                }
            }
            choices.push(opts);
        }
        let mut r = 0.0;
        let sizes: Vec<usize> = choices.iter().map(Vec::len).collect();
        let combos: usize = sizes.iter().product();
        for mut idx in 0..combos {
            let mut w = 1.0;
            let mut labels = base.clone();
            for (opts, &sz) in choices.iter().zip(&sizes) {
                let (wt, extra) = &opts[idx % sz];
                idx /= sz;
                w *= wt;
                labels.extend_from_slice(extra);
            }
            r += w * pf_abs(&labels)?;
        }
        total += coef * r;
    }
    if total.im.abs() > 1e-8 * (1.0 + total.re.abs()) {
        return Err(Error::InconsistentWeights(format!("probability has imaginary part {:.3e}", total.im)));
    }
    Ok(total.re)
}
