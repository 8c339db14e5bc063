//! Exact sector Pfaffians of 1x1-periodic tori by Fourier block reduction.
//!
//! Translation invariance makes `K_n` block diagonal in the plane-wave basis
//! `z^n = (-1)^theta`, `w^n = (-1)^tau`. Pairing each mode with its complex
//! conjugate gives a real orthogonal change of basis of determinant one, so
//! `Pf(K_n)` is the product of the Pfaffians of the real skew blocks.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::lattice::CellWeights;
use crate::pfaffian::{pfaffian_log, LogValue, SkewMatrix};
use crate::spectral::{kasteleyn_symbol, Mat6};

type C64 = Complex<f64>;

struct ModeGroup {
    modes: Vec<usize>,
    // rows: modes in the group, columns: real combinations
    coef: Vec<Vec<C64>>,
}

fn roots(n: usize, s: u8) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(1.0, std::f64::consts::PI * (2 * k + s as usize) as f64 / n as f64))
        .collect()
}

fn groups(n: usize, s: u8) -> Vec<ModeGroup> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s = s as usize;
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for k in 0..n {
        if seen[k] {
            continue;
        }
        // conjugate partner: 2k + s + 2kk + s = 0 mod 2n
        let kk = (0..n).find(|&j| (2 * k + s + 2 * j + s) % (2 * n) == 0).unwrap();
        seen[k] = true;
        seen[kk] = true;
        if kk == k {
            out.push(ModeGroup { modes: vec![k], coef: vec![vec![C64::new(1.0, 0.0)]] });
        } else {
            out.push(ModeGroup {
                modes: vec![k, kk],
                coef: vec![
                    vec![C64::new(h, 0.0), C64::new(0.0, -h)],
                    vec![C64::new(h, 0.0), C64::new(0.0, h)],
                ],
            });
        }
    }
    out
}

/// `Pf(K_n^{theta tau})` for the torus built from one repeated cell.
pub fn fourier_sector_pfaffian(cell: &CellWeights, n: usize, theta: u8, tau: u8) -> LogValue {
    let zs = roots(n, theta);
    let ws = roots(n, tau);
    let gx = groups(n, theta);
    let gy = groups(n, tau);
    let mut acc = LogValue::ONE;
    for x in &gx {
        for y in &gy {
            let ny = y.modes.len();
            let mut modes = Vec::new();
            let mut c2: Vec<Vec<C64>> = Vec::new();
            for (a, &ka) in x.modes.iter().enumerate() {
                for (b, &kb) in y.modes.iter().enumerate() {
                    modes.push(kasteleyn_symbol(cell, zs[ka], ws[kb]));
                    let mut row = vec![C64::new(0.0, 0.0); x.modes.len() * ny];
                    for ra in 0..x.modes.len() {
                        for rb in 0..ny {
                            row[ra * ny + rb] = x.coef[a][ra] * y.coef[b][rb];
                        }
                    }
                    c2.push(row);
                }
            }
            let m = modes.len();
            let mut blk = SkewMatrix::zeros(6 * m);
            for r in 0..m {
                for rp in 0..m {
                    for u in 0..6 {
                        for v in 0..6 {
                            let val: C64 = (0..m)
                                .map(|mi| c2[mi][r].conj() * c2[mi][rp] * modes[mi][(u, v)])
                                .sum();
                            debug_assert!(val.im.abs() < 1e-9 * (1.0 + val.re.abs()));
                            blk.data[(6 * r + u) * 6 * m + 6 * rp + v] = val.re;
                        }
                    }
                }
            }
            acc = acc.mul(pfaffian_log(&blk));
        }
    }
    acc
}

/// Entry of `(K_n^{theta tau})^{-1}` between Fisher vertex `u` of cell
/// `(x1, y1)` and vertex `v` of cell `(x2, y2)`, by the finite Fourier sum.
pub fn kasteleyn_inverse_finite(
    cell: &CellWeights,
    n: usize,
    sector: (u8, u8),
    (u, x1, y1): (usize, i64, i64),
    (v, x2, y2): (usize, i64, i64),
) -> Result<f64> {
    let (dx, dy) = ((x1 - x2) as i32, (y1 - y2) as i32);
    let mut acc = C64::new(0.0, 0.0);
    for z in roots(n, sector.0) {
        for w in roots(n, sector.1) {
            let k: Mat6 = kasteleyn_symbol(cell, z, w);
            let inv = k.try_inverse().ok_or_else(|| {
                Error::InconsistentWeights(format!("sector {sector:?} is singular at n = {n}"))
            })?;
            acc += z.powi(dx) * w.powi(dy) * inv[(u, v)];
        }
    }
    Ok(acc.re / (n * n) as f64)
}
